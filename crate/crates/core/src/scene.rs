//! JSON scene descriptions: a base manifold, a bundle over it and a
//! distributional section in tensor form.
//!
//! ```json
//! {
//!   "manifold": { "kind": "circle", "n": 128 },
//!   "bundle": { "kind": "mobius" },
//!   "terms": [
//!     { "section": { "generator": 0 },
//!       "coefficient": { "atoms": [ { "kind": "delta", "node": 32, "order": 1, "weight": 1.0 } ] } }
//!   ]
//! }
//! ```
//!
//! A missing `n` falls back to the run resolution. Functions are either a
//! list of node values or an expression object (`const`, `sin`, `cos`, `poly`,
//! `sum`) in one coordinate.

use std::path::Path;
use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::bundles::{self, ProjectorBundle};
use crate::distributions::{Atom, ScalarDistribution};
use crate::error::{Error, Result};
use crate::geometry::{self, DiscreteManifold, GridFunction};
use crate::sections::{frame_generators, Section};
use crate::vdist::TensorRep;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ManifoldSpec {
    Circle {
        #[serde(default)]
        n: Option<usize>,
    },
    Interval {
        #[serde(default)]
        n: Option<usize>,
    },
    Product { factors: Vec<ManifoldSpec> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BundleSpec {
    Trivial { rank: usize },
    Mobius,
    Sum { left: Box<BundleSpec>, right: Box<BundleSpec> },
    Tensor { left: Box<BundleSpec>, right: Box<BundleSpec> },
    /// `left` lives on the first product factor, `right` on the second.
    External { left: Box<BundleSpec>, right: Box<BundleSpec> },
    Complement { of: Box<BundleSpec> },
    Dual { of: Box<BundleSpec> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FunctionSpec {
    Values(Vec<f64>),
    Expr(Expr),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Expr {
    Const {
        value: f64,
    },
    Sin {
        #[serde(default = "one")]
        freq: f64,
        #[serde(default = "one")]
        amp: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        axis: usize,
    },
    Cos {
        #[serde(default = "one")]
        freq: f64,
        #[serde(default = "one")]
        amp: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        axis: usize,
    },
    /// `Σ_k coeffs[k] · x^k`.
    Poly {
        coeffs: Vec<f64>,
        #[serde(default)]
        axis: usize,
    },
    Sum {
        terms: Vec<FunctionSpec>,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AtomSpec {
    Regular {
        f: FunctionSpec,
    },
    Delta {
        node: usize,
        #[serde(default)]
        order: u8,
        #[serde(default = "one")]
        weight: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionSpec {
    pub atoms: Vec<AtomSpec>,
}

/// A frame generator `e_i`, or an ambient field projected into the bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum SectionSpec {
    Generator(usize),
    Ambient(Vec<FunctionSpec>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub section: SectionSpec,
    pub coefficient: DistributionSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub manifold: ManifoldSpec,
    pub bundle: BundleSpec,
    #[serde(default)]
    pub terms: Vec<TermSpec>,
}

/// A scene with everything built.
#[derive(Debug, Clone)]
pub struct Scene {
    pub spec: SceneSpec,
    pub base: Arc<DiscreteManifold>,
    pub bundle: Arc<ProjectorBundle>,
    pub vdist: TensorRep,
}

impl SceneSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn build(&self, resolution: usize) -> Result<Scene> {
        let base = Arc::new(self.manifold.build(resolution)?);
        let bundle = Arc::new(self.bundle.build(&self.manifold, &base, resolution)?);
        let terms = self
            .terms
            .iter()
            .map(|t| Ok((t.section.build(&bundle)?, t.coefficient.build(&base)?)))
            .collect::<Result<Vec<_>>>()?;
        let vdist = TensorRep::new(&bundle, terms)?;
        Ok(Scene { spec: self.clone(), base, bundle, vdist })
    }
}

impl ManifoldSpec {
    pub fn build(&self, resolution: usize) -> Result<DiscreteManifold> {
        match self {
            Self::Circle { n } => geometry::make_circle(n.unwrap_or(resolution)),
            Self::Interval { n } => geometry::make_interval(n.unwrap_or(resolution)),
            Self::Product { factors } => match factors.as_slice() {
                [a, b] => geometry::product(&a.build(resolution)?, &b.build(resolution)?),
                _ => Err(Error::Scene(format!("a product needs two factors, got {}", factors.len()))),
            },
        }
    }
}

impl BundleSpec {
    pub fn build(&self, manifold: &ManifoldSpec, base: &Arc<DiscreteManifold>, resolution: usize) -> Result<ProjectorBundle> {
        let sub = |b: &BundleSpec| b.build(manifold, base, resolution);
        match self {
            Self::Trivial { rank } => Ok(bundles::trivial_bundle(base, *rank)),
            Self::Mobius => bundles::mobius(base),
            Self::Sum { left, right } => bundles::whitney_sum(&sub(left)?, &sub(right)?),
            Self::Tensor { left, right } => bundles::tensor(&sub(left)?, &sub(right)?),
            Self::Complement { of } => Ok(bundles::complement(&sub(of)?)),
            Self::Dual { of } => Ok(bundles::dual(&sub(of)?)),
            Self::External { left, right } => {
                let ManifoldSpec::Product { factors } = manifold else {
                    return Err(Error::Scene("an external tensor needs a product manifold".into()));
                };
                let [a, b] = factors.as_slice() else {
                    return Err(Error::Scene("a product needs two factors".into()));
                };
                let (ma, mb) = (Arc::new(a.build(resolution)?), Arc::new(b.build(resolution)?));
                let e = left.build(a, &ma, resolution)?;
                let f = right.build(b, &mb, resolution)?;
                bundles::external_tensor(&e, &f)
            }
        }
    }
}

impl Expr {
    fn eval(&self, x: &[f64]) -> Result<f64> {
        let coord = |axis: usize| {
            x.get(axis).copied().ok_or_else(|| Error::Scene(format!("axis {axis} out of range for a {}-d base", x.len())))
        };
        Ok(match self {
            Self::Const { value } => *value,
            Self::Sin { freq, amp, phase, axis } => amp * (freq * coord(*axis)? + phase).sin(),
            Self::Cos { freq, amp, phase, axis } => amp * (freq * coord(*axis)? + phase).cos(),
            Self::Poly { coeffs, axis } => {
                let t = coord(*axis)?;
                coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
            }
            Self::Sum { terms } => {
                let mut acc = 0.0;
                for term in terms {
                    acc += match term {
                        FunctionSpec::Expr(e) => e.eval(x)?,
                        FunctionSpec::Values(_) => {
                            return Err(Error::Scene("value lists cannot appear inside a sum".into()))
                        }
                    };
                }
                acc
            }
        })
    }
}

impl FunctionSpec {
    pub fn build(&self, base: &Arc<DiscreteManifold>) -> Result<GridFunction> {
        match self {
            Self::Values(v) => GridFunction::new(base, v.clone()),
            Self::Expr(e) => {
                let values = (0..base.len()).map(|i| e.eval(base.node(i))).collect::<Result<_>>()?;
                GridFunction::new(base, values)
            }
        }
    }
}

impl DistributionSpec {
    pub fn build(&self, base: &Arc<DiscreteManifold>) -> Result<ScalarDistribution> {
        let atoms = self
            .atoms
            .iter()
            .map(|a| {
                Ok(match a {
                    AtomSpec::Regular { f } => Atom::Regular(f.build(base)?),
                    AtomSpec::Delta { node, order, weight } => Atom::PointMass { node: *node, order: *order, weight: *weight },
                })
            })
            .collect::<Result<_>>()?;
        ScalarDistribution::new(base, atoms)
    }
}

impl SectionSpec {
    pub fn build(&self, bundle: &Arc<ProjectorBundle>) -> Result<Section> {
        match self {
            Self::Generator(i) => {
                let mut gens = frame_generators(bundle);
                if *i >= gens.len() {
                    return Err(Error::Scene(format!("generator {i} of a bundle with ambient dimension {}", gens.len())));
                }
                Ok(gens.swap_remove(*i))
            }
            Self::Ambient(fields) => {
                if fields.len() != bundle.ambient_dim() {
                    return Err(Error::LengthMismatch { expected: bundle.ambient_dim(), got: fields.len() });
                }
                let comps = fields.iter().map(|f| f.build(bundle.base())).collect::<Result<Vec<_>>>()?;
                let raw = (0..bundle.base().len())
                    .map(|i| DVector::from_iterator(comps.len(), comps.iter().map(|c| c.value(i))))
                    .collect();
                Section::project(bundle, raw)
            }
        }
    }
}
