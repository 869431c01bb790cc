//! Vector bundles realized as fields of orthogonal projectors inside a trivial
//! ambient bundle `M × ℝⁿ`.
//!
//! Every bundle arrives embedded: its complement is `I − P`, the canonical
//! injection and projection into the ambient bundle are both `P`, and the
//! functors `*`, `⊕`, `⊗`, `⊠` act by matrix algebra on the projector field.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::{self, DiscreteManifold};

pub const PROJECTOR_TOL: f64 = 1e-10;
pub const RANK_TOL: f64 = 1e-8;
/// Default Lipschitz constant for the adjacent-node smoothness check.
pub const DEFAULT_SMOOTHNESS: f64 = 10.0;

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

#[derive(Debug, Clone)]
pub struct ProjectorBundle {
    base: Arc<DiscreteManifold>,
    ambient: usize,
    rank: usize,
    proj: Vec<DMatrix<f64>>,
    dual: bool,
}

impl ProjectorBundle {
    /// Validates idempotency, symmetry, constant rank and smoothness of the
    /// projector field.
    pub fn from_field(base: &Arc<DiscreteManifold>, proj: Vec<DMatrix<f64>>) -> Result<Self> {
        Self::from_field_with(base, proj, DEFAULT_SMOOTHNESS)
    }

    pub fn from_field_with(base: &Arc<DiscreteManifold>, proj: Vec<DMatrix<f64>>, smoothness: f64) -> Result<Self> {
        if proj.len() != base.len() {
            return Err(Error::LengthMismatch { expected: base.len(), got: proj.len() });
        }
        let ambient = proj.first().map_or(0, |p| p.nrows());
        let mut rank = None;
        for (node, p) in proj.iter().enumerate() {
            if p.nrows() != ambient || p.ncols() != ambient {
                return Err(Error::InvalidProjector(format!("node {node}: shape {:?}", p.shape())));
            }
            let idem = max_abs(&(p * p - p));
            if idem > PROJECTOR_TOL {
                return Err(Error::InvalidProjector(format!("node {node}: ‖P²−P‖ = {idem:.3e}")));
            }
            let asym = max_abs(&(p - p.transpose()));
            if asym > PROJECTOR_TOL {
                return Err(Error::InvalidProjector(format!("node {node}: ‖P−Pᵀ‖ = {asym:.3e}")));
            }
            let tr = p.trace();
            let r = *rank.get_or_insert(tr.round().max(0.0) as usize);
            if (tr - r as f64).abs() > RANK_TOL {
                return Err(Error::InvalidProjector(format!("node {node}: trace {tr} but rank {r}")));
            }
        }
        for (a, b, h) in base.edges() {
            let jump = max_abs(&(&proj[b] - &proj[a]));
            if jump > smoothness * h {
                return Err(Error::InvalidProjector(format!(
                    "nodes {a}->{b}: jump {jump:.3e} exceeds {smoothness}·h"
                )));
            }
        }
        Ok(Self { base: Arc::clone(base), ambient, rank: rank.unwrap_or(0), proj, dual: false })
    }

    pub fn base(&self) -> &Arc<DiscreteManifold> {
        &self.base
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn projector(&self, node: usize) -> &DMatrix<f64> {
        &self.proj[node]
    }

    pub fn projectors(&self) -> &[DMatrix<f64>] {
        &self.proj
    }

    pub fn is_dual(&self) -> bool {
        self.dual
    }

    /// Same base, ambient space and projector field, ignoring the dual tag.
    pub fn same_fibers(&self, other: &Self) -> bool {
        self.ambient == other.ambient
            && *self.base == *other.base
            && self.proj.iter().zip(&other.proj).all(|(a, b)| max_abs(&(a - b)) <= 1e-12)
    }

    /// `other` is the dual of `self`, so sections of the two may be contracted.
    pub fn is_dual_of(&self, other: &Self) -> bool {
        self.dual != other.dual && self.same_fibers(other)
    }

    pub fn check_same(&self, other: &Self) -> Result<()> {
        if self.dual != other.dual || !self.same_fibers(other) {
            return Err(Error::BundleMismatch("expected the same bundle".into()));
        }
        Ok(())
    }

    pub fn check_dual_of(&self, other: &Self) -> Result<()> {
        if !self.is_dual_of(other) {
            return Err(Error::BundleMismatch("contraction needs a bundle and its dual".into()));
        }
        Ok(())
    }

    fn derived(&self, proj: Vec<DMatrix<f64>>, dual: bool) -> Self {
        let ambient = proj.first().map_or(0, |p| p.nrows());
        let rank = proj.first().map_or(0, |p| p.trace().round().max(0.0) as usize);
        Self { base: Arc::clone(&self.base), ambient, rank, proj, dual }
    }
}

impl PartialEq for ProjectorBundle {
    fn eq(&self, other: &Self) -> bool {
        self.dual == other.dual && self.same_fibers(other)
    }
}

pub fn trivial_bundle(m: &Arc<DiscreteManifold>, rank: usize) -> ProjectorBundle {
    ProjectorBundle {
        base: Arc::clone(m),
        ambient: rank,
        rank,
        proj: vec![DMatrix::identity(rank, rank); m.len()],
        dual: false,
    }
}

/// Unit vector spanning the Möbius line at angle `theta`; defined up to sign.
pub fn mobius_direction(theta: f64) -> [f64; 2] {
    [(theta / 2.0).cos(), (theta / 2.0).sin()]
}

pub fn mobius(m: &Arc<DiscreteManifold>) -> Result<ProjectorBundle> {
    if m.dim() != 1 || !m.is_periodic() {
        return Err(Error::NotPeriodic);
    }
    let proj = (0..m.len())
        .map(|i| {
            let [c, s] = mobius_direction(m.node(i)[0]);
            DMatrix::from_row_slice(2, 2, &[c * c, c * s, s * c, s * s])
        })
        .collect();
    ProjectorBundle::from_field(m, proj)
}

pub fn complement(e: &ProjectorBundle) -> ProjectorBundle {
    let n = e.ambient;
    let id = DMatrix::<f64>::identity(n, n);
    e.derived(e.proj.iter().map(|p| &id - p).collect(), e.dual)
}

pub fn dual(e: &ProjectorBundle) -> ProjectorBundle {
    e.derived(e.proj.iter().map(|p| p.transpose()).collect(), !e.dual)
}

fn same_variance(e: &ProjectorBundle, f: &ProjectorBundle) -> Result<()> {
    if *e.base != *f.base {
        return Err(Error::BaseMismatch);
    }
    if e.dual != f.dual {
        return Err(Error::BundleMismatch("cannot combine a bundle with a dual bundle".into()));
    }
    Ok(())
}

fn block_diag(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, m) = (a.nrows(), b.nrows());
    let mut out = DMatrix::zeros(n + m, n + m);
    out.view_mut((0, 0), (n, n)).copy_from(a);
    out.view_mut((n, n), (m, m)).copy_from(b);
    out
}

pub fn whitney_sum(e: &ProjectorBundle, f: &ProjectorBundle) -> Result<ProjectorBundle> {
    same_variance(e, f)?;
    Ok(e.derived(e.proj.iter().zip(&f.proj).map(|(a, b)| block_diag(a, b)).collect(), e.dual))
}

pub fn tensor(e: &ProjectorBundle, f: &ProjectorBundle) -> Result<ProjectorBundle> {
    same_variance(e, f)?;
    Ok(e.derived(e.proj.iter().zip(&f.proj).map(|(a, b)| a.kronecker(b)).collect(), e.dual))
}

/// `E ⊠ F` over `M × N`: the projector at `(x, y)` is `P_E(x) ⊗ P_F(y)`.
pub fn external_tensor(e: &ProjectorBundle, f: &ProjectorBundle) -> Result<ProjectorBundle> {
    if e.dual != f.dual {
        return Err(Error::BundleMismatch("cannot combine a bundle with a dual bundle".into()));
    }
    let base = Arc::new(geometry::product(&e.base, &f.base)?);
    let mut proj = Vec::with_capacity(base.len());
    for pe in &e.proj {
        for pf in &f.proj {
            proj.push(pe.kronecker(pf));
        }
    }
    let ambient = e.ambient * f.ambient;
    let rank = e.rank * f.rank;
    Ok(ProjectorBundle { base, ambient, rank, proj, dual: e.dual })
}

/// A vector bundle homomorphism covering the identity, stored as ambient
/// matrices `A(x)` with `A = P_target · A · P_source`.
#[derive(Debug, Clone)]
pub struct BundleMorphism {
    source: Arc<ProjectorBundle>,
    target: Arc<ProjectorBundle>,
    maps: Vec<DMatrix<f64>>,
}

impl BundleMorphism {
    pub fn new(source: &Arc<ProjectorBundle>, target: &Arc<ProjectorBundle>, maps: Vec<DMatrix<f64>>) -> Result<Self> {
        if *source.base != *target.base {
            return Err(Error::BaseMismatch);
        }
        if maps.len() != source.base.len() {
            return Err(Error::LengthMismatch { expected: source.base.len(), got: maps.len() });
        }
        for (node, a) in maps.iter().enumerate() {
            if a.shape() != (target.ambient, source.ambient) {
                return Err(Error::BundleMismatch(format!("node {node}: morphism shape {:?}", a.shape())));
            }
            let deviation = max_abs(&(target.projector(node) * a * source.projector(node) - a));
            if deviation > PROJECTOR_TOL {
                return Err(Error::NotFiberPreserving { node, deviation });
            }
        }
        Ok(Self { source: Arc::clone(source), target: Arc::clone(target), maps })
    }

    /// Builds `P_target · A(x) · P_source` from an arbitrary ambient matrix field.
    pub fn compressed(
        source: &Arc<ProjectorBundle>,
        target: &Arc<ProjectorBundle>,
        raw: impl Fn(usize) -> DMatrix<f64>,
    ) -> Result<Self> {
        let maps = (0..source.base.len())
            .map(|i| target.projector(i) * raw(i) * source.projector(i))
            .collect();
        Self::new(source, target, maps)
    }

    pub fn identity(e: &Arc<ProjectorBundle>) -> Self {
        Self { source: Arc::clone(e), target: Arc::clone(e), maps: e.proj.clone() }
    }

    pub fn zero(source: &Arc<ProjectorBundle>, target: &Arc<ProjectorBundle>) -> Self {
        let maps = vec![DMatrix::zeros(target.ambient, source.ambient); source.base.len()];
        Self { source: Arc::clone(source), target: Arc::clone(target), maps }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { maps: self.maps.iter().map(|a| a * c).collect(), ..self.clone() }
    }

    /// Canonical injection `ι_E : E → M × ℝⁿ`.
    pub fn inclusion(e: &Arc<ProjectorBundle>) -> Self {
        let ambient = Arc::new(trivial_bundle(&e.base, e.ambient));
        let ambient = if e.dual { Arc::new(dual(&ambient)) } else { ambient };
        Self { source: Arc::clone(e), target: ambient, maps: e.proj.clone() }
    }

    /// Canonical projection `π_E : M × ℝⁿ → E`.
    pub fn projection(e: &Arc<ProjectorBundle>) -> Self {
        let ambient = Arc::new(trivial_bundle(&e.base, e.ambient));
        let ambient = if e.dual { Arc::new(dual(&ambient)) } else { ambient };
        Self { source: ambient, target: Arc::clone(e), maps: e.proj.clone() }
    }

    /// `self ∘ first`.
    pub fn after(&self, first: &BundleMorphism) -> Result<Self> {
        first.target.check_same(&self.source)?;
        let maps = self.maps.iter().zip(&first.maps).map(|(a, b)| a * b).collect();
        Ok(Self { source: Arc::clone(&first.source), target: Arc::clone(&self.target), maps })
    }

    pub fn source(&self) -> &Arc<ProjectorBundle> {
        &self.source
    }

    pub fn target(&self) -> &Arc<ProjectorBundle> {
        &self.target
    }

    pub fn map(&self, node: usize) -> &DMatrix<f64> {
        &self.maps[node]
    }

    pub fn maps(&self) -> &[DMatrix<f64>] {
        &self.maps
    }
}
