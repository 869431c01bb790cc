//! Seeded generators for smooth test data.
//!
//! All randomness flows through [`SeededRng`], ChaCha with 8 rounds, seeded
//! from a single `u64`. ChaCha output is specified independently of platform
//! and word size, so a seed names the same data everywhere.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::bundles::ProjectorBundle;
use crate::distributions::{Atom, ScalarDistribution};
use crate::geometry::{self, Axis, DiscreteManifold, GridFunction, TestDensity};
use crate::sections::Section;
use crate::smoothing::{ScalarSmoothingKernel, VectorKernel};
use crate::vdist::TensorRep;

pub type SeededRng = rand_chacha::ChaCha8Rng;

pub const DEFAULT_SEED: u64 = 0x5EED;

const MAX_FREQ: usize = 3;

/// A low-frequency trigonometric profile along one axis.
#[derive(Debug, Clone)]
struct Profile {
    mean: f64,
    cos: [f64; MAX_FREQ],
    sin: [f64; MAX_FREQ],
    scale: f64,
}

impl Profile {
    fn sample(rng: &mut SeededRng, axis: &Axis) -> Self {
        let mut coeff = |k: usize| rng.random_range(-1.0..1.0) / (k + 1) as f64;
        let mean = coeff(0);
        let cos = [coeff(1), coeff(2), coeff(3)];
        let sin = [coeff(1), coeff(2), coeff(3)];
        // bounded axes map [0, 1] onto half a period
        let scale = if axis.periodic { 1.0 } else { PI };
        Self { mean, cos, sin, scale }
    }

    fn eval(&self, x: f64) -> f64 {
        let t = self.scale * x;
        let mut acc = self.mean;
        for k in 0..MAX_FREQ {
            let kt = (k + 1) as f64 * t;
            acc += self.cos[k] * kt.cos() + self.sin[k] * kt.sin();
        }
        acc
    }
}

/// Sum of two separable products of random axis profiles.
fn field(base: &DiscreteManifold, rng: &mut SeededRng) -> impl Fn(&[f64]) -> f64 {
    let terms: Vec<Vec<Profile>> = (0..2)
        .map(|_| base.axes().iter().map(|a| Profile::sample(rng, a)).collect())
        .collect();
    move |x: &[f64]| terms.iter().map(|t| t.iter().zip(x).map(|(p, &xi)| p.eval(xi)).product::<f64>()).sum()
}

pub fn function(base: &Arc<DiscreteManifold>, rng: &mut SeededRng) -> GridFunction {
    let f = field(base, rng);
    GridFunction::from_fn(base, f)
}

pub fn density(base: &Arc<DiscreteManifold>, rng: &mut SeededRng) -> TestDensity {
    let f = field(base, rng);
    TestDensity::from_fn(base, f)
}

/// Random smooth ambient field projected into the bundle.
pub fn section(bundle: &Arc<ProjectorBundle>, rng: &mut SeededRng) -> Section {
    let base = bundle.base();
    let n = bundle.ambient_dim();
    let comps: Vec<GridFunction> = (0..n).map(|_| function(base, rng)).collect();
    Section::from_fn(bundle, |i, _| DVector::from_iterator(n, comps.iter().map(|c| c.value(i))))
        .expect("ambient field sized to bundle")
}

/// A regular part plus `masses` point masses of order at most `max_order`,
/// placed away from the boundary layers.
pub fn distribution(base: &Arc<DiscreteManifold>, rng: &mut SeededRng, masses: usize, max_order: u8) -> ScalarDistribution {
    let mut atoms = vec![Atom::Regular(function(base, rng))];
    let interior: Vec<usize> = (0..base.len()).filter(|&i| !base.in_boundary_layer(i)).collect();
    let max_order = if base.dim() == 1 { max_order } else { 0 };
    for _ in 0..masses {
        let node = interior[rng.random_range(0..interior.len())];
        let order = rng.random_range(0..=max_order);
        let weight = rng.random_range(-1.0..1.0);
        atoms.push(Atom::PointMass { node, order, weight });
    }
    ScalarDistribution::new(base, atoms).expect("atoms placed on valid nodes")
}

pub fn tensor_rep(bundle: &Arc<ProjectorBundle>, rng: &mut SeededRng, terms: usize) -> TensorRep {
    let terms = (0..terms)
        .map(|_| {
            let s = section(bundle, rng);
            let masses = rng.random_range(1..=3);
            (s, distribution(bundle.base(), rng, masses, 2))
        })
        .collect();
    TensorRep::new(bundle, terms).expect("terms share the bundle")
}

/// A positive smooth kernel `exp(φ(x, y))` with `φ` a random field on `M × N`.
pub fn scalar_kernel(source: &Arc<DiscreteManifold>, target: &Arc<DiscreteManifold>, rng: &mut SeededRng) -> ScalarSmoothingKernel {
    let product = geometry::product(source, target).expect("kernel bases form a product");
    let phi = field(&product, rng);
    let values = (0..product.len()).map(|i| (0.5 * phi(product.node(i))).exp()).collect();
    ScalarSmoothingKernel::new(source, target, values, false).expect("values sized to the product")
}

/// Random smooth ambient matrix field, compressed into `E* ⊠ F`.
pub fn vector_kernel(source: &Arc<ProjectorBundle>, target: &Arc<ProjectorBundle>, rng: &mut SeededRng) -> VectorKernel {
    let product = Arc::new(geometry::product(source.base(), target.base()).expect("kernel bases form a product"));
    let (rows, cols) = (target.ambient_dim(), source.ambient_dim());
    let entries: Vec<GridFunction> = (0..rows * cols).map(|_| function(&product, rng)).collect();
    let nn = target.base().len();
    VectorKernel::compressed(source, target, |x, y| {
        DMatrix::from_fn(rows, cols, |r, c| entries[r * cols + c].value(x * nn + y))
    })
    .expect("compressed kernel lies in the fibers")
}
