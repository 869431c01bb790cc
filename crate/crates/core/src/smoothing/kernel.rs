use std::sync::Arc;

use nalgebra::DMatrix;

use crate::bundles::{ProjectorBundle, PROJECTOR_TOL};
use crate::error::{Error, Result};
use crate::geometry::{self, pairwise_sum, DiscreteManifold, GridFunction};

pub const NORMALIZATION_TOL: f64 = 1e-10;

/// A smooth kernel `κ(x, y)` on `M × N`, acting on `D′(M)` by pairing in `x`.
/// Values are stored in product-node order, `x` major.
#[derive(Debug, Clone)]
pub struct ScalarSmoothingKernel {
    source: Arc<DiscreteManifold>,
    target: Arc<DiscreteManifold>,
    product: Arc<DiscreteManifold>,
    values: Vec<f64>,
    normalized: bool,
}

impl ScalarSmoothingKernel {
    /// With `normalized`, checks `Σ_x w_x κ(x, y) = 1` for every `y`.
    pub fn new(
        source: &Arc<DiscreteManifold>,
        target: &Arc<DiscreteManifold>,
        values: Vec<f64>,
        normalized: bool,
    ) -> Result<Self> {
        if source.dim() != 1 {
            return Err(Error::Scene("smoothing kernels need a one-dimensional source".into()));
        }
        let product = Arc::new(geometry::product(source, target)?);
        if values.len() != product.len() {
            return Err(Error::LengthMismatch { expected: product.len(), got: values.len() });
        }
        let k = Self { source: Arc::clone(source), target: Arc::clone(target), product, values, normalized };
        if normalized {
            for y in 0..target.len() {
                let mass = k.mass(y);
                if (mass - 1.0).abs() > NORMALIZATION_TOL {
                    return Err(Error::Scene(format!("kernel mass {mass} at target node {y}")));
                }
            }
        }
        Ok(k)
    }

    pub fn from_fn(
        source: &Arc<DiscreteManifold>,
        target: &Arc<DiscreteManifold>,
        f: impl Fn(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(source.len() * target.len());
        for x in 0..source.len() {
            for y in 0..target.len() {
                values.push(f(x, y));
            }
        }
        Self::new(source, target, values, false)
    }

    pub fn source(&self) -> &Arc<DiscreteManifold> {
        &self.source
    }

    pub fn target(&self) -> &Arc<DiscreteManifold> {
        &self.target
    }

    pub fn product(&self) -> &Arc<DiscreteManifold> {
        &self.product
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn value(&self, x: usize, y: usize) -> f64 {
        self.values[x * self.target.len() + y]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `x ↦ κ(x, y)`.
    pub fn column(&self, y: usize) -> Vec<f64> {
        let n = self.target.len();
        (0..self.source.len()).map(|x| self.values[x * n + y]).collect()
    }

    /// `Σ_x w_x κ(x, y)`.
    pub fn mass(&self, y: usize) -> f64 {
        let terms: Vec<f64> = self.column(y).iter().zip(self.source.weights()).map(|(k, w)| k * w).collect();
        pairwise_sum(&terms)
    }

    /// `j`-th stencil derivative in `x` of `κ(·, y)` at source node `p`.
    pub fn x_derivative(&self, p: usize, y: usize, order: u8) -> Result<f64> {
        let node = p * self.target.len() + y;
        geometry::deriv_along(&self.product, &self.values, node, 0, order)
    }

    /// `f ⊙ κ`, the kernel multiplied node-wise by a function on `M × N`.
    pub fn multiplied(&self, f: &GridFunction) -> Result<Self> {
        f.check_base(&self.product)?;
        let values = self.values.iter().zip(f.values()).map(|(k, g)| k * g).collect();
        Ok(Self { values, normalized: false, ..self.clone() })
    }

    /// Adjacent-node Lipschitz check on the product grid.
    pub fn is_smooth(&self, c: f64) -> bool {
        self.product.edges().into_iter().all(|(a, b, h)| (self.values[b] - self.values[a]).abs() <= c * h)
    }

    /// Kernel values as product-grid CSV: `x,y,kappa`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,kappa\n");
        for x in 0..self.source.len() {
            for y in 0..self.target.len() {
                let row = [self.source.node(x)[0], self.target.node(y)[0], self.value(x, y)];
                out.push_str(&row.map(crate::format_float).join(","));
                out.push('\n');
            }
        }
        out
    }
}

/// A section of `E* ⊠ F` over `M × N`, stored as ambient matrices
/// `K(x, y)` of shape `(ambient F) × (ambient E)` with `P_F K P_E = K`.
#[derive(Debug, Clone)]
pub struct VectorKernel {
    source: Arc<ProjectorBundle>,
    target: Arc<ProjectorBundle>,
    values: Vec<DMatrix<f64>>,
}

impl VectorKernel {
    pub fn new(source: &Arc<ProjectorBundle>, target: &Arc<ProjectorBundle>, values: Vec<DMatrix<f64>>) -> Result<Self> {
        let (nm, nn) = (source.base().len(), target.base().len());
        if values.len() != nm * nn {
            return Err(Error::LengthMismatch { expected: nm * nn, got: values.len() });
        }
        for (node, k) in values.iter().enumerate() {
            if k.shape() != (target.ambient_dim(), source.ambient_dim()) {
                return Err(Error::BundleMismatch(format!("kernel shape {:?} at node {node}", k.shape())));
            }
            let (x, y) = (node / nn, node % nn);
            let fitted = target.projector(y) * k * source.projector(x);
            let deviation = (fitted - k).amax();
            if deviation > PROJECTOR_TOL {
                return Err(Error::KernelNotInFiber { node, deviation });
            }
        }
        Ok(Self { source: Arc::clone(source), target: Arc::clone(target), values })
    }

    /// `P_F(y) · raw(x, y) · P_E(x)`.
    pub fn compressed(
        source: &Arc<ProjectorBundle>,
        target: &Arc<ProjectorBundle>,
        raw: impl Fn(usize, usize) -> DMatrix<f64>,
    ) -> Result<Self> {
        let (nm, nn) = (source.base().len(), target.base().len());
        let mut values = Vec::with_capacity(nm * nn);
        for x in 0..nm {
            for y in 0..nn {
                values.push(target.projector(y) * raw(x, y) * source.projector(x));
            }
        }
        Self::new(source, target, values)
    }

    /// `K(x, y) = P(y) P(x)` for a bundle over a single base; the kernel whose
    /// diagonal is the identity on fibers.
    pub fn fiber_transport(bundle: &Arc<ProjectorBundle>) -> Self {
        let n = bundle.base().len();
        let mut values = Vec::with_capacity(n * n);
        for x in 0..n {
            for y in 0..n {
                values.push(bundle.projector(y) * bundle.projector(x));
            }
        }
        Self { source: Arc::clone(bundle), target: Arc::clone(bundle), values }
    }

    pub fn source(&self) -> &Arc<ProjectorBundle> {
        &self.source
    }

    pub fn target(&self) -> &Arc<ProjectorBundle> {
        &self.target
    }

    pub fn at(&self, x: usize, y: usize) -> &DMatrix<f64> {
        &self.values[x * self.target.base().len() + y]
    }

    /// `f · K` for `f` on `M × N`.
    pub fn scaled_by(&self, f: &GridFunction) -> Result<Self> {
        if f.values().len() != self.values.len() {
            return Err(Error::BaseMismatch);
        }
        let values = self.values.iter().zip(f.values()).map(|(k, c)| k * *c).collect();
        Ok(Self { values, ..self.clone() })
    }

    /// `K(x, y) ↦ b(y) K(x, y)` for `b` on `N`.
    pub fn scaled_in_target(&self, b: &GridFunction) -> Result<Self> {
        b.check_base(self.target.base())?;
        let nn = self.target.base().len();
        let values = self.values.iter().enumerate().map(|(i, k)| k * b.value(i % nn)).collect();
        Ok(Self { values, ..self.clone() })
    }
}

pub const MAX_PAIRS: usize = 16;

/// `Σ_j K_j ⊗ κ_j`: vector kernels paired with scalar smoothing kernels.
#[derive(Debug, Clone)]
pub struct SmoothingOperator {
    source: Arc<ProjectorBundle>,
    target: Arc<ProjectorBundle>,
    pairs: Vec<(VectorKernel, ScalarSmoothingKernel)>,
}

impl SmoothingOperator {
    /// Bundles are taken from the first pair; use [`SmoothingOperator::zero`]
    /// for the empty sum.
    pub fn new(pairs: Vec<(VectorKernel, ScalarSmoothingKernel)>) -> Result<Self> {
        if pairs.len() > MAX_PAIRS {
            return Err(Error::TooMany { what: "smoothing pairs", limit: MAX_PAIRS, got: pairs.len() });
        }
        let Some((k0, _)) = pairs.first() else {
            return Err(Error::Scene("an empty smoothing operator needs explicit bundles".into()));
        };
        let (source, target) = (Arc::clone(&k0.source), Arc::clone(&k0.target));
        for (k, kappa) in &pairs {
            k.source.check_same(&source)?;
            k.target.check_same(&target)?;
            if **kappa.source() != **k.source.base() || **kappa.target() != **k.target.base() {
                return Err(Error::BaseMismatch);
            }
        }
        Ok(Self { source, target, pairs })
    }

    pub fn zero(source: &Arc<ProjectorBundle>, target: &Arc<ProjectorBundle>) -> Self {
        Self { source: Arc::clone(source), target: Arc::clone(target), pairs: Vec::new() }
    }

    pub fn single(k: VectorKernel, kappa: ScalarSmoothingKernel) -> Result<Self> {
        Self::new(vec![(k, kappa)])
    }

    pub fn source(&self) -> &Arc<ProjectorBundle> {
        &self.source
    }

    pub fn target(&self) -> &Arc<ProjectorBundle> {
        &self.target
    }

    pub fn pairs(&self) -> &[(VectorKernel, ScalarSmoothingKernel)] {
        &self.pairs
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}
