//! Discretized manifolds: uniform node grids with trapezoid quadrature and
//! central finite-difference stencils.
//!
//! A [`DiscreteManifold`] is a product of at most two uniform axes. Periodic
//! axes cover `[0, 2π)`; bounded axes cover `[0, 1]`. Node order is
//! lexicographic with the first axis major, so the node `(i, j)` of a product
//! has index `i * n_second + j`.

use std::sync::Arc;

use crate::error::{Error, Result};

/// Minimum node count per axis for which the three-point stencils and the
/// two boundary layers leave an interior.
pub const MIN_NODES: usize = 8;

/// Number of node layers at each end of a bounded axis on which compactly
/// supported objects vanish.
pub const BOUNDARY_LAYERS: usize = 2;

/// Sums with a fixed binary tree so the result does not depend on how a
/// caller partitions work.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 8;
    if values.len() <= BLOCK {
        let mut acc = 0.0;
        for v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub nodes: usize,
    pub periodic: bool,
    pub spacing: f64,
}

impl Axis {
    fn periodic(nodes: usize) -> Result<Self> {
        check_count(nodes)?;
        Ok(Self { nodes, periodic: true, spacing: std::f64::consts::TAU / nodes as f64 })
    }

    fn bounded(nodes: usize) -> Result<Self> {
        check_count(nodes)?;
        Ok(Self { nodes, periodic: false, spacing: 1.0 / (nodes - 1) as f64 })
    }

    pub fn coord(&self, i: usize) -> f64 {
        i as f64 * self.spacing
    }

    pub fn weight(&self, i: usize) -> f64 {
        if !self.periodic && (i == 0 || i + 1 == self.nodes) {
            0.5 * self.spacing
        } else {
            self.spacing
        }
    }

    pub fn in_boundary_layer(&self, i: usize) -> bool {
        !self.periodic && (i < BOUNDARY_LAYERS || i + BOUNDARY_LAYERS >= self.nodes)
    }

    /// Index of the node `offset` steps away, wrapping on periodic axes.
    pub fn neighbor(&self, i: usize, offset: isize) -> Option<usize> {
        let n = self.nodes as isize;
        let j = i as isize + offset;
        if self.periodic {
            Some(j.rem_euclid(n) as usize)
        } else if (0..n).contains(&j) {
            Some(j as usize)
        } else {
            None
        }
    }

    /// Three-point central stencil `(left, centre, right)` for a derivative
    /// of the given order at node `i`.
    pub fn stencil(&self, i: usize, order: u8) -> Result<Stencil> {
        if order > 2 {
            return Err(Error::InvalidOrder(order));
        }
        if order == 0 {
            return Ok(Stencil { nodes: [i, i, i], coeffs: [0.0, 1.0, 0.0] });
        }
        if self.in_boundary_layer(i) {
            return Err(Error::BoundaryViolation { node: i, order });
        }
        let left = self.neighbor(i, -1).expect("interior node has a left neighbor");
        let right = self.neighbor(i, 1).expect("interior node has a right neighbor");
        let h = self.spacing;
        let coeffs = if order == 1 {
            let c = 0.5 / h;
            [-c, 0.0, c]
        } else {
            let c = 1.0 / (h * h);
            [c, -2.0 * c, c]
        };
        Ok(Stencil { nodes: [left, i, right], coeffs })
    }
}

fn check_count(nodes: usize) -> Result<()> {
    if nodes < MIN_NODES {
        return Err(Error::TooFewNodes { min: MIN_NODES, got: nodes });
    }
    Ok(())
}

/// Finite-difference weights over three nodes, applied left to right.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stencil {
    pub nodes: [usize; 3],
    pub coeffs: [f64; 3],
}

impl Stencil {
    pub fn apply(&self, values: impl Fn(usize) -> f64) -> f64 {
        let mut acc = 0.0;
        for k in 0..3 {
            if self.coeffs[k] != 0.0 {
                acc += self.coeffs[k] * values(self.nodes[k]);
            }
        }
        acc
    }
}

#[derive(Debug, Clone)]
pub struct DiscreteManifold {
    axes: Vec<Axis>,
    coords: Vec<f64>,
    weights: Vec<f64>,
}

impl PartialEq for DiscreteManifold {
    fn eq(&self, other: &Self) -> bool {
        self.axes == other.axes
    }
}

impl DiscreteManifold {
    fn from_axes(axes: Vec<Axis>) -> Self {
        let dim = axes.len();
        let count: usize = axes.iter().map(|a| a.nodes).product();
        let mut coords = Vec::with_capacity(count * dim);
        let mut weights = Vec::with_capacity(count);
        let mut index = vec![0usize; dim];
        for _ in 0..count {
            let mut w = 1.0;
            for (a, &i) in axes.iter().zip(&index) {
                coords.push(a.coord(i));
                w *= a.weight(i);
            }
            weights.push(w);
            for k in (0..dim).rev() {
                index[k] += 1;
                if index[k] < axes[k].nodes {
                    break;
                }
                index[k] = 0;
            }
        }
        Self { axes, coords, weights }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.coords[i * d..(i + 1) * d]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn is_periodic(&self) -> bool {
        self.axes.iter().all(|a| a.periodic)
    }

    pub fn check_node(&self, node: usize) -> Result<()> {
        if node >= self.len() {
            return Err(Error::NodeOutOfRange { node, count: self.len() });
        }
        Ok(())
    }

    fn stride(&self, axis: usize) -> usize {
        self.axes[axis + 1..].iter().map(|a| a.nodes).product()
    }

    /// Per-axis indices of a flat node index.
    pub fn multi_index(&self, node: usize) -> Vec<usize> {
        self.axes
            .iter()
            .enumerate()
            .map(|(k, a)| (node / self.stride(k)) % a.nodes)
            .collect()
    }

    pub fn in_boundary_layer(&self, node: usize) -> bool {
        self.multi_index(node)
            .iter()
            .zip(&self.axes)
            .any(|(&i, a)| a.in_boundary_layer(i))
    }

    /// Flat index of the node `offset` steps along `axis`.
    pub fn neighbor(&self, node: usize, axis: usize, offset: isize) -> Option<usize> {
        let stride = self.stride(axis);
        let i = (node / stride) % self.axes[axis].nodes;
        let j = self.axes[axis].neighbor(i, offset)?;
        Some(node - i * stride + j * stride)
    }

    /// Stencil along one axis, expressed in flat node indices.
    pub fn stencil(&self, node: usize, axis: usize, order: u8) -> Result<Stencil> {
        self.check_node(node)?;
        let stride = self.stride(axis);
        let i = (node / stride) % self.axes[axis].nodes;
        let mut s = self.axes[axis].stencil(i, order).map_err(|e| match e {
            Error::BoundaryViolation { order, .. } => Error::BoundaryViolation { node, order },
            other => other,
        })?;
        for n in &mut s.nodes {
            *n = node - i * stride + *n * stride;
        }
        Ok(s)
    }

    /// Adjacent node pairs along every axis, with the spacing between them.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for node in 0..self.len() {
            for (k, a) in self.axes.iter().enumerate() {
                if let Some(next) = self.neighbor(node, k, 1) {
                    if next != node {
                        out.push((node, next, a.spacing));
                    }
                }
            }
        }
        out
    }
}

pub fn make_circle(n: usize) -> Result<DiscreteManifold> {
    Ok(DiscreteManifold::from_axes(vec![Axis::periodic(n)?]))
}

pub fn make_interval(n: usize) -> Result<DiscreteManifold> {
    Ok(DiscreteManifold::from_axes(vec![Axis::bounded(n)?]))
}

pub fn product(first: &DiscreteManifold, second: &DiscreteManifold) -> Result<DiscreteManifold> {
    let dim = first.dim() + second.dim();
    if dim > 2 {
        return Err(Error::DimensionTooLarge(dim));
    }
    let axes = first.axes.iter().chain(&second.axes).copied().collect();
    Ok(DiscreteManifold::from_axes(axes))
}

/// A real value per node.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    base: Arc<DiscreteManifold>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(base: &Arc<DiscreteManifold>, values: Vec<f64>) -> Result<Self> {
        if values.len() != base.len() {
            return Err(Error::LengthMismatch { expected: base.len(), got: values.len() });
        }
        Ok(Self { base: Arc::clone(base), values })
    }

    pub fn from_fn(base: &Arc<DiscreteManifold>, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..base.len()).map(|i| f(base.node(i))).collect();
        Self { base: Arc::clone(base), values }
    }

    pub fn constant(base: &Arc<DiscreteManifold>, c: f64) -> Self {
        Self { base: Arc::clone(base), values: vec![c; base.len()] }
    }

    pub fn zeros(base: &Arc<DiscreteManifold>) -> Self {
        Self::constant(base, 0.0)
    }

    pub fn base(&self) -> &Arc<DiscreteManifold> {
        &self.base
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, node: usize) -> f64 {
        self.values[node]
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn check_base(&self, base: &DiscreteManifold) -> Result<()> {
        if *self.base != *base {
            return Err(Error::BaseMismatch);
        }
        Ok(())
    }

    pub fn mul(&self, other: &GridFunction) -> Result<GridFunction> {
        other.check_base(&self.base)?;
        Ok(self.zip_with(other, |a, b| a * b))
    }

    pub fn add(&self, other: &GridFunction) -> Result<GridFunction> {
        other.check_base(&self.base)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn scale(&self, c: f64) -> GridFunction {
        self.map(|v| c * v)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        Self { base: Arc::clone(&self.base), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    fn zip_with(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> GridFunction {
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Self { base: Arc::clone(&self.base), values }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Density coefficient against the grid volume weight; compactly supported
/// on bounded axes (zero on the boundary layers).
#[derive(Debug, Clone, PartialEq)]
pub struct TestDensity {
    base: Arc<DiscreteManifold>,
    values: Vec<f64>,
}

impl TestDensity {
    pub fn new(base: &Arc<DiscreteManifold>, values: Vec<f64>) -> Result<Self> {
        if values.len() != base.len() {
            return Err(Error::LengthMismatch { expected: base.len(), got: values.len() });
        }
        if let Some(node) = (0..base.len()).find(|&i| values[i] != 0.0 && base.in_boundary_layer(i)) {
            return Err(Error::SupportViolation(node));
        }
        Ok(Self { base: Arc::clone(base), values })
    }

    /// Samples `f` and zeroes the boundary layers.
    pub fn from_fn(base: &Arc<DiscreteManifold>, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..base.len())
            .map(|i| if base.in_boundary_layer(i) { 0.0 } else { f(base.node(i)) })
            .collect();
        Self { base: Arc::clone(base), values }
    }

    /// The density that is one at `node` and zero elsewhere.
    pub fn hat(base: &Arc<DiscreteManifold>, node: usize) -> Result<Self> {
        base.check_node(node)?;
        let mut values = vec![0.0; base.len()];
        values[node] = 1.0;
        Self::new(base, values)
    }

    /// Skips the support check; for kernels paired internally on bounded
    /// bases where the pairing is still well defined on the grid.
    pub(crate) fn from_values_unchecked(base: &Arc<DiscreteManifold>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), base.len());
        Self { base: Arc::clone(base), values }
    }

    pub fn base(&self) -> &Arc<DiscreteManifold> {
        &self.base
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, node: usize) -> f64 {
        self.values[node]
    }

    /// Product with a smooth function; support is preserved.
    pub fn scaled_by(&self, f: &GridFunction) -> Result<TestDensity> {
        f.check_base(&self.base)?;
        let values = self.values.iter().zip(f.values()).map(|(a, b)| a * b).collect();
        Ok(Self { base: Arc::clone(&self.base), values })
    }
}

pub fn quad(m: &DiscreteManifold, f: &GridFunction) -> Result<f64> {
    f.check_base(m)?;
    let terms: Vec<f64> = m.weights().iter().zip(f.values()).map(|(w, v)| w * v).collect();
    Ok(pairwise_sum(&terms))
}

/// Central finite difference of order 0, 1 or 2 on a one-dimensional base.
pub fn deriv(m: &DiscreteManifold, f: &GridFunction, node: usize, order: u8) -> Result<f64> {
    f.check_base(m)?;
    if m.dim() != 1 && order > 0 {
        return Err(Error::DerivativeOnProduct);
    }
    deriv_along(m, f.values(), node, 0, order)
}

/// Stencil derivative of raw node values along one axis.
pub fn deriv_along(m: &DiscreteManifold, values: &[f64], node: usize, axis: usize, order: u8) -> Result<f64> {
    let s = m.stencil(node, axis, order)?;
    Ok(s.apply(|i| values[i]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    fn circle(n: usize) -> Arc<DiscreteManifold> {
        Arc::new(make_circle(n).unwrap())
    }

    #[test]
    fn circle_of_eight() {
        let m = make_circle(8).unwrap();
        assert_eq!(m.len(), 8);
        for k in 0..8 {
            assert!((m.node(k)[0] - k as f64 * PI / 4.0).abs() < 1e-15);
            assert!((m.weight(k) - PI / 4.0).abs() < 1e-15);
        }
        let m = Arc::new(m);
        assert!((quad(&m, &GridFunction::constant(&m, 1.0)).unwrap() - TAU).abs() < 1e-12);
    }

    #[test]
    fn too_few_nodes() {
        assert!(matches!(make_circle(4), Err(Error::TooFewNodes { .. })));
        assert!(make_interval(7).is_err());
    }

    #[test]
    fn interval_trapezoid() {
        let m = Arc::new(make_interval(11).unwrap());
        assert!((m.axes()[0].spacing - 0.1).abs() < 1e-15);
        assert!((m.weight(0) - 0.05).abs() < 1e-15);
        assert!((m.weight(10) - 0.05).abs() < 1e-15);
        assert!((m.weight(5) - 0.1).abs() < 1e-15);
        let x = GridFunction::from_fn(&m, |p| p[0]);
        assert!((quad(&m, &x).unwrap() - 0.5).abs() < 1e-12);

        // trapezoid error h²/12 · max|f''| = 1e-4/12 · 2
        let m = Arc::new(make_interval(101).unwrap());
        let x2 = GridFunction::from_fn(&m, |p| p[0] * p[0]);
        assert!((quad(&m, &x2).unwrap() - 1.0 / 3.0).abs() < 1e-3);
    }

    #[test]
    fn products() {
        let c = make_circle(8).unwrap();
        let cc = Arc::new(product(&c, &c).unwrap());
        assert_eq!(cc.len(), 64);
        assert!(cc.weights().iter().all(|w| (w - (PI / 4.0).powi(2)).abs() < 1e-15));
        let one = GridFunction::constant(&cc, 1.0);
        assert!((quad(&cc, &one).unwrap() - 4.0 * PI * PI).abs() < 1e-10);
        let ic = product(&make_interval(11).unwrap(), &c).unwrap();
        assert_eq!(ic.len(), 88);
        // lexicographic: second axis varies fastest
        assert_eq!(ic.node(1), &[0.0, PI / 4.0]);
        assert_eq!(ic.node(8), &[0.1, 0.0]);
        assert!(product(&cc, &c).is_err());
    }

    #[test]
    fn quadrature_values() {
        let m = circle(64);
        let s = GridFunction::from_fn(&m, |p| p[0].sin());
        assert!(quad(&m, &s).unwrap().abs() < 1e-12);
        let c2 = GridFunction::from_fn(&m, |p| p[0].cos().powi(2));
        assert!((quad(&m, &c2).unwrap() - PI).abs() < 1e-10);
    }

    #[test]
    fn derivatives() {
        let m = circle(128);
        let s = GridFunction::from_fn(&m, |p| p[0].sin());
        assert!((deriv(&m, &s, 0, 1).unwrap() - 1.0).abs() < 1e-3);
        assert!(deriv(&m, &s, 0, 2).unwrap().abs() < 1e-3);
        let c = GridFunction::constant(&m, 3.7);
        for node in [0, 17, 127] {
            assert_eq!(deriv(&m, &c, node, 1).unwrap(), 0.0);
        }
        assert!(matches!(deriv(&m, &c, 0, 3), Err(Error::InvalidOrder(3))));
    }

    #[test]
    fn boundary_layer_rejected() {
        let m = Arc::new(make_interval(11).unwrap());
        let f = GridFunction::from_fn(&m, |p| p[0]);
        for node in [0, 1, 9, 10] {
            assert!(matches!(deriv(&m, &f, node, 1), Err(Error::BoundaryViolation { .. })));
            assert!(deriv(&m, &f, node, 0).is_ok());
        }
        assert!((deriv(&m, &f, 5, 1).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn first_derivative_converges_quadratically() {
        let err = |n: usize| {
            let m = circle(n);
            let f = GridFunction::from_fn(&m, |p| (p[0].sin()).exp());
            (0..n)
                .map(|i| {
                    let x = m.node(i)[0];
                    (deriv(&m, &f, i, 1).unwrap() - x.cos() * x.sin().exp()).abs()
                })
                .fold(0.0, f64::max)
        };
        let ratio = err(64) / err(128);
        assert!((3.6..4.4).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn product_quadrature_factorizes() {
        let a = Arc::new(make_circle(16).unwrap());
        let b = Arc::new(make_interval(13).unwrap());
        let ab = Arc::new(product(&a, &b).unwrap());
        let f = GridFunction::from_fn(&a, |p| 1.0 + p[0].cos());
        let g = GridFunction::from_fn(&b, |p| p[0] * p[0]);
        let fg = GridFunction::from_fn(&ab, |p| (1.0 + p[0].cos()) * p[1] * p[1]);
        let lhs = quad(&ab, &fg).unwrap();
        let rhs = quad(&a, &f).unwrap() * quad(&b, &g).unwrap();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn product_stencils_follow_axes() {
        let a = make_circle(8).unwrap();
        let b = make_interval(9).unwrap();
        let ab = product(&a, &b).unwrap();
        // node (0, 4): neighbors along the periodic first axis wrap
        let node = 4;
        let s = ab.stencil(node, 0, 1).unwrap();
        assert_eq!(s.nodes, [7 * 9 + 4, 4, 9 + 4]);
        let s = ab.stencil(node, 1, 2).unwrap();
        assert_eq!(s.nodes, [3, 4, 5]);
        assert!(ab.in_boundary_layer(1));
        assert!(!ab.in_boundary_layer(4));
    }

    #[test]
    fn density_support() {
        let m = Arc::new(make_interval(11).unwrap());
        let mut v = vec![1.0; 11];
        assert!(matches!(TestDensity::new(&m, v.clone()), Err(Error::SupportViolation(0))));
        for i in [0, 1, 9, 10] {
            v[i] = 0.0;
        }
        assert!(TestDensity::new(&m, v).is_ok());
        let d = TestDensity::from_fn(&m, |_| 1.0);
        assert_eq!(d.value(1), 0.0);
        assert_eq!(d.value(2), 1.0);
    }

    #[test]
    fn pairwise_sum_is_partition_independent() {
        let v: Vec<f64> = (0..1000).map(|i| (i as f64 * 0.37).sin()).collect();
        let a = pairwise_sum(&v);
        let b = pairwise_sum(&v.clone());
        assert_eq!(a.to_bits(), b.to_bits());
        let naive: f64 = v.iter().sum();
        assert!((a - naive).abs() < 1e-12);
    }

    proptest::proptest! {
        #[test]
        fn quad_is_linear(a in -10.0f64..10.0, b in -10.0f64..10.0, k in 0usize..5) {
            let m = circle(32);
            let f = GridFunction::from_fn(&m, |p| (k as f64 * p[0]).cos());
            let g = GridFunction::from_fn(&m, |p| p[0].sin().exp());
            let comb = f.scale(a).add(&g.scale(b)).unwrap();
            let lhs = quad(&m, &comb).unwrap();
            let rhs = a * quad(&m, &f).unwrap() + b * quad(&m, &g).unwrap();
            proptest::prop_assert!((lhs - rhs).abs() <= 1e-13 * (1.0 + lhs.abs()) * 10.0);
        }
    }
}
