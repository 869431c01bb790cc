//! Mollifier families, registered by name.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::DiscreteManifold;

use super::kernel::ScalarSmoothingKernel;

/// Minimum mollifier width in units of the grid spacing.
pub const MIN_WIDTH_IN_CELLS: f64 = 3.0;

/// A symmetric, unnormalized kernel profile as a function of periodic
/// distance. Normalization happens on the grid.
pub trait MollifierFamily: Send + Sync {
    fn name(&self) -> &'static str;
    fn profile(&self, distance: f64, eps: f64) -> f64;
}

/// `exp(−d² / 2ε²)` in the periodic distance.
#[derive(Debug, Clone, Copy, Default)]
pub struct WrappedGaussian;

impl MollifierFamily for WrappedGaussian {
    fn name(&self) -> &'static str {
        "gaussian"
    }

    fn profile(&self, distance: f64, eps: f64) -> f64 {
        (-distance * distance / (2.0 * eps * eps)).exp()
    }
}

/// `exp((cos d − 1) / ε²)`; periodic by construction, Gaussian to leading order.
#[derive(Debug, Clone, Copy, Default)]
pub struct VonMises;

impl MollifierFamily for VonMises {
    fn name(&self) -> &'static str {
        "von-mises"
    }

    fn profile(&self, distance: f64, eps: f64) -> f64 {
        ((distance.cos() - 1.0) / (eps * eps)).exp()
    }
}

pub struct MollifierRegistry {
    families: BTreeMap<&'static str, Box<dyn MollifierFamily>>,
}

impl Default for MollifierRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(WrappedGaussian));
        r.register(Box::new(VonMises));
        r
    }
}

impl MollifierRegistry {
    pub fn empty() -> Self {
        Self { families: BTreeMap::new() }
    }

    pub fn register(&mut self, family: Box<dyn MollifierFamily>) {
        self.families.insert(family.name(), family);
    }

    pub fn get(&self, name: &str) -> Result<&dyn MollifierFamily> {
        self.families
            .get(name)
            .map(|f| f.as_ref())
            .ok_or_else(|| Error::UnknownStrategy { kind: "mollifier", name: name.to_string() })
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.families.keys().copied()
    }
}

fn periodic_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = (x - y).abs() % (2.0 * PI);
            let d = d.min(2.0 * PI - d);
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// `κ_ε(x, y) = c(y) · profile(d(x, y), ε)` on `M × M`, with `c(y)` chosen
/// so that `Σ_x w_x κ_ε(x, y) = 1` on the grid.
pub fn mollifier_with(family: &dyn MollifierFamily, m: &Arc<DiscreteManifold>, eps: f64) -> Result<ScalarSmoothingKernel> {
    if !m.is_periodic() {
        return Err(Error::NotPeriodic);
    }
    let h = m.axes().iter().map(|a| a.spacing).fold(0.0, f64::max);
    let min = MIN_WIDTH_IN_CELLS * h;
    // allow the boundary case eps = 3h despite rounding in h
    if !(eps.is_finite() && eps >= min * (1.0 - 1e-12)) {
        return Err(Error::EpsTooSmall { eps, min });
    }
    let n = m.len();
    let mut values = vec![0.0; n * n];
    for y in 0..n {
        let column: Vec<f64> = (0..n).map(|x| family.profile(periodic_distance(m.node(x), m.node(y)), eps)).collect();
        let weighted: Vec<f64> = column.iter().zip(m.weights()).map(|(k, w)| k * w).collect();
        let c = 1.0 / crate::geometry::pairwise_sum(&weighted);
        for (x, k) in column.into_iter().enumerate() {
            values[x * n + y] = c * k;
        }
    }
    ScalarSmoothingKernel::new(m, m, values, true)
}

/// Wrapped-Gaussian mollifier.
pub fn mollifier(m: &Arc<DiscreteManifold>, eps: f64) -> Result<ScalarSmoothingKernel> {
    mollifier_with(&WrappedGaussian, m, eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_circle, make_interval};

    #[test]
    fn registry_lookup() {
        let r = MollifierRegistry::default();
        assert_eq!(r.names().collect::<Vec<_>>(), vec!["gaussian", "von-mises"]);
        assert_eq!(r.get("gaussian").unwrap().name(), "gaussian");
        assert!(matches!(r.get("bump"), Err(Error::UnknownStrategy { .. })));
    }

    #[test]
    fn normalized_and_peaked() {
        let m = Arc::new(make_circle(64).unwrap());
        for family in [&WrappedGaussian as &dyn MollifierFamily, &VonMises] {
            let k = mollifier_with(family, &m, 0.4).unwrap();
            assert!(k.is_normalized());
            for y in 0..64 {
                assert!((k.mass(y) - 1.0).abs() <= 1e-14);
                let col = k.column(y);
                let argmax = (0..64).max_by(|&a, &b| col[a].total_cmp(&col[b])).unwrap();
                assert_eq!(argmax, y);
            }
        }
    }

    #[test]
    fn width_limits() {
        let m = Arc::new(make_circle(64).unwrap());
        let h = m.axes()[0].spacing;
        assert!(mollifier(&m, 3.0 * h).is_ok());
        assert!(matches!(mollifier(&m, 2.9 * h), Err(Error::EpsTooSmall { .. })));
        assert!(matches!(mollifier(&Arc::new(make_interval(20).unwrap()), 0.5), Err(Error::NotPeriodic)));
    }

    #[test]
    fn distance_wraps() {
        assert!((periodic_distance(&[0.1], &[2.0 * PI - 0.1]) - 0.2).abs() < 1e-12);
        assert!((periodic_distance(&[0.0], &[PI]) - PI).abs() < 1e-12);
    }
}
