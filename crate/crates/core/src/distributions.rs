//! Scalar distributions as finite sums of atoms: one regular part (a grid
//! function acting by quadrature) and point masses `c·δ_p^{(k)}` of order at
//! most two.
//!
//! Pairing follows `⟨δ_p^{(k)}, ω⟩ = (−1)^k ω^{(k)}(p)` with the grid's
//! central stencils. Multiplication by a smooth function is the exact adjoint
//! of multiplying the test density, expanded with the discrete Leibniz rule so
//! the result stays a combination of atoms at the same node.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::SeedableRng;

use crate::error::{Error, Result};
use crate::geometry::{deriv_along, pairwise_sum, DiscreteManifold, GridFunction, TestDensity};
use crate::random::{self, SeededRng};

pub const MAX_ATOMS: usize = 64;
pub const MAX_ORDER: u8 = 2;

#[derive(Debug, Clone, PartialEq)]
pub enum Atom {
    Regular(GridFunction),
    PointMass { node: usize, order: u8, weight: f64 },
}

/// Canonical form: at most one regular atom and point masses keyed by
/// `(node, order)` with zero weights dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarDistribution {
    base: Arc<DiscreteManifold>,
    regular: Option<Vec<f64>>,
    masses: BTreeMap<(usize, u8), f64>,
}

fn check_mass(base: &DiscreteManifold, node: usize, order: u8) -> Result<()> {
    base.check_node(node)?;
    if order > MAX_ORDER {
        return Err(Error::InvalidOrder(order));
    }
    if order > 0 {
        if base.dim() != 1 {
            return Err(Error::DerivativeOnProduct);
        }
        if base.in_boundary_layer(node) {
            return Err(Error::BoundaryViolation { node, order });
        }
    }
    Ok(())
}

impl ScalarDistribution {
    pub fn new(base: &Arc<DiscreteManifold>, atoms: Vec<Atom>) -> Result<Self> {
        if atoms.len() > MAX_ATOMS {
            return Err(Error::TooMany { what: "distribution atoms", limit: MAX_ATOMS, got: atoms.len() });
        }
        let mut out = Self::zero(base);
        for atom in atoms {
            match atom {
                Atom::Regular(f) => {
                    f.check_base(base)?;
                    out.add_regular(f.values(), 1.0);
                }
                Atom::PointMass { node, order, weight } => {
                    check_mass(base, node, order)?;
                    out.add_mass(node, order, weight);
                }
            }
        }
        Ok(out)
    }

    pub fn zero(base: &Arc<DiscreteManifold>) -> Self {
        Self { base: Arc::clone(base), regular: None, masses: BTreeMap::new() }
    }

    /// `weight · δ_node^{(order)}`.
    pub fn delta(base: &Arc<DiscreteManifold>, node: usize, order: u8, weight: f64) -> Result<Self> {
        Self::new(base, vec![Atom::PointMass { node, order, weight }])
    }

    pub fn base(&self) -> &Arc<DiscreteManifold> {
        &self.base
    }

    pub fn regular(&self) -> Option<&[f64]> {
        self.regular.as_deref()
    }

    pub fn masses(&self) -> impl Iterator<Item = (usize, u8, f64)> + '_ {
        self.masses.iter().map(|(&(n, k), &c)| (n, k, c))
    }

    pub fn atoms(&self) -> Vec<Atom> {
        let mut out = Vec::new();
        if let Some(f) = &self.regular {
            out.push(Atom::Regular(GridFunction::new(&self.base, f.clone()).expect("regular part sized to base")));
        }
        out.extend(self.masses().map(|(node, order, weight)| Atom::PointMass { node, order, weight }));
        out
    }

    pub fn atom_count(&self) -> usize {
        usize::from(self.regular.is_some()) + self.masses.len()
    }

    pub fn is_zero(&self) -> bool {
        self.regular.as_ref().is_none_or(|f| f.iter().all(|&v| v == 0.0)) && self.masses.is_empty()
    }

    /// True when there are no point masses, i.e. the distribution is a
    /// smooth function.
    pub fn is_regular(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn max_order(&self) -> Option<u8> {
        self.masses.keys().map(|&(_, k)| k).max()
    }

    fn add_regular(&mut self, f: &[f64], c: f64) {
        match &mut self.regular {
            Some(r) => r.iter_mut().zip(f).for_each(|(a, b)| *a += c * b),
            None => self.regular = Some(f.iter().map(|v| c * v).collect()),
        }
    }

    fn add_mass(&mut self, node: usize, order: u8, weight: f64) {
        let entry = self.masses.entry((node, order)).or_insert(0.0);
        *entry += weight;
        if *entry == 0.0 {
            self.masses.remove(&(node, order));
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.add_scaled(other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add_scaled(other, -1.0)
    }

    /// `self + c · other`.
    pub fn add_scaled(&self, other: &Self, c: f64) -> Result<Self> {
        if *self.base != *other.base {
            return Err(Error::BaseMismatch);
        }
        let mut out = self.clone();
        if let Some(f) = &other.regular {
            out.add_regular(f, c);
        }
        for (node, order, w) in other.masses() {
            out.add_mass(node, order, c * w);
        }
        Ok(out)
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = Self::zero(&self.base);
        if let Some(f) = &self.regular {
            out.add_regular(f, c);
        }
        for (node, order, w) in self.masses() {
            out.add_mass(node, order, c * w);
        }
        out
    }

    /// Sum of distributions on `base`; the empty sum is zero.
    pub fn sum<'a>(base: &Arc<DiscreteManifold>, parts: impl IntoIterator<Item = &'a Self>) -> Result<Self> {
        let mut acc = Self::zero(base);
        for p in parts {
            acc = acc.add(p)?;
        }
        Ok(acc)
    }
}

pub fn pair(u: &ScalarDistribution, w: &TestDensity) -> Result<f64> {
    if **w.base() != *u.base {
        return Err(Error::BaseMismatch);
    }
    let mut terms = Vec::with_capacity(2);
    if let Some(f) = &u.regular {
        let prod: Vec<f64> = u.base.weights().iter().zip(f).zip(w.values()).map(|((a, b), c)| a * b * c).collect();
        terms.push(pairwise_sum(&prod));
    }
    let mut singular = Vec::with_capacity(u.masses.len());
    for (node, order, c) in u.masses() {
        let d = deriv_along(&u.base, w.values(), node, 0, order)?;
        let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
        singular.push(c * sign * d);
    }
    terms.push(pairwise_sum(&singular));
    Ok(pairwise_sum(&terms))
}

/// Discrete stencil data of `g` at `node`: mean of the two neighbours, first
/// and second central differences.
fn stencil_moments(base: &DiscreteManifold, g: &[f64], node: usize) -> Result<(f64, f64, f64)> {
    let left = base.neighbor(node, 0, -1).ok_or(Error::BoundaryViolation { node, order: 1 })?;
    let right = base.neighbor(node, 0, 1).ok_or(Error::BoundaryViolation { node, order: 1 })?;
    let mean = 0.5 * (g[left] + g[right]);
    let d1 = deriv_along(base, g, node, 0, 1)?;
    let d2 = deriv_along(base, g, node, 0, 2)?;
    Ok((mean, d1, d2))
}

/// `g · u`, defined by `⟨g·u, ω⟩ = ⟨u, g·ω⟩`.
///
/// With `ḡ` the neighbour mean, `Dg` and `D²g` the central differences at `p`:
///
/// * `g·δ_p = g(p) δ_p`
/// * `g·δ'_p = ḡ δ'_p − Dg δ_p − (h²/2) Dg δ''_p`
/// * `g·δ''_p = ḡ δ''_p − 2 Dg δ'_p + D²g δ_p`
///
/// which are the three-point stencil identities for `D(gω)` and `D²(gω)`.
pub fn mod_mul(g: &GridFunction, u: &ScalarDistribution) -> Result<ScalarDistribution> {
    g.check_base(&u.base)?;
    let gv = g.values();
    let mut out = ScalarDistribution::zero(&u.base);
    if let Some(f) = &u.regular {
        out.regular = Some(f.iter().zip(gv).map(|(a, b)| a * b).collect());
    }
    for (p, order, c) in u.masses() {
        match order {
            0 => out.add_mass(p, 0, c * gv[p]),
            1 => {
                let (mean, d1, _) = stencil_moments(&u.base, gv, p)?;
                let h = u.base.axes()[0].spacing;
                out.add_mass(p, 1, c * mean);
                out.add_mass(p, 0, -c * d1);
                out.add_mass(p, 2, -c * 0.5 * h * h * d1);
            }
            _ => {
                let (mean, d1, d2) = stencil_moments(&u.base, gv, p)?;
                out.add_mass(p, 2, c * mean);
                out.add_mass(p, 1, -2.0 * c * d1);
                out.add_mass(p, 0, c * d2);
            }
        }
    }
    Ok(out)
}

pub fn embed_function(f: &GridFunction) -> ScalarDistribution {
    let mut out = ScalarDistribution::zero(f.base());
    out.regular = Some(f.values().to_vec());
    out
}

/// Test densities that decide equality of distributions at grid resolution:
/// every admissible nodal hat, plus seeded smooth random densities.
#[derive(Debug, Clone)]
pub struct Battery {
    densities: Vec<TestDensity>,
}

impl Battery {
    pub fn new(base: &Arc<DiscreteManifold>, random_count: usize, seed: u64) -> Self {
        let mut densities: Vec<TestDensity> = (0..base.len())
            .filter(|&i| !base.in_boundary_layer(i))
            .map(|i| TestDensity::hat(base, i).expect("interior node"))
            .collect();
        let mut rng = SeededRng::seed_from_u64(seed);
        densities.extend((0..random_count).map(|_| random::density(base, &mut rng)));
        Self { densities }
    }

    pub fn densities(&self) -> &[TestDensity] {
        &self.densities
    }

    /// `max_ω |⟨u, ω⟩ − ⟨v, ω⟩|`.
    pub fn max_deviation(&self, u: &ScalarDistribution, v: &ScalarDistribution) -> Result<f64> {
        let mut worst = 0.0f64;
        for w in &self.densities {
            worst = worst.max((pair(u, w)? - pair(v, w)?).abs());
        }
        Ok(worst)
    }
}

/// Equality against the default-seeded battery.
pub fn equal(u: &ScalarDistribution, v: &ScalarDistribution, battery_size: usize, tol: f64) -> Result<bool> {
    if *u.base != *v.base {
        return Err(Error::BaseMismatch);
    }
    let battery = Battery::new(&u.base, battery_size, random::DEFAULT_SEED);
    Ok(battery.max_deviation(u, v)? <= tol)
}
