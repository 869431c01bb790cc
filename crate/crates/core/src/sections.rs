//! Smooth sections `Γ(M, E)` as ambient vector fields lying in the range of
//! the bundle's projector, with the `C∞(M)`-module structure, contraction
//! against dual sections, push/pull along morphisms, and the fiberwise
//! tensor product.

use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::DVector;

use crate::bundles::{self, BundleMorphism, ProjectorBundle, PROJECTOR_TOL};
use crate::error::{Error, Result};
use crate::format_float;
use crate::geometry::GridFunction;

#[derive(Debug, Clone)]
pub struct Section {
    bundle: Arc<ProjectorBundle>,
    values: Vec<DVector<f64>>,
}

impl Section {
    /// Rejects values that leave the fiber by more than the projector tolerance.
    pub fn new(bundle: &Arc<ProjectorBundle>, values: Vec<DVector<f64>>) -> Result<Self> {
        let base = bundle.base();
        if values.len() != base.len() {
            return Err(Error::LengthMismatch { expected: base.len(), got: values.len() });
        }
        for (node, v) in values.iter().enumerate() {
            if v.len() != bundle.ambient_dim() {
                return Err(Error::LengthMismatch { expected: bundle.ambient_dim(), got: v.len() });
            }
            let deviation = (bundle.projector(node) * v - v).amax();
            if deviation > PROJECTOR_TOL {
                return Err(Error::NotInFiber { node, deviation });
            }
        }
        Ok(Self { bundle: Arc::clone(bundle), values })
    }

    /// Applies the projector to arbitrary ambient values.
    pub fn project(bundle: &Arc<ProjectorBundle>, raw: Vec<DVector<f64>>) -> Result<Self> {
        let base = bundle.base();
        if raw.len() != base.len() {
            return Err(Error::LengthMismatch { expected: base.len(), got: raw.len() });
        }
        let values = raw
            .iter()
            .enumerate()
            .map(|(i, v)| {
                if v.len() != bundle.ambient_dim() {
                    return Err(Error::LengthMismatch { expected: bundle.ambient_dim(), got: v.len() });
                }
                Ok(bundle.projector(i) * v)
            })
            .collect::<Result<_>>()?;
        Ok(Self { bundle: Arc::clone(bundle), values })
    }

    pub fn from_fn(bundle: &Arc<ProjectorBundle>, f: impl Fn(usize, &[f64]) -> DVector<f64>) -> Result<Self> {
        let base = bundle.base();
        Self::project(bundle, (0..base.len()).map(|i| f(i, base.node(i))).collect())
    }

    pub fn zero(bundle: &Arc<ProjectorBundle>) -> Self {
        let values = vec![DVector::zeros(bundle.ambient_dim()); bundle.base().len()];
        Self { bundle: Arc::clone(bundle), values }
    }

    pub fn bundle(&self) -> &Arc<ProjectorBundle> {
        &self.bundle
    }

    pub fn value(&self, node: usize) -> &DVector<f64> {
        &self.values[node]
    }

    pub fn values(&self) -> &[DVector<f64>] {
        &self.values
    }

    /// Ambient component `i` as a function on the base.
    pub fn component(&self, i: usize) -> GridFunction {
        let values = self.values.iter().map(|v| v[i]).collect();
        GridFunction::new(self.bundle.base(), values).expect("one value per node")
    }

    pub fn add(&self, other: &Section) -> Result<Section> {
        self.bundle.check_same(&other.bundle)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(Self { bundle: Arc::clone(&self.bundle), values })
    }

    pub fn scale(&self, c: f64) -> Section {
        Self { bundle: Arc::clone(&self.bundle), values: self.values.iter().map(|v| v * c).collect() }
    }

    /// Largest node-wise max-norm distance to another section of the same bundle.
    pub fn distance(&self, other: &Section) -> Result<f64> {
        self.bundle.check_same(&other.bundle)?;
        Ok(self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| m.max((a - b).amax())))
    }

    pub fn max_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.amax()))
    }

    /// Largest node-wise `‖P v − v‖∞`.
    pub fn fiber_deviation(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .fold(0.0, |m, (i, v)| m.max((self.bundle.projector(i) * v - v).amax()))
    }

    /// Adjacent-node Lipschitz check with constant `c`.
    pub fn is_smooth(&self, c: f64) -> bool {
        self.bundle
            .base()
            .edges()
            .into_iter()
            .all(|(a, b, h)| (&self.values[b] - &self.values[a]).amax() <= c * h)
    }

    /// Node coordinates followed by ambient components, one row per node.
    pub fn to_csv(&self) -> String {
        let base = self.bundle.base();
        let mut out = String::new();
        let coords: Vec<String> = if base.dim() == 1 {
            vec!["x".into()]
        } else {
            (0..base.dim()).map(|k| format!("x{k}")).collect()
        };
        let comps: Vec<String> = (0..self.bundle.ambient_dim()).map(|k| format!("c{k}")).collect();
        out.push_str(&coords.into_iter().chain(comps).collect::<Vec<_>>().join(","));
        out.push('\n');
        for (i, v) in self.values.iter().enumerate() {
            let row: Vec<String> = base.node(i).iter().chain(v.iter()).map(|&x| format_float(x)).collect();
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }
}

pub fn mod_mul(f: &GridFunction, s: &Section) -> Result<Section> {
    f.check_base(s.bundle.base())?;
    let values = s.values.iter().zip(f.values()).map(|(v, &c)| v * c).collect();
    Ok(Section { bundle: Arc::clone(&s.bundle), values })
}

/// Node-wise pairing of a section of `E` with a section of `E*`.
pub fn contract(s: &Section, t: &Section) -> Result<GridFunction> {
    s.bundle.check_dual_of(&t.bundle)?;
    let values = s.values.iter().zip(&t.values).map(|(a, b)| a.dot(b)).collect();
    GridFunction::new(s.bundle.base(), values)
}

/// `ψ(s ⊗ t)(p) = s(p) ⊗ t(p)` on a common base, or `s(x) ⊗ t(y)` on `M × N`
/// when the bases differ or `external` is requested.
pub fn fiberwise_tensor(s: &Section, t: &Section, external: bool) -> Result<Section> {
    if external {
        let bundle = Arc::new(bundles::external_tensor(&s.bundle, &t.bundle)?);
        let mut values = Vec::with_capacity(bundle.base().len());
        for a in &s.values {
            for b in &t.values {
                values.push(a.kronecker(b));
            }
        }
        return Ok(Section { bundle, values });
    }
    let bundle = Arc::new(bundles::tensor(&s.bundle, &t.bundle)?);
    let values = s.values.iter().zip(&t.values).map(|(a, b)| a.kronecker(b)).collect();
    Ok(Section { bundle, values })
}

/// `μ_* s`.
pub fn pushforward(mu: &BundleMorphism, s: &Section) -> Result<Section> {
    mu.source().check_same(&s.bundle)?;
    let values = mu.maps().iter().zip(&s.values).map(|(a, v)| a * v).collect();
    Ok(Section { bundle: Arc::clone(mu.target()), values })
}

/// `μ^* t` for `t` a section of the target's dual; lands in the source's dual.
pub fn pullback_dual(mu: &BundleMorphism, t: &Section) -> Result<Section> {
    mu.target().check_dual_of(&t.bundle)?;
    let bundle = Arc::new(bundles::dual(mu.source()));
    let values = mu.maps().iter().zip(&t.values).map(|(a, w)| a.tr_mul(w)).collect();
    Ok(Section { bundle, values })
}

/// `e_i(x) = P(x) ê_i`, one per ambient direction; they generate `Γ(M, E)`.
pub fn frame_generators(e: &Arc<ProjectorBundle>) -> Vec<Section> {
    (0..e.ambient_dim())
        .map(|i| {
            let values = e.projectors().iter().map(|p| p.column(i).into_owned()).collect();
            Section { bundle: Arc::clone(e), values }
        })
        .collect()
}

/// `ε_i(x) = P(x)ᵀ ê_i`, sections of `E*`.
pub fn dual_generators(e: &Arc<ProjectorBundle>) -> Vec<Section> {
    let d = Arc::new(bundles::dual(e));
    (0..e.ambient_dim())
        .map(|i| {
            let values = e.projectors().iter().map(|p| p.row(i).transpose()).collect();
            Section { bundle: Arc::clone(&d), values }
        })
        .collect()
}

/// Embeds sections of `E` and `F` into `E ⊕ F` by stacking ambient vectors.
pub fn direct_sum(s: &Section, t: &Section) -> Result<Section> {
    let bundle = Arc::new(bundles::whitney_sum(&s.bundle, &t.bundle)?);
    let values = s
        .values
        .iter()
        .zip(&t.values)
        .map(|(a, b)| DVector::from_iterator(a.len() + b.len(), a.iter().chain(b.iter()).copied()))
        .collect();
    Ok(Section { bundle, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundles::{complement, dual, mobius, tensor, trivial_bundle};
    use crate::geometry::{make_circle, make_interval, DiscreteManifold};

    fn circle(n: usize) -> Arc<DiscreteManifold> {
        Arc::new(make_circle(n).unwrap())
    }

    fn wavy(bundle: &Arc<ProjectorBundle>) -> Section {
        Section::from_fn(bundle, |_, x| {
            DVector::from_iterator(bundle.ambient_dim(), (0..bundle.ambient_dim()).map(|k| (x[0] * (k + 1) as f64).sin() + 0.3))
        })
        .unwrap()
    }

    #[test]
    fn module_multiplication() {
        let m = circle(32);
        let e = Arc::new(mobius(&m).unwrap());
        let s = wavy(&e);
        let one = GridFunction::constant(&m, 1.0);
        assert_eq!(mod_mul(&one, &s).unwrap().distance(&s).unwrap(), 0.0);
        assert_eq!(mod_mul(&GridFunction::zeros(&m), &s).unwrap().max_norm(), 0.0);
        let f = GridFunction::from_fn(&m, |x| x[0].cos());
        let g = GridFunction::from_fn(&m, |x| 2.0 + x[0].sin());
        let lhs = mod_mul(&f, &mod_mul(&g, &s).unwrap()).unwrap();
        let rhs = mod_mul(&f.mul(&g).unwrap(), &s).unwrap();
        assert!(lhs.distance(&rhs).unwrap() <= 1e-14);
        let sum = mod_mul(&f.add(&g).unwrap(), &s).unwrap();
        let split = mod_mul(&f, &s).unwrap().add(&mod_mul(&g, &s).unwrap()).unwrap();
        assert!(sum.distance(&split).unwrap() <= 1e-14);
    }

    #[test]
    fn fiber_violation_rejected() {
        let m = circle(8);
        let e = Arc::new(mobius(&m).unwrap());
        let raw = vec![DVector::from_vec(vec![0.0, 1.0]); 8];
        assert!(matches!(Section::new(&e, raw.clone()), Err(Error::NotInFiber { node: 0, .. })));
        let s = Section::project(&e, raw).unwrap();
        assert!(s.fiber_deviation() <= 1e-15);
    }

    #[test]
    fn contraction() {
        let m = circle(16);
        let t = Arc::new(trivial_bundle(&m, 1));
        let one = &frame_generators(&t)[0];
        let one_dual = &dual_generators(&t)[0];
        let c = contract(one, one_dual).unwrap();
        assert!(c.values().iter().all(|&v| v == 1.0));
        assert!(contract(one, one).is_err());

        let e = Arc::new(mobius(&m).unwrap());
        let c = contract(&frame_generators(&e)[0], &dual_generators(&e)[0]).unwrap();
        for i in 0..16 {
            let expected = (m.node(i)[0] / 2.0).cos().powi(2);
            assert!((c.value(i) - expected).abs() < 1e-15);
        }

        let s = wavy(&e);
        let tt = Section::from_fn(&Arc::new(dual(&e)), |_, x| DVector::from_vec(vec![x[0].cos(), 1.0])).unwrap();
        let f = GridFunction::from_fn(&m, |x| x[0].sin() - 0.5);
        let lhs = contract(&mod_mul(&f, &s).unwrap(), &tt).unwrap();
        let rhs = f.mul(&contract(&s, &tt).unwrap()).unwrap();
        assert!(lhs.values().iter().zip(rhs.values()).all(|(a, b)| (a - b).abs() <= 1e-14));
    }

    #[test]
    fn tensor_of_sections() {
        let m = circle(16);
        let t = Arc::new(trivial_bundle(&m, 1));
        let one = &frame_generators(&t)[0];
        let oo = fiberwise_tensor(one, one, false).unwrap();
        assert!(oo.values().iter().all(|v| v[0] == 1.0));

        let e = Arc::new(mobius(&m).unwrap());
        let s = wavy(&e);
        let u = frame_generators(&e)[1].clone();
        let f = GridFunction::from_fn(&m, |x| x[0].cos());
        let a = fiberwise_tensor(&mod_mul(&f, &s).unwrap(), &u, false).unwrap();
        let b = fiberwise_tensor(&s, &mod_mul(&f, &u).unwrap(), false).unwrap();
        assert!(a.distance(&b).unwrap() <= 1e-15);
        assert!(a.fiber_deviation() <= 1e-12);

        let n = Arc::new(make_interval(9).unwrap());
        let g = Arc::new(trivial_bundle(&n, 2));
        let r = Section::from_fn(&g, |_, y| DVector::from_vec(vec![y[0], 1.0 - y[0]])).unwrap();
        let ext = fiberwise_tensor(&s, &r, true).unwrap();
        assert_eq!(ext.bundle().base().len(), 16 * 9);
        assert!(ext.fiber_deviation() <= 1e-12);
        let v = ext.value(3 * 9 + 4);
        assert_eq!(v, &s.value(3).kronecker(r.value(4)));
    }

    #[test]
    fn push_and_pull() {
        let m = circle(32);
        let e = Arc::new(mobius(&m).unwrap());
        let s = wavy(&e);
        let id = BundleMorphism::identity(&e);
        assert!(pushforward(&id, &s).unwrap().distance(&s).unwrap() <= 1e-15);

        let iota = BundleMorphism::inclusion(&e);
        let pi = BundleMorphism::projection(&e);
        let back = pushforward(&pi, &pushforward(&iota, &s).unwrap()).unwrap();
        assert!(back.distance(&s).unwrap() <= 1e-12);

        let t2 = Arc::new(trivial_bundle(&m, 2));
        let mu = BundleMorphism::compressed(&t2, &e, |i| {
            let x = m.node(i)[0];
            nalgebra::DMatrix::from_row_slice(2, 2, &[1.0, x.sin(), 0.5, 2.0])
        })
        .unwrap();
        let w = Section::from_fn(&t2, |_, x| DVector::from_vec(vec![x[0].cos(), 0.2])).unwrap();
        let tt = Section::from_fn(&Arc::new(dual(&e)), |_, x| DVector::from_vec(vec![1.0, x[0].sin()])).unwrap();
        let lhs = contract(&w, &pullback_dual(&mu, &tt).unwrap()).unwrap();
        let rhs = contract(&pushforward(&mu, &w).unwrap(), &tt).unwrap();
        assert!(lhs.values().iter().zip(rhs.values()).all(|(a, b)| (a - b).abs() <= 1e-12));

        let f = GridFunction::from_fn(&m, |x| x[0].cos());
        let a = pushforward(&mu, &mod_mul(&f, &w).unwrap()).unwrap();
        let b = mod_mul(&f, &pushforward(&mu, &w).unwrap()).unwrap();
        assert!(a.distance(&b).unwrap() <= 1e-14);
    }

    #[test]
    fn generators_span() {
        let m = circle(32);
        let e = Arc::new(mobius(&m).unwrap());
        let gens = frame_generators(&e);
        assert_eq!(gens.len(), 2);
        assert_eq!(gens[0].value(0), &DVector::from_vec(vec![1.0, 0.0]));
        assert_eq!(gens[1].value(0), &DVector::from_vec(vec![0.0, 0.0]));

        let t = Arc::new(trivial_bundle(&m, 1));
        assert!(frame_generators(&t)[0].values().iter().all(|v| v[0] == 1.0));

        for bundle in [
            e.clone(),
            Arc::new(complement(&e)),
            Arc::new(tensor(&e, &e).unwrap()),
            Arc::new(trivial_bundle(&m, 2)),
        ] {
            let s = wavy(&bundle);
            let gens = frame_generators(&bundle);
            let mut acc = Section::zero(&bundle);
            for (i, g) in gens.iter().enumerate() {
                acc = acc.add(&mod_mul(&s.component(i), g).unwrap()).unwrap();
            }
            assert!(acc.distance(&s).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn csv_dump() {
        let m = circle(8);
        let e = Arc::new(mobius(&m).unwrap());
        let csv = frame_generators(&e)[0].to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("x,c0,c1"));
        assert_eq!(lines.next(), Some("0.0000000000000000e0,1.0000000000000000e0,0.0000000000000000e0"));
        assert_eq!(csv.lines().count(), 9);
    }
}
