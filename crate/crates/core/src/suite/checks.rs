use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;

use crate::bundles::{self, complement, dual, mobius, tensor, trivial_bundle, whitney_sum, BundleMorphism, ProjectorBundle};
use crate::distributions::{self, embed_function, pair, Atom, Battery, ScalarDistribution};
use crate::error::Result;
use crate::geometry::{self, make_circle, make_interval, quad, DiscreteManifold, GridFunction};
use crate::random::{self, SeededRng};
use crate::scene::Scene;
use crate::sections::{self, frame_generators, Section};
use crate::smoothing::{self, SmoothingOperator, VectorKernel, WrappedGaussian};
use crate::vdist::{self, coord_to_tensor, hom_to_coord, nu_tensor_to_hom, CoordRep, SectionBattery, TensorRep};

use super::{Context, Invariant, InvariantRegistry};

type Measure = fn(&Context, &mut SeededRng) -> Result<f64>;

/// An invariant backed by a plain measuring function.
struct Check {
    name: &'static str,
    description: &'static str,
    tolerance: f64,
    measure: Measure,
}

impl Invariant for Check {
    fn name(&self) -> &str {
        self.name
    }

    fn description(&self) -> &str {
        self.description
    }

    fn tolerance(&self) -> f64 {
        self.tolerance
    }

    fn measure(&self, ctx: &Context) -> Result<f64> {
        (self.measure)(ctx, &mut ctx.rng(self.name))
    }
}

const CHECKS: &[(&str, &str, f64, Measure)] = &[
    ("geometry.quad_linear", "quadrature is linear", 1e-14, quad_linear),
    ("geometry.quad_factorizes", "product quadrature factorizes", 1e-12, quad_factorizes),
    ("geometry.deriv_constants", "stencil derivatives annihilate constants", 1e-12, deriv_constants),
    ("geometry.deriv_convergence", "first derivative error drops by 4 when h halves (relative deviation)", 0.2, deriv_convergence),
    ("bundles.functoriality", "pushforward along a composite equals the composite of pushforwards", 1e-14, bundle_functoriality),
    ("bundles.additivity", "dual, tensor and external tensor preserve Whitney sums", 1e-12, bundle_additivity),
    ("bundles.complement_sum", "a bundle plus its complement fills the ambient space", 1e-12, complement_sum),
    ("sections.module_axioms", "C∞(M)-module axioms on sections", 1e-14, section_module_axioms),
    ("sections.pushforward_linear", "pushforward is C∞(M)-linear", 1e-14, pushforward_linear),
    ("sections.generator_expansion", "every section is the sum of its ambient components times the generators", 1e-12, generator_expansion),
    ("distributions.pair_bilinear", "pairing is bilinear (relative)", 1e-13, pair_bilinear),
    ("distributions.mod_mul_adjoint", "⟨g·u, ω⟩ = ⟨u, g·ω⟩", 1e-8, mod_mul_adjoint),
    ("distributions.module_axioms", "(fg)·u = f·(g·u)", 1e-8, distribution_module_axioms),
    ("vdist.round_trip", "tensor → hom → coord → tensor preserves pairings", 1e-8, round_trip),
    ("vdist.balanced", "(f·s) ⊗ v and s ⊗ (f·v) pair identically", 1e-8, balanced),
    ("vdist.nu_linear", "ν(f·u)(t) = f·ν(u)(t)", 1e-8, nu_linear),
    ("vdist.hom_linear", "ℓ(f·t) = f·ℓ(t)", 1e-8, hom_linear),
    ("vdist.naturality", "the six-morphism naturality suite commutes", 1e-8, naturality),
    ("vdist.biproduct", "coordinates on E ⊕ F concatenate those on E and F", 1e-10, biproduct),
    ("vdist.finite_generation", "a map is determined by its values on the dual generators", 1e-8, finite_generation),
    ("smoothing.oracle", "apply_vector agrees with direct kernel application", 1e-9, smoothing_oracle),
    ("smoothing.balanced_move", "(f·K) ⊗ κ and K ⊗ (f⊙κ) act identically", 1e-8, balanced_move),
    ("smoothing.target_module", "b·(Ku) equals (b(y)K)u", 1e-10, target_module),
    ("smoothing.output_smoothness", "largest adjacent-node slope of regularized sections", bundles::DEFAULT_SMOOTHNESS, output_smoothness),
    ("smoothing.delta_slice", "smoothing δ_p reproduces the kernel slice", 1e-12, delta_slice),
    ("smoothing.convergence", "mollifier error ratio per halving of ε is 4 (relative deviation)", 0.2, convergence),
];

pub fn register_defaults(registry: &mut InvariantRegistry) {
    for &(name, description, tolerance, measure) in CHECKS {
        registry.register(Box::new(Check { name, description, tolerance, measure }));
    }
}

/// Round trip and module linearity on a user scene.
pub struct SceneRoundTrip {
    scene: Scene,
}

impl SceneRoundTrip {
    pub fn new(scene: Scene) -> Self {
        Self { scene }
    }
}

impl Invariant for SceneRoundTrip {
    fn name(&self) -> &str {
        "scene.round_trip"
    }

    fn description(&self) -> &str {
        "the scene's distributional section survives tensor → hom → coord → tensor"
    }

    fn tolerance(&self) -> f64 {
        1e-8
    }

    fn measure(&self, ctx: &Context) -> Result<f64> {
        let u = &self.scene.vdist;
        let battery = SectionBattery::new(u.bundle(), 20, ctx.seed);
        battery.max_deviation(u, &tensor_round_trip(u)?)
    }
}

// ---- shared fixtures ----

fn circle(n: usize) -> Result<Arc<DiscreteManifold>> {
    Ok(Arc::new(make_circle(n)?))
}

/// trivial(1), trivial(2), mobius, mobius ⊕ complement, mobius ⊗ mobius.
fn test_bundles(m: &Arc<DiscreteManifold>) -> Result<Vec<Arc<ProjectorBundle>>> {
    let e = mobius(m)?;
    Ok(vec![
        Arc::new(trivial_bundle(m, 1)),
        Arc::new(trivial_bundle(m, 2)),
        Arc::new(e.clone()),
        Arc::new(whitney_sum(&e, &complement(&e))?),
        Arc::new(tensor(&e, &e)?),
    ])
}

fn shear(t2: &Arc<ProjectorBundle>) -> Result<BundleMorphism> {
    let m = Arc::clone(t2.base());
    BundleMorphism::compressed(t2, t2, |i| DMatrix::from_row_slice(2, 2, &[1.0, m.node(i)[0].sin(), 0.0, 1.0]))
}

fn matrix_gap(a: &ProjectorBundle, b: &ProjectorBundle) -> f64 {
    a.projectors().iter().zip(b.projectors()).map(|(p, q)| (p - q).amax()).fold(0.0, f64::max)
}

fn tensor_round_trip(u: &TensorRep) -> Result<TensorRep> {
    Ok(coord_to_tensor(&hom_to_coord(&nu_tensor_to_hom(u)?)?))
}

fn fn_gap(a: &GridFunction, b: &GridFunction) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn coord_gap(a: &CoordRep, b: &CoordRep, battery: &Battery) -> Result<f64> {
    a.max_deviation(b, battery)
}

fn slope(s: &Section) -> f64 {
    let base = s.bundle().base();
    base.edges().into_iter().map(|(a, b, h)| (s.value(b) - s.value(a)).amax() / h).fold(0.0, f64::max)
}

// ---- geometry ----

fn quad_linear(ctx: &Context, rng: &mut SeededRng) -> Result<f64> {
    let mut worst = 0.0f64;
    for m in [ctx.circle()?, Arc::new(make_interval(ctx.resolution)?)] {
        for _ in 0..5 {
            let (f, g) = (random::function(&m, rng), random::function(&m, rng));
            let (a, b) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let combo = f.scale(a).add(&g.scale(b))?;
            worst = worst.max((quad(&m, &combo)? - (a * quad(&m, &f)? + b * quad(&m, &g)?)).abs());
        }
    }
    Ok(worst)
}

fn quad_factorizes(ctx: &Context, rng: &mut SeededRng) -> Result<f64> {
    let m = ctx.circle()?;
    let n = Arc::new(make_interval((ctx.resolution / 2).max(geometry::MIN_NODES))?);
    let mn = Arc::new(geometry::product(&m, &n)?);
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let (f, g) = (random::function(&m, rng), random::function(&n, rng));
        let values = (0..mn.len()).map(|i| f.value(i / n.len()) * g.value(i % n.len())).collect();
        let fg = GridFunction::new(&mn, values)?;
        worst = worst.max((quad(&mn, &fg)? - quad(&m, &f)? * quad(&n, &g)?).abs());
    }
    Ok(worst)
}

fn deriv_constants(ctx: &Context, rng: &mut SeededRng) -> Result<f64> {
    let mut worst = 0.0f64;
    for m in [ctx.circle()?, Arc::new(make_interval(ctx.resolution)?)] {
        let c = GridFunction::constant(&m, rng.random_range(-5.0..5.0));
        for node in (0..m.len()).filter(|&i| !m.in_boundary_layer(i)) {
            for order in 1..=2 {
                worst = worst.max(geometry::deriv(&m, &c, node, order)?.abs());
            }
        }
    }
    Ok(worst)
}

fn deriv_convergence(ctx: &Context, rng: &mut SeededRng) -> Result<f64> {
    let k = f64::from(rng.random_range(1u8..=3));
    let error = |n: usize| -> Result<f64> {
        let m = circle(n)?;
        let f = GridFunction::from_fn(&m, |x| (k * x[0]).sin());
        let mut worst = 0.0f64;
        for i in 0..n {
            worst = worst.max((geometry::deriv(&m, &f, i, 1)? - k * (k * m.node(i)[0]).cos()).abs());
        }
        Ok(worst)
    };
    let ratio = error(ctx.resolution)? / error(2 * ctx.resolution)?;
    Ok((ratio / 4.0 - 1.0).abs())
}

// ---- bundles ----

fn bundle_functoriality(ctx: &Context, rng: &mut SeededRng) -> Result<f64> {
    let m = ctx.circle()?;
    let e = Arc::new(mobius(&m)?);
    let t2 = Arc::new(trivial_bundle(&m, 2));
    let iota = BundleMorphism::inclusion(&e);
    let sh = shear(&t2)?;
    let back = BundleMorphism::projection(&e);
    let composite = back.after(&sh.after(&iota)?)?;
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let s = random::section(&e, rng);
        let stepwise = sections::pushforward(&back, &sections::pushforward(&sh, &sections::pushforward(&iota, &s)?)?)?;
        worst = worst.max(sections::pushforward(&composite, &s)?.distance(&stepwise)?);
    }
    Ok(worst)
}

/// Moves the tensor factors of `A ⊗ B` (dims `a`, `b`) into the order `B ⊗ A`.
fn kron_swap(a: usize, b: usize) -> DMatrix<f64> {
    let mut p = DMatrix::zeros(a * b, a * b);
    for i in 0..a {
        for j in 0..b {
            p[(j * a + i, i * b + j)] = 1.0;
        }
    }
    p
}

fn bundle_additivity(ctx: &Context, _rng: &mut SeededRng) -> Result<f64> {
    let m = ctx.circle()?;
    let e = mobius(&m)?;
    let f = complement(&e);
    let g = tensor(&e, &e)?;
    let ef = whitney_sum(&e, &f)?;
    let mut worst = matrix_gap(&dual(&ef), &whitney_sum(&dual(&e), &dual(&f))?);

    let left = tensor(&ef, &g)?;
    worst = worst.max(matrix_gap(&left, &whitney_sum(&tensor(&e, &g)?, &tensor(&f, &g)?)?));
    let swapped = tensor(&g, &ef)?;
    let p = kron_swap(g.ambient_dim(), ef.ambient_dim());
    for i in 0..m.len() {
        worst = worst.max((&p * swapped.projector(i) * p.transpose() - left.projector(i)).amax());
    }

    let n = circle(geometry::MIN_NODES.max(ctx.resolution / 8))?;
    let h = mobius(&n)?;
    let ext = bundles::external_tensor(&ef, &h)?;
    let ext_sum = whitney_sum(&bundles::external_tensor(&e, &h)?, &bundles::external_tensor(&f, &h)?)?;
    Ok(worst.max(matrix_gap(&ext, &ext_sum)))
}

fn complement_sum(ctx: &Context, _rng: &mut SeededRng) -> Result<f64> {
    let m = ctx.circle()?;
    let mut worst = 0.0f64;
    for e in test_bundles(&m)? {
        let n = e.ambient_dim();
        let sum = whitney_sum(&e, &complement(&e))?;
        for p in sum.projectors() {
            let folded = p.view((0, 0), (n, n)) + p.view((n, n), (n, n));
            worst = worst.max((folded - DMatrix::<f64>::identity(n, n)).amax());
        }
    }
    Ok(worst)
}

// ---- sections ----

fn section_module_axioms(ctx: &Context, rng: &mut SeededRng) -> Result<f64> {
    let m = ctx.circle()?;
    let mut worst = 0.0f64;
    for e in test_bundles(&m)? {
        let (s, t) = (random::section(&e, rng), random::section(&e, rng));
        let (f, g) = (random::function(&m, rng), random::function(&m, rng));
        let one = GridFunction::constant(&m, 1.0);
        worst = worst.max(sections::mod_mul(&one, &s)?.distance(&s)?);
        let fg_s = sections::mod_mul(&f.mul(&g)?, &s)?;
        worst = worst.max(fg_s.distance(&sections::mod_mul(&f, &sections::mod_mul(&g, &s)?)?)?);
        let sum_s = sections::mod_mul(&f.add(&g)?, &s)?;
        worst = worst.max(sum_s.distance(&sections::mod_mul(&f, &s)?.add(&sections::mod_mul(&g, &s)?)?)?);
        let f_st = sections::mod_mul(&f, &s.add(&t)?)?;
        worst = worst.max(f_st.distance(&sections::mod_mul(&f, &s)?.add(&sections::mod_mul(&f, &t)?)?)?);
    }
    Ok(worst)
}

fn pushforward_linear(ctx: &Context, rng: &mut SeededRng) -> Result<f64> {
    let m = ctx.circle()?;
    let e = Arc::new(mobius(&m)?);
    let t2 = Arc::new(trivial_bundle(&m, 2));
    let mut worst = 0.0f64;
    for mu in [BundleMorphism::inclusion(&e), shear(&t2)?.after(&BundleMorphism::inclusion(&e))?] {
        for _ in 0..5 {
            let s = random::section(&e, rng);
            let f = random::function(&m, rng);
            let lhs = sections::pushforward(&mu, &sections::mod_mul(&f, &s)?)?;
            let rhs = sections::mod_mul(&f, &sections::pushforward(&mu, &s)?)?;
            worst = worst.max(lhs.distance(&rhs)?);
        }
    }
    Ok(worst)
}

fn generator_expansion(ctx: &Context, rng: &mut SeededRng) -> Result<f64> {
    let m = ctx.circle()?;
    let mut worst = 0.0f64;
    for e in test_bundles(&m)? {
        let gens = frame_generators(&e);
        for _ in 0..10 {
            let s = random::section(&e, rng);
            let mut acc = Section::zero(&e);
            for (i, g) in gens.iter().enumerate() {
                acc = acc.add(&sections::mod_mul(&s.component(i), g)?)?;
            }
            worst = worst.max(acc.distance(&s)?);
        }
    }
    Ok(worst)
}

// ---- distributions ----

fn pair_bilinear(ctx: &Context, rng: &mut SeededRng) -> Result<f64> {
    let m = ctx.circle()?;
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let (u, v) = (random::distribution(&m, rng, 3, 2), random::distribution(&m, rng, 3, 2));
        let (w, z) = (random::density(&m, rng), random::density(&m, rng));
        let (a, b) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let (pu, pv) = (a * pair(&u, &w)?, b * pair(&v, &w)?);
        let lhs = pair(&u.scale(a).add(&v.scale(b))?, &w)?;
        worst = worst.max((lhs - pu - pv).abs() / (1.0 + pu.abs() + pv.abs()));

        let wz = geometry::TestDensity::new(&m, w.values().iter().zip(z.values()).map(|(x, y)| a * x + b * y).collect())?;
        let (pw, pz) = (a * pair(&u, &w)?, b * pair(&u, &z)?);
        worst = worst.max((pair(&u, &wz)? - pw - pz).abs() / (1.0 + pw.abs() + pz.abs()));
    }
    Ok(worst)
}

fn mod_mul_adjoint(ctx: &Context, rng: &mut SeededRng) -> Result<f64> {
    let m = ctx.circle()?;
    let interior = |rng: &mut SeededRng| rng.random_range(geometry::BOUNDARY_LAYERS..m.len() - geometry::BOUNDARY_LAYERS);
    let mut atoms = vec![Atom::Regular(random::function(&m, rng))];
    for order in 0..=distributions::MAX_ORDER {
        atoms.push(Atom::PointMass { node: interior(rng), order, weight: rng.random_range(-1.0..1.0) });
    }
    let u = ScalarDistribution::new(&m, atoms)?;
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let g = random::function(&m, rng);
        let w = random::density(&m, rng);
        let lhs = pair(&distributions::mod_mul(&g, &u)?, &w)?;
        let rhs = pair(&u, &w.scaled_by(&g)?)?;
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

fn distribution_module_axioms(ctx: &Context, rng: &mut SeededRng) -> Result<f64> {
    let m = ctx.circle()?;
    let battery = Battery::new(&m, 20, ctx.seed);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let u = random::distribution(&m, rng, 3, 2);
        let (f, g) = (random::function(&m, rng), random::function(&m, rng));
        let lhs = distributions::mod_mul(&f.mul(&g)?, &u)?;
        let rhs = distributions::mod_mul(&f, &distributions::mod_mul(&g, &u)?)?;
        worst = worst.max(battery.max_deviation(&lhs, &rhs)?);
        let one = distributions::mod_mul(&GridFunction::constant(&m, 1.0), &u)?;
        worst = worst.max(battery.max_deviation(&one, &u)?);
    }
    Ok(worst)
}

// ---- vdist ----

fn round_trip(ctx: &Context, rng: &mut SeededRng) -> Result<f64> {
    let m = ctx.circle()?;
    let mut worst = 0.0f64;
    for e in test_bundles(&m)? {
        let battery = SectionBattery::new(&e, 20, ctx.seed);
        for _ in 0..10 {
            let u = random::tensor_rep(&e, rng, 3);
            worst = worst.max(battery.max_deviation(&u, &tensor_round_trip(&u)?)?);
        }
    }
    Ok(worst)
}

fn balanced(ctx: &Context, rng: &mut SeededRng) -> Result<f64> {
    let m = ctx.circle()?;
    let bundles = test_bundles(&m)?;
    let mut worst = 0.0f64;
    for i in 0..20 {
        let e = &bundles[i % bundles.len()];
        let battery = SectionBattery::new(e, 20, ctx.seed);
        let f = random::function(&m, rng);
        let s = random::section(e, rng);
        // always carry an order-1 mass
        let node = rng.random_range(geometry::BOUNDARY_LAYERS..m.len() - geometry::BOUNDARY_LAYERS);
        let v = random::distribution(&m, rng, 2, 2).add(&ScalarDistribution::delta(&m, node, 1, 1.0)?)?;
        let lhs = TensorRep::new(e, vec![(sections::mod_mul(&f, &s)?, v.clone())])?;
        let rhs = TensorRep::new(e, vec![(s, distributions::mod_mul(&f, &v)?)])?;
        worst = worst.max(battery.max_deviation(&lhs, &rhs)?);
    }
    Ok(worst)
}

fn nu_linear(ctx: &Context, rng: &mut SeededRng) -> Result<f64> {
    let m = ctx.circle()?;
    let battery = Battery::new(&m, 10, ctx.seed);
    let mut worst = 0.0f64;
    for e in test_bundles(&m)? {
        let ed = Arc::new(dual(&e));
        let u = random::tensor_rep(&e, rng, 2);
        let f = random::function(&m, rng);
        let t = random::section(&ed, rng);
        let lhs = nu_tensor_to_hom(&u.mod_mul_coefficients(&f)?)?.eval(&t)?;
        let rhs = distributions::mod_mul(&f, &nu_tensor_to_hom(&u)?.eval(&t)?)?;
        worst = worst.max(battery.max_deviation(&lhs, &rhs)?);
    }
    Ok(worst)
}

fn hom_linear(ctx: &Context, rng: &mut SeededRng) -> Result<f64> {
    let m = ctx.circle()?;
    let battery = Battery::new(&m, 10, ctx.seed);
    let mut worst = 0.0f64;
    for e in test_bundles(&m)? {
        let ed = Arc::new(dual(&e));
        let l = nu_tensor_to_hom(&random::tensor_rep(&e, rng, 2))?;
        let f = random::function(&m, rng);
        let t = random::section(&ed, rng);
        let lhs = l.eval(&sections::mod_mul(&f, &t)?)?;
        let rhs = distributions::mod_mul(&f, &l.eval(&t)?)?;
        worst = worst.max(battery.max_deviation(&lhs, &rhs)?);
    }
    Ok(worst)
}

fn naturality(ctx: &Context, rng: &mut SeededRng) -> Result<f64> {
    let m = ctx.circle()?;
    let e = Arc::new(mobius(&m)?);
    let t2 = Arc::new(trivial_bundle(&m, 2));
    let battery = Battery::new(&m, 10, ctx.seed);
    let morphisms = [
        BundleMorphism::identity(&e),
        BundleMorphism::inclusion(&e),
        BundleMorphism::projection(&e),
        BundleMorphism::zero(&e, &t2),
        BundleMorphism::identity(&e).scaled(-1.0),
        shear(&t2)?,
    ];
    let mut worst = 0.0f64;
    for mu in &morphisms {
        for _ in 0..5 {
            let u = random::tensor_rep(mu.source(), rng, 2);
            worst = worst.max(vdist::naturality_deviation(mu, &u, &battery)?);
        }
    }
    Ok(worst)
}

fn biproduct(ctx: &Context, rng: &mut SeededRng) -> Result<f64> {
    let m = ctx.circle()?;
    let e = Arc::new(mobius(&m)?);
    let f = Arc::new(complement(&e));
    let ef = Arc::new(whitney_sum(&e, &f)?);
    let (ne, nf) = (e.ambient_dim(), f.ambient_dim());
    let embed = |src: &Arc<ProjectorBundle>, offset: usize| {
        BundleMorphism::compressed(src, &ef, |_| {
            let mut a = DMatrix::zeros(ne + nf, src.ambient_dim());
            a.view_mut((offset, 0), (src.ambient_dim(), src.ambient_dim())).fill_with_identity();
            a
        })
    };
    let (in_e, in_f) = (embed(&e, 0)?, embed(&f, ne)?);
    let battery = Battery::new(&m, 10, ctx.seed);
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let (ue, uf) = (random::tensor_rep(&e, rng, 2), random::tensor_rep(&f, rng, 2));
        let sum = ue.pushforward(&in_e)?.add(&uf.pushforward(&in_f)?)?;
        let whole = hom_to_coord(&nu_tensor_to_hom(&sum)?)?;
        let parts: Vec<ScalarDistribution> = hom_to_coord(&nu_tensor_to_hom(&ue)?)?
            .coords()
            .iter()
            .chain(hom_to_coord(&nu_tensor_to_hom(&uf)?)?.coords())
            .cloned()
            .collect();
        worst = worst.max(coord_gap(&whole, &CoordRep::new(&ef, parts)?, &battery)?);
    }
    Ok(worst)
}

fn finite_generation(ctx: &Context, rng: &mut SeededRng) -> Result<f64> {
    let m = ctx.circle()?;
    let battery = Battery::new(&m, 10, ctx.seed);
    let mut worst = 0.0f64;
    for e in test_bundles(&m)? {
        let ed = Arc::new(dual(&e));
        let u = random::tensor_rep(&e, rng, 2);
        let l = nu_tensor_to_hom(&u)?;
        for _ in 0..10 {
            let t = random::section(&ed, rng);
            worst = worst.max(battery.max_deviation(&l.eval(&t)?, &u.evaluate(&t)?)?);
        }
    }
    Ok(worst)
}

// ---- smoothing ----

fn kernel_setup(
    ctx: &Context,
) -> Result<(Arc<DiscreteManifold>, Arc<ProjectorBundle>, Arc<ProjectorBundle>)> {
    let m = ctx.circle()?;
    let e = Arc::new(mobius(&m)?);
    let f = Arc::new(trivial_bundle(&m, 2));
    Ok((m, e, f))
}

fn smoothing_oracle(ctx: &Context, rng: &mut SeededRng) -> Result<f64> {
    let (m, e, f) = kernel_setup(ctx)?;
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let k = random::vector_kernel(&e, &f, rng);
        let kappa = random::scalar_kernel(&m, &m, rng);
        let u = random::tensor_rep(&e, rng, 2);
        let a = smoothing::apply_vector(&SmoothingOperator::single(k.clone(), kappa.clone())?, &u)?;
        let b = smoothing::direct_kernel_apply(&k, &kappa, &u)?;
        worst = worst.max(a.distance(&b)?);
    }
    Ok(worst)
}

fn balanced_move(ctx: &Context, rng: &mut SeededRng) -> Result<f64> {
    let (m, e, f) = kernel_setup(ctx)?;
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let kappa = random::scalar_kernel(&m, &m, rng);
        let op = SmoothingOperator::single(random::vector_kernel(&e, &f, rng), kappa.clone())?;
        let g = random::function(kappa.product(), rng);
        let u = random::tensor_rep(&e, rng, 2);
        worst = worst.max(smoothing::balanced_move_deviation(&op, &g, &u)?);
    }
    Ok(worst)
}

fn target_module(ctx: &Context, rng: &mut SeededRng) -> Result<f64> {
    let (m, e, f) = kernel_setup(ctx)?;
    let mut worst = 0.0f64;
    for _ in 0..3 {
        let k: VectorKernel = random::vector_kernel(&e, &f, rng);
        let kappa = random::scalar_kernel(&m, &m, rng);
        let u = random::tensor_rep(&e, rng, 2);
        let b = random::function(&m, rng);
        let r = smoothing::apply_vector(&SmoothingOperator::single(k.clone(), kappa.clone())?, &u)?;
        let scaled = smoothing::apply_vector(&SmoothingOperator::single(k.scaled_in_target(&b)?, kappa)?, &u)?;
        worst = worst.max(sections::mod_mul(&b, &r)?.distance(&scaled)?);
    }
    Ok(worst)
}

fn output_smoothness(ctx: &Context, rng: &mut SeededRng) -> Result<f64> {
    let m = ctx.circle()?;
    let mut worst = 0.0f64;
    for e in test_bundles(&m)? {
        let u = TensorRep::new(&e, vec![(random::section(&e, rng), random::distribution(&m, rng, 2, 0))])?;
        worst = worst.max(slope(&smoothing::regularize(&WrappedGaussian, 0.5, &u)?));
    }
    Ok(worst)
}

fn delta_slice(ctx: &Context, rng: &mut SeededRng) -> Result<f64> {
    let m = ctx.circle()?;
    let mut worst = 0.0f64;
    let kernels = [smoothing::mollifier(&m, 0.3_f64.max(4.0 * m.axes()[0].spacing))?, random::scalar_kernel(&m, &m, rng)];
    for k in &kernels {
        for _ in 0..5 {
            let p = rng.random_range(0..m.len());
            let c = rng.random_range(-2.0..2.0);
            let r = smoothing::apply_scalar(k, &ScalarDistribution::delta(&m, p, 0, c)?)?;
            let slice = GridFunction::new(&m, (0..m.len()).map(|y| c * k.value(p, y)).collect())?;
            worst = worst.max(fn_gap(&r, &slice));
        }
    }
    Ok(worst)
}

/// Runs on circle(256) regardless of the configured resolution; the ε
/// ladder 0.4, 0.2, 0.1 needs ε ≥ 3h.
fn convergence(_ctx: &Context, rng: &mut SeededRng) -> Result<f64> {
    let m = circle(256)?;
    let t = Arc::new(trivial_bundle(&m, 1));
    let phase = rng.random_range(0.0..std::f64::consts::TAU);
    let f = GridFunction::from_fn(&m, |x| (x[0] + phase).sin());
    let one = frame_generators(&t).remove(0);
    let u = TensorRep::new(&t, vec![(one, embed_function(&f))])?;
    let reference = u.as_section().expect("regular coefficients");
    let rows = smoothing::convergence_study(&WrappedGaussian, &[0.4, 0.2, 0.1], &u, &reference)?;
    let mut worst = 0.0f64;
    for w in rows.windows(2) {
        if w[1].1 >= w[0].1 {
            return Ok(f64::INFINITY);
        }
        worst = worst.max((w[0].1 / w[1].1 / 4.0 - 1.0).abs());
    }
    Ok(worst)
}
