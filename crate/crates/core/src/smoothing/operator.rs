use std::sync::Arc;

use nalgebra::DVector;
use rayon::prelude::*;

use crate::bundles;
use crate::distributions::{self, ScalarDistribution};
use crate::error::{Error, Result};
use crate::geometry::{pairwise_sum, GridFunction, TestDensity};
use crate::sections::Section;
use crate::vdist::{pair_vdist, TensorRep};

use super::families::{mollifier_with, MollifierFamily};
use super::kernel::{ScalarSmoothingKernel, SmoothingOperator, VectorKernel};

/// Target nodes handled per task in the blocked kernel sweep.
const BLOCK: usize = 32;

fn check_source(k: &ScalarSmoothingKernel, u: &ScalarDistribution) -> Result<()> {
    if **u.base() != **k.source() {
        return Err(Error::BaseMismatch);
    }
    Ok(())
}

/// `⟨u, κ(·, y)⟩` for a single target node, summed in the same order as
/// [`apply_scalar`] so the two agree bit for bit.
fn response_at(k: &ScalarSmoothingKernel, u: &ScalarDistribution, y: usize) -> Result<f64> {
    let nn = k.target().len();
    let mut parts = [0.0; 2];
    if let Some(f) = u.regular() {
        for (x, (fx, w)) in f.iter().zip(k.source().weights()).enumerate() {
            parts[0] += (w * fx) * k.values()[x * nn + y];
        }
    }
    let mut singular = Vec::new();
    for (p, order, c) in u.masses() {
        let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
        singular.push(c * sign * k.x_derivative(p, y, order)?);
    }
    parts[1] = pairwise_sum(&singular);
    Ok(parts[0] + parts[1])
}

/// The smooth function `y ↦ ⟨u, κ(·, y)⟩` on the target.
///
/// The regular part is swept in blocks of target nodes with the source index
/// outermost, so each block reads the kernel rows contiguously. Every target
/// value is accumulated in source order, independent of the block split.
pub fn apply_scalar(k: &ScalarSmoothingKernel, u: &ScalarDistribution) -> Result<GridFunction> {
    check_source(k, u)?;
    let (nm, nn) = (k.source().len(), k.target().len());
    let weighted: Option<Vec<f64>> =
        u.regular().map(|f| f.iter().zip(k.source().weights()).map(|(fx, w)| w * fx).collect());
    let masses: Vec<(usize, u8, f64)> = u.masses().collect();
    let values = k.values();

    let mut out = vec![0.0; nn];
    out.par_chunks_mut(BLOCK).enumerate().try_for_each(|(b, chunk)| -> Result<()> {
        let y0 = b * BLOCK;
        let mut regular = vec![0.0; chunk.len()];
        if let Some(wf) = &weighted {
            for x in 0..nm {
                let row = &values[x * nn + y0..x * nn + y0 + chunk.len()];
                let a = wf[x];
                for (acc, kv) in regular.iter_mut().zip(row) {
                    *acc += a * kv;
                }
            }
        }
        for (dy, slot) in chunk.iter_mut().enumerate() {
            let mut singular = Vec::with_capacity(masses.len());
            for &(p, order, c) in &masses {
                let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
                singular.push(c * sign * k.x_derivative(p, y0 + dy, order)?);
            }
            *slot = regular[dy] + pairwise_sum(&singular);
        }
        Ok(())
    })?;
    GridFunction::new(k.target(), out)
}

/// `(K(x, y) s(x))_c` laid out as `[y][c][x]`, so each `(y, c)` slice is a
/// function of `x`.
fn contractions(k: &VectorKernel, s: &Section) -> Vec<f64> {
    let (nm, nn) = (k.source().base().len(), k.target().base().len());
    let af = k.target().ambient_dim();
    let mut g = vec![0.0; nn * af * nm];
    for x in 0..nm {
        let sx = s.value(x);
        for y in 0..nn {
            let v = k.at(x, y) * sx;
            for c in 0..af {
                g[(y * af + c) * nm + x] = v[c];
            }
        }
    }
    g
}

/// The section of `F` produced by `Σ_j K_j ⊗ κ_j` acting on `Σ_i s_i ⊗ v_i`:
/// contract each kernel section with `s_i`, multiply the result into `v_i`,
/// smooth with `κ_j`, evaluate at `y`.
pub fn apply_vector(op: &SmoothingOperator, u: &TensorRep) -> Result<Section> {
    op.source().check_same(u.bundle())?;
    let target = Arc::clone(op.target());
    let source_base = Arc::clone(u.bundle().base());
    let (nm, nn) = (source_base.len(), target.base().len());
    let af = target.ambient_dim();

    let mut jobs = Vec::with_capacity(op.pairs().len() * u.terms().len());
    for (k, kappa) in op.pairs() {
        for (s, v) in u.terms() {
            jobs.push((contractions(k, s), kappa, v));
        }
    }

    let values = (0..nn)
        .into_par_iter()
        .map(|y| -> Result<DVector<f64>> {
            let mut acc = DVector::zeros(af);
            for (g, kappa, v) in &jobs {
                for c in 0..af {
                    let slice = &g[(y * af + c) * nm..(y * af + c + 1) * nm];
                    let gy = GridFunction::new(&source_base, slice.to_vec())?;
                    acc[c] += response_at(kappa, &distributions::mod_mul(&gy, v)?, y)?;
                }
            }
            Ok(target.projector(y) * acc)
        })
        .collect::<Result<Vec<_>>>()?;
    Section::new(&target, values)
}

/// Independent oracle: pairs `u` against the test section
/// `x ↦ κ(x, y) · (row c of K(x, y))` of `E* ⊗ Vol(M)` for every `(y, c)`.
pub fn direct_kernel_apply(k: &VectorKernel, kappa: &ScalarSmoothingKernel, u: &TensorRep) -> Result<Section> {
    k.source().check_same(u.bundle())?;
    if **kappa.source() != **k.source().base() || **kappa.target() != **k.target().base() {
        return Err(Error::BaseMismatch);
    }
    let dual = Arc::new(bundles::dual(k.source()));
    let source_base = k.source().base();
    let (nm, nn) = (source_base.len(), k.target().base().len());
    let af = k.target().ambient_dim();
    let values = (0..nn)
        .into_par_iter()
        .map(|y| -> Result<DVector<f64>> {
            let density = TestDensity::from_values_unchecked(source_base, kappa.column(y));
            let mut out = DVector::zeros(af);
            for c in 0..af {
                let rows = (0..nm).map(|x| k.at(x, y).row(c).transpose()).collect();
                let t = Section::new(&dual, rows)?;
                out[c] = pair_vdist(u, &t, &density)?;
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    Section::new(k.target(), values)
}

/// Largest difference between `Σ_j (f·K_j) ⊗ κ_j` and `Σ_j K_j ⊗ (f⊙κ_j)`
/// applied to `u`.
pub fn balanced_move_deviation(op: &SmoothingOperator, f: &GridFunction, u: &TensorRep) -> Result<f64> {
    let mut left = Vec::with_capacity(op.pairs().len());
    let mut right = Vec::with_capacity(op.pairs().len());
    for (k, kappa) in op.pairs() {
        left.push((k.scaled_by(f)?, kappa.clone()));
        right.push((k.clone(), kappa.multiplied(f)?));
    }
    let rebuild = |pairs: Vec<_>| {
        if op.is_empty() {
            Ok(SmoothingOperator::zero(op.source(), op.target()))
        } else {
            SmoothingOperator::new(pairs)
        }
    };
    let a = apply_vector(&rebuild(left)?, u)?;
    let b = apply_vector(&rebuild(right)?, u)?;
    a.distance(&b)
}

pub fn balanced_move_check(op: &SmoothingOperator, f: &GridFunction, u: &TensorRep, tol: f64) -> Result<bool> {
    Ok(balanced_move_deviation(op, f, u)? <= tol)
}

/// One smoothed section per width, regularized by `P(y)P(x) ⊗ κ_ε`.
pub fn regularize(family: &dyn MollifierFamily, eps: f64, u: &TensorRep) -> Result<Section> {
    let kernel = VectorKernel::fiber_transport(u.bundle());
    let kappa = mollifier_with(family, u.bundle().base(), eps)?;
    apply_vector(&SmoothingOperator::single(kernel, kappa)?, u)
}

/// `(ε, sup_y ‖(κ_ε u)(y) − reference(y)‖∞)` for each width.
pub fn convergence_study(
    family: &dyn MollifierFamily,
    eps: &[f64],
    u: &TensorRep,
    reference: &Section,
) -> Result<Vec<(f64, f64)>> {
    eps.iter().map(|&e| Ok((e, regularize(family, e, u)?.distance(reference)?))).collect()
}

/// `eps,sup_error` table.
pub fn convergence_csv(rows: &[(f64, f64)]) -> String {
    let mut out = String::from("eps,sup_error\n");
    for (e, err) in rows {
        out.push_str(&format!("{},{}\n", crate::format_float(*e), crate::format_float(*err)));
    }
    out
}
