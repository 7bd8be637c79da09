//! Free-norm estimation.
//!
//! The real free norm of a positively homogeneous `f` is the supremum of
//! `Σ_j |f(x_j*)|` over finite tuples whose (1,weak)-norm is at most 1;
//! the complex free norm runs over complex tuples evaluated through real
//! parts, and the p-convex variant aggregates with p-th powers. The
//! supremum ranges over unbounded tuple length, so no finite procedure
//! certifies it from above in general: estimates here are **certified
//! lower bounds** carrying a feasible witness tuple, with `exact` filled
//! in the cases that admit an oracle (dimension one, zero).
//!
//! Feasibility is enforced by rescaling a candidate tuple by the inverse
//! of its constraint value, which is lossless since both objective and
//! constraint are positively homogeneous in the tuple.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{ComplexLatticeElem, LatticeExpr};
use crate::optim::{self, AscentConfig};
use crate::par;
use crate::rng::{derive_seed, normal_vec, rng_for};
use crate::spaces::{
    complexify_functional, one_weak_norm, p_weak_norm, FunctionalTuple, NormedSpace, OneWeakMethod,
    OneWeakParams,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    RealFree,
    ComplexFree,
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodMeta {
    pub restarts: usize,
    pub m_used: usize,
    pub m_max: usize,
    pub budget: usize,
    pub seed: u64,
}

/// A certified lower bound with its feasible witness.
#[derive(Debug, Clone)]
pub struct NormEstimate {
    pub lower_bound: f64,
    pub witness: FunctionalTuple,
    pub exact: Option<f64>,
    pub p: f64,
    pub variant: Variant,
    pub method: MethodMeta,
}

#[derive(Debug, Clone, Copy)]
pub struct EstimatorParams {
    /// Tuple lengths 1..=m_max are searched; the true norm is a supremum
    /// over all lengths, so larger m only improves the lower bound.
    pub m_max: usize,
    pub restarts: usize,
    /// Rough number of objective evaluations per restart.
    pub budget: usize,
    pub seed: u64,
    pub one_weak: OneWeakParams,
}

impl Default for EstimatorParams {
    fn default() -> Self {
        EstimatorParams {
            m_max: 6,
            restarts: 8,
            budget: 2000,
            seed: crate::rng::DEFAULT_SEED,
            one_weak: OneWeakParams::default(),
        }
    }
}

impl EstimatorParams {
    fn validate(&self) -> Result<()> {
        if self.budget == 0 {
            return Err(Error::InvalidParameter("budget must be positive".into()));
        }
        if self.m_max == 0 {
            return Err(Error::InvalidParameter("m_max must be positive".into()));
        }
        Ok(())
    }
}

/// `(Σ_j |h(u_j)|^p)^{1/p}` over realified functional rows (complex
/// modulus per term).
fn complex_rows_objective(h: &ComplexLatticeElem, rows: &[Vec<f64>], p: f64) -> f64 {
    let s: f64 = rows
        .iter()
        .map(|u| {
            let v = h.cval_unchecked(u);
            let m = v.re.hypot(v.im);
            if p == 1.0 {
                m
            } else {
                m.powf(p)
            }
        })
        .sum();
    if p == 1.0 {
        s
    } else {
        s.powf(1.0 / p)
    }
}

fn real_rows_objective(f: &LatticeExpr, rows: &[Vec<f64>]) -> f64 {
    rows.iter().map(|u| f.eval_unchecked(u).abs()).sum()
}

/// Objective of a witness tuple against an element; used for
/// witness-exchange comparisons.
pub fn tuple_objective_complex(h: &ComplexLatticeElem, tuple: &FunctionalTuple, p: f64) -> f64 {
    complex_rows_objective(h, &tuple.realified(), p)
}

pub fn tuple_objective_real(f: &LatticeExpr, tuple: &FunctionalTuple) -> f64 {
    real_rows_objective(f, &tuple.realified())
}

fn rows_to_tuple(rows: &[Vec<f64>], complex: bool) -> FunctionalTuple {
    if complex {
        FunctionalTuple::Complex(rows.iter().map(|u| complexify_functional(u)).collect())
    } else {
        FunctionalTuple::Real(rows.to_vec())
    }
}

/// Cheap in-search constraint estimate; a lower bound of the true
/// constraint, refined at certification time. This sits in the innermost
/// loop of the tuple search, so it trades accuracy for speed: sign
/// enumeration plus two bare phase sweeps, no golden refinement.
fn constraint_search(space: &NormedSpace, rows: &[Vec<f64>], complex: bool, p: f64, seed: u64) -> f64 {
    if p == 1.0 {
        if !complex {
            // exact for real tuples: enumeration over ±1 with exact duals
            let quick = OneWeakParams { restarts: 1, phase_grid: 8, seed };
            return one_weak_norm(space, &rows_to_tuple(rows, false), OneWeakMethod::SignFormula, &quick)
                .map(|r| r.value)
                .unwrap_or(0.0);
        }
        let funcs: Vec<Vec<Complex64>> = rows.iter().map(|u| complexify_functional(u).coeffs).collect();
        return quick_complex_sign_sup(space, &funcs);
    }
    let quick = OneWeakParams { restarts: 1, phase_grid: 8, seed };
    p_weak_norm(space, &rows_to_tuple(rows, complex), p, &quick).unwrap_or(0.0)
}

/// Coarse torus maximization of `||Σ ε_j c_j||` over unimodular signs:
/// all ±1 patterns, then two cyclic sweeps over an 8-point phase grid.
fn quick_complex_sign_sup(space: &NormedSpace, funcs: &[Vec<Complex64>]) -> f64 {
    let m = funcs.len();
    let dim = funcs[0].len();
    let combo = |phases: &[f64]| -> f64 {
        let mut s = vec![Complex64::new(0.0, 0.0); dim];
        for (j, f) in funcs.iter().enumerate() {
            let e = Complex64::from_polar(1.0, phases[j]);
            for (sk, ck) in s.iter_mut().zip(f) {
                *sk += e * ck;
            }
        }
        space.dual_norm_complex(&s).unwrap_or(0.0)
    };
    let mut best_phases = vec![0.0; m];
    let mut best = combo(&best_phases);
    if m <= 10 {
        for mask in 1..(1u64 << m) {
            let phases: Vec<f64> =
                (0..m).map(|j| if mask >> j & 1 == 1 { std::f64::consts::PI } else { 0.0 }).collect();
            let v = combo(&phases);
            if v > best {
                best = v;
                best_phases = phases;
            }
        }
    }
    for _sweep in 0..2 {
        for j in 0..m {
            for k in 0..8 {
                let mut phases = best_phases.clone();
                phases[j] = std::f64::consts::TAU * k as f64 / 8.0;
                let v = combo(&phases);
                if v > best {
                    best = v;
                    best_phases = phases;
                }
            }
        }
    }
    best
}

/// Certification-grade constraint value: the best (largest) lower bound
/// available, so the rescaled witness never overstates feasibility.
fn constraint_certify(
    space: &NormedSpace,
    rows: &[Vec<f64>],
    complex: bool,
    p: f64,
    params: &OneWeakParams,
) -> f64 {
    let tuple = rows_to_tuple(rows, complex);
    if p == 1.0 {
        let a = one_weak_norm(space, &tuple, OneWeakMethod::SignFormula, params).map(|r| r.value).unwrap_or(0.0);
        let b = one_weak_norm(space, &tuple, OneWeakMethod::BallSup, params).map(|r| r.value).unwrap_or(0.0);
        a.max(b)
    } else {
        p_weak_norm(space, &tuple, p, params).unwrap_or(0.0)
    }
}

struct CoreOutcome {
    value: f64,
    rows: Vec<Vec<f64>>,
    m_used: usize,
}

/// Shared estimator over tuple length and restarts. `obj` aggregates the
/// element values over realified rows (already including the 1/p power).
fn estimate_core<F>(
    space: &NormedSpace,
    complex_tuple: bool,
    p: f64,
    obj: &F,
    params: &EstimatorParams,
    salt: &str,
) -> Result<CoreOutcome>
where
    F: Fn(&[Vec<f64>]) -> f64 + Sync,
{
    let d = space.real_dim();
    let m1_cfg = AscentConfig {
        restarts: params.restarts.max(8),
        iters: 150,
        seed: derive_seed(params.seed, salt, 1),
    };
    // m = 1: maximize over the dual unit sphere; dual norms are exact for
    // every norm family here, so the witness is feasible by construction.
    let dual_normalize = |u: &mut Vec<f64>| match space.dual_norm_real(u) {
        Ok(n) if n > 1e-300 => {
            u.iter_mut().for_each(|x| *x /= n);
            true
        }
        _ => false,
    };
    let m1_obj = |u: &[f64]| obj(&[u.to_vec()]);
    let mut extra: Vec<Vec<f64>> = Vec::new();
    for k in 0..d {
        let mut e = vec![0.0; d];
        e[k] = 1.0;
        extra.push(e.clone());
        e[k] = -1.0;
        extra.push(e);
    }
    let (u1, v1) = optim::sphere_ascent(&dual_normalize, &m1_obj, d, &m1_cfg, salt, &extra);
    let mut best = CoreOutcome { value: v1, rows: vec![u1], m_used: 1 };

    for m in 2..=params.m_max {
        let seed_m = derive_seed(params.seed, salt, 1000 + m as u64);
        let rounds = (params.budget / (2 * m * d)).max(20);
        let warm: Vec<f64> = {
            let mut w: Vec<f64> = best.rows.iter().flat_map(|row| row.iter().copied()).collect();
            w.resize(m * d, 0.0);
            w
        };
        let run = |r: usize| -> Option<(f64, Vec<Vec<f64>>)> {
            let mut rng = rng_for(seed_m, "tuple-init", r as u64);
            let mut w: Vec<f64> = if r == 0 {
                // warm start: previous best witness plus fresh rows
                let mut w = warm.clone();
                let fresh = normal_vec(&mut rng, m * d);
                let start = (best.rows.len().min(m)) * d;
                w[start..].copy_from_slice(&fresh[start..]);
                w
            } else {
                normal_vec(&mut rng, m * d)
            };
            // normalize the starting tuple to keep the search scale sane
            let s0 = constraint_search(space, &split_rows(&w, d), complex_tuple, p, seed_m);
            if s0 > 1e-300 {
                let f = s0.powf(-1.0 / p);
                w.iter_mut().for_each(|x| *x *= f);
            }
            let fobj = |w: &[f64]| {
                let rows = split_rows(w, d);
                let s = constraint_search(space, &rows, complex_tuple, p, seed_m);
                if s < 1e-300 {
                    return 0.0;
                }
                obj(&rows) / s.powf(1.0 / p)
            };
            let (w, _) = optim::pattern_search_max(&fobj, &w, 0.3, 1e-9, rounds);
            let rows = split_rows(&w, d);
            let s = constraint_certify(space, &rows, complex_tuple, p, &params.one_weak);
            if s < 1e-300 {
                return None;
            }
            let f = s.powf(-1.0 / p);
            let rows: Vec<Vec<f64>> = rows.iter().map(|row| row.iter().map(|x| x * f).collect()).collect();
            Some((obj(&rows), rows))
        };
        let candidates = par::map_collect(params.restarts, run);
        for cand in candidates.into_iter().flatten() {
            // prefer the shorter witness unless the longer one clearly
            // wins; constraint estimates carry tiny noise that must not
            // displace an exactly-feasible m = 1 witness
            if cand.0 > best.value * (1.0 + 2e-6) {
                best = CoreOutcome { value: cand.0, rows: cand.1, m_used: m };
            }
        }
    }
    Ok(best)
}

fn split_rows(w: &[f64], d: usize) -> Vec<Vec<f64>> {
    w.chunks(d).map(|c| c.to_vec()).collect()
}

/// Estimate of the real free norm of `f` over the (realification of the)
/// space.
pub fn real_free_norm(f: &LatticeExpr, space: &NormedSpace, params: &EstimatorParams) -> Result<NormEstimate> {
    params.validate()?;
    f.validate_dims(space.real_dim())?;
    let obj = |rows: &[Vec<f64>]| real_rows_objective(f, rows);
    let out = estimate_core(space, false, 1.0, &obj, params, "real-free")?;
    let exact = if space.real_dim() == 1 { Some(real_dim1_oracle(f, space)?) } else { None };
    Ok(NormEstimate {
        lower_bound: out.value,
        witness: FunctionalTuple::Real(out.rows),
        exact,
        p: 1.0,
        variant: Variant::RealFree,
        method: MethodMeta {
            restarts: params.restarts,
            m_used: out.m_used,
            m_max: params.m_max,
            budget: params.budget,
            seed: params.seed,
        },
    })
}

/// Estimate of the complex free norm of `h = f + ig`.
pub fn complex_free_norm(
    h: &ComplexLatticeElem,
    space: &NormedSpace,
    params: &EstimatorParams,
) -> Result<NormEstimate> {
    params.validate()?;
    if !space.is_complex() {
        return Err(Error::RealSpaceInput);
    }
    h.validate_dims(space.real_dim())?;
    let obj = |rows: &[Vec<f64>]| complex_rows_objective(h, rows, 1.0);
    let out = estimate_core(space, true, 1.0, &obj, params, "complex-free")?;
    let exact = if space.dim() == 1 { Some(dim1_complex_oracle(h, space, 2048)?.value) } else { None };
    Ok(NormEstimate {
        lower_bound: out.value,
        witness: rows_to_tuple(&out.rows, true),
        exact,
        p: 1.0,
        variant: Variant::ComplexFree,
        method: MethodMeta {
            restarts: params.restarts,
            m_used: out.m_used,
            m_max: params.m_max,
            budget: params.budget,
            seed: params.seed,
        },
    })
}

/// Estimate of the free p-convex norm; `p = 1` coincides with
/// [`complex_free_norm`] (identical seeds give identical output), and
/// `p = ∞` reduces to a single-functional supremum.
pub fn p_free_norm(
    h: &ComplexLatticeElem,
    space: &NormedSpace,
    p: f64,
    params: &EstimatorParams,
) -> Result<NormEstimate> {
    params.validate()?;
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidParameter(format!("p must satisfy p >= 1, got {p}")));
    }
    if !space.is_complex() {
        return Err(Error::RealSpaceInput);
    }
    if p == 1.0 {
        return complex_free_norm(h, space, params);
    }
    h.validate_dims(space.real_dim())?;
    if p.is_infinite() {
        // objective sup_j |h(Re z_j*)| with every ||z_j*|| <= 1: one
        // functional suffices
        let obj = |rows: &[Vec<f64>]| complex_rows_objective(h, rows, 1.0);
        let single = EstimatorParams { m_max: 1, ..*params };
        let out = estimate_core(space, true, 1.0, &obj, &single, "pinf-free")?;
        let exact = if space.dim() == 1 { Some(dim1_complex_oracle(h, space, 2048)?.value) } else { None };
        return Ok(NormEstimate {
            lower_bound: out.value,
            witness: rows_to_tuple(&out.rows, true),
            exact,
            p,
            variant: Variant::ComplexFree,
            method: MethodMeta {
                restarts: params.restarts,
                m_used: out.m_used,
                m_max: 1,
                budget: params.budget,
                seed: params.seed,
            },
        });
    }
    let obj = |rows: &[Vec<f64>]| complex_rows_objective(h, rows, p);
    let out = estimate_core(space, true, p, &obj, params, "p-free")?;
    Ok(NormEstimate {
        lower_bound: out.value,
        witness: rows_to_tuple(&out.rows, true),
        exact: None,
        p,
        variant: Variant::ComplexFree,
        method: MethodMeta {
            restarts: params.restarts,
            m_used: out.m_used,
            m_max: params.m_max,
            budget: params.budget,
            seed: params.seed,
        },
    })
}

/// Exact-by-concentration oracle in complex dimension one.
#[derive(Debug, Clone, Serialize)]
pub struct Dim1Oracle {
    pub value: f64,
    pub theta: f64,
    pub grid_n: usize,
    /// Worst-case gap of the bare grid; golden refinement only tightens.
    pub grid_error_bound: f64,
}

/// Over `E = C` the norm constraint collapses to `Σ |c_j| <= 1`, so the
/// mass concentrates on a single unit functional and
/// `||h|| = max_θ |h|(u_θ)` with `u_θ` the dual-normalized circle.
pub fn dim1_complex_oracle(h: &ComplexLatticeElem, space: &NormedSpace, grid_n: usize) -> Result<Dim1Oracle> {
    if !space.is_complex() || space.dim() != 1 {
        return Err(Error::InvalidParameter("dim-1 oracle needs a complex space of dimension 1".into()));
    }
    if grid_n < 8 {
        return Err(Error::InvalidParameter("oracle grid needs at least 8 points".into()));
    }
    h.validate_dims(2)?;
    // dual norm of (cos θ, sin θ) is constant over θ for circled norms
    let r = space.dual_norm_real(&[1.0, 0.0])?;
    let m = |th: f64| {
        let u = [th.cos() / r, th.sin() / r];
        let v = h.cval_unchecked(&u);
        v.re.hypot(v.im)
    };
    let (theta, value) = optim::circle_max(m, grid_n);
    let bound = value * (1.0 - (std::f64::consts::PI / grid_n as f64).cos());
    Ok(Dim1Oracle { value, theta, grid_n, grid_error_bound: bound })
}

/// Exact real free norm over a one-dimensional real space with norm
/// `ν |t|`: the value is `ν · max(|f(1)|, |f(−1)|)`.
pub fn real_dim1_oracle(f: &LatticeExpr, space: &NormedSpace) -> Result<f64> {
    if space.is_complex() || space.real_dim() != 1 {
        return Err(Error::InvalidParameter("real dim-1 oracle needs a real 1-dimensional space".into()));
    }
    f.validate_dims(1)?;
    let nu = space.norm_real(&[1.0])?;
    Ok(nu * f.eval_unchecked(&[1.0]).abs().max(f.eval_unchecked(&[-1.0]).abs()))
}

// ---------------------------------------------------------------------
// Paired comparisons
// ---------------------------------------------------------------------

/// Two-sided comparison of the real and complex free norms of a real
/// element. The upper direction (`complex <= real`) is certified by
/// realifying the complex witness, which is feasible for the real norm
/// with the same objective; the lower direction (`real <= 2 complex`) is
/// certified in dimension one, where the complex side is an oracle, and
/// reported observationally above.
#[derive(Debug, Clone, Serialize)]
pub struct SandwichReport {
    pub complex_lb: f64,
    pub real_lb: f64,
    pub complex_oracle: Option<f64>,
    pub upper_ok: bool,
    pub lower_ok: bool,
    pub dim1_certified: bool,
}

pub fn norm_equivalence_check(
    f: &LatticeExpr,
    space: &NormedSpace,
    params: &EstimatorParams,
) -> Result<SandwichReport> {
    if !space.is_complex() {
        return Err(Error::RealSpaceInput);
    }
    let d = space.real_dim();
    f.validate_dims(d)?;
    let h = ComplexLatticeElem::from_real(f.clone(), d);
    let complex_est = complex_free_norm(&h, space, params)?;
    let real_est = real_free_norm(f, space, params)?;

    // witness exchange: |Re z*(x)| <= |z*(x)| pointwise on the ball, so
    // the realified complex witness is feasible for the real constraint
    // and carries the same objective for a real element.
    let exchanged = FunctionalTuple::Real(complex_est.witness.realified());
    let exchanged_value = tuple_objective_real(f, &exchanged);
    let mut real_lb = real_est.lower_bound.max(exchanged_value);

    let mut complex_lb = complex_est.lower_bound;
    let mut dim1_certified = false;
    let mut complex_oracle = None;
    if space.dim() == 1 {
        let oracle = dim1_complex_oracle(&h, space, 4096)?;
        complex_lb = complex_lb.max(oracle.value);
        // the oracle's argmax functional is a feasible m = 1 real witness
        let r = space.dual_norm_real(&[1.0, 0.0])?;
        let u = vec![vec![oracle.theta.cos() / r, oracle.theta.sin() / r]];
        real_lb = real_lb.max(tuple_objective_real(f, &FunctionalTuple::Real(u)));
        complex_oracle = Some(oracle.value);
        dim1_certified = true;
    }

    let tol = if dim1_certified { 1e-9 } else { 1e-6 };
    let upper_ok = complex_lb <= real_lb + tol * (1.0 + real_lb);
    let lower_ok = 0.5 * real_lb <= complex_lb + tol * (1.0 + complex_lb);
    Ok(SandwichReport { complex_lb, real_lb, complex_oracle, upper_ok, lower_ok, dim1_certified })
}

/// The element `f − ig`, the image of `h = f + ig` under the lattice
/// isometry onto the free lattice of the conjugate space.
pub fn conjugate_elem(h: &ComplexLatticeElem) -> ComplexLatticeElem {
    ComplexLatticeElem { re: h.re.clone(), im: LatticeExpr::scale(-1.0, h.im.clone()) }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConjugateReport {
    pub value: f64,
    pub value_conjugate: f64,
    pub oracle: Option<f64>,
    pub oracle_conjugate: Option<f64>,
    pub agree: bool,
}

/// Compares the norm of `h` over `E` with the norm of its conjugate over
/// `conj(E)`, exchanging `ψ`-conjugated witnesses both ways. Pointwise
/// moduli agree, so after the exchange both certified bounds coincide up
/// to the stated tolerance.
pub fn conjugate_invariance_check(
    h: &ComplexLatticeElem,
    space: &NormedSpace,
    params: &EstimatorParams,
) -> Result<ConjugateReport> {
    if !space.is_complex() {
        return Err(Error::RealSpaceInput);
    }
    let conj_space = space.conjugate()?;
    let hbar = conjugate_elem(h);
    let est = complex_free_norm(h, space, params)?;
    let alt = EstimatorParams { seed: derive_seed(params.seed, "conjugate-run", 1), ..*params };
    let est_conj = complex_free_norm(&hbar, &conj_space, &alt)?;

    // ψ maps a feasible tuple over E to a feasible tuple over conj(E)
    // with equal moduli at corresponding points.
    let v_cross_a = tuple_objective_complex(&hbar, &est.witness.conjugate(), 1.0);
    let v_cross_b = tuple_objective_complex(h, &est_conj.witness.conjugate(), 1.0);
    let value = est.lower_bound.max(v_cross_b);
    let value_conjugate = est_conj.lower_bound.max(v_cross_a);

    let (oracle, oracle_conjugate) = if space.dim() == 1 {
        (
            Some(dim1_complex_oracle(h, space, 2048)?.value),
            Some(dim1_complex_oracle(&hbar, &conj_space, 2048)?.value),
        )
    } else {
        (None, None)
    };
    let agree = (value - value_conjugate).abs() <= 1e-6 * (1.0 + value.abs())
        && match (oracle, oracle_conjugate) {
            (Some(a), Some(b)) => a == b,
            _ => true,
        };
    Ok(ConjugateReport { value, value_conjugate, oracle, oracle_conjugate, agree })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::delta_embed;
    use crate::rng::{normal_complex_vec, rng_for};
    use crate::spaces::Field;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn quick_params(seed: u64) -> EstimatorParams {
        EstimatorParams {
            m_max: 3,
            restarts: 4,
            budget: 800,
            seed,
            one_weak: OneWeakParams { restarts: 12, phase_grid: 16, seed },
        }
    }

    #[test]
    fn real_free_norm_dim1_bruteforce_case() {
        // f(t) = 2 t⁺ + 3 t⁻ has f(1) = 2, f(−1) = 3; norm is max = 3
        let space = NormedSpace::lp(1, Field::Real, 2.0).unwrap();
        let tplus = LatticeExpr::sup(vec![LatticeExpr::Gen(vec![1.0]), LatticeExpr::zero(1)]).unwrap();
        let tminus = LatticeExpr::sup(vec![LatticeExpr::Gen(vec![-1.0]), LatticeExpr::zero(1)]).unwrap();
        let f = LatticeExpr::Add(vec![LatticeExpr::scale(2.0, tplus), LatticeExpr::scale(3.0, tminus)]);
        assert_eq!(f.eval(&[1.0]).unwrap(), 2.0);
        assert_eq!(f.eval(&[-1.0]).unwrap(), 3.0);
        let est = real_free_norm(&f, &space, &quick_params(1)).unwrap();
        assert_eq!(est.exact, Some(3.0));
        assert!((est.lower_bound - 3.0).abs() < 1e-7, "{}", est.lower_bound);
        assert!(est.lower_bound <= 3.0 + 1e-9);
    }

    #[test]
    fn real_free_norm_of_delta_is_the_norm() {
        let mut rng = rng_for(2, "rfn-delta", 0);
        for p in [1.0, 2.0, f64::INFINITY] {
            let space = NormedSpace::lp(2, Field::Real, p).unwrap();
            let x = normal_vec(&mut rng, 2);
            let f = LatticeExpr::Gen(x.clone());
            let est = real_free_norm(&f, &space, &quick_params(3)).unwrap();
            let expect = space.norm_real(&x).unwrap();
            assert!(
                (est.lower_bound - expect).abs() <= 1e-6 * (1.0 + expect),
                "p={p}: {} vs {expect}",
                est.lower_bound
            );
        }
    }

    #[test]
    fn zero_element_estimates_zero() {
        let space = NormedSpace::lp(2, Field::Complex, 2.0).unwrap();
        let h = ComplexLatticeElem::zero(4);
        let est = complex_free_norm(&h, &space, &quick_params(4)).unwrap();
        assert_eq!(est.lower_bound, 0.0);
        let f = LatticeExpr::zero(4);
        let est = real_free_norm(&f, &space, &quick_params(4)).unwrap();
        assert_eq!(est.lower_bound, 0.0);
    }

    #[test]
    fn delta_isometry_small() {
        let mut rng = rng_for(5, "iso-small", 0);
        for (p, n) in [(1.0, 2usize), (2.0, 2), (3.0, 3), (f64::INFINITY, 2)] {
            let space = NormedSpace::lp(n, Field::Complex, p).unwrap();
            let z = normal_complex_vec(&mut rng, n);
            let h = delta_embed(&space, &z).unwrap();
            let expect = space.norm_complex(&z).unwrap();
            let est = complex_free_norm(&h, &space, &quick_params(6)).unwrap();
            assert!(
                (est.lower_bound - expect).abs() <= 1e-6 * (1.0 + expect),
                "p={p} n={n}: {} vs {expect}",
                est.lower_bound
            );
            // feasible witnesses cannot exceed the norm
            assert!(est.lower_bound <= expect + 1e-9 * (1.0 + expect));
        }
    }

    #[test]
    fn dim1_oracle_cases() {
        let space = NormedSpace::lp(1, Field::Complex, 2.0).unwrap();
        let h = delta_embed(&space, &[c(1.0, 0.0)]).unwrap();
        let oracle = dim1_complex_oracle(&h, &space, 512).unwrap();
        assert!((oracle.value - 1.0).abs() < 1e-10);
        // real-part-only element: max_θ |cos θ| = 1
        let g = ComplexLatticeElem::from_real(LatticeExpr::Gen(vec![1.0, 0.0]), 2);
        let oracle = dim1_complex_oracle(&g, &space, 512).unwrap();
        assert!((oracle.value - 1.0).abs() < 1e-10);
        // homogeneity: scaling by 3 scales the oracle
        let g3 = ComplexLatticeElem::from_real(LatticeExpr::scale(3.0, LatticeExpr::Gen(vec![1.0, 0.0])), 2);
        let o3 = dim1_complex_oracle(&g3, &space, 512).unwrap();
        assert!((o3.value - 3.0 * oracle.value).abs() < 1e-9);
        assert!(dim1_complex_oracle(&h, &space, 4).is_err());
    }

    #[test]
    fn estimator_matches_dim1_oracle_on_random_elems() {
        let space = NormedSpace::lp(1, Field::Complex, 2.0).unwrap();
        for trial in 0..6 {
            let mut rng = rng_for(trial, "dim1-match", 0);
            let h = crate::sampling::random_elem(&mut rng, 2, 2);
            let est = complex_free_norm(&h, &space, &quick_params(trial)).unwrap();
            let oracle = est.exact.unwrap();
            assert!(
                (est.lower_bound - oracle).abs() <= 1e-3 * (1.0 + oracle),
                "trial {trial}: {} vs {oracle}",
                est.lower_bound
            );
            assert!(est.lower_bound <= oracle + 1e-9 * (1.0 + oracle));
        }
    }

    #[test]
    fn p_free_norm_reductions() {
        let space = NormedSpace::lp(1, Field::Complex, 2.0).unwrap();
        let h = delta_embed(&space, &[c(0.6, -0.8)]).unwrap();
        let params = quick_params(7);
        let p1 = p_free_norm(&h, &space, 1.0, &params).unwrap();
        let base = complex_free_norm(&h, &space, &params).unwrap();
        assert_eq!(p1.lower_bound, base.lower_bound);
        // δ stays isometric for every p
        for p in [1.5, 2.0, 3.0, f64::INFINITY] {
            let est = p_free_norm(&h, &space, p, &params).unwrap();
            assert!((est.lower_bound - 1.0).abs() <= 1e-6, "p={p}: {}", est.lower_bound);
        }
        assert!(p_free_norm(&h, &space, 0.5, &params).is_err());
        // p = ∞ on δ_E(1): sup over unit functionals is 1
        let h1 = delta_embed(&space, &[c(1.0, 0.0)]).unwrap();
        let est = p_free_norm(&h1, &space, f64::INFINITY, &params).unwrap();
        assert!((est.lower_bound - 1.0).abs() <= 1e-7);
    }

    #[test]
    fn budget_must_be_positive() {
        let space = NormedSpace::lp(1, Field::Complex, 2.0).unwrap();
        let h = ComplexLatticeElem::zero(2);
        let bad = EstimatorParams { budget: 0, ..quick_params(1) };
        assert!(complex_free_norm(&h, &space, &bad).is_err());
    }

    #[test]
    fn sandwich_dim1_certified() {
        let space = NormedSpace::lp(1, Field::Complex, 2.0).unwrap();
        // f(a,b) = |a| : real norm 1, complex oracle 1, tight sandwich
        let f =
            LatticeExpr::sup(vec![LatticeExpr::Gen(vec![1.0, 0.0]), LatticeExpr::Gen(vec![-1.0, 0.0])]).unwrap();
        let rep = norm_equivalence_check(&f, &space, &quick_params(8)).unwrap();
        assert!(rep.dim1_certified);
        assert!(rep.upper_ok && rep.lower_ok, "{rep:?}");
        assert!((rep.complex_oracle.unwrap() - 1.0).abs() < 1e-9);
        assert!((rep.real_lb - 1.0).abs() < 1e-6, "{}", rep.real_lb);

        // zero element
        let rep = norm_equivalence_check(&LatticeExpr::zero(2), &space, &quick_params(8)).unwrap();
        assert_eq!(rep.complex_lb, 0.0);
        assert_eq!(rep.real_lb, 0.0);
        assert!(rep.upper_ok && rep.lower_ok);
    }

    #[test]
    fn sandwich_on_random_real_exprs_dim2() {
        let space = NormedSpace::lp(2, Field::Complex, 2.0).unwrap();
        for trial in 0..4 {
            let mut rng = rng_for(trial, "sandwich2", 0);
            let f = crate::sampling::random_expr(&mut rng, 4, 2);
            let rep = norm_equivalence_check(&f, &space, &quick_params(trial)).unwrap();
            assert!(rep.upper_ok, "trial {trial}: {rep:?}");
            assert!(rep.lower_ok, "trial {trial}: {rep:?}");
        }
    }

    #[test]
    fn conjugate_invariance_on_deltas_and_random() {
        let space = NormedSpace::lp(1, Field::Complex, 2.0).unwrap();
        let h = delta_embed(&space, &[c(0.3, 0.4)]).unwrap();
        let rep = conjugate_invariance_check(&h, &space, &quick_params(9)).unwrap();
        assert!(rep.agree, "{rep:?}");
        assert_eq!(rep.oracle, rep.oracle_conjugate);
        let mut rng = rng_for(11, "conj-rand", 0);
        let h = crate::sampling::random_elem(&mut rng, 2, 2);
        let rep = conjugate_invariance_check(&h, &space, &quick_params(10)).unwrap();
        assert!(rep.agree, "{rep:?}");
    }

    #[test]
    fn witness_objective_matches_lower_bound() {
        let space = NormedSpace::lp(2, Field::Complex, 3.0).unwrap();
        let mut rng = rng_for(13, "witness-obj", 0);
        let h = crate::sampling::random_elem(&mut rng, 4, 2);
        let est = complex_free_norm(&h, &space, &quick_params(13)).unwrap();
        let replayed = tuple_objective_complex(&h, &est.witness, 1.0);
        assert!((replayed - est.lower_bound).abs() <= 1e-12 * (1.0 + est.lower_bound));
        // witness is feasible under the certification oracle
        let s = constraint_certify(&space, &est.witness.realified(), true, 1.0, &quick_params(13).one_weak);
        assert!(s <= 1.0 + 1e-9, "one-weak of witness {s}");
    }

    #[test]
    fn homogeneity_and_shared_witness_triangle() {
        let space = NormedSpace::lp(2, Field::Complex, 2.0).unwrap();
        let mut rng = rng_for(17, "homog-tri", 0);
        let h1 = crate::sampling::random_elem(&mut rng, 4, 2);
        let h2 = crate::sampling::random_elem(&mut rng, 4, 2);
        let est = complex_free_norm(&h1, &space, &quick_params(17)).unwrap();
        // scaling the element scales the witness objective exactly
        let h3 = h1.scale_complex(c(2.5, 0.0));
        let v3 = tuple_objective_complex(&h3, &est.witness, 1.0);
        assert!((v3 - 2.5 * est.lower_bound).abs() <= 1e-9 * (1.0 + v3));
        // triangle inequality at any fixed witness
        let sum = h1.addition(&h2);
        let a = tuple_objective_complex(&sum, &est.witness, 1.0);
        let b = tuple_objective_complex(&h1, &est.witness, 1.0) + tuple_objective_complex(&h2, &est.witness, 1.0);
        assert!(a <= b + 1e-12 * (1.0 + b));
    }
}
