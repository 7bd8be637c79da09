//! Seeded, derivative-light maximization routines used by the norm
//! oracles and the free-norm estimators.
//!
//! Everything here maximizes a continuous, positively homogeneous (or
//! periodic) objective over a compact set, so multi-start local ascent
//! with a deterministic seed is the whole story. Restarts run in
//! parallel; the reduction is order-stable, so results do not depend on
//! thread count.

use crate::par;
use crate::rng::{normal_vec, rng_for};

const TAU: f64 = std::f64::consts::TAU;

/// Multi-start budget for one maximization call.
#[derive(Debug, Clone, Copy)]
pub struct AscentConfig {
    pub restarts: usize,
    pub iters: usize,
    pub seed: u64,
}

impl Default for AscentConfig {
    fn default() -> Self {
        AscentConfig { restarts: 32, iters: 120, seed: crate::rng::DEFAULT_SEED }
    }
}

/// Golden-section search for the maximum of `f` on `[a, b]`.
/// Returns `(argmax, max)`. Assumes `f` is unimodal on the bracket;
/// callers bracket with a grid first.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, iters: usize) -> (f64, f64) {
    let inv_phi = 0.618_033_988_749_894_9_f64;
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..iters {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    let mid = 0.5 * (lo + hi);
    let fm = f(mid);
    if fm >= f1 && fm >= f2 {
        (mid, fm)
    } else if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Maximum of a `2π`-periodic function: grid scan plus golden-section
/// refinement in the two cells around the best grid point.
pub fn circle_max<F: Fn(f64) -> f64>(f: F, grid: usize) -> (f64, f64) {
    let n = grid.max(4);
    let step = TAU / n as f64;
    let mut best = (0.0, f(0.0));
    for k in 1..n {
        let th = k as f64 * step;
        let v = f(th);
        if v > best.1 {
            best = (th, v);
        }
    }
    let (th, _) = best;
    let (x, v) = golden_section_max(&f, th - step, th + step, 60);
    if v > best.1 {
        (x.rem_euclid(TAU), v)
    } else {
        best
    }
}

/// Cyclic coordinate ascent over the `m`-torus of phases, with grid
/// initialization per coordinate and golden-section refinement.
/// Restart 0 always starts at the zero phase vector so the identity
/// sign pattern is never missed. Returns `(phases, value)`.
pub fn torus_ascent<F>(f: &F, m: usize, grid: usize, restarts: usize, seed: u64, salt: &str) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    assert!(m >= 1);
    let run = |r: usize| -> (Vec<f64>, f64) {
        let mut th = if r == 0 {
            vec![0.0; m]
        } else {
            let mut rng = rng_for(seed, salt, r as u64);
            normal_vec(&mut rng, m).iter().map(|x| x.rem_euclid(1.0) * TAU).collect()
        };
        let mut val = f(&th);
        for _sweep in 0..60 {
            let before = val;
            for j in 0..m {
                let fj = |t: f64| {
                    let mut p = th.clone();
                    p[j] = t;
                    f(&p)
                };
                let (tj, vj) = circle_max(fj, grid);
                if vj > val {
                    th[j] = tj;
                    val = vj;
                }
            }
            if val - before <= 1e-14 * (1.0 + val.abs()) {
                break;
            }
        }
        (th, val)
    };
    let results = par::map_collect(restarts.max(1), run);
    let mut best: Option<(Vec<f64>, f64)> = None;
    for (th, v) in results {
        match &best {
            Some((_, bv)) if v <= *bv => {}
            _ => best = Some((th, v)),
        }
    }
    best.unwrap()
}

/// Projected multi-start ascent over the unit sphere of an arbitrary
/// norm. `normalize` rescales a vector onto the sphere in place and
/// reports `false` when the input was (numerically) zero. Gradients are
/// central differences; a coordinate pattern-search polish follows.
///
/// `extra_starts` lets callers seed known good candidates (vertices of
/// polytope balls, exchanged witnesses) alongside the random restarts.
pub fn sphere_ascent<N, F>(
    normalize: &N,
    f: &F,
    dim: usize,
    cfg: &AscentConfig,
    salt: &str,
    extra_starts: &[Vec<f64>],
) -> (Vec<f64>, f64)
where
    N: Fn(&mut Vec<f64>) -> bool + Sync,
    F: Fn(&[f64]) -> f64 + Sync,
{
    assert!(dim >= 1);
    let total = cfg.restarts.max(1) + extra_starts.len();
    let run = |r: usize| -> Option<(Vec<f64>, f64)> {
        let mut x = if r < extra_starts.len() {
            extra_starts[r].clone()
        } else {
            let mut rng = rng_for(cfg.seed, salt, (r - extra_starts.len()) as u64);
            normal_vec(&mut rng, dim)
        };
        if !normalize(&mut x) {
            return None;
        }
        let mut val = f(&x);
        let mut step = 0.5;
        for _ in 0..cfg.iters {
            // central-difference gradient along ambient coordinates
            let h = 1e-6;
            let mut g = vec![0.0; dim];
            for k in 0..dim {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[k] += h;
                xm[k] -= h;
                if !normalize(&mut xp) || !normalize(&mut xm) {
                    continue;
                }
                g[k] = (f(&xp) - f(&xm)) / (2.0 * h);
            }
            let gn = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            if gn < 1e-14 {
                break;
            }
            let mut improved = false;
            for _ in 0..30 {
                let mut y: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi + step * gi / gn).collect();
                if normalize(&mut y) {
                    let vy = f(&y);
                    if vy > val + 1e-15 * (1.0 + val.abs()) {
                        x = y;
                        val = vy;
                        step *= 1.6;
                        improved = true;
                        break;
                    }
                }
                step *= 0.5;
                if step < 1e-13 {
                    break;
                }
            }
            if !improved {
                break;
            }
        }
        // pattern polish: coordinate moves with shrinking radius
        let mut delta = 1e-3;
        while delta > 1e-12 {
            let mut moved = false;
            for k in 0..dim {
                for s in [delta, -delta] {
                    let mut y = x.clone();
                    y[k] += s;
                    if normalize(&mut y) {
                        let vy = f(&y);
                        if vy > val {
                            x = y;
                            val = vy;
                            moved = true;
                        }
                    }
                }
            }
            if !moved {
                delta *= 0.25;
            }
        }
        Some((x, val))
    };
    let results = par::map_collect(total, run);
    let mut best: Option<(Vec<f64>, f64)> = None;
    for r in results.into_iter().flatten() {
        match &best {
            Some((_, bv)) if r.1 <= *bv => {}
            _ => best = Some(r),
        }
    }
    best.expect("sphere_ascent: no valid start (all normalizations failed)")
}

/// Gradient-free pattern search maximizing `f` over raw coefficients,
/// starting from `x0`. Used for tuple-coefficient ascent where the
/// objective is only piecewise smooth.
pub fn pattern_search_max<F>(f: &F, x0: &[f64], init_step: f64, min_step: f64, max_rounds: usize) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> f64,
{
    let mut x = x0.to_vec();
    let mut val = f(&x);
    let mut step = init_step;
    let mut rounds = 0;
    while step > min_step && rounds < max_rounds {
        rounds += 1;
        let mut moved = false;
        for k in 0..x.len() {
            for s in [step, -step] {
                let old = x[k];
                x[k] = old + s;
                let v = f(&x);
                if v > val + 1e-15 * (1.0 + val.abs()) {
                    val = v;
                    moved = true;
                } else {
                    x[k] = old;
                }
            }
        }
        if !moved {
            step *= 0.4;
        } else {
            step *= 1.2;
        }
    }
    (x, val)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_quadratic_peak() {
        let (x, v) = golden_section_max(|t| 1.0 - (t - 0.3) * (t - 0.3), 0.0, 1.0, 80);
        // comparison search resolves a smooth argmax only to ~sqrt(eps);
        // the value itself is second-order accurate
        assert!((x - 0.3).abs() < 1e-6);
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn circle_max_cosine() {
        let (th, v) = circle_max(|t| (t - 1.0).cos(), 64);
        assert!((v - 1.0).abs() < 1e-12);
        assert!((th - 1.0).abs() < 1e-6);
    }

    #[test]
    fn torus_recovers_separable_peak() {
        let f = |th: &[f64]| (th[0] - 0.5).cos() + (th[1] - 2.0).cos();
        let (_, v) = torus_ascent(&f, 2, 16, 4, 1, "t");
        assert!((v - 2.0).abs() < 1e-10);
    }

    #[test]
    fn sphere_ascent_linear_objective_euclidean() {
        // max <c, x> over the euclidean sphere is |c|_2
        let c = [3.0, -4.0, 12.0];
        let normalize = |x: &mut Vec<f64>| {
            let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if n < 1e-300 {
                return false;
            }
            x.iter_mut().for_each(|v| *v /= n);
            true
        };
        let f = |x: &[f64]| x.iter().zip(&c).map(|(a, b)| a * b).sum::<f64>();
        let cfg = AscentConfig { restarts: 8, iters: 200, seed: 7 };
        let (_, v) = sphere_ascent(&normalize, &f, 3, &cfg, "lin", &[]);
        assert!((v - 13.0).abs() < 1e-8, "got {v}");
    }

    #[test]
    fn pattern_search_quadratic() {
        let f = |x: &[f64]| -(x[0] - 1.0).powi(2) - (x[1] + 2.0).powi(2);
        let (x, v) = pattern_search_max(&f, &[0.0, 0.0], 0.5, 1e-10, 10_000);
        assert!(v > -1e-12);
        assert!((x[0] - 1.0).abs() < 1e-5 && (x[1] + 2.0).abs() < 1e-5);
    }
}
