//! Minimal dense complex linear algebra: LU with partial pivoting,
//! Hessenberg reduction, shifted-QR eigenvalues and inverse-iteration
//! eigenvectors. Matrices here are tiny (dimension <= 32), so clarity
//! wins over blocking and balancing.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::rng::{normal, rng_for};

type C = Complex64;

fn czero() -> C {
    C::new(0.0, 0.0)
}

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<C>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![czero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<C>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidParameter("matrix needs at least one row".into()));
        }
        let cols = rows[0].len();
        if cols == 0 || rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidParameter("ragged or empty matrix rows".into()));
        }
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            for (j, v) in r.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        Ok(m)
    }

    pub fn to_rows(&self) -> Vec<Vec<C>> {
        (0..self.rows).map(|i| (0..self.cols).map(|j| self[(i, j)]).collect()).collect()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> CMatrix {
        let mut t = CMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn conj_transpose(&self) -> CMatrix {
        let mut t = CMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].conj();
            }
        }
        t
    }

    pub fn mat_mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == czero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mat_vec(&self, v: &[C]) -> Vec<C> {
        assert_eq!(self.cols, v.len());
        (0..self.rows).map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum()).collect()
    }

    pub fn scale(&self, c: f64) -> CMatrix {
        let mut out = self.clone();
        for v in out.data.iter_mut() {
            *v *= c;
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> C {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = C;
    fn index(&self, (i, j): (usize, usize)) -> &C {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C {
        &mut self.data[i * self.cols + j]
    }
}

// ---------------------------------------------------------------------
// LU decomposition
// ---------------------------------------------------------------------

pub struct Lu {
    lu: CMatrix,
    piv: Vec<usize>,
    swaps: usize,
    singular: bool,
}

pub fn lu_decompose(a: &CMatrix) -> Lu {
    assert!(a.is_square());
    let n = a.rows;
    let mut m = a.clone();
    let mut piv: Vec<usize> = (0..n).collect();
    let mut swaps = 0;
    let mut singular = false;
    for col in 0..n {
        let (mut best, mut best_val) = (col, m[(col, col)].norm());
        for r in (col + 1)..n {
            let v = m[(r, col)].norm();
            if v > best_val {
                best = r;
                best_val = v;
            }
        }
        if best_val < 1e-300 {
            singular = true;
            continue;
        }
        if best != col {
            for j in 0..n {
                let tmp = m[(col, j)];
                m[(col, j)] = m[(best, j)];
                m[(best, j)] = tmp;
            }
            piv.swap(col, best);
            swaps += 1;
        }
        let d = m[(col, col)];
        for r in (col + 1)..n {
            let f = m[(r, col)] / d;
            m[(r, col)] = f;
            for j in (col + 1)..n {
                let sub = f * m[(col, j)];
                m[(r, j)] -= sub;
            }
        }
    }
    Lu { lu: m, piv, swaps, singular }
}

impl Lu {
    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn det(&self) -> C {
        if self.singular {
            return czero();
        }
        let n = self.lu.rows;
        let mut d = if self.swaps % 2 == 0 { C::new(1.0, 0.0) } else { C::new(-1.0, 0.0) };
        for i in 0..n {
            d *= self.lu[(i, i)];
        }
        d
    }

    pub fn solve(&self, b: &[C]) -> Option<Vec<C>> {
        if self.singular {
            return None;
        }
        let n = self.lu.rows;
        let mut y: Vec<C> = (0..n).map(|i| b[self.piv[i]]).collect();
        for i in 0..n {
            for j in 0..i {
                let sub = self.lu[(i, j)] * y[j];
                y[i] -= sub;
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                let sub = self.lu[(i, j)] * y[j];
                y[i] -= sub;
            }
            y[i] /= self.lu[(i, i)];
        }
        Some(y)
    }
}

// ---------------------------------------------------------------------
// Eigenvalues: Hessenberg + shifted QR
// ---------------------------------------------------------------------

fn hessenberg(a: &mut CMatrix) {
    let n = a.rows;
    for k in 0..n.saturating_sub(2) {
        let mut xnorm: f64 = 0.0;
        for i in (k + 1)..n {
            xnorm = xnorm.hypot(a[(i, k)].norm());
        }
        if xnorm < 1e-300 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { C::new(1.0, 0.0) };
        let alpha = -phase * xnorm;
        let mut v: Vec<C> = (0..n).map(|i| if i > k { a[(i, k)] } else { czero() }).collect();
        v[k + 1] -= alpha;
        let vnorm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if vnorm < 1e-300 {
            continue;
        }
        for c in v.iter_mut() {
            *c /= vnorm;
        }
        // left: A -= 2 v (v* A)
        for j in 0..n {
            let mut s = czero();
            for i in (k + 1)..n {
                s += v[i].conj() * a[(i, j)];
            }
            s *= 2.0;
            for i in (k + 1)..n {
                let sub = v[i] * s;
                a[(i, j)] -= sub;
            }
        }
        // right: A -= 2 (A v) v*
        for i in 0..n {
            let mut s = czero();
            for j in (k + 1)..n {
                s += a[(i, j)] * v[j];
            }
            s *= 2.0;
            for j in (k + 1)..n {
                let sub = s * v[j].conj();
                a[(i, j)] -= sub;
            }
        }
        for i in (k + 2)..n {
            a[(i, k)] = czero();
        }
        a[(k + 1, k)] = alpha;
    }
}

fn eig_2x2(a: C, b: C, c: C, d: C) -> (C, C) {
    let mean = (a + d) * 0.5;
    let disc = ((a - d) * 0.5) * ((a - d) * 0.5) + b * c;
    let root = disc.sqrt();
    (mean + root, mean - root)
}

/// Givens rotation `[c, s; -conj(s), c]` (real `c >= 0`) zeroing `b`.
fn givens(a: C, b: C) -> (f64, C) {
    let an = a.norm();
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, czero());
    }
    if an == 0.0 {
        return (0.0, C::new(1.0, 0.0));
    }
    let rho = an.hypot(bn);
    let c = an / rho;
    let s = (a / an) * b.conj() / rho;
    (c, s)
}

/// Eigenvalues of a square complex matrix by the shifted QR algorithm on
/// the Hessenberg form. Multiplicities are respected; order is by
/// deflation, not sorted.
pub fn eigenvalues(a: &CMatrix) -> Result<Vec<C>> {
    if !a.is_square() {
        return Err(Error::NonSquareMatrix { rows: a.rows, cols: a.cols });
    }
    let n = a.rows;
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut h = a.clone();
    hessenberg(&mut h);
    let mut eigs: Vec<C> = Vec::with_capacity(n);
    let mut hi = n - 1;
    let mut iters_here = 0usize;
    let mut total_iters = 0usize;
    let max_total = 60 * n.max(4);
    let eps = 1e-14;

    loop {
        // deflate negligible subdiagonals in the active window
        for k in 0..hi {
            let small = eps * (h[(k, k)].norm() + h[(k + 1, k + 1)].norm()).max(1e-300);
            if h[(k + 1, k)].norm() <= small {
                h[(k + 1, k)] = czero();
            }
        }
        // lowest l such that the block [l..=hi] is unreduced
        let mut l = hi;
        while l > 0 && h[(l, l - 1)] != czero() {
            l -= 1;
        }
        if l == hi {
            eigs.push(h[(hi, hi)]);
            if hi == 0 {
                break;
            }
            hi -= 1;
            iters_here = 0;
            continue;
        }
        if l + 1 == hi {
            let (e1, e2) = eig_2x2(h[(l, l)], h[(l, hi)], h[(hi, l)], h[(hi, hi)]);
            eigs.push(e1);
            eigs.push(e2);
            if l == 0 {
                break;
            }
            hi = l - 1;
            iters_here = 0;
            continue;
        }

        total_iters += 1;
        iters_here += 1;
        if total_iters > max_total {
            return Err(Error::EigNoConvergence { iters: total_iters });
        }

        // Wilkinson shift from the trailing 2x2, exceptional every 12
        let shift = if iters_here % 12 == 0 {
            C::new(h[(hi, hi - 1)].norm() + h[(hi - 1, hi - 2)].norm(), 0.0) * 0.75 + h[(hi, hi)]
        } else {
            let (e1, e2) = eig_2x2(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)]);
            let t = h[(hi, hi)];
            if (e1 - t).norm() <= (e2 - t).norm() {
                e1
            } else {
                e2
            }
        };

        // explicit shifted QR sweep on the block [l..=hi]
        for i in l..=hi {
            h[(i, i)] -= shift;
        }
        let mut rots: Vec<(f64, C)> = Vec::with_capacity(hi - l);
        for k in l..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            rots.push((c, s));
            for j in k..=hi.min(n - 1) {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = x * c + s * y;
                h[(k + 1, j)] = -s.conj() * x + y * c;
            }
        }
        for (k, (c, s)) in rots.iter().enumerate() {
            let k = l + k;
            let top = (k + 2).min(hi);
            for i in l..=top {
                let x = h[(i, k)];
                let y = h[(i, k + 1)];
                h[(i, k)] = x * *c + y * s.conj();
                h[(i, k + 1)] = -(*s) * x + y * *c;
            }
        }
        for i in l..=hi {
            h[(i, i)] += shift;
        }
    }
    Ok(eigs)
}

/// Inverse-iteration eigenvector for a computed eigenvalue; `None` when
/// iteration fails to reach a small residual (defective directions).
pub fn eigenvector(a: &CMatrix, lambda: C, seed: u64) -> Option<Vec<C>> {
    let n = a.rows;
    let scale = a.max_abs().max(lambda.norm()).max(1e-30);
    for attempt in 0..5u32 {
        let jitter = scale * 1e-11 * (attempt as f64 + 1.0);
        let shift = lambda + C::new(jitter, 0.5 * jitter);
        let mut b = a.clone();
        for i in 0..n {
            b[(i, i)] -= shift;
        }
        let fac = lu_decompose(&b);
        if fac.is_singular() {
            continue;
        }
        let mut rng = rng_for(seed, "inv-iter", attempt as u64);
        let mut x: Vec<C> = (0..n).map(|_| C::new(normal(&mut rng), normal(&mut rng))).collect();
        let nx = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        for v in x.iter_mut() {
            *v /= nx;
        }
        for _ in 0..8 {
            let Some(mut y) = fac.solve(&x) else { break };
            let ny = y.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            if !ny.is_finite() || ny < 1e-300 {
                break;
            }
            for v in y.iter_mut() {
                *v /= ny;
            }
            x = y;
            let ax = a.mat_vec(&x);
            let res: f64 = ax
                .iter()
                .zip(&x)
                .map(|(av, xv)| (av - lambda * xv).norm_sqr())
                .sum::<f64>()
                .sqrt();
            if res <= 1e-10 * scale {
                return Some(x);
            }
        }
    }
    None
}

/// Eigenvalues paired with inverse-iteration eigenvectors. Errors if any
/// eigendirection cannot be recovered (e.g. defective matrices).
pub fn eigenpairs(a: &CMatrix, seed: u64) -> Result<Vec<(C, Vec<C>)>> {
    let eigs = eigenvalues(a)?;
    let mut out = Vec::with_capacity(eigs.len());
    for (k, lam) in eigs.iter().enumerate() {
        let v = eigenvector(a, *lam, seed.wrapping_add(k as u64)).ok_or(Error::EigNoConvergence { iters: 0 })?;
        out.push((*lam, v));
    }
    Ok(out)
}

/// Spectral (l2 operator) norm via the largest eigenvalue of `A* A`.
pub fn op_norm_2(a: &CMatrix) -> Result<f64> {
    let ata = a.conj_transpose().mat_mul(a);
    let eigs = eigenvalues(&ata)?;
    Ok(eigs.iter().map(|e| e.re.max(0.0)).fold(0.0, f64::max).sqrt())
}

/// Realified action of a complex matrix `T = A + iB` on block vectors
/// `(Re z, Im z)`: `[[A, -B], [B, A]]`, size `2 rows x 2 cols`.
pub fn realified_matrix(t: &CMatrix) -> Vec<Vec<f64>> {
    let (r, c) = (t.rows, t.cols);
    let mut m = vec![vec![0.0; 2 * c]; 2 * r];
    for i in 0..r {
        for j in 0..c {
            let v = t[(i, j)];
            m[i][j] = v.re;
            m[i][j + c] = -v.im;
            m[i + r][j] = v.im;
            m[i + r][j + c] = v.re;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_for;
    use crate::sampling::random_matrix;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn sorted_by_re_im(mut v: Vec<C>) -> Vec<C> {
        v.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
        v
    }

    #[test]
    fn lu_solves_and_det() {
        let a = CMatrix::from_rows(&[
            vec![c(2.0, 1.0), c(0.0, -1.0)],
            vec![c(1.0, 0.0), c(3.0, 0.0)],
        ])
        .unwrap();
        let f = lu_decompose(&a);
        // det = (2+i)(3) - (−i)(1) = 6+3i + i = 6+4i
        assert!((f.det() - c(6.0, 4.0)).norm() < 1e-12);
        let b = vec![c(1.0, 0.0), c(0.0, 1.0)];
        let x = f.solve(&b).unwrap();
        let ax = a.mat_vec(&x);
        for (u, v) in ax.iter().zip(&b) {
            assert!((u - v).norm() < 1e-12);
        }
    }

    #[test]
    fn eigenvalues_of_fixed_matrices() {
        let m = CMatrix::from_rows(&[vec![c(-1.0, 0.0)]]).unwrap();
        assert_eq!(eigenvalues(&m).unwrap(), vec![c(-1.0, 0.0)]);

        let d = CMatrix::from_rows(&[
            vec![c(2.0, 0.0), czero()],
            vec![czero(), c(1.0, 1.0)],
        ])
        .unwrap();
        let eigs = sorted_by_re_im(eigenvalues(&d).unwrap());
        assert!((eigs[0] - c(1.0, 1.0)).norm() < 1e-12);
        assert!((eigs[1] - c(2.0, 0.0)).norm() < 1e-12);

        let nilpotent = CMatrix::from_rows(&[
            vec![czero(), c(1.0, 0.0)],
            vec![czero(), czero()],
        ])
        .unwrap();
        let eigs = eigenvalues(&nilpotent).unwrap();
        assert!(eigs.iter().all(|e| e.norm() < 1e-12));
        assert_eq!(eigs.len(), 2);
    }

    #[test]
    fn eigenvalues_match_trace_and_det_on_random() {
        for trial in 0..25 {
            let mut rng = rng_for(trial, "eig-rand", 0);
            let n = 2 + (trial % 5) as usize;
            let a = CMatrix::from_rows(&random_matrix(&mut rng, n, n)).unwrap();
            let eigs = eigenvalues(&a).unwrap();
            assert_eq!(eigs.len(), n);
            let sum: C = eigs.iter().sum();
            let tr = a.trace();
            assert!((sum - tr).norm() <= 1e-8 * (1.0 + tr.norm()), "trial {trial}: {sum} vs {tr}");
            let prod: C = eigs.iter().product();
            let det = lu_decompose(&a).det();
            assert!((prod - det).norm() <= 1e-7 * (1.0 + det.norm()), "trial {trial}: {prod} vs {det}");
        }
    }

    #[test]
    fn eigenpairs_have_small_residuals() {
        for trial in 0..10 {
            let mut rng = rng_for(trial, "pairs", 1);
            let a = CMatrix::from_rows(&random_matrix(&mut rng, 4, 4)).unwrap();
            let pairs = eigenpairs(&a, trial).unwrap();
            for (lam, v) in pairs {
                let av = a.mat_vec(&v);
                let res: f64 =
                    av.iter().zip(&v).map(|(x, y)| (x - lam * y).norm_sqr()).sum::<f64>().sqrt();
                assert!(res < 1e-9 * (1.0 + a.max_abs()), "residual {res}");
            }
        }
    }

    #[test]
    fn op_norm_cases() {
        let d = CMatrix::from_rows(&[
            vec![c(3.0, 0.0), czero()],
            vec![czero(), c(0.0, -4.0)],
        ])
        .unwrap();
        assert!((op_norm_2(&d).unwrap() - 4.0).abs() < 1e-10);
        let mut rng = rng_for(3, "opn", 0);
        let u = CMatrix::from_rows(&crate::sampling::random_unitary(&mut rng, 3)).unwrap();
        assert!((op_norm_2(&u).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn realified_matrix_acts_like_t() {
        let mut rng = rng_for(4, "realify-mat", 0);
        let t = CMatrix::from_rows(&random_matrix(&mut rng, 3, 2)).unwrap();
        let tr = realified_matrix(&t);
        let z = crate::rng::normal_complex_vec(&mut rng, 2);
        let tz = t.mat_vec(&z);
        let x = crate::spaces::realify_vector(&z);
        let tx: Vec<f64> = (0..6).map(|i| crate::spaces::dot(&tr[i], &x)).collect();
        let expected = crate::spaces::realify_vector(&tz);
        for (a, b) in tx.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
