//! Finite-dimensional real and complex normed spaces, their duals, and
//! tuples of functionals.
//!
//! A complex space of dimension `n` is always handled through its
//! realification: vectors are laid out as `(Re z_1..Re z_n, Im z_1..Im z_n)`,
//! so `real_dim = 2n`. A complex functional `z*` with coefficients `c`
//! acts linearly by `z*(z) = Σ c_k z_k`; its real part is the real
//! functional with coefficients `(Re c, -Im c)` on the realification, and
//! `z* (z) = x*(z) - i x*(iz)` recovers it.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::{self, AscentConfig};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

/// Norm families supported by the toolkit. `p = f64::INFINITY` selects
/// the sup norm. Polytope norms store defining real functionals and are
/// restricted to real spaces: a polytope ball is never circled, so it
/// cannot carry a complex norm.
#[derive(Debug, Clone, PartialEq)]
pub enum NormKind {
    Lp(f64),
    WeightedLp { p: f64, weights: Vec<f64> },
    Polytope(Vec<Vec<f64>>),
}

fn validate_p(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidParameter(format!("lp exponent must satisfy p >= 1, got {p}")));
    }
    Ok(())
}

fn holder_conjugate(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

fn rank(rows: &[Vec<f64>], dim: usize) -> usize {
    let mut m: Vec<Vec<f64>> = rows.to_vec();
    let mut r = 0;
    for col in 0..dim {
        let piv = (r..m.len()).max_by(|&a, &b| m[a][col].abs().partial_cmp(&m[b][col].abs()).unwrap());
        let Some(piv) = piv else { break };
        if m[piv][col].abs() < 1e-12 {
            continue;
        }
        m.swap(r, piv);
        for i in (r + 1)..m.len() {
            let f = m[i][col] / m[r][col];
            for c in col..dim {
                m[i][c] -= f * m[r][c];
            }
        }
        r += 1;
        if r == m.len() {
            break;
        }
    }
    r
}

fn solve_small(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row = a[i].clone();
            row.push(b[i]);
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| m[x][col].abs().partial_cmp(&m[y][col].abs()).unwrap())?;
        if m[piv][col].abs() < 1e-10 {
            return None;
        }
        m.swap(col, piv);
        for i in 0..n {
            if i != col {
                let f = m[i][col] / m[col][col];
                for c in col..=n {
                    m[i][c] -= f * m[col][c];
                }
            }
        }
    }
    Some((0..n).map(|i| m[i][n] / m[i][i]).collect())
}

/// A finite-dimensional normed space. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct NormedSpace {
    dim: usize,
    field: Field,
    kind: NormKind,
    /// Vertices of the unit ball, precomputed for polytope norms in
    /// dimension <= 3 to keep dual norms exact there.
    ball_vertices: Option<Vec<Vec<f64>>>,
}

impl NormedSpace {
    pub fn new(dim: usize, field: Field, kind: NormKind) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        match &kind {
            NormKind::Lp(p) => validate_p(*p)?,
            NormKind::WeightedLp { p, weights } => {
                validate_p(*p)?;
                if weights.len() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, got: weights.len() });
                }
                if weights.iter().any(|w| !w.is_finite() || *w <= 0.0) {
                    return Err(Error::InvalidParameter("weights must be positive and finite".into()));
                }
            }
            NormKind::Polytope(rows) => {
                if field == Field::Complex {
                    return Err(Error::InvalidParameter(
                        "polytope norms are not circled; only real spaces can carry them".into(),
                    ));
                }
                if rows.is_empty() {
                    return Err(Error::InvalidParameter("polytope norm needs at least one functional".into()));
                }
                if rows.iter().any(|r| r.len() != dim) {
                    return Err(Error::DimensionMismatch { expected: dim, got: rows[0].len() });
                }
                if rank(rows, dim) < dim {
                    return Err(Error::InvalidParameter(
                        "polytope functionals do not span the space; the gauge is not a norm".into(),
                    ));
                }
            }
        }
        let ball_vertices = match &kind {
            NormKind::Polytope(rows) if dim <= 3 => Some(Self::polytope_vertices(rows, dim)),
            _ => None,
        };
        Ok(NormedSpace { dim, field, kind, ball_vertices })
    }

    pub fn lp(dim: usize, field: Field, p: f64) -> Result<Self> {
        Self::new(dim, field, NormKind::Lp(p))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn kind(&self) -> &NormKind {
        &self.kind
    }

    pub fn is_complex(&self) -> bool {
        self.field == Field::Complex
    }

    /// Dimension of the realification: `2 dim` for complex spaces.
    pub fn real_dim(&self) -> usize {
        match self.field {
            Field::Real => self.dim,
            Field::Complex => 2 * self.dim,
        }
    }

    /// The complex conjugate space. Every norm family here depends only
    /// on coordinate moduli, so the conjugate carries the same oracle;
    /// the interesting action is on functionals (see
    /// [`ComplexFunctional::conjugate`]).
    pub fn conjugate(&self) -> Result<NormedSpace> {
        if !self.is_complex() {
            return Err(Error::RealSpaceInput);
        }
        Ok(self.clone())
    }

    fn moduli(&self, x: &[f64]) -> Vec<f64> {
        match self.field {
            Field::Real => x.iter().map(|v| v.abs()).collect(),
            Field::Complex => (0..self.dim).map(|k| x[k].hypot(x[self.dim + k])).collect(),
        }
    }

    /// Norm of a realified vector (plain vector for real spaces).
    pub fn norm_real(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.real_dim() {
            return Err(Error::DimensionMismatch { expected: self.real_dim(), got: x.len() });
        }
        Ok(match &self.kind {
            NormKind::Lp(p) => lp_norm(&self.moduli(x), *p, None),
            NormKind::WeightedLp { p, weights } => lp_norm(&self.moduli(x), *p, Some(weights)),
            NormKind::Polytope(rows) => rows.iter().map(|r| dot(r, x).abs()).fold(0.0, f64::max),
        })
    }

    /// Norm of a complex vector. Real spaces reject complex input.
    pub fn norm_complex(&self, z: &[Complex64]) -> Result<f64> {
        if !self.is_complex() {
            return Err(Error::RealSpaceInput);
        }
        if z.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: z.len() });
        }
        self.norm_real(&realify_vector(z))
    }

    /// Dual norm of a real functional on the realification. Exact for
    /// lp and weighted-lp (Hölder conjugate) and for polytope norms in
    /// dimension <= 3 (vertex enumeration); numerical ascent otherwise.
    pub fn dual_norm_real(&self, u: &[f64]) -> Result<f64> {
        if u.len() != self.real_dim() {
            return Err(Error::DimensionMismatch { expected: self.real_dim(), got: u.len() });
        }
        match self.field {
            Field::Complex => {
                // ||x*||_(E_R)* = ||z*||_E* for the complexified functional
                let c = complexify_functional(u);
                self.dual_norm_moduli(&c.coeffs.iter().map(|v| v.norm()).collect::<Vec<_>>())
            }
            Field::Real => self.dual_norm_moduli_real(u),
        }
    }

    /// Dual norm of a complex functional `z*(z) = Σ c_k z_k`.
    pub fn dual_norm_complex(&self, c: &[Complex64]) -> Result<f64> {
        if !self.is_complex() {
            return Err(Error::RealSpaceInput);
        }
        if c.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: c.len() });
        }
        self.dual_norm_moduli(&c.iter().map(|v| v.norm()).collect::<Vec<_>>())
    }

    fn dual_norm_moduli(&self, m: &[f64]) -> Result<f64> {
        match &self.kind {
            NormKind::Lp(p) => Ok(lp_norm(m, holder_conjugate(*p), None)),
            NormKind::WeightedLp { p, weights } => Ok(dual_weighted(m, *p, weights)),
            NormKind::Polytope(_) => unreachable!("polytope norms are real-only"),
        }
    }

    fn dual_norm_moduli_real(&self, u: &[f64]) -> Result<f64> {
        match &self.kind {
            NormKind::Lp(p) => {
                let m: Vec<f64> = u.iter().map(|v| v.abs()).collect();
                Ok(lp_norm(&m, holder_conjugate(*p), None))
            }
            NormKind::WeightedLp { p, weights } => {
                let m: Vec<f64> = u.iter().map(|v| v.abs()).collect();
                Ok(dual_weighted(&m, *p, weights))
            }
            NormKind::Polytope(_) => {
                if let Some(verts) = &self.ball_vertices {
                    Ok(verts.iter().map(|v| dot(u, v).abs()).fold(0.0, f64::max))
                } else {
                    // dim > 3: maximize |<u, x>| over the unit sphere
                    let cfg = AscentConfig { restarts: 24, iters: 150, seed: rng::DEFAULT_SEED };
                    let normalize = |x: &mut Vec<f64>| self.normalize_real(x);
                    let f = |x: &[f64]| dot(u, x).abs();
                    let (_, v) = optim::sphere_ascent(&normalize, &f, self.real_dim(), &cfg, "dual-poly", &[]);
                    Ok(v)
                }
            }
        }
    }

    /// How `dual_norm_real` computes its value for this space.
    pub fn dual_norm_method(&self) -> &'static str {
        match &self.kind {
            NormKind::Lp(_) | NormKind::WeightedLp { .. } => "holder-exact",
            NormKind::Polytope(_) if self.ball_vertices.is_some() => "vertex-enumeration",
            NormKind::Polytope(_) => "numeric-sphere-ascent",
        }
    }

    /// Rescales `x` onto the unit sphere of this norm; `false` if `x = 0`.
    pub fn normalize_real(&self, x: &mut Vec<f64>) -> bool {
        match self.norm_real(x) {
            Ok(n) if n > 1e-300 => {
                x.iter_mut().for_each(|v| *v /= n);
                true
            }
            _ => false,
        }
    }

    fn polytope_vertices(rows: &[Vec<f64>], dim: usize) -> Vec<Vec<f64>> {
        // Vertices of {x : |<a_j, x>| <= 1}: intersections of dim active
        // hyperplanes <a_j, x> = s_j that satisfy all constraints.
        let m = rows.len();
        let mut verts: Vec<Vec<f64>> = Vec::new();
        let mut idx: Vec<usize> = (0..dim).collect();
        loop {
            for smask in 0..(1u32 << dim) {
                let a: Vec<Vec<f64>> = idx.iter().map(|&j| rows[j].clone()).collect();
                let b: Vec<f64> = (0..dim).map(|k| if smask >> k & 1 == 1 { 1.0 } else { -1.0 }).collect();
                if let Some(x) = solve_small(&a, &b) {
                    let feasible = rows.iter().all(|r| dot(r, &x).abs() <= 1.0 + 1e-9);
                    if feasible && !verts.iter().any(|v| dist_inf(v, &x) < 1e-9) {
                        verts.push(x);
                    }
                }
            }
            // next combination of dim indices out of m
            let mut i = dim;
            loop {
                if i == 0 {
                    return verts;
                }
                i -= 1;
                if idx[i] + (dim - i) < m {
                    idx[i] += 1;
                    for k in (i + 1)..dim {
                        idx[k] = idx[k - 1] + 1;
                    }
                    break;
                }
            }
        }
    }
}

fn dist_inf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn lp_norm(m: &[f64], p: f64, weights: Option<&[f64]>) -> f64 {
    let term = |k: usize| weights.map_or(m[k], |w| w[k] * m[k]);
    if p.is_infinite() {
        return (0..m.len()).map(term).fold(0.0, f64::max);
    }
    if p == 1.0 {
        return match weights {
            None => m.iter().sum(),
            Some(w) => m.iter().zip(w).map(|(x, wk)| x * wk).sum(),
        };
    }
    if p == 2.0 && weights.is_none() {
        return m.iter().map(|x| x * x).sum::<f64>().sqrt();
    }
    match weights {
        None => m.iter().map(|x| x.powf(p)).sum::<f64>().powf(1.0 / p),
        Some(w) => m.iter().zip(w).map(|(x, wk)| wk * x.powf(p)).sum::<f64>().powf(1.0 / p),
    }
}

fn dual_weighted(m: &[f64], p: f64, w: &[f64]) -> f64 {
    // sup { Σ m_k |x_k| : (Σ w_k |x_k|^p)^(1/p) <= 1 }
    if p == 1.0 {
        return m.iter().zip(w).map(|(c, wk)| c / wk).fold(0.0, f64::max);
    }
    if p.is_infinite() {
        // ball is {max w_k |x_k| <= 1}
        return m.iter().zip(w).map(|(c, wk)| c / wk).sum();
    }
    let q = holder_conjugate(p);
    m.iter()
        .zip(w)
        .map(|(c, wk)| c.powf(q) * wk.powf(-q / p))
        .sum::<f64>()
        .powf(1.0 / q)
}

/// Realification layout `(Re z, Im z)`.
pub fn realify_vector(z: &[Complex64]) -> Vec<f64> {
    let n = z.len();
    let mut x = vec![0.0; 2 * n];
    for k in 0..n {
        x[k] = z[k].re;
        x[n + k] = z[k].im;
    }
    x
}

/// Inverse of [`realify_vector`].
pub fn complexify_vector(x: &[f64]) -> Vec<Complex64> {
    let n = x.len() / 2;
    (0..n).map(|k| Complex64::new(x[k], x[n + k])).collect()
}

/// `z*(z) = x*(z) - i x*(iz)` for a real functional `x* = (u, v)`:
/// coefficients `c = u - iv`.
pub fn complexify_functional(u: &[f64]) -> ComplexFunctional {
    let n = u.len() / 2;
    ComplexFunctional { coeffs: (0..n).map(|k| Complex64::new(u[k], -u[n + k])).collect() }
}

/// A member of `E*` for a complex space, acting by `z*(z) = Σ c_k z_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexFunctional {
    pub coeffs: Vec<Complex64>,
}

impl ComplexFunctional {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        ComplexFunctional { coeffs }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn apply(&self, z: &[Complex64]) -> Complex64 {
        self.coeffs.iter().zip(z).map(|(c, zk)| c * zk).sum()
    }

    /// Real part as a functional on the realification: `(Re c, -Im c)`.
    pub fn realify(&self) -> Vec<f64> {
        let n = self.coeffs.len();
        let mut u = vec![0.0; 2 * n];
        for k in 0..n {
            u[k] = self.coeffs[k].re;
            u[n + k] = -self.coeffs[k].im;
        }
        u
    }

    /// Reconstruct from a real functional; exact inverse of [`realify`].
    pub fn from_real(u: &[f64]) -> Self {
        complexify_functional(u)
    }

    /// The functional `ψ_{z*}` on the conjugate space, with the same real
    /// part and pointwise modulus. In the conjugation coordinates of
    /// `conj(E)` its coefficients are the conjugates.
    pub fn conjugate(&self) -> Self {
        ComplexFunctional { coeffs: self.coeffs.iter().map(|c| c.conj()).collect() }
    }
}

/// A finite tuple of functionals, real or complex to match the space.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionalTuple {
    Real(Vec<Vec<f64>>),
    Complex(Vec<ComplexFunctional>),
}

impl FunctionalTuple {
    pub fn len(&self) -> usize {
        match self {
            FunctionalTuple::Real(v) => v.len(),
            FunctionalTuple::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self, space: &NormedSpace) -> Result<()> {
        if self.is_empty() {
            return Err(Error::EmptyTuple);
        }
        match self {
            FunctionalTuple::Real(v) => {
                if space.is_complex() {
                    // real tuples act on the realification
                    for f in v {
                        if f.len() != space.real_dim() {
                            return Err(Error::DimensionMismatch { expected: space.real_dim(), got: f.len() });
                        }
                    }
                } else {
                    for f in v {
                        if f.len() != space.dim() {
                            return Err(Error::DimensionMismatch { expected: space.dim(), got: f.len() });
                        }
                    }
                }
            }
            FunctionalTuple::Complex(v) => {
                if !space.is_complex() {
                    return Err(Error::RealSpaceInput);
                }
                for f in v {
                    if f.dim() != space.dim() {
                        return Err(Error::DimensionMismatch { expected: space.dim(), got: f.dim() });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn scale(&self, t: f64) -> FunctionalTuple {
        match self {
            FunctionalTuple::Real(v) => {
                FunctionalTuple::Real(v.iter().map(|f| f.iter().map(|x| x * t).collect()).collect())
            }
            FunctionalTuple::Complex(v) => FunctionalTuple::Complex(
                v.iter().map(|f| ComplexFunctional::new(f.coeffs.iter().map(|c| c * t).collect())).collect(),
            ),
        }
    }

    /// Conjugate every member (`ψ` map); identity on real tuples.
    pub fn conjugate(&self) -> FunctionalTuple {
        match self {
            FunctionalTuple::Real(v) => FunctionalTuple::Real(v.clone()),
            FunctionalTuple::Complex(v) => FunctionalTuple::Complex(v.iter().map(|f| f.conjugate()).collect()),
        }
    }

    /// Realified coefficient rows (complex functionals via `realify`).
    pub fn realified(&self) -> Vec<Vec<f64>> {
        match self {
            FunctionalTuple::Real(v) => v.clone(),
            FunctionalTuple::Complex(v) => v.iter().map(|f| f.realify()).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OneWeakMethod {
    BallSup,
    SignFormula,
}

/// Certificate for a computed (1,weak)-norm.
#[derive(Debug, Clone, PartialEq)]
pub enum OneWeakWitness {
    /// Point of the unit ball (realified coordinates) attaining the value.
    BallPoint(Vec<f64>),
    /// Phases `θ_j` with `ε_j = e^{iθ_j}` attaining the sign-formula sup.
    Phases(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OneWeakResult {
    pub value: f64,
    pub method: OneWeakMethod,
    pub witness: OneWeakWitness,
    /// True when the value came from a closed form or finite enumeration.
    pub exact: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct OneWeakParams {
    pub restarts: usize,
    pub phase_grid: usize,
    pub seed: u64,
}

impl Default for OneWeakParams {
    fn default() -> Self {
        OneWeakParams { restarts: 32, phase_grid: 16, seed: rng::DEFAULT_SEED }
    }
}

/// Evaluates `Σ_j |z_j*(x)|^p` at a realified point. For complex tuples
/// the term is the complex modulus `|z*(z)|`; for real tuples it is
/// `|x*(x)|` even when the ambient ball is a complex one (this is the
/// realification's (1,weak)-norm).
fn tuple_sum_at(rows: &[Vec<f64>], x: &[f64], complex_modulus: bool, n: usize, p: f64) -> f64 {
    let term = |r: &Vec<f64>| -> f64 {
        if !complex_modulus {
            dot(r, x).abs()
        } else {
            // Im z*(z) = -Re z*(iz); vec(iz) = (-Im z, Re z)
            let re = dot(r, x);
            let mut im = 0.0;
            for k in 0..n {
                im -= r[k] * (-x[n + k]) + r[n + k] * x[k];
            }
            re.hypot(im)
        }
    };
    if p == 1.0 {
        rows.iter().map(term).sum()
    } else {
        rows.iter().map(|r| term(r).powf(p)).sum()
    }
}

/// The (1,weak)-norm `sup_{x in B_E} Σ_j |z_j*(x)|` of a tuple, by direct
/// ball maximization or by the sign formula
/// `sup_{|ε_j|=1} ||Σ ε_j z_j*||`. Both are suprema of continuous
/// functions over compacta and agree; each returns its own certificate.
pub fn one_weak_norm(
    space: &NormedSpace,
    tuple: &FunctionalTuple,
    method: OneWeakMethod,
    params: &OneWeakParams,
) -> Result<OneWeakResult> {
    tuple.validate(space)?;
    match method {
        OneWeakMethod::BallSup => ball_sup(space, tuple, params),
        OneWeakMethod::SignFormula => sign_formula(space, tuple, params),
    }
}

fn ball_sup(space: &NormedSpace, tuple: &FunctionalTuple, params: &OneWeakParams) -> Result<OneWeakResult> {
    ball_sup_power(space, tuple, 1.0, params)
}

/// Shared ball maximization of `Σ_j |z_j*(x)|^p` (p = 1 gives the
/// (1,weak)-norm). Exact where the ball's extreme points are enumerable,
/// multi-start ascent otherwise.
fn ball_sup_power(
    space: &NormedSpace,
    tuple: &FunctionalTuple,
    p_obj: f64,
    params: &OneWeakParams,
) -> Result<OneWeakResult> {
    let rows = tuple.realified();
    let complex_modulus = matches!(tuple, FunctionalTuple::Complex(_));
    let n = space.dim();
    let d = space.real_dim();

    let (p_space, w) = match space.kind() {
        NormKind::Lp(p) => (Some(*p), None),
        NormKind::WeightedLp { p, weights } => (Some(*p), Some(weights.clone())),
        NormKind::Polytope(_) => (None, None),
    };
    let wk = |k: usize| w.as_ref().map_or(1.0, |w| w[k]);
    let done = |x: Vec<f64>, v: f64, exact: bool| {
        Ok(OneWeakResult { value: v, method: OneWeakMethod::BallSup, witness: OneWeakWitness::BallPoint(x), exact })
    };

    if p_space == Some(1.0) {
        // extreme points of the l1 ball: (phase-spun) basis vectors e_k / w_k
        if complex_modulus || !space.is_complex() {
            // phases wash out of the objective: exact per-coordinate scan
            let mods = moduli_per_coordinate(tuple);
            let mut best = (0usize, f64::NEG_INFINITY);
            for k in 0..n {
                let v = mods.iter().map(|row| (row[k] / wk(k)).powf(p_obj)).sum::<f64>();
                if v > best.1 {
                    best = (k, v);
                }
            }
            let mut x = vec![0.0; d];
            x[best.0] = 1.0 / wk(best.0);
            return done(x, best.1, true);
        }
        // real tuple on a complex l1 ball: best coordinate with best phase
        let mut best: Option<(usize, f64, f64)> = None;
        for k in 0..n {
            let fk = |th: f64| {
                let (ct, st) = (th.cos() / wk(k), th.sin() / wk(k));
                rows.iter().map(|r| (r[k] * ct + r[n + k] * st).abs().powf(p_obj)).sum::<f64>()
            };
            let (th, v) = optim::circle_max(fk, 256);
            if best.map_or(true, |b| v > b.2) {
                best = Some((k, th, v));
            }
        }
        let (k, th, v) = best.unwrap();
        let mut x = vec![0.0; d];
        x[k] = th.cos() / wk(k);
        x[n + k] = th.sin() / wk(k);
        return done(x, v, false);
    }

    if p_space == Some(f64::INFINITY) {
        if !space.is_complex() && d <= 16 {
            // real sup-norm ball: vertices are sign patterns over 1/w_k
            let mut best: Option<(Vec<f64>, f64)> = None;
            for mask in 0..(1u64 << d) {
                let x: Vec<f64> =
                    (0..d).map(|k| if mask >> k & 1 == 1 { 1.0 / wk(k) } else { -1.0 / wk(k) }).collect();
                let v = tuple_sum_at(&rows, &x, false, n, p_obj);
                if best.as_ref().map_or(true, |b| v > b.1) {
                    best = Some((x, v));
                }
            }
            let (x, v) = best.unwrap();
            return done(x, v, true);
        }
        if space.is_complex() {
            // polydisc: extreme points are per-coordinate phases
            let obj = |phases: &[f64]| {
                let mut x = vec![0.0; d];
                for k in 0..n {
                    x[k] = phases[k].cos() / wk(k);
                    x[n + k] = phases[k].sin() / wk(k);
                }
                tuple_sum_at(&rows, &x, complex_modulus, n, p_obj)
            };
            let (phases, v) =
                optim::torus_ascent(&obj, n, params.phase_grid, params.restarts, params.seed, "ballsup-linf");
            let mut x = vec![0.0; d];
            for k in 0..n {
                x[k] = phases[k].cos() / wk(k);
                x[n + k] = phases[k].sin() / wk(k);
            }
            return done(x, v, false);
        }
    }

    if let Some(verts) = &space.ball_vertices {
        let mut best: Option<(Vec<f64>, f64)> = None;
        for x in verts {
            let v = tuple_sum_at(&rows, x, false, n, p_obj);
            if best.as_ref().map_or(true, |b| v > b.1) {
                best = Some((x.clone(), v));
            }
        }
        let (x, v) = best.unwrap();
        return done(x, v, true);
    }

    // General path: multi-start projected ascent over the unit sphere.
    let normalize = |x: &mut Vec<f64>| space.normalize_real(x);
    let f = |x: &[f64]| tuple_sum_at(&rows, x, complex_modulus, n, p_obj);
    let extra = norming_starts(space, tuple);
    let cfg = AscentConfig { restarts: params.restarts, iters: 150, seed: params.seed };
    let (x, v) = optim::sphere_ascent(&normalize, &f, d, &cfg, "ballsup", &extra);
    done(x, v, false)
}

/// Starting points that norm each functional individually; cheap and
/// often already near the optimum for small tuples. For complex spaces
/// the realified row is treated pairwise: the norming point of a
/// functional with coordinate moduli `m_k` has pair `k` aligned with the
/// row and magnitude `m_k^{q-2}` (then rescaled onto the sphere by the
/// caller's normalization).
fn norming_starts(space: &NormedSpace, tuple: &FunctionalTuple) -> Vec<Vec<f64>> {
    let (p, w) = match space.kind() {
        NormKind::Lp(p) => (*p, None),
        NormKind::WeightedLp { p, weights } => (*p, Some(weights.clone())),
        NormKind::Polytope(_) => return Vec::new(),
    };
    if p == 1.0 || p.is_infinite() {
        return Vec::new();
    }
    let q = holder_conjugate(p);
    let n = space.dim();
    let mut starts = Vec::new();
    for r in tuple.realified() {
        let mut x = vec![0.0; space.real_dim()];
        for k in 0..n {
            let wfac = w.as_ref().map_or(1.0, |w| w[k]).powf(-q / p);
            if space.is_complex() {
                let m = r[k].hypot(r[n + k]);
                if m > 1e-300 {
                    x[k] = r[k] * m.powf(q - 2.0) * wfac;
                    x[n + k] = r[n + k] * m.powf(q - 2.0) * wfac;
                }
            } else {
                let m = r[k].abs();
                if m > 1e-300 {
                    x[k] = r[k].signum() * m.powf(q - 1.0) * wfac;
                }
            }
        }
        if x.iter().any(|v| v.abs() > 1e-300) {
            starts.push(x);
        }
    }
    starts
}

/// Per-functional coordinate moduli (`|c_jk|` for complex tuples,
/// `|u_jk|` for real tuples over real spaces).
fn moduli_per_coordinate(tuple: &FunctionalTuple) -> Vec<Vec<f64>> {
    match tuple {
        FunctionalTuple::Real(rows) => rows.iter().map(|r| r.iter().map(|c| c.abs()).collect()).collect(),
        FunctionalTuple::Complex(funcs) => {
            funcs.iter().map(|f| f.coeffs.iter().map(|c| c.norm()).collect()).collect()
        }
    }
}

fn sign_formula(space: &NormedSpace, tuple: &FunctionalTuple, params: &OneWeakParams) -> Result<OneWeakResult> {
    match tuple {
        FunctionalTuple::Real(rows) => {
            let m = rows.len();
            if m > 24 {
                return Err(Error::InvalidParameter(format!("sign enumeration over {m} functionals is too large")));
            }
            let mut best: Option<(u64, f64)> = None;
            for mask in 0..(1u64 << m) {
                let mut s = vec![0.0; rows[0].len()];
                for (j, r) in rows.iter().enumerate() {
                    let e = if mask >> j & 1 == 1 { 1.0 } else { -1.0 };
                    for (sk, rk) in s.iter_mut().zip(r) {
                        *sk += e * rk;
                    }
                }
                let v = space.dual_norm_real(&s)?;
                if best.map_or(true, |b| v > b.1) {
                    best = Some((mask, v));
                }
            }
            let (mask, v) = best.unwrap();
            let phases: Vec<f64> =
                (0..m).map(|j| if mask >> j & 1 == 1 { 0.0 } else { std::f64::consts::PI }).collect();
            Ok(OneWeakResult {
                value: v,
                method: OneWeakMethod::SignFormula,
                witness: OneWeakWitness::Phases(phases),
                exact: true,
            })
        }
        FunctionalTuple::Complex(funcs) => {
            let m = funcs.len();
            let dim = funcs[0].dim();
            let obj = |phases: &[f64]| {
                let mut s = vec![Complex64::new(0.0, 0.0); dim];
                for (j, f) in funcs.iter().enumerate() {
                    let e = Complex64::from_polar(1.0, phases[j]);
                    for (sk, ck) in s.iter_mut().zip(&f.coeffs) {
                        *sk += e * ck;
                    }
                }
                space.dual_norm_complex(&s).unwrap_or(0.0)
            };
            let (phases, v) = optim::torus_ascent(&obj, m, params.phase_grid, params.restarts, params.seed, "signformula");
            Ok(OneWeakResult {
                value: v,
                method: OneWeakMethod::SignFormula,
                witness: OneWeakWitness::Phases(phases),
                exact: false,
            })
        }
    }
}

/// Constraint value of the p-convex variant:
/// `sup_{x in B_E} Σ_j |z_j*(x)|^p` for `p < ∞`, and
/// `max_j ||z_j*||` for `p = ∞`.
pub fn p_weak_norm(space: &NormedSpace, tuple: &FunctionalTuple, p: f64, params: &OneWeakParams) -> Result<f64> {
    validate_p(p)?;
    tuple.validate(space)?;
    if p == 1.0 {
        return Ok(ball_sup(space, tuple, params)?.value);
    }
    if p.is_infinite() {
        let v = match tuple {
            FunctionalTuple::Real(rows) => {
                let mut best = 0.0f64;
                for r in rows {
                    best = best.max(space.dual_norm_real(r)?);
                }
                best
            }
            FunctionalTuple::Complex(funcs) => {
                let mut best = 0.0f64;
                for f in funcs {
                    best = best.max(space.dual_norm_complex(&f.coeffs)?);
                }
                best
            }
        };
        return Ok(v);
    }
    Ok(ball_sup_power(space, tuple, p, params)?.value)
}

// ---------------------------------------------------------------------
// JSON space specification
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PValue {
    Num(f64),
    Str(String),
}

impl PValue {
    pub fn to_f64(&self) -> Result<f64> {
        match self {
            PValue::Num(x) => Ok(*x),
            PValue::Str(s) => match s.to_ascii_lowercase().as_str() {
                "inf" | "infinity" | "∞" => Ok(f64::INFINITY),
                other => Err(Error::Config(format!("unrecognized exponent {other:?}"))),
            },
        }
    }

    pub fn from_f64(p: f64) -> PValue {
        if p.is_infinite() {
            PValue::Str("inf".into())
        } else {
            PValue::Num(p)
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum NormSpec {
    Lp(PValue),
    WeightedLp { p: PValue, weights: Vec<f64> },
    Polytope(Vec<Vec<f64>>),
}

/// Wire format for a space:
/// `{"dim": n, "field": "real"|"complex", "norm": {"lp": p} | ...}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub dim: usize,
    pub field: Field,
    pub norm: NormSpec,
}

impl SpaceSpec {
    pub fn build(&self) -> Result<NormedSpace> {
        let kind = match &self.norm {
            NormSpec::Lp(p) => NormKind::Lp(p.to_f64()?),
            NormSpec::WeightedLp { p, weights } => NormKind::WeightedLp { p: p.to_f64()?, weights: weights.clone() },
            NormSpec::Polytope(rows) => NormKind::Polytope(rows.clone()),
        };
        NormedSpace::new(self.dim, self.field, kind)
    }

    pub fn from_space(space: &NormedSpace) -> SpaceSpec {
        let norm = match space.kind() {
            NormKind::Lp(p) => NormSpec::Lp(PValue::from_f64(*p)),
            NormKind::WeightedLp { p, weights } => {
                NormSpec::WeightedLp { p: PValue::from_f64(*p), weights: weights.clone() }
            }
            NormKind::Polytope(rows) => NormSpec::Polytope(rows.clone()),
        };
        SpaceSpec { dim: space.dim(), field: space.field(), norm }
    }
}

pub fn space_from_json(s: &str) -> Result<NormedSpace> {
    let spec: SpaceSpec = serde_json::from_str(s).map_err(|e| Error::Config(format!("space spec: {e}")))?;
    spec.build()
}
