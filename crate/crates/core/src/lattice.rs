//! Expression engine for elements of the free vector lattice and their
//! complexifications.
//!
//! A [`LatticeExpr`] is an immutable tree over generators `δ_x`; it
//! evaluates to a positively homogeneous function of a real functional
//! `x*` (given in realified coordinates). A [`ComplexLatticeElem`] is a
//! pair `f + ig` whose pointwise modulus is `sqrt(f² + g²)`, equivalently
//! the supremum of `f cos θ + g sin θ` over phases.
//!
//! No simplification happens on construction; rewriting into the
//! canonical positive form `⋁ δ(x_i) − ⋁ δ(y_j)` is explicit and
//! verified against samples.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::par;
use crate::rng::{self, normal_vec, rng_for};
use crate::spaces::{dot, realify_vector, NormedSpace};

#[derive(Debug, Clone, PartialEq)]
pub enum LatticeExpr {
    /// Evaluation generator `δ_x`, payload in realified coordinates.
    Gen(Vec<f64>),
    Scale(f64, Box<LatticeExpr>),
    Add(Vec<LatticeExpr>),
    Sup(Vec<LatticeExpr>),
    Inf(Vec<LatticeExpr>),
}

impl LatticeExpr {
    pub fn gen(payload: Vec<f64>) -> Self {
        LatticeExpr::Gen(payload)
    }

    pub fn scale(c: f64, e: LatticeExpr) -> Self {
        LatticeExpr::Scale(c, Box::new(e))
    }

    pub fn add(children: Vec<LatticeExpr>) -> Result<Self> {
        if children.is_empty() {
            return Err(Error::InvalidParameter("add needs at least one child".into()));
        }
        Ok(LatticeExpr::Add(children))
    }

    pub fn sup(children: Vec<LatticeExpr>) -> Result<Self> {
        if children.is_empty() {
            return Err(Error::InvalidParameter("sup needs at least one child".into()));
        }
        Ok(LatticeExpr::Sup(children))
    }

    pub fn inf(children: Vec<LatticeExpr>) -> Result<Self> {
        if children.is_empty() {
            return Err(Error::InvalidParameter("inf needs at least one child".into()));
        }
        Ok(LatticeExpr::Inf(children))
    }

    /// The zero element, written as `δ_0`.
    pub fn zero(real_dim: usize) -> Self {
        LatticeExpr::Gen(vec![0.0; real_dim])
    }

    /// Realified payload dimension, if the tree contains any generator.
    pub fn payload_dim(&self) -> Option<usize> {
        match self {
            LatticeExpr::Gen(v) => Some(v.len()),
            LatticeExpr::Scale(_, e) => e.payload_dim(),
            LatticeExpr::Add(cs) | LatticeExpr::Sup(cs) | LatticeExpr::Inf(cs) => {
                cs.iter().find_map(|c| c.payload_dim())
            }
        }
    }

    /// Checks that every generator payload has length `real_dim`.
    pub fn validate_dims(&self, real_dim: usize) -> Result<()> {
        match self {
            LatticeExpr::Gen(v) => {
                if v.len() != real_dim {
                    return Err(Error::DimensionMismatch { expected: real_dim, got: v.len() });
                }
            }
            LatticeExpr::Scale(_, e) => e.validate_dims(real_dim)?,
            LatticeExpr::Add(cs) | LatticeExpr::Sup(cs) | LatticeExpr::Inf(cs) => {
                for c in cs {
                    c.validate_dims(real_dim)?;
                }
            }
        }
        Ok(())
    }

    /// Recursive evaluation at a real functional; `δ_x(x*) = x*(x)`.
    pub fn eval(&self, xstar: &[f64]) -> Result<f64> {
        match self {
            LatticeExpr::Gen(v) => {
                if v.len() != xstar.len() {
                    return Err(Error::DimensionMismatch { expected: v.len(), got: xstar.len() });
                }
                Ok(dot(v, xstar))
            }
            LatticeExpr::Scale(c, e) => Ok(c * e.eval(xstar)?),
            LatticeExpr::Add(cs) => {
                let mut s = 0.0;
                for c in cs {
                    s += c.eval(xstar)?;
                }
                Ok(s)
            }
            LatticeExpr::Sup(cs) => {
                let mut m = f64::NEG_INFINITY;
                for c in cs {
                    m = m.max(c.eval(xstar)?);
                }
                Ok(m)
            }
            LatticeExpr::Inf(cs) => {
                let mut m = f64::INFINITY;
                for c in cs {
                    m = m.min(c.eval(xstar)?);
                }
                Ok(m)
            }
        }
    }

    /// Evaluation without per-node dimension checks; callers validate the
    /// tree once with [`validate_dims`] before hot loops.
    pub fn eval_unchecked(&self, xstar: &[f64]) -> f64 {
        match self {
            LatticeExpr::Gen(v) => dot(v, xstar),
            LatticeExpr::Scale(c, e) => c * e.eval_unchecked(xstar),
            LatticeExpr::Add(cs) => cs.iter().map(|c| c.eval_unchecked(xstar)).sum(),
            LatticeExpr::Sup(cs) => cs.iter().map(|c| c.eval_unchecked(xstar)).fold(f64::NEG_INFINITY, f64::max),
            LatticeExpr::Inf(cs) => cs.iter().map(|c| c.eval_unchecked(xstar)).fold(f64::INFINITY, f64::min),
        }
    }

    /// Structural substitution of generator payloads through a realified
    /// matrix action.
    pub fn map_generators<F>(&self, f: &F) -> LatticeExpr
    where
        F: Fn(&[f64]) -> Vec<f64>,
    {
        match self {
            LatticeExpr::Gen(v) => LatticeExpr::Gen(f(v)),
            LatticeExpr::Scale(c, e) => LatticeExpr::Scale(*c, Box::new(e.map_generators(f))),
            LatticeExpr::Add(cs) => LatticeExpr::Add(cs.iter().map(|c| c.map_generators(f)).collect()),
            LatticeExpr::Sup(cs) => LatticeExpr::Sup(cs.iter().map(|c| c.map_generators(f)).collect()),
            LatticeExpr::Inf(cs) => LatticeExpr::Inf(cs.iter().map(|c| c.map_generators(f)).collect()),
        }
    }
}

/// `f + ig` over a common space.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexLatticeElem {
    pub re: LatticeExpr,
    pub im: LatticeExpr,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModulusMethod {
    Sqrt,
    ThetaGrid(usize),
}

impl ComplexLatticeElem {
    pub fn new(re: LatticeExpr, im: LatticeExpr) -> Self {
        ComplexLatticeElem { re, im }
    }

    pub fn from_real(re: LatticeExpr, real_dim: usize) -> Self {
        ComplexLatticeElem { re, im: LatticeExpr::zero(real_dim) }
    }

    pub fn zero(real_dim: usize) -> Self {
        ComplexLatticeElem { re: LatticeExpr::zero(real_dim), im: LatticeExpr::zero(real_dim) }
    }

    pub fn validate_dims(&self, real_dim: usize) -> Result<()> {
        self.re.validate_dims(real_dim)?;
        self.im.validate_dims(real_dim)
    }

    /// Complex value `f(x*) + i g(x*)`.
    pub fn cval(&self, xstar: &[f64]) -> Result<Complex64> {
        Ok(Complex64::new(self.re.eval(xstar)?, self.im.eval(xstar)?))
    }

    pub fn cval_unchecked(&self, xstar: &[f64]) -> Complex64 {
        Complex64::new(self.re.eval_unchecked(xstar), self.im.eval_unchecked(xstar))
    }

    /// Pointwise modulus at `x*`, by the closed form or a phase grid.
    pub fn modulus_eval(&self, xstar: &[f64], method: ModulusMethod) -> Result<f64> {
        match method {
            ModulusMethod::Sqrt => {
                let v = self.cval(xstar)?;
                Ok(v.re.hypot(v.im))
            }
            ModulusMethod::ThetaGrid(n) => {
                if n < 4 {
                    return Err(Error::InvalidParameter(format!("theta grid needs N >= 4, got {n}")));
                }
                let f1 = self.re.eval(xstar)?;
                let f2 = self.im.eval(xstar)?;
                let mut best = f64::NEG_INFINITY;
                for k in 0..n {
                    let th = std::f64::consts::TAU * k as f64 / n as f64;
                    best = best.max(f1 * th.cos() + f2 * th.sin());
                }
                Ok(best.max(0.0))
            }
        }
    }

    pub fn addition(&self, other: &ComplexLatticeElem) -> ComplexLatticeElem {
        ComplexLatticeElem {
            re: LatticeExpr::Add(vec![self.re.clone(), other.re.clone()]),
            im: LatticeExpr::Add(vec![self.im.clone(), other.im.clone()]),
        }
    }

    /// Complex scaling `λ (f + ig) = (Re λ f − Im λ g) + i (Im λ f + Re λ g)`.
    pub fn scale_complex(&self, lambda: Complex64) -> ComplexLatticeElem {
        let re = LatticeExpr::Add(vec![
            LatticeExpr::scale(lambda.re, self.re.clone()),
            LatticeExpr::scale(-lambda.im, self.im.clone()),
        ]);
        let im = LatticeExpr::Add(vec![
            LatticeExpr::scale(lambda.im, self.re.clone()),
            LatticeExpr::scale(lambda.re, self.im.clone()),
        ]);
        ComplexLatticeElem { re, im }
    }
}

/// `δ_E(z) = δ_{E_R}(z) − i δ_{E_R}(iz)` as a pair of generators.
pub fn delta_embed(space: &NormedSpace, z: &[Complex64]) -> Result<ComplexLatticeElem> {
    if !space.is_complex() {
        return Err(Error::RealSpaceInput);
    }
    if z.len() != space.dim() {
        return Err(Error::DimensionMismatch { expected: space.dim(), got: z.len() });
    }
    let minus_iz: Vec<Complex64> = z.iter().map(|v| v * Complex64::new(0.0, -1.0)).collect();
    Ok(ComplexLatticeElem {
        re: LatticeExpr::Gen(realify_vector(z)),
        im: LatticeExpr::Gen(realify_vector(&minus_iz)),
    })
}

/// Real-space embedding `δ_x` (payload used as-is).
pub fn delta_real(x: Vec<f64>) -> LatticeExpr {
    LatticeExpr::Gen(x)
}

// ---------------------------------------------------------------------
// Canonical positive form
// ---------------------------------------------------------------------

/// `⋁ δ(pos_i) − ⋁ δ(neg_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalForm {
    pub pos: Vec<Vec<f64>>,
    pub neg: Vec<Vec<f64>>,
}

impl CanonicalForm {
    pub fn eval(&self, xstar: &[f64]) -> f64 {
        let a = self.pos.iter().map(|v| dot(v, xstar)).fold(f64::NEG_INFINITY, f64::max);
        let b = self.neg.iter().map(|v| dot(v, xstar)).fold(f64::NEG_INFINITY, f64::max);
        a - b
    }

    fn terms(&self) -> usize {
        self.pos.len() + self.neg.len()
    }
}

fn dedup_terms(terms: &mut Vec<Vec<f64>>) {
    let mut seen: HashSet<Vec<u64>> = HashSet::with_capacity(terms.len());
    terms.retain(|t| seen.insert(t.iter().map(|x| x.to_bits()).collect()));
}

fn combine_sums(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x.iter().zip(y).map(|(p, q)| p + q).collect());
        }
    }
    out
}

fn canon_add(f: &CanonicalForm, g: &CanonicalForm) -> CanonicalForm {
    let mut pos = combine_sums(&f.pos, &g.pos);
    let mut neg = combine_sums(&f.neg, &g.neg);
    dedup_terms(&mut pos);
    dedup_terms(&mut neg);
    CanonicalForm { pos, neg }
}

fn canon_sup(f: &CanonicalForm, g: &CanonicalForm) -> CanonicalForm {
    // max(a−b, c−d) = max(a+d, c+b) − (b+d)
    let mut pos = combine_sums(&f.pos, &g.neg);
    pos.extend(combine_sums(&g.pos, &f.neg));
    let mut neg = combine_sums(&f.neg, &g.neg);
    dedup_terms(&mut pos);
    dedup_terms(&mut neg);
    CanonicalForm { pos, neg }
}

fn canon_neg(f: &CanonicalForm) -> CanonicalForm {
    CanonicalForm { pos: f.neg.clone(), neg: f.pos.clone() }
}

fn canon_scale(f: &CanonicalForm, c: f64) -> CanonicalForm {
    if c == 0.0 {
        let d = f.pos[0].len();
        return CanonicalForm { pos: vec![vec![0.0; d]], neg: vec![vec![0.0; d]] };
    }
    let s = |terms: &[Vec<f64>]| -> Vec<Vec<f64>> {
        terms.iter().map(|t| t.iter().map(|x| x * c.abs()).collect()).collect()
    };
    if c > 0.0 {
        CanonicalForm { pos: s(&f.pos), neg: s(&f.neg) }
    } else {
        CanonicalForm { pos: s(&f.neg), neg: s(&f.pos) }
    }
}

fn canon_rec(expr: &LatticeExpr, budget: usize) -> Result<CanonicalForm> {
    let check = |f: CanonicalForm| -> Result<CanonicalForm> {
        if f.terms() > budget {
            Err(Error::BudgetExhausted { terms: f.terms(), budget })
        } else {
            Ok(f)
        }
    };
    match expr {
        LatticeExpr::Gen(v) => {
            let zero = vec![0.0; v.len()];
            Ok(CanonicalForm { pos: vec![v.clone()], neg: vec![zero] })
        }
        LatticeExpr::Scale(c, e) => check(canon_scale(&canon_rec(e, budget)?, *c)),
        LatticeExpr::Add(cs) => {
            let mut acc = canon_rec(&cs[0], budget)?;
            for c in &cs[1..] {
                acc = check(canon_add(&acc, &canon_rec(c, budget)?))?;
            }
            Ok(acc)
        }
        LatticeExpr::Sup(cs) => {
            let mut acc = canon_rec(&cs[0], budget)?;
            for c in &cs[1..] {
                acc = check(canon_sup(&acc, &canon_rec(c, budget)?))?;
            }
            Ok(acc)
        }
        LatticeExpr::Inf(cs) => {
            // f ∧ g = f + g − (f ∨ g)
            let mut acc = canon_rec(&cs[0], budget)?;
            for c in &cs[1..] {
                let g = canon_rec(c, budget)?;
                let sum = check(canon_add(&acc, &g))?;
                let sup = check(canon_sup(&acc, &g))?;
                acc = check(canon_add(&sum, &canon_neg(&sup)))?;
            }
            Ok(acc)
        }
    }
}

/// Rewrites a lattice-linear expression into `⋁ δ(x_i) − ⋁ δ(y_j)` and
/// verifies the result against the input on 10³ sampled functionals.
/// Fails only when the rewrite exceeds `budget` terms (reported, never
/// silent) or — which would be a bug — the verification misses.
pub fn canonical_positive_form(expr: &LatticeExpr, budget: usize, seed: u64) -> Result<CanonicalForm> {
    let d = expr
        .payload_dim()
        .ok_or_else(|| Error::InvalidParameter("expression has no generators".into()))?;
    expr.validate_dims(d)?;
    let form = canon_rec(expr, budget)?;
    let mut rng = rng_for(seed, "canonical-check", 0);
    for _ in 0..1000 {
        let x = normal_vec(&mut rng, d);
        let a = expr.eval_unchecked(&x);
        let b = form.eval(&x);
        if (a - b).abs() > 1e-10 * (1.0 + a.abs()) {
            return Err(Error::Verification(format!("canonical form mismatch: {a} vs {b}")));
        }
    }
    Ok(form)
}

// ---------------------------------------------------------------------
// Range-of-δ test
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct DeltaRangeReport {
    pub additive_ok: bool,
    pub li_ok: bool,
    pub max_additive_defect: f64,
    pub max_li_defect: f64,
    /// Both sampled necessary conditions hold. A true result does not
    /// certify membership; the conditions are necessary only.
    pub in_range: bool,
    pub samples: usize,
}

/// `L_i x*(x) = x*(ix)`; in realified blocks `(u, v) ↦ (v, −u)`.
pub fn l_i(xstar: &[f64]) -> Vec<f64> {
    let n = xstar.len() / 2;
    let mut out = vec![0.0; xstar.len()];
    for k in 0..n {
        out[k] = xstar[n + k];
        out[n + k] = -xstar[k];
    }
    out
}

/// Sampled test of additivity and of `(f+ig)(L_i x*) = i (f+ig)(x*)`,
/// the two necessary conditions for membership in `δ_E(E)`.
pub fn is_in_delta_range(
    h: &ComplexLatticeElem,
    space: &NormedSpace,
    samples: usize,
    seed: u64,
) -> Result<DeltaRangeReport> {
    if !space.is_complex() {
        return Err(Error::RealSpaceInput);
    }
    let d = space.real_dim();
    h.validate_dims(d)?;
    let tol = 1e-9;
    let defects = par::map_collect(samples, |i| {
        let mut rng = rng_for(seed, "delta-range", i as u64);
        let x = normal_vec(&mut rng, d);
        let y = normal_vec(&mut rng, d);
        let sum: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        let hx = h.cval_unchecked(&x);
        let hy = h.cval_unchecked(&y);
        let hsum = h.cval_unchecked(&sum);
        let add_defect = (hsum - hx - hy).norm() / (1.0 + hsum.norm());
        let hl = h.cval_unchecked(&l_i(&x));
        let li_defect = (hl - Complex64::new(0.0, 1.0) * hx).norm() / (1.0 + hx.norm());
        (add_defect, li_defect)
    });
    let max_additive_defect = defects.iter().map(|d| d.0).fold(0.0, f64::max);
    let max_li_defect = defects.iter().map(|d| d.1).fold(0.0, f64::max);
    let additive_ok = max_additive_defect <= tol;
    let li_ok = max_li_defect <= tol;
    Ok(DeltaRangeReport {
        additive_ok,
        li_ok,
        max_additive_defect,
        max_li_defect,
        in_range: additive_ok && li_ok,
        samples,
    })
}

// ---------------------------------------------------------------------
// Sublattice closure by tabulation
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosureKind {
    /// Real or imaginary part of a generator (level 1 seed).
    Part,
    /// Modulus of a pair from the previous level.
    Modulus,
}

/// A closure member tabulated on the sphere grid. Values extend to the
/// whole space by positive homogeneity.
#[derive(Debug, Clone, Serialize)]
pub struct TabulatedFn {
    pub level: usize,
    pub kind: ClosureKind,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClosureFamily {
    /// Sample grid on the functional sphere (realified coordinates).
    pub grid: Vec<Vec<f64>>,
    /// Family size after each level (index 0 = parts level).
    pub level_sizes: Vec<usize>,
    pub members: Vec<TabulatedFn>,
}

#[derive(Debug, Clone, Copy)]
pub struct ClosureConfig {
    pub depth_cap: usize,
    pub max_family: usize,
    pub seed: u64,
}

impl Default for ClosureConfig {
    fn default() -> Self {
        ClosureConfig { depth_cap: 3, max_family: 4096, seed: rng::DEFAULT_SEED }
    }
}

/// Deterministic sphere grid used for tabulation: ±1 in dimension 1,
/// equispaced angles in dimension 2, seeded gaussian directions above.
pub fn sphere_grid(real_dim: usize, seed: u64) -> Vec<Vec<f64>> {
    match real_dim {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..512)
            .map(|k| {
                let th = std::f64::consts::TAU * k as f64 / 512.0;
                vec![th.cos(), th.sin()]
            })
            .collect(),
        d => {
            let mut rng = rng_for(seed, "sphere-grid", d as u64);
            (0..4096)
                .map(|_| {
                    loop {
                        let x = normal_vec(&mut rng, d);
                        let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                        if n > 1e-9 {
                            return x.iter().map(|v| v / n).collect();
                        }
                    }
                })
                .collect()
        }
    }
}

/// Iterated lattice/modulus closure of a generator set, represented by
/// the generating family of each level tabulated on a fixed grid: level
/// 1 holds the real and imaginary parts, and each further level adds the
/// moduli of pairs from the level before. Lattice-linear combinations of
/// the family are implied, not enumerated.
pub fn complex_sublattice_closure(
    space: &NormedSpace,
    generators: &[ComplexLatticeElem],
    depth: usize,
    config: &ClosureConfig,
) -> Result<ClosureFamily> {
    if generators.is_empty() {
        return Err(Error::InvalidParameter("empty generator list".into()));
    }
    if depth > config.depth_cap {
        return Err(Error::DepthCapExceeded { depth, cap: config.depth_cap });
    }
    let d = space.real_dim();
    for g in generators {
        g.validate_dims(d)?;
    }
    let grid = sphere_grid(d, config.seed);
    let tab = |e: &LatticeExpr| -> Vec<f64> {
        let vals = par::map_collect(grid.len(), |i| e.eval_unchecked(&grid[i]));
        vals
    };

    let mut members: Vec<TabulatedFn> = Vec::new();
    let push_unique = |members: &mut Vec<TabulatedFn>, f: TabulatedFn| -> bool {
        let dup = members.iter().any(|m| {
            m.values.len() == f.values.len()
                && m.values.iter().zip(&f.values).all(|(a, b)| (a - b).abs() <= 1e-12)
        });
        if !dup {
            members.push(f);
        }
        !dup
    };

    for g in generators {
        for part in [&g.re, &g.im] {
            push_unique(&mut members, TabulatedFn { level: 1, kind: ClosureKind::Part, values: tab(part) });
        }
    }
    let mut level_sizes = vec![members.len()];

    for level in 1..=depth {
        let current = members.len();
        let mut new_members = Vec::new();
        for i in 0..current {
            for j in i..current {
                let values: Vec<f64> = members[i]
                    .values
                    .iter()
                    .zip(&members[j].values)
                    .map(|(a, b)| a.hypot(*b))
                    .collect();
                new_members.push(TabulatedFn { level: level + 1, kind: ClosureKind::Modulus, values });
            }
        }
        for f in new_members {
            if members.len() >= config.max_family {
                return Err(Error::InvalidParameter(format!(
                    "closure family exceeded max_family = {}",
                    config.max_family
                )));
            }
            push_unique(&mut members, f);
        }
        level_sizes.push(members.len());
    }

    Ok(ClosureFamily { grid, level_sizes, members })
}

// ---------------------------------------------------------------------
// ι embedding into the free lattice over a finite index set
// ---------------------------------------------------------------------

/// `ι(a) = η_{(a,a)} + i η_{(−a,a)}` over the coordinate space indexed by
/// the pairs `(a_0,a_0), (−a_0,a_0), (a_1,a_1), (−a_1,a_1), …` — two
/// coordinates per element of the set, `2|A|` in total.
#[derive(Debug, Clone)]
pub struct IotaEmbedding {
    pub elem: ComplexLatticeElem,
    pub coord_dim: usize,
    pub coord_labels: Vec<String>,
}

pub fn iota_embed(set_size: usize, a: usize) -> Result<IotaEmbedding> {
    if set_size == 0 {
        return Err(Error::InvalidParameter("index set must be nonempty".into()));
    }
    if a >= set_size {
        return Err(Error::IndexOutOfSet { index: a, size: set_size });
    }
    let dim = 2 * set_size;
    let mut re = vec![0.0; dim];
    let mut im = vec![0.0; dim];
    re[2 * a] = 1.0;
    im[2 * a + 1] = 1.0;
    let coord_labels = (0..set_size)
        .flat_map(|k| [format!("(a{k},a{k})"), format!("(-a{k},a{k})")])
        .collect();
    Ok(IotaEmbedding {
        elem: ComplexLatticeElem { re: LatticeExpr::Gen(re), im: LatticeExpr::Gen(im) },
        coord_dim: dim,
        coord_labels,
    })
}

// ---------------------------------------------------------------------
// JSON serialization
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoordJson {
    Real(f64),
    Pair([f64; 2]),
}

/// Wire grammar: `{"gen": [coords]}`, `{"scale": [c, e]}`,
/// `{"add": [e...]}`, `{"sup": [e...]}`, `{"inf": [e...]}`. Complex
/// generator payloads use `[re, im]` per coordinate.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExprJson {
    Gen(Vec<CoordJson>),
    Scale(f64, Box<ExprJson>),
    Add(Vec<ExprJson>),
    Sup(Vec<ExprJson>),
    Inf(Vec<ExprJson>),
}

/// `{"re": e, "im": e}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElemJson {
    pub re: ExprJson,
    pub im: ExprJson,
}

impl ExprJson {
    pub fn to_expr(&self, space: &NormedSpace) -> Result<LatticeExpr> {
        match self {
            ExprJson::Gen(coords) => {
                if coords.len() != space.dim() {
                    return Err(Error::DimensionMismatch { expected: space.dim(), got: coords.len() });
                }
                if space.is_complex() {
                    let z: Vec<Complex64> = coords
                        .iter()
                        .map(|c| match c {
                            CoordJson::Pair([re, im]) => Ok(Complex64::new(*re, *im)),
                            CoordJson::Real(_) => Err(Error::Config(
                                "complex generator payload must use [re, im] pairs".into(),
                            )),
                        })
                        .collect::<Result<_>>()?;
                    Ok(LatticeExpr::Gen(realify_vector(&z)))
                } else {
                    let v: Vec<f64> = coords
                        .iter()
                        .map(|c| match c {
                            CoordJson::Real(x) => Ok(*x),
                            CoordJson::Pair(_) => {
                                Err(Error::Config("real generator payload must use plain numbers".into()))
                            }
                        })
                        .collect::<Result<_>>()?;
                    Ok(LatticeExpr::Gen(v))
                }
            }
            ExprJson::Scale(c, e) => Ok(LatticeExpr::scale(*c, e.to_expr(space)?)),
            ExprJson::Add(cs) => {
                LatticeExpr::add(cs.iter().map(|c| c.to_expr(space)).collect::<Result<_>>()?)
            }
            ExprJson::Sup(cs) => {
                LatticeExpr::sup(cs.iter().map(|c| c.to_expr(space)).collect::<Result<_>>()?)
            }
            ExprJson::Inf(cs) => {
                LatticeExpr::inf(cs.iter().map(|c| c.to_expr(space)).collect::<Result<_>>()?)
            }
        }
    }

    pub fn from_expr(expr: &LatticeExpr, space: &NormedSpace) -> Result<ExprJson> {
        Ok(match expr {
            LatticeExpr::Gen(v) => {
                if v.len() != space.real_dim() {
                    return Err(Error::DimensionMismatch { expected: space.real_dim(), got: v.len() });
                }
                if space.is_complex() {
                    let n = space.dim();
                    ExprJson::Gen((0..n).map(|k| CoordJson::Pair([v[k], v[n + k]])).collect())
                } else {
                    ExprJson::Gen(v.iter().map(|x| CoordJson::Real(*x)).collect())
                }
            }
            LatticeExpr::Scale(c, e) => ExprJson::Scale(*c, Box::new(ExprJson::from_expr(e, space)?)),
            LatticeExpr::Add(cs) => {
                ExprJson::Add(cs.iter().map(|c| ExprJson::from_expr(c, space)).collect::<Result<_>>()?)
            }
            LatticeExpr::Sup(cs) => {
                ExprJson::Sup(cs.iter().map(|c| ExprJson::from_expr(c, space)).collect::<Result<_>>()?)
            }
            LatticeExpr::Inf(cs) => {
                ExprJson::Inf(cs.iter().map(|c| ExprJson::from_expr(c, space)).collect::<Result<_>>()?)
            }
        })
    }
}

impl ElemJson {
    pub fn to_elem(&self, space: &NormedSpace) -> Result<ComplexLatticeElem> {
        Ok(ComplexLatticeElem { re: self.re.to_expr(space)?, im: self.im.to_expr(space)? })
    }

    pub fn from_elem(h: &ComplexLatticeElem, space: &NormedSpace) -> Result<ElemJson> {
        Ok(ElemJson {
            re: ExprJson::from_expr(&h.re, space)?,
            im: ExprJson::from_expr(&h.im, space)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::Field;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eval_generator_and_sup() {
        let e = LatticeExpr::Gen(vec![2.0, -1.0]);
        assert_eq!(e.eval(&[3.0, 1.0]).unwrap(), 5.0);
        let s = LatticeExpr::sup(vec![LatticeExpr::Gen(vec![1.0, 0.0]), LatticeExpr::Gen(vec![0.0, 1.0])]).unwrap();
        assert_eq!(s.eval(&[0.3, 0.7]).unwrap(), 0.7);
        assert_eq!(s.eval(&[0.9, 0.7]).unwrap(), 0.9);
    }

    #[test]
    fn abs_value_on_the_line() {
        // f = δ_1 ∨ δ_{−1} evaluates to |t|
        let f = LatticeExpr::sup(vec![LatticeExpr::Gen(vec![1.0]), LatticeExpr::Gen(vec![-1.0])]).unwrap();
        for t in [-3.0, -0.5, 0.0, 0.25, 7.0] {
            assert_eq!(f.eval(&[t]).unwrap(), t.abs());
        }
    }

    #[test]
    fn empty_sup_rejected_and_dim_mismatch() {
        assert!(LatticeExpr::sup(vec![]).is_err());
        let e = LatticeExpr::Gen(vec![1.0, 2.0]);
        assert!(e.eval(&[1.0]).is_err());
    }

    #[test]
    fn positive_homogeneity_sampled() {
        let mut rng = rng_for(2, "homog", 0);
        for trial in 0..200 {
            let expr = crate::sampling::random_expr(&mut rng, 3, 2);
            let x = normal_vec(&mut rng, 3);
            let t: f64 = rng::normal(&mut rng).abs();
            let a = expr.eval_unchecked(&x);
            let xs: Vec<f64> = x.iter().map(|v| v * t).collect();
            let b = expr.eval_unchecked(&xs);
            assert!((b - t * a).abs() <= 1e-12 * (1.0 + a.abs() * t), "trial {trial}: {b} vs {}", t * a);
        }
    }

    #[test]
    fn modulus_methods() {
        let space = NormedSpace::lp(1, Field::Complex, 2.0).unwrap();
        let h = delta_embed(&space, &[c(1.0, 0.0)]).unwrap();
        // at x* = (3,4): re = 3, im = -4, modulus 5
        assert_eq!(h.modulus_eval(&[3.0, 4.0], ModulusMethod::Sqrt).unwrap(), 5.0);
        assert!(h.modulus_eval(&[3.0, 4.0], ModulusMethod::ThetaGrid(3)).is_err());
        let grid = h.modulus_eval(&[3.0, 4.0], ModulusMethod::ThetaGrid(256)).unwrap();
        assert!(grid <= 5.0 && grid >= 5.0 * (std::f64::consts::PI / 256.0).cos());
        // im = 0 reduces to |re|
        let g = ComplexLatticeElem::from_real(LatticeExpr::Gen(vec![1.0, 0.0]), 2);
        assert_eq!(g.modulus_eval(&[-2.0, 9.0], ModulusMethod::Sqrt).unwrap(), 2.0);
        // monotone in N along doublings, always below sqrt
        let mut rng = rng_for(3, "mod-mono", 0);
        for _ in 0..50 {
            let x = normal_vec(&mut rng, 2);
            let exact = h.modulus_eval(&x, ModulusMethod::Sqrt).unwrap();
            let mut last = 0.0;
            for n in [4usize, 8, 16, 32, 64, 128, 256] {
                let v = h.modulus_eval(&x, ModulusMethod::ThetaGrid(n)).unwrap();
                assert!(v >= last - 1e-15);
                assert!(v <= exact + 1e-15);
                assert!(exact - v <= exact * (1.0 - (std::f64::consts::PI / n as f64).cos()) + 1e-12);
                last = v;
            }
        }
    }

    #[test]
    fn delta_embed_examples() {
        let space = NormedSpace::lp(1, Field::Complex, 2.0).unwrap();
        let h = delta_embed(&space, &[c(1.0, 0.0)]).unwrap();
        // re-part(a,b) = a, im-part(a,b) = -b
        assert_eq!(h.re.eval(&[5.0, 7.0]).unwrap(), 5.0);
        assert_eq!(h.im.eval(&[5.0, 7.0]).unwrap(), -7.0);
        // δ_E(0) = 0
        let z = delta_embed(&space, &[c(0.0, 0.0)]).unwrap();
        assert_eq!(z.cval(&[1.0, 2.0]).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn delta_is_c_linear_pointwise() {
        let space = NormedSpace::lp(2, Field::Complex, 3.0).unwrap();
        let mut rng = rng_for(4, "clin", 0);
        for _ in 0..50 {
            let z = rng::normal_complex_vec(&mut rng, 2);
            let iz: Vec<Complex64> = z.iter().map(|v| v * c(0.0, 1.0)).collect();
            let hz = delta_embed(&space, &z).unwrap();
            let hiz = delta_embed(&space, &iz).unwrap();
            let rotated = hz.scale_complex(c(0.0, 1.0));
            let x = normal_vec(&mut rng, 4);
            let a = hiz.cval(&x).unwrap();
            let b = rotated.cval(&x).unwrap();
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn delta_evaluation_identity() {
        // (δ_E z)(Re z*) = z*(z), exactly
        let space = NormedSpace::lp(3, Field::Complex, 2.0).unwrap();
        let mut rng = rng_for(5, "deltaid", 0);
        for _ in 0..100 {
            let z = rng::normal_complex_vec(&mut rng, 3);
            let zstar = crate::spaces::ComplexFunctional::new(rng::normal_complex_vec(&mut rng, 3));
            let h = delta_embed(&space, &z).unwrap();
            let lhs = h.cval(&zstar.realify()).unwrap();
            let rhs = zstar.apply(&z);
            assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
        }
    }

    #[test]
    fn canonical_form_basics() {
        let x = vec![1.0, 2.0];
        let y = vec![-1.0, 0.5];
        let dx = LatticeExpr::Gen(x.clone());
        let f = canonical_positive_form(&dx, 64, 1).unwrap();
        assert_eq!(f.pos, vec![x.clone()]);
        assert_eq!(f.neg, vec![vec![0.0, 0.0]]);

        let sup = LatticeExpr::sup(vec![LatticeExpr::Gen(x.clone()), LatticeExpr::Gen(y.clone())]).unwrap();
        let f = canonical_positive_form(&sup, 64, 1).unwrap();
        assert_eq!(f.pos.len(), 2);
        assert_eq!(f.neg, vec![vec![0.0, 0.0]]);

        let neg = LatticeExpr::scale(-1.0, LatticeExpr::Gen(x.clone()));
        let f = canonical_positive_form(&neg, 64, 1).unwrap();
        assert_eq!(f.pos, vec![vec![0.0, 0.0]]);
        assert_eq!(f.neg, vec![x.clone()]);
    }

    #[test]
    fn canonical_form_random_trees_agree() {
        let mut rng = rng_for(6, "canon-rand", 0);
        for _ in 0..30 {
            let expr = crate::sampling::random_expr(&mut rng, 2, 3);
            match canonical_positive_form(&expr, 20_000, 1) {
                Ok(form) => {
                    for _ in 0..50 {
                        let x = normal_vec(&mut rng, 2);
                        let a = expr.eval_unchecked(&x);
                        let b = form.eval(&x);
                        assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
                    }
                }
                Err(Error::BudgetExhausted { .. }) => {}
                Err(e) => panic!("unexpected error {e}"),
            }
        }
    }

    #[test]
    fn canonical_budget_is_reported() {
        // alternating inf/sup over many generators blows up quickly
        let mut rng = rng_for(7, "canon-budget", 0);
        let gens: Vec<LatticeExpr> = (0..6).map(|_| LatticeExpr::Gen(normal_vec(&mut rng, 2))).collect();
        let mut expr = LatticeExpr::inf(gens.clone()).unwrap();
        for _ in 0..4 {
            expr = LatticeExpr::inf(vec![expr.clone(), LatticeExpr::Add(gens.clone())]).unwrap();
        }
        match canonical_positive_form(&expr, 32, 1) {
            Err(Error::BudgetExhausted { terms, budget }) => {
                assert!(terms > budget);
            }
            other => panic!("expected budget exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn delta_range_detection() {
        let space = NormedSpace::lp(1, Field::Complex, 2.0).unwrap();
        let h = delta_embed(&space, &[c(0.7, -0.3)]).unwrap();
        let rep = is_in_delta_range(&h, &space, 200, 1).unwrap();
        assert!(rep.in_range, "δ_E(z) must pass: {rep:?}");

        // modulus-like real part (|<x,·>| as an expression) fails L_i
        let modx = LatticeExpr::sup(vec![LatticeExpr::Gen(vec![1.0, 0.0]), LatticeExpr::Gen(vec![-1.0, 0.0])]).unwrap();
        let bad = ComplexLatticeElem::from_real(modx, 2);
        let rep = is_in_delta_range(&bad, &space, 200, 1).unwrap();
        assert!(!rep.in_range);
        assert!(!rep.li_ok);

        let zero = ComplexLatticeElem::zero(2);
        let rep = is_in_delta_range(&zero, &space, 50, 1).unwrap();
        assert!(rep.in_range);
    }

    #[test]
    fn closure_contains_euclidean_modulus() {
        let space = NormedSpace::lp(1, Field::Complex, 2.0).unwrap();
        let g = delta_embed(&space, &[c(1.0, 0.0)]).unwrap();
        let fam = complex_sublattice_closure(&space, &[g], 1, &ClosureConfig::default()).unwrap();
        // some member must equal sqrt(a² + b²) = 1 on the whole circle grid
        let found = fam.members.iter().any(|m| m.values.iter().all(|v| (v - 1.0).abs() < 1e-12));
        assert!(found, "level sizes {:?}", fam.level_sizes);
        assert!(complex_sublattice_closure(&space, &[], 1, &ClosureConfig::default()).is_err());
        let too_deep = complex_sublattice_closure(
            &space,
            &[delta_embed(&space, &[c(1.0, 0.0)]).unwrap()],
            9,
            &ClosureConfig::default(),
        );
        assert!(matches!(too_deep, Err(Error::DepthCapExceeded { .. })));
    }

    #[test]
    fn closure_depth_zero_is_parts_only() {
        let space = NormedSpace::lp(1, Field::Complex, 2.0).unwrap();
        let g = delta_embed(&space, &[c(1.0, 0.0)]).unwrap();
        let fam = complex_sublattice_closure(&space, &[g], 0, &ClosureConfig::default()).unwrap();
        assert_eq!(fam.level_sizes.len(), 1);
        assert!(fam.members.iter().all(|m| m.kind == ClosureKind::Part));
    }

    #[test]
    fn iota_embedding_shape() {
        let i0 = iota_embed(1, 0).unwrap();
        assert_eq!(i0.coord_dim, 2);
        // ι(a) at f: f(a,a) + i f(−a,a)
        let v = i0.elem.cval(&[0.4, -0.9]).unwrap();
        assert_eq!(v, c(0.4, -0.9));

        let two = iota_embed(2, 1).unwrap();
        assert_eq!(two.coord_dim, 4);
        assert_eq!(two.coord_labels.len(), 4);
        // distinct coordinates for distinct elements
        let a = iota_embed(2, 0).unwrap();
        assert_ne!(a.elem.re, two.elem.re);
        assert!(iota_embed(2, 2).is_err());
    }

    #[test]
    fn expr_json_roundtrip() {
        let space = NormedSpace::lp(2, Field::Complex, 2.0).unwrap();
        let h = delta_embed(&space, &[c(1.0, 2.0), c(-0.5, 0.25)]).unwrap();
        let wrapped = ComplexLatticeElem {
            re: LatticeExpr::sup(vec![h.re.clone(), LatticeExpr::scale(2.0, h.im.clone())]).unwrap(),
            im: LatticeExpr::inf(vec![h.im.clone(), LatticeExpr::Add(vec![h.re.clone(), h.re.clone()])]).unwrap(),
        };
        let js = ElemJson::from_elem(&wrapped, &space).unwrap();
        let text = serde_json::to_string(&js).unwrap();
        let parsed: ElemJson = serde_json::from_str(&text).unwrap();
        let back = parsed.to_elem(&space).unwrap();
        assert_eq!(back, wrapped);
    }

    #[test]
    fn expr_json_rejects_mixed_payloads() {
        let complex = NormedSpace::lp(1, Field::Complex, 2.0).unwrap();
        let js: ExprJson = serde_json::from_str(r#"{"gen": [1.5]}"#).unwrap();
        assert!(js.to_expr(&complex).is_err());
        let real = NormedSpace::lp(1, Field::Real, 2.0).unwrap();
        let js: ExprJson = serde_json::from_str(r#"{"gen": [[1.0, 2.0]]}"#).unwrap();
        assert!(js.to_expr(&real).is_err());
    }
}
