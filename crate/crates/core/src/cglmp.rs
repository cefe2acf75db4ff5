//! The CGLMP functional `I_d` and the certificate that `I_d <= 2` is a facet of
//! the local polytope.
//!
//! On a generator the functional only depends on the differences
//!
//! ```text
//! r = A₁ - B₁,  s = B₂ - A₁,  t = B₁ - A₂ - 1,  u = A₂ - B₂
//! ```
//!
//! each shifted by a multiple of `d` into `[-⌊d/2⌋, ⌊(d-1)/2⌋]`, and equals
//! `f(r) + f(s) + f(t) + f(u)` with `f(x) = 1 - 2x/(d-1)` for `x >= 0` and
//! `f(x) = -2x/(d-1) - (d+1)/(d-1)` for `x < 0`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{determinant, EchelonBasis, RationalMatrix};
use crate::rational::Rational;
use crate::scenario::{behavior_index, Behavior, DeterministicStrategy, Inequality, Scenario, Space};

/// One signed correlator term `coeff · P(A_a - B_b ≐ n)` of the functional.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub a: usize,
    pub b: usize,
    pub n: usize,
    pub coeff: Rational,
}

/// The correlator terms of `I_d`, grouped by `k = 0..=⌊d/2 - 1⌋` with weight `1 - 2k/(d-1)`.
pub fn terms(d: usize) -> Vec<Term> {
    let dm = d as i64;
    let md = |x: i64| x.rem_euclid(dm) as usize;
    let mut out = Vec::new();
    for k in 0..=(d as i64 / 2 - 1) {
        let c = Rational::one() - Rational::new(2 * k, dm - 1);
        let mut push = |a, b, n, sign: i64| {
            let coeff = if sign > 0 { c.clone() } else { -&c };
            out.push(Term { a, b, n: md(n), coeff });
        };
        push(0, 0, k, 1);
        push(0, 0, -k - 1, -1);
        push(0, 1, -k, 1);
        push(0, 1, k + 1, -1);
        push(1, 0, -k - 1, 1);
        push(1, 0, k, -1);
        push(1, 1, k, 1);
        push(1, 1, -k - 1, -1);
    }
    out
}

/// `I_d <= 2` over joint probabilities: every correlator term is expanded into
/// the `d` joint probabilities it sums.
pub fn cglmp_inequality(d: usize) -> Result<Inequality> {
    Scenario::new(d)?;
    let mut coeffs = vec![Rational::zero(); 4 * d * d];
    for term in terms(d) {
        for j in 0..d {
            coeffs[behavior_index(d, term.a, term.b, (term.n + j) % d, j)] += &term.coeff;
        }
    }
    Ok(Inequality { space: Space::Behavior(d), coeffs, bound: Rational::from_int(2) })
}

pub fn eval(ineq: &Inequality, p: &Behavior) -> Result<Rational> {
    ineq.eval_behavior(p)
}

fn window(d: usize) -> (i64, i64) {
    (-(d as i64 / 2), (d as i64 - 1) / 2)
}

fn to_window(x: i64, d: usize) -> i64 {
    let (_, hi) = window(d);
    let m = x.rem_euclid(d as i64);
    if m > hi {
        m - d as i64
    } else {
        m
    }
}

/// The windowed difference variables of a generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Rstu {
    pub r: i64,
    pub s: i64,
    pub t: i64,
    pub u: i64,
}

impl Rstu {
    pub fn new(values: [i64; 4], d: usize) -> Result<Self> {
        let v = Rstu { r: values[0], s: values[1], t: values[2], u: values[3] };
        v.check(d)?;
        Ok(v)
    }

    pub fn values(&self) -> [i64; 4] {
        [self.r, self.s, self.t, self.u]
    }

    pub fn sum(&self) -> i64 {
        self.r + self.s + self.t + self.u
    }

    pub fn check(&self, d: usize) -> Result<()> {
        let (lo, hi) = window(d);
        let dm = d as i64;
        if self.values().iter().any(|&x| x < lo || x > hi) {
            return Err(Error::InvalidRstu(self.values(), format!("outside [{lo}, {hi}]")));
        }
        if (self.sum() + 1).rem_euclid(dm) != 0 {
            return Err(Error::InvalidRstu(self.values(), "sum is not -1 mod d".into()));
        }
        Ok(())
    }
}

pub fn rstu(lambda: DeterministicStrategy, d: usize) -> Result<Rstu> {
    lambda.check(d)?;
    let (a1, a2, b1, b2) = (lambda.a1 as i64, lambda.a2 as i64, lambda.b1 as i64, lambda.b2 as i64);
    Ok(Rstu {
        r: to_window(a1 - b1, d),
        s: to_window(-a1 + b2, d),
        t: to_window(-a2 + b1 - 1, d),
        u: to_window(a2 - b2, d),
    })
}

pub fn f(x: i64, d: usize) -> Rational {
    let dm1 = d as i64 - 1;
    let lin = Rational::new(-2 * x, dm1);
    if x >= 0 {
        lin + Rational::one()
    } else {
        lin - Rational::new(d as i64 + 1, dm1)
    }
}

pub fn eval_on_generator(lambda: DeterministicStrategy, d: usize) -> Result<Rational> {
    Ok(rstu(lambda, d)?.values().iter().map(|&x| f(x, d)).sum())
}

/// Sign pattern (number of strictly negative variables) and sum branch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseClass {
    /// All nonnegative, sum `d-1`.
    Case1,
    /// One negative, sum `d-1`.
    Case2a,
    /// One negative, sum `-1`.
    Case2b,
    /// Two negative, sum `-1`.
    Case3,
    /// Three negative, sum `-1`.
    Case4a,
    /// Three negative, sum `-d-1`.
    Case4b,
    /// All negative, sum `-d-1`.
    Case5,
}

impl CaseClass {
    pub fn negatives(&self) -> i64 {
        match self {
            CaseClass::Case1 => 0,
            CaseClass::Case2a | CaseClass::Case2b => 1,
            CaseClass::Case3 => 2,
            CaseClass::Case4a | CaseClass::Case4b => 3,
            CaseClass::Case5 => 4,
        }
    }

    pub fn sum(&self, d: usize) -> i64 {
        let d = d as i64;
        match self {
            CaseClass::Case1 | CaseClass::Case2a => d - 1,
            CaseClass::Case2b | CaseClass::Case3 | CaseClass::Case4a => -1,
            CaseClass::Case4b | CaseClass::Case5 => -d - 1,
        }
    }

    /// `I_d` on any generator of this class: summing `f` gives
    /// `-2·sum/(d-1) + #nonneg - #neg·(d+1)/(d-1)`.
    pub fn value(&self, d: usize) -> Rational {
        let dm1 = d as i64 - 1;
        let neg = self.negatives();
        Rational::new(-2 * self.sum(d), dm1) + Rational::from_int(4 - neg) - Rational::new(neg * (d as i64 + 1), dm1)
    }

    pub fn saturates(&self) -> bool {
        matches!(self, CaseClass::Case1 | CaseClass::Case2b)
    }
}

pub fn classify_case(v: Rstu, d: usize) -> Result<CaseClass> {
    v.check(d)?;
    let neg = v.values().iter().filter(|&&x| x < 0).count();
    let sum = v.sum();
    let dm = d as i64;
    let class = match (neg, sum) {
        (0, s) if s == dm - 1 => CaseClass::Case1,
        (1, s) if s == dm - 1 => CaseClass::Case2a,
        (1, -1) => CaseClass::Case2b,
        (2, -1) => CaseClass::Case3,
        (3, -1) => CaseClass::Case4a,
        (3, s) if s == -dm - 1 => CaseClass::Case4b,
        (4, s) if s == -dm - 1 => CaseClass::Case5,
        _ => {
            return Err(Error::InvalidRstu(v.values(), format!("{neg} negatives with sum {sum} fits no case")));
        }
    };
    Ok(class)
}

/// The three values `I_d` can take on a generator.
pub fn allowed_values(d: usize) -> [Rational; 3] {
    let dm1 = d as i64 - 1;
    [Rational::from_int(2), Rational::new(-2, dm1), Rational::new(-2 * (d as i64 + 1), dm1)]
}

#[derive(Clone, Debug, Serialize)]
pub struct Condition1Report {
    pub d: usize,
    pub max: Rational,
    pub generators: usize,
    pub histogram: BTreeMap<Rational, usize>,
    pub cases: BTreeMap<CaseClass, usize>,
}

#[derive(Default)]
struct Tally {
    histogram: BTreeMap<Rational, usize>,
    cases: BTreeMap<CaseClass, usize>,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        for (k, v) in other.histogram {
            *self.histogram.entry(k).or_default() += v;
        }
        for (k, v) in other.cases {
            *self.cases.entry(k).or_default() += v;
        }
        self
    }
}

/// Evaluates `I_d` on every generator through both the coefficient vector and
/// the `f` decomposition and checks that they agree, stay in the allowed value
/// set and peak at 2.
pub fn verify_condition1(d: usize) -> Result<Condition1Report> {
    let s = Scenario::new(d)?;
    let ineq = cglmp_inequality(d)?;
    let allowed = allowed_values(d);
    let tally = (0..d)
        .into_par_iter()
        .map(|a1| -> Result<Tally> {
            let mut tally = Tally::default();
            for rest in 0..d * d * d {
                let lambda = DeterministicStrategy::new(a1, rest / (d * d), (rest / d) % d, rest % d);
                let coeff_form = ineq.eval_strategy(lambda)?;
                let v = rstu(lambda, d)?;
                let f_form: Rational = v.values().iter().map(|&x| f(x, d)).sum();
                if coeff_form != f_form {
                    return Err(Error::Verification(format!(
                        "strategy ({lambda}): coefficient form {coeff_form} != f form {f_form}"
                    )));
                }
                if !allowed.contains(&f_form) {
                    return Err(Error::Verification(format!("strategy ({lambda}): value {f_form} not allowed")));
                }
                let class = classify_case(v, d)?;
                if class.value(d) != f_form {
                    return Err(Error::Verification(format!(
                        "strategy ({lambda}): {class:?} predicts {} but f form gives {f_form}",
                        class.value(d)
                    )));
                }
                *tally.histogram.entry(f_form).or_default() += 1;
                *tally.cases.entry(class).or_default() += 1;
            }
            Ok(tally)
        })
        .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))?;
    let max = tally.histogram.keys().next_back().cloned().expect("nonempty");
    if max != Rational::from_int(2) {
        return Err(Error::Verification(format!("maximum over generators is {max}, not 2")));
    }
    Ok(Condition1Report { d, max, generators: s.num_strategies(), histogram: tally.histogram, cases: tally.cases })
}

/// Every strategy with `I_d = 2`, checked against the case characterization.
pub fn saturating_generators(d: usize) -> Result<Vec<DeterministicStrategy>> {
    let s = Scenario::new(d)?;
    let mut out = Vec::new();
    let two = Rational::from_int(2);
    for lambda in s.strategies() {
        let v = rstu(lambda, d)?;
        let on_plane = eval_on_generator(lambda, d)? == two;
        let by_case = classify_case(v, d)?.saturates();
        if on_plane != by_case {
            return Err(Error::Verification(format!(
                "strategy ({lambda}): on hyperplane = {on_plane}, case analysis says {by_case}"
            )));
        }
        if on_plane {
            out.push(lambda);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct TightnessReport {
    pub d: usize,
    pub saturating: usize,
    pub rank: usize,
    pub h: usize,
    pub tight: bool,
}

/// Linear rank of the saturating generators; the inequality is a facet iff it equals `4d(d-1)`.
pub fn tightness_rank(d: usize) -> Result<TightnessReport> {
    let s = Scenario::new(d)?;
    let sat = saturating_generators(d)?;
    let mut basis = EchelonBasis::new(s.behavior_len());
    let mut v = vec![Rational::zero(); s.behavior_len()];
    for lambda in &sat {
        let support = lambda.support(d);
        for &i in &support {
            v[i] = Rational::one();
        }
        basis.insert(&v);
        for &i in &support {
            v[i] = Rational::zero();
        }
    }
    let h = s.expected_affine_dim();
    Ok(TightnessReport { d, saturating: sat.len(), rank: basis.rank(), h, tight: basis.rank() == h })
}

/// Coordinate permutation taking `|A₁,B₁⟩ ⊕ |A₁,B₂⟩ ⊕ |A₂,B₁⟩ ⊕ |A₂,B₂⟩` to
/// `|A₁,r⟩ ⊕ |A₁,s⟩ ⊕ |A₁-r,t⟩ ⊕ |A₁+s,u⟩`, i.e. per block
/// `(k, s) ↦ (k, k-s)`, `(k, s-k)`, `(s, s-k-1)`, `(s, k-s)` modulo `d`.
pub fn witness_frame_index(d: usize, flat: usize) -> usize {
    let blk = flat / (d * d);
    let k = (flat / d) % d;
    let s = flat % d;
    let (x, y) = match blk {
        0 => (k, (k + d - s) % d),
        1 => (k, (s + d - k) % d),
        2 => (s, (2 * d + s - k - 1) % d),
        _ => (s, (k + d - s) % d),
    };
    blk * d * d + x * d + y
}

/// Inverse of [`witness_frame_index`].
pub fn behavior_frame_index(d: usize, flat: usize) -> usize {
    let blk = flat / (d * d);
    let x = (flat / d) % d;
    let y = flat % d;
    let (k, s) = match blk {
        0 => (x, (x + d - y) % d),
        1 => (x, (x + y) % d),
        2 => ((2 * d + x - y - 1) % d, x),
        _ => ((x + y) % d, x),
    };
    blk * d * d + k * d + s
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessScheme {
    /// Four cyclic rotations of `(a, b₁, b₂, b₃)`.
    Example1,
    /// `(a,a,b₁,b₂)`, `(a,b₁,a,b₂)`, `(a,b₁,b₂,a)`, `(b₁,a,a,b₂)`.
    Example2,
    /// The Example-2 rows, for the step whose table column lists `(a, b₁, a, b₂)`.
    Example2Variant,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct StepParams {
    pub a: i64,
    pub b1: i64,
    pub b2: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b3: Option<i64>,
}

impl StepParams {
    fn ex1(a: i64, b1: i64, b2: i64, b3: i64) -> Self {
        StepParams { a, b1, b2, b3: Some(b3) }
    }

    fn ex2(a: i64, b1: i64, b2: i64) -> Self {
        StepParams { a, b1, b2, b3: None }
    }
}

/// The `d - 1` steps `(scheme, a, b₁, b₂, b₃)` for the residue of `d` mod 4.
pub fn witness_steps(d: usize) -> Result<Vec<(WitnessScheme, StepParams)>> {
    Scenario::new(d)?;
    use WitnessScheme::*;
    let e = (d / 4) as i64;
    let mut steps = Vec::with_capacity(d - 1);
    // Second phase: three nonnegative variables and one negative, sum -1.
    let negative_phase = |steps: &mut Vec<_>, count: i64| {
        for k in 1..=count {
            steps.push((Example1, StepParams::ex1(-k, k - 1, 0, 0)));
        }
    };
    match d % 4 {
        0 => {
            for k in 1..=e {
                steps.push((Example1, StepParams::ex1(e - k, e + k - 1, e, e)));
                if k < e {
                    steps.push((Example1, StepParams::ex1(e + k, e - k, e - 1, e)));
                }
            }
            negative_phase(&mut steps, 2 * e);
        }
        1 => {
            // Columns labelled (b₁, b₂, a, a).
            steps.push((Example2, StepParams::ex2(e - 1, e + 1, e + 1)));
            steps.push((Example2, StepParams::ex2(e, e - 1, e + 1)));
            for k in 2..=e {
                steps.push((Example1, StepParams::ex1(e + k, e - k + 1, e - 1, e)));
                steps.push((Example1, StepParams::ex1(e - k, e + k, e, e)));
            }
            negative_phase(&mut steps, 2 * e);
        }
        2 => {
            for k in 1..=e {
                steps.push((Example1, StepParams::ex1(e + k, e - k + 1, e, e)));
                steps.push((Example1, StepParams::ex1(e - k, e + k, e + 1, e)));
            }
            negative_phase(&mut steps, 2 * e + 1);
        }
        _ => {
            // Column labelled (a, b₁, a, b₂).
            steps.push((Example2Variant, StepParams::ex2(e + 1, e, e)));
            if e >= 1 {
                steps.push((Example1, StepParams::ex1(e - 1, e + 1, e + 1, e + 1)));
                for k in 2..=e {
                    steps.push((Example1, StepParams::ex1(e + k, e - k + 1, e + 1, e)));
                    steps.push((Example1, StepParams::ex1(e - k, e + k, e + 1, e + 1)));
                }
                steps.push((Example1, StepParams::ex1(2 * e + 1, 0, e + 1, e)));
            }
            negative_phase(&mut steps, 2 * e + 1);
        }
    }
    debug_assert_eq!(steps.len(), d - 1);
    Ok(steps)
}

fn scheme_rows(scheme: WitnessScheme, p: StepParams) -> [[i64; 4]; 4] {
    let StepParams { a, b1, b2, b3 } = p;
    match scheme {
        WitnessScheme::Example1 => {
            let b3 = b3.expect("example 1 needs b3");
            [[a, b1, b2, b3], [b3, a, b1, b2], [b2, b3, a, b1], [b1, b2, b3, a]]
        }
        WitnessScheme::Example2 | WitnessScheme::Example2Variant => {
            [[a, a, b1, b2], [a, b1, a, b2], [a, b1, b2, a], [b1, a, a, b2]]
        }
    }
}

/// A saturating generator written as `|A,r⟩ ⊕ |A,s⟩ ⊕ |A-r,t⟩ ⊕ |A+s,u⟩`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessVector {
    pub base: usize,
    pub rstu: [i64; 4],
    pub strategy: DeterministicStrategy,
    /// Flat indices of the four unit entries in the permuted frame.
    pub support: [usize; 4],
}

impl WitnessVector {
    fn new(d: usize, base: usize, v: [i64; 4]) -> Self {
        let dm = d as i64;
        let md = |x: i64| x.rem_euclid(dm) as usize;
        let a = base as i64;
        let [r, s, t, u] = v;
        let cells = [(a, r), (a, s), (a - r, t), (a + s, u)];
        let mut support = [0; 4];
        for (blk, (x, y)) in cells.iter().enumerate() {
            support[blk] = blk * d * d + md(*x) * d + md(*y);
        }
        let b1 = a - r;
        let strategy = DeterministicStrategy::new(base, md(b1 - t - 1), md(b1), md(a + s));
        WitnessVector { base, rstu: v, strategy, support }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessBatch {
    pub step_index: usize,
    pub scheme: WitnessScheme,
    pub params: StepParams,
    pub vectors: Vec<WitnessVector>,
    pub rank_after: usize,
}

/// Rebuilds the staged set of `4d(d-1)` independent saturating generators and
/// checks that every batch of `4d` vectors raises the rank by exactly `4d`.
pub fn constructive_witness(d: usize) -> Result<Vec<WitnessBatch>> {
    let s = Scenario::new(d)?;
    let steps = witness_steps(d)?;
    let two = Rational::from_int(2);
    let mut basis = EchelonBasis::new(s.behavior_len());
    let mut batches = Vec::with_capacity(steps.len());
    for (step_index, (scheme, params)) in steps.into_iter().enumerate() {
        let fail = |msg: String| Error::Verification(format!("witness step {step_index}: {msg}"));
        let rows = scheme_rows(scheme, params);
        let mut vectors = Vec::with_capacity(4 * d);
        for row in rows {
            let v = Rstu::new(row, d).map_err(|e| fail(e.to_string()))?;
            if !classify_case(v, d)?.saturates() {
                return Err(fail(format!("{row:?} does not saturate the inequality")));
            }
            for base in 0..d {
                let w = WitnessVector::new(d, base, row);
                if rstu(w.strategy, d)?.values() != row || eval_on_generator(w.strategy, d)? != two {
                    return Err(fail(format!("vector {row:?} at A = {base} is not a saturating generator")));
                }
                vectors.push(w);
            }
        }
        if scheme != WitnessScheme::Example1 {
            check_example2_minors(d, params, &vectors).map_err(|m| fail(m))?;
        }
        let before = basis.rank();
        let mut dense = vec![Rational::zero(); s.behavior_len()];
        for w in &vectors {
            for &i in &w.support {
                dense[i] = Rational::one();
            }
            basis.insert(&dense);
            for &i in &w.support {
                dense[i] = Rational::zero();
            }
        }
        let gained = basis.rank() - before;
        if gained != 4 * d {
            return Err(fail(format!("rank grew by {gained}, expected {}", 4 * d)));
        }
        batches.push(WitnessBatch { step_index, scheme, params, vectors, rank_after: basis.rank() });
    }
    Ok(batches)
}

/// For each `A`, the four Example-2 vectors restricted to the coordinates
/// `(A,a)`, `(A,a)`, `(A-a,a)`, `(A+b₁,a)` of the four blocks form a nonsingular 4×4 minor.
fn check_example2_minors(d: usize, p: StepParams, vectors: &[WitnessVector]) -> std::result::Result<(), String> {
    let dm = d as i64;
    let md = |x: i64| x.rem_euclid(dm) as usize;
    for base in 0..d {
        let a0 = base as i64;
        let cols = [
            md(a0) * d + md(p.a),
            d * d + md(a0) * d + md(p.a),
            2 * d * d + md(a0 - p.a) * d + md(p.a),
            3 * d * d + md(a0 + p.b1) * d + md(p.a),
        ];
        let rows: Vec<&WitnessVector> = vectors.iter().filter(|w| w.base == base).collect();
        let mut m = RationalMatrix::zeros(4, 4);
        for (i, w) in rows.iter().enumerate() {
            for (j, c) in cols.iter().enumerate() {
                if w.support.contains(c) {
                    m[(i, j)] = Rational::one();
                }
            }
        }
        let det = determinant(&m).map_err(|e| e.to_string())?;
        if det.is_zero() {
            return Err(format!("example-2 minor at A = {base} is singular"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{rank_of_vectors, RationalVector};
    use crate::scenario::generator;

    fn lam(a1: usize, a2: usize, b1: usize, b2: usize) -> DeterministicStrategy {
        DeterministicStrategy::new(a1, a2, b1, b2)
    }

    /// Brute-force window shift: search the multiples of d directly.
    fn oracle_rstu(l: DeterministicStrategy, d: usize) -> [i64; 4] {
        let dm = d as i64;
        let raw = [
            l.a1 as i64 - l.b1 as i64,
            -(l.a1 as i64) + l.b2 as i64,
            -(l.a2 as i64) + l.b1 as i64 - 1,
            l.a2 as i64 - l.b2 as i64,
        ];
        raw.map(|x| {
            let hits: Vec<i64> = (-3..=3)
                .map(|m| x + m * dm)
                .filter(|y| -(dm / 2) <= *y && *y <= (dm - 1) / 2)
                .collect();
            assert_eq!(hits.len(), 1);
            hits[0]
        })
    }

    #[test]
    fn rstu_examples() {
        assert_eq!(rstu(lam(0, 0, 0, 0), 3).unwrap().values(), [0, 0, -1, 0]);
        assert_eq!(rstu(lam(1, 0, 0, 0), 3).unwrap().values(), [1, -1, -1, 0]);
        assert_eq!(rstu(lam(0, 1, 1, 1), 2).unwrap().values(), [-1, -1, -1, 0]);
        for d in 2..=6 {
            for l in Scenario::new(d).unwrap().strategies() {
                let v = rstu(l, d).unwrap();
                assert_eq!(v.values(), oracle_rstu(l, d));
                assert!(v.check(d).is_ok());
                assert!([d as i64 - 1, -1, -(d as i64) - 1].contains(&v.sum()));
            }
        }
    }

    #[test]
    fn f_examples() {
        for d in 2..=9 {
            assert_eq!(f(0, d), Rational::one());
        }
        assert_eq!(f(-1, 2), Rational::from_int(-1));
        assert_eq!(f(-1, 3), Rational::from_int(-1));
        assert_eq!(f(1, 3), Rational::zero());
    }

    #[test]
    fn generator_values() {
        assert_eq!(eval_on_generator(lam(0, 0, 0, 0), 3).unwrap(), Rational::from_int(2));
        assert_eq!(eval_on_generator(lam(1, 0, 0, 0), 3).unwrap(), Rational::from_int(-1));
        let ineq = cglmp_inequality(3).unwrap();
        let g = generator(Scenario::new(3).unwrap(), lam(0, 0, 0, 0)).unwrap();
        assert_eq!(eval(&ineq, &g).unwrap(), Rational::from_int(2));
    }

    #[test]
    fn dense_and_sparse_evaluation_agree() {
        for d in 2..=4 {
            let s = Scenario::new(d).unwrap();
            let ineq = cglmp_inequality(d).unwrap();
            for l in s.strategies() {
                let g = generator(s, l).unwrap();
                assert_eq!(eval(&ineq, &g).unwrap(), ineq.eval_strategy(l).unwrap());
                assert_eq!(eval(&ineq, &g).unwrap(), eval_on_generator(l, d).unwrap());
            }
        }
    }

    #[test]
    fn uniform_behavior_gives_zero() {
        for d in 2..=7 {
            let ineq = cglmp_inequality(d).unwrap();
            assert!(eval(&ineq, &Behavior::uniform(d)).unwrap().is_zero());
            assert!(eval(&ineq, &Behavior::zero(d)).unwrap().is_zero());
        }
    }

    #[test]
    fn d2_values_are_plus_minus_two() {
        let r = verify_condition1(2).unwrap();
        let keys: Vec<Rational> = r.histogram.keys().cloned().collect();
        assert_eq!(keys, vec![Rational::from_int(-2), Rational::from_int(2)]);
        assert_eq!(r.histogram[&Rational::from_int(2)], 8);
    }

    #[test]
    fn d3_value_set() {
        let r = verify_condition1(3).unwrap();
        assert_eq!(r.max, Rational::from_int(2));
        let allowed = allowed_values(3);
        assert!(r.histogram.keys().all(|k| allowed.contains(k)));
        assert_eq!(r.histogram.values().sum::<usize>(), 81);
    }

    #[test]
    fn case_examples() {
        let c = |v: [i64; 4], d| classify_case(Rstu::new(v, d).unwrap(), d).unwrap();
        assert_eq!(c([0, 0, -1, 0], 3), CaseClass::Case2b);
        assert_eq!(c([1, -1, -1, 0], 3), CaseClass::Case3);
        assert_eq!(c([1, 1, 1, 1], 5), CaseClass::Case1);
        assert_eq!(CaseClass::Case2b.value(3), Rational::from_int(2));
        assert_eq!(CaseClass::Case3.value(3), Rational::from_int(-1));
        assert_eq!(CaseClass::Case1.value(5), Rational::from_int(2));
        assert!(Rstu::new([3, 0, 0, 0], 5).is_err());
        assert!(Rstu::new([1, 0, 0, 0], 5).is_err());
    }

    #[test]
    fn class_values_cover_the_allowed_set() {
        for d in 2..=8 {
            let allowed = allowed_values(d);
            use CaseClass::*;
            for c in [Case1, Case2a, Case2b, Case3, Case4a, Case4b, Case5] {
                assert!(allowed.contains(&c.value(d)), "{c:?} at d = {d}");
                assert_eq!(c.value(d) == Rational::from_int(2), c.saturates());
            }
        }
    }

    #[test]
    fn saturating_sets() {
        assert_eq!(saturating_generators(2).unwrap().len(), 8);
        let ineq = cglmp_inequality(3).unwrap();
        for l in saturating_generators(3).unwrap() {
            assert_eq!(ineq.eval_strategy(l).unwrap(), Rational::from_int(2));
            assert!(classify_case(rstu(l, 3).unwrap(), 3).unwrap().saturates());
        }
    }

    #[test]
    fn tightness_small() {
        assert_eq!(tightness_rank(2).unwrap().rank, 8);
        let r = tightness_rank(3).unwrap();
        assert_eq!((r.rank, r.h, r.tight), (24, 24, true));
    }

    #[test]
    fn frame_permutation_is_a_bijection() {
        for d in 2..=5 {
            let n = 4 * d * d;
            let mut seen = vec![false; n];
            for i in 0..n {
                let j = witness_frame_index(d, i);
                assert!(!seen[j]);
                seen[j] = true;
                assert_eq!(behavior_frame_index(d, j), i);
            }
        }
    }

    #[test]
    fn witness_vectors_are_permuted_generators() {
        for d in 2..=6 {
            for batch in constructive_witness(d).unwrap() {
                for w in &batch.vectors {
                    let mut mapped: Vec<usize> =
                        w.strategy.support(d).iter().map(|&i| witness_frame_index(d, i)).collect();
                    mapped.sort();
                    let mut support = w.support.to_vec();
                    support.sort();
                    assert_eq!(mapped, support);
                }
            }
        }
    }

    #[test]
    fn witness_step_tables() {
        let p = |s: &(WitnessScheme, StepParams)| (s.1.a, s.1.b1, s.1.b2, s.1.b3);
        let d4: Vec<_> = witness_steps(4).unwrap().iter().map(p).collect();
        assert_eq!(d4, vec![(0, 1, 1, Some(1)), (-1, 0, 0, Some(0)), (-2, 1, 0, Some(0))]);
        let d5 = witness_steps(5).unwrap();
        assert_eq!(d5[0].0, WitnessScheme::Example2);
        assert_eq!(d5[1].0, WitnessScheme::Example2);
        let d3 = witness_steps(3).unwrap();
        assert_eq!(d3.len(), 2);
        assert_eq!(d3[0].0, WitnessScheme::Example2Variant);
        for d in 2..=12 {
            assert_eq!(witness_steps(d).unwrap().len(), d - 1);
        }
    }

    #[test]
    fn witness_rank_grows_by_4d() {
        for d in 2..=7 {
            let batches = constructive_witness(d).unwrap();
            assert_eq!(batches.len(), d - 1);
            for (j, b) in batches.iter().enumerate() {
                assert_eq!(b.vectors.len(), 4 * d);
                assert_eq!(b.rank_after, 4 * d * (j + 1));
            }
        }
    }

    #[test]
    fn witness_rank_agrees_in_behavior_frame() {
        let d = 3;
        let vs: Vec<RationalVector> = constructive_witness(d)
            .unwrap()
            .iter()
            .flat_map(|b| b.vectors.iter())
            .map(|w| generator(Scenario::new(d).unwrap(), w.strategy).unwrap().into_coords())
            .collect();
        assert_eq!(rank_of_vectors(4 * d * d, &vs), 24);
    }
}
