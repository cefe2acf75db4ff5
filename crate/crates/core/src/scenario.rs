//! The two-party, two-setting, `d`-outcome scenario.
//!
//! A behavior is the table of joint probabilities `P(A_a = k, B_b = s)` flattened
//! to a vector of length `4d²`. Settings `a, b` are 0-based here (`0` is the
//! first measurement) and the flat index is `(2a + b)·d² + k·d + s`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::correlators;
use crate::error::{Error, Result};
use crate::linalg::{dot, EchelonBasis, RationalMatrix, RationalVector};
use crate::rational::Rational;

/// The outcome count `d >= 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Scenario {
    d: usize,
}

impl Scenario {
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidOutcomeCount(d));
        }
        Ok(Scenario { d })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn behavior_len(&self) -> usize {
        4 * self.d * self.d
    }

    pub fn index(&self, a: usize, b: usize, k: usize, s: usize) -> usize {
        behavior_index(self.d, a, b, k, s)
    }

    /// Affine dimension of the local polytope, `4d(d-1)`.
    pub fn expected_affine_dim(&self) -> usize {
        4 * self.d * (self.d - 1)
    }

    pub fn strategies(&self) -> impl Iterator<Item = DeterministicStrategy> {
        let d = self.d;
        (0..d * d * d * d).map(move |i| DeterministicStrategy {
            a1: i / (d * d * d),
            a2: (i / (d * d)) % d,
            b1: (i / d) % d,
            b2: i % d,
        })
    }

    pub fn num_strategies(&self) -> usize {
        self.d.pow(4)
    }
}

pub fn behavior_index(d: usize, a: usize, b: usize, k: usize, s: usize) -> usize {
    debug_assert!(a < 2 && b < 2 && k < d && s < d);
    (2 * a + b) * d * d + k * d + s
}

/// One preassigned outcome per observable: `(A₁, A₂, B₁, B₂)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DeterministicStrategy {
    pub a1: usize,
    pub a2: usize,
    pub b1: usize,
    pub b2: usize,
}

impl DeterministicStrategy {
    pub fn new(a1: usize, a2: usize, b1: usize, b2: usize) -> Self {
        DeterministicStrategy { a1, a2, b1, b2 }
    }

    /// Outcome of Alice's measurement `a` (0-based).
    pub fn alice(&self, a: usize) -> usize {
        if a == 0 {
            self.a1
        } else {
            self.a2
        }
    }

    pub fn bob(&self, b: usize) -> usize {
        if b == 0 {
            self.b1
        } else {
            self.b2
        }
    }

    pub fn check(&self, d: usize) -> Result<()> {
        for value in [self.a1, self.a2, self.b1, self.b2] {
            if value >= d {
                return Err(Error::StrategyOutOfRange { value, d });
            }
        }
        Ok(())
    }

    /// Flat indices of the four unit coordinates of the generator.
    pub fn support(&self, d: usize) -> [usize; 4] {
        let mut out = [0; 4];
        for a in 0..2 {
            for b in 0..2 {
                out[2 * a + b] = behavior_index(d, a, b, self.alice(a), self.bob(b));
            }
        }
        out
    }
}

impl fmt::Display for DeterministicStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.a1, self.a2, self.b1, self.b2)
    }
}

impl std::str::FromStr for DeterministicStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<usize> = s
            .trim_matches(|c| c == '(' || c == ')')
            .split(',')
            .map(|p| p.trim().parse().map_err(|_| Error::Parse(format!("bad strategy {s:?}"))))
            .collect::<Result<_>>()?;
        match parts[..] {
            [a1, a2, b1, b2] => Ok(DeterministicStrategy { a1, a2, b1, b2 }),
            _ => Err(Error::Parse(format!("strategy needs four outcomes: {s:?}"))),
        }
    }
}

/// Joint probabilities `P(A_a = k, B_b = s)`. Nonnegativity and normalization are
/// predicates, not invariants, so LP iterates and hyperplane normals fit here too.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Behavior {
    d: usize,
    coords: RationalVector,
}

impl Behavior {
    pub fn new(d: usize, coords: RationalVector) -> Result<Self> {
        let s = Scenario::new(d)?;
        if coords.len() != s.behavior_len() {
            return Err(Error::DimensionMismatch(format!(
                "behavior for d = {d} needs {} coordinates, got {}",
                s.behavior_len(),
                coords.len()
            )));
        }
        Ok(Behavior { d, coords })
    }

    pub fn zero(d: usize) -> Self {
        Behavior { d, coords: vec![Rational::zero(); 4 * d * d] }
    }

    pub fn uniform(d: usize) -> Self {
        let w = Rational::new(1, (d * d) as i64);
        Behavior { d, coords: vec![w; 4 * d * d] }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }

    pub fn into_coords(self) -> RationalVector {
        self.coords
    }

    pub fn get(&self, a: usize, b: usize, k: usize, s: usize) -> &Rational {
        &self.coords[behavior_index(self.d, a, b, k, s)]
    }

    pub fn set(&mut self, a: usize, b: usize, k: usize, s: usize, value: Rational) {
        let i = behavior_index(self.d, a, b, k, s);
        self.coords[i] = value;
    }

    pub fn is_normalized(&self) -> bool {
        let d = self.d;
        (0..4).all(|block| {
            let sum: Rational = self.coords[block * d * d..(block + 1) * d * d].iter().sum();
            sum == Rational::one()
        })
    }

    pub fn is_nosignaling(&self) -> bool {
        let (m, rhs) = constraint_matrix(Scenario { d: self.d });
        (4..m.rows()).all(|i| dot(m.row(i), &self.coords) == rhs[i])
    }

    pub fn is_probability(&self) -> bool {
        self.is_normalized() && self.is_nosignaling() && self.coords.iter().all(|x| !x.is_negative())
    }

    /// `Σ w_i p_i` over behaviors of the same `d`.
    pub fn combination(d: usize, terms: &[(Rational, &Behavior)]) -> Result<Self> {
        let mut out = Behavior::zero(d);
        for (w, p) in terms {
            if p.d != d {
                return Err(Error::DimensionMismatch("behaviors with different d".into()));
            }
            for (x, y) in out.coords.iter_mut().zip(&p.coords) {
                x.add_mul(w, y);
            }
        }
        Ok(out)
    }
}

pub fn generator(s: Scenario, lambda: DeterministicStrategy) -> Result<Behavior> {
    lambda.check(s.d)?;
    let mut p = Behavior::zero(s.d);
    for i in lambda.support(s.d) {
        p.coords[i] = Rational::one();
    }
    Ok(p)
}

/// The `d⁴` generators in lexicographic order of `(A₁, A₂, B₁, B₂)`.
pub fn all_generators(s: Scenario) -> Vec<Behavior> {
    s.strategies().map(|l| generator(s, l).expect("strategy in range")).collect()
}

/// Normalization rows (right-hand side 1), then the `4d` no-signaling rows
/// (right-hand side 0): one per observable and outcome, in the order
/// `A₁, A₂, B₁, B₂`.
pub fn constraint_matrix(s: Scenario) -> (RationalMatrix, RationalVector) {
    let d = s.d;
    let n = s.behavior_len();
    let mut m = RationalMatrix::zeros(4 + 4 * d, n);
    let mut rhs = vec![Rational::zero(); 4 + 4 * d];
    let one = Rational::one();
    let minus = -Rational::one();
    for block in 0..4 {
        for j in 0..d * d {
            m[(block, block * d * d + j)] = one.clone();
        }
        rhs[block] = one.clone();
    }
    let mut row = 4;
    // Alice's marginal for A_a = k must not depend on Bob's setting.
    for a in 0..2 {
        for k in 0..d {
            for s_ in 0..d {
                m[(row, behavior_index(d, a, 0, k, s_))] = one.clone();
                m[(row, behavior_index(d, a, 1, k, s_))] = minus.clone();
            }
            row += 1;
        }
    }
    for b in 0..2 {
        for s_ in 0..d {
            for k in 0..d {
                m[(row, behavior_index(d, 0, b, k, s_))] = one.clone();
                m[(row, behavior_index(d, 1, b, k, s_))] = minus.clone();
            }
            row += 1;
        }
    }
    (m, rhs)
}

/// Affine dimension of the convex hull of all generators.
pub fn polytope_affine_dim(s: Scenario) -> usize {
    let mut basis = EchelonBasis::new(s.behavior_len());
    let mut gens = s.strategies();
    let first = generator(s, gens.next().expect("at least one strategy")).unwrap();
    for l in gens {
        let g = generator(s, l).unwrap();
        let diff: RationalVector = g.coords.iter().zip(&first.coords).map(|(x, y)| x - y).collect();
        basis.insert(&diff);
    }
    basis.rank()
}

/// The `(2d-1)²` generators built as tensor products of the independent
/// Alice-side vectors `|0⟩⊕|j⟩` (`j = 0..d-1`) and `|j⟩⊕|d-1⟩` (`j = 1..d-1`)
/// with the same set on Bob's side.
pub fn tensor_independent_generators(s: Scenario) -> Vec<(DeterministicStrategy, Behavior)> {
    let d = s.d;
    let mut pairs: Vec<(usize, usize)> = (0..d).map(|j| (0, j)).collect();
    pairs.extend((1..d).map(|j| (j, d - 1)));
    let mut out = Vec::with_capacity(pairs.len() * pairs.len());
    for &(a1, a2) in &pairs {
        for &(b1, b2) in &pairs {
            let l = DeterministicStrategy { a1, a2, b1, b2 };
            out.push((l, generator(s, l).unwrap()));
        }
    }
    out
}

/// The vector space an inequality lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Space {
    /// Joint probabilities, `4d²` coordinates.
    Behavior(usize),
    /// Generalized correlators `P(A_a - B_b ≐ n)`, `4d` coordinates.
    Correlator(usize),
    /// Plain `R^n` with no affine constraints.
    Euclidean(usize),
}

impl Space {
    pub fn dim(&self) -> usize {
        match *self {
            Space::Behavior(d) => 4 * d * d,
            Space::Correlator(d) => 4 * d,
            Space::Euclidean(n) => n,
        }
    }

    pub fn outcomes(&self) -> Option<usize> {
        match *self {
            Space::Behavior(d) | Space::Correlator(d) => Some(d),
            Space::Euclidean(_) => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Space::Behavior(_) => "behavior",
            Space::Correlator(_) => "correlator",
            Space::Euclidean(_) => "euclidean",
        }
    }

    /// Affine equations satisfied by every normalized no-signaling point of the space.
    pub fn equations(&self) -> (RationalMatrix, RationalVector) {
        match *self {
            Space::Behavior(d) => constraint_matrix(Scenario { d }),
            Space::Correlator(d) => correlators::normalization_rows(d),
            Space::Euclidean(n) => (RationalMatrix::zeros(0, n), vec![]),
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::Euclidean(n) => write!(f, "euclidean({n})"),
            other => write!(f, "{}({})", other.name(), other.outcomes().unwrap()),
        }
    }
}

/// `coeffs · x <= bound`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Inequality {
    pub space: Space,
    pub coeffs: RationalVector,
    pub bound: Rational,
}

impl Inequality {
    pub fn new(space: Space, coeffs: RationalVector, bound: Rational) -> Result<Self> {
        if coeffs.len() != space.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for {space} (dimension {})",
                coeffs.len(),
                space.dim()
            )));
        }
        Ok(Inequality { space, coeffs, bound })
    }

    pub fn zero(space: Space) -> Self {
        Inequality { space, coeffs: vec![Rational::zero(); space.dim()], bound: Rational::zero() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Rational::is_zero)
    }

    /// Left-hand side `coeffs · x`.
    pub fn value(&self, x: &[Rational]) -> Result<Rational> {
        if x.len() != self.coeffs.len() {
            return Err(Error::DimensionMismatch(format!(
                "point of length {} against {} coefficients",
                x.len(),
                self.coeffs.len()
            )));
        }
        Ok(dot(&self.coeffs, x))
    }

    pub fn eval_behavior(&self, p: &Behavior) -> Result<Rational> {
        self.expect_space(Space::Behavior(p.d))?;
        self.value(&p.coords)
    }

    /// Value on a generator, touching only its four unit coordinates.
    pub fn eval_strategy(&self, lambda: DeterministicStrategy) -> Result<Rational> {
        let Space::Behavior(d) = self.space else {
            return Err(Error::SpaceMismatch { expected: "behavior".into(), actual: self.space.to_string() });
        };
        lambda.check(d)?;
        Ok(lambda.support(d).iter().map(|&i| &self.coeffs[i]).sum())
    }

    pub fn expect_space(&self, space: Space) -> Result<()> {
        if self.space != space {
            return Err(Error::SpaceMismatch { expected: space.to_string(), actual: self.space.to_string() });
        }
        Ok(())
    }

    pub fn holds(&self, x: &[Rational]) -> Result<bool> {
        Ok(self.value(x)? <= self.bound)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{affine_dim, rank, rank_of_vectors};

    fn scen(d: usize) -> Scenario {
        Scenario::new(d).unwrap()
    }

    #[test]
    fn rejects_small_d() {
        assert!(matches!(Scenario::new(1), Err(Error::InvalidOutcomeCount(1))));
    }

    #[test]
    fn generator_examples() {
        let g = generator(scen(2), DeterministicStrategy::new(0, 0, 0, 0)).unwrap();
        let ones: Vec<usize> = (0..16).filter(|&i| !g.coords()[i].is_zero()).collect();
        assert_eq!(ones, vec![0, 4, 8, 12]);

        let g = generator(scen(3), DeterministicStrategy::new(1, 0, 2, 0)).unwrap();
        let mut expect = vec![
            behavior_index(3, 0, 0, 1, 2),
            behavior_index(3, 0, 1, 1, 0),
            behavior_index(3, 1, 0, 0, 2),
            behavior_index(3, 1, 1, 0, 0),
        ];
        expect.sort();
        let ones: Vec<usize> = (0..36).filter(|&i| !g.coords()[i].is_zero()).collect();
        assert_eq!(ones, expect);
        assert_eq!(g.coords().iter().filter(|x| !x.is_zero()).count(), 4);
    }

    #[test]
    fn out_of_range_strategy() {
        assert!(matches!(
            generator(scen(2), DeterministicStrategy::new(0, 2, 0, 0)),
            Err(Error::StrategyOutOfRange { value: 2, d: 2 })
        ));
    }

    #[test]
    fn generators_are_distinct_and_valid() {
        for d in 2..=3 {
            let gens = all_generators(scen(d));
            assert_eq!(gens.len(), d.pow(4));
            let set: std::collections::HashSet<_> = gens.iter().collect();
            assert_eq!(set.len(), gens.len());
            assert!(gens.iter().all(|g| g.is_normalized() && g.is_nosignaling() && g.is_probability()));
        }
    }

    #[test]
    fn constraint_system_shape_and_rank() {
        for (d, rows, cols) in [(2, 12, 16), (3, 16, 36)] {
            let (m, rhs) = constraint_matrix(scen(d));
            assert_eq!((m.rows(), m.cols(), rhs.len()), (rows, cols, rows));
            assert_eq!(rank(&m), 4 * d);
            let u = Behavior::uniform(d);
            assert_eq!(m.mul_vec(u.coords()).unwrap(), rhs);
        }
    }

    #[test]
    fn constraint_rows_annihilate_generator_differences() {
        let s = scen(3);
        let (m, rhs) = constraint_matrix(s);
        let gens = all_generators(s);
        for g in gens.iter().step_by(7) {
            assert_eq!(m.mul_vec(g.coords()).unwrap(), rhs);
        }
    }

    #[test]
    fn predicates() {
        let u = Behavior::uniform(3);
        assert!(u.is_normalized() && u.is_nosignaling() && u.is_probability());
        // Shift Alice's A₁ marginal in the (A₁,B₂) block only.
        let mut p = u.clone();
        let q = Rational::new(1, 9);
        p.set(0, 1, 0, 0, &q + &q);
        p.set(0, 1, 1, 0, Rational::zero());
        assert!(p.is_normalized());
        assert!(!p.is_nosignaling());
        let mut neg = Behavior::uniform(2);
        for a in 0..2 {
            for b in 0..2 {
                neg.set(a, b, 0, 0, Rational::new(1, 2));
                neg.set(a, b, 1, 1, Rational::new(1, 2));
                neg.set(a, b, 0, 1, Rational::new(-1, 4));
                neg.set(a, b, 1, 0, Rational::new(1, 4));
            }
        }
        assert!(neg.is_normalized());
        assert!(!neg.is_probability());
    }

    #[test]
    fn affine_dimension_small() {
        assert_eq!(polytope_affine_dim(scen(2)), 8);
        assert_eq!(polytope_affine_dim(scen(3)), 24);
        let pts: Vec<RationalVector> = all_generators(scen(2)).into_iter().map(Behavior::into_coords).collect();
        assert_eq!(affine_dim(&pts).unwrap(), 8);
    }

    #[test]
    fn tensor_construction_is_independent() {
        for d in 2..=4 {
            let s = scen(d);
            let vs: Vec<RationalVector> =
                tensor_independent_generators(s).into_iter().map(|(_, g)| g.into_coords()).collect();
            assert_eq!(vs.len(), (2 * d - 1).pow(2));
            assert_eq!(rank_of_vectors(s.behavior_len(), &vs), (2 * d - 1).pow(2));
        }
    }

    #[test]
    fn strategy_text_round_trip() {
        let l = DeterministicStrategy::new(1, 0, 2, 3);
        assert_eq!(l.to_string().parse::<DeterministicStrategy>().unwrap(), l);
        assert!("1,2".parse::<DeterministicStrategy>().is_err());
    }
}
