//! Generalized correlators `P(A_a - B_b ≐ n) = Σ_j P(A_a = n + j mod d, B_b = j)`.
//!
//! A correlator vector has `4d` coordinates with flat index `(2a + b)·d + n`
//! (0-based settings). For `d = 2` the outcomes `0, 1` are read as `+1, -1`, so
//! `⟨A_a B_b⟩ = P(A_a - B_b ≐ 0) - P(A_a - B_b ≐ 1)`.

use std::collections::BTreeSet;

use crate::cglmp;
use crate::error::{Error, Result};
use crate::linalg::{affine_dim, RationalMatrix, RationalVector};
use crate::rational::Rational;
use crate::scenario::{behavior_index, Behavior, DeterministicStrategy, Inequality, Scenario, Space};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CorrVector {
    d: usize,
    coords: RationalVector,
}

pub fn corr_index(d: usize, a: usize, b: usize, n: usize) -> usize {
    debug_assert!(a < 2 && b < 2 && n < d);
    (2 * a + b) * d + n
}

impl CorrVector {
    pub fn new(d: usize, coords: RationalVector) -> Result<Self> {
        Scenario::new(d)?;
        if coords.len() != 4 * d {
            return Err(Error::DimensionMismatch(format!(
                "correlator vector for d = {d} needs {} coordinates, got {}",
                4 * d,
                coords.len()
            )));
        }
        Ok(CorrVector { d, coords })
    }

    pub fn uniform(d: usize) -> Self {
        CorrVector { d, coords: vec![Rational::new(1, d as i64); 4 * d] }
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

    pub fn get(&self, a: usize, b: usize, n: usize) -> &Rational {
        &self.coords[corr_index(self.d, a, b, n)]
    }

    /// Each setting block sums to one and every entry is nonnegative.
    pub fn is_probability(&self) -> bool {
        let d = self.d;
        self.coords.iter().all(|x| !x.is_negative())
            && (0..4).all(|blk| self.coords[blk * d..(blk + 1) * d].iter().sum::<Rational>() == Rational::one())
    }
}

pub fn project(p: &Behavior) -> CorrVector {
    let d = p.d();
    let mut coords = vec![Rational::zero(); 4 * d];
    for a in 0..2 {
        for b in 0..2 {
            for n in 0..d {
                let c = &mut coords[corr_index(d, a, b, n)];
                for j in 0..d {
                    *c += p.get(a, b, (n + j) % d, j);
                }
            }
        }
    }
    CorrVector { d, coords }
}

/// Image of a generator: one unit per block at `n = A_a - B_b mod d`.
pub fn project_strategy(d: usize, lambda: DeterministicStrategy) -> CorrVector {
    let mut coords = vec![Rational::zero(); 4 * d];
    for a in 0..2 {
        for b in 0..2 {
            let n = (lambda.alice(a) + d - lambda.bob(b)) % d;
            coords[corr_index(d, a, b, n)] = Rational::one();
        }
    }
    CorrVector { d, coords }
}

/// The `d³` distinct projected generators in lexicographic order.
pub fn projected_generators(d: usize) -> Result<Vec<CorrVector>> {
    let s = Scenario::new(d)?;
    let set: BTreeSet<CorrVector> = s.strategies().map(|l| project_strategy(d, l)).collect();
    Ok(set.into_iter().collect())
}

pub fn corr_affine_dim(d: usize) -> Result<usize> {
    let pts: Vec<RationalVector> = projected_generators(d)?.into_iter().map(CorrVector::into_coords).collect();
    affine_dim(&pts)
}

/// Block normalization `Σ_n P(A_a - B_b ≐ n) = 1`.
pub fn normalization_rows(d: usize) -> (RationalMatrix, RationalVector) {
    let mut m = RationalMatrix::zeros(4, 4 * d);
    for blk in 0..4 {
        for n in 0..d {
            m[(blk, blk * d + n)] = Rational::one();
        }
    }
    (m, vec![Rational::one(); 4])
}

/// `(⟨A₁B₁⟩, ⟨A₁B₂⟩, ⟨A₂B₁⟩, ⟨A₂B₂⟩)` with outcome `0 ↦ +1`, `1 ↦ -1`.
pub fn chsh_correlators(p: &Behavior) -> Result<[Rational; 4]> {
    if p.d() != 2 {
        return Err(Error::Precondition(format!("two-outcome correlators need d = 2, got {}", p.d())));
    }
    let mut out: [Rational; 4] = Default::default();
    for a in 0..2 {
        for b in 0..2 {
            out[2 * a + b] = p.get(a, b, 0, 0) + p.get(a, b, 1, 1) - p.get(a, b, 0, 1) - p.get(a, b, 1, 0);
        }
    }
    Ok(out)
}

/// `⟨A₁B₁⟩ + ⟨A₁B₂⟩ + ⟨A₂B₁⟩ - ⟨A₂B₂⟩ <= 2` written over the `d = 2` correlator coordinates.
pub fn chsh_inequality() -> Inequality {
    let signs = [1, 1, 1, -1];
    let mut coeffs = vec![Rational::zero(); 8];
    for (blk, s) in signs.iter().enumerate() {
        coeffs[blk * 2] = Rational::from_int(*s);
        coeffs[blk * 2 + 1] = Rational::from_int(-s);
    }
    Inequality { space: Space::Correlator(2), coeffs, bound: Rational::from_int(2) }
}

/// The CGLMP functional over correlator coordinates, bound 2.
pub fn cglmp_corr_inequality(d: usize) -> Result<Inequality> {
    Scenario::new(d)?;
    let mut coeffs = vec![Rational::zero(); 4 * d];
    for term in cglmp::terms(d) {
        coeffs[corr_index(d, term.a, term.b, term.n)] += &term.coeff;
    }
    Ok(Inequality { space: Space::Correlator(d), coeffs, bound: Rational::from_int(2) })
}

/// Pull a correlator inequality back through the projection.
pub fn lift(ineq: &Inequality) -> Result<Inequality> {
    let Space::Correlator(d) = ineq.space else {
        return Err(Error::SpaceMismatch { expected: "correlator".into(), actual: ineq.space.to_string() });
    };
    if ineq.coeffs.len() != 4 * d {
        return Err(Error::DimensionMismatch("correlator coefficient count".into()));
    }
    let mut coeffs = vec![Rational::zero(); 4 * d * d];
    for a in 0..2 {
        for b in 0..2 {
            for k in 0..d {
                for s in 0..d {
                    coeffs[behavior_index(d, a, b, k, s)] = ineq.coeffs[corr_index(d, a, b, (k + d - s) % d)].clone();
                }
            }
        }
    }
    Ok(Inequality { space: Space::Behavior(d), coeffs, bound: ineq.bound.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{all_generators, generator};

    #[test]
    fn uniform_projects_to_uniform() {
        for d in 2..=5 {
            assert_eq!(project(&Behavior::uniform(d)), CorrVector::uniform(d));
        }
    }

    #[test]
    fn zero_strategy_projects_to_n_zero() {
        let s = Scenario::new(3).unwrap();
        let c = project(&generator(s, DeterministicStrategy::new(0, 0, 0, 0)).unwrap());
        for a in 0..2 {
            for b in 0..2 {
                assert_eq!(c.get(a, b, 0), &Rational::one());
                assert!(c.get(a, b, 1).is_zero() && c.get(a, b, 2).is_zero());
            }
        }
    }

    #[test]
    fn projected_generator_counts() {
        for d in 2..=4 {
            let gens = projected_generators(d).unwrap();
            assert_eq!(gens.len(), d * d * d);
            for g in &gens {
                assert!(g.is_probability());
                assert!(g.coords().iter().all(|x| x.is_zero() || *x == Rational::one()));
            }
        }
    }

    #[test]
    fn strategy_projection_matches_linear_projection() {
        let s = Scenario::new(3).unwrap();
        for l in s.strategies() {
            assert_eq!(project(&generator(s, l).unwrap()), project_strategy(3, l));
        }
    }

    #[test]
    fn corr_dims() {
        assert_eq!(corr_affine_dim(2).unwrap(), 4);
        assert_eq!(corr_affine_dim(3).unwrap(), 8);
        assert_eq!(corr_affine_dim(4).unwrap(), 12);
    }

    #[test]
    fn chsh_correlator_examples() {
        assert_eq!(chsh_correlators(&Behavior::uniform(2)).unwrap(), <[Rational; 4]>::default());
        let g = generator(Scenario::new(2).unwrap(), DeterministicStrategy::new(0, 0, 0, 0)).unwrap();
        let e = chsh_correlators(&g).unwrap();
        assert!(e.iter().all(|x| *x == Rational::one()));
        assert_eq!(&e[0] + &e[1] + &e[2] - &e[3], Rational::from_int(2));
        assert!(chsh_correlators(&Behavior::uniform(3)).is_err());
    }

    #[test]
    fn chsh_correlators_are_correlator_differences() {
        for g in all_generators(Scenario::new(2).unwrap()) {
            let e = chsh_correlators(&g).unwrap();
            let c = project(&g);
            for blk in 0..4 {
                assert_eq!(e[blk], &c.coords()[2 * blk] - &c.coords()[2 * blk + 1]);
            }
        }
    }

    #[test]
    fn lift_commutes_with_projection() {
        let ineq = cglmp_corr_inequality(3).unwrap();
        let lifted = lift(&ineq).unwrap();
        assert_eq!(lifted.bound, ineq.bound);
        for g in all_generators(Scenario::new(3).unwrap()) {
            assert_eq!(lifted.eval_behavior(&g).unwrap(), ineq.value(project(&g).coords()).unwrap());
        }
        let zero = lift(&Inequality::zero(Space::Correlator(3))).unwrap();
        assert!(zero.is_zero() && zero.bound.is_zero());
        assert!(lift(&lifted).is_err());
    }

    #[test]
    fn cglmp_corr_vanishes_on_uniform() {
        for d in 2..=8 {
            let i = cglmp_corr_inequality(d).unwrap();
            assert!(i.value(CorrVector::uniform(d).coords()).unwrap().is_zero());
        }
    }
}
