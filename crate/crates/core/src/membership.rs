//! Locality decisions: a convex decomposition over deterministic strategies, or
//! a Bell inequality separating the point from the local polytope.

use std::collections::BTreeMap;

use crate::correlators::{self, project_strategy, CorrVector};
use crate::error::{Error, Result};
use crate::facets::canonicalize;
use crate::linalg::{dot, RationalMatrix, RationalVector};
use crate::lp::{self, LinearProgram, LpStatus};
use crate::rational::Rational;
use crate::scenario::{constraint_matrix, generator, Behavior, DeterministicStrategy, Inequality, Scenario, Space};
use crate::symmetry;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Local {
        weights: BTreeMap<DeterministicStrategy, Rational>,
    },
    Nonlocal {
        certificate: Inequality,
        /// Value of the certificate's left-hand side at the queried point.
        value: Rational,
        /// `value - bound`, strictly positive.
        violation: Rational,
        /// Known class of the certificate, or a note that it is not in the catalog.
        class: String,
    },
}

impl Verdict {
    pub fn is_local(&self) -> bool {
        matches!(self, Verdict::Local { .. })
    }
}

/// Local polytope of a space: each vertex with a strategy realizing it.
fn vertices(space: Space) -> Result<Vec<(DeterministicStrategy, RationalVector)>> {
    match space {
        Space::Behavior(d) => {
            let s = Scenario::new(d)?;
            s.strategies().map(|l| Ok((l, generator(s, l)?.into_coords()))).collect()
        }
        Space::Correlator(d) => {
            let mut seen: BTreeMap<RationalVector, DeterministicStrategy> = BTreeMap::new();
            for l in Scenario::new(d)?.strategies() {
                seen.entry(project_strategy(d, l).into_coords()).or_insert(l);
            }
            Ok(seen.into_iter().map(|(v, l)| (l, v)).collect())
        }
        Space::Euclidean(_) => Err(Error::SpaceMismatch { expected: "behavior or correlator".into(), actual: space.to_string() }),
    }
}

pub fn local_decompose(p: &Behavior) -> Result<Verdict> {
    if !p.is_probability() {
        return Err(Error::Precondition("behavior is not a normalized nonnegative probability table".into()));
    }
    if !p.is_nosignaling() {
        return Err(Error::Precondition("behavior violates no-signaling".into()));
    }
    decompose(Space::Behavior(p.d()), p.coords())
}

pub fn corr_local_decompose(c: &CorrVector) -> Result<Verdict> {
    if !c.is_probability() {
        return Err(Error::Precondition("correlator blocks must be nonnegative and sum to one".into()));
    }
    decompose(Space::Correlator(c.d()), c.coords())
}

/// The feasibility system `Σ_λ p_λ G_λ = target`, `Σ_λ p_λ = 1`, `p >= 0`.
fn convex_hull_program(points: &[(DeterministicStrategy, RationalVector)], target: &[Rational]) -> Result<LinearProgram> {
    let n = points.len();
    let dim = target.len();
    let mut rows: Vec<RationalVector> = (0..dim).map(|i| points.iter().map(|(_, g)| g[i].clone()).collect()).collect();
    rows.push(vec![Rational::one(); n]);
    let mut rhs = target.to_vec();
    rhs.push(Rational::one());
    Ok(LinearProgram {
        objective: vec![Rational::zero(); n],
        eq_rows: RationalMatrix::from_rows(n, &rows)?,
        eq_rhs: rhs,
        ineq_rows: RationalMatrix::zeros(0, n),
        ineq_rhs: vec![],
        nonneg: vec![true; n],
    })
}

fn decompose(space: Space, target: &[Rational]) -> Result<Verdict> {
    let points = vertices(space)?;
    let program = convex_hull_program(&points, target)?;
    let result = lp::solve(&program)?;
    match result.status {
        LpStatus::Optimal => {
            let x = result.primal.expect("optimal has a primal");
            let weights: BTreeMap<DeterministicStrategy, Rational> = points
                .iter()
                .zip(x)
                .filter(|(_, w)| !w.is_zero())
                .map(|((l, _), w)| (*l, w))
                .collect();
            verify_weights(&points, &weights, target)?;
            Ok(Verdict::Local { weights })
        }
        LpStatus::Infeasible => {
            let y = result.certificate.expect("infeasible has a certificate");
            if !program.verify_farkas(&y) {
                return Err(Error::Lp("Farkas certificate failed exact verification".into()));
            }
            let certificate = deepest_separator(space, &points, target, &program)?;
            let value = certificate.value(target)?;
            let violation = &value - &certificate.bound;
            if !violation.is_positive() {
                return Err(Error::Verification("certificate is not violated by the queried point".into()));
            }
            let class = catalog_label(&certificate)?;
            Ok(Verdict::Nonlocal { certificate, value, violation, class })
        }
        LpStatus::Unbounded => Err(Error::Lp("feasibility program reported unbounded".into())),
    }
}

fn verify_weights(
    points: &[(DeterministicStrategy, RationalVector)],
    weights: &BTreeMap<DeterministicStrategy, Rational>,
    target: &[Rational],
) -> Result<()> {
    let by_strategy: BTreeMap<DeterministicStrategy, &RationalVector> = points.iter().map(|(l, g)| (*l, g)).collect();
    let mut sum = vec![Rational::zero(); target.len()];
    let mut total = Rational::zero();
    for (l, w) in weights {
        if w.is_negative() {
            return Err(Error::Verification(format!("negative weight on ({l})")));
        }
        total += w;
        for (s, g) in sum.iter_mut().zip(by_strategy[l].iter()) {
            s.add_mul(w, g);
        }
    }
    if total != Rational::one() || sum != target {
        return Err(Error::Verification("decomposition does not reproduce the point".into()));
    }
    Ok(())
}

/// Among all Farkas certificates of the hull program, the separating functional
/// `X·P <= x` maximizing `X·p - x` with the slack at the vertex barycenter fixed
/// to 1. The result is the supporting hyperplane where the segment from the
/// barycenter to `p` leaves the polytope, normalized so its bound equals the
/// local maximum and then canonicalized.
fn deepest_separator(
    space: Space,
    points: &[(DeterministicStrategy, RationalVector)],
    target: &[Rational],
    hull: &LinearProgram,
) -> Result<Inequality> {
    let dim = target.len();
    let n = dim + 1;
    let count = Rational::from_int(points.len() as i64);
    let mut center = vec![Rational::zero(); dim];
    for (_, g) in points {
        for (c, x) in center.iter_mut().zip(g) {
            *c += x;
        }
    }
    for c in center.iter_mut() {
        *c = &*c / &count;
    }
    let mut objective = target.to_vec();
    objective.push(Rational::from_int(-1));
    let ineq_rows: Vec<RationalVector> = points
        .iter()
        .map(|(_, g)| {
            let mut row = g.clone();
            row.push(Rational::from_int(-1));
            row
        })
        .collect();
    let mut norm: RationalVector = center.iter().map(|c| -c).collect();
    norm.push(Rational::one());
    let program = LinearProgram {
        objective,
        eq_rows: RationalMatrix::from_rows(n, &[norm])?,
        eq_rhs: vec![Rational::one()],
        ineq_rows: RationalMatrix::from_rows(n, &ineq_rows)?,
        ineq_rhs: vec![Rational::zero(); points.len()],
        nonneg: vec![false; n],
    };
    let result = lp::solve(&program)?;
    if result.status != LpStatus::Optimal {
        return Err(Error::Lp(format!("separation program ended {:?}", result.status)));
    }
    let sol = result.primal.expect("optimal has a primal");
    let coeffs = sol[..dim].to_vec();
    // As a Farkas vector of the hull program: y = (-X, x).
    let mut y: RationalVector = coeffs.iter().map(|c| -c).collect();
    y.push(sol[dim].clone());
    if !hull.verify_farkas(&y) {
        return Err(Error::Verification("separating functional is not a Farkas certificate".into()));
    }
    let raw = Inequality { space, coeffs, bound: Rational::zero() };
    let bound = local_max(&raw)?;
    canonicalize(&Inequality { bound, ..raw })
}

/// Catalog lookup for certificates: the CGLMP class (CHSH at `d = 2`) when the
/// symmetry group is small enough to decide it.
fn catalog_label(cert: &Inequality) -> Result<String> {
    let d = cert.space.outcomes().expect("certificates live in probability spaces");
    let reference = match cert.space {
        Space::Behavior(_) => crate::cglmp::cglmp_inequality(d)?,
        _ => correlators::cglmp_corr_inequality(d)?,
    };
    match symmetry::equivalent(cert, &reference) {
        Ok(true) => Ok(if d == 2 { "chsh".into() } else { "cglmp".into() }),
        Ok(false) => Ok("valid inequality, not in catalog".into()),
        Err(Error::GroupTooLarge(_)) => Ok("valid inequality, not classified".into()),
        Err(e) => Err(e),
    }
}

/// Maximum of the left-hand side over the local polytope's vertices.
pub fn local_max(ineq: &Inequality) -> Result<Rational> {
    match ineq.space {
        Space::Behavior(d) => {
            let s = Scenario::new(d)?;
            let mut best: Option<Rational> = None;
            for l in s.strategies() {
                let v = ineq.eval_strategy(l)?;
                if best.as_ref().map_or(true, |b| v > *b) {
                    best = Some(v);
                }
            }
            Ok(best.expect("at least one strategy"))
        }
        Space::Correlator(_) => vertices(ineq.space)?
            .iter()
            .map(|(_, g)| dot(&ineq.coeffs, g))
            .max()
            .ok_or(Error::EmptyInput("no vertices")),
        Space::Euclidean(_) => {
            Err(Error::SpaceMismatch { expected: "behavior or correlator".into(), actual: ineq.space.to_string() })
        }
    }
}

/// Maximum of the left-hand side over normalized nonnegative no-signaling
/// behaviors; correlator inequalities are lifted first.
pub fn nosignaling_max(ineq: &Inequality) -> Result<Rational> {
    let lifted;
    let ineq = match ineq.space {
        Space::Correlator(_) => {
            lifted = correlators::lift(ineq)?;
            &lifted
        }
        Space::Behavior(_) => ineq,
        Space::Euclidean(_) => {
            return Err(Error::SpaceMismatch { expected: "behavior or correlator".into(), actual: ineq.space.to_string() })
        }
    };
    let Space::Behavior(d) = ineq.space else { unreachable!() };
    let (eq_rows, eq_rhs) = constraint_matrix(Scenario::new(d)?);
    let n = ineq.coeffs.len();
    let result = lp::lp_max(&ineq.coeffs, &eq_rows, &eq_rhs, &RationalMatrix::zeros(0, n), &[], &vec![true; n])?;
    match result.status {
        LpStatus::Optimal => Ok(result.optimum.expect("optimal has a value")),
        other => Err(Error::Lp(format!("no-signaling program ended {other:?}"))),
    }
}

/// The no-signaling behavior attaining [`nosignaling_max`].
pub fn nosignaling_maximizer(ineq: &Inequality) -> Result<Behavior> {
    let lifted = match ineq.space {
        Space::Correlator(_) => correlators::lift(ineq)?,
        _ => ineq.clone(),
    };
    let Space::Behavior(d) = lifted.space else {
        return Err(Error::SpaceMismatch { expected: "behavior or correlator".into(), actual: lifted.space.to_string() });
    };
    let (eq_rows, eq_rhs) = constraint_matrix(Scenario::new(d)?);
    let n = lifted.coeffs.len();
    let result = lp::lp_max(&lifted.coeffs, &eq_rows, &eq_rhs, &RationalMatrix::zeros(0, n), &[], &vec![true; n])?;
    Behavior::new(d, result.primal.ok_or_else(|| Error::Lp("no maximizer".into()))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cglmp::cglmp_inequality;
    use crate::correlators::{cglmp_corr_inequality, chsh_inequality, project};
    use crate::scenario::all_generators;

    pub(crate) fn pr_box() -> Behavior {
        let mut p = Behavior::zero(2);
        let half = Rational::new(1, 2);
        for a in 0..2 {
            for b in 0..2 {
                let n = usize::from(a == 1 && b == 1);
                for j in 0..2 {
                    p.set(a, b, (n + j) % 2, j, half.clone());
                }
            }
        }
        p
    }

    #[test]
    fn uniform_is_local() {
        for d in 2..=3 {
            let v = local_decompose(&Behavior::uniform(d)).unwrap();
            assert!(v.is_local());
            assert!(corr_local_decompose(&project(&Behavior::uniform(d))).unwrap().is_local());
        }
    }

    #[test]
    fn generators_are_local() {
        for g in all_generators(Scenario::new(2).unwrap()) {
            let Verdict::Local { weights } = local_decompose(&g).unwrap() else { panic!("nonlocal generator") };
            assert_eq!(weights.len(), 1);
        }
    }

    #[test]
    fn pr_box_is_nonlocal() {
        let p = pr_box();
        assert!(p.is_probability() && p.is_nosignaling());
        let Verdict::Nonlocal { certificate, value, class, .. } = local_decompose(&p).unwrap() else {
            panic!("PR box reported local")
        };
        assert_eq!(class, "chsh");
        assert_eq!(value, &certificate.bound * &Rational::from_int(2));
        assert!(symmetry::equivalent(&certificate, &cglmp_inequality(2).unwrap()).unwrap());
        assert_eq!(chsh_inequality().value(project(&p).coords()).unwrap(), Rational::from_int(4));
    }

    #[test]
    fn preconditions() {
        let mut p = Behavior::uniform(2);
        p.set(0, 0, 0, 0, Rational::new(1, 2));
        assert!(matches!(local_decompose(&p), Err(Error::Precondition(_))));
    }

    #[test]
    fn maxima() {
        for d in 2..=4 {
            assert_eq!(local_max(&cglmp_inequality(d).unwrap()).unwrap(), Rational::from_int(2));
        }
        assert_eq!(local_max(&chsh_inequality()).unwrap(), Rational::from_int(2));
        assert_eq!(nosignaling_max(&chsh_inequality()).unwrap(), Rational::from_int(4));
        let z = Inequality::zero(Space::Behavior(2));
        assert!(local_max(&z).unwrap().is_zero() && nosignaling_max(&z).unwrap().is_zero());
    }

    #[test]
    fn cglmp3_maximizer_is_nonlocal() {
        let c = cglmp_corr_inequality(3).unwrap();
        let p = nosignaling_maximizer(&c).unwrap();
        let Verdict::Nonlocal { certificate, class, .. } = corr_local_decompose(&project(&p)).unwrap() else {
            panic!("maximizer reported local")
        };
        assert_eq!(class, "cglmp");
        assert!(symmetry::equivalent(&certificate, &c).unwrap());
    }
}
