//! Exact two-phase simplex over the rationals.
//!
//! Maximizes `c · x` subject to `A_eq x = b_eq`, `A_in x <= b_in` and `x_j >= 0`
//! for the flagged variables. Pivoting follows Bland's rule (lowest index enters,
//! lowest basic index leaves on ties), so the method terminates and the result is
//! a deterministic function of the input.
//!
//! When the system is infeasible the solver returns a Farkas certificate `y`
//! (equality rows first, then inequality rows) with
//!
//! * `y_i >= 0` on inequality rows,
//! * `y · A_j >= 0` for every nonnegative variable and `= 0` for every free one,
//! * `y · b < 0`.

use crate::error::{Error, Result};
use crate::linalg::{dot, RationalMatrix, RationalVector};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug)]
pub struct LpResult {
    pub status: LpStatus,
    pub optimum: Option<Rational>,
    pub primal: Option<RationalVector>,
    pub certificate: Option<RationalVector>,
}

/// A linear program in the form accepted by [`lp_max`].
#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub objective: RationalVector,
    pub eq_rows: RationalMatrix,
    pub eq_rhs: RationalVector,
    pub ineq_rows: RationalMatrix,
    pub ineq_rhs: RationalVector,
    pub nonneg: Vec<bool>,
}

impl LinearProgram {
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    fn check(&self) -> Result<()> {
        let n = self.num_vars();
        let bad = |what: String| Err(Error::DimensionMismatch(what));
        if self.eq_rows.rows() > 0 && self.eq_rows.cols() != n {
            return bad(format!("equality rows have {} columns, expected {n}", self.eq_rows.cols()));
        }
        if self.ineq_rows.rows() > 0 && self.ineq_rows.cols() != n {
            return bad(format!("inequality rows have {} columns, expected {n}", self.ineq_rows.cols()));
        }
        if self.eq_rhs.len() != self.eq_rows.rows() {
            return bad("equality right-hand side length".into());
        }
        if self.ineq_rhs.len() != self.ineq_rows.rows() {
            return bad("inequality right-hand side length".into());
        }
        if self.nonneg.len() != n {
            return bad("nonnegativity flags length".into());
        }
        Ok(())
    }

    /// Whether `x` satisfies every constraint exactly.
    pub fn is_feasible(&self, x: &[Rational]) -> bool {
        x.len() == self.num_vars()
            && x.iter().zip(&self.nonneg).all(|(v, &nn)| !nn || !v.is_negative())
            && (0..self.eq_rows.rows()).all(|i| dot(self.eq_rows.row(i), x) == self.eq_rhs[i])
            && (0..self.ineq_rows.rows()).all(|i| dot(self.ineq_rows.row(i), x) <= self.ineq_rhs[i])
    }

    /// Checks a Farkas infeasibility certificate exactly.
    pub fn verify_farkas(&self, y: &[Rational]) -> bool {
        let me = self.eq_rows.rows();
        let mi = self.ineq_rows.rows();
        if y.len() != me + mi {
            return false;
        }
        if y[me..].iter().any(Rational::is_negative) {
            return false;
        }
        for j in 0..self.num_vars() {
            let mut col = Rational::zero();
            for i in 0..me {
                col.add_mul(&y[i], &self.eq_rows[(i, j)]);
            }
            for i in 0..mi {
                col.add_mul(&y[me + i], &self.ineq_rows[(i, j)]);
            }
            let ok = if self.nonneg[j] { !col.is_negative() } else { col.is_zero() };
            if !ok {
                return false;
            }
        }
        let yb = dot(&y[..me], &self.eq_rhs) + dot(&y[me..], &self.ineq_rhs);
        yb.is_negative()
    }
}

pub fn lp_max(
    objective: &[Rational],
    eq_rows: &RationalMatrix,
    eq_rhs: &[Rational],
    ineq_rows: &RationalMatrix,
    ineq_rhs: &[Rational],
    nonneg_vars: &[bool],
) -> Result<LpResult> {
    let lp = LinearProgram {
        objective: objective.to_vec(),
        eq_rows: eq_rows.clone(),
        eq_rhs: eq_rhs.to_vec(),
        ineq_rows: ineq_rows.clone(),
        ineq_rhs: ineq_rhs.to_vec(),
        nonneg: nonneg_vars.to_vec(),
    };
    solve(&lp)
}

struct Tableau {
    /// `rows x (cols + 1)`; the last column is the right-hand side.
    t: Vec<RationalVector>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.t[r][c].recip();
        for x in self.t[r].iter_mut() {
            if !x.is_zero() {
                *x *= &inv;
            }
        }
        let pivot_row = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                x.sub_mul(&f, y);
            }
        }
        self.basis[r] = c;
    }

    fn reduced_costs(&self, cost: &[Rational]) -> RationalVector {
        let mut z: RationalVector = cost.to_vec();
        z.push(Rational::zero());
        for (row, &b) in self.t.iter().zip(&self.basis) {
            let cb = &cost[b];
            if cb.is_zero() {
                continue;
            }
            for (zj, x) in z.iter_mut().zip(row) {
                zj.sub_mul(cb, x);
            }
        }
        z
    }

    /// Minimizes `cost` over the columns allowed to enter. Returns false on unboundedness.
    fn minimize(&mut self, cost: &[Rational], allowed: &[bool]) -> bool {
        let rhs = self.cols;
        let mut z = self.reduced_costs(cost);
        loop {
            let Some(enter) = (0..self.cols).find(|&j| allowed[j] && z[j].is_negative()) else {
                return true;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for (i, row) in self.t.iter().enumerate() {
                if !row[enter].is_positive() {
                    continue;
                }
                let ratio = &row[rhs] / &row[enter];
                let better = match &leave {
                    None => true,
                    Some((l, best)) => {
                        ratio < *best || (ratio == *best && self.basis[i] < self.basis[*l])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((r, _)) = leave else {
                return false;
            };
            self.pivot(r, enter);
            let f = z[enter].clone();
            let row = &self.t[r];
            for (zj, x) in z.iter_mut().zip(row) {
                zj.sub_mul(&f, x);
            }
        }
    }
}

/// Solves the program; see the module docs for the certificate convention.
pub fn solve(lp: &LinearProgram) -> Result<LpResult> {
    lp.check()?;
    let n = lp.num_vars();
    let me = lp.eq_rows.rows();
    let mi = lp.ineq_rows.rows();
    let m = me + mi;

    // Standard-form columns: split free variables, then one slack per inequality.
    let mut var_cols: Vec<(usize, Option<usize>)> = Vec::with_capacity(n);
    let mut ncols = 0;
    for &nn in &lp.nonneg {
        if nn {
            var_cols.push((ncols, None));
            ncols += 1;
        } else {
            var_cols.push((ncols, Some(ncols + 1)));
            ncols += 2;
        }
    }
    let slack0 = ncols;
    ncols += mi;
    let art0 = ncols;
    let total = ncols + m;

    let mut sign = Vec::with_capacity(m);
    let mut t = Vec::with_capacity(m);
    for i in 0..m {
        let (row, b) = if i < me {
            (lp.eq_rows.row(i), &lp.eq_rhs[i])
        } else {
            (lp.ineq_rows.row(i - me), &lp.ineq_rhs[i - me])
        };
        let s = if b.is_negative() { -1 } else { 1 };
        let flip = |x: &Rational| if s < 0 { -x } else { x.clone() };
        let mut r = vec![Rational::zero(); total + 1];
        for (j, a) in row.iter().enumerate() {
            let (p, q) = var_cols[j];
            r[p] = flip(a);
            if let Some(q) = q {
                r[q] = -flip(a);
            }
        }
        if i >= me {
            r[slack0 + i - me] = flip(&Rational::one());
        }
        r[art0 + i] = Rational::one();
        r[total] = flip(b);
        sign.push(s);
        t.push(r);
    }
    let mut tab = Tableau { t, basis: (art0..art0 + m).collect(), cols: total };

    // Phase I.
    let mut cost1 = vec![Rational::zero(); total];
    for c in cost1.iter_mut().skip(art0) {
        *c = Rational::one();
    }
    let all = vec![true; total];
    tab.minimize(&cost1, &all);
    let z = tab.reduced_costs(&cost1);
    let infeas = -&z[total];
    if infeas.is_positive() {
        let certificate = (0..m)
            .map(|i| {
                let y = &z[art0 + i] - &Rational::one();
                if sign[i] < 0 {
                    -y
                } else {
                    y
                }
            })
            .collect();
        return Ok(LpResult {
            status: LpStatus::Infeasible,
            optimum: None,
            primal: None,
            certificate: Some(certificate),
        });
    }

    // Drive zero-level artificials out of the basis; drop rows that are redundant.
    let mut i = 0;
    while i < tab.t.len() {
        if tab.basis[i] >= art0 {
            if let Some(j) = (0..art0).find(|&j| !tab.t[i][j].is_zero()) {
                tab.pivot(i, j);
            } else {
                tab.t.remove(i);
                tab.basis.remove(i);
                continue;
            }
        }
        i += 1;
    }

    // Phase II on the original objective (as a minimization of its negation).
    let mut cost2 = vec![Rational::zero(); total];
    for (j, c) in lp.objective.iter().enumerate() {
        let (p, q) = var_cols[j];
        cost2[p] = -c;
        if let Some(q) = q {
            cost2[q] = c.clone();
        }
    }
    let allowed: Vec<bool> = (0..total).map(|j| j < art0).collect();
    if !tab.minimize(&cost2, &allowed) {
        return Ok(LpResult { status: LpStatus::Unbounded, optimum: None, primal: None, certificate: None });
    }
    let mut xs = vec![Rational::zero(); total];
    for (row, &b) in tab.t.iter().zip(&tab.basis) {
        xs[b] = row[total].clone();
    }
    let primal: RationalVector = var_cols
        .iter()
        .map(|&(p, q)| match q {
            Some(q) => &xs[p] - &xs[q],
            None => xs[p].clone(),
        })
        .collect();
    let optimum = dot(&lp.objective, &primal);
    Ok(LpResult { status: LpStatus::Optimal, optimum: Some(optimum), primal: Some(primal), certificate: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ints(v: &[i64]) -> RationalVector {
        v.iter().map(|&x| Rational::from_int(x)).collect()
    }

    fn empty(n: usize) -> RationalMatrix {
        RationalMatrix::zeros(0, n)
    }

    #[test]
    fn segment_maximum() {
        let eq = RationalMatrix::from_i64_rows(&[&[1, 1]]);
        let res = lp_max(&ints(&[1, 0]), &eq, &ints(&[1]), &empty(2), &[], &[true, true]).unwrap();
        assert_eq!(res.status, LpStatus::Optimal);
        assert_eq!(res.optimum, Some(Rational::one()));
        assert_eq!(res.primal, Some(ints(&[1, 0])));
    }

    #[test]
    fn contradictory_equalities() {
        let eq = RationalMatrix::from_i64_rows(&[&[1], &[1]]);
        let lp = LinearProgram {
            objective: ints(&[0]),
            eq_rows: eq,
            eq_rhs: ints(&[1, 2]),
            ineq_rows: empty(1),
            ineq_rhs: vec![],
            nonneg: vec![false],
        };
        let res = solve(&lp).unwrap();
        assert_eq!(res.status, LpStatus::Infeasible);
        assert!(lp.verify_farkas(res.certificate.as_ref().unwrap()));
    }

    #[test]
    fn unbounded_detected() {
        let ineq = RationalMatrix::from_i64_rows(&[&[1, -1]]);
        let res = lp_max(&ints(&[1, 0]), &empty(2), &[], &ineq, &ints(&[1]), &[true, true]).unwrap();
        assert_eq!(res.status, LpStatus::Unbounded);
    }

    #[test]
    fn free_variables_and_negative_rhs() {
        // max -x - y  s.t. x + y >= 3 (as -x - y <= -3), x - y = 1, x, y free.
        let eq = RationalMatrix::from_i64_rows(&[&[1, -1]]);
        let ineq = RationalMatrix::from_i64_rows(&[&[-1, -1]]);
        let res = lp_max(&ints(&[-1, -1]), &eq, &ints(&[1]), &ineq, &ints(&[-3]), &[false, false]).unwrap();
        assert_eq!(res.optimum, Some(Rational::from_int(-3)));
        assert_eq!(res.primal, Some(ints(&[2, 1])));
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let eq = RationalMatrix::from_i64_rows(&[&[1, 1, 1]]);
        assert!(lp_max(&ints(&[1, 0]), &eq, &ints(&[1]), &empty(2), &[], &[true, true]).is_err());
    }

    #[test]
    fn redundant_equalities() {
        let eq = RationalMatrix::from_i64_rows(&[&[1, 1, 0], &[2, 2, 0], &[0, 0, 1]]);
        let res = lp_max(&ints(&[1, 2, 1]), &eq, &ints(&[1, 2, 5]), &empty(3), &[], &[true; 3]).unwrap();
        assert_eq!(res.optimum, Some(Rational::from_int(7)));
    }

    fn arb_lp() -> impl Strategy<Value = LinearProgram> {
        (1usize..4, 0usize..3, 0usize..4).prop_flat_map(|(n, me, mi)| {
            (
                proptest::collection::vec(-3i64..4, n),
                proptest::collection::vec(-3i64..4, me * n),
                proptest::collection::vec(-4i64..5, me),
                proptest::collection::vec(-3i64..4, mi * n),
                proptest::collection::vec(-4i64..5, mi),
                proptest::collection::vec(any::<bool>(), n),
            )
                .prop_map(move |(c, ae, be, ai, bi, nn)| LinearProgram {
                    objective: ints(&c),
                    eq_rows: RationalMatrix::from_entries(me, n, ints(&ae)).unwrap(),
                    eq_rhs: ints(&be),
                    ineq_rows: RationalMatrix::from_entries(mi, n, ints(&ai)).unwrap(),
                    ineq_rhs: ints(&bi),
                    nonneg: nn,
                })
        })
    }

    proptest! {
        #[test]
        fn results_verify_exactly(lp in arb_lp()) {
            let res = solve(&lp).unwrap();
            match res.status {
                LpStatus::Optimal => {
                    let x = res.primal.unwrap();
                    prop_assert!(lp.is_feasible(&x));
                    prop_assert_eq!(dot(&lp.objective, &x), res.optimum.unwrap());
                }
                LpStatus::Infeasible => {
                    prop_assert!(lp.verify_farkas(&res.certificate.unwrap()));
                }
                LpStatus::Unbounded => {}
            }
        }
    }
}
