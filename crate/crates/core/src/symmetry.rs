//! Relabeling symmetries: party exchange, observable exchange and outcome
//! relabeling.
//!
//! Every operation is a coordinate permutation `π` acting on points by
//! `(g·x)[π(i)] = x[i]` and on inequalities contragrediently, `X'[π(i)] = X[i]`
//! with the bound unchanged, so `eval(g·X, g·x) = eval(X, x)`.
//!
//! Behavior space carries the full group: a permutation of the outcomes of each
//! observable, then the observable swaps, then the party swap. Arbitrary outcome
//! permutations do not descend to correlator coordinates; there the group is
//! generated by outcome shifts `A_a ↦ A_a + c_a`, `B_b ↦ B_b + c_b`, the global
//! reflection (every outcome negated mod `d`), and the same swaps.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::correlators::corr_index;
use crate::error::{Error, Result};
use crate::facets::canonicalize;
use crate::scenario::{behavior_index, Behavior, Inequality, Space};

#[derive(Clone, Debug)]
pub enum Relabel {
    /// Outcome permutations of `A₁, A₂, B₁, B₂` (behavior space).
    Permutations([Vec<usize>; 4]),
    /// Shifts `c_{A₁}, c_{A₂}, c_{B₁}, c_{B₂}` and the reflection flag (correlator space).
    Shifts { shifts: [usize; 4], reflect: bool },
}

#[derive(Clone, Debug)]
pub struct SymmetryOp {
    pub space: Space,
    pub swap_parties: bool,
    pub swap_a: bool,
    pub swap_b: bool,
    pub relabel: Relabel,
}

impl PartialEq for SymmetryOp {
    fn eq(&self, other: &Self) -> bool {
        self.space == other.space && self.permutation() == other.permutation()
    }
}

impl Eq for SymmetryOp {}

fn is_permutation(p: &[usize], d: usize) -> bool {
    let mut seen = vec![false; d];
    p.len() == d && p.iter().all(|&x| x < d && !std::mem::replace(&mut seen[x], true))
}

impl SymmetryOp {
    pub fn identity(space: Space) -> Result<Self> {
        let relabel = match space {
            Space::Behavior(d) => Relabel::Permutations(std::array::from_fn(|_| (0..d).collect())),
            Space::Correlator(_) => Relabel::Shifts { shifts: [0; 4], reflect: false },
            Space::Euclidean(_) => {
                return Err(Error::SpaceMismatch { expected: "behavior or correlator".into(), actual: space.to_string() })
            }
        };
        Ok(SymmetryOp { space, swap_parties: false, swap_a: false, swap_b: false, relabel })
    }

    pub fn party_swap(space: Space) -> Result<Self> {
        Ok(SymmetryOp { swap_parties: true, ..SymmetryOp::identity(space)? })
    }

    pub fn observable_swap(space: Space, alice: bool) -> Result<Self> {
        let id = SymmetryOp::identity(space)?;
        Ok(SymmetryOp { swap_a: alice, swap_b: !alice, ..id })
    }

    pub fn relabeling(d: usize, perms: [Vec<usize>; 4]) -> Result<Self> {
        if !perms.iter().all(|p| is_permutation(p, d)) {
            return Err(Error::Precondition(format!("outcome relabeling must permute 0..{d}")));
        }
        Ok(SymmetryOp { relabel: Relabel::Permutations(perms), ..SymmetryOp::identity(Space::Behavior(d))? })
    }

    pub fn shift(d: usize, shifts: [usize; 4], reflect: bool) -> Result<Self> {
        let shifts = shifts.map(|c| c % d);
        Ok(SymmetryOp { relabel: Relabel::Shifts { shifts, reflect }, ..SymmetryOp::identity(Space::Correlator(d))? })
    }

    fn d(&self) -> usize {
        self.space.outcomes().expect("symmetry spaces have outcomes")
    }

    fn target_block(&self, a: usize, b: usize) -> (usize, usize) {
        let (a, b) = (a ^ usize::from(self.swap_a), b ^ usize::from(self.swap_b));
        if self.swap_parties {
            (b, a)
        } else {
            (a, b)
        }
    }

    /// `π` as a table: coordinate `i` moves to `permutation()[i]`.
    pub fn permutation(&self) -> Vec<usize> {
        let d = self.d();
        match &self.relabel {
            Relabel::Permutations(p) => {
                let mut pi = vec![0; 4 * d * d];
                for a in 0..2 {
                    for b in 0..2 {
                        let (ta, tb) = self.target_block(a, b);
                        for k in 0..d {
                            for s in 0..d {
                                let (k2, s2) = (p[a][k], p[2 + b][s]);
                                let (k3, s3) = if self.swap_parties { (s2, k2) } else { (k2, s2) };
                                pi[behavior_index(d, a, b, k, s)] = behavior_index(d, ta, tb, k3, s3);
                            }
                        }
                    }
                }
                pi
            }
            Relabel::Shifts { shifts, reflect } => {
                let mut pi = vec![0; 4 * d];
                let sign = if *reflect != self.swap_parties { d - 1 } else { 1 };
                for a in 0..2 {
                    for b in 0..2 {
                        let (ta, tb) = self.target_block(a, b);
                        for n in 0..d {
                            let shifted = (n + shifts[a] + d - shifts[2 + b]) % d;
                            pi[corr_index(d, a, b, n)] = corr_index(d, ta, tb, shifted * sign % d);
                        }
                    }
                }
                pi
            }
        }
    }

    fn check_space(&self, space: Space) -> Result<()> {
        if self.space != space {
            return Err(Error::SpaceMismatch { expected: self.space.to_string(), actual: space.to_string() });
        }
        Ok(())
    }

    pub fn apply_vector<T: Clone + Default>(&self, x: &[T]) -> Vec<T> {
        let pi = self.permutation();
        let mut out = vec![T::default(); x.len()];
        for (i, v) in x.iter().enumerate() {
            out[pi[i]] = v.clone();
        }
        out
    }

    pub fn apply_behavior(&self, p: &Behavior) -> Result<Behavior> {
        self.check_space(Space::Behavior(p.d()))?;
        Behavior::new(p.d(), self.apply_vector(p.coords()))
    }

    pub fn apply_inequality(&self, ineq: &Inequality) -> Result<Inequality> {
        self.check_space(ineq.space)?;
        Ok(Inequality { space: ineq.space, coeffs: self.apply_vector(&ineq.coeffs), bound: ineq.bound.clone() })
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &SymmetryOp) -> Result<SymmetryOp> {
        other.check_space(self.space)?;
        let (f, g) = (self.permutation(), other.permutation());
        let pi: Vec<usize> = g.iter().map(|&j| f[j]).collect();
        Ok(SymmetryOp::from_permutation(self.space, &pi).expect("the group is closed"))
    }

    pub fn inverse(&self) -> SymmetryOp {
        let pi = self.permutation();
        let mut inv = vec![0; pi.len()];
        for (i, &j) in pi.iter().enumerate() {
            inv[j] = i;
        }
        SymmetryOp::from_permutation(self.space, &inv).expect("the group is closed")
    }

    /// Recovers the normal form of a group element from its coordinate permutation.
    pub fn from_permutation(space: Space, pi: &[usize]) -> Option<SymmetryOp> {
        let d = space.outcomes()?;
        let per_block = pi.len() / 4;
        let block_of = |i: usize| (pi[i] / per_block / 2, pi[i] / per_block % 2);
        let first = |a: usize, b: usize| match space {
            Space::Behavior(_) => behavior_index(d, a, b, 0, 0),
            _ => corr_index(d, a, b, 0),
        };
        let (x0, y0) = block_of(first(0, 0));
        let (x1, y1) = block_of(first(0, 1));
        let swap_parties = x0 != x1;
        if swap_parties && y0 != y1 {
            return None;
        }
        let (swap_a, swap_b) = if swap_parties { (y0 == 1, x0 == 1) } else { (x0 == 1, y0 == 1) };
        let mut op = SymmetryOp { space, swap_parties, swap_a, swap_b, relabel: SymmetryOp::identity(space).ok()?.relabel };
        match space {
            Space::Behavior(_) => {
                // Read σ_{A_a} from block (a, 0) at s = 0 and σ_{B_b} from block (0, b) at k = 0.
                let cell = |i: usize| (pi[i] / d % d, pi[i] % d);
                let mut perms: [Vec<usize>; 4] = Default::default();
                for a in 0..2 {
                    perms[a] = (0..d)
                        .map(|k| {
                            let (k2, s2) = cell(behavior_index(d, a, 0, k, 0));
                            if swap_parties { s2 } else { k2 }
                        })
                        .collect();
                }
                for b in 0..2 {
                    perms[2 + b] = (0..d)
                        .map(|s| {
                            let (k2, s2) = cell(behavior_index(d, 0, b, 0, s));
                            if swap_parties { k2 } else { s2 }
                        })
                        .collect();
                }
                op.relabel = Relabel::Permutations(perms);
            }
            _ => {
                let at = |a, b, n| pi[corr_index(d, a, b, n)] % d;
                let step = (at(0, 0, 1) + d - at(0, 0, 0)) % d;
                let sign_negative = step != 1 % d;
                let reflect = sign_negative != swap_parties;
                // Offsets δ_ab = c_{A_a} - c_{B_b}, normalized by c_{B₁} = 0.
                let delta = |a, b| if sign_negative { (d - at(a, b, 0)) % d } else { at(a, b, 0) };
                let (ca1, ca2) = (delta(0, 0), delta(1, 0));
                let cb2 = (ca1 + d - delta(0, 1)) % d;
                op.relabel = Relabel::Shifts { shifts: [ca1, ca2, 0, cb2], reflect };
            }
        }
        (op.permutation() == pi).then_some(op)
    }
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// Number of group elements enumerated for the space (the correlator listing
/// fixes `c_{B₁} = 0`, so it has no shift redundancy).
pub fn group_order(space: Space) -> Result<u128> {
    match space {
        Space::Behavior(d) => Ok(8 * factorial(d).pow(4)),
        Space::Correlator(d) => Ok(16 * (d as u128).pow(3)),
        Space::Euclidean(_) => Err(Error::SpaceMismatch { expected: "behavior or correlator".into(), actual: space.to_string() }),
    }
}

/// Largest behavior-space group enumerated without an explicit opt-in (`d <= 3`).
pub const DEFAULT_GROUP_LIMIT: u128 = 8 * 6 * 6 * 6 * 6;

fn permutations(d: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for x in 0..used.len() {
            if !used[x] {
                used[x] = true;
                prefix.push(x);
                go(prefix, used, out);
                prefix.pop();
                used[x] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; d], &mut out);
    out
}

/// Every group element, in a fixed order.
pub fn group_elements(space: Space, allow_large: bool) -> Result<Vec<SymmetryOp>> {
    let order = group_order(space)?;
    if order > DEFAULT_GROUP_LIMIT && !allow_large {
        return Err(Error::GroupTooLarge(order));
    }
    let d = space.outcomes().expect("checked above");
    let mut out = Vec::with_capacity(order as usize);
    let flags = |i: usize| (i & 4 != 0, i & 2 != 0, i & 1 != 0);
    match space {
        Space::Behavior(_) => {
            let perms = permutations(d);
            for i in 0..8 {
                let (swap_parties, swap_a, swap_b) = flags(i);
                for p0 in &perms {
                    for p1 in &perms {
                        for p2 in &perms {
                            for p3 in &perms {
                                out.push(SymmetryOp {
                                    space,
                                    swap_parties,
                                    swap_a,
                                    swap_b,
                                    relabel: Relabel::Permutations([p0.clone(), p1.clone(), p2.clone(), p3.clone()]),
                                });
                            }
                        }
                    }
                }
            }
        }
        _ => {
            for i in 0..8 {
                let (swap_parties, swap_a, swap_b) = flags(i);
                for reflect in [false, true] {
                    for c in 0..d * d * d {
                        let shifts = [c / (d * d), c / d % d, 0, c % d];
                        out.push(SymmetryOp { space, swap_parties, swap_a, swap_b, relabel: Relabel::Shifts { shifts, reflect } });
                    }
                }
            }
        }
    }
    Ok(out)
}

fn lex(a: &Inequality, b: &Inequality) -> Ordering {
    (&a.coeffs, &a.bound).cmp(&(&b.coeffs, &b.bound))
}

pub fn canonical_class(ineq: &Inequality) -> Result<Inequality> {
    canonical_class_with(ineq, false)
}

/// Lexicographically least canonical form over the orbit. Since the canonical
/// form commutes with the group, only one canonicalization is needed.
pub fn canonical_class_with(ineq: &Inequality, allow_large: bool) -> Result<Inequality> {
    let base = canonicalize(ineq)?;
    let group = group_elements(ineq.space, allow_large)?;
    let best = group
        .par_iter()
        .map(|g| g.apply_inequality(&base).expect("space checked"))
        .min_by(lex)
        .expect("the group is nonempty");
    Ok(best)
}

pub fn equivalent(i1: &Inequality, i2: &Inequality) -> Result<bool> {
    if i1.space != i2.space {
        return Err(Error::SpaceMismatch { expected: i1.space.to_string(), actual: i2.space.to_string() });
    }
    Ok(canonical_class(i1)? == canonical_class(i2)?)
}
