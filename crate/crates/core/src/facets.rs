//! Vertex-to-facet conversion by double description, canonical forms of
//! inequalities, and the trivial/non-trivial split.
//!
//! The polytope is first rewritten in full-dimensional coordinates: the affine
//! hull of the vertices is computed exactly, and a point is represented by its
//! entries on the pivot columns of the hull's direction space (a coordinate
//! projection that is injective on the hull). Facets of the reduced polytope are
//! the extreme rays of the cone `{w : w₀ + w'·y_i >= 0 for every vertex y_i}`.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use serde::Serialize;

use crate::correlators::projected_generators;
use crate::error::{Error, Result};
use crate::linalg::{dot, solve, sub, EchelonBasis, RationalMatrix, RationalVector};
use crate::membership::nosignaling_max;
use crate::rational::{primitive_scale, Rational};
use crate::scenario::{all_generators, Inequality, Scenario, Space};
use crate::symmetry;

/// `coeffs · x = rhs`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Equation {
    pub coeffs: RationalVector,
    pub rhs: Rational,
}

#[derive(Clone, Debug)]
pub struct VRep {
    space: Space,
    vertices: Vec<RationalVector>,
    dim: usize,
    pivots: Vec<usize>,
    equations: Vec<Equation>,
}

impl VRep {
    /// Deduplicates and sorts the vertices and computes their affine hull.
    pub fn new(space: Space, vertices: Vec<RationalVector>) -> Result<Self> {
        let n = space.dim();
        if vertices.is_empty() {
            return Err(Error::EmptyInput("a polytope needs at least one vertex"));
        }
        if let Some(v) = vertices.iter().find(|v| v.len() != n) {
            return Err(Error::DimensionMismatch(format!("vertex of length {} in {space}", v.len())));
        }
        let vertices: Vec<RationalVector> = vertices.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        let mut basis = EchelonBasis::new(n);
        for v in &vertices[1..] {
            basis.insert(&sub(v, &vertices[0]));
        }
        let (_, pivots) = basis.rref();
        let equations = basis
            .nullspace()
            .into_iter()
            .map(|normal| {
                let rhs = dot(&normal, &vertices[0]);
                Equation { coeffs: normal, rhs }
            })
            .collect();
        Ok(VRep { space, vertices, dim: basis.rank(), pivots, equations })
    }

    /// The `d³` projected generators; the hull must have dimension `4(d-1)`.
    pub fn correlator(d: usize) -> Result<Self> {
        let pts = projected_generators(d)?.into_iter().map(|c| c.into_coords()).collect();
        VRep::new(Space::Correlator(d), pts)?.expect_dim(4 * (d - 1))
    }

    /// The `d⁴` generators of the full behavior polytope.
    pub fn behavior(d: usize) -> Result<Self> {
        let s = Scenario::new(d)?;
        let pts = all_generators(s).into_iter().map(|g| g.into_coords()).collect();
        VRep::new(Space::Behavior(d), pts)?.expect_dim(s.expected_affine_dim())
    }

    pub fn expect_dim(self, dim: usize) -> Result<Self> {
        if self.dim != dim {
            return Err(Error::Degenerate(format!("affine hull has dimension {}, expected {dim}", self.dim)));
        }
        Ok(self)
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn ambient_dim(&self) -> usize {
        self.space.dim()
    }

    /// Dimension of the affine hull.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[RationalVector] {
        &self.vertices
    }

    pub fn equations(&self) -> &[Equation] {
        &self.equations
    }

    /// Full-dimensional coordinates of a point of the hull.
    pub fn reduce(&self, x: &[Rational]) -> RationalVector {
        self.pivots.iter().map(|&p| x[p].clone()).collect()
    }

    /// Inverse of [`VRep::reduce`] for linear functionals: `w · reduce(x) = lift_functional(w) · x`.
    fn lift_functional(&self, w: &[Rational]) -> RationalVector {
        let mut out = vec![Rational::zero(); self.ambient_dim()];
        for (&p, c) in self.pivots.iter().zip(w) {
            out[p] = c.clone();
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct HRep {
    pub space: Space,
    pub equations: Vec<Equation>,
    pub facets: Vec<Inequality>,
    /// False when a time budget ran out; `facets` then holds the facets certified so far.
    pub complete: bool,
}

struct Ray {
    w: RationalVector,
    zeros: FixedBitSet,
}

fn primitive(mut w: RationalVector) -> RationalVector {
    if let Some(scale) = primitive_scale(&w) {
        for x in w.iter_mut() {
            *x *= &scale;
        }
    }
    w
}

fn homogenize(y: &[Rational]) -> RationalVector {
    let mut row = Vec::with_capacity(y.len() + 1);
    row.push(Rational::one());
    row.extend_from_slice(y);
    row
}

pub fn enumerate_facets(v: &VRep) -> Result<HRep> {
    enumerate_facets_until(v, None)
}

/// Double description with an optional deadline. Vertices are inserted in
/// their sorted order; when the deadline passes, every intermediate ray that is
/// valid and facet-defining for the whole vertex set is returned with
/// `complete = false`.
pub fn enumerate_facets_until(v: &VRep, deadline: Option<Instant>) -> Result<HRep> {
    let dim = v.dim;
    if dim == 0 {
        return Err(Error::Degenerate("a single point has no facets".into()));
    }
    let rows: Vec<RationalVector> = v.vertices.iter().map(|x| homogenize(&v.reduce(x))).collect();
    let n = rows.len();

    // Initial simplex: the first dim+1 affinely independent vertices.
    let mut basis = EchelonBasis::new(dim + 1);
    let mut initial = Vec::with_capacity(dim + 1);
    for (i, row) in rows.iter().enumerate() {
        if basis.insert(row) {
            initial.push(i);
            if initial.len() == dim + 1 {
                break;
            }
        }
    }
    if initial.len() != dim + 1 {
        return Err(Error::Degenerate(format!("found {} affinely independent vertices, need {}", initial.len(), dim + 1)));
    }
    let m = RationalMatrix::from_rows(dim + 1, &initial.iter().map(|&i| rows[i].clone()).collect::<Vec<_>>())?;
    let mut rays = Vec::with_capacity(dim + 1);
    for j in 0..=dim {
        let mut e = vec![Rational::zero(); dim + 1];
        e[j] = Rational::one();
        let w = primitive(solve(&m, &e)?);
        let mut zeros = FixedBitSet::with_capacity(n);
        for (k, &i) in initial.iter().enumerate() {
            if k != j {
                zeros.insert(i);
            }
        }
        rays.push(Ray { w, zeros });
    }

    let mut complete = true;
    let is_initial: BTreeSet<usize> = initial.iter().copied().collect();
    for i in (0..n).filter(|i| !is_initial.contains(i)) {
        if deadline.is_some_and(|t| Instant::now() >= t) {
            complete = false;
            break;
        }
        rays = insert_row(rays, &rows[i], i, dim);
    }

    let mut facets = Vec::with_capacity(rays.len());
    for ray in &rays {
        if !complete && !certifies_facet(&ray.w, &rows, dim) {
            continue;
        }
        let coeffs: RationalVector = v.lift_functional(&ray.w[1..]).into_iter().map(|x| -x).collect();
        facets.push(canonicalize(&Inequality { space: v.space, coeffs, bound: ray.w[0].clone() })?);
    }
    facets.sort_by(|a, b| (&a.coeffs, &a.bound).cmp(&(&b.coeffs, &b.bound)));
    facets.dedup();
    Ok(HRep { space: v.space, equations: v.equations.clone(), facets, complete })
}

fn insert_row(rays: Vec<Ray>, row: &[Rational], index: usize, dim: usize) -> Vec<Ray> {
    let slack: Vec<Rational> = rays.par_iter().map(|r| dot(&r.w, row)).collect();
    let pos: Vec<usize> = (0..rays.len()).filter(|&k| slack[k].is_positive()).collect();
    let neg: Vec<usize> = (0..rays.len()).filter(|&k| slack[k].is_negative()).collect();
    if neg.is_empty() {
        let mut rays = rays;
        for (r, s) in rays.iter_mut().zip(&slack) {
            if s.is_zero() {
                r.zeros.insert(index);
            }
        }
        return rays;
    }
    let pairs: Vec<(usize, usize)> = pos.iter().flat_map(|&p| neg.iter().map(move |&q| (p, q))).collect();
    let fresh: Vec<Ray> = pairs
        .par_iter()
        .filter_map(|&(p, q)| {
            let mut common = rays[p].zeros.clone();
            common.intersect_with(&rays[q].zeros);
            if common.count_ones(..) + 1 < dim {
                return None;
            }
            let blocked = rays
                .iter()
                .enumerate()
                .any(|(k, r)| k != p && k != q && common.is_subset(&r.zeros));
            if blocked {
                return None;
            }
            let w: RationalVector = rays[p]
                .w
                .iter()
                .zip(&rays[q].w)
                .map(|(wp, wq)| &slack[p] * wq - &slack[q] * wp)
                .collect();
            common.insert(index);
            Some(Ray { w: primitive(w), zeros: common })
        })
        .collect();
    let mut next: Vec<Ray> = Vec::with_capacity(rays.len() + fresh.len());
    for (k, mut r) in rays.into_iter().enumerate() {
        if slack[k].is_zero() {
            r.zeros.insert(index);
            next.push(r);
        } else if slack[k].is_positive() {
            next.push(r);
        }
    }
    next.extend(fresh);
    next.sort_by(|a, b| a.w.cmp(&b.w));
    next
}

/// `w` is nonnegative on every row and vanishes on `dim` independent ones.
fn certifies_facet(w: &[Rational], rows: &[RationalVector], dim: usize) -> bool {
    let mut basis = EchelonBasis::new(dim + 1);
    for row in rows {
        let s = dot(w, row);
        if s.is_negative() {
            return false;
        }
        if s.is_zero() {
            basis.insert(row);
        }
    }
    basis.rank() == dim
}

/// Independent rows of the space's equations, with their right-hand sides.
fn equation_basis(space: Space) -> (Vec<RationalVector>, RationalVector) {
    let (m, rhs) = space.equations();
    let mut basis = EchelonBasis::new(m.cols());
    let mut rows = Vec::new();
    let mut b = Vec::new();
    for i in 0..m.rows() {
        if basis.insert(m.row(i)) {
            rows.push(m.row(i).to_vec());
            b.push(rhs[i].clone());
        }
    }
    (rows, b)
}

/// Unique representative of an inequality modulo the space's equations and
/// positive scaling: the coefficient vector is projected orthogonally onto the
/// complement of the equations (adjusting the bound by the same combination of
/// right-hand sides) and then scaled to a primitive integer vector.
///
/// The projection commutes with every coordinate permutation preserving the
/// equations, so symmetric images of canonical forms are canonical.
pub fn canonicalize(ineq: &Inequality) -> Result<Inequality> {
    ineq.expect_space(ineq.space)?;
    if ineq.coeffs.len() != ineq.space.dim() {
        return Err(Error::DimensionMismatch("coefficient count".into()));
    }
    let (rows, rhs) = equation_basis(ineq.space);
    let mut coeffs = ineq.coeffs.clone();
    let mut bound = ineq.bound.clone();
    if !rows.is_empty() {
        let k = rows.len();
        let mut gram = RationalMatrix::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                gram[(i, j)] = dot(&rows[i], &rows[j]);
            }
        }
        let bx: RationalVector = rows.iter().map(|r| dot(r, &coeffs)).collect();
        let mu = solve(&gram, &bx)?;
        for (row, (m, b)) in rows.iter().zip(mu.iter().zip(&rhs)) {
            if m.is_zero() {
                continue;
            }
            for (c, r) in coeffs.iter_mut().zip(row) {
                c.sub_mul(m, r);
            }
            bound.sub_mul(m, b);
        }
    }
    if coeffs.iter().all(Rational::is_zero) {
        return Err(Error::ZeroInequality);
    }
    let mut all = coeffs;
    all.push(bound);
    let scale = primitive_scale(&all).expect("nonzero");
    for x in all.iter_mut() {
        *x *= &scale;
    }
    let bound = all.pop().expect("bound");
    Ok(Inequality { space: ineq.space, coeffs: all, bound })
}

/// An inequality is trivial when no normalized no-signaling behavior violates it.
pub fn classify_trivial(ineq: &Inequality) -> Result<bool> {
    Ok(nosignaling_max(ineq)? <= ineq.bound)
}

/// Number of vertices on the hyperplane and the linear rank of those vertices.
pub fn saturation_count(ineq: &Inequality, vertices: &[RationalVector]) -> Result<(usize, usize)> {
    let mut basis = EchelonBasis::new(ineq.coeffs.len());
    let mut count = 0;
    for v in vertices {
        let value = ineq.value(v)?;
        if value > ineq.bound {
            return Err(Error::Verification(format!("vertex violates the inequality ({value} > {})", ineq.bound)));
        }
        if value == ineq.bound {
            count += 1;
            basis.insert(v);
        }
    }
    if count == 0 {
        return Err(Error::Verification("no vertex attains the bound; the inequality is not supporting".into()));
    }
    Ok((count, basis.rank()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FacetLabel {
    pub trivial: bool,
    /// Symmetry class, numbered in order of first appearance.
    pub class: usize,
}

/// Triviality and symmetry class of each facet, plus one representative per class.
pub fn label_facets(facets: &[Inequality], allow_large_group: bool) -> Result<(Vec<FacetLabel>, Vec<Inequality>)> {
    let keyed: Vec<(bool, Inequality)> = facets
        .par_iter()
        .map(|f| Ok((classify_trivial(f)?, symmetry::canonical_class_with(f, allow_large_group)?)))
        .collect::<Result<_>>()?;
    let mut ids: BTreeMap<&Inequality, usize> = BTreeMap::new();
    let mut reps = Vec::new();
    let mut labels = Vec::with_capacity(facets.len());
    for (trivial, class) in &keyed {
        let next = ids.len();
        let id = *ids.entry(class).or_insert_with(|| {
            reps.push(class.clone());
            next
        });
        labels.push(FacetLabel { trivial: *trivial, class: id });
    }
    Ok((labels, reps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlators::{cglmp_corr_inequality, chsh_inequality};
    use crate::linalg::nullspace;

    fn ints(xs: &[i64]) -> RationalVector {
        xs.iter().map(|&x| Rational::from_int(x)).collect()
    }

    fn euclid(points: &[&[i64]]) -> VRep {
        let n = points[0].len();
        VRep::new(Space::Euclidean(n), points.iter().map(|p| ints(p)).collect()).unwrap()
    }

    /// Every hyperplane through `dim` reduced vertices that supports the polytope.
    fn brute_force(v: &VRep) -> Vec<Inequality> {
        let dim = v.dim();
        let rows: Vec<RationalVector> = v.vertices().iter().map(|x| homogenize(&v.reduce(x))).collect();
        let mut out = BTreeSet::new();
        let n = rows.len();
        let mut idx: Vec<usize> = (0..dim).collect();
        loop {
            let chosen: Vec<RationalVector> = idx.iter().map(|&i| rows[i].clone()).collect();
            let ns = nullspace(&RationalMatrix::from_rows(dim + 1, &chosen).unwrap());
            if ns.len() == 1 {
                let w = &ns[0];
                let signs: Vec<Rational> = rows.iter().map(|r| dot(w, r)).collect();
                let all_pos = signs.iter().all(|s| !s.is_negative());
                let all_neg = signs.iter().all(|s| !s.is_positive());
                if all_pos || all_neg {
                    let w: RationalVector = if all_pos { w.clone() } else { w.iter().map(|x| -x).collect() };
                    let coeffs = v.lift_functional(&w[1..]).into_iter().map(|x| -x).collect();
                    let ineq = Inequality { space: v.space(), coeffs, bound: w[0].clone() };
                    let c = canonicalize(&ineq).unwrap();
                    out.insert((c.coeffs.clone(), c.bound.clone()));
                }
            }
            // next combination
            let mut k = dim;
            loop {
                if k == 0 {
                    return out
                        .into_iter()
                        .map(|(coeffs, bound)| Inequality { space: v.space(), coeffs, bound })
                        .collect();
                }
                k -= 1;
                if idx[k] != k + n - dim {
                    break;
                }
            }
            idx[k] += 1;
            for j in k + 1..dim {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }

    #[test]
    fn unit_square() {
        let v = euclid(&[&[0, 0], &[1, 0], &[0, 1], &[1, 1]]);
        let h = enumerate_facets(&v).unwrap();
        assert_eq!(h.facets.len(), 4);
        assert!(h.complete);
        let x1 = Inequality { space: Space::Euclidean(2), coeffs: ints(&[1, 0]), bound: Rational::one() };
        assert!(h.facets.contains(&x1));
        assert_eq!(saturation_count(&x1, v.vertices()).unwrap(), (2, 2));
    }

    #[test]
    fn embedded_square_and_cross_polytope() {
        let v = euclid(&[&[0, 0, 1], &[1, 0, 1], &[0, 1, 1], &[1, 1, 1]]);
        assert_eq!(v.dim(), 2);
        assert_eq!(v.equations().len(), 1);
        assert_eq!(enumerate_facets(&v).unwrap().facets.len(), 4);
        let cross = euclid(&[&[1, 0, 0], &[-1, 0, 0], &[0, 1, 0], &[0, -1, 0], &[0, 0, 1], &[0, 0, -1]]);
        let h = enumerate_facets(&cross).unwrap();
        assert_eq!(h.facets.len(), 8);
        assert_eq!(h.facets, brute_force(&cross));
        let cube: Vec<Vec<i64>> = (0..8).map(|i| vec![i & 1, (i >> 1) & 1, (i >> 2) & 1]).collect();
        let cube = euclid(&cube.iter().map(|c| c.as_slice()).collect::<Vec<_>>());
        assert_eq!(enumerate_facets(&cube).unwrap().facets.len(), 6);
    }

    #[test]
    fn single_point_is_degenerate() {
        let v = euclid(&[&[1, 2]]);
        assert!(matches!(enumerate_facets(&v), Err(Error::Degenerate(_))));
    }

    #[test]
    fn canonicalize_examples() {
        let i = Inequality {
            space: Space::Euclidean(2),
            coeffs: vec![Rational::new(2, 3), Rational::new(4, 3)],
            bound: Rational::from_int(2),
        };
        let c = canonicalize(&i).unwrap();
        assert_eq!(c.coeffs, ints(&[1, 2]));
        assert_eq!(c.bound, Rational::from_int(3));
        assert_eq!(canonicalize(&c).unwrap(), c);
        assert!(matches!(canonicalize(&Inequality::zero(Space::Euclidean(3))), Err(Error::ZeroInequality)));
    }

    #[test]
    fn canonicalize_removes_equations() {
        // Adding a multiple of a block normalization leaves the canonical form unchanged.
        let base = cglmp_corr_inequality(3).unwrap();
        let mut shifted = base.clone();
        for n in 0..3 {
            shifted.coeffs[3 + n] += Rational::from_int(5);
        }
        shifted.bound += Rational::from_int(5);
        assert_eq!(canonicalize(&base).unwrap(), canonicalize(&shifted).unwrap());
    }

    #[test]
    fn d2_correlator_polytope() {
        let v = VRep::correlator(2).unwrap();
        assert_eq!(v.dim(), 4);
        let h = enumerate_facets(&v).unwrap();
        assert_eq!(h.facets.len(), 16);
        assert_eq!(h.facets, brute_force(&v));
        for f in &h.facets {
            let (_, rank) = saturation_count(f, v.vertices()).unwrap();
            assert_eq!(rank, 4);
        }
        let chsh = canonicalize(&chsh_inequality()).unwrap();
        assert!(h.facets.contains(&chsh));
        assert_eq!(saturation_count(&chsh, v.vertices()).unwrap().0, 4);
    }

    #[test]
    fn triviality() {
        assert!(!classify_trivial(&chsh_inequality()).unwrap());
        // <A1 B1> <= 1, i.e. P(A1 - B1 = 1) >= 0.
        let mut coeffs = vec![Rational::zero(); 8];
        coeffs[0] = Rational::one();
        coeffs[1] = Rational::from_int(-1);
        let corr = Inequality { space: Space::Correlator(2), coeffs, bound: Rational::one() };
        assert!(classify_trivial(&corr).unwrap());
        assert!(!classify_trivial(&cglmp_corr_inequality(3).unwrap()).unwrap());
    }

    #[test]
    fn cglmp3_behavior_saturation_rank() {
        let v = VRep::behavior(3).unwrap();
        let i = crate::cglmp::cglmp_inequality(3).unwrap();
        assert_eq!(saturation_count(&i, v.vertices()).unwrap().1, 24);
    }

    #[test]
    fn budget_returns_certified_facets() {
        let v = VRep::correlator(3).unwrap();
        let h = enumerate_facets_until(&v, Some(Instant::now())).unwrap();
        assert!(!h.complete);
        for f in &h.facets {
            let (_, rank) = saturation_count(f, v.vertices()).unwrap();
            assert_eq!(rank, v.dim());
        }
    }
}
