//! Dense exact linear algebra over [`Rational`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

pub type RationalVector = Vec<Rational>;

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Rational>,
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RationalMatrix { rows, cols, entries: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_entries(rows: usize, cols: usize, entries: Vec<Rational>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Ok(RationalMatrix { rows, cols, entries })
    }

    /// Builds a matrix from rows of equal length. `cols` is needed for the empty case.
    pub fn from_rows(cols: usize, rows: &[RationalVector]) -> Result<Self> {
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has length {}, expected {cols}",
                    r.len()
                )));
            }
            entries.extend(r.iter().cloned());
        }
        Ok(RationalMatrix { rows: rows.len(), cols, entries })
    }

    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let rows: Vec<RationalVector> =
            rows.iter().map(|r| r.iter().map(|&x| Rational::from_int(x)).collect()).collect();
        Self::from_rows(cols, &rows).expect("ragged rows")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<RationalVector> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul_vec(&self, x: &[Rational]) -> Result<RationalVector> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} against {} columns",
                x.len(),
                self.cols
            )));
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), x)).collect())
    }
}

impl std::ops::Index<(usize, usize)> for RationalMatrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.entries[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RationalMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.entries[i * self.cols + j]
    }
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = Rational::zero();
    for (x, y) in a.iter().zip(b) {
        acc.add_mul(x, y);
    }
    acc
}

pub fn sub(a: &[Rational], b: &[Rational]) -> RationalVector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Incrementally maintained reduced row echelon basis of a row space.
///
/// Every stored row has a unit pivot and is zero in the pivot column of every
/// other row, so reducing a new vector only touches the rows whose pivots it hits.
#[derive(Clone, Debug)]
pub struct EchelonBasis {
    width: usize,
    rows: Vec<RationalVector>,
    pivots: Vec<usize>,
    pivot_row: Vec<Option<usize>>,
}

impl EchelonBasis {
    pub fn new(width: usize) -> Self {
        EchelonBasis { width, rows: Vec::new(), pivots: Vec::new(), pivot_row: vec![None; width] }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Residual of `v` modulo the current row space.
    pub fn reduce(&self, v: &[Rational]) -> RationalVector {
        assert_eq!(v.len(), self.width, "vector width");
        let mut w = v.to_vec();
        for (col, coeff) in v.iter().enumerate() {
            if coeff.is_zero() {
                continue;
            }
            if let Some(r) = self.pivot_row[col] {
                for (wj, rj) in w.iter_mut().zip(&self.rows[r]) {
                    wj.sub_mul(coeff, rj);
                }
            }
        }
        w
    }

    pub fn contains(&self, v: &[Rational]) -> bool {
        self.reduce(v).iter().all(Rational::is_zero)
    }

    /// Adds `v` to the spanning set; returns whether the rank increased.
    pub fn insert(&mut self, v: &[Rational]) -> bool {
        let mut w = self.reduce(v);
        let Some(q) = w.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = w[q].recip();
        for x in w.iter_mut() {
            if !x.is_zero() {
                *x *= &inv;
            }
        }
        for row in &mut self.rows {
            let f = row[q].clone();
            if f.is_zero() {
                continue;
            }
            for (rj, wj) in row.iter_mut().zip(&w) {
                rj.sub_mul(&f, wj);
            }
        }
        self.pivot_row[q] = Some(self.rows.len());
        self.pivots.push(q);
        self.rows.push(w);
        true
    }

    /// Rows sorted by pivot column, with their pivots.
    pub fn rref(&self) -> (Vec<RationalVector>, Vec<usize>) {
        let mut order: Vec<usize> = (0..self.rows.len()).collect();
        order.sort_by_key(|&i| self.pivots[i]);
        (
            order.iter().map(|&i| self.rows[i].clone()).collect(),
            order.iter().map(|&i| self.pivots[i]).collect(),
        )
    }

    /// Basis of the orthogonal complement `{x : row · x = 0 for every row}`.
    pub fn nullspace(&self) -> Vec<RationalVector> {
        let (rows, pivots) = self.rref();
        let mut is_pivot = vec![false; self.width];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        (0..self.width)
            .filter(|&f| !is_pivot[f])
            .map(|f| {
                let mut x = vec![Rational::zero(); self.width];
                x[f] = Rational::one();
                for (row, &p) in rows.iter().zip(&pivots) {
                    x[p] = -&row[f];
                }
                x
            })
            .collect()
    }
}

pub fn echelon(m: &RationalMatrix) -> EchelonBasis {
    let mut basis = EchelonBasis::new(m.cols());
    for i in 0..m.rows() {
        basis.insert(m.row(i));
    }
    basis
}

/// Exact rank by rational Gaussian elimination.
pub fn rank(m: &RationalMatrix) -> usize {
    echelon(m).rank()
}

pub fn rank_of_vectors(width: usize, vectors: &[RationalVector]) -> usize {
    let mut basis = EchelonBasis::new(width);
    for v in vectors {
        basis.insert(v);
    }
    basis.rank()
}

pub fn nullspace(m: &RationalMatrix) -> Vec<RationalVector> {
    echelon(m).nullspace()
}

/// Dimension of the affine hull: rank of `p_i - p_0`.
pub fn affine_dim(points: &[RationalVector]) -> Result<usize> {
    let first = points.first().ok_or(Error::EmptyInput("affine_dim needs at least one point"))?;
    let mut basis = EchelonBasis::new(first.len());
    for p in &points[1..] {
        if p.len() != first.len() {
            return Err(Error::DimensionMismatch("points of different lengths".into()));
        }
        basis.insert(&sub(p, first));
    }
    Ok(basis.rank())
}

pub fn determinant(m: &RationalMatrix) -> Result<Rational> {
    let n = m.rows();
    if n != m.cols() {
        return Err(Error::DimensionMismatch(format!("{}x{} is not square", n, m.cols())));
    }
    let mut a = m.row_vecs();
    let mut det = Rational::one();
    for k in 0..n {
        let Some(p) = (k..n).find(|&i| !a[i][k].is_zero()) else {
            return Ok(Rational::zero());
        };
        if p != k {
            a.swap(p, k);
            det = -det;
        }
        det *= &a[k][k];
        let inv = a[k][k].recip();
        for i in k + 1..n {
            if a[i][k].is_zero() {
                continue;
            }
            let f = &a[i][k] * &inv;
            let pivot_row = a[k].clone();
            for (x, y) in a[i][k..].iter_mut().zip(&pivot_row[k..]) {
                x.sub_mul(&f, y);
            }
        }
    }
    Ok(det)
}

/// Solves `a x = b` for square nonsingular `a`.
pub fn solve(a: &RationalMatrix, b: &[Rational]) -> Result<RationalVector> {
    let n = a.rows();
    if n != a.cols() || b.len() != n {
        return Err(Error::DimensionMismatch("solve needs a square system".into()));
    }
    let mut aug: Vec<RationalVector> = (0..n)
        .map(|i| {
            let mut r = a.row(i).to_vec();
            r.push(b[i].clone());
            r
        })
        .collect();
    for k in 0..n {
        let p = (k..n)
            .find(|&i| !aug[i][k].is_zero())
            .ok_or_else(|| Error::Degenerate("singular system".into()))?;
        aug.swap(p, k);
        let inv = aug[k][k].recip();
        for x in aug[k].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = aug[k].clone();
        for (i, row) in aug.iter_mut().enumerate() {
            if i == k || row[k].is_zero() {
                continue;
            }
            let f = row[k].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                x.sub_mul(&f, y);
            }
        }
    }
    Ok(aug.into_iter().map(|mut r| r.pop().unwrap()).collect())
}
