//! Small exact linear algebra over the rationals.

use num_rational::BigRational;
use num_traits::{One, Zero};

pub type Vector = Vec<BigRational>;

/// Row-echelon basis grown one vector at a time. Every stored row has a
/// unit pivot and zeros before it; rows are kept sorted by pivot.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    rows: Vec<(usize, Vector)>,
}

impl Echelon {
    pub fn new() -> Self {
        Echelon { rows: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// `v` minus its projection onto the current span along pivots.
    pub fn residual(&self, v: &[BigRational]) -> Vector {
        let mut v = v.to_vec();
        for (p, row) in &self.rows {
            if !v[*p].is_zero() {
                let f = v[*p].clone();
                for (x, y) in v.iter_mut().zip(row).skip(*p) {
                    *x -= &f * y;
                }
            }
        }
        v
    }

    pub fn contains(&self, v: &[BigRational]) -> bool {
        self.residual(v).iter().all(Zero::is_zero)
    }

    /// Adds `v` and returns whether it was independent of the span.
    pub fn insert(&mut self, v: &[BigRational]) -> bool {
        let mut r = self.residual(v);
        let Some(p) = r.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = r[p].recip();
        for x in r.iter_mut() {
            *x *= &inv;
        }
        let at = self.rows.partition_point(|(q, _)| *q < p);
        self.rows.insert(at, (p, r));
        true
    }
}

pub fn rank(vectors: &[Vector]) -> usize {
    let mut e = Echelon::new();
    vectors.iter().filter(|v| e.insert(v)).count()
}

/// Reduced row echelon form in place; returns pivot columns.
fn rref(m: &mut [Vector]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                let pivot_row = m[r].clone();
                for (x, y) in m[i].iter_mut().zip(&pivot_row) {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Coefficients `a` with `sum_j a_j columns[j] = target`, if any. The
/// columns must be independent for the answer to be unique.
pub fn solve(columns: &[Vector], target: &[BigRational]) -> Option<Vector> {
    let n = columns.len();
    let dim = target.len();
    let mut m: Vec<Vector> = (0..dim)
        .map(|i| columns.iter().map(|c| c[i].clone()).chain(std::iter::once(target[i].clone())).collect())
        .collect();
    let pivots = rref(&mut m);
    if pivots.contains(&n) {
        return None;
    }
    let mut x = vec![BigRational::zero(); n];
    for (row, &c) in pivots.iter().enumerate() {
        x[c] = m[row][n].clone();
    }
    Some(x)
}

/// A nonzero `c` with `sum_j c_j columns[j] = 0`, if the columns are dependent.
pub fn kernel_vector(columns: &[Vector]) -> Option<Vector> {
    let n = columns.len();
    let dim = columns.first().map_or(0, Vec::len);
    let mut m: Vec<Vector> = (0..dim).map(|i| columns.iter().map(|c| c[i].clone()).collect()).collect();
    let pivots = rref(&mut m);
    let free = (0..n).find(|c| !pivots.contains(c))?;
    let mut x = vec![BigRational::zero(); n];
    x[free] = BigRational::one();
    for (row, &c) in pivots.iter().enumerate() {
        x[c] = -m[row][free].clone();
    }
    Some(x)
}

/// Determinant of a square matrix given by rows.
pub fn det(rows: &[Vector]) -> BigRational {
    let n = rows.len();
    let mut m = rows.to_vec();
    let mut d = BigRational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !m[i][c].is_zero()) else {
            return BigRational::zero();
        };
        if p != c {
            m.swap(p, c);
            d = -d;
        }
        d *= &m[c][c];
        let inv = m[c][c].recip();
        for i in c + 1..n {
            if !m[i][c].is_zero() {
                let f = &m[i][c] * &inv;
                let pivot_row = m[c].clone();
                for (x, y) in m[i].iter_mut().zip(&pivot_row).skip(c) {
                    *x -= &f * y;
                }
            }
        }
    }
    d
}
