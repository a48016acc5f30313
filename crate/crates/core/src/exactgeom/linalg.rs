//! Exact Gaussian elimination over the rationals.

use num::{One, Zero};

use super::rational::{dot, sub, Point, Rational};

/// Reduced row echelon form. `rows` are the nonzero rows, `pivots[i]` is the
/// pivot column of `rows[i]` (strictly increasing).
#[derive(Clone, Debug, PartialEq)]
pub struct Rref {
    pub ncols: usize,
    pub rows: Vec<Point>,
    pub pivots: Vec<usize>,
}

impl Rref {
    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// True if `v` lies in the row space.
    pub fn contains(&self, v: &[Rational]) -> bool {
        let mut r = v.to_vec();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if !r[p].is_zero() {
                let f = r[p].clone();
                for (x, y) in r.iter_mut().zip(row) {
                    *x -= &f * y;
                }
            }
        }
        r.iter().all(Zero::is_zero)
    }
}

pub fn rref(m: &[Point], ncols: usize) -> Rref {
    let mut a: Vec<Point> = m.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == a.len() {
            break;
        }
        let Some(p) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = Rational::one() / &a[r][c];
        for x in a[r].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    a.truncate(r);
    Rref { ncols, rows: a, pivots }
}

pub fn rank(m: &[Point], ncols: usize) -> usize {
    rref(m, ncols).rank()
}

/// Basis of {x : m x = 0}, one vector per free column (free entry 1).
pub fn nullspace(m: &[Point], ncols: usize) -> Vec<Point> {
    let r = rref(m, ncols);
    let mut out = Vec::new();
    for f in (0..ncols).filter(|c| !r.pivots.contains(c)) {
        let mut v = vec![Rational::zero(); ncols];
        v[f] = Rational::one();
        for (row, &p) in r.rows.iter().zip(&r.pivots) {
            v[p] = -row[f].clone();
        }
        out.push(v);
    }
    out
}

/// One solution of m x = rhs with all free variables set to zero.
pub fn solve(m: &[Point], rhs: &[Rational], ncols: usize) -> Option<Point> {
    let aug: Vec<Point> = m
        .iter()
        .zip(rhs)
        .map(|(row, b)| {
            let mut r = row.clone();
            r.push(b.clone());
            r
        })
        .collect();
    let r = rref(&aug, ncols + 1);
    if r.pivots.last() == Some(&ncols) {
        return None;
    }
    let mut x = vec![Rational::zero(); ncols];
    for (row, &p) in r.rows.iter().zip(&r.pivots) {
        x[p] = row[ncols].clone();
    }
    Some(x)
}

pub fn det(m: &[Point]) -> Rational {
    let n = m.len();
    let mut a = m.to_vec();
    let mut d = Rational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return Rational::zero();
        };
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        d *= &a[c][c];
        let piv = a[c].clone();
        for row in a.iter_mut().skip(c + 1) {
            if !row[c].is_zero() {
                let f = &row[c] / &piv[c];
                for (x, y) in row.iter_mut().zip(&piv) {
                    *x -= &f * y;
                }
            }
        }
    }
    d
}

/// Affine hull of a nonempty point set, described by a base point and the
/// RREF of the difference vectors.
#[derive(Clone, Debug)]
pub struct AffineHull {
    pub base: Point,
    pub dirs: Rref,
}

impl AffineHull {
    pub fn of(points: &[Point]) -> AffineHull {
        let base = points[0].clone();
        let n = base.len();
        let diffs: Vec<Point> = points[1..].iter().map(|p| sub(p, &base)).collect();
        AffineHull { base, dirs: rref(&diffs, n) }
    }

    pub fn dim(&self) -> usize {
        self.dirs.rank()
    }

    /// Pivot coordinates; injective on the affine hull.
    pub fn reduce(&self, p: &[Rational]) -> Point {
        self.dirs.pivots.iter().map(|&i| p[i].clone()).collect()
    }

    pub fn contains(&self, p: &[Rational]) -> bool {
        self.dirs.contains(&sub(p, &self.base))
    }

    /// Lifts a functional on reduced coordinates to an ambient functional that
    /// agrees with it on the affine hull.
    pub fn lift_functional(&self, f: &[Rational]) -> Point {
        let mut out = vec![Rational::zero(); self.base.len()];
        for (j, &p) in self.dirs.pivots.iter().enumerate() {
            out[p] = f[j].clone();
        }
        out
    }
}

/// Indices of a maximal affinely independent subset (greedy, in order).
pub fn affinely_independent_subset(points: &[Point], idx: &[usize]) -> Vec<usize> {
    if idx.is_empty() {
        return Vec::new();
    }
    let base = &points[idx[0]];
    let n = base.len();
    let mut chosen = vec![idx[0]];
    let mut rows: Vec<Point> = Vec::new();
    for &i in &idx[1..] {
        let d = sub(&points[i], base);
        let mut trial = rows.clone();
        trial.push(d);
        if rank(&trial, n) > rows.len() {
            rows = trial;
            chosen.push(i);
        }
    }
    chosen
}

pub fn mat_vec(m: &[Point], v: &[Rational]) -> Point {
    m.iter().map(|row| dot(row, v)).collect()
}
