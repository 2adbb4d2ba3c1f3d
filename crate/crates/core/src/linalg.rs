//! Exact rational Gaussian elimination.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `num/den` in lowest terms with positive denominator; integers print bare.
pub fn format_rational(x: &Rational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(BigRational::new(n.trim().parse().ok()?, d))
        }
        None => Some(BigRational::from_integer(s.parse().ok()?)),
    }
}

/// Dense row-major matrix over the rationals.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

/// Solution of `A x = b` for one right-hand side.
#[derive(Debug, Clone, PartialEq)]
pub enum Solution {
    /// A solution (free variables set to zero).
    Exact(Vec<Rational>),
    /// No solution; `row` is a reduced equation `0 = residual`.
    Inconsistent { row: usize, residual: Rational },
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RationalMatrix { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        RationalMatrix { rows, cols, data }
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<Rational>]) -> Self {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        RationalMatrix::from_fn(rows, cols, |i, j| columns[j][i].clone())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        self.data[i * self.cols + j] = v;
    }

    pub fn mul_vec(&self, x: &[Rational]) -> Vec<Rational> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let mut acc = Rational::zero();
                for (j, xj) in x.iter().enumerate() {
                    let a = self.get(i, j);
                    if !a.is_zero() && !xj.is_zero() {
                        acc += a * xj;
                    }
                }
                acc
            })
            .collect()
    }

    pub fn rank(&self) -> usize {
        let mut rows: Vec<Vec<Rational>> =
            (0..self.rows).map(|i| self.data[i * self.cols..(i + 1) * self.cols].to_vec()).collect();
        eliminate(&mut rows, self.cols).len()
    }

    /// Solves `A x = b` for every right-hand side with one elimination pass.
    pub fn solve_many(&self, rhs: &[Vec<Rational>]) -> Vec<Solution> {
        let width = self.cols + rhs.len();
        let mut rows: Vec<Vec<Rational>> = (0..self.rows)
            .map(|i| {
                let mut row = Vec::with_capacity(width);
                row.extend_from_slice(&self.data[i * self.cols..(i + 1) * self.cols]);
                for b in rhs {
                    assert_eq!(b.len(), self.rows);
                    row.push(b[i].clone());
                }
                row
            })
            .collect();
        let pivots = eliminate(&mut rows, self.cols);
        (0..rhs.len())
            .map(|k| {
                let col = self.cols + k;
                if let Some(row) = (pivots.len()..self.rows).find(|&r| !rows[r][col].is_zero()) {
                    return Solution::Inconsistent { row, residual: rows[row][col].clone() };
                }
                let mut x = vec![Rational::zero(); self.cols];
                for (r, &pc) in pivots.iter().enumerate() {
                    x[pc] = rows[r][col].clone();
                }
                Solution::Exact(x)
            })
            .collect()
    }
}

/// Reduces `rows` to reduced row-echelon form, pivoting only within the first
/// `pivot_cols` columns. Returns the pivot column of each leading row.
fn eliminate(rows: &mut [Vec<Rational>], pivot_cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..pivot_cols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        if !inv.is_one() {
            for v in rows[r][c..].iter_mut() {
                if !v.is_zero() {
                    *v *= &inv;
                }
            }
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let factor = row[c].clone();
            for (v, pv) in row[c..].iter_mut().zip(&pivot_row[c..]) {
                if !pv.is_zero() {
                    *v -= &factor * pv;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).filter(|(x, y)| !x.is_zero() && !y.is_zero()).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_of_singular_matrix() {
        let m = RationalMatrix::from_fn(3, 3, |i, j| rat((i * 3 + j) as i64));
        assert_eq!(m.rank(), 2);
        let id = RationalMatrix::from_fn(4, 4, |i, j| rat((i == j) as i64));
        assert_eq!(id.rank(), 4);
    }

    #[test]
    fn solves_overdetermined_consistent_system() {
        // columns (1,1,0) and (0,1,1); b = 2*c0 - c1/3
        let a = RationalMatrix::from_columns(&[
            vec![rat(1), rat(1), rat(0)],
            vec![rat(0), rat(1), rat(1)],
        ]);
        let b = vec![rat(2), ratio(5, 3), ratio(-1, 3)];
        let bad = vec![rat(1), rat(0), rat(1)];
        let sols = a.solve_many(&[b.clone(), bad]);
        match &sols[0] {
            Solution::Exact(x) => {
                assert_eq!(x, &vec![rat(2), ratio(-1, 3)]);
                assert_eq!(a.mul_vec(x), b);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(sols[1], Solution::Inconsistent { .. }));
    }

    #[test]
    fn rational_formatting() {
        assert_eq!(format_rational(&ratio(2, -6)), "-1/3");
        assert_eq!(format_rational(&rat(4)), "4");
        assert_eq!(parse_rational("-1/3"), Some(ratio(-1, 3)));
        assert_eq!(parse_rational("1/0"), None);
    }
}
