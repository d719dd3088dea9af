//! Exact rank, left nullspace and span solving over the rationals.
//!
//! Everything runs on integer rows through Bareiss fraction-free elimination:
//! after step `r` each entry is an `(r+1)`-minor of the scaled input, so the
//! division by the previous pivot is always exact and entry size stays
//! polynomial. Pivots are chosen as the leftmost column with a nonzero entry,
//! taking the smallest row index holding one.
//!
//! Rows are treated as vectors throughout: [`nullspace`] returns the
//! coefficient vectors `c` with `Σ c_k · row_k = 0`, and [`solve_in_span`]
//! expresses a target as a combination of rows.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::rational::{self, Rational};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Rational>,
}

impl RationalMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Rational>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::WrongLength {
                expected: rows * cols,
                found: entries.len(),
            });
        }
        Ok(RationalMatrix {
            rows,
            cols,
            entries,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        RationalMatrix {
            rows,
            cols,
            entries: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = Rational::one();
        }
        m
    }

    /// Stacks equal-length rows.
    pub fn from_rows(rows: &[Vec<Rational>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        for r in rows {
            if r.len() != cols {
                return Err(Error::WrongLength {
                    expected: cols,
                    found: r.len(),
                });
            }
        }
        Self::new(rows.len(), cols, rows.iter().flatten().cloned().collect())
    }

    pub fn from_int_rows(rows: &[&[i64]]) -> Self {
        let rows: Vec<Vec<Rational>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| rational::int(x)).collect())
            .collect();
        Self::from_rows(&rows).expect("rectangular")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.entries[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[Rational] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    pub fn transpose(&self) -> Self {
        let mut entries = Vec::with_capacity(self.entries.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                entries.push(self.get(r, c).clone());
            }
        }
        RationalMatrix {
            rows: self.cols,
            cols: self.rows,
            entries,
        }
    }

    /// `c · self`, treating `c` as a row vector.
    pub fn left_mul(&self, c: &[Rational]) -> Result<Vec<Rational>> {
        if c.len() != self.rows {
            return Err(Error::WrongLength {
                expected: self.rows,
                found: c.len(),
            });
        }
        let mut out = vec![Rational::zero(); self.cols];
        for (r, coeff) in c.iter().enumerate() {
            if coeff.is_zero() {
                continue;
            }
            for (o, x) in out.iter_mut().zip(self.row(r)) {
                if !x.is_zero() {
                    *o += coeff * x;
                }
            }
        }
        Ok(out)
    }

    /// Serializable form using the repo-wide rational strings.
    pub fn to_json(&self) -> MatrixJson {
        MatrixJson {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(rational::format).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<String>,
}

/// Scales a rational vector to integers by the lcm of its denominators.
fn integer_row<'a>(values: impl IntoIterator<Item = &'a Rational> + Clone) -> Vec<BigInt> {
    let lcm = rational::common_denominator(values.clone());
    values
        .into_iter()
        .map(|r| r.numer() * (&lcm / r.denom()))
        .collect()
}

/// Drops zero rows and repeated rows; neither affects rank or solution sets.
fn prune_rows(rows: Vec<Vec<BigInt>>) -> Vec<Vec<BigInt>> {
    let mut seen = HashSet::new();
    rows.into_iter()
        .filter(|r| r.iter().any(|x| !x.is_zero()))
        .filter(|r| seen.insert(r.clone()))
        .collect()
}

/// Row echelon form from fraction-free elimination. The first
/// `pivots.len()` rows are the nonzero echelon rows.
struct Echelon {
    rows: Vec<Vec<BigInt>>,
    pivots: Vec<usize>,
}

fn bareiss(mut m: Vec<Vec<BigInt>>, cols: usize) -> Echelon {
    let nrows = m.len();
    let mut pivots = Vec::new();
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..cols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let (top, bottom) = m.split_at_mut(r + 1);
        let pivot_row = &top[r];
        let pivot = &pivot_row[c];
        let unit_step = *pivot == prev;
        for row in bottom.iter_mut() {
            let factor = std::mem::take(&mut row[c]);
            if factor.is_zero() {
                if unit_step {
                    continue;
                }
                for x in row[c + 1..].iter_mut() {
                    if !x.is_zero() {
                        *x = exact_div(&(pivot * &*x), &prev);
                    }
                }
                continue;
            }
            for (x, y) in row[c + 1..].iter_mut().zip(&pivot_row[c + 1..]) {
                let mut v = pivot * &*x;
                if !y.is_zero() {
                    v -= &factor * y;
                }
                *x = exact_div(&v, &prev);
            }
        }
        prev = m[r][c].clone();
        pivots.push(c);
        r += 1;
    }
    Echelon { rows: m, pivots }
}

fn exact_div(a: &BigInt, b: &BigInt) -> BigInt {
    if b.is_one() {
        return a.clone();
    }
    let (q, rem) = a.div_rem(b);
    debug_assert!(rem.is_zero(), "Bareiss division must be exact");
    q
}

/// Back-substitutes an echelon system with the given free-variable values.
/// `rhs[r]` is the right-hand side of echelon row `r`.
fn back_substitute(
    echelon: &Echelon,
    nvars: usize,
    free_values: &[(usize, Rational)],
    rhs: Option<&[BigInt]>,
) -> Vec<Rational> {
    let mut x = vec![Rational::zero(); nvars];
    for (v, val) in free_values {
        x[*v] = val.clone();
    }
    for (r, &pc) in echelon.pivots.iter().enumerate().rev() {
        let row = &echelon.rows[r];
        let mut acc = match rhs {
            Some(b) => Rational::from_integer(b[r].clone()),
            None => Rational::zero(),
        };
        for j in pc + 1..nvars {
            if !row[j].is_zero() && !x[j].is_zero() {
                acc -= &x[j] * Rational::from_integer(row[j].clone());
            }
        }
        x[pc] = acc / Rational::from_integer(row[pc].clone());
    }
    x
}

pub fn rank(m: &RationalMatrix) -> usize {
    // rank(M) = rank(Mᵀ); eliminate whichever orientation has fewer distinct rows
    let by_rows = prune_rows((0..m.rows).map(|r| integer_row(m.row(r))).collect());
    let t = m.transpose();
    let by_cols = prune_rows((0..t.rows).map(|r| integer_row(t.row(r))).collect());
    let (rows, width) = if by_cols.len() < by_rows.len() {
        (by_cols, m.rows)
    } else {
        (by_rows, m.cols)
    };
    bareiss(rows, width).pivots.len()
}

/// Basis of `{c : Σ c_k · row_k = 0}`, one vector per non-pivot row, each
/// scaled to coprime integers with a positive leading entry.
pub fn nullspace(m: &RationalMatrix) -> Vec<Vec<Rational>> {
    // equations are the columns of m; unknowns are the row coefficients
    let t = m.transpose();
    let equations = prune_rows((0..t.rows).map(|r| integer_row(t.row(r))).collect());
    let echelon = bareiss(equations, m.rows);
    let pivot_set: HashSet<usize> = echelon.pivots.iter().copied().collect();
    (0..m.rows)
        .filter(|v| !pivot_set.contains(v))
        .map(|free| {
            let x = back_substitute(&echelon, m.rows, &[(free, Rational::one())], None);
            let mut ints = integer_row(&x);
            rational::normalize_integer_vector(&mut ints);
            ints.into_iter().map(Rational::from_integer).collect()
        })
        .collect()
}

/// Coefficients `c` with `Σ c_k · basis_row_k = target`, or `None` when the
/// target is outside the row span. Free coefficients are set to zero, so the
/// answer is unique whenever the rows are independent.
pub fn solve_in_span(
    target: &[Rational],
    basis_rows: &RationalMatrix,
) -> Result<Option<Vec<Rational>>> {
    if target.len() != basis_rows.cols {
        return Err(Error::WrongLength {
            expected: basis_rows.cols,
            found: target.len(),
        });
    }
    let n = basis_rows.rows;
    // augmented equation per column: [basis_col | target_entry]
    let mut equations = Vec::with_capacity(basis_rows.cols);
    for (c, value) in target.iter().enumerate() {
        let mut eq: Vec<Rational> = (0..n).map(|r| basis_rows.get(r, c).clone()).collect();
        eq.push(value.clone());
        equations.push(integer_row(&eq));
    }
    let echelon = bareiss(prune_rows(equations), n + 1);
    if echelon.pivots.last() == Some(&n) {
        return Ok(None);
    }
    let rhs: Vec<BigInt> = echelon.rows.iter().map(|r| r[n].clone()).collect();
    Ok(Some(back_substitute(&echelon, n, &[], Some(&rhs))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};
    use proptest::prelude::*;

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&RationalMatrix::identity(5)), 5);
        assert_eq!(rank(&RationalMatrix::zeros(4, 7)), 0);
        let m = RationalMatrix::from_int_rows(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        assert_eq!(rank(&m), 2);
    }

    #[test]
    fn rank_with_fractions_and_skipped_columns() {
        let m = RationalMatrix::from_rows(&[
            vec![int(0), frac(1, 2), int(0), int(1)],
            vec![int(0), frac(1, 3), int(0), frac(2, 3)],
            vec![int(0), int(1), int(0), int(2)],
            vec![int(0), int(0), int(0), int(5)],
        ])
        .unwrap();
        assert_eq!(rank(&m), 2);
    }

    #[test]
    fn nullspace_examples() {
        assert!(nullspace(&RationalMatrix::identity(4)).is_empty());
        let m = RationalMatrix::from_int_rows(&[&[3, 1, 4], &[3, 1, 4]]);
        assert_eq!(nullspace(&m), vec![vec![int(1), int(-1)]]);
    }

    #[test]
    fn nullspace_is_normalized() {
        let m = RationalMatrix::from_rows(&[
            vec![frac(1, 2), int(1)],
            vec![int(1), int(2)],
            vec![frac(3, 2), int(3)],
        ])
        .unwrap();
        let ns = nullspace(&m);
        assert_eq!(
            ns,
            vec![vec![int(2), int(-1), int(0)], vec![int(3), int(0), int(-1)]]
        );
    }

    #[test]
    fn solve_examples() {
        let b = RationalMatrix::from_int_rows(&[&[1, 0, 2], &[0, 1, 1]]);
        let first: Vec<Rational> = b.row(0).to_vec();
        assert_eq!(
            solve_in_span(&first, &b).unwrap(),
            Some(vec![int(1), int(0)])
        );
        let zero = vec![int(0); 3];
        assert_eq!(
            solve_in_span(&zero, &b).unwrap(),
            Some(vec![int(0), int(0)])
        );
        let combo = vec![frac(1, 2), int(-3), int(-2)];
        assert_eq!(
            solve_in_span(&combo, &b).unwrap(),
            Some(vec![frac(1, 2), int(-3)])
        );
        let outside = vec![int(0), int(0), int(1)];
        assert_eq!(solve_in_span(&outside, &b).unwrap(), None);
        assert!(solve_in_span(&[int(1)], &b).is_err());
    }

    fn small_matrix() -> impl Strategy<Value = RationalMatrix> {
        (1usize..6, 1usize..6).prop_flat_map(|(r, c)| {
            proptest::collection::vec((-3i64..=3, 1i64..=3), r * c).prop_map(move |v| {
                RationalMatrix::new(r, c, v.into_iter().map(|(p, q)| frac(p, q)).collect()).unwrap()
            })
        })
    }

    fn low_rank_matrix() -> impl Strategy<Value = RationalMatrix> {
        (small_matrix(), proptest::collection::vec(-2i64..=2, 0..4)).prop_map(|(m, mix)| {
            // append combinations of existing rows to force dependencies
            let mut rows: Vec<Vec<Rational>> = (0..m.rows()).map(|r| m.row(r).to_vec()).collect();
            for (n, k) in mix.iter().enumerate() {
                let a = &rows[n % m.rows()];
                let b = &rows[(n + 1) % m.rows()];
                let new: Vec<Rational> = a.iter().zip(b).map(|(x, y)| x + y * int(*k)).collect();
                rows.push(new);
            }
            RationalMatrix::from_rows(&rows).unwrap()
        })
    }

    proptest! {
        #[test]
        fn rank_is_transpose_invariant(m in small_matrix()) {
            prop_assert_eq!(rank(&m), rank(&m.transpose()));
        }

        #[test]
        fn nullspace_vectors_annihilate_rows(m in low_rank_matrix()) {
            let ns = nullspace(&m);
            prop_assert_eq!(ns.len() + rank(&m), m.rows());
            for v in &ns {
                prop_assert!(m.left_mul(v).unwrap().iter().all(Zero::is_zero));
                prop_assert!(v.iter().all(|x| x.is_integer()));
            }
        }

        #[test]
        fn solve_recovers_combinations(m in small_matrix(), coeffs in proptest::collection::vec(-4i64..=4, 5)) {
            let c: Vec<Rational> = coeffs.iter().take(m.rows()).map(|&x| int(x)).chain(std::iter::repeat(int(0))).take(m.rows()).collect();
            let target = m.left_mul(&c).unwrap();
            let sol = solve_in_span(&target, &m).unwrap().expect("in span");
            prop_assert_eq!(m.left_mul(&sol).unwrap(), target);
        }
    }
}
