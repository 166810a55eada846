//! Zero-sum matrix games: value plus maximin / minimax mixed strategies.
//!
//! The row player maximizes. After a saddle-point check, the row strategy
//! comes from `max t s.t. alpha^T M >= t, sum alpha = 1` and the column
//! strategy from the mirrored program, both on the matrix shifted to
//! nonnegative entries.

use crate::game::Distribution;
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::num::{Rational, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> T) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix games need at least one row and column");
        let data = (0..rows)
            .flat_map(|i| (0..cols).map(move |j| (i, j)))
            .map(|(i, j)| f(i, j))
            .collect();
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix");
        Matrix::from_fn(r, c, |i, j| rows[i][j].clone())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    fn min_entry(&self) -> T {
        self.data
            .iter()
            .skip(1)
            .fold(self.data[0].clone(), |m, v| m.min_of(v.clone()))
    }

    /// Expected payoff of `row_mix` against column `j`.
    pub fn column_payoff(&self, row_mix: &[T], j: usize) -> T {
        (0..self.rows).fold(T::zero(), |acc, i| acc + row_mix[i].clone() * self.get(i, j).clone())
    }

    /// Expected payoff of row `i` against `col_mix`.
    pub fn row_payoff(&self, i: usize, col_mix: &[T]) -> T {
        (0..self.cols).fold(T::zero(), |acc, j| acc + col_mix[j].clone() * self.get(i, j).clone())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixSolution<T> {
    pub value: T,
    /// Maximin mixed strategy over rows.
    pub row: Vec<T>,
    /// Minimax mixed strategy over columns.
    pub col: Vec<T>,
}

fn point<T: Scalar>(n: usize, k: usize) -> Vec<T> {
    (0..n).map(|i| if i == k { T::one() } else { T::zero() }).collect()
}

/// Pure saddle point `(row, col, value)`, lowest indices first.
fn saddle<T: Scalar>(m: &Matrix<T>) -> Option<(usize, usize, T)> {
    let row_min = |i: usize| (1..m.cols).fold(m.get(i, 0).clone(), |a, j| a.min_of(m.get(i, j).clone()));
    let col_max = |j: usize| (1..m.rows).fold(m.get(0, j).clone(), |a, i| a.max_of(m.get(i, j).clone()));
    let mins: Vec<T> = (0..m.rows).map(row_min).collect();
    let maxs: Vec<T> = (0..m.cols).map(col_max).collect();
    let lower = mins.iter().skip(1).fold(mins[0].clone(), |a, v| a.max_of(v.clone()));
    let upper = maxs.iter().skip(1).fold(maxs[0].clone(), |a, v| a.min_of(v.clone()));
    if !(upper.clone() - lower.clone()).approx_zero() {
        return None;
    }
    let i = mins.iter().position(|v| (v.clone() - lower.clone()).approx_zero())?;
    let j = maxs.iter().position(|v| (v.clone() - upper.clone()).approx_zero())?;
    Some((i, j, lower))
}

fn row_program<T: Scalar>(m: &Matrix<T>) -> (Vec<T>, T) {
    let shift = m.min_entry();
    let n = m.rows + 1;
    let mut obj = vec![T::zero(); n];
    obj[m.rows] = T::one();
    let mut lp = LinearProgram::new(n).maximize(obj);
    for j in 0..m.cols {
        let mut coeffs: Vec<T> = (0..m.rows)
            .map(|i| m.get(i, j).clone() - shift.clone())
            .collect();
        coeffs.push(-T::one());
        lp.constrain(coeffs, Relation::Ge, T::zero());
    }
    let mut simplex = vec![T::one(); m.rows];
    simplex.push(T::zero());
    lp.constrain(simplex, Relation::Eq, T::one());
    match lp.solve() {
        LpOutcome::Optimal { mut x, value } => {
            x.truncate(m.rows);
            (clean(x), value + shift)
        }
        other => unreachable!("matrix-game LP is always feasible and bounded: {other:?}"),
    }
}

fn col_program<T: Scalar>(m: &Matrix<T>) -> (Vec<T>, T) {
    let shift = m.min_entry();
    let n = m.cols + 1;
    let mut obj = vec![T::zero(); n];
    obj[m.cols] = -T::one();
    let mut lp = LinearProgram::new(n).maximize(obj);
    for i in 0..m.rows {
        let mut coeffs: Vec<T> = (0..m.cols)
            .map(|j| m.get(i, j).clone() - shift.clone())
            .collect();
        coeffs.push(-T::one());
        lp.constrain(coeffs, Relation::Le, T::zero());
    }
    let mut simplex = vec![T::one(); m.cols];
    simplex.push(T::zero());
    lp.constrain(simplex, Relation::Eq, T::one());
    match lp.solve() {
        LpOutcome::Optimal { mut x, value } => {
            x.truncate(m.cols);
            (clean(x), shift - value)
        }
        other => unreachable!("matrix-game LP is always feasible and bounded: {other:?}"),
    }
}

/// Drops float noise below tolerance and renormalizes; identity when exact.
fn clean<T: Scalar>(mut x: Vec<T>) -> Vec<T> {
    if T::EXACT {
        return x;
    }
    for v in x.iter_mut() {
        if !v.is_pos() {
            *v = T::zero();
        }
    }
    let total = x.iter().fold(T::zero(), |a, v| a + v.clone());
    x.into_iter().map(|v| v / total.clone()).collect()
}

pub fn solve<T: Scalar>(m: &Matrix<T>) -> MatrixSolution<T> {
    if let Some((i, j, value)) = saddle(m) {
        return MatrixSolution {
            value,
            row: point(m.rows, i),
            col: point(m.cols, j),
        };
    }
    let (row, value) = row_program(m);
    let (col, col_value) = col_program(m);
    debug_assert!(!T::EXACT || value == col_value, "duality gap in exact mode");
    let _ = col_value;
    MatrixSolution { value, row, col }
}

/// Value only; skips the column program.
pub fn value<T: Scalar>(m: &Matrix<T>) -> T {
    match saddle(m) {
        Some((_, _, v)) => v,
        None => row_program(m).1,
    }
}

/// Maximin row strategy and value; skips the column program.
pub fn maximin<T: Scalar>(m: &Matrix<T>) -> (Vec<T>, T) {
    match saddle(m) {
        Some((i, _, v)) => (point(m.rows, i), v),
        None => row_program(m),
    }
}

/// Minimax column strategy and value.
pub fn minimax<T: Scalar>(m: &Matrix<T>) -> (Vec<T>, T) {
    match saddle(m) {
        Some((_, j, v)) => (point(m.cols, j), v),
        None => col_program(m),
    }
}

/// Min's best reply to a fixed row mix: the least column payoff and the
/// lowest column attaining it.
pub fn best_response_value<T: Scalar>(m: &Matrix<T>, row_mix: &[T]) -> (T, usize) {
    assert_eq!(row_mix.len(), m.rows, "row mix has wrong length");
    let mut best = (m.column_payoff(row_mix, 0), 0);
    for j in 1..m.cols {
        let v = m.column_payoff(row_mix, j);
        if (v.clone() - best.0.clone()).is_neg() {
            best = (v, j);
        }
    }
    best
}

/// Dense weight vector to a [`Distribution`], dropping zeros.
pub fn to_distribution<T: Scalar>(weights: &[T]) -> Distribution {
    let d = Distribution::from_pairs(
        weights
            .iter()
            .enumerate()
            .filter(|(_, w)| w.is_pos())
            .map(|(i, w)| (i, w.to_rational())),
    );
    if T::EXACT {
        d
    } else {
        d.normalized()
    }
}

/// Dense weight vector of length `n` from a [`Distribution`].
pub fn to_weights<T: Scalar>(d: &Distribution, n: usize) -> Vec<T> {
    let mut w = vec![T::zero(); n];
    for (k, p) in d.iter() {
        w[k] = T::from_rational(p);
    }
    w
}

pub type RationalMatrix = Matrix<Rational>;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{int, rat};

    fn m(rows: &[&[Rational]]) -> Matrix<Rational> {
        Matrix::from_rows(rows.iter().map(|r| r.to_vec()).collect())
    }

    #[test]
    fn one_by_one() {
        let s = solve(&m(&[&[rat(2, 7)]]));
        assert_eq!(s.value, rat(2, 7));
        assert_eq!(s.row, vec![int(1)]);
        assert_eq!(s.col, vec![int(1)]);
    }

    #[test]
    fn matching_pennies_is_uniform() {
        let s = solve(&m(&[&[int(1), int(0)], &[int(0), int(1)]]));
        assert_eq!(s.value, rat(1, 2));
        assert_eq!(s.row, vec![rat(1, 2), rat(1, 2)]);
        assert_eq!(s.col, vec![rat(1, 2), rat(1, 2)]);
    }

    #[test]
    fn snowball_local_matrix_closed_form() {
        // [[v, 1], [1, 0]] has value 1 / (2 - v).
        let v = rat(2, 3);
        let s = solve(&m(&[&[v.clone(), int(1)], &[int(1), int(0)]]));
        assert_eq!(s.value, rat(3, 4));
        assert_eq!(s.row, vec![rat(3, 4), rat(1, 4)]);
    }

    #[test]
    fn saddle_point_shortcut() {
        let s = solve(&m(&[&[int(3), int(1)], &[int(4), int(2)]]));
        assert_eq!(s.value, int(2));
        assert_eq!(s.row, vec![int(0), int(1)]);
        assert_eq!(s.col, vec![int(0), int(1)]);
    }

    #[test]
    fn best_response_ties_go_to_lowest_column() {
        let mat = m(&[&[int(1), int(0)], &[int(0), int(1)]]);
        let (v, j) = best_response_value(&mat, &[rat(1, 2), rat(1, 2)]);
        assert_eq!((v, j), (rat(1, 2), 0));
        let eps = rat(1, 10);
        let snow = m(&[&[int(0), int(1)], &[int(1), int(0)]]);
        let (v, j) = best_response_value(&snow, &[int(1) - &eps, eps.clone()]);
        assert_eq!((v, j), (rat(1, 10), 0));
        let (v, _) = best_response_value(&snow, &[int(1), int(0)]);
        assert_eq!(v, int(0));
    }

    #[test]
    fn float_solution_close_to_exact() {
        let s = solve(&Matrix::from_rows(vec![vec![2.0 / 3.0, 1.0], vec![1.0, 0.0]]));
        assert!((s.value - 0.75).abs() < 1e-12);
        assert!((s.row[0] - 0.75).abs() < 1e-12);
    }
}
