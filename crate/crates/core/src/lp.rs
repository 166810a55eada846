//! Dense two-phase tableau simplex with Bland's rule.
//!
//! Every variable is nonnegative; the objective is maximized. Exact over
//! [`Rational`](crate::num::Rational); with `f64` all sign tests go through
//! [`Scalar::eps`].

use crate::num::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Constraint<T> {
    pub coeffs: Vec<T>,
    pub rel: Relation,
    pub rhs: T,
}

#[derive(Clone, Debug)]
pub struct LinearProgram<T> {
    pub n_vars: usize,
    pub objective: Vec<T>,
    pub constraints: Vec<Constraint<T>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome<T> {
    Optimal { x: Vec<T>, value: T },
    Infeasible,
    Unbounded,
}

impl<T: Scalar> LinearProgram<T> {
    pub fn new(n_vars: usize) -> Self {
        LinearProgram {
            n_vars,
            objective: vec![T::zero(); n_vars],
            constraints: Vec::new(),
        }
    }

    pub fn maximize(mut self, objective: Vec<T>) -> Self {
        assert_eq!(objective.len(), self.n_vars);
        self.objective = objective;
        self
    }

    pub fn constrain(&mut self, coeffs: Vec<T>, rel: Relation, rhs: T) {
        assert_eq!(coeffs.len(), self.n_vars);
        self.constraints.push(Constraint { coeffs, rel, rhs });
    }

    pub fn solve(&self) -> LpOutcome<T> {
        solve(self)
    }
}

struct Tableau<T> {
    rows: Vec<Vec<T>>,
    basis: Vec<usize>,
    width: usize,
}

impl<T: Scalar> Tableau<T> {
    fn rhs(&self, r: usize) -> &T {
        &self.rows[r][self.width]
    }

    fn pivot(&mut self, r: usize, c: usize, obj: &mut [T]) {
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v = v.clone() / p.clone();
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c].clone();
            if f.approx_zero() {
                continue;
            }
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v = v.clone() - f.clone() * pv.clone();
            }
            row[c] = T::zero();
        }
        let f = obj[c].clone();
        if !f.approx_zero() {
            for (v, pv) in obj.iter_mut().zip(&pivot_row) {
                *v = v.clone() - f.clone() * pv.clone();
            }
        }
        obj[c] = T::zero();
        self.basis[r] = c;
    }

    /// Reduced costs `c - c_B B^-1 A` for the current basis.
    fn price_out(&self, cost: &[T]) -> Vec<T> {
        let mut obj: Vec<T> = cost.to_vec();
        obj.push(T::zero());
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = cost[b].clone();
            if cb.approx_zero() {
                continue;
            }
            for (v, rv) in obj.iter_mut().zip(&self.rows[r]) {
                *v = v.clone() - cb.clone() * rv.clone();
            }
        }
        obj
    }

    /// Runs simplex iterations over the columns marked `allowed`. Returns
    /// `false` if the objective is unbounded.
    fn optimize(&mut self, obj: &mut [T], allowed: &[bool]) -> bool {
        loop {
            if log::log_enabled!(target: "csg_core::lp", log::Level::Trace) {
                self.dump(obj);
            }
            let entering = (0..self.width).find(|&j| allowed[j] && obj[j].is_pos());
            let Some(c) = entering else {
                return true;
            };
            let mut best: Option<(usize, T)> = None;
            for r in 0..self.rows.len() {
                let a = &self.rows[r][c];
                if !a.is_pos() {
                    continue;
                }
                let ratio = self.rhs(r).clone() / a.clone();
                let better = match &best {
                    None => true,
                    Some((br, bv)) => {
                        let diff = ratio.clone() - bv.clone();
                        diff.is_neg() || (diff.approx_zero() && self.basis[r] < self.basis[*br])
                    }
                };
                if better {
                    best = Some((r, ratio));
                }
            }
            match best {
                None => return false,
                Some((r, _)) => self.pivot(r, c, obj),
            }
        }
    }

    fn dump(&self, obj: &[T]) {
        let fmt_row = |row: &[T]| {
            row.iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        log::trace!(target: "csg_core::lp", "tableau basis={:?}", self.basis);
        for row in &self.rows {
            log::trace!(target: "csg_core::lp", "  {}", fmt_row(row));
        }
        log::trace!(target: "csg_core::lp", "  obj {}", fmt_row(obj));
    }
}

pub fn solve<T: Scalar>(lp: &LinearProgram<T>) -> LpOutcome<T> {
    let n = lp.n_vars;
    // Normalize to nonnegative right-hand sides.
    let rows: Vec<(Vec<T>, Relation, T)> = lp
        .constraints
        .iter()
        .map(|c| {
            if c.rhs.is_neg() {
                let rel = match c.rel {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                (c.coeffs.iter().map(|v| -v.clone()).collect(), rel, -c.rhs.clone())
            } else {
                (c.coeffs.clone(), c.rel, c.rhs.clone())
            }
        })
        .collect();

    let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let width = n + n_slack + n_art;
    let mut tab = Tableau {
        rows: Vec::with_capacity(rows.len()),
        basis: Vec::with_capacity(rows.len()),
        width,
    };
    let mut is_art = vec![false; width];
    let (mut next_slack, mut next_art) = (n, n + n_slack);
    for (coeffs, rel, rhs) in rows {
        let mut row = coeffs;
        row.resize(width + 1, T::zero());
        row[width] = rhs;
        match rel {
            Relation::Le => {
                row[next_slack] = T::one();
                tab.basis.push(next_slack);
                next_slack += 1;
            }
            Relation::Ge => {
                row[next_slack] = -T::one();
                next_slack += 1;
                row[next_art] = T::one();
                is_art[next_art] = true;
                tab.basis.push(next_art);
                next_art += 1;
            }
            Relation::Eq => {
                row[next_art] = T::one();
                is_art[next_art] = true;
                tab.basis.push(next_art);
                next_art += 1;
            }
        }
        tab.rows.push(row);
    }

    let all = vec![true; width];
    if n_art > 0 {
        let cost: Vec<T> = (0..width)
            .map(|j| if is_art[j] { -T::one() } else { T::zero() })
            .collect();
        let mut obj = tab.price_out(&cost);
        tab.optimize(&mut obj, &all);
        // obj[width] holds minus the objective value.
        if obj[width].is_pos() {
            return LpOutcome::Infeasible;
        }
        // Drive zero-level artificials out of the basis; drop redundant rows.
        let mut r = 0;
        while r < tab.rows.len() {
            if is_art[tab.basis[r]] {
                let col = (0..width).find(|&j| !is_art[j] && !tab.rows[r][j].approx_zero());
                match col {
                    Some(c) => {
                        let mut scratch = vec![T::zero(); width + 1];
                        tab.pivot(r, c, &mut scratch);
                    }
                    None => {
                        tab.rows.remove(r);
                        tab.basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
    }

    let mut cost = lp.objective.clone();
    cost.resize(width, T::zero());
    let mut obj = tab.price_out(&cost);
    let allowed: Vec<bool> = is_art.iter().map(|a| !a).collect();
    if !tab.optimize(&mut obj, &allowed) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![T::zero(); n];
    for (r, &b) in tab.basis.iter().enumerate() {
        if b < n {
            x[b] = tab.rhs(r).clone();
        }
    }
    let value = lp
        .objective
        .iter()
        .zip(&x)
        .fold(T::zero(), |acc, (c, v)| acc + c.clone() * v.clone());
    LpOutcome::Optimal { x, value }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{int, rat, Rational};

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18  ->  (2, 6), 36
        let mut lp = LinearProgram::<Rational>::new(2).maximize(vec![int(3), int(5)]);
        lp.constrain(vec![int(1), int(0)], Relation::Le, int(4));
        lp.constrain(vec![int(0), int(2)], Relation::Le, int(12));
        lp.constrain(vec![int(3), int(2)], Relation::Le, int(18));
        match lp.solve() {
            LpOutcome::Optimal { x, value } => {
                assert_eq!(x, vec![int(2), int(6)]);
                assert_eq!(value, int(36));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn equality_and_ge_rows_need_phase_one() {
        // max -x - y s.t. x + y = 1, x >= 1/3
        let mut lp = LinearProgram::<Rational>::new(2).maximize(vec![int(-1), int(-2)]);
        lp.constrain(vec![int(1), int(1)], Relation::Eq, int(1));
        lp.constrain(vec![int(1), int(0)], Relation::Ge, rat(1, 3));
        match lp.solve() {
            LpOutcome::Optimal { x, value } => {
                assert_eq!(x, vec![int(1), int(0)]);
                assert_eq!(value, int(-1));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut lp = LinearProgram::<Rational>::new(1).maximize(vec![int(1)]);
        lp.constrain(vec![int(1)], Relation::Le, int(1));
        lp.constrain(vec![int(1)], Relation::Ge, int(2));
        assert_eq!(lp.solve(), LpOutcome::Infeasible);

        let mut lp = LinearProgram::<Rational>::new(2).maximize(vec![int(1), int(0)]);
        lp.constrain(vec![int(-1), int(1)], Relation::Le, int(1));
        assert_eq!(lp.solve(), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_equalities_are_dropped() {
        let mut lp = LinearProgram::<Rational>::new(2).maximize(vec![int(1), int(0)]);
        lp.constrain(vec![int(1), int(1)], Relation::Eq, int(1));
        lp.constrain(vec![int(2), int(2)], Relation::Eq, int(2));
        match lp.solve() {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, int(1)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn float_path_agrees() {
        let mut lp = LinearProgram::<f64>::new(2).maximize(vec![3.0, 5.0]);
        lp.constrain(vec![1.0, 0.0], Relation::Le, 4.0);
        lp.constrain(vec![0.0, 2.0], Relation::Le, 12.0);
        lp.constrain(vec![3.0, 2.0], Relation::Le, 18.0);
        match lp.solve() {
            LpOutcome::Optimal { value, .. } => assert!((value - 36.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }
}
