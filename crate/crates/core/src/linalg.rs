use crate::num::Scalar;

/// Solves `a x = b` by Gaussian elimination. Returns `None` when `a` is
/// singular (to within [`Scalar::eps`] for floats).
pub fn solve<T: Scalar>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Option<Vec<T>> {
    let n = b.len();
    assert!(a.len() == n && a.iter().all(|r| r.len() == n), "square system expected");
    for col in 0..n {
        let pivot = if T::EXACT {
            (col..n).find(|&r| !a[r][col].approx_zero())
        } else {
            (col..n)
                .filter(|&r| !a[r][col].approx_zero())
                .max_by(|&x, &y| a[x][col].magnitude().partial_cmp(&a[y][col].magnitude()).unwrap())
        }?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let p = a[col][col].clone();
        for r in 0..n {
            if r == col || a[r][col].approx_zero() {
                continue;
            }
            let f = a[r][col].clone() / p.clone();
            let pivot_row = a[col].clone();
            for (c, x) in a[r].iter_mut().enumerate().skip(col) {
                *x = x.clone() - f.clone() * pivot_row[c].clone();
            }
            b[r] = b[r].clone() - f * b[col].clone();
        }
    }
    Some((0..n).map(|i| b[i].clone() / a[i][i].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{int, rat};

    #[test]
    fn solves_small_exact_system() {
        let a = vec![vec![int(2), int(1)], vec![int(1), int(3)]];
        let x = solve(a, vec![int(3), int(5)]).unwrap();
        assert_eq!(x, vec![rat(4, 5), rat(7, 5)]);
    }

    #[test]
    fn needs_row_swap() {
        let a = vec![vec![int(0), int(1)], vec![int(1), int(0)]];
        assert_eq!(solve(a, vec![int(2), int(3)]).unwrap(), vec![int(3), int(2)]);
    }

    #[test]
    fn singular_is_none() {
        let a = vec![vec![int(1), int(2)], vec![int(2), int(4)]];
        assert!(solve(a, vec![int(1), int(2)]).is_none());
    }
}
