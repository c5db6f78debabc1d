use super::matrix::{orthonormalize, ComplexMatrix, C64, ONE, ZERO};

/// Kernel basis together with the pivot diagnostics of the elimination.
#[derive(Debug, Clone)]
pub struct NullSpace {
    /// Orthonormal kernel basis.
    pub basis: Vec<Vec<C64>>,
    /// Absolute pivot threshold used (`tol · |M|_F`).
    pub threshold: f64,
    /// Smallest pivot magnitude that was accepted, if any pivot was.
    pub min_pivot: Option<f64>,
}

impl NullSpace {
    /// True when an accepted pivot sat within 10x of the rejection threshold,
    /// i.e. the rank decision is fragile.
    pub fn marginal(&self) -> bool {
        matches!(self.min_pivot, Some(p) if p < 10.0 * self.threshold)
    }
}

/// Orthonormal basis of `{v : |Mv| <= tol |M|_F |v|}`.
pub fn null_space(m: &ComplexMatrix, tol: f64) -> Vec<Vec<C64>> {
    null_space_detailed(m, tol).basis
}

/// Reduced row echelon form with partial pivoting. Columns whose best
/// remaining pivot falls below `tol · |M|_F` are free.
pub fn null_space_detailed(m: &ComplexMatrix, tol: f64) -> NullSpace {
    null_space_scaled(m, tol, m.frobenius_norm())
}

/// As [`null_space_detailed`] with pivot threshold `tol · scale`. Useful when
/// `M` is a difference whose own norm is at rounding level.
pub fn null_space_scaled(m: &ComplexMatrix, tol: f64, scale: f64) -> NullSpace {
    let d = m.dim();
    let threshold = tol * scale;
    let mut a: Vec<Vec<C64>> = m.rows();
    let mut pivot_cols: Vec<usize> = Vec::new();
    let mut free_cols: Vec<usize> = Vec::new();
    let mut min_pivot: Option<f64> = None;
    let mut row = 0;

    for col in 0..d {
        if row == d {
            free_cols.push(col);
            continue;
        }
        let (best, mag) = (row..d)
            .map(|r| (r, a[r][col].norm()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .expect("non-empty row range");
        if mag <= threshold || mag == 0.0 {
            free_cols.push(col);
            continue;
        }
        a.swap(row, best);
        min_pivot = Some(min_pivot.map_or(mag, |p: f64| p.min(mag)));
        let inv = ONE / a[row][col];
        for z in a[row].iter_mut() {
            *z *= inv;
        }
        for r in 0..d {
            if r == row {
                continue;
            }
            let f = a[r][col];
            if f == ZERO {
                continue;
            }
            for c in 0..d {
                let delta = f * a[row][c];
                a[r][c] -= delta;
            }
        }
        pivot_cols.push(col);
        row += 1;
    }

    let raw: Vec<Vec<C64>> = free_cols
        .iter()
        .map(|&f| {
            let mut v = vec![ZERO; d];
            v[f] = ONE;
            for (r, &pc) in pivot_cols.iter().enumerate() {
                v[pc] = -a[r][f];
            }
            v
        })
        .collect();

    NullSpace {
        basis: orthonormalize(&raw, 1e-12),
        threshold,
        min_pivot,
    }
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
/// Returns `None` when a pivot vanishes exactly.
pub fn solve_linear(a: &ComplexMatrix, b: &[C64]) -> Option<Vec<C64>> {
    let d = a.dim();
    let mut m: Vec<Vec<C64>> = a.rows();
    let mut x = b.to_vec();
    for col in 0..d {
        let best = (col..d).max_by(|&p, &q| m[p][col].norm().total_cmp(&m[q][col].norm()))?;
        if m[best][col] == ZERO {
            return None;
        }
        m.swap(col, best);
        x.swap(col, best);
        for r in col + 1..d {
            let f = m[r][col] / m[col][col];
            if f == ZERO {
                continue;
            }
            for c in col..d {
                let delta = f * m[col][c];
                m[r][c] -= delta;
            }
            let delta = f * x[col];
            x[r] -= delta;
        }
    }
    for col in (0..d).rev() {
        let mut s = x[col];
        for c in col + 1..d {
            s -= m[col][c] * x[c];
        }
        x[col] = s / m[col][col];
    }
    if x.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Some(x)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::norm;

    #[test]
    fn zero_matrix_has_full_kernel() {
        assert_eq!(null_space(&ComplexMatrix::zeros(2), 1e-10).len(), 2);
    }

    #[test]
    fn identity_has_trivial_kernel() {
        assert!(null_space(&ComplexMatrix::identity(2), 1e-10).is_empty());
    }

    #[test]
    fn rank_one_kernel_vectors_are_annihilated() {
        let m = ComplexMatrix::from_real_rows(&[&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0], &[0.0, 1.0, 1.0]])
            .unwrap();
        let ns = null_space(&m, 1e-10);
        assert_eq!(ns.len(), 1);
        let r = norm(&m.apply(&ns[0]));
        assert!(r <= 1e-8 * m.frobenius_norm(), "residual {r}");
    }

    #[test]
    fn solve_recovers_solution() {
        let a = ComplexMatrix::new(
            2,
            vec![C64::new(2.0, 1.0), C64::new(0.0, 1.0), C64::new(1.0, 0.0), C64::new(3.0, -1.0)],
        )
        .unwrap();
        let x = vec![C64::new(1.0, -2.0), C64::new(0.5, 0.5)];
        let b = a.apply(&x);
        let y = solve_linear(&a, &b).unwrap();
        for (p, q) in x.iter().zip(&y) {
            assert!((p - q).norm() < 1e-14);
        }
    }
}
