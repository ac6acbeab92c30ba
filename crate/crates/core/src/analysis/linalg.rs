//! Dense solves for the tiny normal-equation systems of the fitters.

/// Solves `a · x = b` by Gaussian elimination with partial pivoting.
/// `None` when `a` is numerically singular.
pub(crate) fn solve<const N: usize>(mut a: [[f64; N]; N], mut b: [f64; N]) -> Option<[f64; N]> {
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return None;
    }
    for col in 0..N {
        let piv = (col..N).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= 1e-14 * scale {
            return None;
        }
        a.swap(piv, col);
        b.swap(piv, col);
        for r in col + 1..N {
            let f = a[r][col] / a[col][col];
            for k in col..N {
                a[r][k] -= f * a[col][k];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; N];
    for r in (0..N).rev() {
        let s: f64 = (r + 1..N).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Diagonal of `a⁻¹`, or `None` if singular.
pub(crate) fn inverse_diagonal<const N: usize>(a: [[f64; N]; N]) -> Option<[f64; N]> {
    let mut out = [0.0; N];
    for (k, o) in out.iter_mut().enumerate() {
        let mut e = [0.0; N];
        e[k] = 1.0;
        *o = solve(a, e)?[k];
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_three_by_three() {
        let a = [[2.0, 1.0, -1.0], [-3.0, -1.0, 2.0], [-2.0, 1.0, 2.0]];
        let x = solve(a, [8.0, -11.0, -3.0]).unwrap();
        for (got, want) in x.iter().zip([2.0, 3.0, -1.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!(solve([[1.0, 2.0], [2.0, 4.0]], [1.0, 2.0]).is_none());
        let d = inverse_diagonal([[4.0, 0.0], [0.0, 0.5]]).unwrap();
        assert_eq!(d, [0.25, 2.0]);
    }
}
