//! Small f64 linear-algebra helpers over nalgebra.

use nalgebra::DMatrix;

use crate::intmat::IMat;

pub fn imat_to_dmatrix(m: &IMat) -> DMatrix<f64> {
    let rows = m.to_f64_rows();
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| rows[i][j])
}

/// Orthonormal basis of the column space of an integer matrix, with singular
/// values below `tol` treated as zero.
pub fn orthonormal_colspace(m: &IMat, tol: f64) -> DMatrix<f64> {
    let a = imat_to_dmatrix(m);
    let svd = a.clone().svd(true, false);
    let u = svd.u.as_ref().expect("svd with u");
    let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
    u.columns(0, rank).into_owned()
}

/// Largest principal angle between two subspaces given by orthonormal column
/// bases, measured by its sine: `sin(theta_max) = || V V^T U - U ||_2`.
///
/// The sine form stays resolvable in f64 when the angle is ~1e-12, where the
/// cosine would round to 1.
pub fn max_principal_angle_sin(u: &DMatrix<f64>, v: &DMatrix<f64>) -> f64 {
    assert_eq!(u.nrows(), v.nrows());
    if u.ncols() != v.ncols() {
        return 1.0;
    }
    let proj = v * (v.transpose() * u);
    let resid = &proj - u;
    resid.norm()
}

/// Gram-Schmidt with accumulated log of the diagonal scales. Columns of `m`
/// are orthonormalized in place; returns `ln r_ii` per column, the standard
/// per-step Lyapunov increments.
pub fn qr_log_diag(m: &mut DMatrix<f64>) -> Vec<f64> {
    let (_rows, cols) = m.shape();
    let mut logs = vec![0.0; cols];
    for j in 0..cols {
        for i in 0..j {
            let qi = m.column(i).into_owned();
            let r = qi.dot(&m.column(j).into_owned());
            let mut cj = m.column_mut(j);
            cj.axpy(-r, &qi, 1.0);
        }
        let norm = m.column(j).norm();
        assert!(norm > 0.0, "rank collapse during reorthonormalization");
        logs[j] = norm.ln();
        m.column_mut(j).scale_mut(1.0 / norm);
    }
    logs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intmat::IMat;

    #[test]
    fn colspace_rank_and_orthonormality() {
        let omega = IMat::from_i64_rows(&[vec![0, 1, 1], vec![-1, 0, 1], vec![-1, -1, 0]]);
        let u = orthonormal_colspace(&omega, 1e-10);
        assert_eq!(u.ncols(), 2);
        let gram = u.transpose() * &u;
        assert!((gram - DMatrix::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn principal_angle_of_identical_spaces_is_zero() {
        let omega = IMat::from_i64_rows(&[vec![0, 1], vec![-1, 0]]);
        let u = orthonormal_colspace(&omega, 1e-10);
        assert!(max_principal_angle_sin(&u, &u) < 1e-14);
    }

    #[test]
    fn qr_log_diag_recovers_scales() {
        let mut m = DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 0.25]);
        let logs = qr_log_diag(&mut m);
        assert!((logs[0] - 3f64.ln()).abs() < 1e-12);
        assert!((logs[1] - 0.25f64.ln()).abs() < 1e-12);
        let gram = m.transpose() * &m;
        assert!((gram - DMatrix::identity(2, 2)).norm() < 1e-12);
    }
}
