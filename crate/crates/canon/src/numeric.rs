//! Small dense complex matrices for the floating-point evaluation path.

use num_complex::Complex64;

pub type CMat = Vec<Vec<Complex64>>;

pub fn cmat_zero(n: usize) -> CMat {
    vec![vec![Complex64::new(0.0, 0.0); n]; n]
}

pub fn cmat_mul(a: &CMat, b: &CMat) -> CMat {
    let n = a.len();
    let m = b[0].len();
    let k = b.len();
    let mut out = vec![vec![Complex64::new(0.0, 0.0); m]; n];
    for i in 0..n {
        for j in 0..m {
            let mut acc = Complex64::new(0.0, 0.0);
            for l in 0..k {
                acc += a[i][l] * b[l][j];
            }
            out[i][j] = acc;
        }
    }
    out
}

pub fn cmat_trace(a: &CMat) -> Complex64 {
    (0..a.len()).map(|i| a[i][i]).sum()
}

/// Gaussian elimination with partial pivoting. Returns `None` when the
/// matrix is numerically singular (relative pivot below 1e-13).
pub fn cmat_inverse(a: &CMat) -> Option<CMat> {
    let n = a.len();
    let mut w: Vec<Vec<Complex64>> = a.to_vec();
    let mut inv = cmat_zero(n);
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = Complex64::new(1.0, 0.0);
    }
    let scale: f64 = a
        .iter()
        .flat_map(|r| r.iter().map(|c| c.norm()))
        .fold(0.0f64, f64::max)
        .max(1e-300);
    for col in 0..n {
        let (pivot_row, pivot_norm) = (col..n)
            .map(|r| (r, w[r][col].norm()))
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        if pivot_norm < 1e-13 * scale {
            return None;
        }
        w.swap(col, pivot_row);
        inv.swap(col, pivot_row);
        let p = w[col][col];
        for j in 0..n {
            w[col][j] /= p;
            inv[col][j] /= p;
        }
        for r in 0..n {
            if r != col {
                let f = w[r][col];
                if f.norm() > 0.0 {
                    for j in 0..n {
                        let (wj, ij) = (w[col][j], inv[col][j]);
                        w[r][j] -= f * wj;
                        inv[r][j] -= f * ij;
                    }
                }
            }
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_round_trip() {
        let a = vec![
            vec![Complex64::new(2.0, 1.0), Complex64::new(0.0, -1.0)],
            vec![Complex64::new(1.0, 0.0), Complex64::new(3.0, 2.0)],
        ];
        let inv = cmat_inverse(&a).unwrap();
        let id = cmat_mul(&a, &inv);
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((id[i][j] - Complex64::new(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn singular_detected() {
        let a = vec![
            vec![Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0)],
            vec![Complex64::new(2.0, 0.0), Complex64::new(4.0, 0.0)],
        ];
        assert!(cmat_inverse(&a).is_none());
    }
}
