//! Symmetric tridiagonal kernels: implicit-shift QL eigenvalues, optional
//! eigenvector row accumulation, and inverse iteration with a pivoted
//! tridiagonal LU. Shared by the quadrature builder and the dense eigensolver.

use crate::error::{Error, Result};

const MAX_QL_SWEEPS: usize = 50;

/// All eigenvalues of the symmetric tridiagonal matrix (d, e), in place.
/// `d` holds the diagonal, `e` the subdiagonal (`e[i]` couples rows i and i+1).
/// On success `d` contains the eigenvalues in unspecified order.
pub(crate) fn ql_eigenvalues(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    ql_kernel(d, e, None)
}

/// Eigenvalues plus the first row of the eigenvector matrix, as needed by
/// Golub–Welsch (quadrature weights are proportional to the squared first
/// components). Returns (eigenvalues, first_row) sorted ascending by eigenvalue.
pub(crate) fn ql_eigen_first_row(diag: &[f64], offdiag: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = offdiag.to_vec();
    let mut row = vec![0.0; n];
    if n > 0 {
        row[0] = 1.0;
    }
    ql_kernel(&mut d, &mut e, Some(&mut row))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap());
    let vals = order.iter().map(|&i| d[i]).collect();
    let comps = order.iter().map(|&i| row[i]).collect();
    Ok((vals, comps))
}

/// Implicit-shift QL with Wilkinson shifts. When `row` is given, the plane
/// rotations are accumulated into that single row of the eigenvector matrix.
fn ql_kernel(d: &mut [f64], e: &mut [f64], mut row: Option<&mut [f64]>) -> Result<()> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    assert_eq!(e.len(), n - 1);
    // work with an n-length subdiagonal, last slot zero
    let mut ework = vec![0.0; n];
    ework[..n - 1].copy_from_slice(e);

    for l in 0..n {
        let mut iter = 0;
        loop {
            // find a negligible subdiagonal element
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if ework[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_SWEEPS {
                return Err(Error::EigenNoConvergence { index: l });
            }
            // Wilkinson shift from the leading 2x2
            let mut g = (d[l + 1] - d[l]) / (2.0 * ework[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + ework[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            for i in (l..m).rev() {
                let mut f = s * ework[i];
                let b = c * ework[i];
                r = f.hypot(g);
                ework[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    ework[m] = 0.0;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = row.as_deref_mut() {
                    f = z[i + 1];
                    z[i + 1] = s * z[i] + c * f;
                    z[i] = c * z[i] - s * f;
                }
            }
            if r == 0.0 && m - l > 1 {
                continue;
            }
            d[l] -= p;
            ework[l] = g;
            ework[m] = 0.0;
        }
    }
    e.copy_from_slice(&ework[..n - 1]);
    Ok(())
}

/// LU factorization of (T - shift I) with partial pivoting, T tridiagonal.
/// Row swaps introduce a second superdiagonal.
pub(crate) struct TridiagLu {
    n: usize,
    dl: Vec<f64>,
    dd: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagLu {
    pub(crate) fn factor(diag: &[f64], offdiag: &[f64], shift: f64) -> Self {
        let n = diag.len();
        let mut dd: Vec<f64> = diag.iter().map(|&x| x - shift).collect();
        let mut du = offdiag.to_vec();
        let mut dl = offdiag.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if dd[i].abs() >= dl[i].abs() {
                // no swap
                if dd[i] != 0.0 {
                    let fact = dl[i] / dd[i];
                    dl[i] = fact;
                    dd[i + 1] -= fact * du[i];
                }
            } else {
                let fact = dd[i] / dl[i];
                dd[i] = dl[i];
                dl[i] = fact;
                let tmp = du[i];
                du[i] = dd[i + 1];
                dd[i + 1] = tmp - fact * dd[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        // guard exact singularity (shift sits on an eigenvalue)
        for x in dd.iter_mut() {
            if *x == 0.0 {
                *x = f64::EPSILON * f64::EPSILON;
            }
        }
        TridiagLu { n, dl, dd, du, du2, swapped }
    }

    pub(crate) fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                b.swap(i, i + 1);
            }
            b[i + 1] -= self.dl[i] * b[i];
        }
        if n > 0 {
            b[n - 1] /= self.dd[n - 1];
        }
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.dd[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.dd[i];
        }
    }
}

/// One eigenvector of the tridiagonal (d, e) for the eigenvalue `mu`, by
/// inverse iteration with a slightly perturbed shift. Orthogonalized against
/// `previous` between iterations; returns a unit vector.
pub(crate) fn inverse_iteration(
    diag: &[f64],
    offdiag: &[f64],
    mu: f64,
    scale: f64,
    previous: &[Vec<f64>],
) -> Vec<f64> {
    let n = diag.len();
    let shift = mu + 1e-12 * scale.max(1.0);
    let lu = TridiagLu::factor(diag, offdiag, shift);
    let mut y = vec![1.0 / (n as f64).sqrt(); n];
    for _ in 0..3 {
        lu.solve_in_place(&mut y);
        for p in previous {
            let dot: f64 = p.iter().zip(&y).map(|(a, b)| a * b).sum();
            for (yi, pi) in y.iter_mut().zip(p) {
                *yi -= dot * pi;
            }
        }
        let norm = y.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-290 {
            // degenerate start (orthogonalization annihilated it); reseed
            for (i, yi) in y.iter_mut().enumerate() {
                *yi = if i % 2 == 0 { 1.0 } else { -1.0 };
            }
            continue;
        }
        for yi in y.iter_mut() {
            *yi /= norm;
        }
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_closed_form() {
        // [[a, c], [c, b]] eigenvalues ((a+b) +- sqrt((a-b)^2 + 4c^2))/2
        let (a, b, c) = (0.7, -1.3, 0.4);
        let mut d = vec![a, b];
        let mut e = vec![c];
        ql_eigenvalues(&mut d, &mut e).unwrap();
        d.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let disc = ((a - b).powi(2) + 4.0 * c * c).sqrt();
        let lo = 0.5 * (a + b - disc);
        let hi = 0.5 * (a + b + disc);
        assert!((d[0] - lo).abs() < 1e-14);
        assert!((d[1] - hi).abs() < 1e-14);
    }

    #[test]
    fn diagonal_passthrough() {
        let mut d = vec![3.0, 1.0];
        let mut e = vec![0.0];
        ql_eigenvalues(&mut d, &mut e).unwrap();
        d.sort_by(|x, y| y.partial_cmp(x).unwrap());
        assert_eq!(d, vec![3.0, 1.0]);
    }

    #[test]
    fn antidiagonal_pair() {
        let mut d = vec![0.0, 0.0];
        let mut e = vec![1.0];
        ql_eigenvalues(&mut d, &mut e).unwrap();
        d.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert!((d[0] + 1.0).abs() < 1e-14);
        assert!((d[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn inverse_iteration_recovers_eigenvector() {
        let diag = vec![2.0, -1.0, 0.5, 3.0];
        let off = vec![0.3, -0.2, 0.7];
        let mut d = diag.clone();
        let mut e = off.clone();
        ql_eigenvalues(&mut d, &mut e).unwrap();
        d.sort_by(|x, y| y.partial_cmp(x).unwrap());
        let v = inverse_iteration(&diag, &off, d[0], 3.0, &[]);
        // residual ||T v - mu v||
        let n = diag.len();
        let mut res = 0.0f64;
        for i in 0..n {
            let mut t = diag[i] * v[i];
            if i > 0 {
                t += off[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                t += off[i] * v[i + 1];
            }
            res += (t - d[0] * v[i]).powi(2);
        }
        assert!(res.sqrt() < 1e-10);
    }
}
