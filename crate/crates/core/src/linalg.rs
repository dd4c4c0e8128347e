//! Dense complex LU with partial pivoting, for the resolvent oracles.

use num_complex::Complex64;

pub(crate) struct CluFactors {
    n: usize,
    lu: Vec<Complex64>,
    piv: Vec<usize>,
}

/// Factor a row-major n x n matrix in place.
pub(crate) fn factor(mut a: Vec<Complex64>, n: usize) -> CluFactors {
    assert_eq!(a.len(), n * n);
    let mut piv: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let mut best = k;
        let mut best_mag = a[k * n + k].norm_sqr();
        for r in k + 1..n {
            let mag = a[r * n + k].norm_sqr();
            if mag > best_mag {
                best = r;
                best_mag = mag;
            }
        }
        if best != k {
            for c in 0..n {
                a.swap(k * n + c, best * n + c);
            }
            piv.swap(k, best);
        }
        let pivot = a[k * n + k];
        if pivot.norm_sqr() == 0.0 {
            continue; // singular column; resolvents with Im z > 0 never hit this
        }
        let inv = pivot.inv();
        for r in k + 1..n {
            let factor = a[r * n + k] * inv;
            a[r * n + k] = factor;
            if factor.norm_sqr() != 0.0 {
                let (top, bottom) = a.split_at_mut(r * n);
                let krow = &top[k * n..k * n + n];
                let rrow = &mut bottom[..n];
                for c in k + 1..n {
                    rrow[c] -= factor * krow[c];
                }
            }
        }
    }
    CluFactors { n, lu: a, piv }
}

impl CluFactors {
    /// Solve A x = b for one right-hand side, in place.
    pub(crate) fn solve_in_place(&self, b: &mut [Complex64]) {
        let n = self.n;
        let permuted: Vec<Complex64> = self.piv.iter().map(|&p| b[p]).collect();
        b.copy_from_slice(&permuted);
        for k in 0..n {
            for r in k + 1..n {
                let f = self.lu[r * n + k];
                if f.norm_sqr() != 0.0 {
                    let bk = b[k];
                    b[r] -= f * bk;
                }
            }
        }
        for k in (0..n).rev() {
            let mut acc = b[k];
            for c in k + 1..n {
                acc -= self.lu[k * n + c] * b[c];
            }
            b[k] = acc * self.lu[k * n + k].inv();
        }
    }
}

/// Full inverse (column solves against the unit basis).
pub(crate) fn inverse(a: Vec<Complex64>, n: usize) -> Vec<Complex64> {
    let f = factor(a, n);
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        for x in col.iter_mut() {
            *x = Complex64::new(0.0, 0.0);
        }
        col[j] = Complex64::new(1.0, 0.0);
        f.solve_in_place(&mut col);
        for i in 0..n {
            out[i * n + j] = col[i];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_and_invert_small() {
        let a = vec![
            Complex64::new(2.0, 1.0),
            Complex64::new(-1.0, 0.5),
            Complex64::new(0.3, -0.2),
            Complex64::new(1.0, -3.0),
        ];
        let inv = inverse(a.clone(), 2);
        // A * A^{-1} = I
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..2 {
                    acc += a[i * 2 + k] * inv[k * 2 + j];
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((acc - expect).norm() < 1e-13);
            }
        }
    }
}
