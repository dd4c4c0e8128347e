//! Wigner and deformed-matrix sampling plus the dense symmetric/Hermitian
//! eigensolver: Householder reduction to tridiagonal form, implicit-shift QL
//! eigenvalues, and inverse iteration for the few edge eigenvectors a trial
//! needs.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::tridiag::{inverse_iteration, ql_eigenvalues};

/// Symmetry class of the Wigner part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Symmetry {
    #[serde(rename = "real")]
    RealSymmetric,
    #[serde(rename = "complex")]
    ComplexHermitian,
}

/// A Wigner matrix stored as its packed lower triangle (row-major); the
/// complex case interleaves re/im pairs and keeps the diagonal real.
#[derive(Debug, Clone)]
pub struct WignerMatrix {
    n: usize,
    symmetry: Symmetry,
    entries: Vec<f64>,
}

#[inline]
fn packed_index(i: usize, j: usize) -> usize {
    debug_assert!(j <= i);
    i * (i + 1) / 2 + j
}

impl WignerMatrix {
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    /// Entry (i, j) with the Hermitian completion for j > i.
    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        let (r, c, conj) = if j <= i { (i, j, false) } else { (j, i, true) };
        let val = match self.symmetry {
            Symmetry::RealSymmetric => Complex64::new(self.entries[packed_index(r, c)], 0.0),
            Symmetry::ComplexHermitian => {
                let k = 2 * packed_index(r, c);
                Complex64::new(self.entries[k], self.entries[k + 1])
            }
        };
        if conj {
            val.conj()
        } else {
            val
        }
    }

    fn diag_re(&self, i: usize) -> f64 {
        match self.symmetry {
            Symmetry::RealSymmetric => self.entries[packed_index(i, i)],
            Symmetry::ComplexHermitian => self.entries[2 * packed_index(i, i)],
        }
    }

    #[cfg(test)]
    pub(crate) fn entries_mut(&mut self) -> &mut [f64] {
        &mut self.entries
    }
}

/// Gaussian Wigner sampling: real diagonal variance 2/N, off-diagonal 1/N;
/// complex off-diagonals have independent re/im parts of variance 1/(2N)
/// (so E w^2 = 0) and a real diagonal of variance 1/N.
pub fn sample_wigner<R: Rng + ?Sized>(n: usize, symmetry: Symmetry, rng: &mut R) -> WignerMatrix {
    assert!(n >= 1);
    let nf = n as f64;
    let mut entries = Vec::with_capacity(match symmetry {
        Symmetry::RealSymmetric => n * (n + 1) / 2,
        Symmetry::ComplexHermitian => n * (n + 1),
    });
    match symmetry {
        Symmetry::RealSymmetric => {
            let sd_diag = (2.0 / nf).sqrt();
            let sd_off = (1.0 / nf).sqrt();
            for i in 0..n {
                for j in 0..=i {
                    let g: f64 = rng.sample(StandardNormal);
                    entries.push(if i == j { sd_diag * g } else { sd_off * g });
                }
            }
        }
        Symmetry::ComplexHermitian => {
            let sd_diag = (1.0 / nf).sqrt();
            let sd_off = (0.5 / nf).sqrt();
            for i in 0..n {
                for j in 0..=i {
                    if i == j {
                        let g: f64 = rng.sample(StandardNormal);
                        entries.push(sd_diag * g);
                        entries.push(0.0);
                    } else {
                        let gr: f64 = rng.sample(StandardNormal);
                        let gi: f64 = rng.sample(StandardNormal);
                        entries.push(sd_off * gr);
                        entries.push(sd_off * gi);
                    }
                }
            }
        }
    }
    WignerMatrix { n, symmetry, entries }
}

/// H = lambda diag(v) + W, assembled lazily from the sorted potential.
#[derive(Debug, Clone)]
pub struct DeformedMatrix {
    v: Vec<f64>,
    lambda: f64,
    w: WignerMatrix,
}

pub fn assemble(v: &[f64], lambda: f64, w: WignerMatrix) -> Result<DeformedMatrix> {
    if v.len() != w.n {
        return Err(Error::DimensionMismatch { expected: w.n, got: v.len() });
    }
    for (i, pair) in v.windows(2).enumerate() {
        if pair[0] < pair[1] {
            return Err(Error::OrderingViolated { index: i + 1 });
        }
    }
    Ok(DeformedMatrix { v: v.to_vec(), lambda, w })
}

impl DeformedMatrix {
    pub fn n(&self) -> usize {
        self.w.n
    }
    pub fn symmetry(&self) -> Symmetry {
        self.w.symmetry
    }
    pub fn potential(&self) -> &[f64] {
        &self.v
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn wigner(&self) -> &WignerMatrix {
        &self.w
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        let mut val = self.w.entry(i, j);
        if i == j {
            val.re += self.lambda * self.v[i];
        }
        val
    }

    pub fn trace(&self) -> f64 {
        let direct: f64 = (0..self.n()).map(|i| self.w.diag_re(i)).sum();
        self.lambda * self.v.iter().sum::<f64>() + direct
    }

    pub fn frobenius_norm(&self) -> f64 {
        let n = self.n();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..i {
                acc += 2.0 * self.entry(i, j).norm_sqr();
            }
            acc += self.entry(i, i).norm_sqr();
        }
        acc.sqrt()
    }

    /// y = H x for complex x.
    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.n();
        assert_eq!(x.len(), n);
        let mut y = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            for j in 0..i {
                let h = self.entry(i, j);
                y[i] += h * x[j];
                y[j] += h.conj() * x[i];
            }
            y[i] += self.entry(i, i) * x[i];
        }
        y
    }

    fn dense_real(&self) -> Vec<f64> {
        let n = self.n();
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let val = self.entry(i, j).re;
                a[i * n + j] = val;
                a[j * n + i] = val;
            }
        }
        a
    }

    fn dense_complex(&self) -> Vec<Complex64> {
        let n = self.n();
        let mut a = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..=i {
                let val = self.entry(i, j);
                a[i * n + j] = val;
                a[j * n + i] = val.conj();
            }
        }
        a
    }
}

/// Householder reflectors kept for the eigenvector back-transformation; the
/// working matrix stores reflector tails below its subdiagonal.
#[derive(Debug, Clone)]
pub enum Reflectors {
    Real { a: Vec<f64>, tau: Vec<f64> },
    Complex { a: Vec<Complex64>, tau: Vec<Complex64> },
}

/// Real symmetric tridiagonal form, orthogonally/unitarily similar to H.
#[derive(Debug, Clone)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
    pub reflectors: Reflectors,
}

/// Householder reduction. The complex Hermitian case chooses real subdiagonal
/// pivots (phase absorbed into the reflectors) so one QL kernel serves both
/// symmetry classes.
pub fn tridiagonalize(h: &DeformedMatrix) -> Tridiagonal {
    match h.symmetry() {
        Symmetry::RealSymmetric => tridiagonalize_real(h.dense_real(), h.n()),
        Symmetry::ComplexHermitian => tridiagonalize_complex(h.dense_complex(), h.n()),
    }
}

fn tridiagonalize_real(mut a: Vec<f64>, n: usize) -> Tridiagonal {
    let mut e = vec![0.0; n.saturating_sub(1)];
    let mut tau = vec![0.0; n.saturating_sub(1)];
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    for k in 0..n.saturating_sub(1) {
        let alpha = a[(k + 1) * n + k];
        let xnorm2: f64 = (k + 2..n).map(|i| a[i * n + k] * a[i * n + k]).sum();
        if xnorm2 == 0.0 {
            e[k] = alpha;
            tau[k] = 0.0;
            continue;
        }
        let norm = (alpha * alpha + xnorm2).sqrt();
        let beta = if alpha >= 0.0 { -norm } else { norm };
        let t = (beta - alpha) / beta;
        let scale = 1.0 / (alpha - beta);
        v[k + 1] = 1.0;
        for i in k + 2..n {
            v[i] = a[i * n + k] * scale;
            a[i * n + k] = v[i]; // reflector tail kept in place
        }
        e[k] = beta;
        tau[k] = t;
        // p = tau A v on the trailing block
        for i in k + 1..n {
            let mut acc = 0.0;
            let row = &a[i * n..i * n + n];
            for j in k + 1..n {
                acc += row[j] * v[j];
            }
            p[i] = t * acc;
        }
        let pv: f64 = (k + 1..n).map(|i| p[i] * v[i]).sum();
        let corr = 0.5 * t * pv;
        for i in k + 1..n {
            p[i] -= corr * v[i];
        }
        // A <- A - v p' - p v'
        for i in k + 1..n {
            let (vi, pi) = (v[i], p[i]);
            let row = &mut a[i * n..i * n + n];
            for j in k + 1..n {
                row[j] -= vi * p[j] + pi * v[j];
            }
        }
    }
    let diag = (0..n).map(|i| a[i * n + i]).collect();
    Tridiagonal { diag, offdiag: e, reflectors: Reflectors::Real { a, tau } }
}

fn tridiagonalize_complex(mut a: Vec<Complex64>, n: usize) -> Tridiagonal {
    let zero = Complex64::new(0.0, 0.0);
    let mut e = vec![0.0; n.saturating_sub(1)];
    let mut tau = vec![zero; n.saturating_sub(1)];
    let mut v = vec![zero; n];
    let mut p = vec![zero; n];
    for k in 0..n.saturating_sub(1) {
        let alpha = a[(k + 1) * n + k];
        let xnorm2: f64 = (k + 2..n).map(|i| a[i * n + k].norm_sqr()).sum();
        if xnorm2 == 0.0 && alpha.im == 0.0 {
            e[k] = alpha.re;
            tau[k] = zero;
            continue;
        }
        let norm = (alpha.norm_sqr() + xnorm2).sqrt();
        let beta = if alpha.re >= 0.0 { -norm } else { norm };
        let t = Complex64::new((beta - alpha.re) / beta, -alpha.im / beta);
        let scale = (alpha - beta).inv();
        v[k + 1] = Complex64::new(1.0, 0.0);
        for i in k + 2..n {
            v[i] = a[i * n + k] * scale;
            a[i * n + k] = v[i];
        }
        e[k] = beta;
        tau[k] = t;
        for i in k + 1..n {
            let mut acc = zero;
            let row = &a[i * n..i * n + n];
            for j in k + 1..n {
                acc += row[j] * v[j];
            }
            p[i] = t * acc;
        }
        // w = p - (tau/2)(p^H v) v
        let mut pv = zero;
        for i in k + 1..n {
            pv += p[i].conj() * v[i];
        }
        let corr = 0.5 * t * pv;
        for i in k + 1..n {
            p[i] -= corr * v[i];
        }
        for i in k + 1..n {
            let (vi, pi) = (v[i], p[i]);
            let row = &mut a[i * n..i * n + n];
            for j in k + 1..n {
                row[j] -= vi * p[j].conj() + pi * v[j].conj();
            }
        }
        // the diagonal of a Hermitian matrix stays real; clear rounding dust
        for i in k + 1..n {
            a[i * n + i].im = 0.0;
        }
    }
    let diag = (0..n).map(|i| a[i * n + i].re).collect();
    Tridiagonal { diag, offdiag: e, reflectors: Reflectors::Complex { a, tau } }
}

/// All eigenvalues of the tridiagonal form, sorted descending.
pub fn eigenvalues(t: &Tridiagonal) -> Result<Vec<f64>> {
    let mut d = t.diag.clone();
    let mut e = t.offdiag.clone();
    ql_eigenvalues(&mut d, &mut e)?;
    d.sort_by(|x, y| y.partial_cmp(x).unwrap());
    Ok(d)
}

/// Back-transforms a tridiagonal eigenvector through the stored reflectors.
fn back_transform(t: &Tridiagonal, y: &[f64]) -> Vec<Complex64> {
    let n = y.len();
    match &t.reflectors {
        Reflectors::Real { a, tau } => {
            let mut u: Vec<f64> = y.to_vec();
            for k in (0..n.saturating_sub(1)).rev() {
                if tau[k] == 0.0 {
                    continue;
                }
                // v has v[k+1] = 1, tail in a[(k+2..)*n + k]
                let mut dot = u[k + 1];
                for i in k + 2..n {
                    dot += a[i * n + k] * u[i];
                }
                let wgt = tau[k] * dot;
                u[k + 1] -= wgt;
                for i in k + 2..n {
                    u[i] -= wgt * a[i * n + k];
                }
            }
            u.iter().map(|&x| Complex64::new(x, 0.0)).collect()
        }
        Reflectors::Complex { a, tau } => {
            let mut u: Vec<Complex64> = y.iter().map(|&x| Complex64::new(x, 0.0)).collect();
            for k in (0..n.saturating_sub(1)).rev() {
                if tau[k] == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let mut dot = u[k + 1];
                for i in k + 2..n {
                    dot += a[i * n + k].conj() * u[i];
                }
                let wgt = tau[k] * dot;
                u[k + 1] -= wgt;
                for i in k + 2..n {
                    u[i] -= wgt * a[i * n + k];
                }
            }
            u
        }
    }
}

/// Eigenvectors for the k largest eigenvalues by inverse iteration on the
/// tridiagonal, reorthogonalized, then back-transformed.
pub struct TopVectors {
    pub vectors: Vec<Vec<Complex64>>,
    pub residual_norms: Vec<f64>,
    /// Indices k where |mu_k - mu_{k+1}| < 1e-10 ||H||_F (vectors still valid,
    /// orthogonality enforced by Gram-Schmidt).
    pub cluster_warnings: Vec<usize>,
}

pub fn top_eigenvectors(
    h: &DeformedMatrix,
    t: &Tridiagonal,
    eigs: &[f64],
    k: usize,
) -> TopVectors {
    assert!(k <= h.n());
    let scale = t
        .diag
        .iter()
        .map(|x| x.abs())
        .chain(t.offdiag.iter().map(|x| 2.0 * x.abs()))
        .fold(0.0f64, f64::max);
    let hnorm = h.frobenius_norm();
    let mut cluster_warnings = Vec::new();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(k);
    for (idx, &mu) in eigs.iter().take(k).enumerate() {
        if idx + 1 < eigs.len() && (mu - eigs[idx + 1]).abs() < 1e-10 * hnorm {
            cluster_warnings.push(idx);
        }
        let y = inverse_iteration(&t.diag, &t.offdiag, mu, scale, &basis);
        basis.push(y);
    }
    let mut vectors = Vec::with_capacity(k);
    let mut residual_norms = Vec::with_capacity(k);
    for (idx, y) in basis.iter().enumerate() {
        let u = back_transform(t, y);
        let hu = h.matvec(&u);
        let res: f64 = hu
            .iter()
            .zip(&u)
            .map(|(hi, ui)| (hi - eigs[idx] * ui).norm_sqr())
            .sum::<f64>()
            .sqrt();
        vectors.push(u);
        residual_norms.push(res);
    }
    TopVectors { vectors, residual_norms, cluster_warnings }
}

/// Sorted eigenvalues and the top-n0 eigenvectors of one sampled H.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub eigenvalues: Vec<f64>,
    pub top_vectors: Vec<Vec<Complex64>>,
    pub residual_norms: Vec<f64>,
    pub cluster_warnings: Vec<usize>,
}

pub fn spectral_decompose(h: &DeformedMatrix, n0: usize) -> Result<SpectralData> {
    assert!(n0 <= h.n());
    let t = tridiagonalize(h);
    let eigs = eigenvalues(&t)?;
    let tv = if n0 > 0 {
        top_eigenvectors(h, &t, &eigs, n0)
    } else {
        TopVectors { vectors: Vec::new(), residual_norms: Vec::new(), cluster_warnings: Vec::new() }
    };
    Ok(SpectralData {
        eigenvalues: eigs,
        top_vectors: tv.vectors,
        residual_norms: tv.residual_norms,
        cluster_warnings: tv.cluster_warnings,
    })
}
