//! Green-function and event diagnostics: resolvent oracles, the
//! Schur-complement fluctuation Z_i, Ward identity residuals, local-law
//! scans over the edge domain, and the typical-potential event checker.

use num_complex::Complex64;

use crate::ensemble::{spectral_decompose, DeformedMatrix};
use crate::error::{Error, Result};
use crate::freeconv::{solve_mfc, solve_mfc_hat, solve_mfc_hat_warm, solve_mfc_warm, EdgeConstants, Regime};
use crate::linalg;
use crate::measure::JacobiMeasure;

/// Safety factor of the local-law acceptance bound 5 N^{-1/2+2eps}.
pub const LOCAL_LAW_SAFETY: f64 = 5.0;
/// Threshold standing in for the paper's unspecified constant c < 1 in the
/// typical-potential condition (2).
pub const OMEGA_V_R2_THRESHOLD: f64 = 0.95;
/// Constant C of the typical-potential concentration condition (3).
pub const OMEGA_V_CLT_CONSTANT: f64 = 2.0;

/// Deterministic spectral scales derived from (N, beta, epsilon).
#[derive(Debug, Clone, Copy)]
pub struct ScaleParams {
    pub epsilon: f64,
    /// N^{-1/(beta+1)}.
    pub kappa0: f64,
    /// N^{-epsilon} / sqrt(N).
    pub eta0: f64,
    pub n0: usize,
    pub n: usize,
    pub beta: f64,
}

impl ScaleParams {
    pub fn new(n: usize, beta: f64, epsilon: f64, n0: usize) -> Result<Self> {
        if beta <= 1.0 {
            return Err(Error::Precondition(format!(
                "scale parameters need beta > 1, got {beta}"
            )));
        }
        if n0 <= 1 {
            return Err(Error::Precondition("n0 must exceed 1".into()));
        }
        let frak_b = 0.5 - 1.0 / (beta + 1.0);
        let bound = (10.0 + (beta + 1.0) / (beta - 1.0)) * frak_b;
        if !(epsilon > 0.0 && epsilon < bound) {
            return Err(Error::Precondition(format!(
                "epsilon = {epsilon} outside (0, {bound})"
            )));
        }
        let nf = n as f64;
        Ok(ScaleParams {
            epsilon,
            kappa0: nf.powf(-1.0 / (beta + 1.0)),
            eta0: nf.powf(-epsilon) / nf.sqrt(),
            n0,
            n,
            beta,
        })
    }
}

/// Diagonal resolvent data at one spectral parameter.
#[derive(Debug, Clone)]
pub struct GreenEval {
    pub z: Complex64,
    pub g_diag: Vec<Complex64>,
    pub m: Complex64,
    pub m_minor: Option<Vec<Complex64>>,
    pub z_vars: Option<Vec<Complex64>>,
}

fn dense_shifted(h: &DeformedMatrix, z: Complex64) -> Vec<Complex64> {
    let n = h.n();
    let mut a = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..=i {
            let val = h.entry(i, j);
            a[i * n + j] = val;
            a[j * n + i] = val.conj();
        }
        a[i * n + i] -= z;
    }
    a
}

/// Full resolvent G(z) = (H - z)^{-1}, row-major.
pub fn resolvent_matrix(h: &DeformedMatrix, z: Complex64) -> Vec<Complex64> {
    assert!(z.im > 0.0, "resolvent needs Im z > 0");
    linalg::inverse(dense_shifted(h, z), h.n())
}

/// Dense-solve oracle for the Green function diagonal (N <= 1000).
pub fn resolvent_direct(h: &DeformedMatrix, z: Complex64) -> GreenEval {
    assert!(h.n() <= 1000, "dense resolvent oracle is capped at N = 1000");
    let n = h.n();
    let g = resolvent_matrix(h, z);
    let g_diag: Vec<Complex64> = (0..n).map(|i| g[i * n + i]).collect();
    let m = g_diag.iter().sum::<Complex64>() / n as f64;
    GreenEval { z, g_diag, m, m_minor: None, z_vars: None }
}

/// m(z) = N^{-1} sum 1/(mu_alpha - z) from a computed spectrum.
pub fn stieltjes_from_spectrum(eigs: &[f64], z: Complex64) -> Complex64 {
    assert!(z.im > 0.0);
    eigs.iter().map(|&mu| (mu - z).inv()).sum::<Complex64>() / eigs.len() as f64
}

/// Resolvent of the minor H^{(i)} (row/column i removed, index names kept):
/// the matrix in minor ordering plus the original-index map.
pub fn minor_resolvent_matrix(
    h: &DeformedMatrix,
    i: usize,
    z: Complex64,
) -> (Vec<Complex64>, Vec<usize>) {
    assert!(z.im > 0.0);
    let n = h.n();
    assert!(i < n);
    let keep: Vec<usize> = (0..n).filter(|&s| s != i).collect();
    let m = n - 1;
    let mut a = vec![Complex64::new(0.0, 0.0); m * m];
    for (r, &orig_r) in keep.iter().enumerate() {
        for (c, &orig_c) in keep.iter().enumerate() {
            a[r * m + c] = h.entry(orig_r, orig_c);
        }
        a[r * m + r] -= z;
    }
    (linalg::inverse(a, m), keep)
}

/// The centered Schur-complement quadratic form
/// Z_i = sum_s (|w_is|^2 - 1/N) G^{(i)}_ss + sum_{s != t} w_is G^{(i)}_st w_ti,
/// evaluated literally from a fresh dense minor solve.
pub fn z_var(h: &DeformedMatrix, i: usize, z: Complex64) -> Complex64 {
    assert!(h.n() <= 1000);
    let n = h.n();
    let (g, keep) = minor_resolvent_matrix(h, i, z);
    let m = n - 1;
    let w = h.wigner();
    let inv_n = 1.0 / n as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for s in 0..m {
        let wis = w.entry(i, keep[s]);
        acc += (wis.norm_sqr() - inv_n) * g[s * m + s];
        for t in 0..m {
            if t != s {
                acc += wis * g[s * m + t] * w.entry(keep[t], i);
            }
        }
    }
    acc
}

/// |G_ii - 1/(h_ii - z - sum_{k,l}^{(i)} h_ik G^{(i)}_kl h_li)|.
pub fn schur_check(h: &DeformedMatrix, i: usize, z: Complex64) -> f64 {
    assert!(h.n() <= 1000);
    let n = h.n();
    let g_full = resolvent_matrix(h, z);
    let (g, keep) = minor_resolvent_matrix(h, i, z);
    let m = n - 1;
    let mut quad = Complex64::new(0.0, 0.0);
    for s in 0..m {
        let his = h.entry(i, keep[s]);
        for t in 0..m {
            quad += his * g[s * m + t] * h.entry(keep[t], i);
        }
    }
    let denom = h.entry(i, i) - z - quad;
    (g_full[i * n + i] - denom.inv()).norm()
}

/// |sum_j |G_ij|^2 - Im G_ii / eta|.
pub fn ward_check(h: &DeformedMatrix, i: usize, z: Complex64) -> f64 {
    assert!(h.n() <= 1000);
    let n = h.n();
    let g = resolvent_matrix(h, z);
    let row_sum: f64 = (0..n).map(|j| g[i * n + j].norm_sqr()).sum();
    (row_sum - g[i * n + i].im / z.im).abs()
}

/// (1/N) sum_{a=n0}^{N} Z_a(z) (1-indexed a). Minors are extracted from one
/// full resolvent through the exact identity
/// G^{(a)}_st = G_st - G_sa G_at / G_aa; z_var keeps the fresh-solve oracle.
pub fn fluctuation_average(h: &DeformedMatrix, z: Complex64, n0: usize) -> Complex64 {
    let n = h.n();
    assert!(n <= 600, "fluctuation average is capped at N = 600");
    assert!(n0 >= 1 && n0 <= n);
    let g = resolvent_matrix(h, z);
    let w = h.wigner();
    let trace: Complex64 = (0..n).map(|s| g[s * n + s]).sum();
    let m = trace / n as f64;
    let inv_n = 1.0 / n as f64;
    let mut total = Complex64::new(0.0, 0.0);
    let mut r = vec![Complex64::new(0.0, 0.0); n];
    let mut y = vec![Complex64::new(0.0, 0.0); n];
    for a in (n0 - 1)..n {
        let gaa = g[a * n + a];
        // m^{(a)} = m - (sum_s G_sa G_as) / (N G_aa)
        let mut colrow = Complex64::new(0.0, 0.0);
        for s in 0..n {
            colrow += g[s * n + a] * g[a * n + s];
        }
        let m_a = m - colrow * gaa.inv() * inv_n;
        // r_s = w_sa; quadratic form r^H G^{(a)} r
        for s in 0..n {
            r[s] = if s == a { Complex64::new(0.0, 0.0) } else { w.entry(s, a) };
        }
        for t in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for s in 0..n {
                if s != a {
                    acc += r[s].conj() * g[s * n + t];
                }
            }
            y[t] = acc;
        }
        let mut quad_full = Complex64::new(0.0, 0.0);
        let mut c2 = Complex64::new(0.0, 0.0);
        for t in 0..n {
            if t != a {
                quad_full += y[t] * r[t];
                c2 += g[a * n + t] * r[t];
            }
        }
        let quad = quad_full - y[a] * c2 * gaa.inv();
        total += quad - m_a;
    }
    total / n as f64
}

/// The largest real E with E + Re m_hat_fc(E + i eta0) = lambda v_k, by a
/// right-to-left scan of the bracket around the deterministic edge followed
/// by bisection. `k` is 0-based: k = 0 is the largest potential value.
pub fn solve_zhat(
    v: &[f64],
    lambda: f64,
    k: usize,
    params: &ScaleParams,
    ec: &EdgeConstants,
) -> Result<f64> {
    if ec.upper_regime != Regime::Supercritical {
        return Err(Error::Precondition("zhat solve needs the supercritical regime".into()));
    }
    if k + 1 >= params.n0 {
        return Err(Error::Precondition(format!(
            "index k = {k} must be below n0 - 1 = {}",
            params.n0 - 1
        )));
    }
    let n = v.len();
    let logn = (n as f64).ln();
    let target = lambda * v[k];
    let lo = ec.l_plus - 10.0 * params.kappa0 * logn;
    let hi = ec.l_plus + 10.0 * params.kappa0 * logn;
    let eta0 = params.eta0;
    let step = params.kappa0 * (n as f64).powf(-params.epsilon) / 8.0;

    let mut warm = solve_mfc_hat(v, lambda, Complex64::new(hi, eta0))?;
    let phi_hi = hi + warm.m.re - target;
    let mut e_right = hi;
    let mut phi_right = phi_hi;
    let mut bracket = None;
    let mut e = hi - step;
    while e >= lo - 1e-12 {
        warm = solve_mfc_hat_warm(v, lambda, Complex64::new(e, eta0), warm.m)?;
        let phi = e + warm.m.re - target;
        if phi_right.signum() != phi.signum() {
            bracket = Some((e, e_right));
            break;
        }
        e_right = e;
        phi_right = phi;
        e -= step;
    }
    let (mut blo, mut bhi) = bracket.ok_or(Error::NoRoot { lo, hi })?;
    for _ in 0..80 {
        let mid = 0.5 * (blo + bhi);
        warm = solve_mfc_hat_warm(v, lambda, Complex64::new(mid, eta0), warm.m)?;
        let phi = mid + warm.m.re - target;
        if phi.signum() == phi_right.signum() {
            bhi = mid;
        } else {
            blo = mid;
        }
        if bhi - blo <= 1e-13 * bhi.abs().max(1.0) {
            break;
        }
    }
    Ok(0.5 * (blo + bhi))
}

/// Result of one local-law scan over the edge domain.
#[derive(Debug, Clone, Copy)]
pub struct LocalLawScan {
    pub sup_deviation: f64,
    pub grid_points_used: usize,
}

/// Sup over the separated edge grid of |m(z) - m_hat_fc(z)|, with m taken
/// from the full spectrum of the sampled matrix. Grid points violating the
/// separation |lambda v_a - z - m_fc(z)| > (1/2) N^{-1/(beta+1)-eps} for all
/// a >= n0 are discarded.
pub fn local_law_scan(
    h: &DeformedMatrix,
    v: &[f64],
    lambda: f64,
    measure: &JacobiMeasure,
    params: &ScaleParams,
) -> Result<LocalLawScan> {
    let ec = crate::freeconv::edge_constants(measure, lambda)?;
    if ec.upper_regime != Regime::Supercritical {
        return Err(Error::Precondition("local-law scan needs the supercritical regime".into()));
    }
    let n = v.len();
    let nf = n as f64;
    let eigs = spectral_decompose(h, 0)?.eigenvalues;
    let n_e = 64;
    let n_eta = 16;
    let e_lo = ec.l_plus - nf.powf(params.epsilon) * params.kappa0;
    let e_hi = ec.l_plus + nf.powf(params.epsilon) * params.kappa0;
    let eta_lo = nf.powf(-0.5 - params.epsilon);
    let eta_hi = nf.powf(-1.0 / (params.beta + 1.0) + params.epsilon);
    let sep = 0.5 * nf.powf(-1.0 / (params.beta + 1.0) - params.epsilon);

    let columns: Vec<usize> = (0..n_e).collect();
    let scan_column = |col: &usize| -> Result<(f64, usize)> {
        let e = e_lo + (e_hi - e_lo) * (*col as f64) / (n_e - 1) as f64;
        let mut sup = 0.0f64;
        let mut used = 0usize;
        // march eta from the top down, warm-starting both solvers
        let mut mfc = solve_mfc(measure, lambda, Complex64::new(e, eta_hi))?;
        let mut mhat = solve_mfc_hat(v, lambda, Complex64::new(e, eta_hi))?;
        for row in 0..n_eta {
            let frac = row as f64 / (n_eta - 1) as f64;
            let eta = eta_hi * (eta_lo / eta_hi).powf(frac);
            let z = Complex64::new(e, eta);
            mfc = solve_mfc_warm(measure, lambda, z, mfc.m)?;
            let q = z + mfc.m;
            let separated = v[(params.n0 - 1)..]
                .iter()
                .all(|&va| (lambda * va - q).norm() > sep);
            if !separated {
                continue;
            }
            mhat = solve_mfc_hat_warm(v, lambda, z, mhat.m)?;
            let m_emp = stieltjes_from_spectrum(&eigs, z);
            sup = sup.max((m_emp - mhat.m).norm());
            used += 1;
        }
        Ok((sup, used))
    };

    #[cfg(feature = "parallel")]
    let results: Vec<Result<(f64, usize)>> = {
        use rayon::prelude::*;
        columns.par_iter().map(scan_column).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<(f64, usize)>> = columns.iter().map(scan_column).collect();

    let mut sup = 0.0f64;
    let mut used = 0usize;
    for r in results {
        let (s, u) = r?;
        sup = sup.max(s);
        used += u;
    }
    if used == 0 {
        return Err(Error::EmptyDomain);
    }
    Ok(LocalLawScan { sup_deviation: sup, grid_points_used: used })
}

/// Verdicts of the typical-potential event: order-statistics gaps, the
/// restricted second-moment sum, and the concentration of the Stieltjes sum.
#[derive(Debug, Clone, Copy)]
pub struct OmegaVReport {
    pub gap_lower_ok: bool,
    pub gap_upper_ok: bool,
    pub r2_sup: f64,
    pub clt_sup: f64,
    pub pass: bool,
}

/// Precomputed grid of m_fc values, reusable across sampled potentials with
/// the same (measure, lambda, N).
pub struct OmegaVContext {
    lambda: f64,
    params: ScaleParams,
    grid: Vec<Complex64>,
    qz: Vec<Complex64>, // z + m_fc(z) per grid point
    pub r2_threshold: f64,
    pub clt_constant: f64,
}

impl OmegaVContext {
    pub fn new(
        measure: &JacobiMeasure,
        lambda: f64,
        params: &ScaleParams,
    ) -> Result<Self> {
        let ec = crate::freeconv::edge_constants(measure, lambda)?;
        if ec.upper_regime != Regime::Supercritical {
            return Err(Error::Precondition(
                "typical-potential checks need the supercritical regime".into(),
            ));
        }
        let nf = params.n as f64;
        let logn = nf.ln();
        let eta_lo = nf.powf(-0.5 - params.epsilon);
        let eta_hi = nf.powf(-1.0 / (params.beta + 1.0) + params.epsilon);
        // 48 coarse energies across the admissible strip plus a 16-point
        // window around the upper edge where the argmin restriction can hold
        let mut energies = Vec::with_capacity(64);
        let coarse_lo = -3.0 - lambda;
        let coarse_hi = 3.0 + lambda;
        for i in 0..48 {
            energies.push(coarse_lo + (coarse_hi - coarse_lo) * i as f64 / 47.0);
        }
        let c_lambda = ec.c_lambda.expect("supercritical edge");
        let win_lo = ec.l_plus - c_lambda * logn * params.kappa0;
        let win_hi = ec.l_plus + params.kappa0;
        for i in 0..16 {
            energies.push(win_lo + (win_hi - win_lo) * i as f64 / 15.0);
        }
        let mut grid = Vec::with_capacity(energies.len() * 16);
        let mut qz = Vec::with_capacity(energies.len() * 16);
        for &e in &energies {
            let mut warm = solve_mfc(measure, lambda, Complex64::new(e, eta_hi))?;
            for row in 0..16 {
                let frac = row as f64 / 15.0;
                let eta = eta_hi * (eta_lo / eta_hi).powf(frac);
                let z = Complex64::new(e, eta);
                warm = solve_mfc_warm(measure, lambda, z, warm.m)?;
                grid.push(z);
                qz.push(z + warm.m);
            }
        }
        Ok(OmegaVContext {
            lambda,
            params: *params,
            grid,
            qz,
            r2_threshold: OMEGA_V_R2_THRESHOLD,
            clt_constant: OMEGA_V_CLT_CONSTANT,
        })
    }

    /// Evaluate the three conditions for one sorted-descending potential.
    pub fn check(&self, v: &[f64]) -> OmegaVReport {
        let p = &self.params;
        let n = v.len();
        let nf = n as f64;
        let logn = nf.ln();
        let lo_gap = nf.powf(-p.epsilon) * p.kappa0;
        let hi_gap = logn * p.kappa0;

        let mut gap_lower_ok = lo_gap < (1.0 - v[0]) && (1.0 - v[0]) < f64::INFINITY;
        let mut gap_upper_ok = (1.0 - v[0]) < hi_gap;
        for k in 0..p.n0.saturating_sub(1).min(n) {
            for j in 0..p.n0.min(n) {
                if j == k {
                    continue;
                }
                let gap = (v[j] - v[k]).abs();
                if gap <= lo_gap {
                    gap_lower_ok = false;
                }
                if gap >= hi_gap {
                    gap_upper_ok = false;
                }
            }
        }

        let lambda = self.lambda;
        let mut r2_sup = 0.0f64;
        let mut clt_sup = 0.0f64;
        for (z, q) in self.grid.iter().zip(&self.qz) {
            // argmin of |Re(z + m_fc) - lambda v_i| over the sorted potential
            let target = q.re / lambda;
            let idx = v.partition_point(|&vi| vi > target);
            let mut argmin = idx.min(n - 1);
            if idx > 0 && (v[idx - 1] - target).abs() < (v[argmin] - target).abs() {
                argmin = idx - 1;
            }
            let mfc = q - z;
            let mut sum1 = Complex64::new(0.0, 0.0);
            let mut sum2_rest = 0.0f64;
            for (i, &vi) in v.iter().enumerate() {
                let d = lambda * vi - q;
                sum1 += d.inv();
                if i != argmin {
                    sum2_rest += 1.0 / d.norm_sqr();
                }
            }
            clt_sup = clt_sup.max((sum1 / nf - mfc).norm());
            if argmin + 1 < p.n0 {
                r2_sup = r2_sup.max(sum2_rest / nf);
            }
        }
        let clt_bound = self.clt_constant * nf.powf(1.5 * p.epsilon) / nf.sqrt();
        let pass = gap_lower_ok
            && gap_upper_ok
            && r2_sup < self.r2_threshold
            && clt_sup <= clt_bound;
        OmegaVReport { gap_lower_ok, gap_upper_ok, r2_sup, clt_sup, pass }
    }
}

/// One-shot wrapper building the grid context and checking a single sample.
pub fn check_omega_v(
    v: &[f64],
    lambda: f64,
    measure: &JacobiMeasure,
    params: &ScaleParams,
) -> Result<OmegaVReport> {
    Ok(OmegaVContext::new(measure, lambda, params)?.check(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{assemble, sample_wigner, Symmetry};
    use crate::measure::build_measure;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_h(n: usize, lambda: f64, seed: u64) -> DeformedMatrix {
        let m = build_measure(2.0, 2.0, &[1.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = m.sample_sorted(n, &mut rng);
        let w = sample_wigner(n, Symmetry::RealSymmetric, &mut rng);
        assemble(&v, lambda, w).unwrap()
    }

    #[test]
    fn resolvent_scalar_cases() {
        // H = 0 (1x1), z = i: G = i
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut w = sample_wigner(1, Symmetry::RealSymmetric, &mut rng);
        w.entries_mut()[0] = 0.0;
        let h = assemble(&[0.0], 0.0, w).unwrap();
        let g = resolvent_direct(&h, Complex64::new(0.0, 1.0));
        assert!((g.g_diag[0] - Complex64::new(0.0, 1.0)).norm() < 1e-14);

        // H = diag(2): G = 1/(2 - i)
        let mut w = sample_wigner(1, Symmetry::RealSymmetric, &mut rng);
        w.entries_mut()[0] = 2.0;
        let h = assemble(&[0.0], 0.0, w).unwrap();
        let g = resolvent_direct(&h, Complex64::new(0.0, 1.0));
        let expect = (Complex64::new(2.0, -1.0)).inv();
        assert!((g.g_diag[0] - expect).norm() < 1e-14);
    }

    #[test]
    fn stieltjes_hand_values() {
        let z = Complex64::new(0.0, 1.0);
        let m = stieltjes_from_spectrum(&[0.0], z);
        assert!((m - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        let m = stieltjes_from_spectrum(&[1.0, -1.0], z);
        assert!((m - Complex64::new(0.0, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn trace_matches_spectrum_oracle() {
        let h = random_h(30, 2.0, 7);
        let z = Complex64::new(0.4, 0.8);
        let eigs = spectral_decompose(&h, 0).unwrap().eigenvalues;
        let via_eigs = stieltjes_from_spectrum(&eigs, z);
        let via_solve = resolvent_direct(&h, z).m;
        assert!((via_eigs - via_solve).norm() < 1e-10);
    }

    #[test]
    fn schur_and_ward_identities() {
        for (n, seed) in [(2usize, 3u64), (10, 4), (50, 5)] {
            let h = random_h(n, 1.5, seed);
            let z = Complex64::new(0.3, 0.7);
            let i = n / 2;
            assert!(schur_check(&h, i, z) <= 1e-10);
            let w = ward_check(&h, i, z);
            assert!(w <= 1e-10 / (0.7f64 * 0.7), "ward residual {w}");
        }
    }

    #[test]
    fn minor_trace_distance() {
        // |m - m^{(i)}| <= 2/(N eta)
        let h = random_h(40, 1.5, 9);
        let z = Complex64::new(0.1, 0.5);
        let full = resolvent_direct(&h, z).m;
        let (g, _) = minor_resolvent_matrix(&h, 3, z);
        let m = 39;
        let minor_m = (0..m).map(|s| g[s * m + s]).sum::<Complex64>() / 40.0;
        assert!((full - minor_m).norm() <= 2.0 / (40.0 * 0.5));
    }

    #[test]
    fn z_var_small_cases() {
        // N = 2, i = 0: Z_0 = (|w_01|^2 - 1/2) / (lambda v_1 + w_11 - z)
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let w = sample_wigner(2, Symmetry::RealSymmetric, &mut rng);
        let v = [0.3, -0.4];
        let lambda = 1.2;
        let h = assemble(&v, lambda, w.clone()).unwrap();
        let z = Complex64::new(0.2, 0.9);
        let expect = (w.entry(0, 1).norm_sqr() - 0.5)
            * (lambda * v[1] + w.entry(1, 1) - z).inv();
        assert!((z_var(&h, 0, z) - expect).norm() < 1e-12);

        // diagonal Wigner part: Z_i = -m^{(i)}
        let mut w = sample_wigner(6, Symmetry::RealSymmetric, &mut rng);
        let n = 6;
        for i in 0..n {
            for j in 0..i {
                w.entries_mut()[i * (i + 1) / 2 + j] = 0.0;
            }
        }
        let v = [0.5, 0.4, 0.2, 0.0, -0.3, -0.6];
        let h = assemble(&v, 1.0, w).unwrap();
        let (g, _) = minor_resolvent_matrix(&h, 2, z);
        let m = n - 1;
        let minor_m = (0..m).map(|s| g[s * m + s]).sum::<Complex64>() / n as f64;
        assert!((z_var(&h, 2, z) + minor_m).norm() < 1e-12);
    }

    #[test]
    fn z_var_centered_over_row_redraws() {
        // fixed minor; the partial expectation over row i vanishes
        let n = 60;
        let h = random_h(n, 2.0, 21);
        let i = 0;
        let z = Complex64::new(2.0, 0.6);
        let (g, keep) = minor_resolvent_matrix(&h, i, z);
        let m = n - 1;
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let sd_off = (1.0f64 / n as f64).sqrt();
        let trials = 10_000;
        let mut vals = Vec::with_capacity(trials);
        use rand_distr::StandardNormal;
        for _ in 0..trials {
            let row: Vec<f64> = (0..m).map(|_| {
                let g: f64 = rng.sample(StandardNormal);
                sd_off * g
            }).collect();
            let mut acc = Complex64::new(0.0, 0.0);
            for s in 0..m {
                acc += (row[s] * row[s] - 1.0 / n as f64) * g[s * m + s];
                for t in 0..m {
                    if t != s {
                        acc += row[s] * g[s * m + t] * row[t];
                    }
                }
            }
            vals.push(acc);
        }
        let _ = keep;
        let mean = vals.iter().sum::<Complex64>() / trials as f64;
        let var = vals
            .iter()
            .map(|x| (x - mean).norm_sqr())
            .sum::<f64>()
            / (trials - 1) as f64;
        let band = 4.0 * var.sqrt() / (trials as f64).sqrt();
        assert!(mean.norm() <= band, "|mean| = {} vs band {band}", mean.norm());
    }

    #[test]
    fn fluctuation_average_matches_zvar_route() {
        let n = 60;
        let h = random_h(n, 2.0, 31);
        let z = Complex64::new(2.4, 0.3);
        let n0 = 4;
        let fast = fluctuation_average(&h, z, n0);
        let mut slow = Complex64::new(0.0, 0.0);
        for a in (n0 - 1)..n {
            slow += z_var(&h, a, z);
        }
        slow /= n as f64;
        assert!((fast - slow).norm() < 1e-9, "{fast} vs {slow}");

        // degenerate n0 = N
        let single = fluctuation_average(&h, z, n);
        assert!((single - z_var(&h, n - 1, z) / n as f64).norm() < 1e-9);
    }

    #[test]
    fn scale_params_guard() {
        assert!(ScaleParams::new(1000, 2.0, 0.05, 5).is_ok());
        assert!(ScaleParams::new(1000, 2.0, 3.0, 5).is_err());
        assert!(ScaleParams::new(1000, 0.8, 0.05, 5).is_err());
    }

    #[test]
    fn omega_v_gap_conditions() {
        let measure = build_measure(2.0, 2.0, &[1.0]).unwrap();
        let n = 10_000;
        let params = ScaleParams::new(n, 2.0, 0.05, 5).unwrap();
        let ctx = OmegaVContext::new(&measure, 2.0, &params).unwrap();

        // duplicated top value: lower gap violated
        let mut v: Vec<f64> = (0..n).map(|i| 0.9 - 0.8 * (i as f64) / n as f64).collect();
        v[1] = v[0];
        let report = ctx.check(&v);
        assert!(!report.gap_lower_ok);

        // evenly spaced top values at spacing 2 kappa0 pass both gap checks
        let k0 = params.kappa0;
        let mut v: Vec<f64> = Vec::with_capacity(n);
        for i in 0..5 {
            v.push(1.0 - 2.0 * k0 * (i + 1) as f64);
        }
        for i in 5..n {
            v.push(0.5 - (i as f64) / n as f64);
        }
        let report = ctx.check(&v);
        assert!(report.gap_lower_ok && report.gap_upper_ok);
    }
}
