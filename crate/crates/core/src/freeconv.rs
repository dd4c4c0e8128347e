//! The deterministic and empirical Pastur fixed-point equations, the deformed
//! semicircle density, and the edge constants in both coupling regimes.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::{EdgeSide, JacobiMeasure};

/// Residual demanded from a returned fixed point (contract is 1e-12).
const SOLVE_TOL: f64 = 1e-13;
/// Iteration budget per continuation level.
const LEVEL_BUDGET: usize = 10_000;
/// Geometric step of the continuation in Im z.
const ETA_STEP: f64 = 0.1;
/// Width of the guard band around the critical coupling.
const CRITICAL_GUARD: f64 = 1e-9;

/// A converged value of m_fc or its empirical analogue at one spectral
/// parameter.
#[derive(Debug, Clone, Copy)]
pub struct StieltjesSolution {
    pub z: Complex64,
    pub m: Complex64,
    pub residual: f64,
    pub iterations: usize,
    /// The weight R2(z) = Im m / (Im z + Im m), strictly below one.
    pub r2: f64,
}

/// Coupling regime of one spectral edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Supercritical,
    Subcritical,
}

/// Critical couplings, edge integrals, support endpoints and the rescaling
/// constants of the supercritical upper edge.
#[derive(Debug, Clone)]
pub struct EdgeConstants {
    pub lambda: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub tau_plus: f64,
    pub tau_minus: f64,
    pub l_plus: f64,
    pub l_minus: f64,
    pub upper_regime: Regime,
    pub lower_regime: Regime,
    /// C_lambda = (lambda^2 - lambda_+^2)/lambda; upper edge supercritical only.
    pub c_lambda: Option<f64>,
    /// Weibull constant; upper edge supercritical only.
    pub c_mu: Option<f64>,
    /// Upper-edge density exponent (the measure's b).
    pub beta_exp: f64,
    /// 1/2 - 1/(beta+1).
    pub frak_b: f64,
}

/// Closed-form semicircle transform (-z + sqrt(z^2 - 4))/2 on the Herglotz
/// branch; the lambda = 0 oracle.
pub fn semicircle_m(z: Complex64) -> Complex64 {
    assert!(z.im > 0.0, "semicircle_m needs Im z > 0");
    let s = (z * z - 4.0).sqrt();
    let m = 0.5 * (-z + s);
    if m.im >= 0.0 {
        m
    } else {
        0.5 * (-z - s)
    }
}

enum PasturMap<'a> {
    Measure { measure: &'a JacobiMeasure, lambda: f64 },
    Empirical { v: &'a [f64], lambda: f64 },
}

impl PasturMap<'_> {
    /// (F(m), dF/dm) for F the right side of the self-consistent equation.
    fn eval(&self, z: Complex64, m: Complex64) -> (Complex64, Complex64) {
        match self {
            PasturMap::Measure { measure, lambda } => {
                if *lambda == 0.0 {
                    let q = (z + m).inv();
                    (-q, q * q)
                } else {
                    let w = (z + m) / lambda;
                    let (c0, c1) = measure.cauchy_pair(w);
                    (-c0 / lambda, -c1 / (lambda * lambda))
                }
            }
            PasturMap::Empirical { v, lambda } => {
                let n = v.len() as f64;
                let mut f = Complex64::new(0.0, 0.0);
                let mut fp = Complex64::new(0.0, 0.0);
                for &vi in *v {
                    let g = (lambda * vi - z - m).inv();
                    f += g;
                    fp += g * g;
                }
                (f / n, fp / n)
            }
        }
    }
}

fn solve_level(
    map: &PasturMap<'_>,
    z: Complex64,
    warm: Complex64,
    iterations: &mut usize,
) -> Result<Complex64> {
    let mut m = if warm.im > 0.0 && warm.is_finite() {
        warm
    } else {
        Complex64::new(0.0, 1.0)
    };
    let mut best = m;
    let mut best_res = f64::INFINITY;
    for it in 0..LEVEL_BUDGET {
        *iterations += 1;
        let (f, fp) = map.eval(z, m);
        let res = (m - f).norm();
        if res < best_res {
            best_res = res;
            best = m;
        }
        if res <= SOLVE_TOL {
            return Ok(m);
        }
        // Newton step on g(m) = m - F(m); damped Picard keeps the Herglotz
        // branch whenever Newton leaves the upper half plane or stalls.
        let denom = Complex64::new(1.0, 0.0) - fp;
        let newton = if denom.norm() > 1e-14 {
            m - (m - f) / denom
        } else {
            Complex64::new(f64::NAN, f64::NAN)
        };
        let picard = 0.5 * (m + f);
        let cand = if it % 16 == 15 {
            picard
        } else if newton.is_finite() && newton.im > 0.0 {
            newton
        } else {
            picard
        };
        if !cand.is_finite() {
            return Err(Error::SolverNoConvergence { best, residual: best_res });
        }
        m = cand;
    }
    Err(Error::SolverNoConvergence { best, residual: best_res })
}

fn solve_map(map: &PasturMap<'_>, z: Complex64) -> Result<StieltjesSolution> {
    assert!(z.im > 0.0, "spectral parameter needs Im z > 0");
    let mut iterations = 0;
    let mut eta = z.im.max(10.0);
    let mut m = -Complex64::new(z.re, eta).inv();
    loop {
        let zz = Complex64::new(z.re, eta);
        m = solve_level(map, zz, m, &mut iterations)?;
        if eta <= z.im {
            break;
        }
        eta = (eta * ETA_STEP).max(z.im);
    }
    let (f, _) = map.eval(z, m);
    let residual = (m - f).norm();
    let r2 = m.im / (z.im + m.im);
    Ok(StieltjesSolution { z, m, residual, iterations, r2 })
}

/// m_fc(z): the fixed point of m -> int dmu(v)/(lambda v - z - m), reached by
/// eta-continuation from Im z = 10 with a damped-Picard/Newton iteration.
pub fn solve_mfc(measure: &JacobiMeasure, lambda: f64, z: Complex64) -> Result<StieltjesSolution> {
    solve_map(&PasturMap::Measure { measure, lambda }, z)
}

/// The empirical analogue with the integral replaced by the sample average
/// over the realized potential values.
pub fn solve_mfc_hat(v: &[f64], lambda: f64, z: Complex64) -> Result<StieltjesSolution> {
    assert!(!v.is_empty(), "empirical solver needs at least one point");
    solve_map(&PasturMap::Empirical { v, lambda }, z)
}

fn solve_map_warm(
    map: &PasturMap<'_>,
    z: Complex64,
    warm: Complex64,
) -> Result<StieltjesSolution> {
    assert!(z.im > 0.0);
    let mut iterations = 0;
    let m = match solve_level(map, z, warm, &mut iterations) {
        Ok(m) => m,
        // warm start outside the basin: fall back to full continuation
        Err(_) => return solve_map(map, z),
    };
    let (f, _) = map.eval(z, m);
    let residual = (m - f).norm();
    let r2 = m.im / (z.im + m.im);
    Ok(StieltjesSolution { z, m, residual, iterations, r2 })
}

/// Like `solve_mfc` but seeded from a nearby solution (grid marching).
pub fn solve_mfc_warm(
    measure: &JacobiMeasure,
    lambda: f64,
    z: Complex64,
    warm: Complex64,
) -> Result<StieltjesSolution> {
    solve_map_warm(&PasturMap::Measure { measure, lambda }, z, warm)
}

/// Like `solve_mfc_hat` but seeded from a nearby solution (grid marching).
pub fn solve_mfc_hat_warm(
    v: &[f64],
    lambda: f64,
    z: Complex64,
    warm: Complex64,
) -> Result<StieltjesSolution> {
    solve_map_warm(&PasturMap::Empirical { v, lambda }, z, warm)
}

/// Warm-started solutions at E + i eta for each eta in `etas` (descending).
pub fn solve_mfc_path(
    measure: &JacobiMeasure,
    lambda: f64,
    e: f64,
    etas: &[f64],
) -> Result<Vec<StieltjesSolution>> {
    let map = PasturMap::Measure { measure, lambda };
    let mut out = Vec::with_capacity(etas.len());
    let mut iterations = 0;
    let mut eta = etas[0].max(10.0);
    let mut m = -Complex64::new(e, eta).inv();
    let mut next = 0;
    loop {
        let zz = Complex64::new(e, eta);
        m = solve_level(&map, zz, m, &mut iterations)?;
        while next < etas.len() && eta <= etas[next] {
            let (f, _) = map.eval(zz, m);
            out.push(StieltjesSolution {
                z: zz,
                m,
                residual: (m - f).norm(),
                iterations,
                r2: m.im / (zz.im + m.im),
            });
            next += 1;
        }
        if next >= etas.len() {
            break;
        }
        eta = (eta * ETA_STEP).max(etas[next]);
    }
    Ok(out)
}

/// Densities are reconstructed by Stieltjes inversion with a three-point
/// Richardson extrapolation in eta.
const DENSITY_ETAS: [f64; 3] = [1e-3, 5e-4, 2.5e-4];

/// mu_fc(E) = pi^{-1} lim Im m_fc(E + i eta), clamped at zero near zero.
pub fn density_fc(measure: &JacobiMeasure, lambda: f64, e: f64) -> Result<f64> {
    let sols = solve_mfc_path(measure, lambda, e, &DENSITY_ETAS)?;
    let f: Vec<f64> = sols.iter().map(|s| s.m.im).collect();
    let a1 = 2.0 * f[1] - f[0];
    let a2 = 2.0 * f[2] - f[1];
    let val = (4.0 * a2 - a1) / 3.0 / std::f64::consts::PI;
    Ok(if val < 1e-8 { 0.0 } else { val })
}

/// tau and L for a subcritical edge: tau > lambda solves
/// int dmu/(lambda v - tau)^2 = 1 (strictly decreasing in tau), then
/// L = tau - int dmu/(lambda v - tau).
fn subcritical_upper_edge(measure: &JacobiMeasure, lambda: f64) -> (f64, f64) {
    let h = |tau: f64| {
        let (_, c1) = measure.cauchy_pair(Complex64::new(tau / lambda, 0.0));
        -c1.re / (lambda * lambda)
    };
    let mut lo = lambda + 1e-12;
    let mut hi = lambda + 1.0;
    let mut guard = 0;
    while h(hi) > 1.0 && guard < 80 {
        hi = lambda + (hi - lambda) * 2.0;
        guard += 1;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.abs().max(1.0) {
            break;
        }
    }
    let tau = 0.5 * (lo + hi);
    let c0 = measure.cauchy(Complex64::new(tau / lambda, 0.0)).re;
    let l = tau + c0 / lambda;
    (tau, l)
}

/// All edge constants for the coupling `lambda`, both edges classified.
pub fn edge_constants(measure: &JacobiMeasure, lambda: f64) -> Result<EdgeConstants> {
    if !(lambda > 0.0) {
        return Err(Error::Precondition(format!("coupling must be positive, got {lambda}")));
    }
    let (lambda_plus, tau_plus) = measure.edge_integrals(EdgeSide::Upper)?;
    let (lambda_minus, tau_minus) = measure.edge_integrals(EdgeSide::Lower)?;
    if (lambda - lambda_plus).abs() <= CRITICAL_GUARD {
        return Err(Error::CriticalCoupling { lambda, lambda_crit: lambda_plus });
    }
    if (lambda - lambda_minus).abs() <= CRITICAL_GUARD {
        return Err(Error::CriticalCoupling { lambda, lambda_crit: lambda_minus });
    }
    let (upper_regime, l_plus) = if lambda > lambda_plus {
        (Regime::Supercritical, lambda + tau_plus / lambda)
    } else {
        let (_, l) = subcritical_upper_edge(measure, lambda);
        (Regime::Subcritical, l)
    };
    let mirrored = measure.mirrored();
    let (lower_regime, l_minus) = if lambda > lambda_minus {
        (Regime::Supercritical, -(lambda + tau_minus / lambda))
    } else {
        let (_, l) = subcritical_upper_edge(&mirrored, lambda);
        (Regime::Subcritical, -l)
    };
    let beta_exp = measure.b();
    let frak_b = 0.5 - 1.0 / (beta_exp + 1.0);
    let (c_lambda, c_mu) = if upper_regime == Regime::Supercritical {
        let cl = (lambda * lambda - lambda_plus * lambda_plus) / lambda;
        let lim = measure.upper_edge_density_limit();
        let cm = (lambda / (lambda * lambda - lambda_plus * lambda_plus)).powf(beta_exp + 1.0) * lim;
        (Some(cl), Some(cm))
    } else {
        (None, None)
    };
    Ok(EdgeConstants {
        lambda,
        lambda_plus,
        lambda_minus,
        tau_plus,
        tau_minus,
        l_plus,
        l_minus,
        upper_regime,
        lower_regime,
        c_lambda,
        c_mu,
        beta_exp,
        frak_b,
    })
}

/// m_fc at the subcritical upper edge, exactly: tau - L_+ from the edge
/// equations (used as the oracle for the eta -> 0 extrapolation route).
pub fn mfc_at_subcritical_edge_exact(measure: &JacobiMeasure, lambda: f64) -> f64 {
    let (tau, l) = subcritical_upper_edge(measure, lambda);
    tau - l
}

/// m_fc(L_+) by eta -> 0 extrapolation. The square-root branch point at a
/// subcritical edge makes m(L_+ + i eta) = m0 + c sqrt(eta) + d eta + ...;
/// two successive eliminations over eta, eta/4, eta/16 remove both terms.
pub fn mfc_at_edge_extrapolated(measure: &JacobiMeasure, lambda: f64, l_plus: f64) -> Result<f64> {
    let eta0 = 1e-4;
    let etas = [eta0, eta0 / 4.0, eta0 / 16.0];
    let sols = solve_mfc_path(measure, lambda, l_plus, &etas)?;
    let m: Vec<f64> = sols.iter().map(|s| s.m.re).collect();
    let b1 = 2.0 * m[1] - m[0];
    let b2 = 2.0 * m[2] - m[1];
    Ok((4.0 * b2 - b1) / 3.0)
}

/// Empirical edge of mu_hat boxplus semicircle in the subcritical regime:
/// tau_hat > lambda max(v) with (1/N) sum (lambda v_j - tau_hat)^{-2} = 1,
/// then L_hat = tau_hat - (1/N) sum (lambda v_j - tau_hat)^{-1}.
pub fn empirical_edge(v: &[f64], lambda: f64) -> Result<(f64, f64)> {
    assert!(!v.is_empty());
    let n = v.len() as f64;
    let s2_at = |tau: f64| v.iter().map(|&vi| (lambda * vi - tau).powi(-2)).sum::<f64>() / n;
    let s1_at = |tau: f64| v.iter().map(|&vi| (lambda * vi - tau).recip()).sum::<f64>() / n;
    let precondition = s2_at(lambda);
    if precondition < 1.0 - 1e-12 {
        return Err(Error::NoSubcriticalEdge { sum: precondition });
    }
    let vmax = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let base = lambda * vmax;
    let mut lo = base + 1e-12;
    let mut hi = base + 1.0;
    let mut guard = 0;
    while s2_at(hi) > 1.0 && guard < 80 {
        hi = base + (hi - base) * 2.0;
        guard += 1;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if s2_at(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.abs().max(1.0) {
            break;
        }
    }
    let tau = 0.5 * (lo + hi);
    Ok((tau - s1_at(tau), tau))
}

/// Compares the solver's z + m_fc(z) near the supercritical upper edge with
/// its linear approximation, and returns the kernel integral T(z).
pub fn linear_edge_check(
    measure: &JacobiMeasure,
    lambda: f64,
    z: Complex64,
) -> Result<(Complex64, Complex64, Complex64)> {
    let ec = edge_constants(measure, lambda)?;
    if ec.upper_regime != Regime::Supercritical {
        return Err(Error::Precondition(format!(
            "linear edge approximation needs lambda > lambda_+ = {}",
            ec.lambda_plus
        )));
    }
    if z.im <= 0.0 || (z - Complex64::new(ec.l_plus, 0.0)).norm() > 0.1 {
        return Err(Error::Precondition(format!(
            "z = {z} is not within 0.1 of the upper edge {}",
            ec.l_plus
        )));
    }
    let sol = solve_mfc(measure, lambda, z)?;
    let actual = z + sol.m;
    let lp2 = ec.lambda_plus * ec.lambda_plus;
    let predicted = lambda - lambda * lambda / (lambda * lambda - lp2) * (ec.l_plus - z);
    let c0 = measure.cauchy(actual / lambda);
    let t_value = (ec.tau_plus - c0) / (lambda * (actual - lambda));
    Ok((predicted, actual, t_value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::build_measure;

    fn jacobi22() -> JacobiMeasure {
        build_measure(2.0, 2.0, &[1.0]).unwrap()
    }

    #[test]
    fn semicircle_values() {
        let m = semicircle_m(Complex64::new(0.0, 1.0));
        let expect = 0.5 * (5.0f64.sqrt() - 1.0);
        assert!((m - Complex64::new(0.0, expect)).norm() < 1e-14);

        let z = Complex64::new(0.0, 10.0);
        let m = semicircle_m(z);
        assert!((m + z.inv()).norm() <= 0.02);

        let m = semicircle_m(Complex64::new(0.0, 1e-8));
        assert!((m.im - 1.0).abs() < 1e-6);
    }

    #[test]
    fn lambda_zero_reduces_to_semicircle() {
        let m = jacobi22();
        for &z in &[
            Complex64::new(0.0, 1.0),
            Complex64::new(1.3, 0.2),
            Complex64::new(-2.5, 0.01),
            Complex64::new(1.999, 1e-3),
        ] {
            let sol = solve_mfc(&m, 0.0, z).unwrap();
            assert!((sol.m - semicircle_m(z)).norm() < 1e-12, "z = {z}");
            assert!(sol.residual <= 1e-12);
        }
    }

    #[test]
    fn solver_contract_generic_point() {
        let m = jacobi22();
        let sol = solve_mfc(&m, 2.0, Complex64::new(3.0, 1.0)).unwrap();
        assert!(sol.residual <= 1e-12);
        assert!(sol.m.im > 0.0);
        assert!(sol.r2 < 1.0);
    }

    #[test]
    fn edge_imaginary_part_is_eta_scale() {
        // supercritical edge: Im m_fc(L_+ + i eta) ~ eta
        let m = jacobi22();
        let sol = solve_mfc(&m, 2.0, Complex64::new(2.625, 1e-4)).unwrap();
        assert!(sol.m.im <= 10.0 * 1e-4, "Im m = {}", sol.m.im);
        assert!(sol.m.im > 0.0);
    }

    #[test]
    fn empirical_single_atom_reductions() {
        let sol = solve_mfc_hat(&[0.0], 7.0, Complex64::new(0.0, 1.0)).unwrap();
        assert!((sol.m - semicircle_m(Complex64::new(0.0, 1.0))).norm() < 1e-12);

        // one atom at 0.5 with lambda = 2 shifts the semicircle by 1
        let z = Complex64::new(0.0, 1.0);
        let sol = solve_mfc_hat(&[0.5], 2.0, z).unwrap();
        assert!((sol.m - semicircle_m(z - 1.0)).norm() < 1e-12);
    }

    #[test]
    fn empirical_tracks_deterministic() {
        use rand::SeedableRng;
        let m = jacobi22();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let v = m.sample_sorted(1000, &mut rng);
        let z = Complex64::new(3.0, 1.0);
        let hat = solve_mfc_hat(&v, 2.0, z).unwrap();
        let det = solve_mfc(&m, 2.0, z).unwrap();
        assert!((hat.m - det.m).norm() <= 0.1);
    }

    #[test]
    fn density_reconstruction() {
        let m = jacobi22();
        let center = density_fc(&m, 0.0, 0.0).unwrap();
        assert!((center - 1.0 / std::f64::consts::PI).abs() < 1e-5);
        assert!(density_fc(&m, 0.0, 3.0).unwrap() <= 1e-6);
        assert!(density_fc(&m, 2.0, 2.725).unwrap() <= 1e-6);
    }

    #[test]
    fn edge_constants_closed_forms() {
        let m = jacobi22();
        let ec = edge_constants(&m, 2.0).unwrap();
        assert!((ec.lambda_plus - (2.5f64).sqrt()).abs() < 1e-12);
        assert!((ec.tau_plus - 1.25).abs() < 1e-12);
        assert_eq!(ec.upper_regime, Regime::Supercritical);
        assert!((ec.l_plus - 2.625).abs() < 1e-12);
        assert!((ec.l_minus + 2.625).abs() < 1e-11);
        assert!((ec.c_lambda.unwrap() - 0.75).abs() < 1e-12);
        assert!((ec.c_mu.unwrap() - 80.0 / 9.0).abs() < 1e-10);
        assert!((ec.frak_b - 1.0 / 6.0).abs() < 1e-14);
        // L_+ > lambda + 1/lambda for centered measures with b > 1
        assert!(ec.l_plus > 2.0 + 0.5);
    }

    #[test]
    fn edge_constants_subcritical() {
        let m = jacobi22();
        let ec = edge_constants(&m, 1.0).unwrap();
        assert_eq!(ec.upper_regime, Regime::Subcritical);
        // R2 at the solved edge equals one
        let mfc = mfc_at_subcritical_edge_exact(&m, 1.0);
        let tau = ec.l_plus + mfc;
        let r2 = -m.cauchy_pair(Complex64::new(tau, 0.0)).1.re;
        assert!((r2 - 1.0).abs() < 1e-9, "R2 at edge = {r2}");
        // the edge lies right of the semicircle edge
        assert!(ec.l_plus > 2.0);
    }

    #[test]
    fn supercritical_edge_identity_by_limit() {
        // L_+ + m_fc(L_+) = lambda, evaluated by eta -> 0
        let m = jacobi22();
        let ec = edge_constants(&m, 2.0).unwrap();
        let s1 = solve_mfc(&m, 2.0, Complex64::new(ec.l_plus, 1e-5)).unwrap();
        let s2 = solve_mfc(&m, 2.0, Complex64::new(ec.l_plus, 1e-6)).unwrap();
        let re_extrap = (10.0 * s2.m.re - s1.m.re) / 9.0;
        assert!((ec.l_plus + re_extrap - 2.0).abs() < 1e-8);
    }

    #[test]
    fn critical_coupling_guard() {
        let m = jacobi22();
        match edge_constants(&m, (2.5f64).sqrt()) {
            Err(Error::CriticalCoupling { .. }) => {}
            other => panic!("expected CriticalCoupling, got {other:?}"),
        }
    }

    #[test]
    fn extrapolated_edge_value_matches_exact() {
        let m = jacobi22();
        let ec = edge_constants(&m, 1.0).unwrap();
        let exact = mfc_at_subcritical_edge_exact(&m, 1.0);
        let extrap = mfc_at_edge_extrapolated(&m, 1.0, ec.l_plus).unwrap();
        assert!((exact - extrap).abs() < 1e-6, "{exact} vs {extrap}");
    }

    #[test]
    fn empirical_edge_examples() {
        let (l, tau) = empirical_edge(&[0.0], 1.0).unwrap();
        assert!((tau - 1.0).abs() < 1e-9);
        assert!((l - 2.0).abs() < 1e-9);

        let v = [0.5, -0.5];
        let (l, tau) = empirical_edge(&v, 0.5).unwrap();
        let n = v.len() as f64;
        let r2: f64 = v.iter().map(|&vi| (0.5 * vi - tau).powi(-2)).sum::<f64>() / n;
        assert!((r2 - 1.0).abs() <= 1e-11);
        let s1: f64 = v.iter().map(|&vi| (0.5 * vi - tau).recip()).sum::<f64>() / n;
        assert!((l - (tau - s1)).abs() <= 1e-11);
    }

    #[test]
    fn linear_edge_approximation() {
        let m = jacobi22();
        let z = Complex64::new(2.625, 1e-3);
        let (pred, actual, t) = linear_edge_check(&m, 2.0, z).unwrap();
        assert!((pred - actual).norm() <= 1e-4, "deviation {}", (pred - actual).norm());
        let bound = (2.5f64).sqrt() / 2.0;
        assert!(t.norm() < bound, "|T| = {} vs {}", t.norm(), bound);

        // domain guard
        match linear_edge_check(&m, 2.0, Complex64::new(2.625, 10.0)) {
            Err(Error::Precondition(_)) => {}
            other => panic!("expected domain guard, got {other:?}"),
        }
        // close to the edge the kernel is near lambda_+^2/lambda^2
        let z = Complex64::new(2.625 - 0.002, 1e-3);
        let (_, _, t) = linear_edge_check(&m, 2.0, z).unwrap();
        assert!((t - Complex64::new(2.5 / 4.0, 0.0)).norm() <= 0.02, "T = {t}");
    }
}
