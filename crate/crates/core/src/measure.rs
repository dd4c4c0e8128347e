//! The potential law mu(v) = Z^{-1} (1+v)^a (1-v)^b d(v) on [-1, 1]:
//! quadrature, moments, edge integrals, CDF/quantile tables and sampling.

use std::sync::OnceLock;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::tridiag::ql_eigen_first_row;

/// Escalation ladder for the user-facing integrator.
const GJ_ORDERS: [usize; 5] = [32, 64, 128, 256, 512];
/// Relative agreement between successive orders.
const GJ_RTOL: f64 = 1e-11;
/// Order of the mapped Gauss-Jacobi rules used on edge panels.
const EDGE_ORDER: usize = 32;
/// Number of cells in the CDF table.
const CDF_CELLS: usize = 4096;
/// Absolute tolerance of the quantile in CDF space.
const QUANTILE_TOL: f64 = 1e-10;

/// Which endpoint of the support an edge quantity refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeSide {
    Upper,
    Lower,
}

/// Gauss-Jacobi rule for the weight (1-x)^p (1+x)^q on (-1, 1).
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub order: usize,
}

/// Nodes and weights by Golub-Welsch: eigendecomposition of the Jacobi
/// recurrence matrix; weights from the squared first eigenvector components.
pub fn gauss_jacobi(p: f64, q: f64, n: usize) -> QuadratureRule {
    assert!(p > -1.0 && q > -1.0, "Jacobi exponents must exceed -1");
    assert!(n >= 1);
    let mass = (std::f64::consts::LN_2 * (p + q + 1.0) + ln_gamma(p + 1.0) + ln_gamma(q + 1.0)
        - ln_gamma(p + q + 2.0))
        .exp();
    let mut diag = Vec::with_capacity(n);
    let mut off = Vec::with_capacity(n.saturating_sub(1));
    for k in 0..n {
        let kf = k as f64;
        let alpha = if k == 0 {
            (q - p) / (p + q + 2.0)
        } else {
            (q * q - p * p) / ((2.0 * kf + p + q) * (2.0 * kf + p + q + 2.0))
        };
        diag.push(alpha);
    }
    for k in 1..n {
        let kf = k as f64;
        let beta = if k == 1 {
            4.0 * (p + 1.0) * (q + 1.0) / ((p + q + 2.0).powi(2) * (p + q + 3.0))
        } else {
            4.0 * kf * (kf + p) * (kf + q) * (kf + p + q)
                / ((2.0 * kf + p + q).powi(2) * (2.0 * kf + p + q + 1.0) * (2.0 * kf + p + q - 1.0))
        };
        off.push(beta.sqrt());
    }
    let (nodes, first) = ql_eigen_first_row(&diag, &off).expect("Jacobi matrix QL cannot fail");
    let weights = first.iter().map(|&c| mass * c * c).collect();
    QuadratureRule { nodes, weights, order: n }
}

/// Lanczos log-gamma (g = 7, 9 coefficients), accurate to ~2e-10 relative.
fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        // reflection
        return (std::f64::consts::PI / (std::f64::consts::PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Power with a fast path for small integer exponents.
#[inline]
fn xpow(base: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else if e.fract() == 0.0 && e.abs() <= 64.0 {
        base.powi(e as i32)
    } else {
        base.powf(e)
    }
}

#[derive(Debug, Clone)]
struct CdfTable {
    v: Vec<f64>,
    c: Vec<f64>,
    /// FC-limited slopes dv/dp at the nodes, for the monotone cubic inverse.
    s: Vec<f64>,
}

/// The potential law: exponents `a` (lower edge), `b` (upper edge), polynomial
/// weight factor d(v) with positive values on [-1, 1], normalization `z_norm`.
#[derive(Debug)]
pub struct JacobiMeasure {
    a: f64,
    b: f64,
    d_coeffs: Vec<f64>,
    z_norm: f64,
    base_rules: OnceLock<Vec<QuadratureRule>>,
    edge_lo: OnceLock<QuadratureRule>,
    edge_hi: OnceLock<QuadratureRule>,
    gl: &'static QuadratureRule,
    cdf_table: OnceLock<CdfTable>,
}

impl Clone for JacobiMeasure {
    fn clone(&self) -> Self {
        JacobiMeasure {
            a: self.a,
            b: self.b,
            d_coeffs: self.d_coeffs.clone(),
            z_norm: self.z_norm,
            base_rules: OnceLock::new(),
            edge_lo: OnceLock::new(),
            edge_hi: OnceLock::new(),
            gl: self.gl,
            cdf_table: OnceLock::new(),
        }
    }
}

impl PartialEq for JacobiMeasure {
    fn eq(&self, other: &Self) -> bool {
        self.a == other.a && self.b == other.b && self.d_coeffs == other.d_coeffs
    }
}

fn gl_interior() -> &'static QuadratureRule {
    static RULE: OnceLock<QuadratureRule> = OnceLock::new();
    RULE.get_or_init(|| gauss_jacobi(0.0, 0.0, 24))
}

/// Builds the measure: validates the exponents and the sign of d on a fine
/// grid, then fixes Z by quadrature so the total mass is one.
pub fn build_measure(a: f64, b: f64, d_coeffs: &[f64]) -> Result<JacobiMeasure> {
    if !(a > -1.0) || !(b > -1.0) {
        return Err(Error::NotIntegrable { a, b });
    }
    let scan = 4096;
    for i in 0..=scan {
        let v = -1.0 + 2.0 * (i as f64) / (scan as f64);
        let dv = poly_eval(d_coeffs, v);
        if !(dv > 0.0) {
            return Err(Error::NonPositiveWeight { v, value: dv });
        }
    }
    // Z = int (1+v)^a (1-v)^b d(v) dv, escalated until stable.
    let mut z = f64::NAN;
    let mut prev = f64::NAN;
    for &n in &GJ_ORDERS {
        let rule = gauss_jacobi(b, a, n);
        let est: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&x, &w)| w * poly_eval(d_coeffs, x))
            .sum();
        if prev.is_finite() && (est - prev).abs() <= GJ_RTOL * est.abs().max(1.0) {
            z = est;
            break;
        }
        prev = est;
        z = est;
    }
    let m = JacobiMeasure {
        a,
        b,
        d_coeffs: d_coeffs.to_vec(),
        z_norm: z,
        base_rules: OnceLock::new(),
        edge_lo: OnceLock::new(),
        edge_hi: OnceLock::new(),
        gl: gl_interior(),
        cdf_table: OnceLock::new(),
    };
    let mass = m.integrate(&|_| 1.0)?;
    assert!(
        (mass - 1.0).abs() <= 1e-12,
        "normalization check failed: total mass {mass}"
    );
    Ok(m)
}

fn poly_eval(coeffs: &[f64], v: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * v + c)
}

impl JacobiMeasure {
    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn d_coeffs(&self) -> &[f64] {
        &self.d_coeffs
    }
    pub fn z_norm(&self) -> f64 {
        self.z_norm
    }

    /// Density mu(v); zero outside [-1, 1].
    pub fn density(&self, v: f64) -> f64 {
        if !(-1.0..=1.0).contains(&v) {
            return 0.0;
        }
        xpow(1.0 + v, self.a) * xpow(1.0 - v, self.b) * poly_eval(&self.d_coeffs, v) / self.z_norm
    }

    /// d(1) / Z * 2^a = lim_{v->1} mu(v)/(1-v)^b, in closed form.
    pub fn upper_edge_density_limit(&self) -> f64 {
        xpow(2.0, self.a) * poly_eval(&self.d_coeffs, 1.0) / self.z_norm
    }

    /// The mirror image v -> -v: swaps the roles of the two edges.
    pub fn mirrored(&self) -> JacobiMeasure {
        let d: Vec<f64> = self
            .d_coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| if k % 2 == 0 { c } else { -c })
            .collect();
        JacobiMeasure {
            a: self.b,
            b: self.a,
            d_coeffs: d,
            z_norm: self.z_norm,
            base_rules: OnceLock::new(),
            edge_lo: OnceLock::new(),
            edge_hi: OnceLock::new(),
            gl: self.gl,
            cdf_table: OnceLock::new(),
        }
    }

    fn base_rules(&self) -> &[QuadratureRule] {
        self.base_rules
            .get_or_init(|| GJ_ORDERS.iter().map(|&n| gauss_jacobi(self.b, self.a, n)).collect())
    }

    /// int f dmu by Gauss-Jacobi escalation 32 -> 512.
    pub fn integrate(&self, f: &dyn Fn(f64) -> f64) -> Result<f64> {
        let mut prev = f64::NAN;
        for rule in self.base_rules() {
            let est: f64 = rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .map(|(&x, &w)| w * poly_eval(&self.d_coeffs, x) * f(x))
                .sum::<f64>()
                / self.z_norm;
            if prev.is_finite() && (est - prev).abs() <= GJ_RTOL * est.abs().max(1.0) {
                return Ok(est);
            }
            prev = est;
        }
        // one more comparison at the top order against half order was already
        // done; report the last two estimates
        let rule = gauss_jacobi(self.b, self.a, 2 * GJ_ORDERS[GJ_ORDERS.len() - 1]);
        let last: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&x, &w)| w * poly_eval(&self.d_coeffs, x) * f(x))
            .sum::<f64>()
            / self.z_norm;
        if (last - prev).abs() <= GJ_RTOL * last.abs().max(1.0) {
            return Ok(last);
        }
        Err(Error::QuadratureNoConvergence { prev, last })
    }

    /// int dmu / (1 -+ v)^k with the singular factor folded into the Jacobi
    /// weight, so polynomial d integrates exactly.
    fn shifted_moment(&self, side: EdgeSide, k: u32) -> Result<f64> {
        let (p, q) = match side {
            EdgeSide::Upper => (self.b - k as f64, self.a),
            EdgeSide::Lower => (self.b, self.a - k as f64),
        };
        let mut prev = f64::NAN;
        for &n in &GJ_ORDERS {
            let rule = gauss_jacobi(p, q, n);
            let est: f64 = rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .map(|(&x, &w)| w * poly_eval(&self.d_coeffs, x))
                .sum::<f64>()
                / self.z_norm;
            if prev.is_finite() && (est - prev).abs() <= GJ_RTOL * est.abs().max(1.0) {
                return Ok(est);
            }
            prev = est;
        }
        Err(Error::QuadratureNoConvergence { prev, last: prev })
    }

    /// (lambda_crit, tau) for one edge: lambda_crit = (int dmu/(1 -+ v)^2)^{1/2},
    /// tau = int dmu/(1 -+ v). Requires the matching exponent to exceed 1.
    pub fn edge_integrals(&self, side: EdgeSide) -> Result<(f64, f64)> {
        let exponent = match side {
            EdgeSide::Upper => self.b,
            EdgeSide::Lower => self.a,
        };
        if exponent <= 1.0 {
            return Err(Error::DivergentIntegral {
                side: match side {
                    EdgeSide::Upper => "upper",
                    EdgeSide::Lower => "lower",
                },
                exponent,
            });
        }
        let second = self.shifted_moment(side, 2)?;
        let first = self.shifted_moment(side, 1)?;
        Ok((second.sqrt(), first))
    }

    fn edge_lo_rule(&self) -> &QuadratureRule {
        self.edge_lo.get_or_init(|| gauss_jacobi(0.0, self.a, EDGE_ORDER))
    }
    fn edge_hi_rule(&self) -> &QuadratureRule {
        self.edge_hi.get_or_init(|| gauss_jacobi(self.b, 0.0, EDGE_ORDER))
    }

    /// int_{-1}^{r} dmu with the (1+v)^a factor folded into a mapped rule.
    fn lo_edge_mass(&self, r: f64) -> f64 {
        let rule = self.edge_lo_rule();
        let scale = 0.5 * (r + 1.0);
        if scale <= 0.0 {
            return 0.0;
        }
        let mut acc = 0.0;
        for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
            let v = -1.0 + scale * (1.0 + t);
            acc += w * xpow(1.0 - v, self.b) * poly_eval(&self.d_coeffs, v);
        }
        acc * xpow(scale, self.a + 1.0) / self.z_norm
    }

    /// int_{l}^{1} dmu with the (1-v)^b factor folded into a mapped rule.
    fn hi_edge_mass(&self, l: f64) -> f64 {
        let rule = self.edge_hi_rule();
        let scale = 0.5 * (1.0 - l);
        if scale <= 0.0 {
            return 0.0;
        }
        let mut acc = 0.0;
        for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
            let v = 1.0 - scale * (1.0 - t);
            acc += w * xpow(1.0 + v, self.a) * poly_eval(&self.d_coeffs, v);
        }
        acc * xpow(scale, self.b + 1.0) / self.z_norm
    }

    fn cdf_table(&self) -> &CdfTable {
        self.cdf_table.get_or_init(|| {
            let n = CDF_CELLS;
            let h = 2.0 / n as f64;
            let v: Vec<f64> = (0..=n).map(|i| -1.0 + h * i as f64).collect();
            let mut c = vec![0.0; n + 1];
            c[1] = self.lo_edge_mass(v[1]);
            for j in 1..n - 1 {
                let mut inc = 0.0;
                let mid = 0.5 * (v[j] + v[j + 1]);
                let half = 0.5 * (v[j + 1] - v[j]);
                for (&t, &w) in self.gl.nodes.iter().zip(&self.gl.weights) {
                    inc += w * self.density(mid + half * t);
                }
                c[j + 1] = c[j] + inc * half;
            }
            c[n] = c[n - 1] + self.hi_edge_mass(v[n - 1]);
            debug_assert!((c[n] - 1.0).abs() < 1e-11, "CDF endpoint {}", c[n]);
            // monotone cubic inverse: slopes dv/dp = 1/mu(v), FC-limited
            let mut s = vec![0.0; n + 1];
            for j in 0..=n {
                let sec_l = if j > 0 { (v[j] - v[j - 1]) / (c[j] - c[j - 1]).max(1e-300) } else { f64::INFINITY };
                let sec_r = if j < n { (v[j + 1] - v[j]) / (c[j + 1] - c[j]).max(1e-300) } else { f64::INFINITY };
                let cap = 3.0 * sec_l.min(sec_r);
                let dens = self.density(v[j]);
                let nat = if dens > 1e-300 { 1.0 / dens } else { f64::INFINITY };
                s[j] = nat.min(cap).min(1e300);
            }
            CdfTable { v, c, s }
        })
    }

    /// CDF(x) = mu((-inf, x]), from the table plus a partial-cell integral.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= -1.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        let table = self.cdf_table();
        let n = CDF_CELLS;
        let h = 2.0 / n as f64;
        let j = (((x + 1.0) / h) as usize).min(n - 1);
        let val = if j == 0 {
            self.lo_edge_mass(x)
        } else if j == n - 1 {
            1.0 - self.hi_edge_mass(x)
        } else {
            let mid = 0.5 * (table.v[j] + x);
            let half = 0.5 * (x - table.v[j]);
            let mut inc = 0.0;
            for (&t, &w) in self.gl.nodes.iter().zip(&self.gl.weights) {
                inc += w * self.density(mid + half * t);
            }
            table.c[j] + inc * half
        };
        val.clamp(0.0, 1.0)
    }

    /// Inverse CDF: monotone cubic start from the table, then guarded
    /// Newton/bisection until |CDF(v) - p| <= 1e-10.
    pub fn quantile(&self, p: f64) -> f64 {
        assert!((0.0..=1.0).contains(&p), "quantile needs p in [0, 1]");
        if p == 0.0 {
            return -1.0;
        }
        if p == 1.0 {
            return 1.0;
        }
        let table = self.cdf_table();
        // bracketing cell by binary search on the table CDF
        let idx = table.c.partition_point(|&cj| cj < p);
        let j = idx.saturating_sub(1).min(CDF_CELLS - 1);
        let (mut lo, mut hi) = (table.v[j], table.v[j + 1]);
        let (cl, cr) = (table.c[j], table.c[j + 1]);
        let mut x = if cr > cl {
            // cubic Hermite in p on the cell, FC-limited slopes
            let t = ((p - cl) / (cr - cl)).clamp(0.0, 1.0);
            let dp = cr - cl;
            let h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
            let h10 = t * (1.0 - t) * (1.0 - t);
            let h01 = t * t * (3.0 - 2.0 * t);
            let h11 = t * t * (t - 1.0);
            h00 * lo + h10 * dp * table.s[j] + h01 * hi + h11 * dp * table.s[j + 1]
        } else {
            0.5 * (lo + hi)
        };
        if !(lo..=hi).contains(&x) {
            x = 0.5 * (lo + hi);
        }
        for _ in 0..100 {
            let err = self.cdf(x) - p;
            if err.abs() <= QUANTILE_TOL {
                return x;
            }
            if err > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let dens = self.density(x);
            let newton = if dens > 1e-12 { x - err / dens } else { f64::NAN };
            x = if newton.is_finite() && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }
        x
    }

    /// n i.i.d. draws by inverse CDF, sorted descending (stable, so ties keep
    /// draw order).
    pub fn sample_sorted<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        assert!(n >= 1);
        let mut out: Vec<f64> = (0..n).map(|_| self.quantile(rng.random::<f64>())).collect();
        out.sort_by(|x, y| y.partial_cmp(x).unwrap());
        out
    }

    /// (C(w), C'(w)) with C(w) = int dmu(v)/(w - v), for w off [-1, 1].
    /// Pole-graded panels: dyadic Gauss-Legendre interiors around Re w, mapped
    /// Gauss-Jacobi panels at the endpoints so fractional exponents stay exact.
    /// Nodes and the kernel live in offset coordinates u = v - Re w; a steep
    /// kernel amplifies absolute node rounding otherwise.
    pub(crate) fn cauchy_pair(&self, w: Complex64) -> (Complex64, Complex64) {
        let c = w.re.clamp(-1.0, 1.0);
        let wc = Complex64::new(w.re - c, w.im);
        let dist = wc.norm();
        let delta = dist.clamp(1e-14, 0.5);
        let u_min = -1.0 - c;
        let u_max = 1.0 - c;

        let mut breaks: Vec<f64> = vec![u_min, u_max];
        if c > -1.0 && c < 1.0 {
            breaks.push(0.0);
        }
        let mut t = 0.25 * delta;
        while t < 2.0 {
            for cand in [-t, t] {
                if cand > u_min + 1e-15 && cand < u_max - 1e-15 {
                    breaks.push(cand);
                }
            }
            t *= 2.0;
        }
        breaks.sort_by(|x, y| x.partial_cmp(y).unwrap());
        breaks.dedup_by(|x, y| (*x - *y).abs() < 1e-15);

        let mut c0 = Complex64::new(0.0, 0.0);
        let mut c1 = Complex64::new(0.0, 0.0);
        let last = breaks.len() - 1;
        for k in 0..last {
            let (l, r) = (breaks[k], breaks[k + 1]);
            if k == 0 {
                // [-1, c + r] with (1+v)^a folded; 1 + v = scale (1 + t) exactly
                let rule = self.edge_lo_rule();
                let scale = 0.5 * (r - u_min);
                let fold = xpow(scale, self.a + 1.0) / self.z_norm;
                for (&tt, &wt) in rule.nodes.iter().zip(&rule.weights) {
                    let vp1 = scale * (1.0 + tt);
                    let v = -1.0 + vp1;
                    let u = u_min + vp1;
                    let dens = wt * fold * xpow(1.0 - v, self.b) * poly_eval(&self.d_coeffs, v);
                    let ker = (wc - u).inv();
                    c0 += dens * ker;
                    c1 -= dens * ker * ker;
                }
            } else if k == last - 1 {
                // [c + l, 1] with (1-v)^b folded; 1 - v = scale (1 - t) exactly
                let rule = self.edge_hi_rule();
                let scale = 0.5 * (u_max - l);
                let fold = xpow(scale, self.b + 1.0) / self.z_norm;
                for (&tt, &wt) in rule.nodes.iter().zip(&rule.weights) {
                    let omv = scale * (1.0 - tt);
                    let v = 1.0 - omv;
                    let u = u_max - omv;
                    let dens = wt * fold * xpow(1.0 + v, self.a) * poly_eval(&self.d_coeffs, v);
                    let ker = (wc - u).inv();
                    c0 += dens * ker;
                    c1 -= dens * ker * ker;
                }
            } else {
                let mid = 0.5 * (l + r);
                let half = 0.5 * (r - l);
                for (&tt, &wt) in self.gl.nodes.iter().zip(&self.gl.weights) {
                    let u = mid + half * tt;
                    let dens = wt * half * self.density(c + u);
                    let ker = (wc - u).inv();
                    c0 += dens * ker;
                    c1 -= dens * ker * ker;
                }
            }
        }
        (c0, c1)
    }

    /// C(w) alone.
    pub(crate) fn cauchy(&self, w: Complex64) -> Complex64 {
        self.cauchy_pair(w).0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn jacobi22() -> JacobiMeasure {
        build_measure(2.0, 2.0, &[1.0]).unwrap()
    }

    #[test]
    fn normalization_closed_forms() {
        // int (1-v^2)^2 dv = 16/15
        let m = jacobi22();
        assert!((m.z_norm() - 16.0 / 15.0).abs() < 1e-13);
        let u = build_measure(0.0, 0.0, &[1.0]).unwrap();
        assert!((u.z_norm() - 2.0).abs() < 1e-13);
    }

    #[test]
    fn negative_weight_rejected() {
        match build_measure(2.0, 2.0, &[-1.0]) {
            Err(Error::NonPositiveWeight { .. }) => {}
            other => panic!("expected NonPositiveWeight, got {other:?}"),
        }
        match build_measure(-1.5, 2.0, &[1.0]) {
            Err(Error::NotIntegrable { .. }) => {}
            other => panic!("expected NotIntegrable, got {other:?}"),
        }
    }

    #[test]
    fn density_values() {
        let m = jacobi22();
        assert!((m.density(0.0) - 15.0 / 16.0).abs() < 1e-14);
        assert_eq!(m.density(1.0), 0.0);
        assert_eq!(m.density(2.0), 0.0);
    }

    #[test]
    fn moments() {
        let m = jacobi22();
        assert!((m.integrate(&|_| 1.0).unwrap() - 1.0).abs() < 1e-11);
        assert!(m.integrate(&|v| v).unwrap().abs() < 1e-11);
        assert!((m.integrate(&|v| v * v).unwrap() - 1.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn edge_integrals_closed_form() {
        let m = jacobi22();
        let (lp, tp) = m.edge_integrals(EdgeSide::Upper).unwrap();
        assert!((lp - (2.5f64).sqrt()).abs() < 1e-12);
        assert!((tp - 1.25).abs() < 1e-12);
        let (lm, tm) = m.edge_integrals(EdgeSide::Lower).unwrap();
        assert!((lm - lp).abs() < 1e-11);
        assert!((tm - tp).abs() < 1e-11);
        // tau_+ > 1 for centered measures with b > 1
        assert!(tp > 1.0);
        let shallow = build_measure(2.0, 0.5, &[1.0]).unwrap();
        match shallow.edge_integrals(EdgeSide::Upper) {
            Err(Error::DivergentIntegral { .. }) => {}
            other => panic!("expected DivergentIntegral, got {other:?}"),
        }
    }

    #[test]
    fn quadrature_rule_invariants() {
        for &(p, q) in &[(2.0, 2.0), (0.0, 0.0), (1.5, -0.5)] {
            let rule = gauss_jacobi(p, q, 24);
            for w in rule.nodes.windows(2) {
                assert!(w[1] > w[0]);
            }
            assert!(rule.weights.iter().all(|&w| w > 0.0));
            assert!(rule.nodes.iter().all(|&x| x > -1.0 && x < 1.0));
            // degree <= 2n-1 exactness: agree with a larger rule on monomials
            let big = gauss_jacobi(p, q, 40);
            for k in [0usize, 1, 3, 7, 15, 31, 47] {
                let f = |x: f64| x.powi(k as i32);
                let i1: f64 = rule.nodes.iter().zip(&rule.weights).map(|(&x, &w)| w * f(x)).sum();
                let i2: f64 = big.nodes.iter().zip(&big.weights).map(|(&x, &w)| w * f(x)).sum();
                assert!((i1 - i2).abs() < 1e-12, "monomial {k} at ({p},{q}): {i1} vs {i2}");
            }
        }
    }

    #[test]
    fn quantile_contract() {
        let m = jacobi22();
        assert!(m.quantile(0.5).abs() < 1e-9);
        assert_eq!(m.quantile(0.0), -1.0);
        assert_eq!(m.quantile(1.0), 1.0);
        let mut prev = -1.0;
        for i in 0..=1000 {
            let p = i as f64 / 1000.0;
            let q = m.quantile(p);
            assert!(q >= prev - 1e-12, "quantile not monotone at p={p}");
            prev = q;
            if i != 0 && i != 1000 {
                assert!((m.cdf(q) - p).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn quantile_contract_fractional_exponents() {
        let m = build_measure(1.3, 2.7, &[1.0, 0.25]).unwrap();
        for i in 1..200 {
            let p = i as f64 / 200.0;
            let q = m.quantile(p);
            assert!((m.cdf(q) - p).abs() <= 1e-10, "p={p}");
        }
    }

    #[test]
    fn sampling_support_and_order() {
        let m = jacobi22();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let one = m.sample_sorted(1, &mut rng);
        assert!(one[0] >= -1.0 && one[0] <= 1.0);
        let five = m.sample_sorted(5, &mut rng);
        for w in five.windows(2) {
            assert!(w[0] >= w[1]);
        }
    }

    #[test]
    fn sampling_clt_mean() {
        // variance of v under a=b=2 is 1/7
        let m = jacobi22();
        let mut rng = ChaCha8Rng::seed_from_u64(20240917);
        let n = 100_000;
        let xs = m.sample_sorted(n, &mut rng);
        let mean: f64 = xs.iter().sum::<f64>() / n as f64;
        let band = 3.0 * (1.0f64 / 7.0).sqrt() / (n as f64).sqrt();
        assert!(mean.abs() <= band, "mean {mean} outside CLT band {band}");
    }

    #[test]
    fn sampling_kolmogorov_distance() {
        let m = jacobi22();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 100_000;
        let mut xs = m.sample_sorted(n, &mut rng);
        xs.reverse(); // ascending
        let mut ks = 0.0f64;
        for (i, &x) in xs.iter().enumerate() {
            let f = m.cdf(x);
            let hi = ((i + 1) as f64 / n as f64 - f).abs();
            let lo = (f - i as f64 / n as f64).abs();
            ks = ks.max(hi).max(lo);
        }
        assert!(ks <= 0.006, "KS distance {ks}");
    }

    #[test]
    fn cauchy_transform_against_known_values() {
        // uniform measure on [-1,1]: C(w) = (1/2) log((w+1)/(w-1))
        let u = build_measure(0.0, 0.0, &[1.0]).unwrap();
        for &w in &[
            Complex64::new(0.3, 0.5),
            Complex64::new(1.7, 0.0),
            Complex64::new(0.9, 1e-6),
            Complex64::new(-2.4, 3.0),
        ] {
            let exact = 0.5 * ((w + 1.0) / (w - 1.0)).ln();
            let (c0, c1) = u.cauchy_pair(w);
            assert!((c0 - exact).norm() < 1e-12, "C({w}) = {c0}, want {exact}");
            let dexact = 0.5 * ((w + 1.0).inv() - (w - 1.0).inv());
            assert!((c1 - dexact).norm() < 1e-9 * dexact.norm().max(1.0));
        }
    }

    #[test]
    fn cauchy_transform_near_edge_pole() {
        // a = b = 2 against a brute-force midpoint reference
        let m = jacobi22();
        let w = Complex64::new(0.999, 1e-5);
        let (c0, _) = m.cauchy_pair(w);
        // reference: split real integral via very fine composite Simpson on the
        // imaginary part (Poisson kernel) and principal-value real part using
        // symmetrized differences
        let nref = 2_000_000;
        let h = 2.0 / nref as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..nref {
            let v = -1.0 + (i as f64 + 0.5) * h;
            acc += h * m.density(v) * (w - v).inv();
        }
        assert!((c0 - acc).norm() < 5e-7, "panel {c0} vs midpoint {acc}");
    }
}
