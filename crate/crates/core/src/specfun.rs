//! Modified spherical Bessel functions of the first kind, their logarithmic
//! derivative ratios, the bulk response factor `kappa` of the dispersion
//! relation, and Legendre polynomials.
//!
//! The ratio `rho_l(r) = r i_l'(r) / i_l(r)` is evaluated from the continued
//! fraction
//!
//! ```text
//! rho_l(r) = l + r^2 / (2l+3 + r^2 / (2l+5 + r^2 / (2l+7 + ...)))
//! ```
//!
//! which follows from `i_l' = i_{l+1} + (l/r) i_l` and the three-term
//! recurrence `i_{l-1} - i_{l+1} = (2l+1)/r i_l`. Every partial numerator and
//! denominator is positive, so the evaluation never cancels and never
//! overflows. The fraction needs roughly `r` terms before it settles, so past
//! [`LARGE_ARG`] the exact finite expansion
//! `i_l(r) = e^r / (2r) sum_k (-1)^k (l+k)! / (k! (l-k)! (2r)^k)` is used
//! instead (the `e^{-r}` companion term is below rounding there).

use crate::error::{Error, Result};

/// Largest supported Bessel / Legendre order.
pub const MAX_ORDER: usize = 200;

/// Largest argument accepted by [`mod_sph_bessel_i`]; `sinh` overflows past ~710.
pub const BESSEL_I_MAX_ARG: f64 = 700.0;

/// `lim_{r -> 0+} tilde_kappa(r)`.
pub const TILDE_KAPPA_AT_ZERO: f64 = 1.0 / 3.0;

const CF_MAX_ITER: usize = 10_000;
const CF_TOL: f64 = 1e-14;
/// Below this argument the ratio and `tilde_kappa` use truncated Taylor series.
const TAYLOR_RADIUS: f64 = 1e-4;
const LENTZ_TINY: f64 = 1e-300;
/// Switch point from the continued fraction to the large-argument expansion.
pub const LARGE_ARG: f64 = 5000.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselRatioResult {
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
}

fn check_order(l: usize) -> Result<()> {
    if l > MAX_ORDER {
        return Err(Error::InvalidOrder { l, cap: MAX_ORDER });
    }
    Ok(())
}

fn check_nonnegative(r: f64) -> Result<()> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::Domain { value: r, domain: "r >= 0" });
    }
    Ok(())
}

/// Evaluates `2l+3 + x / (2l+5 + x / (2l+7 + ...))` with the modified Lentz method.
fn ratio_denominator(l: usize, x: f64) -> std::result::Result<(f64, usize), usize> {
    let b = |k: usize| (2 * l + 3 + 2 * k) as f64;
    let mut f = b(0);
    let mut c = f;
    let mut d = 0.0;
    for k in 1..=CF_MAX_ITER {
        d = b(k) + x * d;
        if d.abs() < LENTZ_TINY {
            d = LENTZ_TINY;
        }
        d = 1.0 / d;
        c = b(k) + x / c;
        if c.abs() < LENTZ_TINY {
            c = LENTZ_TINY;
        }
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < CF_TOL {
            return Ok((f, k));
        }
    }
    Err(CF_MAX_ITER)
}

/// Four-term Taylor expansion of `rho_l(r) - l` in `x = r^2`.
///
/// `i_l(r) ∝ r^l S(x)` with `S(x) = sum_k c_k x^k`,
/// `c_k = c_{k-1} / (2k (2l+2k+1))`, so `rho_l - l = 2x S'(x) / S(x)`.
fn rho_taylor(l: usize, r: f64) -> f64 {
    let mut s = [0.0; 5];
    s[0] = 1.0;
    for k in 1..5 {
        s[k] = s[k - 1] / ((2 * k) as f64 * (2 * l + 2 * k + 1) as f64);
    }
    let t: Vec<f64> = (0..5).map(|k| 2.0 * k as f64 * s[k]).collect();
    let mut q = [0.0; 5];
    for n in 1..5 {
        q[n] = t[n] - (1..=n).map(|m| s[m] * q[n - m]).sum::<f64>();
    }
    let x = r * r;
    let series = q[4].mul_add(x, q[3]).mul_add(x, q[2]).mul_add(x, q[1]) * x;
    l as f64 + series
}

/// `rho_l(r) = r - 1 - sum_k k c_k / sum_k c_k` with `c_k` the terms of the
/// finite expansion at `t = 1/r`. Cancellation grows like `exp(l^2 / r)`.
fn rho_large(l: usize, r: f64) -> f64 {
    let t = 1.0 / r;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut weighted = 0.0;
    for k in 1..=l {
        let kf = k as f64;
        term *= -((l + k) as f64) * ((l - k + 1) as f64) * t / (2.0 * kf);
        sum += term;
        weighted += kf * term;
    }
    r - 1.0 - weighted / sum
}

/// `rho_l(r) = r i_l'(r) / i_l(r)`; exactly `l` at `r = 0`.
pub fn bessel_ratio_rho(l: usize, r: f64) -> Result<BesselRatioResult> {
    check_order(l)?;
    check_nonnegative(r)?;
    if r == 0.0 {
        return Ok(BesselRatioResult { value: l as f64, converged: true, iterations: 0 });
    }
    if r < TAYLOR_RADIUS {
        return Ok(BesselRatioResult { value: rho_taylor(l, r), converged: true, iterations: 0 });
    }
    if r > LARGE_ARG {
        return Ok(BesselRatioResult { value: rho_large(l, r), converged: true, iterations: 0 });
    }
    let x = r * r;
    match ratio_denominator(l, x) {
        Ok((den, iterations)) => Ok(BesselRatioResult { value: l as f64 + x / den, converged: true, iterations }),
        Err(iterations) => Err(Error::NoConvergence { l, r, iterations }),
    }
}

/// `i_l(r) = sqrt(pi / (2r)) I_{l+1/2}(r)`, built upward from `i_0 = sinh(r)/r`
/// using the continued-fraction ratios `i_{k+1}/i_k`.
pub fn mod_sph_bessel_i(l: usize, r: f64) -> Result<f64> {
    check_order(l)?;
    check_nonnegative(r)?;
    if r > BESSEL_I_MAX_ARG {
        return Err(Error::OverflowRisk { r, limit: BESSEL_I_MAX_ARG });
    }
    if r == 0.0 {
        return Ok(if l == 0 { 1.0 } else { 0.0 });
    }
    let mut value = if r < 1e-8 { 1.0 + r * r / 6.0 } else { r.sinh() / r };
    let x = r * r;
    for k in 0..l {
        let (den, _) = ratio_denominator(k, x).map_err(|iterations| Error::NoConvergence { l: k, r, iterations })?;
        value *= r / den;
    }
    Ok(value)
}

/// `kappa_{D,l}(omega) = D rho_l(sqrt(omega / D))`.
pub fn kappa(diffusion: f64, l: usize, omega: f64) -> Result<f64> {
    if !(diffusion > 0.0) || !diffusion.is_finite() {
        return Err(Error::Domain { value: diffusion, domain: "0 < D < inf" });
    }
    if !(omega >= 0.0) {
        return Err(Error::Domain { value: omega, domain: "omega >= 0" });
    }
    if omega == 0.0 {
        return Ok(diffusion * l as f64);
    }
    Ok(diffusion * bessel_ratio_rho(l, (omega / diffusion).sqrt())?.value)
}

/// `tilde_kappa(r) = (r cosh r - sinh r) / (r^2 sinh r) = rho_0(r) / r^2`.
///
/// Returns [`TILDE_KAPPA_AT_ZERO`] for `r = 0`.
pub fn tilde_kappa(r: f64) -> f64 {
    debug_assert!(r >= 0.0);
    if r < TAYLOR_RADIUS {
        // 1/3 - r^2/45 + 2 r^4/945 - r^6/4725
        let x = r * r;
        return (-1.0 / 4725.0f64).mul_add(x, 2.0 / 945.0).mul_add(x, -1.0 / 45.0).mul_add(x, TILDE_KAPPA_AT_ZERO);
    }
    if r < 1.0 {
        // Lambert's continued fraction: 1 / (3 + r^2 / (5 + r^2 / (7 + ...)))
        let (den, _) = ratio_denominator(0, r * r).expect("converges for r < 1");
        return 1.0 / den;
    }
    (1.0 / r.tanh() - 1.0 / r) / r
}

/// Legendre polynomial `P_l(x)` by the three-term recurrence.
pub fn legendre_p(l: usize, x: f64) -> Result<f64> {
    check_order(l)?;
    if !(x.abs() <= 1.0) {
        return Err(Error::Domain { value: x, domain: "|x| <= 1" });
    }
    Ok(legendre_unchecked(l, x))
}

/// `[P_0(x), ..., P_{l_max}(x)]`.
pub fn legendre_table(l_max: usize, x: f64) -> Result<Vec<f64>> {
    check_order(l_max)?;
    if !(x.abs() <= 1.0) {
        return Err(Error::Domain { value: x, domain: "|x| <= 1" });
    }
    let mut table = Vec::with_capacity(l_max + 1);
    table.push(1.0);
    if l_max >= 1 {
        table.push(x);
    }
    for n in 1..l_max {
        let next = ((2 * n + 1) as f64 * x * table[n] - n as f64 * table[n - 1]) / (n + 1) as f64;
        table.push(next);
    }
    Ok(table)
}

pub(crate) fn legendre_unchecked(l: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if l == 0 {
        return prev;
    }
    for n in 1..l {
        let next = ((2 * n + 1) as f64 * x * cur - n as f64 * prev) / (n + 1) as f64;
        prev = cur;
        cur = next;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bessel_i_small_argument_limits() {
        assert_eq!(mod_sph_bessel_i(1, 0.0).unwrap(), 0.0);
        assert_eq!(mod_sph_bessel_i(0, 0.0).unwrap(), 1.0);
        // i_0(r) = sinh(r) / r
        assert_relative_eq!(mod_sph_bessel_i(0, 1.0).unwrap(), 1.1752011936438015, max_relative = 1e-14);
        assert_relative_eq!(mod_sph_bessel_i(0, 2.0).unwrap(), 1.8134302039235094, max_relative = 1e-14);
    }

    #[test]
    fn bessel_i_higher_order_matches_mpmath() {
        // sqrt(pi / 5) * besseli(3.5, 2.5) at 30 digits
        assert_relative_eq!(mod_sph_bessel_i(3, 2.5).unwrap(), 0.20843886982513896, max_relative = 1e-13);
        // small-argument behaviour r^l / (2l+1)!!
        let r = 1e-3;
        assert_relative_eq!(mod_sph_bessel_i(2, r).unwrap(), r * r / 15.0, max_relative = 1e-6);
    }

    #[test]
    fn bessel_i_error_paths() {
        assert!(matches!(mod_sph_bessel_i(201, 1.0), Err(Error::InvalidOrder { .. })));
        assert!(matches!(mod_sph_bessel_i(0, 800.0), Err(Error::OverflowRisk { .. })));
        assert!(mod_sph_bessel_i(0, -1.0).is_err());
    }

    #[test]
    fn rho_fixtures() {
        assert_eq!(bessel_ratio_rho(3, 0.0).unwrap().value, 3.0);
        // (r cosh r - sinh r) / (r sinh r) at r = 1
        assert_relative_eq!(bessel_ratio_rho(0, 1.0).unwrap().value, 0.3130352854993313, max_relative = 1e-14);
        // 200-term series oracle
        let r = bessel_ratio_rho(5, 10.0).unwrap();
        assert!(r.converged);
        assert_relative_eq!(r.value, 10.531038401810584, max_relative = 1e-13);
        assert!(r.value >= 5.0 && r.value <= 5.0 + 100.0 / 3.0);
        assert_relative_eq!(bessel_ratio_rho(20, 50.0).unwrap().value, 53.110752866981488, max_relative = 1e-13);
    }

    #[test]
    fn rho_is_stable_for_huge_arguments() {
        // r coth r - 1 -> r - 1
        let v = bessel_ratio_rho(0, 1e4).unwrap().value;
        assert_relative_eq!(v, 1e4 - 1.0, max_relative = 1e-12);
        assert!(bessel_ratio_rho(201, 1.0).is_err());
    }

    #[test]
    fn taylor_branch_joins_continued_fraction() {
        for l in [0usize, 1, 4, 30] {
            let r = TAYLOR_RADIUS * (1.0 - 1e-9);
            let below = bessel_ratio_rho(l, r).unwrap().value;
            let x = r * r;
            let (den, _) = ratio_denominator(l, x).unwrap();
            assert_relative_eq!(below, l as f64 + x / den, max_relative = 1e-14, epsilon = 1e-20);
        }
    }

    #[test]
    fn large_argument_expansion_joins_continued_fraction() {
        for l in [0usize, 1, 10, 60, 200] {
            let x = LARGE_ARG * LARGE_ARG;
            let (den, _) = ratio_denominator(l, x).unwrap();
            assert_relative_eq!(rho_large(l, LARGE_ARG), l as f64 + x / den, max_relative = 1e-11);
        }
        let big = bessel_ratio_rho(200, 1e6).unwrap().value;
        assert!((200.0..1e6).contains(&big));
    }

    #[test]
    fn kappa_fixtures() {
        assert_eq!(kappa(100.0, 1, 0.0).unwrap(), 100.0);
        assert_relative_eq!(kappa(1.0, 0, 1.0).unwrap(), 0.3130352854993313, max_relative = 1e-14);
        for (d, w) in [(3.0f64, 0.7f64), (100.0, 25.0), (0.5, 1e-3)] {
            let r = (w / d).sqrt();
            assert_relative_eq!(kappa(d, 0, w).unwrap(), w * tilde_kappa(r), max_relative = 1e-12);
        }
        assert!(kappa(0.0, 1, 1.0).is_err());
        assert!(kappa(1.0, 1, -1.0).is_err());
    }

    #[test]
    fn tilde_kappa_fixtures() {
        assert_eq!(tilde_kappa(0.0), TILDE_KAPPA_AT_ZERO);
        assert_relative_eq!(tilde_kappa(1.0), 0.3130352854993313, max_relative = 1e-14);
        assert_relative_eq!(tilde_kappa(2.0), 0.268657360363774, max_relative = 1e-14);
        assert_relative_eq!(tilde_kappa(0.5), 0.5 / 0.5f64.tanh() / 0.25 - 4.0, max_relative = 1e-12);
        assert!(tilde_kappa(1e3) > 0.0 && tilde_kappa(1e3) < 1e-2);
    }

    #[test]
    fn legendre_fixtures() {
        assert_eq!(legendre_p(0, 0.7).unwrap(), 1.0);
        assert_eq!(legendre_p(1, -0.3).unwrap(), -0.3);
        assert_relative_eq!(legendre_p(2, 0.5).unwrap(), -0.125, max_relative = 1e-15);
        assert!(matches!(legendre_p(2, 1.5), Err(Error::Domain { .. })));
        let table = legendre_table(6, 0.3).unwrap();
        for (l, p) in table.iter().enumerate() {
            assert_eq!(*p, legendre_p(l, 0.3).unwrap());
        }
    }
}
