//! Integer-order cylindrical Bessel functions of real argument.
//!
//! `J_m` is evaluated by the ascending series for small arguments and by
//! Miller's downward recurrence otherwise. When the argument exceeds every
//! requested order and is large enough for the Hankel asymptotic expansion,
//! `J_0`, `J_1`, `Y_0` and `Y_1` are taken from that expansion and both
//! families are carried upward. `Y_m` is always obtained by upward recurrence,
//! which is stable because `Y_m` grows with `m`.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Arguments below this use the ascending power series for `J`.
const SERIES_LIMIT: f64 = 1.0;

/// Arguments at or above this use the Hankel asymptotic expansion for the
/// order 0 and 1 seeds.
const ASYMPTOTIC_LIMIT: f64 = 25.0;

/// Rescaling threshold for the downward recurrence. Squares of values below
/// this stay finite.
const MILLER_RESCALE: f64 = 1e100;

fn check_finite(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("Bessel argument must be finite, got {x}")))
    }
}

fn check_positive(x: f64) -> Result<()> {
    check_finite(x)?;
    if x > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "Y_m and H_m are singular at x <= 0, got {x}"
        )))
    }
}

#[inline]
fn reflect_sign(m: i32) -> f64 {
    if m.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `J_m(x)` for integer `m` and `x >= 0`.
pub fn bessel_j(m: i32, x: f64) -> Result<f64> {
    check_finite(x)?;
    if x < 0.0 {
        return Err(Error::Domain(format!(
            "bessel_j is defined here for x >= 0, got {x}"
        )));
    }
    let order = m.unsigned_abs() as usize;
    let value = bessel_j_seq(order, x)?[order];
    Ok(if m < 0 { reflect_sign(m) * value } else { value })
}

/// `Y_m(x)` for integer `m` and `x > 0`.
pub fn bessel_y(m: i32, x: f64) -> Result<f64> {
    check_positive(x)?;
    let order = m.unsigned_abs() as usize;
    let value = bessel_y_seq(order, x)?[order];
    Ok(if m < 0 { reflect_sign(m) * value } else { value })
}

/// `H^(1)_m(x) = J_m(x) + j Y_m(x)`.
pub fn hankel1(m: i32, x: f64) -> Result<Complex64> {
    check_positive(x)?;
    let order = m.unsigned_abs() as usize;
    let value = hankel1_seq(order, x)?[order];
    Ok(if m < 0 { value * reflect_sign(m) } else { value })
}

/// `J_0(x), ..., J_max_order(x)`.
pub fn bessel_j_seq(max_order: usize, x: f64) -> Result<Vec<f64>> {
    check_finite(x)?;
    if x < 0.0 {
        return Err(Error::Domain(format!(
            "bessel_j is defined here for x >= 0, got {x}"
        )));
    }
    if x == 0.0 {
        let mut out = vec![0.0; max_order + 1];
        out[0] = 1.0;
        return Ok(out);
    }
    if x < SERIES_LIMIT {
        return Ok((0..=max_order).map(|m| j_series(m, x)).collect());
    }
    if x >= ASYMPTOTIC_LIMIT && (max_order as f64) < x {
        let (j0, j1, _, _) = asymptotic_seeds(x);
        return Ok(upward(j0, j1, max_order, x));
    }
    let mut out = j_miller(max_order, x);
    out.truncate(max_order + 1);
    Ok(out)
}

/// `Y_0(x), ..., Y_max_order(x)`.
pub fn bessel_y_seq(max_order: usize, x: f64) -> Result<Vec<f64>> {
    check_positive(x)?;
    let (y0, y1) = y_seeds(x);
    Ok(upward(y0, y1, max_order, x))
}

/// `H^(1)_0(x), ..., H^(1)_max_order(x)`.
pub fn hankel1_seq(max_order: usize, x: f64) -> Result<Vec<Complex64>> {
    check_positive(x)?;
    let j = bessel_j_seq(max_order, x)?;
    let y = bessel_y_seq(max_order, x)?;
    Ok(j.into_iter()
        .zip(y)
        .map(|(re, im)| Complex64::new(re, im))
        .collect())
}

/// Three-term recurrence `f_{m+1} = (2m/x) f_m - f_{m-1}` run upward.
fn upward(f0: f64, f1: f64, max_order: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(max_order + 1);
    out.push(f0);
    if max_order >= 1 {
        out.push(f1);
    }
    for m in 1..max_order {
        let next = (2.0 * m as f64 / x) * out[m] - out[m - 1];
        out.push(next);
    }
    out
}

/// Ascending series `sum_k (-1)^k (x/2)^(2k+m) / (k! (k+m)!)`.
fn j_series(m: usize, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut lead = 1.0;
    for i in 1..=m {
        lead *= half / i as f64;
        if lead == 0.0 {
            return 0.0;
        }
    }
    let q = -half * half;
    let mut term = lead;
    let mut sum = lead;
    for k in 1..200 {
        term *= q / (k as f64 * (k + m) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Miller's algorithm. Returns `J_0..J_n` for some `n >= max_order`, long
/// enough that the tail beyond it is negligible at double precision.
fn j_miller(max_order: usize, x: f64) -> Vec<f64> {
    let n = max_order.max(x.ceil() as usize);
    let mut start = n + 20 + (40.0 * n as f64).sqrt() as usize;
    if start % 2 == 1 {
        start += 1;
    }
    let mut values = vec![0.0; start + 1];
    let mut next = 0.0;
    let mut current = 1e-30;
    values[start] = current;
    let mut sum_sq = 0.0;
    let mut sum_even = 0.0;
    for k in (1..=start).rev() {
        let prev = (2.0 * k as f64 / x) * current - next;
        next = current;
        current = prev;
        values[k - 1] = current;
        // accumulate J_k contributions, k >= 1
        sum_sq += next * next;
        if k % 2 == 0 {
            sum_even += next;
        }
        if current.abs() > MILLER_RESCALE {
            let s = 1.0 / MILLER_RESCALE;
            for v in values[k - 1..].iter_mut() {
                *v *= s;
            }
            current *= s;
            next *= s;
            sum_sq *= s * s;
            sum_even *= s;
        }
    }
    // J_0^2 + 2 sum J_k^2 = 1 fixes the magnitude; J_0 + 2 sum J_2k = 1 the sign.
    let j0 = values[0];
    let norm_sq = j0 * j0 + 2.0 * sum_sq;
    let lin = j0 + 2.0 * sum_even;
    let scale = lin.signum() / norm_sq.sqrt();
    for v in values.iter_mut() {
        *v *= scale;
    }
    values
}

/// `(J_0, J_1, Y_0, Y_1)` from the Hankel asymptotic expansion.
fn asymptotic_seeds(x: f64) -> (f64, f64, f64, f64) {
    let (p0, q0) = hankel_pq(0.0, x);
    let (p1, q1) = hankel_pq(1.0, x);
    let amp = (2.0 / (PI * x)).sqrt();
    let chi0 = x - FRAC_PI_4;
    let chi1 = x - FRAC_PI_2 - FRAC_PI_4;
    let (s0, c0) = chi0.sin_cos();
    let (s1, c1) = chi1.sin_cos();
    (
        amp * (p0 * c0 - q0 * s0),
        amp * (p1 * c1 - q1 * s1),
        amp * (p0 * s0 + q0 * c0),
        amp * (p1 * s1 + q1 * c1),
    )
}

/// Asymptotic `P(nu, x)` and `Q(nu, x)` series, summed until the terms stop
/// decreasing or fall below double precision.
fn hankel_pq(nu: f64, x: f64) -> (f64, f64) {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        let mag = term.abs();
        if mag >= last {
            break;
        }
        last = mag;
        // a_k / x^k enters P for even k and Q for odd k, with alternating signs.
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if mag < 1e-17 {
            break;
        }
    }
    (p, q)
}

/// `Y_0` and `Y_1` from the Neumann series in `J_k` for moderate arguments,
/// or from the asymptotic expansion for large ones.
fn y_seeds(x: f64) -> (f64, f64) {
    if x >= ASYMPTOTIC_LIMIT {
        let (_, _, y0, y1) = asymptotic_seeds(x);
        return (y0, y1);
    }
    let j: Vec<f64> = if x < SERIES_LIMIT {
        (0..=40).map(|m| j_series(m, x)).collect()
    } else {
        j_miller(0, x)
    };
    let log_term = (0.5 * x).ln() + EULER_GAMMA;
    // Y_0 = (2/pi)(ln(x/2)+gamma) J_0 - (4/pi) sum_k (-1)^k J_2k / k
    let mut s0 = 0.0;
    let mut k = 1;
    while 2 * k < j.len() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        s0 += sign * j[2 * k] / k as f64;
        k += 1;
    }
    let y0 = (2.0 / PI) * log_term * j[0] - (4.0 / PI) * s0;
    // Y_1 = -2 J_0/(pi x) + (2/pi)(ln(x/2)+gamma-1) J_1
    //       - (2/pi) sum_k (-1)^k (2k+1) J_{2k+1} / (k(k+1))
    let mut s1 = 0.0;
    let mut k = 1;
    while 2 * k + 1 < j.len() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        s1 += sign * (2 * k + 1) as f64 * j[2 * k + 1] / (k * (k + 1)) as f64;
        k += 1;
    }
    let y1 = -2.0 * j[0] / (PI * x) + (2.0 / PI) * (log_term - 1.0) * j[1] - (2.0 / PI) * s1;
    (y0, y1)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `J_m(x) = (1/pi) int_0^pi cos(m t - x sin t) dt`, trapezoid rule on a
    /// periodic integrand (spectrally accurate).
    fn j_integral(m: i32, x: f64) -> f64 {
        let n = 4 * ((x.abs() + m.abs() as f64) as usize + 64);
        let h = 2.0 * PI / n as f64;
        let s: f64 = (0..n)
            .map(|i| {
                let t = i as f64 * h;
                (m as f64 * t - x * t.sin()).cos()
            })
            .sum();
        s / n as f64
    }

    #[test]
    fn j_at_origin() {
        assert_eq!(bessel_j(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(1, 0.0).unwrap(), 0.0);
        assert_eq!(bessel_j(-7, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn first_zero_of_j0() {
        // located with the power series summed in higher-precision-safe range
        let z = 2.404825557695773;
        assert!(bessel_j(0, z).unwrap().abs() < 1e-9);
        assert!(j_series(0, z).abs() < 1e-14);
    }

    #[test]
    fn y0_reference_value() {
        // Y_0(1) from the independent quadrature oracle in tests/specfun_oracles.rs
        let y = bessel_y(0, 1.0).unwrap();
        assert!((y - 0.088_256_964_215_676_96).abs() < 1e-8, "{y}");
    }

    #[test]
    fn y0_diverges_logarithmically() {
        assert!(bessel_y(0, 1e-6).unwrap() < -8.0);
    }

    #[test]
    fn negative_orders_reflect() {
        for &x in &[0.3, 1.0, 7.5, 40.0] {
            for m in 1..12 {
                let s = reflect_sign(m);
                assert_eq!(bessel_j(-m, x).unwrap(), s * bessel_j(m, x).unwrap());
                assert_eq!(bessel_y(-m, x).unwrap(), s * bessel_y(m, x).unwrap());
            }
        }
        assert_eq!(bessel_y(-1, 1.0).unwrap(), -bessel_y(1, 1.0).unwrap());
    }

    #[test]
    fn domain_errors() {
        assert!(bessel_j(0, f64::NAN).is_err());
        assert!(bessel_j(0, f64::INFINITY).is_err());
        assert!(bessel_y(0, 0.0).is_err());
        assert!(bessel_y(2, -1.0).is_err());
        assert!(hankel1(0, 0.0).is_err());
    }

    #[test]
    fn hankel_is_j_plus_jy() {
        let h = hankel1(0, 1.0).unwrap();
        assert_eq!(h.re, bessel_j(0, 1.0).unwrap());
        assert_eq!(h.im, bessel_y(0, 1.0).unwrap());
        for &(m, x) in &[(3, 0.7), (10, 12.0), (25, 80.0)] {
            let h = hankel1(m, x).unwrap();
            let j = bessel_j(m, x).unwrap();
            let y = bessel_y(m, x).unwrap();
            assert!((h.norm_sqr() - (j * j + y * y)).abs() <= 1e-14 * h.norm_sqr());
        }
    }

    #[test]
    fn hankel_matches_recurrence_from_low_orders() {
        let x = 10.0;
        let mut prev = hankel1(0, x).unwrap();
        let mut cur = hankel1(1, x).unwrap();
        for m in 1..5 {
            let next = cur * (2.0 * m as f64 / x) - prev;
            prev = cur;
            cur = next;
        }
        let h5 = hankel1(5, x).unwrap();
        assert!((cur - h5).norm() < 1e-12 * h5.norm());
    }

    #[test]
    fn j_matches_integral_representation() {
        for &x in &[0.05, 0.5, 0.99, 1.0, 3.3, 9.0, 24.9, 25.0, 57.0, 150.0, 199.0] {
            for m in [0, 1, 2, 5, 13, 30, 60] {
                let got = bessel_j(m, x).unwrap();
                let want = j_integral(m, x);
                // near zeros compare against the local envelope
                let scale = if (m as f64) < x {
                    want.abs().max(1e-2 * (2.0 / (PI * x)).sqrt())
                } else {
                    want.abs()
                };
                // the quadrature itself carries ~1e-15 absolute rounding
                assert!(
                    (got - want).abs() <= 1e-10 * scale + 1e-14,
                    "J_{m}({x}) = {got}, oracle {want}"
                );
            }
        }
    }

    #[test]
    fn small_and_tiny_arguments() {
        assert!((bessel_j(1, 1e-8).unwrap() - 5e-9).abs() < 1e-22);
        assert!(bessel_j(60, 1e-3).unwrap() >= 0.0);
        let seq = bessel_j_seq(80, 1e-12).unwrap();
        assert!(seq.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn large_argument_seeds_agree_with_miller() {
        for &x in &[25.0, 31.4, 80.0, 500.0, 1000.0] {
            let (j0, j1, _, _) = asymptotic_seeds(x);
            let miller = j_miller(1, x);
            assert!((j0 - miller[0]).abs() < 1e-13, "J0({x})");
            assert!((j1 - miller[1]).abs() < 1e-13, "J1({x})");
        }
    }
}
