//! 2D field representations.
//!
//! Interior fields about a center `c` are written as
//! `u(r) = sum_{m=-M}^{M} b_m J_m(k |r - c|) e^{j m angle(r - c)}`, with the
//! coefficient vector stored in ascending order `m = -M..M`. The free-field
//! Green's function is `(j/4) H_0^(1)(k |r - s|)` and a plane wave travelling
//! along `phi` is `e^{+j k (cos phi, sin phi) . r}`.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::specfun::{bessel_j_seq, hankel1_seq};
use crate::{CMatrix, CVector};

pub const DEFAULT_SOUND_SPEED: f64 = 343.0;

/// Extra orders added on top of `ceil(k R)` by [`truncation_order`].
pub const TRUNCATION_MARGIN: usize = 10;

const J: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Polar coordinates `(r, phi)` of `self` about `center`.
    pub fn polar_about(&self, center: &Point2) -> (f64, f64) {
        let dx = self.x - center.x;
        let dy = self.y - center.y;
        (dx.hypot(dy), dy.atan2(dx))
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl std::ops::Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

/// A temporal frequency together with the sound speed that maps it to a
/// wavenumber.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frequency {
    hz: f64,
    sound_speed: f64,
}

impl Frequency {
    pub fn new(hz: f64) -> Result<Self> {
        Self::with_sound_speed(hz, DEFAULT_SOUND_SPEED)
    }

    pub fn with_sound_speed(hz: f64, sound_speed: f64) -> Result<Self> {
        if !(hz.is_finite() && hz > 0.0) {
            return Err(Error::Domain(format!("frequency must be positive, got {hz}")));
        }
        if !(sound_speed.is_finite() && sound_speed > 0.0) {
            return Err(Error::Domain(format!(
                "sound speed must be positive, got {sound_speed}"
            )));
        }
        Ok(Self { hz, sound_speed })
    }

    pub fn hz(&self) -> f64 {
        self.hz
    }

    pub fn sound_speed(&self) -> f64 {
        self.sound_speed
    }

    pub fn omega(&self) -> f64 {
        2.0 * PI * self.hz
    }

    pub fn wavenumber(&self) -> f64 {
        self.omega() / self.sound_speed
    }
}

/// Disc-shaped target region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircularRegion {
    pub center: Point2,
    pub radius: f64,
}

impl CircularRegion {
    pub fn new(center: Point2, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) || !center.is_finite() {
            return Err(Error::Domain(format!(
                "region needs a finite center and positive radius, got {radius}"
            )));
        }
        Ok(Self { center, radius })
    }

    pub fn contains(&self, p: &Point2) -> bool {
        p.distance(&self.center) <= self.radius
    }

    pub fn area(&self) -> f64 {
        PI * self.radius * self.radius
    }

    /// Points of the square lattice `center + spacing * (i, j)` that fall
    /// inside the disc, in row-major order (y outer, x inner).
    pub fn grid(&self, spacing: f64) -> Vec<Point2> {
        let n = (self.radius / spacing).floor() as i64;
        let mut pts = Vec::new();
        for iy in -n..=n {
            for ix in -n..=n {
                let dx = ix as f64 * spacing;
                let dy = iy as f64 * spacing;
                if dx.hypot(dy) <= self.radius * (1.0 + 1e-12) {
                    pts.push(Point2::new(self.center.x + dx, self.center.y + dy));
                }
            }
        }
        pts
    }
}

/// Truncation order and expansion disc shared by every coefficient vector
/// that takes part in one synthesis problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionConfig {
    order: usize,
    center: Point2,
    radius: f64,
}

impl ExpansionConfig {
    /// Expansion of order `order` about the center of `region`, valid inside it.
    pub fn new(order: usize, region: &CircularRegion) -> Self {
        Self {
            order,
            center: region.center,
            radius: region.radius,
        }
    }

    /// Expansion using [`truncation_order`] for `freq`.
    pub fn for_frequency(region: &CircularRegion, freq: Frequency) -> Self {
        Self::new(truncation_order(freq, region), region)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn center(&self) -> Point2 {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Number of coefficients, `2M + 1`.
    pub fn len(&self) -> usize {
        2 * self.order + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Storage index of order `m`.
    pub fn index(&self, m: i32) -> usize {
        (m + self.order as i32) as usize
    }

    /// Iterates `m = -M..=M` in storage order.
    pub fn orders(&self) -> impl Iterator<Item = i32> {
        let m = self.order as i32;
        -m..=m
    }

    /// Rejects frequencies for which `M < ceil(k R)`.
    pub fn check_frequency(&self, freq: Frequency) -> Result<()> {
        let needed = (freq.wavenumber() * self.radius).ceil() as usize;
        if self.order < needed {
            return Err(Error::Precondition(format!(
                "truncation order {} is below ceil(kR) = {needed} at {} Hz",
                self.order,
                freq.hz()
            )));
        }
        Ok(())
    }
}

/// Cylindrical-harmonic coefficients `b_{-M}..b_M` of an interior field.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionCoeffs {
    coeffs: CVector,
    config: ExpansionConfig,
}

impl ExpansionCoeffs {
    pub fn zeros(config: ExpansionConfig) -> Self {
        Self {
            coeffs: CVector::zeros(config.len()),
            config,
        }
    }

    pub fn from_vector(config: ExpansionConfig, coeffs: CVector) -> Result<Self> {
        if coeffs.len() != config.len() {
            return Err(Error::Dimension(format!(
                "expected {} coefficients, got {}",
                config.len(),
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Domain("non-finite expansion coefficient".into()));
        }
        Ok(Self { coeffs, config })
    }

    pub fn config(&self) -> &ExpansionConfig {
        &self.config
    }

    /// Coefficient of order `m`.
    pub fn get(&self, m: i32) -> Complex64 {
        self.coeffs[self.config.index(m)]
    }

    pub fn as_vector(&self) -> &CVector {
        &self.coeffs
    }

    pub fn into_vector(self) -> CVector {
        self.coeffs
    }

    /// `a * self + other`.
    pub fn axpy(&self, a: Complex64, other: &ExpansionCoeffs) -> Result<Self> {
        if self.config != other.config {
            return Err(Error::Dimension("expansion configs differ".into()));
        }
        Ok(Self {
            coeffs: self.coeffs.map(|z| z * a) + &other.coeffs,
            config: self.config,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWave {
    /// Propagation direction in radians.
    pub direction: f64,
    pub amplitude: Complex64,
}

impl PlaneWave {
    pub fn new(direction: f64) -> Self {
        Self {
            direction,
            amplitude: Complex64::new(1.0, 0.0),
        }
    }

    /// `amplitude * e^{j k . r}`.
    pub fn pressure(&self, point: &Point2, freq: Frequency) -> Complex64 {
        let k = freq.wavenumber();
        let (s, c) = self.direction.sin_cos();
        let phase = k * (c * point.x + s * point.y);
        self.amplitude * Complex64::from_polar(1.0, phase)
    }
}

/// `j^m` for integer `m`.
pub fn j_pow(m: i32) -> Complex64 {
    match m.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Free-field 2D Green's function `(j/4) H_0^(1)(k |r - s|)`.
pub fn green2d(eval_point: &Point2, source: &Point2, freq: Frequency) -> Result<Complex64> {
    let d = eval_point.distance(source);
    if d <= 1e-12 {
        return Err(Error::Singularity(format!(
            "Green's function evaluated at its source ({}, {})",
            source.x, source.y
        )));
    }
    let h0 = hankel1_seq(0, freq.wavenumber() * d)?[0];
    Ok(J * h0 * 0.25)
}

/// Jacobi-Anger coefficients `b_m = A e^{j k . c} j^m e^{-j m phi}`.
pub fn planewave_coeffs(pw: &PlaneWave, cfg: &ExpansionConfig, freq: Frequency) -> ExpansionCoeffs {
    let center_phase = pw.pressure(&cfg.center(), freq);
    let coeffs = DVector::from_iterator(
        cfg.len(),
        cfg.orders()
            .map(|m| center_phase * j_pow(m) * Complex64::from_polar(1.0, -(m as f64) * pw.direction)),
    );
    ExpansionCoeffs {
        coeffs,
        config: *cfg,
    }
}

/// Graf addition coefficients `c_m = (j/4) H_m^(1)(k d) e^{-j m phi_s}` of a
/// point source at polar position `(d, phi_s)` about the expansion center.
pub fn pointsource_coeffs(
    source: &Point2,
    cfg: &ExpansionConfig,
    freq: Frequency,
) -> Result<ExpansionCoeffs> {
    let (d, phi) = source.polar_about(&cfg.center());
    if d <= cfg.radius() {
        return Err(Error::Precondition(format!(
            "source ({}, {}) lies within the expansion disc (distance {d} <= {})",
            source.x,
            source.y,
            cfg.radius()
        )));
    }
    let order = cfg.order();
    let h = hankel1_seq(order, freq.wavenumber() * d)?;
    let coeffs = DVector::from_iterator(
        cfg.len(),
        cfg.orders().map(|m| {
            let hm = if m < 0 && m % 2 != 0 {
                -h[m.unsigned_abs() as usize]
            } else {
                h[m.unsigned_abs() as usize]
            };
            J * 0.25 * hm * Complex64::from_polar(1.0, -(m as f64) * phi)
        }),
    );
    ExpansionCoeffs::from_vector(*cfg, coeffs)
}

/// Row of the interior basis `psi_m(r) = J_m(k r') e^{j m phi'}`, `m = -M..M`.
pub fn basis_row(point: &Point2, cfg: &ExpansionConfig, freq: Frequency) -> Result<Vec<Complex64>> {
    let (r, phi) = point.polar_about(&cfg.center());
    if r > cfg.radius() * (1.0 + 1e-6) + 1e-12 {
        return Err(Error::Precondition(format!(
            "point ({}, {}) lies outside the expansion disc",
            point.x, point.y
        )));
    }
    let order = cfg.order();
    let jm = bessel_j_seq(order, freq.wavenumber() * r)?;
    let step = Complex64::from_polar(1.0, phi);
    let mut row = vec![Complex64::new(0.0, 0.0); cfg.len()];
    // e^{j m phi} for m >= 0, mirrored for negative orders
    let mut rot = Complex64::new(1.0, 0.0);
    for (m, &jv) in jm.iter().enumerate() {
        row[order + m] = rot * jv;
        if m > 0 {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            row[order - m] = rot.conj() * (sign * jv);
        }
        rot *= step;
    }
    Ok(row)
}

/// `sum_m b_m J_m(k r') e^{j m phi'}`.
pub fn evaluate_expansion(coeffs: &ExpansionCoeffs, point: &Point2, freq: Frequency) -> Result<Complex64> {
    let row = basis_row(point, coeffs.config(), freq)?;
    Ok(row.iter().zip(coeffs.as_vector().iter()).map(|(a, b)| a * b).sum())
}

/// Basis matrix with one row per point, so that `basis * b` evaluates an
/// expansion on all points at once.
pub fn basis_matrix(points: &[Point2], cfg: &ExpansionConfig, freq: Frequency) -> Result<CMatrix> {
    let mut out = CMatrix::zeros(points.len(), cfg.len());
    for (i, p) in points.iter().enumerate() {
        let row = basis_row(p, cfg, freq)?;
        for (j, v) in row.into_iter().enumerate() {
            out[(i, j)] = v;
        }
    }
    Ok(out)
}

/// `M = ceil(k R) + 10`.
pub fn truncation_order(freq: Frequency, region: &CircularRegion) -> usize {
    (freq.wavenumber() * region.radius).ceil() as usize + TRUNCATION_MARGIN
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{bessel_j, bessel_y};

    fn section4_region() -> CircularRegion {
        CircularRegion::new(Point2::new(0.5, 0.3), 0.5).unwrap()
    }

    #[test]
    fn truncation_rule() {
        let f = Frequency::new(1000.0).unwrap();
        assert!((f.wavenumber() - 18.3179).abs() < 1e-3);
        assert_eq!(truncation_order(f, &section4_region()), 20);
        let tiny = CircularRegion::new(Point2::ORIGIN, 1e-9).unwrap();
        assert_eq!(truncation_order(f, &tiny), 11);
        let f2 = Frequency::new(2000.0).unwrap();
        let r = section4_region();
        let kr = |f: Frequency| (f.wavenumber() * r.radius).ceil() as usize;
        assert!(kr(f2) >= 2 * kr(f) - 1);
    }

    #[test]
    fn config_rejects_low_order() {
        let r = section4_region();
        let cfg = ExpansionConfig::new(5, &r);
        assert!(cfg.check_frequency(Frequency::new(1000.0).unwrap()).is_err());
        assert!(cfg.check_frequency(Frequency::new(100.0).unwrap()).is_ok());
    }

    #[test]
    fn green_symmetry_and_reference() {
        let f = Frequency::new(500.0).unwrap();
        let a = Point2::new(0.1, -0.4);
        let b = Point2::new(1.3, 0.9);
        assert_eq!(green2d(&a, &b, f).unwrap(), green2d(&b, &a, f).unwrap());
        let k = f.wavenumber();
        let p = Point2::new(1.0 / k, 0.0);
        let g = green2d(&p, &Point2::ORIGIN, f).unwrap();
        let want = J * 0.25 * Complex64::new(bessel_j(0, 1.0).unwrap(), bessel_y(0, 1.0).unwrap());
        assert!((g - want).norm() < 1e-14);
        assert!(matches!(green2d(&a, &a, f), Err(Error::Singularity(_))));
    }

    #[test]
    fn planewave_low_orders() {
        let f = Frequency::new(700.0).unwrap();
        let r = CircularRegion::new(Point2::ORIGIN, 0.4).unwrap();
        let cfg = ExpansionConfig::for_frequency(&r, f);
        let b = planewave_coeffs(&PlaneWave::new(0.0), &cfg, f);
        assert!((b.get(0) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((b.get(1) - J).norm() < 1e-15);
        let b = planewave_coeffs(&PlaneWave::new(1.234), &cfg, f);
        assert!((b.get(0) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        for m in cfg.orders() {
            assert!((b.get(m).norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn pointsource_on_axis_is_plain_hankel() {
        let f = Frequency::new(800.0).unwrap();
        let r = CircularRegion::new(Point2::ORIGIN, 0.3).unwrap();
        let cfg = ExpansionConfig::for_frequency(&r, f);
        let c = pointsource_coeffs(&Point2::new(1.1, 0.0), &cfg, f).unwrap();
        let kd = f.wavenumber() * 1.1;
        for m in cfg.orders() {
            let want = J * 0.25 * crate::specfun::hankel1(m, kd).unwrap();
            assert!((c.get(m) - want).norm() <= 1e-13 * want.norm());
        }
    }

    #[test]
    fn pointsource_mirror_across_axis() {
        let f = Frequency::new(800.0).unwrap();
        let r = CircularRegion::new(Point2::ORIGIN, 0.3).unwrap();
        let cfg = ExpansionConfig::for_frequency(&r, f);
        let up = pointsource_coeffs(&Point2::new(0.7, 0.9), &cfg, f).unwrap();
        let down = pointsource_coeffs(&Point2::new(0.7, -0.9), &cfg, f).unwrap();
        // e^{-jm(-phi)} = e^{-j(-m)phi} and H_{-m} = (-1)^m H_m
        for m in cfg.orders() {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            let want = up.get(-m) * sign;
            assert!((down.get(m) - want).norm() <= 1e-13 * want.norm().max(1e-300));
        }
    }

    #[test]
    fn pointsource_inside_disc_rejected() {
        let f = Frequency::new(800.0).unwrap();
        let r = section4_region();
        let cfg = ExpansionConfig::for_frequency(&r, f);
        assert!(matches!(
            pointsource_coeffs(&Point2::new(0.6, 0.3), &cfg, f),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn evaluate_trivial_cases() {
        let f = Frequency::new(300.0).unwrap();
        let r = section4_region();
        let cfg = ExpansionConfig::for_frequency(&r, f);
        let zero = ExpansionCoeffs::zeros(cfg);
        assert_eq!(evaluate_expansion(&zero, &Point2::new(0.6, 0.2), f).unwrap(), Complex64::new(0.0, 0.0));
        let mut v = CVector::zeros(cfg.len());
        v[cfg.index(0)] = Complex64::new(1.0, 0.0);
        let unit = ExpansionCoeffs::from_vector(cfg, v).unwrap();
        assert_eq!(evaluate_expansion(&unit, &r.center, f).unwrap(), Complex64::new(1.0, 0.0));
        assert!(evaluate_expansion(&unit, &Point2::new(5.0, 5.0), f).is_err());
    }

    #[test]
    fn grid_covers_disc_at_spacing() {
        let r = section4_region();
        let g = r.grid(0.01);
        // lattice point count approximates the disc area / h^2
        let expect = r.area() / 1e-4;
        assert!((g.len() as f64 - expect).abs() / expect < 0.01, "{}", g.len());
        assert!(g.iter().all(|p| r.contains(p) || p.distance(&r.center) - r.radius < 1e-9));
    }
}
