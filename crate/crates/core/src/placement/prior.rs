use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{check_hermitian_psd, hermitian_defect};
use crate::specfun::bessel_j_seq;
use crate::wavefield::{j_pow, ExpansionConfig, Frequency};
use crate::{CMatrix, CVector};

/// First and second moments of the desired coefficient vector `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldPrior {
    mu: CVector,
    sigma: CMatrix,
    second_moment: CMatrix,
}

impl FieldPrior {
    /// Validates `sigma` (Hermitian, PSD) and caches `R = sigma + mu mu^H`.
    pub fn from_moments(mu: CVector, sigma: CMatrix) -> Result<Self> {
        if sigma.nrows() != mu.len() || sigma.ncols() != mu.len() {
            return Err(Error::Dimension(format!(
                "mean has {} entries but covariance is {}x{}",
                mu.len(),
                sigma.nrows(),
                sigma.ncols()
            )));
        }
        check_hermitian_psd(&sigma, "covariance")?;
        let second_moment = &sigma + &mu * mu.adjoint();
        Ok(Self {
            mu,
            sigma,
            second_moment,
        })
    }

    /// A single deterministic desired field.
    pub fn point_mass(b: CVector) -> Self {
        let n = b.len();
        let second_moment = &b * b.adjoint();
        Self {
            mu: b,
            sigma: CMatrix::zeros(n, n),
            second_moment,
        }
    }

    pub fn mean(&self) -> &CVector {
        &self.mu
    }

    pub fn covariance(&self) -> &CMatrix {
        &self.sigma
    }

    /// `E[b b^H] = sigma + mu mu^H`.
    pub fn second_moment(&self) -> &CMatrix {
        &self.second_moment
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    /// Moments of `T b`, e.g. pressures at control points from coefficients.
    pub fn transform(&self, t: &CMatrix) -> Result<Self> {
        if t.ncols() != self.dim() {
            return Err(Error::Dimension(format!(
                "transform has {} columns, prior has dimension {}",
                t.ncols(),
                self.dim()
            )));
        }
        let mu = t * &self.mu;
        let sigma = t * &self.sigma * t.adjoint();
        let sigma = (&sigma + sigma.adjoint()).scale(0.5);
        let second_moment = &sigma + &mu * mu.adjoint();
        Ok(Self {
            mu,
            sigma,
            second_moment,
        })
    }

    pub(crate) fn hermitian_defect(&self) -> f64 {
        hermitian_defect(&self.second_moment)
    }
}

/// Plane waves of fixed amplitude arriving from directions uniformly
/// distributed over `[angle_min, angle_max]` (radians).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionRangePrior {
    pub angle_min: f64,
    pub angle_max: f64,
    pub amplitude: Complex64,
}

impl DirectionRangePrior {
    pub fn new(angle_min: f64, angle_max: f64) -> Result<Self> {
        if !(angle_min.is_finite() && angle_max.is_finite() && angle_min < angle_max) {
            return Err(Error::Domain(format!(
                "direction range needs angle_min < angle_max, got [{angle_min}, {angle_max}]"
            )));
        }
        Ok(Self {
            angle_min,
            angle_max,
            amplitude: Complex64::new(1.0, 0.0),
        })
    }

    pub fn with_amplitude(mut self, amplitude: Complex64) -> Self {
        self.amplitude = amplitude;
        self
    }

    pub fn width(&self) -> f64 {
        self.angle_max - self.angle_min
    }

    /// `(1/width) int e^{j p phi} dphi` over the range.
    fn mean_exponential(&self, p: i64) -> Complex64 {
        let mid = 0.5 * (self.angle_min + self.angle_max);
        let half = 0.5 * p as f64 * self.width();
        let sinc = if half.abs() < 1e-8 {
            1.0 - half * half / 6.0
        } else {
            half.sin() / half
        };
        Complex64::from_polar(sinc, p as f64 * mid)
    }
}

/// Closed-form moments of the plane-wave coefficients `b_m(phi)` over the
/// direction range.
///
/// The second moment does not depend on the expansion center because the
/// center phase `e^{j k . c}` has unit modulus. The mean does: the phase is
/// expanded by Jacobi-Anger as `sum_n j^n J_n(k|c|) e^{j n (phi - phi_c)}`.
pub fn prior_from_direction_range(
    prior: &DirectionRangePrior,
    cfg: &ExpansionConfig,
    freq: Frequency,
) -> Result<FieldPrior> {
    let n = cfg.len();
    let amp = prior.amplitude;
    let power = amp.norm_sqr();
    let orders: Vec<i32> = cfg.orders().collect();

    let mut second = CMatrix::zeros(n, n);
    for (i, &m) in orders.iter().enumerate() {
        for (j, &l) in orders.iter().enumerate() {
            second[(i, j)] = j_pow(m - l) * prior.mean_exponential((l - m) as i64) * power;
        }
    }

    let (rc, phic) = cfg.center().polar_about(&crate::wavefield::Point2::ORIGIN);
    let krc = freq.wavenumber() * rc;
    let mu = if krc == 0.0 {
        CVector::from_iterator(
            n,
            orders
                .iter()
                .map(|&m| amp * j_pow(m) * prior.mean_exponential(-(m as i64))),
        )
    } else {
        let span = krc.ceil() as usize + 30;
        let jn = bessel_j_seq(span, krc)?;
        let center_term = |q: i32| -> Complex64 {
            let mag = jn[q.unsigned_abs() as usize];
            let mag = if q < 0 && q % 2 != 0 { -mag } else { mag };
            j_pow(q) * Complex64::from_polar(mag, -(q as f64) * phic)
        };
        CVector::from_iterator(
            n,
            orders.iter().map(|&m| {
                let s: Complex64 = (-(span as i32)..=span as i32)
                    .map(|q| center_term(q) * prior.mean_exponential((q - m) as i64))
                    .sum();
                amp * j_pow(m) * s
            }),
        )
    };

    let mut sigma = &second - &mu * mu.adjoint();
    // exact Hermitian symmetry
    sigma = (&sigma + sigma.adjoint()).scale(0.5);
    let second = &sigma + &mu * mu.adjoint();
    Ok(FieldPrior {
        mu,
        sigma,
        second_moment: second,
    })
}
