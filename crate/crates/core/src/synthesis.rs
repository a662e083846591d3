//! Least-squares sound field synthesis.
//!
//! Every solver here works on the generic triple `(C, W, b)`: the columns of
//! `C` describe the loudspeakers, `b` the desired field and `W` the inner
//! product that turns the coefficient misfit into a regional squared error.
//! Weighted mode matching, plain mode matching (`W = I`) and pressure
//! matching (`C` and `b` sampled at control points, `W = I`) are all
//! instances of it.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{check_hermitian_psd, hermitian_eigenvalues, hpd_solve};
use crate::quadrature::gauss_legendre_interval;
use crate::room::RoomModel;
use crate::specfun::bessel_j_seq;
use crate::wavefield::{
    basis_row, green2d, pointsource_coeffs, CircularRegion, ExpansionConfig, Frequency, Point2,
};
use crate::{CMatrix, CVector};

/// SDR reported when the synthesized field is exact.
pub const SDR_CAP_DB: f64 = 300.0;

/// Grid spacing of the regional SDR integral, in meters.
pub const EVALUATION_GRID_SPACING: f64 = 0.01;

/// Hermitian matrix of regional inner products `W_mn = int psi_m^* psi_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    entries: CMatrix,
    config: ExpansionConfig,
}

impl WeightMatrix {
    pub fn identity(config: ExpansionConfig) -> Self {
        Self {
            entries: CMatrix::identity(config.len(), config.len()),
            config,
        }
    }

    /// Wraps a precomputed matrix after checking it is Hermitian PSD.
    pub fn from_matrix(config: ExpansionConfig, entries: CMatrix) -> Result<Self> {
        if entries.nrows() != config.len() {
            return Err(Error::Dimension(format!(
                "weight matrix must be {n}x{n}",
                n = config.len()
            )));
        }
        check_hermitian_psd(&entries, "weight matrix")?;
        Ok(Self { entries, config })
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn config(&self) -> &ExpansionConfig {
        &self.config
    }
}

/// Node counts of the polar tensor rule used by [`weight_matrix_quadrature`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureResolution {
    pub angular: usize,
    pub radial: usize,
}

impl Default for QuadratureResolution {
    fn default() -> Self {
        Self {
            angular: 512,
            radial: 256,
        }
    }
}

/// Closed-form diagonal `W` for a disc expanded about its own center:
/// `W_mm = pi R^2 [J_m(kR)^2 - J_{m-1}(kR) J_{m+1}(kR)]`.
pub fn weight_matrix_circle(
    region: &CircularRegion,
    cfg: &ExpansionConfig,
    freq: Frequency,
) -> Result<WeightMatrix> {
    if cfg.center().distance(&region.center) > 1e-12 {
        return Err(Error::Precondition(
            "closed-form weights need the expansion centered on the region".into(),
        ));
    }
    let order = cfg.order();
    let j = bessel_j_seq(order + 1, freq.wavenumber() * region.radius)?;
    let area = region.area();
    let mut w = CMatrix::zeros(cfg.len(), cfg.len());
    for m in 0..=order {
        // J_{-1} = -J_1
        let below = if m == 0 { -j[1] } else { j[m - 1] };
        let value = area * (j[m] * j[m] - below * j[m + 1]);
        w[(order + m, order + m)] = Complex64::new(value, 0.0);
        w[(order - m, order - m)] = Complex64::new(value, 0.0);
    }
    Ok(WeightMatrix {
        entries: w,
        config: *cfg,
    })
}

/// `W` by tensor quadrature over the disc: Gauss-Legendre in radius,
/// trapezoid in angle, both about the region center. The expansion center
/// may differ from it.
pub fn weight_matrix_quadrature(
    region: &CircularRegion,
    cfg: &ExpansionConfig,
    freq: Frequency,
    resolution: QuadratureResolution,
) -> Result<WeightMatrix> {
    if resolution.angular < 4 * cfg.order().max(1) || resolution.radial == 0 {
        return Err(Error::Precondition(format!(
            "quadrature needs at least {} angular nodes, got {}",
            4 * cfg.order().max(1),
            resolution.angular
        )));
    }
    let n = cfg.len();
    let (radii, rweights) = gauss_legendre_interval(resolution.radial, 0.0, region.radius);
    let dphi = 2.0 * std::f64::consts::PI / resolution.angular as f64;
    // each ring reduces to its own partial sum; rings are added in order
    let partials: Vec<Result<CMatrix>> = radii
        .par_iter()
        .zip(rweights.par_iter())
        .map(|(&r, &wr)| {
            let mut acc = CMatrix::zeros(n, n);
            let weight = wr * r * dphi;
            for a in 0..resolution.angular {
                let phi = a as f64 * dphi;
                let p = Point2::new(region.center.x + r * phi.cos(), region.center.y + r * phi.sin());
                let row = ring_basis_row(&p, cfg, freq)?;
                for col in 0..n {
                    let vc = row[col] * weight;
                    for rw in 0..=col {
                        acc[(rw, col)] += row[rw].conj() * vc;
                    }
                }
            }
            Ok(acc)
        })
        .collect();
    let mut w = CMatrix::zeros(n, n);
    for part in partials {
        w += part?;
    }
    for col in 0..n {
        for rw in 0..col {
            w[(col, rw)] = w[(rw, col)].conj();
        }
        w[(col, col)].im = 0.0;
    }
    Ok(WeightMatrix {
        entries: w,
        config: *cfg,
    })
}

/// Basis row without the validity-disc check; quadrature nodes may sit on
/// the rim of a disc whose expansion center is offset.
fn ring_basis_row(p: &Point2, cfg: &ExpansionConfig, freq: Frequency) -> Result<Vec<Complex64>> {
    if p.distance(&cfg.center()) <= cfg.radius() {
        return basis_row(p, cfg, freq);
    }
    let (r, phi) = p.polar_about(&cfg.center());
    let order = cfg.order();
    let jm = bessel_j_seq(order, freq.wavenumber() * r)?;
    let mut row = vec![Complex64::new(0.0, 0.0); cfg.len()];
    for (m, &jv) in jm.iter().enumerate() {
        let rot = Complex64::from_polar(1.0, m as f64 * phi);
        row[order + m] = rot * jv;
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        row[order - m] = rot.conj() * (sign * jv);
    }
    Ok(row)
}

/// Expansion coefficients of the candidate transfer functions, one column
/// per candidate.
#[derive(Debug, Clone)]
pub struct TransferCoeffMatrix {
    matrix: CMatrix,
    positions: Vec<Point2>,
    config: ExpansionConfig,
}

impl TransferCoeffMatrix {
    /// Free-field point-source columns.
    pub fn free_field(positions: &[Point2], cfg: &ExpansionConfig, freq: Frequency) -> Result<Self> {
        Self::build(positions, cfg, |p| pointsource_coeffs(p, cfg, freq))
    }

    /// Reverberant columns from the image source model.
    pub fn in_room(
        room: &RoomModel,
        positions: &[Point2],
        cfg: &ExpansionConfig,
        freq: Frequency,
    ) -> Result<Self> {
        Self::build(positions, cfg, |p| room.transfer_coeffs(p, cfg, freq))
    }

    /// Free field when `room` is `None`.
    pub fn new(
        room: Option<&RoomModel>,
        positions: &[Point2],
        cfg: &ExpansionConfig,
        freq: Frequency,
    ) -> Result<Self> {
        match room {
            Some(room) => Self::in_room(room, positions, cfg, freq),
            None => Self::free_field(positions, cfg, freq),
        }
    }

    pub fn from_matrix(matrix: CMatrix, positions: Vec<Point2>, config: ExpansionConfig) -> Result<Self> {
        if matrix.nrows() != config.len() || matrix.ncols() != positions.len() {
            return Err(Error::Dimension(format!(
                "expected {}x{} coefficient matrix, got {}x{}",
                config.len(),
                positions.len(),
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self {
            matrix,
            positions,
            config,
        })
    }

    fn build<F>(positions: &[Point2], cfg: &ExpansionConfig, column: F) -> Result<Self>
    where
        F: Fn(&Point2) -> Result<crate::wavefield::ExpansionCoeffs> + Sync,
    {
        let cols: Vec<CVector> = positions
            .par_iter()
            .map(|p| column(p).map(|c| c.into_vector()))
            .collect::<Result<_>>()?;
        let mut matrix = CMatrix::zeros(cfg.len(), positions.len());
        for (j, c) in cols.iter().enumerate() {
            matrix.set_column(j, c);
        }
        Ok(Self {
            matrix,
            positions: positions.to_vec(),
            config: *cfg,
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn positions(&self) -> &[Point2] {
        &self.positions
    }

    pub fn config(&self) -> &ExpansionConfig {
        &self.config
    }

    /// `C Phi_S` for the given candidate indices.
    pub fn select(&self, indices: &[usize]) -> CMatrix {
        self.matrix.select_columns(indices.iter())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DrivingSignals {
    pub values: CVector,
    pub frequency: Frequency,
}

/// Regularisation of the two stages of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthesisConfig {
    /// Ridge parameter used while selecting loudspeakers.
    pub lambda_select: f64,
    /// Synthesis ridge parameter as a multiple of the largest eigenvalue of
    /// `C_S^H W C_S`.
    pub lambda_synth_scale: f64,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        Self {
            lambda_select: 1e-5,
            lambda_synth_scale: 1e-3,
        }
    }
}

impl SynthesisConfig {
    pub fn new(lambda_select: f64, lambda_synth_scale: f64) -> Result<Self> {
        if !(lambda_select > 0.0 && lambda_synth_scale > 0.0) {
            return Err(Error::Domain("regularisation parameters must be positive".into()));
        }
        Ok(Self {
            lambda_select,
            lambda_synth_scale,
        })
    }

    /// Synthesis ridge for a selected submatrix, floored at `lambda_select`
    /// when the eigenvalue scale vanishes.
    pub fn synthesis_lambda(&self, c_sel: &CMatrix, w: &CMatrix) -> f64 {
        let scaled = max_gram_eigenvalue(c_sel, w) * self.lambda_synth_scale;
        if scaled > 0.0 {
            scaled
        } else {
            self.lambda_select
        }
    }
}

fn check_triple(c: &CMatrix, w: &CMatrix, b: &CVector) -> Result<()> {
    if w.nrows() != c.nrows() || w.ncols() != c.nrows() || b.len() != c.nrows() {
        return Err(Error::Dimension(format!(
            "C is {}x{}, W is {}x{}, b has {} entries",
            c.nrows(),
            c.ncols(),
            w.nrows(),
            w.ncols(),
            b.len()
        )));
    }
    Ok(())
}

/// `d = (C^H W C + lambda I)^{-1} C^H W b` by a Hermitian positive-definite
/// solve.
pub fn solve_wmm(
    c_sel: &CMatrix,
    w: &CMatrix,
    b: &CVector,
    lambda: f64,
    frequency: Frequency,
) -> Result<DrivingSignals> {
    check_triple(c_sel, w, b)?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("lambda must be positive, got {lambda}")));
    }
    let wc = w * c_sel;
    let mut gram = c_sel.adjoint() * &wc;
    for i in 0..gram.nrows() {
        gram[(i, i)] += Complex64::new(lambda, 0.0);
    }
    let rhs = wc.adjoint() * b;
    let values = hpd_solve(&gram, &rhs)?;
    Ok(DrivingSignals { values, frequency })
}

/// Standard mode matching: [`solve_wmm`] with `W = I`.
pub fn solve_mode_matching(
    c_sel: &CMatrix,
    b: &CVector,
    lambda: f64,
    frequency: Frequency,
) -> Result<DrivingSignals> {
    let w = CMatrix::identity(c_sel.nrows(), c_sel.nrows());
    solve_wmm(c_sel, &w, b, lambda, frequency)
}

/// `(b - C d)^H W (b - C d) + lambda |d|^2`.
pub fn wmm_cost(c_sel: &CMatrix, w: &CMatrix, b: &CVector, lambda: f64, d: &CVector) -> f64 {
    let r = b - c_sel * d;
    (r.adjoint() * w * &r)[(0, 0)].re + lambda * d.norm_squared()
}

/// Pressure-matching triple: `C` holds transfer functions from each source to
/// each control point, `b` the desired pressures and `W` is the identity.
#[derive(Debug, Clone)]
pub struct PressureMatching {
    pub control_points: Vec<Point2>,
    pub c: CMatrix,
    pub w: CMatrix,
    pub b: CVector,
}

pub fn build_pressure_matching<F>(
    region: &CircularRegion,
    control_points: &[Point2],
    sources: &[Point2],
    desired: F,
    freq: Frequency,
    room: Option<&RoomModel>,
) -> Result<PressureMatching>
where
    F: Fn(&Point2) -> Complex64,
{
    if let Some(p) = control_points
        .iter()
        .find(|p| p.distance(&region.center) > region.radius * (1.0 + 1e-12))
    {
        return Err(Error::Precondition(format!(
            "control point ({}, {}) lies outside the target region",
            p.x, p.y
        )));
    }
    if let Some(s) = sources.iter().find(|s| region.contains(s)) {
        return Err(Error::Precondition(format!(
            "source ({}, {}) lies inside the target region",
            s.x, s.y
        )));
    }
    let mut c = CMatrix::zeros(control_points.len(), sources.len());
    for (i, p) in control_points.iter().enumerate() {
        for (j, s) in sources.iter().enumerate() {
            c[(i, j)] = transfer(room, p, s, freq)?;
        }
    }
    let b = CVector::from_iterator(control_points.len(), control_points.iter().map(desired));
    Ok(PressureMatching {
        control_points: control_points.to_vec(),
        w: CMatrix::identity(control_points.len(), control_points.len()),
        c,
        b,
    })
}

fn transfer(room: Option<&RoomModel>, at: &Point2, source: &Point2, freq: Frequency) -> Result<Complex64> {
    match room {
        Some(room) => room.transfer(at, source, freq),
        None => green2d(at, source, freq),
    }
}

/// `u(r) = sum_l d_l G(r | r_l)` evaluated pointwise on `grid`.
pub fn synthesize_field(
    sources: &[Point2],
    d: &DrivingSignals,
    grid: &[Point2],
    room: Option<&RoomModel>,
) -> Result<Vec<Complex64>> {
    if sources.len() != d.values.len() {
        return Err(Error::Dimension(format!(
            "{} sources but {} driving signals",
            sources.len(),
            d.values.len()
        )));
    }
    let freq = d.frequency;
    grid.par_iter()
        .map(|p| {
            let mut u = Complex64::new(0.0, 0.0);
            for (s, dl) in sources.iter().zip(d.values.iter()) {
                u += dl * transfer(room, p, s, freq)?;
            }
            Ok(u)
        })
        .collect()
}

/// Interior synthesized field from expansion coefficients: `Psi C_S d`, with
/// `Psi` the basis matrix of the evaluation grid.
pub fn synthesize_from_coeffs(basis: &CMatrix, c_sel: &CMatrix, d: &DrivingSignals) -> Vec<Complex64> {
    let coeffs = c_sel * &d.values;
    (basis * coeffs).iter().copied().collect()
}

/// Signal-to-distortion ratio in dB on a uniform grid, capped at
/// [`SDR_CAP_DB`].
pub fn sdr(u_des: &[Complex64], u_syn: &[Complex64], cell_area: f64) -> Result<f64> {
    if u_des.len() != u_syn.len() {
        return Err(Error::Dimension(format!(
            "{} desired samples but {} synthesized",
            u_des.len(),
            u_syn.len()
        )));
    }
    let signal: f64 = u_des.iter().map(|u| u.norm_sqr()).sum::<f64>() * cell_area;
    let error: f64 = u_des
        .iter()
        .zip(u_syn)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        * cell_area;
    if !(signal > 0.0) {
        return Err(Error::UndefinedMetric("desired field has zero energy".into()));
    }
    if error == 0.0 {
        return Ok(SDR_CAP_DB);
    }
    Ok((10.0 * (signal / error).log10()).min(SDR_CAP_DB))
}

/// Largest eigenvalue of `C^H W C`.
pub fn max_gram_eigenvalue(c_sel: &CMatrix, w: &CMatrix) -> f64 {
    if c_sel.ncols() == 0 {
        return 0.0;
    }
    let gram = c_sel.adjoint() * w * c_sel;
    hermitian_eigenvalues(&gram).last().copied().unwrap_or(0.0).max(0.0)
}

/// `1e-3` times the largest eigenvalue of `C^H W C`.
pub fn synthesis_lambda(c_sel: &CMatrix, w: &CMatrix) -> f64 {
    max_gram_eigenvalue(c_sel, w) * SynthesisConfig::default().lambda_synth_scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavefield::{planewave_coeffs, PlaneWave};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn region() -> CircularRegion {
        CircularRegion::new(Point2::new(0.5, 0.3), 0.5).unwrap()
    }

    #[test]
    fn circle_weights_are_diagonal_and_reduce_to_area() {
        let f = Frequency::new(1000.0).unwrap();
        let r = region();
        let cfg = ExpansionConfig::for_frequency(&r, f);
        let w = weight_matrix_circle(&r, &cfg, f).unwrap();
        let m = w.as_matrix();
        for i in 0..cfg.len() {
            for j in 0..cfg.len() {
                if i != j {
                    assert_eq!(m[(i, j)], c(0.0, 0.0));
                }
            }
            assert!(m[(i, i)].re > 0.0);
        }
        let low = Frequency::new(1e-6).unwrap();
        let cfg0 = ExpansionConfig::new(3, &r);
        let w0 = weight_matrix_circle(&r, &cfg0, low).unwrap();
        assert!((w0.as_matrix()[(3, 3)].re - r.area()).abs() < 1e-12);
    }

    #[test]
    fn circle_weights_need_centered_expansion() {
        let f = Frequency::new(100.0).unwrap();
        let r = region();
        let other = CircularRegion::new(Point2::ORIGIN, 1.0).unwrap();
        let cfg = ExpansionConfig::for_frequency(&other, f);
        assert!(weight_matrix_circle(&r, &cfg, f).is_err());
    }

    #[test]
    fn quadrature_rejects_coarse_angular_grid() {
        let f = Frequency::new(1000.0).unwrap();
        let r = region();
        let cfg = ExpansionConfig::for_frequency(&r, f);
        let res = QuadratureResolution { angular: 40, radial: 32 };
        assert!(weight_matrix_quadrature(&r, &cfg, f, res).is_err());
    }

    #[test]
    fn quadrature_at_low_frequency_gives_area() {
        let f = Frequency::new(1e-3).unwrap();
        let r = region();
        let cfg = ExpansionConfig::new(2, &r);
        let res = QuadratureResolution { angular: 16, radial: 8 };
        let w = weight_matrix_quadrature(&r, &cfg, f, res).unwrap();
        assert!((w.as_matrix()[(2, 2)].re - r.area()).abs() < 1e-9);
    }

    #[test]
    fn ridge_solution_basics() {
        let f = Frequency::new(500.0).unwrap();
        let cm = CMatrix::from_fn(5, 3, |i, j| c((i + 2 * j) as f64 * 0.3 - 0.5, (i as f64 - j as f64) * 0.1));
        let w = CMatrix::identity(5, 5);
        let zero = CVector::zeros(5);
        let d = solve_wmm(&cm, &w, &zero, 1e-3, f).unwrap();
        assert!(d.values.iter().all(|z| *z == c(0.0, 0.0)));
        let b = CVector::from_fn(5, |i, _| c(1.0, i as f64 * 0.2));
        let mut last = f64::INFINITY;
        for lambda in [1e-4, 1e-2, 1.0, 1e2, 1e4, 1e8] {
            let n = solve_wmm(&cm, &w, &b, lambda, f).unwrap().values.norm();
            assert!(n < last);
            last = n;
        }
        assert!(last < 1e-6);
        assert!(solve_wmm(&cm, &w, &b, 0.0, f).is_err());
        let mm = solve_mode_matching(&cm, &b, 1e-3, f).unwrap();
        assert_eq!(mm, solve_wmm(&cm, &w, &b, 1e-3, f).unwrap());
    }

    #[test]
    fn sdr_reference_values() {
        let des: Vec<Complex64> = (0..50).map(|i| c((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
        assert_eq!(sdr(&des, &des, 1e-4).unwrap(), SDR_CAP_DB);
        let zero = vec![c(0.0, 0.0); des.len()];
        assert!(sdr(&des, &zero, 1e-4).unwrap().abs() < 1e-12);
        let scaled: Vec<Complex64> = des.iter().map(|u| u * 1.1).collect();
        assert!((sdr(&des, &scaled, 1e-4).unwrap() - 20.0).abs() < 1e-9);
        assert!(matches!(sdr(&zero, &des, 1e-4), Err(Error::UndefinedMetric(_))));
        // common complex scaling leaves SDR unchanged
        let a = c(0.3, -2.0);
        let des_a: Vec<Complex64> = des.iter().map(|u| u * a).collect();
        let syn_a: Vec<Complex64> = scaled.iter().map(|u| u * a).collect();
        assert!((sdr(&des_a, &syn_a, 1.0).unwrap() - 20.0).abs() < 1e-9);
    }

    #[test]
    fn synthesis_lambda_trivial_cases() {
        let w = CMatrix::identity(4, 4);
        assert_eq!(synthesis_lambda(&CMatrix::zeros(4, 2), &w), 0.0);
        let mut col = CMatrix::zeros(4, 1);
        col[(1, 0)] = c(0.6, 0.0);
        col[(3, 0)] = c(0.0, 0.8);
        assert!((synthesis_lambda(&col, &w) - 1e-3).abs() < 1e-15);
        let cfg = SynthesisConfig::default();
        assert_eq!(cfg.synthesis_lambda(&CMatrix::zeros(4, 2), &w), cfg.lambda_select);
    }

    #[test]
    fn synthesize_field_linearity_and_single_source() {
        let f = Frequency::new(700.0).unwrap();
        let sources = [Point2::new(-1.5, 0.0), Point2::new(1.5, 1.5)];
        let grid = region().grid(0.1);
        let zero = DrivingSignals { values: CVector::zeros(2), frequency: f };
        assert!(synthesize_field(&sources, &zero, &grid, None).unwrap().iter().all(|u| u.norm() == 0.0));
        let one = DrivingSignals { values: CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]), frequency: f };
        let u = synthesize_field(&sources, &one, &grid, None).unwrap();
        for (p, v) in grid.iter().zip(&u) {
            assert_eq!(*v, green2d(p, &sources[0], f).unwrap());
        }
        let d1 = CVector::from_vec(vec![c(0.2, 1.0), c(-0.4, 0.1)]);
        let d2 = CVector::from_vec(vec![c(1.5, 0.0), c(0.3, -0.7)]);
        let field = |d: CVector| synthesize_field(&sources, &DrivingSignals { values: d, frequency: f }, &grid, None).unwrap();
        let sum = field(&d1 + &d2);
        let parts: Vec<_> = field(d1).into_iter().zip(field(d2)).map(|(a, b)| a + b).collect();
        for (a, b) in sum.iter().zip(&parts) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn pressure_matching_triple() {
        let f = Frequency::new(400.0).unwrap();
        let r = region();
        let src = Point2::new(-1.5, 0.3);
        let pts = [Point2::new(0.5, 0.3)];
        let pm = build_pressure_matching(&r, &pts, &[src], |_| c(1.0, 0.0), f, None).unwrap();
        assert_eq!(pm.c[(0, 0)], green2d(&pts[0], &src, f).unwrap());
        assert_eq!(pm.w, CMatrix::identity(1, 1));
        assert!(build_pressure_matching(&r, &[Point2::new(3.0, 0.0)], &[src], |_| c(1.0, 0.0), f, None).is_err());
        assert!(build_pressure_matching(&r, &pts, &[Point2::new(0.6, 0.3)], |_| c(1.0, 0.0), f, None).is_err());
    }

    #[test]
    fn pressure_matching_reproduces_a_candidate_field() {
        let f = Frequency::new(600.0).unwrap();
        let r = region();
        let sources = [Point2::new(-1.5, -0.6), Point2::new(-1.5, 0.9), Point2::new(1.5, 1.5)];
        let grid = r.grid(0.05);
        let target = sources[1];
        let pm = build_pressure_matching(&r, &grid, &sources, |p| green2d(p, &target, f).unwrap(), f, None).unwrap();
        let sel = pm.c.select_columns([1usize].iter());
        let d = solve_wmm(&sel, &pm.w, &pm.b, 1e-12, f).unwrap();
        let u = synthesize_field(&[target], &d, &grid, None).unwrap();
        let des: Vec<Complex64> = pm.b.iter().copied().collect();
        assert!(sdr(&des, &u, 1.0).unwrap() > 100.0);
    }

    #[test]
    fn transfer_matrix_columns_match_pointsource_coeffs() {
        let f = Frequency::new(900.0).unwrap();
        let r = region();
        let cfg = ExpansionConfig::for_frequency(&r, f);
        let pos = [Point2::new(-1.5, 0.0), Point2::new(0.0, 1.5)];
        let tm = TransferCoeffMatrix::free_field(&pos, &cfg, f).unwrap();
        assert_eq!(tm.matrix().ncols(), 2);
        assert_eq!(tm.matrix().column(1).clone_owned(), pointsource_coeffs(&pos[1], &cfg, f).unwrap().into_vector());
        let b = planewave_coeffs(&PlaneWave::new(0.2), &cfg, f);
        assert_eq!(b.as_vector().len(), tm.matrix().nrows());
    }
}
