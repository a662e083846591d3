//! Rectangular-room transfer functions by the 2D image source method.
//!
//! Coordinates are room-centered: the room spans `[-size_x/2, size_x/2]` by
//! `[-size_y/2, size_y/2]`. Each image contributes
//! `gain * (j/4) H_0^(1)(k |r - image|)`, with the gain the product of the
//! wall reflection coefficients met along its reflection path.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wavefield::{green2d, pointsource_coeffs, ExpansionCoeffs, ExpansionConfig, Frequency, Point2};

pub const DEFAULT_MAX_REFLECTION_ORDER: usize = 10;

/// Reflection coefficients of the four walls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WallReflections {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl WallReflections {
    pub fn uniform(beta: f64) -> Self {
        Self {
            x_min: beta,
            x_max: beta,
            y_min: beta,
            y_max: beta,
        }
    }

    fn as_array(&self) -> [f64; 4] {
        [self.x_min, self.x_max, self.y_min, self.y_max]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoomModel {
    pub size_x: f64,
    pub size_y: f64,
    pub reflection: WallReflections,
    pub max_reflection_order: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageSource {
    pub position: Point2,
    pub gain: f64,
    /// Total number of wall reflections.
    pub order: usize,
}

impl RoomModel {
    pub fn new(
        size_x: f64,
        size_y: f64,
        reflection: WallReflections,
        max_reflection_order: usize,
    ) -> Result<Self> {
        if !(size_x.is_finite() && size_x > 0.0 && size_y.is_finite() && size_y > 0.0) {
            return Err(Error::Domain(format!(
                "room dimensions must be positive, got {size_x} x {size_y}"
            )));
        }
        if reflection
            .as_array()
            .iter()
            .any(|b| !(b.is_finite() && (0.0..=1.0).contains(b)))
        {
            return Err(Error::Domain(format!(
                "reflection coefficients must lie in [0, 1], got {reflection:?}"
            )));
        }
        Ok(Self {
            size_x,
            size_y,
            reflection,
            max_reflection_order,
        })
    }

    /// Room with one reflection coefficient shared by all walls.
    pub fn uniform(size_x: f64, size_y: f64, beta: f64, max_reflection_order: usize) -> Result<Self> {
        Self::new(size_x, size_y, WallReflections::uniform(beta), max_reflection_order)
    }

    /// Strict interior test.
    pub fn contains(&self, p: &Point2) -> bool {
        p.x.abs() < 0.5 * self.size_x && p.y.abs() < 0.5 * self.size_y
    }

    /// All images with at most `max_reflection_order` reflections, sorted by
    /// reflection count. The first entry is the source itself.
    pub fn image_sources(&self, source: &Point2) -> Result<Vec<ImageSource>> {
        if !self.contains(source) {
            return Err(Error::Domain(format!(
                "source ({}, {}) is not strictly inside the room",
                source.x, source.y
            )));
        }
        let order = self.max_reflection_order;
        let xs = axis_images(
            source.x,
            self.size_x,
            self.reflection.x_min,
            self.reflection.x_max,
            order,
        );
        let ys = axis_images(
            source.y,
            self.size_y,
            self.reflection.y_min,
            self.reflection.y_max,
            order,
        );
        let mut images = Vec::with_capacity(1 + 2 * order * (order + 1));
        for x in &xs {
            for y in &ys {
                if x.count + y.count <= order {
                    images.push(ImageSource {
                        position: Point2::new(x.coord, y.coord),
                        gain: x.gain * y.gain,
                        order: x.count + y.count,
                    });
                }
            }
        }
        images.sort_by_key(|im| im.order);
        Ok(images)
    }

    /// `sum_images gain * green2d(eval_point, image)`.
    pub fn transfer(&self, eval_point: &Point2, source: &Point2, freq: Frequency) -> Result<Complex64> {
        let mut total = Complex64::new(0.0, 0.0);
        for im in self.image_sources(source)? {
            if im.gain == 0.0 {
                continue;
            }
            total += green2d(eval_point, &im.position, freq)? * im.gain;
        }
        Ok(total)
    }

    /// Gain-weighted sum of the point-source expansions of every image.
    pub fn transfer_coeffs(
        &self,
        source: &Point2,
        cfg: &ExpansionConfig,
        freq: Frequency,
    ) -> Result<ExpansionCoeffs> {
        let mut total = ExpansionCoeffs::zeros(*cfg);
        for im in self.image_sources(source)? {
            if im.gain == 0.0 {
                continue;
            }
            let c = pointsource_coeffs(&im.position, cfg, freq).map_err(|e| match e {
                Error::Precondition(msg) => Error::Precondition(format!(
                    "image of order {} at ({}, {}): {msg}",
                    im.order, im.position.x, im.position.y
                )),
                other => other,
            })?;
            total = c.axpy(Complex64::new(im.gain, 0.0), &total)?;
        }
        Ok(total)
    }
}

struct AxisImage {
    coord: f64,
    gain: f64,
    count: usize,
}

/// Images along one axis of a wall pair at `-len/2` and `len/2`:
/// `(1 - 2q) s + (2n - q) len`, reflecting `|n - q|` times off the lower wall
/// and `|n|` times off the upper one.
fn axis_images(s: f64, len: f64, beta_low: f64, beta_high: f64, max_count: usize) -> Vec<AxisImage> {
    let reach = max_count as i64 + 1;
    let mut out = Vec::new();
    for n in -reach..=reach {
        for q in 0..=1i64 {
            let low = (n - q).unsigned_abs() as usize;
            let high = n.unsigned_abs() as usize;
            if low + high > max_count {
                continue;
            }
            out.push(AxisImage {
                coord: (1 - 2 * q) as f64 * s + (2 * n - q) as f64 * len,
                gain: beta_low.powi(low as i32) * beta_high.powi(high as i32),
                count: low + high,
            });
        }
    }
    out
}

/// Free function form of [`RoomModel::image_sources`].
pub fn image_sources(room: &RoomModel, source: &Point2) -> Result<Vec<ImageSource>> {
    room.image_sources(source)
}

/// Free function form of [`RoomModel::transfer`].
pub fn room_transfer(room: &RoomModel, eval_point: &Point2, source: &Point2, freq: Frequency) -> Result<Complex64> {
    room.transfer(eval_point, source, freq)
}

/// Free function form of [`RoomModel::transfer_coeffs`].
pub fn room_transfer_coeffs(
    room: &RoomModel,
    source: &Point2,
    cfg: &ExpansionConfig,
    freq: Frequency,
) -> Result<ExpansionCoeffs> {
    room.transfer_coeffs(source, cfg, freq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavefield::{evaluate_expansion, CircularRegion};

    fn room2() -> RoomModel {
        RoomModel::uniform(2.0, 2.0, 0.7, 2).unwrap()
    }

    #[test]
    fn order_zero_is_the_source() {
        let room = RoomModel::uniform(5.0, 4.0, 0.8, 0).unwrap();
        let s = Point2::new(0.3, -1.2);
        let ims = room.image_sources(&s).unwrap();
        assert_eq!(ims, vec![ImageSource { position: s, gain: 1.0, order: 0 }]);
        let f = Frequency::new(400.0).unwrap();
        let r = Point2::new(-1.0, 0.5);
        assert_eq!(room.transfer(&r, &s, f).unwrap(), green2d(&r, &s, f).unwrap());
    }

    #[test]
    fn zero_reflection_leaves_only_direct_path() {
        let room = RoomModel::uniform(5.0, 4.0, 0.0, 4).unwrap();
        let s = Point2::new(0.3, -1.2);
        let ims = room.image_sources(&s).unwrap();
        assert_eq!(ims.len(), 1 + 2 * 4 * 5);
        let nonzero: Vec<_> = ims.iter().filter(|i| i.gain != 0.0).collect();
        assert_eq!(nonzero.len(), 1);
        assert_eq!(nonzero[0].gain, 1.0);
        let f = Frequency::new(400.0).unwrap();
        let r = Point2::new(-1.0, 0.5);
        assert_eq!(room.transfer(&r, &s, f).unwrap(), green2d(&r, &s, f).unwrap());
    }

    #[test]
    fn first_order_images_by_hand() {
        let room = room2();
        let s = Point2::new(0.5, 0.25);
        let ims = room.image_sources(&s).unwrap();
        let first: Vec<Point2> = ims.iter().filter(|i| i.order == 1).map(|i| i.position).collect();
        // mirrors across x = -1, x = 1, y = -1, y = 1
        for want in [
            Point2::new(-2.5, 0.25),
            Point2::new(1.5, 0.25),
            Point2::new(0.5, -2.25),
            Point2::new(0.5, 1.75),
        ] {
            assert!(first.iter().any(|p| p.distance(&want) < 1e-12), "{want:?}");
        }
        assert_eq!(first.len(), 4);
    }

    #[test]
    fn order_two_transfer_matches_explicit_image_list() {
        let room = room2();
        let s = Point2::new(0.5, 0.25);
        let b = 0.7;
        // hand-listed images of a 2 x 2 m room up to two reflections
        let list = [
            (0.5, 0.25, 1.0),
            (-2.5, 0.25, b),
            (1.5, 0.25, b),
            (0.5, -2.25, b),
            (0.5, 1.75, b),
            (-2.5, -2.25, b * b),
            (-2.5, 1.75, b * b),
            (1.5, -2.25, b * b),
            (1.5, 1.75, b * b),
            (4.5, 0.25, b * b),  // x_min then x_max
            (-3.5, 0.25, b * b), // x_max then x_min
            (0.5, 4.25, b * b),
            (0.5, -3.75, b * b),
        ];
        let f = Frequency::new(600.0).unwrap();
        let r = Point2::new(-0.3, -0.6);
        let mut want = Complex64::new(0.0, 0.0);
        for (x, y, g) in list {
            want += green2d(&r, &Point2::new(x, y), f).unwrap() * g;
        }
        let got = room.transfer(&r, &s, f).unwrap();
        assert!((got - want).norm() < 1e-13 * want.norm());
        assert_eq!(room.image_sources(&s).unwrap().len(), list.len());
    }

    #[test]
    fn gains_do_not_increase_with_order() {
        let room = RoomModel::new(
            5.0,
            4.0,
            WallReflections { x_min: 0.9, x_max: 0.6, y_min: 0.8, y_max: 0.95 },
            6,
        )
        .unwrap();
        let ims = room.image_sources(&Point2::new(1.0, 1.0)).unwrap();
        let max_at = |o: usize| ims.iter().filter(|i| i.order == o).map(|i| i.gain).fold(0.0, f64::max);
        let min_at = |o: usize| ims.iter().filter(|i| i.order == o).map(|i| i.gain).fold(1.0, f64::min);
        for o in 1..=6 {
            assert!(max_at(o) <= max_at(o - 1));
            assert!(min_at(o) <= min_at(o - 1));
        }
        assert!(ims.iter().all(|i| i.gain <= 1.0));
    }

    #[test]
    fn rejects_bad_rooms_and_sources() {
        assert!(RoomModel::uniform(0.0, 4.0, 0.8, 3).is_err());
        assert!(RoomModel::uniform(5.0, 4.0, 1.2, 3).is_err());
        let room = RoomModel::uniform(5.0, 4.0, 0.8, 3).unwrap();
        assert!(matches!(room.image_sources(&Point2::new(2.5, 0.0)), Err(Error::Domain(_))));
        let s = Point2::new(1.0, 1.0);
        assert!(matches!(room.transfer(&s, &s, Frequency::new(100.0).unwrap()), Err(Error::Singularity(_))));
    }

    #[test]
    fn coefficients_order_zero_and_linearity() {
        let f = Frequency::new(1000.0).unwrap();
        let region = CircularRegion::new(Point2::new(0.5, 0.3), 0.5).unwrap();
        let cfg = ExpansionConfig::for_frequency(&region, f);
        let s = Point2::new(-1.5, 0.42);
        let free = RoomModel::uniform(5.0, 4.0, 0.8, 0).unwrap();
        assert_eq!(
            free.transfer_coeffs(&s, &cfg, f).unwrap(),
            pointsource_coeffs(&s, &cfg, f).unwrap()
        );
        let room = RoomModel::uniform(5.0, 4.0, 0.8, 1).unwrap();
        let total = room.transfer_coeffs(&s, &cfg, f).unwrap();
        let mut sum = ExpansionCoeffs::zeros(cfg);
        for im in room.image_sources(&s).unwrap() {
            let c = pointsource_coeffs(&im.position, &cfg, f).unwrap();
            sum = c.axpy(Complex64::new(im.gain, 0.0), &sum).unwrap();
        }
        assert!((total.as_vector() - sum.as_vector()).norm() < 1e-14 * sum.as_vector().norm());
        let p = Point2::new(0.7, 0.1);
        let direct = room.transfer(&p, &s, f).unwrap();
        let expanded = evaluate_expansion(&total, &p, f).unwrap();
        assert!((direct - expanded).norm() < 1e-6 * direct.norm());
    }

    #[test]
    fn image_inside_expansion_disc_is_reported() {
        let f = Frequency::new(200.0).unwrap();
        // disc straddling the x_max wall so the first image across it lands inside
        let region = CircularRegion::new(Point2::new(2.7, 0.0), 0.3).unwrap();
        let cfg = ExpansionConfig::for_frequency(&region, f);
        let room = RoomModel::uniform(5.0, 4.0, 0.8, 1).unwrap();
        let err = room.transfer_coeffs(&Point2::new(2.35, 0.0), &cfg, f).unwrap_err();
        match err {
            Error::Precondition(msg) => assert!(msg.contains("order 1"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
