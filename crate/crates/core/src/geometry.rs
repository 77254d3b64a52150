//! Angles, points and the two reference frames.
//!
//! The primary frame puts the primary receiver at the origin with the primary
//! transmitter on the positive x-axis. The secondary frame puts the typical
//! secondary receiver at the origin with its transmitter at `r_s∠0`; the
//! primary link is then described by a [`PrimaryPlacement`].

use core::f64::consts::{PI, TAU};
use core::ops::{Add, Neg, Sub};
use num_traits::Float;
use rand::Rng;

use crate::error::{Error, Result};

/// An angle in radians, normalized to `[-π, π)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Angle(f64);

impl Angle {
    pub const ZERO: Angle = Angle(0.0);

    pub fn new(radians: f64) -> Angle {
        Angle(normalize(radians))
    }

    pub fn from_degrees(deg: f64) -> Angle {
        Angle::new(deg.to_radians())
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    pub fn degrees(self) -> f64 {
        self.0.to_degrees()
    }

    /// Unsigned angular distance from zero, in `[0, π]`.
    pub fn magnitude(self) -> f64 {
        self.0.abs()
    }
}

/// Maps any finite angle into `[-π, π)`.
pub fn normalize(a: f64) -> f64 {
    if !a.is_finite() {
        return a;
    }
    let mut r = (a + PI) % TAU;
    if r < 0.0 {
        r += TAU;
    }
    if r >= TAU {
        r -= TAU;
    }
    r - PI
}

impl Add for Angle {
    type Output = Angle;
    fn add(self, rhs: Angle) -> Angle {
        Angle::new(self.0 + rhs.0)
    }
}

impl Sub for Angle {
    type Output = Angle;
    fn sub(self, rhs: Angle) -> Angle {
        Angle::new(self.0 - rhs.0)
    }
}

impl Neg for Angle {
    type Output = Angle;
    fn neg(self) -> Angle {
        Angle::new(-self.0)
    }
}

impl From<f64> for Angle {
    fn from(radians: f64) -> Angle {
        Angle::new(radians)
    }
}

/// A Cartesian point or displacement.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Point {
        Point { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// `atan2` bearing; `None` at the origin.
    pub fn bearing(self) -> Option<Angle> {
        if self.x == 0.0 && self.y == 0.0 {
            None
        } else {
            Some(Angle::new(self.y.atan2(self.x)))
        }
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

/// `radius∠angle`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarPoint {
    pub radius: f64,
    pub angle: Angle,
}

impl PolarPoint {
    pub fn new(radius: f64, angle: Angle) -> Result<PolarPoint> {
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(Error::InvalidParameter { name: "radius", reason: "must be finite and nonnegative" });
        }
        Ok(PolarPoint { radius, angle })
    }

    pub fn to_cartesian(self) -> Point {
        let (s, c) = self.angle.radians().sin_cos();
        Point::new(self.radius * c, self.radius * s)
    }

    pub fn from_cartesian(p: Point) -> PolarPoint {
        PolarPoint { radius: p.norm(), angle: p.bearing().unwrap_or(Angle::ZERO) }
    }
}

/// Pose of the primary link in the secondary frame.
///
/// `x_p∠δ_p` is the primary transmitter and `ω_p` the direction from the
/// primary transmitter towards its receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimaryPlacement {
    pub x_p: f64,
    pub delta_p: Angle,
    pub omega_p: Angle,
}

impl PrimaryPlacement {
    pub fn new(x_p: f64, delta_p: Angle, omega_p: Angle) -> Result<PrimaryPlacement> {
        if !(x_p >= 0.0) || !x_p.is_finite() {
            return Err(Error::InvalidParameter { name: "x_p", reason: "must be finite and nonnegative" });
        }
        if !delta_p.radians().is_finite() || !omega_p.radians().is_finite() {
            return Err(Error::InvalidParameter { name: "placement angle", reason: "must be finite" });
        }
        Ok(PrimaryPlacement { x_p, delta_p, omega_p })
    }

    pub fn tx(self) -> Point {
        PolarPoint { radius: self.x_p, angle: self.delta_p }.to_cartesian()
    }

    /// Primary receiver `Y_p = X_p + r_p∠ω_p` in Cartesian form.
    pub fn rx(self, r_p: f64) -> Point {
        self.tx() + PolarPoint { radius: r_p, angle: self.omega_p }.to_cartesian()
    }

    /// Recovers the placement from the two endpoints of the primary link.
    pub fn from_endpoints(tx: Point, rx: Point) -> Result<PrimaryPlacement> {
        let omega = (rx - tx).bearing().ok_or(Error::UndefinedBearing)?;
        let t = PolarPoint::from_cartesian(tx);
        PrimaryPlacement::new(t.radius, t.angle, omega)
    }
}

/// Radial law for randomized primary placements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlacementLaw {
    /// `x_p = sqrt(U(0, R²))`, `δ_p, ω_p ~ U(0, 2π)`.
    UniformDisk,
    /// `x_p = (R/2) sqrt(U(0, 1))`, `δ_p, ω_p ~ U(0, π)`, as tabulated for the
    /// averaged set-up.
    Tabulated,
}

/// Randomized primary placement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomPlacement {
    pub radius: f64,
    pub law: PlacementLaw,
}

impl RandomPlacement {
    pub fn new(radius: f64, law: PlacementLaw) -> Result<RandomPlacement> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidParameter { name: "placement radius", reason: "must be positive" });
        }
        Ok(RandomPlacement { radius, law })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> PrimaryPlacement {
        let u: f64 = rng.random();
        let a: f64 = rng.random();
        let b: f64 = rng.random();
        let (x_p, span) = match self.law {
            PlacementLaw::UniformDisk => (self.radius * u.sqrt(), TAU),
            PlacementLaw::Tabulated => (0.5 * self.radius * u.sqrt(), PI),
        };
        PrimaryPlacement { x_p, delta_p: Angle::new(a * span), omega_p: Angle::new(b * span) }
    }
}

/// Fixed or randomized primary placement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Placement {
    Fixed(PrimaryPlacement),
    Random(RandomPlacement),
}

impl Placement {
    pub fn fixed(self) -> Option<PrimaryPlacement> {
        match self {
            Placement::Fixed(p) => Some(p),
            Placement::Random(_) => None,
        }
    }
}

/// `Y_p` in polar form.
pub fn primary_rx_position(pp: PrimaryPlacement, r_p: f64) -> PolarPoint {
    PolarPoint::from_cartesian(pp.rx(r_p))
}

/// `z = ‖X − Y_p‖`.
pub fn cross_distance_z(sec_tx: PolarPoint, pp: PrimaryPlacement, r_p: f64) -> f64 {
    (sec_tx.to_cartesian() - pp.rx(r_p)).norm()
}

/// `β = ∠(X − Y_p)`.
pub fn cross_bearing_beta(sec_tx: PolarPoint, pp: PrimaryPlacement, r_p: f64) -> Result<Angle> {
    (sec_tx.to_cartesian() - pp.rx(r_p)).bearing().ok_or(Error::UndefinedBearing)
}

/// Trigonometric forms of the cross-frame distance and bearing.
///
/// These are reference formulas for cross-checking; production code uses the
/// vector forms above.
pub mod closed_form {
    use super::*;

    /// Law-of-cosines form of `z`.
    pub fn cross_distance(sec_tx: PolarPoint, pp: PrimaryPlacement, r_p: f64) -> f64 {
        let x = sec_tx.radius;
        let t = sec_tx.angle.radians();
        let (xp, d, w) = (pp.x_p, pp.delta_p.radians(), pp.omega_p.radians());
        let sq = x * x + xp * xp + r_p * r_p - 2.0 * x * xp * (t - d).cos() - 2.0 * x * r_p * (t - w).cos()
            + 2.0 * xp * r_p * (d - w).cos();
        sq.max(0.0).sqrt()
    }

    /// Nested-arcsine bearing written in terms of `x`, `x_p` and `y_p`.
    pub fn bearing_via_tx_distance(sec_tx: PolarPoint, pp: PrimaryPlacement, r_p: f64) -> f64 {
        let y_p = pp.rx(r_p).norm();
        let dw = pp.delta_p.radians() - pp.omega_p.radians();
        let inner = ((pp.x_p / y_p) * dw.sin()).asin();
        let outer = ((y_p / sec_tx.radius) * (dw + inner).sin()).asin();
        normalize(sec_tx.angle.radians() - outer)
    }

    /// Nested-arcsine bearing written in terms of `z`, `r_p` and `y_p`.
    pub fn bearing_via_cross_distance(sec_tx: PolarPoint, pp: PrimaryPlacement, r_p: f64) -> f64 {
        let y_p = pp.rx(r_p).norm();
        let z = cross_distance(sec_tx, pp, r_p);
        let t = sec_tx.angle.radians();
        let inner = ((r_p / y_p) * (pp.delta_p.radians() - pp.omega_p.radians()).sin()).asin();
        let outer = ((y_p / z) * (t - pp.delta_p.radians() + inner).sin()).asin();
        normalize(t - outer)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_range() {
        assert_eq!(Angle::new(PI).radians(), -PI);
        assert_eq!(Angle::new(-PI).radians(), -PI);
        assert!((Angle::new(3.0 * PI / 2.0).radians() + PI / 2.0).abs() < 1e-15);
        assert!(Angle::new(-1e-9).radians() < 0.0);
    }

    #[test]
    fn collinear_rx_at_origin() {
        // Transmitter at 50∠90°, pointing straight down onto the origin.
        let pp = PrimaryPlacement::new(50.0, Angle::new(PI / 2.0), Angle::new(-PI / 2.0)).unwrap();
        assert!(pp.rx(50.0).norm() < 1e-12);
    }

    #[test]
    fn collinear_bearing_is_pi() {
        // Y_p at 80∠0 beyond a transmitter at 20∠0.
        let pp = PrimaryPlacement::new(30.0, Angle::ZERO, Angle::ZERO).unwrap();
        let tx = PolarPoint::new(20.0, Angle::ZERO).unwrap();
        let b = cross_bearing_beta(tx, pp, 50.0).unwrap();
        assert!((b.magnitude() - PI).abs() < 1e-15);
    }

    #[test]
    fn coincident_bearing_is_an_error() {
        let pp = PrimaryPlacement::new(20.0, Angle::ZERO, Angle::ZERO).unwrap();
        let tx = PolarPoint::new(30.0, Angle::ZERO).unwrap();
        assert_eq!(cross_distance_z(tx, pp, 10.0), 0.0);
        assert_eq!(cross_bearing_beta(tx, pp, 10.0), Err(Error::UndefinedBearing));
    }
}
