//! Axes, angular-momentum directions and the three samplers.
//!
//! Every measurement axis lies in one shared plane (the zy plane) and is
//! described by its angle from the z axis, so that the unit direction of an
//! axis at angle `θ` is `(0, sin θ, cos θ)`.

use std::f64::consts::{PI, TAU};
use std::ops::Neg;

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// A measurement direction in the shared plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis {
    theta: f64,
}

impl Axis {
    /// Builds an axis, reducing `theta` to `[0, 2π)`.
    pub fn new(theta: f64) -> Self {
        let mut t = theta.rem_euclid(TAU);
        if t >= TAU {
            t = 0.0;
        }
        Self { theta: t }
    }

    pub fn theta(self) -> f64 {
        self.theta
    }

    pub fn direction(self) -> [f64; 3] {
        let (s, c) = self.theta.sin_cos();
        [0.0, s, c]
    }

    /// Angle between the two axes, reduced to `[0, π]`.
    pub fn delta(self, other: Axis) -> f64 {
        separation(self.theta, other.theta)
    }
}

/// `|θb − θa|` reduced to `[0, π]`.
pub fn separation(theta_a: f64, theta_b: f64) -> f64 {
    let d = (theta_b - theta_a).rem_euclid(TAU);
    if d > PI {
        TAU - d
    } else {
        d
    }
}

/// `±1`. Zero projections take the positive sign.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn of(x: f64) -> Self {
        if x >= 0.0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl Neg for Sign {
    type Output = Sign;
    fn neg(self) -> Sign {
        self.flip()
    }
}

/// Unit angular-momentum direction (units with `J = 1`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AngularMomentumVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl AngularMomentumVector {
    /// Normalizes the given components. Panics on the zero vector.
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        let n = (x * x + y * y + z * z).sqrt();
        assert!(n > 0.0, "cannot normalize the zero vector");
        Self {
            x: x / n,
            y: y / n,
            z: z / n,
        }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn components(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// Projection `J_a = J_z cos θ_a + J_y sin θ_a`.
    #[inline]
    pub fn project(&self, a: Axis) -> f64 {
        project(self, a)
    }
}

impl Neg for AngularMomentumVector {
    type Output = AngularMomentumVector;
    fn neg(self) -> Self {
        Self {
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }
}

#[inline]
pub fn project(j: &AngularMomentumVector, a: Axis) -> f64 {
    let (s, c) = a.theta.sin_cos();
    j.z * c + j.y * s
}

/// A point `Ω = {θ, φ, p_θ, p_φ}` of the one-particle phase space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseSpacePoint {
    pub theta: f64,
    pub phi: f64,
    pub p_theta: f64,
    pub p_phi: f64,
}

impl PhaseSpacePoint {
    pub fn j_squared(&self) -> f64 {
        let s = self.theta.sin();
        self.p_theta * self.p_theta + self.p_phi * self.p_phi / (s * s)
    }

    pub fn j_z(&self) -> f64 {
        self.p_phi
    }

    /// Cartesian angular momentum `r × p` of a particle at `(θ, φ)`.
    pub fn angular_momentum(&self) -> [f64; 3] {
        let (sp, cp) = self.phi.sin_cos();
        let cot = self.theta.cos() / self.theta.sin();
        [
            -sp * self.p_theta - cp * cot * self.p_phi,
            cp * self.p_theta - sp * cot * self.p_phi,
            self.p_phi,
        ]
    }
}

/// Uniform direction on the unit sphere: `z = 2u − 1`, azimuth `2πv`.
pub fn sample_sphere(rng: &mut RngStream) -> AngularMomentumVector {
    let z = 2.0 * rng.uniform() - 1.0;
    let phi = TAU * rng.uniform();
    let r = (1.0 - z * z).max(0.0).sqrt();
    let (s, c) = phi.sin_cos();
    AngularMomentumVector {
        x: r * c,
        y: r * s,
        z,
    }
}

/// Uniform on the open hemisphere `sign · J_a > 0`.
///
/// Drawn in a frame whose pole is the axis, then rotated into place.
pub fn sample_hemisphere(a: Axis, sign: Sign, rng: &mut RngStream) -> AngularMomentumVector {
    // 1 - u lies in (0, 1], so the local height is strictly positive.
    let h = 1.0 - rng.uniform();
    let phi = TAU * rng.uniform();
    let r = (1.0 - h * h).max(0.0).sqrt();
    let (sp, cp) = phi.sin_cos();
    let (lx, ly) = (r * cp, r * sp);
    let (st, ct) = a.theta.sin_cos();
    // Frame: e1 = x, e2 = (0, cos θ, −sin θ), pole = (0, sin θ, cos θ).
    let s = sign.value();
    AngularMomentumVector {
        x: s * lx,
        y: s * (ly * ct + h * st),
        z: s * (-ly * st + h * ct),
    }
}

/// Direction with fixed `J_z / J = jz0 / j0` and uniform azimuth.
pub fn sample_ring(j0: f64, jz0: f64, rng: &mut RngStream) -> Result<AngularMomentumVector> {
    check_ring(j0, jz0)?;
    let c = jz0 / j0;
    let r = (1.0 - c * c).max(0.0).sqrt();
    let phi = TAU * rng.uniform();
    let (s, co) = phi.sin_cos();
    Ok(AngularMomentumVector {
        x: r * co,
        y: r * s,
        z: c,
    })
}

pub(crate) fn check_ring(j0: f64, jz0: f64) -> Result<()> {
    if !(j0 > 0.0) || !(jz0.abs() <= j0) {
        return Err(Error::InvalidRing { j0, jz0 });
    }
    Ok(())
}
