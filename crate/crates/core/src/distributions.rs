//! Ensembles on the angular-momentum sphere, the fixed-`J_z` configuration
//! density and the anti-correlated pair source.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::geometry::{check_ring, sample_hemisphere, sample_ring, sample_sphere};
use crate::geometry::{AngularMomentumVector, Axis, Sign};
use crate::rng::RngStream;

/// A distribution of `J` over the angular-momentum sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Ensemble {
    FullSphere,
    Hemisphere { axis: Axis, sign: Sign },
    /// Fixed magnitude `j0` and fixed `J_z = jz0`, azimuth uniform.
    Ring { j0: f64, jz0: f64 },
}

impl Ensemble {
    pub fn hemisphere(axis: Axis, sign: Sign) -> Self {
        Ensemble::Hemisphere { axis, sign }
    }

    pub fn ring(j0: f64, jz0: f64) -> Result<Self> {
        check_ring(j0, jz0)?;
        Ok(Ensemble::Ring { j0, jz0 })
    }

    /// Draws a unit direction from the ensemble.
    pub fn sample(&self, rng: &mut RngStream) -> Result<AngularMomentumVector> {
        match *self {
            Ensemble::FullSphere => Ok(sample_sphere(rng)),
            Ensemble::Hemisphere { axis, sign } => Ok(sample_hemisphere(axis, sign, rng)),
            Ensemble::Ring { j0, jz0 } => sample_ring(j0, jz0, rng),
        }
    }

    /// `⟨J_b⟩` over the ensemble.
    ///
    /// Hemisphere and sphere values are in units of `J`; a ring carries its
    /// own magnitude and yields `jz0 · cos θ_b`.
    pub fn mean_projection(&self, b: Axis) -> f64 {
        match *self {
            Ensemble::FullSphere => 0.0,
            Ensemble::Hemisphere { axis, sign } => {
                0.5 * sign.value() * (b.theta() - axis.theta()).cos()
            }
            Ensemble::Ring { jz0, .. } => jz0 * b.theta().cos(),
        }
    }

    /// `⟨H(side · J_b) J_b⟩`, the part of the mean carried by the half of
    /// the ensemble whose projection has sign `side`.
    pub fn half_mean_projection(&self, b: Axis, side: Sign) -> Result<f64> {
        let s = side.value();
        match *self {
            Ensemble::FullSphere => Ok(0.25 * s),
            // Over the lune where the hemisphere meets the half b(side),
            // ∫ J_b dΩ = side·π(1 + side·sign·cos Δ)/2; the hemisphere has area 2π.
            Ensemble::Hemisphere { axis, sign } => {
                let c = (b.theta() - axis.theta()).cos();
                Ok(0.25 * s * (1.0 + s * sign.value() * c))
            }
            Ensemble::Ring { .. } => Err(Error::RingUnsupported {
                op: "half_mean_projection",
            }),
        }
    }
}

pub fn ensemble_mean_projection(e: &Ensemble, b: Axis) -> f64 {
    e.mean_projection(b)
}

pub fn half_mean_projection(e: &Ensemble, b: Axis, side: Sign) -> Result<f64> {
    e.half_mean_projection(b, side)
}

/// Value of the configuration density at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DensityValue {
    Finite(f64),
    /// On the support boundary, where the density diverges (integrably).
    Singular,
}

impl DensityValue {
    pub fn value(self) -> f64 {
        match self {
            DensityValue::Finite(v) => v,
            DensityValue::Singular => f64::INFINITY,
        }
    }

    pub fn is_singular(self) -> bool {
        matches!(self, DensityValue::Singular)
    }
}

/// Configuration-space density of particles whose angular momentum has
/// magnitude `j0` and `J_z = jz0`:
/// `ρ(θ, φ) = N / [sin θ · √(J0² − Jz0² / sin² θ)]` with `N = J0 / 2π²`,
/// normalized against the solid-angle measure `sin θ dθ dφ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConfigDensity {
    j0: f64,
    jz0: f64,
}

impl ConfigDensity {
    pub fn new(j0: f64, jz0: f64) -> Result<Self> {
        check_ring(j0, jz0)?;
        Ok(Self { j0, jz0 })
    }

    pub fn j0(&self) -> f64 {
        self.j0
    }

    pub fn jz0(&self) -> f64 {
        self.jz0
    }

    pub fn normalization(&self) -> f64 {
        self.j0 / (2.0 * PI * PI)
    }

    /// Half-width `u0` of the support in `u = cos θ`: `|u| ≤ √(1 − Jz0²/J0²)`.
    pub fn support_half_width(&self) -> f64 {
        let c = self.jz0 / self.j0;
        (1.0 - c * c).max(0.0).sqrt()
    }

    pub fn density_at(&self, theta: f64, _phi: f64) -> DensityValue {
        let s = theta.sin().abs();
        // sin θ · √(J0² − Jz0²/sin²θ) = √(J0² sin²θ − Jz0²)
        let arg = self.j0 * self.j0 * s * s - self.jz0 * self.jz0;
        if arg < 0.0 {
            DensityValue::Finite(0.0)
        } else if arg == 0.0 {
            DensityValue::Singular
        } else {
            DensityValue::Finite(self.normalization() / arg.sqrt())
        }
    }
}

pub fn density_at(d: &ConfigDensity, theta: f64, phi: f64) -> DensityValue {
    d.density_at(theta, phi)
}

/// Source of `(J1, J2)` pairs with `J2 = −J1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairSource {
    /// `J1` uniform on the sphere.
    StaticSphere,
    /// Each pair occupies opposite hemispheres about a freshly drawn axis
    /// `b(t)`, with the side chosen by a fair coin.
    RotatingHemispheres,
}

impl PairSource {
    pub fn sample_pair(
        &self,
        rng: &mut RngStream,
    ) -> (AngularMomentumVector, AngularMomentumVector) {
        let j1 = match self {
            PairSource::StaticSphere => sample_sphere(rng),
            PairSource::RotatingHemispheres => {
                let axis = Axis::new(TAU * rng.uniform());
                let sign = if rng.bernoulli(0.5) { Sign::Plus } else { Sign::Minus };
                sample_hemisphere(axis, sign, rng)
            }
        };
        (j1, -j1)
    }
}

pub fn sample_pair(
    src: &PairSource,
    rng: &mut RngStream,
) -> (AngularMomentumVector, AngularMomentumVector) {
    src.sample_pair(rng)
}
