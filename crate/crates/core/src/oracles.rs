//! Naive reference computations.
//!
//! Nothing here calls into `analysis`, `detectors` or `distributions`
//! formulas: every closed form the oracles check is re-derived inline from
//! sphere geometry or outcome-tree enumeration, so a transcription error in
//! one place cannot silently agree with itself.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::detectors::DetectorModel;
use crate::distributions::Ensemble;
use crate::error::{Error, Result};
use crate::geometry::Axis;

pub const MAX_TREE_DEPTH: usize = 20;

/// Midpoint grid on `(cos θ, φ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuadratureSpec {
    pub n_theta: usize,
    pub n_phi: usize,
}

impl QuadratureSpec {
    pub fn new(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta < 8 || n_phi < 8 {
            return Err(Error::GridTooSmall { n_theta, n_phi });
        }
        Ok(Self { n_theta, n_phi })
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            n_theta: 512,
            n_phi: 512,
        }
    }
}

/// `(1/4π) ∫ f dΩ` by the midpoint rule in `u = cos θ` and `φ`.
pub fn quad_expectation<F>(spec: QuadratureSpec, f: F) -> f64
where
    F: Fn([f64; 3]) -> f64,
{
    let du = 2.0 / spec.n_theta as f64;
    let dphi = TAU / spec.n_phi as f64;
    let mut total = 0.0;
    for i in 0..spec.n_theta {
        let u = -1.0 + (i as f64 + 0.5) * du;
        let r = (1.0 - u * u).sqrt();
        let mut row = 0.0;
        for k in 0..spec.n_phi {
            let phi = (k as f64 + 0.5) * dphi;
            row += f([r * phi.cos(), r * phi.sin(), u]);
        }
        total += row;
    }
    total / (spec.n_theta * spec.n_phi) as f64
}

/// `∫∫ ρ(θ, φ) sin θ dθ dφ` for a density supported on `|cos θ| ≤ u0` with
/// an inverse-square-root divergence at the edge.
///
/// With `cos θ = u0 sin t` the edge maps to `t = ±π/2` and the Jacobian
/// `u0 cos t` cancels the divergence, leaving a smooth integrand for the
/// midpoint rule in `t`.
pub fn integrate_edge_singular<F>(density: F, u0: f64, n_t: usize, n_phi: usize) -> f64
where
    F: Fn(f64, f64) -> f64,
{
    let dt = PI / n_t as f64;
    let dphi = TAU / n_phi as f64;
    let mut total = 0.0;
    for i in 0..n_t {
        let t = -FRAC_PI_2 + (i as f64 + 0.5) * dt;
        let theta = (u0 * t.sin()).acos();
        let jac = u0 * t.cos();
        for k in 0..n_phi {
            let phi = (k as f64 + 0.5) * dphi;
            total += density(theta, phi) * jac;
        }
    }
    total * dt * dphi
}

/// `⟨J_a⟩` for particles with `|J| = j0`, `J_z = jz0`, distributed by
/// `density` in configuration space, averaging the two `p_θ` branches at
/// every point and using `J = r × p`.
pub fn ring_mean_projection<F>(density: F, j0: f64, jz0: f64, theta_a: f64, n_t: usize, n_phi: usize) -> f64
where
    F: Fn(f64, f64) -> f64,
{
    let u0 = (1.0 - (jz0 / j0).powi(2)).max(0.0).sqrt();
    let (sa, ca) = theta_a.sin_cos();
    let dt = PI / n_t as f64;
    let dphi = TAU / n_phi as f64;
    let mut total = 0.0;
    for i in 0..n_t {
        let t = -FRAC_PI_2 + (i as f64 + 0.5) * dt;
        let theta = (u0 * t.sin()).acos();
        let jac = u0 * t.cos();
        let (st, ct) = theta.sin_cos();
        let p_theta = (j0 * j0 - jz0 * jz0 / (st * st)).max(0.0).sqrt();
        for k in 0..n_phi {
            let phi = (k as f64 + 0.5) * dphi;
            let (sp, cp) = phi.sin_cos();
            let mut ja = 0.0;
            for pt in [p_theta, -p_theta] {
                let jy = cp * pt - sp * ct / st * jz0;
                ja += 0.5 * (jz0 * ca + jy * sa);
            }
            total += density(theta, phi) * jac * ja;
        }
    }
    total * dt * dphi
}

/// Exact `E(a, b)` for the sign-type detectors by enumerating the four
/// sign domains of `(J1a, J1b)` and both detectors' outcome weights.
pub fn enumerate_pointlike_e(model: &DetectorModel, delta: f64) -> Result<f64> {
    let p_hi = match *model {
        DetectorModel::Sign => 1.0,
        DetectorModel::StochasticSign { p_hi } => p_hi,
        _ => return Err(Error::UnsupportedModel("enumerate_pointlike_e")),
    };
    // P(sign J1a = s, sign J1b = t): the two hemispheres share a lune of
    // angle π − Δ on the same side and Δ on opposite sides.
    let same = 0.5 * (1.0 - delta / PI);
    let opposite = 0.5 * delta / PI;
    let p_plus = |s: f64| if s > 0.0 { p_hi } else { 1.0 - p_hi };
    let mut e = 0.0;
    for s in [1.0, -1.0] {
        for t in [1.0, -1.0] {
            let w = if s == t { same } else { opposite };
            // J2 = −J1, so sign J2b = −t
            let s2 = -t;
            for k in [0.5, -0.5] {
                let pk = if k > 0.0 { p_plus(s) } else { 1.0 - p_plus(s) };
                for kp in [0.5, -0.5] {
                    let pkp = if kp > 0.0 { p_plus(s2) } else { 1.0 - p_plus(s2) };
                    e += w * pk * pkp * k * kp;
                }
            }
        }
    }
    Ok(e)
}

/// Exact ensemble-dependent `E(a, b)` from the two-branch outcome tree.
pub fn enumerate_ensemble_e(delta: f64) -> f64 {
    let mut e = 0.0;
    for k in [0.5, -0.5] {
        let p1 = 0.5;
        // partner hemisphere about a on the side opposite to k
        let side = if k > 0.0 { -1.0 } else { 1.0 };
        let plus = (1.0 + side * delta.cos()) / 2.0;
        let conditional = 0.5 * plus - 0.5 * (1.0 - plus);
        e += k * p1 * conditional;
    }
    e
}

fn branch_plus(state: Option<(f64, f64)>, theta: f64) -> f64 {
    match state {
        None => 0.5,
        Some((axis, side)) => (1.0 + side * (theta - axis).cos()) / 2.0,
    }
}

fn tree_state(e0: &Ensemble) -> Result<Option<(f64, f64)>> {
    match *e0 {
        Ensemble::FullSphere => Ok(None),
        Ensemble::Hemisphere { axis, sign } => Ok(Some((axis.theta(), sign.value()))),
        Ensemble::Ring { .. } => Err(Error::RingUnsupported {
            op: "sequence_tree_mean",
        }),
    }
}

/// Expected outcome at every step of a sequence of ensemble-dependent
/// measurements, by full enumeration of the `2ⁿ` outcome branches.
pub fn sequence_tree_step_means(e0: &Ensemble, axes: &[Axis]) -> Result<Vec<f64>> {
    if axes.is_empty() {
        return Err(Error::EmptySequence);
    }
    if axes.len() > MAX_TREE_DEPTH {
        return Err(Error::DepthExceeded {
            depth: axes.len(),
            cap: MAX_TREE_DEPTH,
        });
    }
    let mut means = vec![0.0; axes.len()];
    fn walk(state: Option<(f64, f64)>, weight: f64, axes: &[Axis], depth: usize, means: &mut [f64]) {
        if depth == axes.len() || weight == 0.0 {
            return;
        }
        let theta = axes[depth].theta();
        let plus = branch_plus(state, theta);
        for (side, p) in [(1.0, plus), (-1.0, 1.0 - plus)] {
            means[depth] += weight * p * 0.5 * side;
            walk(Some((theta, side)), weight * p, axes, depth + 1, means);
        }
    }
    walk(tree_state(e0)?, 1.0, axes, 0, &mut means);
    Ok(means)
}

/// Expected final outcome of a measurement sequence.
pub fn sequence_tree_mean(e0: &Ensemble, axes: &[Axis]) -> Result<f64> {
    Ok(*sequence_tree_step_means(e0, axes)?.last().expect("non-empty"))
}
