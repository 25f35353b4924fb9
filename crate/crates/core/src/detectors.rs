//! Detector response models.
//!
//! [`DetectorModel::Direct`], [`DetectorModel::Sign`] and
//! [`DetectorModel::StochasticSign`] respond to the individual direction of
//! `J`. [`DetectorModel::EnsembleDep`] responds to the ensemble the particle
//! belongs to: the outcome probabilities are fixed by requiring the mean
//! outcome to equal the ensemble mean projection, and a measurement replaces
//! the ensemble by the hemisphere about the measured axis on the side of the
//! outcome.

use std::fmt;
use std::str::FromStr;

use crate::distributions::{Ensemble, PairSource};
use crate::error::{Error, Result};
use crate::geometry::{project, AngularMomentumVector, Axis, Sign};
use crate::rng::RngStream;

pub const DEFAULT_P_HI: f64 = 0.75;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DetectorModel {
    /// Reads the projection itself.
    Direct,
    /// `±½` by the sign of the projection.
    Sign,
    /// `±½`, agreeing with the projection sign with probability `p_hi`.
    StochasticSign { p_hi: f64 },
    EnsembleDep,
}

impl DetectorModel {
    pub fn stochastic_sign(p_hi: f64) -> Result<Self> {
        if !(0.5..=1.0).contains(&p_hi) {
            return Err(Error::InvalidWeight(p_hi));
        }
        Ok(DetectorModel::StochasticSign { p_hi })
    }

    /// Largest absolute reading.
    pub fn v_max(&self) -> f64 {
        match self {
            DetectorModel::Direct => 1.0,
            _ => 0.5,
        }
    }

    pub fn is_pointlike(&self) -> bool {
        !matches!(self, DetectorModel::EnsembleDep)
    }

    pub fn name(&self) -> &'static str {
        match self {
            DetectorModel::Direct => "direct",
            DetectorModel::Sign => "sign",
            DetectorModel::StochasticSign { .. } => "stochastic",
            DetectorModel::EnsembleDep => "ensemble",
        }
    }

    pub fn all_default() -> [DetectorModel; 4] {
        [
            DetectorModel::Direct,
            DetectorModel::Sign,
            DetectorModel::StochasticSign { p_hi: DEFAULT_P_HI },
            DetectorModel::EnsembleDep,
        ]
    }
}

impl fmt::Display for DetectorModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DetectorModel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "direct" => Ok(DetectorModel::Direct),
            "sign" => Ok(DetectorModel::Sign),
            "stochastic" | "stochastic-sign" => {
                Ok(DetectorModel::StochasticSign { p_hi: DEFAULT_P_HI })
            }
            "ensemble" | "ensemble-dep" => Ok(DetectorModel::EnsembleDep),
            other => Err(format!(
                "unknown model '{other}' (expected direct, sign, stochastic or ensemble)"
            )),
        }
    }
}

/// A single detector reading.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Outcome(pub f64);

impl Outcome {
    pub const PLUS: Outcome = Outcome(0.5);
    pub const MINUS: Outcome = Outcome(-0.5);

    pub fn value(self) -> f64 {
        self.0
    }

    fn half(sign: Sign) -> Self {
        Outcome(0.5 * sign.value())
    }

    pub fn sign(self) -> Sign {
        Sign::of(self.0)
    }
}

pub fn measure_pointlike(
    model: &DetectorModel,
    j: &AngularMomentumVector,
    a: Axis,
    rng: &mut RngStream,
) -> Result<Outcome> {
    let p = project(j, a);
    match *model {
        DetectorModel::Direct => Ok(Outcome(p)),
        DetectorModel::Sign => Ok(Outcome::half(Sign::of(p))),
        DetectorModel::StochasticSign { p_hi } => {
            let s = Sign::of(p);
            Ok(Outcome::half(if rng.bernoulli(p_hi) { s } else { s.flip() }))
        }
        DetectorModel::EnsembleDep => Err(Error::NotPointLike),
    }
}

/// `[P(+½), P(−½)]` for an ensemble-dependent measurement along `a`.
pub fn outcome_probabilities(e: &Ensemble, a: Axis) -> Result<[f64; 2]> {
    if let Ensemble::Ring { .. } = e {
        return Err(Error::RingUnsupported {
            op: "measure_ensemble",
        });
    }
    let plus = (0.5 + e.mean_projection(a)).clamp(0.0, 1.0);
    Ok([plus, 1.0 - plus])
}

pub fn measure_ensemble(e: &Ensemble, a: Axis, rng: &mut RngStream) -> Result<(Outcome, Ensemble)> {
    let [plus, _] = outcome_probabilities(e, a)?;
    let sign = if rng.bernoulli(plus) { Sign::Plus } else { Sign::Minus };
    Ok((Outcome::half(sign), Ensemble::hemisphere(a, sign)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasurementRecord {
    pub axis: Axis,
    pub outcome: Outcome,
    pub pre_ensemble: Ensemble,
    pub post_ensemble: Ensemble,
    /// `⟨J_axis⟩_post − ⟨J_axis⟩_pre`.
    pub delta_mean_projection: f64,
    /// `−2k · P(R = k | pre)` for the observed outcome `k`; an alternative
    /// expression for the same change whose sign convention disagrees with
    /// `delta_mean_projection`. Kept so both can be reported.
    pub delta_weighted: f64,
}

pub fn measure_sequence(
    e0: &Ensemble,
    axes: &[Axis],
    rng: &mut RngStream,
) -> Result<Vec<MeasurementRecord>> {
    let mut current = *e0;
    let mut out = Vec::with_capacity(axes.len());
    for &axis in axes {
        let probs = outcome_probabilities(&current, axis)?;
        let (outcome, post) = measure_ensemble(&current, axis, rng)?;
        let k = outcome.value();
        let p_k = if k > 0.0 { probs[0] } else { probs[1] };
        out.push(MeasurementRecord {
            axis,
            outcome,
            pre_ensemble: current,
            post_ensemble: post,
            delta_mean_projection: post.mean_projection(axis) - current.mean_projection(axis),
            delta_weighted: -2.0 * k * p_k,
        });
        current = post;
    }
    Ok(out)
}

/// Which particle of an ensemble-dependent pair is read first.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FirstParticle {
    One,
    Two,
}

/// Ensemble-dependent pair protocol. The first particle is measured from
/// the full sphere; conservation puts the other particle in the opposite
/// hemisphere about the same axis before it is measured.
pub fn measure_pair_ensemble(
    a: Axis,
    b: Axis,
    first: FirstParticle,
    rng: &mut RngStream,
) -> (Outcome, Outcome) {
    let (first_axis, second_axis) = match first {
        FirstParticle::One => (a, b),
        FirstParticle::Two => (b, a),
    };
    let [plus, _] = outcome_probabilities(&Ensemble::FullSphere, first_axis)
        .expect("full sphere is measurable");
    let s1 = if rng.bernoulli(plus) { Sign::Plus } else { Sign::Minus };
    let partner = Ensemble::hemisphere(first_axis, s1.flip());
    let [plus2, _] = outcome_probabilities(&partner, second_axis).expect("hemisphere is measurable");
    let s2 = if rng.bernoulli(plus2) { Sign::Plus } else { Sign::Minus };
    let (r1, r2) = (Outcome::half(s1), Outcome::half(s2));
    match first {
        FirstParticle::One => (r1, r2),
        FirstParticle::Two => (r2, r1),
    }
}

/// Joint reading of particle 1 along `a` and particle 2 along `b`.
///
/// Point-like models draw `(J1, J2)` from `src`; the ensemble-dependent
/// model starts from the spherically symmetric pair ensemble and ignores
/// `src`.
pub fn measure_pair(
    model: &DetectorModel,
    src: &PairSource,
    a: Axis,
    b: Axis,
    rng: &mut RngStream,
) -> Result<(Outcome, Outcome)> {
    if let DetectorModel::EnsembleDep = model {
        return Ok(measure_pair_ensemble(a, b, FirstParticle::One, rng));
    }
    let (j1, j2) = src.sample_pair(rng);
    let r1 = measure_pointlike(model, &j1, a, rng)?;
    let r2 = measure_pointlike(model, &j2, b, rng)?;
    Ok((r1, r2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

    fn z_ok(mean: f64, expected: f64, var: f64, n: usize) -> bool {
        let se = (var / n as f64).sqrt();
        (mean - expected).abs() <= 5.0 * se
    }

    #[test]
    fn pointlike_examples() {
        let a = Axis::new(0.0);
        let j = AngularMomentumVector::new(0.0, (1.0f64 - 0.09).sqrt(), 0.3);
        let mut rng = RngStream::new(1, 1);
        assert_eq!(measure_pointlike(&DetectorModel::Sign, &j, a, &mut rng).unwrap(), Outcome::PLUS);
        assert_abs_diff_eq!(
            measure_pointlike(&DetectorModel::Direct, &j, a, &mut rng).unwrap().value(),
            0.3,
            epsilon = 1e-15
        );
        let tie = AngularMomentumVector::new(1.0, 0.0, 0.0);
        assert_eq!(measure_pointlike(&DetectorModel::Sign, &tie, a, &mut rng).unwrap(), Outcome::PLUS);
        assert_eq!(
            measure_pointlike(&DetectorModel::EnsembleDep, &j, a, &mut rng),
            Err(Error::NotPointLike)
        );
        assert!(DetectorModel::stochastic_sign(0.4).is_err());
    }

    #[test]
    fn stochastic_sign_frequencies() {
        let model = DetectorModel::StochasticSign { p_hi: 0.75 };
        let a = Axis::new(0.0);
        let j = AngularMomentumVector::new(0.0, 0.6, 0.8);
        let mut rng = RngStream::new(2, 0);
        let n = 1_000_000;
        let (mut plus, mut sum) = (0usize, 0.0);
        for _ in 0..n {
            let o = measure_pointlike(&model, &j, a, &mut rng).unwrap();
            if o.value() > 0.0 {
                plus += 1;
            }
            sum += o.value();
        }
        assert!(z_ok(plus as f64 / n as f64, 0.75, 0.75 * 0.25, n));
        // outcome variance: 1/4 − 1/16
        assert!(z_ok(sum / n as f64, 0.25, 0.25 - 1.0 / 16.0, n));
    }

    #[test]
    fn ensemble_examples() {
        let a = Axis::new(0.5);
        let h = Ensemble::hemisphere(a, Sign::Plus);
        let mut rng = RngStream::new(3, 0);
        for _ in 0..1000 {
            assert_eq!(measure_ensemble(&h, a, &mut rng).unwrap(), (Outcome::PLUS, h));
        }
        let b = Axis::new(0.5 + PI / 3.0);
        assert_abs_diff_eq!(outcome_probabilities(&h, b).unwrap()[0], 0.75, epsilon = 1e-15);
        for t in [0.0, 1.0, 4.0] {
            assert_eq!(outcome_probabilities(&Ensemble::FullSphere, Axis::new(t)).unwrap(), [0.5, 0.5]);
        }
        let ring = Ensemble::ring(1.0, 0.3).unwrap();
        assert!(measure_ensemble(&ring, a, &mut rng).is_err());
    }

    #[test]
    fn ensemble_collapse_statistics() {
        let a = Axis::new(0.0);
        let b = Axis::new(PI / 3.0);
        let h = Ensemble::hemisphere(a, Sign::Plus);
        let mut rng = RngStream::new(4, 0);
        let n = 1_000_000;
        let mut plus = 0usize;
        for _ in 0..n {
            let (o, post) = measure_ensemble(&h, b, &mut rng).unwrap();
            assert_eq!(post, Ensemble::hemisphere(b, o.sign()));
            if o.value() > 0.0 {
                plus += 1;
            }
        }
        assert!(z_ok(plus as f64 / n as f64, 0.75, 0.75 * 0.25, n));
    }

    #[test]
    fn sequence_repeatability_and_records() {
        let a = Axis::new(1.0);
        let h = Ensemble::hemisphere(a, Sign::Plus);
        let mut rng = RngStream::new(5, 0);
        let recs = measure_sequence(&h, &[a, a, a], &mut rng).unwrap();
        assert!(recs.iter().all(|r| r.outcome == Outcome::PLUS && r.delta_mean_projection == 0.0));

        let b = Axis::new(1.0 + PI / 3.0);
        let recs = measure_sequence(&h, &[b, a], &mut rng).unwrap();
        for r in &recs {
            let expected = r.post_ensemble.mean_projection(r.axis) - r.pre_ensemble.mean_projection(r.axis);
            assert_eq!(r.delta_mean_projection, expected);
        }
        assert_eq!(recs[1].pre_ensemble, recs[0].post_ensemble);
    }

    #[test]
    fn sequence_means_non_commuting() {
        let a = Axis::new(0.0);
        let b = Axis::new(PI / 3.0);
        let a2 = Axis::new(2.0 * PI / 3.0);
        let h = Ensemble::hemisphere(a, Sign::Plus);
        let n = 1_000_000;
        for (axes, expected) in [([b, a2], 0.125), ([a2, b], -0.125)] {
            let mut rng = RngStream::new(6, 0);
            let mut s = 0.0;
            for _ in 0..n {
                s += measure_sequence(&h, &axes, &mut rng).unwrap()[1].outcome.value();
            }
            assert!(z_ok(s / n as f64, expected, 0.25, n), "{axes:?}");
        }
    }

    #[test]
    fn ensemble_pair_examples() {
        let src = PairSource::StaticSphere;
        let a = Axis::new(0.3);
        let mut rng = RngStream::new(7, 0);
        for _ in 0..10_000 {
            let (r1, r2) = measure_pair(&DetectorModel::EnsembleDep, &src, a, a, &mut rng).unwrap();
            assert_eq!(r1.value(), -r2.value());
        }
        let b = Axis::new(0.3 + FRAC_PI_4);
        let n = 1_000_000;
        let mut s = 0.0;
        for _ in 0..n {
            let (r1, r2) = measure_pair(&DetectorModel::EnsembleDep, &src, a, b, &mut rng).unwrap();
            s += r1.value() * r2.value();
        }
        assert!(z_ok(s / n as f64, -0.25 * FRAC_PI_4.cos(), 1.0 / 16.0, n));
    }

    #[test]
    fn sign_pair_correlations() {
        let src = PairSource::StaticSphere;
        let mut rng = RngStream::new(8, 0);
        let n = 1_000_000;
        // −1/4 + Δ/2π: zero for orthogonal axes, −1/8 at Δ = π/4
        for (d, expected) in [(FRAC_PI_2, 0.0), (FRAC_PI_4, -0.125)] {
            let mut s = 0.0;
            let (a, b) = (Axis::new(0.0), Axis::new(d));
            for _ in 0..n {
                let (r1, r2) = measure_pair(&DetectorModel::Sign, &src, a, b, &mut rng).unwrap();
                s += r1.value() * r2.value();
            }
            assert!(z_ok(s / n as f64, expected, 1.0 / 16.0, n), "Δ={d}");
        }
    }

    #[test]
    fn ensemble_pair_order_symmetry() {
        let a = Axis::new(0.2);
        let b = Axis::new(1.3);
        let n = 400_000;
        let joint = |first: FirstParticle, seed: u64| {
            let mut rng = RngStream::new(seed, 0);
            let mut counts = [0usize; 4];
            for _ in 0..n {
                let (r1, r2) = measure_pair_ensemble(a, b, first, &mut rng);
                let i = (r1.value() > 0.0) as usize * 2 + (r2.value() > 0.0) as usize;
                counts[i] += 1;
            }
            counts
        };
        let c1 = joint(FirstParticle::One, 10);
        let c2 = joint(FirstParticle::Two, 11);
        for i in 0..4 {
            let p1 = c1[i] as f64 / n as f64;
            let p2 = c2[i] as f64 / n as f64;
            let se = (p1 * (1.0 - p1) / n as f64 + p2 * (1.0 - p2) / n as f64).sqrt();
            assert!((p1 - p2).abs() <= 5.0 * se, "cell {i}: {p1} vs {p2}");
        }
    }

    #[test]
    fn sign_detector_is_pure() {
        let mut rng = RngStream::new(9, 0);
        for _ in 0..1000 {
            let j = crate::geometry::sample_sphere(&mut rng);
            let a = Axis::new(TAU * rng.uniform());
            let o1 = measure_pointlike(&DetectorModel::Sign, &j, a, &mut rng).unwrap();
            let o2 = measure_pointlike(&DetectorModel::Sign, &j, a, &mut rng).unwrap();
            assert_eq!(o1, o2);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn probabilities_form_a_distribution(ta in 0.0..TAU, tb in 0.0..TAU, plus in any::<bool>()) {
            let sign = if plus { Sign::Plus } else { Sign::Minus };
            let e = Ensemble::hemisphere(Axis::new(ta), sign);
            let b = Axis::new(tb);
            let [p, m] = outcome_probabilities(&e, b).unwrap();
            prop_assert!((0.0..=1.0).contains(&p) && (0.0..=1.0).contains(&m));
            prop_assert_eq!(p + m, 1.0);
            // mean outcome reproduces the ensemble mean projection
            prop_assert!((0.5 * p - 0.5 * m - e.mean_projection(b)).abs() < 1e-12);
        }
    }
}
