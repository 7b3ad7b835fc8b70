//! Coherent-light check of the JCM NS gate: the cavity output, the cat-like
//! reference superposition, the Mach-Zehnder interferometer, and photon
//! counting at its two detectors.

use std::f64::consts::{FRAC_PI_3, PI};

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::fock::{CoherentAmplitude, FockCutoff, FockError, MultiModeState};
use crate::jcm::{ns_gate, JcmError};
use crate::linear_optics::{beam_splitter, phase_shifter, BeamSplitter, OpticsError, PhaseShifter};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InterferometerError {
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error(transparent)]
    Jcm(#[from] JcmError),
    #[error(transparent)]
    Optics(#[from] OpticsError),
    #[error("shots must be at least 1")]
    NoShots,
    #[error("detector statistics need a two-mode state, got {0} modes")]
    NotTwoMode(usize),
    #[error("cannot sample from the zero state")]
    ZeroDistribution,
}

/// Field leaving the cavity after the atom was found in `|g>`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CavityOutput {
    pub state: MultiModeState,
    pub alpha: CoherentAmplitude,
    pub m: u32,
    pub success_probability: f64,
    /// Weight on three or more photons, outside the `{|0>, |1>, |2>}` model.
    pub error_mass: f64,
}

/// Runs a (renormalized, truncated) coherent state through the JCM NS gate
/// without the compensating phase shifter.
pub fn cavity_ns_output(
    alpha: CoherentAmplitude,
    m: u32,
    cutoff: FockCutoff,
) -> Result<CavityOutput, InterferometerError> {
    let input = MultiModeState::coherent(alpha, cutoff).renormalize()?;
    let r = ns_gate(&input, m, false)?;
    let error_mass = r.output.weight_above(0, 2)?;
    Ok(CavityOutput {
        state: r.output,
        alpha,
        m,
        success_probability: r.success_probability,
        error_mass,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CatNormalization {
    /// Plain `1/2` prefactor; the norm is `1 - O(|alpha|^2)`, not exactly one.
    Half,
    /// Rescaled to unit norm.
    Exact,
}

/// `(|e^{i pi/3} alpha> + |e^{-i pi/3} alpha>) / 2`, optionally renormalized.
///
/// Its leading amplitudes are `e^{-|alpha|^2/2} (1, alpha/2, -alpha^2/(2 sqrt2))`:
/// the `n`-photon amplitude is `cos(n pi/3)` times that of `|alpha>`.
pub fn cat_reference(
    alpha: CoherentAmplitude,
    normalization: CatNormalization,
    cutoff: FockCutoff,
) -> Result<MultiModeState, InterferometerError> {
    let rot = Complex64::from_polar(1.0, FRAC_PI_3);
    let a = alpha.value();
    let sum = MultiModeState::coherent((a * rot).into(), cutoff)
        .added(&MultiModeState::coherent((a * rot.conj()).into(), cutoff))?
        .scaled(Complex64::new(0.5, 0.0));
    Ok(match normalization {
        CatNormalization::Half => sum,
        CatNormalization::Exact => sum.renormalize()?,
    })
}

/// `1 - |<cat|Psi>|^2` with the half-prefactor cat state and the cavity output
/// of order `m`. Vanishes like `|alpha|^2`.
pub fn cat_overlap_deficit(
    alpha: CoherentAmplitude,
    m: u32,
    cutoff: FockCutoff,
) -> Result<f64, InterferometerError> {
    let cat = cat_reference(alpha, CatNormalization::Half, cutoff)?;
    let out = cavity_ns_output(alpha, m, cutoff)?;
    Ok(1.0 - cat.overlap(&out.state)?.norm_sqr())
}

/// `F_1..F_4(theta)`: branch amplitudes of the interferometer in units of `alpha/2`.
pub fn f_functions(theta: f64) -> [Complex64; 4] {
    let u = Complex64::from_polar(1.0, theta);
    let one = Complex64::new(1.0, 0.0);
    let w = Complex64::from_polar(1.0, FRAC_PI_3);
    [
        (u + one) * w + (u - one),
        (u - one) * w + (u + one),
        (u + one) * w.conj() + (u - one),
        (u - one) * w.conj() + (u + one),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterferometerResponse {
    pub theta: f64,
    pub alpha: CoherentAmplitude,
    #[serde(serialize_with = "crate::ser::complex_array")]
    pub f: [Complex64; 4],
    pub f_abs: [f64; 4],
    /// Poisson means `|alpha F_k / 2|^2` of the four branch coherent states.
    pub mu: [f64; 4],
}

impl InterferometerResponse {
    pub fn new(alpha: CoherentAmplitude, theta: f64) -> Self {
        let f = f_functions(theta);
        InterferometerResponse {
            theta,
            alpha,
            f,
            f_abs: f.map(|x| x.norm()),
            mu: f.map(|x| (alpha.value() * x / 2.0).norm_sqr()),
        }
    }
}

/// `(theta, |F1|, |F2|)` on `steps + 1` evenly spaced points over `[0, 2 pi]`.
pub fn f_sweep(steps: usize) -> Vec<(f64, f64, f64)> {
    (0..=steps)
        .map(|k| {
            let theta = 2.0 * PI * k as f64 / steps.max(1) as f64;
            let f = f_functions(theta);
            (theta, f[0].norm(), f[1].norm())
        })
        .collect()
}

/// Convention for the second splitter of the Mach-Zehnder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SecondSplitter {
    /// Same transform as the first splitter; the coherent-state chain
    /// `((e^{i theta} ± 1) alpha + (e^{i theta} ∓ 1) beta) / 2` assumes this.
    #[default]
    Forward,
    /// Adjoint of the first splitter. The splitter's mode matrix is real,
    /// symmetric and orthogonal, so this gives the same state as `Forward`;
    /// the flag keeps the two circuit descriptions distinguishable.
    Inverse,
}

/// `input_a1 ⊗ |alpha_a2>` through BS1, a phase `theta` on path a1, and BS2.
pub fn mach_zehnder(
    input_a1: &MultiModeState,
    alpha_a2: CoherentAmplitude,
    theta: f64,
    second: SecondSplitter,
) -> Result<MultiModeState, InterferometerError> {
    let joint = input_a1.tensor(&MultiModeState::coherent(alpha_a2, input_a1.cutoff()))?;
    let bs = BeamSplitter::new(0, 1)?;
    let s = beam_splitter(&joint, &bs, false)?;
    let s = phase_shifter(&s, &PhaseShifter { mode: 0, theta })?;
    Ok(beam_splitter(&s, &bs, second == SecondSplitter::Inverse)?)
}

/// Photon-count statistics of the two detectors, D1 on mode 0 and D2 on mode 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectorStatistics {
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    /// `joint[n1][n2]`.
    pub joint: Vec<Vec<f64>>,
    pub mean_d1: f64,
    pub mean_d2: f64,
}

fn mean(p: &[f64]) -> f64 {
    p.iter().enumerate().map(|(n, q)| n as f64 * q).sum()
}

pub fn detector_statistics(s: &MultiModeState) -> Result<DetectorStatistics, InterferometerError> {
    if s.mode_count() != 2 {
        return Err(InterferometerError::NotTwoMode(s.mode_count()));
    }
    let d1 = s.photon_distribution(0)?;
    let d2 = s.photon_distribution(1)?;
    Ok(DetectorStatistics {
        mean_d1: mean(&d1),
        mean_d2: mean(&d2),
        joint: s.joint_distribution(0, 1)?,
        d1,
        d2,
    })
}

/// `e^{-mu} mu^n / n!`.
pub fn poisson_pmf(n: usize, mu: f64) -> f64 {
    if mu == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let ln_fact: f64 = (2..=n).map(|k| (k as f64).ln()).sum();
    (n as f64 * mu.ln() - mu - ln_fact).exp()
}

/// Detector marginals predicted by treating the two interferometer branches as
/// an equal-weight mixture of coherent states: D1 sees means `mu_1` or `mu_3`,
/// D2 sees `mu_2` or `mu_4`. Cross terms between branches are ignored.
pub fn branch_model_marginals(
    response: &InterferometerResponse,
    len: usize,
) -> (Vec<f64>, Vec<f64>) {
    let mix = |a: f64, b: f64| -> Vec<f64> {
        (0..len)
            .map(|n| 0.5 * poisson_pmf(n, a) + 0.5 * poisson_pmf(n, b))
            .collect()
    };
    (
        mix(response.mu[0], response.mu[2]),
        mix(response.mu[1], response.mu[3]),
    )
}

/// Total-variation distance `1/2 sum |p - q|` over the common support.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    let n = p.len().max(q.len());
    0.5 * (0..n)
        .map(|i| (p.get(i).copied().unwrap_or(0.0) - q.get(i).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
}

/// Pearson chi-square statistic with adjacent bins merged until each expected
/// count reaches `min_expected`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
}

pub fn chi_square(observed: &[u64], probabilities: &[f64], min_expected: f64) -> ChiSquare {
    let total: u64 = observed.iter().sum();
    let norm: f64 = probabilities.iter().sum();
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp) = (0.0, 0.0);
    for (o, p) in observed.iter().zip(probabilities) {
        obs += *o as f64;
        exp += p / norm * total as f64;
        if exp >= min_expected {
            bins.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
        }
    }
    if exp > 0.0 || obs > 0.0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += obs;
                last.1 += exp;
            }
            None => bins.push((obs, exp)),
        }
    }
    ChiSquare {
        statistic: bins.iter().map(|(o, e)| (o - e).powi(2) / e).sum(),
        degrees_of_freedom: bins.len().saturating_sub(1),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionalRunConfig {
    pub shots: u64,
    pub seed: u64,
    pub alpha: CoherentAmplitude,
    pub m: u32,
    pub theta: f64,
    pub n_max: usize,
}

/// Monte Carlo detector record, plus the exact numbers it should converge to.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionedReport {
    pub config: ConditionalRunConfig,
    pub response: InterferometerResponse,
    pub exact: DetectorStatistics,
    /// Exact probability that D2 counts one photon.
    pub exact_d2_one: f64,
    /// Leading-order estimate `P(1, mu_1) / 4` for the same event.
    pub leading_order_d2_one: f64,
    pub d1_counts: Vec<u64>,
    pub d2_counts: Vec<u64>,
    pub d2_one_count: u64,
    pub d2_one_frequency: f64,
    /// Binomial standard error of `d2_one_frequency` at the exact probability.
    pub d2_one_sigma: f64,
    /// D1 histogram restricted to shots where D2 counted one photon.
    pub conditioned_d1_counts: Vec<u64>,
    /// Exact `P(D1 = n | D2 = 1)`.
    pub exact_conditioned_d1: Vec<f64>,
}

/// Feeds the cavity output and a reference `|alpha>` into the interferometer,
/// then samples joint detector counts `shots` times. Deterministic in `seed`.
pub fn conditional_run(
    config: ConditionalRunConfig,
) -> Result<ConditionedReport, InterferometerError> {
    if config.shots == 0 {
        return Err(InterferometerError::NoShots);
    }
    let cutoff = FockCutoff::new(config.n_max)?;
    let cavity = cavity_ns_output(config.alpha, config.m, cutoff)?;
    let out = mach_zehnder(
        &cavity.state,
        config.alpha,
        config.theta,
        SecondSplitter::Forward,
    )?;
    let exact = detector_statistics(&out)?;
    let d = cutoff.dim();

    let weights: Vec<f64> = exact.joint.iter().flatten().copied().collect();
    let sampler =
        WeightedIndex::new(&weights).map_err(|_| InterferometerError::ZeroDistribution)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut d1_counts = vec![0u64; d];
    let mut d2_counts = vec![0u64; d];
    let mut conditioned_d1_counts = vec![0u64; d];
    for _ in 0..config.shots {
        let k = sampler.sample(&mut rng);
        let (n1, n2) = (k / d, k % d);
        d1_counts[n1] += 1;
        d2_counts[n2] += 1;
        if n2 == 1 {
            conditioned_d1_counts[n1] += 1;
        }
    }

    let total: f64 = weights.iter().sum();
    let exact_d2_one = exact.d2[1] / total;
    let column: Vec<f64> = exact.joint.iter().map(|row| row[1]).collect();
    let column_sum: f64 = column.iter().sum();
    let exact_conditioned_d1 = column.iter().map(|p| p / column_sum).collect();
    let response = InterferometerResponse::new(config.alpha, config.theta);
    let d2_one_count = d2_counts[1];
    Ok(ConditionedReport {
        leading_order_d2_one: poisson_pmf(1, response.mu[0]) / 4.0,
        response,
        exact,
        exact_d2_one,
        d2_one_frequency: d2_one_count as f64 / config.shots as f64,
        d2_one_sigma: (exact_d2_one * (1.0 - exact_d2_one) / config.shots as f64).sqrt(),
        d2_one_count,
        d1_counts,
        d2_counts,
        conditioned_d1_counts,
        exact_conditioned_d1,
        config,
    })
}
