//! Passive optics on Fock states, dual-rail qubits, and the conditional
//! sign-flip (CSF) network.
//!
//! The 50:50 beam splitter uses the symmetric real convention
//!
//! ```text
//! a_i^dagger -> (a_i^dagger + a_j^dagger) / sqrt(2)
//! a_j^dagger -> (a_i^dagger - a_j^dagger) / sqrt(2)
//! ```
//!
//! which is real orthogonal on each fixed-photon-number sector, so its inverse
//! is its transpose.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::fock::{CoherentAmplitude, FockCutoff, FockError, MultiModeState};
use crate::jcm::{jcm_on_mode, ns_gate_ideal_on_mode, JcmError, JcmParams};

/// Leakage tolerated by [`decode_dual_rail`] unless the caller says otherwise.
pub const DEFAULT_LEAKAGE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OpticsError {
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error("beam splitter needs two distinct modes, got {0} twice")]
    SameMode(usize),
    #[error("state leaves the dual-rail code space (leakage {leakage:.3e})")]
    Decode { leakage: f64 },
    #[error("dual-rail qubits must partition the modes: {0}")]
    BadRegister(String),
    #[error("nonlinear sign gate failed: {0}")]
    Ns(String),
}

impl From<JcmError> for OpticsError {
    fn from(e: JcmError) -> Self {
        match e {
            JcmError::Fock(f) => OpticsError::Fock(f),
            other => OpticsError::Ns(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BeamSplitter {
    pub mode_i: usize,
    pub mode_j: usize,
}

impl BeamSplitter {
    pub fn new(mode_i: usize, mode_j: usize) -> Result<Self, OpticsError> {
        if mode_i == mode_j {
            return Err(OpticsError::SameMode(mode_i));
        }
        Ok(BeamSplitter { mode_i, mode_j })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseShifter {
    pub mode: usize,
    pub theta: f64,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Amplitude of `|p, N-p>` produced from `|n, N-n>` on the (i, j) pair.
/// Expands `[(a_i+a_j)/sqrt2]^n [(a_i-a_j)/sqrt2]^(N-n) / sqrt(n!(N-n)!)`.
fn splitter_element(total: usize, n: usize, p: usize) -> f64 {
    let m = total - n;
    let mut sum = 0.0;
    // k photons from the first factor land on mode i, p - k from the second
    for k in p.saturating_sub(m)..=n.min(p) {
        let l = p - k;
        let sign = if (m - l).is_multiple_of(2) { 1.0 } else { -1.0 };
        sum += sign * binomial(n, k) * binomial(m, l);
    }
    let log_scale = 0.5
        * (ln_factorial(p) + ln_factorial(total - p) - ln_factorial(n) - ln_factorial(m))
        - 0.5 * total as f64 * std::f64::consts::LN_2;
    sum * log_scale.exp()
}

/// Per-sector matrices `B_N[p][n]` for `N = 0..=2 n_max`.
fn splitter_sectors(n_max: usize) -> Vec<Vec<Vec<f64>>> {
    (0..=2 * n_max)
        .map(|total| {
            (0..=total)
                .map(|p| (0..=total).map(|n| splitter_element(total, n, p)).collect())
                .collect()
        })
        .collect()
}

/// Applies the beam splitter (or its adjoint when `inverse` is set).
///
/// Components whose two-mode photon count exceeds `n_max` can scatter beyond
/// the cutoff; that amplitude is dropped and shows up as a norm deficit.
pub fn beam_splitter(
    s: &MultiModeState,
    splitter: &BeamSplitter,
    inverse: bool,
) -> Result<MultiModeState, OpticsError> {
    s.check_mode(splitter.mode_i)?;
    s.check_mode(splitter.mode_j)?;
    if splitter.mode_i == splitter.mode_j {
        return Err(OpticsError::SameMode(splitter.mode_i));
    }
    let n_max = s.cutoff().n_max();
    let sectors = splitter_sectors(n_max);
    let (si, sj) = (s.stride(splitter.mode_i), s.stride(splitter.mode_j));
    let mut out = MultiModeState::zeros(s.mode_count(), s.cutoff())?;
    let out_amps = out.amplitudes_mut();
    for (idx, amp) in s.amplitudes().iter().enumerate() {
        if amp.norm_sqr() == 0.0 {
            continue;
        }
        let n = s.occupation(idx, splitter.mode_i);
        let m = s.occupation(idx, splitter.mode_j);
        let total = n + m;
        let base = idx - n * si - m * sj;
        let sector = &sectors[total];
        for p in total.saturating_sub(n_max)..=total.min(n_max) {
            let coeff = if inverse { sector[n][p] } else { sector[p][n] };
            if coeff != 0.0 {
                out_amps[base + p * si + (total - p) * sj] += amp * coeff;
            }
        }
    }
    Ok(out)
}

/// Multiplies each amplitude by `e^{i n theta}`, `n` the photon number on the
/// target mode. `theta = pi` gives the `(-1)^n` compensator.
pub fn phase_shifter(
    s: &MultiModeState,
    shifter: &PhaseShifter,
) -> Result<MultiModeState, OpticsError> {
    s.check_mode(shifter.mode)?;
    let phases: Vec<Complex64> = (0..s.cutoff().dim())
        .map(|n| Complex64::from_polar(1.0, n as f64 * shifter.theta))
        .collect();
    let mut out = s.clone();
    for (idx, amp) in out.amplitudes_mut().iter_mut().enumerate() {
        *amp *= phases[s.occupation(idx, shifter.mode)];
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoherentBsReport {
    #[serde(serialize_with = "crate::ser::complex")]
    pub expected_a1: Complex64,
    #[serde(serialize_with = "crate::ser::complex")]
    pub expected_a2: Complex64,
    /// `|| BS(|alpha>|beta>) - |(alpha+beta)/sqrt2>|(alpha-beta)/sqrt2> ||`.
    pub deviation: f64,
    /// `1 - ||input||^2` from truncating the two coherent inputs.
    pub truncation_deficit: f64,
}

/// Checks that the Fock-space beam splitter maps `|alpha>|beta>` onto the
/// product of coherent states with amplitudes `(alpha ± beta)/sqrt2`.
pub fn coherent_bs_law_check(
    alpha: CoherentAmplitude,
    beta: CoherentAmplitude,
    cutoff: FockCutoff,
) -> Result<CoherentBsReport, OpticsError> {
    let input =
        MultiModeState::coherent(alpha, cutoff).tensor(&MultiModeState::coherent(beta, cutoff))?;
    let out = beam_splitter(&input, &BeamSplitter::new(0, 1)?, false)?;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let expected_a1 = (alpha.value() + beta.value()) * r;
    let expected_a2 = (alpha.value() - beta.value()) * r;
    let expected = MultiModeState::coherent(expected_a1.into(), cutoff)
        .tensor(&MultiModeState::coherent(expected_a2.into(), cutoff))?;
    Ok(CoherentBsReport {
        expected_a1,
        expected_a2,
        deviation: out.distance(&expected)?,
        truncation_deficit: 1.0 - input.norm_sqr(),
    })
}

/// A logical qubit carried by one photon on a pair of paths:
/// `|0̄> = |0>_first |1>_second`, `|1̄> = |1>_first |0>_second`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DualRailQubit {
    pub mode_pair: (usize, usize),
}

impl DualRailQubit {
    pub fn new(first: usize, second: usize) -> Self {
        DualRailQubit {
            mode_pair: (first, second),
        }
    }
}

/// Two-mode state for a logical basis bit.
pub fn encode_dual_rail(bit: bool, cutoff: FockCutoff) -> MultiModeState {
    let occ = if bit { [1, 0] } else { [0, 1] };
    MultiModeState::number_state(&occ, cutoff).expect("cutoff is at least 2")
}

/// Encodes `amplitudes[k]` on logical basis state `k` of an `n`-qubit register,
/// qubit 0 being the most significant bit. Qubit `q` occupies modes `2q, 2q+1`.
pub fn encode_register(
    amplitudes: &[Complex64],
    cutoff: FockCutoff,
) -> Result<MultiModeState, OpticsError> {
    let n = amplitudes.len().trailing_zeros() as usize;
    if amplitudes.len() != 1 << n || n == 0 {
        return Err(OpticsError::BadRegister(format!(
            "{} amplitudes is not a power of two",
            amplitudes.len()
        )));
    }
    let mut s = MultiModeState::zeros(2 * n, cutoff)?;
    for (k, amp) in amplitudes.iter().enumerate() {
        let occ = logical_occupations(k, n);
        let idx = s.index_of(&occ)?;
        s.amplitudes_mut()[idx] = *amp;
    }
    Ok(s)
}

fn logical_occupations(k: usize, qubits: usize) -> Vec<usize> {
    (0..qubits)
        .flat_map(|q| {
            let bit = (k >> (qubits - 1 - q)) & 1 == 1;
            if bit {
                [1, 0]
            } else {
                [0, 1]
            }
        })
        .collect()
}

/// Logical amplitudes read back from a dual-rail register.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogicalAmplitudes {
    #[serde(serialize_with = "crate::ser::complex_vec")]
    pub amplitudes: Vec<Complex64>,
    /// Probability outside the code space.
    pub leakage: f64,
}

/// Reads the logical amplitudes of `qubits`, which must partition the modes.
pub fn decode_register(
    s: &MultiModeState,
    qubits: &[DualRailQubit],
    tolerance: f64,
) -> Result<LogicalAmplitudes, OpticsError> {
    let mut seen = vec![false; s.mode_count()];
    for q in qubits {
        for m in [q.mode_pair.0, q.mode_pair.1] {
            s.check_mode(m)?;
            if std::mem::replace(&mut seen[m], true) {
                return Err(OpticsError::BadRegister(format!("mode {m} used twice")));
            }
        }
    }
    if seen.iter().any(|&x| !x) {
        return Err(OpticsError::BadRegister(
            "some modes belong to no qubit".into(),
        ));
    }
    let mut amplitudes = Vec::with_capacity(1 << qubits.len());
    for k in 0..1usize << qubits.len() {
        let mut occ = vec![0; s.mode_count()];
        for (q, qubit) in qubits.iter().enumerate() {
            let bit = (k >> (qubits.len() - 1 - q)) & 1 == 1;
            occ[if bit {
                qubit.mode_pair.0
            } else {
                qubit.mode_pair.1
            }] = 1;
        }
        amplitudes.push(s.amplitude(&occ));
    }
    let inside: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
    let leakage = (s.norm_sqr() - inside).max(0.0);
    if leakage > tolerance {
        return Err(OpticsError::Decode { leakage });
    }
    Ok(LogicalAmplitudes {
        amplitudes,
        leakage,
    })
}

/// Single-qubit decode of a two-mode state: `(amp of |0̄>, amp of |1̄>, leakage)`.
pub fn decode_dual_rail(
    s: &MultiModeState,
    qubit: DualRailQubit,
    tolerance: f64,
) -> Result<(Complex64, Complex64, f64), OpticsError> {
    let r = decode_register(s, &[qubit], tolerance)?;
    Ok((r.amplitudes[0], r.amplitudes[1], r.leakage))
}

/// How the two NS gates inside the CSF network are realized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NsMode {
    /// The exact map `|2> -> -|2>`.
    Ideal,
    /// One atom per NS gate, held for the order-`m` interaction time and
    /// post-selected in `|g>`; the `(-1)^n` shifter follows when `d(m) < 0`.
    Jcm { m: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsfOutput {
    /// Output state; renormalized after post-selection in JCM mode.
    pub state: MultiModeState,
    /// Probability that both atoms are found in `|g>` (1 in ideal mode).
    pub success_probability: f64,
}

/// Mode layout of the CSF network: qubit x on (x1, x2) = (0, 1), qubit y on
/// (y1, y2) = (2, 3).
pub const CSF_QUBITS: [DualRailQubit; 2] = [
    DualRailQubit { mode_pair: (0, 1) },
    DualRailQubit { mode_pair: (2, 3) },
];

fn apply_ns(
    s: &MultiModeState,
    mode: usize,
    ns: NsMode,
) -> Result<(MultiModeState, f64), OpticsError> {
    match ns {
        NsMode::Ideal => Ok((ns_gate_ideal_on_mode(s, mode)?, 1.0)),
        NsMode::Jcm { m } => {
            let branches = jcm_on_mode(s, mode, &JcmParams::ns(1.0, m)?)?;
            let kept = branches.ground;
            let p = kept.norm_sqr() / s.norm_sqr();
            let kept = if crate::jcm::needs_compensating_phase(m) {
                phase_shifter(&kept, &PhaseShifter { mode, theta: PI })?
            } else {
                kept
            };
            Ok((kept, p))
        }
    }
}

/// Unnormalized CSF output together with the heralding probability. In JCM
/// mode the returned state carries the success amplitude, so its squared norm
/// equals the success probability for a normalized input.
pub fn csf_gate_unnormalized(s: &MultiModeState, ns: NsMode) -> Result<CsfOutput, OpticsError> {
    if s.mode_count() != 4 {
        return Err(OpticsError::BadRegister(format!(
            "CSF network acts on 4 modes, got {}",
            s.mode_count()
        )));
    }
    let bs = BeamSplitter::new(0, 2)?;
    let mixed = beam_splitter(s, &bs, false)?;
    let (after_x, p1) = apply_ns(&mixed, 0, ns)?;
    let (after_y, p2) = apply_ns(&after_x, 2, ns)?;
    let state = beam_splitter(&after_y, &bs, true)?;
    Ok(CsfOutput {
        state,
        success_probability: p1 * p2,
    })
}

/// Conditional sign flip on dual-rail qubits x = (x1, x2), y = (y1, y2) laid
/// out as modes 0..4: BS on (x1, y1), NS on x1 and y1, then the inverse BS.
pub fn csf_gate(s: &MultiModeState, ns: NsMode) -> Result<CsfOutput, OpticsError> {
    let raw = csf_gate_unnormalized(s, ns)?;
    let state = match ns {
        NsMode::Ideal => raw.state,
        NsMode::Jcm { .. } => raw.state.renormalize()?,
    };
    Ok(CsfOutput {
        state,
        success_probability: raw.success_probability,
    })
}

/// One row of the CSF truth table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CsfTruthRow {
    /// Logical input, e.g. `"11"` for `|1̄>_x|1̄>_y`.
    pub input: String,
    /// Logical output amplitudes after post-selection and renormalization.
    #[serde(serialize_with = "crate::ser::complex_vec")]
    pub output: Vec<Complex64>,
    /// Phase of the output on the input basis state, radians.
    pub phase: f64,
    pub success_probability: f64,
    /// `|<ideal|out>|^2` with the renormalized output.
    pub fidelity: f64,
    /// `|<ideal|out>|^2` with the unnormalized heralded output: the chance
    /// that both atoms herald success and the right state comes out.
    pub heralded_fidelity: f64,
    pub leakage: f64,
}

/// Runs every logical basis state through the CSF network.
pub fn csf_truth_table(ns: NsMode, cutoff: FockCutoff) -> Result<Vec<CsfTruthRow>, OpticsError> {
    (0..4usize)
        .map(|k| {
            let mut amps = vec![Complex64::default(); 4];
            amps[k] = Complex64::new(1.0, 0.0);
            let input = encode_register(&amps, cutoff)?;
            let raw = csf_gate_unnormalized(&input, ns)?;
            let ideal_sign = if k == 3 { -1.0 } else { 1.0 };
            let heralded = raw.state.amplitudes().to_vec();
            let state = raw.state.renormalize()?;
            let decoded = decode_register(&state, &CSF_QUBITS, f64::INFINITY)?;
            let heralded_amp = MultiModeState::from_amplitudes(4, cutoff, heralded)?
                .amplitude(&logical_occupations(k, 2));
            Ok(CsfTruthRow {
                input: format!("{:02b}", k),
                phase: decoded.amplitudes[k].arg(),
                fidelity: (decoded.amplitudes[k] * ideal_sign).norm_sqr(),
                heralded_fidelity: (heralded_amp * ideal_sign).norm_sqr(),
                output: decoded.amplitudes,
                success_probability: raw.success_probability,
                leakage: decoded.leakage,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jcm::cm_dm;

    fn cut(n: usize) -> FockCutoff {
        FockCutoff::new(n).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn bs01() -> BeamSplitter {
        BeamSplitter::new(0, 1).unwrap()
    }

    #[test]
    fn two_photon_bunching() {
        let s = MultiModeState::number_state(&[1, 1], cut(3)).unwrap();
        let out = beam_splitter(&s, &bs01(), false).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((out.amplitude(&[2, 0]) - c(h, 0.0)).norm() < 1e-15);
        assert!((out.amplitude(&[0, 2]) - c(-h, 0.0)).norm() < 1e-15);
        assert!(out.amplitude(&[1, 1]).norm() < 1e-15);
    }

    #[test]
    fn vacuum_passes_unchanged() {
        let v = MultiModeState::vacuum(2, cut(2)).unwrap();
        assert_eq!(beam_splitter(&v, &bs01(), false).unwrap(), v);
    }

    #[test]
    fn single_photon_convention() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let a1 = beam_splitter(
            &MultiModeState::number_state(&[1, 0], cut(2)).unwrap(),
            &bs01(),
            false,
        )
        .unwrap();
        assert!((a1.amplitude(&[1, 0]) - c(h, 0.0)).norm() < 1e-15);
        assert!((a1.amplitude(&[0, 1]) - c(h, 0.0)).norm() < 1e-15);
        let a2 = beam_splitter(
            &MultiModeState::number_state(&[0, 1], cut(2)).unwrap(),
            &bs01(),
            false,
        )
        .unwrap();
        assert!((a2.amplitude(&[1, 0]) - c(h, 0.0)).norm() < 1e-15);
        assert!((a2.amplitude(&[0, 1]) - c(-h, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn splitter_errors() {
        assert_eq!(BeamSplitter::new(1, 1), Err(OpticsError::SameMode(1)));
        let s = MultiModeState::vacuum(2, cut(2)).unwrap();
        let bad = BeamSplitter {
            mode_i: 0,
            mode_j: 5,
        };
        assert!(matches!(
            beam_splitter(&s, &bad, false),
            Err(OpticsError::Fock(FockError::ModeIndexOutOfRange {
                mode: 5,
                ..
            }))
        ));
        assert!(phase_shifter(
            &s,
            &PhaseShifter {
                mode: 2,
                theta: 1.0
            }
        )
        .is_err());
    }

    #[test]
    fn phase_shifts() {
        let s = MultiModeState::coherent(c(0.3, 0.4).into(), cut(12));
        assert_eq!(
            phase_shifter(
                &s,
                &PhaseShifter {
                    mode: 0,
                    theta: 0.0
                }
            )
            .unwrap(),
            s
        );
        let pi = PhaseShifter { mode: 0, theta: PI };
        let two = MultiModeState::number_state(&[2], cut(3)).unwrap();
        assert!(phase_shifter(&two, &pi).unwrap().distance(&two).unwrap() < 1e-15);
        let one = MultiModeState::number_state(&[1], cut(3)).unwrap();
        assert!((phase_shifter(&one, &pi).unwrap().amplitude(&[1]) + 1.0).norm() < 1e-15);
        let theta = 0.9;
        let rotated = phase_shifter(&s, &PhaseShifter { mode: 0, theta }).unwrap();
        let want = MultiModeState::coherent(
            (c(0.3, 0.4) * Complex64::from_polar(1.0, theta)).into(),
            cut(12),
        );
        assert!(rotated.distance(&want).unwrap() < 1e-14);
    }

    #[test]
    fn coherent_law() {
        let r = coherent_bs_law_check(0.7.into(), 0.7.into(), cut(24)).unwrap();
        assert!(r.expected_a2.norm() < 1e-15);
        assert!(r.deviation < 1e-10);
        // at the default cutoff the loss is set by the total-photon tail past 12
        let r = coherent_bs_law_check(0.7.into(), 0.7.into(), cut(12)).unwrap();
        assert!(r.deviation > 1e-9 && r.deviation < 1e-6);
        let r = coherent_bs_law_check(0.5.into(), 0.0.into(), cut(24)).unwrap();
        assert!(
            (r.expected_a1.re - 0.3536).abs() < 1e-4 && (r.expected_a2.re - 0.3536).abs() < 1e-4
        );
        assert!(r.deviation < 1e-10);
        let r = coherent_bs_law_check(0.5.into(), c(0.0, 0.5).into(), cut(24)).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((r.expected_a1 - c(0.5 * h, 0.5 * h)).norm() < 1e-15);
        assert!((r.expected_a2 - c(0.5 * h, -0.5 * h)).norm() < 1e-15);
        assert!(r.deviation < 1e-10);
    }

    #[test]
    fn dual_rail_round_trip() {
        let q = DualRailQubit::new(0, 1);
        let zero = encode_dual_rail(false, cut(2));
        assert_eq!(zero, MultiModeState::number_state(&[0, 1], cut(2)).unwrap());
        let (a0, a1, leak) = decode_dual_rail(
            &encode_dual_rail(true, cut(2)),
            q,
            DEFAULT_LEAKAGE_TOLERANCE,
        )
        .unwrap();
        assert_eq!((a0, a1, leak), (c(0.0, 0.0), c(1.0, 0.0), 0.0));
        let bunched = MultiModeState::number_state(&[2, 0], cut(2)).unwrap();
        match decode_dual_rail(&bunched, q, DEFAULT_LEAKAGE_TOLERANCE) {
            Err(OpticsError::Decode { leakage }) => assert_eq!(leakage, 1.0),
            other => panic!("expected decode error, got {other:?}"),
        }
    }

    #[test]
    fn register_must_partition_modes() {
        let s = MultiModeState::vacuum(4, cut(2)).unwrap();
        let overlapping = [DualRailQubit::new(0, 1), DualRailQubit::new(1, 2)];
        assert!(matches!(
            decode_register(&s, &overlapping, 1.0),
            Err(OpticsError::BadRegister(_))
        ));
        assert!(matches!(
            decode_register(&s, &[DualRailQubit::new(0, 1)], 1.0),
            Err(OpticsError::BadRegister(_))
        ));
        assert!(encode_register(&[c(1.0, 0.0); 3], cut(2)).is_err());
    }

    #[test]
    fn csf_ideal_basis_states() {
        let cutoff = cut(2);
        let eleven = encode_register(
            &[c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
            cutoff,
        )
        .unwrap();
        let out = csf_gate(&eleven, NsMode::Ideal).unwrap();
        assert!(out.state.distance(&eleven.scaled(c(-1.0, 0.0))).unwrap() < 1e-12);
        assert_eq!(out.success_probability, 1.0);
        let one = encode_register(
            &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
            cutoff,
        )
        .unwrap();
        let out = csf_gate(&one, NsMode::Ideal).unwrap();
        assert!(out.state.distance(&one).unwrap() < 1e-12);
    }

    #[test]
    fn csf_jcm_single_photon_rows_are_damped_by_d() {
        let rows = csf_truth_table(NsMode::Jcm { m: 3 }, cut(2)).unwrap();
        let d2 = cm_dm(3).1.powi(2);
        assert!((rows[0].success_probability - 1.0).abs() < 1e-12);
        assert!((rows[1].success_probability - d2).abs() < 1e-12);
        assert!((rows[2].success_probability - d2).abs() < 1e-12);
        assert!((rows[3].success_probability - 1.0).abs() < 1e-12);
        for r in &rows {
            assert!((r.fidelity - 1.0).abs() < 1e-12);
            assert!(r.leakage < 1e-12);
        }
        assert!((rows[3].phase.abs() - PI).abs() < 1e-12);
    }

    #[test]
    fn csf_rejects_wrong_width() {
        let s = MultiModeState::vacuum(2, cut(2)).unwrap();
        assert!(matches!(
            csf_gate(&s, NsMode::Ideal),
            Err(OpticsError::BadRegister(_))
        ));
    }
}
