//! Resonant Jaynes-Cummings evolution in the interaction picture and the
//! nonlinear sign-shift (NS) gate built from it.
//!
//! The coupling `C2 = kappa sigma_+ a + conj(kappa) sigma_- a^dagger` conserves
//! the excitation number `N = n + [atom excited]`, so `U(t) = exp(-i C2 t)`
//! splits into 2x2 blocks on `{|g,N>, |e,N-1>}`. Each block is written down in
//! closed form:
//!
//! ```text
//! |g,N>   -> cos(s) |g,N>   - i e^{+i phi} sin(s) |e,N-1>
//! |e,N-1> -> cos(s) |e,N-1> - i e^{-i phi} sin(s) |g,N>,     s = |kappa| sqrt(N) t
//! ```
//!
//! `|g,0>` is a fixed point. `|e,n_max>` has its partner `|g,n_max+1>` cut
//! away by the truncation and is left untouched, which is what the truncated
//! generator exponentiates to.
//!
//! Choosing `t = (2m+1) pi / (sqrt(2) |kappa|)` gives `cos(sqrt(2)|kappa|t) = -1`,
//! so `|g,2>` picks up a sign while `|g,1>` splits into `d(m)|g,1> + c(m)|e,0>`.
//! Keeping only runs where the atom is found in `|g>` yields the NS gate up to
//! the `d(m)` damping of the one-photon amplitude.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::fock::{FockCutoff, FockError, MultiModeState, NORM_TOLERANCE};
use crate::linear_optics::{phase_shifter, OpticsError, PhaseShifter};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum JcmError {
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error("coupling magnitude must be positive and finite, got {0}")]
    InvalidCoupling(f64),
    #[error("interaction time must be non-negative and finite, got {0}")]
    InvalidTime(f64),
    #[error("expected a single-mode field state, got {0} modes")]
    NotSingleMode(usize),
    #[error("input state is not normalized (squared norm {0})")]
    NotNormalized(f64),
    #[error("post-selection on the ground state has zero probability")]
    ZeroSuccessProbability,
}

impl From<OpticsError> for JcmError {
    fn from(e: OpticsError) -> Self {
        match e {
            OpticsError::Fock(f) => JcmError::Fock(f),
            other => JcmError::Fock(FockError::DimensionMismatch(other.to_string())),
        }
    }
}

/// Two-level atom amplitude pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AtomState {
    pub g: Complex64,
    pub e: Complex64,
}

impl AtomState {
    pub fn ground() -> Self {
        AtomState {
            g: Complex64::new(1.0, 0.0),
            e: Complex64::new(0.0, 0.0),
        }
    }

    pub fn excited() -> Self {
        AtomState {
            g: Complex64::new(0.0, 0.0),
            e: Complex64::new(1.0, 0.0),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.g.norm_sqr() + self.e.norm_sqr()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtomLevel {
    Ground,
    Excited,
}

/// Atom ⊗ single field mode, stored as the two field vectors conditioned on
/// the atom level.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomFieldState {
    cutoff: FockCutoff,
    ground: Vec<Complex64>,
    excited: Vec<Complex64>,
}

impl AtomFieldState {
    pub fn product(atom: AtomState, field: &MultiModeState) -> Result<Self, JcmError> {
        if field.mode_count() != 1 {
            return Err(JcmError::NotSingleMode(field.mode_count()));
        }
        Ok(AtomFieldState {
            cutoff: field.cutoff(),
            ground: field.amplitudes().iter().map(|c| c * atom.g).collect(),
            excited: field.amplitudes().iter().map(|c| c * atom.e).collect(),
        })
    }

    pub fn from_components(
        cutoff: FockCutoff,
        ground: Vec<Complex64>,
        excited: Vec<Complex64>,
    ) -> Result<Self, JcmError> {
        if ground.len() != cutoff.dim() || excited.len() != cutoff.dim() {
            return Err(FockError::DimensionMismatch(format!(
                "atom-field components need {} amplitudes each",
                cutoff.dim()
            ))
            .into());
        }
        Ok(AtomFieldState {
            cutoff,
            ground,
            excited,
        })
    }

    pub fn cutoff(&self) -> FockCutoff {
        self.cutoff
    }

    pub fn ground(&self) -> &[Complex64] {
        &self.ground
    }

    pub fn excited(&self) -> &[Complex64] {
        &self.excited
    }

    pub fn norm_sqr(&self) -> f64 {
        self.ground
            .iter()
            .chain(&self.excited)
            .map(|c| c.norm_sqr())
            .sum()
    }

    /// Unnormalized field state left after finding the atom in `level`.
    pub fn project(&self, level: AtomLevel) -> MultiModeState {
        let amps = match level {
            AtomLevel::Ground => self.ground.clone(),
            AtomLevel::Excited => self.excited.clone(),
        };
        MultiModeState::from_amplitudes(1, self.cutoff, amps).expect("dimension fixed by cutoff")
    }

    /// Probability carried by each excitation-number sector, indexed by N.
    /// Entry `n_max + 1` holds the lone `|e,n_max>` state.
    pub fn excitation_weights(&self) -> Vec<f64> {
        let d = self.cutoff.dim();
        let mut w = vec![0.0; d + 1];
        for n in 0..d {
            w[n] += self.ground[n].norm_sqr();
            w[n + 1] += self.excited[n].norm_sqr();
        }
        w
    }
}

/// Coupling and interaction time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JcmParams {
    /// `|kappa|` in s^-1.
    pub kappa_abs: f64,
    /// `arg(kappa)` in radians; zero for a real coupling.
    pub kappa_phase: f64,
    /// Interaction time in seconds.
    pub time: f64,
}

impl JcmParams {
    pub fn new(kappa_abs: f64, kappa_phase: f64, time: f64) -> Result<Self, JcmError> {
        if !(kappa_abs > 0.0 && kappa_abs.is_finite()) {
            return Err(JcmError::InvalidCoupling(kappa_abs));
        }
        if !(time >= 0.0 && time.is_finite()) {
            return Err(JcmError::InvalidTime(time));
        }
        Ok(JcmParams {
            kappa_abs,
            kappa_phase,
            time,
        })
    }

    /// Real coupling held for the NS interaction time of order `m`.
    pub fn ns(kappa_abs: f64, m: u32) -> Result<Self, JcmError> {
        Self::new(kappa_abs, 0.0, 0.0).map(|p| JcmParams {
            time: ns_gate_time(kappa_abs, m),
            ..p
        })
    }

    pub fn kappa(&self) -> Complex64 {
        Complex64::from_polar(self.kappa_abs, self.kappa_phase)
    }

    /// Block entries for excitation number `n`: the diagonal `cos s`, the
    /// `|g,n> -> |e,n-1>` amplitude and the `|e,n-1> -> |g,n>` amplitude.
    fn block(&self, n: usize) -> (f64, Complex64, Complex64) {
        let s = self.kappa_abs * (n as f64).sqrt() * self.time;
        let minus_i = Complex64::new(0.0, -1.0);
        (
            s.cos(),
            minus_i * Complex64::from_polar(s.sin(), self.kappa_phase),
            minus_i * Complex64::from_polar(s.sin(), -self.kappa_phase),
        )
    }
}

/// Applies `exp(-i C2 t)` block by block.
pub fn jcm_propagate(state: &AtomFieldState, params: &JcmParams) -> AtomFieldState {
    let d = state.cutoff.dim();
    let mut ground = state.ground.clone();
    let mut excited = state.excited.clone();
    for n in 1..d {
        let (cos, g_to_e, e_to_g) = params.block(n);
        let g = state.ground[n];
        let e = state.excited[n - 1];
        ground[n] = g * cos + e * e_to_g;
        excited[n - 1] = g * g_to_e + e * cos;
    }
    AtomFieldState {
        cutoff: state.cutoff,
        ground,
        excited,
    }
}

/// Interaction time `(2m+1) pi / (sqrt(2) |kappa|)` that flips the sign of `|g,2>`.
pub fn ns_gate_time(kappa_abs: f64, m: u32) -> f64 {
    (2 * m + 1) as f64 * PI / (SQRT_2 * kappa_abs)
}

/// `(c(m), d(m))` for a real positive coupling: the amplitudes that `|g,1>`
/// sends to `|e,0>` and `|g,1>` at the NS interaction time.
pub fn cm_dm(m: u32) -> (Complex64, f64) {
    let x = (2 * m + 1) as f64 * PI / SQRT_2;
    (Complex64::new(0.0, -x.sin()), x.cos())
}

/// Whether `d(m) < 0`, in which case a `(-1)^n` phase shifter is needed to
/// restore the sign of the one-photon amplitude.
pub fn needs_compensating_phase(m: u32) -> bool {
    cm_dm(m).1 < 0.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Table1Row {
    pub m: u32,
    /// `|c(m)|^2`, the chance that a one-photon component is lost to the atom.
    pub c_squared: f64,
    pub d: f64,
}

/// Error probability and one-photon coefficient for `m = 0..=4`.
pub fn table1() -> Vec<Table1Row> {
    (0..=4)
        .map(|m| {
            let (c, d) = cm_dm(m);
            Table1Row {
                m,
                c_squared: c.norm_sqr(),
                d,
            }
        })
        .collect()
}

/// Outcome of one heralded NS gate run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NsGateResult {
    /// Field state after finding the atom in `|g>`, renormalized.
    pub output: MultiModeState,
    /// Probability of finding the atom in `|g>`.
    pub success_probability: f64,
    /// Probability of finding the atom in `|e>` (gate failure).
    pub failure_probability: f64,
    pub m: u32,
    #[serde(serialize_with = "crate::ser::complex")]
    pub c_m: Complex64,
    pub d_m: f64,
    pub interaction_time: f64,
    pub compensating_phase: bool,
}

/// NS gate at unit coupling. The output does not depend on `|kappa|`, only on
/// the product `|kappa| t`.
pub fn ns_gate(
    input: &MultiModeState,
    m: u32,
    apply_compensating_phase: bool,
) -> Result<NsGateResult, JcmError> {
    ns_gate_with(input, &JcmParams::ns(1.0, m)?, m, apply_compensating_phase)
}

/// NS gate with an explicit coupling. `params.time` is overwritten with the
/// NS interaction time of order `m`.
pub fn ns_gate_with(
    input: &MultiModeState,
    params: &JcmParams,
    m: u32,
    apply_compensating_phase: bool,
) -> Result<NsGateResult, JcmError> {
    if input.mode_count() != 1 {
        return Err(JcmError::NotSingleMode(input.mode_count()));
    }
    let norm_sqr = input.norm_sqr();
    if (norm_sqr - 1.0).abs() > NORM_TOLERANCE {
        return Err(JcmError::NotNormalized(norm_sqr));
    }
    let params = JcmParams {
        time: ns_gate_time(params.kappa_abs, m),
        ..*params
    };
    let evolved = jcm_propagate(
        &AtomFieldState::product(AtomState::ground(), input)?,
        &params,
    );
    let kept = evolved.project(AtomLevel::Ground);
    let success_probability = kept.norm_sqr();
    let failure_probability = evolved.project(AtomLevel::Excited).norm_sqr();
    if success_probability == 0.0 {
        return Err(JcmError::ZeroSuccessProbability);
    }
    let mut output = kept.renormalize()?;
    if apply_compensating_phase {
        output = phase_shifter(&output, &PhaseShifter { mode: 0, theta: PI })?;
    }
    let (c, d) = cm_dm(m);
    Ok(NsGateResult {
        output,
        success_probability,
        failure_probability,
        m,
        c_m: c * Complex64::from_polar(1.0, params.kappa_phase),
        d_m: d,
        interaction_time: params.time,
        compensating_phase: apply_compensating_phase,
    })
}

/// The ideal NS map: negates the `|2>` amplitude of `mode`, leaves every
/// other photon number alone.
pub fn ns_gate_ideal_on_mode(
    state: &MultiModeState,
    mode: usize,
) -> Result<MultiModeState, FockError> {
    state.check_mode(mode)?;
    let mut out = state.clone();
    let flips: Vec<usize> = (0..out.len())
        .filter(|&i| state.occupation(i, mode) == 2)
        .collect();
    let amps = out.amplitudes_mut();
    for i in flips {
        amps[i] = -amps[i];
    }
    Ok(out)
}

/// Single-mode ideal NS gate.
pub fn ns_gate_ideal(input: &MultiModeState) -> Result<MultiModeState, JcmError> {
    if input.mode_count() != 1 {
        return Err(JcmError::NotSingleMode(input.mode_count()));
    }
    Ok(ns_gate_ideal_on_mode(input, 0)?)
}

/// Both measurement branches of an atom prepared in `|g>` interacting with one
/// mode of a multimode field. Neither branch is renormalized.
#[derive(Debug, Clone, PartialEq)]
pub struct JcmBranches {
    pub ground: MultiModeState,
    pub excited: MultiModeState,
}

/// Runs the atom-field interaction on `mode` with the other modes as
/// spectators.
pub fn jcm_on_mode(
    state: &MultiModeState,
    mode: usize,
    params: &JcmParams,
) -> Result<JcmBranches, JcmError> {
    state.check_mode(mode)?;
    let cutoff = state.cutoff();
    let d = cutoff.dim();
    let stride = state.stride(mode);
    let mut ground = MultiModeState::zeros(state.mode_count(), cutoff)?;
    let mut excited = MultiModeState::zeros(state.mode_count(), cutoff)?;
    // each base index has `mode` empty; the fiber over it is one field vector
    for base in (0..state.len()).filter(|&i| state.occupation(i, mode) == 0) {
        let field: Vec<Complex64> = (0..d)
            .map(|n| state.amplitudes()[base + n * stride])
            .collect();
        if field.iter().all(|c| c.norm_sqr() == 0.0) {
            continue;
        }
        let joint = AtomFieldState::from_components(cutoff, field, vec![Complex64::default(); d])?;
        let evolved = jcm_propagate(&joint, params);
        for n in 0..d {
            ground.amplitudes_mut()[base + n * stride] = evolved.ground[n];
            excited.amplitudes_mut()[base + n * stride] = evolved.excited[n];
        }
    }
    Ok(JcmBranches { ground, excited })
}
