//! Truncated Fock-space states for a handful of bosonic modes.
//!
//! A [`MultiModeState`] stores one complex amplitude per multi-index
//! `(n_0, ..., n_{k-1})` with every `n_i <= n_max`. Indices are row-major
//! with mode 0 varying slowest, so the flat index of `(n_0, ..., n_{k-1})` is
//! `sum_i n_i * (n_max + 1)^(k - 1 - i)`. Serialized states rely on this
//! ordering.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance used when a state is required to be normalized.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Truncation used when nothing else is requested. Tails beyond twelve
/// photons are below 1e-12 for coherent amplitudes up to one.
pub const DEFAULT_N_MAX: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FockError {
    #[error("cutoff n_max = {0} is too small (need at least 2)")]
    CutoffTooSmall(usize),
    #[error("mode count must be at least 1")]
    NoModes,
    #[error("state space of {modes} modes with n_max = {n_max} is too large")]
    TooLarge { modes: usize, n_max: usize },
    #[error("occupation {occupation} on mode {mode} exceeds cutoff {n_max}")]
    OccupationExceedsCutoff {
        mode: usize,
        occupation: usize,
        n_max: usize,
    },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("cutoff mismatch: {left} vs {right}")]
    CutoffMismatch { left: usize, right: usize },
    #[error("mode index {mode} out of range for a {mode_count}-mode state")]
    ModeIndexOutOfRange { mode: usize, mode_count: usize },
    #[error("cannot renormalize the zero vector")]
    ZeroState,
    #[error("amplitude {0} is not finite")]
    NonFinite(usize),
}

/// Maximum photon number kept per mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct FockCutoff(usize);

impl FockCutoff {
    pub fn new(n_max: usize) -> Result<Self, FockError> {
        if n_max < 2 {
            return Err(FockError::CutoffTooSmall(n_max));
        }
        Ok(FockCutoff(n_max))
    }

    pub fn n_max(self) -> usize {
        self.0
    }

    /// Single-mode dimension, `n_max + 1`.
    pub fn dim(self) -> usize {
        self.0 + 1
    }
}

impl Default for FockCutoff {
    fn default() -> Self {
        FockCutoff(DEFAULT_N_MAX)
    }
}

impl TryFrom<usize> for FockCutoff {
    type Error = FockError;
    fn try_from(n_max: usize) -> Result<Self, FockError> {
        FockCutoff::new(n_max)
    }
}

impl From<FockCutoff> for usize {
    fn from(c: FockCutoff) -> usize {
        c.0
    }
}

/// Complex amplitude of a coherent state, `|alpha>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherentAmplitude(pub Complex64);

impl CoherentAmplitude {
    pub fn new(re: f64, im: f64) -> Self {
        CoherentAmplitude(Complex64::new(re, im))
    }

    pub fn from_polar(r: f64, phase: f64) -> Self {
        CoherentAmplitude(Complex64::from_polar(r, phase))
    }

    pub fn value(self) -> Complex64 {
        self.0
    }

    /// `|alpha|^2`.
    pub fn mean_photon_number(self) -> f64 {
        self.0.norm_sqr()
    }
}

impl From<f64> for CoherentAmplitude {
    fn from(re: f64) -> Self {
        CoherentAmplitude(Complex64::new(re, 0.0))
    }
}

impl From<Complex64> for CoherentAmplitude {
    fn from(c: Complex64) -> Self {
        CoherentAmplitude(c)
    }
}

/// Dense state vector over a truncated multimode Fock basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateRecord", into = "StateRecord")]
pub struct MultiModeState {
    mode_count: usize,
    cutoff: FockCutoff,
    amplitudes: Vec<Complex64>,
}

/// On-disk form: `{"mode_count", "n_max", "amplitudes": [[re, im], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateRecord {
    pub mode_count: usize,
    pub n_max: usize,
    pub amplitudes: Vec<[f64; 2]>,
}

impl From<MultiModeState> for StateRecord {
    fn from(s: MultiModeState) -> Self {
        StateRecord {
            mode_count: s.mode_count,
            n_max: s.cutoff.n_max(),
            amplitudes: s.amplitudes.iter().map(|c| [c.re, c.im]).collect(),
        }
    }
}

impl TryFrom<StateRecord> for MultiModeState {
    type Error = FockError;
    fn try_from(r: StateRecord) -> Result<Self, FockError> {
        let cutoff = FockCutoff::new(r.n_max)?;
        let amps = r
            .amplitudes
            .iter()
            .map(|[re, im]| Complex64::new(*re, *im))
            .collect();
        MultiModeState::from_amplitudes(r.mode_count, cutoff, amps)
    }
}

fn space_size(mode_count: usize, cutoff: FockCutoff) -> Result<usize, FockError> {
    if mode_count == 0 {
        return Err(FockError::NoModes);
    }
    u32::try_from(mode_count)
        .ok()
        .and_then(|k| cutoff.dim().checked_pow(k))
        .filter(|&n| n <= 1 << 28)
        .ok_or(FockError::TooLarge {
            modes: mode_count,
            n_max: cutoff.n_max(),
        })
}

impl MultiModeState {
    /// All modes empty.
    pub fn vacuum(mode_count: usize, cutoff: FockCutoff) -> Result<Self, FockError> {
        let len = space_size(mode_count, cutoff)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); len];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(MultiModeState {
            mode_count,
            cutoff,
            amplitudes,
        })
    }

    /// The zero vector; used as an accumulator.
    pub fn zeros(mode_count: usize, cutoff: FockCutoff) -> Result<Self, FockError> {
        let len = space_size(mode_count, cutoff)?;
        Ok(MultiModeState {
            mode_count,
            cutoff,
            amplitudes: vec![Complex64::new(0.0, 0.0); len],
        })
    }

    /// Product number state `|n_0>|n_1>...`.
    pub fn number_state(occupations: &[usize], cutoff: FockCutoff) -> Result<Self, FockError> {
        let mut s = Self::zeros(occupations.len(), cutoff)?;
        let idx = s.index_of(occupations)?;
        s.amplitudes[idx] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    /// Single-mode coherent state truncated at `n_max`. The result is not
    /// renormalized; the truncation deficit shows up in [`Self::norm_sqr`].
    pub fn coherent(alpha: CoherentAmplitude, cutoff: FockCutoff) -> Self {
        let a = alpha.value();
        if a.norm_sqr() > cutoff.n_max() as f64 / 4.0 {
            log::warn!(
                "coherent amplitude |alpha|^2 = {:.3} is large for n_max = {}; truncation error grows",
                a.norm_sqr(),
                cutoff.n_max()
            );
        }
        let mut amplitudes = Vec::with_capacity(cutoff.dim());
        let mut term = Complex64::new((-a.norm_sqr() / 2.0).exp(), 0.0);
        amplitudes.push(term);
        for n in 1..=cutoff.n_max() {
            // alpha^n / sqrt(n!) built incrementally
            term = term * a / (n as f64).sqrt();
            amplitudes.push(term);
        }
        MultiModeState {
            mode_count: 1,
            cutoff,
            amplitudes,
        }
    }

    pub fn from_amplitudes(
        mode_count: usize,
        cutoff: FockCutoff,
        amplitudes: Vec<Complex64>,
    ) -> Result<Self, FockError> {
        let len = space_size(mode_count, cutoff)?;
        if amplitudes.len() != len {
            return Err(FockError::DimensionMismatch(format!(
                "expected {} amplitudes for {} modes at n_max = {}, got {}",
                len,
                mode_count,
                cutoff.n_max(),
                amplitudes.len()
            )));
        }
        if let Some(i) = amplitudes
            .iter()
            .position(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(FockError::NonFinite(i));
        }
        Ok(MultiModeState {
            mode_count,
            cutoff,
            amplitudes,
        })
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn cutoff(&self) -> FockCutoff {
        self.cutoff
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// Flat-index stride of `mode`.
    pub fn stride(&self, mode: usize) -> usize {
        self.cutoff.dim().pow((self.mode_count - 1 - mode) as u32)
    }

    pub fn index_of(&self, occupations: &[usize]) -> Result<usize, FockError> {
        if occupations.len() != self.mode_count {
            return Err(FockError::DimensionMismatch(format!(
                "{} occupations given for a {}-mode state",
                occupations.len(),
                self.mode_count
            )));
        }
        let d = self.cutoff.dim();
        let mut idx = 0;
        for (mode, &n) in occupations.iter().enumerate() {
            if n > self.cutoff.n_max() {
                return Err(FockError::OccupationExceedsCutoff {
                    mode,
                    occupation: n,
                    n_max: self.cutoff.n_max(),
                });
            }
            idx = idx * d + n;
        }
        Ok(idx)
    }

    /// Photon number on `mode` for the basis state at flat `index`.
    pub fn occupation(&self, index: usize, mode: usize) -> usize {
        (index / self.stride(mode)) % self.cutoff.dim()
    }

    pub fn occupations(&self, index: usize) -> Vec<usize> {
        (0..self.mode_count)
            .map(|m| self.occupation(index, m))
            .collect()
    }

    /// Total photon number of the basis state at `index`.
    pub fn total_photons(&self, index: usize) -> usize {
        (0..self.mode_count)
            .map(|m| self.occupation(index, m))
            .sum()
    }

    /// Amplitude of a product number state; zero when it lies beyond the cutoff.
    pub fn amplitude(&self, occupations: &[usize]) -> Complex64 {
        self.index_of(occupations)
            .map(|i| self.amplitudes[i])
            .unwrap_or_default()
    }

    pub fn check_mode(&self, mode: usize) -> Result<(), FockError> {
        if mode >= self.mode_count {
            return Err(FockError::ModeIndexOutOfRange {
                mode,
                mode_count: self.mode_count,
            });
        }
        Ok(())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOLERANCE
    }

    fn check_compatible(&self, other: &Self) -> Result<(), FockError> {
        if self.cutoff != other.cutoff {
            return Err(FockError::CutoffMismatch {
                left: self.cutoff.n_max(),
                right: other.cutoff.n_max(),
            });
        }
        if self.mode_count != other.mode_count {
            return Err(FockError::DimensionMismatch(format!(
                "{} modes vs {} modes",
                self.mode_count, other.mode_count
            )));
        }
        Ok(())
    }

    /// `<self|other>`, conjugating `self`.
    pub fn overlap(&self, other: &Self) -> Result<Complex64, FockError> {
        self.check_compatible(other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Unit-norm copy. Fails on the zero vector, which is what post-selection
    /// on an impossible outcome produces.
    pub fn renormalize(&self) -> Result<Self, FockError> {
        let norm = self.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(FockError::ZeroState);
        }
        Ok(self.scaled(Complex64::new(1.0 / norm, 0.0)))
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        MultiModeState {
            mode_count: self.mode_count,
            cutoff: self.cutoff,
            amplitudes: self.amplitudes.iter().map(|c| c * factor).collect(),
        }
    }

    /// `self + other`.
    pub fn added(&self, other: &Self) -> Result<Self, FockError> {
        self.check_compatible(other)?;
        Ok(MultiModeState {
            mode_count: self.mode_count,
            cutoff: self.cutoff,
            amplitudes: self
                .amplitudes
                .iter()
                .zip(&other.amplitudes)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// Euclidean distance `||self - other||`.
    pub fn distance(&self, other: &Self) -> Result<f64, FockError> {
        self.check_compatible(other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    /// `self ⊗ other`; `self` occupies the leading modes.
    pub fn tensor(&self, other: &Self) -> Result<Self, FockError> {
        if self.cutoff != other.cutoff {
            return Err(FockError::CutoffMismatch {
                left: self.cutoff.n_max(),
                right: other.cutoff.n_max(),
            });
        }
        let mode_count = self.mode_count + other.mode_count;
        space_size(mode_count, self.cutoff)?;
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|a| other.amplitudes.iter().map(move |b| a * b))
            .collect();
        Ok(MultiModeState {
            mode_count,
            cutoff: self.cutoff,
            amplitudes,
        })
    }

    /// Photon-count distribution on one mode, tracing out the rest.
    /// Sums to the squared norm, so to one for a normalized state.
    pub fn photon_distribution(&self, mode: usize) -> Result<Vec<f64>, FockError> {
        self.check_mode(mode)?;
        let mut probs = vec![0.0; self.cutoff.dim()];
        for (i, c) in self.amplitudes.iter().enumerate() {
            probs[self.occupation(i, mode)] += c.norm_sqr();
        }
        Ok(probs)
    }

    /// Distribution of the total photon number across all modes.
    pub fn total_photon_distribution(&self) -> Vec<f64> {
        let mut probs = vec![0.0; self.mode_count * self.cutoff.n_max() + 1];
        for (i, c) in self.amplitudes.iter().enumerate() {
            probs[self.total_photons(i)] += c.norm_sqr();
        }
        probs
    }

    /// Joint photon-count distribution on two modes, `p[n_a][n_b]`.
    pub fn joint_distribution(
        &self,
        mode_a: usize,
        mode_b: usize,
    ) -> Result<Vec<Vec<f64>>, FockError> {
        self.check_mode(mode_a)?;
        self.check_mode(mode_b)?;
        let d = self.cutoff.dim();
        let mut joint = vec![vec![0.0; d]; d];
        for (i, c) in self.amplitudes.iter().enumerate() {
            joint[self.occupation(i, mode_a)][self.occupation(i, mode_b)] += c.norm_sqr();
        }
        Ok(joint)
    }

    /// Probability weight on basis states with more than `n` photons in `mode`.
    pub fn weight_above(&self, mode: usize, n: usize) -> Result<f64, FockError> {
        Ok(self.photon_distribution(mode)?.iter().skip(n + 1).sum())
    }
}

/// Photon-count marginal of one mode. Alias of
/// [`MultiModeState::photon_distribution`] under its measurement-facing name.
pub fn partial_trace_probabilities(s: &MultiModeState, mode: usize) -> Result<Vec<f64>, FockError> {
    s.photon_distribution(mode)
}
