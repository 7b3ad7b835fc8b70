//! Photonic gates driven by a single atom in a cavity: a truncated Fock-space
//! simulator, the Jaynes-Cummings NS gate, linear optics for dual-rail qubits,
//! the coherent-state Mach-Zehnder test, and the polarization loop that holds
//! a photon in the cavity.

pub mod cli;
pub mod fock;
pub mod interferometer;
pub mod jcm;
pub mod linear_optics;
pub mod loop_circuit;
mod ser;

pub use fock::{CoherentAmplitude, FockCutoff, FockError, MultiModeState};
pub use interferometer::{InterferometerError, InterferometerResponse};
pub use jcm::{jcm_propagate, ns_gate, JcmError, JcmParams, NsGateResult};
pub use linear_optics::{beam_splitter, csf_gate, BeamSplitter, NsMode, OpticsError};
pub use loop_circuit::{LoopError, LoopSchedule};
