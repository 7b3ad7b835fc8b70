//! Polarization loop inside the cavity: a polarizing beam splitter (PBS) and a
//! Pockels cell (PC) trap a photon for the JCM interaction and release it.
//!
//! Geometry, in the order a photon meets the elements once it is inside:
//!
//! ```text
//!   port (path a)
//!        |
//!   [left mirror] -- [PC] -- [PBS] -- (atom) -- [right mirror]      path b
//! ```
//!
//! The PBS transmits `V` (path kept) and reflects `H` (path swapped), so an `H`
//! photon arriving on the injection port `a` is sent into the loop `b`, and an
//! `H` photon in the loop is sent back out through `a`.
//!
//! The schedule has three PC windows. Injection covers the single outbound PC
//! pass after the PBS (`H -> V` with the cell on). Circulation covers the
//! round trips while the atom interacts (cell off, `V` stays trapped).
//! Extraction covers the return pass after the left mirror (`V -> H` with the
//! cell on), after which the PBS ejects the photon.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jcm::ns_gate_time;

/// Speed of light used for the timing estimates, m/s.
pub const SPEED_OF_LIGHT: f64 = 2.998e8;

/// Fastest Pockels-cell switching time assumed available, s.
pub const ACHIEVABLE_PC_RESPONSE: f64 = 2.5e-10;

const TIME_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LoopError {
    #[error("protocol violation: {0}")]
    ProtocolViolation(String),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Path {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Polarization {
    V,
    H,
}

/// One photon over `{a, b} ⊗ {V, H}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizedMode {
    /// `amps[path][polarization]` with `a = 0, b = 1`, `V = 0, H = 1`.
    amps: [[Complex64; 2]; 2],
}

impl PolarizedMode {
    pub fn new(path: Path, c_v: Complex64, c_h: Complex64) -> Self {
        let mut amps = [[Complex64::default(); 2]; 2];
        amps[path as usize] = [c_v, c_h];
        PolarizedMode { amps }
    }

    pub fn basis(path: Path, pol: Polarization) -> Self {
        let mut amps = [[Complex64::default(); 2]; 2];
        amps[path as usize][pol as usize] = Complex64::new(1.0, 0.0);
        PolarizedMode { amps }
    }

    pub fn amplitude(&self, path: Path, pol: Polarization) -> Complex64 {
        self.amps[path as usize][pol as usize]
    }

    pub fn path_weight(&self, path: Path) -> f64 {
        self.amps[path as usize].iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.path_weight(Path::A) + self.path_weight(Path::B)
    }

    fn clear_path(&mut self, path: Path) {
        self.amps[path as usize] = [Complex64::default(); 2];
    }

    /// Dominant basis label, for traces.
    fn label(&self) -> (Path, Polarization) {
        let mut best = (Path::A, Polarization::V, -1.0);
        for path in [Path::A, Path::B] {
            for pol in [Polarization::V, Polarization::H] {
                let w = self.amplitude(path, pol).norm_sqr();
                if w > best.2 {
                    best = (path, pol, w);
                }
            }
        }
        (best.0, best.1)
    }
}

/// `V` keeps its path, `H` swaps paths.
pub fn pbs_apply(s: &PolarizedMode) -> PolarizedMode {
    let [a, b] = s.amps;
    PolarizedMode {
        amps: [[a[0], b[1]], [b[0], a[1]]],
    }
}

/// Cell on: swap `V` and `H` on every path. Off: identity.
pub fn pockels_apply(s: &PolarizedMode, on: bool) -> PolarizedMode {
    if !on {
        return *s;
    }
    PolarizedMode {
        amps: s.amps.map(|[v, h]| [h, v]),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchedulePhase {
    pub pc_on: bool,
    /// Seconds.
    pub duration: f64,
}

/// Injection, circulation, extraction. The circulation window must equal the
/// NS interaction time `(2m+1) pi / (sqrt(2) |kappa|)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopSchedule {
    pub kappa_abs: f64,
    pub m: u32,
    pub phases: Vec<SchedulePhase>,
}

impl LoopSchedule {
    /// PC on for injection and extraction, off while the atom interacts.
    /// `switch_window` is the length of the two PC windows.
    pub fn canonical(kappa_abs: f64, m: u32, switch_window: f64) -> Self {
        LoopSchedule {
            kappa_abs,
            m,
            phases: vec![
                SchedulePhase {
                    pc_on: true,
                    duration: switch_window,
                },
                SchedulePhase {
                    pc_on: false,
                    duration: ns_gate_time(kappa_abs, m),
                },
                SchedulePhase {
                    pc_on: true,
                    duration: switch_window,
                },
            ],
        }
    }

    pub fn validate(&self) -> Result<(), LoopError> {
        if self.phases.len() != 3 {
            return Err(LoopError::InvalidSchedule(format!(
                "expected 3 phases (injection, circulation, extraction), got {}",
                self.phases.len()
            )));
        }
        if !(self.kappa_abs > 0.0 && self.kappa_abs.is_finite()) {
            return Err(LoopError::InvalidSchedule(format!(
                "coupling must be positive, got {}",
                self.kappa_abs
            )));
        }
        if let Some(p) = self
            .phases
            .iter()
            .find(|p| !(p.duration >= 0.0 && p.duration.is_finite()))
        {
            return Err(LoopError::InvalidSchedule(format!(
                "bad phase duration {}",
                p.duration
            )));
        }
        let want = ns_gate_time(self.kappa_abs, self.m);
        let got = self.phases[1].duration;
        if ((got - want) / want).abs() > TIME_TOLERANCE {
            return Err(LoopError::InvalidSchedule(format!(
                "circulation lasts {got:e} s but the m = {} gate needs {want:e} s",
                self.m
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Element {
    Pbs,
    PockelsCell,
    LeftMirror,
    RightMirror,
    /// The whole circulation window, collapsed into one step.
    InteractionWindow,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceStep {
    /// 1-based schedule phase.
    pub phase: usize,
    pub element: Element,
    pub pc_on: Option<bool>,
    pub path: Path,
    pub polarization: Polarization,
    /// Probability still inside the loop after this step.
    pub in_loop: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolTrace {
    pub steps: Vec<TraceStep>,
    /// Phase in which the photon left the cavity.
    pub exit_phase: usize,
    pub exit_polarization: Polarization,
    /// Length of the interaction window, s.
    pub interaction_window: f64,
    /// Probability left in the loop at the end; zero for a clean run.
    pub residual_in_loop: f64,
}

const EPS: f64 = 1e-12;

struct Tracer {
    state: PolarizedMode,
    steps: Vec<TraceStep>,
    ejected: f64,
    exit_polarization: Option<Polarization>,
}

impl Tracer {
    fn record(&mut self, phase: usize, element: Element, pc_on: Option<bool>) {
        let (path, polarization) = self.state.label();
        self.steps.push(TraceStep {
            phase,
            element,
            pc_on,
            path,
            polarization,
            in_loop: self.state.path_weight(Path::B),
        });
    }

    fn pc(&mut self, phase: usize, on: bool) {
        self.state = pockels_apply(&self.state, on);
        self.record(phase, Element::PockelsCell, Some(on));
    }

    fn mirror(&mut self, phase: usize, element: Element) {
        self.record(phase, element, None);
    }

    /// Loop-side PBS crossing; whatever lands on path a leaves the cavity.
    fn pbs(&mut self, phase: usize) -> f64 {
        self.state = pbs_apply(&self.state);
        let out = self.state.path_weight(Path::A);
        if out > EPS {
            self.exit_polarization = Some(
                if self.state.amplitude(Path::A, Polarization::H).norm_sqr() >= out / 2.0 {
                    Polarization::H
                } else {
                    Polarization::V
                },
            );
        }
        self.record(phase, Element::Pbs, None);
        self.state.clear_path(Path::A);
        self.ejected += out;
        out
    }
}

/// Walks a photon through the schedule and checks that it is trapped for the
/// whole circulation window and leaves exactly during extraction.
pub fn run_loop_protocol(
    schedule: &LoopSchedule,
    input: &PolarizedMode,
) -> Result<ProtocolTrace, LoopError> {
    schedule.validate()?;
    if (input.amplitude(Path::A, Polarization::H).norm_sqr() - 1.0).abs() > 1e-9 {
        return Err(LoopError::ProtocolViolation(
            "input must be a horizontally polarized photon on the injection path".into(),
        ));
    }
    let [inject, circulate, extract] = [schedule.phases[0], schedule.phases[1], schedule.phases[2]];
    let mut t = Tracer {
        state: *input,
        steps: Vec::new(),
        ejected: 0.0,
        exit_polarization: None,
    };

    // injection: port -> PBS -> PC (outbound) -> left mirror
    t.state = pbs_apply(&t.state);
    t.record(1, Element::Pbs, None);
    if t.state.path_weight(Path::A) > EPS {
        return Err(LoopError::ProtocolViolation(
            "photon did not enter the loop".into(),
        ));
    }
    t.pc(1, inject.pc_on);
    t.mirror(1, Element::LeftMirror);

    // circulation: one round trip stands for all of them since the loop
    // state must come back unchanged
    let before = t.state;
    t.pc(2, circulate.pc_on);
    if t.pbs(2) > EPS {
        return Err(LoopError::ProtocolViolation(format!(
            "photon ejected during the interaction window (PC {} while circulating)",
            if circulate.pc_on { "on" } else { "off" }
        )));
    }
    t.mirror(2, Element::RightMirror);
    if t.pbs(2) > EPS {
        return Err(LoopError::ProtocolViolation(
            "photon ejected on the atom side of the loop".into(),
        ));
    }
    t.pc(2, circulate.pc_on);
    t.mirror(2, Element::LeftMirror);
    if t.state != before {
        return Err(LoopError::ProtocolViolation(
            "loop state changes between round trips".into(),
        ));
    }
    t.record(2, Element::InteractionWindow, Some(circulate.pc_on));

    // extraction: PC (return) -> PBS -> port
    t.pc(3, extract.pc_on);
    let out = t.pbs(3);
    if out < 1.0 - 1e-9 {
        return Err(LoopError::ProtocolViolation(format!(
            "photon trapped: only {out:.3} of the probability left at extraction"
        )));
    }
    Ok(ProtocolTrace {
        exit_phase: 3,
        exit_polarization: t.exit_polarization.unwrap_or(Polarization::H),
        interaction_window: circulate.duration,
        residual_in_loop: t.state.norm_sqr(),
        steps: t.steps,
    })
}

/// Element crossings charged per round trip in the loss budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraversalCounting {
    pub pc_per_round_trip: f64,
    pub pbs_per_round_trip: f64,
}

impl Default for TraversalCounting {
    fn default() -> Self {
        TraversalCounting {
            pc_per_round_trip: 1.0,
            pbs_per_round_trip: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GateTiming {
    pub m: u32,
    /// Interaction time, s.
    pub gate_time: f64,
    pub round_trips: f64,
    /// May underflow to zero; see `survival_log10`.
    pub survival_probability: f64,
    pub survival_log10: f64,
    /// `survival_probability` in scientific notation, computed from the log.
    pub survival_scientific: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoopTimingReport {
    pub wavelength: f64,
    pub kappa_abs: f64,
    pub cavity_width: f64,
    /// `L / c`: one PC window must fit in a single pass.
    pub pc_response_required: f64,
    pub pc_response_achievable: f64,
    pub pc_fast_enough: bool,
    pub round_trip_time: f64,
    pub loss_pc: f64,
    pub loss_pbs: f64,
    pub counting: TraversalCounting,
    pub per_round_trip_survival: f64,
    pub gates: Vec<GateTiming>,
}

impl LoopTimingReport {
    pub fn gate(&self, m: u32) -> Option<&GateTiming> {
        self.gates.iter().find(|g| g.m == m)
    }
}

fn scientific_from_log10(log10: f64) -> String {
    if log10 == f64::NEG_INFINITY {
        return "0".into();
    }
    let mut exponent = log10.floor();
    let mut mantissa = 10f64.powf(log10 - exponent);
    if mantissa >= 9.9995 {
        mantissa /= 10.0;
        exponent += 1.0;
    }
    format!("{mantissa:.3}e{exponent:.0}")
}

/// Cavity geometry, PC speed requirement, NS gate durations for `m = 1, 3`,
/// and the photon survival probability over those durations.
pub fn timing_report(
    wavelength: f64,
    kappa_abs: f64,
    loss_pc: f64,
    loss_pbs: f64,
    counting: TraversalCounting,
    pc_response_achievable: f64,
) -> Result<LoopTimingReport, LoopError> {
    let positive = |name: &str, x: f64| {
        if x > 0.0 && x.is_finite() {
            Ok(())
        } else {
            Err(LoopError::InvalidParameter(format!(
                "{name} must be positive, got {x}"
            )))
        }
    };
    positive("wavelength", wavelength)?;
    positive("kappa", kappa_abs)?;
    positive("achievable PC response", pc_response_achievable)?;
    for (name, loss) in [("PC loss", loss_pc), ("PBS loss", loss_pbs)] {
        if !(0.0..1.0).contains(&loss) {
            return Err(LoopError::InvalidParameter(format!(
                "{name} must be in [0, 1), got {loss}"
            )));
        }
    }
    if counting.pc_per_round_trip < 0.0 || counting.pbs_per_round_trip < 0.0 {
        return Err(LoopError::InvalidParameter(
            "traversal counts must be non-negative".into(),
        ));
    }
    let cavity_width = wavelength / 2.0;
    let pc_response_required = cavity_width / SPEED_OF_LIGHT;
    let round_trip_time = 2.0 * pc_response_required;
    let per_trip_log10 = counting.pc_per_round_trip * (1.0 - loss_pc).log10()
        + counting.pbs_per_round_trip * (1.0 - loss_pbs).log10();
    let gates = [1, 3]
        .into_iter()
        .map(|m| {
            let gate_time = ns_gate_time(kappa_abs, m);
            let round_trips = gate_time / round_trip_time;
            let survival_log10 = round_trips * per_trip_log10;
            GateTiming {
                m,
                gate_time,
                round_trips,
                survival_probability: 10f64.powf(survival_log10),
                survival_log10,
                survival_scientific: scientific_from_log10(survival_log10),
            }
        })
        .collect();
    Ok(LoopTimingReport {
        wavelength,
        kappa_abs,
        cavity_width,
        pc_response_required,
        pc_response_achievable,
        pc_fast_enough: pc_response_achievable <= pc_response_required,
        round_trip_time,
        loss_pc,
        loss_pbs,
        counting,
        per_round_trip_survival: 10f64.powf(per_trip_log10),
        gates,
    })
}

/// Wavelength of the 21.456 GHz Rydberg transition used for the estimates, m.
pub const REFERENCE_WAVELENGTH: f64 = 1.39724e-2;

/// Coupling of the reference microwave cavity, s^-1.
pub const REFERENCE_KAPPA: f64 = 1e6 / 70.0;

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn pbs_routes_by_polarization() {
        let av = PolarizedMode::basis(Path::A, Polarization::V);
        assert_eq!(pbs_apply(&av), av);
        let ah = PolarizedMode::basis(Path::A, Polarization::H);
        assert_eq!(
            pbs_apply(&ah),
            PolarizedMode::basis(Path::B, Polarization::H)
        );
        let mixed = pbs_apply(&PolarizedMode::new(Path::A, c(0.6), c(0.8)));
        assert_eq!(mixed.amplitude(Path::A, Polarization::V), c(0.6));
        assert_eq!(mixed.amplitude(Path::B, Polarization::H), c(0.8));
        assert_eq!(mixed.path_weight(Path::A), 0.36);
    }

    #[test]
    fn pockels_cell_swaps_only_when_on() {
        let h = PolarizedMode::basis(Path::B, Polarization::H);
        assert_eq!(
            pockels_apply(&h, true),
            PolarizedMode::basis(Path::B, Polarization::V)
        );
        let v = PolarizedMode::basis(Path::B, Polarization::V);
        assert_eq!(pockels_apply(&v, false), v);
        let s = PolarizedMode::new(Path::A, c(0.6), Complex64::new(0.0, 0.8));
        assert_eq!(pockels_apply(&pockels_apply(&s, true), true), s);
    }

    #[test]
    fn canonical_schedule_releases_at_extraction() {
        for m in [1, 3] {
            let sched = LoopSchedule::canonical(REFERENCE_KAPPA, m, 2e-11);
            let trace =
                run_loop_protocol(&sched, &PolarizedMode::basis(Path::A, Polarization::H)).unwrap();
            assert_eq!(trace.exit_phase, 3);
            assert_eq!(trace.exit_polarization, Polarization::H);
            assert_eq!(trace.interaction_window, ns_gate_time(REFERENCE_KAPPA, m));
            assert!(trace.residual_in_loop < 1e-15);
            let exits = trace
                .steps
                .iter()
                .filter(|s| s.element == Element::Pbs && s.path == Path::A)
                .count();
            assert_eq!(exits, 1);
        }
    }

    #[test]
    fn pc_off_at_injection_ejects_early() {
        let mut sched = LoopSchedule::canonical(REFERENCE_KAPPA, 1, 2e-11);
        sched.phases[0].pc_on = false;
        let err =
            run_loop_protocol(&sched, &PolarizedMode::basis(Path::A, Polarization::H)).unwrap_err();
        assert!(
            matches!(err, LoopError::ProtocolViolation(ref s) if s.contains("interaction window"))
        );
    }

    #[test]
    fn pc_on_while_circulating_ejects_mid_gate() {
        let mut sched = LoopSchedule::canonical(REFERENCE_KAPPA, 3, 2e-11);
        sched.phases[1].pc_on = true;
        assert!(matches!(
            run_loop_protocol(&sched, &PolarizedMode::basis(Path::A, Polarization::H)),
            Err(LoopError::ProtocolViolation(_))
        ));
    }

    #[test]
    fn pc_off_at_extraction_traps_the_photon() {
        let mut sched = LoopSchedule::canonical(REFERENCE_KAPPA, 1, 2e-11);
        sched.phases[2].pc_on = false;
        let err =
            run_loop_protocol(&sched, &PolarizedMode::basis(Path::A, Polarization::H)).unwrap_err();
        assert!(matches!(err, LoopError::ProtocolViolation(ref s) if s.contains("trapped")));
    }

    #[test]
    fn schedule_validation() {
        let mut sched = LoopSchedule::canonical(REFERENCE_KAPPA, 1, 2e-11);
        sched.phases.pop();
        assert!(matches!(
            sched.validate(),
            Err(LoopError::InvalidSchedule(_))
        ));
        let mut sched = LoopSchedule::canonical(REFERENCE_KAPPA, 1, 2e-11);
        sched.phases[1].duration *= 1.5;
        assert!(matches!(
            sched.validate(),
            Err(LoopError::InvalidSchedule(_))
        ));
        let sched = LoopSchedule::canonical(REFERENCE_KAPPA, 1, 2e-11);
        let v_input = PolarizedMode::basis(Path::A, Polarization::V);
        assert!(matches!(
            run_loop_protocol(&sched, &v_input),
            Err(LoopError::ProtocolViolation(_))
        ));
    }

    #[test]
    fn schedule_json() {
        let sched = LoopSchedule::canonical(REFERENCE_KAPPA, 3, 2e-11);
        let json = serde_json::to_string(&sched).unwrap();
        let back: LoopSchedule = serde_json::from_str(&json).unwrap();
        assert_eq!(back, sched);
    }

    #[test]
    fn reference_timing() {
        let r = timing_report(
            REFERENCE_WAVELENGTH,
            REFERENCE_KAPPA,
            0.04,
            0.01,
            TraversalCounting::default(),
            ACHIEVABLE_PC_RESPONSE,
        )
        .unwrap();
        assert!((r.cavity_width / 6.986e-3 - 1.0).abs() < 5e-4);
        assert!((r.pc_response_required / 2.330e-11 - 1.0).abs() < 5e-3);
        assert!(!r.pc_fast_enough);
        let g1 = r.gate(1).unwrap();
        let g3 = r.gate(3).unwrap();
        assert!((g1.gate_time / 4.67e-4 - 1.0).abs() < 5e-3);
        assert!((g3.gate_time / 1.09e-3 - 1.0).abs() < 5e-3);
        assert!(g1.round_trips > 9e6 && g1.round_trips < 1.1e7);
        assert_eq!(g1.survival_probability, 0.0);
        assert!(g1.survival_log10 < -1e5);
        assert!(g1.survival_scientific.contains('e'));
        for g in &r.gates {
            assert!((g.round_trips * r.round_trip_time / g.gate_time - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn timing_rejects_bad_inputs() {
        let tc = TraversalCounting::default();
        assert!(timing_report(-1.0, 1.0, 0.0, 0.0, tc, 1e-10).is_err());
        assert!(timing_report(1.0, 1.0, 1.0, 0.0, tc, 1e-10).is_err());
        assert!(timing_report(1.0, 0.0, 0.0, 0.0, tc, 1e-10).is_err());
    }

    #[test]
    fn scientific_formatting() {
        assert_eq!(scientific_from_log10(-2.0), "1.000e-2");
        assert_eq!(scientific_from_log10((0.5f64).log10()), "5.000e-1");
        assert_eq!(scientific_from_log10(f64::NEG_INFINITY), "0");
    }
}
