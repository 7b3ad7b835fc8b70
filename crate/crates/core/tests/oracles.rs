//! Library against the reference implementations in `common`.

mod common;

use common::{basis_state, bs_oracle, check_propagator, TOL};
use jcm_photonics::fock::{FockCutoff, MultiModeState};
use jcm_photonics::linear_optics::{beam_splitter, BeamSplitter};
use proptest::prelude::*;

#[test]
fn propagator_matches_matrix_exponential_at_gate_times() {
    for n_max in 2..=6 {
        for m in 0..5u32 {
            let t = (2 * m + 1) as f64 * std::f64::consts::PI / std::f64::consts::SQRT_2;
            assert!(
                check_propagator(n_max, 1.0, 0.0, t) < TOL,
                "n_max {n_max}, m {m}"
            );
        }
    }
}

proptest! {
    #[test]
    fn propagator_matches_matrix_exponential(
        n_max in 2usize..=6,
        kappa_abs in 0.1f64..3.0,
        phase in -3.2f64..3.2,
        t in 0.0f64..5.0,
    ) {
        prop_assert!(check_propagator(n_max, kappa_abs, phase, t) < TOL);
    }
}

#[test]
fn beam_splitter_matches_expansion_on_all_basis_states() {
    for n_max in 2..=6 {
        let dim = (n_max + 1) * (n_max + 1);
        let bs = BeamSplitter::new(0, 1).unwrap();
        for idx in 0..dim {
            let s = basis_state(2, n_max, idx);
            let got = beam_splitter(&s, &bs, false).unwrap();
            let want = bs_oracle(&s, 0, 1);
            assert!(
                got.distance(&want).unwrap() < TOL,
                "n_max {n_max}, basis {:?}",
                s.occupations(idx)
            );
        }
    }
}

#[test]
fn beam_splitter_matches_expansion_with_spectators() {
    // three modes, splitter on the outer pair in both orders
    for n_max in 2usize..=4 {
        let dim = (n_max + 1).pow(3);
        for (i, j) in [(0, 2), (2, 0), (1, 2)] {
            let bs = BeamSplitter::new(i, j).unwrap();
            for idx in 0..dim {
                let s = basis_state(3, n_max, idx);
                let got = beam_splitter(&s, &bs, false).unwrap();
                let want = bs_oracle(&s, i, j);
                assert!(got.distance(&want).unwrap() < TOL);
            }
        }
    }
}

#[test]
fn hong_ou_mandel() {
    let cutoff = FockCutoff::new(4).unwrap();
    let s = MultiModeState::number_state(&[1, 1], cutoff).unwrap();
    let out = beam_splitter(&s, &BeamSplitter::new(0, 1).unwrap(), false).unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    assert!((out.amplitude(&[2, 0]) - h).norm() < 1e-12);
    assert!((out.amplitude(&[0, 2]) + h).norm() < 1e-12);
    assert!(out.amplitude(&[1, 1]).norm() < 1e-12);
}
