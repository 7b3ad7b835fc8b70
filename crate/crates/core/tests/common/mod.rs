//! Reference implementations shared by the integration tests: a dense matrix
//! exponential for the atom-field evolution and a symbolic polynomial
//! expansion for the beam splitter.
#![allow(dead_code)]

use std::collections::HashMap;

use jcm_photonics::fock::{FockCutoff, MultiModeState};
use jcm_photonics::jcm::{jcm_propagate, AtomFieldState, JcmParams};
use nalgebra::DMatrix;
use num_complex::Complex64;

pub const TOL: f64 = 1e-9;

/// `exp(-i C t)` with `C = kappa sigma_+ a + kappa^* sigma_- a^dagger`, on the
/// basis `|g,0..n_max>, |e,0..n_max>`.
pub fn dense_propagator(n_max: usize, kappa: Complex64, t: f64) -> DMatrix<Complex64> {
    let d = n_max + 1;
    let mut c = DMatrix::<Complex64>::zeros(2 * d, 2 * d);
    for n in 1..d {
        let s = (n as f64).sqrt();
        // sigma_+ a : |g,n> -> |e,n-1>
        c[(d + n - 1, n)] += kappa * s;
        // sigma_- a^dagger : |e,n-1> -> |g,n>
        c[(n, d + n - 1)] += kappa.conj() * s;
    }
    (c * Complex64::new(0.0, -t)).exp()
}

pub fn basis_atom_field(n_max: usize, col: usize) -> AtomFieldState {
    let d = n_max + 1;
    let mut g = vec![Complex64::default(); d];
    let mut e = vec![Complex64::default(); d];
    if col < d {
        g[col] = Complex64::new(1.0, 0.0);
    } else {
        e[col - d] = Complex64::new(1.0, 0.0);
    }
    AtomFieldState::from_components(FockCutoff::new(n_max).unwrap(), g, e).unwrap()
}

/// Largest entry-wise gap between the library propagator and the dense one.
pub fn check_propagator(n_max: usize, kappa_abs: f64, phase: f64, t: f64) -> f64 {
    let params = JcmParams::new(kappa_abs, phase, t).unwrap();
    let u = dense_propagator(n_max, params.kappa(), t);
    let d = n_max + 1;
    let mut worst: f64 = 0.0;
    for col in 0..2 * d {
        let out = jcm_propagate(&basis_atom_field(n_max, col), &params);
        for row in 0..2 * d {
            let got = if row < d {
                out.ground()[row]
            } else {
                out.excited()[row - d]
            };
            worst = worst.max((got - u[(row, col)]).norm());
        }
    }
    worst
}

/// Polynomial in creation operators: exponent vector -> coefficient.
type Poly = HashMap<Vec<usize>, Complex64>;

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Multiplies `poly` by a linear form `sum_k coeffs[k] b_k^dagger`.
fn times_linear(poly: &Poly, coeffs: &[(usize, f64)]) -> Poly {
    let mut out = Poly::new();
    for (exps, c) in poly {
        for &(mode, w) in coeffs {
            let mut e = exps.clone();
            e[mode] += 1;
            *out.entry(e).or_default() += c * w;
        }
    }
    out
}

/// Beam splitter on `(i, j)` by expanding
/// `prod_k (a_k^dagger)^{n_k} / sqrt(n_k!) |0>` with
/// `a_i^dagger -> (b_i^dagger + b_j^dagger)/sqrt2`,
/// `a_j^dagger -> (b_i^dagger - b_j^dagger)/sqrt2`, one factor at a time.
/// Terms with any occupation past `n_max` are dropped.
pub fn bs_oracle(s: &MultiModeState, i: usize, j: usize) -> MultiModeState {
    let modes = s.mode_count();
    let n_max = s.cutoff().n_max();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = MultiModeState::zeros(modes, s.cutoff()).unwrap();
    for (idx, amp) in s.amplitudes().iter().enumerate() {
        if amp.norm_sqr() == 0.0 {
            continue;
        }
        let occ = s.occupations(idx);
        let mut poly = Poly::new();
        let mut start = vec![0; modes];
        for k in 0..modes {
            if k != i && k != j {
                start[k] = occ[k];
            }
        }
        let spectator_norm: f64 = (0..modes)
            .filter(|&k| k != i && k != j)
            .map(|k| factorial(occ[k]))
            .product();
        poly.insert(
            start,
            *amp / (factorial(occ[i]) * factorial(occ[j])).sqrt() / spectator_norm.sqrt(),
        );
        for _ in 0..occ[i] {
            poly = times_linear(&poly, &[(i, h), (j, h)]);
        }
        for _ in 0..occ[j] {
            poly = times_linear(&poly, &[(i, h), (j, -h)]);
        }
        for (exps, c) in poly {
            if exps.iter().any(|&n| n > n_max) {
                continue;
            }
            // (b^dagger)^n |0> = sqrt(n!) |n>
            let norm: f64 = exps.iter().map(|&n| factorial(n)).product();
            let target = out.index_of(&exps).unwrap();
            out.amplitudes_mut()[target] += c * norm.sqrt();
        }
    }
    out
}

pub fn basis_state(modes: usize, n_max: usize, idx: usize) -> MultiModeState {
    let cutoff = FockCutoff::new(n_max).unwrap();
    let mut s = MultiModeState::zeros(modes, cutoff).unwrap();
    s.amplitudes_mut()[idx] = Complex64::new(1.0, 0.0);
    s
}
