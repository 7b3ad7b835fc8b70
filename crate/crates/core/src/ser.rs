//! Complex numbers serialize as `[re, im]` pairs, matching the state format.

use num_complex::Complex64;
use serde::ser::{SerializeSeq, Serializer};
use serde::Serialize;

pub fn complex<S: Serializer>(c: &Complex64, s: S) -> Result<S::Ok, S::Error> {
    [c.re, c.im].serialize(s)
}

pub fn complex_vec<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for c in v {
        seq.serialize_element(&[c.re, c.im])?;
    }
    seq.end()
}

pub fn complex_array<S: Serializer, const N: usize>(
    v: &[Complex64; N],
    s: S,
) -> Result<S::Ok, S::Error> {
    complex_vec(v, s)
}
