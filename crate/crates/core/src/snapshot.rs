//! Binary field snapshots.
//!
//! ```text
//! offset  size  content
//! 0       4     magic b"VOIG"
//! 4       4     version, u32 LE (= 1)
//! 8       4     N, u32 LE (modes per axis)
//! 12      1     kind, u8: 0 = vector field, 1 = scalar field
//! 13      ...   N^3 records in lexicographic wavevector order
//! ```
//!
//! Wavevectors run over `k_j in {-N/2+1, ..., N/2}` with `k_0` slowest and
//! `k_2` fastest. Each record holds `(re, im)` as little-endian `f64` for each
//! component (three for vector fields, one for scalar fields), so the payload is
//! `N^3 * C * 16` bytes.
//!
//! Decoding accepts only zero-mean, Hermitian-symmetric fields without Nyquist
//! content; the symmetry check is relative to the field's `L^2` norm.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{SpectralScalarField, SpectralVectorField};
use crate::grid::TorusGrid;

pub const MAGIC: &[u8; 4] = b"VOIG";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 13;

/// Largest accepted `N`; keeps allocation bounded for untrusted headers.
pub const MAX_MODES: u32 = 512;

const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum FieldKind {
    Vector = 0,
    Scalar = 1,
}

impl FieldKind {
    fn components(self) -> usize {
        match self {
            FieldKind::Vector => 3,
            FieldKind::Scalar => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Snapshot {
    Vector(SpectralVectorField),
    Scalar(SpectralScalarField),
}

/// Storage slots in lexicographic wavevector order.
fn lexicographic_slots(grid: &TorusGrid) -> impl Iterator<Item = usize> + '_ {
    let half = (grid.modes_per_axis() / 2) as i64;
    let range = move || (-half + 1)..=half;
    range()
        .flat_map(move |a| range().flat_map(move |b| range().map(move |c| grid.index_of([a, b, c]).expect("resolved"))))
}

fn header(grid: &TorusGrid, kind: FieldKind, capacity: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + capacity);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(grid.modes_per_axis() as u32).to_le_bytes());
    out.push(kind as u8);
    out
}

fn push_complex(out: &mut Vec<u8>, c: Complex64) {
    out.extend_from_slice(&c.re.to_le_bytes());
    out.extend_from_slice(&c.im.to_le_bytes());
}

pub fn encode_vector(field: &SpectralVectorField) -> Vec<u8> {
    let grid = field.grid();
    let mut out = header(grid, FieldKind::Vector, grid.len() * 48);
    for idx in lexicographic_slots(grid) {
        for c in field.at(idx) {
            push_complex(&mut out, c);
        }
    }
    out
}

pub fn encode_scalar(field: &SpectralScalarField) -> Vec<u8> {
    let grid = field.grid();
    let mut out = header(grid, FieldKind::Scalar, grid.len() * 16);
    for idx in lexicographic_slots(grid) {
        push_complex(&mut out, field.coeffs()[idx]);
    }
    out
}

fn read_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes"))
}

fn read_f64(bytes: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"))
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Snapshot(msg.into())
}

/// Parses and validates a snapshot of either kind.
pub fn decode(bytes: &[u8]) -> Result<Snapshot> {
    if bytes.len() < HEADER_LEN {
        return Err(bad(format!("truncated header ({} bytes)", bytes.len())));
    }
    if &bytes[0..4] != MAGIC {
        return Err(bad("bad magic"));
    }
    let version = read_u32(bytes, 4);
    if version != VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let n = read_u32(bytes, 8);
    if n > MAX_MODES {
        return Err(bad(format!("N = {n} exceeds {MAX_MODES}")));
    }
    let kind = match bytes[12] {
        0 => FieldKind::Vector,
        1 => FieldKind::Scalar,
        other => return Err(bad(format!("unknown field kind {other}"))),
    };
    // Size check precedes grid construction so hostile headers cannot force allocation.
    let n = n as usize;
    let expected = HEADER_LEN + n * n * n * kind.components() * 16;
    if bytes.len() != expected {
        return Err(bad(format!("expected {expected} bytes, got {}", bytes.len())));
    }
    let grid = TorusGrid::new(n).map_err(|e| bad(e.to_string()))?;

    let comps = kind.components();
    let mut coeffs = vec![vec![Complex64::default(); grid.len()]; comps];
    let mut at = HEADER_LEN;
    for idx in lexicographic_slots(&grid) {
        for comp in coeffs.iter_mut() {
            let c = Complex64::new(read_f64(bytes, at), read_f64(bytes, at + 8));
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::NonFinite("snapshot coefficients"));
            }
            comp[idx] = c;
            at += 16;
        }
    }

    let norm = coeffs.iter().flatten().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let tol = SYMMETRY_TOL * norm;
    for comp in coeffs.iter_mut() {
        for idx in 0..grid.len() {
            let v = comp[idx];
            if idx == 0 || grid.is_nyquist(idx) {
                if v != Complex64::default() {
                    return Err(bad("non-zero mean or Nyquist coefficient"));
                }
                continue;
            }
            let mirror = grid.conjugate_index(idx);
            if idx < mirror {
                let w = comp[mirror];
                if (w - v.conj()).norm() > tol {
                    return Err(bad(format!(
                        "Hermitian symmetry violated at k = {:?}",
                        grid.wavevector(idx)
                    )));
                }
                let avg = 0.5 * (v + w.conj());
                comp[idx] = avg;
                comp[mirror] = avg.conj();
            }
        }
    }

    Ok(match kind {
        FieldKind::Vector => {
            let mut it = coeffs.into_iter();
            let (a, b, c) = (it.next().unwrap(), it.next().unwrap(), it.next().unwrap());
            Snapshot::Vector(SpectralVectorField::from_components(&grid, [a, b, c]))
        }
        FieldKind::Scalar => Snapshot::Scalar(SpectralScalarField::from_coeffs(&grid, coeffs.pop().unwrap())),
    })
}

pub fn decode_vector(bytes: &[u8]) -> Result<SpectralVectorField> {
    match decode(bytes)? {
        Snapshot::Vector(v) => Ok(v),
        Snapshot::Scalar(_) => Err(bad("expected a vector field snapshot")),
    }
}

pub fn decode_scalar(bytes: &[u8]) -> Result<SpectralScalarField> {
    match decode(bytes)? {
        Snapshot::Scalar(s) => Ok(s),
        Snapshot::Vector(_) => Err(bad("expected a scalar field snapshot")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::pressure_from_velocity;
    use proptest::prelude::*;

    fn grid() -> TorusGrid {
        TorusGrid::new(8).unwrap()
    }

    #[test]
    fn layout_is_lexicographic() {
        let g = grid();
        let mut f = SpectralVectorField::zeros(&g);
        f.set_mode(
            [-3, -3, -2],
            [Complex64::new(1.5, -2.0), Complex64::default(), Complex64::default()],
        );
        let bytes = encode_vector(&f);
        assert_eq!(&bytes[..4], b"VOIG");
        assert_eq!(read_u32(&bytes, 4), 1);
        assert_eq!(read_u32(&bytes, 8), 8);
        assert_eq!(bytes[12], 0);
        assert_eq!(bytes.len(), HEADER_LEN + 512 * 48);
        // (-3,-3,-3) is record 0, (-3,-3,-2) is record 1.
        assert_eq!(read_f64(&bytes, HEADER_LEN + 48), 1.5);
        assert_eq!(read_f64(&bytes, HEADER_LEN + 56), -2.0);
    }

    #[test]
    fn roundtrip_vector_and_scalar() {
        let g = grid();
        let u = SpectralVectorField::random(&g, 2.0, 1).unwrap();
        assert_eq!(decode_vector(&encode_vector(&u)).unwrap(), u);
        let p = pressure_from_velocity(&u);
        assert_eq!(decode_scalar(&encode_scalar(&p)).unwrap(), p);
        assert!(decode_scalar(&encode_vector(&u)).is_err());
    }

    #[test]
    fn rejects_malformed_input() {
        let g = grid();
        let good = encode_vector(&SpectralVectorField::random(&g, 2.0, 2).unwrap());
        assert!(decode(&good[..5]).is_err());
        assert!(decode(&good[..good.len() - 1]).is_err());

        let mut bad_magic = good.clone();
        bad_magic[0] = b'X';
        assert!(decode(&bad_magic).is_err());

        let mut bad_version = good.clone();
        bad_version[4] = 2;
        assert!(decode(&bad_version).is_err());

        let mut huge = good[..HEADER_LEN].to_vec();
        huge[8..12].copy_from_slice(&u32::MAX.to_le_bytes());
        assert!(decode(&huge).is_err());

        let mut odd = MAGIC.to_vec();
        odd.extend_from_slice(&1u32.to_le_bytes());
        odd.extend_from_slice(&9u32.to_le_bytes());
        odd.push(1);
        odd.resize(HEADER_LEN + 729 * 16, 0);
        assert!(decode(&odd).is_err());

        // Breaking one coefficient breaks Hermitian symmetry.
        let mut asym = good.clone();
        let at = HEADER_LEN + 48 * 100;
        asym[at..at + 8].copy_from_slice(&7.0f64.to_le_bytes());
        assert!(decode(&asym).is_err());

        let mut nan = good;
        nan[at..at + 8].copy_from_slice(&f64::NAN.to_le_bytes());
        assert!(matches!(decode(&nan), Err(Error::NonFinite(_))));
    }

    proptest! {
        #[test]
        fn decode_never_panics(data in proptest::collection::vec(any::<u8>(), 0..256)) {
            let _ = decode(&data);
        }

        #[test]
        fn roundtrip_random(seed in any::<u64>(), decay in 1.6f64..6.0) {
            let u = SpectralVectorField::random(&grid(), decay, seed).unwrap();
            prop_assert_eq!(decode_vector(&encode_vector(&u)).unwrap(), u);
        }
    }
}
