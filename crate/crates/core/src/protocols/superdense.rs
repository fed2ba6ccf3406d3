//! Two-qubit superdense coding with a Bell-basis readout.

use serde::Serialize;

use crate::error::Result;
use crate::hybrid::{hadamard, init_register, pauli_x, pauli_y, pauli_z, MeasureMode, Preparation, SubsystemSpec};
use crate::phase_algebra::PauliLetter;

/// Decoding table from the ZZ readout to the transmitted bits:
/// `00 → 00`, `01 → 01`, `10 → 11`, `11 → 10`.
pub fn decode_zz(outcome: [bool; 2]) -> [bool; 2] {
    match outcome {
        [false, false] => [false, false],
        [false, true] => [false, true],
        [true, false] => [true, true],
        [true, true] => [true, false],
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuperdenseResult {
    pub bits: [bool; 2],
    pub letter: PauliLetter,
    /// Distribution over the ZZ readout `00, 01, 10, 11`.
    pub distribution: Vec<f64>,
    pub zz_outcome: [bool; 2],
    pub decoded: [bool; 2],
}

fn letter_matrix(letter: PauliLetter) -> ndarray::Array2<num_complex::Complex64> {
    match letter {
        PauliLetter::I => ndarray::Array2::eye(2),
        PauliLetter::X => pauli_x(),
        PauliLetter::Z => pauli_z(),
        PauliLetter::Y => pauli_y(),
    }
}

/// Bell pair, sender encoding on qubit S, CNOT(S→R), H on S, ZZ readout.
pub fn superdense_dv(bits: [bool; 2]) -> Result<SuperdenseResult> {
    let mut state = init_register(
        &[SubsystemSpec::Qubit, SubsystemSpec::Qubit],
        &[Preparation::Basis(0), Preparation::Basis(0)],
    )?;
    state.apply_local(&hadamard(), 0)?;
    state.apply_cnot(0, 1)?;

    let letter = PauliLetter::from_bits(bits);
    state.apply_local(&letter_matrix(letter), 0)?;

    state.apply_cnot(0, 1)?;
    state.apply_local(&hadamard(), 0)?;

    let distribution = state.marginal(&[0, 1])?;
    let first = state.measure(0, MeasureMode::Exact)?;
    let second = first.collapsed.measure(1, MeasureMode::Exact)?;
    let zz_outcome = [first.outcome == 1, second.outcome == 1];
    Ok(SuperdenseResult { bits, letter, distribution, zz_outcome, decoded: decode_zz(zz_outcome) })
}

pub fn bits_to_string(bits: [bool; 2]) -> String {
    bits.iter().map(|b| if *b { '1' } else { '0' }).collect()
}

pub fn parse_bits(s: &str) -> Option<[bool; 2]> {
    let b: Vec<bool> = s
        .trim()
        .chars()
        .map(|c| match c {
            '0' => Some(false),
            '1' => Some(true),
            _ => None,
        })
        .collect::<Option<_>>()?;
    <[bool; 2]>::try_from(b).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_encoding() {
        let r = superdense_dv([false, false]).unwrap();
        assert_eq!(r.zz_outcome, [false, false]);
        assert_eq!(r.decoded, [false, false]);
        assert!((r.distribution[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bits_ten_read_out_as_eleven() {
        let r = superdense_dv([true, false]).unwrap();
        assert_eq!(bits_to_string(r.zz_outcome), "11");
        assert_eq!(bits_to_string(r.decoded), "10");
    }

    #[test]
    fn all_inputs_round_trip() {
        for s in ["00", "01", "10", "11"] {
            let bits = parse_bits(s).unwrap();
            let r = superdense_dv(bits).unwrap();
            assert_eq!(r.decoded, bits, "{s}");
            let k = r.zz_outcome[0] as usize * 2 + r.zz_outcome[1] as usize;
            assert!((r.distribution[k] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn parse_bits_rejects_garbage() {
        assert_eq!(parse_bits("1"), None);
        assert_eq!(parse_bits("102"), None);
        assert_eq!(parse_bits("2a"), None);
        assert_eq!(parse_bits(" 01 "), Some([false, true]));
    }
}
