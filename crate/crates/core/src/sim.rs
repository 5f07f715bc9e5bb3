//! Dense statevector engine: state allocation, gate application, marginal
//! probabilities, and seeded shot sampling.
//!
//! Conventions fixed here and relied on everywhere else:
//! - qubit 0 is the least-significant bit of the basis-state index;
//! - `RY(phi)` uses the half-angle kernel, so `RY(2y)` on `|0>` gives
//!   `P(1) = sin^2(y)`;
//! - shot sampling uses ChaCha8 seeded per call and inverse-CDF lookup over
//!   the cumulative probability array, so identical inputs give identical
//!   histograms on every platform.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const MAX_QUBITS: usize = 14;

/// Gate kinds supported by the engine. Together with arbitrary
/// positive/negative controls this set covers every construction used by the
/// circuit builders (Toffoli is `X` with two positive controls).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateKind {
    H,
    X,
    /// Rotation about Y by the given angle in radians.
    Ry(f64),
}

/// A single gate: a kind, a target qubit, and a list of control qubits with
/// their required values. A control with required value `false` is a negative
/// control (fires when the qubit is 0).
#[derive(Debug, Clone, PartialEq)]
pub struct GateOp {
    pub kind: GateKind,
    pub target: usize,
    pub controls: Vec<(usize, bool)>,
}

impl GateOp {
    pub fn h(target: usize) -> Self {
        GateOp { kind: GateKind::H, target, controls: Vec::new() }
    }

    pub fn x(target: usize) -> Self {
        GateOp { kind: GateKind::X, target, controls: Vec::new() }
    }

    pub fn ry(target: usize, angle: f64) -> Self {
        GateOp { kind: GateKind::Ry(angle), target, controls: Vec::new() }
    }

    pub fn with_controls(mut self, controls: &[(usize, bool)]) -> Self {
        self.controls = controls.to_vec();
        self
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        if self.target >= n_qubits {
            return Err(Error::IndexOutOfRange { index: self.target, n_qubits });
        }
        for &(q, _) in &self.controls {
            if q >= n_qubits {
                return Err(Error::IndexOutOfRange { index: q, n_qubits });
            }
            if q == self.target {
                return Err(Error::TargetIsControl(q));
            }
        }
        Ok(())
    }

    /// The inverse gate: H and X are self-inverse, RY negates its angle.
    pub fn inverse(&self) -> GateOp {
        let kind = match self.kind {
            GateKind::Ry(a) => GateKind::Ry(-a),
            k => k,
        };
        GateOp { kind, target: self.target, controls: self.controls.clone() }
    }
}

/// An ordered gate list over a fixed register width.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Circuit {
    pub n_qubits: usize,
    pub ops: Vec<GateOp>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Circuit { n_qubits, ops: Vec::new() }
    }

    pub fn push(&mut self, op: GateOp) {
        self.ops.push(op);
    }

    pub fn extend(&mut self, other: &Circuit) {
        self.ops.extend(other.ops.iter().cloned());
    }

    /// The circuit applying the inverse unitary: reversed op order with each
    /// gate inverted.
    pub fn inverse(&self) -> Circuit {
        Circuit {
            n_qubits: self.n_qubits,
            ops: self.ops.iter().rev().map(GateOp::inverse).collect(),
        }
    }

    /// Line-oriented text form, one gate per line: kind, angle, target,
    /// controls as `q=v` pairs. Used by golden-file tests.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("qubits {}\n", self.n_qubits));
        for op in &self.ops {
            let (kind, angle) = match op.kind {
                GateKind::H => ("h", 0.0),
                GateKind::X => ("x", 0.0),
                GateKind::Ry(a) => ("ry", a),
            };
            out.push_str(&format!("{} {:.17e} {}", kind, angle, op.target));
            for &(q, v) in &op.controls {
                out.push_str(&format!(" {}={}", q, u8::from(v)));
            }
            out.push('\n');
        }
        out
    }
}

/// Dense complex amplitude array over the 2^n basis states.
#[derive(Debug, Clone)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// The all-zeros state `|0...0>`.
    pub fn new(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::QubitCountOutOfRange(n_qubits));
        }
        let mut amplitudes = vec![Complex64::ZERO; 1 << n_qubits];
        amplitudes[0] = Complex64::ONE;
        Ok(StateVector { n_qubits, amplitudes })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn apply_gate(&mut self, op: &GateOp) -> Result<()> {
        op.validate(self.n_qubits)?;
        let target_mask = 1usize << op.target;
        let mut ctrl_mask = 0usize;
        let mut ctrl_want = 0usize;
        for &(q, v) in &op.controls {
            ctrl_mask |= 1 << q;
            if v {
                ctrl_want |= 1 << q;
            }
        }
        let dim = self.amplitudes.len();
        for i in 0..dim {
            // visit each target pair once, from its low half
            if i & target_mask != 0 {
                continue;
            }
            if i & ctrl_mask != ctrl_want {
                continue;
            }
            let j = i | target_mask;
            let a = self.amplitudes[i];
            let b = self.amplitudes[j];
            let (na, nb) = match op.kind {
                GateKind::H => {
                    let s = std::f64::consts::FRAC_1_SQRT_2;
                    (s * (a + b), s * (a - b))
                }
                GateKind::X => (b, a),
                GateKind::Ry(phi) => {
                    let (s, c) = (phi / 2.0).sin_cos();
                    (c * a - s * b, s * a + c * b)
                }
            };
            self.amplitudes[i] = na;
            self.amplitudes[j] = nb;
        }
        Ok(())
    }

    pub fn apply_circuit(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.n_qubits != self.n_qubits {
            return Err(Error::WidthMismatch { circuit: circuit.n_qubits, state: self.n_qubits });
        }
        for op in &circuit.ops {
            self.apply_gate(op)?;
        }
        Ok(())
    }

    /// Probability that `qubit` measures to `value`.
    pub fn marginal_probability(&self, qubit: usize, value: bool) -> Result<f64> {
        if qubit >= self.n_qubits {
            return Err(Error::IndexOutOfRange { index: qubit, n_qubits: self.n_qubits });
        }
        let mask = 1usize << qubit;
        let want = if value { mask } else { 0 };
        let p = self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask == want)
            .map(|(_, c)| c.norm_sqr())
            .sum();
        Ok(p)
    }

    /// `p_i = |C_i|^2` for every basis state.
    pub fn basis_probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Multinomial draw of `shots` basis outcomes. ChaCha8 seeded per call;
    /// inverse-CDF over the cumulative probability array.
    pub fn sample_shots(&self, shots: u64, seed: u64) -> Result<Histogram> {
        if shots == 0 {
            return Err(Error::InvalidArgument("shots must be >= 1".into()));
        }
        let probs = self.basis_probabilities();
        let mut cdf = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for p in &probs {
            acc += p;
            cdf.push(acc);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts = vec![0u64; probs.len()];
        for _ in 0..shots {
            let u: f64 = rng.random();
            let idx = cdf.partition_point(|&c| c <= u).min(counts.len() - 1);
            counts[idx] += 1;
        }
        Ok(Histogram { n_qubits: self.n_qubits, counts })
    }
}

/// Shot counts per basis outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    pub n_qubits: usize,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Counts summed over every basis index whose bits at `qubits` spell the
    /// given value (qubits listed most-significant first).
    pub fn marginal_counts(&self, qubits: &[usize]) -> Vec<u64> {
        let mut out = vec![0u64; 1 << qubits.len()];
        for (i, &c) in self.counts.iter().enumerate() {
            let mut v = 0usize;
            for &q in qubits {
                v = (v << 1) | ((i >> q) & 1);
            }
            out[v] += c;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn new_state_is_all_zeros() {
        let s = StateVector::new(1).unwrap();
        assert_eq!(s.amplitudes()[0], Complex64::ONE);
        assert_eq!(s.amplitudes()[1], Complex64::ZERO);

        let s = StateVector::new(3).unwrap();
        assert_eq!(s.amplitudes().len(), 8);
        assert_eq!(s.amplitudes()[0], Complex64::ONE);
    }

    #[test]
    fn new_state_rejects_out_of_range() {
        assert!(matches!(StateVector::new(15), Err(Error::QubitCountOutOfRange(15))));
        assert!(matches!(StateVector::new(0), Err(Error::QubitCountOutOfRange(0))));
    }

    #[test]
    fn hadamard_on_zero() {
        let mut s = StateVector::new(1).unwrap();
        s.apply_gate(&GateOp::h(0)).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(s.amplitudes()[0].re, r, epsilon = 1e-15);
        assert_abs_diff_eq!(s.amplitudes()[1].re, r, epsilon = 1e-15);
    }

    #[test]
    fn ry_convention_gives_sin_squared() {
        // RY(2y)|0> must yield P(1) = sin^2(y)
        let mut s = StateVector::new(1).unwrap();
        s.apply_gate(&GateOp::ry(0, 2.0 * 0.785)).unwrap();
        let p1 = s.marginal_probability(0, true).unwrap();
        assert_abs_diff_eq!(p1, 0.785f64.sin().powi(2), epsilon = 1e-14);
        assert_abs_diff_eq!(p1, 0.49960, epsilon = 1e-5);
    }

    #[test]
    fn cnot_truth_table() {
        // |01> (q0=1) -- X on q1 controlled on q0=1 --> |11>
        let mut s = StateVector::new(2).unwrap();
        s.apply_gate(&GateOp::x(0)).unwrap();
        s.apply_gate(&GateOp::x(1).with_controls(&[(0, true)])).unwrap();
        let probs = s.basis_probabilities();
        assert_abs_diff_eq!(probs[0b11], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn empty_circuit_is_identity() {
        let mut s = StateVector::new(2).unwrap();
        s.apply_circuit(&Circuit::new(2)).unwrap();
        assert_eq!(s.amplitudes()[0], Complex64::ONE);
    }

    #[test]
    fn double_hadamard_is_identity() {
        let mut c = Circuit::new(1);
        c.push(GateOp::h(0));
        c.push(GateOp::h(0));
        let mut s = StateVector::new(1).unwrap();
        s.apply_circuit(&c).unwrap();
        assert_abs_diff_eq!(s.amplitudes()[0].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.amplitudes()[1].norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn bell_state_preparation() {
        let mut c = Circuit::new(2);
        c.push(GateOp::h(0));
        c.push(GateOp::x(1).with_controls(&[(0, true)]));
        let mut s = StateVector::new(2).unwrap();
        s.apply_circuit(&c).unwrap();
        let probs = s.basis_probabilities();
        assert_abs_diff_eq!(probs[0b00], 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(probs[0b11], 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(s.marginal_probability(1, true).unwrap(), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn width_mismatch_is_rejected() {
        let mut s = StateVector::new(2).unwrap();
        assert!(matches!(
            s.apply_circuit(&Circuit::new(3)),
            Err(Error::WidthMismatch { .. })
        ));
    }

    #[test]
    fn marginal_rejects_bad_index() {
        let s = StateVector::new(2).unwrap();
        assert!(s.marginal_probability(2, true).is_err());
    }

    #[test]
    fn uniform_superposition_probabilities() {
        let mut s = StateVector::new(3).unwrap();
        for q in 0..3 {
            s.apply_gate(&GateOp::h(q)).unwrap();
        }
        for p in s.basis_probabilities() {
            assert_abs_diff_eq!(p, 0.125, epsilon = 1e-14);
        }
    }

    #[test]
    fn deterministic_state_samples_one_bucket() {
        let s = StateVector::new(1).unwrap();
        let h = s.sample_shots(100, 7).unwrap();
        assert_eq!(h.counts, vec![100, 0]);
    }

    #[test]
    fn zero_shots_is_an_error() {
        let s = StateVector::new(1).unwrap();
        assert!(s.sample_shots(0, 7).is_err());
    }

    #[test]
    fn seeded_sampling_is_reproducible() {
        let mut s = StateVector::new(3).unwrap();
        for q in 0..3 {
            s.apply_gate(&GateOp::h(q)).unwrap();
        }
        let h1 = s.sample_shots(1600, 42).unwrap();
        let h2 = s.sample_shots(1600, 42).unwrap();
        assert_eq!(h1, h2);
        assert_eq!(h1.total(), 1600);
        // each bucket within 5 sigma of 200
        let sigma = (1600.0_f64 * (1.0 / 8.0) * (7.0 / 8.0)).sqrt();
        for &c in &h1.counts {
            assert!((c as f64 - 200.0).abs() < 5.0 * sigma, "bucket {c} too far from 200");
        }
    }

    #[test]
    fn negative_control_fires_on_zero() {
        let mut s = StateVector::new(2).unwrap();
        s.apply_gate(&GateOp::x(1).with_controls(&[(0, false)])).unwrap();
        let probs = s.basis_probabilities();
        assert_abs_diff_eq!(probs[0b10], 1.0, epsilon = 1e-15);
    }
}
