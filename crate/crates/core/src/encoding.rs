//! Block encoding of a bounded real matrix into a gate program.
//!
//! A 2^n x 2^n real matrix M with entries of magnitude at most 1 is
//! embedded into a (2n+1)-qubit unitary U whose top-left block equals
//! M / 2^n. Register layout (qubit 0 is the most significant bit):
//!   qubit 0          - rotation ancilla
//!   qubits 1..=n     - row-index register (part of the ancilla set)
//!   qubits n+1..=2n  - data register carrying the encoded vector
//! Post-selecting qubits 0..=n on |0...0> applies M / 2^n to the data
//! register.
//!
//! The construction is U = (H-layer on the row register) . (swap network
//! exchanging the two index registers) . O_A . (H-layer), where O_A is a
//! bank of multi-controlled y-rotations RotY(2 arccos m_ij) on the
//! ancilla, controlled on the index registers holding |i>|j>.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::numerics::{ComplexMatrix, RealMatrix};
use crate::simulator::StateVector;

/// Unitary applied by a single gate.
#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    Hadamard,
    /// RotY(theta) = [[cos t/2, -sin t/2], [sin t/2, cos t/2]].
    RotY(f64),
    PauliX,
    /// Exchange of two qubits; `target` holds the first of the pair.
    Swap(usize, usize),
}

/// A gate with an optional classical control pattern: every listed
/// (qubit, bit) pair must match for the gate to act.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub target: usize,
    pub controls: Vec<(usize, bool)>,
}

impl Gate {
    pub fn hadamard(target: usize) -> Self {
        Self { kind: GateKind::Hadamard, target, controls: Vec::new() }
    }

    pub fn rot_y(target: usize, angle: f64) -> Self {
        Self { kind: GateKind::RotY(angle), target, controls: Vec::new() }
    }

    pub fn pauli_x(target: usize) -> Self {
        Self { kind: GateKind::PauliX, target, controls: Vec::new() }
    }

    pub fn swap(a: usize, b: usize) -> Self {
        Self { kind: GateKind::Swap(a, b), target: a, controls: Vec::new() }
    }

    pub fn with_controls(mut self, controls: Vec<(usize, bool)>) -> Self {
        self.controls = controls;
        self
    }

    /// All qubit indices the gate touches (targets before controls).
    pub fn qubits(&self) -> Vec<usize> {
        let mut qs = match self.kind {
            GateKind::Swap(a, b) => vec![a, b],
            _ => vec![self.target],
        };
        qs.extend(self.controls.iter().map(|&(q, _)| q));
        qs
    }

    /// Checks finiteness of angles and distinctness of qubit indices.
    pub fn validate(&self, qubit_count: usize) -> Result<()> {
        if let GateKind::RotY(angle) = self.kind {
            if !angle.is_finite() {
                return Err(Error::InvalidConfig(format!("non-finite rotation angle {angle}")));
            }
        }
        let qs = self.qubits();
        for (pos, &q) in qs.iter().enumerate() {
            if q >= qubit_count {
                return Err(Error::QubitOutOfRange { index: q, qubits: qubit_count });
            }
            if qs[..pos].contains(&q) {
                return Err(Error::InvalidConfig(format!("duplicate qubit index {q} in gate")));
            }
        }
        Ok(())
    }

    fn dump_line(&self) -> String {
        let mut line = String::new();
        match self.kind {
            GateKind::Hadamard => {
                let _ = write!(line, "H {}", self.target);
            }
            GateKind::RotY(_) => {
                let _ = write!(line, "RY {}", self.target);
            }
            GateKind::PauliX => {
                let _ = write!(line, "X {}", self.target);
            }
            GateKind::Swap(a, b) => {
                let _ = write!(line, "SWAP {} {}", a, b);
            }
        }
        for &(q, bit) in &self.controls {
            let _ = write!(line, " c{}={}", q, u8::from(bit));
        }
        if let GateKind::RotY(angle) = self.kind {
            let _ = write!(line, " {:.16e}", angle);
        }
        line
    }
}

/// Gate program realizing a unitary whose top-left block is
/// `alpha` times the encoded matrix.
#[derive(Debug, Clone)]
pub struct BlockEncodedOperator {
    n: usize,
    gates: Vec<Gate>,
    alpha: f64,
}

impl BlockEncodedOperator {
    /// Qubits of the encoded matrix (the matrix is 2^n x 2^n).
    pub fn n(&self) -> usize {
        self.n
    }

    /// Total width of the circuit: 2n + 1.
    pub fn qubit_count(&self) -> usize {
        2 * self.n + 1
    }

    /// Ancilla qubits (rotation ancilla + row register), post-selected on 0.
    pub fn ancilla_qubits(&self) -> Vec<usize> {
        (0..=self.n).collect()
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// Subnormalization: the encoded block is alpha * M with alpha = 1/2^n.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Debug dump: one gate per line, `KIND target [controls...] [angle]`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for g in &self.gates {
            out.push_str(&g.dump_line());
            out.push('\n');
        }
        out
    }
}

fn require_power_of_two_dim(m: &RealMatrix) -> Result<usize> {
    let dim = m.rows();
    if m.cols() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: m.cols() });
    }
    if !dim.is_power_of_two() || dim < 2 {
        return Err(Error::NotPowerOfTwo { dim });
    }
    Ok(dim.trailing_zeros() as usize)
}

fn check_entries(m: &RealMatrix) -> Result<()> {
    let dim = m.rows();
    for i in 0..dim {
        for j in 0..dim {
            if m[(i, j)].abs() > 1.0 + 1e-12 {
                return Err(Error::EntryOutOfRange { row: i, col: j, value: m[(i, j)] });
            }
        }
    }
    Ok(())
}

/// Control pattern pinning an n-qubit register (starting at `first`) to
/// the binary expansion of `value`, most significant bit first.
fn register_controls(first: usize, n: usize, value: usize) -> Vec<(usize, bool)> {
    (0..n)
        .map(|k| (first + k, (value >> (n - 1 - k)) & 1 == 1))
        .collect()
}

/// Entry oracle: for each (i, j), a multi-controlled
/// RotY(2 arccos m_ij) on the ancilla, conditioned on the index
/// registers holding |i>|j>.
pub fn build_oracle_oa(m: &RealMatrix) -> Result<Vec<Gate>> {
    let n = require_power_of_two_dim(m)?;
    check_entries(m)?;
    let dim = m.rows();
    let mut gates = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            let entry = m[(i, j)].clamp(-1.0, 1.0);
            let angle = 2.0 * entry.acos();
            let mut controls = register_controls(1, n, i);
            controls.extend(register_controls(n + 1, n, j));
            gates.push(Gate::rot_y(0, angle).with_controls(controls));
        }
    }
    Ok(gates)
}

/// Index-swap oracle: n pairwise swaps exchanging the two registers,
/// |i>|j> -> |j>|i>.
pub fn build_oracle_ob(n: usize) -> Result<Vec<Gate>> {
    if n == 0 {
        return Err(Error::InvalidConfig("swap network needs n >= 1".into()));
    }
    Ok((0..n).map(|k| Gate::swap(1 + k, n + 1 + k)).collect())
}

/// Assemble the full encoding unitary
/// U = H-layer . swap-network . O_A . H-layer.
pub fn assemble_ua(m: &RealMatrix) -> Result<BlockEncodedOperator> {
    let n = require_power_of_two_dim(m)?;
    let mut gates: Vec<Gate> = (1..=n).map(Gate::hadamard).collect();
    gates.extend(build_oracle_oa(m)?);
    gates.extend(build_oracle_ob(n)?);
    gates.extend((1..=n).map(Gate::hadamard));
    let op = BlockEncodedOperator { n, gates, alpha: 1.0 / (1 << n) as f64 };
    for g in &op.gates {
        g.validate(op.qubit_count())?;
    }
    Ok(op)
}

/// Read off the encoded block <0...0, i| U |0...0, j> by simulating
/// basis inputs.
pub fn extract_encoded_block(op: &BlockEncodedOperator) -> Result<ComplexMatrix> {
    let dim = 1 << op.n;
    let mut block = ComplexMatrix::zeros(dim, dim);
    for j in 0..dim {
        // ancillas |0...0>, data register |j>
        let mut state = StateVector::basis(op.qubit_count(), j)?;
        state.run_circuit(op.gates())?;
        for i in 0..dim {
            block[(i, j)] = state.amplitudes()[i];
        }
    }
    Ok(block)
}

/// Full dense unitary of the gate program (columns by basis simulation).
pub fn dense_unitary(op: &BlockEncodedOperator) -> Result<ComplexMatrix> {
    let dim = 1 << op.qubit_count();
    let mut u = ComplexMatrix::zeros(dim, dim);
    for j in 0..dim {
        let mut state = StateVector::basis(op.qubit_count(), j)?;
        state.run_circuit(op.gates())?;
        for i in 0..dim {
            u[(i, j)] = state.amplitudes()[i];
        }
    }
    Ok(u)
}

/// Real per-step operator R = [[I, dt B], [-dt C, I]] for a Hamiltonian
/// with block form [[0, B], [C, 0]]. Acting on the real coordinates
/// (u, v), R reproduces the complex action of I - iH dt on (u, i v).
pub fn step_operator_matrix(h: &ComplexMatrix, dt: f64) -> Result<RealMatrix> {
    let dim = h.rows();
    if h.cols() != dim || dim % 2 != 0 {
        return Err(Error::DimensionMismatch { expected: dim, got: h.cols() });
    }
    let n = dim / 2;
    // diagonal blocks (and any imaginary parts) must vanish
    let mut max_entry = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            max_entry = max_entry.max(h[(i, j)].norm());
            max_entry = max_entry.max(h[(n + i, n + j)].norm());
            max_entry = max_entry.max(h[(i, n + j)].im.abs());
            max_entry = max_entry.max(h[(n + i, j)].im.abs());
        }
    }
    if max_entry > 1e-12 {
        return Err(Error::NonzeroDiagonalBlock { max_entry });
    }
    let mut r = RealMatrix::identity(dim);
    for i in 0..n {
        for j in 0..n {
            r[(i, n + j)] = dt * h[(i, n + j)].re;
            r[(n + i, j)] = -dt * h[(n + i, j)].re;
        }
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{
        first_order_step, inverse_real_coordinates, real_coordinates,
    };
    use crate::hamiltonian::{interpolate, HamiltonianPair};
    use crate::problem::generate_instance;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn random_bounded(dim: usize, seed: u64) -> RealMatrix {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut m = RealMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = rng.gen_range(-1.0..1.0);
            }
        }
        m
    }

    #[test]
    fn oracle_oa_angles() {
        // entry 1 -> RY(0); entry 0.5 -> RY(2 pi/3); entry 0 -> RY(pi)
        let m = RealMatrix::from_vec(2, 2, vec![1.0, 0.5, 0.0, -1.0]).unwrap();
        let gates = build_oracle_oa(&m).unwrap();
        assert_eq!(gates.len(), 4);
        let angle = |g: &Gate| match g.kind {
            GateKind::RotY(a) => a,
            _ => panic!("expected rotation"),
        };
        assert!(angle(&gates[0]).abs() < 1e-15);
        assert!((angle(&gates[1]) - 2.0 * std::f64::consts::FRAC_PI_3).abs() < 1e-15);
        assert!((angle(&gates[2]) - std::f64::consts::PI).abs() < 1e-15);
        assert!((angle(&gates[3]) - 2.0 * std::f64::consts::PI).abs() < 1e-15);
        // controls pin both 1-qubit registers
        assert_eq!(gates[1].controls, vec![(1, false), (2, true)]);
    }

    #[test]
    fn oracle_oa_rejects_large_entry() {
        let m = RealMatrix::from_vec(2, 2, vec![1.5, 0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            build_oracle_oa(&m),
            Err(Error::EntryOutOfRange { row: 0, col: 0, .. })
        ));
    }

    #[test]
    fn oracle_ob_swaps_registers() {
        let gates = build_oracle_ob(2).unwrap();
        assert_eq!(gates.len(), 2);
        assert_eq!(gates[0].kind, GateKind::Swap(1, 3));
        assert_eq!(gates[1].kind, GateKind::Swap(2, 4));

        // |i>|j> -> |j>|i> on the 5-qubit register (ancilla untouched):
        // i=2, j=3 -> index bits a=0, i=10, j=11
        let idx = 0b0_10_11;
        let mut state = StateVector::basis(5, idx).unwrap();
        state.run_circuit(&gates).unwrap();
        let expect = 0b0_11_10;
        for (k, amp) in state.amplitudes().iter().enumerate() {
            let want = if k == expect { 1.0 } else { 0.0 };
            assert!((amp.re - want).abs() < 1e-15 && amp.im.abs() < 1e-15);
        }

        // involution
        let mut state2 = StateVector::basis(5, idx).unwrap();
        state2.run_circuit(&gates).unwrap();
        state2.run_circuit(&gates).unwrap();
        assert!((state2.amplitudes()[idx].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn identity_encodes_half_identity() {
        let op = assemble_ua(&RealMatrix::identity(2)).unwrap();
        assert!((op.alpha() - 0.5).abs() < 1e-15);
        let block = extract_encoded_block(&op).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 0.5 } else { 0.0 };
                assert!((block[(i, j)].re - want).abs() < 1e-10);
                assert!(block[(i, j)].im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_matrix_encodes_zero_block() {
        let op = assemble_ua(&RealMatrix::zeros(2, 2)).unwrap();
        let block = extract_encoded_block(&op).unwrap();
        assert!(block.max_abs() < 1e-10);
    }

    #[test]
    fn random_round_trips_n1_n2() {
        for n in [1usize, 2] {
            let dim = 1 << n;
            for seed in 0..5u64 {
                let m = random_bounded(dim, 100 + seed);
                let op = assemble_ua(&m).unwrap();
                let block = extract_encoded_block(&op).unwrap();
                for i in 0..dim {
                    for j in 0..dim {
                        let want = m[(i, j)] * op.alpha();
                        assert!(
                            (block[(i, j)].re - want).abs() < 1e-10
                                && block[(i, j)].im.abs() < 1e-12,
                            "n={n} seed={seed} entry ({i},{j})"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn assembled_operator_is_unitary() {
        let m = random_bounded(4, 7);
        let op = assemble_ua(&m).unwrap();
        let u = dense_unitary(&op).unwrap();
        let gram = u.adjoint().mul(&u);
        let defect = gram.sub(&ComplexMatrix::identity(u.rows())).max_abs();
        assert!(defect < 1e-10, "unitarity defect {defect}");
    }

    #[test]
    fn gate_count_formula() {
        for n in [1usize, 2, 3] {
            let dim = 1 << n;
            let op = assemble_ua(&random_bounded(dim, 50 + n as u64)).unwrap();
            let rotations = op
                .gates()
                .iter()
                .filter(|g| matches!(g.kind, GateKind::RotY(_)))
                .count();
            let swaps = op
                .gates()
                .iter()
                .filter(|g| matches!(g.kind, GateKind::Swap(_, _)))
                .count();
            let hadamards = op
                .gates()
                .iter()
                .filter(|g| matches!(g.kind, GateKind::Hadamard))
                .count();
            assert_eq!(rotations, dim * dim);
            assert_eq!(swaps, n);
            assert_eq!(hadamards, 2 * n);
            assert_eq!(op.gates().len(), dim * dim + 3 * n);
        }
    }

    #[test]
    fn step_operator_trivial_cases() {
        let h = ComplexMatrix::zeros(4, 4);
        let r = step_operator_matrix(&h, 0.1).unwrap();
        assert_eq!(r.entries(), RealMatrix::identity(4).entries());

        let inst = generate_instance(2, 10.0, 3).unwrap();
        let pair = HamiltonianPair::from_instance(&inst).unwrap();
        let hk = interpolate(&pair, 0.6).unwrap();
        let r0 = step_operator_matrix(&hk, 0.0).unwrap();
        assert_eq!(r0.entries(), RealMatrix::identity(4).entries());
    }

    #[test]
    fn step_operator_rejects_diagonal_blocks() {
        let mut h = ComplexMatrix::zeros(4, 4);
        h[(0, 0)] = Complex64::new(0.5, 0.0);
        assert!(matches!(
            step_operator_matrix(&h, 0.1),
            Err(Error::NonzeroDiagonalBlock { .. })
        ));
    }

    #[test]
    fn step_operator_matches_first_order_oracle() {
        let inst = generate_instance(4, 20.0, 9).unwrap();
        let pair = HamiltonianPair::from_instance(&inst).unwrap();
        let h = interpolate(&pair, 0.3).unwrap();
        let dt = 0.1;
        let r = step_operator_matrix(&h, dt).unwrap();
        let n = inst.dim();

        let mut rng = ChaCha12Rng::seed_from_u64(77);
        let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut uv = u.clone();
        uv.extend_from_slice(&v);
        let out = r.mul_vec(&uv);
        let via_real = inverse_real_coordinates(&out[..n], &out[n..], 1).unwrap();

        let complex_in = inverse_real_coordinates(&u, &v, 0).unwrap();
        let via_complex = first_order_step(&complex_in, &h, dt).unwrap();
        let (uc, vc) = real_coordinates(&via_complex).unwrap();
        let (ur, vr) = real_coordinates(&via_real).unwrap();
        for i in 0..n {
            assert!((uc[i] - ur[i]).abs() < 1e-12);
            assert!((vc[i] - vr[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn step_operator_entries_bounded_for_encoding() {
        // with |A| = 1 and dt <= 0.5 every entry of R fits the oracle
        let inst = generate_instance(4, 50.0, 13).unwrap();
        let pair = HamiltonianPair::from_instance(&inst).unwrap();
        for &s in &[0.0, 0.5, 1.0] {
            let h = interpolate(&pair, s).unwrap();
            let r = step_operator_matrix(&h, 0.5).unwrap();
            assert!(r.max_abs() <= 1.0 + 1e-12);
            assert!(build_oracle_oa(&r).is_ok());
        }
    }

    #[test]
    fn encoded_step_operator_round_trip() {
        let inst = generate_instance(2, 10.0, 21).unwrap();
        let pair = HamiltonianPair::from_instance(&inst).unwrap();
        let h = interpolate(&pair, 0.5).unwrap();
        let r = step_operator_matrix(&h, 0.2).unwrap();
        let op = assemble_ua(&r).unwrap();
        let block = extract_encoded_block(&op).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert!((block[(i, j)].re - r[(i, j)] * op.alpha()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn gate_validation() {
        assert!(Gate::hadamard(5).validate(5).is_err());
        assert!(Gate::swap(1, 1).validate(3).is_err());
        assert!(Gate::rot_y(0, f64::NAN).validate(3).is_err());
        assert!(Gate::rot_y(0, 1.0)
            .with_controls(vec![(0, true)])
            .validate(3)
            .is_err());
        assert!(Gate::rot_y(0, 1.0)
            .with_controls(vec![(1, true), (2, false)])
            .validate(3)
            .is_ok());
    }

    #[test]
    fn dump_format() {
        let m = RealMatrix::identity(2);
        let op = assemble_ua(&m).unwrap();
        let dump = op.dump();
        let lines: Vec<&str> = dump.lines().collect();
        assert_eq!(lines.len(), op.gates().len());
        assert_eq!(lines[0], "H 1");
        assert!(lines[1].starts_with("RY 0 c1=0 c2=0 "));
        assert!(lines.iter().any(|l| l.starts_with("SWAP 1 2")));
    }
}
