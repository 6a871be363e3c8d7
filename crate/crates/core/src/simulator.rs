//! Dense statevector engine: gate application, ancilla post-selection,
//! measurement (optionally noisy), and direct state initialization.
//!
//! Qubit 0 is the most significant bit of the basis index throughout.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::encoding::{Gate, GateKind};
use crate::error::{Error, Result};
use crate::numerics::cvec_norm;

/// Dense amplitudes over `qubits` qubits.
#[derive(Debug, Clone)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
    qubits: usize,
}

impl StateVector {
    /// Basis state |index> over `qubits` qubits.
    pub fn basis(qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize << qubits;
        if index >= dim {
            return Err(Error::InvalidConfig(format!(
                "basis index {index} exceeds {qubits}-qubit register"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self { amplitudes, qubits })
    }

    /// Direct amplitude initialization from a unit real vector of
    /// length 2^n. This stands in for the classical re-encoding step of
    /// the dynamic protocol; no state-preparation circuit is synthesized.
    pub fn prepare_state(vector: &[f64]) -> Result<Self> {
        let dim = vector.len();
        if !dim.is_power_of_two() || dim < 2 {
            return Err(Error::NotPowerOfTwo { dim });
        }
        let norm = crate::numerics::vec_norm(vector);
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::NotUnit { norm });
        }
        Ok(Self {
            amplitudes: vector.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            qubits: dim.trailing_zeros() as usize,
        })
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if !dim.is_power_of_two() || dim < 2 {
            return Err(Error::NotPowerOfTwo { dim });
        }
        Ok(Self { amplitudes, qubits: dim.trailing_zeros() as usize })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn qubit_count(&self) -> usize {
        self.qubits
    }

    pub fn norm(&self) -> f64 {
        cvec_norm(&self.amplitudes)
    }

    fn bit_mask(&self, qubit: usize) -> usize {
        1usize << (self.qubits - 1 - qubit)
    }

    fn controls_pass(&self, index: usize, controls: &[(usize, bool)]) -> bool {
        controls
            .iter()
            .all(|&(q, bit)| (index & self.bit_mask(q) != 0) == bit)
    }

    fn apply_single(&mut self, target: usize, u: [[Complex64; 2]; 2], controls: &[(usize, bool)]) {
        let mask = self.bit_mask(target);
        for idx in 0..self.amplitudes.len() {
            if idx & mask != 0 {
                continue;
            }
            if !self.controls_pass(idx, controls) {
                continue;
            }
            let a0 = self.amplitudes[idx];
            let a1 = self.amplitudes[idx | mask];
            self.amplitudes[idx] = u[0][0] * a0 + u[0][1] * a1;
            self.amplitudes[idx | mask] = u[1][0] * a0 + u[1][1] * a1;
        }
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.qubits)?;
        let c = |x: f64| Complex64::new(x, 0.0);
        match gate.kind {
            GateKind::Hadamard => {
                let h = std::f64::consts::FRAC_1_SQRT_2;
                self.apply_single(gate.target, [[c(h), c(h)], [c(h), c(-h)]], &gate.controls);
            }
            GateKind::RotY(theta) => {
                let (sin, cos) = (theta / 2.0).sin_cos();
                self.apply_single(
                    gate.target,
                    [[c(cos), c(-sin)], [c(sin), c(cos)]],
                    &gate.controls,
                );
            }
            GateKind::PauliX => {
                self.apply_single(
                    gate.target,
                    [[c(0.0), c(1.0)], [c(1.0), c(0.0)]],
                    &gate.controls,
                );
            }
            GateKind::Swap(a, b) => {
                let ma = self.bit_mask(a);
                let mb = self.bit_mask(b);
                for idx in 0..self.amplitudes.len() {
                    // visit each index pair once: a-bit set, b-bit clear
                    if idx & ma == 0 || idx & mb != 0 {
                        continue;
                    }
                    if !self.controls_pass(idx, &gate.controls) {
                        continue;
                    }
                    let partner = (idx & !ma) | mb;
                    self.amplitudes.swap(idx, partner);
                }
            }
        }
        Ok(())
    }

    pub fn run_circuit(&mut self, gates: &[Gate]) -> Result<()> {
        for gate in gates {
            self.apply_gate(gate)?;
        }
        Ok(())
    }

    /// Project the listed ancilla qubits onto |0...0>, renormalize the
    /// survivor over the remaining qubits, and return the success
    /// probability (the pre-normalization squared norm).
    pub fn postselect_ancillas(&self, ancillas: &[usize]) -> Result<(StateVector, f64)> {
        if ancillas.is_empty() {
            return Err(Error::InvalidConfig("post-selection needs at least one ancilla".into()));
        }
        for &q in ancillas {
            if q >= self.qubits {
                return Err(Error::QubitOutOfRange { index: q, qubits: self.qubits });
            }
        }
        let keep: Vec<usize> = (0..self.qubits).filter(|q| !ancillas.contains(q)).collect();
        if keep.is_empty() {
            return Err(Error::InvalidConfig("post-selection would consume every qubit".into()));
        }
        let ancilla_mask: usize = ancillas.iter().map(|&q| self.bit_mask(q)).sum();
        let mut reduced = vec![Complex64::new(0.0, 0.0); 1 << keep.len()];
        let mut probability = 0.0;
        for (idx, &amp) in self.amplitudes.iter().enumerate() {
            if idx & ancilla_mask != 0 {
                continue;
            }
            let mut out = 0usize;
            for &q in &keep {
                out = (out << 1) | usize::from(idx & self.bit_mask(q) != 0);
            }
            reduced[out] = amp;
            probability += amp.norm_sqr();
        }
        if probability < 1e-14 {
            return Err(Error::VanishingPostSelection { step: 0, probability });
        }
        let scale = 1.0 / probability.sqrt();
        for a in reduced.iter_mut() {
            *a *= scale;
        }
        Ok((
            StateVector { amplitudes: reduced, qubits: keep.len() },
            probability,
        ))
    }
}

/// Noise channel applied at measurement (or per segment for the
/// depolarizing model).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModel {
    None,
    MeasurementGaussian,
    Depolarizing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub model: NoiseModel,
    /// Gaussian std sigma or depolarizing probability p.
    pub strength: f64,
    /// None = exact probabilities; Some(k) = k multinomial shots.
    pub shots: Option<u64>,
}

impl NoiseConfig {
    pub fn noiseless() -> Self {
        Self { model: NoiseModel::None, strength: 0.0, shots: None }
    }

    pub fn measurement_gaussian(sigma: f64) -> Self {
        Self { model: NoiseModel::MeasurementGaussian, strength: sigma, shots: None }
    }

    pub fn depolarizing(p: f64) -> Self {
        Self { model: NoiseModel::Depolarizing, strength: p, shots: None }
    }

    pub fn validate(&self) -> Result<()> {
        if self.strength < 0.0 || !self.strength.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "noise strength {} must be finite and >= 0",
                self.strength
            )));
        }
        if self.model == NoiseModel::Depolarizing && self.strength > 1.0 {
            return Err(Error::InvalidConfig(format!(
                "depolarizing probability {} exceeds 1",
                self.strength
            )));
        }
        if self.shots == Some(0) {
            return Err(Error::InvalidConfig("shot count must be >= 1".into()));
        }
        Ok(())
    }
}

/// Measured basis probabilities under the configured noise.
///
/// Exact mode returns the Born-rule probabilities; the Gaussian model
/// perturbs each probability by independent zero-mean noise (clamped at
/// zero, renormalized); finite shots replace the exact values by
/// multinomial sample frequencies.
pub fn measure_probabilities<R: Rng>(
    state: &StateVector,
    noise: &NoiseConfig,
    rng: &mut R,
) -> Result<Vec<f64>> {
    noise.validate()?;
    let norm = state.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotUnit { norm });
    }
    let mut probs: Vec<f64> = state.amplitudes.iter().map(|a| a.norm_sqr()).collect();
    perturb_probabilities(&mut probs, noise, rng)?;
    Ok(probs)
}

/// Applies the configured noise to an already-computed probability
/// vector: Gaussian perturbation (clamped, renormalized) and/or finite
/// multinomial shots. Shared by the statevector path and the dense
/// engine so both consume the random stream identically.
pub fn perturb_probabilities<R: Rng>(
    probs: &mut Vec<f64>,
    noise: &NoiseConfig,
    rng: &mut R,
) -> Result<()> {
    noise.validate()?;
    if noise.model == NoiseModel::MeasurementGaussian && noise.strength > 0.0 {
        let gaussian = Normal::new(0.0, noise.strength)
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        for p in probs.iter_mut() {
            *p = (*p + gaussian.sample(rng)).max(0.0);
        }
        let total: f64 = probs.iter().sum();
        if total < 1e-14 {
            return Err(Error::ZeroVector { norm: total });
        }
        for p in probs.iter_mut() {
            *p /= total;
        }
    }
    if let Some(shots) = noise.shots {
        let mut counts = vec![0u64; probs.len()];
        for _ in 0..shots {
            let mut draw: f64 = rng.gen();
            let mut picked = probs.len() - 1;
            for (i, &p) in probs.iter().enumerate() {
                if draw < p {
                    picked = i;
                    break;
                }
                draw -= p;
            }
            counts[picked] += 1;
        }
        *probs = counts.iter().map(|&c| c as f64 / shots as f64).collect();
    }
    Ok(())
}

/// One stochastic trajectory of a depolarizing channel: with probability
/// p, a uniformly random Pauli on a uniformly random qubit; otherwise
/// identity.
pub fn apply_depolarizing<R: Rng>(state: &mut StateVector, p: f64, rng: &mut R) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidConfig(format!("depolarizing probability {p} outside [0,1]")));
    }
    if rng.gen::<f64>() >= p {
        return Ok(());
    }
    let qubit = rng.gen_range(0..state.qubits);
    let mask = state.bit_mask(qubit);
    match rng.gen_range(0..3) {
        0 => state.apply_gate(&Gate::pauli_x(qubit))?,
        1 => {
            // Pauli Y
            for idx in 0..state.amplitudes.len() {
                if idx & mask != 0 {
                    continue;
                }
                let a0 = state.amplitudes[idx];
                let a1 = state.amplitudes[idx | mask];
                state.amplitudes[idx] = Complex64::new(0.0, -1.0) * a1;
                state.amplitudes[idx | mask] = Complex64::new(0.0, 1.0) * a0;
            }
        }
        _ => {
            // Pauli Z
            for idx in 0..state.amplitudes.len() {
                if idx & mask != 0 {
                    state.amplitudes[idx] = -state.amplitudes[idx];
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::{assemble_ua, Gate};
    use crate::numerics::RealMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn hadamard_on_zero() {
        let mut s = StateVector::basis(1, 0).unwrap();
        s.apply_gate(&Gate::hadamard(0)).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amplitudes()[0].re - h).abs() < 1e-15);
        assert!((s.amplitudes()[1].re - h).abs() < 1e-15);
    }

    #[test]
    fn rot_y_pi_flips() {
        let mut s = StateVector::basis(1, 0).unwrap();
        s.apply_gate(&Gate::rot_y(0, std::f64::consts::PI)).unwrap();
        assert!(s.amplitudes()[0].norm() < 1e-15);
        assert!((s.amplitudes()[1].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pauli_x_and_controls() {
        // controlled X fires only when the control bit matches
        let mut s = StateVector::basis(2, 0b10).unwrap();
        s.apply_gate(&Gate::pauli_x(1).with_controls(vec![(0, true)])).unwrap();
        assert!((s.amplitudes()[0b11].re - 1.0).abs() < 1e-15);
        let mut s2 = StateVector::basis(2, 0b00).unwrap();
        s2.apply_gate(&Gate::pauli_x(1).with_controls(vec![(0, true)])).unwrap();
        assert!((s2.amplitudes()[0b00].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn norm_drift_over_many_gates() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let mut s = StateVector::basis(6, 0).unwrap();
        for _ in 0..500 {
            let target = rng.gen_range(0..6);
            let gate = match rng.gen_range(0..4) {
                0 => Gate::hadamard(target),
                1 => Gate::rot_y(target, rng.gen_range(-3.0..3.0)),
                2 => Gate::pauli_x(target),
                _ => {
                    let other = (target + 1 + rng.gen_range(0..5)) % 6;
                    Gate::swap(target, other)
                }
            };
            s.apply_gate(&gate).unwrap();
        }
        assert!((s.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn out_of_range_gate_rejected() {
        let mut s = StateVector::basis(2, 0).unwrap();
        assert!(matches!(
            s.apply_gate(&Gate::hadamard(2)),
            Err(Error::QubitOutOfRange { .. })
        ));
    }

    #[test]
    fn prepare_state_round_trip() {
        let v = [0.5, -0.5, 0.5, 0.5];
        let s = StateVector::prepare_state(&v).unwrap();
        assert_eq!(s.qubit_count(), 2);
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let probs = measure_probabilities(&s, &NoiseConfig::noiseless(), &mut rng).unwrap();
        for p in probs {
            assert!((p - 0.25).abs() < 1e-14);
        }
        assert!(StateVector::prepare_state(&[1.0, 1.0]).is_err());
        assert!(StateVector::prepare_state(&[1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn postselect_product_state() {
        // |0> (x) |phi> with ancilla first
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let amps = vec![
            Complex64::new(h, 0.0),
            Complex64::new(0.0, h),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ];
        let s = StateVector::from_amplitudes(amps).unwrap();
        let (reduced, prob) = s.postselect_ancillas(&[0]).unwrap();
        assert!((prob - 1.0).abs() < 1e-14);
        assert!((reduced.amplitudes()[0].re - h).abs() < 1e-14);
        assert!((reduced.amplitudes()[1].im - h).abs() < 1e-14);
    }

    #[test]
    fn postselect_orthogonal_state_fails() {
        let s = StateVector::basis(2, 0b10).unwrap();
        assert!(matches!(
            s.postselect_ancillas(&[0]),
            Err(Error::VanishingPostSelection { .. })
        ));
    }

    #[test]
    fn encoding_postselect_applies_matrix() {
        // U on |0^m>|v> post-selected reproduces M v / |M v|
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let mut m = RealMatrix::zeros(4, 4);
        for i in 0..4 {
            for j in 0..4 {
                m[(i, j)] = rng.gen_range(-1.0..1.0);
            }
        }
        let op = assemble_ua(&m).unwrap();
        let mut v: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = crate::numerics::vec_norm(&v);
        v.iter_mut().for_each(|x| *x /= n);

        // embed |0^m>|v> in the full register
        let dim = 1 << op.qubit_count();
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        for (j, &x) in v.iter().enumerate() {
            amps[j] = Complex64::new(x, 0.0);
        }
        let mut state = StateVector::from_amplitudes(amps).unwrap();
        state.run_circuit(op.gates()).unwrap();
        let (reduced, prob) = state.postselect_ancillas(&op.ancilla_qubits()).unwrap();

        let mv = m.mul_vec(&v);
        let mv_norm = crate::numerics::vec_norm(&mv);
        assert!((prob - (op.alpha() * mv_norm).powi(2)).abs() < 1e-10);
        for i in 0..4 {
            assert!((reduced.amplitudes()[i].re - mv[i] / mv_norm).abs() < 1e-10);
            assert!(reduced.amplitudes()[i].im.abs() < 1e-12);
        }
    }

    #[test]
    fn born_rule_exact() {
        let s = StateVector::basis(1, 0).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let probs = measure_probabilities(&s, &NoiseConfig::noiseless(), &mut rng).unwrap();
        assert_eq!(probs, vec![1.0, 0.0]);

        let mut eq = StateVector::basis(1, 0).unwrap();
        eq.apply_gate(&Gate::hadamard(0)).unwrap();
        let probs = measure_probabilities(&eq, &NoiseConfig::noiseless(), &mut rng).unwrap();
        assert!((probs[0] - 0.5).abs() < 1e-14 && (probs[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn gaussian_noise_statistics() {
        let mut eq = StateVector::basis(1, 0).unwrap();
        eq.apply_gate(&Gate::hadamard(0)).unwrap();
        let sigma = 0.001;
        let cfg = NoiseConfig::measurement_gaussian(sigma);
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let reps = 10_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..reps {
            let p = measure_probabilities(&eq, &cfg, &mut rng).unwrap();
            sum += p[0];
            sum_sq += p[0] * p[0];
        }
        let mean = sum / reps as f64;
        let std = (sum_sq / reps as f64 - mean * mean).sqrt();
        assert!((mean - 0.5).abs() < 1e-4, "bias {}", mean - 0.5);
        // renormalization of two anticorrelated entries scales the
        // per-entry deviation by ~1/sqrt(2) relative to raw sigma
        assert!(std > 0.2 * sigma && std < 2.0 * sigma, "std {std}");
    }

    #[test]
    fn finite_shots_frequencies() {
        let mut eq = StateVector::basis(1, 0).unwrap();
        eq.apply_gate(&Gate::hadamard(0)).unwrap();
        let cfg = NoiseConfig { model: NoiseModel::None, strength: 0.0, shots: Some(100_000) };
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let probs = measure_probabilities(&eq, &cfg, &mut rng).unwrap();
        assert!((probs[0] + probs[1] - 1.0).abs() < 1e-12);
        assert!((probs[0] - 0.5).abs() < 0.01);
    }

    #[test]
    fn depolarizing_trivial_and_frequency() {
        let mut rng = ChaCha12Rng::seed_from_u64(6);
        // p = 0: identity always
        let mut s = StateVector::basis(2, 1).unwrap();
        apply_depolarizing(&mut s, 0.0, &mut rng).unwrap();
        assert!((s.amplitudes()[1].re - 1.0).abs() < 1e-15);

        // frequency test at p = 0.001
        let p = 0.001;
        let reps = 10_000;
        let mut changed = 0u32;
        for _ in 0..reps {
            let mut s = StateVector::basis(1, 0).unwrap();
            apply_depolarizing(&mut s, p, &mut rng).unwrap();
            // Z leaves |0> fixed up to phase, X and Y flip it
            if s.amplitudes()[0].norm() < 0.5 {
                changed += 1;
            }
        }
        let rate = changed as f64 / reps as f64;
        let expected = p * 2.0 / 3.0;
        let bound = 3.0 * (p / reps as f64).sqrt();
        assert!((rate - expected).abs() < bound, "flip rate {rate}");
    }

    #[test]
    fn noise_config_validation() {
        assert!(NoiseConfig::measurement_gaussian(-0.1).validate().is_err());
        assert!(NoiseConfig::depolarizing(1.5).validate().is_err());
        let bad_shots = NoiseConfig { model: NoiseModel::None, strength: 0.0, shots: Some(0) };
        assert!(bad_shots.validate().is_err());
        assert!(NoiseConfig::noiseless().validate().is_ok());
    }
}
