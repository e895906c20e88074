//! Dense statevector simulator.
//!
//! Amplitude index bit `k` is qubit `k` (qubit 0 least significant). Gates
//! update amplitudes in place by striding over index pairs; no gate matrix
//! is ever materialized.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::pauli::{qwc_group, Pauli, PauliString, PauliSum, PauliTerm};
use crate::{Error, Result};

/// Largest register [`run_circuit`] will allocate.
pub const MAX_SIM_QUBITS: usize = 24;

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    pub n_qubits: usize,
    pub amplitudes: Vec<Complex64>,
}

impl Statevector {
    /// `|0…0⟩`.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis_state(n_qubits, 0)
    }

    pub fn basis_state(n_qubits: usize, index: usize) -> Result<Self> {
        if n_qubits > MAX_SIM_QUBITS {
            return Err(Error::Resource(format!(
                "{n_qubits} qubits exceeds the {MAX_SIM_QUBITS}-qubit simulator limit"
            )));
        }
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::Usage(format!("basis index {index} out of range for {n_qubits} qubits")));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amplitudes })
    }

    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &Statevector) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    #[inline]
    fn for_pairs(&mut self, qubit: usize, mut f: impl FnMut(&mut Complex64, &mut Complex64)) {
        let stride = 1usize << qubit;
        let dim = self.amplitudes.len();
        let mut block = 0;
        while block < dim {
            let (lo, hi) = self.amplitudes[block..block + 2 * stride].split_at_mut(stride);
            for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                f(a0, a1);
            }
            block += 2 * stride;
        }
    }

    pub fn apply_x(&mut self, q: usize) {
        self.for_pairs(q, std::mem::swap);
    }

    /// `RY(θ) = [[cos θ/2, −sin θ/2], [sin θ/2, cos θ/2]]`.
    pub fn apply_ry(&mut self, q: usize, theta: f64) {
        let (s, c) = (0.5 * theta).sin_cos();
        self.for_pairs(q, |a0, a1| {
            let (x0, x1) = (*a0, *a1);
            *a0 = x0 * c - x1 * s;
            *a1 = x0 * s + x1 * c;
        });
    }

    /// `RZ(θ) = diag(e^{−iθ/2}, e^{iθ/2})`.
    pub fn apply_rz(&mut self, q: usize, theta: f64) {
        let lo = Complex64::from_polar(1.0, -0.5 * theta);
        let hi = lo.conj();
        self.for_pairs(q, |a0, a1| {
            *a0 *= lo;
            *a1 *= hi;
        });
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) {
        let (c, t) = (1usize << control, 1usize << target);
        for i in 0..self.amplitudes.len() {
            if i & c != 0 && i & t == 0 {
                self.amplitudes.swap(i, i | t);
            }
        }
    }

    pub fn apply_cz(&mut self, a: usize, b: usize) {
        let mask = (1usize << a) | (1usize << b);
        for (i, amp) in self.amplitudes.iter_mut().enumerate() {
            if i & mask == mask {
                *amp = -*amp;
            }
        }
    }

    /// `⟨ψ|P|ψ⟩` for a single Pauli string.
    pub fn pauli_expectation(&self, p: &PauliString) -> Complex64 {
        if p.is_identity() {
            return Complex64::new(1.0, 0.0);
        }
        if p.x == 0 {
            let z = p.z as usize;
            let v: f64 = self
                .amplitudes
                .iter()
                .enumerate()
                .map(|(i, a)| if (i & z).count_ones().is_multiple_of(2) { a.norm_sqr() } else { -a.norm_sqr() })
                .sum();
            return Complex64::new(v, 0.0);
        }
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let (j, phase) = p.apply_to_basis(i);
                self.amplitudes[j].conj() * phase * a
            })
            .sum()
    }
}

/// Rotation angle: a constant or `scale · θ[slot]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Angle {
    Fixed(f64),
    Param { slot: usize, scale: f64 },
}

impl Angle {
    pub fn param(slot: usize) -> Self {
        Angle::Param { slot, scale: 1.0 }
    }

    fn value(&self, theta: &[f64]) -> f64 {
        match *self {
            Angle::Fixed(v) => v,
            Angle::Param { slot, scale } => scale * theta[slot],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    X(usize),
    Ry(usize, Angle),
    Rz(usize, Angle),
    Cnot { control: usize, target: usize },
    Cz(usize, usize),
}

impl Gate {
    fn qubits(&self) -> [Option<usize>; 2] {
        match *self {
            Gate::X(q) | Gate::Ry(q, _) | Gate::Rz(q, _) => [Some(q), None],
            Gate::Cnot { control, target } => [Some(control), Some(target)],
            Gate::Cz(a, b) => [Some(a), Some(b)],
        }
    }

    pub fn angle(&self) -> Option<&Angle> {
        match self {
            Gate::Ry(_, a) | Gate::Rz(_, a) => Some(a),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            gates: Vec::new(),
        }
    }

    pub fn push(&mut self, gate: Gate) -> &mut Self {
        self.gates.push(gate);
        self
    }

    pub fn extend(&mut self, other: &Circuit) {
        self.gates.extend_from_slice(&other.gates);
    }

    /// Number of parameter slots (one past the largest slot referenced).
    pub fn parameter_count(&self) -> usize {
        self.gates
            .iter()
            .filter_map(|g| match g.angle() {
                Some(Angle::Param { slot, .. }) => Some(slot + 1),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    /// Checks qubit ranges, distinct two-qubit operands, and that parameter
    /// slots are dense `0..P`.
    pub fn validate(&self) -> Result<()> {
        for (k, g) in self.gates.iter().enumerate() {
            let [a, b] = g.qubits();
            for q in [a, b].into_iter().flatten() {
                if q >= self.n_qubits {
                    return Err(Error::Usage(format!("gate {k} touches qubit {q} of {}", self.n_qubits)));
                }
            }
            if let (Some(a), Some(b)) = (a, b) {
                if a == b {
                    return Err(Error::Usage(format!("gate {k} uses qubit {a} twice")));
                }
            }
        }
        let p = self.parameter_count();
        let mut used = vec![false; p];
        for g in &self.gates {
            if let Some(Angle::Param { slot, .. }) = g.angle() {
                used[*slot] = true;
            }
        }
        if let Some(missing) = used.iter().position(|u| !u) {
            return Err(Error::Usage(format!("parameter slot {missing} is never used")));
        }
        Ok(())
    }

    fn apply(&self, state: &mut Statevector, theta: &[f64], shift: Option<(usize, f64)>) {
        for (k, g) in self.gates.iter().enumerate() {
            let delta = match shift {
                Some((idx, d)) if idx == k => d,
                _ => 0.0,
            };
            match *g {
                Gate::X(q) => state.apply_x(q),
                Gate::Ry(q, a) => state.apply_ry(q, a.value(theta) + delta),
                Gate::Rz(q, a) => state.apply_rz(q, a.value(theta) + delta),
                Gate::Cnot { control, target } => state.apply_cnot(control, target),
                Gate::Cz(a, b) => state.apply_cz(a, b),
            }
        }
    }

    fn check_inputs(&self, theta: &[f64]) -> Result<()> {
        if self.n_qubits > MAX_SIM_QUBITS {
            return Err(Error::Resource(format!(
                "{} qubits exceeds the {MAX_SIM_QUBITS}-qubit simulator limit",
                self.n_qubits
            )));
        }
        let p = self.parameter_count();
        if theta.len() != p {
            return Err(Error::Usage(format!("circuit takes {p} parameters, got {}", theta.len())));
        }
        Ok(())
    }
}

/// Runs `circuit` on `|0…0⟩`.
pub fn run_circuit(circuit: &Circuit, theta: &[f64]) -> Result<Statevector> {
    run_circuit_shifted(circuit, theta, None)
}

/// Like [`run_circuit`], adding `delta` to the angle of gate `shift.0`.
pub fn run_circuit_shifted(circuit: &Circuit, theta: &[f64], shift: Option<(usize, f64)>) -> Result<Statevector> {
    circuit.check_inputs(theta)?;
    let mut state = Statevector::zero(circuit.n_qubits)?;
    circuit.apply(&mut state, theta, shift);
    Ok(state)
}

fn check_qubits(psi: &Statevector, h: &PauliSum) -> Result<()> {
    if psi.n_qubits != h.n_qubits {
        return Err(Error::Usage(format!(
            "state has {} qubits, operator {}",
            psi.n_qubits, h.n_qubits
        )));
    }
    Ok(())
}

/// `Σ c ⟨ψ|P|ψ⟩` accumulated in term order; returns the real part.
pub fn expectation(psi: &Statevector, h: &PauliSum) -> Result<f64> {
    check_qubits(psi, h)?;
    let mut total = Complex64::new(0.0, 0.0);
    for t in &h.terms {
        total += t.coefficient * psi.pauli_expectation(&t.string);
    }
    if h.is_hermitian() {
        let scale = h.terms.iter().fold(1.0_f64, |m, t| m + t.coefficient.norm());
        debug_assert!(total.im.abs() <= 1e-10 * scale, "imaginary residual {:e}", total.im);
    }
    Ok(total.re)
}

/// Shot-sampled estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampledEnergy {
    pub mean: f64,
    pub standard_error: f64,
}

/// Estimates `⟨ψ|h|ψ⟩` from `shots` samples per qubit-wise-commuting group.
///
/// Group `g` draws from a ChaCha8 stream `g` seeded with `seed`, so the
/// result depends only on the inputs.
pub fn sample_expectation(psi: &Statevector, h: &PauliSum, shots: usize, seed: u64) -> Result<f64> {
    sample_expectation_with_error(psi, h, shots, seed).map(|e| e.mean)
}

pub fn sample_expectation_with_error(psi: &Statevector, h: &PauliSum, shots: usize, seed: u64) -> Result<SampledEnergy> {
    check_qubits(psi, h)?;
    if shots == 0 {
        return Err(Error::Usage("need at least one shot".into()));
    }
    if !h.is_hermitian() {
        return Err(Error::Usage("sampled expectation needs a Hermitian operator".into()));
    }
    let mut mean = 0.0;
    let mut variance = 0.0;
    let (identity, rest): (Vec<&PauliTerm>, Vec<&PauliTerm>) = h.terms.iter().partition(|t| t.string.is_identity());
    mean += identity.iter().map(|t| t.coefficient.re).sum::<f64>();

    let measured = PauliSum::from_terms(h.n_qubits, rest.into_iter().copied().collect());
    for (g, group) in qwc_group(&measured).iter().enumerate() {
        let mut rotated = psi.clone();
        let basis = group.iter().fold(PauliString::IDENTITY, |acc, t| PauliString {
            x: acc.x | t.string.x,
            z: acc.z | t.string.z,
        });
        for (q, p) in basis.letters() {
            match p {
                Pauli::X => rotated.apply_ry(q, -FRAC_PI_2),
                Pauli::Y => {
                    rotated.apply_rz(q, -FRAC_PI_2);
                    rotated.apply_ry(q, -FRAC_PI_2);
                }
                Pauli::Z => {}
            }
        }
        let counts = sample_counts(&rotated, shots, seed, g as u64);
        let value = |outcome: usize| -> f64 {
            group
                .iter()
                .map(|t| {
                    let parity = (outcome as u64 & t.string.support()).count_ones() % 2;
                    if parity == 0 { t.coefficient.re } else { -t.coefficient.re }
                })
                .sum()
        };
        let n = shots as f64;
        let mut s1 = 0.0;
        let mut s2 = 0.0;
        for (outcome, &c) in counts.iter().enumerate() {
            if c > 0 {
                let v = value(outcome);
                s1 += c as f64 * v;
                s2 += c as f64 * v * v;
            }
        }
        let group_mean = s1 / n;
        mean += group_mean;
        if shots > 1 {
            let sample_var = ((s2 - n * group_mean * group_mean) / (n - 1.0)).max(0.0);
            variance += sample_var / n;
        }
    }
    Ok(SampledEnergy {
        mean,
        standard_error: variance.sqrt(),
    })
}

fn sample_counts(psi: &Statevector, shots: usize, seed: u64, stream: u64) -> Vec<u64> {
    let mut cumulative = Vec::with_capacity(psi.amplitudes.len());
    let mut acc = 0.0;
    for a in &psi.amplitudes {
        acc += a.norm_sqr();
        cumulative.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut counts = vec![0u64; psi.amplitudes.len()];
    for _ in 0..shots {
        let u = rng.random::<f64>() * acc;
        let idx = cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1);
        counts[idx] += 1;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn sum(n: usize, terms: &[(f64, &str)]) -> PauliSum {
        PauliSum::from_terms(
            n,
            terms
                .iter()
                .map(|(c, p)| PauliTerm::new(*c, PauliString::parse_pattern(p).unwrap()))
                .collect(),
        )
    }

    #[test]
    fn basic_gates() {
        let mut c = Circuit::new(2);
        c.push(Gate::X(0));
        let s = run_circuit(&c, &[]).unwrap();
        assert_eq!(s.amplitudes[1], Complex64::new(1.0, 0.0));

        let mut c = Circuit::new(1);
        c.push(Gate::Ry(0, Angle::Fixed(PI)));
        let s = run_circuit(&c, &[]).unwrap();
        assert_abs_diff_eq!(s.amplitudes[1].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.amplitudes[0].norm(), 0.0, epsilon = 1e-12);

        let mut c = Circuit::new(2);
        c.push(Gate::X(0)).push(Gate::Cnot { control: 0, target: 1 });
        let s = run_circuit(&c, &[]).unwrap();
        assert_eq!(s.amplitudes[3], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn input_errors() {
        let mut c = Circuit::new(1);
        c.push(Gate::Ry(0, Angle::param(0)));
        assert!(matches!(run_circuit(&c, &[]), Err(Error::Usage(_))));
        assert!(matches!(run_circuit(&Circuit::new(25), &[]), Err(Error::Resource(_))));
        let mut bad = Circuit::new(2);
        bad.push(Gate::Cz(1, 1));
        assert!(bad.validate().is_err());
        let mut gap = Circuit::new(1);
        gap.push(Gate::Ry(0, Angle::param(1)));
        assert!(gap.validate().is_err());
        let s = Statevector::zero(2).unwrap();
        assert!(matches!(expectation(&s, &sum(3, &[(1.0, "ZII")])), Err(Error::Usage(_))));
    }

    #[test]
    fn single_qubit_expectations() {
        let zero = Statevector::zero(1).unwrap();
        assert_eq!(expectation(&zero, &sum(1, &[(1.0, "Z")])).unwrap(), 1.0);
        let mut c = Circuit::new(1);
        c.push(Gate::Ry(0, Angle::Fixed(FRAC_PI_2)));
        let plus = run_circuit(&c, &[]).unwrap();
        assert_abs_diff_eq!(expectation(&plus, &sum(1, &[(1.0, "X")])).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn identity_expectation_is_exact() {
        let mut c = Circuit::new(3);
        c.push(Gate::Ry(0, Angle::Fixed(0.3))).push(Gate::Cnot { control: 0, target: 2 });
        let s = run_circuit(&c, &[]).unwrap();
        assert_eq!(expectation(&s, &sum(3, &[(-0.731, "III")])).unwrap(), -0.731);
    }

    fn scrambled(n: usize) -> Statevector {
        let mut c = Circuit::new(n);
        for q in 0..n {
            c.push(Gate::Ry(q, Angle::Fixed(0.4 + q as f64)));
            c.push(Gate::Rz(q, Angle::Fixed(1.1 * q as f64 - 0.2)));
        }
        for q in 0..n - 1 {
            c.push(Gate::Cnot { control: q, target: q + 1 });
        }
        c.push(Gate::Cz(0, n - 1));
        run_circuit(&c, &[]).unwrap()
    }

    #[test]
    fn gates_preserve_norm() {
        let s = scrambled(5);
        assert_abs_diff_eq!(s.norm_squared(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn expectation_is_linear() {
        let s = scrambled(3);
        let a = sum(3, &[(0.3, "XYZ"), (-1.2, "IZI")]);
        let b = sum(3, &[(0.7, "YYI"), (0.25, "ZIX")]);
        let lhs = expectation(&s, &a).unwrap() + expectation(&s, &b).unwrap();
        assert_abs_diff_eq!(lhs, expectation(&s, &a.add(&b)).unwrap(), epsilon = 1e-10);
    }

    #[test]
    fn sampling_deterministic_outcome() {
        let zero = Statevector::zero(1).unwrap();
        for shots in [1, 7, 1000] {
            assert_eq!(sample_expectation(&zero, &sum(1, &[(1.0, "Z")]), shots, 3).unwrap(), 1.0);
        }
    }

    #[test]
    fn sampling_is_reproducible_and_converges() {
        let s = scrambled(3);
        let h = sum(3, &[(0.5, "III"), (0.3, "XYZ"), (-1.2, "IZI"), (0.7, "YYI"), (0.25, "ZIX")]);
        let a = sample_expectation(&s, &h, 2000, 42).unwrap();
        let b = sample_expectation(&s, &h, 2000, 42).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        let exact = expectation(&s, &h).unwrap();
        let est = sample_expectation_with_error(&s, &h, 200_000, 7).unwrap();
        assert!((est.mean - exact).abs() <= 4.0 * est.standard_error, "{est:?} vs {exact}");
    }

    #[test]
    fn y_basis_rotation_is_correct() {
        // |+i⟩ = RX(-π/2)|0⟩, built as RZ(π/2)·RY(π/2)
        let mut c = Circuit::new(1);
        c.push(Gate::Ry(0, Angle::Fixed(FRAC_PI_2))).push(Gate::Rz(0, Angle::Fixed(FRAC_PI_2)));
        let s = run_circuit(&c, &[]).unwrap();
        let y = sum(1, &[(1.0, "Y")]);
        assert_abs_diff_eq!(expectation(&s, &y).unwrap(), 1.0, epsilon = 1e-12);
        assert_eq!(sample_expectation(&s, &y, 500, 1).unwrap(), 1.0);
    }
}
