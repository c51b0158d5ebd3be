//! Dense statevector oracle: exact matrix realizations of Pauli sums,
//! exact spectra, and brute-force verification of the closed-form algebra.
//!
//! Qubit 0 is the least significant bit of the basis-state index.

use crate::pauli::{PauliError, PauliSum, PauliWord, Phase};
use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

/// Dense realizations refuse registers wider than this.
pub const DENSE_QUBIT_CAP: usize = 12;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("dense realization capped at {cap} qubits, got {n_qubits}")]
    CapExceeded { n_qubits: usize, cap: usize },
    #[error("operator is not Hermitian (max imaginary coefficient {0:.3e})")]
    NonHermitian(f64),
    #[error("qubit count mismatch: {0} vs {1}")]
    QubitMismatch(usize, usize),
    #[error(transparent)]
    Pauli(#[from] PauliError),
}

/// A normalized state of `n_qubits` qubits, amplitudes indexed by bitstring.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// The computational basis state `|index>`.
    pub fn basis_state(n_qubits: usize, index: usize) -> StateVector {
        let dim = 1usize << n_qubits;
        assert!(index < dim);
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        StateVector { n_qubits, amps }
    }

    /// Tensor product of per-qubit two-component states, qubit 0 first.
    pub fn product_state(qubit_states: &[[Complex64; 2]]) -> StateVector {
        let n = qubit_states.len();
        let dim = 1usize << n;
        let mut amps = vec![Complex64::new(1.0, 0.0); dim];
        for (idx, amp) in amps.iter_mut().enumerate() {
            for (q, local) in qubit_states.iter().enumerate() {
                *amp *= local[(idx >> q) & 1];
            }
        }
        let mut s = StateVector { n_qubits: n, amps };
        s.renormalize();
        s
    }

    pub fn from_amplitudes(n_qubits: usize, amps: Vec<Complex64>) -> StateVector {
        assert_eq!(amps.len(), 1usize << n_qubits);
        let mut s = StateVector { n_qubits, amps };
        s.renormalize();
        s
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn renormalize(&mut self) {
        let n = self.norm();
        assert!(n > 0.0, "cannot normalize the zero vector");
        if (n - 1.0).abs() > 1e-15 {
            let inv = 1.0 / n;
            for a in &mut self.amps {
                *a *= inv;
            }
        }
    }

    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Applies a Pauli word (including its phase) to the state.
    pub fn apply_word(&self, word: &PauliWord) -> Result<StateVector, SimError> {
        if word.n_qubits() != self.n_qubits {
            return Err(SimError::QubitMismatch(self.n_qubits, word.n_qubits()));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        apply_word_into(word, &self.amps, &mut out);
        Ok(StateVector {
            n_qubits: self.n_qubits,
            amps: out,
        })
    }

    /// Applies `exp(-i tau P/2) = cos(tau/2) - i sin(tau/2) P` for a
    /// phase-(+1) word `p`.
    pub fn apply_pauli_exp(&self, p: &PauliWord, tau: f64) -> Result<StateVector, SimError> {
        if p.phase() != Phase::PLUS_ONE {
            return Err(PauliError::NonUnitPhase.into());
        }
        if p.n_qubits() != self.n_qubits {
            return Err(SimError::QubitMismatch(self.n_qubits, p.n_qubits()));
        }
        let (c, s) = ((tau / 2.0).cos(), (tau / 2.0).sin());
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        apply_word_into(p, &self.amps, &mut out);
        let minus_i_sin = Complex64::new(0.0, -s);
        for (o, a) in out.iter_mut().zip(&self.amps) {
            *o = c * a + minus_i_sin * *o;
        }
        Ok(StateVector {
            n_qubits: self.n_qubits,
            amps: out,
        })
    }

    /// Applies `h` termwise, returning the (unnormalized) vector `h |self>`.
    pub fn apply_sum(&self, h: &PauliSum) -> Result<Vec<Complex64>, SimError> {
        if h.n_qubits() != self.n_qubits {
            return Err(SimError::QubitMismatch(self.n_qubits, h.n_qubits()));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (word, coeff) in h.terms() {
            scratch.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
            apply_word_into(&word, &self.amps, &mut scratch);
            for (o, s) in out.iter_mut().zip(&scratch) {
                *o += coeff * s;
            }
        }
        Ok(out)
    }

    /// Real expectation value of a Hermitian sum; the imaginary residue must
    /// stay below 1e-10.
    pub fn expectation(&self, h: &PauliSum) -> Result<f64, SimError> {
        if !h.is_hermitian(1e-10) {
            return Err(SimError::NonHermitian(h.max_imag()));
        }
        let hv = self.apply_sum(h)?;
        let val: Complex64 = self
            .amps
            .iter()
            .zip(&hv)
            .map(|(a, b)| a.conj() * b)
            .sum();
        assert!(
            val.im.abs() < 1e-10,
            "expectation imaginary residue {} exceeds 1e-10",
            val.im
        );
        Ok(val.re)
    }
}

/// Accumulates `word |input>` into `out` (which must be zeroed by the caller).
///
/// The letter word acts on a basis state as
/// `W |j> = i^(k + y_count) (-1)^(popcount(z & j)) |j ^ x>`.
fn apply_word_into(word: &PauliWord, input: &[Complex64], out: &mut [Complex64]) {
    let x = word.x_bits();
    let z = word.z_bits();
    let y_count = (x & z).count_ones();
    let global = Phase::from_exponent(word.phase().exponent() as u32 + y_count).as_complex();
    for (j, amp) in input.iter().enumerate() {
        if amp.re == 0.0 && amp.im == 0.0 {
            continue;
        }
        let sign = if ((z & j as u64).count_ones()).is_multiple_of(2) {
            1.0
        } else {
            -1.0
        };
        out[j ^ x as usize] += global * sign * amp;
    }
}

/// Dense matrix of a Pauli sum; Hermitian iff the sum is.
pub fn to_matrix(h: &PauliSum) -> Result<DMatrix<Complex64>, SimError> {
    let n = h.n_qubits();
    if n > DENSE_QUBIT_CAP {
        return Err(SimError::CapExceeded {
            n_qubits: n,
            cap: DENSE_QUBIT_CAP,
        });
    }
    let dim = 1usize << n;
    let mut m = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    for (word, coeff) in h.terms() {
        let x = word.x_bits() as usize;
        let z = word.z_bits();
        let y_count = (word.x_bits() & z).count_ones();
        let global = coeff * Phase::from_exponent(y_count).as_complex();
        for j in 0..dim {
            let sign = if ((z & j as u64).count_ones()).is_multiple_of(2) {
                1.0
            } else {
                -1.0
            };
            m[(j ^ x, j)] += global * sign;
        }
    }
    Ok(m)
}

/// Full spectrum of a Hermitian sum from a dense eigensolve.
#[derive(Debug, Clone)]
pub struct SpectrumResult {
    /// Eigenvalues in ascending order.
    pub eigenvalues: Vec<f64>,
    pub ground_energy: f64,
    pub ground_vector: Option<StateVector>,
}

/// Dense Hermitian eigensolve of `h`, eigenvalues ascending.
pub fn exact_ground(h: &PauliSum) -> Result<SpectrumResult, SimError> {
    exact_spectrum(h, true)
}

pub fn exact_spectrum(h: &PauliSum, want_vector: bool) -> Result<SpectrumResult, SimError> {
    if !h.is_hermitian(1e-10) {
        return Err(SimError::NonHermitian(h.max_imag()));
    }
    let m = to_matrix(h)?;
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let ground_energy = eigenvalues[0];
    let ground_vector = if want_vector {
        let col = eig.eigenvectors.column(order[0]);
        Some(StateVector::from_amplitudes(
            h.n_qubits(),
            col.iter().cloned().collect(),
        ))
    } else {
        None
    };
    Ok(SpectrumResult {
        eigenvalues,
        ground_energy,
        ground_vector,
    })
}
