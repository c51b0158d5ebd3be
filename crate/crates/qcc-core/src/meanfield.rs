//! Qubit mean field: expectation values over products of spin coherent
//! states, exact angle derivatives, and multi-start energy minimization
//! over the Bloch angles, optionally with a spin-symmetry penalty.
//!
//! A single-qubit coherent state is
//! `|Omega_i> = cos(theta_i/2)|0> + exp(i phi_i) sin(theta_i/2)|1>`,
//! giving the factorized matrix elements `<x> = sin(theta) cos(phi)`,
//! `<y> = sin(theta) sin(phi)`, `<z> = cos(theta)`. Every expectation and
//! derivative below runs directly on these products; no statevector is
//! built.

use crate::hamio::ProblemInstance;
use crate::optim::{bfgs_minimize, BfgsOptions};
use crate::pauli::{Axis, PauliSum};
use crate::simstate::StateVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

/// Default multi-start seed.
pub const DEFAULT_SEED: u64 = 52417;

#[derive(Debug, Error)]
pub enum MeanFieldError {
    #[error("constrained optimization requires a spin-squared operator in the problem")]
    MissingSpinOperator,
    #[error("qubit count mismatch: {0} vs {1}")]
    QubitMismatch(usize, usize),
}

/// Per-qubit Bloch angles (theta, phi), canonicalized to theta in [0, pi]
/// and phi in [0, 2pi).
///
/// Canonicalization reflects out-of-range polar angles as
/// (theta, phi) -> (-theta, phi + pi), which maps a coherent state to
/// itself up to a global phase.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochConfig {
    angles: Vec<(f64, f64)>,
}

impl BlochConfig {
    pub fn new(angles: Vec<(f64, f64)>) -> BlochConfig {
        let mut c = BlochConfig { angles };
        c.canonicalize();
        c
    }

    /// All spins up (theta = 0).
    pub fn aligned(n_qubits: usize) -> BlochConfig {
        BlochConfig {
            angles: vec![(0.0, 0.0); n_qubits],
        }
    }

    /// Flat layout `[theta_0, phi_0, theta_1, phi_1, ...]`.
    pub fn from_flat(flat: &[f64]) -> BlochConfig {
        assert!(flat.len().is_multiple_of(2));
        BlochConfig::new(flat.chunks_exact(2).map(|c| (c[0], c[1])).collect())
    }

    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * self.angles.len());
        for &(t, p) in &self.angles {
            out.push(t);
            out.push(p);
        }
        out
    }

    pub fn n_qubits(&self) -> usize {
        self.angles.len()
    }

    pub fn theta(&self, qubit: usize) -> f64 {
        self.angles[qubit].0
    }

    pub fn phi(&self, qubit: usize) -> f64 {
        self.angles[qubit].1
    }

    pub fn angles(&self) -> &[(f64, f64)] {
        &self.angles
    }

    fn canonicalize(&mut self) {
        use std::f64::consts::{PI, TAU};
        for (t, p) in &mut self.angles {
            let mut theta = t.rem_euclid(TAU);
            let mut phi = *p;
            if theta > PI {
                theta = TAU - theta;
                phi += PI;
            }
            *t = theta;
            *p = phi.rem_euclid(TAU);
        }
    }

    /// Two-component states per qubit, `[cos(t/2), e^{i phi} sin(t/2)]`.
    pub fn qubit_states(&self) -> Vec<[Complex64; 2]> {
        self.angles
            .iter()
            .map(|&(t, p)| {
                [
                    Complex64::new((t / 2.0).cos(), 0.0),
                    Complex64::from_polar((t / 2.0).sin(), p),
                ]
            })
            .collect()
    }

    /// The explicit product statevector.
    pub fn to_state(&self) -> StateVector {
        StateVector::product_state(&self.qubit_states())
    }

    /// Largest absolute angle difference to another configuration.
    pub fn max_angle_distance(&self, other: &BlochConfig) -> f64 {
        self.angles
            .iter()
            .zip(&other.angles)
            .map(|(&(t1, p1), &(t2, p2))| (t1 - t2).abs().max((p1 - p2).abs()))
            .fold(0.0, f64::max)
    }
}

/// Single-qubit expectation of each axis and its angle derivatives.
#[derive(Debug, Clone, Copy)]
struct QubitTable {
    m: [f64; 3],      // <x>, <y>, <z>
    d_theta: [f64; 3],
    d_phi: [f64; 3],
    d_tt: [f64; 3],
    d_tp: [f64; 3],
    d_pp: [f64; 3],
}

fn qubit_table(theta: f64, phi: f64) -> QubitTable {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    QubitTable {
        m: [st * cp, st * sp, ct],
        d_theta: [ct * cp, ct * sp, -st],
        d_phi: [-st * sp, st * cp, 0.0],
        d_tt: [-st * cp, -st * sp, -ct],
        d_tp: [-ct * sp, ct * cp, 0.0],
        d_pp: [-st * cp, -st * sp, 0.0],
    }
}

fn axis_index(a: Axis) -> usize {
    match a {
        Axis::X => 0,
        Axis::Y => 1,
        Axis::Z => 2,
    }
}

fn tables_for(flat: &[f64]) -> Vec<QubitTable> {
    flat.chunks_exact(2).map(|c| qubit_table(c[0], c[1])).collect()
}

/// Coherent-state expectation on raw (not necessarily canonical) angles.
pub(crate) fn expectation_flat(h: &PauliSum, flat: &[f64]) -> f64 {
    let tables = tables_for(flat);
    expectation_with_tables(h, &tables)
}

fn expectation_with_tables(h: &PauliSum, tables: &[QubitTable]) -> f64 {
    let mut total = 0.0;
    for (word, coeff) in h.terms() {
        let mut prod = coeff.re;
        if prod == 0.0 {
            continue;
        }
        let mut bits = word.x_bits() | word.z_bits();
        while bits != 0 {
            let q = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            prod *= tables[q].m[axis_index(word.axis_at(q).unwrap())];
            if prod == 0.0 {
                break;
            }
        }
        total += prod;
    }
    total
}

/// Expectation and full angle gradient in one pass over the terms.
///
/// Gradient layout matches the flat angle layout:
/// `[dE/dtheta_0, dE/dphi_0, dE/dtheta_1, ...]`.
pub(crate) fn energy_and_gradient_flat(h: &PauliSum, flat: &[f64]) -> (f64, Vec<f64>) {
    let tables = tables_for(flat);
    let n = tables.len();
    let mut grad = vec![0.0; 2 * n];
    let mut total = 0.0;
    let mut support: Vec<(usize, usize)> = Vec::with_capacity(n);
    let mut fwd: Vec<f64> = Vec::with_capacity(n + 1);
    let mut bwd: Vec<f64> = Vec::with_capacity(n + 1);

    for (word, coeff) in h.terms() {
        let c = coeff.re;
        if c == 0.0 {
            continue;
        }
        support.clear();
        let mut bits = word.x_bits() | word.z_bits();
        while bits != 0 {
            let q = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            support.push((q, axis_index(word.axis_at(q).unwrap())));
        }
        let len = support.len();
        if len == 0 {
            total += c;
            continue;
        }
        // Prefix and suffix products of the per-qubit factors.
        fwd.clear();
        fwd.push(1.0);
        for &(q, a) in &support {
            let last = *fwd.last().unwrap();
            fwd.push(last * tables[q].m[a]);
        }
        bwd.clear();
        bwd.resize(len + 1, 1.0);
        for i in (0..len).rev() {
            let (q, a) = support[i];
            bwd[i] = bwd[i + 1] * tables[q].m[a];
        }
        total += c * fwd[len];
        for (i, &(q, a)) in support.iter().enumerate() {
            let rest = fwd[i] * bwd[i + 1];
            grad[2 * q] += c * rest * tables[q].d_theta[a];
            grad[2 * q + 1] += c * rest * tables[q].d_phi[a];
        }
    }
    (total, grad)
}

/// Full 2N x 2N angle Hessian of the coherent expectation, same layout as
/// the gradient.
pub(crate) fn hessian_flat(h: &PauliSum, flat: &[f64]) -> nalgebra::DMatrix<f64> {
    let tables = tables_for(flat);
    let n = tables.len();
    let mut hess = nalgebra::DMatrix::zeros(2 * n, 2 * n);

    for (word, coeff) in h.terms() {
        let c = coeff.re;
        if c == 0.0 {
            continue;
        }
        let support: Vec<(usize, usize)> = word
            .support()
            .into_iter()
            .map(|q| (q, axis_index(word.axis_at(q).unwrap())))
            .collect();
        let len = support.len();
        if len == 0 {
            continue;
        }
        let product_excluding = |skip: &[usize]| -> f64 {
            let mut p = 1.0;
            for (i, &(q, a)) in support.iter().enumerate() {
                if !skip.contains(&i) {
                    p *= tables[q].m[a];
                }
            }
            p
        };
        for (i, &(qi, ai)) in support.iter().enumerate() {
            // Same-qubit second derivatives.
            let rest = product_excluding(&[i]);
            let t = &tables[qi];
            hess[(2 * qi, 2 * qi)] += c * rest * t.d_tt[ai];
            let tp = c * rest * t.d_tp[ai];
            hess[(2 * qi, 2 * qi + 1)] += tp;
            hess[(2 * qi + 1, 2 * qi)] += tp;
            hess[(2 * qi + 1, 2 * qi + 1)] += c * rest * t.d_pp[ai];
            // Cross-qubit products of first derivatives.
            for (j, &(qj, aj)) in support.iter().enumerate().skip(i + 1) {
                let rest2 = product_excluding(&[i, j]);
                let ti = &tables[qi];
                let tj = &tables[qj];
                for (vi, di) in [(0usize, ti.d_theta[ai]), (1, ti.d_phi[ai])] {
                    for (vj, dj) in [(0usize, tj.d_theta[aj]), (1, tj.d_phi[aj])] {
                        let val = c * rest2 * di * dj;
                        hess[(2 * qi + vi, 2 * qj + vj)] += val;
                        hess[(2 * qj + vj, 2 * qi + vi)] += val;
                    }
                }
            }
        }
    }
    hess
}

/// Expectation of `h` over the product coherent state `omega`.
pub fn coherent_expectation(h: &PauliSum, omega: &BlochConfig) -> f64 {
    assert_eq!(h.n_qubits(), omega.n_qubits());
    expectation_flat(h, &omega.flat())
}

/// Exact analytic angle gradient, layout `[dE/dt0, dE/dp0, dE/dt1, ...]`.
pub fn angle_gradient(h: &PauliSum, omega: &BlochConfig) -> Vec<f64> {
    assert_eq!(h.n_qubits(), omega.n_qubits());
    energy_and_gradient_flat(h, &omega.flat()).1
}

/// Exact analytic angle Hessian of the coherent expectation.
pub fn angle_hessian(h: &PauliSum, omega: &BlochConfig) -> nalgebra::DMatrix<f64> {
    assert_eq!(h.n_qubits(), omega.n_qubits());
    hessian_flat(h, &omega.flat())
}

/// Multi-start settings for the mean-field search.
#[derive(Debug, Clone)]
pub struct QmfOptions {
    /// Total restarts: one deterministic start from the diagonal Z field,
    /// the rest sphere-uniform random.
    pub restarts: usize,
    pub seed: u64,
    pub grad_tol: f64,
    pub energy_tol: f64,
    pub max_iters: usize,
}

impl Default for QmfOptions {
    fn default() -> Self {
        QmfOptions {
            restarts: 32,
            seed: DEFAULT_SEED,
            grad_tol: 1e-8,
            energy_tol: 1e-10,
            max_iters: 2000,
        }
    }
}

impl QmfOptions {
    pub(crate) fn bfgs(&self) -> BfgsOptions {
        BfgsOptions {
            grad_tol: self.grad_tol,
            energy_tol: self.energy_tol,
            max_iters: self.max_iters,
        }
    }
}

#[derive(Debug, Clone)]
pub struct QmfResult {
    /// Bare Hamiltonian expectation at the optimum (penalty excluded).
    pub energy: f64,
    pub config: BlochConfig,
    pub constrained: bool,
    pub penalty_weight: f64,
    pub spin_expectation: Option<f64>,
    pub number_expectation: Option<f64>,
    pub converged: bool,
    pub restarts_used: usize,
    /// Distinct local minima of the (possibly penalized) objective found
    /// across the restarts, best first: (objective value, configuration).
    pub local_minima: Vec<(f64, BlochConfig)>,
}

/// Deterministic start: align each qubit against its diagonal Z field.
pub(crate) fn z_field_start(h: &PauliSum) -> Vec<f64> {
    use std::f64::consts::{FRAC_PI_2, PI};
    let n = h.n_qubits();
    let mut flat = vec![0.0; 2 * n];
    for q in 0..n {
        let z = crate::pauli::PauliWord::single(n, q, Axis::Z).unwrap();
        let c = h.coefficient(&z).re;
        flat[2 * q] = if c > 1e-12 {
            PI
        } else if c < -1e-12 {
            0.0
        } else {
            FRAC_PI_2
        };
    }
    flat
}

pub(crate) fn random_start(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    use std::f64::consts::TAU;
    let mut flat = vec![0.0; 2 * n];
    for q in 0..n {
        let u: f64 = rng.random_range(-1.0..1.0);
        flat[2 * q] = u.acos();
        flat[2 * q + 1] = rng.random_range(0.0..TAU);
    }
    flat
}

/// Minimizes an angle objective from many starts, returning the winner and
/// the distinct local minima. Ties break on the restart index.
pub(crate) fn multistart_minimize<F>(
    objective: F,
    starts: Vec<Vec<f64>>,
    bfgs: &BfgsOptions,
) -> (crate::optim::BfgsOutcome, Vec<(f64, BlochConfig)>)
where
    F: Fn(&[f64]) -> (f64, Vec<f64>) + Sync,
{
    let outcomes: Vec<crate::optim::BfgsOutcome> = starts
        .par_iter()
        .map(|x0| bfgs_minimize(&objective, x0, bfgs))
        .collect();
    let mut best_idx = 0;
    for (i, o) in outcomes.iter().enumerate() {
        if o.value < outcomes[best_idx].value {
            best_idx = i;
        }
    }
    // Collect distinct minima (by canonical angle distance), best first.
    let mut minima: Vec<(f64, BlochConfig)> = Vec::new();
    let mut order: Vec<usize> = (0..outcomes.len()).collect();
    order.sort_by(|&a, &b| {
        outcomes[a]
            .value
            .partial_cmp(&outcomes[b].value)
            .unwrap()
            .then(a.cmp(&b))
    });
    for idx in order {
        let o = &outcomes[idx];
        if !o.value.is_finite() {
            continue;
        }
        let cfg = BlochConfig::from_flat(&o.x);
        let dup = minima
            .iter()
            .any(|(_, c)| c.max_angle_distance(&cfg) < 1e-4);
        if !dup {
            minima.push((o.value, cfg));
        }
        if minima.len() >= 8 {
            break;
        }
    }
    (outcomes.into_iter().nth(best_idx).unwrap(), minima)
}

pub(crate) fn qmf_starts(h: &PauliSum, restarts: usize, seed: u64) -> Vec<Vec<f64>> {
    let n = h.n_qubits();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts = vec![z_field_start(h)];
    for _ in 1..restarts.max(1) {
        starts.push(random_start(&mut rng, n));
    }
    starts
}

/// Minimizes `<H>` over product coherent states.
pub fn qmf_minimize(problem: &ProblemInstance, opts: &QmfOptions) -> QmfResult {
    minimize_impl(problem, 0.0, false, opts).expect("unconstrained QMF cannot fail")
}

/// Minimizes `<H> + penalty * <S^2>`; the reported energy is the bare `<H>`.
///
/// The spin-squared operator is positive semidefinite, so a linear penalty
/// vanishes exactly on singlet solutions.
pub fn qmf_minimize_constrained(
    problem: &ProblemInstance,
    penalty_weight: f64,
    opts: &QmfOptions,
) -> Result<QmfResult, MeanFieldError> {
    if problem.spin_sq_op.is_none() {
        return Err(MeanFieldError::MissingSpinOperator);
    }
    minimize_impl(problem, penalty_weight, true, opts)
}

fn minimize_impl(
    problem: &ProblemInstance,
    penalty_weight: f64,
    constrained: bool,
    opts: &QmfOptions,
) -> Result<QmfResult, MeanFieldError> {
    let h = &problem.hamiltonian;
    let objective_sum = if constrained && penalty_weight != 0.0 {
        let mut pen = h.clone();
        pen.add_assign(&problem.spin_sq_op.as_ref().unwrap().scaled(
            Complex64::new(penalty_weight, 0.0),
        ))
        .expect("operator register mismatch");
        pen
    } else {
        h.clone()
    };

    let starts = qmf_starts(h, opts.restarts, opts.seed);
    let objective = |x: &[f64]| energy_and_gradient_flat(&objective_sum, x);
    let (best, minima) = multistart_minimize(objective, starts, &opts.bfgs());

    let config = BlochConfig::from_flat(&best.x);
    let energy = coherent_expectation(h, &config);
    let spin_expectation = problem
        .spin_sq_op
        .as_ref()
        .map(|op| coherent_expectation(op, &config));
    let number_expectation = problem
        .number_op
        .as_ref()
        .map(|op| coherent_expectation(op, &config));

    Ok(QmfResult {
        energy,
        config,
        constrained,
        penalty_weight: if constrained { penalty_weight } else { 0.0 },
        spin_expectation,
        number_expectation,
        converged: best.converged,
        restarts_used: opts.restarts,
        local_minima: minima,
    })
}
