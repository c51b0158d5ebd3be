//! Entangler screening: energy-derivative tests with mean-field relaxation,
//! tiered classification, and full energy-lowering evaluation.
//!
//! For a candidate generator P the screened quantity is the envelope
//! `E(tau) = min_Omega <Omega| H[tau; P] |Omega>`. Its first derivative at
//! tau = 0 is `<-(i/2)[H, P]>` on the mean-field minimum; the second
//! derivative needs the relaxation correction `-c^T D^+ c` built from the
//! mixed derivatives c_i and the angle Hessian D. Two safeguards from the
//! same construction: polar angles at 0 or pi leave their azimuths
//! undetermined (they are pinned by re-optimizing on a slightly
//! transformed Hamiltonian), and envelope kinks at tau = 0 (degenerate
//! mean-field minima splitting) invalidate the second derivative and are
//! detected by comparing one-sided derivative probes against the smooth
//! prediction.

use crate::hamio::ProblemInstance;
use crate::meanfield::{
    self, angle_hessian, coherent_expectation, BlochConfig, QmfOptions, QmfResult,
};
use crate::pauli::{PauliSum, PauliWord};
use crate::qcc::{self, EvalOptions, QccOptions};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Tier {
    /// Nonzero first energy derivative.
    Tier1,
    /// Vanishing first derivative but significantly negative relaxed
    /// second derivative.
    Tier2,
    Discarded,
}

impl Tier {
    pub fn label(&self) -> &'static str {
        match self {
            Tier::Tier1 => "tier1",
            Tier::Tier2 => "tier2",
            Tier::Discarded => "discarded",
        }
    }
}

#[derive(Debug, Clone)]
pub struct EntanglerScore {
    pub generator: PauliWord,
    pub first_derivative: f64,
    /// Relaxed second derivative of the envelope; absent for first-tier
    /// candidates (not computed) and for discontinuity-flagged ones.
    pub second_derivative: Option<f64>,
    /// Full one-entangler energy lowering, present for finalists.
    pub delta_e: Option<f64>,
    pub delta_e_converged: Option<bool>,
    pub tier: Tier,
    pub discontinuity_flag: bool,
    pub constrained_reference: bool,
}

/// Mean-field relaxation data entering the second derivative.
#[derive(Debug, Clone)]
pub struct RelaxationData {
    /// Mixed derivatives d^2 E / (d tau d angle_i), length 2 N_q.
    pub c_vector: Vec<f64>,
    /// Angle Hessian of the screening functional, 2 N_q square.
    pub d_matrix: DMatrix<f64>,
    /// Number of eigenvalues kept by the pseudo-inverse cutoff.
    pub pseudo_inverse_rank: usize,
}

#[derive(Debug, Clone)]
pub struct RankOptions {
    /// |first derivative| above this is first tier.
    pub grad_tol: f64,
    /// Second derivative below -curv_tol is second tier.
    pub curv_tol: f64,
    /// Allowed deviation of the probe-derivative difference from the
    /// smooth prediction before the point is declared discontinuous.
    pub disc_tol: f64,
    /// Polar angles within this of 0 or pi trigger azimuth resolution.
    pub angle_pole_tol: f64,
    /// Amplitude for the resolution / discontinuity probes.
    pub probe_tau: f64,
    /// Eigenvalue cutoff of the D pseudo-inverse.
    pub pinv_cutoff: f64,
    /// Per tier, how many candidates get the full energy-lowering run.
    pub top_k: usize,
    /// Screen against the spin-constrained mean field.
    pub constrained: bool,
    pub penalty_weight: f64,
    pub seed: u64,
    pub qmf: QmfOptions,
    /// Restarts for each energy-lowering minimization.
    pub delta_restarts: usize,
    pub eval: EvalOptions,
}

impl Default for RankOptions {
    fn default() -> Self {
        RankOptions {
            grad_tol: 1e-6,
            curv_tol: 1e-6,
            disc_tol: 1e-4,
            angle_pole_tol: 1e-6,
            probe_tau: 1e-3,
            pinv_cutoff: 1e-10,
            top_k: 32,
            constrained: false,
            penalty_weight: 2.0,
            seed: meanfield::DEFAULT_SEED,
            qmf: QmfOptions::default(),
            delta_restarts: 12,
            eval: EvalOptions::default(),
        }
    }
}

/// `-(i/2) [h, p]`, the derivative operator of the transformed Hamiltonian.
pub fn grad_operator(h: &PauliSum, p: &PauliWord) -> PauliSum {
    h.commutator_with_word(p)
        .expect("register mismatch")
        .scaled(Complex64::new(0.0, -0.5))
}

/// `(1/2) p [h, p]`, the frozen-angle second-derivative operator.
pub fn curvature_operator(h: &PauliSum, p: &PauliWord) -> PauliSum {
    h.commutator_with_word(p)
        .expect("register mismatch")
        .left_mul_word(p)
        .expect("register mismatch")
        .scaled(Complex64::new(0.5, 0.0))
}

/// The functional whose angle minimum defines the screening reference:
/// the bare Hamiltonian, or the penalized one for a constrained reference.
pub fn screening_functional(problem: &ProblemInstance, reference: &QmfResult) -> PauliSum {
    let mut f = problem.hamiltonian.clone();
    if reference.constrained && reference.penalty_weight != 0.0 {
        let s2 = problem
            .spin_sq_op
            .as_ref()
            .expect("constrained reference without spin operator");
        f.add_assign(&s2.scaled(Complex64::new(reference.penalty_weight, 0.0)))
            .expect("register mismatch");
    }
    f
}

/// First energy derivative at tau = 0 on the mean-field reference,
/// `<Omega_min| -(i/2)[H, P] |Omega_min>`. With a constrained reference
/// this is the symmetry-restoration gradient.
pub fn first_derivative(
    problem: &ProblemInstance,
    generator: &PauliWord,
    reference: &QmfResult,
) -> f64 {
    coherent_expectation(&grad_operator(&problem.hamiltonian, generator), &reference.config)
}

/// Relaxation data at an explicit evaluation point of the screening
/// functional `h_eff`.
pub fn relaxation_at(
    h_eff: &PauliSum,
    generator: &PauliWord,
    config: &BlochConfig,
    pinv_cutoff: f64,
) -> RelaxationData {
    let g_op = grad_operator(h_eff, generator);
    let c_vector = meanfield::angle_gradient(&g_op, config);
    let d_matrix = angle_hessian(h_eff, config);
    let rank = d_matrix
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .filter(|l| l.abs() > pinv_cutoff)
        .count();
    RelaxationData {
        c_vector,
        d_matrix,
        pseudo_inverse_rank: rank,
    }
}

/// Relaxation data on the reference minimum.
pub fn relaxation_data(
    problem: &ProblemInstance,
    generator: &PauliWord,
    reference: &QmfResult,
    opts: &RankOptions,
) -> RelaxationData {
    let h_eff = screening_functional(problem, reference);
    relaxation_at(&h_eff, generator, &reference.config, opts.pinv_cutoff)
}

fn quadratic_form_pinv(data: &RelaxationData, pinv_cutoff: f64) -> f64 {
    let eig = data.d_matrix.clone().symmetric_eigen();
    let c = nalgebra::DVector::from_column_slice(&data.c_vector);
    let mut total = 0.0;
    for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda.abs() > pinv_cutoff {
            let proj = eig.eigenvectors.column(i).dot(&c);
            total += proj * proj / lambda;
        }
    }
    total
}

/// Relaxed second derivative of the envelope at an explicit evaluation
/// point: `<(1/2) P [H, P]> - c^T D^+ c`.
pub fn second_derivative_at(
    h_eff: &PauliSum,
    generator: &PauliWord,
    config: &BlochConfig,
    pinv_cutoff: f64,
) -> (f64, RelaxationData) {
    let bare = coherent_expectation(&curvature_operator(h_eff, generator), config);
    let data = relaxation_at(h_eff, generator, config, pinv_cutoff);
    let value = bare - quadratic_form_pinv(&data, pinv_cutoff);
    (value, data)
}

fn pole_qubits(config: &BlochConfig, tol: f64) -> Vec<usize> {
    (0..config.n_qubits())
        .filter(|&q| {
            let t = config.theta(q);
            t < tol || (PI - t).abs() < tol
        })
        .collect()
}

/// Pins azimuthal angles left undetermined by polar angles at 0 or pi.
///
/// All angles are re-optimized on the similarity-transformed screening
/// functional at a small probe amplitude; the pinned azimuths are then
/// combined with the reference polar angles (the limit point of the
/// envelope minimizer as tau -> 0+). Without poles the reference is
/// returned unchanged.
pub fn resolve_degenerate_angles(
    problem: &ProblemInstance,
    generator: &PauliWord,
    reference: &QmfResult,
    opts: &RankOptions,
) -> QmfResult {
    let poles = pole_qubits(&reference.config, opts.angle_pole_tol);
    if poles.is_empty() {
        return reference.clone();
    }
    let h_eff = screening_functional(problem, reference);
    let h_probe = h_eff
        .similarity_transform(generator, opts.probe_tau)
        .expect("transform failed");

    // Warm starts: polar angles nudged off the poles, azimuths fanned out.
    let nudge = 1e-3;
    let base = reference.config.flat();
    let mut starts = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5e501f);
    for variant in 0..6 {
        let mut x = base.clone();
        for &q in &poles {
            x[2 * q] = if x[2 * q] < PI / 2.0 { nudge } else { PI - nudge };
            x[2 * q + 1] += match variant {
                0..=3 => variant as f64 * PI / 2.0,
                _ => rng.random_range(0.0..2.0 * PI),
            };
        }
        starts.push(x);
    }

    let objective = |x: &[f64]| meanfield::energy_and_gradient_flat(&h_probe, x);
    let (best, _) = meanfield::multistart_minimize(objective, starts, &opts.qmf.bfgs());

    // Keep the reference angles; adopt only the pinned azimuths.
    let pinned = BlochConfig::from_flat(&best.x);
    let mut angles: Vec<(f64, f64)> = reference.config.angles().to_vec();
    for &q in &poles {
        angles[q].1 = pinned.phi(q);
    }
    let config = BlochConfig::new(angles);
    let mut resolved = reference.clone();
    resolved.energy = coherent_expectation(&problem.hamiltonian, &config);
    resolved.config = config;
    resolved.converged = reference.converged && best.converged;
    resolved
}

/// Minimizes the transformed screening functional from every known
/// reference minimum plus a few seeded random starts; used by the
/// discontinuity probes.
fn probe_minimum(
    h_probe: &PauliSum,
    reference: &QmfResult,
    opts: &RankOptions,
    salt: u64,
) -> (f64, BlochConfig) {
    let mut starts: Vec<Vec<f64>> = Vec::new();
    let nudge = 1e-4;
    let mut push_start = |cfg: &BlochConfig| {
        let mut x = cfg.flat();
        for q in 0..cfg.n_qubits() {
            if x[2 * q] < nudge {
                x[2 * q] = nudge;
            } else if x[2 * q] > PI - nudge {
                x[2 * q] = PI - nudge;
            }
        }
        starts.push(x);
    };
    if reference.local_minima.is_empty() {
        push_start(&reference.config);
    } else {
        for (_, cfg) in &reference.local_minima {
            push_start(cfg);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ salt);
    for _ in 0..4 {
        starts.push(meanfield::random_start(&mut rng, h_probe.n_qubits()));
    }
    let objective = |x: &[f64]| meanfield::energy_and_gradient_flat(h_probe, x);
    let (best, _) = meanfield::multistart_minimize(objective, starts, &opts.qmf.bfgs());
    (best.value, BlochConfig::from_flat(&best.x))
}

/// Envelope derivative of the screening functional at amplitude tau,
/// evaluated at the minimizing angles of the transformed functional.
fn probe_derivative(
    h_eff: &PauliSum,
    generator: &PauliWord,
    reference: &QmfResult,
    tau: f64,
    opts: &RankOptions,
    salt: u64,
) -> f64 {
    let h_t = h_eff
        .similarity_transform(generator, tau)
        .expect("transform failed");
    let (_, omega_t) = probe_minimum(&h_t, reference, opts, salt);
    coherent_expectation(&grad_operator(&h_t, generator), &omega_t)
}

/// Detects a derivative discontinuity of the envelope at tau = 0.
///
/// The one-sided derivatives at +-probe_tau are compared against the
/// smooth prediction `2 probe_tau * d2` from the analytic relaxed second
/// derivative; a residual beyond `disc_tol` signals that the mean-field
/// minimum jumps between branches and the second derivative is invalid.
pub fn discontinuity_test(
    problem: &ProblemInstance,
    generator: &PauliWord,
    reference: &QmfResult,
    opts: &RankOptions,
) -> bool {
    screen_one_zero_grad(problem, generator, reference, opts).1
}

/// Second derivative of the envelope on the (resolved) reference, absent
/// when the discontinuity test fails.
pub fn second_derivative(
    problem: &ProblemInstance,
    generator: &PauliWord,
    reference: &QmfResult,
    opts: &RankOptions,
) -> Option<f64> {
    let (value, discontinuous) = screen_one_zero_grad(problem, generator, reference, opts);
    if discontinuous {
        None
    } else {
        Some(value)
    }
}

/// Shared pipeline: resolved second derivative plus discontinuity flag.
fn screen_one_zero_grad(
    problem: &ProblemInstance,
    generator: &PauliWord,
    reference: &QmfResult,
    opts: &RankOptions,
) -> (f64, bool) {
    let h_eff = screening_functional(problem, reference);
    // A generator commuting with the functional leaves it invariant.
    if h_eff
        .commutator_with_word(generator)
        .expect("register mismatch")
        .is_empty()
    {
        return (0.0, false);
    }
    let resolved = resolve_degenerate_angles(problem, generator, reference, opts);
    let (d2, _) = second_derivative_at(&h_eff, generator, &resolved.config, opts.pinv_cutoff);

    let d_plus = probe_derivative(&h_eff, generator, reference, opts.probe_tau, opts, 0x0b5e);
    let d_minus = probe_derivative(&h_eff, generator, reference, -opts.probe_tau, opts, 0xd00f);
    let smooth_prediction = 2.0 * opts.probe_tau * d2;
    let residual = ((d_plus - d_minus) - smooth_prediction).abs();
    (d2, residual > opts.disc_tol)
}

/// Full one-entangler energy lowering against the reference energy:
/// `min_(tau, Omega) E - E_ref <= 0`.
pub fn delta_e(
    problem: &ProblemInstance,
    generator: &PauliWord,
    reference: &QmfResult,
    opts: &RankOptions,
) -> (f64, bool) {
    let qcc_opts = QccOptions {
        restarts: opts.delta_restarts,
        seed: opts.seed,
        qmf: opts.qmf.clone(),
        eval: opts.eval.clone(),
        ..Default::default()
    };
    let r = qcc::qcc_minimize_with_reference(problem, &[*generator], reference, &qcc_opts)
        .expect("single-entangler minimization failed");
    (r.energy - reference.energy, r.converged)
}

#[derive(Debug, Clone)]
pub struct ScreenReport {
    pub reference: QmfResult,
    pub scores: Vec<EntanglerScore>,
}

/// Screens a generator pool against the mean-field reference.
///
/// First derivatives are evaluated for the whole pool; the relaxed second
/// derivative only for the zero-gradient residue; the full energy lowering
/// only for the top `top_k` of each tier. Output is sorted by
/// (tier, |tier score|) descending with a deterministic bitmask tie-break.
pub fn screen(problem: &ProblemInstance, pool: &[PauliWord], opts: &RankOptions) -> ScreenReport {
    let mut qmf_opts = opts.qmf.clone();
    qmf_opts.seed = opts.seed;
    let reference = if opts.constrained {
        meanfield::qmf_minimize_constrained(problem, opts.penalty_weight, &qmf_opts)
            .expect("constrained screening requires a spin-squared operator")
    } else {
        meanfield::qmf_minimize(problem, &qmf_opts)
    };

    let mut scores: Vec<EntanglerScore> = pool
        .par_iter()
        .map(|generator| {
            let d1 = first_derivative(problem, generator, &reference);
            if d1.abs() > opts.grad_tol {
                return EntanglerScore {
                    generator: *generator,
                    first_derivative: d1,
                    second_derivative: None,
                    delta_e: None,
                    delta_e_converged: None,
                    tier: Tier::Tier1,
                    discontinuity_flag: false,
                    constrained_reference: opts.constrained,
                };
            }
            let (d2, discontinuous) =
                screen_one_zero_grad(problem, generator, &reference, opts);
            let (second, tier) = if discontinuous {
                (None, Tier::Discarded)
            } else if d2 < -opts.curv_tol {
                (Some(d2), Tier::Tier2)
            } else {
                (Some(d2), Tier::Discarded)
            };
            EntanglerScore {
                generator: *generator,
                first_derivative: d1,
                second_derivative: second,
                delta_e: None,
                delta_e_converged: None,
                tier,
                discontinuity_flag: discontinuous,
                constrained_reference: opts.constrained,
            }
        })
        .collect();

    // Full energy lowering for the strongest candidates of each tier.
    let mut finalists: Vec<usize> = Vec::new();
    for tier in [Tier::Tier1, Tier::Tier2] {
        let mut members: Vec<usize> = (0..scores.len())
            .filter(|&i| scores[i].tier == tier)
            .collect();
        members.sort_by(|&a, &b| {
            tier_score(&scores[b])
                .partial_cmp(&tier_score(&scores[a]))
                .unwrap()
                .then_with(|| word_order(&scores[a].generator, &scores[b].generator))
        });
        finalists.extend(members.into_iter().take(opts.top_k));
    }
    let lowerings: Vec<(usize, f64, bool)> = finalists
        .par_iter()
        .map(|&i| {
            let (de, conv) = delta_e(problem, &scores[i].generator, &reference, opts);
            (i, de, conv)
        })
        .collect();
    for (i, de, conv) in lowerings {
        scores[i].delta_e = Some(de);
        scores[i].delta_e_converged = Some(conv);
    }

    scores.sort_by(|a, b| {
        a.tier
            .cmp(&b.tier)
            .then_with(|| tier_score(b).partial_cmp(&tier_score(a)).unwrap())
            .then_with(|| word_order(&a.generator, &b.generator))
    });

    ScreenReport { reference, scores }
}

fn tier_score(score: &EntanglerScore) -> f64 {
    match score.tier {
        Tier::Tier1 => score.first_derivative.abs(),
        Tier::Tier2 => score.second_derivative.map(|v| v.abs()).unwrap_or(0.0),
        Tier::Discarded => score.first_derivative.abs(),
    }
}

fn word_order(a: &PauliWord, b: &PauliWord) -> std::cmp::Ordering {
    (a.x_bits(), a.z_bits()).cmp(&(b.x_bits(), b.z_bits()))
}
