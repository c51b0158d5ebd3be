//! Acceptance suite: one test per release criterion, each printing a
//! pass/fail line (visible with `cargo test -- --nocapture`).
//!
//! Quantitative criteria run against the committed molecular fixture
//! files; property criteria run on seeded random instances.

use num_complex::Complex64;
use qcc_core::factor::{apply_factorized, factorize};
use qcc_core::hamio::{parse_problem, reduce_problem, ProblemInstance, SectorSpec};
use qcc_core::meanfield::{
    coherent_expectation, qmf_minimize, qmf_minimize_constrained, BlochConfig, QmfOptions,
};
use qcc_core::pauli::{
    enumerate_entanglers, parse_word_sized, Axis, PauliSum, PauliWord,
};
use qcc_core::qcc::{
    amplitude_gradient, qcc_energy, qcc_minimize_with_reference, EntanglerSet, EvalOptions,
    EvalStrategy, QccOptions,
};
use qcc_core::rank::{
    discontinuity_test, first_derivative, relaxation_data, screen, second_derivative, RankOptions,
    Tier,
};
use qcc_core::simstate::{exact_spectrum, to_matrix, StateVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;
use std::time::Instant;

fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(rel)
}

fn load(rel: &str) -> ProblemInstance {
    let path = fixture(rel);
    let text = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("missing fixture {}: {e}", path.display()));
    parse_problem(&text).unwrap()
}

fn fixture_grid(dir: &str) -> Vec<ProblemInstance> {
    let mut files: Vec<_> = std::fs::read_dir(fixture(dir))
        .unwrap()
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().map(|x| x == "ham").unwrap_or(false))
        .collect();
    files.sort();
    files
        .iter()
        .map(|p| parse_problem(&std::fs::read_to_string(p).unwrap()).unwrap())
        .collect()
}

fn random_word(rng: &mut ChaCha8Rng, n: usize, len: usize) -> PauliWord {
    let mut qubits: Vec<usize> = (0..n).collect();
    for i in (1..qubits.len()).rev() {
        let j = rng.random_range(0..=i);
        qubits.swap(i, j);
    }
    let axes: Vec<(usize, Axis)> = qubits
        .into_iter()
        .take(len)
        .map(|q| {
            let axis = match rng.random_range(0..3) {
                0 => Axis::X,
                1 => Axis::Y,
                _ => Axis::Z,
            };
            (q, axis)
        })
        .collect();
    PauliWord::from_axes(n, &axes).unwrap()
}

fn random_hermitian_sum(rng: &mut ChaCha8Rng, n: usize, terms: usize) -> PauliSum {
    let mut h = PauliSum::new(n);
    for _ in 0..terms {
        let len = rng.random_range(1..=n);
        let w = random_word(rng, n, len);
        h.add_term(&w, Complex64::new(rng.random_range(-1.0..1.0), 0.0))
            .unwrap();
    }
    if h.is_empty() {
        h.add_term(
            &PauliWord::single(n, 0, Axis::Z).unwrap(),
            Complex64::new(0.5, 0.0),
        )
        .unwrap();
    }
    h
}

fn bare_problem(h: PauliSum) -> ProblemInstance {
    ProblemInstance {
        n_qubits: h.n_qubits(),
        geometry_tag: String::new(),
        hamiltonian: h,
        number_op: None,
        spin_sq_op: None,
    }
}

/// Criterion 1: factorization exactness over random words of length 3-8 on
/// up to 8 qubits; every generator at most two qubits, one variable
/// parameter, max-norm deviation below 1e-12.
#[test]
fn criterion_1_factorization_exactness() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let n = 8;
    let dim = 1usize << n;
    let mut worst = 0.0f64;
    for sample in 0..1000 {
        let len = 3 + sample % 6; // cycle lengths 3..=8
        let word = random_word(&mut rng, n, len);
        let t = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
        let f = factorize(&word).unwrap();
        assert!(f.max_generator_length() <= 2, "generator wider than 2 qubits");
        assert_eq!(f.variable_count(), 1, "variable parameter count != 1");
        // Column-by-column comparison against exp(-i t P) = cos t - i sin t P.
        let (c, s) = (t.cos(), t.sin());
        for col in 0..dim {
            let basis = StateVector::basis_state(n, col);
            let direct_p = basis.apply_word(&word).unwrap();
            let got = apply_factorized(&basis, &f, t).unwrap();
            for j in 0..dim {
                let expect =
                    c * basis.amplitudes()[j] + Complex64::new(0.0, -s) * direct_p.amplitudes()[j];
                worst = worst.max((got.amplitudes()[j] - expect).norm());
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(worst < 1e-12, "max deviation {worst:.3e}");
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    println!(
        "criterion 1 (factorization exactness): PASS  max deviation {worst:.2e}, {:.1}s",
        elapsed.as_secs_f64()
    );
}

/// Criterion 2: the closed-form similarity transform equals dense
/// conjugation to 1e-12 on 500 random instances with up to 6 qubits.
#[test]
fn criterion_2_transform_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let n = rng.random_range(2..=6);
        let h = random_hermitian_sum(&mut rng, n, 8);
        let p_len = rng.random_range(1..=n);
        let p = random_word(&mut rng, n, p_len);
        let tau = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
        let transformed = h.similarity_transform(&p, tau).unwrap();
        let got = to_matrix(&transformed).unwrap();
        // Dense conjugation: U = exp(-i tau P / 2) = cos(tau/2) I - i sin(tau/2) P.
        let dim = 1usize << n;
        let p_mat = to_matrix(&PauliSum::from_terms(n, &[(p, Complex64::new(1.0, 0.0))]).unwrap())
            .unwrap();
        let mut u = p_mat.scale((tau / 2.0).sin()) * Complex64::new(0.0, -1.0);
        for i in 0..dim {
            u[(i, i)] += Complex64::new((tau / 2.0).cos(), 0.0);
        }
        let h_mat = to_matrix(&h).unwrap();
        let expect = u.adjoint() * h_mat * &u;
        for i in 0..dim {
            for j in 0..dim {
                worst = worst.max((got[(i, j)] - expect[(i, j)]).norm());
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(worst < 1e-12, "max deviation {worst:.3e}");
    assert!(elapsed.as_secs_f64() < 20.0, "took {elapsed:?}");
    println!(
        "criterion 2 (transform oracle equivalence): PASS  max deviation {worst:.2e}, {:.1}s",
        elapsed.as_secs_f64()
    );
}

/// Independent envelope oracle: E(tau) = min over angles of the
/// transformed expectation, by multi-start mean-field minimization.
fn envelope(problem: &ProblemInstance, gen: &PauliWord, tau: f64, seed: u64) -> f64 {
    let mut p = problem.clone();
    p.hamiltonian = p.hamiltonian.similarity_transform(gen, tau).unwrap();
    let opts = QmfOptions {
        restarts: 24,
        seed,
        ..Default::default()
    };
    qmf_minimize(&p, &opts).energy
}

/// Criterion 3: analytic derivatives against finite differences --
/// first/second envelope derivatives, the c/D relaxation blocks, and the
/// amplitude gradient.
#[test]
fn criterion_3_derivative_correctness() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let opts = RankOptions::default();
    let mut tested_envelope = 0;
    let mut flagged = 0;

    for _case in 0..200 {
        let n = rng.random_range(2..=3);
        let h = random_hermitian_sum(&mut rng, n, 6);
        let problem = bare_problem(h.clone());
        let gen_len = rng.random_range(2..=n);
        let gen = random_word(&mut rng, n, gen_len);
        if h.commutator_with_word(&gen).unwrap().is_empty() {
            continue;
        }
        let reference = qmf_minimize(&problem, &QmfOptions::default());

        // (c) relaxation blocks against finite differences of the
        // frozen-angle energy at the reference point.
        let data = relaxation_data(&problem, &gen, &reference, &opts);
        let flat = reference.config.flat();
        let g_op = qcc_core::rank::grad_operator(&h, &gen);
        let step = 1e-5;
        for i in 0..2 * n {
            let mut plus = flat.clone();
            plus[i] += step;
            let mut minus = flat.clone();
            minus[i] -= step;
            let c_fd = (coherent_expectation(&g_op, &BlochConfig::from_flat(&plus))
                - coherent_expectation(&g_op, &BlochConfig::from_flat(&minus)))
                / (2.0 * step);
            assert!(
                (data.c_vector[i] - c_fd).abs() < 1e-6,
                "c[{i}] {} vs fd {}",
                data.c_vector[i],
                c_fd
            );
            // Second differences need a larger step to stay above the
            // f64 rounding floor (noise ~ eps/step^2).
            let step2 = 1e-4;
            for j in 0..2 * n {
                let mut pp = flat.clone();
                pp[i] += step2;
                pp[j] += step2;
                let mut pm = flat.clone();
                pm[i] += step2;
                pm[j] -= step2;
                let mut mp = flat.clone();
                mp[i] -= step2;
                mp[j] += step2;
                let mut mm = flat.clone();
                mm[i] -= step2;
                mm[j] -= step2;
                let d_fd = (coherent_expectation(&h, &BlochConfig::from_flat(&pp))
                    - coherent_expectation(&h, &BlochConfig::from_flat(&pm))
                    - coherent_expectation(&h, &BlochConfig::from_flat(&mp))
                    + coherent_expectation(&h, &BlochConfig::from_flat(&mm)))
                    / (4.0 * step2 * step2);
                assert!(
                    (data.d_matrix[(i, j)] - d_fd).abs() < 1e-6,
                    "D[{i},{j}] {} vs fd {}",
                    data.d_matrix[(i, j)],
                    d_fd
                );
            }
        }

        // (d) amplitude gradient against finite differences.
        let gens = vec![gen, random_word(&mut rng, n, 2)];
        if let Ok(mut ents) = EntanglerSet::new(n, &gens) {
            let taus: Vec<f64> = (0..2).map(|_| rng.random_range(-1.0..1.0)).collect();
            ents.set_amplitudes(&taus);
            let omega = BlochConfig::from_flat(
                &(0..2 * n)
                    .map(|_| rng.random_range(0.0..std::f64::consts::PI))
                    .collect::<Vec<_>>(),
            );
            let grad = amplitude_gradient(&problem, &ents, &omega).unwrap();
            let eval = EvalOptions {
                strategy: EvalStrategy::Statevector,
                ..Default::default()
            };
            for k in 0..2 {
                let mut tp = taus.clone();
                tp[k] += step;
                let mut tm = taus.clone();
                tm[k] -= step;
                let mut ep = ents.clone();
                ep.set_amplitudes(&tp);
                let mut em = ents.clone();
                em.set_amplitudes(&tm);
                let fd = (qcc_energy(&problem, &ep, &omega, &eval).unwrap()
                    - qcc_energy(&problem, &em, &omega, &eval).unwrap())
                    / (2.0 * step);
                assert!(
                    (grad[k] - fd).abs() < 1e-7,
                    "amplitude grad[{k}] {} vs fd {}",
                    grad[k],
                    fd
                );
            }
        }

        // (a)+(b) envelope derivatives, skipping discontinuity-flagged
        // cases. The exclusion filter runs tighter than the production
        // flag: a kink residual below the production tolerance (1e-4)
        // still admits one-sided curvature mismatch up to 0.05, which the
        // central-difference envelope comparison cannot absorb.
        let strict = RankOptions {
            disc_tol: 1e-6,
            ..opts.clone()
        };
        if discontinuity_test(&problem, &gen, &reference, &strict) {
            flagged += 1;
            continue;
        }
        // All three envelope values come from the same solver settings and
        // seed, so residual convergence offsets cancel in the differences.
        let h_fd = 1e-3;
        let e0 = envelope(&problem, &gen, 0.0, 91);
        let ep = envelope(&problem, &gen, h_fd, 91);
        let em = envelope(&problem, &gen, -h_fd, 91);
        let d1_fd = (ep - em) / (2.0 * h_fd);
        let d1 = first_derivative(&problem, &gen, &reference);
        assert!(
            (d1 - d1_fd).abs() < 1e-4,
            "d1 {} vs envelope fd {}",
            d1,
            d1_fd
        );
        let d2_fd = (ep + em - 2.0 * e0) / (h_fd * h_fd);
        let d2 = second_derivative(&problem, &gen, &reference, &opts)
            .expect("unflagged case must have a second derivative");
        // FD noise floor: converged energies carry ~1e-11, so the quotient
        // carries ~4e-5 absolute; apply the relative tolerance above it.
        let tol = (1e-3 * d2_fd.abs()).max(1e-4);
        assert!(
            (d2 - d2_fd).abs() < tol,
            "d2 {} vs envelope fd {} (tol {tol:.1e})",
            d2,
            d2_fd
        );
        tested_envelope += 1;
    }
    let elapsed = start.elapsed();
    assert!(tested_envelope >= 100, "only {tested_envelope} envelope cases");
    assert!(elapsed.as_secs_f64() < 120.0, "took {elapsed:?}");
    println!(
        "criterion 3 (derivative correctness): PASS  {tested_envelope} envelope cases, {flagged} flagged discontinuous, {:.1}s",
        elapsed.as_secs_f64()
    );
}

/// Criterion 4: H2 entangler screening table at R = 1.0 A.
#[test]
fn criterion_4_h2_screening_table() {
    let problem = load("h2/h2_R1.00.ham");
    let pool = enumerate_entanglers(4, 2, 2).unwrap();
    assert_eq!(pool.len(), 54);
    let opts = RankOptions::default();
    let report = screen(&problem, &pool, &opts);

    let lowering: Vec<_> = report
        .scores
        .iter()
        .filter(|s| s.delta_e.map(|d| d < -1e-6).unwrap_or(false))
        .collect();
    assert_eq!(lowering.len(), 6, "expected exactly 6 lowering entanglers");
    let expected: Vec<PauliWord> = ["X2 Y0", "Y2 X0", "Z2 Y0", "Z2 X0", "Y2 Z0", "X2 Z0"]
        .iter()
        .map(|t| parse_word_sized(t, 4).unwrap())
        .collect();
    for w in &expected {
        assert!(
            lowering.iter().any(|s| s.generator == *w),
            "{w} missing from the lowering set"
        );
    }
    for s in &lowering {
        let de = s.delta_e.unwrap();
        assert!(
            (de - (-0.035041681)).abs() < 2e-3,
            "{}: delta_e {de}",
            s.generator
        );
    }
    // The six are related by single-qubit frame rotations, so their
    // lowerings are degenerate well below the table tolerance.
    let de_min = lowering.iter().map(|s| s.delta_e.unwrap()).fold(f64::INFINITY, f64::min);
    let de_max = lowering.iter().map(|s| s.delta_e.unwrap()).fold(f64::NEG_INFINITY, f64::max);
    assert!(de_max - de_min < 1e-6, "frame-rotation family not degenerate");

    let tier1: Vec<_> = report
        .scores
        .iter()
        .filter(|s| s.tier == Tier::Tier1)
        .collect();
    assert_eq!(tier1.len(), 2);
    let mut d1s: Vec<f64> = tier1.iter().map(|s| s.first_derivative).collect();
    d1s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert!((d1s[0] - (-0.196791)).abs() < 2e-3, "d1- {}", d1s[0]);
    assert!((d1s[1] - 0.196791).abs() < 2e-3, "d1+ {}", d1s[1]);

    // Second derivatives: the tier-1 value via the dedicated operation,
    // the tier-2 values from the screen itself.
    let x2y0 = parse_word_sized("X2 Y0", 4).unwrap();
    let d2_tier1 = second_derivative(&problem, &x2y0, &report.reference, &opts).unwrap();
    assert!((d2_tier1 - 0.5342956).abs() < 2e-3, "d2(x2y0) {d2_tier1}");
    let d2_of = |text: &str| -> f64 {
        let w = parse_word_sized(text, 4).unwrap();
        report
            .scores
            .iter()
            .find(|s| s.generator == w)
            .unwrap()
            .second_derivative
            .unwrap()
    };
    for t in ["Z2 Y0", "Z2 X0"] {
        assert!((d2_of(t) - (-0.0509)).abs() < 2e-3, "d2({t}) {}", d2_of(t));
    }
    for t in ["Y2 Z0", "X2 Z0"] {
        assert!(
            (d2_of(t) - (-0.049314664)).abs() < 2e-3,
            "d2({t}) {}",
            d2_of(t)
        );
    }
    println!(
        "criterion 4 (H2 screening table): PASS  6 lowering, tier1 d1 = {:+.6}/{:+.6}, d2 = {:+.6}/{:+.6}/{:+.6}",
        d1s[0], d1s[1], d2_tier1, d2_of("Z2 Y0"), d2_of("Y2 Z0")
    );
}

/// Criterion 5: the single entangler x2 y0 reaches exact diagonalization
/// within 1e-6 Ha at every H2 grid geometry.
#[test]
fn criterion_5_h2_exactness() {
    let start = Instant::now();
    let problems = fixture_grid("h2");
    assert!(problems.len() >= 20, "H2 grid has {} files", problems.len());
    let gen = parse_word_sized("X2 Y0", 4).unwrap();
    let opts = QccOptions::default();
    let mut worst = 0.0f64;
    for problem in &problems {
        let exact = exact_spectrum(&problem.hamiltonian, false).unwrap().ground_energy;
        let qmf = qmf_minimize(problem, &opts.qmf);
        let r = qcc_minimize_with_reference(problem, &[gen], &qmf, &opts).unwrap();
        let err = (r.energy - exact).abs();
        worst = worst.max(err);
        assert!(
            err < 1e-6,
            "{}: |E_QCC - E_exact| = {err:.3e}",
            problem.geometry_tag
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    println!(
        "criterion 5 (H2 exactness): PASS  max error {worst:.2e} over {} geometries, {:.1}s",
        problems.len(),
        elapsed.as_secs_f64()
    );
}

/// Reference screening values for the seven LiH entanglers:
/// (generator, first derivative, energy lowering).
fn lih_reference_entanglers() -> Vec<(&'static str, f64, f64)> {
    vec![
        ("X2 X1 Y0", -0.079216013, -0.090884078),
        ("Z3 Y2 Z1 X0", -0.078106108, -0.090861713),
        ("X2 Y1 X0", -0.079216012, -0.090701597),
        ("Z3 X2 X1 Y0", -0.079216013, -0.0895746),
        ("X3 Y2 Z1 X0", -0.079216012, -0.0895746),
        ("Z3 X2 Y1 X0", -0.079216012, -0.088714096),
        ("Y3 X2 Z1 X0", -0.079216012, -0.088714096),
    ]
}

/// Criterion 6: LiH pipeline -- term counts through tapering, the
/// constrained screening table at R = 3.2, and chemical accuracy of the
/// seven-entangler ansatz over the whole curve.
#[test]
fn criterion_6_lih_pipeline() {
    let start = Instant::now();

    // 6a: 118 terms on 6 qubits; the chosen sector has 100 terms on 4.
    let full = load("lih6/lih6_R3.20.ham");
    assert_eq!(full.hamiltonian.len(), 118);
    assert_eq!(full.hamiltonian.stationary_qubits(), vec![2, 5]);
    let sector = SectorSpec::parse("2:-1,5:+1").unwrap();
    let reduced = reduce_problem(&full, &sector).unwrap();
    assert_eq!(reduced.hamiltonian.n_qubits(), 4);
    assert_eq!(reduced.hamiltonian.len(), 100);
    // The committed tapered fixture is exactly this reduction.
    let committed = load("lih/lih_R3.20.ham");
    assert_eq!(committed.hamiltonian.len(), 100);
    for (word, coeff) in reduced.hamiltonian.terms() {
        assert!(
            (committed.hamiltonian.coefficient(&word) - coeff).norm() < 1e-12,
            "committed tapered fixture disagrees on {word}"
        );
    }

    // 6b: constrained screening reproduces the reference derivative and
    // energy-lowering values.
    let opts = RankOptions {
        constrained: true,
        ..Default::default()
    };
    let pool = enumerate_entanglers(4, 2, 4).unwrap();
    let report = screen(&committed, &pool, &opts);
    for (text, d1_ref, de_ref) in lih_reference_entanglers() {
        let w = parse_word_sized(text, 4).unwrap();
        let s = report
            .scores
            .iter()
            .find(|s| s.generator == w)
            .unwrap_or_else(|| panic!("{text} not screened"));
        assert!(
            (s.first_derivative - d1_ref).abs() < 2e-3,
            "{text}: d1 {} vs {d1_ref}",
            s.first_derivative
        );
        let de = s
            .delta_e
            .unwrap_or_else(|| panic!("{text} not an energy-lowering finalist"));
        assert!((de - de_ref).abs() < 2e-3, "{text}: delta_e {de} vs {de_ref}");
    }

    // 6c: seven entanglers give chemical accuracy over the whole curve.
    let problems = fixture_grid("lih");
    assert_eq!(problems.len(), 21);
    let generators: Vec<PauliWord> = lih_reference_entanglers()
        .iter()
        .map(|(t, _, _)| parse_word_sized(t, 4).unwrap())
        .collect();
    let qcc_opts = QccOptions::default();
    let mut worst = 0.0f64;
    for problem in &problems {
        let exact = exact_spectrum(&problem.hamiltonian, false).unwrap().ground_energy;
        let qmf = qmf_minimize(problem, &qcc_opts.qmf);
        let r = qcc_minimize_with_reference(problem, &generators, &qmf, &qcc_opts).unwrap();
        let err = (r.energy - exact).abs();
        worst = worst.max(err);
        assert!(
            err < 1.6e-3,
            "{}: |E_QCC - E_exact| = {err:.3e} above chemical accuracy",
            problem.geometry_tag
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 600.0, "took {elapsed:?}");
    println!(
        "criterion 6 (LiH pipeline): PASS  118 -> 100 terms, table values matched, max curve error {worst:.2e}, {:.1}s",
        elapsed.as_secs_f64()
    );
}

/// Criterion 7: spin-symmetry behavior on stretched LiH. The mean-field
/// clauses hold; the QCC purity clause is asserted as specified.
#[test]
fn criterion_7_symmetry_behavior() {
    let problems: Vec<ProblemInstance> = fixture_grid("lih")
        .into_iter()
        .filter(|p| p.bond_length().map(|r| r >= 3.5).unwrap_or(false))
        .collect();
    assert!(problems.len() >= 7);
    let qmf_opts = QmfOptions::default();
    let qcc_opts = QccOptions::default();
    let generators: Vec<PauliWord> = lih_reference_entanglers()
        .iter()
        .map(|(t, _, _)| parse_word_sized(t, 4).unwrap())
        .collect();
    let mut qcc_s2_max = 0.0f64;
    let mut qcc_s2_where = String::new();
    for problem in &problems {
        let tag = &problem.geometry_tag;
        let free = qmf_minimize(problem, &qmf_opts);
        let s2_free = free.spin_expectation.unwrap();
        assert!(s2_free > 0.05, "{tag}: unconstrained <S2> = {s2_free}");
        let constrained = qmf_minimize_constrained(problem, 2.0, &qmf_opts).unwrap();
        let s2_con = constrained.spin_expectation.unwrap();
        assert!(s2_con < 1e-6, "{tag}: constrained <S2> = {s2_con}");
        assert!(
            constrained.energy >= free.energy - 1e-9,
            "{tag}: constrained energy below unconstrained"
        );
        let qcc = qcc_minimize_with_reference(problem, &generators, &free, &qcc_opts).unwrap();
        assert!(qcc.converged, "{tag}: QCC did not converge");
        let s2_qcc = qcc.spin_expectation.unwrap();
        if s2_qcc > qcc_s2_max {
            qcc_s2_max = s2_qcc;
            qcc_s2_where = tag.clone();
        }
    }
    // As specified: the converged QCC state is required to be spin-pure.
    // On these fixtures the singlet-triplet gap collapses faster than the
    // seven-entangler ansatz error near dissociation, so the variational
    // optimum mixes the quasi-degenerate triplet; see the failure message.
    if qcc_s2_max < 1e-4 {
        println!("criterion 7 (symmetry behavior): PASS  max QCC <S2> = {qcc_s2_max:.2e}");
    } else {
        println!(
            "criterion 7 (symmetry behavior): FAIL  QCC <S2> reaches {qcc_s2_max:.3} at {qcc_s2_where} (> 1e-4); mean-field clauses passed"
        );
        panic!(
            "QCC <S2> = {qcc_s2_max:.3} at {qcc_s2_where} exceeds 1e-4: the energy-minimizing \
             ansatz mixes the quasi-degenerate triplet once the singlet-triplet gap (1.8e-4 Ha \
             at R=5.0) falls below the ansatz error; no bare-energy optimizer can hold the \
             stated purity here"
        );
    }
}

/// Criterion 8: variational ordering and parameter count on the LiH scan.
#[test]
fn criterion_8_variational_ordering() {
    let problems = fixture_grid("lih");
    let generators: Vec<PauliWord> = lih_reference_entanglers()
        .iter()
        .map(|(t, _, _)| parse_word_sized(t, 4).unwrap())
        .collect();
    let qcc_opts = QccOptions::default();
    for problem in &problems {
        let exact = exact_spectrum(&problem.hamiltonian, false).unwrap().ground_energy;
        let qmf = qmf_minimize(problem, &qcc_opts.qmf);
        let r = qcc_minimize_with_reference(problem, &generators, &qmf, &qcc_opts).unwrap();
        let tag = &problem.geometry_tag;
        assert!(exact <= r.energy + 1e-9, "{tag}: E_exact > E_QCC");
        assert!(r.energy <= qmf.energy + 1e-9, "{tag}: E_QCC > E_QMF");
        assert_eq!(r.parameter_count, 2 * 4 + 7, "{tag}: parameter count");
    }
    println!(
        "criterion 8 (variational ordering): PASS  E_exact <= E_QCC <= E_QMF on {} rows, 15 parameters",
        problems.len()
    );
}

/// Criterion 9: entangler enumeration counts at four qubits.
#[test]
fn criterion_9_enumeration_counts() {
    let all = enumerate_entanglers(4, 2, 4).unwrap();
    let two = enumerate_entanglers(4, 2, 2).unwrap();
    assert_eq!(all.len(), 243);
    assert_eq!(two.len(), 54);
    println!("criterion 9 (enumeration counts): PASS  243 total, 54 two-qubit");
}
