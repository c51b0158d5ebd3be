use crate::output::*;
use crate::{Cli, Command, OptimizerArgs};
use qcc_core::factor::{factorize, AmplitudeKind};
use qcc_core::hamio::{
    parse_entangler_list, parse_problem, parse_r_tag, reduce_problem, serialize_problem,
    ProblemInstance, SectorSpec,
};
use qcc_core::meanfield::{qmf_minimize, qmf_minimize_constrained, QmfOptions, QmfResult};
use qcc_core::pauli::{enumerate_entanglers, PauliWord};
use qcc_core::qcc::{qcc_minimize, QccOptions, QccResult};
use qcc_core::rank::{screen, RankOptions, ScreenReport};
use qcc_core::simstate::{exact_spectrum, DENSE_QUBIT_CAP};
use rayon::prelude::*;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

type CliResult = Result<ExitCode, String>;

pub fn run(cli: &Cli) -> CliResult {
    match &cli.command {
        Command::Rank {
            ham,
            pool,
            top,
            constrained,
            grad_tol,
            curv_tol,
            disc_tol,
            angle_pole_tol,
            probe_tau,
            pinv_cutoff,
            delta_restarts,
            opt,
        } => cmd_rank(
            cli,
            ham,
            pool,
            *top,
            *constrained,
            *grad_tol,
            *curv_tol,
            *disc_tol,
            *angle_pole_tol,
            *probe_tau,
            *pinv_cutoff,
            *delta_restarts,
            opt,
        ),
        Command::Optimize {
            ham,
            ents,
            constrained,
            qcc_restarts,
            tol_grad_qcc,
            opt,
        } => cmd_optimize(cli, ham, ents, *constrained, *qcc_restarts, *tol_grad_qcc, opt),
        Command::Scan {
            dir,
            ents,
            qcc_restarts,
            tol_grad_qcc,
            opt,
        } => cmd_scan(cli, dir, ents, *qcc_restarts, *tol_grad_qcc, opt),
        Command::Factorize { word } => cmd_factorize(cli, word),
        Command::Exact { ham, spectrum } => cmd_exact(cli, ham, *spectrum),
        Command::Taper { ham, sector } => cmd_taper(cli, ham, sector),
    }
}

fn load_problem(path: &Path) -> Result<ProblemInstance, String> {
    let text = fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse_problem(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn emit(cli: &Cli, content: &str) -> Result<(), String> {
    match &cli.out {
        Some(path) => fs::write(path, content)
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn qmf_options(cli: &Cli, opt: &OptimizerArgs) -> QmfOptions {
    QmfOptions {
        restarts: opt.restarts,
        seed: cli.seed,
        grad_tol: opt.tol_grad,
        ..Default::default()
    }
}

fn pool_from_arg(arg: &str, n_qubits: usize) -> Result<Vec<PauliWord>, String> {
    let (lo, hi) = match arg {
        "2q" => (2, 2),
        "all" => (2, n_qubits),
        other => {
            let len: usize = other
                .parse()
                .map_err(|_| format!("pool must be \"2q\", \"all\", or a length, got '{other}'"))?;
            (len, len)
        }
    };
    enumerate_entanglers(n_qubits, lo, hi).map_err(|e| e.to_string())
}

fn score_flags(s: &qcc_core::rank::EntanglerScore) -> String {
    let mut flags = Vec::new();
    if s.discontinuity_flag {
        flags.push("discontinuity");
    }
    if s.constrained_reference {
        flags.push("constrained");
    }
    if s.delta_e_converged == Some(false) {
        flags.push("delta-unconverged");
    }
    flags.join(";")
}

fn render_rank(report: &ScreenReport, format: &str) -> String {
    if format == "json" {
        let scores = json_array(report.scores.iter().map(|s| {
            JsonObject::new()
                .string("generator", &s.generator.to_string())
                .string("tier", s.tier.label())
                .number("d1", s.first_derivative)
                .number_opt("d2", s.second_derivative)
                .number_opt("delta_e", s.delta_e)
                .boolean("discontinuity", s.discontinuity_flag)
                .boolean("constrained", s.constrained_reference)
                .render()
        }));
        let reference = JsonObject::new()
            .number("energy", report.reference.energy)
            .number_opt("spin_expectation", report.reference.spin_expectation)
            .number_opt("number_expectation", report.reference.number_expectation)
            .boolean("constrained", report.reference.constrained)
            .boolean("converged", report.reference.converged)
            .render();
        let top = JsonObject::new()
            .raw("reference", reference)
            .raw("scores", scores)
            .render();
        format!("{top}\n")
    } else {
        let mut out = String::from("generator,tier,d1,d2,delta_e,flags\n");
        for s in &report.scores {
            out.push_str(&csv_line(&[
                s.generator.to_string(),
                s.tier.label().to_string(),
                g15(s.first_derivative),
                g15_opt(s.second_derivative),
                g15_opt(s.delta_e),
                score_flags(s),
            ]));
            out.push('\n');
        }
        out
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_rank(
    cli: &Cli,
    ham: &Path,
    pool_arg: &str,
    top: usize,
    constrained: bool,
    grad_tol: f64,
    curv_tol: f64,
    disc_tol: f64,
    angle_pole_tol: f64,
    probe_tau: f64,
    pinv_cutoff: f64,
    delta_restarts: usize,
    opt: &OptimizerArgs,
) -> CliResult {
    let problem = load_problem(ham)?;
    if constrained && problem.spin_sq_op.is_none() {
        return Err(format!(
            "{}: --constrained needs an `operator spin2` section",
            ham.display()
        ));
    }
    let pool = pool_from_arg(pool_arg, problem.n_qubits)?;
    let opts = RankOptions {
        grad_tol,
        curv_tol,
        disc_tol,
        angle_pole_tol,
        probe_tau,
        pinv_cutoff,
        top_k: top,
        constrained,
        penalty_weight: opt.penalty,
        seed: cli.seed,
        qmf: qmf_options(cli, opt),
        delta_restarts,
        ..Default::default()
    };
    let report = screen(&problem, &pool, &opts);
    emit(cli, &render_rank(&report, &cli.format))?;
    if !report.reference.converged {
        eprintln!("warning: mean-field reference did not converge");
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn render_optimize(
    problem: &ProblemInstance,
    result: &QccResult,
    e_exact: Option<f64>,
    format: &str,
) -> String {
    if format == "json" {
        let angles = json_array(
            result
                .config
                .angles()
                .iter()
                .map(|&(t, p)| format!("[{},{}]", g15(t), g15(p))),
        );
        let obj = JsonObject::new()
            .string("tag", &problem.geometry_tag)
            .integer("n_qubits", problem.n_qubits)
            .integer("n_entanglers", result.amplitudes.len())
            .integer("n_parameters", result.parameter_count)
            .number("e_reference", result.reference_energy)
            .number("e_qcc", result.energy)
            .number_opt("e_exact", e_exact)
            .number_opt("spin_expectation", result.spin_expectation)
            .number_opt("number_expectation", result.number_expectation)
            .boolean("converged", result.converged)
            .raw("amplitudes", number_array(&result.amplitudes))
            .raw("angles", angles)
            .raw("history", number_array(&result.history))
            .render();
        format!("{obj}\n")
    } else {
        let mut out = String::from(
            "tag,n_qubits,n_entanglers,n_parameters,e_reference,e_qcc,e_exact,spin_expectation,number_expectation,converged\n",
        );
        out.push_str(&csv_line(&[
            sanitize(&problem.geometry_tag),
            problem.n_qubits.to_string(),
            result.amplitudes.len().to_string(),
            result.parameter_count.to_string(),
            g15(result.reference_energy),
            g15(result.energy),
            g15_opt(e_exact),
            g15_opt(result.spin_expectation),
            g15_opt(result.number_expectation),
            result.converged.to_string(),
        ]));
        out.push('\n');
        out
    }
}

fn cmd_optimize(
    cli: &Cli,
    ham: &Path,
    ents: &Path,
    constrained: bool,
    qcc_restarts: usize,
    tol_grad_qcc: f64,
    opt: &OptimizerArgs,
) -> CliResult {
    let problem = load_problem(ham)?;
    let ents_text = fs::read_to_string(ents)
        .map_err(|e| format!("cannot read {}: {e}", ents.display()))?;
    let generators = parse_entangler_list(&ents_text, problem.n_qubits)
        .map_err(|e| format!("{}: {e}", ents.display()))?;
    let opts = QccOptions {
        restarts: qcc_restarts,
        seed: cli.seed,
        grad_tol: tol_grad_qcc,
        seed_from_constrained: constrained,
        penalty_weight: opt.penalty,
        qmf: qmf_options(cli, opt),
        ..Default::default()
    };
    let result = qcc_minimize(&problem, &generators, &opts).map_err(|e| e.to_string())?;
    let e_exact = if problem.n_qubits <= DENSE_QUBIT_CAP {
        Some(
            exact_spectrum(&problem.hamiltonian, false)
                .map_err(|e| e.to_string())?
                .ground_energy,
        )
    } else {
        None
    };
    emit(cli, &render_optimize(&problem, &result, e_exact, &cli.format))?;
    if !result.converged {
        eprintln!("warning: joint optimization did not converge");
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

struct ScanRow {
    tag: String,
    r: Option<f64>,
    e_exact: Option<f64>,
    e_qmf: Option<f64>,
    e_cqmf: Option<f64>,
    e_qcc: Option<f64>,
    s2_qmf: Option<f64>,
    s2_cqmf: Option<f64>,
    s2_qcc: Option<f64>,
    n_entanglers: usize,
    n_parameters: usize,
    qmf_converged: Option<bool>,
    cqmf_converged: Option<bool>,
    qcc_converged: Option<bool>,
    status: String,
}

impl ScanRow {
    fn failed(tag: String, status: String) -> ScanRow {
        ScanRow {
            tag,
            r: None,
            e_exact: None,
            e_qmf: None,
            e_cqmf: None,
            e_qcc: None,
            s2_qmf: None,
            s2_cqmf: None,
            s2_qcc: None,
            n_entanglers: 0,
            n_parameters: 0,
            qmf_converged: None,
            cqmf_converged: None,
            qcc_converged: None,
            status,
        }
    }
}

fn scan_one(
    path: &Path,
    ents_text: &str,
    cli: &Cli,
    qcc_restarts: usize,
    tol_grad_qcc: f64,
    opt: &OptimizerArgs,
) -> ScanRow {
    let name = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let problem = match load_problem(path) {
        Ok(p) => p,
        Err(e) => return ScanRow::failed(name, sanitize(&e)),
    };
    let generators = match parse_entangler_list(ents_text, problem.n_qubits) {
        Ok(g) => g,
        Err(e) => return ScanRow::failed(problem.geometry_tag.clone(), sanitize(&e.to_string())),
    };
    let qmf_opts = qmf_options(cli, opt);
    let qmf = qmf_minimize(&problem, &qmf_opts);
    let cqmf: Option<QmfResult> = problem
        .spin_sq_op
        .as_ref()
        .map(|_| qmf_minimize_constrained(&problem, opt.penalty, &qmf_opts).unwrap());
    let qcc_opts = QccOptions {
        restarts: qcc_restarts,
        seed: cli.seed,
        grad_tol: tol_grad_qcc,
        penalty_weight: opt.penalty,
        qmf: qmf_opts,
        ..Default::default()
    };
    let qcc = match qcc_core::qcc::qcc_minimize_with_reference(&problem, &generators, &qmf, &qcc_opts)
    {
        Ok(r) => r,
        Err(e) => return ScanRow::failed(problem.geometry_tag.clone(), sanitize(&e.to_string())),
    };
    let e_exact = if problem.n_qubits <= DENSE_QUBIT_CAP {
        exact_spectrum(&problem.hamiltonian, false)
            .ok()
            .map(|s| s.ground_energy)
    } else {
        None
    };
    ScanRow {
        tag: problem.geometry_tag.clone(),
        r: parse_r_tag(&problem.geometry_tag),
        e_exact,
        e_qmf: Some(qmf.energy),
        e_cqmf: cqmf.as_ref().map(|r| r.energy),
        e_qcc: Some(qcc.energy),
        s2_qmf: qmf.spin_expectation,
        s2_cqmf: cqmf.as_ref().and_then(|r| r.spin_expectation),
        s2_qcc: qcc.spin_expectation,
        n_entanglers: generators.len(),
        n_parameters: qcc.parameter_count,
        qmf_converged: Some(qmf.converged),
        cqmf_converged: cqmf.as_ref().map(|r| r.converged),
        qcc_converged: Some(qcc.converged),
        status: "ok".to_string(),
    }
}

fn sanitize(msg: &str) -> String {
    msg.replace([',', '\n'], ";")
}

fn opt_bool(b: Option<bool>) -> String {
    b.map(|v| v.to_string()).unwrap_or_default()
}

fn render_scan(rows: &[ScanRow], format: &str) -> String {
    if format == "json" {
        let items = json_array(rows.iter().map(|r| {
            JsonObject::new()
                .string("tag", &r.tag)
                .number_opt("r_angstrom", r.r)
                .number_opt("e_exact", r.e_exact)
                .number_opt("e_qmf", r.e_qmf)
                .number_opt("e_cqmf", r.e_cqmf)
                .number_opt("e_qcc", r.e_qcc)
                .number_opt("s2_qmf", r.s2_qmf)
                .number_opt("s2_cqmf", r.s2_cqmf)
                .number_opt("s2_qcc", r.s2_qcc)
                .integer("n_entanglers", r.n_entanglers)
                .integer("n_parameters", r.n_parameters)
                .string("qmf_converged", &opt_bool(r.qmf_converged))
                .string("cqmf_converged", &opt_bool(r.cqmf_converged))
                .string("qcc_converged", &opt_bool(r.qcc_converged))
                .string("status", &r.status)
                .render()
        }));
        format!("{items}\n")
    } else {
        let mut out = String::from(
            "tag,r_angstrom,e_exact,e_qmf,e_cqmf,e_qcc,s2_qmf,s2_cqmf,s2_qcc,n_entanglers,n_parameters,qmf_converged,cqmf_converged,qcc_converged,status\n",
        );
        for r in rows {
            out.push_str(&csv_line(&[
                sanitize(&r.tag),
                r.r.map(|v| format!("{v}")).unwrap_or_default(),
                g15_opt(r.e_exact),
                g15_opt(r.e_qmf),
                g15_opt(r.e_cqmf),
                g15_opt(r.e_qcc),
                g15_opt(r.s2_qmf),
                g15_opt(r.s2_cqmf),
                g15_opt(r.s2_qcc),
                r.n_entanglers.to_string(),
                r.n_parameters.to_string(),
                opt_bool(r.qmf_converged),
                opt_bool(r.cqmf_converged),
                opt_bool(r.qcc_converged),
                r.status.clone(),
            ]));
            out.push('\n');
        }
        out
    }
}

fn cmd_scan(
    cli: &Cli,
    dir: &Path,
    ents: &Path,
    qcc_restarts: usize,
    tol_grad_qcc: f64,
    opt: &OptimizerArgs,
) -> CliResult {
    let ents_text = fs::read_to_string(ents)
        .map_err(|e| format!("cannot read {}: {e}", ents.display()))?;
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| format!("cannot read {}: {e}", dir.display()))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().map(|e| e == "ham").unwrap_or(false))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(format!("no .ham files in {}", dir.display()));
    }
    let mut rows: Vec<ScanRow> = files
        .par_iter()
        .map(|path| scan_one(path, &ents_text, cli, qcc_restarts, tol_grad_qcc, opt))
        .collect();
    rows.sort_by(|a, b| match (a.r, b.r) {
        (Some(x), Some(y)) => x.partial_cmp(&y).unwrap(),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => a.tag.cmp(&b.tag),
    });
    emit(cli, &render_scan(&rows, &cli.format))?;
    if rows.iter().all(|r| r.status != "ok") {
        return Err("every geometry failed".to_string());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_factorize(cli: &Cli, word_text: &str) -> CliResult {
    let word: PauliWord = word_text
        .parse()
        .map_err(|e: qcc_core::pauli::PauliError| e.to_string())?;
    let factored = factorize(&word).map_err(|e| e.to_string())?;
    let content = if cli.format == "json" {
        let factors = json_array(factored.factors().iter().map(|(g, kind)| {
            JsonObject::new()
                .string("generator", &g.to_string())
                .string("amplitude", amplitude_label(*kind))
                .render()
        }));
        let obj = JsonObject::new()
            .string("word", &word.to_string())
            .raw("factors", factors)
            .integer("two_qubit_count", factored.len())
            .render();
        format!("{obj}\n")
    } else {
        let mut out = String::new();
        for (g, kind) in factored.factors() {
            out.push_str(&format!("EXP({}) {}\n", amplitude_label(*kind), g));
        }
        out.push_str(&format!("two-qubit factors: {}\n", factored.len()));
        out
    };
    emit(cli, &content)?;
    Ok(ExitCode::SUCCESS)
}

fn amplitude_label(kind: AmplitudeKind) -> &'static str {
    match kind {
        AmplitudeKind::Variable => "-i*t",
        AmplitudeKind::FixedPlus => "+i*pi/4",
        AmplitudeKind::FixedMinus => "-i*pi/4",
    }
}

fn cmd_exact(cli: &Cli, ham: &Path, spectrum: bool) -> CliResult {
    let problem = load_problem(ham)?;
    let result = exact_spectrum(&problem.hamiltonian, false).map_err(|e| e.to_string())?;
    let content = if cli.format == "json" {
        let mut obj = JsonObject::new()
            .string("tag", &problem.geometry_tag)
            .integer("n_qubits", problem.n_qubits)
            .number("ground_energy", result.ground_energy);
        if spectrum {
            obj = obj.raw("eigenvalues", number_array(&result.eigenvalues));
        }
        format!("{}\n", obj.render())
    } else if spectrum {
        let mut out = String::from("index,eigenvalue\n");
        for (i, e) in result.eigenvalues.iter().enumerate() {
            out.push_str(&format!("{i},{}\n", g15(*e)));
        }
        out
    } else {
        format!(
            "tag,n_qubits,ground_energy\n{},{},{}\n",
            sanitize(&problem.geometry_tag),
            problem.n_qubits,
            g15(result.ground_energy)
        )
    };
    emit(cli, &content)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_taper(cli: &Cli, ham: &Path, sector: &str) -> CliResult {
    let problem = load_problem(ham)?;
    let spec = SectorSpec::parse(sector).map_err(|e| e.to_string())?;
    let reduced = reduce_problem(&problem, &spec).map_err(|e| e.to_string())?;
    emit(cli, &serialize_problem(&reduced))?;
    Ok(ExitCode::SUCCESS)
}
