//! Ingestion of qubit Hamiltonians and symmetry operators from text files,
//! plus stationary-qubit sector reduction (tapering).
//!
//! File format (UTF-8, line oriented):
//!
//! ```text
//! # comment
//! nqubits 4
//! tag R=1.00
//! term -0.8105479805373279 I
//! term 0.17141282644776892 Z0
//! operator number
//! term 2.0 I
//! operator spin2
//! term 0.75 Z1 Z0
//! ```
//!
//! Coefficients are decimal reals; the serializer emits 15 significant
//! digits so that parse -> serialize is a fixed point after one pass.

use crate::pauli::{parse_word_sized, PauliError, PauliSum, PauliWord};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HamError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("Hamiltonian is not Hermitian (max imaginary coefficient {0:.3e})")]
    NonHermitian(f64),
    #[error("qubit {qubit} is not stationary in {operator}: sector reduction would not be exact")]
    NotStationary { qubit: usize, operator: String },
    #[error("sector assignment for qubit {0} outside the register of {1} qubits")]
    SectorQubitOutOfRange(usize, usize),
    #[error("sector reduction would consume every qubit")]
    EmptyRegister,
    #[error("cannot parse sector spec '{0}': expected e.g. \"2:-1,5:+1\"")]
    SectorSyntax(String),
    #[error(transparent)]
    Pauli(#[from] PauliError),
}

/// A qubit Hamiltonian with optional particle-number and total-spin-squared
/// operators, all on the same register.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub n_qubits: usize,
    /// Free-text geometry label from the file's `tag` line, e.g. `R=1.00`.
    pub geometry_tag: String,
    pub hamiltonian: PauliSum,
    pub number_op: Option<PauliSum>,
    pub spin_sq_op: Option<PauliSum>,
}

impl ProblemInstance {
    /// Bond length parsed from an `R=<value>` geometry tag, when present.
    pub fn bond_length(&self) -> Option<f64> {
        parse_r_tag(&self.geometry_tag)
    }
}

pub fn parse_r_tag(tag: &str) -> Option<f64> {
    for token in tag.split_whitespace() {
        if let Some(rest) = token.strip_prefix("R=") {
            if let Ok(v) = rest.parse::<f64>() {
                return Some(v);
            }
        }
    }
    None
}

enum Section {
    Hamiltonian,
    Number,
    SpinSq,
}

/// Parses the file format described in the module docs.
pub fn parse_problem(text: &str) -> Result<ProblemInstance, HamError> {
    let mut n_qubits: Option<usize> = None;
    let mut tag = String::new();
    let mut section = Section::Hamiltonian;
    let mut hamiltonian: Option<PauliSum> = None;
    let mut number_op: Option<PauliSum> = None;
    let mut spin_sq_op: Option<PauliSum> = None;

    let err = |line: usize, msg: String| HamError::Parse { line, msg };

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (keyword, rest) = match line.split_once(char::is_whitespace) {
            Some((k, r)) => (k, r.trim()),
            None => (line, ""),
        };
        match keyword {
            "nqubits" => {
                if n_qubits.is_some() {
                    return Err(err(line_no, "duplicate nqubits line".into()));
                }
                let n: usize = rest
                    .parse()
                    .map_err(|_| err(line_no, format!("invalid qubit count '{rest}'")))?;
                if n == 0 || n > crate::pauli::MAX_QUBITS {
                    return Err(err(line_no, format!("qubit count {n} out of range")));
                }
                n_qubits = Some(n);
                hamiltonian = Some(PauliSum::new(n));
            }
            "tag" => {
                tag = rest.to_string();
            }
            "operator" => {
                if n_qubits.is_none() {
                    return Err(err(line_no, "operator section before nqubits".into()));
                }
                let n = n_qubits.unwrap();
                match rest {
                    "number" => {
                        section = Section::Number;
                        number_op.get_or_insert_with(|| PauliSum::new(n));
                    }
                    "spin2" => {
                        section = Section::SpinSq;
                        spin_sq_op.get_or_insert_with(|| PauliSum::new(n));
                    }
                    other => {
                        return Err(err(
                            line_no,
                            format!("unknown operator section '{other}' (expected number or spin2)"),
                        ))
                    }
                }
            }
            "term" => {
                let n = n_qubits
                    .ok_or_else(|| err(line_no, "term before nqubits".into()))?;
                let (coeff_text, word_text) = rest
                    .split_once(char::is_whitespace)
                    .ok_or_else(|| err(line_no, "term needs a coefficient and a Pauli string".into()))?;
                if coeff_text.starts_with('(') {
                    return Err(err(
                        line_no,
                        "complex coefficients are not allowed".into(),
                    ));
                }
                let coeff: f64 = coeff_text
                    .parse()
                    .map_err(|_| err(line_no, format!("invalid coefficient '{coeff_text}'")))?;
                let word = parse_word_sized(word_text.trim(), n)
                    .map_err(|e| err(line_no, e.to_string()))?;
                let target = match section {
                    Section::Hamiltonian => hamiltonian.as_mut().unwrap(),
                    Section::Number => number_op.as_mut().unwrap(),
                    Section::SpinSq => spin_sq_op.as_mut().unwrap(),
                };
                target
                    .add_term(&word, Complex64::new(coeff, 0.0))
                    .map_err(|e| err(line_no, e.to_string()))?;
            }
            other => {
                return Err(err(line_no, format!("unknown keyword '{other}'")));
            }
        }
    }

    let n_qubits = n_qubits.ok_or_else(|| err(0, "missing nqubits line".into()))?;
    let hamiltonian = hamiltonian.unwrap();
    if hamiltonian.is_empty() {
        return Err(err(0, "file contains no Hamiltonian terms".into()));
    }
    if !hamiltonian.is_hermitian(1e-10) {
        return Err(HamError::NonHermitian(hamiltonian.max_imag()));
    }
    Ok(ProblemInstance {
        n_qubits,
        geometry_tag: tag,
        hamiltonian,
        number_op,
        spin_sq_op,
    })
}

fn write_terms(out: &mut String, sum: &PauliSum) {
    for (word, coeff) in sum.terms() {
        writeln!(out, "term {:.14e} {}", coeff.re, word).unwrap();
    }
}

/// Serializes back to the file format, coefficients at 15 significant digits.
pub fn serialize_problem(problem: &ProblemInstance) -> String {
    let mut out = String::new();
    writeln!(out, "nqubits {}", problem.n_qubits).unwrap();
    if !problem.geometry_tag.is_empty() {
        writeln!(out, "tag {}", problem.geometry_tag).unwrap();
    }
    write_terms(&mut out, &problem.hamiltonian);
    if let Some(op) = &problem.number_op {
        writeln!(out, "operator number").unwrap();
        write_terms(&mut out, op);
    }
    if let Some(op) = &problem.spin_sq_op {
        writeln!(out, "operator spin2").unwrap();
        write_terms(&mut out, op);
    }
    out
}

/// Eigenvalue assignments (+1/-1) for the Z operators of stationary qubits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorSpec {
    pub assignments: BTreeMap<usize, i8>,
}

impl SectorSpec {
    pub fn new(assignments: impl IntoIterator<Item = (usize, i8)>) -> SectorSpec {
        let assignments: BTreeMap<usize, i8> = assignments.into_iter().collect();
        assert!(assignments.values().all(|&v| v == 1 || v == -1));
        SectorSpec { assignments }
    }

    /// Parses `"2:-1,5:+1"`.
    pub fn parse(text: &str) -> Result<SectorSpec, HamError> {
        let mut assignments = BTreeMap::new();
        for part in text.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (q, v) = part
                .split_once(':')
                .ok_or_else(|| HamError::SectorSyntax(text.to_string()))?;
            let qubit: usize = q
                .trim()
                .parse()
                .map_err(|_| HamError::SectorSyntax(text.to_string()))?;
            let value: i8 = match v.trim() {
                "+1" | "1" => 1,
                "-1" => -1,
                _ => return Err(HamError::SectorSyntax(text.to_string())),
            };
            assignments.insert(qubit, value);
        }
        if assignments.is_empty() {
            return Err(HamError::SectorSyntax(text.to_string()));
        }
        Ok(SectorSpec { assignments })
    }

    pub fn to_text(&self) -> String {
        self.assignments
            .iter()
            .map(|(q, v)| format!("{q}:{}", if *v > 0 { "+1" } else { "-1" }))
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Qubits on which every term of `h` acts by Z or the identity.
pub fn find_stationary_qubits(h: &PauliSum) -> Vec<usize> {
    h.stationary_qubits()
}

/// Replaces Z operators on the sector's qubits by their eigenvalues and
/// re-indexes the surviving qubits densely from 0 in ascending original
/// order.
pub fn reduce_to_sector(h: &PauliSum, sector: &SectorSpec) -> Result<PauliSum, HamError> {
    reduce_named(h, sector, "operator")
}

fn reduce_named(h: &PauliSum, sector: &SectorSpec, name: &str) -> Result<PauliSum, HamError> {
    let n = h.n_qubits();
    for &q in sector.assignments.keys() {
        if q >= n {
            return Err(HamError::SectorQubitOutOfRange(q, n));
        }
    }
    let stationary = h.stationary_qubits();
    for &q in sector.assignments.keys() {
        if !stationary.contains(&q) {
            return Err(HamError::NotStationary {
                qubit: q,
                operator: name.to_string(),
            });
        }
    }
    let survivors: Vec<usize> = (0..n)
        .filter(|q| !sector.assignments.contains_key(q))
        .collect();
    if survivors.is_empty() {
        return Err(HamError::EmptyRegister);
    }
    let new_index: BTreeMap<usize, usize> = survivors
        .iter()
        .enumerate()
        .map(|(new, &old)| (old, new))
        .collect();

    let mut out = PauliSum::new(survivors.len()).with_drop_tolerance(h.drop_tolerance());
    for (word, coeff) in h.terms() {
        let mut sign = 1.0;
        let mut axes = Vec::new();
        for q in word.support() {
            match sector.assignments.get(&q) {
                Some(&eig) => {
                    // Stationary qubits only carry Z here.
                    sign *= eig as f64;
                }
                None => {
                    axes.push((new_index[&q], word.axis_at(q).unwrap()));
                }
            }
        }
        let reduced = PauliWord::from_axes(survivors.len(), &axes)?;
        out.add_term(&reduced, coeff * sign)?;
    }
    Ok(out)
}

/// Reduces the Hamiltonian and any symmetry operators with the same sector.
///
/// Every operator must be stationary on the sector's qubits; a mismatch is
/// an error rather than a silent term drop.
pub fn reduce_problem(
    problem: &ProblemInstance,
    sector: &SectorSpec,
) -> Result<ProblemInstance, HamError> {
    let hamiltonian = reduce_named(&problem.hamiltonian, sector, "hamiltonian")?;
    let number_op = problem
        .number_op
        .as_ref()
        .map(|op| reduce_named(op, sector, "number"))
        .transpose()?;
    let spin_sq_op = problem
        .spin_sq_op
        .as_ref()
        .map(|op| reduce_named(op, sector, "spin2"))
        .transpose()?;
    let tag = if problem.geometry_tag.is_empty() {
        format!("sector {}", sector.to_text())
    } else {
        format!("{} sector {}", problem.geometry_tag, sector.to_text())
    };
    Ok(ProblemInstance {
        n_qubits: hamiltonian.n_qubits(),
        geometry_tag: tag,
        hamiltonian,
        number_op,
        spin_sq_op,
    })
}

/// Parses an entangler list: one Pauli string per line, `#` starts a comment
/// (whole-line or inline).
pub fn parse_entangler_list(text: &str, n_qubits: usize) -> Result<Vec<PauliWord>, HamError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let word = parse_word_sized(line, n_qubits).map_err(|e| HamError::Parse {
            line: idx + 1,
            msg: e.to_string(),
        })?;
        out.push(word);
    }
    Ok(out)
}
