//! Exact algebra of Pauli words and weighted sums of Pauli words.
//!
//! A word is stored as a pair of bitmasks (X-support, Z-support) plus a
//! 2-bit phase exponent, so products and commutators are a handful of
//! XOR/popcount operations. Sums keep their terms in a `BTreeMap` keyed
//! by the bitmasks, which fixes a deterministic term order everywhere
//! (file output, screening reports, iteration).

use num_complex::Complex64;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Hard limit imposed by the u64 bitmask representation.
pub const MAX_QUBITS: usize = 64;

/// Coefficients with magnitude below this are dropped when sums are merged.
pub const DEFAULT_DROP_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PauliError {
    #[error("qubit count mismatch: {0} vs {1}")]
    QubitMismatch(usize, usize),
    #[error("qubit index {qubit} out of range for {n_qubits} qubits")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },
    #[error("operation requires a phase-free (+1) word")]
    NonUnitPhase,
    #[error("invalid entangler length bounds: need 2 <= {min_len} <= {max_len} <= {n_qubits}")]
    BadLengthBounds {
        min_len: usize,
        max_len: usize,
        n_qubits: usize,
    },
    #[error("cannot parse Pauli word: {0}")]
    Parse(String),
}

/// One of the three single-qubit Pauli axes. An absent axis is the identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    fn bits(self) -> (u64, u64) {
        match self {
            Axis::X => (1, 0),
            Axis::Y => (1, 1),
            Axis::Z => (0, 1),
        }
    }

    pub fn letter(self) -> char {
        match self {
            Axis::X => 'X',
            Axis::Y => 'Y',
            Axis::Z => 'Z',
        }
    }
}

/// A phase from the cyclic group {+1, +i, -1, -i}, stored as the exponent of i.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Phase(u8);

impl Phase {
    pub const PLUS_ONE: Phase = Phase(0);
    pub const PLUS_I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_exponent(k: u32) -> Phase {
        Phase((k % 4) as u8)
    }

    pub fn exponent(self) -> u8 {
        self.0
    }

    pub fn conj(self) -> Phase {
        Phase((4 - self.0) % 4)
    }

    pub fn as_complex(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;

    fn mul(self, other: Phase) -> Phase {
        Phase((self.0 + other.0) % 4)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            0 => write!(f, "+1"),
            1 => write!(f, "+i"),
            2 => write!(f, "-1"),
            _ => write!(f, "-i"),
        }
    }
}

/// A tensor product of single-qubit Pauli operators with an overall phase.
///
/// Identity factors are never stored explicitly: a qubit outside the X/Z
/// support masks carries the identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliWord {
    n_qubits: u32,
    x_bits: u64,
    z_bits: u64,
    phase: Phase,
}

impl PauliWord {
    pub fn identity(n_qubits: usize) -> PauliWord {
        assert!((1..=MAX_QUBITS).contains(&n_qubits));
        PauliWord {
            n_qubits: n_qubits as u32,
            x_bits: 0,
            z_bits: 0,
            phase: Phase::PLUS_ONE,
        }
    }

    pub fn single(n_qubits: usize, qubit: usize, axis: Axis) -> Result<PauliWord, PauliError> {
        PauliWord::from_axes(n_qubits, &[(qubit, axis)])
    }

    /// Builds a phase-(+1) word from `(qubit, axis)` pairs.
    pub fn from_axes(n_qubits: usize, axes: &[(usize, Axis)]) -> Result<PauliWord, PauliError> {
        assert!((1..=MAX_QUBITS).contains(&n_qubits));
        let mut w = PauliWord::identity(n_qubits);
        for &(qubit, axis) in axes {
            if qubit >= n_qubits {
                return Err(PauliError::QubitOutOfRange { qubit, n_qubits });
            }
            let (x, z) = axis.bits();
            w.x_bits |= x << qubit;
            w.z_bits |= z << qubit;
        }
        Ok(w)
    }

    pub(crate) fn from_masks(n_qubits: usize, x_bits: u64, z_bits: u64, phase: Phase) -> PauliWord {
        debug_assert!(n_qubits <= MAX_QUBITS);
        debug_assert!(n_qubits == 64 || (x_bits | z_bits) >> n_qubits == 0);
        PauliWord {
            n_qubits: n_qubits as u32,
            x_bits,
            z_bits,
            phase,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits as usize
    }

    pub fn x_bits(&self) -> u64 {
        self.x_bits
    }

    pub fn z_bits(&self) -> u64 {
        self.z_bits
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn with_phase(mut self, phase: Phase) -> PauliWord {
        self.phase = phase;
        self
    }

    /// Strips the phase, returning the bare tensor product and the removed factor.
    pub fn phase_free(&self) -> (PauliWord, Phase) {
        (self.with_phase(Phase::PLUS_ONE), self.phase)
    }

    pub fn axis_at(&self, qubit: usize) -> Option<Axis> {
        let x = (self.x_bits >> qubit) & 1 != 0;
        let z = (self.z_bits >> qubit) & 1 != 0;
        match (x, z) {
            (false, false) => None,
            (true, false) => Some(Axis::X),
            (true, true) => Some(Axis::Y),
            (false, true) => Some(Axis::Z),
        }
    }

    /// Number of non-identity factors.
    pub fn len(&self) -> usize {
        (self.x_bits | self.z_bits).count_ones() as usize
    }

    /// True when the word has no non-identity factor.
    pub fn is_empty(&self) -> bool {
        self.is_identity()
    }

    pub fn is_identity(&self) -> bool {
        self.x_bits == 0 && self.z_bits == 0
    }

    /// Qubits carrying a non-identity factor, ascending.
    pub fn support(&self) -> Vec<usize> {
        let mut s = Vec::with_capacity(self.len());
        let mut bits = self.x_bits | self.z_bits;
        while bits != 0 {
            let q = bits.trailing_zeros() as usize;
            s.push(q);
            bits &= bits - 1;
        }
        s
    }

    fn y_count(&self) -> u32 {
        (self.x_bits & self.z_bits).count_ones()
    }

    /// Exact group product, accumulating the phase.
    pub fn multiply(&self, other: &PauliWord) -> Result<PauliWord, PauliError> {
        if self.n_qubits != other.n_qubits {
            return Err(PauliError::QubitMismatch(
                self.n_qubits(),
                other.n_qubits(),
            ));
        }
        let x = self.x_bits ^ other.x_bits;
        let z = self.z_bits ^ other.z_bits;
        // Work in the X^x Z^z normal form: converting each Y in or out of
        // that form contributes a power of i, and commuting Z factors of
        // the left word past X factors of the right contributes (-1)s.
        let swap = (self.z_bits & other.x_bits).count_ones();
        let k = self.phase.exponent() as u32
            + other.phase.exponent() as u32
            + self.y_count()
            + other.y_count()
            + 2 * swap
            + 3 * (x & z).count_ones();
        Ok(PauliWord {
            n_qubits: self.n_qubits,
            x_bits: x,
            z_bits: z,
            phase: Phase::from_exponent(k),
        })
    }

    /// True when the two words commute (they either commute or anticommute).
    pub fn commutes_with(&self, other: &PauliWord) -> bool {
        let s = (self.x_bits & other.z_bits).count_ones()
            + (self.z_bits & other.x_bits).count_ones();
        s.is_multiple_of(2)
    }

    pub fn hermitian_conjugate(&self) -> PauliWord {
        // The bare tensor product is Hermitian; only the phase conjugates.
        self.with_phase(self.phase.conj())
    }
}

impl fmt::Display for PauliWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.phase {
            Phase::PLUS_ONE => {}
            Phase::PLUS_I => write!(f, "+i ")?,
            Phase::MINUS_ONE => write!(f, "- ")?,
            _ => write!(f, "-i ")?,
        }
        if self.is_identity() {
            return write!(f, "I");
        }
        let mut first = true;
        for qubit in (0..self.n_qubits()).rev() {
            if let Some(axis) = self.axis_at(qubit) {
                if !first {
                    write!(f, " ")?;
                }
                write!(f, "{}{}", axis.letter(), qubit)?;
                first = false;
            }
        }
        Ok(())
    }
}

/// Parses the phase-free text form, e.g. `"X2 X1 Y0"` or `"I"`.
///
/// Case-insensitive; the qubit count is inferred as `max index + 1`. Use
/// [`parse_word_sized`] when the target register is wider.
impl FromStr for PauliWord {
    type Err = PauliError;

    fn from_str(s: &str) -> Result<PauliWord, PauliError> {
        let axes = parse_axes(s)?;
        let n = axes.iter().map(|&(q, _)| q + 1).max().unwrap_or(1);
        PauliWord::from_axes(n, &axes)
    }
}

/// Parses `"X2 Y0"`-style text onto a register of `n_qubits` qubits.
pub fn parse_word_sized(s: &str, n_qubits: usize) -> Result<PauliWord, PauliError> {
    PauliWord::from_axes(n_qubits, &parse_axes(s)?)
}

fn parse_axes(s: &str) -> Result<Vec<(usize, Axis)>, PauliError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(PauliError::Parse("empty Pauli string".into()));
    }
    if s.eq_ignore_ascii_case("i") {
        return Ok(Vec::new());
    }
    let mut axes = Vec::new();
    for token in s.split_whitespace() {
        let mut chars = token.chars();
        let letter = chars.next().unwrap();
        let axis = match letter.to_ascii_uppercase() {
            'X' => Axis::X,
            'Y' => Axis::Y,
            'Z' => Axis::Z,
            other => {
                return Err(PauliError::Parse(format!(
                    "unknown Pauli letter '{other}' in token '{token}'"
                )))
            }
        };
        let idx: usize = chars.as_str().parse().map_err(|_| {
            PauliError::Parse(format!("missing or invalid qubit index in token '{token}'"))
        })?;
        if axes.iter().any(|&(q, _)| q == idx) {
            return Err(PauliError::Parse(format!(
                "qubit {idx} appears more than once"
            )));
        }
        axes.push((idx, axis));
    }
    Ok(axes)
}

/// Map key for sum storage: the phase-free word identified by its bitmasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct WordKey {
    x_bits: u64,
    z_bits: u64,
}

impl WordKey {
    fn of(word: &PauliWord) -> WordKey {
        WordKey {
            x_bits: word.x_bits,
            z_bits: word.z_bits,
        }
    }
}

/// A complex-weighted sum of phase-free Pauli words.
///
/// Duplicate words merge on insert and coefficients below the drop
/// tolerance are removed, so the representation is canonical. Iteration
/// order is the lexicographic order of the (x, z) bitmask pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n_qubits: u32,
    terms: BTreeMap<WordKey, Complex64>,
    drop_tol: f64,
}

impl PauliSum {
    pub fn new(n_qubits: usize) -> PauliSum {
        assert!((1..=MAX_QUBITS).contains(&n_qubits));
        PauliSum {
            n_qubits: n_qubits as u32,
            terms: BTreeMap::new(),
            drop_tol: DEFAULT_DROP_TOL,
        }
    }

    pub fn with_drop_tolerance(mut self, tol: f64) -> PauliSum {
        self.drop_tol = tol;
        self.compress();
        self
    }

    pub fn drop_tolerance(&self) -> f64 {
        self.drop_tol
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits as usize
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `coeff * word`; the word's phase is folded into the coefficient.
    pub fn add_term(&mut self, word: &PauliWord, coeff: Complex64) -> Result<(), PauliError> {
        if word.n_qubits() != self.n_qubits() {
            return Err(PauliError::QubitMismatch(self.n_qubits(), word.n_qubits()));
        }
        let c = coeff * word.phase.as_complex();
        let key = WordKey::of(word);
        let entry = self.terms.entry(key).or_insert(Complex64::new(0.0, 0.0));
        *entry += c;
        if entry.norm() <= self.drop_tol {
            self.terms.remove(&key);
        }
        Ok(())
    }

    pub fn from_terms(
        n_qubits: usize,
        terms: &[(PauliWord, Complex64)],
    ) -> Result<PauliSum, PauliError> {
        let mut sum = PauliSum::new(n_qubits);
        for (word, coeff) in terms {
            sum.add_term(word, *coeff)?;
        }
        Ok(sum)
    }

    /// Terms in deterministic bitmask order, as phase-free words.
    pub fn terms(&self) -> impl Iterator<Item = (PauliWord, Complex64)> + '_ {
        self.terms.iter().map(move |(key, &coeff)| {
            (
                PauliWord::from_masks(self.n_qubits(), key.x_bits, key.z_bits, Phase::PLUS_ONE),
                coeff,
            )
        })
    }

    pub fn coefficient(&self, word: &PauliWord) -> Complex64 {
        let (bare, phase) = word.phase_free();
        self.terms
            .get(&WordKey::of(&bare))
            .map(|&c| c * phase.conj().as_complex())
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Removes terms whose coefficient magnitude is at or below the drop tolerance.
    pub fn compress(&mut self) {
        let tol = self.drop_tol;
        self.terms.retain(|_, c| c.norm() > tol);
    }

    pub fn scale(&mut self, factor: Complex64) {
        for c in self.terms.values_mut() {
            *c *= factor;
        }
        self.compress();
    }

    pub fn scaled(&self, factor: Complex64) -> PauliSum {
        let mut out = self.clone();
        out.scale(factor);
        out
    }

    pub fn add_assign(&mut self, other: &PauliSum) -> Result<(), PauliError> {
        if other.n_qubits != self.n_qubits {
            return Err(PauliError::QubitMismatch(
                self.n_qubits(),
                other.n_qubits(),
            ));
        }
        for (word, coeff) in other.terms() {
            self.add_term(&word, coeff)?;
        }
        Ok(())
    }

    /// True when every coefficient is real to within `tol` (phase-free words
    /// are Hermitian, so real coefficients are exactly the Hermitian sums).
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.im.abs() <= tol)
    }

    /// Largest |imaginary part| over all stored coefficients.
    pub fn max_imag(&self) -> f64 {
        self.terms
            .values()
            .map(|c| c.im.abs())
            .fold(0.0, f64::max)
    }

    /// Left-multiplies every term by `p`, i.e. returns `p * self`.
    pub fn left_mul_word(&self, p: &PauliWord) -> Result<PauliSum, PauliError> {
        let mut out = PauliSum::new(self.n_qubits()).with_drop_tolerance(self.drop_tol);
        for (word, coeff) in self.terms() {
            let prod = p.multiply(&word)?;
            out.add_term(&prod, coeff)?;
        }
        Ok(out)
    }

    /// The commutator `[self, p] = self*p - p*self` as an exact sum.
    ///
    /// Terms commuting with `p` contribute nothing; an anticommuting term
    /// `c*W` contributes `2c * (W*p)`.
    pub fn commutator_with_word(&self, p: &PauliWord) -> Result<PauliSum, PauliError> {
        if p.n_qubits() != self.n_qubits() {
            return Err(PauliError::QubitMismatch(self.n_qubits(), p.n_qubits()));
        }
        let mut out = PauliSum::new(self.n_qubits()).with_drop_tolerance(self.drop_tol);
        for (word, coeff) in self.terms() {
            if word.commutes_with(p) {
                continue;
            }
            let prod = word.multiply(p)?;
            out.add_term(&prod, coeff * 2.0)?;
        }
        Ok(out)
    }

    /// Closed-form similarity transform `exp(i tau P/2) * self * exp(-i tau P/2)`
    /// for an involutory generator `p` (phase +1 required).
    ///
    /// Each term anticommuting with `p` maps to
    /// `cos(tau) W - i sin(tau) (W*p)`; commuting terms pass through, so the
    /// term count at most doubles per application.
    pub fn similarity_transform(&self, p: &PauliWord, tau: f64) -> Result<PauliSum, PauliError> {
        if p.phase() != Phase::PLUS_ONE {
            return Err(PauliError::NonUnitPhase);
        }
        if p.n_qubits() != self.n_qubits() {
            return Err(PauliError::QubitMismatch(self.n_qubits(), p.n_qubits()));
        }
        let (cos_t, sin_t) = (tau.cos(), tau.sin());
        let mut out = PauliSum::new(self.n_qubits()).with_drop_tolerance(self.drop_tol);
        for (word, coeff) in self.terms() {
            if word.commutes_with(p) {
                out.add_term(&word, coeff)?;
            } else {
                out.add_term(&word, coeff * cos_t)?;
                let wp = word.multiply(p)?;
                out.add_term(&wp, coeff * Complex64::new(0.0, -sin_t))?;
            }
        }
        Ok(out)
    }

    /// Qubits on which every term acts by Z or the identity.
    pub fn stationary_qubits(&self) -> Vec<usize> {
        let mut xy = 0u64;
        for key in self.terms.keys() {
            xy |= key.x_bits;
        }
        (0..self.n_qubits())
            .filter(|&q| (xy >> q) & 1 == 0)
            .collect()
    }
}

/// The termwise commutator `[h, p]`.
pub fn sum_commutator(h: &PauliSum, p: &PauliWord) -> Result<PauliSum, PauliError> {
    h.commutator_with_word(p)
}

/// All phase-(+1) words of length `min_len..=max_len` on `n_qubits` qubits.
///
/// Deterministic order: by length, then by ascending qubit-subset
/// (combinatorial order), then by axis assignment with X < Y < Z cycling
/// fastest on the lowest qubit.
pub fn enumerate_entanglers(
    n_qubits: usize,
    min_len: usize,
    max_len: usize,
) -> Result<Vec<PauliWord>, PauliError> {
    if !(2 <= min_len && min_len <= max_len && max_len <= n_qubits) {
        return Err(PauliError::BadLengthBounds {
            min_len,
            max_len,
            n_qubits,
        });
    }
    let mut out = Vec::new();
    for len in min_len..=max_len {
        for subset in subsets_of_size(n_qubits, len) {
            let mut axes: Vec<(usize, Axis)> = subset.iter().map(|&q| (q, Axis::X)).collect();
            loop {
                out.push(PauliWord::from_axes(n_qubits, &axes)?);
                // Odometer over axis choices, lowest qubit fastest.
                let mut pos = 0;
                loop {
                    if pos == axes.len() {
                        break;
                    }
                    axes[pos].1 = match axes[pos].1 {
                        Axis::X => Axis::Y,
                        Axis::Y => Axis::Z,
                        Axis::Z => {
                            axes[pos].1 = Axis::X;
                            pos += 1;
                            continue;
                        }
                    };
                    break;
                }
                if pos == axes.len() {
                    break;
                }
            }
        }
    }
    Ok(out)
}

fn subsets_of_size(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn recurse(n: usize, k: usize, start: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for q in start..n {
            if n - q < k - current.len() {
                break;
            }
            current.push(q);
            recurse(n, k, q + 1, current, out);
            current.pop();
        }
    }
    recurse(n, k, 0, &mut current, &mut out);
    out
}
