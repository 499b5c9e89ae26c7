//! Signature matrices: construction, verification, serialization.
//!
//! The central type is [`GcoMatrix`], an m x n matrix whose columns are the
//! signatures assigned to n users. Entries are exact ([`ExactNumber`]), so
//! injectivity checks and constructions are free of rounding concerns; float
//! views are derived on demand for decoding and simulation.

mod construct;
mod fileio;
mod injective;
pub(crate) use injective::GrayWalk;
pub mod presets;
mod regen;
mod threshold;

pub use construct::{
    append_identity_tail, binary_chain, construct_complex, construct_general, corollary1,
    corollary2, enlarge_kronecker, hadamard_factor, BlockKind, GeneralVariant,
};
pub use fileio::{read_matrix, read_matrix_str, write_matrix, write_matrix_string};
pub use injective::{check_injective, CheckMode, CheckOutcome, DEFAULT_BUDGET};
pub use regen::search_extension;
pub use threshold::{n_threshold, n_threshold_detail, overload_feasible, ThresholdDetail};

use crate::alphabet::Alphabet;
use crate::error::{Error, Result};
use crate::exact::{same_basis, ExactNumber};
use crate::numerics::linalg::CMat;
use num_complex::Complex64;

/// How a matrix's injectivity status is known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verification {
    /// Injectivity follows from the construction rule that produced the matrix.
    ProvenByConstruction,
    /// Injectivity was established by exhaustive check.
    Verified { mode: CheckMode, evaluations: u128 },
    /// No verification has been performed (or it was inconclusive in budget).
    Unverified,
}

/// Kronecker provenance: this matrix is `factor ⊗ sub` for an invertible
/// square `factor`, which unlocks the block-decomposed decoder.
#[derive(Debug, Clone)]
pub struct KronFactor {
    /// The left factor P (square, invertible), row-major exact entries.
    pub factor: Vec<Vec<ExactNumber>>,
    /// Dimensions of the right factor (the sub-matrix).
    pub sub_m: usize,
    pub sub_n: usize,
}

/// An overloaded signature matrix together with the alphabets it is injective
/// over and a record of how that is known.
#[derive(Debug, Clone)]
pub struct GcoMatrix {
    m: usize,
    n: usize,
    /// Row-major entries, all drawn from `signature`.
    entries: Vec<ExactNumber>,
    /// Input alphabet the injectivity claim refers to.
    input: Alphabet,
    /// Signature alphabet the entries are drawn from.
    signature: Alphabet,
    /// Human-readable construction trail, newest step last.
    pub provenance: Vec<String>,
    pub verification: Verification,
    /// Set when the matrix is a Kronecker enlargement.
    pub kron: Option<KronFactor>,
    /// Column indices of an invertible m x m head, if one is known.
    /// Used by the tail-search decoder and the kernel-mode checker.
    pub head_cols: Option<Vec<usize>>,
}

impl GcoMatrix {
    /// Build from row-major entries. Every entry must belong to `signature`,
    /// and `input`'s basis must match the signature basis unless the input is
    /// purely rational (rationals embed in any basis).
    pub fn new(
        m: usize,
        n: usize,
        entries: Vec<ExactNumber>,
        input: Alphabet,
        signature: Alphabet,
    ) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidDimension(format!(
                "matrix must be nonempty, got {m} x {n}"
            )));
        }
        if entries.len() != m * n {
            return Err(Error::InvalidDimension(format!(
                "expected {} entries for {m} x {n}, got {}",
                m * n,
                entries.len()
            )));
        }
        for (idx, e) in entries.iter().enumerate() {
            if !signature.contains(e) {
                return Err(Error::InvalidAlphabet(format!(
                    "entry {} (row {}, col {}) is not in the signature alphabet",
                    e,
                    idx / n,
                    idx % n
                )));
            }
        }
        let compatible = same_basis(input.basis(), signature.basis())
            || input.values().iter().all(|v| v.to_rational().is_some());
        if !compatible {
            return Err(Error::BasisMismatch(
                "input alphabet must share the signature basis or be rational".into(),
            ));
        }
        Ok(GcoMatrix {
            m,
            n,
            entries,
            input,
            signature,
            provenance: Vec::new(),
            verification: Verification::Unverified,
            kron: None,
            head_cols: None,
        })
    }

    /// Convenience constructor from integer rows over a given basis-free
    /// integer alphabet pair.
    pub fn from_integer_rows(
        rows: &[Vec<i64>],
        input: Alphabet,
        signature: Alphabet,
    ) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidDimension("ragged rows".into()));
        }
        let basis = signature.basis().clone();
        let mut entries = Vec::with_capacity(m * n);
        for row in rows {
            for &v in row {
                entries.push(ExactNumber::from_int(&basis, v)?);
            }
        }
        GcoMatrix::new(m, n, entries, input, signature)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Overloading factor n/m.
    pub fn load(&self) -> f64 {
        self.n as f64 / self.m as f64
    }

    pub fn input(&self) -> &Alphabet {
        &self.input
    }

    pub fn signature(&self) -> &Alphabet {
        &self.signature
    }

    pub fn entry(&self, row: usize, col: usize) -> &ExactNumber {
        &self.entries[row * self.n + col]
    }

    pub fn entries(&self) -> &[ExactNumber] {
        &self.entries
    }

    pub fn row(&self, row: usize) -> &[ExactNumber] {
        &self.entries[row * self.n..(row + 1) * self.n]
    }

    pub fn column(&self, col: usize) -> Vec<ExactNumber> {
        (0..self.m).map(|r| self.entry(r, col).clone()).collect()
    }

    /// Float view of the full matrix.
    pub fn to_cmat(&self) -> CMat {
        let mut c = CMat::zeros(self.m, self.n);
        for r in 0..self.m {
            for col in 0..self.n {
                *c.at_mut(r, col) = self.entry(r, col).approx();
            }
        }
        c
    }

    /// Float view of the columns listed in `cols`.
    pub fn to_cmat_cols(&self, cols: &[usize]) -> CMat {
        let mut c = CMat::zeros(self.m, cols.len());
        for r in 0..self.m {
            for (j, &col) in cols.iter().enumerate() {
                *c.at_mut(r, j) = self.entry(r, col).approx();
            }
        }
        c
    }

    /// Exact product A x for an exact input vector (length n).
    /// Errors if some product leaves the representable set.
    pub fn apply_exact(&self, x: &[ExactNumber]) -> Result<Vec<ExactNumber>> {
        if x.len() != self.n {
            return Err(Error::InvalidDimension(format!(
                "input length {} does not match n = {}",
                x.len(),
                self.n
            )));
        }
        let basis = self.signature.basis().clone();
        let mut out = vec![ExactNumber::zero(&basis); self.m];
        for r in 0..self.m {
            for c in 0..self.n {
                let term = self.entry(r, c).try_mul(&x[c])?;
                out[r] = out[r].add(&term);
            }
        }
        Ok(out)
    }

    /// Float product A x.
    pub fn apply_approx(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.n);
        let mut out = vec![Complex64::new(0.0, 0.0); self.m];
        for r in 0..self.m {
            let mut acc = Complex64::new(0.0, 0.0);
            for c in 0..self.n {
                acc += self.entry(r, c).approx() * x[c];
            }
            out[r] = acc;
        }
        out
    }

    /// Mean squared entry magnitude, used for power normalization.
    pub fn mean_sq_entry(&self) -> f64 {
        let s: f64 = self.entries.iter().map(|e| e.approx().norm_sqr()).sum();
        s / (self.m * self.n) as f64
    }

    /// True if all entries and both alphabets are purely rational.
    pub fn is_rational(&self) -> bool {
        self.entries.iter().all(|e| e.to_rational().is_some())
            && self
                .input
                .values()
                .iter()
                .all(|v| v.to_rational().is_some())
    }

    pub fn push_provenance(&mut self, step: impl Into<String>) {
        self.provenance.push(step.into());
    }
}

/// Sylvester-type Hadamard matrix of the given order (a power of two),
/// entries +-1 with an all-ones first row and column.
pub fn hadamard(order: usize, input: Alphabet) -> Result<GcoMatrix> {
    if order == 0 || !order.is_power_of_two() {
        return Err(Error::InvalidDimension(format!(
            "Hadamard order must be a power of two, got {order}"
        )));
    }
    let mut rows = vec![vec![1i64]];
    while rows.len() < order {
        let k = rows.len();
        let mut next = Vec::with_capacity(2 * k);
        for r in &rows {
            let mut top = r.clone();
            top.extend(r.iter().copied());
            next.push(top);
        }
        for r in &rows {
            let mut bot = r.clone();
            bot.extend(r.iter().map(|v| -v));
            next.push(bot);
        }
        rows = next;
    }
    let signature = Alphabet::integers(&[-1, 1]);
    let mut mat = GcoMatrix::from_integer_rows(&rows, input, signature)?;
    // Square and orthogonal, hence invertible: injective over any inputs.
    mat.verification = Verification::ProvenByConstruction;
    mat.head_cols = Some((0..order).collect());
    mat.push_provenance(format!("hadamard order {order}"));
    Ok(mat)
}
