//! Feasibility ceiling on the number of users.
//!
//! For one signature row a, the chip observation is Y1 = sum_j a_j X_j with
//! X_j i.i.d. uniform on the input alphabet. Errorless overloading is only
//! possible while n*log2|I| <= m*max_a H(Y1); this module evaluates that cap
//! exactly (solution counts as big integers, entropy in bits) and scans for
//! the largest feasible n.
//!
//! The maximum over rows depends on a only through the multiset of its
//! entries. When every nonzero signature value has the same magnitude and the
//! input set is reflection-symmetric, all-nonzero rows share one entropy, so
//! a single all-ones row decides the cap; otherwise the count classes are
//! enumerated up to a cap and the result is flagged approximate.

use crate::alphabet::Alphabet;
use crate::error::{Error, Result};
use crate::exact::ExactNumber;
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use std::collections::BTreeMap;

/// Default cap on the number of signature count classes examined.
pub const DEFAULT_CLASS_CAP: usize = 512;

#[derive(Debug, Clone)]
pub struct ThresholdDetail {
    pub n_threshold: usize,
    /// m * max_a H(Y1) at the threshold, in bits.
    pub capacity_bits: f64,
    /// n * log2|I| at the threshold, in bits.
    pub demand_bits: f64,
    /// Set when the count-class enumeration was truncated at the cap.
    pub approximate: bool,
}

/// log2 of a positive big integer, accurate to f64 resolution.
fn log2_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 53 {
        return x.to_f64().expect("small biguint").log2();
    }
    let shift = bits - 53;
    let top = (x >> shift).to_f64().expect("53-bit mantissa");
    top.log2() + shift as f64
}

/// Entropy in bits of a law given by integer counts (total = sum of counts).
fn entropy_from_counts<'a>(counts: impl Iterator<Item = &'a BigUint>) -> f64 {
    let counts: Vec<&BigUint> = counts.collect();
    let total: BigUint = counts.iter().map(|c| (*c).clone()).sum();
    let lt = log2_biguint(&total);
    let mut h = 0.0;
    for c in counts {
        if c.bits() == 0 {
            continue;
        }
        let lc = log2_biguint(c);
        let p = (lc - lt).exp2();
        h += p * (lt - lc);
    }
    h
}

type Law = BTreeMap<ExactNumber, BigUint>;

fn delta_law(basis: &std::sync::Arc<crate::exact::GeneratorBasis>) -> Law {
    let mut law = Law::new();
    law.insert(ExactNumber::zero(basis), BigUint::one());
    law
}

/// Convolve a counting law with one uniform step over `values`.
fn conv_step(law: &Law, values: &[ExactNumber]) -> Law {
    let mut next = Law::new();
    for (v, c) in law {
        for a in values {
            let key = v.add(a);
            *next.entry(key).or_default() += c;
        }
    }
    next
}

/// True when every all-nonzero signature row yields the same chip entropy:
/// all nonzero signature magnitudes coincide and the input set is a
/// reflection of itself (so sign flips only shift the chip law).
fn single_class(input: &Alphabet, signature: &Alphabet) -> bool {
    let Some(svals) = signature.integer_values() else {
        return false;
    };
    let mags: std::collections::BTreeSet<i64> =
        svals.iter().filter(|v| **v != 0).map(|v| v.abs()).collect();
    if mags.len() != 1 {
        return false;
    }
    let Some(ivals) = input.integer_values() else {
        return false;
    };
    let lo = ivals[0];
    let hi = ivals[ivals.len() - 1];
    ivals.iter().all(|v| ivals.binary_search(&(lo + hi - v)).is_ok())
}

/// Nonzero signature values to enumerate row classes over. Zero entries only
/// erase information, so the entropy maximizer never uses them. Under the
/// palindromic-input symmetry, opposite signs are merged.
fn class_representatives(input: &Alphabet, signature: &Alphabet) -> Vec<ExactNumber> {
    let palindromic = {
        if let Some(ivals) = input.integer_values() {
            let lo = ivals[0];
            let hi = ivals[ivals.len() - 1];
            ivals.iter().all(|v| ivals.binary_search(&(lo + hi - v)).is_ok())
        } else {
            false
        }
    };
    let mut reps: Vec<ExactNumber> = Vec::new();
    for v in signature.values() {
        if v.is_zero() {
            continue;
        }
        let covered = palindromic && reps.iter().any(|r| r == &v.neg());
        if !covered {
            reps.push(v.clone());
        }
    }
    reps
}

/// Max over row classes of H(Y1) at a given n. Returns (entropy, truncated).
fn max_chip_entropy(
    n: usize,
    input: &Alphabet,
    signature: &Alphabet,
    class_cap: usize,
) -> Result<(f64, bool)> {
    let reps = class_representatives(input, signature);
    if reps.is_empty() {
        return Err(Error::InvalidAlphabet(
            "signature alphabet has no nonzero values".into(),
        ));
    }
    let basis = signature.basis();
    // Per-representative one-step laws: uniform on rep * I.
    let steps: Vec<Vec<ExactNumber>> = reps
        .iter()
        .map(|r| {
            input
                .values()
                .iter()
                .map(|x| r.try_mul(x))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let g = reps.len();
    let mut best = f64::NEG_INFINITY;
    let mut truncated = false;
    let mut seen = 0usize;
    // Weak compositions (k_1..k_g) of n in colex order: start at (n,0,..,0);
    // each step empties the leftmost nonzero cell into position 0 minus one
    // unit, which advances to the next cell.
    let mut counts = vec![0usize; g];
    counts[0] = n;
    loop {
        seen += 1;
        if seen > class_cap {
            truncated = true;
            break;
        }
        debug_assert_eq!(counts.iter().sum::<usize>(), n);
        let mut law = delta_law(basis);
        for (i, &k) in counts.iter().enumerate() {
            for _ in 0..k {
                law = conv_step(&law, &steps[i]);
            }
        }
        let h = entropy_from_counts(law.values());
        if h > best {
            best = h;
        }
        let i = counts.iter().position(|&k| k > 0).expect("sum is n >= 1");
        if i == g - 1 {
            break;
        }
        let v = counts[i];
        counts[i] = 0;
        counts[i + 1] += 1;
        counts[0] = v - 1;
    }
    Ok((best, truncated))
}

/// Decide whether (m, n) admits an errorless matrix for these alphabets.
pub fn overload_feasible(
    m: usize,
    n: usize,
    input: &Alphabet,
    signature: &Alphabet,
) -> Result<bool> {
    let bits = (input.len() as f64).log2();
    let (h, _) = chip_entropy_at(n, input, signature, DEFAULT_CLASS_CAP)?;
    Ok(n as f64 * bits <= m as f64 * h + 1e-9)
}

fn chip_entropy_at(
    n: usize,
    input: &Alphabet,
    signature: &Alphabet,
    class_cap: usize,
) -> Result<(f64, bool)> {
    if single_class(input, signature) {
        let basis = signature.basis();
        let mut law = delta_law(basis);
        for _ in 0..n {
            law = conv_step(&law, input.values());
        }
        Ok((entropy_from_counts(law.values()), false))
    } else {
        max_chip_entropy(n, input, signature, class_cap)
    }
}

/// Largest n with n*log2|I| <= m*max_a H(Y1), by ascending scan.
pub fn n_threshold(m: usize, input: &Alphabet, signature: &Alphabet) -> Result<usize> {
    n_threshold_detail(m, input, signature, DEFAULT_CLASS_CAP).map(|d| d.n_threshold)
}

pub fn n_threshold_detail(
    m: usize,
    input: &Alphabet,
    signature: &Alphabet,
    class_cap: usize,
) -> Result<ThresholdDetail> {
    if m == 0 {
        return Err(Error::InvalidDimension("need m >= 1".into()));
    }
    if input.len() < 2 {
        return Err(Error::InvalidAlphabet(
            "input alphabet needs at least two symbols".into(),
        ));
    }
    let bits = (input.len() as f64).log2();
    let fast = single_class(input, signature);
    let mut law = delta_law(signature.basis());
    let mut detail = ThresholdDetail {
        n_threshold: 0,
        capacity_bits: 0.0,
        demand_bits: 0.0,
        approximate: false,
    };
    let mut n = 0usize;
    loop {
        n += 1;
        let (h, truncated) = if fast {
            law = conv_step(&law, input.values());
            (entropy_from_counts(law.values()), false)
        } else {
            max_chip_entropy(n, input, signature, class_cap)?
        };
        let demand = n as f64 * bits;
        let capacity = m as f64 * h;
        if demand <= capacity + 1e-9 {
            detail.n_threshold = n;
            detail.capacity_bits = capacity;
            detail.demand_bits = demand;
            detail.approximate = truncated;
        } else {
            return Ok(detail);
        }
    }
}
