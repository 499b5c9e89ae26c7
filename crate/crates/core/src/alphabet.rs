//! Input and signature alphabets, symbol distributions, and the scaled
//! difference law that drives both injectivity checks and the zero-hit
//! probability machinery in the bounds.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exact::{same_basis, ExactNumber, GeneratorBasis};

/// Finite set of distinct symbols over one basis, kept in sorted coordinate
/// order; that order is the canonical symbol index used everywhere (decoder
/// tie-breaks, distribution layouts, CSV columns).
#[derive(Debug, Clone, PartialEq)]
pub struct Alphabet {
    values: Vec<ExactNumber>,
}

impl Alphabet {
    pub fn new(mut values: Vec<ExactNumber>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidAlphabet("alphabet cannot be empty".into()));
        }
        let basis = values[0].basis().clone();
        for v in &values {
            if !same_basis(v.basis(), &basis) {
                return Err(Error::InvalidAlphabet(
                    "alphabet symbols must share one basis".into(),
                ));
            }
        }
        values.sort();
        let before = values.len();
        values.dedup();
        if values.len() != before {
            return Err(Error::InvalidAlphabet("duplicate symbol".into()));
        }
        Ok(Alphabet { values })
    }

    pub fn integers(vals: &[i64]) -> Self {
        Alphabet::new(vals.iter().map(|&v| ExactNumber::int(v)).collect())
            .expect("integer alphabet")
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[ExactNumber] {
        &self.values
    }

    pub fn basis(&self) -> &Arc<GeneratorBasis> {
        self.values[0].basis()
    }

    pub fn index_of(&self, v: &ExactNumber) -> Option<usize> {
        self.values.binary_search(v).ok()
    }

    pub fn contains(&self, v: &ExactNumber) -> bool {
        self.index_of(v).is_some()
    }

    /// All symbols rational integers; returns them in canonical order.
    pub fn integer_values(&self) -> Option<Vec<i64>> {
        self.values.iter().map(|v| v.to_i64()).collect()
    }

    /// Closed under negation.
    pub fn is_symmetric(&self) -> bool {
        self.values.iter().all(|v| self.contains(&v.neg()))
    }

    /// Max |symbol| over an integer alphabet: the `q` in range conditions.
    pub fn integer_q(&self) -> Option<i64> {
        self.integer_values()
            .map(|vs| vs.iter().map(|v| v.abs()).max().unwrap_or(0))
    }

    pub fn approx_values(&self) -> Vec<Complex64> {
        self.values.iter().map(|v| v.approx()).collect()
    }

    /// Nearest symbol to `z` in Euclidean distance; ties break to the smaller
    /// canonical index.
    pub fn quantize(&self, z: Complex64) -> usize {
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        for (i, v) in self.values.iter().enumerate() {
            let d = (z - v.approx()).norm_sqr();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    pub fn scaled(&self, r: &BigRational) -> Alphabet {
        Alphabet {
            values: self.values.iter().map(|v| v.scale(r)).collect(),
        }
    }

    pub fn union(&self, other: &Alphabet) -> Result<Alphabet> {
        let mut vals = self.values.clone();
        vals.extend(other.values.iter().cloned());
        vals.sort();
        vals.dedup();
        Alphabet::new(vals)
    }
}

impl std::fmt::Display for Alphabet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", v)?;
        }
        write!(f, "}}")
    }
}

/// Probability law on an alphabet. Probabilities are exact rationals and sum
/// to exactly 1, so downstream convolutions can stay exact.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolDistribution {
    alphabet: Alphabet,
    probs: Vec<BigRational>,
}

impl SymbolDistribution {
    pub fn new(alphabet: Alphabet, probs: Vec<BigRational>) -> Result<Self> {
        if probs.len() != alphabet.len() {
            return Err(Error::InvalidDistribution(
                "probability count must match alphabet size".into(),
            ));
        }
        if probs.iter().any(|p| p.is_negative()) {
            return Err(Error::InvalidDistribution("negative probability".into()));
        }
        let sum: BigRational = probs.iter().sum();
        if !sum.is_one() {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {}, not 1",
                sum
            )));
        }
        Ok(SymbolDistribution { alphabet, probs })
    }

    pub fn uniform(alphabet: Alphabet) -> Self {
        let k = alphabet.len();
        let p = BigRational::new(BigInt::one(), BigInt::from(k as i64));
        SymbolDistribution {
            alphabet,
            probs: vec![p; k],
        }
    }

    /// Build from float weights: each is converted to its exact binary
    /// rational, then the whole vector is normalized by the exact sum.
    pub fn from_f64(alphabet: Alphabet, weights: &[f64]) -> Result<Self> {
        if weights.len() != alphabet.len() {
            return Err(Error::InvalidDistribution(
                "weight count must match alphabet size".into(),
            ));
        }
        let mut probs = Vec::with_capacity(weights.len());
        for &w in weights {
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::InvalidDistribution(format!("bad weight {}", w)));
            }
            probs.push(BigRational::from_float(w).unwrap_or_else(BigRational::zero));
        }
        let sum: BigRational = probs.iter().sum();
        if sum.is_zero() {
            return Err(Error::InvalidDistribution("all weights zero".into()));
        }
        for p in &mut probs {
            *p /= sum.clone();
        }
        SymbolDistribution::new(alphabet, probs)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn probs(&self) -> &[BigRational] {
        &self.probs
    }

    pub fn prob(&self, i: usize) -> &BigRational {
        &self.probs[i]
    }

    pub fn probs_f64(&self) -> Vec<f64> {
        self.probs.iter().map(|p| p.to_f64().unwrap()).collect()
    }

    pub fn is_uniform(&self) -> bool {
        self.probs.iter().all(|p| p == &self.probs[0])
    }

    /// Exact mean over the basis.
    pub fn mean(&self) -> ExactNumber {
        let mut acc = ExactNumber::zero(self.alphabet.basis());
        for (v, p) in self.alphabet.values().iter().zip(&self.probs) {
            acc = acc.add(&v.scale(p));
        }
        acc
    }

    pub fn mean_approx(&self) -> Complex64 {
        self.mean().approx()
    }

    /// E|X|^2 as a float.
    pub fn second_moment(&self) -> f64 {
        self.alphabet
            .values()
            .iter()
            .zip(&self.probs)
            .map(|(v, p)| v.approx().norm_sqr() * p.to_f64().unwrap())
            .sum()
    }

    /// Var(X) = E|X|^2 - |EX|^2 as a float.
    pub fn variance(&self) -> f64 {
        self.second_moment() - self.mean_approx().norm_sqr()
    }

    /// Shannon entropy in bits.
    pub fn entropy_bits(&self) -> f64 {
        self.probs
            .iter()
            .filter(|p| !p.is_zero())
            .map(|p| {
                let pf = p.to_f64().unwrap();
                -pf * pf.log2()
            })
            .sum()
    }

    /// Same probability on v and -v for every symbol.
    pub fn is_symmetric(&self) -> bool {
        self.alphabet.values().iter().zip(&self.probs).all(|(v, p)| {
            self.alphabet
                .index_of(&v.neg())
                .map(|j| &self.probs[j] == p)
                .unwrap_or(false)
        })
    }
}

/// Law of the scaled symbol difference `(X - X')/d` for iid `X, X'`, where
/// `d` is the largest rational that leaves every difference with integer
/// coordinates. The support always contains 0 (unless the alphabet is a
/// single symbol, where the support is exactly {0}).
#[derive(Debug, Clone)]
pub struct DifferenceDistribution {
    values: Vec<ExactNumber>,
    probs: Vec<BigRational>,
    d: BigRational,
}

impl DifferenceDistribution {
    pub fn from_distribution(dist: &SymbolDistribution) -> Self {
        let alph = dist.alphabet();
        let mut law: BTreeMap<ExactNumber, BigRational> = BTreeMap::new();
        for (vi, pi) in alph.values().iter().zip(dist.probs()) {
            for (vj, pj) in alph.values().iter().zip(dist.probs()) {
                if pi.is_zero() || pj.is_zero() {
                    continue;
                }
                let diff = vi.sub(vj);
                *law.entry(diff).or_insert_with(BigRational::zero) += pi * pj;
            }
        }
        // d = rational gcd over all coordinates of nonzero differences.
        let mut d = BigRational::zero();
        for v in law.keys() {
            for c in v.coords() {
                if !c.is_zero() {
                    d = rational_gcd(&d, c);
                }
            }
        }
        if d.is_zero() {
            d = BigRational::one();
        }
        let inv = d.recip();
        let mut values = Vec::with_capacity(law.len());
        let mut probs = Vec::with_capacity(law.len());
        for (v, p) in law {
            values.push(v.scale(&inv));
            probs.push(p);
        }
        DifferenceDistribution { values, probs, d }
    }

    pub fn from_alphabet_uniform(alphabet: &Alphabet) -> Self {
        Self::from_distribution(&SymbolDistribution::uniform(alphabet.clone()))
    }

    pub fn values(&self) -> &[ExactNumber] {
        &self.values
    }

    pub fn probs(&self) -> &[BigRational] {
        &self.probs
    }

    pub fn d(&self) -> &BigRational {
        &self.d
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Scaled differences as integers, when every coordinate collapses to a
    /// rational integer.
    pub fn integer_support(&self) -> Option<Vec<i64>> {
        self.values.iter().map(|v| v.to_i64()).collect()
    }

    pub fn nonzero_integer_support(&self) -> Option<Vec<i64>> {
        self.integer_support()
            .map(|vs| vs.into_iter().filter(|&v| v != 0).collect())
    }

    pub fn prob_of_zero(&self) -> BigRational {
        self.values
            .iter()
            .zip(&self.probs)
            .find(|(v, _)| v.is_zero())
            .map(|(_, p)| p.clone())
            .unwrap_or_else(BigRational::zero)
    }
}

/// gcd extended to rationals: gcd(a/b, c/d) = gcd(a, c) / lcm(b, d), with
/// gcd(0, x) = |x|.
fn rational_gcd(a: &BigRational, b: &BigRational) -> BigRational {
    if a.is_zero() {
        return b.abs();
    }
    if b.is_zero() {
        return a.abs();
    }
    let num = a.numer().gcd(b.numer());
    let den = a.denom().lcm(b.denom());
    BigRational::new(num, den)
}

/// Named alphabet presets used by the command line and the test suites.
pub mod presets {
    use super::*;

    pub fn binary() -> Alphabet {
        Alphabet::integers(&[-1, 1])
    }

    pub fn optical() -> Alphabet {
        Alphabet::integers(&[0, 1])
    }

    pub fn ternary() -> Alphabet {
        Alphabet::integers(&[-1, 0, 1])
    }

    /// {+1, -1, +i, -i} over the Gaussian basis.
    pub fn quaternary_complex() -> Alphabet {
        let i = ExactNumber::gaussian(BigRational::zero(), BigRational::one());
        Alphabet::new(vec![
            ExactNumber::int(1),
            ExactNumber::int(-1),
            i.neg(),
            i,
        ])
        .expect("quaternary complex alphabet")
    }

    /// Four 24th roots of unity `exp(i*pi*l/2.4)`, l = 0..3, which are
    /// linearly independent over the rationals (checked in tests).
    pub fn quaternary_ain() -> Alphabet {
        let basis = GeneratorBasis::cyclotomic(24).expect("cyclotomic 24");
        let z = ExactNumber::from_coords(&basis, {
            let mut c = vec![BigRational::zero(); basis.dim()];
            c[1] = BigRational::one();
            c
        })
        .expect("generator");
        let mut vals = Vec::new();
        let mut cur = ExactNumber::from_int(&basis, 1).expect("one");
        let z5 = {
            let mut p = cur.clone();
            for _ in 0..5 {
                p = p.try_mul(&z).expect("closed");
            }
            p
        };
        for _ in 0..4 {
            vals.push(cur.clone());
            cur = cur.try_mul(&z5).expect("closed");
        }
        Alphabet::new(vals).expect("quaternary AIN alphabet")
    }

    /// Ternary input with an atom of mass `p0` at zero and the rest split
    /// evenly over +1 and -1 (data plus activity model in one law).
    pub fn cowda(p0: f64) -> Result<SymbolDistribution> {
        if !(0.0..=1.0).contains(&p0) {
            return Err(Error::InvalidDistribution(format!(
                "p0 must lie in [0, 1], got {}",
                p0
            )));
        }
        let z = BigRational::from_float(p0)
            .ok_or_else(|| Error::InvalidDistribution("p0 not finite".into()))?;
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let rest = (BigRational::one() - &z) * half;
        SymbolDistribution::new(ternary(), vec![rest.clone(), z, rest])
    }

    pub fn by_name(name: &str) -> Result<Alphabet> {
        match name {
            "binary" => Ok(binary()),
            "optical" => Ok(optical()),
            "ternary" => Ok(ternary()),
            "quaternary-complex" => Ok(quaternary_complex()),
            "quaternary-ain" => Ok(quaternary_ain()),
            other => Err(Error::InvalidAlphabet(format!(
                "unknown alphabet preset '{}' (expected binary, optical, ternary, quaternary-complex, quaternary-ain)",
                other
            ))),
        }
    }
}
