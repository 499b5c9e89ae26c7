//! Sum-capacity bounds for overloaded signature codes.
//!
//! Every bound in this module reduces to a weighted sum over count classes of
//! the difference alphabet: a difference vector enters only through how many
//! coordinates fall in each class. The combinatorial outer sum, the per-class
//! convolution of chip-level contributions, and the distribution search are
//! shared across the noiseless, noisy, and active-user bounds, which differ
//! only in the functional applied to each class.

pub mod active;
pub mod noiseless;
pub mod noisy;

use std::collections::BTreeMap;
use std::fmt;

use crate::alphabet::Alphabet;
use crate::error::{Error, Result};
use crate::exact::{same_basis, ExactNumber};
use crate::numerics::logdomain::{log2_multinomial, log2_sum_tree};
use crate::numerics::optimize::{golden_max, nelder_mead_max};

/// How a bound value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quality {
    /// Every sum was evaluated in full; any optimization was one-dimensional
    /// and bracketed, so the value is reproducible to stated tolerances.
    ExactSum,
    /// Some expectation was truncated or sampled; the result carries the
    /// reported error estimate in `flags`.
    Truncated,
    /// A multi-parameter local search chose the distribution; the value is a
    /// valid bound but possibly not the supremum.
    OptimizedLocal,
}

impl fmt::Display for Quality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Quality::ExactSum => "exact-sum",
            Quality::Truncated => "truncated",
            Quality::OptimizedLocal => "optimized-local",
        };
        write!(f, "{s}")
    }
}

/// Whether distribution parameters are taken as given or tuned over the
/// probability simplex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchPolicy {
    Fixed,
    Optimize,
}

/// A computed bound in bits, with the argument that achieved it.
#[derive(Debug, Clone)]
pub struct BoundResult {
    pub value_bits: f64,
    /// Named optimizer arguments: probability masses, gamma, and similar.
    pub arg: Vec<(String, f64)>,
    pub quality: Quality,
    /// Free-form caveats: non-convergence notes, sampling errors.
    pub flags: Vec<String>,
}

/// A bound evaluation request for an (m, n) system.
#[derive(Debug, Clone)]
pub struct BoundQuery<'a> {
    pub m: usize,
    pub n: usize,
    pub input: &'a Alphabet,
    pub p: Vec<f64>,
    pub signature: &'a Alphabet,
    pub pi: Vec<f64>,
    pub policy: SearchPolicy,
}

impl BoundQuery<'_> {
    pub(crate) fn check_dims(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::InvalidDimension(format!(
                "bounds need m >= 1 and n >= 1, got ({}, {})",
                self.m, self.n
            )));
        }
        check_distribution(self.input, &self.p, "input law")?;
        check_distribution(self.signature, &self.pi, "signature law")
    }
}

impl BoundResult {
    pub(crate) fn new(value_bits: f64, quality: Quality) -> Self {
        BoundResult {
            value_bits,
            arg: Vec::new(),
            quality,
            flags: Vec::new(),
        }
    }

    pub(crate) fn push_arg(&mut self, name: impl Into<String>, value: f64) {
        self.arg.push((name.into(), value));
    }

    pub(crate) fn push_probs(&mut self, prefix: &str, alphabet: &Alphabet, probs: &[f64]) {
        for (v, &pr) in alphabet.values().iter().zip(probs) {
            self.arg.push((format!("{prefix}({v})"), pr));
        }
    }
}

/// Checks that `probs` is a probability vector matching `alphabet`.
pub(crate) fn check_distribution(alphabet: &Alphabet, probs: &[f64], name: &str) -> Result<()> {
    if probs.len() != alphabet.len() {
        return Err(Error::InvalidAlphabet(format!(
            "{name}: {} probabilities for {} symbols",
            probs.len(),
            alphabet.len()
        )));
    }
    if probs.iter().any(|&p| !(0.0..=1.0 + 1e-12).contains(&p)) {
        return Err(Error::InvalidAlphabet(format!(
            "{name}: probabilities must lie in [0, 1]"
        )));
    }
    let s: f64 = probs.iter().sum();
    if (s - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidAlphabet(format!(
            "{name}: probabilities sum to {s}, not 1"
        )));
    }
    Ok(())
}

/// Mean and variance of a distribution on an alphabet: (mu, E|x|^2 - |mu|^2).
pub(crate) fn alphabet_moments(alphabet: &Alphabet, probs: &[f64]) -> (num_complex::Complex64, f64) {
    let mut mean = num_complex::Complex64::new(0.0, 0.0);
    let mut second = 0.0;
    for (v, &pr) in alphabet.values().iter().zip(probs) {
        let a = v.approx();
        mean += pr * a;
        second += pr * a.norm_sqr();
    }
    (mean, second - mean.norm_sqr())
}

/// A finitely supported law with exact atom positions and float masses.
#[derive(Debug, Clone)]
pub(crate) struct DiscreteLaw {
    pub atoms: BTreeMap<ExactNumber, f64>,
}

impl DiscreteLaw {
    pub fn point(v: ExactNumber) -> Self {
        let mut atoms = BTreeMap::new();
        atoms.insert(v, 1.0);
        DiscreteLaw { atoms }
    }

    pub fn from_pairs(pairs: Vec<(ExactNumber, f64)>) -> Self {
        let mut atoms: BTreeMap<ExactNumber, f64> = BTreeMap::new();
        for (v, p) in pairs {
            *atoms.entry(v).or_insert(0.0) += p;
        }
        DiscreteLaw { atoms }
    }

    pub fn convolve(&self, other: &Self) -> Self {
        let mut atoms: BTreeMap<ExactNumber, f64> = BTreeMap::new();
        for (a, pa) in &self.atoms {
            for (b, pb) in &other.atoms {
                *atoms.entry(a.add(b)).or_insert(0.0) += pa * pb;
            }
        }
        DiscreteLaw { atoms }
    }

    /// Mass at exactly zero, decided on exact coordinates.
    pub fn mass_at_zero(&self) -> f64 {
        self.atoms
            .iter()
            .filter(|(v, _)| v.is_zero())
            .map(|(_, p)| *p)
            .sum()
    }

    /// (|atom|^2, mass) pairs for Gaussian-kernel expectations.
    pub fn kernel_hist(&self) -> Vec<(f64, f64)> {
        self.atoms
            .iter()
            .map(|(v, p)| (v.approx().norm_sqr(), *p))
            .collect()
    }
}

/// Re-expresses mixed-basis values over one common basis. Products of a
/// rational symbol with a non-rational one land in whichever factor's basis
/// was non-rational, so a single law can otherwise end up with atoms that
/// refuse to add.
pub(crate) fn normalize_basis_pairs(
    values: Vec<(ExactNumber, f64)>,
) -> Result<Vec<(ExactNumber, f64)>> {
    let target = values
        .iter()
        .find(|(v, _)| v.to_rational().is_none())
        .map(|(v, _)| v.basis().clone());
    let Some(target) = target else {
        return Ok(values);
    };
    values
        .into_iter()
        .map(|(v, p)| match v.to_rational() {
            Some(r) => Ok((ExactNumber::from_rational(&target, r)?, p)),
            None => {
                if same_basis(v.basis(), &target) {
                    Ok((v, p))
                } else {
                    Err(Error::Unsupported(format!(
                        "difference contributions mix incompatible value bases {:?} and {:?}",
                        v.basis().labels(),
                        target.labels()
                    )))
                }
            }
        })
        .collect()
}

/// One merged class of the difference alphabet.
#[derive(Debug, Clone)]
pub(crate) struct DiffClass {
    /// Outer weight of one coordinate landing in this class (both signs
    /// together when merged).
    pub weight: f64,
    /// Squared magnitude of the canonical class representative.
    pub nsq: f64,
    /// Law of (signature symbol) * representative; absent when the caller
    /// only needs counts.
    pub law: Option<DiscreteLaw>,
}

/// The difference alphabet of an input law, split into count classes.
#[derive(Debug, Clone)]
pub(crate) struct ClassSystem {
    pub classes: Vec<DiffClass>,
    /// Mass of the zero difference.
    pub zero_weight: f64,
}

/// Whether the signature law is symmetric: every symbol has its negation in
/// the alphabet carrying the same mass.
pub(crate) fn signature_symmetric(signature: &Alphabet, pi: &[f64]) -> bool {
    signature.values().iter().zip(pi).all(|(s, &ps)| {
        let neg = s.neg();
        signature
            .values()
            .iter()
            .position(|t| *t == neg)
            .is_some_and(|j| (pi[j] - ps).abs() <= 1e-12)
    })
}

impl ClassSystem {
    /// Count classes alone, for bounds whose kernel needs only the class
    /// sizes and squared magnitudes. The chip law is irrelevant here, so any
    /// placeholder serves; the input alphabet doubles as one.
    pub fn counts_only(input: &Alphabet, p: &[f64]) -> Result<Self> {
        let uniform = vec![1.0 / input.len() as f64; input.len()];
        Self::new(input, p, input, &uniform, false)
    }

    /// Builds the count classes of the difference alphabet of `input` under
    /// `p`, attaching per-class chip laws under `pi` when `with_laws` is set.
    /// Opposite differences merge whenever the merge is exact.
    pub fn new(
        input: &Alphabet,
        p: &[f64],
        signature: &Alphabet,
        pi: &[f64],
        with_laws: bool,
    ) -> Result<Self> {
        check_distribution(input, p, "input law")?;
        check_distribution(signature, pi, "signature law")?;

        let mut diff: BTreeMap<ExactNumber, f64> = BTreeMap::new();
        for (a, &pa) in input.values().iter().zip(p) {
            for (b, &pb) in input.values().iter().zip(p) {
                *diff.entry(a.sub(b)).or_insert(0.0) += pa * pb;
            }
        }
        let zero_weight = diff
            .iter()
            .filter(|(v, _)| v.is_zero())
            .map(|(_, w)| *w)
            .sum();

        // The difference law is symmetric by construction, so merging +-pairs
        // is exact as long as either no chip law is attached or the signature
        // law is itself symmetric.
        let merged = !with_laws || signature_symmetric(signature, pi);

        let mut reps: Vec<(ExactNumber, f64)> = Vec::new();
        for (d, &w) in &diff {
            if d.is_zero() || w == 0.0 {
                continue;
            }
            if merged {
                let neg = d.neg();
                if *d < neg {
                    continue; // the larger of the pair represents it
                }
                reps.push((d.clone(), w + diff.get(&neg).copied().unwrap_or(0.0)));
            } else {
                reps.push((d.clone(), w));
            }
        }

        let laws: Option<Vec<DiscreteLaw>> = if with_laws {
            let mut raw: Vec<Vec<(ExactNumber, f64)>> = Vec::with_capacity(reps.len());
            for (d, _) in &reps {
                let mut pairs = Vec::with_capacity(signature.len());
                for (s, &ps) in signature.values().iter().zip(pi) {
                    pairs.push((s.try_mul(d)?, ps));
                }
                raw.push(pairs);
            }
            // One shared basis across all classes so partial convolutions
            // can add atoms from different classes.
            let flat: Vec<(ExactNumber, f64)> = raw.iter().flatten().cloned().collect();
            let flat = normalize_basis_pairs(flat)?;
            let mut it = flat.into_iter();
            let mut laws = Vec::with_capacity(raw.len());
            for pairs in &raw {
                let chunk: Vec<(ExactNumber, f64)> =
                    (0..pairs.len()).map(|_| it.next().unwrap()).collect();
                laws.push(DiscreteLaw::from_pairs(chunk));
            }
            Some(laws)
        } else {
            None
        };

        let classes = reps
            .into_iter()
            .enumerate()
            .map(|(j, (rep, weight))| DiffClass {
                nsq: rep.approx().norm_sqr(),
                weight,
                law: laws.as_ref().map(|l| l[j].clone()),
            })
            .collect();

        Ok(ClassSystem {
            classes,
            zero_weight,
        })
    }
}

/// One count class composition with everything a bound needs from it.
#[derive(Debug, Clone)]
pub(crate) struct CompositionTerm {
    pub ks: Vec<usize>,
    /// log2 of multinomial coefficient times the class-weight product.
    pub log2_weight: f64,
    /// Mass of the convolved chip law at exactly zero (NaN without laws).
    pub phi: f64,
    /// (|v|^2, mass) histogram of the convolved chip law (empty without laws).
    pub hist: Vec<(f64, f64)>,
}

struct CompositionWalker<'a> {
    sys: &'a ClassSystem,
    pows: Vec<Vec<DiscreteLaw>>,
    n: usize,
    out: Vec<CompositionTerm>,
}

impl CompositionWalker<'_> {
    fn leaf_weight(&self, k0: usize, ks: &[usize]) -> Option<f64> {
        if k0 > 0 && self.sys.zero_weight == 0.0 {
            return None;
        }
        let mut parts: Vec<u64> = Vec::with_capacity(ks.len() + 1);
        parts.push(k0 as u64);
        parts.extend(ks.iter().map(|&k| k as u64));
        let mut acc = log2_multinomial(self.n as u64, &parts);
        if k0 > 0 {
            acc += k0 as f64 * self.sys.zero_weight.log2();
        }
        for (c, &k) in self.sys.classes.iter().zip(ks) {
            if k == 0 {
                continue;
            }
            if c.weight == 0.0 {
                return None;
            }
            acc += k as f64 * c.weight.log2();
        }
        Some(acc)
    }

    fn descend(&mut self, idx: usize, remaining: usize, partial: &DiscreteLaw, ks: &mut Vec<usize>) {
        if idx == self.sys.classes.len() {
            if let Some(log2_weight) = self.leaf_weight(remaining, ks) {
                self.out.push(CompositionTerm {
                    ks: ks.clone(),
                    log2_weight,
                    phi: partial.mass_at_zero(),
                    hist: partial.kernel_hist(),
                });
            }
            return;
        }
        for k in 0..=remaining {
            let next = if k == 0 {
                partial.clone()
            } else {
                partial.convolve(&self.pows[idx][k])
            };
            ks.push(k);
            self.descend(idx + 1, remaining - k, &next, ks);
            ks.pop();
        }
    }

    fn descend_counts_only(&mut self, idx: usize, remaining: usize, ks: &mut Vec<usize>) {
        if idx == self.sys.classes.len() {
            if let Some(log2_weight) = self.leaf_weight(remaining, ks) {
                self.out.push(CompositionTerm {
                    ks: ks.clone(),
                    log2_weight,
                    phi: f64::NAN,
                    hist: Vec::new(),
                });
            }
            return;
        }
        for k in 0..=remaining {
            ks.push(k);
            self.descend_counts_only(idx + 1, remaining - k, ks);
            ks.pop();
        }
    }
}

/// Enumerates all count-class compositions of `n`, convolving chip laws along
/// the way when the system carries them.
pub(crate) fn composition_terms(sys: &ClassSystem, n: usize) -> Vec<CompositionTerm> {
    let with_laws = !sys.classes.is_empty() && sys.classes.iter().all(|c| c.law.is_some());
    let mut walker = CompositionWalker {
        sys,
        pows: Vec::new(),
        n,
        out: Vec::new(),
    };
    if with_laws {
        let zero = {
            let any = sys.classes[0].law.as_ref().unwrap();
            let basis = any.atoms.keys().next().expect("chip law is never empty").basis();
            ExactNumber::zero(basis)
        };
        for c in &sys.classes {
            let law = c.law.as_ref().unwrap();
            let mut table = Vec::with_capacity(n + 1);
            table.push(DiscreteLaw::point(zero.clone()));
            for k in 1..=n {
                let prev: &DiscreteLaw = &table[k - 1];
                table.push(prev.convolve(law));
            }
            walker.pows.push(table);
        }
        let start = DiscreteLaw::point(zero);
        let mut ks = Vec::new();
        walker.descend(0, n, &start, &mut ks);
    } else {
        let mut ks = Vec::new();
        walker.descend_counts_only(0, n, &mut ks);
    }
    walker.out
}

/// log2 of the expected m-th power of the zero-hit probability across count
/// classes: the core of every noiseless lower bound.
pub(crate) fn noiseless_log2_expectation(terms: &[CompositionTerm], m: usize) -> f64 {
    let logs: Vec<f64> = terms
        .iter()
        .filter(|t| t.phi > 0.0)
        .map(|t| t.log2_weight + m as f64 * t.phi.log2())
        .collect();
    log2_sum_tree(&logs)
}

/// log2 of the expected m-th power of the Gaussian-kernel expectation
/// sum_v P(v) exp(-c |v|^2): the core of the finite noisy lower bounds.
pub(crate) fn noisy_log2_expectation(terms: &[CompositionTerm], m: usize, c: f64) -> f64 {
    let logs: Vec<f64> = terms
        .iter()
        .filter_map(|t| {
            let inner: f64 = t.hist.iter().map(|&(nsq, p)| p * (-c * nsq).exp()).sum();
            if inner > 0.0 {
                Some(t.log2_weight + m as f64 * inner.log2())
            } else {
                None
            }
        })
        .collect();
    log2_sum_tree(&logs)
}

/// Maps free coordinates in [0, 1]^(q-1) to a point of the q-simplex by stick
/// breaking.
pub(crate) fn stick_break(t: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(t.len() + 1);
    let mut rest = 1.0;
    for &ti in t {
        let x = ti.clamp(0.0, 1.0) * rest;
        out.push(x);
        rest -= x;
    }
    out.push(rest.max(0.0));
    out
}

fn stick_coords(p: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(p.len().saturating_sub(1));
    let mut rest = 1.0;
    for &pi in &p[..p.len() - 1] {
        out.push(if rest > 1e-12 { (pi / rest).clamp(0.0, 1.0) } else { 0.0 });
        rest -= pi;
    }
    out
}

/// Distribution search outcome: the chosen laws, the objective value, and
/// whether a multi-parameter local search picked them.
pub(crate) struct PolicyOutcome {
    pub p: Vec<f64>,
    pub pi: Vec<f64>,
    pub value: f64,
    pub local: bool,
}

/// Evaluates `eval` at the given laws, or tunes both laws over their
/// simplices per `policy`. One free parameter is bracketed exactly; more go
/// through a coarse grid refined by Nelder-Mead and are flagged local.
pub(crate) fn search_distributions<F>(
    p0: &[f64],
    pi0: &[f64],
    policy: SearchPolicy,
    mut eval: F,
) -> Result<PolicyOutcome>
where
    F: FnMut(&[f64], &[f64]) -> f64,
{
    let dp = p0.len() - 1;
    let dpi = pi0.len() - 1;
    let dims = dp + dpi;
    let split = |t: &[f64]| -> (Vec<f64>, Vec<f64>) {
        if dp == 0 {
            (p0.to_vec(), stick_break(t))
        } else if dpi == 0 {
            (stick_break(t), pi0.to_vec())
        } else {
            (stick_break(&t[..dp]), stick_break(&t[dp..]))
        }
    };
    if policy == SearchPolicy::Fixed || dims == 0 {
        let value = eval(p0, pi0);
        return Ok(PolicyOutcome {
            p: p0.to_vec(),
            pi: pi0.to_vec(),
            value,
            local: false,
        });
    }
    if dims == 1 {
        let (t, value) = golden_max(
            |t| {
                let (p, pi) = split(&[t]);
                eval(&p, &pi)
            },
            1e-9,
            1.0 - 1e-9,
            1e-9,
        );
        let (p, pi) = split(&[t]);
        return Ok(PolicyOutcome {
            p,
            pi,
            value,
            local: false,
        });
    }
    if dims > 6 {
        return Err(Error::Unsupported(format!(
            "distribution search over {dims} free parameters"
        )));
    }
    // Coarse deterministic grid locates a basin; Nelder-Mead polishes.
    let grid_pts = [0.1, 0.3, 0.5, 0.7, 0.9];
    let mut best = vec![0.5; dims];
    let mut best_v = f64::NEG_INFINITY;
    let mut idx = vec![0usize; dims];
    loop {
        let t: Vec<f64> = idx.iter().map(|&i| grid_pts[i]).collect();
        let (p, pi) = split(&t);
        let v = eval(&p, &pi);
        if v > best_v {
            best_v = v;
            best = t;
        }
        let mut carry = 0;
        while carry < dims {
            idx[carry] += 1;
            if idx[carry] < grid_pts.len() {
                break;
            }
            idx[carry] = 0;
            carry += 1;
        }
        if carry == dims {
            break;
        }
    }
    let start: Vec<f64> = stick_coords(p0)
        .into_iter()
        .chain(stick_coords(pi0))
        .collect();
    let s0 = {
        let (p, pi) = split(&start);
        eval(&p, &pi)
    };
    let seed = if s0 > best_v { start } else { best };
    let bounds = vec![(1e-9, 1.0 - 1e-9); dims];
    let (t, value) = nelder_mead_max(
        |t| {
            let (p, pi) = split(t);
            eval(&p, &pi)
        },
        &seed,
        &bounds,
        1e-12,
        400 * dims,
    );
    let (p, pi) = split(&t);
    Ok(PolicyOutcome {
        p,
        pi,
        value,
        local: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::presets;

    fn uniform(k: usize) -> Vec<f64> {
        vec![1.0 / k as f64; k]
    }

    #[test]
    fn binary_classes_merge_to_one() {
        let bin = presets::binary();
        let sys = ClassSystem::new(&bin, &uniform(2), &bin, &uniform(2), true).unwrap();
        assert_eq!(sys.classes.len(), 1);
        assert!((sys.zero_weight - 0.5).abs() < 1e-15);
        assert!((sys.classes[0].weight - 0.5).abs() < 1e-15);
        assert!((sys.classes[0].nsq - 4.0).abs() < 1e-12);
        let law = sys.classes[0].law.as_ref().unwrap();
        assert_eq!(law.atoms.len(), 2); // +-2 under a +-1 chip
    }

    #[test]
    fn asymmetric_signature_blocks_the_merge() {
        let bin = presets::binary();
        let sig = Alphabet::integers(&[1, 2]);
        let sys = ClassSystem::new(&bin, &uniform(2), &sig, &uniform(2), true).unwrap();
        assert_eq!(sys.classes.len(), 2);
        for c in &sys.classes {
            assert!((c.weight - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn composition_weights_sum_to_one() {
        for (alpha, probs) in [
            (presets::binary(), vec![0.3, 0.7]),
            (presets::ternary(), vec![0.2, 0.5, 0.3]),
        ] {
            let sig = presets::binary();
            let sys = ClassSystem::new(&alpha, &probs, &sig, &uniform(2), false).unwrap();
            let terms = composition_terms(&sys, 6);
            let logs: Vec<f64> = terms.iter().map(|t| t.log2_weight).collect();
            let total = log2_sum_tree(&logs);
            assert!(total.abs() < 1e-10, "weights sum to 2^{total}");
        }
    }

    #[test]
    fn small_binary_expectation_by_hand() {
        // m = 1, n = 2, uniform binary input and chips: the zero-difference
        // pair contributes 1/4, the four all-nonzero patterns contribute 1/8.
        let bin = presets::binary();
        let sys = ClassSystem::new(&bin, &uniform(2), &bin, &uniform(2), true).unwrap();
        let terms = composition_terms(&sys, 2);
        let e = noiseless_log2_expectation(&terms, 1).exp2();
        assert!((e - 3.0 / 8.0).abs() < 1e-14, "E = {e}");
    }

    fn brute_expectation(
        input: &Alphabet,
        p: &[f64],
        sig: &Alphabet,
        pi: &[f64],
        m: usize,
        n: usize,
    ) -> f64 {
        // Difference law atoms.
        let mut diff: Vec<(ExactNumber, f64)> = Vec::new();
        for (a, &pa) in input.values().iter().zip(p) {
            for (b, &pb) in input.values().iter().zip(p) {
                diff.push((a.sub(b), pa * pb));
            }
        }
        let diff = {
            let mut merged: BTreeMap<ExactNumber, f64> = BTreeMap::new();
            for (v, w) in diff {
                *merged.entry(v).or_insert(0.0) += w;
            }
            merged.into_iter().collect::<Vec<_>>()
        };
        let qd = diff.len();
        let l = sig.len();
        let mut total = 0.0;
        for pat in 0..qd.pow(n as u32) {
            let mut rest = pat;
            let mut w = 1.0;
            let mut xs: Vec<&ExactNumber> = Vec::with_capacity(n);
            for _ in 0..n {
                let (v, pw) = &diff[rest % qd];
                xs.push(v);
                w *= pw;
                rest /= qd;
            }
            if w == 0.0 {
                continue;
            }
            let mut hit = 0.0;
            for spat in 0..l.pow(n as u32) {
                let mut rest = spat;
                let mut pw = 1.0;
                let mut acc: Option<ExactNumber> = None;
                for x in &xs {
                    let s = &sig.values()[rest % l];
                    pw *= pi[rest % l];
                    rest /= l;
                    let term = s.try_mul(x).unwrap();
                    acc = Some(match acc {
                        None => term,
                        Some(a) => {
                            if a.to_rational().is_some() && term.to_rational().is_some() {
                                let r = a.to_rational().unwrap() + term.to_rational().unwrap();
                                ExactNumber::from_rational(a.basis(), r).unwrap()
                            } else if a.to_rational().is_some() {
                                ExactNumber::from_rational(term.basis(), a.to_rational().unwrap())
                                    .unwrap()
                                    .add(&term)
                            } else if term.to_rational().is_some() {
                                a.add(
                                    &ExactNumber::from_rational(
                                        a.basis(),
                                        term.to_rational().unwrap(),
                                    )
                                    .unwrap(),
                                )
                            } else {
                                a.add(&term)
                            }
                        }
                    });
                }
                if acc.map(|a| a.is_zero()).unwrap_or(true) {
                    hit += pw;
                }
            }
            total += w * hit.powi(m as i32);
        }
        total
    }

    #[test]
    fn engine_matches_brute_enumeration() {
        let cases: Vec<(Alphabet, Vec<f64>, Alphabet, Vec<f64>, usize, usize)> = vec![
            (presets::binary(), uniform(2), presets::binary(), uniform(2), 3, 8),
            (presets::ternary(), vec![0.25, 0.5, 0.25], presets::binary(), uniform(2), 2, 5),
            (
                presets::binary(),
                vec![0.35, 0.65],
                presets::ternary(),
                vec![0.2, 0.6, 0.2],
                2,
                5,
            ),
            // Asymmetric signature law: the merge must turn itself off.
            (presets::binary(), uniform(2), presets::ternary(), vec![0.5, 0.3, 0.2], 2, 5),
        ];
        for (input, p, sig, pi, m, n) in cases {
            let sys = ClassSystem::new(&input, &p, &sig, &pi, true).unwrap();
            let terms = composition_terms(&sys, n);
            let got = noiseless_log2_expectation(&terms, m).exp2();
            let want = brute_expectation(&input, &p, &sig, &pi, m, n);
            assert!(
                (got - want).abs() < 1e-12,
                "engine {got} vs brute {want} (n = {n})"
            );
        }
    }

    #[test]
    fn mixed_bases_normalize_to_one_law() {
        // Binary input against chips {1, j}: products 2*1 and 2*j must share
        // a basis for the convolution to add them.
        let bin = presets::binary();
        let vals = vec![
            ExactNumber::int(1),
            ExactNumber::gaussian(
                num_rational::BigRational::from_integer(0.into()),
                num_rational::BigRational::from_integer(1.into()),
            ),
        ];
        let sig = Alphabet::new(vals).unwrap();
        let sys = ClassSystem::new(&bin, &uniform(2), &sig, &uniform(2), true).unwrap();
        let terms = composition_terms(&sys, 4);
        let logs: Vec<f64> = terms.iter().map(|t| t.log2_weight).collect();
        assert!(log2_sum_tree(&logs).abs() < 1e-10);
        // {1, j} is asymmetric, so the +-2 classes stay separate.
        assert_eq!(sys.classes.len(), 2);
        // P(a^T x = 0) for a single nonzero difference under {1, j} chips.
        let one = terms
            .iter()
            .find(|t| t.ks.iter().sum::<usize>() == 1)
            .unwrap();
        assert_eq!(one.phi, 0.0);
    }

    #[test]
    fn gaussian_kernel_expectation_decays() {
        let bin = presets::binary();
        let sys = ClassSystem::new(&bin, &uniform(2), &bin, &uniform(2), true).unwrap();
        let terms = composition_terms(&sys, 6);
        let e0 = noisy_log2_expectation(&terms, 2, 0.0);
        let e1 = noisy_log2_expectation(&terms, 2, 0.3);
        let e_inf = noisy_log2_expectation(&terms, 2, 1e9);
        assert!(e0.abs() < 1e-10, "kernel 1 must sum weights to 1, got 2^{e0}");
        assert!(e1 < e0);
        // As c grows the kernel expectation approaches the zero-hit law.
        let noiseless = noiseless_log2_expectation(&terms, 2);
        assert!((e_inf - noiseless).abs() < 1e-9);
    }

    #[test]
    fn stick_breaking_round_trips() {
        let p = vec![0.2, 0.5, 0.3];
        let t = stick_coords(&p);
        let q = stick_break(&t);
        for (a, b) in p.iter().zip(&q) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn search_fixed_and_one_parameter() {
        // Objective maximized at p = (0.3, 0.7): a concave score in p[0].
        let eval = |p: &[f64], _pi: &[f64]| -(p[0] - 0.3) * (p[0] - 0.3);
        let fixed = search_distributions(&[0.5, 0.5], &[1.0], SearchPolicy::Fixed, eval).unwrap();
        assert!((fixed.value + 0.04).abs() < 1e-12);
        assert!(!fixed.local);
        let tuned = search_distributions(&[0.5, 0.5], &[1.0], SearchPolicy::Optimize, eval).unwrap();
        assert!((tuned.p[0] - 0.3).abs() < 1e-6);
        assert!(!tuned.local);
    }

    #[test]
    fn search_two_parameters_is_flagged_local() {
        let eval =
            |p: &[f64], pi: &[f64]| -(p[0] - 0.4) * (p[0] - 0.4) - (pi[0] - 0.6) * (pi[0] - 0.6);
        let out =
            search_distributions(&[0.5, 0.5], &[0.5, 0.5], SearchPolicy::Optimize, eval).unwrap();
        assert!(out.local);
        assert!((out.p[0] - 0.4).abs() < 1e-5);
        assert!((out.pi[0] - 0.6).abs() < 1e-5);
    }
}
