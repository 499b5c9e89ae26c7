//! Noiseless sum-capacity bounds: the general count-class lower bound, its
//! closed forms for the standard alphabet pairings, two conjectured upper
//! bounds, and the large-system limit of the lower bound.

use num_bigint::BigUint;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::alphabet::Alphabet;
use crate::error::{Error, Result};
use crate::exact::{rational_rank, ExactNumber};
use crate::numerics::logdomain::{
    entropy_bits, log2_binomial, log2_multinomial, log2_sum_tree,
};

use super::{
    check_distribution, composition_terms, noiseless_log2_expectation, search_distributions,
    BoundQuery, BoundResult, ClassSystem, Quality,
};

/// x^e in log2, with 0^0 = 1.
fn pow_log2(base: f64, e: u64) -> f64 {
    if e == 0 {
        0.0
    } else {
        e as f64 * base.log2()
    }
}

/// The general noiseless lower bound: minus the log of the expected m-th
/// power of the zero-hit probability of a random chip row against a random
/// difference vector, optionally tuned over both laws.
pub fn lower_noiseless(q: &BoundQuery) -> Result<BoundResult> {
    q.check_dims()?;
    // Surface support-level failures (mixed bases without closure) once,
    // before the search probes different masses over the same supports.
    ClassSystem::new(q.input, &q.p, q.signature, &q.pi, true)?;
    let eval = |p: &[f64], pi: &[f64]| -> f64 {
        let sys = ClassSystem::new(q.input, p, q.signature, pi, true)
            .expect("support validated before the search");
        let terms = composition_terms(&sys, q.n);
        -noiseless_log2_expectation(&terms, q.m)
    };
    let out = search_distributions(&q.p, &q.pi, q.policy, eval)?;
    let quality = if out.local {
        Quality::OptimizedLocal
    } else {
        Quality::ExactSum
    };
    let mut res = BoundResult::new(out.value, quality);
    res.push_probs("p", q.input, &out.p);
    res.push_probs("pi", q.signature, &out.pi);
    debug_assert!(res.value_bits <= q.n as f64 * (q.input.len() as f64).log2() + 1e-9);
    Ok(res)
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::InvalidAlphabet(format!(
            "{name} must lie in [0, 1], got {v}"
        )));
    }
    Ok(())
}

/// Closed forms of the noiseless lower bound for the standard pairings,
/// keyed by the example number used throughout this crate's documentation:
///
/// * 12: binary/binary, params `[p1, pi1]`
/// * 13: optical/optical, params `[p0, pi0]`
/// * 14: binary/{1, j}, uniform
/// * 15: binary/ternary, params `[pi0]`
/// * 18: ternary/binary, params `[p0]`
/// * 19: ternary/ternary, params `[p0, pi0]`
/// * 20: binary/quaternary with algebraically independent chips, uniform
/// * 21: binary/quaternary {+-1, +-j}, uniform
pub fn lower_noiseless_closed(
    example: u32,
    m: usize,
    n: usize,
    params: &[f64],
) -> Result<BoundResult> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidDimension(
            "closed forms need m >= 1 and n >= 1".into(),
        ));
    }
    let want = |k: usize| -> Result<()> {
        if params.len() != k {
            return Err(Error::Parse(format!(
                "example {example} takes {k} parameter(s), got {}",
                params.len()
            )));
        }
        for (i, &v) in params.iter().enumerate() {
            check_unit(&format!("param {i}"), v)?;
        }
        Ok(())
    };
    let value = match example {
        12 => {
            want(2)?;
            binary_binary_closed(m, n, params[0], params[1])
        }
        13 => {
            want(2)?;
            optical_closed(m, n, params[0], params[1])
        }
        14 => {
            want(0)?;
            binary_one_j_closed(m, n)
        }
        15 => {
            want(1)?;
            binary_ternary_closed(m, n, params[0])
        }
        18 => {
            want(1)?;
            ternary_binary_closed(m, n, params[0])
        }
        19 => {
            want(2)?;
            ternary_ternary_closed(m, n, params[0], params[1])
        }
        20 => {
            want(0)?;
            binary_ain_closed(m, n)
        }
        21 => {
            want(0)?;
            binary_quaternary_complex_closed(m, n)
        }
        16 | 17 => {
            return Err(Error::Unsupported(format!(
                "example {example} has no usable closed form; use the general bound"
            )))
        }
        other => {
            return Err(Error::Unsupported(format!(
                "unknown closed-form example {other}"
            )))
        }
    };
    let mut res = BoundResult::new(value, Quality::ExactSum);
    for (i, &v) in params.iter().enumerate() {
        res.push_arg(format!("param{i}"), v);
    }
    Ok(res)
}

fn binary_binary_closed(m: usize, n: usize, p1: f64, pi1: f64) -> f64 {
    let mut terms = Vec::new();
    for k1 in 0..=n {
        for k2 in 0..=(n - k1) {
            if (k1 + k2) % 2 == 1 {
                continue;
            }
            let k3 = n - k1 - k2;
            let shift = (k2 as i64 - k1 as i64) / 2;
            let mut inner = Vec::new();
            for a in 0..=k1 {
                let j = a as i64 + shift;
                if j < 0 || j > k2 as i64 {
                    continue;
                }
                let j = j as usize;
                inner.push(
                    log2_binomial(k1 as u64, a as u64)
                        + log2_binomial(k2 as u64, j as u64)
                        + pow_log2(pi1, (a + j) as u64)
                        + pow_log2(1.0 - pi1, ((k1 - a) + (k2 - j)) as u64),
                );
            }
            let inner_log = log2_sum_tree(&inner);
            terms.push(
                log2_multinomial(n as u64, &[k1 as u64, k2 as u64, k3 as u64])
                    + pow_log2(p1 * (1.0 - p1), (k1 + k2) as u64)
                    + pow_log2(p1 * p1 + (1.0 - p1) * (1.0 - p1), k3 as u64)
                    + m as f64 * inner_log,
            );
        }
    }
    -log2_sum_tree(&terms)
}

fn optical_closed(m: usize, n: usize, p0: f64, pi0: f64) -> f64 {
    let mut terms = Vec::new();
    for k1 in 0..=n {
        for k2 in 0..=(n - k1) {
            let k3 = n - k1 - k2;
            let mut inner = Vec::new();
            for a in 0..=k1.min(k2) {
                inner.push(
                    log2_binomial(k1 as u64, a as u64)
                        + log2_binomial(k2 as u64, a as u64)
                        + pow_log2(1.0 - pi0, 2 * a as u64)
                        + pow_log2(pi0, (k1 + k2 - 2 * a) as u64),
                );
            }
            let inner_log = log2_sum_tree(&inner);
            terms.push(
                log2_multinomial(n as u64, &[k1 as u64, k2 as u64, k3 as u64])
                    + pow_log2(p0 * (1.0 - p0), (k1 + k2) as u64)
                    + pow_log2(p0 * p0 + (1.0 - p0) * (1.0 - p0), k3 as u64)
                    + m as f64 * inner_log,
            );
        }
    }
    -log2_sum_tree(&terms)
}

fn binary_one_j_closed(m: usize, n: usize) -> f64 {
    let mut terms = Vec::new();
    for k in 0..=(n / 2) {
        terms.push(
            log2_multinomial(n as u64, &[k as u64, k as u64, (n - 2 * k) as u64])
                - (n + 2 * k) as f64
                + m as f64 * (log2_binomial(2 * k as u64, k as u64) - 2.0 * k as f64),
        );
    }
    -log2_sum_tree(&terms)
}

fn binary_ternary_closed(m: usize, n: usize, pi0: f64) -> f64 {
    let pi1 = (1.0 - pi0) / 2.0;
    let mut terms = Vec::new();
    for k in 0..=n {
        let mut inner = Vec::new();
        for a in 0..=(k / 2) {
            inner.push(
                log2_multinomial(k as u64, &[a as u64, a as u64, (k - 2 * a) as u64])
                    + pow_log2(pi0, (k - 2 * a) as u64)
                    + pow_log2(pi1, 2 * a as u64),
            );
        }
        terms.push(
            log2_binomial(n as u64, k as u64) - n as f64 + m as f64 * log2_sum_tree(&inner),
        );
    }
    -log2_sum_tree(&terms)
}

fn ternary_binary_closed(m: usize, n: usize, p0: f64) -> f64 {
    let p1 = (1.0 - p0) / 2.0;
    let mut terms = Vec::new();
    for k1 in 0..=n {
        for k2 in 0..=(n - k1) {
            if k2 % 2 == 1 {
                continue;
            }
            let k3 = n - k1 - k2;
            let mut inner = Vec::new();
            for a in 0..=k1 {
                let b = k2 as i64 / 2 + k1 as i64 - 2 * a as i64;
                if b < 0 || b > k2 as i64 {
                    continue;
                }
                inner.push(
                    log2_binomial(k1 as u64, a as u64) + log2_binomial(k2 as u64, b as u64)
                        - (k1 + k2) as f64,
                );
            }
            let inner_log = log2_sum_tree(&inner);
            terms.push(
                log2_multinomial(n as u64, &[k1 as u64, k2 as u64, k3 as u64])
                    + pow_log2(2.0 * p1 * p1, k1 as u64)
                    + pow_log2(4.0 * p0 * p1, k2 as u64)
                    + pow_log2(p0 * p0 + 2.0 * p1 * p1, k3 as u64)
                    + m as f64 * inner_log,
            );
        }
    }
    -log2_sum_tree(&terms)
}

fn ternary_ternary_closed(m: usize, n: usize, p0: f64, pi0: f64) -> f64 {
    let p1 = (1.0 - p0) / 2.0;
    let pi1 = (1.0 - pi0) / 2.0;
    let mut terms = Vec::new();
    for k1 in 0..=n {
        for k2 in 0..=(n - k1) {
            let k3 = n - k1 - k2;
            let mut inner = Vec::new();
            for a in 0..=k1 {
                for b in 0..=(k1 - a) {
                    let d = k1 - a - b;
                    for ap in 0..=k2 {
                        let bp = 2 * (a as i64 - b as i64) + ap as i64;
                        if bp < 0 || ap as i64 + bp > k2 as i64 {
                            continue;
                        }
                        let bp = bp as usize;
                        let rest = k2 - ap - bp;
                        inner.push(
                            log2_multinomial(k1 as u64, &[a as u64, b as u64, d as u64])
                                + log2_multinomial(
                                    k2 as u64,
                                    &[ap as u64, bp as u64, rest as u64],
                                )
                                + pow_log2(pi1, (a + b + ap + bp) as u64)
                                + pow_log2(pi0, (d + rest) as u64),
                        );
                    }
                }
            }
            let inner_log = log2_sum_tree(&inner);
            terms.push(
                log2_multinomial(n as u64, &[k1 as u64, k2 as u64, k3 as u64])
                    + pow_log2(2.0 * p1 * p1, k1 as u64)
                    + pow_log2(4.0 * p0 * p1, k2 as u64)
                    + pow_log2(p0 * p0 + 2.0 * p1 * p1, k3 as u64)
                    + m as f64 * inner_log,
            );
        }
    }
    -log2_sum_tree(&terms)
}

fn binary_ain_closed(m: usize, n: usize) -> f64 {
    let mut terms = Vec::new();
    for k in 0..=(n / 2) {
        let mut inner = Vec::new();
        for mu in 0..=k {
            inner.push(
                2.0 * log2_binomial(k as u64, mu as u64)
                    + log2_binomial(2 * mu as u64, mu as u64)
                    + log2_binomial(2 * (k - mu) as u64, (k - mu) as u64),
            );
        }
        terms.push(
            log2_multinomial(n as u64, &[k as u64, k as u64, (n - 2 * k) as u64])
                - (n + 2 * k) as f64
                + m as f64 * (log2_sum_tree(&inner) - 4.0 * k as f64),
        );
    }
    -log2_sum_tree(&terms)
}

fn binary_quaternary_complex_closed(m: usize, n: usize) -> f64 {
    let mut terms = Vec::new();
    for k in 0..=(n / 2) {
        terms.push(
            log2_binomial(n as u64, 2 * k as u64)
                + 2.0 * m as f64 * (log2_binomial(2 * k as u64, k as u64) - 2.0 * k as f64),
        );
    }
    n as f64 - log2_sum_tree(&terms)
}

fn big_binomial(n: usize, k: usize) -> BigUint {
    binomial(BigUint::from(n), BigUint::from(k))
}

/// Exact expected m-th power of the zero-hit probability for uniform binary
/// input and chips, summed over count classes the way the general engine
/// does it.
pub fn binary_uniform_expectation_exact(m: usize, n: usize) -> BigRational {
    let two = BigUint::from(2usize);
    let mut total = BigRational::zero();
    for k in 0..=n {
        // Zero-hit probability of k balanced +-1 chips: C(k, k/2) / 2^k.
        let phi = if k % 2 == 0 {
            BigRational::new(big_binomial(k, k / 2).into(), two.pow(k as u32).into())
        } else {
            BigRational::zero()
        };
        if phi.is_zero() && k > 0 {
            continue;
        }
        let weight = BigRational::new(big_binomial(n, k).into(), two.pow(n as u32).into());
        let mut phim = BigRational::one();
        for _ in 0..m {
            phim *= &phi;
        }
        total += weight * phim;
    }
    total
}

/// The same expectation written as a sum over balanced pair counts; the two
/// forms are provably identical, and the equality is asserted exactly in the
/// acceptance tests.
pub fn binary_pairs_expectation_exact(m: usize, n: usize) -> BigRational {
    let two = BigUint::from(2usize);
    let mut total = BigRational::zero();
    for j in 0..=(n / 2) {
        let inner = BigRational::new(
            big_binomial(2 * j, j).into(),
            two.pow(2 * j as u32).into(),
        );
        let mut inner_m = BigRational::one();
        for _ in 0..m {
            inner_m *= &inner;
        }
        total += BigRational::from_integer(big_binomial(n, 2 * j).into()) * inner_m;
    }
    total / BigRational::from_integer(two.pow(n as u32).into())
}

/// Enumerates compositions of `n` into `parts` nonnegative parts.
pub(crate) fn compositions(n: usize, parts: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; parts];
    fn rec(i: usize, rest: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i + 1 == cur.len() {
            cur[i] = rest;
            out.push(cur.clone());
            return;
        }
        for k in 0..=rest {
            cur[i] = k;
            rec(i + 1, rest - k, cur, out);
        }
    }
    rec(0, n, &mut cur, &mut out);
    out
}

/// Law of the chip-weighted sum of a composition's symbols: each of the
/// `u[k]` coordinates carrying chip `s_k` splits over the input alphabet, and
/// atoms that coincide exactly are pooled. Returns (atom, log2 mass) pairs.
pub(crate) fn composition_law(
    u: &[usize],
    input: &Alphabet,
    p: &[f64],
    signature: &Alphabet,
) -> Result<Vec<(ExactNumber, f64)>> {
    let q = input.len();
    // Per-chip split laws: law of the sum of u_k i.i.d. input symbols, kept
    // as exact input-basis combinations with their log2 weights.
    let mut per_chip: Vec<Vec<(ExactNumber, f64)>> = Vec::with_capacity(u.len());
    for (k, &uk) in u.iter().enumerate() {
        let mut atoms = Vec::new();
        for v in compositions(uk, q) {
            let mut log_w = log2_multinomial(uk as u64, &v.iter().map(|&x| x as u64).collect::<Vec<_>>());
            for (alpha, &cnt) in v.iter().enumerate() {
                log_w += pow_log2(p[alpha], cnt as u64);
            }
            let mut sum = ExactNumber::zero(input.basis());
            for (alpha, &cnt) in v.iter().enumerate() {
                if cnt > 0 {
                    let c = input.values()[alpha]
                        .scale(&BigRational::from_integer(BigUint::from(cnt).into()));
                    sum = sum.add(&c);
                }
            }
            atoms.push((signature.values()[k].try_mul(&sum)?, log_w));
        }
        per_chip.push(atoms);
    }
    let flat: Vec<(ExactNumber, f64)> = per_chip.iter().flatten().cloned().collect();
    let flat = super::normalize_basis_pairs(flat)?;
    let mut it = flat.into_iter();
    for chunk in per_chip.iter_mut() {
        for slot in chunk.iter_mut() {
            *slot = it.next().unwrap();
        }
    }
    // Convolve the per-chip laws and pool coinciding atoms exactly.
    let mut acc: std::collections::BTreeMap<ExactNumber, f64> = std::collections::BTreeMap::new();
    let zero = per_chip
        .iter()
        .flatten()
        .next()
        .map(|(v, _)| ExactNumber::zero(v.basis()))
        .unwrap_or_else(|| ExactNumber::zero(input.basis()));
    acc.insert(zero, 0.0);
    for chunk in &per_chip {
        let mut next: std::collections::BTreeMap<ExactNumber, f64> =
            std::collections::BTreeMap::new();
        for (a, la) in &acc {
            for (b, lb) in chunk {
                let key = a.add(b);
                let lw = la + lb;
                next.entry(key)
                    .and_modify(|cur| *cur = crate::numerics::logdomain::log2_add(*cur, lw))
                    .or_insert(lw);
            }
        }
        acc = next;
    }
    Ok(acc.into_iter().collect())
}

/// Entropy in bits of a composition's pooled chip-weighted sum law.
fn composition_entropy(
    u: &[usize],
    input: &Alphabet,
    p: &[f64],
    signature: &Alphabet,
) -> Result<f64> {
    let law = composition_law(u, input, p, signature)?;
    let probs: Vec<f64> = law.iter().map(|(_, lw)| lw.exp2()).collect();
    Ok(entropy_bits(&probs))
}

/// Conjectured noiseless upper bound: over all chip-count compositions (and
/// input laws when the policy allows), the smaller of the input entropy rate
/// and the entropy of the pooled chip-weighted sum.
pub fn upper_noiseless_conjectured(q: &BoundQuery) -> Result<BoundResult> {
    q.check_dims()?;
    let l = q.signature.len();
    let comps = compositions(q.n, l);
    let budget: usize = 200_000;
    if comps.len() > budget {
        return Err(Error::BudgetExceeded {
            needed: comps.len() as u128,
            budget: budget as u128,
        });
    }
    // Probe once to surface closure errors deterministically.
    composition_entropy(&comps[0], q.input, &q.p, q.signature)?;
    let mut best = f64::NEG_INFINITY;
    let mut best_u: &[usize] = &comps[0];
    let mut best_p = q.p.clone();
    let mut local = false;
    for u in &comps {
        let eval = |p: &[f64], _pi: &[f64]| -> f64 {
            let h = composition_entropy(u, q.input, p, q.signature)
                .expect("closure validated before the search");
            (q.n as f64 * entropy_bits(p)).min(q.m as f64 * h)
        };
        let out = search_distributions(&q.p, &[1.0], q.policy, eval)?;
        if out.value > best {
            best = out.value;
            best_u = u;
            best_p = out.p;
            local = out.local;
        }
    }
    let quality = if local {
        Quality::OptimizedLocal
    } else {
        Quality::ExactSum
    };
    let mut res = BoundResult::new(best, quality);
    for (s, &uk) in q.signature.values().iter().zip(best_u) {
        res.push_arg(format!("u({s})"), uk as f64);
    }
    res.push_probs("p", q.input, &best_p);
    res.flags.push("conjectured".into());
    Ok(res)
}

/// Entropy in bits of the equiprobable multinomial law on `t` draws over `q`
/// cells.
fn uniform_multinomial_entropy(t: usize, q: usize) -> f64 {
    let mut h = 0.0;
    for x in compositions(t, q) {
        let lw = log2_multinomial(t as u64, &x.iter().map(|&v| v as u64).collect::<Vec<_>>())
            - t as f64 * (q as f64).log2();
        h -= lw.exp2() * lw;
    }
    h
}

/// Alphabet-size-only noiseless upper bound: m times the maximum, over chip
/// count compositions, of the summed entropies of equiprobable multinomial
/// splits. The maximizing composition is found exactly by dynamic
/// programming.
pub fn upper_noiseless_multinomial(m: usize, n: usize, q: usize, l: usize) -> Result<BoundResult> {
    if m == 0 || n == 0 || q < 2 || l == 0 {
        return Err(Error::InvalidDimension(
            "multinomial upper bound needs m, n, l >= 1 and q >= 2".into(),
        ));
    }
    let ent: Vec<f64> = (0..=n).map(|t| uniform_multinomial_entropy(t, q)).collect();
    // dp[r]: best total entropy for the first j parts summing to r.
    let mut dp = vec![f64::NEG_INFINITY; n + 1];
    let mut choice = vec![vec![0usize; n + 1]; l];
    dp[0] = 0.0;
    for j in 0..l {
        let mut next = vec![f64::NEG_INFINITY; n + 1];
        for r in 0..=n {
            if dp[r] == f64::NEG_INFINITY {
                continue;
            }
            for u in 0..=(n - r) {
                let v = dp[r] + ent[u];
                if v > next[r + u] {
                    next[r + u] = v;
                    choice[j][r + u] = u;
                }
            }
        }
        dp = next;
    }
    let mut parts = Vec::with_capacity(l);
    let mut r = n;
    for j in (0..l).rev() {
        let u = choice[j][r];
        parts.push(u);
        r -= u;
    }
    parts.reverse();
    let mut res = BoundResult::new(m as f64 * dp[n], Quality::ExactSum);
    for (j, &u) in parts.iter().enumerate() {
        res.push_arg(format!("u{j}"), u as f64);
    }
    Ok(res)
}

/// Large-system limit of the noiseless lower bound at overload ratio
/// `zeta = n / (m log2 n)`: minimized over nonempty subsets of the
/// difference alphabet, trading the rational rank of the subset's chip
/// products against its log mass. Requires a zero-mean signature law.
pub fn asymptotic_noiseless(
    zeta: f64,
    input: &Alphabet,
    p: &[f64],
    signature: &Alphabet,
    pi: &[f64],
) -> Result<BoundResult> {
    if !(zeta.is_finite() && zeta > 0.0) {
        return Err(Error::InvalidDimension(format!(
            "overload ratio must be positive, got {zeta}"
        )));
    }
    check_distribution(input, p, "input law")?;
    check_distribution(signature, pi, "signature law")?;
    let mean: num_complex::Complex64 = signature
        .values()
        .iter()
        .zip(pi)
        .map(|(s, &w)| w * s.approx())
        .sum();
    if mean.norm() > 1e-12 {
        return Err(Error::Unsupported(
            "the asymptotic lower bound requires a zero-mean signature law".into(),
        ));
    }
    // Difference law, zero atom included.
    let mut diff: std::collections::BTreeMap<ExactNumber, f64> = std::collections::BTreeMap::new();
    for (a, &pa) in input.values().iter().zip(p) {
        for (b, &pb) in input.values().iter().zip(p) {
            *diff.entry(a.sub(b)).or_insert(0.0) += pa * pb;
        }
    }
    let atoms: Vec<(ExactNumber, f64)> = diff.into_iter().collect();
    if atoms.len() > 20 {
        return Err(Error::Unsupported(format!(
            "difference alphabet has {} atoms; subset enumeration is capped at 20",
            atoms.len()
        )));
    }
    let mut best = f64::INFINITY;
    let mut best_arg = (0usize, 0.0_f64, 0usize);
    for mask in 1u32..(1 << atoms.len()) {
        let mut mass = 0.0;
        let mut products: Vec<(ExactNumber, f64)> = Vec::new();
        for (i, (v, w)) in atoms.iter().enumerate() {
            if mask & (1 << i) != 0 {
                mass += w;
                for s in signature.values() {
                    products.push((s.try_mul(v)?, 0.0));
                }
            }
        }
        if mass <= 0.0 {
            continue;
        }
        let products = super::normalize_basis_pairs(products)?;
        let values: Vec<ExactNumber> = products.into_iter().map(|(v, _)| v).collect();
        let rank = rational_rank(&values);
        let term = rank as f64 / (2.0 * zeta) - mass.log2();
        if term < best {
            best = term;
            best_arg = (rank, mass, mask.count_ones() as usize);
        }
    }
    let mut res = BoundResult::new(best, Quality::ExactSum);
    res.push_arg("rank", best_arg.0 as f64);
    res.push_arg("subset_mass", best_arg.1);
    res.push_arg("subset_size", best_arg.2 as f64);
    Ok(res)
}
