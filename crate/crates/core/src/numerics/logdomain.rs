//! Base-2 log-domain arithmetic. Probabilities in the bound evaluations span
//! hundreds of orders of magnitude, so sums of terms are carried as log2
//! magnitudes and combined with a fixed pairwise reduction tree to keep
//! results independent of accumulation order.

use statrs::function::gamma::ln_gamma;

const LOG2_E: f64 = std::f64::consts::LOG2_E;

/// log2(2^a + 2^b), tolerating -inf for exact zeros.
pub fn log2_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (1.0 + (lo - hi).exp2()).log2()
}

/// log2 of a sum of terms given as log2 values, reduced pairwise over a fixed
/// binary tree so the result does not depend on thread scheduling or input
/// chunking beyond the given order.
pub fn log2_sum_tree(terms: &[f64]) -> f64 {
    match terms.len() {
        0 => f64::NEG_INFINITY,
        1 => terms[0],
        n => {
            let mid = n / 2;
            log2_add(log2_sum_tree(&terms[..mid]), log2_sum_tree(&terms[mid..]))
        }
    }
}

/// log2 of the binomial coefficient C(n, k).
pub fn log2_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    (ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0))
        * LOG2_E
}

/// log2 of the multinomial coefficient n! / (k_1! ... k_r!); the parts must
/// sum to n.
pub fn log2_multinomial(n: u64, parts: &[u64]) -> f64 {
    debug_assert_eq!(parts.iter().sum::<u64>(), n);
    let mut acc = ln_gamma(n as f64 + 1.0);
    for &k in parts {
        acc -= ln_gamma(k as f64 + 1.0);
    }
    acc * LOG2_E
}

/// Binary entropy in bits; H(0) = H(1) = 0.
pub fn binary_entropy_bits(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        return 0.0;
    }
    -t * t.log2() - (1.0 - t) * (1.0 - t).log2()
}

/// Shannon entropy in bits of a float probability vector (zeros allowed).
pub fn entropy_bits(probs: &[f64]) -> f64 {
    probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum()
}

/// Wilson score interval for a binomial proportion at normal quantile `z`.
pub fn wilson_interval(errors: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}
