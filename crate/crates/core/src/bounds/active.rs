//! Sum-capacity lower bounds when only part of the user population
//! transmits.
//!
//! Two activity models are covered: exactly `k` of `n` users active, and
//! each user independently active with probability `p_act`. Both reuse the
//! exponential-moment recipe of the noisy module: a gamma price against the
//! log of a kernel averaged over difference count classes. Activity changes
//! only the class weights and the power normalization (active users
//! transmit hotter, by n/k or 1/p_act, to hold the average power), so every
//! kernel below is (1 + 2c‖d‖²)^(-m/2) against a Gaussian signature or
//! E exp(-c (s·d)²) against a binary one, with one shared constant c.
//!
//! Gaussian-input kernels are averaged through the Laplace identity
//! (1+z)^(-m/2) = Gamma(m/2)^-1 int u^(m/2-1) e^(-u) e^(-uz) du, which
//! turns every chi-square expectation into a one-dimensional integral of
//! closed-form Laplace transforms. Gauss rules matched to the chi-square
//! weight are useless here: the kernel pushes the mass far into the left
//! tail where such rules have no nodes.

use std::f64::consts::LOG2_E;

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::numerics::integrate::adaptive_simpson;
use crate::numerics::logdomain::{log2_binomial, log2_multinomial, log2_sum_tree};
use crate::numerics::optimize::{golden_max, maximize_over_gamma};

use super::noisy::{phi_gamma, GammaPolicy};
use super::{BoundResult, Quality};

/// Which pair of input and signature models a bound is evaluated for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActiveVariant {
    /// Bipolar user symbols, standard Gaussian chips.
    BinaryReal,
    /// Standard Gaussian user symbols and chips.
    RealReal,
    /// Bipolar user symbols and chips.
    BinaryBinary,
}

impl std::fmt::Display for ActiveVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ActiveVariant::BinaryReal => "binary-real",
            ActiveVariant::RealReal => "real-real",
            ActiveVariant::BinaryBinary => "binary-binary",
        };
        write!(f, "{s}")
    }
}

impl std::str::FromStr for ActiveVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary-real" => Ok(ActiveVariant::BinaryReal),
            "real-real" => Ok(ActiveVariant::RealReal),
            "binary-binary" => Ok(ActiveVariant::BinaryBinary),
            other => Err(Error::Parse(format!(
                "unknown activity variant {other:?}; use binary-real, real-real \
                 or binary-binary"
            ))),
        }
    }
}

/// How many users transmit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ActivityModel {
    /// Exactly this many users are active.
    KActive(usize),
    /// Each user is independently active with this probability.
    PActive(f64),
}

impl ActivityModel {
    pub fn validate(&self, n: usize) -> Result<()> {
        match *self {
            ActivityModel::KActive(k) if k > n => Err(Error::InvalidDimension(format!(
                "active count {k} exceeds the user count {n}"
            ))),
            ActivityModel::PActive(p) if !(p > 0.0 && p <= 1.0) => {
                Err(Error::InvalidDistribution(format!(
                    "activity probability must lie in (0, 1], got {p}"
                )))
            }
            _ => Ok(()),
        }
    }
}

/// Shape and search settings shared by the finite activity bounds.
#[derive(Debug, Clone)]
pub struct ActiveQuery {
    pub m: usize,
    pub n: usize,
    /// Linear per-user SNR.
    pub eta: f64,
    pub gamma: GammaPolicy,
}

impl ActiveQuery {
    fn check(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::InvalidDimension(format!(
                "bound query needs m, n >= 1, got {}x{}",
                self.m, self.n
            )));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidDimension(format!(
                "SNR must be positive and finite, got {}",
                self.eta
            )));
        }
        if let GammaPolicy::Fixed(g) = self.gamma {
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::InvalidDimension(format!(
                    "fixed gamma must be positive and finite, got {g}"
                )));
            }
        }
        Ok(())
    }
}

fn log2p1(x: f64) -> f64 {
    x.ln_1p() * LOG2_E
}

/// x^e in log2, with the 0^0 = 1 convention so vanishing weights at the
/// activity extremes drop out instead of poisoning sums with NaN.
fn log2_pow(base: f64, exp: f64) -> f64 {
    if exp == 0.0 {
        0.0
    } else {
        exp * base.log2()
    }
}

/// log2 of Gamma(shape)^-1 int_0^inf u^(shape-1) e^(-u) K(u) du for a
/// positive kernel supplied through its natural log.
///
/// Substituting u = e^v gives the integrand exp(shape v - e^v + ln K(e^v)),
/// which decays superexponentially to the right and at rate `shape` to the
/// left. A kernel fighting the weight can split the mass into two humps, so
/// the maximizer is located by a dense scan (extended leftward until the
/// tail is dead) before a golden polish, and the integration window spans
/// the outermost points still carrying mass.
fn log2_gamma_weighted_integral(shape: f64, ln_kernel: impl Fn(f64) -> f64) -> f64 {
    debug_assert!(shape > 0.0);
    let g = |v: f64| shape * v - v.exp() + ln_kernel(v.exp());
    // e^-drop is below any tolerance used downstream.
    let drop = 92.0;
    let block = 64.0;
    let step = block / 2048.0;
    let v_top = (shape + 2.0).ln() + 2.0;
    let mut samples: Vec<(f64, f64)> = Vec::with_capacity(4096);
    let mut best = f64::NEG_INFINITY;
    let mut lo = v_top - block;
    let mut scan_from = lo;
    loop {
        let count = ((v_top.min(scan_from + block) - scan_from) / step).round() as usize;
        for i in 0..count {
            let v = scan_from + i as f64 * step;
            let gv = g(v);
            if gv > best {
                best = gv;
            }
            samples.push((v, gv));
        }
        if g(lo) <= best - drop || lo <= -30_000.0 {
            break;
        }
        lo -= block;
        scan_from = lo;
    }
    let mut hi = v_top;
    loop {
        let gv = g(hi);
        if gv > best {
            best = gv;
        }
        samples.push((hi, gv));
        if gv < best - drop || hi > 705.0 {
            break;
        }
        hi += 1.0;
    }
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    let peak = samples
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .map(|(i, _)| i)
        .unwrap();
    let pl = samples[peak.saturating_sub(1)].0;
    let ph = samples[(peak + 1).min(samples.len() - 1)].0;
    if ph > pl {
        let (_, gv) = golden_max(&g, pl, ph, 1e-12);
        if gv > best {
            best = gv;
        }
    }
    let keep = best - drop;
    let v_lo = samples.iter().find(|(_, gv)| *gv >= keep).unwrap().0 - step;
    let v_hi = samples.iter().rev().find(|(_, gv)| *gv >= keep).unwrap().0 + step;
    let h = |v: f64| (g(v) - best).exp();
    let integral = adaptive_simpson(&h, v_lo, v_hi, 1e-14 * (v_hi - v_lo));
    (best + integral.ln()) * LOG2_E - ln_gamma(shape) * LOG2_E
}

/// Difference classes of a pair of k-active vectors: `a` coordinates where
/// both are active with opposite signs, two groups of `b` singleton-active
/// coordinates (one per vector, necessarily equal in size), `k - a - b`
/// doubly-active agreeing coordinates and `n - k - b` idle ones. The squared
/// difference norm is 4a + 2b.
fn for_k_classes(n: usize, k: usize, mut visit: impl FnMut(usize, usize, f64)) {
    let pair_count = 2.0 * log2_binomial(n as u64, k as u64);
    for a in 0..=k {
        for b in 0..=(k - a).min(n - k) {
            let parts = [
                a as u64,
                b as u64,
                b as u64,
                (k - a - b) as u64,
                (n - k - b) as u64,
            ];
            let w = log2_multinomial(n as u64, &parts) + b as f64 - k as f64 - pair_count;
            visit(a, b, w);
        }
    }
}

/// Kernel constant gamma r^2 / (2 (1+gamma) m) for activity rate `p`, where
/// r^2 = 2 eta / p restores the average power spent by part-time users.
fn kernel_c(m: usize, eta: f64, p: f64, gamma: f64) -> f64 {
    gamma * eta / ((1.0 + gamma) * m as f64 * p)
}

/// log2 of the averaged kernel for binary input against Gaussian chips,
/// k of n users active.
fn logmu_k_binary_real(m: usize, n: usize, k: usize, eta: f64, gamma: f64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let c = kernel_c(m, eta, k as f64 / n as f64, gamma);
    let mut terms = Vec::new();
    for_k_classes(n, k, |a, b, w| {
        let nsq = (4 * a + 2 * b) as f64;
        terms.push(w - 0.5 * m as f64 * log2p1(2.0 * c * nsq));
    });
    log2_sum_tree(&terms)
}

/// Same average for binary chips: the per-chip projection walks a lattice of
/// +-2 steps from doubly-active coordinates and +-1 steps from singletons.
fn logmu_k_binary_binary(m: usize, n: usize, k: usize, eta: f64, gamma: f64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let c = kernel_c(m, eta, k as f64 / n as f64, gamma);
    let mut terms = Vec::new();
    for_k_classes(n, k, |a, b, w| {
        let j = 2 * b;
        let mut inner = Vec::with_capacity((a + 1) * (j + 1));
        for u in 0..=a {
            let du = 2.0 * (2.0 * u as f64 - a as f64);
            for v in 0..=j {
                let dv = 2.0 * v as f64 - j as f64;
                let step = du + dv;
                inner.push(
                    log2_binomial(a as u64, u as u64) + log2_binomial(j as u64, v as u64)
                        - (a + j) as f64
                        - c * step * step * LOG2_E,
                );
            }
        }
        terms.push(w + m as f64 * log2_sum_tree(&inner));
    });
    log2_sum_tree(&terms)
}

/// Gaussian input and chips: condition on the overlap j of the two active
/// sets. The difference norm stacks 2(k-j) plain and j doubled chi-square
/// degrees of freedom, whose Laplace transforms multiply under the Gamma
/// identity.
fn logmu_k_real_real(m: usize, n: usize, k: usize, eta: f64, gamma: f64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let c = kernel_c(m, eta, k as f64 / n as f64, gamma);
    let mut terms = Vec::new();
    for j in (2 * k).saturating_sub(n)..=k {
        let w = log2_binomial(k as u64, j as u64)
            + log2_binomial((n - k) as u64, (k - j) as u64)
            - log2_binomial(n as u64, k as u64);
        let plain = (k - j) as f64;
        let doubled = 0.5 * j as f64;
        let branch = log2_gamma_weighted_integral(0.5 * m as f64, |u| {
            -plain * (4.0 * c * u).ln_1p() - doubled * (8.0 * c * u).ln_1p()
        });
        terms.push(w + branch);
    }
    log2_sum_tree(&terms)
}

/// Count classes of a difference of independently p-active vectors.
fn for_p_classes(n: usize, mut visit: impl FnMut(usize, usize, usize)) {
    for k1 in 0..=n {
        for k2 in 0..=(n - k1) {
            visit(k1, k2, n - k1 - k2);
        }
    }
}

/// Gaussian input and chips, i.i.d. activity. Coordinates are independent,
/// so under the Gamma identity the whole class sum collapses into the n-th
/// power of one per-coordinate Laplace transform: idle mass (1-p)^2, a
/// plain chi-square with weight 2p(1-p) and a doubled one with weight p^2.
fn logsum_p_real_real(m: usize, n: usize, p: f64, eta: f64, gamma: f64) -> f64 {
    let c = kernel_c(m, eta, p, gamma);
    let idle = (1.0 - p) * (1.0 - p);
    let single = 2.0 * p * (1.0 - p);
    let double = p * p;
    log2_gamma_weighted_integral(0.5 * m as f64, |u| {
        let phi = idle
            + single / (1.0 + 4.0 * c * u).sqrt()
            + double / (1.0 + 8.0 * c * u).sqrt();
        n as f64 * phi.ln()
    })
}

/// Shared class weight for bipolar symbols with i.i.d. activity: per
/// coordinate the difference has |d| = 2 with probability p^2/2, |d| = 1
/// with 2p(1-p), and vanishes otherwise.
fn p_binary_weight(n: usize, p: f64, k1: usize, k2: usize) -> f64 {
    let k3 = n - k1 - k2;
    log2_multinomial(n as u64, &[k1 as u64, k2 as u64, k3 as u64]) + k2 as f64 - k1 as f64
        + log2_pow(p, (2 * k1 + k2) as f64)
        + log2_pow(1.0 - p, k2 as f64)
        + log2_pow(1.0 + 1.5 * p * p - 2.0 * p, k3 as f64)
}

fn logsum_p_binary_real(m: usize, n: usize, p: f64, eta: f64, gamma: f64) -> f64 {
    let c = kernel_c(m, eta, p, gamma);
    let mut terms = Vec::new();
    for_p_classes(n, |k1, k2, _| {
        let w = p_binary_weight(n, p, k1, k2);
        if !w.is_finite() {
            return;
        }
        let nsq = (4 * k1 + k2) as f64;
        terms.push(w - 0.5 * m as f64 * log2p1(2.0 * c * nsq));
    });
    log2_sum_tree(&terms)
}

fn logsum_p_binary_binary(m: usize, n: usize, p: f64, eta: f64, gamma: f64) -> f64 {
    let c = kernel_c(m, eta, p, gamma);
    let mut terms = Vec::new();
    for_p_classes(n, |k1, k2, _| {
        let w = p_binary_weight(n, p, k1, k2);
        if !w.is_finite() {
            return;
        }
        let mut inner = Vec::with_capacity((k1 + 1) * (k2 + 1));
        for i in 0..=k1 {
            let di = 2.0 * (2.0 * i as f64 - k1 as f64);
            for j in 0..=k2 {
                let step = di + 2.0 * j as f64 - k2 as f64;
                inner.push(
                    log2_binomial(k1 as u64, i as u64) + log2_binomial(k2 as u64, j as u64)
                        - (k1 + k2) as f64
                        - c * step * step * LOG2_E,
                );
            }
        }
        terms.push(w + m as f64 * log2_sum_tree(&inner));
    });
    log2_sum_tree(&terms)
}

/// Run the gamma policy over `value(gamma)`.
fn drive_gamma(gamma: GammaPolicy, mut value: impl FnMut(f64) -> f64) -> (f64, f64, Vec<String>) {
    match gamma {
        GammaPolicy::Fixed(g) => (g, value(g), Vec::new()),
        GammaPolicy::Optimize => {
            let (g, v) = maximize_over_gamma(&mut value, 1e-6);
            (g, v, vec![format!("gamma-u={:.6}", g / (1.0 + g))])
        }
    }
}

/// A zero-signal query: the supremum is approached as gamma vanishes.
fn zero_signal_result(extra: (&str, f64)) -> BoundResult {
    let mut out = BoundResult::new(0.0, Quality::ExactSum);
    out.push_arg("gamma", 0.0);
    out.push_arg(extra.0, extra.1);
    out.flags.push("supremum-at-vanishing-gamma".into());
    out
}

/// Lower bound on the sum capacity when exactly `k` of the `n` users are
/// active, in bits. The signature row scale absorbs the duty cycle, so the
/// same per-user SNR `eta` is comparable across `k`.
pub fn k_active_lower(q: &ActiveQuery, k: usize, variant: ActiveVariant) -> Result<BoundResult> {
    q.check()?;
    ActivityModel::KActive(k).validate(q.n)?;
    if k == 0 && q.gamma == GammaPolicy::Optimize {
        return Ok(zero_signal_result(("k", 0.0)));
    }
    let price = q.m as f64;
    let logmu = |gamma: f64| -> f64 {
        match variant {
            ActiveVariant::BinaryReal => logmu_k_binary_real(q.m, q.n, k, q.eta, gamma),
            ActiveVariant::BinaryBinary => logmu_k_binary_binary(q.m, q.n, k, q.eta, gamma),
            ActiveVariant::RealReal => logmu_k_real_real(q.m, q.n, k, q.eta, gamma),
        }
    };
    let (gamma, value, flags) = drive_gamma(q.gamma, |g| -price * phi_gamma(g) - logmu(g));
    if variant != ActiveVariant::RealReal {
        let cap = log2_binomial(q.n as u64, k as u64) + k as f64;
        debug_assert!(value <= cap + 1e-9, "bound {value} above the support cap {cap}");
    }
    let mut out = BoundResult::new(value, Quality::ExactSum);
    out.push_arg("gamma", gamma);
    out.push_arg("k", k as f64);
    out.flags.extend(flags);
    Ok(out)
}

/// Lower bound on the sum capacity when each user is independently active
/// with probability `p_act`, in bits.
pub fn p_active_lower(q: &ActiveQuery, p_act: f64, variant: ActiveVariant) -> Result<BoundResult> {
    q.check()?;
    ActivityModel::PActive(p_act).validate(q.n)?;
    let price = q.m as f64;
    let logsum = |gamma: f64| -> f64 {
        match variant {
            ActiveVariant::BinaryReal => logsum_p_binary_real(q.m, q.n, p_act, q.eta, gamma),
            ActiveVariant::BinaryBinary => logsum_p_binary_binary(q.m, q.n, p_act, q.eta, gamma),
            ActiveVariant::RealReal => logsum_p_real_real(q.m, q.n, p_act, q.eta, gamma),
        }
    };
    let (gamma, value, flags) = drive_gamma(q.gamma, |g| -price * phi_gamma(g) - logsum(g));
    if variant != ActiveVariant::RealReal {
        let per_user = crate::numerics::logdomain::binary_entropy_bits(p_act) + p_act;
        debug_assert!(
            value <= q.n as f64 * per_user + 1e-9,
            "bound {value} above the information cap"
        );
    }
    let mut out = BoundResult::new(value, Quality::ExactSum);
    out.push_arg("gamma", gamma);
    out.push_arg("p_act", p_act);
    out.flags.extend(flags);
    Ok(out)
}

/// log2 of the moment generating function of one squared-difference
/// coordinate: zero mass (1-p)^2, a chi-square with weight 2p(1-p) and a
/// doubled chi-square with weight p^2. Finite for t < 1/4.
fn diff_mgf_log2(p: f64, t: f64) -> f64 {
    let m = (1.0 - p) * (1.0 - p)
        + 2.0 * p * (1.0 - p) / (1.0 - 2.0 * t).sqrt()
        + p * p / (1.0 - 4.0 * t).sqrt();
    m.log2()
}

/// d/dt log M(t), used to bracket the tilting point.
fn diff_mgf_dlog(p: f64, t: f64) -> f64 {
    let a = (1.0 - p) * (1.0 - p);
    let b = 2.0 * p * (1.0 - p);
    let d = p * p;
    let m = a + b / (1.0 - 2.0 * t).sqrt() + d / (1.0 - 4.0 * t).sqrt();
    let mp = b * (1.0 - 2.0 * t).powf(-1.5) + 2.0 * d * (1.0 - 4.0 * t).powf(-1.5);
    mp / m
}

/// Large-deviation rate of the mean squared-difference coordinate, in bits.
/// Zero exactly at the mean 2 p_act.
fn rate_bits(p: f64, x: f64) -> f64 {
    let hi = 0.25 - 1e-12;
    let mut lo = -1.0;
    while x < diff_mgf_dlog(p, lo) && lo > -1e12 {
        lo *= 8.0;
    }
    let (_, v) = golden_max(|t| x * t * LOG2_E - diff_mgf_log2(p, t), lo, hi, 1e-13);
    v.max(0.0)
}

/// Asymptotic (n, m to infinity, n/m to beta) lower bound in bits per user
/// for Gaussian inputs and chips with i.i.d. activity: a Varadhan balance of
/// the kernel decay against the rate of atypically small difference norms.
pub fn p_active_asymptotic(
    beta: f64,
    eta: f64,
    p_act: f64,
    gamma: GammaPolicy,
) -> Result<BoundResult> {
    if !(beta > 0.0 && beta.is_finite() && eta > 0.0 && eta.is_finite()) {
        return Err(Error::InvalidDimension(format!(
            "the asymptotic bound needs beta, eta > 0, got {beta}, {eta}"
        )));
    }
    ActivityModel::PActive(p_act).validate(1)?;
    if let GammaPolicy::Fixed(g) = gamma {
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::InvalidDimension(format!(
                "fixed gamma must be positive and finite, got {g}"
            )));
        }
    }
    // The balance term F - I falls off on both sides of the mean, so the
    // search stays inside (0, 2 p_act] with a small safety margin.
    let surplus = |g: f64| -> (f64, f64) {
        let a = 2.0 * g * eta * beta / ((1.0 + g) * p_act);
        let fx = |x: f64| -0.5 / beta * log2p1(a * x) - rate_bits(p_act, x);
        let hi = 2.0 * p_act * 1.05;
        let grid = 256;
        let mut best = (1, f64::NEG_INFINITY);
        for i in 1..=grid {
            let x = hi * i as f64 / grid as f64;
            let v = fx(x);
            if v > best.1 {
                best = (i, v);
            }
        }
        let lo_x = hi * (best.0 as f64 - 1.0) / grid as f64;
        let hi_x = hi * ((best.0 + 1).min(grid) as f64) / grid as f64;
        let (x, v) = golden_max(fx, lo_x.max(1e-12), hi_x, 1e-12);
        if v >= best.1 {
            (x, v)
        } else {
            (hi * best.0 as f64 / grid as f64, best.1)
        }
    };
    let mut x_star = 0.0;
    let value_at = |g: f64, x_out: &mut f64| -> f64 {
        let (x, s) = surplus(g);
        *x_out = x;
        -phi_gamma(g) / beta - s
    };
    let (gamma_star, value, flags) = match gamma {
        GammaPolicy::Fixed(g) => (g, value_at(g, &mut x_star), Vec::new()),
        GammaPolicy::Optimize => {
            let (g, v) = maximize_over_gamma(|g| value_at(g, &mut x_star), 1e-6);
            let v = value_at(g, &mut x_star).max(v);
            (g, v, vec![format!("gamma-u={:.6}", g / (1.0 + g))])
        }
    };
    let mut out = BoundResult::new(value, Quality::ExactSum);
    out.push_arg("gamma", gamma_star);
    out.push_arg("p_act", p_act);
    out.push_arg("x", x_star);
    out.flags = flags;
    Ok(out)
}


#[cfg(test)]
mod probe {
    use super::*;

    #[test]
    fn probe_large_real_real() {
        for &n in &[16usize, 32, 64, 128, 256] {
            let q = ActiveQuery { m: n, n, eta: 100.0, gamma: GammaPolicy::Optimize };
            let r = k_active_lower(&q, n, ActiveVariant::RealReal).unwrap();
            println!(
                "n=m={n}: per-user={:.9} flags={:?} quality={:?}",
                r.value_bits / n as f64,
                r.flags,
                r.quality
            );
        }
        let eta6 = 10f64.powf(0.6);
        for variant in [
            ActiveVariant::BinaryBinary,
            ActiveVariant::BinaryReal,
            ActiveVariant::RealReal,
        ] {
            let q = ActiveQuery { m: 32, n: 64, eta: eta6, gamma: GammaPolicy::Optimize };
            let r = k_active_lower(&q, 32, variant).unwrap();
            println!("6dB {variant}: per-user={:.6}", r.value_bits / 64.0);
        }
        for variant in [
            ActiveVariant::BinaryBinary,
            ActiveVariant::BinaryReal,
            ActiveVariant::RealReal,
        ] {
            let q = ActiveQuery { m: 32, n: 64, eta: 100.0, gamma: GammaPolicy::Optimize };
            let r = k_active_lower(&q, 32, variant).unwrap();
            println!("20dB {variant}: per-user={:.6}", r.value_bits / 64.0);
        }
    }
}
