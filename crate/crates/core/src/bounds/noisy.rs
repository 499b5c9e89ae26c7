//! Noisy-channel sum-capacity bounds.
//!
//! Every lower bound here prices the channel through a single exponential
//! moment: a count class of input differences contributes exp(-c|v|^2) per
//! receive dimension, where v is the chip-weighted class sum and c couples a
//! free parameter gamma to the SNR and the power normalization. The bounds
//! differ only in how that inner expectation is closed: exact convolution for
//! finite chip alphabets, a rational kernel for Gaussian signatures, and an
//! eigenvalue form in the large-system limit. Upper bounds go through the
//! differential entropy of the received mixture instead. Reference curves
//! (orthogonal-limit capacity and the replica fixed point) round the set out.

use std::collections::BTreeMap;
use std::f64::consts::{LOG2_E, PI};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::alphabet::Alphabet;
use crate::error::{Error, Result};
use crate::exact::ExactNumber;
use crate::numerics::integrate::{adaptive_simpson, adaptive_simpson_2d};
use crate::numerics::logdomain::{entropy_bits, log2_binomial, log2_sum_tree};
use crate::numerics::optimize::{golden_max, maximize_over_gamma, nelder_mead_max};
use crate::numerics::quadrature::normal_expectation_rule;
use crate::numerics::rng::counter_rng;
use crate::sim::NoiseKind;

use super::noiseless::{composition_law, compositions};
use super::{
    alphabet_moments, check_distribution, composition_terms, noisy_log2_expectation,
    search_distributions, stick_break, BoundResult, ClassSystem, Quality, SearchPolicy,
};

/// How the signature chips are drawn.
#[derive(Debug, Clone)]
pub enum SignatureModel<'a> {
    /// Chips i.i.d. from a finite alphabet under the given law.
    Finite {
        alphabet: &'a Alphabet,
        pi: Vec<f64>,
    },
    /// Chips i.i.d. standard real Gaussian.
    GaussianReal,
    /// Chips i.i.d. standard complex Gaussian.
    GaussianComplex,
}

/// Handling of the exponential-moment parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaPolicy {
    /// Evaluate at this gamma only.
    Fixed(f64),
    /// Bracketed search over gamma in (0, inf) via gamma = u/(1-u).
    Optimize,
}

/// A noisy sum-capacity query. `eta` is the linear per-user SNR.
#[derive(Debug, Clone)]
pub struct NoisyBoundQuery<'a> {
    pub m: usize,
    pub n: usize,
    pub eta: f64,
    pub noise: NoiseKind,
    pub input: &'a Alphabet,
    pub p: Vec<f64>,
    pub signature: SignatureModel<'a>,
    pub gamma: GammaPolicy,
    pub policy: SearchPolicy,
}

impl NoisyBoundQuery<'_> {
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
        check_distribution(self.input, &self.p, "input law")?;
        if let SignatureModel::Finite { alphabet, pi } = &self.signature {
            check_distribution(alphabet, pi, "signature law")?;
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

/// Price of gamma in bits: the multiplier on (gamma log2 e - log2(1+gamma)),
/// which is half the real dimension count of the receive space.
fn gamma_price(noise: NoiseKind, m: usize) -> f64 {
    match noise {
        NoiseKind::ComplexGaussian => m as f64,
        NoiseKind::RealGaussian => m as f64 / 2.0,
    }
}

pub(crate) fn phi_gamma(gamma: f64) -> f64 {
    gamma * LOG2_E - (1.0 + gamma).log2()
}

/// Power normalization (sigma_p^2 + n mu_p^2) * E|s|^2 fixing the row scale
/// so the transmit power constraint is met with equality.
fn power_norm(n: usize, input: &Alphabet, p: &[f64], chip_second_moment: f64) -> f64 {
    let (mean, var) = alphabet_moments(input, p);
    (var + n as f64 * mean.norm_sqr()) * chip_second_moment
}

/// Lower bound for finite input and chip alphabets: the exponential moment of
/// each count class is closed by exact convolution of the chip-weighted
/// difference law, then summed over classes in log domain.
pub fn lower_noisy_finite(q: &NoisyBoundQuery) -> Result<BoundResult> {
    q.check()?;
    let SignatureModel::Finite { alphabet: sig, pi } = &q.signature else {
        return Err(Error::Unsupported(
            "the finite lower bound needs a finite chip alphabet; \
             use the gaussian-signature bound instead"
            .into(),
        ));
    };
    // Surface support problems (law products leaving the basis, degenerate
    // power) once before the search; probe laws stay in the open simplex.
    ClassSystem::new(q.input, &q.p, sig, pi, true)?;
    let (sig_mean, sig_var) = alphabet_moments(sig, pi);
    let chip_m2 = sig_var + sig_mean.norm_sqr();
    if power_norm(q.n, q.input, &q.p, chip_m2) < 1e-12 {
        return Err(Error::InvalidDistribution(
            "the input and chip laws carry no signal power".into(),
        ));
    }
    let price = gamma_price(q.noise, q.m);
    let value_and_gamma = |p: &[f64], pi: &[f64]| -> (f64, f64) {
        let sys = ClassSystem::new(q.input, p, sig, pi, true)
            .expect("support validated before the search");
        let terms = composition_terms(&sys, q.n);
        let (mean, var) = alphabet_moments(sig, pi);
        let denom = q.m as f64 * power_norm(q.n, q.input, p, var + mean.norm_sqr());
        let at = |gamma: f64| {
            let c = gamma * q.eta / ((1.0 + gamma) * denom);
            -price * phi_gamma(gamma) - noisy_log2_expectation(&terms, q.m, c)
        };
        match q.gamma {
            GammaPolicy::Fixed(g) => (at(g), g),
            GammaPolicy::Optimize => {
                let (g, v) = maximize_over_gamma(at, 1e-6);
                (v, g)
            }
        }
    };
    let outcome = search_distributions(&q.p, pi, q.policy, |p, pi| value_and_gamma(p, pi).0)?;
    let (_, gamma) = value_and_gamma(&outcome.p, &outcome.pi);
    let quality = if outcome.local {
        Quality::OptimizedLocal
    } else {
        Quality::ExactSum
    };
    let mut res = BoundResult::new(outcome.value, quality);
    res.push_arg("gamma", gamma);
    res.push_probs("p", q.input, &outcome.p);
    res.push_probs("pi", sig, &outcome.pi);
    if matches!(q.gamma, GammaPolicy::Optimize) {
        res.flags
            .push(format!("gamma-u={:.6}", gamma / (1.0 + gamma)));
    }
    debug_assert!(outcome.value <= q.n as f64 * entropy_bits(&outcome.p) + 1e-9);
    Ok(res)
}

/// Lower bound for Gaussian signatures: the chip sum over a count class is
/// Gaussian with variance set by the class magnitudes, so the exponential
/// moment closes into a rational kernel per receive dimension.
pub fn lower_noisy_gaussian_signature(q: &NoisyBoundQuery) -> Result<BoundResult> {
    q.check()?;
    let real_sig = match q.signature {
        SignatureModel::GaussianReal => true,
        SignatureModel::GaussianComplex => false,
        SignatureModel::Finite { .. } => {
            return Err(Error::Unsupported(
                "the gaussian-signature bound needs a Gaussian chip model; \
                 use the finite lower bound instead"
                .into(),
            ));
        }
    };
    if !real_sig && q.noise == NoiseKind::RealGaussian {
        return Err(Error::Unsupported(
            "a complex Gaussian signature needs complex noise".into(),
        ));
    }
    if power_norm(q.n, q.input, &q.p, 1.0) < 1e-12 {
        return Err(Error::InvalidDistribution(
            "the input law carries no signal power".into(),
        ));
    }
    let price = gamma_price(q.noise, q.m);
    let mf = q.m as f64;
    let value_and_gamma = |p: &[f64]| -> (f64, f64) {
        let sys = ClassSystem::counts_only(q.input, p).expect("law validated before the search");
        let nsq: Vec<f64> = sys.classes.iter().map(|c| c.nsq).collect();
        let terms = composition_terms(&sys, q.n);
        let denom = mf * power_norm(q.n, q.input, p, 1.0);
        let at = |gamma: f64| {
            let c = gamma * q.eta / ((1.0 + gamma) * denom);
            let logs: Vec<f64> = terms
                .iter()
                .map(|t| {
                    let quad: f64 = t
                        .ks
                        .iter()
                        .zip(&nsq)
                        .map(|(&k, &s)| k as f64 * s)
                        .sum();
                    let kernel = if real_sig {
                        -(mf / 2.0) * (1.0 + 2.0 * c * quad).log2()
                    } else {
                        -mf * (1.0 + c * quad).log2()
                    };
                    t.log2_weight + kernel
                })
                .collect();
            -price * phi_gamma(gamma) - log2_sum_tree(&logs)
        };
        match q.gamma {
            GammaPolicy::Fixed(g) => (at(g), g),
            GammaPolicy::Optimize => {
                let (g, v) = maximize_over_gamma(at, 1e-6);
                (v, g)
            }
        }
    };
    let pi0 = [1.0];
    let outcome = search_distributions(&q.p, &pi0, q.policy, |p, _| value_and_gamma(p).0)?;
    let (_, gamma) = value_and_gamma(&outcome.p);
    let quality = if outcome.local {
        Quality::OptimizedLocal
    } else {
        Quality::ExactSum
    };
    let mut res = BoundResult::new(outcome.value, quality);
    res.push_arg("gamma", gamma);
    res.push_probs("p", q.input, &outcome.p);
    if matches!(q.gamma, GammaPolicy::Optimize) {
        res.flags
            .push(format!("gamma-u={:.6}", gamma / (1.0 + gamma)));
    }
    Ok(res)
}

/// Differential entropy in bits of sum_i w_i N(mu_i, sigma^2), by adaptive
/// quadrature over the mixture mean +- 8 mixture standard deviations.
fn real_mixture_entropy(atoms: &[(f64, f64)], sigma: f64, rel_tol: f64) -> f64 {
    let norm = 1.0 / (sigma * (2.0 * PI).sqrt());
    let density = |x: f64| -> f64 {
        atoms
            .iter()
            .map(|&(mu, w)| {
                let t = (x - mu) / sigma;
                w * norm * (-0.5 * t * t).exp()
            })
            .sum()
    };
    let integrand = |x: f64| {
        let f = density(x);
        if f > 0.0 {
            -f * f.log2()
        } else {
            0.0
        }
    };
    let mean: f64 = atoms.iter().map(|&(mu, w)| w * mu).sum();
    let spread: f64 = atoms.iter().map(|&(mu, w)| w * (mu - mean) * (mu - mean)).sum();
    let sd = (spread + sigma * sigma).sqrt();
    let (lo, hi) = (mean - 8.0 * sd, mean + 8.0 * sd);
    let rough = adaptive_simpson(&integrand, lo, hi, 1e-3);
    adaptive_simpson(&integrand, lo, hi, rel_tol * rough.abs().max(1.0))
}

/// Complex-plane analogue: components are circular Gaussians with density
/// peak eta/pi, i.e. per-dimension variance 1/(2 eta).
fn complex_mixture_entropy(atoms: &[(Complex64, f64)], eta: f64, rel_tol: f64) -> f64 {
    let norm = eta / PI;
    let density = |x: f64, y: f64| -> f64 {
        atoms
            .iter()
            .map(|&(mu, w)| {
                let dx = x - mu.re;
                let dy = y - mu.im;
                w * norm * (-eta * (dx * dx + dy * dy)).exp()
            })
            .sum()
    };
    let integrand = |x: f64, y: f64| {
        let f = density(x, y);
        if f > 0.0 {
            -f * f.log2()
        } else {
            0.0
        }
    };
    let comp_var = 0.5 / eta;
    let mut mean = Complex64::new(0.0, 0.0);
    for &(mu, w) in atoms {
        mean += w * mu;
    }
    let (mut vx, mut vy) = (0.0, 0.0);
    for &(mu, w) in atoms {
        vx += w * (mu.re - mean.re) * (mu.re - mean.re);
        vy += w * (mu.im - mean.im) * (mu.im - mean.im);
    }
    let sx = (vx + comp_var).sqrt();
    let sy = (vy + comp_var).sqrt();
    let (ax, bx) = (mean.re - 8.0 * sx, mean.re + 8.0 * sx);
    let (ay, by) = (mean.im - 8.0 * sy, mean.im + 8.0 * sy);
    let rough = adaptive_simpson_2d(&integrand, ax, bx, ay, by, 1e-2);
    adaptive_simpson_2d(&integrand, ax, bx, ay, by, rel_tol * rough.abs().max(1.0))
}

/// Monte Carlo estimate of the complex mixture entropy with its standard
/// error, for mixtures too large to integrate.
fn complex_mixture_entropy_mc(
    atoms: &[(Complex64, f64)],
    eta: f64,
    samples: usize,
    seed: u64,
) -> (f64, f64) {
    let norm = eta / PI;
    let density = |z: Complex64| -> f64 {
        atoms
            .iter()
            .map(|&(mu, w)| w * norm * (-eta * (z - mu).norm_sqr()).exp())
            .sum()
    };
    let mut cum = Vec::with_capacity(atoms.len());
    let mut acc = 0.0;
    for &(_, w) in atoms {
        acc += w;
        cum.push(acc);
    }
    let sd = (0.5 / eta).sqrt();
    let mut rng = counter_rng(seed, 0, 0);
    let (mut sum, mut sumsq) = (0.0, 0.0);
    for _ in 0..samples {
        let u: f64 = rng.gen::<f64>() * acc;
        let idx = cum.partition_point(|&c| c < u).min(atoms.len() - 1);
        let gx: f64 = StandardNormal.sample(&mut rng);
        let gy: f64 = StandardNormal.sample(&mut rng);
        let z = atoms[idx].0 + Complex64::new(sd * gx, sd * gy);
        let v = -density(z).log2();
        sum += v;
        sumsq += v * v;
    }
    let nf = samples as f64;
    let mean = sum / nf;
    let var = (sumsq / nf - mean * mean).max(0.0) / (nf - 1.0);
    (mean, var.sqrt())
}

const ENTROPY_MC_ATOM_LIMIT: usize = 10_000;
const ENTROPY_MC_SAMPLES: usize = 50_000;
const ENTROPY_MC_SEED: u64 = 0x4d43_454e_5452_4f50;

/// Conjectured upper bound for unit-magnitude chips under complex noise: over
/// all chip-count compositions (and input laws per policy), the smaller of
/// the input entropy rate and the mixture-entropy surplus of one receive
/// dimension.
pub fn upper_noisy_conjectured(q: &NoisyBoundQuery) -> Result<BoundResult> {
    q.check()?;
    let SignatureModel::Finite { alphabet: sig, pi: _ } = &q.signature else {
        return Err(Error::Unsupported(
            "the conjectured noisy upper bound needs a finite chip alphabet".into(),
        ));
    };
    if q.noise != NoiseKind::ComplexGaussian {
        return Err(Error::Unsupported(
            "the conjectured noisy upper bound is stated for complex noise; \
             use upper_binary for the real binary case"
            .into(),
        ));
    }
    for v in sig.approx_values() {
        if (v.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::Unsupported(format!(
                "the conjectured noisy upper bound needs unit-magnitude chips, got |{v}|"
            )));
        }
    }
    let l = sig.len();
    let comps = compositions(q.n, l);
    let budget: usize = 200_000;
    if comps.len() > budget {
        return Err(Error::BudgetExceeded {
            needed: comps.len() as u128,
            budget: budget as u128,
        });
    }
    // Feasibility of the law products once, outside the probe loop.
    composition_law(&comps[0], q.input, &q.p, sig)?;
    let h_noise = (PI * std::f64::consts::E / q.eta).log2();
    let nf = q.n as f64;
    let mf = q.m as f64;
    let scale = 1.0 / mf.sqrt();
    let mut mc_se: Option<f64> = None;
    let mut best: Option<(f64, Vec<usize>, Vec<f64>, bool)> = None;
    for u in &comps {
        let mut used_mc = mc_se;
        let pi0 = [1.0];
        let outcome = search_distributions(&q.p, &pi0, q.policy, |p, _| {
            let law = composition_law(u, q.input, p, sig)
                .expect("support validated before the search");
            let atoms: Vec<(Complex64, f64)> = law
                .iter()
                .map(|(v, lw)| (v.approx() * scale, lw.exp2()))
                .collect();
            let h = if atoms.len() <= ENTROPY_MC_ATOM_LIMIT {
                complex_mixture_entropy(&atoms, q.eta, 1e-6)
            } else {
                let (h, se) =
                    complex_mixture_entropy_mc(&atoms, q.eta, ENTROPY_MC_SAMPLES, ENTROPY_MC_SEED);
                used_mc = Some(used_mc.map_or(se, |s: f64| s.max(se)));
                h
            };
            (nf * entropy_bits(p)).min(mf * (h - h_noise))
        })?;
        mc_se = used_mc;
        if best.as_ref().map_or(true, |(v, _, _, _)| outcome.value > *v) {
            best = Some((outcome.value, u.clone(), outcome.p, outcome.local));
        }
    }
    let (value, u, p, local) = best.expect("at least one composition");
    let quality = if mc_se.is_some() {
        Quality::Truncated
    } else if local {
        Quality::OptimizedLocal
    } else {
        Quality::ExactSum
    };
    let mut res = BoundResult::new(value, quality);
    for (t, &cnt) in u.iter().enumerate() {
        res.push_arg(&format!("u({})", sig.values()[t]), cnt as f64);
    }
    res.push_probs("p", q.input, &p);
    res.flags.push("conjectured".into());
    if let Some(se) = mc_se {
        res.flags.push(format!("entropy-mc se={se:.3e}"));
    }
    Ok(res)
}

/// Upper bound for uniform binary input on binary chips under real noise:
/// min(n, m (H(mixture) - H(noise))) with the mixture a binomially weighted
/// comb of Gaussians at (2j - n)/sqrt(m) and noise variance 1/(2 eta).
pub fn upper_binary(m: usize, n: usize, eta: f64) -> Result<BoundResult> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidDimension(format!(
            "bound query needs m, n >= 1, got {m}x{n}"
        )));
    }
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::InvalidDimension(format!(
            "SNR must be positive and finite, got {eta}"
        )));
    }
    let mf = m as f64;
    let nf = n as f64;
    let sigma = (0.5 / eta).sqrt();
    let atoms: Vec<(f64, f64)> = (0..=n)
        .map(|j| {
            let mu = (2.0 * j as f64 - nf) / mf.sqrt();
            let w = (log2_binomial(n as u64, j as u64) - nf).exp2();
            (mu, w)
        })
        .collect();
    let h_mix = real_mixture_entropy(&atoms, sigma, 1e-6);
    let h_noise = 0.5 * (2.0 * PI * std::f64::consts::E * sigma * sigma).log2();
    let value = nf.min(mf * (h_mix - h_noise));
    let mut res = BoundResult::new(value, Quality::ExactSum);
    res.push_arg("mixture-entropy", h_mix);
    res.flags.push("conjectured".into());
    Ok(res)
}

/// Large-system limit of the binary upper bound, in bits per user.
pub fn upper_binary_asymptotic(beta: f64, eta: f64) -> f64 {
    (1.0_f64).min((1.0 + 2.0 * eta * beta).log2() / (2.0 * beta))
}

/// Sum capacity of an orthogonal-when-possible reference ensemble: the
/// familiar log-det value, closed over the two load regimes.
pub fn wbe_capacity(m: usize, n: usize, eta: f64, noise: NoiseKind) -> Result<f64> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidDimension(format!(
            "bound query needs m, n >= 1, got {m}x{n}"
        )));
    }
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::InvalidDimension(format!(
            "SNR must be positive and finite, got {eta}"
        )));
    }
    let mf = m as f64;
    let nf = n as f64;
    Ok(match noise {
        NoiseKind::RealGaussian => {
            if n <= m {
                nf / 2.0 * (1.0 + 2.0 * eta).log2()
            } else {
                mf / 2.0 * (1.0 + 2.0 * nf / mf * eta).log2()
            }
        }
        NoiseKind::ComplexGaussian => {
            if n <= m {
                nf * (1.0 + eta).log2()
            } else {
                mf * (1.0 + nf / mf * eta).log2()
            }
        }
    })
}

/// One damped fixed-point run of the replica overlap equation.
#[derive(Debug, Clone)]
pub struct TanakaState {
    pub beta: f64,
    pub sigma2: f64,
    /// Overlap at the end of the run, in [-1, 1].
    pub theta: f64,
    /// 1/(sigma^2 + beta(1 - theta)) at that overlap.
    pub lambda: f64,
    /// Overlap iterates from the start value onward.
    pub trace: Vec<f64>,
    pub converged: bool,
}

fn ln_cosh(x: f64) -> f64 {
    x.abs() + (-2.0 * x.abs()).exp().ln_1p() - std::f64::consts::LN_2
}

/// Runs the replica overlap fixed point from several starts and returns the
/// deduplicated end states, converged ones first.
pub fn tanaka_fixed_points(beta: f64, sigma2: f64) -> Result<Vec<TanakaState>> {
    if !(beta > 0.0 && beta.is_finite() && sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::InvalidDimension(format!(
            "the replica fixed point needs beta, sigma^2 > 0, got {beta}, {sigma2}"
        )));
    }
    let (zs, ws) = normal_expectation_rule(64)?;
    let overlap = |theta: f64| -> f64 {
        let lambda = 1.0 / (sigma2 + beta * (1.0 - theta));
        let root = lambda.sqrt();
        zs.iter()
            .zip(&ws)
            .map(|(&z, &w)| w * (root * z + lambda).tanh())
            .sum()
    };
    let mut states: Vec<TanakaState> = Vec::new();
    for &theta0 in &[0.0, 0.5, 0.99] {
        let mut theta = theta0;
        let mut trace = vec![theta];
        let mut converged = false;
        for _ in 0..10_000 {
            let next = 0.5 * theta + 0.5 * overlap(theta);
            trace.push(next);
            if (next - theta).abs() < 1e-13 {
                theta = next;
                converged = true;
                break;
            }
            theta = next;
        }
        states.push(TanakaState {
            beta,
            sigma2,
            theta,
            lambda: 1.0 / (sigma2 + beta * (1.0 - theta)),
            trace,
            converged,
        });
    }
    states.sort_by(|a, b| {
        b.converged
            .cmp(&a.converged)
            .then(a.theta.partial_cmp(&b.theta).unwrap())
    });
    let mut kept: Vec<TanakaState> = Vec::new();
    for s in states {
        if kept
            .iter()
            .all(|k| (k.theta - s.theta).abs() > 1e-8 || k.converged != s.converged)
        {
            kept.push(s);
        }
    }
    Ok(kept)
}

/// Replica reference capacity in bits per user: the smallest capacity value
/// over the converged overlap fixed points.
pub fn tanaka_bound(beta: f64, sigma2: f64) -> Result<BoundResult> {
    let states = tanaka_fixed_points(beta, sigma2)?;
    let (zs, ws) = normal_expectation_rule(64)?;
    let capacity = |s: &TanakaState| -> f64 {
        let root = s.lambda.sqrt();
        let expect: f64 = zs
            .iter()
            .zip(&ws)
            .map(|(&z, &w)| w * ln_cosh(root * z + s.lambda))
            .sum();
        let g = s.lambda / 2.0 * (1.0 + s.theta) - expect;
        (1.0 + beta * (1.0 - s.theta) / sigma2).log2() / (2.0 * beta) + g * LOG2_E
    };
    let mut value = f64::INFINITY;
    let mut flags = Vec::new();
    let mut args = Vec::new();
    for (i, s) in states.iter().enumerate() {
        if !s.converged {
            flags.push(format!(
                "fixed-point-not-converged(start={:.2})",
                s.trace[0]
            ));
            continue;
        }
        args.push((format!("theta{i}"), s.theta));
        args.push((format!("lambda{i}"), s.lambda));
        value = value.min(capacity(s));
    }
    if !value.is_finite() {
        // No start converged; report the best effort and say so.
        value = states.iter().map(capacity).fold(f64::INFINITY, f64::min);
    }
    let mut out = BoundResult::new(value, Quality::ExactSum);
    out.arg = args;
    out.flags = flags;
    Ok(out)
}

/// The large-system lower bound as a function of the tilted difference law.
struct AsymptoticCurve {
    beta: f64,
    eta: f64,
    /// Difference atoms and their reference masses.
    atoms: Vec<Complex64>,
    ptilde: Vec<f64>,
    chips: Vec<(Complex64, f64)>,
    /// sigma_p^2 * E|s|^2, the power normalization of the limit.
    denom: f64,
}

impl AsymptoticCurve {
    fn bracket(&self, p_hat: &[f64], gamma: f64) -> f64 {
        let c = 2.0 * self.beta * self.eta * gamma / ((1.0 + gamma) * self.denom);
        let mut kl = 0.0;
        for (i, &w) in p_hat.iter().enumerate() {
            if w > 0.0 {
                kl += w * (w / self.ptilde[i]).log2();
            }
        }
        // Second moments of the chip-tilted product; its mean vanishes
        // because the chip law is centered.
        let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
        for (i, &d) in self.atoms.iter().enumerate() {
            for &(s, w_s) in &self.chips {
                let v = d * s;
                let w = p_hat[i] * w_s;
                sxx += w * v.re * v.re;
                syy += w * v.im * v.im;
                sxy += w * v.re * v.im;
            }
        }
        let tr = sxx + syy;
        let det = sxx * syy - sxy * sxy;
        let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
        let l1 = 0.5 * (tr + disc);
        let l2 = (0.5 * (tr - disc)).max(0.0);
        kl + ((1.0 + c * l1).log2() + (1.0 + c * l2).log2()) / (2.0 * self.beta)
    }

    /// Inner infimum over the tilted law at fixed gamma.
    ///
    /// The objective is a convex divergence plus a concave log-volume term,
    /// so it can hold several basins and the minimizer often sits near a
    /// face of the simplex. The start grid must reach those slivers.
    fn value_at(&self, gamma: f64) -> (f64, Vec<f64>) {
        let dims = self.atoms.len() - 1;
        if dims == 0 {
            return (self.bracket(&[1.0], gamma), vec![1.0]);
        }
        if dims == 1 {
            let mut cands: Vec<f64> = (1..128).map(|i| i as f64 / 128.0).collect();
            cands.extend_from_slice(&[1e-6, 1e-4, 0.002, 0.998, 1.0 - 1e-4, 1.0 - 1e-6]);
            cands.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let score = |t: f64| self.bracket(&stick_break(&[t]), gamma);
            let mut best = (score(cands[0]), 0usize);
            for (i, &t) in cands.iter().enumerate().skip(1) {
                let v = score(t);
                if v < best.0 {
                    best = (v, i);
                }
            }
            let lo = if best.1 == 0 { 1e-9 } else { cands[best.1 - 1] };
            let hi = cands.get(best.1 + 1).copied().unwrap_or(1.0 - 1e-9);
            let (t, neg) = golden_max(|t| -score(t), lo, hi, 1e-10);
            let v = best.0.min(-neg);
            let arg = if -neg <= best.0 { t } else { cands[best.1] };
            return (v, stick_break(&[arg]));
        }
        let grid: &[f64] = if dims <= 3 {
            &[0.002, 0.02, 0.1, 0.3, 0.5, 0.7, 0.9, 0.98, 0.998]
        } else {
            &[0.02, 0.25, 0.5, 0.75, 0.98]
        };
        let mut starts: Vec<(f64, Vec<f64>)> = Vec::new();
        let mut idx = vec![0usize; dims];
        loop {
            let t: Vec<f64> = idx.iter().map(|&i| grid[i]).collect();
            let v = self.bracket(&stick_break(&t), gamma);
            starts.push((v, t));
            if starts.len() > 8 {
                starts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
                starts.truncate(3);
            }
            let mut carry = 0;
            while carry < dims {
                idx[carry] += 1;
                if idx[carry] < grid.len() {
                    break;
                }
                idx[carry] = 0;
                carry += 1;
            }
            if carry == dims {
                break;
            }
        }
        starts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        starts.truncate(3);
        let bounds = vec![(1e-9, 1.0 - 1e-9); dims];
        let mut out = (starts[0].0, stick_break(&starts[0].1));
        for (_, start) in &starts {
            let (t, neg) = nelder_mead_max(
                |t| -self.bracket(&stick_break(t), gamma),
                start,
                &bounds,
                1e-12,
                400 * dims,
            );
            if -neg < out.0 {
                out = (-neg, stick_break(&t));
            }
        }
        out
    }
}

/// Large-system lower bound in bits per user: an exponential tilt of the
/// difference law is priced by its divergence from the true law plus the
/// log-volume of the two principal directions of the chip-weighted product.
pub fn asymptotic_lower_noisy(
    beta: f64,
    eta: f64,
    input: &Alphabet,
    p: &[f64],
    signature: &Alphabet,
    pi: &[f64],
    gamma: GammaPolicy,
) -> Result<BoundResult> {
    if !(beta > 0.0 && beta.is_finite() && eta > 0.0 && eta.is_finite()) {
        return Err(Error::InvalidDimension(format!(
            "the asymptotic bound needs beta, eta > 0, got {beta}, {eta}"
        )));
    }
    check_distribution(input, p, "input law")?;
    check_distribution(signature, pi, "signature law")?;
    let (p_mean, p_var) = alphabet_moments(input, p);
    if p_mean.norm() > 1e-12 {
        return Err(Error::Unsupported(
            "the asymptotic noisy lower bound requires a zero-mean input law".into(),
        ));
    }
    let (s_mean, s_var) = alphabet_moments(signature, pi);
    if s_mean.norm() > 1e-12 {
        return Err(Error::Unsupported(
            "the asymptotic noisy lower bound requires a zero-mean chip law".into(),
        ));
    }
    if p_var < 1e-12 || s_var < 1e-12 {
        return Err(Error::InvalidDistribution(
            "the input and chip laws carry no signal power".into(),
        ));
    }
    let mut diff: BTreeMap<ExactNumber, f64> = BTreeMap::new();
    for (i, a) in input.values().iter().enumerate() {
        for (j, b) in input.values().iter().enumerate() {
            let w = p[i] * p[j];
            if w > 0.0 {
                *diff.entry(a.sub(b)).or_insert(0.0) += w;
            }
        }
    }
    if diff.len() > 7 {
        return Err(Error::Unsupported(format!(
            "tilt search over {} difference atoms",
            diff.len()
        )));
    }
    let chips: Vec<(Complex64, f64)> = signature
        .approx_values()
        .iter()
        .zip(pi)
        .map(|(&s, &w)| (s, w))
        .collect();
    let curve = AsymptoticCurve {
        beta,
        eta,
        atoms: diff.keys().map(|d| d.approx()).collect(),
        ptilde: diff.values().copied().collect(),
        chips,
        denom: p_var * (s_var + s_mean.norm_sqr()),
    };
    let value = |g: f64| curve.value_at(g).0 - phi_gamma(g) / beta;
    let (gamma, bits) = match gamma {
        GammaPolicy::Fixed(g) => (g, value(g)),
        GammaPolicy::Optimize => maximize_over_gamma(value, 1e-6),
    };
    let (_, p_hat) = curve.value_at(gamma);
    let quality = if curve.atoms.len() > 2 {
        Quality::OptimizedLocal
    } else {
        Quality::ExactSum
    };
    let mut res = BoundResult::new(bits, quality);
    res.push_arg("gamma", gamma);
    for (d, w) in diff.keys().zip(&p_hat) {
        res.push_arg(&format!("p^({d})"), *w);
    }
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::presets;
    use crate::numerics::logdomain::{binary_entropy_bits, log2_multinomial};

    fn db(x: f64) -> f64 {
        10.0_f64.powf(x / 10.0)
    }

    fn assert_rel(a: f64, b: f64, tol: f64) {
        let denom = a.abs().max(b.abs()).max(1e-12);
        assert!(
            (a - b).abs() / denom < tol,
            "values differ: {a} vs {b} (rel {})",
            (a - b).abs() / denom
        );
    }

    fn binary_query<'a>(
        input: &'a Alphabet,
        sig: &'a Alphabet,
        m: usize,
        n: usize,
        eta: f64,
        noise: NoiseKind,
        gamma: GammaPolicy,
    ) -> NoisyBoundQuery<'a> {
        NoisyBoundQuery {
            m,
            n,
            eta,
            noise,
            input,
            p: vec![1.0 / input.len() as f64; input.len()],
            signature: SignatureModel::Finite {
                alphabet: sig,
                pi: vec![1.0 / sig.len() as f64; sig.len()],
            },
            gamma,
            policy: SearchPolicy::Fixed,
        }
    }

    /// Real-noise binary closed form at fixed gamma, coded straight off the
    /// binomial sum for cross-checking the class engine.
    fn binary_real_closed(m: usize, n: usize, eta: f64, gamma: f64) -> f64 {
        let mf = m as f64;
        let q = 4.0 * eta * gamma / ((1.0 + gamma) * mf);
        let mut outer = Vec::new();
        for k in 0..=n {
            let mut inner = 0.0;
            for j in 0..=k {
                let w = (log2_binomial(k as u64, j as u64) - k as f64).exp2();
                let d = (2 * j) as f64 - k as f64;
                inner += w * (-q * d * d).exp();
            }
            outer.push(log2_binomial(n as u64, k as u64) + mf * inner.log2());
        }
        n as f64 - mf / 2.0 * gamma * LOG2_E + mf / 2.0 * (1.0 + gamma).log2()
            - log2_sum_tree(&outer)
    }

    #[test]
    fn binary_real_noise_matches_the_closed_binomial_form() {
        let input = presets::binary();
        let sig = presets::binary();
        for &n in &[12usize, 16] {
            for &eta_db in &[4.0, 8.0, 12.0] {
                for &gamma in &[0.5, 2.0] {
                    let q = binary_query(
                        &input,
                        &sig,
                        8,
                        n,
                        db(eta_db),
                        NoiseKind::RealGaussian,
                        GammaPolicy::Fixed(gamma),
                    );
                    let got = lower_noisy_finite(&q).unwrap().value_bits;
                    let want = binary_real_closed(8, n, db(eta_db), gamma);
                    assert_rel(got, want, 1e-12);
                }
            }
        }
    }

    #[test]
    fn two_point_hand_enumeration_single_user_single_chip() {
        let input = presets::binary();
        let sig = presets::binary();
        let (eta, gamma) = (3.0, 0.7);
        let q = binary_query(
            &input,
            &sig,
            1,
            1,
            eta,
            NoiseKind::ComplexGaussian,
            GammaPolicy::Fixed(gamma),
        );
        let got = lower_noisy_finite(&q).unwrap().value_bits;
        // Half the difference mass sits at zero; the rest has |b d|^2 = 4
        // regardless of the chip sign.
        let c = gamma * eta / (1.0 + gamma);
        let want = -phi_gamma(gamma) - (0.5 + 0.5 * (-4.0 * c).exp()).log2();
        assert_rel(got, want, 1e-12);
    }

    #[test]
    fn engine_matches_brute_force_pattern_enumeration() {
        let input = presets::binary();
        let sig = presets::ternary();
        let pi = [0.25, 0.5, 0.25];
        let (m, n, eta, gamma) = (2usize, 4usize, 2.5, 0.6);
        let q = NoisyBoundQuery {
            m,
            n,
            eta,
            noise: NoiseKind::ComplexGaussian,
            input: &input,
            p: vec![0.5, 0.5],
            signature: SignatureModel::Finite {
                alphabet: &sig,
                pi: pi.to_vec(),
            },
            gamma: GammaPolicy::Fixed(gamma),
            policy: SearchPolicy::Fixed,
        };
        let got = lower_noisy_finite(&q).unwrap().value_bits;

        // Brute force: every difference pattern times every chip row.
        let chip_m2 = 0.5;
        let c = gamma * eta / ((1.0 + gamma) * m as f64 * chip_m2);
        let diffs = [(0.0, 0.5), (2.0, 0.25), (-2.0, 0.25)];
        let chips = [(-1.0, 0.25), (0.0, 0.5), (1.0, 0.25)];
        let mut expect = 0.0;
        let mut pattern = vec![0usize; n];
        loop {
            let pw: f64 = pattern.iter().map(|&i| diffs[i].1).product();
            let mut inner = 0.0;
            let mut row = vec![0usize; n];
            loop {
                let rw: f64 = row.iter().map(|&i| chips[i].1).product();
                let dot: f64 = pattern
                    .iter()
                    .zip(&row)
                    .map(|(&i, &j)| diffs[i].0 * chips[j].0)
                    .sum();
                inner += rw * (-c * dot * dot).exp();
                if !advance(&mut row, chips.len()) {
                    break;
                }
            }
            expect += pw * inner.powi(m as i32);
            if !advance(&mut pattern, diffs.len()) {
                break;
            }
        }
        let want = -(m as f64) * phi_gamma(gamma) - expect.log2();
        assert_rel(got, want, 1e-12);
    }

    fn advance(digits: &mut [usize], base: usize) -> bool {
        for d in digits.iter_mut() {
            *d += 1;
            if *d < base {
                return true;
            }
            *d = 0;
        }
        false
    }

    /// Four-chip symmetric alphabet: closed composition sum per count class.
    fn paired_chip_closed(
        m: usize,
        n: usize,
        eta: f64,
        gamma: f64,
        s: &[f64],
        pi_half: &[f64],
    ) -> f64 {
        let mf = m as f64;
        let m2: f64 = 2.0 * s.iter().zip(pi_half).map(|(&v, &w)| w * v * v).sum::<f64>();
        let c = gamma * eta / ((1.0 + gamma) * mf * m2);
        let parts = 2 * s.len();
        let mut outer = Vec::new();
        for k in 0..=n {
            let mut inner = 0.0;
            for w in compositions(k, parts) {
                let counts: Vec<u64> = w.iter().map(|&x| x as u64).collect();
                let mut lw = log2_multinomial(k as u64, &counts);
                for (t, &cnt) in w.iter().enumerate() {
                    lw += cnt as f64 * pi_half[t % s.len()].log2();
                }
                let dot: f64 = (0..s.len())
                    .map(|t| 2.0 * s[t] * (w[t] as f64 - w[t + s.len()] as f64))
                    .sum();
                inner += lw.exp2() * (-c * dot * dot).exp();
            }
            outer.push(log2_binomial(n as u64, k as u64) - n as f64 + mf * inner.log2());
        }
        -mf * phi_gamma(gamma) - log2_sum_tree(&outer)
    }

    #[test]
    fn paired_chips_match_the_closed_composition_sum() {
        let input = presets::binary();
        let sig = Alphabet::integers(&[-2, -1, 1, 2]);
        let pi = [0.15, 0.35, 0.35, 0.15];
        for &(m, n) in &[(3usize, 6usize), (8, 16)] {
            let q = NoisyBoundQuery {
                m,
                n,
                eta: db(8.0),
                noise: NoiseKind::ComplexGaussian,
                input: &input,
                p: vec![0.5, 0.5],
                signature: SignatureModel::Finite {
                    alphabet: &sig,
                    pi: pi.to_vec(),
                },
                gamma: GammaPolicy::Fixed(1.3),
                policy: SearchPolicy::Fixed,
            };
            let got = lower_noisy_finite(&q).unwrap().value_bits;
            let want = paired_chip_closed(m, n, db(8.0), 1.3, &[1.0, 2.0], &[0.35, 0.15]);
            assert_rel(got, want, 1e-9);
        }
    }

    /// Ternary-input binary-chip closed form: joint kernel over both nonzero
    /// difference classes.
    fn ternary_binary_closed(m: usize, n: usize, eta: f64, gamma: f64, p1: f64) -> f64 {
        let mf = m as f64;
        let p0 = 1.0 - 2.0 * p1;
        let c = gamma * eta / ((1.0 + gamma) * mf * 2.0 * p1);
        let mut outer = Vec::new();
        for k1 in 0..=n {
            for k2 in 0..=(n - k1) {
                let k3 = n - k1 - k2;
                let lw = log2_multinomial(n as u64, &[k1 as u64, k2 as u64, k3 as u64])
                    + k1 as f64 * (2.0 * p1 * p1).log2()
                    + k2 as f64 * (4.0 * p0 * p1).log2()
                    + k3 as f64 * (p0 * p0 + 2.0 * p1 * p1).log2();
                if !lw.is_finite() {
                    continue;
                }
                let mut inner = 0.0;
                for u in 0..=k1 {
                    for w in 0..=k2 {
                        let cw = (log2_binomial(k1 as u64, u as u64)
                            + log2_binomial(k2 as u64, w as u64)
                            - (k1 + k2) as f64)
                            .exp2();
                        let dot = 2.0 * (2.0 * u as f64 - k1 as f64)
                            + (2.0 * w as f64 - k2 as f64);
                        inner += cw * (-c * dot * dot).exp();
                    }
                }
                outer.push(lw + mf * inner.log2());
            }
        }
        -mf * phi_gamma(gamma) - log2_sum_tree(&outer)
    }

    #[test]
    fn ternary_input_matches_the_closed_composition_sum() {
        let input = presets::ternary();
        let sig = presets::binary();
        let p1 = 0.3;
        for &(m, n) in &[(2usize, 5usize), (4, 8)] {
            let q = NoisyBoundQuery {
                m,
                n,
                eta: db(6.0),
                noise: NoiseKind::ComplexGaussian,
                input: &input,
                p: vec![p1, 1.0 - 2.0 * p1, p1],
                signature: SignatureModel::Finite {
                    alphabet: &sig,
                    pi: vec![0.5, 0.5],
                },
                gamma: GammaPolicy::Fixed(0.9),
                policy: SearchPolicy::Fixed,
            };
            let got = lower_noisy_finite(&q).unwrap().value_bits;
            let want = ternary_binary_closed(m, n, db(6.0), 0.9, p1);
            assert_rel(got, want, 1e-9);
        }
    }

    #[test]
    fn gaussian_signature_matches_the_closed_binomial_kernel() {
        let input = presets::binary();
        let (m, n, eta, gamma) = (4usize, 9usize, db(10.0), 0.8);
        let q = NoisyBoundQuery {
            m,
            n,
            eta,
            noise: NoiseKind::ComplexGaussian,
            input: &input,
            p: vec![0.5, 0.5],
            signature: SignatureModel::GaussianReal,
            gamma: GammaPolicy::Fixed(gamma),
            policy: SearchPolicy::Fixed,
        };
        let got = lower_noisy_gaussian_signature(&q).unwrap().value_bits;
        let mf = m as f64;
        let terms: Vec<f64> = (0..=n)
            .map(|k| {
                log2_binomial(n as u64, k as u64) - n as f64
                    - mf / 2.0
                        * (1.0 + 8.0 * k as f64 * gamma * eta / (mf * (1.0 + gamma))).log2()
            })
            .collect();
        let want = -mf * phi_gamma(gamma) - log2_sum_tree(&terms);
        assert_rel(got, want, 1e-12);
    }

    #[test]
    fn gaussian_kernel_agrees_with_monte_carlo() {
        // One receive dimension of the Gaussian-signature inner expectation:
        // the chip sum over a class with squared magnitude q is N(0, q), so
        // E exp(-c g^2) must be (1 + 2cq)^(-1/2) within Monte Carlo error.
        let c = 0.21;
        let mut rng = counter_rng(0x474b_4d43, 0, 0);
        for &qq in &[4.0, 8.0] {
            let draws = 5_000_000usize;
            let sd = (qq as f64).sqrt();
            let (mut sum, mut sumsq) = (0.0, 0.0);
            for _ in 0..draws {
                let g: f64 = StandardNormal.sample(&mut rng);
                let v = (-c * (sd * g) * (sd * g)).exp();
                sum += v;
                sumsq += v * v;
            }
            let mean = sum / draws as f64;
            let se = ((sumsq / draws as f64 - mean * mean).max(0.0) / (draws as f64 - 1.0)).sqrt();
            let want = (1.0 + 2.0 * c * qq).powf(-0.5);
            assert!(
                (mean - want).abs() < 3.0 * se,
                "MC {mean} vs closed {want}, se {se}"
            );
        }
    }

    #[test]
    fn zero_count_class_contributes_unit_kernel() {
        let input = presets::binary();
        // With one user there is a single nonzero class; at k = 0 the kernel
        // must be exactly 1, so the all-zero term contributes its raw weight.
        let q = NoisyBoundQuery {
            m: 3,
            n: 1,
            eta: 5.0,
            noise: NoiseKind::ComplexGaussian,
            input: &input,
            p: vec![0.5, 0.5],
            signature: SignatureModel::GaussianReal,
            gamma: GammaPolicy::Fixed(1.0),
            policy: SearchPolicy::Fixed,
        };
        let got = lower_noisy_gaussian_signature(&q).unwrap().value_bits;
        let c: f64 = 5.0 / (2.0 * 3.0);
        let want =
            -3.0 * phi_gamma(1.0) - (0.5 + 0.5 * (1.0 + 8.0 * c).powf(-1.5)).log2();
        assert_rel(got, want, 1e-12);
    }

    #[test]
    fn noisy_bound_approaches_the_noiseless_value() {
        let binary = presets::binary();
        let ternary = presets::ternary();
        for (input, m, n) in [(&binary, 4usize, 8usize), (&ternary, 3, 6)] {
            let q = binary_query(
                input,
                &binary,
                m,
                n,
                1e6,
                NoiseKind::ComplexGaussian,
                GammaPolicy::Optimize,
            );
            let noisy = lower_noisy_finite(&q).unwrap().value_bits;
            let nl = super::super::noiseless::lower_noiseless(&super::super::BoundQuery {
                m,
                n,
                input,
                p: q.p.clone(),
                signature: &binary,
                pi: vec![0.5, 0.5],
                policy: SearchPolicy::Fixed,
            })
            .unwrap()
            .value_bits;
            assert!(
                (noisy - nl).abs() < 1e-3,
                "eta=1e6 value {noisy} vs noiseless {nl}"
            );
            assert!(noisy <= nl + 1e-9, "noise cannot help: {noisy} vs {nl}");
        }
    }

    #[test]
    fn monotone_in_snr_and_receive_dimensions() {
        let input = presets::binary();
        let sig = presets::binary();
        let value = |m: usize, eta: f64| {
            lower_noisy_finite(&binary_query(
                &input,
                &sig,
                m,
                9,
                eta,
                NoiseKind::ComplexGaussian,
                GammaPolicy::Optimize,
            ))
            .unwrap()
            .value_bits
        };
        let etas = [1.0, 5.0, 25.0];
        for pair in etas.windows(2) {
            assert!(value(3, pair[0]) <= value(3, pair[1]) + 1e-9);
        }
        assert!(value(2, 5.0) <= value(4, 5.0) + 1e-9);
        assert!(value(4, 5.0) <= value(6, 5.0) + 1e-9);
    }

    #[test]
    fn real_and_complex_pipelines_agree_at_high_snr() {
        let input = presets::binary();
        let sig = presets::binary();
        for &n in &[12usize, 16] {
            for &(snr_db, tol) in &[(16.0, 5e-2), (28.0, 1e-3), (40.0, 1e-3)] {
                let q_re = binary_query(
                    &input,
                    &sig,
                    8,
                    n,
                    db(snr_db),
                    NoiseKind::RealGaussian,
                    GammaPolicy::Optimize,
                );
                let mut q_cx = q_re.clone();
                q_cx.noise = NoiseKind::ComplexGaussian;
                let re = lower_noisy_finite(&q_re).unwrap().value_bits;
                let cx = lower_noisy_finite(&q_cx).unwrap().value_bits;
                println!("n={n} snr={snr_db}dB real {re:.9} complex {cx:.9}");
                assert!(
                    (re - cx).abs() < tol,
                    "pipelines split at n={n}, {snr_db} dB: real {re} vs complex {cx}"
                );
            }
        }
    }

    #[test]
    fn optimizing_gamma_never_loses_to_a_fixed_guess() {
        let input = presets::binary();
        let sig = presets::binary();
        let opt = lower_noisy_finite(&binary_query(
            &input,
            &sig,
            4,
            8,
            db(8.0),
            NoiseKind::ComplexGaussian,
            GammaPolicy::Optimize,
        ))
        .unwrap();
        for &g in &[0.2, 1.0, 4.0] {
            let fixed = lower_noisy_finite(&binary_query(
                &input,
                &sig,
                4,
                8,
                db(8.0),
                NoiseKind::ComplexGaussian,
                GammaPolicy::Fixed(g),
            ))
            .unwrap();
            assert!(opt.value_bits >= fixed.value_bits - 1e-9);
        }
        assert!(opt.flags.iter().any(|f| f.starts_with("gamma-u=")));
    }

    #[test]
    fn upper_binary_pins_the_mixture_surplus() {
        let (m, n, eta) = (8usize, 8usize, db(12.0));
        let res = upper_binary(m, n, eta).unwrap();
        assert!(res.flags.iter().any(|f| f == "conjectured"));
        // Independent coarse Riemann check of the same mixture entropy.
        let sigma = (0.5 / eta).sqrt();
        let atoms: Vec<(f64, f64)> = (0..=n)
            .map(|j| {
                (
                    (2.0 * j as f64 - n as f64) / (m as f64).sqrt(),
                    (log2_binomial(n as u64, j as u64) - n as f64).exp2(),
                )
            })
            .collect();
        let density = |x: f64| -> f64 {
            atoms
                .iter()
                .map(|&(mu, w)| {
                    w * (-0.5 * ((x - mu) / sigma).powi(2)).exp()
                        / (sigma * (2.0 * PI).sqrt())
                })
                .sum()
        };
        let (lo, hi) = (-6.0f64, 6.0f64);
        let steps = 400_000;
        let h = (hi - lo) / steps as f64;
        let mut hmix = 0.0;
        for i in 0..steps {
            let x = lo + (i as f64 + 0.5) * h;
            let f = density(x);
            if f > 0.0 {
                hmix -= f * f.log2() * h;
            }
        }
        let hnoise = 0.5 * (2.0 * PI * std::f64::consts::E * sigma * sigma).log2();
        let want = (n as f64).min(m as f64 * (hmix - hnoise));
        assert_rel(res.value_bits, want, 1e-6);
        // At this SNR the mixture surplus exceeds a bit per chip, so the
        // user-count cap is the binding branch.
        assert_eq!(res.value_bits, n as f64);
        // Below the cap the bound grows strictly with the SNR.
        let low = upper_binary(m, n, db(-6.0)).unwrap().value_bits;
        let mid = upper_binary(m, n, db(-3.0)).unwrap().value_bits;
        assert!(low < mid && mid < n as f64, "low {low}, mid {mid}");
    }

    #[test]
    fn upper_binary_collapses_with_the_snr() {
        let res = upper_binary(4, 6, 1e-8).unwrap();
        assert!(res.value_bits.abs() < 1e-3, "got {}", res.value_bits);
    }

    #[test]
    fn conjectured_upper_sits_above_the_finite_lower() {
        let input = presets::binary();
        let sig = presets::binary();
        let q = binary_query(
            &input,
            &sig,
            3,
            4,
            db(10.0),
            NoiseKind::ComplexGaussian,
            GammaPolicy::Optimize,
        );
        let lower = lower_noisy_finite(&q).unwrap().value_bits;
        let upper = upper_noisy_conjectured(&q).unwrap();
        assert!(upper.flags.iter().any(|f| f == "conjectured"));
        assert!(
            lower <= upper.value_bits + 1e-6,
            "lower {lower} above conjectured upper {}",
            upper.value_bits
        );
    }

    #[test]
    fn conjectured_upper_rejects_chips_off_the_unit_circle() {
        let input = presets::binary();
        let sig = presets::ternary();
        let q = binary_query(
            &input,
            &sig,
            2,
            3,
            4.0,
            NoiseKind::ComplexGaussian,
            GammaPolicy::Optimize,
        );
        assert!(matches!(
            upper_noisy_conjectured(&q),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn mixture_entropy_quadrature_agrees_with_monte_carlo() {
        let atoms = [
            (Complex64::new(-1.5, 0.4), 0.5),
            (Complex64::new(0.3, -0.2), 0.3),
            (Complex64::new(2.0, 1.1), 0.2),
        ];
        let eta = 0.8;
        let quad = complex_mixture_entropy(&atoms, eta, 1e-6);
        let (mc, se) = complex_mixture_entropy_mc(&atoms, eta, 1_000_000, 0x4d43);
        assert!(
            (quad - mc).abs() < 3.0 * se,
            "quadrature {quad} vs MC {mc} (se {se})"
        );
    }

    #[test]
    fn wbe_closed_forms_and_continuity() {
        let eta = db(9.0);
        // Underloaded: each user gets an orthogonal channel.
        assert_rel(
            wbe_capacity(8, 5, eta, NoiseKind::RealGaussian).unwrap(),
            2.5 * (1.0 + 2.0 * eta).log2(),
            1e-12,
        );
        // The two regimes meet exactly at n = m.
        for &noise in &[NoiseKind::RealGaussian, NoiseKind::ComplexGaussian] {
            let under = wbe_capacity(8, 8, eta, noise).unwrap();
            let mf = 8.0;
            let over = match noise {
                NoiseKind::RealGaussian => mf / 2.0 * (1.0 + 2.0 * eta).log2(),
                NoiseKind::ComplexGaussian => mf * (1.0 + eta).log2(),
            };
            assert!(under == over, "regimes split at n=m: {under} vs {over}");
        }
        // Overloading only adds capacity sublinearly.
        let c1 = wbe_capacity(8, 16, eta, NoiseKind::ComplexGaussian).unwrap();
        let c2 = wbe_capacity(8, 32, eta, NoiseKind::ComplexGaussian).unwrap();
        assert!(c1 < c2 && c2 < 2.0 * c1);
    }

    #[test]
    fn replica_fixed_points_are_self_consistent() {
        let states = tanaka_fixed_points(1.5, 0.4).unwrap();
        assert!(!states.is_empty());
        let (zs, ws) = normal_expectation_rule(64).unwrap();
        for s in &states {
            assert!(s.converged);
            assert!((-1.0..=1.0).contains(&s.theta));
            assert!((s.lambda - 1.0 / (s.sigma2 + s.beta * (1.0 - s.theta))).abs() < 1e-10);
            let root = s.lambda.sqrt();
            let overlap: f64 = zs
                .iter()
                .zip(&ws)
                .map(|(&z, &w)| w * (root * z + s.lambda).tanh())
                .sum();
            assert!((overlap - s.theta).abs() < 1e-10);
            assert!(s.trace.len() >= 2);
        }
    }

    #[test]
    fn replica_capacity_vanishes_at_zero_snr_and_saturates_at_high_snr() {
        let low = tanaka_bound(1.0, 1e8).unwrap().value_bits;
        assert!(low.abs() < 1e-3, "got {low}");
        let high = tanaka_bound(1.0, 1e-3).unwrap().value_bits;
        assert!(high > 0.8 && high <= 1.0 + 1e-6, "got {high}");
    }

    /// One-parameter binary form of the asymptotic bound, coded off the
    /// tilted-mass variable directly.
    fn binary_asym_oracle(beta: f64, eta: f64) -> f64 {
        // The inner curve holds two basins (one hugging t = 0), so scan a
        // fine grid before polishing the best cell.
        let inner = |g: f64| {
            let f = |t: f64| {
                1.0 - binary_entropy_bits(t)
                    + (1.0 + 8.0 * beta * eta * g * t / (1.0 + g)).log2() / (2.0 * beta)
            };
            let n = 4096;
            let mut best = (f(1e-12), 0usize);
            for i in 1..n {
                let v = f(i as f64 / n as f64);
                if v < best.0 {
                    best = (v, i);
                }
            }
            let lo = (best.1 as f64 - 1.0).max(1e-9) / n as f64;
            let hi = ((best.1 + 1) as f64 / n as f64).min(1.0 - 1e-9);
            let (_, neg) = golden_max(|t| -f(t), lo, hi, 1e-12);
            best.0.min(-neg)
        };
        let (_, v) = maximize_over_gamma(|g| inner(g) - phi_gamma(g) / beta, 1e-7);
        v
    }

    #[test]
    fn asymptotic_binary_matches_the_one_parameter_form() {
        let input = presets::binary();
        let sig = presets::binary();
        let eta = db(12.0);
        for &beta in &[1.0, 3.0] {
            let got = asymptotic_lower_noisy(
                beta,
                eta,
                &input,
                &[0.5, 0.5],
                &sig,
                &[0.5, 0.5],
                GammaPolicy::Optimize,
            )
            .unwrap()
            .value_bits;
            let want = binary_asym_oracle(beta, eta);
            assert_rel(got, want, 1e-6);
            // The large-system upper bound caps it.
            assert!(got <= upper_binary_asymptotic(beta, eta) + 1e-9);
        }
    }

    #[test]
    fn asymptotic_bracket_reduces_cleanly_on_real_symbols() {
        let input = presets::binary();
        let sig = presets::binary();
        let mut diff = BTreeMap::new();
        for a in input.values() {
            for b in input.values() {
                *diff.entry(a.sub(b)).or_insert(0.0) += 0.25;
            }
        }
        let curve = AsymptoticCurve {
            beta: 2.0,
            eta: 5.0,
            atoms: diff.keys().map(|d| d.approx()).collect(),
            ptilde: diff.values().copied().collect(),
            chips: sig.approx_values().iter().map(|&s| (s, 0.5)).collect(),
            denom: 1.0,
        };
        // The reference law itself has zero divergence, so only the log
        // terms remain; real symbols kill the second eigenvalue.
        let gamma = 1.1;
        let c = 2.0 * curve.beta * curve.eta * gamma / (1.0 + gamma);
        let t = 0.5; // mass off zero under the reference law
        let want = (1.0 + c * 4.0 * t).log2() / (2.0 * curve.beta);
        assert_rel(curve.bracket(&curve.ptilde.clone(), gamma), want, 1e-12);
    }

    #[test]
    fn asymptotic_rejects_biased_laws() {
        let optical = presets::optical();
        let binary = presets::binary();
        assert!(matches!(
            asymptotic_lower_noisy(
                1.0,
                4.0,
                &optical,
                &[0.5, 0.5],
                &binary,
                &[0.5, 0.5],
                GammaPolicy::Optimize,
            ),
            Err(Error::Unsupported(_))
        ));
        assert!(matches!(
            asymptotic_lower_noisy(
                1.0,
                4.0,
                &binary,
                &[0.5, 0.5],
                &optical,
                &[0.5, 0.5],
                GammaPolicy::Optimize,
            ),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn gaussian_signature_search_improves_on_uniform_input() {
        let input = presets::ternary();
        let q = NoisyBoundQuery {
            m: 3,
            n: 5,
            eta: db(8.0),
            noise: NoiseKind::ComplexGaussian,
            input: &input,
            p: vec![1.0 / 3.0; 3],
            signature: SignatureModel::GaussianReal,
            gamma: GammaPolicy::Optimize,
            policy: SearchPolicy::Optimize,
        };
        let tuned = lower_noisy_gaussian_signature(&q).unwrap();
        let mut fixed_q = q.clone();
        fixed_q.policy = SearchPolicy::Fixed;
        let fixed = lower_noisy_gaussian_signature(&fixed_q).unwrap();
        assert!(tuned.value_bits >= fixed.value_bits - 1e-9);
        assert_eq!(tuned.quality, Quality::OptimizedLocal);
    }
}
