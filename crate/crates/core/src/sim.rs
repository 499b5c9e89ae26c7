//! Seeded Monte Carlo symbol error-rate simulation over the AWGN channel.
//!
//! The transmit scaling is chosen so the average-power cap is met with
//! equality, either from the actual traces of a fixed matrix or from the
//! moments of a random signature ensemble. Trials are seeded per
//! (seed, SNR index, trial index), so results are byte-identical regardless
//! of how many worker threads run them.

use crate::alphabet::Alphabet;
use crate::decode::{DecoderKind, PreparedDecoder};
use crate::error::{Error, Result};
use crate::matrix::GcoMatrix;
use crate::numerics::rng::counter_rng;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

/// Additive noise family. Complex noise has independent real and imaginary
/// parts, each of the per-component variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    RealGaussian,
    ComplexGaussian,
}

/// Channel description: noise kind, per-component variance, and the
/// normalized SNR eta (linear, not dB).
#[derive(Debug, Clone, Copy)]
pub struct ChannelModel {
    pub kind: NoiseKind,
    pub component_var: f64,
    pub eta: f64,
}

impl ChannelModel {
    pub fn new(kind: NoiseKind, eta: f64, component_var: f64) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::Numerical("eta must be positive and finite".into()));
        }
        if !(component_var > 0.0 && component_var.is_finite()) {
            return Err(Error::Numerical("noise variance must be positive".into()));
        }
        Ok(ChannelModel {
            kind,
            component_var,
            eta,
        })
    }

    /// Unit per-component variance (the usual normalization).
    pub fn unit(kind: NoiseKind, eta: f64) -> Result<Self> {
        Self::new(kind, eta, 1.0)
    }

    /// Total noise variance per chip: doubled for complex noise.
    pub fn sigma_f_sq(&self) -> f64 {
        match self.kind {
            NoiseKind::RealGaussian => self.component_var,
            NoiseKind::ComplexGaussian => 2.0 * self.component_var,
        }
    }
}

/// dB to linear and back, base-10 power convention.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// A probability law over an input alphabet, aligned with its declared
/// symbol order. Sampling uses inverse-CDF in that order, so laws that agree
/// symbol-by-symbol consume randomness identically.
#[derive(Debug, Clone)]
pub struct InputLaw {
    probs: Vec<f64>,
}

impl InputLaw {
    pub fn uniform(q: usize) -> Self {
        InputLaw {
            probs: vec![1.0 / q as f64; q],
        }
    }

    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() || probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidAlphabet(
                "input law needs probabilities in [0, 1]".into(),
            ));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidAlphabet(format!(
                "input law sums to {total}, not 1"
            )));
        }
        Ok(InputLaw { probs })
    }

    /// The active-user law over a ternary alphabet: probability `p_zero` on
    /// the symbol 0 and the rest split evenly between -1 and +1. With
    /// `p_zero` = 0 and a plain binary alphabet this reduces to the uniform
    /// all-active law, consuming the identical randomness stream.
    pub fn cowda(alphabet: &Alphabet, p_zero: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_zero) {
            return Err(Error::InvalidAlphabet("p_zero must lie in [0, 1]".into()));
        }
        let vals: Vec<Complex64> = alphabet.values().iter().map(|v| v.approx()).collect();
        let find = |target: Complex64| vals.iter().position(|v| (v - target).norm() < 1e-12);
        let minus = find(Complex64::new(-1.0, 0.0));
        let plus = find(Complex64::new(1.0, 0.0));
        let zero = find(Complex64::default());
        let (minus, plus) = match (minus, plus) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(Error::InvalidAlphabet(
                    "active-user law needs the symbols -1 and +1".into(),
                ))
            }
        };
        let mut probs = vec![0.0; vals.len()];
        probs[minus] = (1.0 - p_zero) / 2.0;
        probs[plus] = (1.0 - p_zero) / 2.0;
        if p_zero > 0.0 {
            let zero = zero.ok_or_else(|| {
                Error::InvalidAlphabet("active-user law needs the symbol 0".into())
            })?;
            probs[zero] = p_zero;
        }
        Ok(InputLaw { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Mean and variance of the law over the given symbol values.
    pub fn moments(&self, alphabet: &Alphabet) -> (Complex64, f64) {
        let vals: Vec<Complex64> = alphabet.values().iter().map(|v| v.approx()).collect();
        distribution_moments(&vals, &self.probs)
    }

    /// Inverse-CDF draw; u in [0, 1).
    fn draw(&self, u: f64) -> usize {
        let mut acc = 0.0;
        for (k, p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return k;
            }
        }
        // Float round-off at u ~ 1: fall back to the last charged symbol.
        self.probs.iter().rposition(|p| *p > 0.0).unwrap_or(0)
    }
}

/// Mean and variance (second central moment) of a finite complex law.
pub fn distribution_moments(values: &[Complex64], probs: &[f64]) -> (Complex64, f64) {
    let mean: Complex64 = values
        .iter()
        .zip(probs)
        .map(|(v, p)| v * Complex64::new(*p, 0.0))
        .sum();
    let second: f64 = values
        .iter()
        .zip(probs)
        .map(|(v, p)| p * v.norm_sqr())
        .sum();
    (mean, second - mean.norm_sqr())
}

/// Transmit amplitude r meeting the ensemble power cap with equality:
/// r = sqrt(eta sigma_f^2 / ((sigma_p^2 + n mu_p^2)(sigma_pi^2 + mu_pi^2))),
/// where mu^2 denotes the squared modulus of the mean.
pub fn power_scale_ensemble(
    sigma_p_sq: f64,
    mu_p_sq: f64,
    sigma_pi_sq: f64,
    mu_pi_sq: f64,
    n: usize,
    eta: f64,
    sigma_f_sq: f64,
) -> Result<f64> {
    let denom = (sigma_p_sq + n as f64 * mu_p_sq) * (sigma_pi_sq + mu_pi_sq);
    if sigma_p_sq <= 0.0 && mu_p_sq <= 0.0 {
        return Err(Error::Numerical(
            "degenerate input law carries no signal".into(),
        ));
    }
    if denom <= 0.0 {
        return Err(Error::Numerical("power cap denominator must be positive".into()));
    }
    Ok((eta * sigma_f_sq / denom).sqrt())
}

/// Transmit amplitude r meeting the power cap with equality for a fixed
/// matrix B: r^2/m (sigma_p^2 tr(BB*) + mu_p^2 tr(B J B*)) = n eta sigma_f^2,
/// with J the all-ones matrix, so tr(B J B*) sums squared row sums.
pub fn power_scale_fixed(
    matrix: &GcoMatrix,
    sigma_p_sq: f64,
    mu_p_sq: f64,
    eta: f64,
    sigma_f_sq: f64,
) -> Result<f64> {
    if sigma_p_sq <= 0.0 && mu_p_sq <= 0.0 {
        return Err(Error::Numerical(
            "degenerate input law carries no signal".into(),
        ));
    }
    let a = matrix.to_cmat();
    let (m, n) = (a.rows, a.cols);
    let mut tr_bb = 0.0;
    let mut tr_bjb = 0.0;
    for r in 0..m {
        let mut row_sum = Complex64::default();
        for c in 0..n {
            let v = a.at(r, c);
            tr_bb += v.norm_sqr();
            row_sum += v;
        }
        tr_bjb += row_sum.norm_sqr();
    }
    let denom = sigma_p_sq * tr_bb + mu_p_sq * tr_bjb;
    if denom <= 0.0 {
        return Err(Error::Numerical("power cap denominator must be positive".into()));
    }
    Ok((n as f64 * eta * sigma_f_sq * m as f64 / denom).sqrt())
}

/// 95% Wilson score interval for `errors` successes out of `total`.
pub fn wilson_interval(errors: u64, total: u64) -> (f64, f64) {
    crate::numerics::logdomain::wilson_interval(errors, total, 1.959964)
}

/// Which users transmit: everyone drawing i.i.d. from the uniform law over
/// the input alphabet, or the ternary active-user mode where each user is
/// silent (symbol 0) with probability `p_zero`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Activity {
    AllActive,
    TernaryCowda { p_zero: f64 },
}

/// Full simulation request. `eta_grid_db` is in dB; everything internal is
/// linear. `budget` caps metric evaluations per decode, guarding against an
/// exhaustive search that could never finish.
pub struct SimConfig<'a> {
    pub matrix: &'a GcoMatrix,
    pub trials: u64,
    pub seed: u64,
    pub decoder: DecoderKind,
    pub eta_grid_db: Vec<f64>,
    pub activity: Activity,
    pub noise: NoiseKind,
    pub budget: u128,
}

/// One line of the error-rate table: `user` None means the aggregate over
/// all users (its `trials` column counts symbol transmissions, n per trial).
#[derive(Debug, Clone, PartialEq)]
pub struct RateRow {
    pub eta_db: f64,
    pub user: Option<usize>,
    pub errors: u64,
    pub trials: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub rows: Vec<RateRow>,
}

impl SimReport {
    /// Aggregate rows only, in grid order.
    pub fn aggregate_rows(&self) -> Vec<&RateRow> {
        self.rows.iter().filter(|r| r.user.is_none()).collect()
    }

    /// Adjacent aggregate pairs where the error rate increases with eta by
    /// more than the confidence intervals allow.
    pub fn monotonicity_violations(&self) -> Vec<(f64, f64)> {
        let agg = self.aggregate_rows();
        agg.windows(2)
            .filter(|w| w[1].rate > w[0].rate && w[1].ci_low > w[0].ci_high)
            .map(|w| (w[0].eta_db, w[1].eta_db))
            .collect()
    }

    /// Render as CSV with `# key=value` metadata lines up front.
    pub fn to_csv(&self, meta: &[(&str, String)]) -> String {
        let mut out = String::new();
        for (k, v) in meta {
            out.push_str(&format!("# {k}={v}\n"));
        }
        out.push_str("eta_db,user_index,errors,trials,rate,ci_low,ci_high\n");
        for r in &self.rows {
            let user = match r.user {
                Some(u) => u.to_string(),
                None => "all".to_string(),
            };
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.eta_db, user, r.errors, r.trials, r.rate, r.ci_low, r.ci_high
            ));
        }
        out
    }
}

/// Run the Monte Carlo simulation. Per SNR point and trial, a fresh
/// counter-seeded generator draws the n input symbols (inverse CDF in
/// alphabet order) and then the noise, so the stream is independent of
/// scheduling. Returns aggregate and per-user rows per SNR point.
pub fn simulate_error_rate(cfg: &SimConfig) -> Result<SimReport> {
    let mat = cfg.matrix;
    let (m, n) = (mat.m(), mat.n());
    if cfg.trials == 0 {
        return Err(Error::InvalidDimension("trials must be at least 1".into()));
    }
    if cfg.eta_grid_db.is_empty() {
        return Err(Error::InvalidDimension("eta grid must be nonempty".into()));
    }
    let law = match cfg.activity {
        Activity::AllActive => InputLaw::uniform(mat.input().len()),
        Activity::TernaryCowda { p_zero } => InputLaw::cowda(mat.input(), p_zero)?,
    };
    let q = law.probs().len();
    if cfg.decoder == DecoderKind::Exhaustive {
        let needed = (q as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
        if needed > cfg.budget {
            return Err(Error::BudgetExceeded {
                needed,
                budget: cfg.budget,
            });
        }
    }
    let prepared = PreparedDecoder::new(mat, cfg.decoder)?;
    let symbols: Vec<Complex64> = mat.input().values().iter().map(|v| v.approx()).collect();
    let (mu, var) = law.moments(mat.input());
    let cols: Vec<Vec<Complex64>> = {
        let a = mat.to_cmat();
        (0..n).map(|j| a.column(j)).collect()
    };

    let mut rows = Vec::new();
    for (e_idx, &eta_db) in cfg.eta_grid_db.iter().enumerate() {
        let channel = ChannelModel::unit(cfg.noise, db_to_linear(eta_db))?;
        let r = power_scale_fixed(mat, var, mu.norm_sqr(), channel.eta, channel.sigma_f_sq())?;
        let scale = r / (m as f64).sqrt();
        let sigma = channel.component_var.sqrt();
        let complex_noise = matches!(cfg.noise, NoiseKind::ComplexGaussian);

        let counts: Vec<u64> = (0..cfg.trials)
            .into_par_iter()
            .fold(
                || vec![0u64; n],
                |mut acc, trial| {
                    let mut rng = counter_rng(cfg.seed, e_idx as u64, trial);
                    let x: Vec<usize> = (0..n).map(|_| law.draw(rng.gen::<f64>())).collect();
                    let mut y = vec![Complex64::default(); m];
                    for (j, &k) in x.iter().enumerate() {
                        let s = symbols[k] * scale;
                        for (yi, ci) in y.iter_mut().zip(&cols[j]) {
                            *yi += ci * s;
                        }
                    }
                    for yi in y.iter_mut() {
                        let re: f64 = StandardNormal.sample(&mut rng);
                        let im: f64 = if complex_noise {
                            StandardNormal.sample(&mut rng)
                        } else {
                            0.0
                        };
                        *yi += Complex64::new(re, im) * sigma;
                    }
                    let out = prepared
                        .decode(&y, scale, cfg.budget)
                        .expect("decode failed with validated inputs");
                    for (j, (&got, &sent)) in out.x_hat.iter().zip(&x).enumerate() {
                        if got != sent {
                            acc[j] += 1;
                        }
                    }
                    acc
                },
            )
            .reduce(
                || vec![0u64; n],
                |mut a, b| {
                    for (ai, bi) in a.iter_mut().zip(&b) {
                        *ai += bi;
                    }
                    a
                },
            );

        let total_errors: u64 = counts.iter().sum();
        let total_sent = cfg.trials * n as u64;
        let (lo, hi) = wilson_interval(total_errors, total_sent);
        rows.push(RateRow {
            eta_db,
            user: None,
            errors: total_errors,
            trials: total_sent,
            rate: total_errors as f64 / total_sent as f64,
            ci_low: lo,
            ci_high: hi,
        });
        for (u, &err) in counts.iter().enumerate() {
            let (lo, hi) = wilson_interval(err, cfg.trials);
            rows.push(RateRow {
                eta_db,
                user: Some(u),
                errors: err,
                trials: cfg.trials,
                rate: err as f64 / cfg.trials as f64,
                ci_low: lo,
                ci_high: hi,
            });
        }
    }
    Ok(SimReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::presets;
    use crate::matrix::{binary_chain, presets::build_recipe, GcoMatrix};

    fn base_config(mat: &GcoMatrix) -> SimConfig<'_> {
        SimConfig {
            matrix: mat,
            trials: 400,
            seed: 2024,
            decoder: DecoderKind::Exhaustive,
            eta_grid_db: vec![6.0],
            activity: Activity::AllActive,
            noise: NoiseKind::ComplexGaussian,
            budget: 1 << 30,
        }
    }

    #[test]
    fn power_scale_matches_hand_values() {
        // Uniform +/-1 inputs on an all-sign matrix: r = sqrt(2 eta).
        let mat = crate::matrix::hadamard(4, presets::binary()).unwrap();
        let r = power_scale_fixed(&mat, 1.0, 0.0, 3.0, 2.0).unwrap();
        assert!((r - (6.0f64).sqrt()).abs() < 1e-12);
        let re = power_scale_ensemble(1.0, 0.0, 1.0, 0.0, 4, 3.0, 2.0).unwrap();
        assert!((re - r).abs() < 1e-12);

        // Ternary active-user law: r = sqrt(2 eta / p_act).
        let law = InputLaw::cowda(&presets::ternary(), 1.0 / 3.0).unwrap();
        let (mu, var) = law.moments(&presets::ternary());
        assert!(mu.norm() < 1e-15);
        assert!((var - 2.0 / 3.0).abs() < 1e-15);
        let r = power_scale_fixed(&mat, var, mu.norm_sqr(), 3.0, 2.0).unwrap();
        assert!((r - (2.0f64 * 3.0 / (2.0 / 3.0)).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn degenerate_law_is_rejected() {
        let mat = crate::matrix::hadamard(2, presets::binary()).unwrap();
        assert!(power_scale_fixed(&mat, 0.0, 0.0, 1.0, 2.0).is_err());
        assert!(power_scale_ensemble(0.0, 0.0, 1.0, 0.0, 4, 1.0, 2.0).is_err());
    }

    #[test]
    fn wilson_brackets_the_point_estimate() {
        let (lo, hi) = wilson_interval(10, 100);
        assert!(lo < 0.1 && 0.1 < hi);
        assert!(lo > 0.04 && hi < 0.19);
        let (lo, hi) = wilson_interval(0, 100);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.05);
    }

    #[test]
    fn high_snr_on_verified_matrix_is_errorless() {
        let mat = build_recipe("seed-4x6").unwrap();
        let mut cfg = base_config(&mat);
        cfg.trials = 200;
        cfg.eta_grid_db = vec![60.0];
        let report = simulate_error_rate(&cfg).unwrap();
        assert_eq!(report.rows[0].errors, 0);
    }

    #[test]
    fn per_user_counts_sum_to_aggregate() {
        let mat = build_recipe("seed-4x6").unwrap();
        let mut cfg = base_config(&mat);
        cfg.eta_grid_db = vec![2.0, 6.0];
        let report = simulate_error_rate(&cfg).unwrap();
        for &eta in &[2.0, 6.0] {
            let agg: u64 = report
                .rows
                .iter()
                .filter(|r| r.eta_db == eta && r.user.is_none())
                .map(|r| r.errors)
                .sum();
            let users: u64 = report
                .rows
                .iter()
                .filter(|r| r.eta_db == eta && r.user.is_some())
                .map(|r| r.errors)
                .sum();
            assert_eq!(agg, users);
        }
    }

    #[test]
    fn deterministic_and_scheduling_invariant() {
        let mat = build_recipe("seed-4x6").unwrap();
        let cfg = base_config(&mat);
        let meta = [("kind", "sim".to_string())];
        let a = simulate_error_rate(&cfg).unwrap().to_csv(&meta);
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| simulate_error_rate(&cfg).unwrap().to_csv(&meta));
        let four = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| simulate_error_rate(&cfg).unwrap().to_csv(&meta));
        assert_eq!(a, single);
        assert_eq!(a, four);
    }

    #[test]
    fn cowda_with_no_silence_equals_all_active_binary() {
        let mat = binary_chain(4).unwrap();
        let mut cfg = base_config(&mat);
        cfg.eta_grid_db = vec![4.0];
        let plain = simulate_error_rate(&cfg).unwrap();
        cfg.activity = Activity::TernaryCowda { p_zero: 0.0 };
        let cowda = simulate_error_rate(&cfg).unwrap();
        assert_eq!(plain, cowda);
    }

    #[test]
    fn cowda_needs_the_zero_symbol() {
        let mat = binary_chain(4).unwrap();
        let mut cfg = base_config(&mat);
        cfg.activity = Activity::TernaryCowda { p_zero: 0.25 };
        assert!(simulate_error_rate(&cfg).is_err());
    }

    #[test]
    fn error_rate_decreases_with_snr() {
        let mat = build_recipe("seed-4x6").unwrap();
        let mut cfg = base_config(&mat);
        cfg.trials = 2000;
        cfg.eta_grid_db = vec![0.0, 4.0, 8.0, 12.0];
        cfg.activity = Activity::TernaryCowda { p_zero: 1.0 / 3.0 };
        let report = simulate_error_rate(&cfg).unwrap();
        assert!(report.monotonicity_violations().is_empty());
        let agg = report.aggregate_rows();
        assert!(agg[0].rate > agg.last().unwrap().rate);
    }

    #[test]
    fn exhaustive_budget_guard_fires_before_running() {
        let mat = build_recipe("seed-16x22").unwrap();
        let mut cfg = base_config(&mat);
        cfg.budget = 1 << 20;
        assert!(matches!(
            simulate_error_rate(&cfg),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn csv_has_metadata_and_grid_order() {
        let mat = build_recipe("seed-4x6").unwrap();
        let mut cfg = base_config(&mat);
        cfg.trials = 50;
        cfg.eta_grid_db = vec![3.0, 9.0];
        let report = simulate_error_rate(&cfg).unwrap();
        let csv = report.to_csv(&[("seed", "2024".to_string())]);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("# seed=2024"));
        assert_eq!(
            lines.next(),
            Some("eta_db,user_index,errors,trials,rate,ci_low,ci_high")
        );
        let first = lines.next().unwrap();
        assert!(first.starts_with("3,all,"));
        // 1 aggregate + 6 user rows per point.
        assert_eq!(csv.lines().count(), 2 + 2 * 7);
    }
}
