//! Injectivity verification.
//!
//! A matrix is injective over its input alphabet iff no two distinct input
//! vectors map to the same output, equivalently iff the kernel of A meets the
//! difference set only at zero. Two exhaustive strategies are provided:
//!
//! - Image mode walks all |I|^n inputs with a loopless mixed-radix Gray code,
//!   maintaining A x incrementally in an exact integer lattice and sorting
//!   64-bit fingerprints to find collisions (confirmed by exact recheck).
//! - Kernel mode (rational matrices) row-reduces A exactly over the
//!   rationals, parameterizes ker A by the free columns, and scans the
//!   difference-alphabet tails; each candidate head is checked for
//!   divisibility and membership. This costs |support|^(n-rank) instead of
//!   |I|^n, which is what makes heavily overloaded seeds checkable.
//!
//! Both modes are exact: a reported counterexample is a genuine collision and
//! a clean pass is a proof.

use super::GcoMatrix;
use crate::alphabet::DifferenceDistribution;
use crate::error::{Error, Result};
use crate::exact::ExactNumber;
use crate::numerics::rng::splitmix64;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Default cap on exhaustive enumeration size.
pub const DEFAULT_BUDGET: u128 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckMode {
    /// Prefer kernel mode, fall back to image mode, whichever fits budget.
    Auto,
    Image,
    Kernel,
}

impl std::fmt::Display for CheckMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CheckMode::Auto => write!(f, "auto"),
            CheckMode::Image => write!(f, "image"),
            CheckMode::Kernel => write!(f, "kernel"),
        }
    }
}

#[derive(Debug, Clone)]
pub enum CheckOutcome {
    Injective {
        mode: CheckMode,
        evaluations: u128,
    },
    /// Two distinct inputs with A x = A y.
    NotInjective {
        x: Vec<ExactNumber>,
        y: Vec<ExactNumber>,
    },
}

impl CheckOutcome {
    pub fn is_injective(&self) -> bool {
        matches!(self, CheckOutcome::Injective { .. })
    }
}

/// Exhaustively decide injectivity of `mat` over its input alphabet.
pub fn check_injective(mat: &GcoMatrix, mode: CheckMode, budget: u128) -> Result<CheckOutcome> {
    match mode {
        CheckMode::Image => check_image(mat, budget),
        CheckMode::Kernel => check_kernel(mat, budget),
        CheckMode::Auto => {
            if mat.is_rational() {
                match check_kernel(mat, budget) {
                    Err(Error::BudgetExceeded { .. }) => {}
                    other => return other,
                }
            }
            check_image(mat, budget)
        }
    }
}

/// Like [`check_injective`], recording a clean pass in `mat.verification`.
pub fn check_and_record(
    mat: &mut GcoMatrix,
    mode: CheckMode,
    budget: u128,
) -> Result<CheckOutcome> {
    let outcome = check_injective(mat, mode, budget)?;
    if let CheckOutcome::Injective { mode, evaluations } = &outcome {
        mat.verification = super::Verification::Verified {
            mode: *mode,
            evaluations: *evaluations,
        };
    }
    Ok(outcome)
}

/// Loopless reflected mixed-radix Gray walk with constant radix `q`:
/// exactly one digit changes per step (Knuth 7.2.1.1 style focus pointers).
pub(crate) struct GrayWalk {
    q: usize,
    n: usize,
    digits: Vec<usize>,
    focus: Vec<usize>,
    dir: Vec<isize>,
}

impl GrayWalk {
    pub(crate) fn new(n: usize, q: usize) -> Self {
        assert!(q >= 2);
        GrayWalk {
            q,
            n,
            digits: vec![0; n],
            focus: (0..=n).collect(),
            dir: vec![1; n],
        }
    }

    /// Advance one step; returns (coordinate, old digit, new digit), or None
    /// when the walk is exhausted after q^n states.
    pub(crate) fn step(&mut self) -> Option<(usize, usize, usize)> {
        let j = self.focus[0];
        self.focus[0] = 0;
        if j == self.n {
            return None;
        }
        let old = self.digits[j];
        let new = (old as isize + self.dir[j]) as usize;
        self.digits[j] = new;
        if new == 0 || new == self.q - 1 {
            self.dir[j] = -self.dir[j];
            self.focus[j] = self.focus[j + 1];
            self.focus[j + 1] = j + 1;
        }
        Some((j, old, new))
    }
}

/// Digits of the reflected Gray walk after `idx` steps (coordinate 0 is the
/// fastest-changing one).
fn gray_digits(idx: u128, n: usize, q: usize) -> Vec<usize> {
    let q128 = q as u128;
    let mut digits = vec![0usize; n];
    for (j, d) in digits.iter_mut().enumerate() {
        let base = q128.pow(j as u32);
        let c = ((idx / base) % q128) as usize;
        let higher = idx / (base * q128);
        *d = if higher % 2 == 0 { c } else { q - 1 - c };
    }
    digits
}

fn lcm_big(a: &BigInt, b: &BigInt) -> BigInt {
    if a.is_zero() || b.is_zero() {
        return BigInt::one();
    }
    (a * b).abs() / a.gcd(b)
}

/// Scale a set of rationals to a common-denominator integer lattice.
/// Returns (integers, denominator).
fn to_lattice(values: &[BigRational]) -> (Vec<BigInt>, BigInt) {
    let mut den = BigInt::one();
    for v in values {
        den = lcm_big(&den, v.denom());
    }
    let ints = values
        .iter()
        .map(|v| v.numer() * (&den / v.denom()))
        .collect();
    (ints, den)
}

fn image_budget(mat: &GcoMatrix) -> Option<u128> {
    (mat.input().len() as u128).checked_pow(mat.n() as u32)
}

fn check_image(mat: &GcoMatrix, budget: u128) -> Result<CheckOutcome> {
    let q = mat.input().len();
    let n = mat.n();
    let m = mat.m();
    if q == 1 {
        return Ok(CheckOutcome::Injective {
            mode: CheckMode::Image,
            evaluations: 1,
        });
    }
    let total = image_budget(mat)
        .filter(|t| *t <= budget)
        .ok_or(Error::BudgetExceeded {
            needed: image_budget(mat).unwrap_or(u128::MAX),
            budget,
        })?;
    assert!(total <= u32::MAX as u128, "budget cap keeps indices in u32");

    // Exact products entry * input_value, flattened to one rational list to
    // share a single lattice denominator.
    let dim = mat.signature().basis().dim();
    let mut flat: Vec<BigRational> = Vec::with_capacity(n * q * m * dim);
    for c in 0..n {
        for v in mat.input().values() {
            for r in 0..m {
                let p = mat.entry(r, c).try_mul(v)?;
                flat.extend_from_slice(p.coords());
            }
        }
    }
    let (ints, _den) = to_lattice(&flat);
    let max_abs = ints
        .iter()
        .map(|x| x.abs())
        .max()
        .unwrap_or_else(BigInt::zero);
    let bound = max_abs * BigInt::from(n as u64);
    let fits = bound
        .to_i64()
        .map(|b| b < i64::MAX / 4)
        .unwrap_or(false);
    if !fits {
        return Err(Error::Numerical(
            "image-mode lattice exceeds 64-bit accumulator range".into(),
        ));
    }
    let stride = m * dim;
    // prod[c][v] is the contribution of digit v in column c.
    let prod: Vec<Vec<i64>> = (0..n * q)
        .map(|cv| {
            ints[cv * stride..(cv + 1) * stride]
                .iter()
                .map(|x| x.to_i64().unwrap())
                .collect()
        })
        .collect();
    let pslice = |c: usize, v: usize| -> &[i64] { &prod[c * q + v] };

    let mut acc = vec![0i64; stride];
    for c in 0..n {
        let p = pslice(c, 0);
        for (a, b) in acc.iter_mut().zip(p) {
            *a += *b;
        }
    }
    let hash_acc = |acc: &[i64]| -> u64 {
        let mut h = 0x9E37_79B9_7F4A_7C15u64;
        for &v in acc {
            let mut s = h ^ (v as u64);
            h = splitmix64(&mut s);
        }
        h
    };

    let mut fps: Vec<(u64, u32)> = Vec::with_capacity(total as usize);
    fps.push((hash_acc(&acc), 0));
    let mut walk = GrayWalk::new(n, q);
    let mut idx: u32 = 0;
    while let Some((c, old, new)) = walk.step() {
        idx += 1;
        let po = pslice(c, old);
        let pn = pslice(c, new);
        for (i, a) in acc.iter_mut().enumerate() {
            *a += pn[i] - po[i];
        }
        fps.push((hash_acc(&acc), idx));
    }
    debug_assert_eq!(fps.len() as u128, total);

    fps.sort_unstable();
    let exact_sum = |digits: &[usize]| -> Vec<i128> {
        let mut s = vec![0i128; stride];
        for (c, &d) in digits.iter().enumerate() {
            for (i, v) in pslice(c, d).iter().enumerate() {
                s[i] += *v as i128;
            }
        }
        s
    };
    let mut run_start = 0;
    while run_start < fps.len() {
        let mut run_end = run_start + 1;
        while run_end < fps.len() && fps[run_end].0 == fps[run_start].0 {
            run_end += 1;
        }
        if run_end - run_start > 1 {
            for i in run_start..run_end {
                for j in (i + 1)..run_end {
                    let di = gray_digits(fps[i].1 as u128, n, q);
                    let dj = gray_digits(fps[j].1 as u128, n, q);
                    if exact_sum(&di) == exact_sum(&dj) {
                        let xv = di.iter().map(|&d| mat.input().values()[d].clone());
                        let yv = dj.iter().map(|&d| mat.input().values()[d].clone());
                        return Ok(CheckOutcome::NotInjective {
                            x: xv.collect(),
                            y: yv.collect(),
                        });
                    }
                }
            }
        }
        run_start = run_end;
    }
    Ok(CheckOutcome::Injective {
        mode: CheckMode::Image,
        evaluations: total,
    })
}

/// Exact rational RREF of `mat`, preferring `head_cols` as pivots.
/// Returns (pivot columns in processing order, free columns, rows of the
/// reduced system restricted to free columns).
fn rational_rref(mat: &GcoMatrix) -> (Vec<usize>, Vec<usize>, Vec<Vec<BigRational>>) {
    let m = mat.m();
    let n = mat.n();
    let mut rows: Vec<Vec<BigRational>> = (0..m)
        .map(|r| {
            (0..n)
                .map(|c| mat.entry(r, c).to_rational().expect("rational matrix"))
                .collect()
        })
        .collect();
    let mut order: Vec<usize> = Vec::with_capacity(n);
    if let Some(h) = &mat.head_cols {
        order.extend_from_slice(h);
    }
    for c in 0..n {
        if !order.contains(&c) {
            order.push(c);
        }
    }
    let mut pivot_cols = Vec::new();
    let mut rank = 0usize;
    for &col in &order {
        if rank == m {
            break;
        }
        let Some(p) = (rank..m).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, p);
        let pv = rows[rank][col].clone();
        for x in rows[rank].iter_mut() {
            *x /= pv.clone();
        }
        for r in 0..m {
            if r != rank && !rows[r][col].is_zero() {
                let f = rows[r][col].clone();
                let (head, tail) = rows.split_at_mut(rank.max(r));
                let (src, dst) = if r < rank {
                    (&tail[0], &mut head[r])
                } else {
                    (&head[rank], &mut tail[0])
                };
                for (x, s) in dst.iter_mut().zip(src.iter()) {
                    *x -= &f * s;
                }
            }
        }
        pivot_cols.push(col);
        rank += 1;
    }
    let free_cols: Vec<usize> = (0..n).filter(|c| !pivot_cols.contains(c)).collect();
    let reduced: Vec<Vec<BigRational>> = (0..rank)
        .map(|i| free_cols.iter().map(|&f| rows[i][f].clone()).collect())
        .collect();
    (pivot_cols, free_cols, reduced)
}

/// Columns of an invertible (full-row-rank) head, if the matrix is rational
/// and has one. Sorted ascending.
pub fn find_head_cols(mat: &GcoMatrix) -> Option<Vec<usize>> {
    if !mat.is_rational() {
        return None;
    }
    let (mut pivots, _, _) = rational_rref(mat);
    if pivots.len() != mat.m() {
        return None;
    }
    pivots.sort_unstable();
    Some(pivots)
}

fn check_kernel(mat: &GcoMatrix, budget: u128) -> Result<CheckOutcome> {
    if !mat.is_rational() {
        return Err(Error::Unsupported(
            "kernel-mode check requires rational entries and inputs".into(),
        ));
    }
    let dd = DifferenceDistribution::from_alphabet_uniform(mat.input());
    let support = dd
        .integer_support()
        .ok_or_else(|| Error::Numerical("difference support is not integral".into()))?;
    let s = support.len();
    let (pivot_cols, free_cols, reduced) = rational_rref(mat);
    let rank = pivot_cols.len();
    let nf = free_cols.len();
    if nf == 0 {
        return Ok(CheckOutcome::Injective {
            mode: CheckMode::Kernel,
            evaluations: 0,
        });
    }
    let tails = (s as u128)
        .checked_pow(nf as u32)
        .filter(|t| *t <= budget)
        .ok_or(Error::BudgetExceeded {
            needed: (s as u128).checked_pow(nf as u32).unwrap_or(u128::MAX),
            budget,
        })?;

    // Clear the reduced rows to integers over one denominator.
    let flat: Vec<BigRational> = reduced.iter().flatten().cloned().collect();
    let (ints, den) = to_lattice(&flat);
    let den_i: i128 = den
        .to_i128()
        .ok_or_else(|| Error::Numerical("kernel denominator exceeds 128 bits".into()))?;
    let rn: Vec<i128> = ints
        .iter()
        .map(|x| x.to_i128())
        .collect::<Option<_>>()
        .ok_or_else(|| Error::Numerical("kernel coefficients exceed 128 bits".into()))?;
    let max_sup = support.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0) as i128;
    for i in 0..rank {
        let row_sum: i128 = (0..nf).map(|j| rn[i * nf + j].abs()).sum();
        if row_sum.checked_mul(max_sup).is_none() {
            return Err(Error::Numerical(
                "kernel accumulator exceeds 128-bit range".into(),
            ));
        }
    }

    // e_pivot[i] = -(sum_j rn[i][j] * tail_j) / den must land in the support.
    let support_min = *support.first().unwrap();
    let support_max = *support.last().unwrap();
    let in_support = |v: i128| -> bool {
        v >= support_min as i128
            && v <= support_max as i128
            && support.binary_search(&(v as i64)).is_ok()
    };
    let zero_digit = support
        .binary_search(&0)
        .expect("difference support contains zero");

    let mut u = vec![0i128; rank];
    for i in 0..rank {
        u[i] = (0..nf)
            .map(|j| rn[i * nf + j] * support[0] as i128)
            .sum();
    }
    let mut nonzero = if support[0] == 0 { 0 } else { nf };
    let mut digits = vec![0usize; nf];
    let mut evaluations: u128 = 0;

    let mut walk = GrayWalk::new(nf, s);
    loop {
        evaluations += 1;
        if nonzero > 0 {
            let ok = (0..rank).all(|i| u[i] % den_i == 0 && in_support(-u[i] / den_i));
            if ok {
                // Genuine kernel vector over the scaled difference alphabet:
                // reconstruct x, y with x - y = d * e.
                let mut e = vec![0i128; mat.n()];
                for (i, &pc) in pivot_cols.iter().enumerate() {
                    e[pc] = -u[i] / den_i;
                }
                for (j, &fc) in free_cols.iter().enumerate() {
                    e[fc] = support[digits[j]] as i128;
                }
                let (x, y) = decompose_difference(mat, &e, dd.d())?;
                return Ok(CheckOutcome::NotInjective { x, y });
            }
        }
        match walk.step() {
            None => break,
            Some((j, old, new)) => {
                let delta = (support[new] - support[old]) as i128;
                for i in 0..rank {
                    u[i] += rn[i * nf + j] * delta;
                }
                if old == zero_digit {
                    nonzero += 1;
                }
                if new == zero_digit {
                    nonzero -= 1;
                }
                digits[j] = new;
            }
        }
    }
    debug_assert_eq!(evaluations, tails);
    Ok(CheckOutcome::Injective {
        mode: CheckMode::Kernel,
        evaluations,
    })
}

/// Split a difference vector d*e into input vectors x - y = d*e.
fn decompose_difference(
    mat: &GcoMatrix,
    e: &[i128],
    d: &BigRational,
) -> Result<(Vec<ExactNumber>, Vec<ExactNumber>)> {
    let vals = mat.input().values();
    let mut x = Vec::with_capacity(e.len());
    let mut y = Vec::with_capacity(e.len());
    for &ej in e {
        let target = d * BigRational::from(BigInt::from(ej));
        let mut found = false;
        'outer: for a in vals {
            for b in vals {
                let ra = a.to_rational().expect("rational input");
                let rb = b.to_rational().expect("rational input");
                if ra - rb == target {
                    x.push(a.clone());
                    y.push(b.clone());
                    found = true;
                    break 'outer;
                }
            }
        }
        if !found {
            return Err(Error::Numerical(
                "kernel counterexample coordinate outside the difference set".into(),
            ));
        }
    }
    Ok((x, y))
}

/// Number of solution pairs is useful in tests: count collisions of A x over
/// all inputs by exact enumeration (small n only).
#[cfg(test)]
pub(crate) fn count_distinct_images(mat: &GcoMatrix) -> usize {
    use std::collections::BTreeSet;
    let q = mat.input().len();
    let n = mat.n();
    let total = q.pow(n as u32);
    let mut images = BTreeSet::new();
    for idx in 0..total {
        let mut digits = Vec::with_capacity(n);
        let mut k = idx;
        for _ in 0..n {
            digits.push(k % q);
            k /= q;
        }
        let x: Vec<ExactNumber> = digits
            .iter()
            .map(|&d| mat.input().values()[d].clone())
            .collect();
        let img = mat.apply_exact(&x).unwrap();
        let key: Vec<String> = img.iter().map(|v| format!("{v}")).collect();
        images.insert(key);
    }
    images.len()
}

#[cfg(test)]
mod tests {
    use super::super::hadamard;
    use super::*;
    use crate::alphabet::{presets, Alphabet};

    #[test]
    fn gray_walk_covers_all_states() {
        for (n, q) in [(3usize, 2usize), (4, 3), (2, 5), (1, 4)] {
            let mut walk = GrayWalk::new(n, q);
            let mut seen = std::collections::BTreeSet::new();
            seen.insert(walk.digits.clone());
            let mut idx = 0u128;
            // decode must agree with the walk at every step
            assert_eq!(gray_digits(0, n, q), walk.digits);
            while let Some(_) = walk.step() {
                idx += 1;
                assert_eq!(gray_digits(idx, n, q), walk.digits, "step {idx}");
                assert!(seen.insert(walk.digits.clone()), "revisited at {idx}");
            }
            assert_eq!(seen.len(), q.pow(n as u32));
        }
    }

    #[test]
    fn hadamard_injective_both_modes() {
        let h = hadamard(4, presets::binary()).unwrap();
        let img = check_injective(&h, CheckMode::Image, DEFAULT_BUDGET).unwrap();
        assert!(img.is_injective());
        let ker = check_injective(&h, CheckMode::Kernel, DEFAULT_BUDGET).unwrap();
        match ker {
            CheckOutcome::Injective { evaluations, .. } => assert_eq!(evaluations, 0),
            _ => panic!("expected injective"),
        }
    }

    #[test]
    fn repeated_column_is_caught() {
        // Two identical columns cannot be injective over binary inputs.
        let rows = vec![vec![1i64, 1], vec![1, 1]];
        let mat = GcoMatrix::from_integer_rows(
            &rows,
            presets::binary(),
            Alphabet::integers(&[-1, 1]),
        )
        .unwrap();
        for mode in [CheckMode::Image, CheckMode::Kernel] {
            match check_injective(&mat, mode, DEFAULT_BUDGET).unwrap() {
                CheckOutcome::NotInjective { x, y } => {
                    let ax = mat.apply_exact(&x).unwrap();
                    let ay = mat.apply_exact(&y).unwrap();
                    assert_eq!(ax, ay);
                    assert_ne!(x, y);
                }
                _ => panic!("{mode}: expected a counterexample"),
            }
        }
    }

    #[test]
    fn modes_agree_on_random_ternary_matrices() {
        use rand::Rng;
        let mut rng = crate::numerics::rng::counter_rng(17, 0, 0);
        let input = presets::ternary();
        let sig = Alphabet::integers(&[-1, 1]);
        for trial in 0..40 {
            let m = 2 + (trial % 3);
            let n = m + 1 + (trial % 2);
            let rows: Vec<Vec<i64>> = (0..m)
                .map(|_| (0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect())
                .collect();
            let mat =
                GcoMatrix::from_integer_rows(&rows, input.clone(), sig.clone()).unwrap();
            let a = check_injective(&mat, CheckMode::Image, DEFAULT_BUDGET)
                .unwrap()
                .is_injective();
            let b = check_injective(&mat, CheckMode::Kernel, DEFAULT_BUDGET)
                .unwrap()
                .is_injective();
            assert_eq!(a, b, "trial {trial}: image={a} kernel={b}");
        }
    }

    #[test]
    fn kernel_counterexample_really_collides() {
        // 2x3 binary matrix: overloaded beyond hope, must fail with witness.
        let rows = vec![vec![1i64, 1, 1], vec![1, -1, 1]];
        let mat = GcoMatrix::from_integer_rows(
            &rows,
            presets::binary(),
            Alphabet::integers(&[-1, 1]),
        )
        .unwrap();
        match check_injective(&mat, CheckMode::Kernel, DEFAULT_BUDGET).unwrap() {
            CheckOutcome::NotInjective { x, y } => {
                assert_eq!(mat.apply_exact(&x).unwrap(), mat.apply_exact(&y).unwrap());
                assert_ne!(x, y);
            }
            _ => panic!("expected counterexample"),
        }
    }

    #[test]
    fn budget_is_enforced() {
        let h = hadamard(16, presets::binary()).unwrap();
        let err = check_injective(&h, CheckMode::Image, 100).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
    }

    #[test]
    fn complex_image_mode_works() {
        // [1 i] over binary inputs: 1*x1 + i*x2, all four sums distinct.
        let b = crate::exact::GeneratorBasis::gaussian();
        let one = ExactNumber::from_int(&b, 1).unwrap();
        let i = ExactNumber::gaussian(
            BigRational::zero(),
            BigRational::one(),
        );
        let sig = Alphabet::new(vec![one.clone(), i.clone()]).unwrap();
        let mat = GcoMatrix::new(1, 2, vec![one, i], presets::binary(), sig).unwrap();
        let out = check_injective(&mat, CheckMode::Image, DEFAULT_BUDGET).unwrap();
        assert!(out.is_injective());
    }

    #[test]
    fn image_collision_count_matches_brute_force() {
        // For a non-injective matrix, the checker's verdict must match a
        // plain set-based count of distinct images.
        let rows = vec![vec![1i64, 1, -1], vec![1, -1, 1]];
        let mat = GcoMatrix::from_integer_rows(
            &rows,
            presets::ternary(),
            Alphabet::integers(&[-1, 1]),
        )
        .unwrap();
        let distinct = count_distinct_images(&mat);
        let verdict = check_injective(&mat, CheckMode::Image, DEFAULT_BUDGET)
            .unwrap()
            .is_injective();
        assert_eq!(verdict, distinct == 27);
    }
}
