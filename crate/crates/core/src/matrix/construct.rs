//! Constructions that turn small injective matrices into large ones while
//! preserving injectivity, so the big matrices ship proof-carried instead of
//! brute-verified.
//!
//! The workhorse takes a seed C, a Hadamard matrix H_w, an integer gain k and
//! block matrices M_1..M_w summing to a scaled (possibly column-truncated)
//! identity, and emits [k(H_w (x) C) | stacked M_i]. The appended columns stay
//! distinguishable from the Kronecker part exactly when a small divisibility
//! condition on the input difference set holds; that condition is checked
//! here, exactly, before anything is assembled.

use super::{hadamard, GcoMatrix, KronFactor, Verification};
use crate::alphabet::{Alphabet, DifferenceDistribution};
use crate::error::{Error, Result};
use crate::exact::{rational_rank, ExactNumber, GeneratorBasis};
use num_rational::BigRational;
use num_traits::Zero;
use std::sync::Arc;

/// Block shapes available for the appended stack. Tilde variants are the
/// first m-1 columns of their m x m namesakes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    /// All ones, m x (m-1).
    JTilde,
    /// 2*ITilde - JTilde: +1 on the diagonal, -1 elsewhere, m x (m-1).
    KTilde,
    /// Negated JTilde.
    NegJTilde,
    /// Identity columns, m x (m-1).
    ITilde,
    /// Zero, m x (m-1).
    OTilde,
    /// Full m x m identity.
    Identity,
    /// Full m x m zero.
    Zero,
}

impl BlockKind {
    fn width(self, m: usize) -> usize {
        match self {
            BlockKind::Identity | BlockKind::Zero => m,
            _ => m - 1,
        }
    }

    fn entry(self, i: usize, j: usize) -> i64 {
        match self {
            BlockKind::JTilde => 1,
            BlockKind::NegJTilde => -1,
            BlockKind::KTilde => {
                if i == j {
                    1
                } else {
                    -1
                }
            }
            BlockKind::ITilde | BlockKind::Identity => {
                if i == j {
                    1
                } else {
                    0
                }
            }
            BlockKind::OTilde | BlockKind::Zero => 0,
        }
    }

    fn value_range(self) -> &'static [i64] {
        match self {
            BlockKind::JTilde => &[1],
            BlockKind::NegJTilde => &[-1],
            BlockKind::KTilde => &[-1, 1],
            BlockKind::ITilde | BlockKind::Identity => &[0, 1],
            BlockKind::OTilde | BlockKind::Zero => &[0],
        }
    }
}

/// Which identity pattern the block sum must match.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneralVariant {
    /// Sum of blocks = t * I_m; appends m columns.
    Even,
    /// Sum of blocks = t * ITilde_m; requires an odd signature alphabet and
    /// appends m-1 columns.
    Odd,
}

fn integer_alphabet_values(a: &Alphabet, what: &str) -> Result<Vec<i64>> {
    a.integer_values().ok_or_else(|| {
        Error::ConstructionPrecondition(format!("{what} alphabet must be a set of integers"))
    })
}

/// General enlargement: B = [k(H_w (x) C) | M_1; ...; M_w].
///
/// `blocks` lists M_1..M_w. All blocks must share a width (m for the even
/// variant, m-1 for the odd one) and sum to t*I (resp. t*ITilde). The result
/// has w*m rows and w*n + m (resp. w*n + m - 1) columns over `sig_prime`.
pub fn construct_general(
    seed: &GcoMatrix,
    w: usize,
    k: i64,
    blocks: &[BlockKind],
    sig_prime: Alphabet,
) -> Result<GcoMatrix> {
    let m = seed.m();
    let n = seed.n();
    if w == 0 || blocks.len() != w {
        return Err(Error::InvalidDimension(format!(
            "need exactly w = {w} blocks, got {}",
            blocks.len()
        )));
    }
    if k == 0 {
        return Err(Error::ConstructionPrecondition("gain k must be nonzero".into()));
    }
    let width = blocks[0].width(m);
    if blocks.iter().any(|b| b.width(m) != width) {
        return Err(Error::InvalidDimension(
            "blocks mix full and column-truncated shapes".into(),
        ));
    }
    let variant = if width == m {
        GeneralVariant::Even
    } else {
        GeneralVariant::Odd
    };

    let seed_sig = integer_alphabet_values(seed.signature(), "seed signature")?;
    let sig_prime_ints = integer_alphabet_values(&sig_prime, "target signature")?;
    integer_alphabet_values(seed.input(), "input")?;
    if variant == GeneralVariant::Odd && seed_sig.iter().any(|s| s % 2 == 0) {
        return Err(Error::ConstructionPrecondition(
            "column-truncated variant requires an odd signature alphabet".into(),
        ));
    }
    // +-k*S must land in the target alphabet, and so must the block entries.
    for &s in &seed_sig {
        for v in [k * s, -k * s] {
            if !sig_prime_ints.contains(&v) {
                return Err(Error::ConstructionPrecondition(format!(
                    "scaled signature value {v} is outside the target alphabet"
                )));
            }
        }
    }
    for b in blocks {
        for &v in b.value_range() {
            if !sig_prime_ints.contains(&v) {
                return Err(Error::ConstructionPrecondition(format!(
                    "block entry {v} is outside the target alphabet"
                )));
            }
        }
    }

    // Block sum must be t*I (even) or t*ITilde (odd) with t nonzero.
    let mut t: i64 = 0;
    for i in 0..m {
        for j in 0..width {
            let s: i64 = blocks.iter().map(|b| b.entry(i, j)).sum();
            if i == j {
                if t == 0 {
                    t = s;
                } else if s != t {
                    return Err(Error::ConstructionPrecondition(
                        "block sum diagonal is not constant".into(),
                    ));
                }
            } else if s != 0 {
                return Err(Error::ConstructionPrecondition(format!(
                    "block sum has off-diagonal entry {s} at ({i},{j})"
                )));
            }
        }
    }
    if t == 0 {
        return Err(Error::ConstructionPrecondition(
            "block sum is zero; the appended columns carry no information".into(),
        ));
    }

    // The separation condition: no nonzero scaled difference e may satisfy
    // e*t ≡ 0 mod wk (even) or mod 2wk (odd).
    let dd = DifferenceDistribution::from_alphabet_uniform(seed.input());
    let support = dd
        .nonzero_integer_support()
        .ok_or_else(|| Error::Numerical("difference support is not integral".into()))?;
    let modulus = match variant {
        GeneralVariant::Even => w as i64 * k,
        GeneralVariant::Odd => 2 * w as i64 * k,
    }
    .abs();
    for &e in &support {
        if (e * t) % modulus == 0 {
            return Err(Error::ConstructionPrecondition(format!(
                "difference {e} defeats the construction: {e}*{t} is divisible by {modulus}"
            )));
        }
    }

    // Assemble. Left part: k * (H_w (x) C); right part: stacked blocks.
    let h = hadamard_signs(w)?;
    let basis = sig_prime.basis().clone();
    let out_m = w * m;
    let out_n = w * n + width;
    let mut entries = vec![ExactNumber::zero(&basis); out_m * out_n];
    for a in 0..w {
        for r in 0..m {
            let row = a * m + r;
            for b in 0..w {
                let scale = h[a][b] * k;
                for c in 0..n {
                    let v = seed
                        .entry(r, c)
                        .to_rational()
                        .expect("integer seed entries");
                    let scaled = BigRational::from_integer(scale.into()) * v;
                    entries[row * out_n + b * n + c] =
                        ExactNumber::from_rational(&basis, scaled)?;
                }
            }
            for j in 0..width {
                entries[row * out_n + w * n + j] =
                    ExactNumber::from_int(&basis, blocks[a].entry(r, j))?;
            }
        }
    }
    let mut out = GcoMatrix::new(out_m, out_n, entries, seed.input().clone(), sig_prime)?;
    out.provenance = seed.provenance.clone();
    out.push_provenance(format!(
        "general enlargement w={w} k={k} t={t} ({} variant): ({m},{n}) -> ({out_m},{out_n})",
        match variant {
            GeneralVariant::Even => "even",
            GeneralVariant::Odd => "odd",
        }
    ));
    out.verification = match seed.verification {
        Verification::Unverified => Verification::Unverified,
        _ => Verification::ProvenByConstruction,
    };
    if let Some(h0) = &seed.head_cols {
        out.head_cols = Some(
            (0..w)
                .flat_map(|b| h0.iter().map(move |&j| b * n + j))
                .collect(),
        );
    } else if m == n {
        out.head_cols = Some((0..w).flat_map(|b| (0..n).map(move |j| b * n + j)).collect());
    }
    Ok(out)
}

/// Signs of a Sylvester Hadamard matrix of the given power-of-two order.
fn hadamard_signs(order: usize) -> Result<Vec<Vec<i64>>> {
    if order == 0 || !order.is_power_of_two() {
        return Err(Error::InvalidDimension(format!(
            "Hadamard factor order must be a power of two, got {order}"
        )));
    }
    let mut rows = vec![vec![1i64]];
    while rows.len() < order {
        let mut next = Vec::with_capacity(rows.len() * 2);
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
    Ok(rows)
}

/// Binary-signature enlargement: seed over inputs {0,+-1,...,+-q} and
/// signatures {+-1} grows to (4r*m, 4r*n + m - 1) provided 4r >= 2q+1.
pub fn corollary1(seed: &GcoMatrix, r: usize) -> Result<GcoMatrix> {
    if r == 0 {
        return Err(Error::InvalidDimension("need r >= 1".into()));
    }
    let q = seed
        .input()
        .integer_q()
        .ok_or_else(|| Error::ConstructionPrecondition("input must be integral".into()))?;
    let w = 4 * r;
    if (w as i64) < 2 * q + 1 {
        return Err(Error::ConstructionPrecondition(format!(
            "need 4r >= 2q+1, got 4r = {w}, q = {q}"
        )));
    }
    let mut blocks = vec![BlockKind::JTilde, BlockKind::KTilde];
    blocks.extend(std::iter::repeat(BlockKind::JTilde).take(2 * r - 1));
    blocks.extend(std::iter::repeat(BlockKind::NegJTilde).take(2 * r - 1));
    construct_general(seed, w, 1, &blocks, Alphabet::integers(&[-1, 1]))
}

/// Nonbinary enlargement: seed over signatures {0,+-1,...,+-l} grows to
/// (w*m, w*n + m) over {0,+-1,...,+-lk} provided wk > 2q.
pub fn corollary2(seed: &GcoMatrix, w: usize, k: i64) -> Result<GcoMatrix> {
    let q = seed
        .input()
        .integer_q()
        .ok_or_else(|| Error::ConstructionPrecondition("input must be integral".into()))?;
    let l = seed
        .signature()
        .integer_q()
        .ok_or_else(|| Error::ConstructionPrecondition("signature must be integral".into()))?;
    if (w as i64) * k <= 2 * q {
        return Err(Error::ConstructionPrecondition(format!(
            "need wk > 2q, got wk = {}, q = {q}",
            w as i64 * k
        )));
    }
    let mut blocks = vec![BlockKind::Identity];
    blocks.extend(std::iter::repeat(BlockKind::Zero).take(w - 1));
    let lk = l * k;
    let vals: Vec<i64> = (-lk..=lk).collect();
    construct_general(seed, w, k, &blocks, Alphabet::integers(&vals))
}

/// Appends identity columns to a binary-input, binary-signature seed:
/// (m, n) -> (m, n + m - 1) over the ternary signature {0,+-1}.
pub fn append_identity_tail(seed: &GcoMatrix) -> Result<GcoMatrix> {
    construct_general(
        seed,
        1,
        1,
        &[BlockKind::ITilde],
        Alphabet::integers(&[-1, 0, 1]),
    )
}

/// Doubling chain from the 2x2 Hadamard seed: each round applies the odd
/// variant with w=2 and blocks [KTilde, JTilde], mapping (m, n) to
/// (2m, 2n + m - 1). Reaches (64, 193) from (2, 2) in five rounds.
pub fn binary_chain(target_m: usize) -> Result<GcoMatrix> {
    if target_m < 2 || !target_m.is_power_of_two() {
        return Err(Error::InvalidDimension(format!(
            "target rows must be a power of two >= 2, got {target_m}"
        )));
    }
    let input = crate::alphabet::presets::binary();
    let mut mat = hadamard(2, input)?;
    mat.head_cols = Some(vec![0, 1]);
    while mat.m() < target_m {
        mat = construct_general(
            &mat,
            2,
            1,
            &[BlockKind::KTilde, BlockKind::JTilde],
            Alphabet::integers(&[-1, 1]),
        )?;
    }
    Ok(mat)
}

/// Complex enlargement (single Hadamard block): given binary-signature seeds
/// A_0..A_k over a common integer input and scalars xi_1..xi_k with
/// {1, xi_1, ..., xi_k} rationally independent, emits
/// [A_0 | xi_1 A_1 | ... | xi_k A_k | M~^1 | ... | M~^k] where M~^i is
/// xi_i * ITilde with zeros replaced by +1. Grows to
/// (m, (k+1) n + k (m-1)) over {+-1, +-xi_1, ..., +-xi_k}.
pub fn construct_complex(seeds: &[&GcoMatrix], xis: &[ExactNumber]) -> Result<GcoMatrix> {
    if seeds.len() != xis.len() + 1 || xis.is_empty() {
        return Err(Error::InvalidDimension(
            "need one more seed than scalars, and at least one scalar".into(),
        ));
    }
    let m = seeds[0].m();
    let n = seeds[0].n();
    let input = seeds[0].input().clone();
    for s in seeds {
        if s.m() != m || s.n() != n {
            return Err(Error::InvalidDimension("seed dimensions differ".into()));
        }
        let sig = integer_alphabet_values(s.signature(), "seed signature")?;
        if sig != vec![-1, 1] {
            return Err(Error::ConstructionPrecondition(
                "seeds must have the binary signature alphabet".into(),
            ));
        }
    }
    integer_alphabet_values(&input, "input")?;
    // The appended identity block is only separating when no nonzero scaled
    // difference is even (the t=1, w=1, k=1 odd-variant condition).
    let dd = DifferenceDistribution::from_alphabet_uniform(&input);
    let support = dd
        .nonzero_integer_support()
        .ok_or_else(|| Error::Numerical("difference support is not integral".into()))?;
    for &e in &support {
        if e % 2 == 0 {
            return Err(Error::ConstructionPrecondition(format!(
                "difference {e} defeats the appended identity block"
            )));
        }
    }

    let basis = xis[0].basis().clone();
    let one = ExactNumber::from_int(&basis, 1)?;
    let mut independence = vec![one.clone()];
    independence.extend_from_slice(xis);
    if rational_rank(&independence) != independence.len() {
        return Err(Error::ConstructionPrecondition(
            "scalars are not rationally independent together with 1".into(),
        ));
    }

    let mut sig_values = vec![one.clone(), one.neg()];
    for xi in xis {
        sig_values.push(xi.clone());
        sig_values.push(xi.neg());
    }
    let signature = Alphabet::new(sig_values)?;

    let kx = xis.len();
    let out_n = (kx + 1) * n + kx * (m - 1);
    let mut entries = vec![ExactNumber::zero(&basis); m * out_n];
    let seed_entry = |s: &GcoMatrix, r: usize, c: usize| -> Result<ExactNumber> {
        let v = s.entry(r, c).to_rational().ok_or_else(|| {
            Error::ConstructionPrecondition("seed entries must be rational".into())
        })?;
        ExactNumber::from_rational(&basis, v)
    };
    for r in 0..m {
        for c in 0..n {
            entries[r * out_n + c] = seed_entry(seeds[0], r, c)?;
        }
        for (i, xi) in xis.iter().enumerate() {
            for c in 0..n {
                let base = seed_entry(seeds[i + 1], r, c)?;
                entries[r * out_n + (i + 1) * n + c] = base.try_mul(xi)?;
            }
            let off = (kx + 1) * n + i * (m - 1);
            for j in 0..m - 1 {
                entries[r * out_n + off + j] = if r == j { xi.clone() } else { one.clone() };
            }
        }
    }
    let mut out = GcoMatrix::new(m, out_n, entries, input, signature)?;
    out.provenance = seeds[0].provenance.clone();
    out.push_provenance(format!(
        "complex enlargement with {kx} scalar block(s): ({m},{n}) -> ({m},{out_n})"
    ));
    out.verification = if seeds
        .iter()
        .all(|s| !matches!(s.verification, Verification::Unverified))
    {
        Verification::ProvenByConstruction
    } else {
        Verification::Unverified
    };
    out.head_cols = seeds[0].head_cols.clone();
    Ok(out)
}

/// Gaussian-rational field element for exact invertibility tests.
#[derive(Clone, PartialEq)]
struct GaussQ {
    re: BigRational,
    im: BigRational,
}

impl GaussQ {
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn mul(&self, o: &Self) -> Self {
        GaussQ {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }

    fn sub(&self, o: &Self) -> Self {
        GaussQ {
            re: &self.re - &o.re,
            im: &self.im - &o.im,
        }
    }

    fn inv(&self) -> Self {
        let d = &self.re * &self.re + &self.im * &self.im;
        GaussQ {
            re: &self.re / &d,
            im: -&self.im / &d,
        }
    }
}

fn to_gauss_q(v: &ExactNumber) -> Result<GaussQ> {
    if let Some(r) = v.to_rational() {
        return Ok(GaussQ {
            re: r,
            im: BigRational::zero(),
        });
    }
    if v.basis().is_gaussian() {
        return Ok(GaussQ {
            re: v.coords()[0].clone(),
            im: v.coords()[1].clone(),
        });
    }
    Err(Error::Unsupported(
        "invertibility test needs rational or Gaussian-rational entries".into(),
    ))
}

/// True iff the square matrix is exactly invertible over the Gaussian
/// rationals.
fn exactly_invertible(rows: &[Vec<ExactNumber>]) -> Result<bool> {
    let w = rows.len();
    let mut a: Vec<Vec<GaussQ>> = rows
        .iter()
        .map(|r| r.iter().map(to_gauss_q).collect::<Result<_>>())
        .collect::<Result<_>>()?;
    for col in 0..w {
        let Some(p) = (col..w).find(|&r| !a[r][col].is_zero()) else {
            return Ok(false);
        };
        a.swap(col, p);
        let inv = a[col][col].inv();
        for r in col + 1..w {
            if a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].mul(&inv);
            for c in col..w {
                let s = f.mul(&a[col][c]);
                a[r][c] = a[r][c].sub(&s);
            }
        }
    }
    Ok(true)
}

/// Kronecker enlargement: B = P (x) A for an exactly invertible square P.
/// Injectivity carries over, and the factor is retained so the decoder can
/// split B back into independent sub-problems.
pub fn enlarge_kronecker(factor: &[Vec<ExactNumber>], sub: &GcoMatrix) -> Result<GcoMatrix> {
    let w = factor.len();
    if w == 0 || factor.iter().any(|r| r.len() != w) {
        return Err(Error::InvalidDimension(
            "Kronecker factor must be square and nonempty".into(),
        ));
    }
    if !exactly_invertible(factor)? {
        return Err(Error::Singular("Kronecker factor is singular".into()));
    }
    let m = sub.m();
    let n = sub.n();
    let flat: Vec<ExactNumber> = factor.iter().flatten().cloned().collect();
    let sig_values = crate::exact::product_set(&flat, sub.signature().values())?;
    let signature = Alphabet::new(sig_values)?;
    let basis = signature.basis().clone();
    let out_m = w * m;
    let out_n = w * n;
    let mut entries = vec![ExactNumber::zero(&basis); out_m * out_n];
    for a in 0..w {
        for b in 0..w {
            for r in 0..m {
                for c in 0..n {
                    entries[(a * m + r) * out_n + b * n + c] =
                        factor[a][b].try_mul(sub.entry(r, c))?;
                }
            }
        }
    }
    let mut out = GcoMatrix::new(out_m, out_n, entries, sub.input().clone(), signature)?;
    out.provenance = sub.provenance.clone();
    out.push_provenance(format!(
        "kronecker enlargement by a {w}x{w} factor: ({m},{n}) -> ({out_m},{out_n})"
    ));
    out.verification = match sub.verification {
        Verification::Unverified => Verification::Unverified,
        _ => Verification::ProvenByConstruction,
    };
    out.kron = Some(KronFactor {
        factor: factor.to_vec(),
        sub_m: m,
        sub_n: n,
    });
    if let Some(h0) = &sub.head_cols {
        out.head_cols = Some(
            (0..w)
                .flat_map(|b| h0.iter().map(move |&j| b * n + j))
                .collect(),
        );
    } else if m == n {
        out.head_cols = Some((0..out_n).collect());
    }
    Ok(out)
}

/// Hadamard factor rows as exact entries over the given basis.
pub fn hadamard_factor(order: usize, basis: &Arc<GeneratorBasis>) -> Result<Vec<Vec<ExactNumber>>> {
    let signs = hadamard_signs(order)?;
    Ok(signs
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|v| ExactNumber::from_int(basis, v))
                .collect::<Result<_>>()
        })
        .collect::<Result<_>>()?)
}

#[cfg(test)]
mod tests {
    use super::super::injective::{check_injective, CheckMode, DEFAULT_BUDGET};
    use super::*;
    use num_traits::One;
    use crate::alphabet::presets;

    fn assert_brute_injective(mat: &GcoMatrix) {
        let out = check_injective(mat, CheckMode::Image, DEFAULT_BUDGET).unwrap();
        assert!(out.is_injective(), "constructed matrix failed brute check");
    }

    #[test]
    fn corollary1_small_seed() {
        // H2 is trivially injective over ternary inputs; r=1 grows (2,2) to (8,9).
        let seed = hadamard(2, presets::ternary()).unwrap();
        let out = corollary1(&seed, 1).unwrap();
        assert_eq!((out.m(), out.n()), (8, 9));
        assert_eq!(out.verification, Verification::ProvenByConstruction);
        assert_brute_injective(&out);
    }

    #[test]
    fn corollary1_rejects_small_hadamard() {
        // q=3 needs 4r >= 7.
        let input = Alphabet::integers(&[-3, -2, -1, 0, 1, 2, 3]);
        let seed = hadamard(2, input).unwrap();
        assert!(corollary1(&seed, 1).is_err());
    }

    #[test]
    fn corollary2_small_seed() {
        // H2 viewed over the ternary signature alphabet; w=2, k=2 keeps wk > 2q.
        let sig = Alphabet::integers(&[-1, 0, 1]);
        let h = hadamard(2, presets::ternary()).unwrap();
        let seed = GcoMatrix::from_integer_rows(
            &[vec![1, 1], vec![1, -1]],
            presets::ternary(),
            sig,
        )
        .map(|mut m| {
            m.verification = h.verification.clone();
            m.verification = Verification::ProvenByConstruction;
            m.head_cols = Some(vec![0, 1]);
            m
        })
        .unwrap();
        let out = corollary2(&seed, 2, 2).unwrap();
        assert_eq!((out.m(), out.n()), (4, 6));
        assert_eq!(
            out.signature().integer_values().unwrap(),
            vec![-2, -1, 0, 1, 2]
        );
        assert_brute_injective(&out);
    }

    #[test]
    fn corollary2_rejects_insufficient_gain() {
        let sig = Alphabet::integers(&[-1, 0, 1]);
        let seed = GcoMatrix::from_integer_rows(
            &[vec![1, 1], vec![1, -1]],
            presets::ternary(),
            sig,
        )
        .unwrap();
        assert!(corollary2(&seed, 2, 1).is_err());
    }

    #[test]
    fn append_identity_tail_small() {
        let seed = {
            let mut h = hadamard(2, presets::binary()).unwrap();
            h.head_cols = Some(vec![0, 1]);
            h
        };
        let out = append_identity_tail(&seed).unwrap();
        assert_eq!((out.m(), out.n()), (2, 3));
        assert_brute_injective(&out);
        // Ternary inputs have even differences; the tail must be rejected.
        let tern = hadamard(2, presets::ternary()).unwrap();
        assert!(append_identity_tail(&tern).is_err());
    }

    #[test]
    fn binary_chain_dimensions() {
        let chain = [(2usize, 2usize), (4, 5), (8, 13), (16, 33), (32, 81), (64, 193)];
        for (m, n) in chain {
            let mat = binary_chain(m).unwrap();
            assert_eq!((mat.m(), mat.n()), (m, n), "chain step {m}");
        }
    }

    #[test]
    fn binary_chain_small_steps_brute_verified() {
        for m in [4usize, 8] {
            let mat = binary_chain(m).unwrap();
            assert_brute_injective(&mat);
        }
    }

    #[test]
    fn complex_enlargement_small() {
        let mut h = hadamard(2, presets::binary()).unwrap();
        h.head_cols = Some(vec![0, 1]);
        let xi = ExactNumber::gaussian(BigRational::zero(), BigRational::one());
        let out = construct_complex(&[&h, &h], &[xi]).unwrap();
        assert_eq!((out.m(), out.n()), (2, 5));
        assert_eq!(out.signature().len(), 4);
        assert_brute_injective(&out);
    }

    #[test]
    fn complex_enlargement_rejects_dependent_scalar() {
        let h = hadamard(2, presets::binary()).unwrap();
        let two = ExactNumber::gaussian(
            BigRational::from_integer(2.into()),
            BigRational::zero(),
        );
        assert!(construct_complex(&[&h, &h], &[two]).is_err());
    }

    #[test]
    fn kronecker_matches_hadamard_doubling() {
        let h2 = hadamard(2, presets::binary()).unwrap();
        let factor = hadamard_factor(2, h2.signature().basis()).unwrap();
        let h4 = enlarge_kronecker(&factor, &h2).unwrap();
        let direct = hadamard(4, presets::binary()).unwrap();
        assert_eq!(h4.entries(), direct.entries());
        assert!(h4.kron.is_some());
    }

    #[test]
    fn kronecker_rejects_singular_factor() {
        let h2 = hadamard(2, presets::binary()).unwrap();
        let basis = h2.signature().basis().clone();
        let one = ExactNumber::from_int(&basis, 1).unwrap();
        let factor = vec![vec![one.clone(), one.clone()], vec![one.clone(), one.clone()]];
        assert!(matches!(
            enlarge_kronecker(&factor, &h2),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn kronecker_preserves_injectivity_brute() {
        // 2x3 ternary-input seed, verified by brute force, then doubled.
        // The kernel line is spanned by (1, -3, 2), outside the difference box.
        let rows = vec![vec![1i64, 1, 1], vec![-1, 1, 2]];
        let mut seed = GcoMatrix::from_integer_rows(
            &rows,
            presets::ternary(),
            Alphabet::integers(&[-1, 1, 2]),
        )
        .unwrap();
        let verdict = check_injective(&seed, CheckMode::Image, DEFAULT_BUDGET).unwrap();
        assert!(verdict.is_injective());
        seed.verification = Verification::Verified {
            mode: CheckMode::Image,
            evaluations: 27,
        };
        let factor = hadamard_factor(2, seed.signature().basis()).unwrap();
        let out = enlarge_kronecker(&factor, &seed).unwrap();
        assert_eq!((out.m(), out.n()), (4, 6));
        assert_brute_injective(&out);
    }
}
