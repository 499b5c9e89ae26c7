//! Maximum-likelihood decoding of overloaded signature codes.
//!
//! Three decoders share one metric. The exhaustive decoder scores every input
//! vector and is the oracle the others are tested against. The tail search
//! exploits an invertible m-column head: it enumerates only the |I|^(n-m) tail
//! assignments and recovers the head by quantized back-substitution, which is
//! exact ML whenever the head is scaled-unitary. The Kronecker decoder splits
//! an enlarged matrix into independent sub-problems.
//!
//! All decoders break distance ties toward the lexicographically smallest
//! candidate (by symbol index), so results are reproducible and independent
//! of enumeration order. `PreparedDecoder` front-loads the per-matrix work
//! (float conversion, LU factorization, pre-solved tail columns) so that a
//! simulation can decode many received words against one setup.

use crate::error::{Error, Result};
use crate::matrix::{GcoMatrix, GrayWalk};
use crate::numerics::linalg::{lu_decompose, scaled_unitary_constant, CMat, Lu};
use num_complex::Complex64;

/// A received word together with the matrix that produced it. `y` is assumed
/// to already carry the transmit scaling, i.e. y = scale * A x + noise.
pub struct DecodeProblem<'a> {
    pub matrix: &'a GcoMatrix,
    pub y: Vec<Complex64>,
    pub scale: f64,
}

/// Which decoding algorithm to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecoderKind {
    Exhaustive,
    Tail,
    Kron,
}

impl std::fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DecoderKind::Exhaustive => "exhaustive",
            DecoderKind::Tail => "tail",
            DecoderKind::Kron => "kron",
        })
    }
}

impl std::str::FromStr for DecoderKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(DecoderKind::Exhaustive),
            "tail" => Ok(DecoderKind::Tail),
            "kron" => Ok(DecoderKind::Kron),
            other => Err(Error::Parse(format!("unknown decoder `{other}`"))),
        }
    }
}

/// Decoder output. `x_hat` holds indices into the input alphabet's declared
/// order; `heuristic` is set when optimality is not guaranteed (non-unitary
/// head, or a Kronecker factor that is not scaled-orthogonal).
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub x_hat: Vec<usize>,
    pub distance: f64,
    pub metric_evaluations: u128,
    pub heuristic: bool,
}

impl DecodeResult {
    /// Materialize the decoded symbols as complex values.
    pub fn symbols(&self, mat: &GcoMatrix) -> Vec<Complex64> {
        let vals = mat.input().values();
        self.x_hat.iter().map(|&k| vals[k].approx()).collect()
    }
}

fn alphabet_symbols(mat: &GcoMatrix) -> Result<Vec<Complex64>> {
    let symbols: Vec<Complex64> = mat.input().values().iter().map(|v| v.approx()).collect();
    if symbols.len() < 2 {
        return Err(Error::InvalidAlphabet(
            "decoding needs at least two input symbols".into(),
        ));
    }
    Ok(symbols)
}

fn norm_sq(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Head columns to decode through: the matrix's declared head if it has one,
/// otherwise greedy max-|det| column pivoting (modified Gram-Schmidt, largest
/// residual first). Returned ascending.
pub fn default_head(mat: &GcoMatrix) -> Result<Vec<usize>> {
    if let Some(h) = &mat.head_cols {
        if h.len() == mat.m() {
            return Ok(h.clone());
        }
    }
    greedy_head_from(&mat.to_cmat())
}

/// A decoder with all per-matrix work done up front. Reusable across received
/// words and safe to share between threads.
pub struct PreparedDecoder {
    m: usize,
    n: usize,
    symbols: Vec<Complex64>,
    inner: Prepared,
}

enum Prepared {
    Exhaustive {
        cols: Vec<Vec<Complex64>>,
    },
    Tail(TailEngine),
    Kron {
        p_inv: CMat,
        p_unitary: bool,
        w: usize,
        sub_m: usize,
        sub_n: usize,
        engine: TailEngine,
        full_cols: Vec<Vec<Complex64>>,
    },
}

impl PreparedDecoder {
    /// Prepare `kind` for `mat`. The tail decoder uses [`default_head`].
    pub fn new(mat: &GcoMatrix, kind: DecoderKind) -> Result<Self> {
        match kind {
            DecoderKind::Exhaustive => {
                let symbols = alphabet_symbols(mat)?;
                let a = mat.to_cmat();
                let cols = (0..mat.n()).map(|j| a.column(j)).collect();
                Ok(PreparedDecoder {
                    m: mat.m(),
                    n: mat.n(),
                    symbols,
                    inner: Prepared::Exhaustive { cols },
                })
            }
            DecoderKind::Tail => {
                let head = default_head(mat)?;
                Self::with_head(mat, &head)
            }
            DecoderKind::Kron => Self::new_kron(mat),
        }
    }

    /// Prepare the tail-search decoder with an explicit head column set.
    pub fn with_head(mat: &GcoMatrix, head_cols: &[usize]) -> Result<Self> {
        let symbols = alphabet_symbols(mat)?;
        let (m, n) = (mat.m(), mat.n());
        if head_cols.len() != m {
            return Err(Error::InvalidDimension(format!(
                "head needs exactly {m} columns, got {}",
                head_cols.len()
            )));
        }
        let mut seen = vec![false; n];
        for &c in head_cols {
            if c >= n || seen[c] {
                return Err(Error::InvalidDimension(format!(
                    "bad head column index {c}"
                )));
            }
            seen[c] = true;
        }
        let tail_pos: Vec<usize> = (0..n).filter(|c| !seen[*c]).collect();
        let a = mat.to_cmat();
        let head_mat = mat.to_cmat_cols(head_cols);
        let tail_cols: Vec<Vec<Complex64>> = tail_pos.iter().map(|&c| a.column(c)).collect();
        let engine = TailEngine::new(
            head_mat,
            tail_cols,
            head_cols.to_vec(),
            tail_pos,
            symbols.clone(),
        )?;
        Ok(PreparedDecoder {
            m,
            n,
            symbols,
            inner: Prepared::Tail(engine),
        })
    }

    fn new_kron(mat: &GcoMatrix) -> Result<Self> {
        let symbols = alphabet_symbols(mat)?;
        let (m, n) = (mat.m(), mat.n());
        let kron = mat
            .kron
            .as_ref()
            .ok_or_else(|| Error::Unsupported("matrix carries no Kronecker factorization".into()))?;
        let w = kron.factor.len();
        let (sub_m, sub_n) = (kron.sub_m, kron.sub_n);
        debug_assert_eq!((m, n), (w * sub_m, w * sub_n));

        let mut pf = CMat::zeros(w, w);
        for (i, row) in kron.factor.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                *pf.at_mut(i, j) = v.approx();
            }
        }
        let lu = lu_decompose(&pf).map_err(|_| Error::Singular("Kronecker factor".into()))?;
        let p_inv = lu.inverse();
        let p_unitary = scaled_unitary_constant(&pf, 1e-9).is_some();

        // Recover the sub-matrix from any block with a nonzero factor entry.
        let (bi, bj) = kron
            .factor
            .iter()
            .enumerate()
            .find_map(|(i, row)| row.iter().position(|v| !v.is_zero()).map(|j| (i, j)))
            .ok_or_else(|| Error::Singular("Kronecker factor is zero".into()))?;
        let pivot = pf.at(bi, bj);
        let mut sub = CMat::zeros(sub_m, sub_n);
        for r in 0..sub_m {
            for c in 0..sub_n {
                *sub.at_mut(r, c) = mat.entry(bi * sub_m + r, bj * sub_n + c).approx() / pivot;
            }
        }

        // Head for the sub-problem: restrict the enlarged head if it is block
        // shaped, otherwise pick one greedily from the sub-matrix itself.
        let sub_head: Vec<usize> = match &mat.head_cols {
            Some(h) => {
                let local: Vec<usize> = h.iter().filter(|&&c| c < sub_n).copied().collect();
                if local.len() == sub_m {
                    local
                } else {
                    greedy_head_from(&sub)?
                }
            }
            None => greedy_head_from(&sub)?,
        };
        let tail_pos: Vec<usize> = (0..sub_n).filter(|c| !sub_head.contains(c)).collect();
        let mut head_mat = CMat::zeros(sub_m, sub_m);
        for (k, &c) in sub_head.iter().enumerate() {
            for r in 0..sub_m {
                *head_mat.at_mut(r, k) = sub.at(r, c);
            }
        }
        let tail_cols: Vec<Vec<Complex64>> = tail_pos.iter().map(|&c| sub.column(c)).collect();
        let engine = TailEngine::new(head_mat, tail_cols, sub_head, tail_pos, symbols.clone())?;

        let a = mat.to_cmat();
        let full_cols = (0..n).map(|j| a.column(j)).collect();
        Ok(PreparedDecoder {
            m,
            n,
            symbols,
            inner: Prepared::Kron {
                p_inv,
                p_unitary,
                w,
                sub_m,
                sub_n,
                engine,
                full_cols,
            },
        })
    }

    /// Decode one received word; `y` must carry the transmit scaling already.
    pub fn decode(&self, y: &[Complex64], scale: f64, budget: u128) -> Result<DecodeResult> {
        if y.len() != self.m {
            return Err(Error::InvalidDimension(format!(
                "received word length {} does not match m = {}",
                y.len(),
                self.m
            )));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::Numerical("decode scale must be positive".into()));
        }
        match &self.inner {
            Prepared::Exhaustive { cols } => self.decode_exhaustive_inner(cols, y, scale, budget),
            Prepared::Tail(engine) => {
                let (x_hat, distance, metric_evaluations, heuristic) = engine.run(y, scale);
                Ok(DecodeResult {
                    x_hat,
                    distance,
                    metric_evaluations,
                    heuristic,
                })
            }
            Prepared::Kron {
                p_inv,
                p_unitary,
                w,
                sub_m,
                sub_n,
                engine,
                full_cols,
            } => {
                let mut x_hat = vec![0usize; self.n];
                let mut evaluations: u128 = 0;
                let mut heuristic = !p_unitary;
                let mut yb = vec![Complex64::default(); *sub_m];
                for b in 0..*w {
                    // Block b of (P^-1 (x) I) y.
                    yb.fill(Complex64::default());
                    for src in 0..*w {
                        let coef = p_inv.at(b, src);
                        for (i, v) in yb.iter_mut().enumerate() {
                            *v += coef * y[src * sub_m + i];
                        }
                    }
                    let (xb, _, ev, h) = engine.run(&yb, scale);
                    evaluations += ev;
                    heuristic |= h;
                    for (j, &k) in xb.iter().enumerate() {
                        x_hat[b * sub_n + j] = k;
                    }
                }

                // Final metric in the original frame.
                let mut resid = y.to_vec();
                for (c, &k) in x_hat.iter().enumerate() {
                    let s = self.symbols[k] * scale;
                    for (ri, ci) in resid.iter_mut().zip(&full_cols[c]) {
                        *ri -= ci * s;
                    }
                }
                Ok(DecodeResult {
                    x_hat,
                    distance: norm_sq(&resid),
                    metric_evaluations: evaluations,
                    heuristic,
                })
            }
        }
    }

    fn decode_exhaustive_inner(
        &self,
        cols: &[Vec<Complex64>],
        y: &[Complex64],
        scale: f64,
        budget: u128,
    ) -> Result<DecodeResult> {
        let (n, q) = (self.n, self.symbols.len());
        let total = (q as u128)
            .checked_pow(n as u32)
            .filter(|t| *t <= budget)
            .ok_or(Error::BudgetExceeded {
                needed: (q as u128).checked_pow(n as u32).unwrap_or(u128::MAX),
                budget,
            })?;

        // The residual is updated incrementally along a Gray walk.
        let mut digits = vec![0usize; n];
        let mut resid: Vec<Complex64> = y.to_vec();
        let s0 = self.symbols[0] * scale;
        for col in cols {
            for (ri, ci) in resid.iter_mut().zip(col) {
                *ri -= ci * s0;
            }
        }
        let mut best_d = norm_sq(&resid);
        let mut best_x = digits.clone();
        let mut walk = GrayWalk::new(n, q);
        let mut evaluations: u128 = 1;
        while let Some((j, old, new)) = walk.step() {
            let delta = (self.symbols[old] - self.symbols[new]) * scale;
            for (ri, ci) in resid.iter_mut().zip(&cols[j]) {
                *ri += ci * delta;
            }
            digits[j] = new;
            evaluations += 1;
            let d = norm_sq(&resid);
            if d < best_d || (d == best_d && digits < best_x) {
                best_d = d;
                best_x = digits.clone();
            }
        }
        debug_assert_eq!(evaluations, total);
        Ok(DecodeResult {
            x_hat: best_x,
            distance: best_d,
            metric_evaluations: evaluations,
            heuristic: false,
        })
    }
}

/// Score every candidate in I^n; the reference ML decoder.
pub fn decode_exhaustive(p: &DecodeProblem, budget: u128) -> Result<DecodeResult> {
    PreparedDecoder::new(p.matrix, DecoderKind::Exhaustive)?.decode(&p.y, p.scale, budget)
}

/// Reduced-complexity ML through an invertible head: |I|^(n-m) candidate
/// scorings instead of |I|^n. Exact ML when the head is scaled-unitary;
/// otherwise the result is flagged heuristic.
pub fn decode_tail_search(p: &DecodeProblem, head_cols: &[usize]) -> Result<DecodeResult> {
    PreparedDecoder::with_head(p.matrix, head_cols)?.decode(&p.y, p.scale, u128::MAX)
}

/// Decode a Kronecker enlargement P (x) C by transforming with P^-1 (x) I and
/// solving the per-block C problems independently. Exact ML when P is
/// scaled-orthogonal and the sub-decoder is exact.
pub fn decode_kron(p: &DecodeProblem) -> Result<DecodeResult> {
    PreparedDecoder::new(p.matrix, DecoderKind::Kron)?.decode(&p.y, p.scale, u128::MAX)
}

/// Tail-search engine over float data, shared by the public decoder and the
/// Kronecker reduction. `head_pos`/`tail_pos` give the candidate positions
/// (within an n-vector) of the head and tail columns. The head LU and the
/// pre-solved tail columns are computed once at construction.
struct TailEngine {
    head_cols: CMat,
    tail_cols: Vec<Vec<Complex64>>,
    head_pos: Vec<usize>,
    tail_pos: Vec<usize>,
    symbols: Vec<Complex64>,
    lu: Lu,
    vt: Vec<Vec<Complex64>>,
    unitary: Option<f64>,
}

impl TailEngine {
    fn new(
        head_cols: CMat,
        tail_cols: Vec<Vec<Complex64>>,
        head_pos: Vec<usize>,
        tail_pos: Vec<usize>,
        symbols: Vec<Complex64>,
    ) -> Result<Self> {
        let lu = lu_decompose(&head_cols)
            .map_err(|_| Error::Singular("head submatrix is singular".into()))?;
        let unitary = scaled_unitary_constant(&head_cols, 1e-9);
        let vt = tail_cols.iter().map(|c| lu.solve(c)).collect();
        Ok(TailEngine {
            head_cols,
            tail_cols,
            head_pos,
            tail_pos,
            symbols,
            lu,
            vt,
            unitary,
        })
    }

    fn run(&self, y: &[Complex64], scale: f64) -> (Vec<usize>, f64, u128, bool) {
        let m = self.head_pos.len();
        let n = m + self.tail_pos.len();
        let q = self.symbols.len();
        let nt = self.tail_pos.len();
        let s2 = scale * scale;

        // Work in the pre-scaled frame y' = y / scale, so candidates score as
        // scale^2 * ||y' - A x||^2 = scale^2 * ||w - U x_h||^2.
        let yp: Vec<Complex64> = y.iter().map(|z| z / scale).collect();
        let mut w = yp.clone();
        let mut z = self.lu.solve(&yp);
        for j in 0..nt {
            for i in 0..m {
                w[i] -= self.tail_cols[j][i] * self.symbols[0];
                z[i] -= self.vt[j][i] * self.symbols[0];
            }
        }

        let quantize = |zi: Complex64| -> usize {
            let mut k = 0usize;
            let mut best = (zi - self.symbols[0]).norm_sqr();
            for (idx, s) in self.symbols.iter().enumerate().skip(1) {
                let d = (zi - s).norm_sqr();
                if d < best {
                    best = d;
                    k = idx;
                }
            }
            k
        };
        let mut digits = vec![0usize; nt];
        let mut best_d = f64::INFINITY;
        let mut best_x: Vec<usize> = Vec::new();
        let mut evaluations: u128 = 0;
        let mut scratch = vec![Complex64::default(); m];
        let mut head = vec![0usize; m];

        let mut consider = |digits: &[usize],
                            w: &[Complex64],
                            z: &[Complex64],
                            head: &mut Vec<usize>,
                            best_d: &mut f64,
                            best_x: &mut Vec<usize>| {
            for (h, &zi) in head.iter_mut().zip(z) {
                *h = quantize(zi);
            }
            let d = if let Some(c) = self.unitary {
                let e: f64 = z
                    .iter()
                    .zip(head.iter())
                    .map(|(zi, &k)| (zi - self.symbols[k]).norm_sqr())
                    .sum();
                s2 * c * e
            } else {
                for (i, sc) in scratch.iter_mut().enumerate() {
                    let mut acc = w[i];
                    for (j, &k) in head.iter().enumerate() {
                        acc -= self.head_cols.at(i, j) * self.symbols[k];
                    }
                    *sc = acc;
                }
                s2 * norm_sq(&scratch)
            };
            if d < *best_d {
                *best_d = d;
                *best_x = assemble(n, &self.head_pos, head, &self.tail_pos, digits);
            } else if d == *best_d {
                let cand = assemble(n, &self.head_pos, head, &self.tail_pos, digits);
                if cand < *best_x {
                    *best_x = cand;
                }
            }
        };

        evaluations += 1;
        consider(&digits, &w, &z, &mut head, &mut best_d, &mut best_x);
        if nt > 0 {
            let mut walk = GrayWalk::new(nt, q);
            while let Some((j, old, new)) = walk.step() {
                let delta = self.symbols[old] - self.symbols[new];
                for i in 0..m {
                    w[i] += self.tail_cols[j][i] * delta;
                    z[i] += self.vt[j][i] * delta;
                }
                digits[j] = new;
                evaluations += 1;
                consider(&digits, &w, &z, &mut head, &mut best_d, &mut best_x);
            }
        }
        debug_assert_eq!(evaluations, (q as u128).pow(nt as u32));
        (best_x, best_d, evaluations, self.unitary.is_none())
    }
}

fn assemble(
    n: usize,
    head_pos: &[usize],
    head: &[usize],
    tail_pos: &[usize],
    tail: &[usize],
) -> Vec<usize> {
    let mut x = vec![0usize; n];
    for (i, &pos) in head_pos.iter().enumerate() {
        x[pos] = head[i];
    }
    for (j, &pos) in tail_pos.iter().enumerate() {
        x[pos] = tail[j];
    }
    x
}

fn greedy_head_from(a: &CMat) -> Result<Vec<usize>> {
    let (m, n) = (a.rows, a.cols);
    let mut cols: Vec<Vec<Complex64>> = (0..n).map(|j| a.column(j)).collect();
    let mut r2: Vec<f64> = cols.iter().map(|c| norm_sq(c)).collect();
    let scale0 = r2.iter().cloned().fold(0.0f64, f64::max).max(1.0);
    let mut chosen = Vec::with_capacity(m);
    for _ in 0..m {
        let (j, &best) = r2
            .iter()
            .enumerate()
            .filter(|(j, _)| !chosen.contains(j))
            .max_by(|a, b| a.1.total_cmp(b.1))
            .ok_or_else(|| Error::Singular("no head candidates".into()))?;
        if best <= 1e-18 * scale0 {
            return Err(Error::Singular("sub-matrix head is singular".into()));
        }
        chosen.push(j);
        let nrm = best.sqrt();
        let qcol: Vec<Complex64> = cols[j].iter().map(|z| z / nrm).collect();
        for k in 0..n {
            if chosen.contains(&k) {
                continue;
            }
            let proj: Complex64 = qcol.iter().zip(&cols[k]).map(|(a, b)| a.conj() * b).sum();
            for (ci, qi) in cols[k].iter_mut().zip(&qcol) {
                *ci -= proj * qi;
            }
            r2[k] = norm_sq(&cols[k]);
        }
    }
    chosen.sort_unstable();
    Ok(chosen)
}
