//! Exact arithmetic for matrix entries and alphabet symbols.
//!
//! Every symbol is a rational coordinate vector over a [`GeneratorBasis`]: a
//! small list of complex generators assumed linearly independent over the
//! rationals. Two modes exist:
//!
//! * cyclotomic bases (power basis of a primitive root of unity), where
//!   products are always closed and computed by polynomial reduction; the
//!   order-4 basis `{1, i}` is the default and covers all rational and
//!   Gaussian-rational alphabets;
//! * symbolic bases (declared generators with float approximations and an
//!   optional product table), where a product that cannot be expressed in the
//!   basis is a hard error rather than a silent float fallback.
//!
//! Equality, ordering, and rank computations are exact; floats appear only in
//! the read-only `approx` views.

use std::cmp::Ordering;
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Product rule attached to a basis.
#[derive(Debug, Clone, PartialEq)]
pub enum BasisKind {
    /// Power basis `{1, z, ..., z^(phi-1)}` of a primitive `order`-th root of
    /// unity `z`; `modulus` is the monic minimal polynomial, ascending
    /// coefficients, length `phi + 1`.
    Cyclotomic { order: u32, modulus: Vec<BigRational> },
    /// Declared generators. `table[i][j]`, when present, holds the coordinates
    /// of `g_i * g_j`; a missing entry makes that product an error.
    Symbolic {
        table: Option<Vec<Vec<Option<Vec<BigRational>>>>>,
    },
}

#[derive(Debug, Clone)]
pub struct GeneratorBasis {
    labels: Vec<String>,
    approx: Vec<Complex64>,
    /// Index of a generator exactly equal to rational 1, if any.
    unit_index: Option<usize>,
    kind: BasisKind,
}

impl PartialEq for GeneratorBasis {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels && self.kind == other.kind
    }
}

impl GeneratorBasis {
    /// The shared order-4 cyclotomic basis `{1, i}`. Rational numbers live in
    /// coordinate 0; this is the default basis throughout the crate.
    pub fn gaussian() -> Arc<GeneratorBasis> {
        static BASIS: OnceLock<Arc<GeneratorBasis>> = OnceLock::new();
        BASIS
            .get_or_init(|| GeneratorBasis::cyclotomic(4).expect("order 4 basis"))
            .clone()
    }

    /// Power basis of the primitive `order`-th root of unity
    /// `exp(2*pi*i/order)`. Dimension is Euler's phi of the order.
    pub fn cyclotomic(order: u32) -> Result<Arc<GeneratorBasis>> {
        if order == 0 {
            return Err(Error::InvalidDimension("cyclotomic order must be >= 1".into()));
        }
        let modulus_int = cyclotomic_poly(order);
        let phi = modulus_int.len() - 1;
        let modulus: Vec<BigRational> = modulus_int.iter().map(|c| BigRational::from(c.clone())).collect();
        let mut labels = Vec::with_capacity(phi);
        let mut approx = Vec::with_capacity(phi);
        for t in 0..phi {
            labels.push(match (order, t) {
                (_, 0) => "1".to_string(),
                (4, 1) => "i".to_string(),
                _ => format!("z{}^{}", order, t),
            });
            let angle = 2.0 * std::f64::consts::PI * (t as f64) / (order as f64);
            approx.push(Complex64::new(angle.cos(), angle.sin()));
        }
        Ok(Arc::new(GeneratorBasis {
            labels,
            approx,
            unit_index: Some(0),
            kind: BasisKind::Cyclotomic { order, modulus },
        }))
    }

    /// Declared generator set. `unit_index` marks a generator exactly equal to
    /// 1 (enables rational scalar extraction); `table` enables products.
    pub fn symbolic(
        labels: Vec<String>,
        approx: Vec<Complex64>,
        unit_index: Option<usize>,
        table: Option<Vec<Vec<Option<Vec<BigRational>>>>>,
    ) -> Result<Arc<GeneratorBasis>> {
        if labels.is_empty() || labels.len() != approx.len() {
            return Err(Error::InvalidDimension(
                "symbolic basis needs matching non-empty labels and approximations".into(),
            ));
        }
        if let Some(u) = unit_index {
            if u >= labels.len() {
                return Err(Error::InvalidDimension("unit index out of range".into()));
            }
        }
        if let Some(t) = &table {
            let dim = labels.len();
            if t.len() != dim || t.iter().any(|row| row.len() != dim) {
                return Err(Error::InvalidDimension("product table must be square".into()));
            }
            for row in t {
                for entry in row.iter().flatten() {
                    if entry.len() != dim {
                        return Err(Error::InvalidDimension(
                            "product table entry has wrong coordinate count".into(),
                        ));
                    }
                }
            }
        }
        Ok(Arc::new(GeneratorBasis {
            labels,
            approx,
            unit_index,
            kind: BasisKind::Symbolic { table },
        }))
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn approx(&self) -> &[Complex64] {
        &self.approx
    }

    pub fn unit_index(&self) -> Option<usize> {
        self.unit_index
    }

    pub fn kind(&self) -> &BasisKind {
        &self.kind
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(&self.kind, BasisKind::Cyclotomic { order: 4, .. })
    }
}

pub fn same_basis(a: &Arc<GeneratorBasis>, b: &Arc<GeneratorBasis>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// Exact number: rational coordinates over a shared basis.
#[derive(Debug, Clone)]
pub struct ExactNumber {
    basis: Arc<GeneratorBasis>,
    coords: Vec<BigRational>,
}

impl ExactNumber {
    pub fn zero(basis: &Arc<GeneratorBasis>) -> Self {
        ExactNumber {
            basis: basis.clone(),
            coords: vec![BigRational::zero(); basis.dim()],
        }
    }

    pub fn from_coords(basis: &Arc<GeneratorBasis>, coords: Vec<BigRational>) -> Result<Self> {
        if coords.len() != basis.dim() {
            return Err(Error::InvalidDimension(format!(
                "expected {} coordinates, got {}",
                basis.dim(),
                coords.len()
            )));
        }
        Ok(ExactNumber {
            basis: basis.clone(),
            coords,
        })
    }

    pub fn from_rational(basis: &Arc<GeneratorBasis>, r: BigRational) -> Result<Self> {
        if r.is_zero() {
            return Ok(Self::zero(basis));
        }
        let u = basis.unit_index().ok_or_else(|| {
            Error::BasisMismatch("basis has no rational unit generator".into())
        })?;
        let mut coords = vec![BigRational::zero(); basis.dim()];
        coords[u] = r;
        Ok(ExactNumber {
            basis: basis.clone(),
            coords,
        })
    }

    pub fn from_int(basis: &Arc<GeneratorBasis>, v: i64) -> Result<Self> {
        Self::from_rational(basis, BigRational::from(BigInt::from(v)))
    }

    /// Gaussian rational `re + im*i` on the shared order-4 basis.
    pub fn gaussian(re: BigRational, im: BigRational) -> Self {
        ExactNumber {
            basis: GeneratorBasis::gaussian(),
            coords: vec![re, im],
        }
    }

    pub fn int(v: i64) -> Self {
        Self::gaussian(BigRational::from(BigInt::from(v)), BigRational::zero())
    }

    pub fn rational(num: i64, den: i64) -> Self {
        Self::gaussian(
            BigRational::new(BigInt::from(num), BigInt::from(den)),
            BigRational::zero(),
        )
    }

    pub fn basis(&self) -> &Arc<GeneratorBasis> {
        &self.basis
    }

    pub fn coords(&self) -> &[BigRational] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    /// Rational value if this number lies on the unit generator (or is zero).
    pub fn to_rational(&self) -> Option<BigRational> {
        if self.is_zero() {
            return Some(BigRational::zero());
        }
        let u = self.basis.unit_index()?;
        for (t, c) in self.coords.iter().enumerate() {
            if t != u && !c.is_zero() {
                return None;
            }
        }
        Some(self.coords[u].clone())
    }

    pub fn to_i64(&self) -> Option<i64> {
        let r = self.to_rational()?;
        if !r.is_integer() {
            return None;
        }
        r.to_integer().to_i64()
    }

    pub fn approx(&self) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (c, g) in self.coords.iter().zip(self.basis.approx()) {
            acc += g * c.to_f64().unwrap_or(f64::NAN);
        }
        acc
    }

    fn assert_same_basis(&self, other: &Self) {
        assert!(
            same_basis(&self.basis, &other.basis),
            "exact numbers from different bases combined"
        );
    }

    pub fn add(&self, other: &Self) -> Self {
        self.assert_same_basis(other);
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a + b)
            .collect();
        ExactNumber {
            basis: self.basis.clone(),
            coords,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.assert_same_basis(other);
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a - b)
            .collect();
        ExactNumber {
            basis: self.basis.clone(),
            coords,
        }
    }

    pub fn neg(&self) -> Self {
        ExactNumber {
            basis: self.basis.clone(),
            coords: self.coords.iter().map(|c| -c).collect(),
        }
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        ExactNumber {
            basis: self.basis.clone(),
            coords: self.coords.iter().map(|c| c * r).collect(),
        }
    }

    /// Exact product. Rational scalars multiply into any basis; otherwise the
    /// basis product rule must express the result.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        if let Some(r) = self.to_rational() {
            return Ok(other.scale(&r));
        }
        if let Some(r) = other.to_rational() {
            return Ok(self.scale(&r));
        }
        if !same_basis(&self.basis, &other.basis) {
            return Err(Error::BasisMismatch(format!(
                "cannot multiply values over bases {:?} and {:?}",
                self.basis.labels(),
                other.basis.labels()
            )));
        }
        match self.basis.kind() {
            BasisKind::Cyclotomic { modulus, .. } => {
                let conv = poly_mul(&self.coords, &other.coords);
                let red = poly_reduce(conv, modulus);
                Ok(ExactNumber {
                    basis: self.basis.clone(),
                    coords: red,
                })
            }
            BasisKind::Symbolic { table } => {
                let table = table.as_ref().ok_or_else(|| {
                    Error::ProductNotClosed(format!(
                        "basis {:?} declares no product table",
                        self.basis.labels()
                    ))
                })?;
                let dim = self.basis.dim();
                let mut coords = vec![BigRational::zero(); dim];
                for (i, a) in self.coords.iter().enumerate() {
                    if a.is_zero() {
                        continue;
                    }
                    for (j, b) in other.coords.iter().enumerate() {
                        if b.is_zero() {
                            continue;
                        }
                        let prod = table[i][j].as_ref().ok_or_else(|| {
                            Error::ProductNotClosed(format!(
                                "product {} * {} not expressible in basis",
                                self.basis.labels()[i],
                                self.basis.labels()[j]
                            ))
                        })?;
                        let ab = a * b;
                        for (k, p) in prod.iter().enumerate() {
                            if !p.is_zero() {
                                coords[k] += p * &ab;
                            }
                        }
                    }
                }
                Ok(ExactNumber {
                    basis: self.basis.clone(),
                    coords,
                })
            }
        }
    }

    /// Complex conjugate. Exact for cyclotomic bases (z -> z^(order-1) power
    /// reduction); errors for symbolic bases without a real-axis structure.
    pub fn conj(&self) -> Result<Self> {
        match self.basis.kind() {
            BasisKind::Cyclotomic { order, modulus } => {
                let phi = self.basis.dim();
                // conj(z^t) = z^(order - t); reduce each power separately.
                let mut acc = vec![BigRational::zero(); phi];
                for (t, c) in self.coords.iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    let p = ((*order as usize) - t) % (*order as usize);
                    let mono = power_coords(p, modulus);
                    for (k, m) in mono.iter().enumerate() {
                        if !m.is_zero() {
                            acc[k] += m * c;
                        }
                    }
                }
                Ok(ExactNumber {
                    basis: self.basis.clone(),
                    coords: acc,
                })
            }
            BasisKind::Symbolic { .. } => {
                if self.to_rational().is_some() {
                    Ok(self.clone())
                } else {
                    Err(Error::Unsupported(
                        "conjugation undefined for symbolic basis values".into(),
                    ))
                }
            }
        }
    }
}

impl PartialEq for ExactNumber {
    fn eq(&self, other: &Self) -> bool {
        self.assert_same_basis(other);
        self.coords == other.coords
    }
}

impl Eq for ExactNumber {}

impl PartialOrd for ExactNumber {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExactNumber {
    // Lexicographic on coordinates: arbitrary but total and deterministic,
    // which is all the map-keyed convolutions need.
    fn cmp(&self, other: &Self) -> Ordering {
        self.assert_same_basis(other);
        self.coords.cmp(&other.coords)
    }
}

impl fmt::Display for ExactNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.basis.is_gaussian() {
            let re = &self.coords[0];
            let im = &self.coords[1];
            if im.is_zero() {
                return write!(f, "{}", re);
            }
            if re.is_zero() {
                return write!(f, "{}i", im);
            }
            return if im.is_positive() {
                write!(f, "{}+{}i", re, im)
            } else {
                write!(f, "{}{}i", re, im)
            };
        }
        let mut first = true;
        for (t, c) in self.coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            write!(f, "{}*{}", c, self.basis.labels()[t])?;
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Rank over the rationals of the coordinate vectors of `values`.
pub fn rational_rank(values: &[ExactNumber]) -> usize {
    if values.is_empty() {
        return 0;
    }
    let dim = values[0].basis.dim();
    let mut rows: Vec<Vec<BigRational>> = values
        .iter()
        .map(|v| {
            values[0].assert_same_basis(v);
            v.coords.clone()
        })
        .collect();
    let mut rank = 0usize;
    for col in 0..dim {
        let pivot = (rank..rows.len()).find(|&r| !rows[r][col].is_zero());
        let Some(p) = pivot else { continue };
        rows.swap(rank, p);
        let inv = rows[rank][col].recip();
        for c in col..dim {
            let v = &rows[rank][c] * &inv;
            rows[rank][c] = v;
        }
        for r in 0..rows.len() {
            if r != rank && !rows[r][col].is_zero() {
                let factor = rows[r][col].clone();
                for c in col..dim {
                    let v = &rows[r][c] - &rows[rank][c] * &factor;
                    rows[r][c] = v;
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// Sorted, deduplicated set of all pairwise products.
pub fn product_set(xs: &[ExactNumber], ys: &[ExactNumber]) -> Result<Vec<ExactNumber>> {
    let mut out: Vec<ExactNumber> = Vec::new();
    for x in xs {
        for y in ys {
            out.push(x.try_mul(y)?);
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Coordinates of `z^p` in the power basis, `p` unrestricted.
fn power_coords(p: usize, modulus: &[BigRational]) -> Vec<BigRational> {
    let mut coords = vec![BigRational::zero(); p + 1];
    coords[p] = BigRational::one();
    poly_reduce(coords, modulus)
}

fn poly_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            if !bj.is_zero() {
                out[i + j] += ai * bj;
            }
        }
    }
    out
}

/// Remainder of `poly` modulo the monic `modulus`, truncated to its degree.
fn poly_reduce(mut poly: Vec<BigRational>, modulus: &[BigRational]) -> Vec<BigRational> {
    let phi = modulus.len() - 1;
    let mut deg = poly.len();
    while deg > phi {
        deg -= 1;
        let c = std::mem::replace(&mut poly[deg], BigRational::zero());
        if c.is_zero() {
            continue;
        }
        for t in 0..phi {
            if !modulus[t].is_zero() {
                let v = &poly[deg - phi + t] - &modulus[t] * &c;
                poly[deg - phi + t] = v;
            }
        }
    }
    poly.resize(phi, BigRational::zero());
    poly
}

/// Monic cyclotomic polynomial of the given order, ascending integer
/// coefficients: divide x^n - 1 by all lower-order cyclotomic factors.
fn cyclotomic_poly(order: u32) -> Vec<BigInt> {
    let n = order as usize;
    let mut poly: Vec<BigInt> = vec![BigInt::zero(); n + 1];
    poly[0] = BigInt::from(-1);
    poly[n] = BigInt::one();
    for d in 1..n {
        if n % d == 0 {
            let fac = cyclotomic_poly(d as u32);
            poly = int_poly_div_exact(&poly, &fac);
        }
    }
    poly
}

/// Exact division of integer polynomials (ascending coefficients), panics on
/// nonzero remainder; divisor must be monic.
fn int_poly_div_exact(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    assert!(den.last().map(|c| c == &BigInt::one()).unwrap_or(false));
    let mut rem: Vec<BigInt> = num.to_vec();
    let dn = den.len() - 1;
    let qn = rem.len() - 1 - dn;
    let mut quot = vec![BigInt::zero(); qn + 1];
    for k in (0..=qn).rev() {
        let c = rem[k + dn].clone();
        quot[k] = c.clone();
        if c.is_zero() {
            continue;
        }
        for t in 0..=dn {
            rem[k + t] -= &den[t] * &c;
        }
    }
    assert!(rem.iter().all(|c| c.is_zero()), "non-exact polynomial division");
    quot
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn gaussian_products() {
        let a = ExactNumber::gaussian(rat(1, 1), rat(1, 1)); // 1 + i
        let b = ExactNumber::gaussian(rat(1, 1), rat(-1, 1)); // 1 - i
        let p = a.try_mul(&b).unwrap();
        assert_eq!(p, ExactNumber::int(2));

        let i = ExactNumber::gaussian(rat(0, 1), rat(1, 1));
        let i2 = i.try_mul(&i).unwrap();
        assert_eq!(i2, ExactNumber::int(-1));
        let i4 = i2.try_mul(&i2).unwrap();
        assert_eq!(i4, ExactNumber::int(1));
    }

    #[test]
    fn conjugation_gaussian() {
        let a = ExactNumber::gaussian(rat(3, 2), rat(-5, 7));
        let c = a.conj().unwrap();
        assert_eq!(c, ExactNumber::gaussian(rat(3, 2), rat(5, 7)));
        let prod = a.try_mul(&c).unwrap();
        // |a|^2 = 9/4 + 25/49
        assert_eq!(
            prod,
            ExactNumber::gaussian(rat(9 * 49 + 25 * 4, 4 * 49), rat(0, 1))
        );
    }

    #[test]
    fn cyclotomic_24_powers() {
        let basis = GeneratorBasis::cyclotomic(24).unwrap();
        assert_eq!(basis.dim(), 8); // phi(24)
        let z = ExactNumber::from_coords(&basis, {
            let mut c = vec![BigRational::zero(); 8];
            c[1] = BigRational::one();
            c
        })
        .unwrap();
        // z^12 = -1 for the primitive 24th root.
        let mut p = ExactNumber::from_int(&basis, 1).unwrap();
        for _ in 0..12 {
            p = p.try_mul(&z).unwrap();
        }
        assert_eq!(p, ExactNumber::from_int(&basis, -1).unwrap());
        let mut q = p.clone();
        for _ in 0..12 {
            q = q.try_mul(&z).unwrap();
        }
        assert_eq!(q, ExactNumber::from_int(&basis, 1).unwrap());
    }

    #[test]
    fn cyclotomic_approx_consistent() {
        let basis = GeneratorBasis::cyclotomic(24).unwrap();
        let mut coords = vec![BigRational::zero(); 8];
        coords[5] = BigRational::one();
        let z5 = ExactNumber::from_coords(&basis, coords).unwrap();
        let expect = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * 5.0 / 24.0);
        assert!((z5.approx() - expect).norm() < 1e-12);
        let sq = z5.try_mul(&z5).unwrap();
        assert!((sq.approx() - expect * expect).norm() < 1e-12);
    }

    #[test]
    fn rank_detects_dependence() {
        let one = ExactNumber::int(1);
        let two = ExactNumber::int(2);
        let i = ExactNumber::gaussian(rat(0, 1), rat(1, 1));
        assert_eq!(rational_rank(&[one.clone(), two]), 1);
        assert_eq!(rational_rank(&[one.clone(), i.clone()]), 2);
        assert_eq!(rational_rank(&[one.clone(), i.clone(), one.add(&i)]), 2);
        assert_eq!(rational_rank(&[ExactNumber::int(0)]), 0);
    }

    #[test]
    fn quarter_roots_of_unity_rank_four() {
        // Generators 1, z^5, z^10, z^15 of the order-24 basis stay independent.
        let basis = GeneratorBasis::cyclotomic(24).unwrap();
        let mk = |p: usize| {
            let mut c = vec![BigRational::zero(); p + 1];
            c[p] = BigRational::one();
            ExactNumber::from_coords(&basis, poly_reduce(c, match basis.kind() {
                BasisKind::Cyclotomic { modulus, .. } => modulus,
                _ => unreachable!(),
            }))
            .unwrap()
        };
        let vals = vec![mk(0), mk(5), mk(10), mk(15)];
        assert_eq!(rational_rank(&vals), 4);
    }

    #[test]
    fn symbolic_products_guarded() {
        let basis = GeneratorBasis::symbolic(
            vec!["a".into(), "b".into()],
            vec![Complex64::new(1.3, 0.2), Complex64::new(-0.4, 1.1)],
            None,
            None,
        )
        .unwrap();
        let mut ca = vec![BigRational::zero(); 2];
        ca[0] = BigRational::one();
        let a = ExactNumber::from_coords(&basis, ca).unwrap();
        assert!(matches!(a.try_mul(&a), Err(Error::ProductNotClosed(_))));
        // Rational scalar from another basis still scales.
        let two = ExactNumber::int(2);
        let scaled = two.try_mul(&a).unwrap();
        assert_eq!(scaled, a.scale(&rat(2, 1)));
    }

    #[test]
    fn product_set_dedups() {
        let pm = vec![ExactNumber::int(1), ExactNumber::int(-1)];
        let set = product_set(&pm, &pm).unwrap();
        assert_eq!(set, vec![ExactNumber::int(-1), ExactNumber::int(1)]);
    }

    #[test]
    fn display_gaussian() {
        assert_eq!(ExactNumber::rational(3, 2).to_string(), "3/2");
        assert_eq!(
            ExactNumber::gaussian(rat(1, 1), rat(-1, 2)).to_string(),
            "1-1/2i"
        );
        assert_eq!(ExactNumber::int(0).to_string(), "0");
    }

    #[test]
    fn cyclotomic_poly_small_orders() {
        assert_eq!(cyclotomic_poly(1), vec![BigInt::from(-1), BigInt::from(1)]);
        assert_eq!(
            cyclotomic_poly(4),
            vec![BigInt::from(1), BigInt::from(0), BigInt::from(1)]
        );
        // x^8 - x^4 + 1
        let p24 = cyclotomic_poly(24);
        let expect: Vec<i64> = vec![1, 0, 0, 0, -1, 0, 0, 0, 1];
        assert_eq!(p24, expect.into_iter().map(BigInt::from).collect::<Vec<_>>());
    }
}
