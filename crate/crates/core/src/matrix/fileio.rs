//! Plain-text matrix files ("gco v1").
//!
//! The format is line-oriented and exact: entries are written as rationals
//! (or Gaussian rationals / coordinate tuples), so write -> read round-trips
//! bit for bit. Layout:
//!
//! ```text
//! gco v1
//! matrix <m> <n>
//! basis gaussian | cyclotomic <order>
//! input <entry> ...
//! signature <entry> ...
//! verification proven | unverified | verified <mode> <evaluations>
//! head <col> ...              (optional)
//! kron <w> <sub_m> <sub_n>    (optional, followed by w kfactor lines)
//! kfactor <entry> ...
//! provenance <free text>      (repeated)
//! row <entry> ...             (m lines)
//! end gco
//! ```

use super::injective::CheckMode;
use super::{GcoMatrix, KronFactor, Verification};
use crate::alphabet::Alphabet;
use crate::error::{Error, Result};
use crate::exact::{BasisKind, ExactNumber, GeneratorBasis};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

pub fn write_matrix(mat: &GcoMatrix, path: &Path) -> Result<()> {
    let s = write_matrix_string(mat)?;
    std::fs::write(path, s)?;
    Ok(())
}

pub fn read_matrix(path: &Path) -> Result<GcoMatrix> {
    let s = std::fs::read_to_string(path)?;
    read_matrix_str(&s)
}

fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn format_entry(v: &ExactNumber) -> String {
    let basis = v.basis();
    if basis.is_gaussian() {
        let re = &v.coords()[0];
        let im = &v.coords()[1];
        if im.is_zero() {
            return format_rational(re);
        }
        let im_part = format!("{}i", format_rational(&im.abs()));
        let sign = if im.is_negative() { "-" } else { "+" };
        if re.is_zero() {
            return if im.is_negative() {
                format!("-{im_part}")
            } else {
                im_part
            };
        }
        return format!("{}{sign}{im_part}", format_rational(re));
    }
    let parts: Vec<String> = v.coords().iter().map(format_rational).collect();
    format!("({})", parts.join(","))
}

fn parse_rational(tok: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("bad rational '{tok}'"));
    if let Some((n, d)) = tok.split_once('/') {
        let n: BigInt = n.parse().map_err(|_| bad())?;
        let d: BigInt = d.parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        Ok(BigRational::new(n, d))
    } else {
        let n: BigInt = tok.parse().map_err(|_| bad())?;
        Ok(BigRational::from_integer(n))
    }
}

fn parse_entry(basis: &Arc<GeneratorBasis>, tok: &str) -> Result<ExactNumber> {
    if let Some(inner) = tok.strip_prefix('(').and_then(|t| t.strip_suffix(')')) {
        let coords: Vec<BigRational> = inner
            .split(',')
            .map(parse_rational)
            .collect::<Result<_>>()?;
        return ExactNumber::from_coords(basis, coords);
    }
    if let Some(body) = tok.strip_suffix('i') {
        if !basis.is_gaussian() {
            return Err(Error::Parse(format!(
                "imaginary entry '{tok}' in a non-Gaussian basis"
            )));
        }
        // Split the imaginary part off at the last +/- that is not leading.
        let split = body
            .char_indices()
            .skip(1)
            .filter(|(_, c)| *c == '+' || *c == '-')
            .map(|(i, _)| i)
            .last();
        let (re_s, im_s) = match split {
            Some(i) => (&body[..i], &body[i..]),
            None => ("0", body),
        };
        let re = parse_rational(re_s)?;
        let im = match im_s {
            "+" => BigRational::one(),
            "-" => -BigRational::one(),
            s => {
                let s = s.strip_prefix('+').unwrap_or(s);
                parse_rational(s)?
            }
        };
        return ExactNumber::from_coords(basis, vec![re, im]);
    }
    ExactNumber::from_rational(basis, parse_rational(tok)?)
}

fn basis_line(basis: &Arc<GeneratorBasis>) -> Result<String> {
    match basis.kind() {
        BasisKind::Cyclotomic { order, .. } => {
            if basis.is_gaussian() {
                Ok("basis gaussian".to_string())
            } else {
                Ok(format!("basis cyclotomic {order}"))
            }
        }
        BasisKind::Symbolic { .. } => Err(Error::Unsupported(
            "symbolic bases have no file representation".into(),
        )),
    }
}

fn parse_basis(rest: &[&str]) -> Result<Arc<GeneratorBasis>> {
    match rest {
        ["gaussian"] => Ok(GeneratorBasis::gaussian()),
        ["cyclotomic", order] => {
            let order: u32 = order
                .parse()
                .map_err(|_| Error::Parse(format!("bad cyclotomic order '{order}'")))?;
            GeneratorBasis::cyclotomic(order)
        }
        _ => Err(Error::Parse(format!("bad basis line '{}'", rest.join(" ")))),
    }
}

pub fn write_matrix_string(mat: &GcoMatrix) -> Result<String> {
    let mut out = String::new();
    out.push_str("gco v1\n");
    writeln!(out, "matrix {} {}", mat.m(), mat.n()).unwrap();
    out.push_str(&basis_line(mat.signature().basis())?);
    out.push('\n');
    let fmt_list = |vals: &[ExactNumber]| -> String {
        vals.iter().map(format_entry).collect::<Vec<_>>().join(" ")
    };
    writeln!(out, "input {}", fmt_list(mat.input().values())).unwrap();
    writeln!(out, "signature {}", fmt_list(mat.signature().values())).unwrap();
    match &mat.verification {
        Verification::ProvenByConstruction => out.push_str("verification proven\n"),
        Verification::Unverified => out.push_str("verification unverified\n"),
        Verification::Verified { mode, evaluations } => {
            writeln!(out, "verification verified {mode} {evaluations}").unwrap();
        }
    }
    if let Some(head) = &mat.head_cols {
        let cols: Vec<String> = head.iter().map(|c| c.to_string()).collect();
        writeln!(out, "head {}", cols.join(" ")).unwrap();
    }
    if let Some(kron) = &mat.kron {
        writeln!(out, "kron {} {} {}", kron.factor.len(), kron.sub_m, kron.sub_n).unwrap();
        for row in &kron.factor {
            writeln!(out, "kfactor {}", fmt_list(row)).unwrap();
        }
    }
    for p in &mat.provenance {
        writeln!(out, "provenance {}", p.replace('\n', " ")).unwrap();
    }
    for r in 0..mat.m() {
        writeln!(out, "row {}", fmt_list(mat.row(r))).unwrap();
    }
    out.push_str("end gco\n");
    Ok(out)
}

pub fn read_matrix_str(s: &str) -> Result<GcoMatrix> {
    let mut lines = s.lines().map(str::trim).filter(|l| !l.is_empty());
    let bad = |what: &str| Error::Parse(format!("expected {what}"));
    if lines.next() != Some("gco v1") {
        return Err(bad("header 'gco v1'"));
    }
    let mut m = 0usize;
    let mut n = 0usize;
    let mut basis: Option<Arc<GeneratorBasis>> = None;
    let mut input: Option<Alphabet> = None;
    let mut signature: Option<Alphabet> = None;
    let mut verification = Verification::Unverified;
    let mut head: Option<Vec<usize>> = None;
    let mut kron_dims: Option<(usize, usize, usize)> = None;
    let mut kron_rows: Vec<Vec<ExactNumber>> = Vec::new();
    let mut provenance = Vec::new();
    let mut rows: Vec<Vec<ExactNumber>> = Vec::new();
    let mut finished = false;

    for line in lines {
        let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
        let toks: Vec<&str> = rest.split_whitespace().collect();
        match key {
            "matrix" => {
                let [ms, ns] = toks[..] else {
                    return Err(bad("matrix <m> <n>"));
                };
                m = ms.parse().map_err(|_| bad("integer m"))?;
                n = ns.parse().map_err(|_| bad("integer n"))?;
            }
            "basis" => basis = Some(parse_basis(&toks)?),
            "input" | "signature" | "row" | "kfactor" => {
                let b = basis.as_ref().ok_or_else(|| bad("basis before entries"))?;
                let vals: Vec<ExactNumber> = toks
                    .iter()
                    .map(|t| parse_entry(b, t))
                    .collect::<Result<_>>()?;
                match key {
                    "input" => input = Some(Alphabet::new(vals)?),
                    "signature" => signature = Some(Alphabet::new(vals)?),
                    "kfactor" => kron_rows.push(vals),
                    _ => rows.push(vals),
                }
            }
            "verification" => {
                verification = match toks[..] {
                    ["proven"] => Verification::ProvenByConstruction,
                    ["unverified"] => Verification::Unverified,
                    ["verified", mode, evals] => {
                        let mode = match mode {
                            "image" => CheckMode::Image,
                            "kernel" => CheckMode::Kernel,
                            "auto" => CheckMode::Auto,
                            _ => return Err(bad("check mode")),
                        };
                        let evaluations: u128 =
                            evals.parse().map_err(|_| bad("evaluation count"))?;
                        Verification::Verified { mode, evaluations }
                    }
                    _ => return Err(bad("verification line")),
                };
            }
            "head" => {
                head = Some(
                    toks.iter()
                        .map(|t| t.parse().map_err(|_| bad("head column")))
                        .collect::<Result<_>>()?,
                );
            }
            "kron" => {
                let [w, sm, sn] = toks[..] else {
                    return Err(bad("kron <w> <sub_m> <sub_n>"));
                };
                kron_dims = Some((
                    w.parse().map_err(|_| bad("kron w"))?,
                    sm.parse().map_err(|_| bad("kron sub_m"))?,
                    sn.parse().map_err(|_| bad("kron sub_n"))?,
                ));
            }
            "provenance" => provenance.push(rest.to_string()),
            "end" => {
                finished = true;
                break;
            }
            other => return Err(Error::Parse(format!("unknown line '{other}'"))),
        }
    }
    if !finished {
        return Err(bad("'end gco' trailer"));
    }
    let input = input.ok_or_else(|| bad("input line"))?;
    let signature = signature.ok_or_else(|| bad("signature line"))?;
    if rows.len() != m || rows.iter().any(|r| r.len() != n) {
        return Err(bad("m full rows"));
    }
    let entries: Vec<ExactNumber> = rows.into_iter().flatten().collect();
    let mut mat = GcoMatrix::new(m, n, entries, input, signature)?;
    mat.verification = verification;
    mat.head_cols = head;
    mat.provenance = provenance;
    if let Some((w, sub_m, sub_n)) = kron_dims {
        if kron_rows.len() != w || kron_rows.iter().any(|r| r.len() != w) {
            return Err(bad("square kron factor"));
        }
        mat.kron = Some(KronFactor {
            factor: kron_rows,
            sub_m,
            sub_n,
        });
    }
    Ok(mat)
}

#[cfg(test)]
mod tests {
    use super::super::presets::build_recipe;
    use super::*;
    use crate::alphabet::presets;

    #[test]
    fn roundtrip_rational_matrix() {
        let mat = build_recipe("seed-4x6").unwrap();
        let s = write_matrix_string(&mat).unwrap();
        let back = read_matrix_str(&s).unwrap();
        assert_eq!(back.entries(), mat.entries());
        assert_eq!(back.input().values(), mat.input().values());
        assert_eq!(back.signature().values(), mat.signature().values());
        assert_eq!(back.verification, mat.verification);
        assert_eq!(back.head_cols, mat.head_cols);
        assert_eq!(back.provenance, mat.provenance);
        // Second round trip is byte-identical.
        assert_eq!(write_matrix_string(&back).unwrap(), s);
    }

    #[test]
    fn roundtrip_complex_matrix() {
        let mut h = super::super::hadamard(2, presets::binary()).unwrap();
        h.head_cols = Some(vec![0, 1]);
        let xi = ExactNumber::gaussian(BigRational::zero(), BigRational::one());
        let mat = super::super::construct::construct_complex(&[&h, &h], &[xi]).unwrap();
        let s = write_matrix_string(&mat).unwrap();
        let back = read_matrix_str(&s).unwrap();
        assert_eq!(back.entries(), mat.entries());
        assert_eq!(write_matrix_string(&back).unwrap(), s);
    }

    #[test]
    fn roundtrip_kron_factor() {
        let mat = build_recipe("kron-64x96").unwrap();
        let s = write_matrix_string(&mat).unwrap();
        let back = read_matrix_str(&s).unwrap();
        let kf = back.kron.as_ref().unwrap();
        assert_eq!(kf.factor.len(), 16);
        assert_eq!((kf.sub_m, kf.sub_n), (4, 6));
        assert_eq!(write_matrix_string(&back).unwrap(), s);
    }

    #[test]
    fn gaussian_entry_syntax() {
        let b = crate::exact::GeneratorBasis::gaussian();
        let cases = ["1", "-1", "3/2", "1i", "-1i", "1+1i", "-1/2-3/4i", "2-1i"];
        for c in cases {
            let v = parse_entry(&b, c).unwrap();
            assert_eq!(format_entry(&v), c, "round trip of '{c}'");
        }
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(read_matrix_str("not a matrix").is_err());
        let b = crate::exact::GeneratorBasis::gaussian();
        assert!(parse_entry(&b, "1//2").is_err());
        assert!(parse_entry(&b, "(1,2,3)").is_err()); // wrong arity for basis
    }
}
