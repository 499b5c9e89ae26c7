//! Shipped seed matrices and named construction recipes.
//!
//! Seeds are small enough to verify exhaustively at construction time, and
//! every large matrix is produced from a verified seed through the
//! injectivity-preserving constructions, so everything returned here carries
//! either a brute-force certificate or a construction proof.

use super::construct::{
    append_identity_tail, binary_chain, construct_complex, corollary1, corollary2,
    enlarge_kronecker, hadamard_factor,
};
use super::injective::{check_and_record, CheckMode, DEFAULT_BUDGET};
use super::regen::search_extension;
use super::{hadamard, GcoMatrix, Verification};
use crate::alphabet::{presets as alpha, Alphabet};
use crate::error::{Error, Result};
use crate::exact::ExactNumber;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::sync::OnceLock;

/// Ternary-input, ternary-signature 4x6 seed, brute-verified over all 3^6
/// inputs on first use.
pub fn seed_4x6() -> Result<GcoMatrix> {
    static CACHE: OnceLock<std::result::Result<GcoMatrix, String>> = OnceLock::new();
    CACHE
        .get_or_init(|| {
            let rows = vec![
                vec![1i64, 1, 1, 1, 1, 1],
                vec![1, -1, -1, 1, 0, -1],
                vec![0, 1, -1, 1, -1, 1],
                vec![1, 0, 1, -1, -1, -1],
            ];
            let build = || -> Result<GcoMatrix> {
                let mut mat = GcoMatrix::from_integer_rows(
                    &rows,
                    alpha::ternary(),
                    Alphabet::integers(&[-1, 0, 1]),
                )?;
                mat.push_provenance("shipped 4x6 ternary seed".to_string());
                let outcome = check_and_record(&mut mat, CheckMode::Image, DEFAULT_BUDGET)?;
                if !outcome.is_injective() {
                    return Err(Error::NotInjective {
                        x: vec![],
                        y: vec![],
                    });
                }
                mat.head_cols = super::injective::find_head_cols(&mat);
                Ok(mat)
            };
            build().map_err(|e| e.to_string())
        })
        .clone()
        .map_err(Error::Numerical)
}

/// Ternary-input 16x22 seed: a 16x16 Hadamard head extended by six seeded
/// sign columns, each append kernel-verified. Deterministic (fixed seed).
pub fn seed_16x22() -> Result<GcoMatrix> {
    static CACHE: OnceLock<std::result::Result<GcoMatrix, String>> = OnceLock::new();
    CACHE
        .get_or_init(|| {
            let build = || -> Result<GcoMatrix> {
                let mut base = hadamard(16, alpha::ternary())?;
                base.head_cols = Some((0..16).collect());
                base.verification = Verification::ProvenByConstruction;
                let mut mat = search_extension(&base, 6, 0x47434F31, 500, 50)?;
                mat.push_provenance("shipped 16x22 ternary seed".to_string());
                Ok(mat)
            };
            build().map_err(|e| e.to_string())
        })
        .clone()
        .map_err(Error::Numerical)
}

/// The 8x8 Hadamard matrix viewed over septenary inputs {0,..,+-3}:
/// invertible, hence injective over anything.
pub fn h8_septenary() -> Result<GcoMatrix> {
    let input = Alphabet::integers(&[-3, -2, -1, 0, 1, 2, 3]);
    let mut mat = hadamard(8, input)?;
    mat.head_cols = Some((0..8).collect());
    mat.verification = Verification::ProvenByConstruction;
    mat.push_provenance("invertible square head".to_string());
    Ok(mat)
}

/// Names of the shipped construction recipes, in presentation order.
pub fn recipe_names() -> &'static [&'static str] {
    &[
        "seed-4x6",
        "seed-16x22",
        "h8-septenary",
        "ex2-64x103",
        "ex3-64x71",
        "ex4-64x193",
        "ex5-64x256",
        "ex6-64x128",
        "ex7-128x320",
        "ex8-64x449",
        "kron-64x88",
        "kron-64x96",
    ]
}

/// Build a recipe by name. `hadamard-<order>` is also accepted.
pub fn build_recipe(name: &str) -> Result<GcoMatrix> {
    match name {
        "seed-4x6" => seed_4x6(),
        "seed-16x22" => seed_16x22(),
        "h8-septenary" => h8_septenary(),
        "ex2-64x103" => corollary1(&seed_16x22()?, 1),
        "ex3-64x71" => corollary1(&h8_septenary()?, 2),
        "ex4-64x193" => binary_chain(64),
        "ex5-64x256" => append_identity_tail(&binary_chain(64)?),
        "ex6-64x128" => {
            let step = corollary2(&seed_4x6()?, 4, 1)?;
            corollary2(&step, 4, 1)
        }
        "ex7-128x320" => {
            let step = corollary2(&seed_4x6()?, 4, 1)?;
            let ex6 = corollary2(&step, 4, 1)?;
            corollary2(&ex6, 2, 2)
        }
        "ex8-64x449" => {
            let chain = binary_chain(64)?;
            let xi = ExactNumber::gaussian(BigRational::zero(), BigRational::one());
            construct_complex(&[&chain, &chain], &[xi])
        }
        "kron-64x88" => {
            let seed = seed_16x22()?;
            let factor = hadamard_factor(4, seed.signature().basis())?;
            enlarge_kronecker(&factor, &seed)
        }
        "kron-64x96" => {
            let seed = seed_4x6()?;
            let factor = hadamard_factor(16, seed.signature().basis())?;
            enlarge_kronecker(&factor, &seed)
        }
        other => {
            if let Some(order) = other.strip_prefix("hadamard-") {
                let order: usize = order
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad Hadamard order in '{other}'")))?;
                let mut mat = hadamard(order, alpha::binary())?;
                mat.head_cols = Some((0..order).collect());
                mat.verification = Verification::ProvenByConstruction;
                return Ok(mat);
            }
            Err(Error::Parse(format!(
                "unknown recipe '{other}' (known: {}, hadamard-<order>)",
                recipe_names().join(", ")
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_4x6_is_verified() {
        let mat = seed_4x6().unwrap();
        assert_eq!((mat.m(), mat.n()), (4, 6));
        assert!(matches!(mat.verification, Verification::Verified { .. }));
        assert!(mat.head_cols.is_some());
    }

    #[test]
    fn seed_16x22_hadamard_head_and_verified() {
        let mat = seed_16x22().unwrap();
        assert_eq!((mat.m(), mat.n()), (16, 22));
        let h = hadamard(16, alpha::ternary()).unwrap();
        for r in 0..16 {
            for c in 0..16 {
                assert_eq!(mat.entry(r, c), h.entry(r, c));
            }
        }
        match mat.verification {
            Verification::Verified { evaluations, .. } => {
                assert_eq!(evaluations, 5u128.pow(6));
            }
            _ => panic!("expected kernel verification"),
        }
    }

    #[test]
    fn recipe_dimensions() {
        let expect = [
            ("ex2-64x103", 64, 103),
            ("ex3-64x71", 64, 71),
            ("ex4-64x193", 64, 193),
            ("ex5-64x256", 64, 256),
            ("ex6-64x128", 64, 128),
            ("ex7-128x320", 128, 320),
            ("ex8-64x449", 64, 449),
            ("kron-64x88", 64, 88),
            ("kron-64x96", 64, 96),
        ];
        for (name, m, n) in expect {
            let mat = build_recipe(name).unwrap();
            assert_eq!((mat.m(), mat.n()), (m, n), "{name}");
            assert!(
                matches!(mat.verification, Verification::ProvenByConstruction),
                "{name} should be proof-carried"
            );
        }
    }

    #[test]
    fn unknown_recipe_is_an_error() {
        assert!(build_recipe("nope").is_err());
        let h = build_recipe("hadamard-8").unwrap();
        assert_eq!((h.m(), h.n()), (8, 8));
    }
}
