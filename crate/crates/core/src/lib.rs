//! Construction, verification, decoding, simulation, and capacity bounds for
//! uniquely decodable (errorless) overloaded code-division signature matrices.
//!
//! The central object is [`matrix::GcoMatrix`]: an `m x n` signature matrix
//! with entries from a finite signature alphabet, injective as a map from
//! `I^n` (the finite input alphabet per user) to `C^m`. Injectivity is what
//! makes overloaded multiple access errorless in the noiseless regime, and it
//! is preserved by the block constructions in [`matrix::construct`].
//!
//! Supporting layers:
//! * [`exact`]: exact arithmetic over rational coordinate vectors, so that
//!   injectivity checks and construction pre-conditions never rely on floats.
//! * [`alphabet`]: input/signature alphabets and symbol distributions.
//! * [`decode`]: reduced-complexity maximum-likelihood decoders.
//! * [`sim`]: seeded Monte Carlo symbol-error simulation over AWGN.
//! * [`bounds`]: per-user sum-capacity lower/upper/asymptotic bounds for
//!   noiseless, noisy, and partially-active systems.

pub mod alphabet;
pub mod bounds;
pub mod decode;
pub mod error;
pub mod exact;
pub mod matrix;
pub mod numerics;
pub mod sim;

pub use error::{Error, Result};
