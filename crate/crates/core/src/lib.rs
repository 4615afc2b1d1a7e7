//! Exact computation with Nottingham algebras: thin graded Lie algebras over
//! `F_p` whose second two-dimensional component sits in degree `q = p^n`.
//!
//! An algebra is stored through the adjoint actions of its two degree-one
//! generators together with a defining bracket word for every basis element.
//! Everything else (full brackets, diamond detection, derivations, deflation)
//! is derived from that data by exact linear algebra.

pub mod constructions;
pub mod derivations;
pub mod engine;
mod error;
pub mod gf;
pub mod maxclass;
pub mod patterns;

mod closure;

pub use constructions::{
    deflate, divided_power_product, nottingham_nqr, tensor_construct, DividedPowerAlgebra,
    TensorAmbient, TensorConstruction, TensorElement,
};
pub use derivations::{
    build_d, extract_m, roundtrip_check, roundtrip_margin, verify_leibniz, DerivationRep,
    RoundTripReport,
};
pub use engine::{
    AlgebraKind, BasisElement, CheckOutcome, Element, GradedAlgebra, Letter, OperatorFamily,
    ValidationReport, GUARD,
};
pub use error::{Error, Result};
pub use gf::{lucas_binom, solve_or_kernel, FpMatrix, FpVector, PrimeField, Solution};
pub use maxclass::{build_maxclass, extract_centralizer_sequence, Centralizer, CentralizerSequence};
pub use patterns::{
    classify_regularity, compile, compile_family, compile_unchecked, detect, family_pattern,
    family_pattern_for, normalize, verify_lemma_suite, DiamondPattern, DiamondType, Family,
    FamilySpec, LemmaReport, PatternEntry, Regularity,
};

/// Schema version stamped on every JSON artifact.
pub const SCHEMA_VERSION: u32 = 1;

/// Checks that `q` is a power of `p` with `q > 5` and returns the exponent.
pub fn check_q(p: u32, q: u64) -> Result<u32> {
    let mut n = 0;
    let mut r = q;
    while r > 1 && r % p as u64 == 0 {
        r /= p as u64;
        n += 1;
    }
    if r != 1 || q <= 5 {
        return Err(Error::InvalidQ { p, q });
    }
    Ok(n)
}
