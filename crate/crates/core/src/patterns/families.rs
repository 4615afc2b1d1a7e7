//! Diamond patterns of the named families of Nottingham algebras.

use serde::{Deserialize, Serialize};

use super::{compile, normalize, DiamondPattern, DiamondType, PatternEntry};
use crate::engine::{GradedAlgebra, ValidationReport, GUARD};
use crate::error::{Error, Result};
use crate::gf::PrimeField;
use crate::maxclass::{Centralizer, CentralizerSequence};

/// A named family. Serialized as `{"family": ..., "params": {...}}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params")]
pub enum Family {
    /// All diamonds of type -1, in every degree `1 mod (q-1)`.
    #[serde(rename = "a")]
    A,
    /// Types along the arithmetic progression through `-1` at `L_q` and
    /// `third` at `L_{2q-1}`. Values 1 and 0 become fake diamonds.
    #[serde(rename = "b")]
    B { third: i64 },
    /// Type -1 in degrees `q mod p^s(q-1)`, infinite elsewhere.
    #[serde(rename = "c")]
    C { s: u32 },
    /// Finite types along a progression in degrees `q mod p^s(q-1)`, starting
    /// `-1, second, ...`; infinite elsewhere.
    #[serde(rename = "d")]
    D { s: u32, second: i64 },
    /// Infinite type everywhere past `L_q`.
    #[serde(rename = "e")]
    E,
    /// Type 1 fake diamonds in the degrees `m > q` with `m = -1 mod q`.
    L1q,
    /// Type 0 fake diamonds in the degrees `m > q` with `m = -1 mod q`.
    L0q,
    /// The pattern that a maximal-class algebra induces through the tensor construction.
    #[serde(rename = "tq2")]
    Tq2 { sequence: CentralizerSequence },
    /// Infinite diamonds up to a type 1 fake diamond in degree
    /// `2p^s(q-1)+1`, with further type 1 fakes wherever `p^s` divides the centralizer index.
    #[serde(rename = "uniqueness")]
    Uniqueness { s: u32 },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::A => "a",
            Family::B { .. } => "b",
            Family::C { .. } => "c",
            Family::D { .. } => "d",
            Family::E => "e",
            Family::L1q => "L1q",
            Family::L0q => "L0q",
            Family::Tq2 { .. } => "tq2",
            Family::Uniqueness { .. } => "uniqueness",
        }
    }
}

/// Family spec as read from a file, together with the characteristic and `q`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub p: u32,
    pub q: u64,
    #[serde(flatten)]
    pub family: Family,
}

fn progression_type(f: &PrimeField, value: i64) -> DiamondType {
    match f.reduce(value) {
        0 => DiamondType::Fake0,
        1 => DiamondType::Fake1,
        r => DiamondType::Finite(f.signed(r)),
    }
}

/// Centralizer sequence of the uniqueness family: the first CX is `c_{2p^s}`,
/// after which `c_i = CX` exactly when `p^s | i`. Continuing with period
/// `2p^s` instead is not a Lie algebra.
pub fn uniqueness_sequence(p: u32, s: u32, len: usize) -> Result<CentralizerSequence> {
    let ps = (p as usize).pow(s);
    let entries = (2..len + 2)
        .map(|i| {
            if i >= 2 * ps && i % ps == 0 {
                Centralizer::CX
            } else {
                Centralizer::CY
            }
        })
        .collect();
    CentralizerSequence::new(p, entries)
}

/// Pattern induced by a centralizer sequence: `U_1` sits in `L_q`; each CY
/// entry gives an infinite diamond and the next one `q - 1` degrees later,
/// each CX entry a type 1 fake diamond and the next one `q` degrees later.
fn sequence_entries(q: usize, seq: &CentralizerSequence, max_degree: usize) -> Vec<PatternEntry> {
    let mut entries = vec![PatternEntry::new(q, DiamondType::Finite(-1))];
    let mut degree = q + q - 1;
    for &c in seq.entries() {
        if degree > max_degree {
            break;
        }
        match c {
            Centralizer::CY => {
                entries.push(PatternEntry::new(degree, DiamondType::Infinite));
                degree += q - 1;
            }
            Centralizer::CX => {
                entries.push(PatternEntry::new(degree, DiamondType::Fake1));
                degree += q;
            }
        }
    }
    entries
}

/// Normalized pattern of a family, listing diamonds up to `max_degree`.
pub fn family_pattern(family: &Family, p: u32, q: u64, max_degree: usize) -> Result<DiamondPattern> {
    let f = PrimeField::new(p)?;
    crate::check_q(p, q)?;
    let qu = q as usize;
    let slots = |step: usize| (0..).map(move |k| qu + k * step).take_while(move |&m| m <= max_degree);
    let mut entries = Vec::new();
    match family {
        Family::A => {
            entries.extend(slots(qu - 1).map(|m| PatternEntry::new(m, DiamondType::Finite(-1))));
        }
        Family::B { third } => {
            let step = third + 1;
            if f.reduce(step) == 0 {
                return Err(Error::InvalidPattern(
                    "a type -1 third diamond gives a constant progression".into(),
                ));
            }
            for (k, m) in slots(qu - 1).enumerate() {
                entries.push(PatternEntry::new(m, progression_type(&f, -1 + k as i64 * step)));
            }
        }
        Family::C { s } | Family::D { s, .. } => {
            if *s == 0 {
                return Err(Error::InvalidPattern("s must be positive".into()));
            }
            let period = (p as usize).pow(*s) * (qu - 1);
            let step = match family {
                Family::D { second, .. } => {
                    let step = second + 1;
                    if f.reduce(step) == 0 {
                        return Err(Error::InvalidPattern(
                            "the progression must be non-constant".into(),
                        ));
                    }
                    step
                }
                _ => 0,
            };
            for m in slots(qu - 1) {
                if (m - qu) % period == 0 {
                    let j = ((m - qu) / period) as i64;
                    entries.push(PatternEntry::new(m, progression_type(&f, -1 + j * step)));
                } else {
                    entries.push(PatternEntry::new(m, DiamondType::Infinite));
                }
            }
        }
        Family::E => {
            entries.push(PatternEntry::new(qu, DiamondType::Finite(-1)));
            entries.extend(slots(qu - 1).skip(1).map(|m| PatternEntry::new(m, DiamondType::Infinite)));
        }
        Family::L1q | Family::L0q => {
            entries.push(PatternEntry::new(qu, DiamondType::Finite(-1)));
            let ty = if *family == Family::L1q {
                DiamondType::Fake1
            } else {
                DiamondType::Fake0
            };
            let mut m = 2 * qu - 1;
            while m <= max_degree {
                entries.push(PatternEntry::new(m, ty));
                m += qu;
            }
        }
        Family::Tq2 { sequence } => {
            if sequence.p() != p {
                return Err(Error::InvalidSequence(format!(
                    "sequence is over F_{}, expected F_{p}",
                    sequence.p()
                )));
            }
            entries = sequence_entries(qu, sequence, max_degree);
        }
        Family::Uniqueness { s } => {
            if *s == 0 {
                return Err(Error::InvalidPattern("s must be positive".into()));
            }
            let seq = uniqueness_sequence(p, *s, max_degree / (qu - 1) + 2)?;
            entries = sequence_entries(qu, &seq, max_degree);
        }
    }
    entries.retain(|e| e.degree <= max_degree);
    Ok(normalize(&DiamondPattern::new(p, q, entries))?.pattern)
}

/// Pattern of a family long enough to compile up to degree `n`.
pub fn family_pattern_for(family: &Family, p: u32, q: u64, n: usize) -> Result<DiamondPattern> {
    family_pattern(family, p, q, n + GUARD + q as usize)
}

/// Compiles and validates a family up to degree `n`.
pub fn compile_family(
    family: &Family,
    p: u32,
    q: u64,
    n: usize,
) -> Result<(GradedAlgebra, ValidationReport)> {
    compile(&family_pattern_for(family, p, q, n)?, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn degrees(p: &DiamondPattern, ty: DiamondType) -> Vec<usize> {
        p.degrees_of(ty)
    }

    #[test]
    fn case_a_and_e() {
        let a = family_pattern(&Family::A, 7, 7, 31).unwrap();
        assert_eq!(degrees(&a, DiamondType::Finite(-1)), vec![7, 13, 19, 25, 31]);
        let e = family_pattern(&Family::E, 7, 7, 31).unwrap();
        assert_eq!(degrees(&e, DiamondType::Finite(-1)), vec![7]);
        assert_eq!(degrees(&e, DiamondType::Infinite), vec![13, 19, 25, 31]);
    }

    #[test]
    fn case_b_passes_through_fakes() {
        let b = family_pattern(&Family::B { third: 2 }, 7, 7, 50).unwrap();
        assert_eq!(b.type_at(13), Some(DiamondType::Finite(2)));
        assert_eq!(b.type_at(25), Some(DiamondType::Fake1));
        assert_eq!(b.type_at(37), Some(DiamondType::Fake0));
        assert_eq!(b.type_at(43), Some(DiamondType::Finite(3)));
        assert!(family_pattern(&Family::B { third: -1 }, 7, 7, 40).is_err());
    }

    #[test]
    fn case_c_period() {
        let c = family_pattern(&Family::C { s: 1 }, 7, 7, 100).unwrap();
        assert_eq!(degrees(&c, DiamondType::Finite(-1)), vec![7, 49, 91]);
    }

    #[test]
    fn young_algebras() {
        let l1 = family_pattern(&Family::L1q, 7, 7, 30).unwrap();
        assert_eq!(degrees(&l1, DiamondType::Fake1), vec![13, 20, 27]);
        let l0 = family_pattern(&Family::L0q, 7, 7, 30).unwrap();
        assert_eq!(l0.type_at(13), Some(DiamondType::Fake0));
        assert_eq!(degrees(&l0, DiamondType::Fake1), vec![19, 26]);
    }

    #[test]
    fn uniqueness_hypothesis() {
        let u = family_pattern(&Family::Uniqueness { s: 1 }, 7, 7, 200).unwrap();
        assert_eq!(degrees(&u, DiamondType::Fake1), vec![85, 128, 171]);
        for k in 2..14 {
            assert_eq!(u.type_at(k * 6 + 1), Some(DiamondType::Infinite));
        }
    }

    #[test]
    fn spec_json() {
        let s: FamilySpec =
            serde_json::from_str(r#"{"p":7,"q":7,"family":"b","params":{"third":2}}"#).unwrap();
        assert_eq!(s.family, Family::B { third: 2 });
        let s: FamilySpec = serde_json::from_str(r#"{"p":7,"q":7,"family":"a"}"#).unwrap();
        assert_eq!(s.family, Family::A);
        let t = Family::Tq2 {
            sequence: CentralizerSequence::parse(7, "YYX").unwrap(),
        };
        let j = serde_json::to_string(&t).unwrap();
        assert_eq!(serde_json::from_str::<Family>(&j).unwrap(), t);
    }
}
