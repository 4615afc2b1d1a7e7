//! Graded Lie algebras of maximal class with at most two two-step
//! centralizers, described by their centralizer sequences.
//!
//! With generators `X, Y` and `U_1 = Y`, the component `M_i` (`i >= 2`) is
//! spanned by `U_i`, and `U_{i+1}` is `[U_i X]` when `Y` centralizes `U_i`,
//! `[U_i Y]` when `X` does.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{AlgebraKind, Builder, GradedAlgebra, Letter, GUARD};
use crate::error::{Error, Result};
use crate::gf::{FpMatrix, PrimeField};

/// Which generator spans the two-step centralizer `C_{M_1}(M_i)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Centralizer {
    /// `C_i = F Y`
    CY,
    /// `C_i = F X`
    CX,
}

impl Centralizer {
    fn to_char(self) -> char {
        match self {
            Centralizer::CY => 'Y',
            Centralizer::CX => 'X',
        }
    }
}

/// Sequence `c_2, c_3, ...` of two-step centralizers.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "SequenceFile", into = "SequenceFile")]
pub struct CentralizerSequence {
    p: u32,
    entries: Vec<Centralizer>,
}

#[derive(Serialize, Deserialize)]
struct SequenceFile {
    p: u32,
    entries: String,
}

impl TryFrom<SequenceFile> for CentralizerSequence {
    type Error = Error;

    fn try_from(s: SequenceFile) -> Result<Self> {
        CentralizerSequence::parse(s.p, &s.entries)
    }
}

impl From<CentralizerSequence> for SequenceFile {
    fn from(s: CentralizerSequence) -> Self {
        SequenceFile {
            p: s.p,
            entries: s.to_string(),
        }
    }
}

impl fmt::Display for CentralizerSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.entries {
            write!(f, "{}", c.to_char())?;
        }
        Ok(())
    }
}

impl CentralizerSequence {
    /// `entries[0]` is `c_2`.
    pub fn new(p: u32, entries: Vec<Centralizer>) -> Result<Self> {
        PrimeField::new(p)?;
        if entries.first() != Some(&Centralizer::CY) {
            return Err(Error::InvalidSequence("c_2 must be CY".into()));
        }
        if let Some(i) = entries
            .windows(2)
            .position(|w| w == [Centralizer::CX, Centralizer::CX])
        {
            return Err(Error::InvalidSequence(format!(
                "consecutive CX entries at c_{} and c_{}",
                i + 2,
                i + 3
            )));
        }
        Ok(CentralizerSequence { p, entries })
    }

    /// Parses a string such as `"YYYX"`, whose first character is `c_2`.
    pub fn parse(p: u32, s: &str) -> Result<Self> {
        let entries = s
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                'Y' | 'y' => Ok(Centralizer::CY),
                'X' | 'x' => Ok(Centralizer::CX),
                _ => Err(Error::InvalidSequence(format!("unexpected character {c:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        CentralizerSequence::new(p, entries)
    }

    /// All-CY sequence of the metabelian algebra.
    pub fn metabelian(p: u32, len: usize) -> Result<Self> {
        CentralizerSequence::new(p, vec![Centralizer::CY; len.max(1)])
    }

    /// `c_i = CX` exactly when `i` is a positive multiple of `period`.
    pub fn periodic(p: u32, period: usize, len: usize) -> Result<Self> {
        let entries = (2..len + 2)
            .map(|i| {
                if i % period == 0 {
                    Centralizer::CX
                } else {
                    Centralizer::CY
                }
            })
            .collect();
        CentralizerSequence::new(p, entries)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn entries(&self) -> &[Centralizer] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `c_i` for `i >= 2`.
    pub fn get(&self, i: usize) -> Option<Centralizer> {
        i.checked_sub(2).and_then(|j| self.entries.get(j)).copied()
    }

    /// Indices `i` with `c_i = CX`.
    pub fn cx_positions(&self) -> Vec<usize> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == Centralizer::CX)
            .map(|(j, _)| j + 2)
            .collect()
    }

    /// The first `len` entries.
    pub fn prefix(&self, len: usize) -> CentralizerSequence {
        CentralizerSequence {
            p: self.p,
            entries: self.entries[..len.min(self.entries.len())].to_vec(),
        }
    }
}

impl FromStr for Centralizer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "CY" | "Y" => Ok(Centralizer::CY),
            "CX" | "X" => Ok(Centralizer::CX),
            _ => Err(Error::InvalidSequence(format!("unknown centralizer {s:?}"))),
        }
    }
}

/// Builds the algebra of a sequence without checking the Jacobi identity.
pub fn build_maxclass_unchecked(seq: &CentralizerSequence, n: usize) -> Result<GradedAlgebra> {
    let f = PrimeField::new(seq.p)?;
    let built = n + GUARD;
    if seq.len() + 2 < built {
        return Err(Error::InvalidSequence(format!(
            "sequence of length {} cannot reach degree {built}",
            seq.len()
        )));
    }
    let mut b = Builder::new(AlgebraKind::MaximalClass);
    b.push_degree(
        &[(1, Letter::X)],
        FpMatrix::from_rows(&f, &[vec![0, 1]])?,
        FpMatrix::from_rows(&f, &[vec![-1, 0]])?,
    );
    for i in 2..built {
        let (letter, ax, ay) = match seq.get(i).expect("length checked") {
            Centralizer::CY => (Letter::X, 1, 0),
            Centralizer::CX => (Letter::Y, 0, 1),
        };
        b.push_degree(
            &[(0, letter)],
            FpMatrix::from_rows(&f, &[vec![ax]])?,
            FpMatrix::from_rows(&f, &[vec![ay]])?,
        );
    }
    b.finish(f, n)
}

/// Builds the maximal-class algebra of a sequence up to degree `n` and checks
/// that it is a Lie algebra.
pub fn build_maxclass(seq: &CentralizerSequence, n: usize) -> Result<GradedAlgebra> {
    let m = build_maxclass_unchecked(seq, n)?;
    m.validate().into_result()?;
    Ok(m)
}

/// Whether the first `len` entries of `entries` give a Lie algebra of
/// maximal class up to degree `len + 1`.
fn prefix_is_valid(p: u32, entries: &[Centralizer]) -> bool {
    let Ok(seq) = CentralizerSequence::new(p, entries.to_vec()) else {
        return false;
    };
    let n = (entries.len() + 2).saturating_sub(GUARD);
    build_maxclass_unchecked(&seq, n).is_ok_and(|m| m.validate().passed())
}

/// Random sequence of length `len` whose algebra is a Lie algebra of maximal
/// class up to degree `len + 1`, found by a depth-first search that tries the
/// two centralizers in random order at each step.
pub fn random_sequence<R: Rng + ?Sized>(p: u32, len: usize, rng: &mut R) -> Result<CentralizerSequence> {
    PrimeField::new(p)?;
    let mut entries = vec![Centralizer::CY];
    // untried alternatives for each position
    let mut pending: Vec<Vec<Centralizer>> = vec![vec![]];
    while entries.len() < len {
        let mut opts = vec![Centralizer::CY, Centralizer::CX];
        if rng.random_bool(0.5) {
            opts.swap(0, 1);
        }
        pending.push(opts);
        loop {
            let Some(top) = pending.last_mut() else {
                return Err(Error::InvalidSequence("no sequence of the requested length".into()));
            };
            match top.pop() {
                Some(c) => {
                    entries.push(c);
                    if prefix_is_valid(p, &entries) {
                        break;
                    }
                    entries.pop();
                }
                None => {
                    pending.pop();
                    if entries.len() <= 1 {
                        return Err(Error::InvalidSequence("no sequence of the requested length".into()));
                    }
                    entries.pop();
                }
            }
        }
    }
    CentralizerSequence::new(p, entries)
}

/// Reads off `c_i` for every `i` where both generator actions on `M_i` are known.
pub fn extract_centralizer_sequence(m: &GradedAlgebra) -> Result<CentralizerSequence> {
    if m.dim(1) != 2 {
        return Err(Error::NotMaximalClass {
            degree: 1,
            reason: "M_1 is not two-dimensional".into(),
        });
    }
    let mut entries = Vec::new();
    for i in 2..m.built_degree() {
        if m.dim(i) != 1 {
            return Err(Error::NotMaximalClass {
                degree: i,
                reason: format!("dim M_{i} = {}", m.dim(i)),
            });
        }
        let x0 = m.ad_matrix(Letter::X, i).is_zero();
        let y0 = m.ad_matrix(Letter::Y, i).is_zero();
        entries.push(match (x0, y0) {
            (true, false) => Centralizer::CX,
            (false, true) => Centralizer::CY,
            (true, true) => {
                return Err(Error::NotMaximalClass {
                    degree: i,
                    reason: "M_1 centralizes this component".into(),
                })
            }
            (false, false) => {
                return Err(Error::NotMaximalClass {
                    degree: i,
                    reason: "the centralizer is neither F X nor F Y".into(),
                })
            }
        });
    }
    CentralizerSequence::new(m.field().p(), entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequence_invariants() {
        assert!(CentralizerSequence::parse(7, "XY").is_err());
        assert!(CentralizerSequence::parse(7, "YXX").is_err());
        assert!(CentralizerSequence::parse(7, "YXYX").is_ok());
        assert!(CentralizerSequence::parse(7, "YQ").is_err());
        let s = CentralizerSequence::parse(7, "YYYX").unwrap();
        assert_eq!(s.get(5), Some(Centralizer::CX));
        assert_eq!(s.get(1), None);
        assert_eq!(s.cx_positions(), vec![5]);
    }

    #[test]
    fn sequence_json() {
        let s = CentralizerSequence::parse(7, "YYXY").unwrap();
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(j, r#"{"p":7,"entries":"YYXY"}"#);
        let back: CentralizerSequence = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<CentralizerSequence>(r#"{"p":7,"entries":"XX"}"#).is_err());
    }

    #[test]
    fn metabelian_round_trip() {
        let s = CentralizerSequence::metabelian(7, 40).unwrap();
        let m = build_maxclass(&s, 30).unwrap();
        assert_eq!(m.dims()[..4], [2, 1, 1, 1]);
        assert_eq!(m.coclass_excess(), 1);
        let back = extract_centralizer_sequence(&m).unwrap();
        assert_eq!(back, s.prefix(back.len()));
        assert_eq!(m.component(4)[0].word, "YXXX");
    }

    #[test]
    fn random_sequences_are_lie_algebras() {
        use rand::SeedableRng;
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        for _ in 0..3 {
            let s = random_sequence(7, 30, &mut rng).unwrap();
            assert_eq!(s.len(), 30);
            assert!(build_maxclass(&s, 30).is_ok());
        }
    }

    #[test]
    fn short_sequence_is_rejected() {
        let s = CentralizerSequence::metabelian(7, 5).unwrap();
        assert!(build_maxclass(&s, 20).is_err());
    }
}
