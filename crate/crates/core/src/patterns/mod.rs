//! Diamond patterns: the degrees and types of the two-dimensional (and fake)
//! components of a Nottingham algebra, which determine the algebra.
//!
//! Internally a pattern is kept as a skeleton: the genuine diamonds with their
//! types, plus the "y-steps", degrees `k` where `x` centralizes `L_k` and `y`
//! does not. A fake diamond of type 1 in degree `k` and a fake diamond of type
//! 0 in degree `k + 1` are two readings of the same y-step.

mod families;
mod lemmas;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::engine::{AlgebraKind, Builder, GradedAlgebra, Letter, ValidationReport, GUARD};
use crate::error::{Error, Result};
use crate::gf::{FpMatrix, PrimeField};

pub use families::{
    compile_family, family_pattern, family_pattern_for, uniqueness_sequence, Family, FamilySpec,
};
pub use lemmas::{verify_lemma_suite, LemmaInstance, LemmaReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DiamondType {
    /// Genuine diamond of finite type `mu`, stored as the signed residue in `(-p/2, p/2]`.
    Finite(i64),
    Infinite,
    Fake1,
    Fake0,
}

impl DiamondType {
    /// Genuine finite type; `0` and `1` are not genuine types.
    pub fn finite(f: &PrimeField, mu: i64) -> Result<Self> {
        match f.reduce(mu) {
            0 | 1 => Err(Error::InvalidPattern(format!(
                "{mu} is not a genuine diamond type"
            ))),
            r => Ok(DiamondType::Finite(f.signed(r))),
        }
    }

    pub fn is_fake(&self) -> bool {
        matches!(self, DiamondType::Fake0 | DiamondType::Fake1)
    }

    /// `mu^{-1}` with the convention `infinity^{-1} = 0`.
    pub fn inverse(&self, f: &PrimeField) -> Option<u32> {
        match self {
            DiamondType::Finite(mu) => f.inv(f.reduce(*mu)).ok(),
            DiamondType::Infinite => Some(0),
            DiamondType::Fake1 => Some(1),
            DiamondType::Fake0 => None,
        }
    }

    /// Short label used in diagrams.
    pub fn label(&self) -> String {
        match self {
            DiamondType::Finite(mu) => mu.to_string(),
            DiamondType::Infinite => "inf".into(),
            DiamondType::Fake1 => "1".into(),
            DiamondType::Fake0 => "0".into(),
        }
    }
}

impl fmt::Display for DiamondType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiamondType::Finite(mu) => write!(f, "finite:{mu}"),
            DiamondType::Infinite => write!(f, "infinite"),
            DiamondType::Fake1 => write!(f, "fake1"),
            DiamondType::Fake0 => write!(f, "fake0"),
        }
    }
}

impl FromStr for DiamondType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "infinite" | "inf" => Ok(DiamondType::Infinite),
            "fake1" => Ok(DiamondType::Fake1),
            "fake0" => Ok(DiamondType::Fake0),
            _ => s
                .strip_prefix("finite:")
                .and_then(|v| v.trim().parse().ok())
                .map(DiamondType::Finite)
                .ok_or_else(|| Error::InvalidPattern(format!("unknown diamond type {s:?}"))),
        }
    }
}

impl Serialize for DiamondType {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DiamondType {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PatternEntry {
    pub degree: usize,
    #[serde(rename = "type")]
    pub ty: DiamondType,
}

impl PatternEntry {
    pub fn new(degree: usize, ty: DiamondType) -> Self {
        PatternEntry { degree, ty }
    }
}

/// Diamonds from the second one on; the first diamond `L_1` is implicit.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DiamondPattern {
    pub p: u32,
    pub q: u64,
    pub entries: Vec<PatternEntry>,
}

impl DiamondPattern {
    pub fn new(p: u32, q: u64, entries: Vec<PatternEntry>) -> Self {
        DiamondPattern { p, q, entries }
    }

    /// Entries of degree at most `n`.
    pub fn truncated(&self, n: usize) -> DiamondPattern {
        DiamondPattern {
            p: self.p,
            q: self.q,
            entries: self.entries.iter().copied().filter(|e| e.degree <= n).collect(),
        }
    }

    pub fn type_at(&self, degree: usize) -> Option<DiamondType> {
        self.entries.iter().find(|e| e.degree == degree).map(|e| e.ty)
    }

    pub fn last_degree(&self) -> usize {
        self.entries.last().map_or(0, |e| e.degree)
    }

    pub fn degrees_of(&self, ty: DiamondType) -> Vec<usize> {
        self.entries.iter().filter(|e| e.ty == ty).map(|e| e.degree).collect()
    }

    pub fn has_fakes(&self) -> bool {
        self.entries.iter().any(|e| e.ty.is_fake())
    }

    fn field(&self) -> Result<PrimeField> {
        let f = PrimeField::new(self.p)?;
        crate::check_q(self.p, self.q)?;
        Ok(f)
    }
}

impl fmt::Display for DiamondPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .entries
            .iter()
            .map(|e| format!("{}:{}", e.degree, e.ty.label()))
            .collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// Canonical reading of a pattern plus the other admissible readings of its fake diamonds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Normalized {
    pub pattern: DiamondPattern,
    pub alternates: Vec<PatternEntry>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub(crate) struct Skeleton {
    pub genuine: BTreeMap<usize, DiamondType>,
    pub ysteps: BTreeSet<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Event {
    Genuine(usize, DiamondType),
    YStep(usize),
}

impl Event {
    fn position(&self) -> usize {
        match self {
            Event::Genuine(m, _) | Event::YStep(m) => *m,
        }
    }
}

impl Skeleton {
    fn from_entries(f: &PrimeField, entries: &[PatternEntry]) -> Result<Self> {
        let mut s = Skeleton::default();
        for e in entries {
            match e.ty {
                DiamondType::Fake1 => {
                    s.ysteps.insert(e.degree);
                }
                DiamondType::Fake0 => {
                    s.ysteps.insert(e.degree - 1);
                }
                DiamondType::Finite(mu) => {
                    s.genuine.insert(e.degree, DiamondType::finite(f, mu)?);
                }
                DiamondType::Infinite => {
                    s.genuine.insert(e.degree, DiamondType::Infinite);
                }
            }
        }
        Ok(s)
    }

    fn events(&self) -> Vec<Event> {
        let mut ev: Vec<Event> = self
            .genuine
            .iter()
            .map(|(&m, &t)| Event::Genuine(m, t))
            .chain(self.ysteps.iter().map(|&k| Event::YStep(k)))
            .collect();
        ev.sort_by_key(|e| e.position());
        ev
    }

    /// Last degree whose structure the skeleton pins down.
    fn covered_degree(&self, q: usize) -> usize {
        let last = self
            .genuine
            .keys()
            .chain(self.ysteps.iter())
            .max()
            .copied()
            .unwrap_or(0);
        last + q - 2
    }

    pub fn is_infinite(&self, m: usize) -> bool {
        self.genuine.get(&m) == Some(&DiamondType::Infinite)
    }
}

fn normalize_skeleton(p: u32, q: u64, skel: &Skeleton) -> Result<Normalized> {
    let q = q as usize;
    let events = skel.events();
    if events.windows(2).any(|w| w[0].position() == w[1].position()) {
        return Err(Error::InvalidPattern(
            "a fake diamond collides with a genuine one".into(),
        ));
    }
    let mut entries = Vec::with_capacity(events.len());
    let mut alternates = Vec::new();
    let mut iter = events.into_iter();
    match iter.next() {
        Some(Event::Genuine(m, DiamondType::Finite(-1))) if m == q => {
            entries.push(PatternEntry::new(q, DiamondType::Finite(-1)));
        }
        _ => {
            return Err(Error::InvalidPattern(format!(
                "the first diamond after L_1 must be L_{q} of type -1"
            )))
        }
    }
    for ev in iter {
        let prev = *entries.last().expect("nonempty");
        let admissible =
            |m: usize| m == prev.degree + q - 1 || (m == prev.degree + q && prev.ty == DiamondType::Fake1);
        match ev {
            Event::Genuine(m, t) => {
                if !admissible(m) {
                    return Err(Error::InvalidPattern(format!(
                        "diamond L_{m} at distance {} from L_{}",
                        m.saturating_sub(prev.degree),
                        prev.degree
                    )));
                }
                entries.push(PatternEntry::new(m, t));
            }
            Event::YStep(k) => {
                if admissible(k) {
                    entries.push(PatternEntry::new(k, DiamondType::Fake1));
                    alternates.push(PatternEntry::new(k + 1, DiamondType::Fake0));
                } else if admissible(k + 1) {
                    entries.push(PatternEntry::new(k + 1, DiamondType::Fake0));
                    alternates.push(PatternEntry::new(k, DiamondType::Fake1));
                } else {
                    return Err(Error::InvalidPattern(format!(
                        "fake diamond at L_{k}/L_{} is at distance {} from L_{}",
                        k + 1,
                        k.saturating_sub(prev.degree),
                        prev.degree
                    )));
                }
            }
        }
    }
    Ok(Normalized {
        pattern: DiamondPattern::new(p, q as u64, entries),
        alternates,
    })
}

/// Canonical reading of a raw pattern: each fake diamond is read as type 1
/// unless only the type 0 reading keeps the distance to the previous diamond
/// at `q - 1` (or `q` after a type 1 fake).
pub fn normalize(raw: &DiamondPattern) -> Result<Normalized> {
    let f = raw.field()?;
    if raw.entries.windows(2).any(|w| w[0].degree >= w[1].degree) {
        return Err(Error::InvalidPattern(
            "entries must have strictly increasing degrees".into(),
        ));
    }
    let skel = Skeleton::from_entries(&f, &raw.entries)?;
    if skel.genuine.len() + skel.ysteps.len() != raw.entries.len() {
        return Err(Error::InvalidPattern("duplicate diamond readings".into()));
    }
    normalize_skeleton(raw.p, raw.q, &skel)
}

/// Adjoint step out of a one-dimensional component.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Step {
    X,
    Y,
    Both,
}

/// Builds the algebra of a pattern without validating it.
pub fn compile_unchecked(pattern: &DiamondPattern, n: usize) -> Result<GradedAlgebra> {
    let f = pattern.field()?;
    let q = pattern.q as usize;
    if n < q + 2 {
        return Err(Error::InvalidPattern(format!(
            "degree bound {n} is below q + 2 = {}",
            q + 2
        )));
    }
    let skel = Skeleton::from_entries(&f, &pattern.entries)?;
    normalize_skeleton(pattern.p, pattern.q, &skel)?;
    let built = n + GUARD;
    let covered = skel.covered_degree(q);
    if built > covered {
        return Err(Error::PatternTooShort {
            needed: built,
            covered,
        });
    }
    let mut b = Builder::new(AlgebraKind::Nottingham { q: pattern.q });
    b.push_degree(
        &[(1, Letter::X)],
        FpMatrix::from_rows(&f, &[vec![0, 1]])?,
        FpMatrix::from_rows(&f, &[vec![-1, 0]])?,
    );
    for k in 2..built {
        if let Some(t) = skel.genuine.get(&k) {
            let lambda = match t {
                DiamondType::Finite(mu) => f.sub(f.inv(f.reduce(*mu))?, 1),
                _ => f.neg(1),
            };
            b.push_degree(
                &[(0, Letter::Y)],
                FpMatrix::from_rows(&f, &[vec![0, lambda as i64]])?,
                FpMatrix::from_rows(&f, &[vec![1, 0]])?,
            );
            continue;
        }
        let step = if skel.genuine.contains_key(&(k + 1)) {
            Step::Both
        } else if skel.ysteps.contains(&k) {
            Step::Y
        } else {
            Step::X
        };
        let (elems, ax, ay): (&[(usize, Letter)], _, _) = match step {
            Step::X => (&[(0, Letter::X)], vec![vec![1]], vec![vec![0]]),
            Step::Y => (&[(0, Letter::Y)], vec![vec![0]], vec![vec![1]]),
            Step::Both => (
                &[(0, Letter::X), (0, Letter::Y)],
                vec![vec![1], vec![0]],
                vec![vec![0], vec![1]],
            ),
        };
        b.push_degree(elems, FpMatrix::from_rows(&f, &ax)?, FpMatrix::from_rows(&f, &ay)?);
    }
    b.finish(f, n)
}

/// Builds the algebra of a pattern up to degree `n` and validates it.
///
/// Fails with [`Error::ValidationFailed`] when the pattern is inconsistent
/// within the built range.
pub fn compile(pattern: &DiamondPattern, n: usize) -> Result<(GradedAlgebra, ValidationReport)> {
    let alg = compile_unchecked(pattern, n)?;
    let report = alg.validate().into_result()?;
    Ok((alg, report))
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub second_diamond: usize,
    pub anomalies: Vec<String>,
    pub alternates: Vec<PatternEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Detection {
    pub pattern: DiamondPattern,
    pub report: DetectionReport,
}

pub(crate) fn detect_skeleton(alg: &GradedAlgebra) -> Result<(Skeleton, usize, Vec<String>)> {
    let f = alg.field();
    let built = alg.built_degree();
    let mut anomalies = Vec::new();
    let mut skel = Skeleton::default();
    let mut second = None;
    let first_entry = |v: &crate::gf::FpVector| v.first().copied().unwrap_or(0);
    for m in 2..built {
        let dim = alg.dim(m);
        if dim == 2 {
            second.get_or_insert(m);
            if alg.dim(m - 1) != 1 || alg.dim(m + 1) != 1 {
                return Err(Error::Untypable { degree: m });
            }
            let w = alg.basis_element(alg.global_index(m - 1, 0));
            let a = alg.ad(Letter::X, &w)?;
            let b = alg.ad(Letter::Y, &w)?;
            let axx = alg.ad(Letter::X, &a)?;
            let byy = alg.ad(Letter::Y, &b)?;
            if !axx.is_zero() || !byy.is_zero() {
                anomalies.push(format!("L_{m}: [wxx] or [wyy] is nonzero"));
            }
            let lambda = first_entry(&alg.ad(Letter::X, &b)?.coords);
            let kappa = first_entry(&alg.ad(Letter::Y, &a)?.coords);
            let s = f.add(lambda, kappa);
            let ty = if s == 0 {
                if lambda == 0 {
                    return Err(Error::Untypable { degree: m });
                }
                DiamondType::Infinite
            } else {
                let mu = f.div(kappa, s)?;
                if mu == 0 || mu == 1 {
                    return Err(Error::Untypable { degree: m });
                }
                DiamondType::Finite(f.signed(mu))
            };
            skel.genuine.insert(m, ty);
        } else if m + 1 < built {
            let ax = alg.ad_matrix(Letter::X, m);
            let ay = alg.ad_matrix(Letter::Y, m);
            match (ax.is_zero(), ay.is_zero()) {
                (true, true) => anomalies.push(format!("L_{m} is central")),
                (true, false) => {
                    if alg.dim(m + 1) != 1 || !alg.ad_matrix(Letter::Y, m + 1).is_zero() {
                        anomalies.push(format!("y-step at L_{m} is not followed by [Lyy] = 0"));
                    }
                    skel.ysteps.insert(m);
                }
                (false, false) if alg.dim(m + 1) == 1 => {
                    anomalies.push(format!("neither generator centralizes L_{m}"));
                }
                _ => {}
            }
        }
    }
    let second = second.ok_or_else(|| Error::NotInClass("no second diamond in range".into()))?;
    if let Some(q) = alg.q() {
        if q as usize != second {
            anomalies.push(format!("second diamond in degree {second}, expected {q}"));
        }
    }
    Ok((skel, second, anomalies))
}

/// Reads the diamond pattern off the adjoint actions of a built algebra.
pub fn detect(alg: &GradedAlgebra) -> Result<Detection> {
    let (skel, second, anomalies) = detect_skeleton(alg)?;
    let normalized = normalize_skeleton(alg.field().p(), second as u64, &skel)?;
    let n = alg.nominal_degree();
    Ok(Detection {
        pattern: normalized.pattern.truncated(n),
        report: DetectionReport {
            second_diamond: second,
            anomalies,
            alternates: normalized
                .alternates
                .into_iter()
                .filter(|e| e.degree <= n)
                .collect(),
        },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regularity {
    Regular,
    Irregular,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub regularity: Regularity,
    /// Bidegrees of the support outside the closed region (at most a few).
    pub outside: Vec<(usize, usize)>,
    /// Whether the open region (up to degree N) lies inside the support.
    pub contains_open_region: bool,
    /// Whether the support equals the closed region up to degree N.
    pub equals_closed_region: bool,
}

/// `-1 <= (q-2)s - r <= q-2`, with `r, s >= 0`.
pub fn in_closed_region(q: u64, (r, s): (usize, usize)) -> bool {
    let v = (q as i64 - 2) * s as i64 - r as i64;
    (-1..=q as i64 - 2).contains(&v)
}

pub fn in_open_region(q: u64, (r, s): (usize, usize)) -> bool {
    let v = (q as i64 - 2) * s as i64 - r as i64;
    -1 < v && v < q as i64 - 2
}

pub fn classify_regularity(alg: &GradedAlgebra) -> Result<RegularityReport> {
    let q = alg
        .q()
        .ok_or_else(|| Error::NotInClass("regularity applies to Nottingham algebras".into()))?;
    let n = alg.nominal_degree();
    let support = alg.support();
    let outside: Vec<_> = support
        .iter()
        .copied()
        .filter(|&b| !in_closed_region(q, b))
        .collect();
    let region = |pred: fn(u64, (usize, usize)) -> bool| -> BTreeSet<(usize, usize)> {
        (1..=n)
            .flat_map(|d| (0..=d).map(move |s| (d - s, s)))
            .filter(|&b| pred(q, b))
            .collect()
    };
    let open = region(in_open_region);
    let closed = region(in_closed_region);
    Ok(RegularityReport {
        regularity: if outside.is_empty() {
            Regularity::Regular
        } else {
            Regularity::Irregular
        },
        outside: outside.into_iter().take(8).collect(),
        contains_open_region: open.is_subset(&support),
        equals_closed_region: closed == support,
    })
}

/// Degrees where `ad y` should vanish after each diamond `L_m`: `L_{m+1}, ..., L_{m+q-3}`.
pub fn check_distances(alg: &GradedAlgebra, pattern: &DiamondPattern) -> crate::engine::CheckOutcome {
    let q = pattern.q as usize;
    let mut out = crate::engine::CheckOutcome::new("distance");
    for w in pattern.entries.windows(2) {
        let gap = w[1].degree - w[0].degree;
        let ok = gap == q - 1 || (gap == q && w[0].ty == DiamondType::Fake1);
        out.record(ok, w[1].degree, || crate::engine::Witness {
            degree: w[1].degree,
            words: vec![],
            detail: format!("gap {gap} after {}:{}", w[0].degree, w[0].ty),
        });
    }
    for e in &pattern.entries {
        for k in e.degree + 1..=e.degree + q - 3 {
            if k >= alg.built_degree() {
                break;
            }
            let ok = alg.ad_matrix(Letter::Y, k).is_zero();
            out.record(ok, k, || crate::engine::Witness {
                degree: k,
                words: vec![],
                detail: format!("ad y is nonzero on L_{k} after the diamond L_{}", e.degree),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pat(entries: &[(usize, &str)]) -> DiamondPattern {
        DiamondPattern::new(
            7,
            7,
            entries
                .iter()
                .map(|&(d, t)| PatternEntry::new(d, t.parse().unwrap()))
                .collect(),
        )
    }

    #[test]
    fn canonical_pattern_is_unchanged() {
        let p = pat(&[(7, "finite:-1"), (13, "infinite")]);
        assert_eq!(normalize(&p).unwrap().pattern, p);
    }

    #[test]
    fn fake_zero_is_read_as_fake_one() {
        let p = pat(&[(7, "finite:-1"), (14, "fake0")]);
        let n = normalize(&p).unwrap();
        assert_eq!(n.pattern, pat(&[(7, "finite:-1"), (13, "fake1")]));
        assert_eq!(n.alternates, vec![PatternEntry::new(14, DiamondType::Fake0)]);
    }

    #[test]
    fn fake_zero_kept_when_forced() {
        let p = pat(&[(7, "finite:-1"), (13, "fake0"), (19, "infinite")]);
        assert_eq!(normalize(&p).unwrap().pattern, p);
    }

    #[test]
    fn wrong_distance_is_rejected() {
        let p = pat(&[(7, "finite:-1"), (15, "infinite")]);
        assert!(matches!(normalize(&p), Err(Error::InvalidPattern(_))));
        let p = pat(&[(7, "finite:-1"), (14, "infinite")]);
        assert!(normalize(&p).is_err());
        let p = pat(&[(7, "infinite")]);
        assert!(normalize(&p).is_err());
        let p = pat(&[(7, "finite:-1"), (13, "infinite"), (13, "infinite")]);
        assert!(normalize(&p).is_err());
    }

    #[test]
    fn types_zero_and_one_are_not_genuine() {
        let f = PrimeField::new(7).unwrap();
        assert!(DiamondType::finite(&f, 0).is_err());
        assert!(DiamondType::finite(&f, 8).is_err());
        assert_eq!(DiamondType::finite(&f, 6).unwrap(), DiamondType::Finite(-1));
    }

    #[test]
    fn type_strings_round_trip() {
        for t in [
            DiamondType::Finite(-3),
            DiamondType::Infinite,
            DiamondType::Fake0,
            DiamondType::Fake1,
        ] {
            assert_eq!(t.to_string().parse::<DiamondType>().unwrap(), t);
        }
        assert!("finite:x".parse::<DiamondType>().is_err());
    }

    #[test]
    fn regions() {
        assert!(in_closed_region(7, (1, 0)));
        assert!(in_closed_region(7, (0, 1)));
        assert!(in_closed_region(7, (5, 2)));
        assert!(!in_closed_region(7, (4, 2)));
        assert!(!in_open_region(7, (1, 0)));
    }

    #[test]
    fn short_pattern_is_reported() {
        let p = pat(&[(7, "finite:-1"), (13, "infinite")]);
        assert!(matches!(
            compile_unchecked(&p, 40),
            Err(Error::PatternTooShort { .. })
        ));
    }
}
