//! The derivation `D` with `D x = 0`, `D y = [v_1 y]` on an algebra whose
//! later diamonds are all infinite or fake of type 1, the algebra of maximal
//! class it generates together with `[y x^(q-1)]`, and the round trip back
//! through the tensor construction.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::closure::{build_closure, Ambient, Fingerprint};
use crate::constructions::tensor_construct_partial;
use crate::engine::{
    AlgebraKind, CheckOutcome, Element, GradedAlgebra, Letter, OperatorFamily, ValidationReport,
    Witness, GUARD,
};
use crate::error::{Error, Result};
use crate::gf::FpMatrix;
use crate::maxclass::{build_maxclass, extract_centralizer_sequence, CentralizerSequence};
use crate::patterns::{detect, DiamondPattern, DiamondType};

/// `D` as a graded map of degree `q - 1`, defined on every basis element whose
/// image lies within the built range.
#[derive(Clone, Debug)]
pub struct DerivationRep {
    pub q: usize,
    pub family: OperatorFamily,
}

impl DerivationRep {
    pub fn apply(&self, alg: &GradedAlgebra, u: &Element) -> Result<Element> {
        self.family.apply(&alg.field(), u)
    }

    /// Top source degree on which `D` is known.
    pub fn top_degree(&self) -> usize {
        self.family.maps.keys().next_back().copied().unwrap_or(0)
    }
}

/// Checks that the detected pattern has only infinite or type 1 fake
/// diamonds past `L_q`, each fake isolated between infinite ones.
pub fn check_class(pattern: &DiamondPattern) -> Result<()> {
    let q = pattern.q as usize;
    let mut prev: Option<DiamondType> = None;
    for e in &pattern.entries {
        if e.degree == q {
            prev = Some(e.ty);
            continue;
        }
        match e.ty {
            DiamondType::Infinite => {}
            DiamondType::Fake1 if prev != Some(DiamondType::Fake1) => {}
            t => {
                return Err(Error::NotInClass(format!(
                    "diamond L_{} of type {t} is neither infinite nor an isolated type 1 fake",
                    e.degree
                )))
            }
        }
        prev = Some(e.ty);
    }
    Ok(())
}

/// Builds `D` by recursion on defining words:
/// `D [b', t] = [D b', t] + [b', D t]`.
pub fn build_d(l: &GradedAlgebra) -> Result<DerivationRep> {
    let q = l
        .q()
        .ok_or_else(|| Error::NotInClass("D is defined on Nottingham algebras".into()))? as usize;
    check_class(&detect(l)?.pattern)?;
    let built = l.built_degree();
    let shift = q - 1;
    let v1 = l.eval_word(&format!("y x^{}", q - 2))?;
    let dy = l.ad(Letter::Y, &v1)?;
    let mut images: Vec<Option<Element>> = Vec::with_capacity(l.basis().len());
    for (i, b) in l.basis().iter().enumerate() {
        if b.degree + shift > built {
            images.push(None);
            continue;
        }
        let img = match b.parent {
            None if i == 0 => l.zero(1 + shift),
            None => dy.clone(),
            Some(parent) => {
                let dp = images[parent].as_ref().expect("parent has lower degree");
                let mut out = l.ad(b.letter, dp)?;
                if b.letter == Letter::Y {
                    let extra = l.bracket(&l.basis_element(parent), &dy)?;
                    out = l.add(&out, &extra);
                }
                out
            }
        };
        images.push(Some(img));
    }
    let mut maps = BTreeMap::new();
    for k in 1..=built - shift {
        let cols: Vec<_> = (0..l.dim(k))
            .map(|i| images[l.global_index(k, i)].clone().expect("in range").coords)
            .collect();
        maps.insert(k, FpMatrix::from_columns(l.dim(k + shift), &cols));
    }
    Ok(DerivationRep {
        q,
        family: OperatorFamily {
            shift,
            bidegree_shift: Some((q as i64 - 2, 1)),
            maps,
        },
    })
}

/// Leibniz rule on all basis pairs, commutation with `ad x`, bihomogeneity,
/// and the values of `D` next to infinite and type 1 fake diamonds.
pub fn verify_leibniz(l: &GradedAlgebra, d: &DerivationRep) -> Result<ValidationReport> {
    let q = d.q;
    let top = d.top_degree();
    let basis = l.basis();
    let word = |i: usize| basis[i].word.clone();

    let mut leibniz = CheckOutcome::new("leibniz");
    for a in 0..basis.len() {
        for b in 0..basis.len() {
            let deg = basis[a].degree + basis[b].degree;
            if deg > top {
                continue;
            }
            let (ea, eb) = (l.basis_element(a), l.basis_element(b));
            let lhs = d.apply(l, &l.bracket(&ea, &eb)?)?;
            let r1 = l.bracket(&d.apply(l, &ea)?, &eb)?;
            let r2 = l.bracket(&ea, &d.apply(l, &eb)?)?;
            let ok = lhs == l.add(&r1, &r2);
            leibniz.record(ok, deg, || Witness {
                degree: deg,
                words: vec![word(a), word(b)],
                detail: "D[a, b] != [D a, b] + [a, D b]".into(),
            });
        }
    }

    let f = l.field();
    let mut commute = CheckOutcome::new("commutes_with_ad_x");
    for (&k, m) in &d.family.maps {
        if k + 1 > top {
            break;
        }
        let lhs = d.family.maps[&(k + 1)].mul(&f, l.ad_matrix(Letter::X, k));
        let rhs = l.ad_matrix(Letter::X, k + q - 1).mul(&f, m);
        commute.record(lhs == rhs, k, || Witness {
            degree: k,
            words: vec![],
            detail: "D ad x != ad x D".into(),
        });
    }

    let mut bideg = CheckOutcome::new("bidegree");
    for (i, b) in basis.iter().enumerate() {
        if b.degree > top {
            break;
        }
        let img = d.apply(l, &l.basis_element(i))?;
        let want = (b.bidegree.0 + q - 2, b.bidegree.1 + 1);
        let ok = img.coords.iter().enumerate().all(|(j, &c)| {
            c == 0 || basis[l.global_index(img.degree, j)].bidegree == want
        });
        bideg.record(ok, b.degree, || Witness {
            degree: b.degree,
            words: vec![word(i)],
            detail: format!("D image leaves bidegree {want:?}"),
        });
    }

    let mut steps = CheckOutcome::new("diamond_values");
    let v1 = l.eval_word(&format!("y x^{}", q - 2))?;
    let v2 = l.eval_word(&format!("y x^{} y x^{}", q - 1, q - 3))?;
    let dv1 = d.apply(l, &v1)?;
    steps.record(dv1 == l.scale(&v2, f.neg(2)), q - 1, || Witness {
        degree: q - 1,
        words: vec![],
        detail: "D v1 != -2 v2".into(),
    });
    let pattern = detect(l)?.pattern;
    let dy = l.ad(Letter::Y, &v1)?;
    for e in &pattern.entries {
        let m = e.degree;
        if m <= q || m - 1 + q - 1 > top {
            continue;
        }
        let v = l.basis_element(l.global_index(m - 1, 0));
        let vx = l.ad(Letter::X, &v)?;
        let next = pattern.type_at(m + q - 1);
        match e.ty {
            DiamondType::Infinite => {
                // [v [v_1 y]] = 0 next to an infinite diamond
                if m - 1 + q <= l.built_degree() {
                    let z = l.bracket(&v, &dy)?;
                    steps.record(z.is_zero(), m, || Witness {
                        degree: m,
                        words: vec![],
                        detail: "[v [v1 y]] != 0 at an infinite diamond".into(),
                    });
                }
                if matches!(next, Some(DiamondType::Infinite | DiamondType::Fake1)) {
                    let w = l.ad_word(&v, &crate::engine::parse_word(&format!("x y x^{}", q - 3))?)?;
                    let want = l.scale(&l.ad(Letter::X, &w)?, f.neg(2));
                    steps.record(d.apply(l, &vx)? == want, m, || Witness {
                        degree: m,
                        words: vec![],
                        detail: "D[v x] != -2[w x]".into(),
                    });
                }
            }
            DiamondType::Fake1 if pattern.type_at(m + q) == Some(DiamondType::Infinite) => {
                steps.record(d.apply(l, &vx)?.is_zero(), m, || Witness {
                    degree: m,
                    words: vec![],
                    detail: "D[v x] != 0 at a type 1 fake".into(),
                });
            }
            _ => {}
        }
    }
    Ok(ValidationReport {
        checks: vec![leibniz, commute, bideg, steps],
    })
}

/// Element of `L + F D`: homogeneous parts of `L` plus a multiple of `D`.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Extended {
    parts: BTreeMap<usize, Element>,
    d: u32,
}

struct ExtendedAmbient<'a> {
    l: &'a GradedAlgebra,
    d: &'a DerivationRep,
}

impl ExtendedAmbient<'_> {
    fn push(&self, out: &mut BTreeMap<usize, Element>, e: Element) {
        if e.is_zero() {
            return;
        }
        match out.remove(&e.degree) {
            Some(prev) => {
                let s = self.l.add(&prev, &e);
                if !s.is_zero() {
                    out.insert(s.degree, s);
                }
            }
            None => {
                out.insert(e.degree, e);
            }
        }
    }
}

impl Ambient for ExtendedAmbient<'_> {
    type Elem = Extended;

    // [(u, a), (v, b)] = [u, v] + b D(u) - a D(v), so that [u, D] = D(u)
    fn bracket(&self, a: &Extended, b: &Extended) -> Result<Extended> {
        let f = self.l.field();
        let mut parts = BTreeMap::new();
        for u in a.parts.values() {
            for v in b.parts.values() {
                self.push(&mut parts, self.l.bracket(u, v)?);
            }
        }
        if b.d != 0 {
            for u in a.parts.values() {
                self.push(&mut parts, self.l.scale(&self.d.apply(self.l, u)?, b.d));
            }
        }
        if a.d != 0 {
            for v in b.parts.values() {
                self.push(&mut parts, self.l.scale(&self.d.apply(self.l, v)?, f.neg(a.d)));
            }
        }
        Ok(Extended { parts, d: 0 })
    }

    fn fingerprint(&self, a: &Extended) -> Fingerprint {
        let mut fp = Fingerprint::new();
        for e in a.parts.values() {
            for (i, &c) in e.coords.iter().enumerate() {
                if c != 0 {
                    fp.insert(((e.degree as u64) << 8) | i as u64, c);
                }
            }
        }
        if a.d != 0 {
            fp.insert(u64::MAX, a.d);
        }
        fp
    }
}

/// The algebra of maximal class generated by `X = D` and `Y = [y x^(q-1)]`
/// inside `L + F D`, and its centralizer sequence.
pub fn extract_m(l: &GradedAlgebra, d: &DerivationRep) -> Result<(GradedAlgebra, CentralizerSequence)> {
    let q = d.q;
    let amb = ExtendedAmbient { l, d };
    let x = Extended {
        parts: BTreeMap::new(),
        d: 1,
    };
    let yel = l.eval_word(&format!("y x^{}", q - 1))?;
    let y = Extended {
        parts: BTreeMap::from([(yel.degree, yel)]),
        d: 0,
    };
    let target = l.built_degree() / (q - 1) + 2;
    let closure = build_closure(&amb, l.field(), AlgebraKind::MaximalClass, x, y, target, target, true)
        .map_err(|e| match e {
            Error::NotThin { degree, .. } | Error::ZeroComponent { degree } => Error::NotMaximalClass {
                degree,
                reason: "the generated algebra is not of maximal class".into(),
            },
            e => e,
        })?;
    let m = closure.algebra;
    let seq = extract_centralizer_sequence(&m)?;
    Ok((m, seq))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundTripReport {
    pub schema_version: u32,
    pub stages: Vec<Stage>,
    pub extracted_sequence: CentralizerSequence,
    /// Degree up to which the two patterns are compared.
    pub compared_degree: usize,
    #[serde(rename = "pattern_L")]
    pub pattern_l: DiamondPattern,
    #[serde(rename = "pattern_T")]
    pub pattern_t: DiamondPattern,
    pub pass: bool,
}

/// Extra degrees `L` must be built beyond the compared degree so that the
/// extracted sequence determines the rebuilt algebra that far.
pub fn roundtrip_margin(q: u64) -> usize {
    q as usize + 2 * GUARD
}

/// Extracts `M` from `L`, rebuilds `T` from `M`'s centralizer sequence with the
/// tensor construction, and compares the detected patterns up to degree `n`.
pub fn roundtrip_check(l: &GradedAlgebra, n: usize) -> Result<RoundTripReport> {
    let q = l
        .q()
        .ok_or_else(|| Error::NotInClass("round trip applies to Nottingham algebras".into()))?;
    let mut stages = Vec::new();
    let pattern_l = detect(&l.with_nominal(n.min(l.nominal_degree()))?)
        .map_err(|e| e.at_stage("detect"))?
        .pattern;
    stages.push(Stage {
        name: "detect".into(),
        ok: true,
        detail: format!("{} diamonds", pattern_l.entries.len()),
    });
    let d = build_d(l).map_err(|e| e.at_stage("derivation"))?;
    let report = verify_leibniz(l, &d).map_err(|e| e.at_stage("derivation"))?;
    stages.push(Stage {
        name: "derivation".into(),
        ok: report.passed(),
        detail: format!("known up to degree {}", d.top_degree()),
    });
    report.into_result().map_err(|e| e.at_stage("derivation"))?;
    let (_, seq) = extract_m(l, &d).map_err(|e| e.at_stage("extract"))?;
    stages.push(Stage {
        name: "extract".into(),
        ok: true,
        detail: format!("c_2..c_{}", seq.len() + 1),
    });
    let m = build_maxclass(&seq, seq.len()).map_err(|e| e.at_stage("maxclass"))?;
    stages.push(Stage {
        name: "maxclass".into(),
        ok: true,
        detail: format!("built to degree {}", m.built_degree()),
    });
    let t = tensor_construct_partial(&m, q, n).map_err(|e| e.at_stage("tensor"))?;
    let compared = t.algebra.nominal_degree();
    stages.push(Stage {
        name: "tensor".into(),
        ok: compared >= n,
        detail: format!("built to degree {compared}"),
    });
    let pattern_t = detect(&t.algebra).map_err(|e| e.at_stage("compare"))?.pattern;
    let pass = compared >= n && pattern_t == pattern_l.truncated(compared);
    stages.push(Stage {
        name: "compare".into(),
        ok: pass,
        detail: format!("patterns compared up to degree {compared}"),
    });
    Ok(RoundTripReport {
        schema_version: crate::SCHEMA_VERSION,
        stages,
        extracted_sequence: seq,
        compared_degree: compared,
        pattern_l,
        pattern_t,
        pass,
    })
}
