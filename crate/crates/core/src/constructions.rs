//! Explicit constructions: the divided power algebra, the tensor construction
//! of a Nottingham algebra from an algebra of maximal class, and deflation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::closure::{build_closure, Ambient, Fingerprint};
use crate::engine::{AlgebraKind, CheckOutcome, GradedAlgebra, Letter, OperatorFamily, Witness, GUARD};
use crate::error::{Error, Result};
use crate::gf::{kernel, lucas_binom, FpMatrix, FpVector, PrimeField};
use crate::patterns::{compile, family_pattern_for, Family};

/// `eps^(i) * eps^(j) = C(i+j, i) eps^(i+j)`, zero past `q - 1`.
///
/// Returns `(coefficient, index)` or `None` when the product vanishes.
pub fn divided_power_product(f: &PrimeField, i: usize, j: usize, q: usize) -> Result<Option<(u32, usize)>> {
    if i >= q || j >= q {
        return Err(Error::DimensionMismatch(format!(
            "divided power index out of range 0..{q}: ({i}, {j})"
        )));
    }
    if i + j >= q {
        return Ok(None);
    }
    let c = lucas_binom((i + j) as u64, i as u64, f.p());
    Ok((c != 0).then_some((c, i + j)))
}

/// The divided power algebra `F[eps; q]` with its standard derivation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DividedPowerAlgebra {
    pub field: PrimeField,
    pub q: usize,
}

impl DividedPowerAlgebra {
    pub fn new(p: u32, q: u64) -> Result<Self> {
        let field = PrimeField::new(p)?;
        crate::check_q(p, q)?;
        Ok(DividedPowerAlgebra {
            field,
            q: q as usize,
        })
    }

    pub fn product(&self, i: usize, j: usize) -> Option<(u32, usize)> {
        divided_power_product(&self.field, i, j, self.q).expect("indices in range")
    }

    fn mul(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        let f = &self.field;
        let mut out = vec![0; self.q];
        for (i, &ai) in a.iter().enumerate().filter(|(_, c)| **c != 0) {
            for (j, &bj) in b.iter().enumerate().filter(|(_, c)| **c != 0) {
                if let Some((c, k)) = self.product(i, j) {
                    out[k] = f.add(out[k], f.mul(c, f.mul(ai, bj)));
                }
            }
        }
        out
    }

    fn unit(&self, i: usize) -> Vec<u32> {
        let mut v = vec![0; self.q];
        v[i] = 1;
        v
    }

    fn derivative(&self, a: &[u32]) -> Vec<u32> {
        let mut out = vec![0; self.q];
        out[..self.q - 1].copy_from_slice(&a[1..]);
        out
    }

    /// Commutativity, associativity, the Leibniz rule for the derivation, and
    /// vanishing of `C(i+j, i)` for `q <= i+j <= 2q-2`, over all basis tuples.
    pub fn check(&self) -> Vec<CheckOutcome> {
        let q = self.q;
        let e: Vec<Vec<u32>> = (0..q).map(|i| self.unit(i)).collect();
        let w = |d: usize, s: String| Witness {
            degree: d,
            words: vec![],
            detail: s,
        };
        let mut comm = CheckOutcome::new("commutative");
        let mut assoc = CheckOutcome::new("associative");
        let mut leibniz = CheckOutcome::new("leibniz");
        let mut trunc = CheckOutcome::new("truncation");
        for i in 0..q {
            for j in 0..q {
                let ab = self.mul(&e[i], &e[j]);
                comm.record(ab == self.mul(&e[j], &e[i]), i + j, || w(i + j, format!("({i}, {j})")));
                let lhs = self.derivative(&ab);
                let r1 = self.mul(&self.derivative(&e[i]), &e[j]);
                let r2 = self.mul(&e[i], &self.derivative(&e[j]));
                let rhs: Vec<u32> = r1.iter().zip(&r2).map(|(a, b)| self.field.add(*a, *b)).collect();
                leibniz.record(lhs == rhs, i + j, || w(i + j, format!("({i}, {j})")));
                if i + j >= q {
                    let c = lucas_binom((i + j) as u64, i as u64, self.field.p());
                    trunc.record(c == 0, i + j, || w(i + j, format!("C({}, {i}) = {c}", i + j)));
                }
                for k in 0..q {
                    let l = self.mul(&ab, &e[k]);
                    let r = self.mul(&e[i], &self.mul(&e[j], &e[k]));
                    assoc.record(l == r, i + j + k, || w(i + j + k, format!("({i}, {j}, {k})")));
                }
            }
        }
        vec![comm, assoc, leibniz, trunc]
    }
}

/// Element of `M (x) F[eps; q] + F (1 (x) d)`: terms `U_a (x) eps^(j)` keyed by
/// `(global basis index of U_a in M, j)`, plus a multiple of `1 (x) d`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorElement {
    pub terms: BTreeMap<(usize, usize), u32>,
    pub d: u32,
}

impl TensorElement {
    pub fn is_zero(&self) -> bool {
        self.d == 0 && self.terms.is_empty()
    }

    fn add_term(&mut self, f: &PrimeField, key: (usize, usize), c: u32) {
        let e = self.terms.entry(key).or_insert(0);
        *e = f.add(*e, c);
        if *e == 0 {
            self.terms.remove(&key);
        }
    }
}

/// The ambient Lie algebra of the tensor construction.
#[derive(Clone, Debug)]
pub struct TensorAmbient {
    pub m: GradedAlgebra,
    pub dp: DividedPowerAlgebra,
}

impl TensorAmbient {
    pub fn new(m: GradedAlgebra, q: u64) -> Result<Self> {
        if m.kind() != AlgebraKind::MaximalClass {
            return Err(Error::NotMaximalClass {
                degree: 1,
                reason: "the tensor construction takes an algebra of maximal class".into(),
            });
        }
        let dp = DividedPowerAlgebra::new(m.field().p(), q)?;
        Ok(TensorAmbient { m, dp })
    }

    fn f(&self) -> PrimeField {
        self.dp.field
    }

    /// `U (x) eps^(j)` for a basis element `U` of `M` (by global index).
    pub fn term(&self, global: usize, j: usize) -> TensorElement {
        let mut t = TensorElement::default();
        t.terms.insert((global, j), 1);
        t
    }

    /// `x = -1 (x) d`.
    pub fn x(&self) -> TensorElement {
        TensorElement {
            terms: BTreeMap::new(),
            d: self.f().neg(1),
        }
    }

    /// `y = X (x) eps^(q-2) + Y (x) eps^(q-1)`.
    pub fn y(&self) -> TensorElement {
        let q = self.dp.q;
        let mut t = self.term(0, q - 2);
        t.terms.insert((1, q - 1), 1);
        t
    }

    pub fn scale(&self, a: &TensorElement, c: u32) -> TensorElement {
        let f = self.f();
        TensorElement {
            terms: a
                .terms
                .iter()
                .map(|(&k, &v)| (k, f.mul(v, c)))
                .filter(|(_, v)| *v != 0)
                .collect(),
            d: f.mul(a.d, c),
        }
    }

    // (1 (x) d) applied to a
    fn derive(&self, a: &TensorElement) -> TensorElement {
        let mut out = TensorElement::default();
        for (&(u, j), &c) in &a.terms {
            if j > 0 {
                out.add_term(&self.f(), (u, j - 1), c);
            }
        }
        out
    }

    /// `[a, b]`, with `[1 (x) d, u (x) e] = u (x) d(e)`.
    pub fn bracket(&self, a: &TensorElement, b: &TensorElement) -> Result<TensorElement> {
        let f = self.f();
        let mut out = TensorElement::default();
        for (&(u, i), &cu) in &a.terms {
            for (&(v, j), &cv) in &b.terms {
                let Some((c, k)) = self.dp.product(i, j) else {
                    continue;
                };
                let coords = self.m.bracket_basis(u, v)?;
                let d = self.m.basis()[u].degree + self.m.basis()[v].degree;
                let start = self.m.global_index(d, 0);
                let c = f.mul(c, f.mul(cu, cv));
                for (l, &w) in coords.iter().enumerate() {
                    if w != 0 {
                        out.add_term(&f, (start + l, k), f.mul(c, w));
                    }
                }
            }
        }
        // [A, B] gains a.d [d, B] - b.d [d, A]
        for (&k, &c) in &self.derive(b).terms {
            out.add_term(&f, k, f.mul(a.d, c));
        }
        for (&k, &c) in &self.derive(a).terms {
            out.add_term(&f, k, f.neg(f.mul(b.d, c)));
        }
        Ok(out)
    }

    /// Bidegree of a term, with `X, Y, eps^(1), d` at `(q-2,1), (q-1,1), (-1,0), (1,0)`.
    pub fn term_bidegree(&self, global: usize, j: usize) -> (i64, i64) {
        let q = self.dp.q as i64;
        let b = &self.m.basis()[global];
        let (nx, ny) = (b.bidegree.0 as i64, b.bidegree.1 as i64);
        (nx * (q - 2) + ny * (q - 1) - j as i64, nx + ny)
    }
}

impl Ambient for TensorAmbient {
    type Elem = TensorElement;

    fn bracket(&self, a: &TensorElement, b: &TensorElement) -> Result<TensorElement> {
        TensorAmbient::bracket(self, a, b)
    }

    fn fingerprint(&self, a: &TensorElement) -> Fingerprint {
        let q = self.dp.q as u64;
        let mut fp: Fingerprint = a.terms.iter().map(|(&(u, j), &c)| (u as u64 * q + j as u64, c)).collect();
        if a.d != 0 {
            fp.insert(u64::MAX, a.d);
        }
        fp
    }
}

/// A Nottingham algebra realized inside the tensor ambient.
#[derive(Clone, Debug)]
pub struct TensorConstruction {
    pub ambient: TensorAmbient,
    pub algebra: GradedAlgebra,
    /// Ambient realization of every basis element of `algebra`, by global index.
    pub realizations: Vec<TensorElement>,
}

impl TensorConstruction {
    /// Whether every realization is bihomogeneous of the engine's bidegree.
    pub fn check_bidegrees(&self) -> CheckOutcome {
        let mut out = CheckOutcome::new("bidegree");
        for (i, (b, r)) in self.algebra.basis().iter().zip(&self.realizations).enumerate() {
            let want = (b.bidegree.0 as i64, b.bidegree.1 as i64);
            let ok = r.terms.keys().all(|&(u, j)| self.ambient.term_bidegree(u, j) == want)
                && (r.d == 0 || want == (1, 0));
            out.record(ok, b.degree, || Witness {
                degree: b.degree,
                words: vec![self.algebra.basis()[i].word.clone()],
                detail: format!("expected bidegree {want:?}"),
            });
        }
        out
    }
}

fn tensor_closure(m: &GradedAlgebra, q: u64, n: usize, partial: bool) -> Result<TensorConstruction> {
    let ambient = TensorAmbient::new(m.clone(), q)?;
    let closure = build_closure(
        &ambient,
        m.field(),
        AlgebraKind::Nottingham { q },
        ambient.x(),
        ambient.y(),
        n,
        n + GUARD,
        partial,
    )?;
    Ok(TensorConstruction {
        ambient,
        algebra: closure.algebra,
        realizations: closure.realizations,
    })
}

/// Subalgebra of `M (x) F[eps; q] + F (1 (x) d)` generated by `x = -1 (x) d`
/// and `y = X (x) eps^(q-2) + Y (x) eps^(q-1)`, up to degree `n`, validated.
pub fn tensor_construct(m: &GradedAlgebra, q: u64, n: usize) -> Result<TensorConstruction> {
    let t = tensor_closure(m, q, n, false)?;
    t.algebra.validate().into_result()?;
    Ok(t)
}

/// As [`tensor_construct`], but stops where `M` runs out instead of failing.
pub(crate) fn tensor_construct_partial(m: &GradedAlgebra, q: u64, n: usize) -> Result<TensorConstruction> {
    let t = tensor_closure(m, q, n, true)?;
    t.algebra.validate().into_result()?;
    Ok(t)
}

/// Graded operators on a fixed algebra under `[A, B] = B A - A B`, the bracket
/// for which `u -> (w -> [w, u])` is a homomorphism.
struct OperatorAmbient<'a> {
    src: &'a GradedAlgebra,
}

impl OperatorAmbient<'_> {
    fn combine(&self, terms: &[(u32, &OperatorFamily)]) -> OperatorFamily {
        let f = self.src.field();
        let shift = terms[0].1.shift;
        let mut maps = BTreeMap::new();
        for (&k, m0) in &terms[0].1.maps {
            let mut acc = FpMatrix::zeros(m0.rows(), m0.cols());
            let mut ok = true;
            for (c, t) in terms {
                match t.maps.get(&k) {
                    Some(m) => acc = acc.add(&f, &m.scaled(&f, *c)),
                    None => ok = false,
                }
            }
            if ok {
                maps.insert(k, acc);
            }
        }
        OperatorFamily {
            shift,
            bidegree_shift: None,
            maps,
        }
    }

    /// `w -> [w, u]` for a basis element `u`.
    fn right_mult(&self, u: usize) -> Result<OperatorFamily> {
        let src = self.src;
        let du = src.basis()[u].degree;
        let ue = src.basis_element(u);
        let mut maps = BTreeMap::new();
        for k in 1..=src.built_degree().saturating_sub(du) {
            let cols: Vec<FpVector> = (0..src.dim(k))
                .map(|i| src.bracket(&src.basis_element(src.global_index(k, i)), &ue).map(|e| e.coords))
                .collect::<Result<_>>()?;
            maps.insert(k, FpMatrix::from_columns(src.dim(k + du), &cols));
        }
        Ok(OperatorFamily {
            shift: du,
            bidegree_shift: None,
            maps,
        })
    }
}

impl Ambient for OperatorAmbient<'_> {
    type Elem = OperatorFamily;

    fn bracket(&self, a: &OperatorFamily, b: &OperatorFamily) -> Result<OperatorFamily> {
        let f = self.src.field();
        let shift = a.shift + b.shift;
        let mut maps = BTreeMap::new();
        for (&k, am) in &a.maps {
            let (Some(b_after), Some(bm), Some(a_after)) =
                (b.maps.get(&(k + a.shift)), b.maps.get(&k), a.maps.get(&(k + b.shift)))
            else {
                continue;
            };
            maps.insert(k, b_after.mul(&f, am).sub(&f, &a_after.mul(&f, bm)));
        }
        if !maps.contains_key(&1) {
            return Err(Error::DegreeOverflow {
                degree: shift + 1,
                built: self.src.built_degree(),
            });
        }
        Ok(OperatorFamily {
            shift,
            bidegree_shift: None,
            maps,
        })
    }

    // a derivation of an algebra generated in degree one is fixed by its action on L_1
    fn fingerprint(&self, a: &OperatorFamily) -> Fingerprint {
        let m = &a.maps[&1];
        let mut fp = Fingerprint::new();
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                let v = m.get(i, j);
                if v != 0 {
                    fp.insert(((a.shift as u64) << 32) | (i * m.cols() + j) as u64, v);
                }
            }
        }
        fp
    }
}

fn independent_subset(amb: &OperatorAmbient, elems: Vec<OperatorFamily>) -> Vec<OperatorFamily> {
    let f = amb.src.field();
    let mut chosen: Vec<OperatorFamily> = Vec::new();
    for e in elems {
        let mut cols: Vec<Fingerprint> = chosen.iter().map(|c| amb.fingerprint(c)).collect();
        cols.push(amb.fingerprint(&e));
        let keys: Vec<u64> = {
            let mut k: Vec<u64> = cols.iter().flat_map(|c| c.keys().copied()).collect();
            k.sort_unstable();
            k.dedup();
            k
        };
        let mut m = FpMatrix::zeros(keys.len(), cols.len());
        for (j, c) in cols.iter().enumerate() {
            for (i, k) in keys.iter().enumerate() {
                m.set(i, j, c.get(k).copied().unwrap_or(0));
            }
        }
        if m.rank(&f) == cols.len() {
            chosen.push(e);
        }
    }
    chosen
}

/// Deflation: the algebra generated by `L_p` and `(ad L_1)^p`, with degrees
/// divided by `p`, computed inside the adjoint representation of `L` and
/// built up to degree `n_out`.
///
/// The generators are normalized so that `y` centralizes the second
/// component and `[v_1 x x] = 0` at the second diamond.
pub fn deflate(l: &GradedAlgebra, n_out: usize) -> Result<GradedAlgebra> {
    let f = l.field();
    let p = f.p() as usize;
    let needed = p * (n_out + GUARD) + 1;
    if l.built_degree() < needed {
        return Err(Error::DegreeOverflow {
            degree: needed,
            built: l.built_degree(),
        });
    }
    let amb = OperatorAmbient { src: l };
    let mut gens: Vec<OperatorFamily> = (0..l.dim(p))
        .map(|i| amb.right_mult(l.global_index(p, i)))
        .collect::<Result<_>>()?;
    let lines = std::iter::once(FpVector(vec![0, 1])).chain(f.elements().map(|t| FpVector(vec![1, t])));
    gens.extend(lines.map(|z| l.ad_power_operator(&z, p)));
    let basis = independent_subset(&amb, gens);
    if basis.len() != 2 {
        return Err(Error::NotThin {
            degree: 1,
            dim: basis.len(),
        });
    }
    // y spans the centralizer of the second component
    let c = amb.bracket(&basis[0], &basis[1])?;
    let ca = amb.fingerprint(&amb.bracket(&c, &basis[0])?);
    let cb = amb.fingerprint(&amb.bracket(&c, &basis[1])?);
    let mut keys: Vec<u64> = ca.keys().chain(cb.keys()).copied().collect();
    keys.sort_unstable();
    keys.dedup();
    let mut m = FpMatrix::zeros(keys.len(), 2);
    for (i, k) in keys.iter().enumerate() {
        m.set(i, 0, ca.get(k).copied().unwrap_or(0));
        m.set(i, 1, cb.get(k).copied().unwrap_or(0));
    }
    let ker = kernel(&f, &m);
    if ker.len() != 1 {
        return Err(Error::NotInClass(format!(
            "the centralizer of the second component has dimension {}",
            ker.len()
        )));
    }
    let y = amb.combine(&[(ker[0][0], &basis[0]), (ker[0][1], &basis[1])]);
    let x0 = if ker[0][0] == 0 { basis[0].clone() } else { basis[1].clone() };

    // choose x = x0 + t y with [v_1 x x] = 0 at the second diamond
    let probe = (l.q().unwrap_or(p as u64) as usize + GUARD + 1).min(n_out + GUARD);
    let mut found = None;
    for t in f.elements() {
        let x = amb.combine(&[(1, &x0), (t, &y)]);
        let cl = build_closure(&amb, f, AlgebraKind::MaximalClass, x.clone(), y.clone(), probe, probe, true)?;
        let a = &cl.algebra;
        let Some(m2) = (2..a.built_degree()).find(|&d| a.dim(d) == 2) else {
            continue;
        };
        let w = a.basis_element(a.global_index(m2 - 1, 0));
        if a.ad_word(&w, &[Letter::X, Letter::X])?.is_zero() {
            found = Some((x, m2));
            break;
        }
    }
    let (x, q_out) = found.ok_or_else(|| Error::NotInClass("no standard generator pair found".into()))?;
    let kind = AlgebraKind::Nottingham { q: q_out as u64 };
    let cl = build_closure(&amb, f, kind, x, y, n_out, n_out + GUARD, false)?;
    cl.algebra.validate().into_result()?;
    Ok(cl.algebra.with_kind(kind))
}

/// `N(q, r)`: the case (a) algebra with second diamond in degree `qr`,
/// deflated `log_p r` times, built up to degree `n`.
pub fn nottingham_nqr(p: u32, q: u64, r: u64, n: usize) -> Result<GradedAlgebra> {
    let mut j = 0;
    let mut rr = r;
    while rr > 1 && rr % p as u64 == 0 {
        rr /= p as u64;
        j += 1;
    }
    if rr != 1 {
        return Err(Error::InvalidQ { p, q: r });
    }
    let mut degrees = vec![n];
    for _ in 0..j {
        let last = *degrees.last().expect("nonempty");
        degrees.push(p as usize * (last + GUARD) + 1 - GUARD);
    }
    let top = *degrees.last().expect("nonempty");
    let (mut alg, _) = compile(&family_pattern_for(&Family::A, p, q * r, top)?, top)?;
    for &d in degrees.iter().rev().skip(1) {
        alg = deflate(&alg, d)?;
    }
    Ok(alg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maxclass::{build_maxclass, CentralizerSequence};

    #[test]
    fn divided_power_examples() {
        let f = PrimeField::new(7).unwrap();
        assert_eq!(divided_power_product(&f, 1, 1, 7).unwrap(), Some((2, 2)));
        assert_eq!(divided_power_product(&f, 0, 4, 7).unwrap(), Some((1, 4)));
        assert_eq!(divided_power_product(&f, 3, 5, 7).unwrap(), None);
        assert!(divided_power_product(&f, 7, 0, 7).is_err());
    }

    #[test]
    fn divided_power_axioms() {
        for (p, q) in [(7, 7), (5, 25)] {
            let dp = DividedPowerAlgebra::new(p, q).unwrap();
            for c in dp.check() {
                assert!(c.passed, "{} failed for q = {q}", c.name);
            }
        }
    }

    #[test]
    fn tensor_generators() {
        let seq = CentralizerSequence::metabelian(7, 20).unwrap();
        let m = build_maxclass(&seq, 12).unwrap();
        let amb = TensorAmbient::new(m, 7).unwrap();
        let mut v = amb.y();
        for _ in 0..5 {
            v = amb.bracket(&v, &amb.x()).unwrap();
        }
        // v_1 = X (x) 1 + Y (x) eps^(1)
        let mut want = amb.term(0, 0);
        want.terms.insert((1, 1), 1);
        assert_eq!(v, want);
        let vy = amb.bracket(&v, &amb.y()).unwrap();
        let u2 = amb.m.global_index(2, 0);
        assert_eq!(vy, amb.scale(&amb.term(u2, 6), PrimeField::new(7).unwrap().neg(2)));
    }
}
