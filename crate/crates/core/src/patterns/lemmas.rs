//! Checks of the standard bracket identities around diamonds.
//!
//! Every identity is evaluated on both sides with the engine bracket and
//! compared as vectors. Contexts are located by scanning the detected
//! skeleton; a context whose elements leave the built range is skipped.

use serde::{Deserialize, Serialize};

use super::{check_distances, detect, detect_skeleton, DiamondType, Skeleton};
use crate::engine::{parse_word, Element, GradedAlgebra, Letter};
use crate::error::{Error, Result};
use crate::gf::{lucas_binom, PrimeField};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaInstance {
    pub lemma: String,
    /// Degree of the diamond the context is anchored at.
    pub degree: usize,
    pub identity: String,
    pub passed: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub instances: Vec<LemmaInstance>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.instances.iter().all(|i| i.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &LemmaInstance> {
        self.instances.iter().filter(|i| !i.passed)
    }

    /// Number of checked instances of one lemma.
    pub fn count(&self, lemma: &str) -> usize {
        self.instances.iter().filter(|i| i.lemma == lemma).count()
    }
}

struct Suite<'a> {
    alg: &'a GradedAlgebra,
    f: PrimeField,
    q: usize,
    skel: Skeleton,
    v1: Element,
    v2: Element,
    instances: Vec<LemmaInstance>,
}

/// Terms `(coefficient, element)` of a linear combination.
type Terms<'t> = &'t [(i64, &'t Element)];

impl Suite<'_> {
    fn word(&self, u: &Element, w: &str) -> Result<Element> {
        self.alg.ad_word(u, &parse_word(w)?)
    }

    fn xs(&self, u: &Element, n: usize) -> Result<Element> {
        self.alg.ad_word(u, &vec![Letter::X; n])
    }

    fn br(&self, u: &Element, v: &Element) -> Result<Element> {
        self.alg.bracket(u, v)
    }

    fn combo(&self, degree: usize, terms: Terms) -> Element {
        terms.iter().fold(self.alg.zero(degree), |acc, (c, e)| {
            self.alg.add(&acc, &self.alg.scale(e, self.f.reduce(*c)))
        })
    }

    fn combo_u(&self, degree: usize, terms: &[(u32, &Element)]) -> Element {
        terms.iter().fold(self.alg.zero(degree), |acc, (c, e)| {
            self.alg.add(&acc, &self.alg.scale(e, *c))
        })
    }

    fn record(&mut self, lemma: &str, degree: usize, identity: &str, lhs: &Element, rhs: &Element) {
        let passed = lhs.degree == rhs.degree && lhs.coords == rhs.coords;
        self.instances.push(LemmaInstance {
            lemma: lemma.into(),
            degree,
            identity: identity.into(),
            passed,
        });
    }

    fn spanning(&self, d: usize) -> Option<Element> {
        (d >= 1 && self.alg.dim(d) == 1).then(|| self.alg.basis_element(self.alg.global_index(d, 0)))
    }

    /// The `u` in the previous degree with `[u x] = v`.
    fn pred(&self, v: &Element) -> Option<Element> {
        let u = self.spanning(v.degree - 1)?;
        let ux = self.alg.ad(Letter::X, &u).ok()?;
        let c = self.alg.ratio(v, &ux)?;
        (!ux.is_zero()).then(|| self.alg.scale(&u, c))
    }

    /// Readings of `L_m` as a (possibly fake) diamond.
    fn readings(&self, m: usize) -> Vec<DiamondType> {
        let mut r = Vec::new();
        if let Some(t) = self.skel.genuine.get(&m) {
            r.push(*t);
        }
        if self.skel.ysteps.contains(&m) {
            r.push(DiamondType::Fake1);
        }
        if m > 0 && self.skel.ysteps.contains(&(m - 1)) {
            r.push(DiamondType::Fake0);
        }
        r
    }

    fn is_diamond(&self, m: usize) -> bool {
        !self.readings(m).is_empty()
    }

    fn inverse(&self, t: DiamondType) -> Option<u32> {
        t.inverse(&self.f)
    }

    /// Next element `v_{k+1}` and its predecessor for a diamond of the given reading.
    fn step(&self, v: &Element, t: DiamondType) -> Result<(Element, Element)> {
        let q = self.q;
        if t == DiamondType::Fake0 {
            let vy = self.word(v, "y")?;
            Ok((self.xs(&vy, q - 2)?, self.xs(&vy, q - 3)?))
        } else {
            let vxy = self.word(v, "xy")?;
            Ok((self.xs(&vxy, q - 3)?, self.xs(&vxy, q - 4)?))
        }
    }

    fn run(&mut self) -> Result<()> {
        self.second_diamond()?;
        let last = self.alg.built_degree();
        let third_infinite = self.skel.is_infinite(2 * self.q - 1);
        for m in self.q..last {
            for t in self.readings(m) {
                for res in [
                    self.ctx_v1(m, t),
                    if third_infinite { self.ctx_v2(m, t) } else { Ok(()) },
                    if third_infinite { self.ctx_v2ext(m, t) } else { Ok(()) },
                    self.ctx_type1(m, t),
                ] {
                    match res {
                        Ok(()) | Err(Error::DegreeOverflow { .. }) => {}
                        Err(e) => return Err(e),
                    }
                }
            }
        }
        self.infinite_neighbour();
        self.type1_sandwich();
        Ok(())
    }

    fn second_diamond(&mut self) -> Result<()> {
        let q = self.q;
        let v1 = self.v1.clone();
        let lhs = self.word(&v1, "yx")?;
        let xy = self.word(&v1, "xy")?;
        let rhs = self.combo(q + 1, &[(-2, &xy)]);
        self.record("second_diamond", q, "[v1 y x] = -2[v1 x y]", &lhs, &rhs);

        // [u, u] = 0 for u = [y x^n], n = (q-1)/2, expanded term by term
        let n = (q - 1) / 2;
        let mut total = self.alg.zero(q + 1);
        for i in 0..=n {
            let c = lucas_binom(n as u64, i as u64, self.f.p());
            let c = if i % 2 == 1 { self.f.neg(c) } else { c };
            let y = self.alg.generator(Letter::Y);
            let yx = self.xs(&y, n + i)?;
            let term = self.xs(&self.word(&yx, "y")?, n - i)?;
            let term = self.alg.scale(&term, c);
            if i + 1 < n {
                let zero = self.alg.zero(q + 1);
                self.record(
                    "jacobi_expansion",
                    q,
                    &format!("term {i} of [u, u] vanishes"),
                    &term,
                    &zero,
                );
            }
            total = self.alg.add(&total, &term);
        }
        let zero = self.alg.zero(q + 1);
        self.record("jacobi_expansion", q, "[u, u] expands to 0", &total, &zero);
        Ok(())
    }

    /// Action of `v_1` next to a diamond whose reading is not of type 0.
    fn ctx_v1(&mut self, m: usize, t: DiamondType) -> Result<()> {
        if !self.is_diamond(m + self.q - 1) {
            return Ok(());
        }
        let Some(vk) = self.spanning(m - 1) else {
            return Ok(());
        };
        let Some(vk_inv) = self.pred(&vk) else {
            return Ok(());
        };
        let v1 = self.v1.clone();
        if t == DiamondType::Fake0 {
            let (_, next_inv) = self.step(&vk, t)?;
            let lhs = self.br(&vk_inv, &v1)?;
            let rhs = self.combo(lhs.degree, &[(2, &next_inv)]);
            self.record("v1_type0", m, "[vk^-1 v1] = 2 v(k+1)^-1", &lhs, &rhs);
            return Ok(());
        }
        let Some(c) = self.inverse(t) else {
            return Ok(());
        };
        let f = self.f;
        let (next, next_inv) = self.step(&vk, t)?;
        let lname = "v1";

        let lhs = self.br(&vk_inv, &v1)?;
        let rhs = self.combo_u(lhs.degree, &[(f.add(f.mul(2, c), 1), &next_inv)]);
        self.record(lname, m, "[vk^-1 v1] = (2c+1) v(k+1)^-1", &lhs, &rhs);

        let lhs = self.br(&vk, &v1)?;
        let rhs = self.combo_u(lhs.degree, &[(f.add(c, 1), &next)]);
        self.record(lname, m, "[vk v1] = (c+1) v(k+1)", &lhs, &rhs);

        let lhs = self.br(&self.word(&vk, "x")?, &v1)?;
        let rhs = self.word(&next, "x")?;
        self.record(lname, m, "[vk x v1] = [v(k+1) x]", &lhs, &rhs);

        let lhs = self.br(&self.word(&vk, "y")?, &v1)?;
        let ny = self.word(&next, "y")?;
        let rhs = self.combo_u(lhs.degree, &[(f.sub(1, c), &ny)]);
        self.record(lname, m, "[vk y v1] = (1-c)[v(k+1) y]", &lhs, &rhs);

        let lhs = self.br(&self.word(&vk, "xy")?, &v1)?;
        let (a, b) = (self.word(&next, "yx")?, self.word(&next, "xy")?);
        let rhs = self.combo(lhs.degree, &[(-2, &a), (-1, &b)]);
        self.record(lname, m, "[vk xy v1] = -(2[v(k+1) yx] + [v(k+1) xy])", &lhs, &rhs);

        let lhs = self.br(&self.word(&vk, "xyx")?, &v1)?;
        let (a, b) = (self.word(&next, "yxx")?, self.word(&next, "xyx")?);
        let rhs = self.combo(lhs.degree, &[(-3, &a), (-2, &b)]);
        self.record(lname, m, "[vk xyx v1] = -(3[v(k+1) yxx] + 2[v(k+1) xyx])", &lhs, &rhs);
        Ok(())
    }

    /// Action of `v_2` when the next diamond has infinite type.
    fn ctx_v2(&mut self, m: usize, t: DiamondType) -> Result<()> {
        let q = self.q;
        if t == DiamondType::Fake0 || !self.skel.is_infinite(m + q - 1) {
            return Ok(());
        }
        let Some(c) = self.inverse(t) else {
            return Ok(());
        };
        let Some(vk) = self.spanning(m - 1) else {
            return Ok(());
        };
        let (v_next, _) = self.step(&vk, t)?;
        let (v_next2, _) = self.step(&v_next, DiamondType::Infinite)?;
        let v2 = self.v2.clone();
        let lname = "v2";

        let lhs = self.br(&vk, &v2)?;
        let rhs = self.combo_u(lhs.degree, &[(c, &v_next2)]);
        self.record(lname, m, "[vk v2] = c v(k+2)", &lhs, &rhs);

        for w in ["x", "y"] {
            let lhs = self.br(&self.word(&vk, w)?, &v2)?;
            let zero = self.alg.zero(lhs.degree);
            self.record(lname, m, &format!("[vk {w} v2] = 0"), &lhs, &zero);
        }

        let lhs = self.br(&self.word(&vk, "xy")?, &v2)?;
        let (a, b) = (self.word(&v_next2, "yx")?, self.word(&v_next2, "xy")?);
        let rhs = self.combo(lhs.degree, &[(1, &a), (1, &b)]);
        self.record(lname, m, "[vk xy v2] = [v(k+2) yx] + [v(k+2) xy]", &lhs, &rhs);

        let lhs = self.br(&self.word(&vk, "xyx")?, &v2)?;
        let (a, b) = (self.word(&v_next2, "yxx")?, self.word(&v_next2, "xyx")?);
        let rhs = self.combo(lhs.degree, &[(2, &a), (2, &b)]);
        self.record(lname, m, "[vk xyx v2] = 2([v(k+2) yxx] + [v(k+2) xyx])", &lhs, &rhs);
        Ok(())
    }

    /// Action of `v_2` next to an infinite diamond followed by a finite or fake one.
    fn ctx_v2ext(&mut self, m: usize, t: DiamondType) -> Result<()> {
        let q = self.q;
        if t != DiamondType::Infinite || !self.is_diamond(m + 2 * q - 2) {
            return Ok(());
        }
        let Some(vk) = self.spanning(m - 1) else {
            return Ok(());
        };
        let Some(vk_inv) = self.pred(&vk) else {
            return Ok(());
        };
        let (v_next, _) = self.step(&vk, t)?;
        let v2 = self.v2.clone();
        let f = self.f;
        for u in self.readings(m + q - 1) {
            if u == DiamondType::Infinite {
                continue;
            }
            let (v_next2, v_next2_inv) = self.step(&v_next, u)?;
            let xk = self.word(&v_next2, "x")?;
            let yk = self.word(&v_next2, "y")?;
            let xyk = self.word(&v_next2, "xy")?;
            let yxk = self.word(&v_next2, "yx")?;
            let xyxk = self.word(&v_next2, "xyx")?;
            let yxxk = self.word(&v_next2, "yxx")?;
            let l0 = self.br(&vk_inv, &v2)?;
            let l1 = self.br(&vk, &v2)?;
            let l2 = self.br(&self.word(&vk, "x")?, &v2)?;
            let l3 = self.br(&self.word(&vk, "y")?, &v2)?;
            let l4 = self.br(&self.word(&vk, "xy")?, &v2)?;
            let l5 = self.br(&self.word(&vk, "xyx")?, &v2)?;
            if u == DiamondType::Fake0 {
                let lname = "v2ext_type0";
                let r = self.combo(l0.degree, &[(-3, &v_next2_inv)]);
                self.record(lname, m, "[vk^-1 v2] = -3 v(k+2)^-1", &l0, &r);
                let r = self.combo(l1.degree, &[(-2, &v_next2)]);
                self.record(lname, m, "[vk v2] = -2 v(k+2)", &l1, &r);
                let r = self.combo(l2.degree, &[(-1, &xk)]);
                self.record(lname, m, "[vk x v2] = -[v(k+2) x]", &l2, &r);
                let r = self.combo(l3.degree, &[(-1, &yk)]);
                self.record(lname, m, "[vk y v2] = -[v(k+2) y]", &l3, &r);
                let r = self.combo(l4.degree, &[(2, &yxk)]);
                self.record(lname, m, "[vk xy v2] = 2[v(k+2) yx]", &l4, &r);
                let r = self.combo(l5.degree, &[(3, &yxxk)]);
                self.record(lname, m, "[vk xyx v2] = 3[v(k+2) yxx]", &l5, &r);
                continue;
            }
            let c = self.inverse(u).expect("finite or type 1");
            let neg = |a: u32| f.neg(a);
            let lname = "v2ext";
            let r = self.combo_u(l0.degree, &[(neg(f.mul(3, c)), &v_next2_inv)]);
            self.record(lname, m, "[vk^-1 v2] = -3c v(k+2)^-1", &l0, &r);
            let r = self.combo_u(l1.degree, &[(neg(f.mul(2, c)), &v_next2)]);
            self.record(lname, m, "[vk v2] = -2c v(k+2)", &l1, &r);
            let r = self.combo_u(l2.degree, &[(neg(c), &xk)]);
            self.record(lname, m, "[vk x v2] = -c[v(k+2) x]", &l2, &r);
            let r = self.combo_u(l3.degree, &[(neg(c), &yk)]);
            self.record(lname, m, "[vk y v2] = -c[v(k+2) y]", &l3, &r);
            let r = self.combo_u(l4.degree, &[(1, &xyk), (f.add(f.mul(2, c), 1), &yxk)]);
            self.record(lname, m, "[vk xy v2] = [v(k+2) xy] + (2c+1)[v(k+2) yx]", &l4, &r);
            let r = self.combo_u(l5.degree, &[(2, &xyxk), (f.add(f.mul(3, c), 2), &yxxk)]);
            self.record(lname, m, "[vk xyx v2] = 2[v(k+2) xyx] + (3c+2)[v(k+2) yxx]", &l5, &r);
        }
        Ok(())
    }

    /// Type 1 fake diamond `L_m` with `[L_{m+q-2} y] = 0`.
    fn ctx_type1(&mut self, m: usize, t: DiamondType) -> Result<()> {
        let q = self.q;
        if t != DiamondType::Fake1 || m + q - 2 >= self.alg.built_degree() {
            return Ok(());
        }
        if !self.alg.ad_matrix(Letter::Y, m + q - 2).is_zero() {
            return Ok(());
        }
        let Some(vb) = self.spanning(m - 1) else {
            return Ok(());
        };
        let vbxy = self.word(&vb, "xy")?;
        let next = self.xs(&vbxy, q - 2)?;
        let next_inv = self.xs(&vbxy, q - 3)?;
        let (v1, v2) = (self.v1.clone(), self.v2.clone());
        let lname = "type1";

        let lhs = self.br(&vb, &v1)?;
        let rhs = self.combo(lhs.degree, &[(2, &next_inv)]);
        self.record(lname, m, "[vb v1] = 2 v(b+1)^-1", &lhs, &rhs);

        let lhs = self.br(&self.word(&vb, "x")?, &v1)?;
        self.record(lname, m, "[vb x v1] = v(b+1)", &lhs, &next);

        let lhs = self.br(&vbxy, &v1)?;
        let ny = self.word(&next, "y")?;
        let rhs = self.combo(lhs.degree, &[(-1, &ny)]);
        self.record(lname, m, "[vb xy v1] = -[v(b+1) y]", &lhs, &rhs);

        // the remaining identities go through the action of v2
        if !self.skel.is_infinite(2 * q - 1) {
            return Ok(());
        }
        let lhs = self.br(&vbxy, &v2)?;
        let zero = self.alg.zero(lhs.degree);
        self.record(lname, m, "[vb xy v2] = 0", &lhs, &zero);

        if self.skel.is_infinite(m + q) {
            let nxy = self.word(&next, "xy")?;
            let next2 = self.xs(&nxy, q - 3)?;
            let next2_inv = self.xs(&nxy, q - 4)?;
            let lhs = self.br(&vb, &v2)?;
            let rhs = self.combo(lhs.degree, &[(2, &next2_inv)]);
            self.record(lname, m, "[vb v2] = 2 v(b+2)^-1", &lhs, &rhs);
            let lhs = self.br(&self.word(&vb, "x")?, &v2)?;
            self.record(lname, m, "[vb x v2] = v(b+2)", &lhs, &next2);
        }
        Ok(())
    }

    /// With `L_{2q-1}` infinite, a type 1 fake `L_m` after an infinite
    /// `L_{m-q+1}` is followed by an infinite diamond at `m+q-1` or `m+q`.
    fn infinite_neighbour(&mut self) {
        let q = self.q;
        if !self.skel.is_infinite(2 * q - 1) {
            return;
        }
        let n = self.alg.nominal_degree();
        let ysteps: Vec<usize> = self.skel.ysteps.iter().copied().collect();
        for m in ysteps {
            if m + q > n || m < q || !self.skel.is_infinite(m - q + 1) {
                continue;
            }
            let ok = self.skel.is_infinite(m + q - 1) || self.skel.is_infinite(m + q);
            self.instances.push(LemmaInstance {
                lemma: "infinite_neighbour".into(),
                degree: m,
                identity: "L(m+q-1) or L(m+q) has infinite type".into(),
                passed: ok,
            });
        }
    }

    /// If infinite diamonds in degrees `k(q-1)+1` for `2 <= k < 2p^s` are
    /// followed by a type 1 fake in degree `2p^s(q-1)+1`, then every diamond
    /// is infinite or fake of type 1 and `[L_{m+q-2} y] = 0` at each fake.
    fn type1_sandwich(&mut self) {
        let q = self.q;
        let p = self.f.p() as usize;
        let n = self.alg.nominal_degree();
        let mut ps = p;
        let s_match = loop {
            let fake = 2 * ps * (q - 1) + 1;
            if fake > n {
                break None;
            }
            let infinite = (2..2 * ps).all(|k| self.skel.is_infinite(k * (q - 1) + 1));
            if infinite && self.skel.ysteps.contains(&fake) {
                break Some(fake);
            }
            ps *= p;
        };
        let Some(first) = s_match else {
            return;
        };
        let types_ok = self
            .skel
            .genuine
            .iter()
            .filter(|(&m, _)| m > q && m <= n)
            .all(|(_, &t)| t == DiamondType::Infinite);
        self.instances.push(LemmaInstance {
            lemma: "type1_sandwich".into(),
            degree: first,
            identity: "every diamond is infinite or fake of type 1".into(),
            passed: types_ok,
        });
        let ysteps: Vec<usize> = self.skel.ysteps.iter().copied().collect();
        for m in ysteps {
            if m + q - 2 >= self.alg.built_degree() || m > n {
                continue;
            }
            let ok = self.alg.ad_matrix(Letter::Y, m + q - 2).is_zero();
            self.instances.push(LemmaInstance {
                lemma: "type1_sandwich".into(),
                degree: m,
                identity: "[L(m+q-2) y] = 0".into(),
                passed: ok,
            });
        }
    }
}

/// Evaluates every identity whose hypotheses hold somewhere in `alg`.
pub fn verify_lemma_suite(alg: &GradedAlgebra) -> Result<LemmaReport> {
    let q = alg
        .q()
        .ok_or_else(|| Error::NotInClass("the lemma suite applies to Nottingham algebras".into()))?
        as usize;
    let (skel, second, _) = detect_skeleton(alg)?;
    if second != q {
        return Err(Error::NotInClass(format!(
            "second diamond in degree {second}, expected {q}"
        )));
    }
    let v1 = alg.eval_word(&format!("y x^{}", q - 2))?;
    let v2 = alg.eval_word(&format!("y x^{} y x^{}", q - 1, q - 3))?;
    let mut suite = Suite {
        alg,
        f: alg.field(),
        q,
        skel,
        v1,
        v2,
        instances: Vec::new(),
    };
    suite.run()?;
    let pattern = detect(alg)?.pattern;
    let distances = check_distances(alg, &pattern);
    suite.instances.push(LemmaInstance {
        lemma: "distance".into(),
        degree: distances.first_failure_degree.unwrap_or(q),
        identity: format!("diamond gaps and ad y vanishing ({} checks)", distances.checked),
        passed: distances.passed,
    });
    Ok(LemmaReport {
        instances: suite.instances,
    })
}
