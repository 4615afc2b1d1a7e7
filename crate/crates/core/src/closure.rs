//! Builds a [`GradedAlgebra`] as the subalgebra generated by two elements of
//! some larger ambient Lie algebra, one degree at a time.

use std::collections::BTreeMap;

use crate::engine::{AlgebraKind, Builder, GradedAlgebra, Letter, GUARD};
use crate::error::{Error, Result};
use crate::gf::{solve_or_kernel, FpMatrix, PrimeField, Solution};

/// Sparse coordinates of an ambient element, keyed by an ambient basis label.
pub(crate) type Fingerprint = BTreeMap<u64, u32>;

pub(crate) trait Ambient {
    type Elem: Clone;

    /// `[a, b]` in the ambient algebra. May fail with `DegreeOverflow`.
    fn bracket(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem>;

    fn fingerprint(&self, a: &Self::Elem) -> Fingerprint;
}

pub(crate) struct Closure<E> {
    pub algebra: GradedAlgebra,
    /// Ambient realization of every basis element, by global index.
    pub realizations: Vec<E>,
}

// candidate (parent, letter) pairs in order of preference
fn candidates(degree: usize, dim: usize) -> &'static [(usize, Letter)] {
    match (degree, dim) {
        (1, _) => &[(1, Letter::X), (0, Letter::Y), (0, Letter::X), (1, Letter::Y)],
        (_, 2) => &[(0, Letter::Y), (1, Letter::X), (0, Letter::X), (1, Letter::Y)],
        _ => &[(0, Letter::X), (0, Letter::Y)],
    }
}

struct Echelon {
    rows: Vec<(u64, Fingerprint)>,
}

impl Echelon {
    fn reduce(&self, f: &PrimeField, v: &Fingerprint) -> Fingerprint {
        let mut v = v.clone();
        for (pivot, row) in &self.rows {
            let c = v.get(pivot).copied().unwrap_or(0);
            if c == 0 {
                continue;
            }
            for (&k, &r) in row {
                let e = v.entry(k).or_insert(0);
                *e = f.sub(*e, f.mul(c, r));
            }
            v.retain(|_, c| *c != 0);
        }
        v
    }

    /// Adds `v` if it is independent of the current rows.
    fn insert(&mut self, f: &PrimeField, v: &Fingerprint) -> bool {
        let r = self.reduce(f, v);
        let Some((&pivot, &lead)) = r.iter().next() else {
            return false;
        };
        let inv = f.inv(lead).expect("nonzero lead");
        let row: Fingerprint = r.into_iter().map(|(k, c)| (k, f.mul(c, inv))).collect();
        for (_, other) in self.rows.iter_mut() {
            let c = other.get(&pivot).copied().unwrap_or(0);
            if c != 0 {
                for (&k, &rv) in &row {
                    let e = other.entry(k).or_insert(0);
                    *e = f.sub(*e, f.mul(c, rv));
                }
                other.retain(|_, c| *c != 0);
            }
        }
        self.rows.push((pivot, row));
        true
    }
}

/// Coordinates of `t` in the independent family `basis`.
fn express(f: &PrimeField, basis: &[Fingerprint], t: &Fingerprint) -> Result<Vec<u32>> {
    let mut keys: Vec<u64> = basis.iter().flat_map(|b| b.keys().copied()).collect();
    keys.extend(t.keys().copied());
    keys.sort_unstable();
    keys.dedup();
    let mut a = FpMatrix::zeros(keys.len(), basis.len());
    for (j, b) in basis.iter().enumerate() {
        for (i, k) in keys.iter().enumerate() {
            a.set(i, j, b.get(k).copied().unwrap_or(0));
        }
    }
    let rhs: Vec<u32> = keys.iter().map(|k| t.get(k).copied().unwrap_or(0)).collect();
    match solve_or_kernel(f, &a, &rhs)? {
        Solution::Solved { particular, kernel } if kernel.is_empty() => Ok(particular.0),
        _ => Err(Error::Inconsistent(
            "ambient element lies outside the computed component".into(),
        )),
    }
}

/// Generates the subalgebra spanned by `x` and `y` up to degree `built`.
///
/// With `stop_on_overflow`, an ambient overflow ends the computation early and
/// the algebra is returned with whatever degrees were completed.
#[allow(clippy::too_many_arguments)]
pub(crate) fn build_closure<A: Ambient>(
    amb: &A,
    field: PrimeField,
    kind: AlgebraKind,
    x: A::Elem,
    y: A::Elem,
    nominal: usize,
    built: usize,
    stop_on_overflow: bool,
) -> Result<Closure<A::Elem>> {
    let f = field;
    let mut ech = Echelon { rows: vec![] };
    let fx = amb.fingerprint(&x);
    let fy = amb.fingerprint(&y);
    if !ech.insert(&f, &fx) || !ech.insert(&f, &fy) {
        return Err(Error::Inconsistent("generators are dependent".into()));
    }
    let mut builder = Builder::new(kind);
    let mut realizations = vec![x.clone(), y.clone()];
    let gens = [x, y];
    let mut current: Vec<(A::Elem, Fingerprint)> = vec![(gens[0].clone(), fx), (gens[1].clone(), fy)];
    let mut reached = 1;
    'degrees: for d in 1..built {
        // values[i][g] = [current_i, gen_g]
        let mut values: Vec<[(A::Elem, Fingerprint); 2]> = Vec::with_capacity(current.len());
        for (e, _) in &current {
            let mut pair = Vec::with_capacity(2);
            for g in &gens {
                match amb.bracket(e, g) {
                    Ok(v) => {
                        let fp = amb.fingerprint(&v);
                        pair.push((v, fp));
                    }
                    Err(Error::DegreeOverflow { .. }) if stop_on_overflow => break 'degrees,
                    Err(e) => return Err(e),
                }
            }
            let second = pair.pop().expect("two values");
            let first = pair.pop().expect("two values");
            values.push([first, second]);
        }
        let mut ech = Echelon { rows: vec![] };
        let mut chosen: Vec<(usize, Letter)> = Vec::new();
        for &(parent, letter) in candidates(d, current.len()) {
            if parent >= current.len() {
                continue;
            }
            let li = match letter {
                Letter::X => 0,
                Letter::Y => 1,
            };
            if ech.insert(&f, &values[parent][li].1) {
                chosen.push((parent, letter));
            }
        }
        if chosen.is_empty() {
            return Err(Error::ZeroComponent { degree: d + 1 });
        }
        if chosen.len() > 2 {
            return Err(Error::NotThin {
                degree: d + 1,
                dim: chosen.len(),
            });
        }
        let li = |l: Letter| if l == Letter::X { 0 } else { 1 };
        let next: Vec<(A::Elem, Fingerprint)> = chosen
            .iter()
            .map(|&(p, l)| values[p][li(l)].clone())
            .collect();
        let fps: Vec<Fingerprint> = next.iter().map(|(_, fp)| fp.clone()).collect();
        let mut ad = [
            FpMatrix::zeros(next.len(), current.len()),
            FpMatrix::zeros(next.len(), current.len()),
        ];
        for (j, pair) in values.iter().enumerate() {
            for (g, (_, fp)) in pair.iter().enumerate() {
                let coords = express(&f, &fps, fp).map_err(|_| Error::NotThin {
                    degree: d + 1,
                    dim: 3,
                })?;
                for (i, c) in coords.into_iter().enumerate() {
                    ad[g].set(i, j, c);
                }
            }
        }
        let [ax, ay] = ad;
        builder.push_degree(&chosen, ax, ay);
        realizations.extend(next.iter().map(|(e, _)| e.clone()));
        current = next;
        reached = d + 1;
    }
    if reached < built && !stop_on_overflow {
        return Err(Error::DegreeOverflow {
            degree: built,
            built: reached,
        });
    }
    let top = if reached < built {
        reached.saturating_sub(GUARD).max(1)
    } else {
        reached
    };
    let algebra = builder.finish(f, nominal.min(top))?;
    Ok(Closure {
        algebra,
        realizations,
    })
}
