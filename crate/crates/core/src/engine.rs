//! Truncated graded Lie algebras generated in degree one.
//!
//! A [`GradedAlgebra`] is determined by the right adjoint actions of its two
//! generators on each component. Every basis element is the bracket of an
//! earlier basis element with one generator (coefficient exactly 1), so it
//! carries a left-normed defining word. The full multiplication table is
//! recovered from the generator actions by
//! `[a, [b', t]] = [[a, b'], t] - [[a, t], b']`
//! and stored densely at construction time.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::gf::{kernel, FpMatrix, FpVector, PrimeField};

/// Extra degrees computed beyond the nominal one, so that relations involving
/// `L_{k+1}` can be checked at `k = N`.
pub const GUARD: usize = 2;

const MAX_WITNESSES: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Letter {
    X,
    Y,
}

impl Letter {
    pub fn parse(c: char) -> Option<Letter> {
        match c {
            'x' | 'X' => Some(Letter::X),
            'y' | 'Y' => Some(Letter::Y),
            _ => None,
        }
    }

    pub fn other(self) -> Letter {
        match self {
            Letter::X => Letter::Y,
            Letter::Y => Letter::X,
        }
    }

    fn bidegree(self) -> (usize, usize) {
        match self {
            Letter::X => (1, 0),
            Letter::Y => (0, 1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AlgebraKind {
    /// Thin algebra with second diamond in degree `q`.
    Nottingham { q: u64 },
    /// Components of dimension 2, 1, 1, 1, ...
    MaximalClass,
}

impl AlgebraKind {
    fn letter_char(&self, l: Letter) -> char {
        match (self, l) {
            (AlgebraKind::Nottingham { .. }, Letter::X) => 'x',
            (AlgebraKind::Nottingham { .. }, Letter::Y) => 'y',
            (AlgebraKind::MaximalClass, Letter::X) => 'X',
            (AlgebraKind::MaximalClass, Letter::Y) => 'Y',
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisElement {
    pub degree: usize,
    pub index_in_degree: usize,
    /// Global index of the element this one is obtained from; `None` for generators.
    pub parent: Option<usize>,
    /// Last letter of the word (the generator itself for degree one).
    pub letter: Letter,
    pub word: String,
    pub bidegree: (usize, usize),
}

/// A homogeneous element: a degree and coordinates in that component's basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Element {
    pub degree: usize,
    pub coords: FpVector,
}

impl Element {
    pub fn is_zero(&self) -> bool {
        self.coords.is_zero()
    }
}

/// A graded linear map on an algebra, one matrix `L_k -> L_{k+shift}` per source degree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorFamily {
    pub shift: usize,
    pub bidegree_shift: Option<(i64, i64)>,
    pub maps: BTreeMap<usize, FpMatrix>,
}

impl OperatorFamily {
    pub fn is_zero(&self) -> bool {
        self.maps.values().all(FpMatrix::is_zero)
    }

    pub fn apply(&self, f: &PrimeField, u: &Element) -> Result<Element> {
        let m = self.maps.get(&u.degree).ok_or(Error::DegreeOverflow {
            degree: u.degree + self.shift,
            built: self.maps.keys().next_back().copied().unwrap_or(0) + self.shift,
        })?;
        Ok(Element {
            degree: u.degree + self.shift,
            coords: m.apply(f, &u.coords),
        })
    }

    /// Lowest source degree on which the family is nonzero.
    pub fn first_nonzero_degree(&self) -> Option<usize> {
        self.maps
            .iter()
            .find(|(_, m)| !m.is_zero())
            .map(|(&k, _)| k)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub degree: usize,
    pub words: Vec<String>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub checked: u64,
    pub failures: u64,
    pub first_failure_degree: Option<usize>,
    pub witnesses: Vec<Witness>,
}

impl CheckOutcome {
    pub(crate) fn new(name: &str) -> Self {
        CheckOutcome {
            name: name.to_string(),
            passed: true,
            checked: 0,
            failures: 0,
            first_failure_degree: None,
            witnesses: Vec::new(),
        }
    }

    pub(crate) fn record(&mut self, ok: bool, degree: usize, witness: impl FnOnce() -> Witness) {
        self.checked += 1;
        if ok {
            return;
        }
        self.passed = false;
        self.failures += 1;
        self.first_failure_degree = Some(self.first_failure_degree.map_or(degree, |d| d.min(degree)));
        if self.witnesses.len() < MAX_WITNESSES {
            self.witnesses.push(witness());
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckOutcome>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn first_failure(&self) -> Option<&CheckOutcome> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .min_by_key(|c| c.first_failure_degree.unwrap_or(usize::MAX))
    }

    pub fn first_failure_degree(&self) -> Option<usize> {
        self.checks.iter().filter_map(|c| c.first_failure_degree).min()
    }

    pub(crate) fn into_result(self) -> Result<ValidationReport> {
        match self.first_failure() {
            None => Ok(self),
            Some(c) => Err(Error::ValidationFailed {
                check: c.name.clone(),
                degree: c.first_failure_degree.unwrap_or(0),
            }),
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let status = if c.passed { "ok" } else { "FAIL" };
            write!(f, "{:<14} {:>4} checked={}", c.name, status, c.checked)?;
            if let Some(d) = c.first_failure_degree {
                write!(f, " failures={} first_degree={d}", c.failures)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Truncated graded Lie algebra, immutable after construction.
#[derive(Clone, Debug)]
pub struct GradedAlgebra {
    field: PrimeField,
    kind: AlgebraKind,
    nominal: usize,
    built: usize,
    basis: Vec<BasisElement>,
    // offsets[d] is the global index of the first basis element of degree d
    offsets: Vec<usize>,
    // indexed by source degree; entry 0 is unused
    ad_x: Vec<FpMatrix>,
    ad_y: Vec<FpMatrix>,
    // table[b][a] = [a, b], for deg a + deg b <= built
    table: Vec<Vec<[u32; 2]>>,
}

impl GradedAlgebra {
    /// Assembles an algebra from its basis and generator actions.
    ///
    /// `ad_x[k]` and `ad_y[k]` map `L_k` to `L_{k+1}` for `1 <= k < built`,
    /// where `built` is the top degree present in `basis`.
    pub fn from_parts(
        field: PrimeField,
        kind: AlgebraKind,
        nominal: usize,
        basis: Vec<BasisElement>,
        ad_x: Vec<FpMatrix>,
        ad_y: Vec<FpMatrix>,
    ) -> Result<Self> {
        let built = basis.last().map_or(0, |b| b.degree);
        if built < nominal || built == 0 {
            return Err(Error::DegreeOverflow {
                degree: nominal,
                built,
            });
        }
        if basis.windows(2).any(|w| w[0].degree > w[1].degree) || basis[0].degree != 1 {
            return Err(Error::Inconsistent("basis is not sorted by degree".into()));
        }
        let mut offsets = vec![0; built + 2];
        for b in &basis {
            offsets[b.degree + 1] += 1;
        }
        for d in 1..=built + 1 {
            offsets[d] += offsets[d - 1];
        }
        for (i, b) in basis.iter().enumerate() {
            if b.index_in_degree != i - offsets[b.degree] {
                return Err(Error::Inconsistent(format!(
                    "basis element {i} is out of order"
                )));
            }
        }
        let dim = |d: usize| offsets[d + 1] - offsets[d];
        if ad_x.len() != built || ad_y.len() != built {
            return Err(Error::DimensionMismatch(format!(
                "expected {built} adjoint matrices per generator"
            )));
        }
        for k in 1..built {
            for m in [&ad_x[k], &ad_y[k]] {
                if m.rows() != dim(k + 1) || m.cols() != dim(k) {
                    return Err(Error::DimensionMismatch(format!(
                        "adjoint matrix on degree {k} has shape {}x{}",
                        m.rows(),
                        m.cols()
                    )));
                }
            }
        }
        for d in 1..=built {
            if dim(d) == 0 {
                return Err(Error::ZeroComponent { degree: d });
            }
            if dim(d) > 2 {
                return Err(Error::NotThin {
                    degree: d,
                    dim: dim(d),
                });
            }
        }
        let mut alg = GradedAlgebra {
            field,
            kind,
            nominal,
            built,
            basis,
            offsets,
            ad_x,
            ad_y,
            table: Vec::new(),
        };
        alg.fill_table();
        Ok(alg)
    }

    fn fill_table(&mut self) {
        let f = self.field;
        let n = self.basis.len();
        let mut table: Vec<Vec<[u32; 2]>> = Vec::with_capacity(n);
        for b in 0..n {
            let bd = self.basis[b].degree;
            if bd >= self.built {
                table.push(Vec::new());
                continue;
            }
            let a_count = self.offsets[self.built - bd + 1];
            let mut row = vec![[0u32; 2]; a_count];
            let t = self.basis[b].letter;
            match self.basis[b].parent {
                None => {
                    for (a, slot) in row.iter_mut().enumerate() {
                        let ad = self.ad_matrix(t, self.basis[a].degree);
                        let col = self.local(a);
                        for r in 0..ad.rows() {
                            slot[r] = ad.get(r, col);
                        }
                    }
                }
                Some(bp) => {
                    for (a, slot) in row.iter_mut().enumerate() {
                        let ad_deg = self.basis[a].degree;
                        let mid = ad_deg + bd - 1;
                        // [[a, b'], t]
                        let ab = &table[bp][a];
                        let ad = self.ad_matrix(t, mid);
                        let mut out = [0u32; 2];
                        for r in 0..ad.rows() {
                            let mut acc = 0u64;
                            for c in 0..ad.cols() {
                                acc += ad.get(r, c) as u64 * ab[c] as u64;
                            }
                            out[r] = (acc % f.p() as u64) as u32;
                        }
                        // - [[a, t], b']
                        let adt = self.ad_matrix(t, ad_deg);
                        let col = self.local(a);
                        let base = self.offsets[ad_deg + 1];
                        for r in 0..adt.rows() {
                            let c = adt.get(r, col);
                            if c == 0 {
                                continue;
                            }
                            let e = table[bp][base + r];
                            for i in 0..2 {
                                out[i] = f.sub(out[i], f.mul(c, e[i]));
                            }
                        }
                        *slot = out;
                    }
                }
            }
            table.push(row);
        }
        self.table = table;
    }

    #[inline]
    fn local(&self, global: usize) -> usize {
        self.basis[global].index_in_degree
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn kind(&self) -> AlgebraKind {
        self.kind
    }

    /// `q` for Nottingham algebras.
    pub fn q(&self) -> Option<u64> {
        match self.kind {
            AlgebraKind::Nottingham { q } => Some(q),
            AlgebraKind::MaximalClass => None,
        }
    }

    /// Requested degree bound `N`.
    pub fn nominal_degree(&self) -> usize {
        self.nominal
    }

    /// Top degree actually computed (at least `N`).
    pub fn built_degree(&self) -> usize {
        self.built
    }

    pub fn dim(&self, degree: usize) -> usize {
        if degree == 0 || degree > self.built {
            0
        } else {
            self.offsets[degree + 1] - self.offsets[degree]
        }
    }

    /// Dimensions of `L_1, ..., L_N`.
    pub fn dims(&self) -> Vec<usize> {
        (1..=self.nominal).map(|d| self.dim(d)).collect()
    }

    pub fn basis(&self) -> &[BasisElement] {
        &self.basis
    }

    /// Basis elements of one component.
    pub fn component(&self, degree: usize) -> &[BasisElement] {
        if degree == 0 || degree > self.built {
            return &[];
        }
        &self.basis[self.offsets[degree]..self.offsets[degree + 1]]
    }

    pub fn global_index(&self, degree: usize, local: usize) -> usize {
        self.offsets[degree] + local
    }

    /// Adjoint matrix of a generator on `L_degree`, for `1 <= degree < built`.
    pub fn ad_matrix(&self, letter: Letter, degree: usize) -> &FpMatrix {
        match letter {
            Letter::X => &self.ad_x[degree],
            Letter::Y => &self.ad_y[degree],
        }
    }

    pub fn zero(&self, degree: usize) -> Element {
        Element {
            degree,
            coords: FpVector::zeros(self.dim(degree)),
        }
    }

    pub fn basis_element(&self, global: usize) -> Element {
        let b = &self.basis[global];
        Element {
            degree: b.degree,
            coords: FpVector::unit(self.dim(b.degree), b.index_in_degree),
        }
    }

    pub fn generator(&self, letter: Letter) -> Element {
        self.basis_element(match letter {
            Letter::X => 0,
            Letter::Y => 1,
        })
    }

    /// Element of `L_1` with coordinates `(a, b)` on `(x, y)`.
    pub fn degree_one(&self, a: u32, b: u32) -> Element {
        Element {
            degree: 1,
            coords: FpVector(vec![a % self.field.p(), b % self.field.p()]),
        }
    }

    fn overflow(&self, degree: usize) -> Error {
        Error::DegreeOverflow {
            degree,
            built: self.built,
        }
    }

    /// `[u, t]` for a generator `t`.
    pub fn ad(&self, letter: Letter, u: &Element) -> Result<Element> {
        if u.degree == 0 || u.degree >= self.built {
            return Err(self.overflow(u.degree + 1));
        }
        Ok(Element {
            degree: u.degree + 1,
            coords: self.ad_matrix(letter, u.degree).apply(&self.field, &u.coords),
        })
    }

    /// Applies `ad t` for each letter in turn, giving the left-normed bracket `[u t1 t2 ...]`.
    pub fn ad_word(&self, u: &Element, letters: &[Letter]) -> Result<Element> {
        let mut cur = u.clone();
        for &l in letters {
            cur = self.ad(l, &cur)?;
        }
        Ok(cur)
    }

    /// Evaluates a word such as `"yxxy"` or `"y x^5 y"`; the first letter is the root generator.
    pub fn eval_word(&self, word: &str) -> Result<Element> {
        let letters = parse_word(word)?;
        let (root, rest) = letters
            .split_first()
            .ok_or_else(|| Error::InvalidPattern("empty word".into()))?;
        self.ad_word(&self.generator(*root), rest)
    }

    /// Coordinates of the memoized bracket of two basis elements, `[a, b]`.
    pub fn bracket_basis(&self, a: usize, b: usize) -> Result<&[u32]> {
        let d = self.basis[a].degree + self.basis[b].degree;
        if d > self.built {
            return Err(self.overflow(d));
        }
        Ok(&self.table[b][a][..self.dim(d)])
    }

    /// The Lie bracket `[u, v]`.
    pub fn bracket(&self, u: &Element, v: &Element) -> Result<Element> {
        let d = u.degree + v.degree;
        if d > self.built {
            return Err(self.overflow(d));
        }
        let f = self.field;
        let mut out = FpVector::zeros(self.dim(d));
        for (i, &cu) in u.coords.iter().enumerate() {
            if cu == 0 {
                continue;
            }
            let a = self.offsets[u.degree] + i;
            for (j, &cv) in v.coords.iter().enumerate() {
                if cv == 0 {
                    continue;
                }
                let b = self.offsets[v.degree] + j;
                out.add_scaled(&f, f.mul(cu, cv), &self.table[b][a][..out.len()]);
            }
        }
        Ok(Element {
            degree: d,
            coords: out,
        })
    }

    /// `[a, b]` for basis elements, recomputed from the generator actions
    /// without the stored table. Exponential in `deg b`; meant for cross-checks.
    pub fn bracket_uncached(&self, a: usize, b: usize) -> Result<Element> {
        let d = self.basis[a].degree + self.basis[b].degree;
        if d > self.built {
            return Err(self.overflow(d));
        }
        let ea = self.basis_element(a);
        self.bracket_uncached_elem(&ea, b)
    }

    fn bracket_uncached_elem(&self, u: &Element, b: usize) -> Result<Element> {
        let t = self.basis[b].letter;
        match self.basis[b].parent {
            None => self.ad(t, u),
            Some(bp) => {
                let first = self.ad(t, &self.bracket_uncached_elem(u, bp)?)?;
                let ut = self.ad(t, u)?;
                let mut out = first;
                for (i, &c) in ut.coords.iter().enumerate() {
                    if c != 0 {
                        let e = self.basis_element(self.offsets[ut.degree] + i);
                        let term = self.bracket_uncached_elem(&e, bp)?;
                        out.coords.add_scaled(&self.field, self.field.neg(c), &term.coords);
                    }
                }
                Ok(out)
            }
        }
    }

    pub fn add(&self, u: &Element, v: &Element) -> Element {
        assert_eq!(u.degree, v.degree, "adding elements of different degrees");
        Element {
            degree: u.degree,
            coords: u.coords.sum(&self.field, &v.coords),
        }
    }

    pub fn scale(&self, u: &Element, c: u32) -> Element {
        Element {
            degree: u.degree,
            coords: u.coords.scaled(&self.field, c),
        }
    }

    /// Returns `c` with `u = c * v` if one exists.
    pub fn ratio(&self, u: &Element, v: &Element) -> Option<u32> {
        if u.degree != v.degree {
            return None;
        }
        if u.is_zero() {
            return Some(0);
        }
        u.coords.ratio_to(&self.field, &v.coords)
    }

    /// The set of bidegrees of basis elements up to degree `N`.
    pub fn support(&self) -> BTreeSet<(usize, usize)> {
        self.basis
            .iter()
            .filter(|b| b.degree <= self.nominal)
            .map(|b| b.bidegree)
            .collect()
    }

    fn full_support(&self) -> BTreeSet<(usize, usize)> {
        self.basis.iter().map(|b| b.bidegree).collect()
    }

    /// Subspace of `L_1` (as coordinate vectors on `x, y`) centralizing `L_k`.
    pub fn centralizer_in_l1(&self, k: usize) -> Result<Vec<FpVector>> {
        if k == 0 || k >= self.built {
            return Err(self.overflow(k + 1));
        }
        let ax = &self.ad_x[k];
        let ay = &self.ad_y[k];
        let mut m = FpMatrix::zeros(ax.rows() * ax.cols(), 2);
        for i in 0..ax.rows() {
            for j in 0..ax.cols() {
                m.set(i * ax.cols() + j, 0, ax.get(i, j));
                m.set(i * ax.cols() + j, 1, ay.get(i, j));
            }
        }
        Ok(kernel(&self.field, &m))
    }

    /// Matrix of `ad z` on `L_k`, for `z = a x + b y`.
    pub fn ad_combination(&self, z: &FpVector, k: usize) -> FpMatrix {
        let f = &self.field;
        self.ad_x[k].scaled(f, z[0]).add(f, &self.ad_y[k].scaled(f, z[1]))
    }

    /// `(ad z)^e` as an operator family of shift `e`.
    pub fn ad_power_operator(&self, z: &FpVector, e: usize) -> OperatorFamily {
        let f = &self.field;
        let mut maps = BTreeMap::new();
        for k in 1..self.built {
            if k + e > self.built {
                break;
            }
            let mut m = FpMatrix::identity(self.dim(k));
            for s in 0..e {
                m = self.ad_combination(z, k + s).mul(f, &m);
            }
            maps.insert(k, m);
        }
        let bidegree_shift = match (z[0] != 0, z[1] != 0) {
            (true, false) => Some((e as i64, 0)),
            (false, true) => Some((0, e as i64)),
            _ => None,
        };
        OperatorFamily {
            shift: e,
            bidegree_shift,
            maps,
        }
    }

    /// Number of two-dimensional components among `L_1, ..., L_N`.
    pub fn coclass_excess(&self) -> usize {
        (1..=self.nominal).filter(|&d| self.dim(d) == 2).count()
    }

    /// Copy of this algebra with one adjoint matrix replaced, keeping the
    /// basis and words. Used to exercise the validators.
    pub fn with_replaced_ad(&self, letter: Letter, degree: usize, m: FpMatrix) -> Result<Self> {
        let mut ad_x = self.ad_x.clone();
        let mut ad_y = self.ad_y.clone();
        match letter {
            Letter::X => ad_x[degree] = m,
            Letter::Y => ad_y[degree] = m,
        }
        GradedAlgebra::from_parts(
            self.field,
            self.kind,
            self.nominal,
            self.basis.clone(),
            ad_x,
            ad_y,
        )
    }

    /// The same algebra with a smaller nominal degree.
    pub fn with_nominal(&self, nominal: usize) -> Result<Self> {
        if nominal > self.built {
            return Err(self.overflow(nominal));
        }
        let mut a = self.clone();
        a.nominal = nominal;
        Ok(a)
    }

    /// The same algebra relabelled as a different kind (words are rewritten
    /// in the letters of the new kind).
    pub(crate) fn with_kind(&self, kind: AlgebraKind) -> Self {
        let mut a = self.clone();
        a.kind = kind;
        for b in a.basis.iter_mut() {
            b.word = b
                .word
                .chars()
                .map(|c| Letter::parse(c).map_or(c, |l| kind.letter_char(l)))
                .collect();
        }
        a
    }

    /// Human-readable word of a basis element, with runs compressed (`y x^5 y`).
    pub fn pretty_word(&self, global: usize) -> String {
        compress_word(&self.basis[global].word)
    }

    fn words_of(&self, ids: &[usize]) -> Vec<String> {
        ids.iter().map(|&i| self.basis[i].word.clone()).collect()
    }

    /// Runs every check and returns the report.
    pub fn validate(&self) -> ValidationReport {
        let mut checks = vec![
            self.check_dimensions(),
            self.check_covering(),
            self.check_words(),
            self.check_antisymmetry(),
            self.check_jacobi(),
            self.check_bigrading(),
        ];
        if let AlgebraKind::Nottingham { q } = self.kind {
            checks.push(self.check_nilpotent(Letter::Y, 2, "sandwich_y"));
            checks.push(self.check_nilpotent(Letter::X, q as usize, "nilpotent_x"));
        }
        ValidationReport { checks }
    }

    /// Only the checks that certify a Lie algebra: antisymmetry and Jacobi.
    pub fn validate_lie(&self) -> ValidationReport {
        ValidationReport {
            checks: vec![self.check_antisymmetry(), self.check_jacobi()],
        }
    }

    fn check_dimensions(&self) -> CheckOutcome {
        let mut out = CheckOutcome::new("thinness");
        for d in 1..=self.built {
            let dim = self.dim(d);
            let ok = match (self.kind, d) {
                (_, 1) => dim == 2,
                (AlgebraKind::MaximalClass, _) => dim == 1,
                (AlgebraKind::Nottingham { .. }, _) => (1..=2).contains(&dim),
            };
            out.record(ok, d, || Witness {
                degree: d,
                words: vec![],
                detail: format!("dim L_{d} = {dim}"),
            });
        }
        out
    }

    fn check_covering(&self) -> CheckOutcome {
        let f = &self.field;
        let mut out = CheckOutcome::new("covering");
        for k in 1..self.built {
            let target = self.dim(k + 1);
            let lines: Vec<FpVector> = if self.dim(k) == 1 {
                vec![FpVector(vec![1])]
            } else {
                let mut v: Vec<FpVector> = f.elements().map(|t| FpVector(vec![1, t])).collect();
                v.push(FpVector(vec![0, 1]));
                v
            };
            for u in lines {
                let cols = [
                    self.ad_x[k].apply(f, &u),
                    self.ad_y[k].apply(f, &u),
                ];
                let rank = FpMatrix::from_columns(target, &cols).rank(f);
                out.record(rank == target, k + 1, || Witness {
                    degree: k,
                    words: vec![],
                    detail: format!("element {:?} of L_{k} spans rank {rank} of L_{}", u.0, k + 1),
                });
            }
        }
        out
    }

    fn check_words(&self) -> CheckOutcome {
        let mut out = CheckOutcome::new("words");
        for (i, b) in self.basis.iter().enumerate() {
            let ok = self
                .eval_word(&b.word)
                .map(|e| e == self.basis_element(i))
                .unwrap_or(false);
            let (r, s) = count_letters(&b.word);
            let ok = ok && (r, s) == b.bidegree && r + s == b.degree;
            out.record(ok, b.degree, || Witness {
                degree: b.degree,
                words: vec![b.word.clone()],
                detail: "word does not evaluate to its basis element".into(),
            });
        }
        out
    }

    fn check_antisymmetry(&self) -> CheckOutcome {
        let f = &self.field;
        let mut out = CheckOutcome::new("antisymmetry");
        let n = self.basis.len();
        for a in 0..n {
            for b in a..n {
                let d = self.basis[a].degree + self.basis[b].degree;
                if d > self.built {
                    break;
                }
                let dim = self.dim(d);
                let ab = &self.table[b][a];
                let ba = &self.table[a][b];
                let ok = (0..dim).all(|i| f.add(ab[i], ba[i]) == 0);
                out.record(ok, d, || Witness {
                    degree: d,
                    words: self.words_of(&[a, b]),
                    detail: format!("[a,b] = {:?}, [b,a] = {:?}", &ab[..dim], &ba[..dim]),
                });
            }
        }
        out
    }

    fn check_jacobi(&self) -> CheckOutcome {
        let f = self.field;
        let mut out = CheckOutcome::new("jacobi");
        let n = self.basis.len();
        // [[u, v], w] with [u, v] given by table coordinates at degree du + dv
        let bracket_then = |uv: &[u32; 2], duv: usize, w: usize, acc: &mut [u32; 2]| {
            let base = self.offsets[duv];
            for (i, &c) in uv.iter().enumerate().take(self.dim(duv)) {
                if c != 0 {
                    let e = &self.table[w][base + i];
                    acc[0] = f.add(acc[0], f.mul(c, e[0]));
                    acc[1] = f.add(acc[1], f.mul(c, e[1]));
                }
            }
        };
        for a in 0..n {
            let da = self.basis[a].degree;
            for b in a..n {
                let db = self.basis[b].degree;
                if da + db >= self.built {
                    break;
                }
                for c in b..n {
                    let dc = self.basis[c].degree;
                    let d = da + db + dc;
                    if d > self.built {
                        break;
                    }
                    let mut acc = [0u32; 2];
                    bracket_then(&self.table[b][a], da + db, c, &mut acc);
                    bracket_then(&self.table[c][b], db + dc, a, &mut acc);
                    bracket_then(&self.table[a][c], da + dc, b, &mut acc);
                    let ok = acc == [0, 0];
                    out.record(ok, d, || Witness {
                        degree: d,
                        words: self.words_of(&[a, b, c]),
                        detail: format!("Jacobi sum {:?}", &acc[..self.dim(d)]),
                    });
                }
            }
        }
        out
    }

    fn check_bigrading(&self) -> CheckOutcome {
        let mut out = CheckOutcome::new("bigrading");
        let support = self.full_support();
        let add = |a: (usize, usize), b: (usize, usize)| (a.0 + b.0, a.1 + b.1);
        for (i, b) in self.basis.iter().enumerate() {
            if let Some(p) = b.parent {
                let ok = b.bidegree == add(self.basis[p].bidegree, b.letter.bidegree());
                out.record(ok, b.degree, || Witness {
                    degree: b.degree,
                    words: self.words_of(&[p, i]),
                    detail: "bidegree is not parent plus letter".into(),
                });
            }
        }
        let n = self.basis.len();
        for a in 0..n {
            for b in 0..n {
                let d = self.basis[a].degree + self.basis[b].degree;
                if d > self.built {
                    break;
                }
                let target = add(self.basis[a].bidegree, self.basis[b].bidegree);
                let entry = &self.table[b][a];
                let comp = self.component(d);
                let ok = comp
                    .iter()
                    .enumerate()
                    .all(|(i, e)| entry[i] == 0 || e.bidegree == target);
                // support argument: brackets landing outside the support vanish
                let ok = ok && (support.contains(&target) || entry[..comp.len()].iter().all(|&c| c == 0));
                out.record(ok, d, || Witness {
                    degree: d,
                    words: self.words_of(&[a, b]),
                    detail: format!("bracket leaves bidegree {target:?}"),
                });
            }
        }
        out
    }

    fn check_nilpotent(&self, letter: Letter, e: usize, name: &str) -> CheckOutcome {
        let mut out = CheckOutcome::new(name);
        let z = match letter {
            Letter::X => FpVector(vec![1, 0]),
            Letter::Y => FpVector(vec![0, 1]),
        };
        let op = self.ad_power_operator(&z, e);
        for (&k, m) in &op.maps {
            out.record(m.is_zero(), k + e, || Witness {
                degree: k,
                words: self.component(k).iter().map(|b| b.word.clone()).collect(),
                detail: format!("(ad {letter:?})^{e} is nonzero on L_{k}"),
            });
        }
        out
    }

    /// Structure-constant export.
    pub fn to_json(&self) -> serde_json::Value {
        let n = self.nominal;
        let f = &self.field;
        let components: Vec<_> = (1..=n)
            .map(|d| {
                let comp = self.component(d);
                json!({
                    "degree": d,
                    "dims": comp.len(),
                    "basis_words": comp.iter().map(|b| b.word.clone()).collect::<Vec<_>>(),
                    "bidegrees": comp.iter().map(|b| [b.bidegree.0, b.bidegree.1]).collect::<Vec<_>>(),
                })
            })
            .collect();
        let ad = |l: Letter| -> Vec<serde_json::Value> {
            (1..n)
                .map(|k| json!({"degree": k, "matrix": self.ad_matrix(l, k).to_rows()}))
                .collect()
        };
        let top = self.offsets[n + 1];
        let mut brackets = Vec::new();
        for a in 0..top {
            for b in a + 1..top {
                let d = self.basis[a].degree + self.basis[b].degree;
                if d > n {
                    break;
                }
                let coeffs = &self.table[b][a][..self.dim(d)];
                if coeffs.iter().any(|&c| c != 0) {
                    brackets.push(json!({"i": a, "j": b, "coeffs": coeffs}));
                }
            }
        }
        let q = self.q();
        json!({
            "schema_version": crate::SCHEMA_VERSION,
            "p": f.p(),
            "q": q,
            "kind": self.kind,
            "N": n,
            "components": components,
            "ad_x": ad(Letter::X),
            "ad_y": ad(Letter::Y),
            "brackets": brackets,
        })
    }
}

pub fn parse_word(word: &str) -> Result<Vec<Letter>> {
    // accepts plain strings ("yxxy") and exponent notation ("y x^3 y")
    let mut out = Vec::new();
    let mut chars = word.chars().filter(|c| !c.is_whitespace() && *c != '[' && *c != ']').peekable();
    while let Some(c) = chars.next() {
        let l = Letter::parse(c).ok_or_else(|| Error::InvalidPattern(format!("bad letter {c:?} in word")))?;
        let mut reps = 1;
        if chars.peek() == Some(&'^') {
            chars.next();
            let mut digits = String::new();
            while let Some(d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                digits.push(*d);
                chars.next();
            }
            reps = digits
                .parse()
                .map_err(|_| Error::InvalidPattern(format!("bad exponent in word {word:?}")))?;
        }
        out.extend(std::iter::repeat_n(l, reps));
    }
    Ok(out)
}

fn count_letters(word: &str) -> (usize, usize) {
    let x = word.chars().filter(|c| c.eq_ignore_ascii_case(&'x')).count();
    let y = word.chars().filter(|c| c.eq_ignore_ascii_case(&'y')).count();
    (x, y)
}

pub fn compress_word(word: &str) -> String {
    let mut out: Vec<String> = Vec::new();
    let chars: Vec<char> = word.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let mut j = i;
        while j < chars.len() && chars[j] == chars[i] {
            j += 1;
        }
        out.push(if j - i == 1 {
            chars[i].to_string()
        } else {
            format!("{}^{}", chars[i], j - i)
        });
        i = j;
    }
    out.join(" ")
}

/// Incremental assembly of a [`GradedAlgebra`]: components are appended in
/// degree order, each basis element defined as `[parent, letter]`.
pub(crate) struct Builder {
    kind: AlgebraKind,
    basis: Vec<BasisElement>,
    ad_x: Vec<FpMatrix>,
    ad_y: Vec<FpMatrix>,
    degree_start: Vec<usize>,
}

impl Builder {
    pub(crate) fn new(kind: AlgebraKind) -> Self {
        let c = |l| kind.letter_char(l).to_string();
        let basis = vec![
            BasisElement {
                degree: 1,
                index_in_degree: 0,
                parent: None,
                letter: Letter::X,
                word: c(Letter::X),
                bidegree: (1, 0),
            },
            BasisElement {
                degree: 1,
                index_in_degree: 1,
                parent: None,
                letter: Letter::Y,
                word: c(Letter::Y),
                bidegree: (0, 1),
            },
        ];
        Builder {
            kind,
            basis,
            ad_x: vec![FpMatrix::zeros(0, 0)],
            ad_y: vec![FpMatrix::zeros(0, 0)],
            degree_start: vec![0, 0, 2],
        }
    }

    pub(crate) fn top_degree(&self) -> usize {
        self.degree_start.len() - 2
    }

    /// Global index of local basis element `i` of degree `d`.
    pub(crate) fn global(&self, d: usize, i: usize) -> usize {
        self.degree_start[d] + i
    }

    /// Appends degree `top + 1` with basis `[parent_local, letter]` and the
    /// adjoint matrices of degree `top`.
    pub(crate) fn push_degree(
        &mut self,
        elements: &[(usize, Letter)],
        ad_x: FpMatrix,
        ad_y: FpMatrix,
    ) {
        let top = self.top_degree();
        let d = top + 1;
        for (i, &(parent_local, letter)) in elements.iter().enumerate() {
            let parent = self.global(top, parent_local);
            let pb = &self.basis[parent];
            let mut word = pb.word.clone();
            word.push(self.kind.letter_char(letter));
            let lb = letter.bidegree();
            let bidegree = (pb.bidegree.0 + lb.0, pb.bidegree.1 + lb.1);
            self.basis.push(BasisElement {
                degree: d,
                index_in_degree: i,
                parent: Some(parent),
                letter,
                word,
                bidegree,
            });
        }
        self.ad_x.push(ad_x);
        self.ad_y.push(ad_y);
        self.degree_start.push(self.basis.len());
    }

    pub(crate) fn finish(self, field: PrimeField, nominal: usize) -> Result<GradedAlgebra> {
        GradedAlgebra::from_parts(field, self.kind, nominal, self.basis, self.ad_x, self.ad_y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // The metabelian algebra of maximal class: [U_i X] = U_{i+1}, [U_i Y] = 0.
    fn metabelian(n: usize) -> GradedAlgebra {
        let f = PrimeField::new(7).unwrap();
        let mut b = Builder::new(AlgebraKind::MaximalClass);
        let ax = FpMatrix::from_rows(&f, &[vec![0, 1]]).unwrap();
        let ay = FpMatrix::from_rows(&f, &[vec![-1, 0]]).unwrap();
        b.push_degree(&[(1, Letter::X)], ax, ay);
        for _ in 3..=n {
            b.push_degree(
                &[(0, Letter::X)],
                FpMatrix::identity(1),
                FpMatrix::zeros(1, 1),
            );
        }
        b.finish(f, n).unwrap()
    }

    #[test]
    fn metabelian_is_valid_and_abelian_past_degree_one() {
        let m = metabelian(20);
        let report = m.validate();
        assert!(report.passed(), "{report}");
        for a in 2..m.basis().len() {
            for b in 2..m.basis().len() {
                if let Ok(c) = m.bracket_basis(a, b) {
                    assert!(c.iter().all(|&v| v == 0));
                }
            }
        }
        assert_eq!(m.coclass_excess(), 1);
    }

    #[test]
    fn bracket_is_alternating() {
        let m = metabelian(12);
        for i in 0..m.basis().len() {
            let e = m.basis_element(i);
            if 2 * e.degree <= m.built_degree() {
                assert!(m.bracket(&e, &e).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn overflow_is_an_error() {
        let m = metabelian(6);
        let top = m.basis_element(m.basis().len() - 1);
        assert!(matches!(
            m.bracket(&top, &m.generator(Letter::X)),
            Err(Error::DegreeOverflow { .. })
        ));
        assert!(m.ad(Letter::X, &top).is_err());
    }

    #[test]
    fn words_parse_with_exponents() {
        assert_eq!(
            parse_word("y x^3 y").unwrap(),
            vec![Letter::Y, Letter::X, Letter::X, Letter::X, Letter::Y]
        );
        assert_eq!(compress_word("yxxxy"), "y x^3 y");
        assert!(parse_word("yz").is_err());
    }

    #[test]
    fn corrupted_action_breaks_validation() {
        let m = metabelian(10);
        let bad = m
            .with_replaced_ad(Letter::Y, 3, FpMatrix::identity(1))
            .unwrap();
        let report = bad.validate();
        assert!(!report.passed());
        assert!(report.first_failure_degree().is_some());
    }
}
