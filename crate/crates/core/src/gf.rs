//! Arithmetic in the prime field `F_p` and the small dense linear algebra the
//! rest of the crate is built on.
//!
//! Every component of a thin algebra has dimension at most two, so matrices
//! here are tiny and dense. Scalars are `u32` residues kept in `[0, p)`.

use std::fmt;
use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The prime field `F_p` with `p > 3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct PrimeField {
    p: u32,
}

impl TryFrom<u32> for PrimeField {
    type Error = Error;

    fn try_from(p: u32) -> Result<Self> {
        PrimeField::new(p)
    }
}

impl From<PrimeField> for u32 {
    fn from(f: PrimeField) -> u32 {
        f.p
    }
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl PrimeField {
    /// Characteristic must be an odd prime greater than 3.
    pub fn new(p: u32) -> Result<Self> {
        if p <= 3 || !is_prime(p as u64) {
            return Err(Error::InvalidField(p));
        }
        // keeps products of two residues inside u64 with room to spare
        if p >= 1 << 16 {
            return Err(Error::InvalidField(p));
        }
        Ok(PrimeField { p })
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn reduce(&self, v: i64) -> u32 {
        v.rem_euclid(self.p as i64) as u32
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p as u64) as u32
    }

    pub fn pow(&self, mut base: u32, mut exp: u64) -> u32 {
        let mut acc = 1;
        base %= self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Inverse by Fermat's little theorem.
    pub fn inv(&self, a: u32) -> Result<u32> {
        if a % self.p == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(self.pow(a, self.p as u64 - 2))
    }

    pub fn div(&self, a: u32, b: u32) -> Result<u32> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// Signed representative in `(-p/2, p/2]`, used for human-readable output.
    pub fn signed(&self, a: u32) -> i64 {
        let a = a as i64;
        if a > self.p as i64 / 2 {
            a - self.p as i64
        } else {
            a
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = u32> {
        0..self.p
    }
}

impl fmt::Display for PrimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.p)
    }
}

/// `C(n, k) mod p`, computed digit by digit in base `p`.
pub fn lucas_binom(mut n: u64, mut k: u64, p: u32) -> u32 {
    if k > n {
        return 0;
    }
    let p64 = p as u64;
    let mut acc: u64 = 1;
    while k > 0 || n > 0 {
        let (nd, kd) = (n % p64, k % p64);
        if kd > nd {
            return 0;
        }
        acc = acc * small_binom(nd, kd, p64) % p64;
        n /= p64;
        k /= p64;
    }
    acc as u32
}

// C(n, k) mod p for n < p, via the multiplicative formula and a Fermat inverse
fn small_binom(n: u64, k: u64, p: u64) -> u64 {
    let k = k.min(n - k);
    let (mut num, mut den) = (1u64, 1u64);
    for i in 0..k {
        num = num * ((n - i) % p) % p;
        den = den * ((i + 1) % p) % p;
    }
    let mut inv = 1u64;
    let (mut b, mut e) = (den, p - 2);
    while e > 0 {
        if e & 1 == 1 {
            inv = inv * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    num * inv % p
}

/// A vector of residues.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FpVector(pub Vec<u32>);

impl FpVector {
    pub fn zeros(len: usize) -> Self {
        FpVector(vec![0; len])
    }

    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = vec![0; len];
        v[i] = 1;
        FpVector(v)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn add_scaled(&mut self, f: &PrimeField, c: u32, other: &[u32]) {
        debug_assert_eq!(self.0.len(), other.len());
        if c == 0 {
            return;
        }
        for (a, &b) in self.0.iter_mut().zip(other) {
            *a = f.add(*a, f.mul(c, b));
        }
    }

    pub fn scale(&mut self, f: &PrimeField, c: u32) {
        for a in self.0.iter_mut() {
            *a = f.mul(*a, c);
        }
    }

    pub fn scaled(&self, f: &PrimeField, c: u32) -> Self {
        let mut v = self.clone();
        v.scale(f, c);
        v
    }

    pub fn neg(&self, f: &PrimeField) -> Self {
        FpVector(self.0.iter().map(|&a| f.neg(a)).collect())
    }

    pub fn sum(&self, f: &PrimeField, other: &FpVector) -> Self {
        let mut v = self.clone();
        v.add_scaled(f, 1, other);
        v
    }

    pub fn difference(&self, f: &PrimeField, other: &FpVector) -> Self {
        let mut v = self.clone();
        v.add_scaled(f, f.neg(1), other);
        v
    }

    /// If `self = c * other` for some scalar, returns `c`.
    pub fn ratio_to(&self, f: &PrimeField, other: &FpVector) -> Option<u32> {
        let pivot = other.0.iter().position(|&c| c != 0)?;
        let c = f.div(self.0[pivot], other.0[pivot]).ok()?;
        if *self == other.scaled(f, c) {
            Some(c)
        } else {
            None
        }
    }
}

impl Deref for FpVector {
    type Target = Vec<u32>;
    fn deref(&self) -> &Vec<u32> {
        &self.0
    }
}

impl DerefMut for FpVector {
    fn deref_mut(&mut self) -> &mut Vec<u32> {
        &mut self.0
    }
}

impl From<Vec<u32>> for FpVector {
    fn from(v: Vec<u32>) -> Self {
        FpVector(v)
    }
}

/// Dense row-major matrix over `F_p`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FpMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl FpMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        FpMatrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = FpMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(f: &PrimeField, rows: &[Vec<i64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch(format!(
                "ragged rows in a {r}-row matrix"
            )));
        }
        let data = rows.iter().flatten().map(|&v| f.reduce(v)).collect();
        Ok(FpMatrix {
            rows: r,
            cols: c,
            data,
        })
    }

    /// Matrix whose columns are the given vectors, all of length `rows`.
    pub fn from_columns(rows: usize, columns: &[FpVector]) -> Self {
        let mut m = FpMatrix::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            debug_assert_eq!(col.len(), rows);
            for (i, &v) in col.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> FpVector {
        FpVector((0..self.rows).map(|i| self.get(i, j)).collect())
    }

    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        (0..self.rows)
            .map(|i| self.data[i * self.cols..(i + 1) * self.cols].to_vec())
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn apply(&self, f: &PrimeField, v: &[u32]) -> FpVector {
        assert_eq!(v.len(), self.cols, "matrix/vector dimension mismatch");
        let mut out = FpVector::zeros(self.rows);
        for i in 0..self.rows {
            let mut acc = 0u64;
            for j in 0..self.cols {
                acc += self.get(i, j) as u64 * v[j] as u64;
            }
            out[i] = (acc % f.p() as u64) as u32;
        }
        out
    }

    /// `self * rhs` in the usual sense (apply `rhs` first).
    pub fn mul(&self, f: &PrimeField, rhs: &FpMatrix) -> FpMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = FpMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let mut acc = 0u64;
                for k in 0..self.cols {
                    acc += self.get(i, k) as u64 * rhs.get(k, j) as u64;
                }
                out.set(i, j, (acc % f.p() as u64) as u32);
            }
        }
        out
    }

    pub fn add(&self, f: &PrimeField, rhs: &FpMatrix) -> FpMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        FpMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| f.add(a, b))
                .collect(),
        }
    }

    pub fn scaled(&self, f: &PrimeField, c: u32) -> FpMatrix {
        FpMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&a| f.mul(a, c)).collect(),
        }
    }

    pub fn sub(&self, f: &PrimeField, rhs: &FpMatrix) -> FpMatrix {
        self.add(f, &rhs.scaled(f, f.neg(1)))
    }

    pub fn rank(&self, f: &PrimeField) -> usize {
        let mut m = self.clone();
        row_reduce(f, &mut m).len()
    }
}

// Reduced row echelon form in place; returns the pivot columns.
fn row_reduce(f: &PrimeField, m: &mut FpMatrix) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..m.cols {
        if row == m.rows {
            break;
        }
        let Some(pr) = (row..m.rows).find(|&r| m.get(r, col) != 0) else {
            continue;
        };
        if pr != row {
            for j in 0..m.cols {
                let t = m.get(row, j);
                m.set(row, j, m.get(pr, j));
                m.set(pr, j, t);
            }
        }
        let inv = f.inv(m.get(row, col)).expect("pivot is nonzero");
        for j in 0..m.cols {
            m.set(row, j, f.mul(m.get(row, j), inv));
        }
        for r in 0..m.rows {
            if r != row {
                let c = m.get(r, col);
                if c != 0 {
                    for j in 0..m.cols {
                        let v = f.sub(m.get(r, j), f.mul(c, m.get(row, j)));
                        m.set(r, j, v);
                    }
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    pivots
}

/// Outcome of solving `A x = b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Solution {
    Inconsistent,
    Solved {
        particular: FpVector,
        kernel: Vec<FpVector>,
    },
}

impl Solution {
    pub fn is_unique(&self) -> bool {
        matches!(self, Solution::Solved { kernel, .. } if kernel.is_empty())
    }
}

/// Solves `A x = b` exactly, returning one solution plus a basis of the kernel of `A`.
pub fn solve_or_kernel(f: &PrimeField, a: &FpMatrix, b: &[u32]) -> Result<Solution> {
    if b.len() != a.rows {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix against right-hand side of length {}",
            a.rows,
            a.cols,
            b.len()
        )));
    }
    let mut aug = FpMatrix::zeros(a.rows, a.cols + 1);
    for i in 0..a.rows {
        for j in 0..a.cols {
            aug.set(i, j, a.get(i, j));
        }
        aug.set(i, a.cols, b[i] % f.p());
    }
    let pivots = row_reduce(f, &mut aug);
    if pivots.last() == Some(&a.cols) {
        return Ok(Solution::Inconsistent);
    }
    let mut particular = FpVector::zeros(a.cols);
    for (r, &c) in pivots.iter().enumerate() {
        particular[c] = aug.get(r, a.cols);
    }
    let free: Vec<usize> = (0..a.cols).filter(|c| !pivots.contains(c)).collect();
    let kernel = free
        .iter()
        .map(|&fc| {
            let mut v = FpVector::zeros(a.cols);
            v[fc] = 1;
            for (r, &c) in pivots.iter().enumerate() {
                v[c] = f.neg(aug.get(r, fc));
            }
            v
        })
        .collect();
    Ok(Solution::Solved { particular, kernel })
}

/// Basis of the kernel of `A`.
pub fn kernel(f: &PrimeField, a: &FpMatrix) -> Vec<FpVector> {
    match solve_or_kernel(f, a, &vec![0; a.rows]) {
        Ok(Solution::Solved { kernel, .. }) => kernel,
        _ => unreachable!("homogeneous systems are always consistent"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f7() -> PrimeField {
        PrimeField::new(7).unwrap()
    }

    #[test]
    fn rejects_small_and_composite_characteristic() {
        for p in [0, 1, 2, 3, 4, 9, 25] {
            assert!(PrimeField::new(p).is_err(), "p = {p}");
        }
        assert!(PrimeField::new(5).is_ok());
        assert!(PrimeField::new(101).is_ok());
    }

    #[test]
    fn lucas_examples() {
        assert_eq!(lucas_binom(6, 2, 7), 1);
        assert_eq!(lucas_binom(5, 0, 7), 1);
        // 252 = 7 * 36
        assert_eq!(lucas_binom(10, 5, 7), 0);
        assert_eq!(lucas_binom(3, 5, 7), 0);
    }

    #[test]
    fn binomials_of_q_minus_one_alternate() {
        let f = f7();
        for q in [7u64, 49] {
            for i in 0..q {
                let expected = if i % 2 == 0 { 1 } else { f.neg(1) };
                assert_eq!(lucas_binom(q - 1, i, 7), expected, "q={q} i={i}");
            }
        }
    }

    #[test]
    fn inverse_and_division() {
        let f = f7();
        for a in 1..7 {
            assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
        }
        assert!(f.inv(0).is_err());
        assert_eq!(f.signed(6), -1);
        assert_eq!(f.signed(3), 3);
    }

    #[test]
    fn identity_solves_uniquely() {
        let f = f7();
        let id = FpMatrix::identity(3);
        let sol = solve_or_kernel(&f, &id, &[4, 0, 6]).unwrap();
        assert_eq!(
            sol,
            Solution::Solved {
                particular: FpVector(vec![4, 0, 6]),
                kernel: vec![]
            }
        );
    }

    #[test]
    fn zero_matrix_has_full_kernel() {
        let f = f7();
        let z = FpMatrix::zeros(2, 3);
        match solve_or_kernel(&f, &z, &[0, 0]).unwrap() {
            Solution::Solved { particular, kernel } => {
                assert!(particular.is_zero());
                assert_eq!(kernel.len(), 3);
            }
            Solution::Inconsistent => panic!("homogeneous system"),
        }
        assert_eq!(
            solve_or_kernel(&f, &z, &[1, 0]).unwrap(),
            Solution::Inconsistent
        );
    }

    #[test]
    fn rank_one_system_mod_seven() {
        let f = f7();
        let a = FpMatrix::from_rows(&f, &[vec![1, 2], vec![2, 4]]).unwrap();
        match solve_or_kernel(&f, &a, &[1, 2]).unwrap() {
            Solution::Solved { particular, kernel } => {
                assert_eq!(particular, FpVector(vec![1, 0]));
                // kernel spanned by (-2, 1) = (5, 1)
                assert_eq!(kernel, vec![FpVector(vec![5, 1])]);
            }
            Solution::Inconsistent => panic!("consistent system"),
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let f = f7();
        let a = FpMatrix::identity(2);
        assert!(matches!(
            solve_or_kernel(&f, &a, &[1, 2, 3]),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
