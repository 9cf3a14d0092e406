//! `H₁(G, ℤ)` and `H₂(G, ℤ)` from the normalized bar complex.
//!
//! Bases of `C_n` are `n`-tuples of non-identity elements; tuple
//! `[g₁|…|g_n]` has index `Σ (g_i − 1)(|G| − 1)^{n−i}` (the identity is
//! element 0). Smith forms are computed by a two-pass elimination: unit
//! pivots are taken first into a reduced echelon form, every column is then
//! reduced into the non-pivot coordinates, and only that small remainder
//! gets a full Smith normal form.
//!
//! Dense mode works over `ℤ` with arbitrary precision. Local mode works over
//! `ℤ/p^k` for each `p | |G|` with `k = v_p(|G|) + 1`, which is exact for the
//! `p`-part because the exponent of `H₂(G)` divides `|G|`, and takes ranks
//! over `ℤ/65521`.

use alloc::{vec, vec::Vec};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::group::{prime_factors, AbelianInvariants, Group};

/// Prime used for ranks in local mode; it exceeds every order in bounds.
pub const RANK_PRIME: u32 = 65521;

/// An integer matrix stored by columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    pub rows: usize,
    pub cols: usize,
    columns: Vec<Vec<(usize, BigInt)>>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> IntMatrix {
        IntMatrix { rows, cols, columns: vec![Vec::new(); cols] }
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> IntMatrix {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = IntMatrix::zeros(rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), cols, "ragged matrix");
            for (j, &v) in row.iter().enumerate() {
                if v != 0 {
                    m.columns[j].push((i, BigInt::from(v)));
                }
            }
        }
        m
    }

    /// Builds a matrix from sparse columns; repeated rows are summed.
    pub fn from_columns(rows: usize, columns: Vec<Vec<(usize, i64)>>) -> IntMatrix {
        let cols = columns.len();
        let columns = columns
            .into_iter()
            .map(|col| {
                let mut acc: Vec<(usize, BigInt)> = Vec::new();
                for (r, v) in col {
                    assert!(r < rows, "row index out of range");
                    match acc.iter_mut().find(|(i, _)| *i == r) {
                        Some((_, x)) => *x += v,
                        None => acc.push((r, BigInt::from(v))),
                    }
                }
                acc.retain(|(_, v)| !v.is_zero());
                acc.sort_by_key(|(r, _)| *r);
                acc
            })
            .collect();
        IntMatrix { rows, cols, columns }
    }

    pub fn column(&self, j: usize) -> &[(usize, BigInt)] {
        &self.columns[j]
    }

    pub fn get(&self, i: usize, j: usize) -> BigInt {
        self.columns[j].iter().find(|(r, _)| *r == i).map_or_else(BigInt::zero, |(_, v)| v.clone())
    }

    pub fn to_dense(&self) -> Vec<Vec<BigInt>> {
        let mut out = vec![vec![BigInt::zero(); self.cols]; self.rows];
        for (j, col) in self.columns.iter().enumerate() {
            for (i, v) in col {
                out[*i][j] = v.clone();
            }
        }
        out
    }

    /// `self · other`.
    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "shape mismatch");
        let columns = other
            .columns
            .iter()
            .map(|col| {
                let mut acc = vec![BigInt::zero(); self.rows];
                for (k, v) in col {
                    for (i, w) in &self.columns[*k] {
                        acc[*i] += v * w;
                    }
                }
                acc.into_iter().enumerate().filter(|(_, v)| !v.is_zero()).collect()
            })
            .collect();
        IntMatrix { rows: self.rows, cols: other.cols, columns }
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(Vec::is_empty)
    }
}

/// Invariant factors `d₁ | d₂ | …` of the nonzero part of a Smith form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SNFResult {
    pub diag: Vec<BigInt>,
    pub rank: usize,
}

// ---------------------------------------------------------------------------
// Coefficient rings

trait Ring {
    type E: Clone + PartialEq + core::fmt::Debug;
    fn zero(&self) -> Self::E;
    fn is_zero(&self, x: &Self::E) -> bool;
    fn is_unit(&self, x: &Self::E) -> bool;
    fn unit_inverse(&self, x: &Self::E) -> Self::E;
    fn mul(&self, x: &Self::E, y: &Self::E) -> Self::E;
    fn add_assign(&self, x: &mut Self::E, y: &Self::E);
    /// `x -= f·y`.
    fn sub_mul(&self, x: &mut Self::E, f: &Self::E, y: &Self::E);
}

struct Integers;

impl Ring for Integers {
    type E = BigInt;
    fn zero(&self) -> BigInt {
        BigInt::zero()
    }
    fn is_zero(&self, x: &BigInt) -> bool {
        x.is_zero()
    }
    fn is_unit(&self, x: &BigInt) -> bool {
        x.abs().is_one()
    }
    fn unit_inverse(&self, x: &BigInt) -> BigInt {
        x.clone()
    }
    fn mul(&self, x: &BigInt, y: &BigInt) -> BigInt {
        x * y
    }
    fn add_assign(&self, x: &mut BigInt, y: &BigInt) {
        *x += y;
    }
    fn sub_mul(&self, x: &mut BigInt, f: &BigInt, y: &BigInt) {
        if !f.is_zero() && !y.is_zero() {
            *x -= f * y;
        }
    }
}

/// `ℤ/p^k` with branch-light reduction (Lemire's fastmod); `p^k < 2^16`.
#[derive(Clone, Copy, Debug)]
struct LocalRing {
    p: u32,
    k: u32,
    m: u32,
    magic: u64,
}

impl LocalRing {
    fn new(p: u32, k: u32) -> LocalRing {
        let m = p.checked_pow(k).filter(|&m| m < 1 << 16).expect("modulus below 2^16");
        LocalRing { p, k, m, magic: (u64::MAX / u64::from(m)).wrapping_add(1) }
    }

    #[inline]
    fn reduce(&self, a: u32) -> u32 {
        let low = self.magic.wrapping_mul(u64::from(a));
        ((u128::from(low) * u128::from(self.m)) >> 64) as u32
    }

    fn from_i64(&self, v: i64) -> u32 {
        v.rem_euclid(i64::from(self.m)) as u32
    }

    fn valuation(&self, mut x: u32) -> u32 {
        if x == 0 {
            return self.k;
        }
        let mut v = 0;
        while x.is_multiple_of(self.p) {
            x /= self.p;
            v += 1;
        }
        v
    }
}

impl Ring for LocalRing {
    type E = u32;
    fn zero(&self) -> u32 {
        0
    }
    fn is_zero(&self, x: &u32) -> bool {
        *x == 0
    }
    fn is_unit(&self, x: &u32) -> bool {
        !(*x).is_multiple_of(self.p)
    }
    fn unit_inverse(&self, x: &u32) -> u32 {
        let (m, a) = (i64::from(self.m), i64::from(*x));
        let e = a.extended_gcd(&m);
        debug_assert_eq!(e.gcd, 1);
        e.x.rem_euclid(m) as u32
    }
    #[inline]
    fn mul(&self, x: &u32, y: &u32) -> u32 {
        self.reduce(x * y)
    }
    #[inline]
    fn add_assign(&self, x: &mut u32, y: &u32) {
        let s = *x + *y;
        *x = if s >= self.m { s - self.m } else { s };
    }
    #[inline]
    fn sub_mul(&self, x: &mut u32, f: &u32, y: &u32) {
        let t = self.reduce(*f * *y);
        *x = if *x >= t { *x - t } else { *x + self.m - t };
    }
}

// ---------------------------------------------------------------------------
// Unit-pivot elimination

/// Reduced echelon form on unit pivots of the module spanned by a stream
/// of vectors in `R^n`. Each stored row is 1 at its pivot, 0 at every other
/// pivot column, and supported on the free columns otherwise.
struct UnitEliminator<'r, R: Ring> {
    ring: &'r R,
    n: usize,
    rows: Vec<Vec<R::E>>,
    pivot_row: Vec<Option<usize>>,
    free: Vec<usize>,
    free_pos: Vec<usize>,
    scratch: Vec<R::E>,
    touched: Vec<usize>,
}

impl<'r, R: Ring> UnitEliminator<'r, R> {
    fn new(ring: &'r R, n: usize) -> Self {
        UnitEliminator {
            ring,
            n,
            rows: Vec::new(),
            pivot_row: vec![None; n],
            free: (0..n).collect(),
            free_pos: (0..n).collect(),
            scratch: vec![ring.zero(); n],
            touched: Vec::new(),
        }
    }

    /// Loads `v` into the scratch vector and clears its pivot coordinates.
    fn load(&mut self, v: &[(usize, R::E)]) {
        let ring = self.ring;
        self.touched.clear();
        for (c, x) in v {
            ring.add_assign(&mut self.scratch[*c], x);
            self.touched.push(*c);
        }
        for t in 0..self.touched.len() {
            let c = self.touched[t];
            let Some(r) = self.pivot_row[c] else { continue };
            if ring.is_zero(&self.scratch[c]) {
                continue;
            }
            let f = core::mem::replace(&mut self.scratch[c], ring.zero());
            let row = &self.rows[r];
            for &j in &self.free {
                if !ring.is_zero(&row[j]) {
                    ring.sub_mul(&mut self.scratch[j], &f, &row[j]);
                }
            }
        }
    }

    fn clear_scratch(&mut self) {
        let zero = self.ring.zero();
        for &j in &self.free {
            self.scratch[j] = zero.clone();
        }
        for &c in &self.touched {
            self.scratch[c] = zero.clone();
        }
    }

    /// Inserts `v`; a unit on a free column becomes a new pivot. Vectors
    /// without one are dropped, which loses nothing since the final
    /// `remainder` pass reduces every generator again.
    fn insert(&mut self, v: &[(usize, R::E)]) {
        let ring = self.ring;
        self.load(v);
        let unit = self.free.iter().copied().find(|&j| ring.is_unit(&self.scratch[j]));
        if let Some(c) = unit {
            let inv = ring.unit_inverse(&self.scratch[c]);
            let mut row = vec![ring.zero(); self.n];
            for &j in &self.free {
                if !ring.is_zero(&self.scratch[j]) {
                    row[j] = ring.mul(&self.scratch[j], &inv);
                }
            }
            // Remove c from the free list.
            let pos = self.free_pos[c];
            let last = *self.free.last().expect("c is free");
            self.free.swap_remove(pos);
            if last != c {
                self.free_pos[last] = pos;
            }
            for other in &mut self.rows {
                if ring.is_zero(&other[c]) {
                    continue;
                }
                let f = core::mem::replace(&mut other[c], ring.zero());
                for &j in &self.free {
                    if !ring.is_zero(&row[j]) {
                        ring.sub_mul(&mut other[j], &f, &row[j]);
                    }
                }
            }
            self.scratch[c] = ring.zero();
            self.pivot_row[c] = Some(self.rows.len());
            self.rows.push(row);
        }
        self.clear_scratch();
    }

    /// The free columns in ascending order.
    fn free_columns(&self) -> Vec<usize> {
        let mut f = self.free.clone();
        f.sort_unstable();
        f
    }

    /// `v` reduced by every pivot row, read off on `cols`.
    fn remainder(&mut self, v: &[(usize, R::E)], cols: &[usize]) -> Vec<R::E> {
        self.load(v);
        let out = cols.iter().map(|&j| self.scratch[j].clone()).collect();
        self.clear_scratch();
        out
    }
}

// ---------------------------------------------------------------------------
// Smith forms of the remainders

fn min_nonzero(a: &[Vec<BigInt>], t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize, BigInt)> = None;
    for (i, row) in a.iter().enumerate().skip(t) {
        for (j, v) in row.iter().enumerate().skip(t) {
            if !v.is_zero() && best.as_ref().is_none_or(|(_, _, b)| v.abs() < *b) {
                best = Some((i, j, v.abs()));
            }
        }
    }
    best.map(|(i, j, _)| (i, j))
}

/// Smith form of a dense integer matrix by min-magnitude pivoting.
fn dense_snf(mut a: Vec<Vec<BigInt>>) -> Vec<BigInt> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut diag = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        let Some((i, j)) = min_nonzero(&a, t) else { break };
        a.swap(t, i);
        for row in a.iter_mut() {
            row.swap(t, j);
        }
        loop {
            let mut dirty = false;
            for i in t + 1..rows {
                if a[i][t].is_zero() {
                    continue;
                }
                let q = a[i][t].div_floor(&a[t][t]);
                let (top, rest) = a.split_at_mut(i);
                for (x, y) in rest[0].iter_mut().zip(&top[t]).skip(t) {
                    *x -= &q * y;
                }
                dirty |= !a[i][t].is_zero();
            }
            for j in t + 1..cols {
                if a[t][j].is_zero() {
                    continue;
                }
                let q = a[t][j].div_floor(&a[t][t]);
                for row in a.iter_mut().skip(t) {
                    let y = row[t].clone();
                    row[j] -= &q * y;
                }
                dirty |= !a[t][j].is_zero();
            }
            if dirty {
                // A smaller remainder appeared; move it to the pivot.
                let (mut bi, mut bj) = (t, t);
                for i in t..rows {
                    for j in t..cols {
                        if (i == t || j == t) && !a[i][j].is_zero() && a[i][j].abs() < a[bi][bj].abs() {
                            (bi, bj) = (i, j);
                        }
                    }
                }
                a.swap(t, bi);
                for row in a.iter_mut() {
                    row.swap(t, bj);
                }
                continue;
            }
            let bad = (t + 1..rows).find(|&i| a[i].iter().skip(t + 1).any(|v| !v.is_multiple_of(&a[t][t])));
            match bad {
                Some(i) => {
                    let (top, rest) = a.split_at_mut(i);
                    for (x, y) in top[t].iter_mut().zip(&rest[0]).skip(t) {
                        *x += y;
                    }
                }
                None => break,
            }
        }
        diag.push(a[t][t].abs());
        t += 1;
    }
    diag
}

/// Valuations of the Smith form over `ℤ/p^k` of the module spanned by
/// `vectors`, by min-valuation pivoting. Zero diagonal entries are omitted.
fn local_snf(ring: &LocalRing, mut a: Vec<Vec<u32>>) -> Vec<u32> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut out = Vec::new();
    for t in 0..rows.min(cols) {
        let mut best: Option<(usize, usize, u32)> = None;
        for (i, row) in a.iter().enumerate().skip(t) {
            for (j, &v) in row.iter().enumerate().skip(t) {
                if v != 0 {
                    let val = ring.valuation(v);
                    if best.is_none_or(|(_, _, b)| val < b) {
                        best = Some((i, j, val));
                    }
                }
            }
        }
        let Some((i, j, val)) = best else { break };
        a.swap(t, i);
        for row in a.iter_mut() {
            row.swap(t, j);
        }
        // pivot = p^val·u; every entry has valuation ≥ val.
        let pv = ring.p.pow(val);
        let u_inv = ring.unit_inverse(&(a[t][t] / pv));
        for i in t + 1..rows {
            if a[i][t] == 0 {
                continue;
            }
            let f = ring.mul(&(a[i][t] / pv), &u_inv);
            let (top, rest) = a.split_at_mut(i);
            for (x, y) in rest[0].iter_mut().zip(&top[t]).skip(t) {
                ring.sub_mul(x, &f, y);
            }
        }
        for j in t + 1..cols {
            if a[t][j] == 0 {
                continue;
            }
            let f = ring.mul(&(a[t][j] / pv), &u_inv);
            for row in a.iter_mut().skip(t) {
                let y = row[t];
                ring.sub_mul(&mut row[j], &f, &y);
            }
        }
        out.push(val);
    }
    out
}

/// Row-echelon accumulator over `ℤ/p^k` in `w` coordinates; keeps at most
/// `w` generators of the spanned module.
struct LocalEchelon<'r> {
    ring: &'r LocalRing,
    rows: Vec<Option<Vec<u32>>>,
}

impl<'r> LocalEchelon<'r> {
    fn new(ring: &'r LocalRing, w: usize) -> Self {
        LocalEchelon { ring, rows: vec![None; w] }
    }

    fn insert(&mut self, mut x: Vec<u32>) {
        let ring = self.ring;
        let mut j = 0;
        while j < x.len() {
            if x[j] == 0 {
                j += 1;
                continue;
            }
            let Some(row) = &mut self.rows[j] else {
                self.rows[j] = Some(x);
                return;
            };
            let (vx, vr) = (ring.valuation(x[j]), ring.valuation(row[j]));
            if vx < vr {
                core::mem::swap(row, &mut x);
            }
            let row = self.rows[j].as_ref().expect("present");
            let v = vx.min(vr);
            let pv = ring.p.pow(v);
            let f = ring.mul(&(x[j] / pv), &ring.unit_inverse(&(row[j] / pv)));
            for (a, b) in x.iter_mut().zip(row).skip(j) {
                ring.sub_mul(a, &f, b);
            }
            debug_assert_eq!(x[j], 0);
            j += 1;
        }
    }

    fn into_rows(self) -> Vec<Vec<u32>> {
        self.rows.into_iter().flatten().collect()
    }
}

// ---------------------------------------------------------------------------
// Public entry points

/// Exact Smith normal form of an integer matrix.
pub fn smith_normal_form(m: &IntMatrix) -> SNFResult {
    let ring = Integers;
    let mut elim = UnitEliminator::new(&ring, m.rows);
    for j in 0..m.cols {
        elim.insert(m.column(j));
    }
    let free = elim.free_columns();
    let units = elim.rows.len();
    let mut rest: Vec<Vec<BigInt>> = Vec::new();
    for j in 0..m.cols {
        let r = elim.remainder(m.column(j), &free);
        if r.iter().any(|v| !v.is_zero()) && !rest.contains(&r) {
            rest.push(r);
        }
    }
    let mut diag = vec![BigInt::one(); units];
    diag.extend(dense_snf(rest));
    let rank = diag.len();
    SNFResult { diag, rank }
}

fn tuple_index(tuple: &[usize], n: usize) -> usize {
    tuple.iter().fold(0, |acc, &g| acc * (n - 1) + (g - 1))
}

/// `∂₂[a|b] = [b] − [ab] + [a]`, identity brackets dropped.
fn d2_column(g: &Group, a: usize, b: usize, out: &mut Vec<(usize, i64)>) {
    let n = g.order();
    out.clear();
    let ab = g.mul(a, b);
    for (t, s) in [(b, 1), (ab, -1), (a, 1)] {
        if t != 0 {
            out.push((tuple_index(&[t], n), s));
        }
    }
}

/// `∂₃[a|b|c] = [b|c] − [ab|c] + [a|bc] − [a|b]`, identity brackets dropped.
fn d3_column(g: &Group, a: usize, b: usize, c: usize, out: &mut Vec<(usize, i64)>) {
    let n = g.order();
    out.clear();
    let (ab, bc) = (g.mul(a, b), g.mul(b, c));
    for (x, y, s) in [(b, c, 1), (ab, c, -1), (a, bc, 1), (a, b, -1)] {
        if x != 0 && y != 0 {
            out.push((tuple_index(&[x, y], n), s));
        }
    }
}

fn for_each_d2(g: &Group, mut f: impl FnMut(&[(usize, i64)])) {
    let mut buf = Vec::with_capacity(3);
    for a in 1..g.order() {
        for b in 1..g.order() {
            d2_column(g, a, b, &mut buf);
            f(&buf);
        }
    }
}

fn for_each_d3(g: &Group, mut f: impl FnMut(&[(usize, i64)])) {
    let mut buf = Vec::with_capacity(4);
    for a in 1..g.order() {
        for b in 1..g.order() {
            for c in 1..g.order() {
                d3_column(g, a, b, c, &mut buf);
                f(&buf);
            }
        }
    }
}

/// `∂₂: C₂ → C₁` and `∂₃: C₃ → C₂` of the normalized bar complex.
pub fn bar_boundaries(g: &Group, config: &Config) -> Result<(IntMatrix, IntMatrix)> {
    if g.order() > config.h2_dense_bound {
        return Err(Error::OrderBound { bound: config.h2_dense_bound });
    }
    let q = g.order().saturating_sub(1);
    let mut c2 = Vec::with_capacity(q * q);
    for_each_d2(g, |col| c2.push(col.to_vec()));
    let mut c3 = Vec::with_capacity(q * q * q);
    for_each_d3(g, |col| c3.push(col.to_vec()));
    Ok((IntMatrix::from_columns(q, c2), IntMatrix::from_columns(q * q, c3)))
}

/// How a homology group was computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Dense,
    Local,
}

/// `H_n(G, ℤ)` with the data behind it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomologyResult {
    pub degree: usize,
    pub invariants: AbelianInvariants,
    pub mode: Mode,
    /// Ranks of `C₀ … C₃`.
    pub dims: [usize; 4],
    /// `p`-primary exponents in local mode, by prime.
    pub local_factors: Vec<(u64, Vec<u32>)>,
}

fn dims(g: &Group) -> [usize; 4] {
    let q = g.order() - 1;
    [1, q, q * q, q * q * q]
}

/// `H₁` by dense mode, `H₂` by dense mode up to `h2_dense_bound` and local
/// mode up to `h2_sparse_bound`.
pub fn homology(g: &Group, degree: usize, config: &Config) -> Result<HomologyResult> {
    let mode = match degree {
        1 if g.order() <= config.h1_bound => Mode::Dense,
        1 => return Err(Error::OrderBound { bound: config.h1_bound }),
        2 if g.order() <= config.h2_dense_bound => Mode::Dense,
        2 if g.order() <= config.h2_sparse_bound => Mode::Local,
        2 => return Err(Error::OrderBound { bound: config.h2_sparse_bound }),
        _ => return Err(Error::SchemaError("homology degree must be 1 or 2".into())),
    };
    homology_in_mode(g, degree, mode, config)
}

/// As `homology`, forcing the mode (bounds still apply).
pub fn homology_in_mode(g: &Group, degree: usize, mode: Mode, config: &Config) -> Result<HomologyResult> {
    let bound = match (degree, mode) {
        (1, _) => config.h1_bound,
        (2, Mode::Dense) => config.h2_dense_bound,
        (2, Mode::Local) => config.h2_sparse_bound,
        _ => return Err(Error::SchemaError("homology degree must be 1 or 2".into())),
    };
    if g.order() > bound {
        return Err(Error::OrderBound { bound });
    }
    let dims = dims(g);
    if g.order() == 1 {
        return Ok(HomologyResult { degree, invariants: AbelianInvariants::trivial(), mode, dims, local_factors: Vec::new() });
    }
    match mode {
        Mode::Dense => dense_homology(g, degree, dims),
        Mode::Local => local_homology(g, degree, dims),
    }
}

fn to_bigint_column(col: &[(usize, i64)]) -> Vec<(usize, BigInt)> {
    col.iter().map(|&(r, v)| (r, BigInt::from(v))).collect()
}

fn snf_of_stream(rows: usize, each: impl Fn(&mut dyn FnMut(&[(usize, i64)]))) -> SNFResult {
    let ring = Integers;
    let mut elim = UnitEliminator::new(&ring, rows);
    each(&mut |col| elim.insert(&to_bigint_column(col)));
    let free = elim.free_columns();
    let units = elim.rows.len();
    let mut rest: Vec<Vec<BigInt>> = Vec::new();
    each(&mut |col| {
        let r = elim.remainder(&to_bigint_column(col), &free);
        if r.iter().any(|v| !v.is_zero()) && !rest.contains(&r) {
            rest.push(r);
        }
    });
    let mut diag = vec![BigInt::one(); units];
    diag.extend(dense_snf(rest));
    let rank = diag.len();
    SNFResult { diag, rank }
}

fn torsion(diag: &[BigInt]) -> Result<AbelianInvariants> {
    let factors: Vec<u64> = diag
        .iter()
        .filter(|d| !d.is_one())
        .map(|d| d.to_u64().ok_or_else(|| Error::SchemaError("invariant factor exceeds u64".into())))
        .collect::<Result<_>>()?;
    AbelianInvariants::new(factors)
}

fn dense_homology(g: &Group, degree: usize, dims: [usize; 4]) -> Result<HomologyResult> {
    let d2 = snf_of_stream(dims[1], |f| for_each_d2(g, f));
    let invariants = if degree == 1 {
        let free = dims[1] - d2.rank;
        if free > 0 {
            return Err(Error::InfiniteHomology(free));
        }
        torsion(&d2.diag)?
    } else {
        let d3 = snf_of_stream(dims[2], |f| for_each_d3(g, f));
        // coker ∂₃ ≅ H₂ ⊕ im ∂₂ and im ∂₂ is free of rank rank(∂₂).
        let free = dims[2] - d2.rank - d3.rank;
        if free > 0 {
            return Err(Error::InfiniteHomology(free));
        }
        torsion(&d3.diag)?
    };
    Ok(HomologyResult { degree, invariants, mode: Mode::Dense, dims, local_factors: Vec::new() })
}

/// Rank of the unit part and Smith valuations of the remainder for the
/// module spanned by a stream of columns over `ℤ/p^k`.
fn local_structure(rows: usize, ring: &LocalRing, each: &dyn Fn(&mut dyn FnMut(&[(usize, i64)]))) -> (usize, Vec<u32>) {
    let mut elim = UnitEliminator::new(ring, rows);
    let mut buf: Vec<(usize, u32)> = Vec::with_capacity(4);
    each(&mut |col| {
        buf.clear();
        buf.extend(col.iter().map(|&(r, v)| (r, ring.from_i64(v))));
        elim.insert(&buf);
    });
    let free = elim.free_columns();
    let units = elim.rows.len();
    let mut echelon = LocalEchelon::new(ring, free.len());
    each(&mut |col| {
        buf.clear();
        buf.extend(col.iter().map(|&(r, v)| (r, ring.from_i64(v))));
        let r = elim.remainder(&buf, &free);
        if r.iter().any(|&v| v != 0) {
            echelon.insert(r);
        }
    });
    (units, local_snf(ring, echelon.into_rows()))
}

fn local_homology(g: &Group, degree: usize, dims: [usize; 4]) -> Result<HomologyResult> {
    let d2_stream = |f: &mut dyn FnMut(&[(usize, i64)])| for_each_d2(g, f);
    let d3_stream = |f: &mut dyn FnMut(&[(usize, i64)])| for_each_d3(g, f);
    let field = LocalRing::new(RANK_PRIME, 1);
    let rank2 = {
        let (u, rest) = local_structure(dims[1], &field, &d2_stream);
        u + rest.len()
    };
    let (rows, stream, rank_other): (usize, &dyn Fn(&mut dyn FnMut(&[(usize, i64)])), usize) = if degree == 1 {
        (dims[1], &d2_stream, 0)
    } else {
        (dims[2], &d3_stream, rank2)
    };
    let rank = if degree == 1 {
        rank2
    } else {
        let (u, rest) = local_structure(rows, &field, stream);
        u + rest.len()
    };
    let free = rows - rank_other - rank;
    if free > 0 {
        return Err(Error::InfiniteHomology(free));
    }
    let mut local_factors = Vec::new();
    for (p, e) in prime_factors(g.order() as u64) {
        let k = e + 1;
        let ring = LocalRing::new(p as u32, k);
        let (units, rest) = local_structure(rows, &ring, stream);
        // coker ⊗ ℤ/p^k ≅ (H ⊗ ℤ/p^k) ⊕ (ℤ/p^k)^{rank_other}.
        let full = rows - units - rest.len();
        if full != rank_other {
            return Err(Error::ComparisonFailure(alloc::format!(
                "local rank at {p} is {full}, expected {rank_other}"
            )));
        }
        let mut exps: Vec<u32> = rest.into_iter().filter(|&v| v > 0).collect();
        exps.sort_unstable();
        if !exps.is_empty() {
            local_factors.push((p, exps));
        }
    }
    let invariants = AbelianInvariants::from_prime_powers(&local_factors);
    Ok(HomologyResult { degree, invariants, mode: Mode::Local, dims, local_factors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::group::{abelian_invariants, abelianization};

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn snf_examples() {
        assert_eq!(smith_normal_form(&IntMatrix::zeros(2, 3)), SNFResult { diag: vec![], rank: 0 });
        let m = IntMatrix::from_rows(&[vec![2, 0], vec![0, 3]]);
        assert_eq!(smith_normal_form(&m).diag, big(&[1, 6]));
        let m = IntMatrix::from_rows(&[vec![4, 6], vec![6, 9]]);
        assert_eq!(smith_normal_form(&m), SNFResult { diag: big(&[1]), rank: 1 });
        let m = IntMatrix::from_rows(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]);
        assert_eq!(smith_normal_form(&m).diag, big(&[2, 6, 12]));
    }

    /// Product of the diagonal equals the gcd of maximal minors for square
    /// full-rank matrices; checked on 2×2 via the determinant.
    #[test]
    fn snf_determinant() {
        for a in -3i64..=3 {
            for b in -3i64..=3 {
                for c in [-2i64, 0, 5] {
                    for d in [1i64, 4, -6] {
                        let m = IntMatrix::from_rows(&[vec![a, b], vec![c, d]]);
                        let s = smith_normal_form(&m);
                        let det = (a * d - b * c).abs();
                        if det != 0 {
                            let prod: BigInt = s.diag.iter().product();
                            assert_eq!(prod, BigInt::from(det));
                            assert!(s.diag.windows(2).all(|w| w[1].is_multiple_of(&w[0])));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn bar_examples() {
        let cfg = Config::default();
        let (d2, d3) = bar_boundaries(&fixtures::trivial(), &cfg).unwrap();
        assert_eq!((d2.rows, d2.cols, d3.rows, d3.cols), (0, 0, 0, 0));
        let (d2, d3) = bar_boundaries(&fixtures::cyclic(2), &cfg).unwrap();
        // ∂[g|g] = [g] − [e] + [g] = 2[g]; ∂[g|g|g] = [g|g] − 0 + 0 − [g|g] = 0.
        assert_eq!(d2.to_dense(), vec![big(&[2])]);
        assert!(d3.is_zero());
        let z3 = fixtures::cyclic(3);
        let (d2, d3) = bar_boundaries(&z3, &cfg).unwrap();
        assert_eq!((d2.rows, d2.cols, d3.rows, d3.cols), (2, 4, 4, 8));
        // ∂[1|1] = 2[1] − [2]; ∂[1|2] = ∂[2|1] = [1] + [2]; ∂[2|2] = 2[2] − [1].
        assert_eq!(d2.to_dense(), vec![big(&[2, 1, 1, -1]), big(&[-1, 1, 1, 2])]);
        // ∂[1|1|1] = [1|1] − [2|1] + [1|2] − [1|1] = [1|2] − [2|1].
        assert_eq!(d3.column(0).to_vec(), vec![(1, BigInt::from(1)), (2, BigInt::from(-1))]);
        assert!(bar_boundaries(&fixtures::s4(), &cfg).is_err());
    }

    #[test]
    fn chain_condition() {
        let cfg = Config::default();
        for g in fixtures::corpus().into_iter().filter(|g| g.order() <= 16) {
            let (d2, d3) = bar_boundaries(&g, &cfg).unwrap();
            assert!(d2.mul(&d3).is_zero(), "{}", g.name());
        }
    }

    #[test]
    fn h1_matches_abelianization() {
        let cfg = Config::default();
        for g in fixtures::named_corpus() {
            let h = homology(&g, 1, &cfg).unwrap();
            let (ab, _) = abelianization(&g);
            assert_eq!(h.invariants, abelian_invariants(&ab).unwrap(), "{}", g.name());
        }
        assert_eq!(homology(&fixtures::cyclic(6), 1, &cfg).unwrap().invariants.factors(), &[6]);
    }

    #[test]
    fn h2_small_examples() {
        let cfg = Config::default();
        for n in [2, 3, 4, 6] {
            assert!(homology(&fixtures::cyclic(n), 2, &cfg).unwrap().invariants.is_trivial());
        }
        assert_eq!(homology(&fixtures::v4(), 2, &cfg).unwrap().invariants.factors(), &[2]);
        assert_eq!(homology(&fixtures::z2cubed(), 2, &cfg).unwrap().invariants.factors(), &[2, 2, 2]);
        assert!(homology(&fixtures::q8(), 2, &cfg).unwrap().invariants.is_trivial());
        assert_eq!(homology(&fixtures::d4(), 2, &cfg).unwrap().invariants.factors(), &[2]);
        assert_eq!(homology(&fixtures::a4(), 2, &cfg).unwrap().invariants.factors(), &[2]);
    }

    #[test]
    fn modes_agree() {
        let cfg = Config::default();
        for g in fixtures::corpus().into_iter().filter(|g| g.order() <= 12) {
            for n in [1, 2] {
                let d = homology_in_mode(&g, n, Mode::Dense, &cfg).unwrap();
                let l = homology_in_mode(&g, n, Mode::Local, &cfg).unwrap();
                assert_eq!(d.invariants, l.invariants, "{} H{n}", g.name());
            }
        }
    }

    #[test]
    fn bounds() {
        let cfg = Config { h2_dense_bound: 4, h2_sparse_bound: 6, ..Config::default() };
        assert_eq!(homology(&fixtures::s3(), 2, &cfg).unwrap().mode, Mode::Local);
        assert_eq!(homology(&fixtures::d4(), 2, &cfg).unwrap_err(), Error::OrderBound { bound: 6 });
        assert!(homology(&fixtures::d4(), 3, &cfg).is_err());
    }

    // ----- independent oracle: counting 2-cocycles ---------------------------

    /// Log base `p` of the size of the row module of `a` over `ℤ/p^j`, by
    /// dense Gaussian elimination with global min-valuation pivots.
    fn log_row_module(a: &[Vec<i64>], p: i64, j: u32) -> u32 {
        let m = p.pow(j);
        let mut a: Vec<Vec<i64>> = a.iter().map(|r| r.iter().map(|v| v.rem_euclid(m)).collect()).collect();
        let val = |mut x: i64| {
            let mut v = 0;
            while x % p == 0 && v < j {
                x /= p;
                v += 1;
            }
            v
        };
        let inv = |x: i64| (1..m).find(|y| (x * y).rem_euclid(m) == 1).unwrap();
        let mut size = 0;
        let (rows, cols) = (a.len(), a.first().map_or(0, Vec::len));
        for t in 0..rows.min(cols) {
            let mut best = None;
            for i in t..rows {
                for c in t..cols {
                    if a[i][c] != 0 && best.is_none_or(|(_, _, v)| val(a[i][c]) < v) {
                        best = Some((i, c, val(a[i][c])));
                    }
                }
            }
            let Some((i, c, v)) = best else { break };
            a.swap(t, i);
            for r in a.iter_mut() {
                r.swap(t, c);
            }
            let pv = p.pow(v);
            let u = inv((a[t][t] / pv).rem_euclid(m));
            for i in 0..rows {
                if i != t && a[i][t] != 0 {
                    let f = (a[i][t] / pv * u).rem_euclid(m);
                    for c in 0..cols {
                        a[i][c] = (a[i][c] - f * a[t][c]).rem_euclid(m);
                    }
                }
            }
            size += j - v;
        }
        size
    }

    /// `log_p |H₂(G) ⊗ ℤ/p^j|` from unnormalized cochains:
    /// `log|H²(G; ℤ/p^j)| − log|Ext(H₁, ℤ/p^j)|`.
    fn oracle_log(g: &Group, h1: &AbelianInvariants, p: i64, j: u32) -> u32 {
        let n = g.order();
        // δ¹: C¹ → C², rows indexed by cochain coordinates of the image.
        let mut d1 = vec![vec![0i64; n]; n * n];
        for a in 0..n {
            for b in 0..n {
                let r = &mut d1[a * n + b];
                r[b] += 1;
                r[g.mul(a, b)] -= 1;
                r[a] += 1;
            }
        }
        let mut d2 = vec![vec![0i64; n * n]; n * n * n];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let r = &mut d2[(a * n + b) * n + c];
                    r[b * n + c] += 1;
                    r[g.mul(a, b) * n + c] -= 1;
                    r[a * n + g.mul(b, c)] += 1;
                    r[a * n + b] -= 1;
                }
            }
        }
        // |B²| = |im δ¹|; |Z²| = |C²| / |im δ²|. Image size equals the
        // size of the column module, i.e. the row module of the transpose.
        let t = |m: &Vec<Vec<i64>>| -> Vec<Vec<i64>> {
            (0..m[0].len()).map(|c| m.iter().map(|r| r[c]).collect()).collect()
        };
        let log_b2 = log_row_module(&t(&d1), p, j);
        let log_z2 = j * (n * n) as u32 - log_row_module(&t(&d2), p, j);
        let ext: u32 = h1
            .factors()
            .iter()
            .map(|&d| (d as i64).trailing_zeros_base_i(p).min(j))
            .sum();
        log_z2 - log_b2 - ext
    }

    trait ValI {
        fn trailing_zeros_base_i(self, p: i64) -> u32;
    }
    impl ValI for i64 {
        fn trailing_zeros_base_i(mut self, p: i64) -> u32 {
            let mut v = 0;
            while self % p == 0 {
                self /= p;
                v += 1;
            }
            v
        }
    }

    /// `H₂(G)` from the oracle: the `p`-part exponents are recovered from
    /// `log|H₂ ⊗ ℤ/p^j|` for `j = 1 … v_p(|G|)`.
    fn oracle_h2(g: &Group) -> AbelianInvariants {
        let h1 = abelian_invariants(&abelianization(&alloc::sync::Arc::new(g.clone())).0).unwrap();
        let mut parts = Vec::new();
        for (p, top) in prime_factors(g.order() as u64) {
            let logs: Vec<u32> = (0..=top).map(|j| if j == 0 { 0 } else { oracle_log(g, &h1, p as i64, j) }).collect();
            // #{exponents ≥ j} = logs[j] − logs[j−1].
            let counts: Vec<u32> = (1..=top as usize).map(|j| logs[j] - logs[j - 1]).collect();
            let mut exps = Vec::new();
            for j in 1..=top as usize {
                let at_least = counts[j - 1];
                let more = counts.get(j).copied().unwrap_or(0);
                exps.extend(core::iter::repeat_n(j as u32, (at_least - more) as usize));
            }
            if !exps.is_empty() {
                parts.push((p, exps));
            }
        }
        AbelianInvariants::from_prime_powers(&parts)
    }

    #[test]
    fn oracle_examples() {
        assert!(oracle_h2(&fixtures::cyclic(4)).is_trivial());
        assert_eq!(oracle_h2(&fixtures::v4()).factors(), &[2]);
    }

    #[test]
    fn h2_matches_cocycle_oracle() {
        let cfg = Config::default();
        for g in fixtures::order_at_most_8() {
            let h = homology(&g, 2, &cfg).unwrap();
            assert_eq!(h.invariants, oracle_h2(&g), "{}", g.name());
        }
    }

    /// Schur multiplier of A5 in local mode; slow.
    #[test]
    fn h2_a5_local() {
        let h = homology(&fixtures::a5(), 2, &Config::default()).unwrap();
        assert_eq!(h.mode, Mode::Local);
        assert_eq!(h.local_factors, vec![(2, vec![1])]);
        assert_eq!(h.invariants.factors(), &[2]);
    }
}
