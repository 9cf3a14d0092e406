//! Finite groups as multiplication tables, with subgroups, quotients,
//! pullbacks, abelianisation and invariant factors.
//!
//! Elements are indices `0..order`; index 0 is always the identity. Groups
//! are immutable once built and are shared through [`GroupRef`].

use alloc::{
    collections::BTreeMap,
    format,
    string::{String, ToString},
    sync::Arc,
    vec,
    vec::Vec,
};
use core::fmt;

use crate::error::{Error, Result};

pub type GroupRef = Arc<Group>;

/// The operations the subgroup algorithms need. Implemented by tabled
/// [`Group`]s and by [`PairCarrier`]s, whose product is computed
/// componentwise without materialising a table.
pub trait GroupOps {
    fn size(&self) -> usize;
    fn op(&self, a: usize, b: usize) -> usize;
    fn inverse(&self, a: usize) -> usize;

    fn commutator(&self, a: usize, b: usize) -> usize {
        let ab = self.op(a, b);
        let inv = self.op(self.inverse(a), self.inverse(b));
        self.op(inv, ab)
    }

    fn conjugate(&self, x: usize, by: usize) -> usize {
        self.op(self.op(self.inverse(by), x), by)
    }
}

/// A finite group given by its Cayley table.
#[derive(Clone)]
pub struct Group {
    name: String,
    order: usize,
    table: Vec<u32>,
    inverses: Vec<u32>,
    element_orders: Vec<u32>,
    generators: Vec<usize>,
    permutations: Option<Permutations>,
}

/// Permutation images of every element of a permutation group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutations {
    pub degree: usize,
    images: Vec<u32>,
}

impl Permutations {
    pub fn of(&self, element: usize) -> &[u32] {
        &self.images[element * self.degree..(element + 1) * self.degree]
    }
}

impl Group {
    /// Builds a group from a full multiplication table, checking every group
    /// axiom by exhaustive scan.
    pub fn from_table(name: impl Into<String>, rows: &[Vec<usize>]) -> Result<Group> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::NotAGroup("empty table".into()));
        }
        let mut table = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::NotAGroup(format!("row {i} has length {}, expected {n}", row.len())));
            }
            for &x in row {
                if x >= n {
                    return Err(Error::NotAGroup(format!("entry {x} in row {i} out of range")));
                }
                table.push(x as u32);
            }
        }
        for i in 0..n {
            if table[i] as usize != i || table[i * n] as usize != i {
                return Err(Error::NotAGroup(format!("index 0 is not an identity (element {i})")));
            }
        }
        let mut seen = vec![0usize; n];
        for i in 0..n {
            for j in 0..n {
                let r = table[i * n + j] as usize;
                if seen[r] == 2 * i + 1 {
                    return Err(Error::NotAGroup(format!("row {i} repeats {r}")));
                }
                seen[r] = 2 * i + 1;
            }
            for j in 0..n {
                let r = table[j * n + i] as usize;
                if seen[r] == 2 * i + 2 {
                    return Err(Error::NotAGroup(format!("column {i} repeats {r}")));
                }
                seen[r] = 2 * i + 2;
            }
        }
        for a in 0..n {
            for b in 0..n {
                let ab = table[a * n + b] as usize;
                for c in 0..n {
                    let left = table[ab * n + c];
                    let right = table[a * n + table[b * n + c] as usize];
                    if left != right {
                        return Err(Error::NotAGroup(format!("({a}*{b})*{c} != {a}*({b}*{c})")));
                    }
                }
            }
        }
        Ok(Group::from_raw(name.into(), n, table, None, None))
    }

    /// Closes a list of permutations of `0..degree` under composition.
    ///
    /// Products are taken left to right: `(x*y)(i) = y(x(i))`. Elements are
    /// numbered in breadth-first discovery order, multiplying each element by
    /// the generators in their given order, so generator `k` (when distinct
    /// and non-trivial) is discovered early and the numbering is
    /// deterministic.
    pub fn from_permutations(
        name: impl Into<String>,
        degree: usize,
        generators: &[Vec<usize>],
        max_order: usize,
    ) -> Result<Group> {
        for (k, g) in generators.iter().enumerate() {
            if g.len() != degree {
                return Err(Error::NotAGroup(format!("generator {k} has length {}, expected {degree}", g.len())));
            }
            let mut hit = vec![false; degree];
            for &x in g {
                if x >= degree || hit[x] {
                    return Err(Error::NotAGroup(format!("generator {k} is not a permutation")));
                }
                hit[x] = true;
            }
        }
        let gens: Vec<Vec<u32>> = generators
            .iter()
            .map(|g| g.iter().map(|&x| x as u32).collect())
            .collect();
        let identity: Vec<u32> = (0..degree as u32).collect();
        let mut index: BTreeMap<Vec<u32>, usize> = BTreeMap::new();
        let mut elements = vec![identity.clone()];
        index.insert(identity, 0);
        // rmul[x * k + j] = x * gen_j ; parent/via record the BFS tree.
        let k = gens.len();
        let mut rmul: Vec<u32> = Vec::new();
        let mut parent = vec![0usize];
        let mut via = vec![0usize];
        let mut next = 0;
        while next < elements.len() {
            for (j, g) in gens.iter().enumerate() {
                let prod: Vec<u32> = elements[next].iter().map(|&i| g[i as usize]).collect();
                let idx = match index.get(&prod) {
                    Some(&i) => i,
                    None => {
                        let i = elements.len();
                        if i >= max_order {
                            return Err(Error::OrderBound { bound: max_order });
                        }
                        index.insert(prod.clone(), i);
                        elements.push(prod);
                        parent.push(next);
                        via.push(j);
                        i
                    }
                };
                rmul.push(idx as u32);
            }
            next += 1;
        }
        let n = elements.len();
        let mut table = vec![0u32; n * n];
        for a in 0..n {
            table[a * n] = a as u32;
            for b in 1..n {
                let left = table[a * n + parent[b]] as usize;
                table[a * n + b] = rmul[left * k + via[b]];
            }
        }
        let mut gen_indices = Vec::new();
        for g in &gens {
            let i = index[g];
            if i != 0 && !gen_indices.contains(&i) {
                gen_indices.push(i);
            }
        }
        let mut images = Vec::with_capacity(n * degree);
        for e in &elements {
            images.extend_from_slice(e);
        }
        Ok(Group::from_raw(
            name.into(),
            n,
            table,
            Some(gen_indices),
            Some(Permutations { degree, images }),
        ))
    }

    /// The group with one element.
    pub fn trivial() -> Group {
        Group::from_raw("1".into(), 1, vec![0], None, None)
    }

    /// Builds a group from a table known to be valid (internal constructions).
    pub(crate) fn from_raw(
        name: String,
        order: usize,
        table: Vec<u32>,
        generators: Option<Vec<usize>>,
        permutations: Option<Permutations>,
    ) -> Group {
        debug_assert_eq!(table.len(), order * order);
        let mut inverses = vec![0u32; order];
        for a in 0..order {
            for b in 0..order {
                if table[a * order + b] == 0 {
                    inverses[a] = b as u32;
                    break;
                }
            }
        }
        let mut element_orders = vec![1u32; order];
        for (a, slot) in element_orders.iter_mut().enumerate() {
            let mut x = a;
            let mut k = 1;
            while x != 0 {
                x = table[x * order + a] as usize;
                k += 1;
            }
            *slot = k;
        }
        let mut group = Group {
            name,
            order,
            table,
            inverses,
            element_orders,
            generators: Vec::new(),
            permutations,
        };
        group.generators = match generators {
            Some(g) => g,
            None => greedy_generators(&group, 0..order),
        };
        group
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Group {
        self.name = name.into();
        self
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.order + b] as usize
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inverses[a] as usize
    }

    pub fn pow(&self, a: usize, mut k: u64) -> usize {
        let mut base = a;
        let mut acc = 0;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            k >>= 1;
        }
        acc
    }

    pub fn element_order(&self, a: usize) -> usize {
        self.element_orders[a] as usize
    }

    /// A generating set: the supplied generators for permutation groups, a
    /// greedily chosen irredundant set otherwise.
    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn permutations(&self) -> Option<&Permutations> {
        self.permutations.as_ref()
    }

    /// The table as rows of element indices.
    pub fn rows(&self) -> Vec<Vec<usize>> {
        (0..self.order)
            .map(|a| (0..self.order).map(|b| self.mul(a, b)).collect())
            .collect()
    }

    pub fn is_abelian(&self) -> bool {
        let g = &self.generators;
        g.iter().all(|&a| g.iter().all(|&b| self.mul(a, b) == self.mul(b, a)))
    }

    /// Sorted multiset of element orders, an isomorphism invariant.
    pub fn order_profile(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.element_orders.iter().map(|&o| o as usize).collect();
        v.sort_unstable();
        v
    }

    pub fn check_index(&self, x: usize) -> Result<()> {
        if x < self.order {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index: x, size: self.order })
        }
    }

    /// Exhaustive verification of the group axioms (identity, Latin square,
    /// associativity). Internal constructions are valid by construction;
    /// this is the assertable full scan.
    pub fn verify_axioms(&self) -> Result<()> {
        Group::from_table(self.name.clone(), &self.rows()).map(|_| ())
    }
}

impl GroupOps for Group {
    fn size(&self) -> usize {
        self.order
    }
    fn op(&self, a: usize, b: usize) -> usize {
        self.mul(a, b)
    }
    fn inverse(&self, a: usize) -> usize {
        self.inv(a)
    }
}

impl PartialEq for Group {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order && self.table == other.table
    }
}

impl Eq for Group {}

impl fmt::Debug for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Group({}, order {})", self.name, self.order)
    }
}

/// Image vector of a permutation of `0..degree` written as disjoint cycles.
pub fn permutation_from_cycles(degree: usize, cycles: &[Vec<usize>]) -> Result<Vec<usize>> {
    let mut image: Vec<usize> = (0..degree).collect();
    let mut moved = vec![false; degree];
    for cycle in cycles {
        for (i, &x) in cycle.iter().enumerate() {
            if x >= degree {
                return Err(Error::IndexOutOfRange { index: x, size: degree });
            }
            if moved[x] {
                return Err(Error::NotAGroup(format!("point {x} appears in two cycles")));
            }
            moved[x] = true;
            image[x] = cycle[(i + 1) % cycle.len()];
        }
    }
    Ok(image)
}

/// Whether two handles denote the same group (pointer or table equality).
pub fn same_group(a: &GroupRef, b: &GroupRef) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// Mask of the subgroup generated by `gens`.
pub(crate) fn closure_mask<G: GroupOps + ?Sized>(g: &G, gens: &[usize]) -> Vec<bool> {
    let mut mask = vec![false; g.size()];
    mask[0] = true;
    let mut stack = vec![0usize];
    while let Some(x) = stack.pop() {
        for &s in gens {
            let y = g.op(x, s);
            if !mask[y] {
                mask[y] = true;
                stack.push(y);
            }
        }
    }
    mask
}

/// Irredundant generating set of the subgroup spanned by `candidates`,
/// scanning them in order.
pub(crate) fn greedy_generators<G: GroupOps + ?Sized>(
    g: &G,
    candidates: impl IntoIterator<Item = usize>,
) -> Vec<usize> {
    let mut gens = Vec::new();
    let mut mask = vec![false; g.size()];
    mask[0] = true;
    for x in candidates {
        if !mask[x] {
            gens.push(x);
            mask = closure_mask(g, &gens);
        }
    }
    let target = mask.iter().filter(|&&b| b).count();
    let mut i = 0;
    while i < gens.len() && gens.len() > 1 {
        let mut rest = gens.clone();
        rest.remove(i);
        if closure_mask(g, &rest).iter().filter(|&&b| b).count() == target {
            gens = rest;
        } else {
            i += 1;
        }
    }
    gens
}

/// Normal closure of `seeds` under conjugation by `conjugators`.
pub(crate) fn normal_closure_mask<G: GroupOps + ?Sized>(
    g: &G,
    seeds: &[usize],
    conjugators: &[usize],
) -> Vec<bool> {
    let mut gens: Vec<usize> = Vec::new();
    for &s in seeds {
        if s != 0 && !gens.contains(&s) {
            gens.push(s);
        }
    }
    let mut mask = closure_mask(g, &gens);
    let mut i = 0;
    while i < gens.len() {
        let s = gens[i];
        for &t in conjugators {
            let c = g.conjugate(s, t);
            if !mask[c] {
                gens.push(c);
                mask = closure_mask(g, &gens);
            }
        }
        i += 1;
    }
    mask
}

/// `[H, K]` from generating sets of `H` and `K`: the normal closure in
/// `<H, K>` of the commutators of generators.
pub(crate) fn commutator_mask<G: GroupOps + ?Sized>(g: &G, h_gens: &[usize], k_gens: &[usize]) -> Vec<bool> {
    let mut seeds = Vec::new();
    for &a in h_gens {
        for &b in k_gens {
            seeds.push(g.commutator(a, b));
        }
    }
    let mut conj: Vec<usize> = h_gens.to_vec();
    conj.extend_from_slice(k_gens);
    normal_closure_mask(g, &seeds, &conj)
}

/// A subgroup, stored as a sorted element list plus a membership mask.
#[derive(Clone)]
pub struct Subgroup {
    parent: GroupRef,
    elements: Vec<usize>,
    mask: Vec<bool>,
}

impl Subgroup {
    pub(crate) fn from_mask(parent: GroupRef, mask: Vec<bool>) -> Subgroup {
        let elements = mask.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect();
        Subgroup { parent, elements, mask }
    }

    pub fn whole(g: &GroupRef) -> Subgroup {
        Subgroup::from_mask(g.clone(), vec![true; g.order()])
    }

    pub fn trivial(g: &GroupRef) -> Subgroup {
        let mut mask = vec![false; g.order()];
        mask[0] = true;
        Subgroup::from_mask(g.clone(), mask)
    }

    pub fn parent(&self) -> &GroupRef {
        &self.parent
    }

    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.mask.get(x).copied().unwrap_or(false)
    }

    pub fn is_trivial(&self) -> bool {
        self.elements.len() == 1
    }

    pub fn is_whole(&self) -> bool {
        self.elements.len() == self.parent.order()
    }

    pub fn is_subset_of(&self, other: &Subgroup) -> bool {
        self.elements.iter().all(|&x| other.contains(x))
    }

    pub fn generators(&self) -> Vec<usize> {
        greedy_generators(&*self.parent, self.elements.iter().copied())
    }

    fn check_parent(&self, g: &GroupRef) -> Result<()> {
        if same_group(&self.parent, g) {
            Ok(())
        } else {
            Err(Error::ParentMismatch)
        }
    }
}

impl PartialEq for Subgroup {
    fn eq(&self, other: &Self) -> bool {
        same_group(&self.parent, &other.parent) && self.elements == other.elements
    }
}

impl Eq for Subgroup {}

impl fmt::Debug for Subgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subgroup of {} {:?}", self.parent.name(), self.elements)
    }
}

/// Least subgroup containing `gens`.
pub fn subgroup_generated(g: &GroupRef, gens: &[usize]) -> Result<Subgroup> {
    for &x in gens {
        g.check_index(x)?;
    }
    Ok(Subgroup::from_mask(g.clone(), closure_mask(&**g, gens)))
}

/// `[H, K]`, generated by all `h⁻¹k⁻¹hk`.
pub fn commutator_subgroup(g: &GroupRef, h: &Subgroup, k: &Subgroup) -> Result<Subgroup> {
    h.check_parent(g)?;
    k.check_parent(g)?;
    let mask = commutator_mask(&**g, &h.generators(), &k.generators());
    Ok(Subgroup::from_mask(g.clone(), mask))
}

pub fn derived_subgroup(g: &GroupRef) -> Subgroup {
    let gens = g.generators();
    Subgroup::from_mask(g.clone(), commutator_mask(&**g, gens, gens))
}

pub fn center(g: &GroupRef) -> Subgroup {
    let gens = g.generators();
    let mask = (0..g.order())
        .map(|z| gens.iter().all(|&s| g.mul(z, s) == g.mul(s, z)))
        .collect();
    Subgroup::from_mask(g.clone(), mask)
}

pub fn intersection(a: &Subgroup, b: &Subgroup) -> Result<Subgroup> {
    b.check_parent(&a.parent)?;
    let mask = a.mask.iter().zip(&b.mask).map(|(&x, &y)| x && y).collect();
    Ok(Subgroup::from_mask(a.parent.clone(), mask))
}

pub fn is_normal(g: &GroupRef, n: &Subgroup) -> Result<bool> {
    n.check_parent(g)?;
    Ok(n.generators()
        .iter()
        .all(|&x| g.generators().iter().all(|&t| n.contains(g.conjugate(x, t)))))
}

/// `G/N` with cosets numbered by their least member, and the projection.
pub fn quotient(g: &GroupRef, n: &Subgroup) -> Result<(GroupRef, Hom)> {
    if !is_normal(g, n)? {
        return Err(Error::NotNormalSubgroup);
    }
    Ok(quotient_unchecked(g, n))
}

pub(crate) fn quotient_unchecked(g: &GroupRef, n: &Subgroup) -> (GroupRef, Hom) {
    let order = g.order();
    let mut label = vec![u32::MAX; order];
    let mut reps = Vec::new();
    for x in 0..order {
        if label[x] == u32::MAX {
            let c = reps.len() as u32;
            for &m in n.elements() {
                label[g.mul(x, m)] = c;
            }
            reps.push(x);
        }
    }
    let q = reps.len();
    let mut table = vec![0u32; q * q];
    for (i, &a) in reps.iter().enumerate() {
        for (j, &b) in reps.iter().enumerate() {
            table[i * q + j] = label[g.mul(a, b)];
        }
    }
    let name = if n.is_trivial() {
        g.name().to_string()
    } else {
        format!("{}/N{}", g.name(), n.order())
    };
    let quotient = Arc::new(Group::from_raw(name, q, table, None, None));
    let map = label.iter().map(|&c| c as usize).collect();
    let proj = Hom::new_unchecked(g.clone(), quotient.clone(), map);
    (quotient, proj)
}

/// A subgroup as a group in its own right (elements in ascending parent
/// order) together with its inclusion.
pub fn subgroup_as_group(h: &Subgroup) -> (GroupRef, Hom) {
    let g = &h.parent;
    let mut pos = vec![u32::MAX; g.order()];
    for (i, &x) in h.elements.iter().enumerate() {
        pos[x] = i as u32;
    }
    let n = h.order();
    let mut table = vec![0u32; n * n];
    for (i, &a) in h.elements.iter().enumerate() {
        for (j, &b) in h.elements.iter().enumerate() {
            table[i * n + j] = pos[g.mul(a, b)];
        }
    }
    let name = format!("{}<{}>", g.name(), n);
    let sub = Arc::new(Group::from_raw(name, n, table, None, None));
    let incl = Hom::new_unchecked(sub.clone(), g.clone(), h.elements.clone());
    (sub, incl)
}

/// A structure-preserving map between finite groups.
#[derive(Clone)]
pub struct Hom {
    dom: GroupRef,
    cod: GroupRef,
    map: Vec<usize>,
}

impl Hom {
    /// Validates multiplicativity on every element against every generator
    /// of the domain, which is equivalent to checking all pairs.
    pub fn new(dom: GroupRef, cod: GroupRef, map: Vec<usize>) -> Result<Hom> {
        if map.len() != dom.order() {
            return Err(Error::NotAHom(format!(
                "map has length {}, domain has order {}",
                map.len(),
                dom.order()
            )));
        }
        for &y in &map {
            cod.check_index(y)?;
        }
        if map[0] != 0 {
            return Err(Error::NotAHom("identity not preserved".into()));
        }
        for x in 0..dom.order() {
            for &s in dom.generators() {
                if map[dom.mul(x, s)] != cod.mul(map[x], map[s]) {
                    return Err(Error::NotAHom(format!("f({x}*{s}) != f({x})*f({s})")));
                }
            }
        }
        Ok(Hom { dom, cod, map })
    }

    pub(crate) fn new_unchecked(dom: GroupRef, cod: GroupRef, map: Vec<usize>) -> Hom {
        debug_assert_eq!(map.len(), dom.order());
        Hom { dom, cod, map }
    }

    pub fn identity(g: &GroupRef) -> Hom {
        Hom::new_unchecked(g.clone(), g.clone(), (0..g.order()).collect())
    }

    pub fn zero(dom: &GroupRef, cod: &GroupRef) -> Hom {
        Hom::new_unchecked(dom.clone(), cod.clone(), vec![0; dom.order()])
    }

    pub fn dom(&self) -> &GroupRef {
        &self.dom
    }

    pub fn cod(&self) -> &GroupRef {
        &self.cod
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.map[x]
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &Hom) -> Result<Hom> {
        if !same_group(&self.cod, &next.dom) {
            return Err(Error::CodMismatch);
        }
        let map = self.map.iter().map(|&x| next.map[x]).collect();
        Ok(Hom::new_unchecked(self.dom.clone(), next.cod.clone(), map))
    }

    pub fn kernel(&self) -> Subgroup {
        let mask = self.map.iter().map(|&y| y == 0).collect();
        Subgroup::from_mask(self.dom.clone(), mask)
    }

    pub fn image(&self) -> Subgroup {
        let mut mask = vec![false; self.cod.order()];
        for &y in &self.map {
            mask[y] = true;
        }
        Subgroup::from_mask(self.cod.clone(), mask)
    }

    pub fn is_surjective(&self) -> bool {
        self.image().is_whole()
    }

    pub fn is_injective(&self) -> bool {
        self.kernel().is_trivial()
    }

    pub fn is_zero(&self) -> bool {
        self.map.iter().all(|&y| y == 0)
    }

    /// Inverse of a bijective homomorphism.
    pub fn inverse(&self) -> Option<Hom> {
        if self.dom.order() != self.cod.order() {
            return None;
        }
        let mut inv = vec![usize::MAX; self.cod.order()];
        for (x, &y) in self.map.iter().enumerate() {
            if inv[y] != usize::MAX {
                return None;
            }
            inv[y] = x;
        }
        Some(Hom::new_unchecked(self.cod.clone(), self.dom.clone(), inv))
    }

    /// Same map with a different (equal) domain or codomain handle.
    pub(crate) fn retarget(&self, dom: GroupRef, cod: GroupRef) -> Hom {
        Hom::new_unchecked(dom, cod, self.map.clone())
    }
}

impl PartialEq for Hom {
    fn eq(&self, other: &Self) -> bool {
        same_group(&self.dom, &other.dom) && same_group(&self.cod, &other.cod) && self.map == other.map
    }
}

impl Eq for Hom {}

impl fmt::Debug for Hom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Hom({} -> {}: {:?})", self.dom.name(), self.cod.name(), self.map)
    }
}

/// A surjective homomorphism with its kernel cached.
#[derive(Clone)]
pub struct Extension {
    name: String,
    hom: Hom,
    kernel: Subgroup,
}

impl Extension {
    pub fn new(hom: Hom) -> Result<Extension> {
        if !hom.is_surjective() {
            return Err(Error::NotSurjective(format!("{} -> {}", hom.dom.name(), hom.cod.name())));
        }
        let kernel = hom.kernel();
        let name = format!("{}->{}", hom.dom.name(), hom.cod.name());
        Ok(Extension { name, hom, kernel })
    }

    pub fn identity(g: &GroupRef) -> Extension {
        Extension::new(Hom::identity(g)).expect("identity is surjective")
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Extension {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn hom(&self) -> &Hom {
        &self.hom
    }

    pub fn dom(&self) -> &GroupRef {
        &self.hom.dom
    }

    pub fn cod(&self) -> &GroupRef {
        &self.hom.cod
    }

    pub fn kernel(&self) -> &Subgroup {
        &self.kernel
    }
}

impl fmt::Debug for Extension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Extension({})", self.name)
    }
}

/// The subgroup `{(a, c) : f(a) = g(c)}` of a product, multiplied
/// componentwise, with pairs numbered lexicographically. Used directly when
/// a table would be too large (composable-pair carriers).
#[derive(Clone)]
pub struct PairCarrier {
    left: GroupRef,
    right: GroupRef,
    pairs: Vec<(u32, u32)>,
    index: Vec<u32>,
}

impl PairCarrier {
    pub fn new(f: &Hom, g: &Hom) -> Result<PairCarrier> {
        if !same_group(&f.cod, &g.cod) {
            return Err(Error::CodMismatch);
        }
        let (l, r) = (f.dom.order(), g.dom.order());
        let mut index = vec![u32::MAX; l * r];
        let mut pairs = Vec::new();
        for a in 0..l {
            for c in 0..r {
                if f.map[a] == g.map[c] {
                    index[a * r + c] = pairs.len() as u32;
                    pairs.push((a as u32, c as u32));
                }
            }
        }
        Ok(PairCarrier { left: f.dom.clone(), right: g.dom.clone(), pairs, index })
    }

    pub fn left(&self) -> &GroupRef {
        &self.left
    }

    pub fn right(&self) -> &GroupRef {
        &self.right
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pair(&self, i: usize) -> (usize, usize) {
        let (a, c) = self.pairs[i];
        (a as usize, c as usize)
    }

    pub fn index_of(&self, a: usize, c: usize) -> Option<usize> {
        match self.index[a * self.right.order() + c] {
            u32::MAX => None,
            i => Some(i as usize),
        }
    }

    /// Materialises the multiplication table.
    pub fn to_group(&self, name: String) -> Group {
        let n = self.len();
        let mut table = vec![0u32; n * n];
        for i in 0..n {
            for j in 0..n {
                table[i * n + j] = self.op(i, j) as u32;
            }
        }
        Group::from_raw(name, n, table, None, None)
    }
}

impl GroupOps for PairCarrier {
    fn size(&self) -> usize {
        self.pairs.len()
    }
    fn op(&self, x: usize, y: usize) -> usize {
        let (a, c) = self.pairs[x];
        let (b, d) = self.pairs[y];
        let ab = self.left.mul(a as usize, b as usize);
        let cd = self.right.mul(c as usize, d as usize);
        self.index[ab * self.right.order() + cd] as usize
    }
    fn inverse(&self, x: usize) -> usize {
        let (a, c) = self.pairs[x];
        let ai = self.left.inv(a as usize);
        let ci = self.right.inv(c as usize);
        self.index[ai * self.right.order() + ci] as usize
    }
}

/// A pullback square: `group` with projections `left` and `right` such that
/// `f ∘ left = g ∘ right`.
#[derive(Clone, Debug)]
pub struct Pullback {
    pub group: GroupRef,
    pub left: Hom,
    pub right: Hom,
}

/// Pullback of `f: A → B` and `g: C → B`.
pub fn pullback(f: &Hom, g: &Hom) -> Result<Pullback> {
    let carrier = PairCarrier::new(f, g)?;
    let name = if f.cod.order() == 1 {
        format!("{}x{}", f.dom.name(), g.dom.name())
    } else {
        format!("{}x_{}{}", f.dom.name(), f.cod.name(), g.dom.name())
    };
    let group = Arc::new(carrier.to_group(name));
    let (lmap, rmap) = carrier.pairs.iter().map(|&(a, c)| (a as usize, c as usize)).unzip();
    Ok(Pullback {
        left: Hom::new_unchecked(group.clone(), f.dom.clone(), lmap),
        right: Hom::new_unchecked(group.clone(), g.dom.clone(), rmap),
        group,
    })
}

/// Direct product, realised as the pullback over the trivial group.
pub fn product(a: &GroupRef, c: &GroupRef) -> Pullback {
    let one = Arc::new(Group::trivial());
    pullback(&Hom::zero(a, &one), &Hom::zero(c, &one)).expect("common trivial codomain")
}

/// `I(G) = G/[G,G]` with the unit `η_G: G → I(G)`.
pub fn abelianization(g: &GroupRef) -> (GroupRef, Hom) {
    let derived = derived_subgroup(g);
    let (q, eta) = quotient_unchecked(g, &derived);
    let q = Arc::new((*q).clone().with_name(format!("Ab({})", g.name())));
    let eta = eta.retarget(g.clone(), q.clone());
    (q, eta)
}

/// `I(f): I(A) → I(B)` for units `eta_a`, `eta_b`.
pub fn induced_on_quotients(f: &Hom, eta_a: &Hom, eta_b: &Hom) -> Hom {
    let qa = eta_a.cod();
    let mut map = vec![usize::MAX; qa.order()];
    for x in 0..f.dom.order() {
        let c = eta_a.apply(x);
        if map[c] == usize::MAX {
            map[c] = eta_b.apply(f.apply(x));
        }
    }
    Hom::new_unchecked(qa.clone(), eta_b.cod().clone(), map)
}

/// Invariant factors `d₁ | d₂ | … | d_k` of a finite abelian group, each at
/// least 2; the trivial group has none.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct AbelianInvariants {
    factors: Vec<u64>,
}

impl AbelianInvariants {
    pub fn new(factors: Vec<u64>) -> Result<AbelianInvariants> {
        if factors.iter().any(|&d| d < 2) || factors.windows(2).any(|w| w[1] % w[0] != 0) {
            return Err(Error::SchemaError(format!("{factors:?} is not a divisor chain")));
        }
        Ok(AbelianInvariants { factors })
    }

    pub fn trivial() -> AbelianInvariants {
        AbelianInvariants::default()
    }

    /// Assembles invariant factors from the cyclic prime-power exponents of
    /// each prime: `parts` lists `(p, [e₁, e₂, …])`.
    pub fn from_prime_powers(parts: &[(u64, Vec<u32>)]) -> AbelianInvariants {
        let width = parts.iter().map(|(_, e)| e.len()).max().unwrap_or(0);
        let mut factors = vec![1u64; width];
        for (p, exps) in parts {
            let mut exps = exps.clone();
            exps.sort_unstable();
            // Largest exponents go to the largest factors.
            let offset = width - exps.len();
            for (i, &e) in exps.iter().enumerate() {
                factors[offset + i] *= p.pow(e);
            }
        }
        factors.retain(|&d| d > 1);
        AbelianInvariants { factors }
    }

    pub fn factors(&self) -> &[u64] {
        &self.factors
    }

    pub fn order(&self) -> u64 {
        self.factors.iter().product()
    }

    pub fn is_trivial(&self) -> bool {
        self.factors.is_empty()
    }
}

impl fmt::Display for AbelianInvariants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.factors)
    }
}

pub(crate) fn prime_factors(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Invariant factors of an abelian group by element-order census: for each
/// prime `p`, the number of elements killed by `p^j` is `p^(Σ min(j, eᵢ))`,
/// which determines the exponents `eᵢ`.
pub fn abelian_invariants(g: &Group) -> Result<AbelianInvariants> {
    if !g.is_abelian() {
        return Err(Error::NotAbelian);
    }
    let mut parts = Vec::new();
    for (p, v) in prime_factors(g.order() as u64) {
        let mut sums = vec![0u32];
        let mut pj = 1u64;
        for _ in 1..=v {
            pj *= p;
            let count = (0..g.order()).filter(|&x| pj.is_multiple_of(g.element_order(x) as u64)).count() as u64;
            sums.push(log_exact(count, p));
        }
        // at_least[j] = number of cyclic factors with exponent ≥ j.
        let at_least: Vec<u32> = (1..sums.len()).map(|j| sums[j] - sums[j - 1]).collect();
        let mut exps = Vec::new();
        for j in 0..at_least.len() {
            let next = at_least.get(j + 1).copied().unwrap_or(0);
            for _ in 0..(at_least[j] - next) {
                exps.push(j as u32 + 1);
            }
        }
        parts.push((p, exps));
    }
    Ok(AbelianInvariants::from_prime_powers(&parts))
}

fn log_exact(mut n: u64, p: u64) -> u32 {
    let mut k = 0;
    while n > 1 {
        debug_assert_eq!(n % p, 0);
        n /= p;
        k += 1;
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn brute_commutator(g: &GroupRef, h: &Subgroup, k: &Subgroup) -> Subgroup {
        let mut comms = Vec::new();
        for &a in h.elements() {
            for &b in k.elements() {
                comms.push(g.commutator(a, b));
            }
        }
        subgroup_generated(g, &comms).unwrap()
    }

    #[test]
    fn trivial_table() {
        let g = Group::from_table("1", &[vec![0]]).unwrap();
        assert_eq!(g.order(), 1);
    }

    #[test]
    fn rejects_non_groups() {
        let bad = vec![vec![0, 1, 2], vec![1, 0, 2], vec![2, 2, 0]];
        assert!(matches!(Group::from_table("x", &bad), Err(Error::NotAGroup(_))));
        // Latin square with identity but not associative.
        let nonassoc = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 4, 0, 1, 3],
            vec![3, 2, 4, 0, 1],
            vec![4, 3, 1, 2, 0],
        ];
        assert!(matches!(Group::from_table("x", &nonassoc), Err(Error::NotAGroup(_))));
    }

    #[test]
    fn permutation_closure() {
        let s3 = Group::from_permutations("S3", 3, &[vec![1, 2, 0], vec![1, 0, 2]], 100).unwrap();
        assert_eq!(s3.order(), 6);
        assert_eq!(s3.generators(), &[1, 2]);
        assert_eq!(fixtures::sl25().order(), 120);
        let err = Group::from_permutations("S5", 5, &[vec![1, 2, 3, 4, 0], vec![1, 0, 2, 3, 4]], 100);
        assert_eq!(err.unwrap_err(), Error::OrderBound { bound: 100 });
    }

    #[test]
    fn generated_subgroups() {
        let z4 = fixtures::cyclic(4);
        assert_eq!(subgroup_generated(&z4, &[]).unwrap().elements(), &[0]);
        assert_eq!(subgroup_generated(&z4, &[2]).unwrap().elements(), &[0, 2]);
        let s3 = fixtures::s3();
        let three_cycle = (0..6).find(|&x| s3.element_order(x) == 3).unwrap();
        assert_eq!(subgroup_generated(&s3, &[three_cycle]).unwrap().order(), 3);
        assert!(matches!(subgroup_generated(&s3, &[6]), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn commutators_match_brute_force() {
        for g in fixtures::corpus() {
            if g.order() > 24 {
                continue;
            }
            let whole = Subgroup::whole(&g);
            let d = commutator_subgroup(&g, &whole, &whole).unwrap();
            assert_eq!(d, brute_commutator(&g, &whole, &whole), "{}", g.name());
            let z = center(&g);
            assert_eq!(commutator_subgroup(&g, &z, &whole).unwrap().order(), 1);
        }
        let s3 = fixtures::s3();
        assert_eq!(derived_subgroup(&s3).order(), 3);
        let a5 = fixtures::a5();
        assert_eq!(derived_subgroup(&a5).order(), 60);
        assert_eq!(derived_subgroup(&fixtures::cyclic(6)).order(), 1);
    }

    #[test]
    fn commutator_parent_mismatch() {
        let s3 = fixtures::s3();
        let z6 = fixtures::cyclic(6);
        let h = Subgroup::whole(&z6);
        assert_eq!(commutator_subgroup(&s3, &h, &h).unwrap_err(), Error::ParentMismatch);
    }

    #[test]
    fn centres() {
        assert!(center(&fixtures::cyclic(6)).is_whole());
        assert!(center(&fixtures::s3()).is_trivial());
        assert_eq!(center(&fixtures::q8()).order(), 2);
        for g in fixtures::corpus() {
            let scan: Vec<usize> = (0..g.order())
                .filter(|&z| (0..g.order()).all(|x| g.mul(z, x) == g.mul(x, z)))
                .collect();
            assert_eq!(center(&g).elements(), &scan[..]);
        }
    }

    #[test]
    fn quotients() {
        let s3 = fixtures::s3();
        let (same, proj) = quotient(&s3, &Subgroup::trivial(&s3)).unwrap();
        assert_eq!(*same, *s3);
        assert_eq!(proj.map(), &(0..6).collect::<Vec<_>>()[..]);
        let (q, _) = quotient(&s3, &derived_subgroup(&s3)).unwrap();
        assert_eq!(q.order(), 2);
        let q8 = fixtures::q8();
        let (v, _) = quotient(&q8, &center(&q8)).unwrap();
        assert_eq!(v.order(), 4);
        assert_eq!(abelian_invariants(&v).unwrap().factors(), &[2, 2]);
        let order2 = subgroup_generated(&s3, &[2]).unwrap();
        assert_eq!(quotient(&s3, &order2).unwrap_err(), Error::NotNormalSubgroup);
    }

    #[test]
    fn homs() {
        let s3 = fixtures::s3();
        let z2 = fixtures::cyclic(2);
        assert!(Hom::new(s3.clone(), s3.clone(), (0..6).collect()).is_ok());
        let sign: Vec<usize> = (0..6)
            .map(|x| {
                let p = s3.permutations().unwrap().of(x);
                let mut inversions = 0;
                for i in 0..3 {
                    for j in i + 1..3 {
                        if p[i] > p[j] {
                            inversions += 1;
                        }
                    }
                }
                inversions % 2
            })
            .collect();
        let h = Hom::new(s3.clone(), z2.clone(), sign).unwrap();
        assert_eq!(h.kernel().order(), 3);
        // Z4 generator 1 -> 1, but 2 -> 0 breaks 1+1 = 2.
        let z4 = fixtures::cyclic(4);
        assert!(matches!(
            Hom::new(z4.clone(), z4.clone(), vec![0, 1, 0, 3]),
            Err(Error::NotAHom(_))
        ));
    }

    #[test]
    fn pullbacks() {
        let z4 = fixtures::cyclic(4);
        let z2 = fixtures::cyclic(2);
        let f = Hom::new(z4.clone(), z2.clone(), vec![0, 1, 0, 1]).unwrap();
        let pb = pullback(&f, &f).unwrap();
        assert_eq!(pb.group.order(), 8);
        for x in 0..8 {
            assert_eq!(f.apply(pb.left.apply(x)), f.apply(pb.right.apply(x)));
        }
        let id = Hom::identity(&z2);
        assert_eq!(pullback(&f, &id).unwrap().group.order(), 4);
        let z3 = fixtures::cyclic(3);
        let prod = product(&z2, &z3);
        assert_eq!(abelian_invariants(&prod.group).unwrap().factors(), &[6]);
        let g = Hom::identity(&z3);
        assert_eq!(pullback(&f, &g).unwrap_err(), Error::CodMismatch);
    }

    #[test]
    fn abelianisations() {
        let (s3ab, eta) = abelianization(&fixtures::s3());
        assert_eq!(abelian_invariants(&s3ab).unwrap().factors(), &[2]);
        assert!(eta.is_surjective());
        assert_eq!(abelianization(&fixtures::a5()).0.order(), 1);
        let z6 = fixtures::cyclic(6);
        let (ab, eta) = abelianization(&z6);
        assert_eq!(ab.order(), 6);
        assert!(eta.is_injective());
    }

    #[test]
    fn invariants() {
        assert!(abelian_invariants(&Group::trivial()).unwrap().is_trivial());
        assert_eq!(abelian_invariants(&fixtures::v4()).unwrap().factors(), &[2, 2]);
        assert_eq!(abelian_invariants(&fixtures::cyclic(6)).unwrap().factors(), &[6]);
        let z2z4 = product(&fixtures::cyclic(2), &fixtures::cyclic(4)).group;
        assert_eq!(abelian_invariants(&z2z4).unwrap().factors(), &[2, 4]);
        let big = product(&product(&fixtures::cyclic(6), &fixtures::cyclic(4)).group, &fixtures::cyclic(3)).group;
        assert_eq!(abelian_invariants(&big).unwrap().factors(), &[6, 12]);
        assert_eq!(abelian_invariants(&fixtures::s3()).unwrap_err(), Error::NotAbelian);
    }

    #[test]
    fn corpus_axioms() {
        for g in fixtures::corpus() {
            if g.order() <= 256 {
                g.verify_axioms().unwrap();
            }
        }
    }

    #[test]
    fn quotient_and_kernel_orders() {
        for g in fixtures::corpus() {
            for n in [center(&g), derived_subgroup(&g)] {
                let (q, proj) = quotient(&g, &n).unwrap();
                assert_eq!(g.order(), n.order() * q.order());
                assert!(n.elements().iter().all(|&x| proj.apply(x) == 0));
            }
        }
    }
}
