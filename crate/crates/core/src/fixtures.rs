//! The built-in group corpus and the extensions used throughout the tests
//! and shipped fixture files.
//!
//! Every extension onto a named group lands on that group's canonical
//! fixture, so extensions with the same base share one codomain.

use alloc::{sync::Arc, vec, vec::Vec};

use crate::group::{permutation_from_cycles, product, Extension, Group, GroupRef, Hom};
use crate::search::enumerate_homs;

const BOUND: usize = 4096;

fn perm_group(name: &str, degree: usize, gens: &[&[&[usize]]]) -> GroupRef {
    let perms: Vec<Vec<usize>> = gens
        .iter()
        .map(|cycles| {
            let cycles: Vec<Vec<usize>> = cycles.iter().map(|c| c.to_vec()).collect();
            permutation_from_cycles(degree, &cycles).expect("fixture cycles are valid")
        })
        .collect();
    Arc::new(Group::from_permutations(name, degree, &perms, BOUND).expect("fixture closes"))
}

/// Permutation of the nonzero vectors of `F_p²` induced by a 2×2 matrix.
/// Vector `(x, y)` has index `p·x + y − 1`.
pub fn matrix_permutation(p: usize, m: [[usize; 2]; 2]) -> Vec<usize> {
    (1..p * p)
        .map(|v| {
            let (x, y) = (v / p, v % p);
            let nx = (m[0][0] * x + m[0][1] * y) % p;
            let ny = (m[1][0] * x + m[1][1] * y) % p;
            p * nx + ny - 1
        })
        .collect()
}

fn matrix_group(name: &str, p: usize, gens: &[[[usize; 2]; 2]]) -> GroupRef {
    let perms: Vec<Vec<usize>> = gens.iter().map(|&m| matrix_permutation(p, m)).collect();
    Arc::new(Group::from_permutations(name, p * p - 1, &perms, BOUND).expect("fixture closes"))
}

pub fn trivial() -> GroupRef {
    Arc::new(Group::trivial())
}

/// `Z_n` as the rotations of an n-cycle; element `k` is the generator to
/// the power `k`.
pub fn cyclic(n: usize) -> GroupRef {
    let name = alloc::format!("Z{n}");
    if n == 1 {
        return Arc::new(Group::trivial().with_name(name));
    }
    let cycle: Vec<usize> = (0..n).collect();
    perm_group(&name, n, &[&[&cycle]])
}

pub fn v4() -> GroupRef {
    perm_group("V4", 4, &[&[&[0, 1], &[2, 3]], &[&[0, 2], &[1, 3]]])
}

pub fn s3() -> GroupRef {
    perm_group("S3", 3, &[&[&[0, 1, 2]], &[&[0, 1]]])
}

pub fn d4() -> GroupRef {
    perm_group("D4", 4, &[&[&[0, 1, 2, 3]], &[&[0, 2]]])
}

pub fn q8() -> GroupRef {
    matrix_group("Q8", 3, &[[[0, 2], [1, 0]], [[1, 1], [1, 2]]])
}

pub fn a4() -> GroupRef {
    perm_group("A4", 4, &[&[&[0, 1, 2]], &[&[0, 1], &[2, 3]]])
}

pub fn s4() -> GroupRef {
    perm_group("S4", 4, &[&[&[0, 1, 2, 3]], &[&[0, 1]]])
}

pub fn a5() -> GroupRef {
    perm_group("A5", 5, &[&[&[0, 1, 2, 3, 4]], &[&[0, 1, 2]]])
}

/// `Z3 ⋊ Z4`, the dicyclic group of order 12.
pub fn dic3() -> GroupRef {
    perm_group("Dic3", 7, &[&[&[0, 1, 2]], &[&[3, 4, 5, 6], &[1, 2]]])
}

pub fn sl23() -> GroupRef {
    matrix_group("SL(2,3)", 3, &[[[0, 2], [1, 0]], [[1, 1], [0, 1]]])
}

pub fn sl25() -> GroupRef {
    matrix_group("SL(2,5)", 5, &[[[0, 4], [1, 0]], [[1, 1], [0, 1]]])
}

pub fn z2xz4() -> GroupRef {
    Arc::new((*product(&cyclic(2), &cyclic(4)).group).clone().with_name("Z2xZ4"))
}

pub fn z2cubed() -> GroupRef {
    let z2 = cyclic(2);
    let g = product(&product(&z2, &z2).group, &z2).group;
    Arc::new((*g).clone().with_name("Z2^3"))
}

/// `A × C` named `AxC`.
pub fn named_product(a: &GroupRef, c: &GroupRef) -> crate::group::Pullback {
    let mut pb = product(a, c);
    let g = Arc::new((*pb.group).clone().with_name(alloc::format!("{}x{}", a.name(), c.name())));
    pb.left = pb.left.retarget(g.clone(), a.clone());
    pb.right = pb.right.retarget(g.clone(), c.clone());
    pb.group = g;
    pb
}

/// The eleven named groups of the shipped corpus.
pub fn named_corpus() -> Vec<GroupRef> {
    vec![
        cyclic(2),
        cyclic(3),
        cyclic(4),
        cyclic(6),
        v4(),
        s3(),
        d4(),
        q8(),
        a4(),
        a5(),
        sl25(),
    ]
}

/// Every group of order at most 8, up to isomorphism.
pub fn order_at_most_8() -> Vec<GroupRef> {
    let mut v: Vec<GroupRef> = (1..=8).map(cyclic).collect();
    v.extend([v4(), s3(), d4(), q8(), z2xz4(), z2cubed()]);
    v
}

/// Named corpus plus the small groups and the order-12 and order-24
/// groups used as extension domains.
pub fn corpus() -> Vec<GroupRef> {
    let mut v = named_corpus();
    v.extend([trivial(), cyclic(5), cyclic(7), cyclic(8), z2xz4(), z2cubed(), dic3(), sl23(), s4()]);
    v
}

/// The first surjective homomorphism `dom → cod` in enumeration order.
pub fn first_surjection(dom: &GroupRef, cod: &GroupRef) -> Option<Extension> {
    enumerate_homs(dom, cod, None, 10_000_000)
        .expect("fixture search within budget")
        .into_iter()
        .find(Hom::is_surjective)
        .map(|h| Extension::new(h).expect("surjective"))
}

fn onto(dom: GroupRef, cod: &GroupRef) -> Extension {
    first_surjection(&dom, cod).expect("fixture surjection exists")
}

/// `SL(2,5) → A5`, the Schur cover of `A5`.
pub fn sl25_to_a5() -> (GroupRef, Extension) {
    let a5 = a5();
    let u = onto(sl25(), &a5);
    (a5, u)
}

pub fn q8_to_v4() -> (GroupRef, Extension) {
    let v4 = v4();
    let p = onto(q8(), &v4);
    (v4, p)
}

pub fn d4_to_v4() -> (GroupRef, Extension) {
    let v4 = v4();
    let p = onto(d4(), &v4);
    (v4, p)
}

pub fn sl23_to_a4() -> (GroupRef, Extension) {
    let a4 = a4();
    let p = onto(sl23(), &a4);
    (a4, p)
}

pub fn s3_to_z2() -> (GroupRef, Extension) {
    let z2 = cyclic(2);
    let p = onto(s3(), &z2);
    (z2, p)
}

pub fn z4_to_z2() -> (GroupRef, Extension) {
    let z2 = cyclic(2);
    let p = onto(cyclic(4), &z2);
    (z2, p)
}

/// `Dic3 → Z4` with kernel `Z3`.
pub fn dic3_to_z4() -> (GroupRef, Extension) {
    let z4 = cyclic(4);
    let p = onto(dic3(), &z4);
    (z4, p)
}

/// The first projection `B × A → B`, a trivial covering.
pub fn product_projection(b: &GroupRef, a: &GroupRef) -> Extension {
    Extension::new(named_product(b, a).left).expect("projection is surjective")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{abelian_invariants, center, derived_subgroup};

    #[test]
    fn orders() {
        let expect = [2, 3, 4, 6, 4, 6, 8, 8, 12, 60, 120];
        let got: Vec<usize> = named_corpus().iter().map(|g| g.order()).collect();
        assert_eq!(got, expect);
        assert_eq!(dic3().order(), 12);
        assert_eq!(sl23().order(), 24);
        assert_eq!(s4().order(), 24);
    }

    #[test]
    fn structure() {
        let q8 = q8();
        assert!(!q8.is_abelian());
        assert_eq!(q8.order_profile(), vec![1, 2, 4, 4, 4, 4, 4, 4]);
        assert_eq!(center(&sl25()).order(), 2);
        assert!(derived_subgroup(&sl25()).is_whole());
        assert_eq!(center(&dic3()).order(), 2);
        assert_eq!(abelian_invariants(&z2cubed()).unwrap().factors(), &[2, 2, 2]);
        // Element k of Z_n is the k-th power of the generator.
        let z6 = cyclic(6);
        assert_eq!(z6.pow(1, 4), 4);
    }

    #[test]
    fn extensions() {
        let (a5, u) = sl25_to_a5();
        assert_eq!(u.kernel().order(), 2);
        assert!(crate::group::same_group(u.cod(), &a5));
        assert_eq!(q8_to_v4().1.kernel().order(), 2);
        assert_eq!(d4_to_v4().1.kernel().order(), 2);
        assert_eq!(sl23_to_a4().1.kernel().order(), 2);
        assert_eq!(dic3_to_z4().1.kernel().order(), 3);
        assert_eq!(product_projection(&a5, &cyclic(2)).kernel().order(), 2);
    }
}
