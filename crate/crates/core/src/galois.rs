//! The Galois structure of groups over abelian groups: abelianisation as
//! reflector, surjections as fibrations.

use alloc::{format, vec, vec::Vec};

use crate::error::Result;
use crate::group::{
    abelianization, center, commutator_subgroup, derived_subgroup, induced_on_quotients, pullback,
    quotient_unchecked, Extension, Hom, PairCarrier, Pullback, Subgroup,
};

/// How an extension sits in the Galois structure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GaloisClassification {
    pub is_fibration: bool,
    pub is_trivial_covering: bool,
    pub is_central: bool,
    pub is_normal: bool,
}

/// Whether the unit square of `p` is a pullback: the comparison
/// `A → B ×_{I(B)} I(A)`, `a ↦ (p(a), η_A(a))`, is a bijection.
pub fn is_trivial_covering(p: &Extension) -> bool {
    let (_, eta_a) = abelianization(p.dom());
    let (_, eta_b) = abelianization(p.cod());
    let ip = induced_on_quotients(p.hom(), &eta_a, &eta_b);
    let target = PairCarrier::new(&eta_b, &ip).expect("both legs land in I(B)");
    if target.len() != p.dom().order() {
        return false;
    }
    let mut hit = vec![false; target.len()];
    for a in 0..p.dom().order() {
        let i = target
            .index_of(p.hom().apply(a), eta_a.apply(a))
            .expect("unit square commutes");
        if hit[i] {
            return false;
        }
        hit[i] = true;
    }
    true
}

/// The same property read off the commutator subgroups: `p` restricts to a
/// bijection `[A,A] → [B,B]`.
pub fn is_trivial_covering_by_commutators(p: &Extension) -> bool {
    let da = derived_subgroup(p.dom());
    let db = derived_subgroup(p.cod());
    if da.order() != db.order() {
        return false;
    }
    let mut hit = vec![false; p.cod().order()];
    for &x in da.elements() {
        let y = p.hom().apply(x);
        if !db.contains(y) || hit[y] {
            return false;
        }
        hit[y] = true;
    }
    true
}

pub fn is_central(p: &Extension) -> bool {
    p.kernel().is_subset_of(&center(p.dom()))
}

/// The kernel pair `Eq(p) = E ×_B E` with its two projections.
pub fn kernel_pair(p: &Extension) -> Pullback {
    pullback(p.hom(), p.hom()).expect("p has a single codomain")
}

/// Normality by definition: both kernel-pair projections are trivial
/// coverings.
pub fn is_normal_extension(p: &Extension) -> bool {
    let eq = kernel_pair(p);
    [eq.left, eq.right].into_iter().all(|proj| {
        let ext = Extension::new(proj).expect("kernel-pair projections are split surjections");
        is_trivial_covering(&ext)
    })
}

pub fn classify(p: &Extension) -> GaloisClassification {
    GaloisClassification {
        is_fibration: p.hom().is_surjective(),
        is_trivial_covering: is_trivial_covering(p),
        is_central: is_central(p),
        is_normal: is_normal_extension(p),
    }
}

/// `I₁(p): E/[K,E] → B` together with the quotient map `E → E/[K,E]`.
pub fn central_reflection(p: &Extension) -> (Extension, Hom) {
    let e = p.dom();
    let ke = commutator_subgroup(e, p.kernel(), &Subgroup::whole(e)).expect("same parent");
    let (q, quot) = quotient_unchecked(e, &ke);
    let mut map = vec![usize::MAX; q.order()];
    for x in 0..e.order() {
        let c = quot.apply(x);
        if map[c] == usize::MAX {
            map[c] = p.hom().apply(x);
        }
    }
    let hom = Hom::new_unchecked(q, p.cod().clone(), map);
    let ext = Extension::new(hom)
        .expect("I1(p) is surjective")
        .with_name(format!("I1({})", p.name()));
    (ext, quot)
}

/// `f*(p)` for `f: C → B`, with the projection of its domain into `dom(p)`.
pub fn pullback_extension(p: &Extension, f: &Hom) -> Result<(Extension, Hom)> {
    let pb = pullback(p.hom(), f)?;
    let ext = Extension::new(pb.right)
        .expect("pullback of a surjection is surjective")
        .with_name(format!("{}*({})", f.dom().name(), p.name()));
    Ok((ext, pb.left))
}

/// Every surjection between the given groups, in a fixed order.
pub fn all_surjections(groups: &[crate::group::GroupRef], budget: u64) -> Result<Vec<Extension>> {
    let mut out = Vec::new();
    for a in groups {
        for b in groups {
            if a.order() % b.order() != 0 {
                continue;
            }
            for h in crate::search::enumerate_homs(a, b, None, budget)? {
                if h.is_surjective() {
                    out.push(Extension::new(h)?);
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::group::{product, same_group, GroupRef};
    use crate::search::{enumerate_homs, Constraint};

    fn small_corpus() -> Vec<GroupRef> {
        fixtures::corpus().into_iter().filter(|g| g.order() <= 12).collect()
    }

    #[test]
    fn classification_examples() {
        let id = Extension::identity(&fixtures::s3());
        assert_eq!(
            classify(&id),
            GaloisClassification { is_fibration: true, is_trivial_covering: true, is_central: true, is_normal: true }
        );
        let (_, z4z2) = fixtures::z4_to_z2();
        assert!(is_trivial_covering(&z4z2));
        let (_, q8v4) = fixtures::q8_to_v4();
        assert!(!is_trivial_covering(&q8v4));
        assert!(is_central(&q8v4));
        assert!(is_normal_extension(&q8v4));
        let (_, s3z2) = fixtures::s3_to_z2();
        assert!(!is_central(&s3z2));
        assert!(!is_normal_extension(&s3z2));
    }

    #[test]
    fn coincidence_on_small_corpus() {
        let exts = all_surjections(&small_corpus(), 1_000_000).unwrap();
        assert!(exts.len() > 100);
        for p in &exts {
            let c = classify(p);
            assert_eq!(c.is_central, c.is_normal, "{}", p.name());
            assert_eq!(c.is_trivial_covering, is_trivial_covering_by_commutators(p), "{}", p.name());
            assert!(!c.is_trivial_covering || c.is_central);
        }
    }

    #[test]
    fn central_reflection_examples() {
        let (_, q8v4) = fixtures::q8_to_v4();
        let (r, quot) = central_reflection(&q8v4);
        assert_eq!(*r.hom(), *q8v4.hom());
        assert!(quot.is_injective());
        let (_, s3z2) = fixtures::s3_to_z2();
        let (r, _) = central_reflection(&s3z2);
        assert_eq!(r.dom().order(), 2);
        assert!(is_central(&r));
        let (_, dz) = fixtures::dic3_to_z4();
        let (r, quot) = central_reflection(&dz);
        assert_eq!(quot.kernel(), *dz.kernel());
        assert_eq!(r.dom().order(), 4);
        assert!(same_group(r.cod(), dz.cod()));
    }

    #[test]
    fn central_reflection_is_idempotent() {
        for p in all_surjections(&small_corpus(), 1_000_000).unwrap() {
            let (r, _) = central_reflection(&p);
            assert!(is_central(&r));
            let (rr, quot) = central_reflection(&r);
            assert_eq!(*rr.hom(), *r.hom());
            assert_eq!(quot, Hom::identity(r.dom()));
        }
    }

    /// Morphisms over `B` from `p` into a central `q` correspond exactly to
    /// morphisms from `I₁(p)` into `q`, by precomposition with the quotient.
    #[test]
    fn central_reflection_universal_property() {
        let groups = small_corpus();
        let exts = all_surjections(&groups, 1_000_000).unwrap();
        let central: Vec<&Extension> = exts.iter().filter(|q| is_central(q)).collect();
        let mut checked = 0;
        for p in exts.iter().filter(|p| !is_central(p)) {
            let (r, quot) = central_reflection(p);
            for q in central.iter().filter(|q| same_group(q.cod(), p.cod())) {
                let from_p = enumerate_homs(p.dom(), q.dom(), Some(Constraint { post: q.hom(), target: p.hom() }), 1_000_000).unwrap();
                let from_r = enumerate_homs(r.dom(), q.dom(), Some(Constraint { post: q.hom(), target: r.hom() }), 1_000_000).unwrap();
                let mut composed: Vec<Hom> = from_r.iter().map(|g| quot.then(g).unwrap()).collect();
                composed.sort_by(|a, b| a.map().cmp(b.map()));
                composed.dedup();
                assert_eq!(composed.len(), from_r.len(), "factorisation not unique");
                let mut direct = from_p.clone();
                direct.sort_by(|a, b| a.map().cmp(b.map()));
                assert_eq!(composed, direct, "{} -> {}", p.name(), q.name());
                checked += 1;
            }
        }
        assert!(checked > 20);
    }

    #[test]
    fn pullback_extension_examples() {
        let (v4, q8v4) = fixtures::q8_to_v4();
        let z2 = fixtures::cyclic(2);
        let incl = enumerate_homs(&z2, &v4, None, 100).unwrap().into_iter().find(|h| h.is_injective()).unwrap();
        let (pb, _) = pullback_extension(&q8v4, &incl).unwrap();
        assert_eq!(pb.dom().order(), 4);
        assert!(is_central(&pb));
        let (a5, u) = fixtures::sl25_to_a5();
        let a4 = fixtures::a4();
        let incl = enumerate_homs(&a4, &a5, None, 100_000).unwrap().into_iter().find(|h| h.is_injective()).unwrap();
        let (pb, proj) = pullback_extension(&u, &incl).unwrap();
        assert_eq!(pb.kernel().order(), 2);
        assert!(is_central(&pb) && is_normal_extension(&pb));
        assert!(proj.is_injective());
        let (same, _) = pullback_extension(&q8v4, &Hom::identity(&v4)).unwrap();
        assert_eq!(same.dom().order(), 8);
    }

    /// `I` turns a pullback along a trivial covering into a pullback.
    #[test]
    fn reflector_preserves_pullbacks_along_trivial_coverings() {
        let groups = small_corpus();
        let exts = all_surjections(&groups, 1_000_000).unwrap();
        let mut checked = 0;
        for f in exts.iter().filter(|f| is_trivial_covering(f)).step_by(3) {
            for g in exts.iter().filter(|g| same_group(g.cod(), f.cod())).step_by(5) {
                let pb = pullback(f.hom(), g.hom()).unwrap();
                let (_, eta_p) = abelianization(&pb.group);
                let (_, eta_a) = abelianization(f.dom());
                let (_, eta_c) = abelianization(g.dom());
                let (_, eta_b) = abelianization(f.cod());
                let i_left = induced_on_quotients(&pb.left, &eta_p, &eta_a);
                let i_right = induced_on_quotients(&pb.right, &eta_p, &eta_c);
                let i_f = induced_on_quotients(f.hom(), &eta_a, &eta_b);
                let i_g = induced_on_quotients(g.hom(), &eta_c, &eta_b);
                let target = PairCarrier::new(&i_f, &i_g).unwrap();
                let n = eta_p.cod().order();
                assert_eq!(target.len(), n, "{} / {}", f.name(), g.name());
                let mut hit = vec![false; n];
                for x in 0..n {
                    let i = target.index_of(i_left.apply(x), i_right.apply(x)).unwrap();
                    assert!(!hit[i]);
                    hit[i] = true;
                }
                checked += 1;
            }
        }
        assert!(checked > 20);
    }

    #[test]
    fn product_projection_is_trivial_covering() {
        let p = fixtures::product_projection(&fixtures::a5(), &fixtures::cyclic(2));
        assert!(is_trivial_covering(&p));
        let z = product(&fixtures::cyclic(3), &fixtures::s3());
        assert!(is_trivial_covering(&Extension::new(z.right).unwrap()));
    }
}
