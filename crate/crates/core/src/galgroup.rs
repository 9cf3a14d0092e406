//! Galois groups of normal extensions, Baer invariance, weakly universal
//! extensions and the fundamental group functor with its `κ` components.
//!
//! The Galois group is computed twice: as the loops at 0 of the reflected
//! kernel-pair groupoid, and as `Ker(p) ∩ Ker(η_E)`. The second is the
//! canonical representative; every result carries the comparison between
//! the two.

use alloc::{format, vec::Vec};

use crate::error::{Error, Result};
use crate::galois::{is_normal_extension, pullback_extension};
use crate::group::{
    abelian_invariants, abelianization, center, derived_subgroup, intersection, same_group, subgroup_as_group,
    AbelianInvariants, Extension, GroupRef, Hom, Subgroup,
};
use crate::groupoid::{
    apply_abelianization, aut_at_zero, induced_map_on_aut, kernel_pair_functor, kernel_pair_groupoid,
    reflect_functor, AutGroup, InternalGroupoid, Reflected,
};
use crate::search::{enumerate_homs, find_hom, Constraint};

/// `Gal(p, 0)` by both routes.
#[derive(Clone, Debug)]
pub struct GaloisGroupResult {
    pub extension: Extension,
    pub kernel_pair: InternalGroupoid,
    pub reflected: Reflected,
    /// Loops at 0 of `I(Eq(p))`.
    pub via_groupoid: AutGroup,
    /// `Ker(p) ∩ Ker(η_E)` as a subgroup of `E`.
    pub via_intersection: Subgroup,
    /// The intersection as a group, with its inclusion into `E`.
    pub group: GroupRef,
    pub inclusion: Hom,
    /// `k ↦ [(0, k)]`, a bijective homomorphism `group → via_groupoid`.
    pub comparison: Hom,
}

impl GaloisGroupResult {
    pub fn invariants(&self) -> AbelianInvariants {
        abelian_invariants(&self.group).expect("Galois groups of central extensions are abelian")
    }

    pub fn order(&self) -> usize {
        self.group.order()
    }
}

pub fn galois_group(p: &Extension) -> Result<GaloisGroupResult> {
    if !is_normal_extension(p) {
        return Err(Error::NotNormalExtension(p.name().into()));
    }
    let kernel_pair = kernel_pair_groupoid(p);
    let reflected = apply_abelianization(&kernel_pair)?;
    let via_groupoid = aut_at_zero(&reflected.groupoid)?;

    let (_, eta) = abelianization(p.dom());
    let via_intersection = intersection(p.kernel(), &eta.kernel())?;
    let (group, inclusion) = subgroup_as_group(&via_intersection);

    let pairs = kernel_pair.arrow_pairs().expect("kernel pairs are relations");
    let map = via_intersection
        .elements()
        .iter()
        .map(|&k| {
            let arrow = pairs.iter().position(|&pair| pair == (0, k)).expect("(0,k) lies in Eq(p)");
            via_groupoid
                .position(reflected.eta1.apply(arrow))
                .ok_or_else(|| Error::ComparisonFailure(format!("class of (0,{k}) is not a loop at 0")))
        })
        .collect::<Result<Vec<_>>>()?;
    let comparison = Hom::new(group.clone(), via_groupoid.group.clone(), map)
        .map_err(|err| Error::ComparisonFailure(format!("{err}")))?;
    if !(comparison.is_injective() && comparison.is_surjective()) {
        return Err(Error::ComparisonFailure(format!(
            "{}: intersection has order {}, loops at 0 have order {}",
            p.name(),
            group.order(),
            via_groupoid.group.order()
        )));
    }
    Ok(GaloisGroupResult {
        extension: p.clone(),
        kernel_pair,
        reflected,
        via_groupoid,
        via_intersection,
        group,
        inclusion,
        comparison,
    })
}

fn check_square(p: &Extension, q: &Extension, f: &Hom, b: &Hom) -> Result<()> {
    if !same_group(f.dom(), p.dom()) || !same_group(f.cod(), q.dom()) || !same_group(b.dom(), p.cod()) || !same_group(b.cod(), q.cod()) {
        return Err(Error::CodMismatch);
    }
    for x in 0..p.dom().order() {
        if q.hom().apply(f.apply(x)) != b.apply(p.hom().apply(x)) {
            return Err(Error::SquareDoesNotCommute(format!("{} -> {} at element {x}", p.name(), q.name())));
        }
    }
    Ok(())
}

/// `Gal((f, b), 0)` for a square `q∘f = b∘p`, as a map between the
/// intersection representatives. The groupoid route (restriction of the
/// reflected kernel-pair functor to loops) is computed as well and must
/// agree through the comparisons.
pub fn gal_on_morphism(src: &GaloisGroupResult, tgt: &GaloisGroupResult, f: &Hom, b: &Hom) -> Result<Hom> {
    check_square(&src.extension, &tgt.extension, f, b)?;
    let map = src
        .via_intersection
        .elements()
        .iter()
        .map(|&k| {
            let image = f.apply(k);
            tgt.via_intersection
                .elements()
                .binary_search(&image)
                .map_err(|_| Error::ComparisonFailure(format!("f({k}) = {image} leaves Ker(p') ∩ Ker(η)")))
        })
        .collect::<Result<Vec<_>>>()?;
    let by_intersection = Hom::new(src.group.clone(), tgt.group.clone(), map)?;

    let functor = kernel_pair_functor(&src.kernel_pair, &tgt.kernel_pair, f)?;
    let reflected = reflect_functor(&functor, &src.reflected, &tgt.reflected)?;
    let by_groupoid = induced_map_on_aut(&reflected, &src.via_groupoid, &tgt.via_groupoid)?;
    for k in 0..src.group.order() {
        if tgt.comparison.apply(by_intersection.apply(k)) != by_groupoid.apply(src.comparison.apply(k)) {
            return Err(Error::ComparisonFailure(format!(
                "{} -> {}: the two routes differ at {k}",
                src.extension.name(),
                tgt.extension.name()
            )));
        }
    }
    Ok(by_intersection)
}

/// Outcome of an exhaustive Baer-invariance check.
#[derive(Clone, Debug)]
pub struct BaerReport {
    pub liftings: usize,
    pub distinct_maps: usize,
    pub map: Option<Hom>,
}

impl BaerReport {
    pub fn holds(&self) -> bool {
        self.distinct_maps <= 1
    }
}

/// Every `f` with `p'∘f = b∘p`, and the set of maps they induce on Galois
/// groups.
pub fn baer_check(src: &GaloisGroupResult, tgt: &GaloisGroupResult, b: &Hom, budget: u64) -> Result<BaerReport> {
    let target = src.extension.hom().then(b)?;
    let liftings = enumerate_homs(
        src.extension.dom(),
        tgt.extension.dom(),
        Some(Constraint { post: tgt.extension.hom(), target: &target }),
        budget,
    )?;
    let mut maps: Vec<Hom> = Vec::new();
    for f in &liftings {
        let g = gal_on_morphism(src, tgt, f, b)?;
        if !maps.contains(&g) {
            maps.push(g);
        }
    }
    Ok(BaerReport { liftings: liftings.len(), distinct_maps: maps.len(), map: maps.into_iter().next() })
}

/// A normal extension `u` together with one lifting into each member of a
/// declared family of normal extensions of the same base.
#[derive(Clone, Debug)]
pub struct WeaklyUniversalCert {
    pub u: Extension,
    pub family: Vec<Extension>,
    pub liftings: Vec<Hom>,
    /// `Ker(u) ⊆ Z(U) ∩ [U,U]`.
    pub stem: bool,
}

pub fn verify_weakly_universal(u: &Extension, family: &[Extension], budget: u64) -> Result<WeaklyUniversalCert> {
    if !is_normal_extension(u) {
        return Err(Error::NotNormalExtension(u.name().into()));
    }
    let mut liftings = Vec::with_capacity(family.len());
    for p in family {
        if !same_group(p.cod(), u.cod()) {
            return Err(Error::CodMismatch);
        }
        if !is_normal_extension(p) {
            return Err(Error::NotNormalExtension(p.name().into()));
        }
        let h = find_hom(u.dom(), p.dom(), Some(Constraint { post: p.hom(), target: u.hom() }), budget)?
            .ok_or_else(|| Error::NoLifting(p.name().into()))?;
        liftings.push(h);
    }
    let z = center(u.dom());
    let d = derived_subgroup(u.dom());
    let stem = u.kernel().elements().iter().all(|&k| z.contains(k) && d.contains(k));
    Ok(WeaklyUniversalCert { u: u.clone(), family: family.to_vec(), liftings, stem })
}

/// `π₁(B, I) = Gal(u, 0)` for a certified `u` over `B`.
pub fn pi1_object(b: &GroupRef, cert: Option<&WeaklyUniversalCert>) -> Result<GaloisGroupResult> {
    let cert = cert.ok_or_else(|| Error::MissingCertificate(b.name().into()))?;
    if !same_group(cert.u.cod(), b) {
        return Err(Error::CodMismatch);
    }
    galois_group(&cert.u)
}

/// Two certified covers of the same base have isomorphic Galois groups:
/// the Baer-unique maps in both directions are mutually inverse.
pub fn cover_independence(a: &GaloisGroupResult, b: &GaloisGroupResult, budget: u64) -> Result<Hom> {
    let base = Hom::identity(a.extension.cod());
    let forward = baer_check(a, b, &base, budget)?;
    let backward = baer_check(b, a, &base, budget)?;
    let fail = |what: &str| Error::ComparisonFailure(format!("{} vs {}: {what}", a.extension.name(), b.extension.name()));
    if !forward.holds() || !backward.holds() {
        return Err(fail("liftings induce different maps"));
    }
    let (f, g) = match (forward.map, backward.map) {
        (Some(f), Some(g)) => (f, g),
        _ => return Err(fail("a cover does not lift into the other")),
    };
    if f.then(&g)? != Hom::identity(&a.group) || g.then(&f)? != Hom::identity(&b.group) {
        return Err(fail("induced maps are not mutually inverse"));
    }
    Ok(f)
}

/// The single map induced by every morphism in `liftings` over `b`.
fn unique_induced(src: &GaloisGroupResult, tgt: &GaloisGroupResult, liftings: &[Hom], b: &Hom) -> Result<Hom> {
    let mut result: Option<Hom> = None;
    for g in liftings {
        let h = gal_on_morphism(src, tgt, g, b)?;
        match &result {
            None => result = Some(h),
            Some(prev) if *prev != h => {
                return Err(Error::ComparisonFailure(format!(
                    "liftings {} -> {} induce different maps",
                    src.extension.name(),
                    tgt.extension.name()
                )))
            }
            Some(_) => {}
        }
    }
    result.ok_or_else(|| Error::NoLifting(tgt.extension.name().into()))
}

/// `π₁(f, I)` for `f: A → B`: pull `u_B` back along `f`, lift `u_A`
/// through the pullback, and take the Galois map of the composite square.
/// All liftings are tried and must agree.
pub fn pi1_morphism(f: &Hom, pi_a: &GaloisGroupResult, pi_b: &GaloisGroupResult, budget: u64) -> Result<Hom> {
    let (u_a, u_b) = (&pi_a.extension, &pi_b.extension);
    if !same_group(f.dom(), u_a.cod()) || !same_group(f.cod(), u_b.cod()) {
        return Err(Error::CodMismatch);
    }
    let (pb, proj) = pullback_extension(u_b, f)?;
    let lifts = enumerate_homs(u_a.dom(), pb.dom(), Some(Constraint { post: pb.hom(), target: u_a.hom() }), budget)?;
    if lifts.is_empty() {
        return Err(Error::NoLifting(format!("{} through {}", u_a.name(), pb.name())));
    }
    let composites = lifts.iter().map(|h| h.then(&proj)).collect::<Result<Vec<_>>>()?;
    unique_induced(pi_a, pi_b, &composites, f)
}

/// `κ_p = Gal((h, 1_B), 0)` for liftings `h: U → E` with `p∘h = u`; every
/// lifting is tried and they must agree.
pub fn kappa(p: &GaloisGroupResult, pi: &GaloisGroupResult, budget: u64) -> Result<Hom> {
    let (u, e) = (&pi.extension, &p.extension);
    if !same_group(u.cod(), e.cod()) {
        return Err(Error::CodMismatch);
    }
    let lifts = enumerate_homs(u.dom(), e.dom(), Some(Constraint { post: e.hom(), target: u.hom() }), budget)?;
    unique_induced(pi, p, &lifts, &Hom::identity(e.cod()))
}

/// `δ_p = ι∘κ_p: π₁(B) → Ker(p)`, as a map into `E` landing in the kernel.
pub fn delta_component(p: &GaloisGroupResult, pi: &GaloisGroupResult, budget: u64) -> Result<Hom> {
    kappa(p, pi, budget)?.then(&p.inclusion)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::galois::all_surjections;
    use alloc::vec;

    const BUDGET: u64 = 10_000_000;

    fn injection(a: &GroupRef, b: &GroupRef) -> Hom {
        enumerate_homs(a, b, None, BUDGET).unwrap().into_iter().find(Hom::is_injective).unwrap()
    }

    fn a5_family() -> (GroupRef, Extension, Vec<Extension>) {
        let (a5, u) = fixtures::sl25_to_a5();
        let eq = crate::galois::kernel_pair(&u);
        let eq_u = Extension::new(eq.left.then(u.hom()).unwrap()).unwrap();
        let family = vec![
            Extension::identity(&a5),
            u.clone(),
            fixtures::product_projection(&a5, &fixtures::cyclic(2)),
            fixtures::product_projection(&a5, &fixtures::cyclic(3)),
            Extension::new(fixtures::named_product(u.dom(), &fixtures::cyclic(2)).left.then(u.hom()).unwrap()).unwrap(),
            eq_u,
        ];
        (a5, u, family)
    }

    #[test]
    fn galois_group_examples() {
        let id = Extension::identity(&fixtures::a4());
        assert_eq!(galois_group(&id).unwrap().order(), 1);
        let (_, q8v4) = fixtures::q8_to_v4();
        let g = galois_group(&q8v4).unwrap();
        assert_eq!(g.via_intersection, center(q8v4.dom()));
        assert_eq!(g.invariants().factors(), &[2]);
        let (_, z4z2) = fixtures::z4_to_z2();
        assert_eq!(galois_group(&z4z2).unwrap().order(), 1);
        let (_, s3z2) = fixtures::s3_to_z2();
        assert!(matches!(galois_group(&s3z2), Err(Error::NotNormalExtension(_))));
    }

    #[test]
    fn two_paths_agree_on_small_corpus() {
        let groups: Vec<GroupRef> = fixtures::corpus().into_iter().filter(|g| g.order() <= 12).collect();
        let mut n = 0;
        for p in all_surjections(&groups, BUDGET).unwrap() {
            if crate::galois::is_central(&p) {
                let g = galois_group(&p).unwrap();
                assert_eq!(g.group.order(), g.via_groupoid.group.order());
                n += 1;
            }
        }
        assert!(n > 50);
    }

    #[test]
    fn morphisms() {
        let (a5, u) = fixtures::sl25_to_a5();
        let gu = galois_group(&u).unwrap();
        let id = gal_on_morphism(&gu, &gu, &Hom::identity(u.dom()), &Hom::identity(&a5)).unwrap();
        assert_eq!(id, Hom::identity(&gu.group));

        let a4 = fixtures::a4();
        let incl = injection(&a4, &a5);
        let (pb, proj) = pullback_extension(&u, &incl).unwrap();
        let gp = galois_group(&pb).unwrap();
        let h = gal_on_morphism(&gp, &gu, &proj, &incl).unwrap();
        assert_eq!(gp.order(), 2);
        assert!(h.is_injective());

        let to_id = galois_group(&Extension::identity(&a5)).unwrap();
        let collapse = gal_on_morphism(&gu, &to_id, u.hom(), &Hom::identity(&a5)).unwrap();
        assert!(collapse.is_zero());

        let wrong = Hom::identity(u.dom());
        assert!(matches!(
            gal_on_morphism(&gu, &to_id, &wrong, &Hom::identity(&a5)),
            Err(Error::CodMismatch) | Err(Error::SquareDoesNotCommute(_))
        ));
    }

    #[test]
    fn baer_invariance() {
        let (v4, q8v4) = fixtures::q8_to_v4();
        let g = galois_group(&q8v4).unwrap();
        let r = baer_check(&g, &g, &Hom::identity(&v4), BUDGET).unwrap();
        assert!(r.liftings >= 1);
        assert_eq!(r.distinct_maps, 1);
        assert_eq!(r.map.unwrap(), Hom::identity(&g.group));
        let (a5, u) = fixtures::sl25_to_a5();
        let g = galois_group(&u).unwrap();
        let r = baer_check(&g, &g, &Hom::identity(&a5), BUDGET).unwrap();
        assert_eq!((r.liftings, r.distinct_maps), (1, 1));
        let t = Extension::identity(&fixtures::s3());
        let g = galois_group(&t).unwrap();
        let r = baer_check(&g, &g, &Hom::identity(t.cod()), BUDGET).unwrap();
        assert_eq!(r.distinct_maps, 1);
    }

    #[test]
    fn weak_universality() {
        let (a5, u, family) = a5_family();
        let cert = verify_weakly_universal(&u, core::slice::from_ref(&u), BUDGET).unwrap();
        assert_eq!(cert.liftings[0], Hom::identity(u.dom()));
        let cert = verify_weakly_universal(&u, &family, BUDGET).unwrap();
        assert!(cert.stem);
        for (p, h) in family.iter().zip(&cert.liftings) {
            assert_eq!(h.then(p.hom()).unwrap(), *u.hom());
        }
        let id = Extension::identity(&a5);
        assert!(matches!(verify_weakly_universal(&id, &[u], BUDGET), Err(Error::NoLifting(_))));
    }

    #[test]
    fn fundamental_groups() {
        let (a5, u, family) = a5_family();
        let cert = verify_weakly_universal(&u, &family, BUDGET).unwrap();
        let pi = pi1_object(&a5, Some(&cert)).unwrap();
        assert_eq!(pi.invariants().factors(), &[2]);
        assert!(matches!(pi1_object(&a5, None), Err(Error::MissingCertificate(_))));

        let (v4, d4v4) = fixtures::d4_to_v4();
        let fam = [
            Extension::identity(&v4),
            d4v4.clone(),
            fixtures::product_projection(&v4, &fixtures::cyclic(2)),
            fixtures::product_projection(&v4, &fixtures::cyclic(3)),
        ];
        let cert = verify_weakly_universal(&d4v4, &fam, BUDGET).unwrap();
        assert!(cert.stem);
        assert_eq!(pi1_object(&v4, Some(&cert)).unwrap().invariants().factors(), &[2]);

        let z6 = fixtures::cyclic(6);
        let id = Extension::identity(&z6);
        let cert = verify_weakly_universal(&id, &[fixtures::product_projection(&z6, &fixtures::cyclic(2))], BUDGET).unwrap();
        assert_eq!(pi1_object(&z6, Some(&cert)).unwrap().order(), 1);
    }

    #[test]
    fn fundamental_group_functor() {
        let (a5, u) = fixtures::sl25_to_a5();
        let pi5 = galois_group(&u).unwrap();
        let (a4, v) = fixtures::sl23_to_a4();
        let pi4 = galois_group(&v).unwrap();
        assert_eq!(pi1_morphism(&Hom::identity(&a5), &pi5, &pi5, BUDGET).unwrap(), Hom::identity(&pi5.group));
        let incl = injection(&a4, &a5);
        let m = pi1_morphism(&incl, &pi4, &pi5, BUDGET).unwrap();
        assert!(m.is_injective() && m.is_surjective());

        let one = fixtures::trivial();
        let pi1 = galois_group(&Extension::identity(&one)).unwrap();
        let to_one = Hom::zero(&a5, &one);
        assert!(pi1_morphism(&to_one, &pi5, &pi1, BUDGET).unwrap().is_zero());
        // Composition: A4 → A5 → 1.
        let composite = incl.then(&to_one).unwrap();
        let lhs = pi1_morphism(&composite, &pi4, &pi1, BUDGET).unwrap();
        let rhs = m.then(&pi1_morphism(&to_one, &pi5, &pi1, BUDGET).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn kappa_components() {
        let (a5, u, family) = a5_family();
        let pi = galois_group(&u).unwrap();
        let ku = kappa(&pi, &pi, BUDGET).unwrap();
        assert!(ku.is_injective() && ku.is_surjective());
        let p = galois_group(&family[2]).unwrap();
        assert_eq!(p.order(), 1);
        assert!(kappa(&p, &pi, BUDGET).unwrap().is_zero());
        let (same, _) = pullback_extension(&u, &Hom::identity(&a5)).unwrap();
        let gs = galois_group(&same).unwrap();
        let k = kappa(&gs, &pi, BUDGET).unwrap();
        assert!(k.is_injective() && k.is_surjective());
        let delta = delta_component(&pi, &pi, BUDGET).unwrap();
        assert!(delta.is_injective());
        assert!(delta.map().iter().all(|&x| u.kernel().contains(x)));
    }

    /// `Gal((f,1),0)∘κ_p = κ_{p'}` for every morphism over `A5` in the
    /// family.
    #[test]
    fn kappa_naturality() {
        let (a5, u, family) = a5_family();
        let pi = galois_group(&u).unwrap();
        let gals: Vec<GaloisGroupResult> = family.iter().map(|p| galois_group(p).unwrap()).collect();
        let kappas: Vec<Hom> = gals.iter().map(|g| kappa(g, &pi, BUDGET).unwrap()).collect();
        let id = Hom::identity(&a5);
        let mut squares = 0;
        for (i, p) in family.iter().enumerate() {
            for (j, q) in family.iter().enumerate() {
                let fs = enumerate_homs(p.dom(), q.dom(), Some(Constraint { post: q.hom(), target: p.hom() }), BUDGET).unwrap();
                for f in fs.iter().take(4) {
                    let g = gal_on_morphism(&gals[i], &gals[j], f, &id).unwrap();
                    assert_eq!(kappas[i].then(&g).unwrap(), kappas[j]);
                    squares += 1;
                }
            }
        }
        assert!(squares > 10);
    }

    #[test]
    fn cover_choice_is_irrelevant() {
        let (a5, u) = fixtures::sl25_to_a5();
        let v = Extension::new(fixtures::named_product(u.dom(), &fixtures::cyclic(2)).left.then(u.hom()).unwrap()).unwrap();
        let (gu, gv) = (galois_group(&u).unwrap(), galois_group(&v).unwrap());
        let iso = cover_independence(&gu, &gv, BUDGET).unwrap();
        assert!(iso.is_injective() && iso.is_surjective());
        let id = galois_group(&Extension::identity(&a5)).unwrap();
        assert!(cover_independence(&gu, &id, BUDGET).is_err());
    }
}
