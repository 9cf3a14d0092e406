//! Exhaustive homomorphism search by generator images.

use alloc::{vec, vec::Vec};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::group::{abelian_invariants, same_group, GroupRef, Hom};

/// Restricts a search to maps `h` with `post ∘ h = target`.
#[derive(Clone, Copy, Debug)]
pub struct Constraint<'a> {
    pub post: &'a Hom,
    pub target: &'a Hom,
}

#[derive(Clone, Copy, Debug)]
struct Options<'a> {
    constraint: Option<Constraint<'a>>,
    injective: bool,
    limit: usize,
    budget: u64,
}

/// All homomorphisms `dom → cod` (optionally satisfying `constraint`) in
/// lexicographic order of generator images.
pub fn enumerate_homs(
    dom: &GroupRef,
    cod: &GroupRef,
    constraint: Option<Constraint<'_>>,
    budget: u64,
) -> Result<Vec<Hom>> {
    search(dom, cod, Options { constraint, injective: false, limit: usize::MAX, budget })
}

/// The first homomorphism in enumeration order satisfying `constraint`.
pub fn find_hom(
    dom: &GroupRef,
    cod: &GroupRef,
    constraint: Option<Constraint<'_>>,
    budget: u64,
) -> Result<Option<Hom>> {
    Ok(search(dom, cod, Options { constraint, injective: false, limit: 1, budget })?.pop())
}

/// An isomorphism `g → h` if one exists.
pub fn is_isomorphic(g: &GroupRef, h: &GroupRef, config: &Config) -> Result<Option<Hom>> {
    let bound = config.iso_bound;
    if g.order() > bound || h.order() > bound {
        return Err(Error::OrderBound { bound });
    }
    if same_group(g, h) {
        return Ok(Some(Hom::identity(g).retarget(g.clone(), h.clone())));
    }
    if g.order() != h.order() || g.order_profile() != h.order_profile() {
        return Ok(None);
    }
    if g.is_abelian() != h.is_abelian() {
        return Ok(None);
    }
    if g.is_abelian() && abelian_invariants(g)? != abelian_invariants(h)? {
        return Ok(None);
    }
    let found = search(
        g,
        h,
        Options { constraint: None, injective: true, limit: 1, budget: config.hom_budget },
    )?;
    Ok(found.into_iter().next())
}

fn search(dom: &GroupRef, cod: &GroupRef, opts: Options<'_>) -> Result<Vec<Hom>> {
    if let Some(c) = opts.constraint {
        if !same_group(c.post.dom(), cod) || !same_group(c.target.dom(), dom) || !same_group(c.post.cod(), c.target.cod()) {
            return Err(Error::CodMismatch);
        }
    }
    let gens = dom.generators().to_vec();
    let candidates: Vec<Vec<usize>> = gens
        .iter()
        .map(|&g| {
            let og = dom.element_order(g);
            (0..cod.order())
                .filter(|&y| {
                    let oy = cod.element_order(y);
                    let order_ok = if opts.injective { oy == og } else { og.is_multiple_of(oy) };
                    let constraint_ok = opts
                        .constraint
                        .is_none_or(|c| c.post.apply(y) == c.target.apply(g));
                    order_ok && constraint_ok
                })
                .collect()
        })
        .collect();
    let mut state = State {
        dom,
        cod,
        gens,
        candidates,
        images: Vec::new(),
        found: Vec::new(),
        nodes: 0,
        opts,
        map: vec![usize::MAX; dom.order()],
        seen: vec![false; cod.order()],
    };
    state.descend()?;
    Ok(state.found)
}

struct State<'a, 'c> {
    dom: &'a GroupRef,
    cod: &'a GroupRef,
    gens: Vec<usize>,
    candidates: Vec<Vec<usize>>,
    images: Vec<usize>,
    found: Vec<Hom>,
    nodes: u64,
    opts: Options<'c>,
    map: Vec<usize>,
    seen: Vec<bool>,
}

impl State<'_, '_> {
    fn descend(&mut self) -> Result<()> {
        let depth = self.images.len();
        if !self.consistent() {
            return Ok(());
        }
        if depth == self.gens.len() {
            let map = self.map.clone();
            self.found.push(Hom::new_unchecked(self.dom.clone(), self.cod.clone(), map));
            return Ok(());
        }
        for i in 0..self.candidates[depth].len() {
            self.nodes += 1;
            if self.nodes > self.opts.budget {
                return Err(Error::SearchBudgetExceeded { budget: self.opts.budget });
            }
            let y = self.candidates[depth][i];
            self.images.push(y);
            self.descend()?;
            self.images.pop();
            if self.found.len() >= self.opts.limit {
                return Ok(());
            }
        }
        Ok(())
    }

    /// Extends the assigned generator images over the subgroup they
    /// generate along Cayley edges; a clash on any edge means no
    /// homomorphism has these images. Leaves the extension in `self.map`.
    fn consistent(&mut self) -> bool {
        let (dom, cod) = (self.dom, self.cod);
        self.map.iter_mut().for_each(|v| *v = usize::MAX);
        self.map[0] = 0;
        if self.opts.injective {
            self.seen.iter_mut().for_each(|v| *v = false);
            self.seen[0] = true;
        }
        let mut stack = vec![0usize];
        while let Some(x) = stack.pop() {
            for (j, &g) in self.gens[..self.images.len()].iter().enumerate() {
                let y = dom.mul(x, g);
                let val = cod.mul(self.map[x], self.images[j]);
                if self.map[y] == usize::MAX {
                    if self.opts.injective {
                        if self.seen[val] {
                            return false;
                        }
                        self.seen[val] = true;
                    }
                    self.map[y] = val;
                    stack.push(y);
                } else if self.map[y] != val {
                    return false;
                }
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::group::Group;
    use alloc::sync::Arc;

    /// Oracle: every map `A → B` that respects the full table. Elements are
    /// assigned in index order and a map is abandoned as soon as a product
    /// of assigned elements disagrees, which filters the same `|B|^|A|`
    /// candidates without using generators.
    fn brute_count(a: &Group, b: &Group) -> usize {
        fn go(a: &Group, b: &Group, map: &mut Vec<usize>) -> usize {
            let x = map.len();
            if x == a.order() {
                return 1;
            }
            let mut count = 0;
            for y in 0..b.order() {
                map.push(y);
                let ok = (0..=x).all(|u| {
                    (0..=x).all(|v| {
                        let w = a.mul(u, v);
                        w > x || map[w] == b.mul(map[u], map[v])
                    })
                });
                if ok {
                    count += go(a, b, map);
                }
                map.pop();
            }
            count
        }
        go(a, b, &mut Vec::new())
    }

    #[test]
    fn small_hom_sets() {
        let z2 = fixtures::cyclic(2);
        let z3 = fixtures::cyclic(3);
        let homs = enumerate_homs(&z2, &z3, None, 1000).unwrap();
        assert_eq!(homs.len(), 1);
        assert!(homs[0].is_zero());
        assert_eq!(enumerate_homs(&z2, &z2, None, 1000).unwrap().len(), 2);
    }

    #[test]
    fn counts_match_brute_force() {
        let groups = fixtures::order_at_most_8();
        for a in &groups {
            for b in &groups {
                let fast = enumerate_homs(a, b, None, 1_000_000).unwrap().len();
                assert_eq!(fast, brute_count(a, b), "{} -> {}", a.name(), b.name());
            }
        }
        // S3 -> Z2 and S3 -> S3: 2 and 10.
        let s3 = fixtures::s3();
        assert_eq!(enumerate_homs(&s3, &fixtures::cyclic(2), None, 1000).unwrap().len(), 2);
        assert_eq!(enumerate_homs(&s3, &s3, None, 1000).unwrap().len(), 10);
    }

    #[test]
    fn constrained_liftings() {
        let sl = fixtures::sl25();
        let (a5, u) = fixtures::sl25_to_a5();
        assert!(same_group(u.cod(), &a5));
        let c = Constraint { post: u.hom(), target: u.hom() };
        let lifts = enumerate_homs(&sl, &sl, Some(c), 10_000_000).unwrap();
        // Liftings over A5 differ from the identity by a hom SL(2,5) -> Z2,
        // which is trivial since SL(2,5) is perfect.
        assert_eq!(lifts.len(), 1);
        assert_eq!(lifts[0], Hom::identity(&sl));
    }

    #[test]
    fn budget_is_enforced() {
        let a5 = fixtures::a5();
        let err = enumerate_homs(&a5, &a5, None, 10).unwrap_err();
        assert_eq!(err, Error::SearchBudgetExceeded { budget: 10 });
    }

    #[test]
    fn isomorphism() {
        let cfg = Config::default();
        let q8 = fixtures::q8();
        let w = is_isomorphic(&q8, &q8, &cfg).unwrap().unwrap();
        assert_eq!(w, Hom::identity(&q8));
        let z4 = fixtures::cyclic(4);
        assert!(is_isomorphic(&z4, &fixtures::v4(), &cfg).unwrap().is_none());
        assert!(is_isomorphic(&q8, &fixtures::d4(), &cfg).unwrap().is_none());
        let z2 = fixtures::cyclic(2);
        let z3 = fixtures::cyclic(3);
        let z6 = Arc::new((*crate::group::product(&z2, &z3).group).clone());
        let iso = is_isomorphic(&z6, &fixtures::cyclic(6), &cfg).unwrap().unwrap();
        assert!(iso.is_injective());
        let cfg_small = Config { iso_bound: 4, ..Config::default() };
        assert_eq!(is_isomorphic(&q8, &q8, &cfg_small).unwrap_err(), Error::OrderBound { bound: 4 });
    }
}
