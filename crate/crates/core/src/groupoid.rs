//! Internal groupoids over finite carriers, internal functors and natural
//! transformations, and the group of automorphisms at the base object.
//!
//! Arrows compose left to right: a composable pair `(x, y)` has
//! `c(x) = d(y)`, and `m(x, y)` runs from `d(x)` to `c(y)`.

use alloc::{collections::BTreeMap, format, string::String, sync::Arc, vec, vec::Vec};

use crate::error::{Error, Result};
use crate::group::{
    abelianization, commutator_mask, greedy_generators, induced_on_quotients, Extension,
    Group, GroupRef, Hom, PairCarrier,
};

/// The underlying object of `R₀` or `R₁`: a group, or a finite pointed set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Carrier {
    Group(GroupRef),
    Pointed { size: usize, base: usize },
}

impl Carrier {
    pub fn size(&self) -> usize {
        match self {
            Carrier::Group(g) => g.order(),
            Carrier::Pointed { size, .. } => *size,
        }
    }

    /// The base point; the identity for a group carrier.
    pub fn base(&self) -> usize {
        match self {
            Carrier::Group(_) => 0,
            Carrier::Pointed { base, .. } => *base,
        }
    }

    pub fn group(&self) -> Option<&GroupRef> {
        match self {
            Carrier::Group(g) => Some(g),
            Carrier::Pointed { .. } => None,
        }
    }
}

/// Raw data for [`InternalGroupoid::new`]. `s` is derived when absent;
/// `m` is derived from `arrow_pairs` when absent, which describes a
/// relation: arrow `i` is the pair `arrow_pairs[i]` of objects and
/// composition pastes `(a, b), (b, c)` to `(a, c)`.
#[derive(Clone, Debug)]
pub struct GroupoidParts {
    pub obj: Carrier,
    pub arr: Carrier,
    pub d: Vec<usize>,
    pub c: Vec<usize>,
    pub e: Vec<usize>,
    pub s: Option<Vec<usize>>,
    pub m: Option<BTreeMap<(usize, usize), usize>>,
    pub arrow_pairs: Option<Vec<(usize, usize)>>,
}

impl GroupoidParts {
    /// The discrete groupoid: every arrow is an identity.
    pub fn discrete(obj: Carrier) -> GroupoidParts {
        let n = obj.size();
        let id: Vec<usize> = (0..n).collect();
        GroupoidParts {
            arr: obj.clone(),
            obj,
            d: id.clone(),
            c: id.clone(),
            e: id.clone(),
            s: Some(id),
            m: Some((0..n).map(|x| ((x, x), x)).collect()),
            arrow_pairs: None,
        }
    }
}

const NONE: usize = usize::MAX;

/// A validated internal groupoid.
#[derive(Clone, Debug)]
pub struct InternalGroupoid {
    obj: Carrier,
    arr: Carrier,
    d: Vec<usize>,
    c: Vec<usize>,
    e: Vec<usize>,
    s: Vec<usize>,
    comp: Vec<(usize, usize)>,
    comp_index: BTreeMap<(usize, usize), usize>,
    m: Vec<usize>,
    arrow_pairs: Option<Vec<(usize, usize)>>,
}

fn violation(diagram: &str, witness: String) -> Error {
    Error::AxiomViolation { diagram: diagram.into(), witness }
}

fn check_map(name: &str, map: &[usize], dom: &Carrier, cod: &Carrier) -> Result<()> {
    if map.len() != dom.size() {
        return Err(violation(name, format!("length {} but domain has {} elements", map.len(), dom.size())));
    }
    if let Some(&bad) = map.iter().find(|&&y| y >= cod.size()) {
        return Err(Error::IndexOutOfRange { index: bad, size: cod.size() });
    }
    match (dom, cod) {
        (Carrier::Group(a), Carrier::Group(b)) => {
            Hom::new(a.clone(), b.clone(), map.to_vec())
                .map_err(|err| violation(name, format!("not a homomorphism: {err}")))?;
        }
        _ => {
            if map[dom.base()] != cod.base() {
                return Err(violation(name, format!("base point {} not preserved", dom.base())));
            }
        }
    }
    Ok(())
}

impl InternalGroupoid {
    /// Validates every axiom by exhaustive scan: structure maps preserve the
    /// carrier structure, `de = 1 = ce`, the unit, associativity and
    /// inverse diagrams commute, and squares (2) and (3) are pullbacks.
    pub fn new(parts: GroupoidParts) -> Result<InternalGroupoid> {
        let GroupoidParts { obj, arr, d, c, e, s, m, arrow_pairs } = parts;
        let (no, na) = (obj.size(), arr.size());
        check_map("d", &d, &arr, &obj)?;
        check_map("c", &c, &arr, &obj)?;
        check_map("e", &e, &obj, &arr)?;
        for x in 0..no {
            if d[e[x]] != x || c[e[x]] != x {
                return Err(violation("de = 1 = ce", format!("object {x}")));
            }
        }
        if let Some(pairs) = &arrow_pairs {
            if pairs.len() != na {
                return Err(violation("arrow pairs", format!("{} pairs for {na} arrows", pairs.len())));
            }
            for (i, &(a, b)) in pairs.iter().enumerate() {
                if d[i] != a || c[i] != b {
                    return Err(violation("arrow pairs", format!("arrow {i} is not ({a},{b})")));
                }
            }
        }
        let mut comp = Vec::new();
        let mut comp_index = BTreeMap::new();
        for x in 0..na {
            for y in 0..na {
                if c[x] == d[y] {
                    comp_index.insert((x, y), comp.len());
                    comp.push((x, y));
                }
            }
        }
        let mut mv = vec![NONE; comp.len()];
        match (m, &arrow_pairs) {
            (Some(table), _) => {
                for (&(x, y), &z) in &table {
                    let Some(&i) = comp_index.get(&(x, y)) else {
                        return Err(violation("multiplication", format!("({x},{y}) is not composable")));
                    };
                    if z >= na {
                        return Err(Error::IndexOutOfRange { index: z, size: na });
                    }
                    mv[i] = z;
                }
            }
            (None, Some(pairs)) => {
                let lookup: BTreeMap<(usize, usize), usize> =
                    pairs.iter().enumerate().map(|(i, &p)| (p, i)).collect();
                for (i, &(x, y)) in comp.iter().enumerate() {
                    let (a, _) = pairs[x];
                    let (_, b) = pairs[y];
                    mv[i] = *lookup.get(&(a, b)).ok_or_else(|| {
                        violation("multiplication", format!("relation has no arrow ({a},{b})"))
                    })?;
                }
            }
            (None, None) => return Err(Error::SchemaError("no multiplication supplied".into())),
        }
        let mut g = InternalGroupoid {
            obj,
            arr,
            d,
            c,
            e,
            s: Vec::new(),
            comp,
            comp_index,
            m: mv,
            arrow_pairs,
        };
        g.check_units()?;
        g.check_associativity()?;
        if let Some(i) = g.m.iter().position(|&z| z == NONE) {
            let (x, y) = g.comp[i];
            return Err(violation("multiplication", format!("({x},{y}) has no composite")));
        }
        g.check_typing()?;
        g.s = match s {
            Some(s) => {
                check_map("s", &s, &g.arr, &g.arr)?;
                s
            }
            None => g.derive_inverse()?,
        };
        g.check_inverse()?;
        g.check_pullback_squares()?;
        g.check_multiplication_structure()?;
        Ok(g)
    }

    fn m_or(&self, diagram: &str, x: usize, y: usize) -> Result<usize> {
        match self.comp_index.get(&(x, y)).map(|&i| self.m[i]) {
            Some(z) if z != NONE => Ok(z),
            Some(_) => Err(violation(diagram, format!("m({x},{y}) undefined"))),
            None => Err(violation(diagram, format!("({x},{y}) is not composable"))),
        }
    }

    fn check_units(&self) -> Result<()> {
        for x in 0..self.arr.size() {
            if self.m_or("unit", x, self.e[self.c[x]])? != x {
                return Err(violation("unit", format!("m<1, ec>({x}) != {x}")));
            }
            if self.m_or("unit", self.e[self.d[x]], x)? != x {
                return Err(violation("unit", format!("m<ed, 1>({x}) != {x}")));
            }
        }
        Ok(())
    }

    fn check_associativity(&self) -> Result<()> {
        let mut by_source: Vec<Vec<usize>> = vec![Vec::new(); self.obj.size()];
        for y in 0..self.arr.size() {
            by_source[self.d[y]].push(y);
        }
        for &(x, y) in &self.comp {
            let xy = self.m_or("associativity", x, y)?;
            for &z in &by_source[self.c[y]] {
                let left = self.m_or("associativity", xy, z)?;
                let yz = self.m_or("associativity", y, z)?;
                let right = self.m_or("associativity", x, yz)?;
                if left != right {
                    return Err(violation("associativity", format!("({x},{y},{z})")));
                }
            }
        }
        Ok(())
    }

    /// Squares (2) and (3) commute: `d∘m = d∘p₁`, `c∘m = c∘p₂`.
    fn check_typing(&self) -> Result<()> {
        for (i, &(x, y)) in self.comp.iter().enumerate() {
            let z = self.m[i];
            if self.d[z] != self.d[x] {
                return Err(violation("square (2)", format!("d m({x},{y}) != d {x}")));
            }
            if self.c[z] != self.c[y] {
                return Err(violation("square (3)", format!("c m({x},{y}) != c {y}")));
            }
        }
        Ok(())
    }

    fn derive_inverse(&self) -> Result<Vec<usize>> {
        let mut by_ends: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for y in 0..self.arr.size() {
            by_ends.entry((self.d[y], self.c[y])).or_default().push(y);
        }
        (0..self.arr.size())
            .map(|x| {
                let unit = self.e[self.d[x]];
                by_ends
                    .get(&(self.c[x], self.d[x]))
                    .and_then(|ys| ys.iter().copied().find(|&y| self.m(x, y) == Some(unit)))
                    .ok_or_else(|| violation("inverse", format!("arrow {x} has no inverse")))
            })
            .collect()
    }

    fn check_inverse(&self) -> Result<()> {
        for x in 0..self.arr.size() {
            let y = self.s[x];
            if self.d[y] != self.c[x] || self.c[y] != self.d[x] {
                return Err(violation("inverse", format!("ds != c or cs != d at {x}")));
            }
            if self.m(x, y) != Some(self.e[self.d[x]]) {
                return Err(violation("inverse", format!("m<1, s>({x}) != ed({x})")));
            }
            if self.m(y, x) != Some(self.e[self.c[x]]) {
                return Err(violation("inverse", format!("m<s, 1>({x}) != ec({x})")));
            }
        }
        Ok(())
    }

    /// `(x, y) ↦ (x, m(x,y))` and `(x, y) ↦ (y, m(x,y))` are bijections onto
    /// the pairs with a common domain, respectively codomain.
    fn check_pullback_squares(&self) -> Result<()> {
        let mut per_d = vec![0usize; self.obj.size()];
        let mut per_c = vec![0usize; self.obj.size()];
        for x in 0..self.arr.size() {
            per_d[self.d[x]] += 1;
            per_c[self.c[x]] += 1;
        }
        let target_d: usize = per_d.iter().map(|k| k * k).sum();
        let target_c: usize = per_c.iter().map(|k| k * k).sum();
        for (name, target, second) in [("square (2) pullback", target_d, false), ("square (3) pullback", target_c, true)] {
            if target != self.comp.len() {
                return Err(violation(name, format!("{} composable pairs, {target} expected", self.comp.len())));
            }
            let mut seen = BTreeMap::new();
            for (i, &(x, y)) in self.comp.iter().enumerate() {
                let key = (if second { y } else { x }, self.m[i]);
                if let Some(prev) = seen.insert(key, (x, y)) {
                    return Err(violation(name, format!("{prev:?} and ({x},{y}) collide")));
                }
            }
        }
        Ok(())
    }

    /// For group carriers, `s` and `m` are homomorphisms (the latter on the
    /// composable-pairs subgroup); for pointed carriers they preserve the
    /// base point.
    fn check_multiplication_structure(&self) -> Result<()> {
        match (&self.obj, &self.arr) {
            (Carrier::Group(g0), Carrier::Group(g1)) => {
                let dh = Hom::new_unchecked(g1.clone(), g0.clone(), self.d.clone());
                let ch = Hom::new_unchecked(g1.clone(), g0.clone(), self.c.clone());
                let carrier = PairCarrier::new(&ch, &dh)?;
                let gens = greedy_generators(&carrier, 0..carrier.len());
                for i in 0..carrier.len() {
                    for &gi in &gens {
                        let (x, y) = carrier.pair(i);
                        let (gx, gy) = carrier.pair(gi);
                        let lhs = self.m(g1.mul(x, gx), g1.mul(y, gy)).expect("componentwise product is composable");
                        let rhs = g1.mul(self.m(x, y).expect("total"), self.m(gx, gy).expect("total"));
                        if lhs != rhs {
                            return Err(violation("m is a homomorphism", format!("pairs ({x},{y}) and ({gx},{gy})")));
                        }
                    }
                }
                Ok(())
            }
            (Carrier::Group(_), _) | (_, Carrier::Group(_)) => {
                Err(Error::SchemaError("objects and arrows must both be groups or both pointed sets".into()))
            }
            _ => {
                let b = self.arr.base();
                if self.m(b, b) != Some(b) {
                    return Err(violation("m preserves base point", format!("m({b},{b})")));
                }
                Ok(())
            }
        }
    }

    pub fn obj(&self) -> &Carrier {
        &self.obj
    }

    pub fn arr(&self) -> &Carrier {
        &self.arr
    }

    pub fn d(&self) -> &[usize] {
        &self.d
    }

    pub fn c(&self) -> &[usize] {
        &self.c
    }

    pub fn e(&self) -> &[usize] {
        &self.e
    }

    pub fn s(&self) -> &[usize] {
        &self.s
    }

    /// Composable pairs in lexicographic order.
    pub fn composable(&self) -> &[(usize, usize)] {
        &self.comp
    }

    pub fn m(&self, x: usize, y: usize) -> Option<usize> {
        self.comp_index.get(&(x, y)).map(|&i| self.m[i]).filter(|&z| z != NONE)
    }

    pub fn arrow_pairs(&self) -> Option<&[(usize, usize)]> {
        self.arrow_pairs.as_deref()
    }
}

/// `Eq(p) ⇉ E` with projections as `d`, `c`, the diagonal as `e`, the swap
/// as `s` and pasting as composition.
pub fn kernel_pair_groupoid(p: &Extension) -> InternalGroupoid {
    let eq = crate::galois::kernel_pair(p);
    let n = p.dom().order();
    let pairs: Vec<(usize, usize)> = (0..eq.group.order()).map(|i| (eq.left.apply(i), eq.right.apply(i))).collect();
    let mut index = vec![NONE; n * n];
    for (i, &(a, b)) in pairs.iter().enumerate() {
        index[a * n + b] = i;
    }
    let parts = GroupoidParts {
        obj: Carrier::Group(p.dom().clone()),
        arr: Carrier::Group(eq.group.clone()),
        d: eq.left.map().to_vec(),
        c: eq.right.map().to_vec(),
        e: (0..n).map(|x| index[x * n + x]).collect(),
        s: Some(pairs.iter().map(|&(a, b)| index[b * n + a]).collect()),
        m: None,
        arrow_pairs: Some(pairs),
    };
    InternalGroupoid::new(parts).expect("kernel pairs are groupoids")
}

/// A groupoid reflected into abelian groups, with the units on objects and
/// arrows.
#[derive(Clone, Debug)]
pub struct Reflected {
    pub groupoid: InternalGroupoid,
    pub eta0: Hom,
    pub eta1: Hom,
}

/// Applies abelianisation to objects, arrows and structure maps. The
/// multiplication is induced through `I(R₁ ×_{R₀} R₁) ≅ I(R₁) ×_{I(R₀)} I(R₁)`,
/// which is checked first.
pub fn apply_abelianization(r: &InternalGroupoid) -> Result<Reflected> {
    let (Carrier::Group(g0), Carrier::Group(g1)) = (&r.obj, &r.arr) else {
        return Err(Error::SchemaError("abelianisation needs group carriers".into()));
    };
    let (i0, eta0) = abelianization(g0);
    let (i1, eta1) = abelianization(g1);
    let hom = |dom: &GroupRef, cod: &GroupRef, map: &[usize]| Hom::new_unchecked(dom.clone(), cod.clone(), map.to_vec());
    let d = induced_on_quotients(&hom(g1, g0, &r.d), &eta1, &eta0);
    let c = induced_on_quotients(&hom(g1, g0, &r.c), &eta1, &eta0);
    let e = induced_on_quotients(&hom(g0, g1, &r.e), &eta0, &eta1);
    let s = induced_on_quotients(&hom(g1, g1, &r.s), &eta1, &eta1);

    let carrier = PairCarrier::new(&hom(g1, g0, &r.c), &hom(g1, g0, &r.d))?;
    let gens = greedy_generators(&carrier, 0..carrier.len());
    let derived = commutator_mask(&carrier, &gens, &gens).iter().filter(|&&b| b).count();
    let kernel = (0..carrier.len())
        .filter(|&i| {
            let (x, y) = carrier.pair(i);
            eta1.apply(x) == 0 && eta1.apply(y) == 0
        })
        .count();
    if kernel != derived {
        return Err(Error::NotAGroupoidAfterReflection(format!(
            "I(R1 x_R0 R1) -> I(R1) x_I(R0) I(R1) is not injective: kernel of order {kernel}, commutator subgroup of order {derived}"
        )));
    }
    let target = PairCarrier::new(&c, &d)?;
    let image = carrier.len() / kernel;
    if image != target.len() {
        return Err(Error::NotAGroupoidAfterReflection(format!(
            "I(R1 x_R0 R1) -> I(R1) x_I(R0) I(R1) is not surjective: image {image}, pullback {}",
            target.len()
        )));
    }
    let mut m = BTreeMap::new();
    for &(x, y) in &r.comp {
        let key = (eta1.apply(x), eta1.apply(y));
        let z = eta1.apply(r.m(x, y).expect("total"));
        if let Some(prev) = m.insert(key, z) {
            if prev != z {
                return Err(Error::NotAGroupoidAfterReflection(format!("composite of {key:?} is not well defined")));
            }
        }
    }
    let parts = GroupoidParts {
        obj: Carrier::Group(i0),
        arr: Carrier::Group(i1),
        d: d.map().to_vec(),
        c: c.map().to_vec(),
        e: e.map().to_vec(),
        s: Some(s.map().to_vec()),
        m: Some(m),
        arrow_pairs: None,
    };
    let groupoid = InternalGroupoid::new(parts).map_err(|err| Error::NotAGroupoidAfterReflection(format!("{err}")))?;
    Ok(Reflected { groupoid, eta0, eta1 })
}

/// A pair of carrier maps commuting with all structure maps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InternalFunctor {
    pub f0: Vec<usize>,
    pub f1: Vec<usize>,
}

impl InternalFunctor {
    pub fn new(src: &InternalGroupoid, tgt: &InternalGroupoid, f0: Vec<usize>, f1: Vec<usize>) -> Result<InternalFunctor> {
        check_map("f0", &f0, &src.obj, &tgt.obj)?;
        check_map("f1", &f1, &src.arr, &tgt.arr)?;
        for x in 0..src.arr.size() {
            if tgt.d[f1[x]] != f0[src.d[x]] {
                return Err(violation("functor commutes with d", format!("arrow {x}")));
            }
            if tgt.c[f1[x]] != f0[src.c[x]] {
                return Err(violation("functor commutes with c", format!("arrow {x}")));
            }
        }
        for a in 0..src.obj.size() {
            if f1[src.e[a]] != tgt.e[f0[a]] {
                return Err(violation("functor commutes with e", format!("object {a}")));
            }
        }
        for &(x, y) in &src.comp {
            let lhs = f1[src.m(x, y).expect("total")];
            if tgt.m(f1[x], f1[y]) != Some(lhs) {
                return Err(violation("functor commutes with m", format!("pair ({x},{y})")));
            }
        }
        Ok(InternalFunctor { f0, f1 })
    }

    pub fn identity(r: &InternalGroupoid) -> InternalFunctor {
        InternalFunctor { f0: (0..r.obj.size()).collect(), f1: (0..r.arr.size()).collect() }
    }
}

/// The functor `Eq(p) → Eq(p')` induced by `f: E → E'` with `p'∘f = b∘p`.
pub fn kernel_pair_functor(src: &InternalGroupoid, tgt: &InternalGroupoid, f: &Hom) -> Result<InternalFunctor> {
    let (Some(sp), Some(tp)) = (src.arrow_pairs(), tgt.arrow_pairs()) else {
        return Err(Error::SchemaError("kernel-pair functor needs relation groupoids".into()));
    };
    let lookup: BTreeMap<(usize, usize), usize> = tp.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let f1 = sp
        .iter()
        .map(|&(a, b)| {
            let key = (f.apply(a), f.apply(b));
            lookup
                .get(&key)
                .copied()
                .ok_or_else(|| Error::SquareDoesNotCommute(format!("({a},{b}) maps outside the kernel pair")))
        })
        .collect::<Result<Vec<_>>>()?;
    InternalFunctor::new(src, tgt, f.map().to_vec(), f1)
}

/// `I(f)` between reflected groupoids.
pub fn reflect_functor(f: &InternalFunctor, src: &Reflected, tgt: &Reflected) -> Result<InternalFunctor> {
    let f0 = Hom::new_unchecked(src.eta0.dom().clone(), tgt.eta0.dom().clone(), f.f0.clone());
    let f1 = Hom::new_unchecked(src.eta1.dom().clone(), tgt.eta1.dom().clone(), f.f1.clone());
    let g0 = induced_on_quotients(&f0, &src.eta0, &tgt.eta0);
    let g1 = induced_on_quotients(&f1, &src.eta1, &tgt.eta1);
    InternalFunctor::new(&src.groupoid, &tgt.groupoid, g0.map().to_vec(), g1.map().to_vec())
}

/// `μ: R₀ → S₁` with `dμ = f₀`, `cμ = g₀` and `m⟨f₁, μc⟩ = m⟨μd, g₁⟩`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InternalNatTrans {
    pub mu: Vec<usize>,
}

pub fn validate_nat_trans(
    src: &InternalGroupoid,
    tgt: &InternalGroupoid,
    f: &InternalFunctor,
    g: &InternalFunctor,
    mu: &[usize],
) -> Result<()> {
    check_map("mu", mu, &src.obj, &tgt.arr)?;
    for a in 0..src.obj.size() {
        if tgt.d[mu[a]] != f.f0[a] {
            return Err(violation("natural transformation (i)", format!("d mu({a}) != f0({a})")));
        }
        if tgt.c[mu[a]] != g.f0[a] {
            return Err(violation("natural transformation (ii)", format!("c mu({a}) != g0({a})")));
        }
    }
    for x in 0..src.arr.size() {
        let lhs = tgt.m(f.f1[x], mu[src.c[x]]);
        let rhs = tgt.m(mu[src.d[x]], g.f1[x]);
        if lhs.is_none() || lhs != rhs {
            return Err(violation("natural transformation (iii)", format!("arrow {x}")));
        }
    }
    Ok(())
}

/// A natural transformation `f ⇒ g` (automatically invertible between
/// groupoids). When the target is a relation, the only candidate is
/// `μ = ⟨f₀, g₀⟩`; otherwise candidates are searched exhaustively.
pub fn are_naturally_isomorphic(
    src: &InternalGroupoid,
    tgt: &InternalGroupoid,
    f: &InternalFunctor,
    g: &InternalFunctor,
    budget: u64,
) -> Result<Option<InternalNatTrans>> {
    if let Some(pairs) = tgt.arrow_pairs() {
        let lookup: BTreeMap<(usize, usize), usize> = pairs.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        let mu: Option<Vec<usize>> = (0..src.obj.size()).map(|a| lookup.get(&(f.f0[a], g.f0[a])).copied()).collect();
        return Ok(mu.filter(|mu| validate_nat_trans(src, tgt, f, g, mu).is_ok()).map(|mu| InternalNatTrans { mu }));
    }
    let candidates: Vec<Vec<usize>> = (0..src.obj.size())
        .map(|a| (0..tgt.arr.size()).filter(|&y| tgt.d[y] == f.f0[a] && tgt.c[y] == g.f0[a]).collect())
        .collect();
    let mut total: u64 = 1;
    for cand in &candidates {
        total = total.saturating_mul(cand.len() as u64);
        if total == 0 {
            return Ok(None);
        }
    }
    if total > budget {
        return Err(Error::SearchBudgetExceeded { budget });
    }
    let mut choice = vec![0usize; candidates.len()];
    loop {
        let mu: Vec<usize> = choice.iter().zip(&candidates).map(|(&i, c)| c[i]).collect();
        if validate_nat_trans(src, tgt, f, g, &mu).is_ok() {
            return Ok(Some(InternalNatTrans { mu }));
        }
        let mut k = 0;
        loop {
            if k == choice.len() {
                return Ok(None);
            }
            choice[k] += 1;
            if choice[k] < candidates[k].len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}

/// `Aut_R(0)`: the loops at the base object under the restricted
/// multiplication. `loops[i]` is the arrow for element `i`; the identity
/// loop comes first, the rest ascend.
#[derive(Clone, Debug)]
pub struct AutGroup {
    pub group: GroupRef,
    pub loops: Vec<usize>,
}

impl AutGroup {
    pub fn position(&self, arrow: usize) -> Option<usize> {
        self.loops.iter().position(|&x| x == arrow)
    }
}

pub fn aut_at_zero(r: &InternalGroupoid) -> Result<AutGroup> {
    let base = r.obj.base();
    let unit = r.e[base];
    let mut loops = vec![unit];
    loops.extend((0..r.arr.size()).filter(|&x| x != unit && r.d[x] == base && r.c[x] == base));
    let mut pos = BTreeMap::new();
    for (i, &x) in loops.iter().enumerate() {
        pos.insert(x, i);
    }
    let rows = loops
        .iter()
        .map(|&x| {
            loops
                .iter()
                .map(|&y| {
                    r.m(x, y)
                        .and_then(|z| pos.get(&z).copied())
                        .ok_or_else(|| Error::NotAGroupOnLoops(format!("m({x},{y}) is not a loop")))
                })
                .collect::<Result<Vec<usize>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let group = Group::from_table("Aut(0)", &rows).map_err(|err| Error::NotAGroupOnLoops(format!("{err}")))?;
    Ok(AutGroup { group: Arc::new(group), loops })
}

/// The restriction of `f₁` to loops at the base objects.
pub fn induced_map_on_aut(f: &InternalFunctor, src: &AutGroup, tgt: &AutGroup) -> Result<Hom> {
    let map = src
        .loops
        .iter()
        .map(|&x| {
            tgt.position(f.f1[x])
                .ok_or_else(|| Error::RestrictionEscapes(format!("loop {x} maps to non-loop {}", f.f1[x])))
        })
        .collect::<Result<Vec<_>>>()?;
    Hom::new(src.group.clone(), tgt.group.clone(), map).map_err(|err| Error::RestrictionEscapes(format!("{err}")))
}

/// Whether `f` and `g` (between the same groupoids) send loops identically.
pub fn same_on_aut(f: &InternalFunctor, g: &InternalFunctor, src: &AutGroup) -> bool {
    src.loops.iter().all(|&x| f.f1[x] == g.f1[x])
}
