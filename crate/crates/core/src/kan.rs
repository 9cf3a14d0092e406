//! Finite verification of the Kan-extension property of `κ: π₁(cod −) ⇒
//! Gal(−, 0)` and of `δ = ι∘κ` into the kernel functor.
//!
//! A scenario is a finite diagram of bases (each with a certified cover),
//! base morphisms, normal extensions and squares between them, together
//! with a test functor `F` on the bases and components `γ_p`. Validation
//! checks functoriality of `F` and naturality of `γ` on every listed square
//! before any verdict is computed.

use alloc::{format, string::String, vec, vec::Vec};

use crate::error::{Error, Result};
use crate::galgroup::{
    baer_check, galois_group, kappa, pi1_morphism, verify_weakly_universal, GaloisGroupResult, WeaklyUniversalCert,
};
use crate::galois::central_reflection;
use crate::group::{abelianization, same_group, Extension, GroupRef, Hom};
use crate::search::{enumerate_homs, Constraint};

/// The functor the components `γ_p` land in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GammaTarget {
    /// `γ_p: F(B) → Gal(p, 0)`, represented on `Ker(p) ∩ Ker(η_E)`.
    Gal,
    /// `γ_p: F(B) → Ker(p)`, represented as a map into `E`.
    Ker,
}

#[derive(Clone, Debug)]
pub struct Base {
    pub name: String,
    pub group: GroupRef,
    /// Index of the certified cover among the extensions.
    pub cover: usize,
    /// Extensions the cover is certified against.
    pub family: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct BaseMorphism {
    pub name: String,
    pub src: usize,
    pub tgt: usize,
    pub hom: Hom,
}

#[derive(Clone, Debug)]
pub struct ScenarioExtension {
    pub name: String,
    pub base: usize,
    pub ext: Extension,
}

/// A morphism `(f, b)` of extensions; `b = None` is the identity of the
/// common base.
#[derive(Clone, Debug)]
pub struct Square {
    pub name: String,
    pub src: usize,
    pub tgt: usize,
    pub f: Hom,
    pub b: Option<usize>,
}

/// Everything except the components `γ`.
#[derive(Clone, Debug)]
pub struct Diagram {
    pub bases: Vec<Base>,
    pub morphisms: Vec<BaseMorphism>,
    pub extensions: Vec<ScenarioExtension>,
    pub squares: Vec<Square>,
    pub target: GammaTarget,
    /// `F(B_i)`.
    pub functor_values: Vec<GroupRef>,
    /// `F(b)` for each base morphism.
    pub functor_maps: Vec<Hom>,
}

impl Diagram {
    pub fn empty(target: GammaTarget) -> Diagram {
        Diagram {
            bases: Vec::new(),
            morphisms: Vec::new(),
            extensions: Vec::new(),
            squares: Vec::new(),
            target,
            functor_values: Vec::new(),
            functor_maps: Vec::new(),
        }
    }
}

fn schema(msg: impl Into<String>) -> Error {
    Error::SchemaError(msg.into())
}

/// A diagram with Galois groups, certificates, `κ` components and `π₁` on
/// base morphisms computed. For the kernel target the diagram is first
/// augmented with a base `0`, morphisms `B → 0`, extensions `IE → 0` and
/// `0 → 0`, and the squares `(η_E, B → 0)` and `(0 → IE, 1_0)`; these are
/// the morphisms the factorisation through `ι` rests on.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub diagram: Diagram,
    /// Extensions at or after this index are auxiliary.
    pub user_extensions: usize,
    pub gals: Vec<GaloisGroupResult>,
    pub certs: Vec<WeaklyUniversalCert>,
    pub kappas: Vec<Hom>,
    pub pi1_maps: Vec<Hom>,
    pub budget: u64,
}

fn check_indices(d: &Diagram) -> Result<()> {
    let (nb, nm, ne) = (d.bases.len(), d.morphisms.len(), d.extensions.len());
    if d.functor_values.len() != nb || d.functor_maps.len() != nm {
        return Err(schema("test functor must have one value per base and one map per base morphism"));
    }
    for (i, b) in d.bases.iter().enumerate() {
        if b.cover >= ne || b.family.iter().any(|&j| j >= ne) {
            return Err(schema(format!("base {}: extension index out of range", b.name)));
        }
        if d.extensions[b.cover].base != i {
            return Err(schema(format!("base {}: cover lies over another base", b.name)));
        }
    }
    for m in &d.morphisms {
        if m.src >= nb || m.tgt >= nb {
            return Err(schema(format!("morphism {}: base index out of range", m.name)));
        }
        if !same_group(m.hom.dom(), &d.bases[m.src].group) || !same_group(m.hom.cod(), &d.bases[m.tgt].group) {
            return Err(schema(format!("morphism {}: hom does not match its bases", m.name)));
        }
    }
    for e in &d.extensions {
        if e.base >= nb || !same_group(e.ext.cod(), &d.bases[e.base].group) {
            return Err(schema(format!("extension {}: codomain is not its base", e.name)));
        }
    }
    for s in &d.squares {
        if s.src >= ne || s.tgt >= ne || s.b.is_some_and(|b| b >= nm) {
            return Err(schema(format!("square {}: index out of range", s.name)));
        }
        let (ps, pt) = (d.extensions[s.src].base, d.extensions[s.tgt].base);
        let ok = match s.b {
            None => ps == pt,
            Some(b) => d.morphisms[b].src == ps && d.morphisms[b].tgt == pt,
        };
        if !ok {
            return Err(schema(format!("square {}: base morphism does not connect the bases", s.name)));
        }
    }
    Ok(())
}

fn augment_for_kernel(d: &mut Diagram) {
    let zero = crate::fixtures::trivial();
    let z = d.bases.len();
    let ne = d.extensions.len();
    let nb = d.bases.len();
    let id0 = d.extensions.len() + ne;
    d.bases.push(Base { name: "0".into(), group: zero.clone(), cover: id0, family: vec![id0] });
    d.functor_values.push(zero.clone());
    let mut to_zero = Vec::with_capacity(nb);
    for i in 0..nb {
        to_zero.push(d.morphisms.len());
        let b = &d.bases[i];
        d.morphisms.push(BaseMorphism {
            name: format!("{}->0", b.name),
            src: i,
            tgt: z,
            hom: Hom::zero(&b.group, &zero),
        });
        d.functor_maps.push(Hom::zero(&d.functor_values[i], &zero));
    }
    let mut aux = Vec::with_capacity(ne);
    for j in 0..ne {
        let e = &d.extensions[j];
        let (ie, eta) = abelianization(e.ext.dom());
        let to0 = Extension::new(Hom::zero(&ie, &zero)).expect("maps onto the trivial group are surjective");
        aux.push((e.name.clone(), e.base, eta, to0));
    }
    let first = d.extensions.len();
    for (name, _, _, to0) in &aux {
        d.extensions.push(ScenarioExtension { name: format!("I({name})->0"), base: z, ext: to0.clone() });
    }
    d.extensions.push(ScenarioExtension { name: "0->0".into(), base: z, ext: Extension::identity(&zero) });
    for (k, (name, base, eta, to0)) in aux.into_iter().enumerate() {
        d.squares.push(Square {
            name: format!("(eta, B->0): {name} -> I({name})->0"),
            src: k,
            tgt: first + k,
            f: eta,
            b: Some(to_zero[base]),
        });
        d.squares.push(Square {
            name: format!("(0->I, 1): 0->0 -> I({name})->0"),
            src: id0,
            tgt: first + k,
            f: Hom::zero(&zero, to0.dom()),
            b: None,
        });
    }
}

impl Prepared {
    pub fn new(mut diagram: Diagram, budget: u64) -> Result<Prepared> {
        check_indices(&diagram)?;
        let user_extensions = diagram.extensions.len();
        if diagram.target == GammaTarget::Ker {
            augment_for_kernel(&mut diagram);
        }
        let gals = diagram
            .extensions
            .iter()
            .map(|e| galois_group(&e.ext))
            .collect::<Result<Vec<_>>>()?;
        let certs = diagram
            .bases
            .iter()
            .map(|b| {
                let family: Vec<Extension> = b.family.iter().map(|&j| diagram.extensions[j].ext.clone()).collect();
                verify_weakly_universal(&diagram.extensions[b.cover].ext, &family, budget)
            })
            .collect::<Result<Vec<_>>>()?;
        let kappas = diagram
            .extensions
            .iter()
            .enumerate()
            .map(|(j, e)| kappa(&gals[j], &gals[diagram.bases[e.base].cover], budget))
            .collect::<Result<Vec<_>>>()?;
        let pi1_maps = diagram
            .morphisms
            .iter()
            .map(|m| {
                let (ca, cb) = (diagram.bases[m.src].cover, diagram.bases[m.tgt].cover);
                pi1_morphism(&m.hom, &gals[ca], &gals[cb], budget)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Prepared { diagram, user_extensions, gals, certs, kappas, pi1_maps, budget })
    }

    /// Replaces the test functor by `π₁(−, I)` on the listed bases and
    /// morphisms, so that `κ` itself is a valid `γ`.
    pub fn with_fundamental_group_functor(mut self) -> Prepared {
        self.diagram.functor_values = (0..self.diagram.bases.len()).map(|i| self.pi1(i).group.clone()).collect();
        self.diagram.functor_maps = self.pi1_maps.clone();
        self
    }

    pub fn pi1(&self, base: usize) -> &GaloisGroupResult {
        &self.gals[self.diagram.bases[base].cover]
    }

    /// `δ_p = ι∘κ_p` as a map `π₁(B) → E`.
    pub fn delta(&self, ext: usize) -> Hom {
        self.kappas[ext].then(&self.gals[ext].inclusion).expect("κ lands in Gal(p, 0)")
    }

    /// The components determined by a map `θ: F(B) → π₁(B)` for each base:
    /// `κ_p∘θ_B`, or `δ_p∘θ_B` for the kernel target. Only the user
    /// extensions are returned.
    pub fn induced_gamma(&self, theta: &[Hom]) -> Result<Vec<Hom>> {
        (0..self.user_extensions)
            .map(|j| {
                let base = self.diagram.extensions[j].base;
                let through = match self.diagram.target {
                    GammaTarget::Gal => self.kappas[j].clone(),
                    GammaTarget::Ker => self.delta(j),
                };
                theta[base].then(&through)
            })
            .collect()
    }

    /// Codomain of `γ_p`.
    pub fn gamma_cod(&self, ext: usize) -> &GroupRef {
        match self.diagram.target {
            GammaTarget::Gal => &self.gals[ext].group,
            GammaTarget::Ker => self.diagram.extensions[ext].ext.dom(),
        }
    }

    fn functor_map(&self, b: Option<usize>, ext: usize) -> Hom {
        match b {
            Some(b) => self.diagram.functor_maps[b].clone(),
            None => Hom::identity(&self.diagram.functor_values[self.diagram.extensions[ext].base]),
        }
    }

    fn base_hom(&self, b: Option<usize>, ext: usize) -> Hom {
        match b {
            Some(b) => self.diagram.morphisms[b].hom.clone(),
            None => Hom::identity(&self.diagram.bases[self.diagram.extensions[ext].base].group),
        }
    }
}

fn violation(square: &str, detail: String) -> Error {
    Error::NaturalityViolation { square: square.into(), detail }
}

fn first_difference(a: &Hom, b: &Hom) -> Option<usize> {
    (0..a.dom().order()).find(|&x| a.apply(x) != b.apply(x))
}

/// A prepared diagram with components `γ` that passed validation.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub prepared: Prepared,
    /// One component per extension, auxiliary ones included.
    pub gamma: Vec<Hom>,
}

impl Scenario {
    /// Checks functoriality of `F` and naturality of `γ` on every square.
    /// `gamma` covers the user extensions; auxiliary components are zero.
    pub fn validate(prepared: Prepared, mut gamma: Vec<Hom>) -> Result<Scenario> {
        let d = &prepared.diagram;
        if gamma.len() != prepared.user_extensions {
            return Err(schema(format!("expected {} components, got {}", prepared.user_extensions, gamma.len())));
        }
        for j in prepared.user_extensions..d.extensions.len() {
            gamma.push(Hom::zero(&d.functor_values[d.extensions[j].base], prepared.gamma_cod(j)));
        }
        for (j, g) in gamma.iter().enumerate() {
            let e = &d.extensions[j];
            if !same_group(g.dom(), &d.functor_values[e.base]) || !same_group(g.cod(), prepared.gamma_cod(j)) {
                return Err(schema(format!("component for {} has the wrong domain or codomain", e.name)));
            }
            if d.target == GammaTarget::Ker {
                if let Some(x) = (0..g.dom().order()).find(|&x| !e.ext.kernel().contains(g.apply(x))) {
                    return Err(schema(format!("component for {} leaves Ker at {x}", e.name)));
                }
            }
        }
        check_functoriality(d)?;
        for s in &d.squares {
            let (p, q) = (&d.extensions[s.src].ext, &d.extensions[s.tgt].ext);
            let b = prepared.base_hom(s.b, s.src);
            if let Some(x) = (0..p.dom().order()).find(|&x| q.hom().apply(s.f.apply(x)) != b.apply(p.hom().apply(x))) {
                return Err(Error::SquareDoesNotCommute(format!("{} at element {x}", s.name)));
            }
            let lhs = match d.target {
                GammaTarget::Gal => {
                    let g = crate::galgroup::gal_on_morphism(&prepared.gals[s.src], &prepared.gals[s.tgt], &s.f, &b)?;
                    gamma[s.src].then(&g)?
                }
                GammaTarget::Ker => gamma[s.src].then(&s.f)?,
            };
            let rhs = prepared.functor_map(s.b, s.src).then(&gamma[s.tgt])?;
            if let Some(x) = first_difference(&lhs, &rhs) {
                return Err(violation(
                    &s.name,
                    format!("components disagree at {x}: {} vs {}", lhs.apply(x), rhs.apply(x)),
                ));
            }
        }
        Ok(Scenario { prepared, gamma })
    }

    pub fn diagram(&self) -> &Diagram {
        &self.prepared.diagram
    }
}

fn check_functoriality(d: &Diagram) -> Result<()> {
    for (i, m) in d.morphisms.iter().enumerate() {
        let fm = &d.functor_maps[i];
        if !same_group(fm.dom(), &d.functor_values[m.src]) || !same_group(fm.cod(), &d.functor_values[m.tgt]) {
            return Err(schema(format!("F({}) has the wrong domain or codomain", m.name)));
        }
        if m.src == m.tgt && m.hom == Hom::identity(&d.bases[m.src].group) && *fm != Hom::identity(fm.dom()) {
            return Err(violation(&m.name, "F does not preserve the identity".into()));
        }
    }
    for (i, a) in d.morphisms.iter().enumerate() {
        for (j, b) in d.morphisms.iter().enumerate() {
            if a.tgt != b.src {
                continue;
            }
            let composite = a.hom.then(&b.hom)?;
            for (k, c) in d.morphisms.iter().enumerate() {
                if c.src == a.src && c.tgt == b.tgt && c.hom == composite {
                    let fc = d.functor_maps[i].then(&d.functor_maps[j])?;
                    if fc != d.functor_maps[k] {
                        return Err(violation(&c.name, format!("F does not preserve {} ∘ {}", b.name, a.name)));
                    }
                }
            }
        }
    }
    Ok(())
}

/// The outcome of a Kan check; `witnesses` names every failing diagram.
#[derive(Clone, Debug)]
pub struct KanVerdict {
    /// `α_B: F(B) → π₁(B)`.
    pub alpha: Vec<Hom>,
    pub baer_ok: bool,
    pub naturality_ok: bool,
    pub factorization_ok: bool,
    pub uniqueness_ok: bool,
    pub witnesses: Vec<String>,
}

impl KanVerdict {
    pub fn passed(&self) -> bool {
        self.baer_ok && self.naturality_ok && self.factorization_ok && self.uniqueness_ok
    }
}

/// Lifts of the kernel-valued components through `ι` and the elements
/// where `η_E∘ker(p)∘γ_p` is nonzero.
#[derive(Clone, Debug)]
pub struct IotaReport {
    /// `γ'_p: F(B) → Gal(p, 0)` with `ι∘γ'_p = γ_p`, where it exists.
    pub lifts: Vec<Option<Hom>>,
    /// `(extension name, element of F(B))`.
    pub violations: Vec<(String, usize)>,
}

impl IotaReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// For a kernel-valued scenario, checks `η_E∘γ_p = 0` element-wise and
/// factors each `γ_p` through `Ker(p) ∩ Ker(η_E)`.
pub fn check_iota_factorization(s: &Scenario) -> Result<IotaReport> {
    let p = &s.prepared;
    if p.diagram.target != GammaTarget::Ker {
        return Err(schema("ι-factorisation applies to kernel-valued scenarios"));
    }
    let mut lifts = Vec::with_capacity(s.gamma.len());
    let mut violations = Vec::new();
    for (j, g) in s.gamma.iter().enumerate() {
        let e = &p.diagram.extensions[j];
        let (_, eta) = abelianization(e.ext.dom());
        let bad: Vec<usize> = (0..g.dom().order()).filter(|&x| eta.apply(g.apply(x)) != 0).collect();
        if let Some(&x) = bad.first() {
            violations.push((e.name.clone(), x));
            lifts.push(None);
            continue;
        }
        let inter = p.gals[j].via_intersection.elements();
        let map = (0..g.dom().order())
            .map(|x| inter.binary_search(&g.apply(x)).expect("η_E∘γ = 0 and γ lands in Ker"))
            .collect();
        lifts.push(Some(Hom::new(g.dom().clone(), p.gals[j].group.clone(), map)?));
    }
    Ok(IotaReport { lifts, violations })
}

/// Sets `α_B = γ_{u_B}` (through `ι` for the kernel target) and checks
/// Baer invariance at each cover, naturality of `α`, `κ_p∘α_B = γ_p` for
/// every extension, and uniqueness via `κ_u` being invertible with
/// `α_B = κ_u⁻¹∘γ_u`.
pub fn check_kappa_kan(s: &Scenario) -> Result<KanVerdict> {
    let p = &s.prepared;
    let d = &p.diagram;
    let mut witnesses = Vec::new();

    let mut baer_ok = true;
    for (i, b) in d.bases.iter().enumerate() {
        let pi = p.pi1(i);
        let report = baer_check(pi, pi, &Hom::identity(&b.group), p.budget)?;
        if !report.holds() {
            baer_ok = false;
            witnesses.push(format!("Baer invariance fails at the cover of {}", b.name));
        }
    }

    // Components into Gal(−, 0).
    let gal_gamma: Vec<Option<Hom>> = match d.target {
        GammaTarget::Gal => s.gamma.iter().cloned().map(Some).collect(),
        GammaTarget::Ker => {
            let report = check_iota_factorization(s)?;
            for (name, x) in &report.violations {
                witnesses.push(format!("{name}: η∘γ is nonzero at {x}"));
            }
            report.lifts
        }
    };

    let mut alpha = Vec::with_capacity(d.bases.len());
    let mut uniqueness_ok = true;
    for (i, b) in d.bases.iter().enumerate() {
        let cover = b.cover;
        let Some(gu) = &gal_gamma[cover] else {
            uniqueness_ok = false;
            alpha.push(Hom::zero(&d.functor_values[i], &p.pi1(i).group));
            witnesses.push(format!("{}: γ at the cover does not factor through ι", b.name));
            continue;
        };
        let a = gu.clone();
        match p.kappas[cover].inverse() {
            Some(inv) if gu.then(&inv)? == a => {}
            Some(_) => {
                uniqueness_ok = false;
                witnesses.push(format!("{}: α differs from κ_u⁻¹∘γ_u", b.name));
            }
            None => {
                uniqueness_ok = false;
                witnesses.push(format!("{}: κ at the cover is not invertible", b.name));
            }
        }
        alpha.push(a);
    }

    let mut naturality_ok = true;
    for (k, m) in d.morphisms.iter().enumerate() {
        let lhs = alpha[m.src].then(&p.pi1_maps[k])?;
        let rhs = d.functor_maps[k].then(&alpha[m.tgt])?;
        if let Some(x) = first_difference(&lhs, &rhs) {
            naturality_ok = false;
            witnesses.push(format!("α is not natural on {} at {x}", m.name));
        }
    }

    let mut factorization_ok = true;
    for (j, e) in d.extensions.iter().enumerate() {
        let through = match d.target {
            GammaTarget::Gal => p.kappas[j].clone(),
            GammaTarget::Ker => p.delta(j),
        };
        let composite = alpha[e.base].then(&through)?;
        if let Some(x) = first_difference(&composite, &s.gamma[j]) {
            factorization_ok = false;
            witnesses.push(format!("lift({} -> {}): κ∘α and γ differ at {x}", d.extensions[d.bases[e.base].cover].name, e.name));
        }
    }

    Ok(KanVerdict { alpha, baer_ok, naturality_ok, factorization_ok, uniqueness_ok, witnesses })
}

/// The `δ_{I₁(p)}` component for an arbitrary extension `p`, computed by
/// lifting the cover into `E` itself and pushing down along
/// `E → E/[K,E]`. When no lifting into `E` exists the cover is lifted into
/// `I₁(p)` directly. Returns `I₁(p)` and `δ: π₁(B) → E/[K,E]`.
pub fn kan_via_reflection(p: &Extension, pi: &GaloisGroupResult, budget: u64) -> Result<(Extension, Hom)> {
    let u = &pi.extension;
    if !same_group(u.cod(), p.cod()) {
        return Err(Error::CodMismatch);
    }
    let (i1, quot) = central_reflection(p);
    let into_e = enumerate_homs(u.dom(), p.dom(), Some(Constraint { post: p.hom(), target: u.hom() }), budget)?;
    let lifts: Vec<Hom> = if into_e.is_empty() {
        enumerate_homs(u.dom(), i1.dom(), Some(Constraint { post: i1.hom(), target: u.hom() }), budget)?
    } else {
        into_e.iter().map(|h| h.then(&quot)).collect::<Result<_>>()?
    };
    let mut delta: Option<Vec<usize>> = None;
    for h in &lifts {
        let map: Vec<usize> = (0..pi.group.order()).map(|k| h.apply(pi.inclusion.apply(k))).collect();
        match &delta {
            None => delta = Some(map),
            Some(prev) if *prev != map => {
                return Err(Error::ComparisonFailure(format!("liftings into {} disagree on π₁", i1.name())))
            }
            Some(_) => {}
        }
    }
    let map = delta.ok_or_else(|| Error::NoLifting(i1.name().into()))?;
    let delta = Hom::new(pi.group.clone(), i1.dom().clone(), map)?;
    if let Some(k) = (0..pi.group.order()).find(|&k| !i1.kernel().contains(delta.apply(k))) {
        return Err(Error::ComparisonFailure(format!("δ leaves Ker(I1) at {k}")));
    }
    Ok((i1, delta))
}
