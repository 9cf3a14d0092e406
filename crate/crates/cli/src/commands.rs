//! One function per subcommand. Each returns the report body and the list
//! of checks; errors returned here are input errors.

use std::collections::BTreeMap;
use std::path::Path;

use catgal_core::galgroup::{baer_check, galois_group, pi1_object, verify_weakly_universal};
use catgal_core::galois::classify;
use catgal_core::graph::{
    deck_group, exact_sequence_check, graph_galois_group, graph_pi1, monodromy, pi0, GraphCover,
};
use catgal_core::homology::{homology, homology_in_mode, Mode};
use catgal_core::kan::{check_iota_factorization, check_kappa_kan, GammaTarget, Scenario};
use catgal_core::{abelian_invariants, abelianization, AbelianInvariants, Config, Error, Extension, GroupRef, Hom};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{input, is_input_error, CliError, CliResult};
use crate::formats::{read_json, Loader, NamedExtensions};
use crate::scenario::parse_scenario;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl Check {
    pub fn pass(name: impl Into<String>) -> Check {
        Check { name: name.into(), passed: true, witness: None }
    }

    pub fn fail(name: impl Into<String>, witness: impl Into<String>) -> Check {
        Check { name: name.into(), passed: false, witness: Some(witness.into()) }
    }

    pub fn new(name: impl Into<String>, passed: bool, witness: impl FnOnce() -> String) -> Check {
        if passed {
            Check::pass(name)
        } else {
            Check::fail(name, witness())
        }
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: Value,
    pub checks: Vec<Check>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphAction {
    Pi1,
    ExactSeq,
    Deck,
    Galois,
    Monodromy,
}

impl GraphAction {
    pub fn name(self) -> &'static str {
        match self {
            GraphAction::Pi1 => "pi1",
            GraphAction::ExactSeq => "exactseq",
            GraphAction::Deck => "deck",
            GraphAction::Galois => "galois",
            GraphAction::Monodromy => "monodromy",
        }
    }

    pub fn parse(s: &str) -> Option<GraphAction> {
        [GraphAction::Pi1, GraphAction::ExactSeq, GraphAction::Deck, GraphAction::Galois, GraphAction::Monodromy]
            .into_iter()
            .find(|a| a.name() == s)
    }
}

/// A subcommand applied to one file.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FileCommand {
    Group,
    Ext,
    Gal,
    Pi1,
    Kan,
    H2(Option<Mode>),
    Graph(GraphAction),
}

impl FileCommand {
    pub fn name(self) -> String {
        match self {
            FileCommand::Group => "group".into(),
            FileCommand::Ext => "ext".into(),
            FileCommand::Gal => "gal".into(),
            FileCommand::Pi1 => "pi1".into(),
            FileCommand::Kan => "kan".into(),
            FileCommand::H2(_) => "h2".into(),
            FileCommand::Graph(a) => format!("graph {}", a.name()),
        }
    }

    pub fn parse(s: &str) -> Option<FileCommand> {
        Some(match s {
            "group" => FileCommand::Group,
            "ext" => FileCommand::Ext,
            "gal" => FileCommand::Gal,
            "pi1" => FileCommand::Pi1,
            "kan" => FileCommand::Kan,
            "h2" => FileCommand::H2(None),
            _ => FileCommand::Graph(GraphAction::parse(s.strip_prefix("graph ")?)?),
        })
    }
}

/// Runs one command on one file and appends the checks requested by the
/// file's `"expect"` table.
pub fn run_file(cmd: FileCommand, path: &Path, config: Config, timing: bool) -> CliResult<Outcome> {
    let mut out = match cmd {
        FileCommand::Group => group(path, config)?,
        FileCommand::Ext => ext(path, config)?,
        FileCommand::Gal => gal(path, config)?,
        FileCommand::Pi1 => pi1(path, config)?,
        FileCommand::Kan => kan(path, config)?,
        FileCommand::H2(mode) => h2(path, config, mode, timing)?,
        FileCommand::Graph(a) => graph(a, path, config)?,
    };
    let doc = read_json(path)?;
    if let Some(expect) = doc.get("expect").and_then(Value::as_object) {
        for (k, want) in expect {
            if let Some(got) = out.report.get(k) {
                out.checks.push(Check::new(format!("expect {k}"), got == want, || format!("expected {want}, got {got}")));
            }
        }
    }
    Ok(out)
}

fn abelianization_invariants(g: &GroupRef) -> catgal_core::Result<AbelianInvariants> {
    abelian_invariants(&abelianization(g).0)
}

fn engine_check(name: &str, e: Error) -> CliResult<Check> {
    if is_input_error(&e) {
        Err(CliError::Engine(e))
    } else {
        Ok(Check::fail(name, e.to_string()))
    }
}

fn load_group(path: &Path, config: Config) -> CliResult<GroupRef> {
    let doc = read_json(path)?;
    let mut loader = Loader::new(config, path);
    loader.register_groups(&doc)?;
    loader.group(&doc)
}

pub fn group(path: &Path, config: Config) -> CliResult<Outcome> {
    let g = load_group(path, config)?;
    let report = json!({
        "name": g.name(),
        "order": g.order(),
        "abelian": g.is_abelian(),
        "abelianization": abelianization_invariants(&g)?.factors(),
        "generators": g.generators().len(),
    });
    let axioms = match g.verify_axioms() {
        Ok(()) => Check::pass("group axioms"),
        Err(e) => Check::fail("group axioms", e.to_string()),
    };
    Ok(Outcome { report, checks: vec![axioms] })
}

fn load_extension(path: &Path, config: Config) -> CliResult<Extension> {
    let doc = read_json(path)?;
    let mut loader = Loader::new(config, path);
    loader.register_groups(&doc)?;
    let (e, _) = loader.extension(&doc, None, &NamedExtensions::default(), &BTreeMap::new())?;
    Ok(match doc.get("name").and_then(Value::as_str) {
        Some(_) => e,
        None => {
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("p").to_string();
            e.with_name(stem)
        }
    })
}

fn classification_json(p: &Extension) -> Value {
    let c = classify(p);
    json!({
        "extension": p.name(),
        "fibration": c.is_fibration,
        "trivial_covering": c.is_trivial_covering,
        "central": c.is_central,
        "normal": c.is_normal,
    })
}

pub fn ext(path: &Path, config: Config) -> CliResult<Outcome> {
    let p = load_extension(path, config)?;
    let c = classify(&p);
    let check = Check::new("central iff normal", c.is_central == c.is_normal, || {
        format!("central = {}, normal = {}", c.is_central, c.is_normal)
    });
    Ok(Outcome { report: classification_json(&p), checks: vec![check] })
}

pub fn gal(path: &Path, config: Config) -> CliResult<Outcome> {
    let p = load_extension(path, config)?;
    let mut report = classification_json(&p);
    let mut checks = Vec::new();
    match galois_group(&p) {
        Ok(r) => {
            checks.push(Check::pass("normal extension"));
            let bijective = r.comparison.is_injective() && r.comparison.is_surjective();
            checks.push(Check::new("groupoid and intersection routes agree", bijective, || {
                "comparison is not bijective".into()
            }));
            report["invariants"] = json!(r.invariants().factors());
            report["order"] = json!(r.order());
            report["paths_agree"] = json!(bijective);
            match baer_check(&r, &r, &Hom::identity(p.cod()), config.hom_budget) {
                Ok(b) => {
                    report["baer"] = json!({"liftings": b.liftings, "distinct_maps": b.distinct_maps});
                    checks.push(Check::new("Baer invariance over the identity", b.holds(), || {
                        format!("{} liftings induce {} distinct maps", b.liftings, b.distinct_maps)
                    }));
                }
                Err(e) => checks.push(engine_check("Baer invariance over the identity", e)?),
            }
        }
        Err(Error::NotNormalExtension(w)) => checks.push(Check::fail("normal extension", w)),
        Err(e) => checks.push(engine_check("groupoid and intersection routes agree", e)?),
    }
    Ok(Outcome { report, checks })
}

pub fn pi1(path: &Path, config: Config) -> CliResult<Outcome> {
    let doc = read_json(path)?;
    let mut loader = Loader::new(config, path);
    loader.register_groups(&doc)?;
    let base = loader.group(doc.get("base").ok_or_else(|| input("pi1: missing \"base\""))?)?;
    let mut named = NamedExtensions::default();
    let none = BTreeMap::new();
    if let Some(list) = doc.get("extensions") {
        for e in list.as_array().ok_or_else(|| input("\"extensions\" must be a list"))? {
            let name = e.get("name").and_then(Value::as_str).ok_or_else(|| input("extension: missing \"name\""))?;
            let (x, proj) = loader.extension(e, Some(&base), &named, &none)?;
            named.insert(name.to_string(), x, proj)?;
        }
    }
    let mut resolve = |v: &Value, fallback: &str| -> CliResult<Extension> {
        let (e, _) = loader.extension(v, Some(&base), &named, &none)?;
        Ok(if v.is_string() || v.get("name").is_some() { e } else { e.with_name(fallback) })
    };
    let u = resolve(doc.get("cover").ok_or_else(|| input("pi1: missing \"cover\""))?, "cover")?;
    let family = match doc.get("family") {
        Some(Value::Array(f)) => {
            f.iter().enumerate().map(|(i, v)| resolve(v, &format!("member {i}"))).collect::<CliResult<Vec<_>>>()?
        }
        None => vec![u.clone()],
        Some(_) => return Err(input("pi1: \"family\" must be a list")),
    };
    let mut report = json!({
        "base": base.name(),
        "cover": u.name(),
        "family": family.iter().map(|e| e.name()).collect::<Vec<_>>(),
    });
    let mut checks = Vec::new();
    let pi = match verify_weakly_universal(&u, &family, config.hom_budget) {
        Ok(cert) => {
            checks.push(Check::pass("weak universality certificate"));
            report["stem"] = json!(cert.stem);
            match pi1_object(&base, Some(&cert)) {
                Ok(pi) => Some(pi),
                Err(e) => {
                    checks.push(engine_check("fundamental group", e)?);
                    None
                }
            }
        }
        Err(e) => {
            checks.push(engine_check("weak universality certificate", e)?);
            None
        }
    };
    if let Some(pi) = &pi {
        report["pi1_invariants"] = json!(pi.invariants().factors());
    }
    if doc.get("compare_h2").and_then(Value::as_bool).unwrap_or(false) {
        let h = homology(&base, 2, &config)?;
        report["H2"] = json!(h.invariants.factors());
        report["h2_mode"] = json!(mode_name(h.mode));
        if let Some(pi) = &pi {
            let same = pi.invariants() == h.invariants;
            checks.push(Check::new("pi1 agrees with H2", same, || {
                format!("pi1 {} vs H2 {}", pi.invariants(), h.invariants)
            }));
        }
    }
    Ok(Outcome { report, checks })
}

fn map_json(h: &Hom) -> Value {
    json!(h.map())
}

pub fn kan(path: &Path, config: Config) -> CliResult<Outcome> {
    let mut file = parse_scenario(path, config)?;
    let target = file.diagram.target;
    let mut report = json!({
        "target": if target == GammaTarget::Gal { "gal" } else { "ker" },
        "bases": file.base_names(),
        "extensions": file.ext_names(),
    });
    let mut checks = Vec::new();
    let prepared = match file.prepare() {
        Ok(p) => {
            checks.push(Check::pass("Galois groups and certificates"));
            p
        }
        Err(e) => {
            checks.push(engine_check("Galois groups and certificates", e)?);
            return Ok(Outcome { report, checks });
        }
    };
    report["pi1"] = json!(file
        .base_names()
        .iter()
        .enumerate()
        .map(|(i, name)| json!({
            "base": name,
            "pi1_invariants": prepared.pi1(i).invariants().factors(),
            "stem": prepared.certs[i].stem,
        }))
        .collect::<Vec<_>>());
    let gamma = file.gamma(&prepared)?;
    let scenario = match Scenario::validate(prepared, gamma) {
        Ok(s) => {
            checks.push(Check::pass("test functor and gamma natural"));
            s
        }
        Err(Error::NaturalityViolation { square, detail }) => {
            report["witness_square"] = json!(square);
            checks.push(Check::fail("test functor and gamma natural", format!("{square}: {detail}")));
            return Ok(Outcome { report, checks });
        }
        Err(e) => return Err(CliError::Engine(e)),
    };
    match check_kappa_kan(&scenario) {
        Ok(v) => {
            let n = file.base_names().len();
            report["alpha"] = json!(v.alpha[..n]
                .iter()
                .zip(file.base_names())
                .map(|(a, b)| json!({"base": b, "map": map_json(a)}))
                .collect::<Vec<_>>());
            report["witnesses"] = json!(v.witnesses);
            for (name, ok) in [
                ("Baer invariance", v.baer_ok),
                ("alpha natural", v.naturality_ok),
                ("factorization", v.factorization_ok),
                ("uniqueness", v.uniqueness_ok),
            ] {
                checks.push(Check::new(name, ok, || v.witnesses.join("; ")));
            }
        }
        Err(e) => checks.push(engine_check("Kan verdict", e)?),
    }
    if target == GammaTarget::Ker {
        match check_iota_factorization(&scenario) {
            Ok(r) => {
                report["iota_violations"] = json!(r.violations);
                checks.push(Check::new("iota factorization", r.passed(), || format!("{:?}", r.violations)));
            }
            Err(e) => checks.push(engine_check("iota factorization", e)?),
        }
    }
    Ok(Outcome { report, checks })
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Dense => "dense",
        Mode::Local => "local",
    }
}

pub fn h2(path: &Path, config: Config, mode: Option<Mode>, timing: bool) -> CliResult<Outcome> {
    let g = load_group(path, config)?;
    let start = std::time::Instant::now();
    let h1 = homology(&g, 1, &config)?;
    let h2 = match mode {
        Some(m) => homology_in_mode(&g, 2, m, &config)?,
        None => homology(&g, 2, &config)?,
    };
    let ms = start.elapsed().as_millis() as u64;
    let ab = abelianization_invariants(&g)?;
    let mut report = json!({
        "group": g.name(),
        "H1": h1.invariants.factors(),
        "H2": h2.invariants.factors(),
        "dims": {"C0": h2.dims[0], "C1": h2.dims[1], "C2": h2.dims[2], "C3": h2.dims[3]},
        "mode": mode_name(h2.mode),
    });
    if h2.mode == Mode::Local {
        report["local_factors"] = json!(h2.local_factors);
    }
    if timing {
        report["ms"] = json!(ms);
    }
    let check = Check::new("H1 equals the abelianization", h1.invariants == ab, || {
        format!("H1 {} vs abelianization {}", h1.invariants, ab)
    });
    Ok(Outcome { report, checks: vec![check] })
}

fn load_cover(path: &Path, config: Config) -> CliResult<GraphCover> {
    let doc = read_json(path)?;
    Loader::new(config, path).cover(&doc)
}

pub fn graph(action: GraphAction, path: &Path, config: Config) -> CliResult<Outcome> {
    if action == GraphAction::Pi1 {
        let doc = read_json(path)?;
        let g = Loader::new(config, path).graph(&doc)?;
        let comps = pi0(&g);
        let mut report = json!({"vertices": g.vertices(), "edges": g.edge_count(), "components": comps.count});
        let check = match graph_pi1(&g) {
            Ok(pi) => {
                report["rank"] = json!(pi.rank);
                report["generators"] = json!(pi.generators);
                Check::pass("connected")
            }
            Err(e) => engine_check("connected", e)?,
        };
        return Ok(Outcome { report, checks: vec![check] });
    }
    let c = load_cover(path, config)?;
    let mut report = json!({
        "sheets": c.sheets(),
        "total_components": pi0(c.total()).count,
    });
    let mut checks = Vec::new();
    match action {
        GraphAction::ExactSeq => {
            let r = exact_sequence_check(&c, config.max_word_len)?;
            report["base_rank"] = json!(r.base_rank);
            report["total_rank"] = json!(r.total_rank);
            report["max_word_len"] = json!(r.max_word_len);
            report["delta_image"] = json!(r.delta_image);
            let verified = |exact: bool| if exact { "exact".to_string() } else { format!("up to L={}", r.max_word_len) };
            report["positions"] = json!(r
                .positions
                .iter()
                .map(|p| json!({"name": p.name, "passed": p.passed, "verified": verified(p.exact), "checked": p.checked}))
                .collect::<Vec<_>>());
            for p in &r.positions {
                let name = format!("{} ({})", p.name, verified(p.exact));
                checks.push(Check::new(name, p.passed, || p.witness.clone().unwrap_or_default()));
            }
            if let Some(n) = c.sheets() {
                if pi0(c.total()).count == 1 {
                    let expected = n as i64 * (r.base_rank as i64 - 1) + 1;
                    checks.push(Check::new("Nielsen-Schreier rank", r.total_rank as i64 == expected, || {
                        format!("rank {} vs {expected}", r.total_rank)
                    }));
                }
            }
        }
        GraphAction::Deck => match deck_group(&c) {
            Ok(d) => {
                report["order"] = json!(d.order());
                report["regular"] = json!(d.is_regular);
                report["vertex_maps"] = json!(d.vertex_maps);
                checks.push(Check::pass("deck group"));
            }
            Err(e) => checks.push(engine_check("deck group", e)?),
        },
        GraphAction::Galois => match graph_galois_group(&c) {
            Ok(g) => {
                report["order"] = json!(g.order());
                report["deck_order"] = json!(g.deck.order());
                report["fiber"] = json!(g.fiber);
                checks.push(Check::new("Galois group order equals deck group order", g.order() == g.deck.order(), || {
                    format!("{} vs {}", g.order(), g.deck.order())
                }));
            }
            Err(e) => checks.push(engine_check("Galois group order equals deck group order", e)?),
        },
        GraphAction::Monodromy => {
            let pi = graph_pi1(c.base())?;
            let m = monodromy(&c, &pi);
            report["fiber"] = json!(m.fiber);
            report["permutations"] = json!(m.perms);
            checks.push(Check::pass("monodromy"));
        }
        GraphAction::Pi1 => unreachable!("handled above"),
    }
    Ok(Outcome { report, checks })
}

/// The command a suite runs on a file: its `"kind"` if present, otherwise
/// guessed from its top-level keys.
pub fn infer_commands(doc: &Value) -> Option<Vec<FileCommand>> {
    match doc.get("kind") {
        Some(Value::String(k)) => return FileCommand::parse(k).map(|c| vec![c]),
        Some(Value::Array(ks)) => {
            return ks.iter().map(|k| k.as_str().and_then(FileCommand::parse)).collect();
        }
        Some(_) => return None,
        None => {}
    }
    let has = |k: &str| doc.get(k).is_some();
    let cmd = if has("bases") {
        FileCommand::Kan
    } else if has("total") || has("permutations") {
        FileCommand::Graph(GraphAction::ExactSeq)
    } else if has("vertices") {
        FileCommand::Graph(GraphAction::Pi1)
    } else if has("cover") && has("base") {
        FileCommand::Pi1
    } else if has("dom") || has("product_with") || has("kernel_pair_of") || has("central_reflection_of") {
        FileCommand::Gal
    } else if has("table") || has("generators") || has("builtin") || has("product") || has("file") {
        FileCommand::Group
    } else {
        return None;
    };
    Some(vec![cmd])
}
