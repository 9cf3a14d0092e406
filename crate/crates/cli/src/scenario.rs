//! Scenario files: a finite diagram of bases, extensions and squares, a
//! test functor and the components `γ` to be checked.

use std::collections::BTreeMap;
use std::path::Path;

use catgal_core::kan::{Base, BaseMorphism, Diagram, GammaTarget, Prepared, Scenario, ScenarioExtension, Square};
use catgal_core::search::{find_hom, Constraint};
use catgal_core::{Config, GroupRef, Hom};
use serde_json::Value;

use crate::error::{input, CliError, CliResult};
use crate::formats::{read_json, Loader, NamedExtensions};

/// A parsed scenario before any Galois group is computed.
pub struct ScenarioFile {
    pub diagram: Diagram,
    pub pi1_functor: bool,
    gamma: Value,
    loader: Loader,
    base_names: Vec<String>,
    ext_names: Vec<String>,
}

fn list<'a>(doc: &'a Value, key: &str) -> CliResult<&'a [Value]> {
    match doc.get(key) {
        None => Ok(&[]),
        Some(Value::Array(a)) => Ok(a),
        Some(_) => Err(input(format!("{key:?} must be a list"))),
    }
}

fn name_of(v: &Value, what: &str) -> CliResult<String> {
    v.get("name").and_then(Value::as_str).map(String::from).ok_or_else(|| input(format!("{what}: missing \"name\"")))
}

fn lookup(names: &[String], key: &Value, what: &str) -> CliResult<usize> {
    let k = key.as_str().ok_or_else(|| input(format!("{what}: expected a name")))?;
    names.iter().position(|n| n == k).ok_or_else(|| input(format!("{what}: unknown name {k:?}")))
}

pub fn parse_scenario(path: &Path, config: Config) -> CliResult<ScenarioFile> {
    let doc = read_json(path)?;
    let mut loader = Loader::new(config, path);
    loader.register_groups(&doc)?;
    let target = match doc.get("target").and_then(Value::as_str).unwrap_or("gal") {
        "gal" => GammaTarget::Gal,
        "ker" => GammaTarget::Ker,
        other => return Err(input(format!("unknown target {other:?}; expected \"gal\" or \"ker\""))),
    };
    let mut d = Diagram::empty(target);

    let raw_bases = list(&doc, "bases")?;
    let mut base_names = Vec::new();
    let mut base_groups: Vec<GroupRef> = Vec::new();
    for b in raw_bases {
        let name = name_of(b, "base")?;
        if base_names.contains(&name) {
            return Err(input(format!("base {name:?} defined twice")));
        }
        base_groups.push(loader.group(b.get("group").unwrap_or(&Value::from(name.clone())))?);
        base_names.push(name);
    }

    let mut morph_names = Vec::new();
    let mut morph_homs = BTreeMap::new();
    for m in list(&doc, "morphisms")? {
        let name = name_of(m, "morphism")?;
        let src = lookup(&base_names, m.get("src").unwrap_or(&Value::Null), &format!("morphism {name}"))?;
        let tgt = lookup(&base_names, m.get("tgt").unwrap_or(&Value::Null), &format!("morphism {name}"))?;
        let hom = loader.hom(m.get("hom").unwrap_or(&Value::from("first_injection")), &base_groups[src], &base_groups[tgt])?;
        morph_homs.insert(name.clone(), hom.clone());
        d.morphisms.push(BaseMorphism { name: name.clone(), src, tgt, hom });
        morph_names.push(name);
    }

    let mut named = NamedExtensions::default();
    for e in list(&doc, "extensions")? {
        let name = name_of(e, "extension")?;
        let base = lookup(&base_names, e.get("base").unwrap_or(&Value::Null), &format!("extension {name}"))?;
        let (ext, proj) = loader.extension(e, Some(&base_groups[base]), &named, &morph_homs)?;
        named.insert(name.clone(), ext, proj)?;
        d.extensions.push(ScenarioExtension { name: name.clone(), base, ext: named.get(&name)?.clone() });
    }
    let ext_names = named.order.clone();

    for (b, name) in raw_bases.iter().zip(&base_names) {
        let what = format!("base {name}");
        let cover = lookup(&ext_names, b.get("cover").unwrap_or(&Value::Null), &what)?;
        let family = match b.get("family") {
            Some(Value::Array(f)) => f.iter().map(|x| lookup(&ext_names, x, &what)).collect::<CliResult<Vec<_>>>()?,
            None => vec![cover],
            Some(_) => return Err(input(format!("{what}: \"family\" must be a list"))),
        };
        let group = base_groups[d.bases.len()].clone();
        d.bases.push(Base { name: name.clone(), group, cover, family });
    }

    for s in list(&doc, "squares")? {
        let name = name_of(s, "square")?;
        let what = format!("square {name}");
        let src = lookup(&ext_names, s.get("src").unwrap_or(&Value::Null), &what)?;
        let tgt = lookup(&ext_names, s.get("tgt").unwrap_or(&Value::Null), &what)?;
        let b = match s.get("b") {
            None | Some(Value::Null) => None,
            Some(m) => Some(lookup(&morph_names, m, &what)?),
        };
        let (ps, pt) = (&d.extensions[src].ext, &d.extensions[tgt].ext);
        let f = match s.get("f").unwrap_or(&Value::from("first_lifting")) {
            Value::String(k) if k == "first_lifting" => {
                let target = match b {
                    Some(b) => ps.hom().then(&d.morphisms[b].hom)?,
                    None => ps.hom().clone(),
                };
                find_hom(ps.dom(), pt.dom(), Some(Constraint { post: pt.hom(), target: &target }), config.hom_budget)?
                    .ok_or_else(|| input(format!("{what}: no lifting exists")))?
            }
            Value::String(k) if k == "pullback_projection" => named
                .projections
                .get(&ext_names[src])
                .cloned()
                .ok_or_else(|| input(format!("{what}: {} is not a pullback", ext_names[src])))?,
            spec => loader.hom(spec, ps.dom(), pt.dom())?,
        };
        d.squares.push(Square { name, src, tgt, f, b });
    }

    let f = doc.get("F").cloned().unwrap_or(Value::from("pi1"));
    let pi1_functor = f.as_str() == Some("pi1");
    if pi1_functor {
        // Placeholders, replaced once π₁ is known.
        let one = catgal_core::fixtures::trivial();
        d.functor_values = vec![one.clone(); d.bases.len()];
        d.functor_maps = d.morphisms.iter().map(|_| Hom::identity(&one)).collect();
    } else {
        let values = field_obj(&f, "values")?;
        for name in &base_names {
            let v = values.get(name).ok_or_else(|| input(format!("F: no value for base {name:?}")))?;
            d.functor_values.push(loader.group(v)?);
        }
        let maps = match f.get("maps") {
            Some(m) => m.as_object().ok_or_else(|| input("F: \"maps\" must be an object"))?.clone(),
            None => Default::default(),
        };
        for m in &d.morphisms {
            let v = maps.get(&m.name).ok_or_else(|| input(format!("F: no map for morphism {:?}", m.name)))?;
            d.functor_maps.push(loader.hom(v, &d.functor_values[m.src], &d.functor_values[m.tgt])?);
        }
    }

    let gamma = doc.get("gamma").cloned().unwrap_or(Value::from("induced"));
    Ok(ScenarioFile { diagram: d, pi1_functor, gamma, loader, base_names, ext_names })
}

fn field_obj<'a>(v: &'a Value, key: &str) -> CliResult<&'a serde_json::Map<String, Value>> {
    v.get(key).and_then(Value::as_object).ok_or_else(|| input(format!("F: expected \"pi1\" or an object with {key:?}")))
}

impl ScenarioFile {
    /// Galois groups, certificates and `κ`; fails on the first extension
    /// that is not normal or the first family member without a lifting.
    pub fn prepare(&self) -> catgal_core::Result<Prepared> {
        let p = Prepared::new(self.diagram.clone(), self.loader.config.hom_budget)?;
        Ok(if self.pi1_functor { p.with_fundamental_group_functor() } else { p })
    }

    pub fn base_names(&self) -> &[String] {
        &self.base_names
    }

    pub fn ext_names(&self) -> &[String] {
        &self.ext_names
    }

    /// The components `γ_p` for the user extensions.
    pub fn gamma(&mut self, p: &Prepared) -> CliResult<Vec<Hom>> {
        let n = p.user_extensions;
        let dom = |j: usize| p.diagram.functor_values[p.diagram.extensions[j].base].clone();
        let spec = self.gamma.clone();
        let theta = |s: &mut ScenarioFile, table: Option<&Value>| -> CliResult<Vec<Hom>> {
            (0..s.base_names.len())
                .map(|i| {
                    let (f, pi) = (&p.diagram.functor_values[i], &p.pi1(i).group);
                    match table.and_then(|t| t.get(&s.base_names[i])) {
                        Some(v) => s.loader.hom(v, f, pi),
                        None if s.pi1_functor => Ok(Hom::identity(f)),
                        None => Err(input(format!("gamma: no theta for base {:?}", s.base_names[i]))),
                    }
                })
                .collect()
        };
        match &spec {
            Value::String(k) if k == "zero" => Ok((0..n).map(|j| Hom::zero(&dom(j), p.gamma_cod(j))).collect()),
            Value::String(k) if k == "induced" => {
                let t = theta(self, None)?;
                Ok(p.induced_gamma(&t)?)
            }
            Value::Object(o) => {
                let mut out: Vec<Option<Hom>> = if o.contains_key("explicit") {
                    vec![None; n]
                } else {
                    let t = theta(self, o.get("theta"))?;
                    p.induced_gamma(&t)?.into_iter().map(Some).collect()
                };
                for key in ["explicit", "override"] {
                    if let Some(table) = o.get(key) {
                        let table = table.as_object().ok_or_else(|| input(format!("gamma: {key:?} must be an object")))?;
                        for (name, v) in table {
                            let j = self.ext_names.iter().position(|e| e == name).ok_or_else(|| {
                                input(format!("gamma: unknown extension {name:?}"))
                            })?;
                            out[j] = Some(self.loader.hom(v, &dom(j), p.gamma_cod(j))?);
                        }
                    }
                }
                out.into_iter()
                    .enumerate()
                    .map(|(j, h)| h.ok_or_else(|| input(format!("gamma: no component for {:?}", self.ext_names[j]))))
                    .collect()
            }
            _ => Err(input("gamma: expected \"zero\", \"induced\" or an object")),
        }
    }
}

/// Parses, prepares and validates a scenario in one step.
pub fn load_scenario(path: &Path, config: Config) -> CliResult<Scenario> {
    let mut file = parse_scenario(path, config)?;
    let p = file.prepare().map_err(CliError::Engine)?;
    let gamma = file.gamma(&p)?;
    Ok(Scenario::validate(p, gamma)?)
}
