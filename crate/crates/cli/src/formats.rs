//! JSON readers for groups, homomorphisms, extensions, graphs and covers.
//! The formats are described in `docs/formats.md`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use catgal_core::galois::{central_reflection, kernel_pair, pullback_extension};
use catgal_core::graph::{cover_from_permutations, graph_pi1, mk_cover, Dart, Graph, GraphCover};
use catgal_core::group::permutation_from_cycles;
use catgal_core::{enumerate_homs, fixtures, Config, Extension, Group, GroupRef, Hom};
use serde::Deserialize;
use serde_json::Value;

use crate::error::{input, CliError, CliResult};

pub fn read_json(path: &Path) -> CliResult<Value> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })?;
    serde_json::from_str(&text).map_err(|source| CliError::Json { path: path.into(), source })
}

fn typed<T: for<'de> Deserialize<'de>>(v: &Value, what: &str) -> CliResult<T> {
    T::deserialize(v).map_err(|e| input(format!("{what}: {e}")))
}

fn field<'a>(v: &'a Value, key: &str, what: &str) -> CliResult<&'a Value> {
    v.get(key).ok_or_else(|| input(format!("{what}: missing field {key:?}")))
}

fn as_str<'a>(v: &'a Value, what: &str) -> CliResult<&'a str> {
    v.as_str().ok_or_else(|| input(format!("{what}: expected a string")))
}

/// Extensions already defined in the current file, by name; a pullback
/// also records its projection onto the domain it was pulled back from.
#[derive(Default)]
pub struct NamedExtensions {
    pub exts: BTreeMap<String, Extension>,
    pub projections: BTreeMap<String, Hom>,
    pub order: Vec<String>,
}

impl NamedExtensions {
    pub fn get(&self, name: &str) -> CliResult<&Extension> {
        self.exts.get(name).ok_or_else(|| input(format!("unknown extension {name:?}")))
    }

    pub fn index(&self, name: &str) -> CliResult<usize> {
        self.order.iter().position(|n| n == name).ok_or_else(|| input(format!("unknown extension {name:?}")))
    }

    pub fn insert(&mut self, name: String, ext: Extension, projection: Option<Hom>) -> CliResult<()> {
        if self.exts.contains_key(&name) {
            return Err(input(format!("extension {name:?} defined twice")));
        }
        if let Some(p) = projection {
            self.projections.insert(name.clone(), p);
        }
        self.exts.insert(name.clone(), ext.with_name(name.clone()));
        self.order.push(name);
        Ok(())
    }
}

/// Resolves group, homomorphism and extension specifications relative to
/// one file. Groups are shared by name so that equal references give the
/// same handle.
pub struct Loader {
    pub config: Config,
    dir: PathBuf,
    cache: BTreeMap<String, GroupRef>,
    pending: BTreeMap<String, Value>,
    resolving: BTreeSet<String>,
}

impl Loader {
    pub fn new(config: Config, file: &Path) -> Loader {
        let dir = file.parent().map(Path::to_path_buf).unwrap_or_default();
        Loader { config, dir, cache: BTreeMap::new(), pending: BTreeMap::new(), resolving: BTreeSet::new() }
    }

    /// Registers a file's `"groups"` table; entries are resolved on first use.
    pub fn register_groups(&mut self, doc: &Value) -> CliResult<()> {
        if let Some(groups) = doc.get("groups") {
            let table = groups.as_object().ok_or_else(|| input("\"groups\" must be an object"))?;
            for (k, v) in table {
                self.pending.insert(k.clone(), v.clone());
            }
        }
        Ok(())
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.dir.join(rel)
    }

    pub fn group(&mut self, v: &Value) -> CliResult<GroupRef> {
        match v {
            Value::String(s) => self.named_group(s),
            Value::Object(_) => self.group_object(v, None),
            _ => Err(input("group: expected a name or an object")),
        }
    }

    fn named_group(&mut self, name: &str) -> CliResult<GroupRef> {
        if let Some(g) = self.cache.get(name) {
            return Ok(g.clone());
        }
        let g = if let Some(spec) = self.pending.get(name).cloned() {
            if !self.resolving.insert(name.to_string()) {
                return Err(input(format!("group {name:?} is defined in terms of itself")));
            }
            let g = self.group_object(&spec, Some(name));
            self.resolving.remove(name);
            g?
        } else if name.ends_with(".json") {
            let path = self.path(name);
            let doc = read_json(&path)?;
            let mut sub = Loader::new(self.config, &path);
            sub.register_groups(&doc)?;
            sub.group_object(&doc, None)?
        } else {
            builtin(name, &self.config)?
        };
        self.cache.insert(name.to_string(), g.clone());
        Ok(g)
    }

    fn group_object(&mut self, v: &Value, key: Option<&str>) -> CliResult<GroupRef> {
        if let Value::String(s) = v {
            return self.named_group(s);
        }
        let name = v.get("name").and_then(Value::as_str).or(key).unwrap_or("G").to_string();
        let g = if let Some(b) = v.get("builtin") {
            let g = builtin(as_str(b, "builtin")?, &self.config)?;
            if v.get("name").is_some() {
                Arc::new((*g).clone().with_name(name))
            } else {
                g
            }
        } else if let Some(file) = v.get("file") {
            self.named_group(as_str(file, "file")?)?
        } else if let Some(table) = v.get("table") {
            let rows: Vec<Vec<usize>> = typed(table, "table")?;
            Arc::new(Group::from_table(name, &rows)?)
        } else if let Some(gens) = v.get("generators") {
            let degree: usize = typed(field(v, "degree", "permutation group")?, "degree")?;
            let cycles: Vec<Vec<Vec<usize>>> = typed(gens, "generators")?;
            let perms = cycles
                .iter()
                .map(|c| permutation_from_cycles(degree, c))
                .collect::<catgal_core::Result<Vec<_>>>()?;
            Arc::new(Group::from_permutations(name, degree, &perms, self.config.max_order)?)
        } else if let Some(factors) = v.get("product") {
            let fs = factors.as_array().filter(|a| a.len() == 2).ok_or_else(|| input("product: expected two groups"))?;
            let (a, c) = (self.group(&fs[0])?, self.group(&fs[1])?);
            let g = fixtures::named_product(&a, &c).group;
            if v.get("name").is_some() || key.is_some() {
                Arc::new((*g).clone().with_name(name))
            } else {
                g
            }
        } else {
            return Err(input("group: expected one of builtin, file, table, generators, product"));
        };
        if let Some(order) = v.get("order") {
            let order: usize = typed(order, "order")?;
            if order != g.order() {
                return Err(input(format!("group {}: declared order {order}, actual {}", g.name(), g.order())));
            }
        }
        Ok(g)
    }

    /// A homomorphism `dom → cod` from a keyword, an explicit `"map"` or the
    /// images of the generators of `dom`.
    pub fn hom(&mut self, v: &Value, dom: &GroupRef, cod: &GroupRef) -> CliResult<Hom> {
        let budget = self.config.hom_budget;
        let first = |pred: &dyn Fn(&Hom) -> bool, what: &str| -> CliResult<Hom> {
            enumerate_homs(dom, cod, None, budget)?
                .into_iter()
                .find(|h| pred(h))
                .ok_or_else(|| input(format!("no {what} {} -> {}", dom.name(), cod.name())))
        };
        match v {
            Value::String(k) => match k.as_str() {
                "identity" => Ok(Hom::new(dom.clone(), cod.clone(), (0..dom.order()).collect())?),
                "zero" => Ok(Hom::zero(dom, cod)),
                "first" => first(&|_| true, "homomorphism"),
                "first_surjection" => first(&Hom::is_surjective, "surjection"),
                "first_injection" => first(&Hom::is_injective, "injection"),
                "first_iso" => first(&|h| h.is_injective() && h.is_surjective(), "isomorphism"),
                other => Err(input(format!("unknown homomorphism keyword {other:?}"))),
            },
            Value::Object(o) if o.contains_key("map") => {
                let map: Vec<usize> = typed(&o["map"], "map")?;
                Ok(Hom::new(dom.clone(), cod.clone(), map)?)
            }
            Value::Object(o) if o.contains_key("generators") => {
                let images: Vec<usize> = typed(&o["generators"], "generators")?;
                from_generator_images(dom, cod, &images)
            }
            _ => Err(input("homomorphism: expected a keyword, {\"map\"} or {\"generators\"}")),
        }
    }

    /// An extension over `cod` (taken from the object's `"cod"` when absent).
    /// `morphisms` names the homomorphisms a pullback may be taken along.
    pub fn extension(
        &mut self,
        v: &Value,
        cod: Option<&GroupRef>,
        named: &NamedExtensions,
        morphisms: &BTreeMap<String, Hom>,
    ) -> CliResult<(Extension, Option<Hom>)> {
        if let Value::String(name) = v {
            return Ok((named.get(name)?.clone(), None));
        }
        let cod = match (v.get("cod"), cod) {
            (Some(c), _) => self.group(c)?,
            (None, Some(c)) => c.clone(),
            (None, None) => match v.get("dom") {
                Some(_) => return Err(input("extension: missing \"cod\"")),
                None => {
                    // Forms built from another extension inherit its base.
                    let of = v
                        .get("of")
                        .or_else(|| v.get("kernel_pair_of"))
                        .or_else(|| v.get("central_reflection_of"))
                        .or_else(|| v.get("pullback").and_then(|p| p.get("of")))
                        .ok_or_else(|| input("extension: missing \"cod\""))?;
                    self.extension(of, None, named, morphisms)?.0.cod().clone()
                }
            },
        };
        let sub = |s: &mut Loader, key: &str| -> CliResult<Extension> {
            match v.get(key) {
                Some(x) => Ok(s.extension(x, Some(&cod), named, morphisms)?.0),
                None => Ok(Extension::identity(&cod)),
            }
        };
        let out = if let Some(dom) = v.get("dom") {
            let dom = self.group(dom)?;
            let hom = self.hom(v.get("hom").unwrap_or(&Value::from("first_surjection")), &dom, &cod)?;
            (Extension::new(hom)?, None)
        } else if v.get("identity").is_some() {
            (Extension::identity(&cod), None)
        } else if let Some(a) = v.get("product_with") {
            let a = self.group(a)?;
            let p = sub(self, "of")?;
            let pr = fixtures::named_product(p.dom(), &a).left;
            (Extension::new(pr.then(p.hom())?)?, None)
        } else if let Some(of) = v.get("kernel_pair_of") {
            let p = self.extension(of, Some(&cod), named, morphisms)?.0;
            (Extension::new(kernel_pair(&p).left.then(p.hom())?)?, None)
        } else if let Some(of) = v.get("central_reflection_of") {
            let p = self.extension(of, Some(&cod), named, morphisms)?.0;
            (central_reflection(&p).0, None)
        } else if let Some(pb) = v.get("pullback") {
            let along = field(pb, "along", "pullback")?;
            let f = match along {
                Value::String(m) => {
                    morphisms.get(m).cloned().ok_or_else(|| input(format!("pullback: unknown morphism {m:?}")))?
                }
                _ => {
                    let dom = self.group(field(along, "dom", "pullback along")?)?;
                    let of = self.extension(field(pb, "of", "pullback")?, None, named, morphisms)?.0;
                    self.hom(field(along, "hom", "pullback along")?, &dom, of.cod())?
                }
            };
            let p = self.extension(field(pb, "of", "pullback")?, Some(f.cod()), named, morphisms)?.0;
            let (e, proj) = pullback_extension(&p, &f)?;
            (e, Some(proj))
        } else {
            return Err(input(
                "extension: expected dom/hom, identity, product_with, kernel_pair_of, central_reflection_of or pullback",
            ));
        };
        let (e, proj) = out;
        let e = match v.get("name").and_then(Value::as_str) {
            Some(n) => e.with_name(n),
            None => e,
        };
        Ok((e, proj))
    }
}

/// Extends images of the generators of `dom` along a breadth-first
/// traversal of its Cayley graph.
fn from_generator_images(dom: &GroupRef, cod: &GroupRef, images: &[usize]) -> CliResult<Hom> {
    let gens = dom.generators();
    if images.len() != gens.len() {
        return Err(input(format!("{} has {} generators, got {} images", dom.name(), gens.len(), images.len())));
    }
    if let Some(&bad) = images.iter().find(|&&y| y >= cod.order()) {
        return Err(input(format!("image {bad} is not an element of {}", cod.name())));
    }
    let mut map = vec![usize::MAX; dom.order()];
    map[0] = 0;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(x) = queue.pop_front() {
        for (&g, &y) in gens.iter().zip(images) {
            let xg = dom.mul(x, g);
            if map[xg] == usize::MAX {
                map[xg] = cod.mul(map[x], y);
                queue.push_back(xg);
            }
        }
    }
    Ok(Hom::new(dom.clone(), cod.clone(), map)?)
}

/// Named groups available without a file.
pub fn builtin(name: &str, config: &Config) -> CliResult<GroupRef> {
    Ok(match name {
        "1" | "trivial" => fixtures::trivial(),
        "V4" => fixtures::v4(),
        "S3" => fixtures::s3(),
        "D4" => fixtures::d4(),
        "Q8" => fixtures::q8(),
        "A4" => fixtures::a4(),
        "S4" => fixtures::s4(),
        "A5" => fixtures::a5(),
        "Dic3" => fixtures::dic3(),
        "SL23" | "SL(2,3)" => fixtures::sl23(),
        "SL25" | "SL(2,5)" => fixtures::sl25(),
        "Z2xZ4" => fixtures::z2xz4(),
        "Z2^3" => fixtures::z2cubed(),
        _ => match name.strip_prefix('Z').and_then(|n| n.parse::<usize>().ok()) {
            Some(n) if n >= 1 && n <= config.max_order => fixtures::cyclic(n),
            Some(n) => return Err(CliError::Engine(catgal_core::Error::OrderBound { bound: config.max_order.min(n) })),
            None => return Err(input(format!("unknown group {name:?}"))),
        },
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DartJson {
    id: usize,
    reverse: usize,
    source: usize,
}

#[derive(Deserialize)]
struct GraphJson {
    vertices: usize,
    #[serde(default)]
    darts: Option<Vec<DartJson>>,
    #[serde(default)]
    edges: Option<Vec<[usize; 2]>>,
    basepoint: usize,
}

pub fn graph_from_json(v: &Value) -> CliResult<Graph> {
    let g: GraphJson = typed(v, "graph")?;
    match (g.darts, g.edges) {
        (Some(mut darts), None) => {
            darts.sort_by_key(|d| d.id);
            if darts.iter().enumerate().any(|(i, d)| d.id != i) {
                return Err(input("graph: dart ids must be 0, 1, …, n-1"));
            }
            let darts = darts.into_iter().map(|d| Dart { reverse: d.reverse, source: d.source }).collect();
            Ok(Graph::new(g.vertices, darts, g.basepoint)?)
        }
        (None, Some(edges)) => {
            let edges: Vec<(usize, usize)> = edges.into_iter().map(|[u, v]| (u, v)).collect();
            Ok(Graph::from_edges(g.vertices, &edges, g.basepoint)?)
        }
        _ => Err(input("graph: give exactly one of \"darts\" and \"edges\"")),
    }
}

pub fn graph_to_json(g: &Graph) -> Value {
    let darts: Vec<Value> = g
        .darts()
        .iter()
        .enumerate()
        .map(|(i, d)| serde_json::json!({"id": i, "reverse": d.reverse, "source": d.source}))
        .collect();
    serde_json::json!({"vertices": g.vertices(), "darts": darts, "basepoint": g.basepoint()})
}

impl Loader {
    /// A graph given inline or as a path relative to the current file.
    pub fn graph(&self, v: &Value) -> CliResult<Graph> {
        match v {
            Value::String(rel) => graph_from_json(&read_json(&self.path(rel))?),
            _ => graph_from_json(v),
        }
    }

    /// A cover from explicit vertex and dart maps, or from one permutation
    /// of the fiber per free generator of the base.
    pub fn cover(&self, v: &Value) -> CliResult<GraphCover> {
        let base = self.graph(field(v, "base", "cover")?)?;
        if let Some(perms) = v.get("permutations") {
            let perms: Vec<Vec<usize>> = typed(perms, "permutations")?;
            let pi = graph_pi1(&base)?;
            return Ok(cover_from_permutations(&base, &pi, &perms)?);
        }
        let total = self.graph(field(v, "total", "cover")?)?;
        let vmap: Vec<usize> = typed(field(v, "vmap", "cover")?, "vmap")?;
        let dmap: Vec<usize> = typed(field(v, "dmap", "cover")?, "dmap")?;
        Ok(mk_cover(total, base, vmap, dmap)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn loader() -> Loader {
        Loader::new(Config::default(), Path::new("x.json"))
    }

    #[test]
    fn group_forms() {
        let mut l = loader();
        let z3 = l.group(&json!({"name": "Z3", "order": 3, "table": [[0,1,2],[1,2,0],[2,0,1]]})).unwrap();
        assert_eq!(z3.order(), 3);
        let s3 = l.group(&json!({"name": "S3", "degree": 3, "generators": [[[0,1,2]], [[0,1]]]})).unwrap();
        assert_eq!(s3.order(), 6);
        assert!(l.group(&json!({"table": [[0,1],[0,1]]})).is_err());
        assert!(l.group(&json!({"builtin": "A5", "order": 61})).is_err());
        assert_eq!(l.group(&json!({"product": ["Z2", "Z3"]})).unwrap().order(), 6);
        assert!(l.group(&json!("Nope")).is_err());
    }

    #[test]
    fn group_table_references() {
        let mut l = loader();
        l.register_groups(&json!({"groups": {"G": {"product": ["H", "Z2"]}, "H": {"builtin": "S3"}, "L": "L"}}))
            .unwrap();
        let g = l.group(&json!("G")).unwrap();
        assert_eq!((g.order(), g.name()), (12, "G"));
        assert!(Arc::ptr_eq(&g, &l.group(&json!("G")).unwrap()));
        assert!(l.group(&json!("L")).is_err());
    }

    #[test]
    fn hom_forms() {
        let mut l = loader();
        let (z4, z2) = (l.group(&json!("Z4")).unwrap(), l.group(&json!("Z2")).unwrap());
        let p = l.hom(&json!("first_surjection"), &z4, &z2).unwrap();
        assert!(p.is_surjective());
        let q = l.hom(&json!({"generators": [1]}), &z4, &z2).unwrap();
        assert_eq!(p, q);
        assert!(l.hom(&json!({"map": [0, 1, 1, 0]}), &z4, &z2).is_err());
        assert!(l.hom(&json!("first_injection"), &z4, &z2).is_err());
        assert!(l.hom(&json!({"generators": [1, 1]}), &z4, &z2).is_err());
    }

    #[test]
    fn extension_forms() {
        let mut l = loader();
        let mut named = NamedExtensions::default();
        let none = BTreeMap::new();
        let v4 = l.group(&json!("V4")).unwrap();
        let (p, _) = l.extension(&json!({"dom": "Q8", "cod": "V4"}), None, &named, &none).unwrap();
        assert_eq!(p.kernel().order(), 2);
        named.insert("p".into(), p, None).unwrap();
        let (e, _) = l.extension(&json!({"kernel_pair_of": "p"}), None, &named, &none).unwrap();
        assert_eq!(e.dom().order(), 16);
        let (e, _) = l.extension(&json!({"product_with": "Z3"}), Some(&v4), &named, &none).unwrap();
        assert_eq!(e.dom().order(), 12);
        let (e, proj) = l
            .extension(&json!({"pullback": {"of": "p", "along": {"dom": "Z2", "hom": "first_injection"}}}), None, &named, &none)
            .unwrap();
        assert_eq!((e.dom().order(), proj.unwrap().cod().order()), (4, 8));
        let (r, _) = l.extension(&json!({"central_reflection_of": "p"}), None, &named, &none).unwrap();
        assert_eq!(r.dom().order(), 8);
    }

    #[test]
    fn graph_forms() {
        let g = graph_from_json(&json!({"vertices": 1, "edges": [[0, 0]], "basepoint": 0})).unwrap();
        let back = graph_from_json(&graph_to_json(&g)).unwrap();
        assert_eq!(g, back);
        assert!(graph_from_json(&json!({"vertices": 1, "darts": [{"id": 0, "reverse": 0, "source": 0}], "basepoint": 0})).is_err());
        assert!(graph_from_json(&json!({"vertices": 1, "edges": [], "basepoint": 3})).is_err());
    }
}
