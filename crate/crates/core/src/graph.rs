//! Finite pointed graphs, étale covering maps and the low-dimensional
//! exact sequence `π₁(E) → π₁(B) → π₀(F) → π₀(E) → π₀(B)`.
//!
//! Graphs are given by darts (half-edges) with a fixed-point-free reverse
//! involution and a source map, so loops and multi-edges are ordinary.
//! The fundamental group of a connected graph is free on the non-tree edges
//! of a breadth-first spanning tree.

use alloc::{collections::BTreeMap, format, string::String, sync::Arc, vec, vec::Vec};

use crate::error::{Error, Result};
use crate::group::{Group, GroupRef};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Dart {
    pub reverse: usize,
    pub source: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    vertices: usize,
    darts: Vec<Dart>,
    basepoint: usize,
}

impl Graph {
    pub fn new(vertices: usize, darts: Vec<Dart>, basepoint: usize) -> Result<Graph> {
        if basepoint >= vertices {
            return Err(Error::InvalidGraph(format!("basepoint {basepoint} is not a vertex")));
        }
        for (i, d) in darts.iter().enumerate() {
            if d.reverse >= darts.len() || d.source >= vertices {
                return Err(Error::InvalidGraph(format!("dart {i} refers outside the graph")));
            }
            if d.reverse == i || darts[d.reverse].reverse != i {
                return Err(Error::InvalidGraph(format!("reverse is not a fixed-point-free involution at dart {i}")));
            }
        }
        Ok(Graph { vertices, darts, basepoint })
    }

    /// Builds a graph from oriented edges `(u, v)`; edge `i` becomes darts
    /// `2i: u → v` and `2i + 1: v → u`.
    pub fn from_edges(vertices: usize, edges: &[(usize, usize)], basepoint: usize) -> Result<Graph> {
        let darts = edges
            .iter()
            .enumerate()
            .flat_map(|(i, &(u, v))| [Dart { reverse: 2 * i + 1, source: u }, Dart { reverse: 2 * i, source: v }])
            .collect();
        Graph::new(vertices, darts, basepoint)
    }

    pub fn vertices(&self) -> usize {
        self.vertices
    }

    pub fn darts(&self) -> &[Dart] {
        &self.darts
    }

    pub fn dart_count(&self) -> usize {
        self.darts.len()
    }

    pub fn edge_count(&self) -> usize {
        self.darts.len() / 2
    }

    pub fn basepoint(&self) -> usize {
        self.basepoint
    }

    pub fn source(&self, d: usize) -> usize {
        self.darts[d].source
    }

    pub fn target(&self, d: usize) -> usize {
        self.darts[self.darts[d].reverse].source
    }

    pub fn reverse(&self, d: usize) -> usize {
        self.darts[d].reverse
    }

    /// Darts leaving `v`, in index order.
    pub fn star(&self, v: usize) -> Vec<usize> {
        (0..self.darts.len()).filter(|&d| self.darts[d].source == v).collect()
    }

    fn stars(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.vertices];
        for (i, d) in self.darts.iter().enumerate() {
            out[d.source].push(i);
        }
        out
    }

    pub fn with_basepoint(&self, basepoint: usize) -> Result<Graph> {
        Graph::new(self.vertices, self.darts.clone(), basepoint)
    }
}

/// Connected components labelled `0, 1, …` in order of their least vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Components {
    pub label: Vec<usize>,
    pub count: usize,
    pub base_component: usize,
}

impl Components {
    pub fn members(&self, c: usize) -> Vec<usize> {
        (0..self.label.len()).filter(|&v| self.label[v] == c).collect()
    }
}

pub fn pi0(g: &Graph) -> Components {
    let stars = g.stars();
    let mut label = vec![usize::MAX; g.vertices];
    let mut count = 0;
    for v in 0..g.vertices {
        if label[v] != usize::MAX {
            continue;
        }
        label[v] = count;
        let mut stack = vec![v];
        while let Some(x) = stack.pop() {
            for &d in &stars[x] {
                let y = g.target(d);
                if label[y] == usize::MAX {
                    label[y] = count;
                    stack.push(y);
                }
            }
        }
        count += 1;
    }
    let base_component = label[g.basepoint];
    Components { label, count, base_component }
}

// ---------------------------------------------------------------------------
// Free words and the fundamental group

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Letter {
    pub generator: usize,
    pub inverse: bool,
}

impl Letter {
    pub fn inv(self) -> Letter {
        Letter { generator: self.generator, inverse: !self.inverse }
    }
}

/// A freely reduced word.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct FreeWord {
    letters: Vec<Letter>,
}

impl FreeWord {
    pub fn new(letters: impl IntoIterator<Item = Letter>) -> FreeWord {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if out.last() == Some(&l.inv()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        FreeWord { letters: out }
    }

    pub fn empty() -> FreeWord {
        FreeWord::default()
    }

    /// Parses `a`, `B` (inverse of `b`), … with generator `i` named by the
    /// `i`-th lowercase letter.
    pub fn parse(s: &str) -> Result<FreeWord> {
        let letters = s
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                'a'..='z' => Ok(Letter { generator: c as usize - 'a' as usize, inverse: false }),
                'A'..='Z' => Ok(Letter { generator: c as usize - 'A' as usize, inverse: true }),
                _ => Err(Error::SchemaError(format!("invalid letter {c:?} in word"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FreeWord::new(letters))
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn concat(&self, other: &FreeWord) -> FreeWord {
        FreeWord::new(self.letters.iter().chain(&other.letters).copied())
    }

    pub fn inverse(&self) -> FreeWord {
        FreeWord { letters: self.letters.iter().rev().map(|l| l.inv()).collect() }
    }
}

impl core::fmt::Display for FreeWord {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        if self.letters.is_empty() {
            return f.write_str("1");
        }
        for l in &self.letters {
            let c = (b'a' + l.generator as u8) as char;
            write!(f, "{}", if l.inverse { c.to_ascii_uppercase() } else { c })?;
        }
        Ok(())
    }
}

/// Every reduced word of length at most `max_len` over `rank` generators,
/// shortest first.
pub fn reduced_words(rank: usize, max_len: usize) -> Vec<FreeWord> {
    let mut out = vec![FreeWord::empty()];
    let mut frontier = vec![FreeWord::empty()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for generator in 0..rank {
                for inverse in [false, true] {
                    let l = Letter { generator, inverse };
                    if w.letters.last() == Some(&l.inv()) {
                        continue;
                    }
                    let mut letters = w.letters.clone();
                    letters.push(l);
                    next.push(FreeWord { letters });
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// A breadth-first spanning tree of a connected graph and the free basis of
/// `π₁` it determines.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pi1Data {
    pub rank: usize,
    /// Dart from the parent into each vertex; `None` at the basepoint.
    pub parent_dart: Vec<Option<usize>>,
    /// One dart per non-tree edge (the smaller index of the pair).
    pub generators: Vec<usize>,
    /// For each dart, the letter it reads as (`None` on tree darts).
    pub letter_of_dart: Vec<Option<Letter>>,
}

impl Pi1Data {
    /// Darts of the tree path from the basepoint to `v`.
    pub fn tree_path(&self, g: &Graph, mut v: usize) -> Vec<usize> {
        let mut path = Vec::new();
        while let Some(d) = self.parent_dart[v] {
            path.push(d);
            v = g.source(d);
        }
        path.reverse();
        path
    }

    /// The closed dart path at the basepoint representing `w`.
    pub fn loop_of(&self, g: &Graph, w: &FreeWord) -> Vec<usize> {
        let mut path = Vec::new();
        for l in w.letters() {
            let gen = self.generators[l.generator];
            let d = if l.inverse { g.reverse(gen) } else { gen };
            path.extend(self.tree_path(g, g.source(d)));
            path.push(d);
            path.extend(self.tree_path(g, g.target(d)).into_iter().rev().map(|e| g.reverse(e)));
        }
        path
    }

    /// The reduced word read along a closed dart path at the basepoint.
    pub fn word_of(&self, path: &[usize]) -> FreeWord {
        FreeWord::new(path.iter().filter_map(|&d| self.letter_of_dart[d]))
    }
}

pub fn graph_pi1(g: &Graph) -> Result<Pi1Data> {
    let stars = g.stars();
    let mut parent_dart = vec![None; g.vertices];
    let mut seen = vec![false; g.vertices];
    let mut tree = vec![false; g.darts.len()];
    seen[g.basepoint] = true;
    let mut queue = alloc::collections::VecDeque::from([g.basepoint]);
    while let Some(x) = queue.pop_front() {
        for &d in &stars[x] {
            let y = g.target(d);
            if !seen[y] {
                seen[y] = true;
                parent_dart[y] = Some(d);
                tree[d] = true;
                tree[g.reverse(d)] = true;
                queue.push_back(y);
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::NotConnected);
    }
    let generators: Vec<usize> = (0..g.darts.len()).filter(|&d| !tree[d] && d < g.reverse(d)).collect();
    let mut letter_of_dart = vec![None; g.darts.len()];
    for (i, &d) in generators.iter().enumerate() {
        letter_of_dart[d] = Some(Letter { generator: i, inverse: false });
        letter_of_dart[g.reverse(d)] = Some(Letter { generator: i, inverse: true });
    }
    let rank = g.edge_count() + 1 - g.vertices;
    debug_assert_eq!(rank, generators.len());
    Ok(Pi1Data { rank, parent_dart, generators, letter_of_dart })
}

// ---------------------------------------------------------------------------
// Covers

/// A pointed étale map of graphs.
#[derive(Clone, Debug)]
pub struct GraphCover {
    total: Graph,
    base: Graph,
    vmap: Vec<usize>,
    dmap: Vec<usize>,
    /// `(total vertex, base dart) ↦ total dart`.
    lifts: BTreeMap<(usize, usize), usize>,
    sheets: Option<usize>,
}

pub fn mk_cover(total: Graph, base: Graph, vmap: Vec<usize>, dmap: Vec<usize>) -> Result<GraphCover> {
    if vmap.len() != total.vertices || dmap.len() != total.darts.len() {
        return Err(Error::InvalidGraph("vertex or dart map has the wrong length".into()));
    }
    if vmap.iter().any(|&v| v >= base.vertices) || dmap.iter().any(|&d| d >= base.darts.len()) {
        return Err(Error::InvalidGraph("map lands outside the base".into()));
    }
    if vmap[total.basepoint] != base.basepoint {
        return Err(Error::InvalidGraph("basepoints are not matched".into()));
    }
    for e in 0..total.darts.len() {
        if base.source(dmap[e]) != vmap[total.source(e)] || dmap[total.reverse(e)] != base.reverse(dmap[e]) {
            return Err(Error::InvalidGraph(format!("dart {e} does not commute with source or reverse")));
        }
    }
    let base_stars = base.stars();
    let mut lifts = BTreeMap::new();
    for (x, star) in total.stars().into_iter().enumerate() {
        let mut images: Vec<usize> = star.iter().map(|&e| dmap[e]).collect();
        images.sort_unstable();
        if images != base_stars[vmap[x]] {
            return Err(Error::NotEtale {
                vertex: x,
                detail: format!("star {:?} maps to {:?}, expected {:?}", star, images, base_stars[vmap[x]]),
            });
        }
        for e in star {
            lifts.insert((x, dmap[e]), e);
        }
    }
    let sheets = if pi0(&base).count == 1 { Some(vmap.iter().filter(|&&v| v == base.basepoint).count()) } else { None };
    Ok(GraphCover { total, base, vmap, dmap, lifts, sheets })
}

impl GraphCover {
    pub fn total(&self) -> &Graph {
        &self.total
    }

    pub fn base(&self) -> &Graph {
        &self.base
    }

    pub fn vmap(&self) -> &[usize] {
        &self.vmap
    }

    pub fn dmap(&self) -> &[usize] {
        &self.dmap
    }

    /// Fiber size when the base is connected.
    pub fn sheets(&self) -> Option<usize> {
        self.sheets
    }

    pub fn identity(g: &Graph) -> GraphCover {
        mk_cover(g.clone(), g.clone(), (0..g.vertices).collect(), (0..g.darts.len()).collect())
            .expect("the identity is étale")
    }

    /// The fiber over the base basepoint, ascending.
    pub fn fiber(&self) -> Vec<usize> {
        (0..self.total.vertices).filter(|&x| self.vmap[x] == self.base.basepoint).collect()
    }

    /// The unique lift of `dart` starting at `x`.
    pub fn lift_dart(&self, x: usize, dart: usize) -> usize {
        self.lifts[&(x, dart)]
    }

    /// Endpoint of the lift of a dart path starting at `x`.
    pub fn lift_darts(&self, mut x: usize, path: &[usize]) -> usize {
        for &d in path {
            x = self.total.target(self.lift_dart(x, d));
        }
        x
    }

    /// The restriction to the component of the total basepoint.
    pub fn restrict_to_base_component(&self) -> GraphCover {
        let comps = pi0(&self.total);
        let keep: Vec<usize> = comps.members(comps.base_component);
        let mut vindex = vec![usize::MAX; self.total.vertices];
        for (i, &v) in keep.iter().enumerate() {
            vindex[v] = i;
        }
        let darts: Vec<usize> = (0..self.total.darts.len()).filter(|&e| vindex[self.total.source(e)] != usize::MAX).collect();
        let mut dindex = vec![usize::MAX; self.total.darts.len()];
        for (i, &e) in darts.iter().enumerate() {
            dindex[e] = i;
        }
        let new_darts = darts
            .iter()
            .map(|&e| Dart { reverse: dindex[self.total.reverse(e)], source: vindex[self.total.source(e)] })
            .collect();
        let total = Graph::new(keep.len(), new_darts, vindex[self.total.basepoint]).expect("restriction of a graph");
        let vmap = keep.iter().map(|&v| self.vmap[v]).collect();
        let dmap = darts.iter().map(|&e| self.dmap[e]).collect();
        mk_cover(total, self.base.clone(), vmap, dmap).expect("restriction of an étale map is étale")
    }
}

/// Endpoint of the lift of the loop `w` (over the base basepoint) from
/// `start`.
pub fn lift_path(c: &GraphCover, pi: &Pi1Data, w: &FreeWord, start: usize) -> usize {
    c.lift_darts(start, &pi.loop_of(&c.base, w))
}

/// `δ(w)`: the lift of `w` from the total basepoint, a point of the fiber.
pub fn delta_connecting(c: &GraphCover, pi: &Pi1Data, w: &FreeWord) -> usize {
    lift_path(c, pi, w, c.total.basepoint)
}

/// The action of each free generator of `π₁(B)` on the fiber.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Monodromy {
    pub fiber: Vec<usize>,
    /// `perms[i][j]` is the fiber index reached from `fiber[j]` along
    /// generator `i`.
    pub perms: Vec<Vec<usize>>,
}

pub fn monodromy(c: &GraphCover, pi: &Pi1Data) -> Monodromy {
    let fiber = c.fiber();
    let perms = (0..pi.rank)
        .map(|i| {
            let w = FreeWord::new([Letter { generator: i, inverse: false }]);
            let path = pi.loop_of(&c.base, &w);
            fiber
                .iter()
                .map(|&x| {
                    let y = c.lift_darts(x, &path);
                    fiber.binary_search(&y).expect("lifts of loops end in the fiber")
                })
                .collect()
        })
        .collect();
    Monodromy { fiber, perms }
}

/// The cover of `base` with fiber `0..n` determined by one permutation per
/// free generator: vertex `(b, i)` is `b·n + i`, tree darts keep the sheet
/// and generator darts permute it. The basepoint is `(y, 0)`.
pub fn cover_from_permutations(base: &Graph, pi: &Pi1Data, perms: &[Vec<usize>]) -> Result<GraphCover> {
    let n = perms.first().map_or(1, Vec::len);
    if perms.len() != pi.rank || perms.iter().any(|p| p.len() != n) {
        return Err(Error::InvalidGraph("one permutation per generator, all of one degree".into()));
    }
    for p in perms {
        let mut seen = vec![false; n];
        for &i in p {
            if i >= n || core::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidGraph("not a permutation".into()));
            }
        }
    }
    let nd = base.darts.len();
    let mut darts = Vec::with_capacity(nd * n);
    let mut dmap = Vec::with_capacity(nd * n);
    // Dart (d, i) leaves sheet i; its index is d·n + i.
    let sheet_after = |d: usize, i: usize| -> usize {
        match pi.letter_of_dart[d] {
            None => i,
            Some(l) if !l.inverse => perms[l.generator][i],
            Some(l) => perms[l.generator].iter().position(|&j| j == i).expect("permutation"),
        }
    };
    for d in 0..nd {
        for i in 0..n {
            let j = sheet_after(d, i);
            darts.push(Dart { reverse: base.reverse(d) * n + j, source: base.source(d) * n + i });
            dmap.push(d);
        }
    }
    let total = Graph::new(base.vertices * n, darts, base.basepoint * n)?;
    let vmap = (0..base.vertices * n).map(|v| v / n).collect();
    mk_cover(total, base.clone(), vmap, dmap)
}

/// The group of cover automorphisms over the base.
#[derive(Clone, Debug)]
pub struct DeckGroup {
    /// Vertex permutations of the total graph, identity first.
    pub vertex_maps: Vec<Vec<usize>>,
    pub group: GroupRef,
    pub is_regular: bool,
}

impl DeckGroup {
    pub fn order(&self) -> usize {
        self.vertex_maps.len()
    }
}

/// Extends `x₀ ↦ y` along stars; `None` if the assignment clashes.
fn propagate(c: &GraphCover, y: usize) -> Option<Vec<usize>> {
    let t = &c.total;
    let mut phi = vec![usize::MAX; t.vertices];
    phi[t.basepoint] = y;
    let mut stack = vec![t.basepoint];
    let stars = t.stars();
    while let Some(x) = stack.pop() {
        for &e in &stars[x] {
            let e2 = c.lift_dart(phi[x], c.dmap[e]);
            let (a, b) = (t.target(e), t.target(e2));
            if phi[a] == usize::MAX {
                phi[a] = b;
                stack.push(a);
            } else if phi[a] != b {
                return None;
            }
        }
    }
    let mut seen = vec![false; t.vertices];
    for &v in &phi {
        if v == usize::MAX || core::mem::replace(&mut seen[v], true) {
            return None;
        }
    }
    Some(phi)
}

pub fn deck_group(c: &GraphCover) -> Result<DeckGroup> {
    if pi0(&c.total).count != 1 {
        return Err(Error::NotConnected);
    }
    let fiber = c.fiber();
    let vertex_maps: Vec<Vec<usize>> = fiber.iter().filter_map(|&y| propagate(c, y)).collect();
    let group = if vertex_maps.len() == 1 {
        Arc::new(Group::trivial().with_name("Deck"))
    } else {
        Arc::new(Group::from_permutations("Deck", c.total.vertices, &vertex_maps, vertex_maps.len())?)
    };
    if group.order() != vertex_maps.len() {
        return Err(Error::NotAGroup("deck transformations are not closed".into()));
    }
    let is_regular = vertex_maps.len() == fiber.len();
    Ok(DeckGroup { vertex_maps, group, is_regular })
}

/// The kernel pair `E ×_B E` as a graph with basepoint `(x₀, x₀)`, with the
/// vertex pairs it is built on.
pub fn kernel_pair_graph(c: &GraphCover) -> (Graph, Vec<(usize, usize)>) {
    let t = &c.total;
    let mut vpairs = Vec::new();
    let mut vindex = BTreeMap::new();
    for x in 0..t.vertices {
        for x2 in 0..t.vertices {
            if c.vmap[x] == c.vmap[x2] {
                vindex.insert((x, x2), vpairs.len());
                vpairs.push((x, x2));
            }
        }
    }
    let mut dpairs = Vec::new();
    let mut dindex = BTreeMap::new();
    for e in 0..t.darts.len() {
        for e2 in 0..t.darts.len() {
            if c.dmap[e] == c.dmap[e2] {
                dindex.insert((e, e2), dpairs.len());
                dpairs.push((e, e2));
            }
        }
    }
    let darts = dpairs
        .iter()
        .map(|&(e, e2)| Dart {
            reverse: dindex[&(t.reverse(e), t.reverse(e2))],
            source: vindex[&(t.source(e), t.source(e2))],
        })
        .collect();
    let base = vindex[&(t.basepoint, t.basepoint)];
    (Graph::new(vpairs.len(), darts, base).expect("kernel pair of graphs"), vpairs)
}

/// `Gal(p, x₀)` for the restriction of `p` to the basepoint component:
/// components of the kernel pair meeting `{x₀} × (F ∩ E_x)`, identified
/// with the fiber points they contain and with deck transformations.
#[derive(Clone, Debug)]
pub struct GraphGalois {
    /// Fiber points `y` of the basepoint component; element `i` is the
    /// component of `(x₀, fiber[i])`.
    pub fiber: Vec<usize>,
    /// `Eq`-component index of each element.
    pub components: Vec<usize>,
    pub deck: DeckGroup,
}

impl GraphGalois {
    pub fn order(&self) -> usize {
        self.fiber.len()
    }
}

pub fn graph_galois_group(c: &GraphCover) -> Result<GraphGalois> {
    let r = c.restrict_to_base_component();
    let deck = deck_group(&r)?;
    if !deck.is_regular {
        return Err(Error::NotNormalCover(format!(
            "deck group of order {} on a fiber of size {}",
            deck.order(),
            r.fiber().len()
        )));
    }
    let (eq, vpairs) = kernel_pair_graph(&r);
    let comps = pi0(&eq);
    let x0 = r.total.basepoint;
    let fiber = r.fiber();
    let at = |a: usize, b: usize| vpairs.iter().position(|&p| p == (a, b)).expect("pair over one base vertex");
    let components: Vec<usize> = fiber.iter().map(|&y| comps.label[at(x0, y)]).collect();
    // Distinct fiber points give distinct components, and each component
    // is the graph of the deck transformation sending x₀ to its point.
    for (i, &ci) in components.iter().enumerate() {
        if components[..i].contains(&ci) {
            return Err(Error::NotNormalCover("two fiber points share a kernel-pair component".into()));
        }
        let phi = deck
            .vertex_maps
            .iter()
            .find(|m| m[x0] == fiber[i])
            .expect("regular: every fiber point is hit");
        let members: Vec<usize> = comps.members(ci);
        let graph: Vec<usize> = (0..r.total.vertices).map(|x| at(x, phi[x])).collect();
        let mut sorted = graph.clone();
        sorted.sort_unstable();
        if sorted != members {
            return Err(Error::NotNormalCover("kernel-pair component is not the graph of a deck transformation".into()));
        }
    }
    Ok(GraphGalois { fiber, components, deck })
}

// ---------------------------------------------------------------------------
// Subgroup membership by folding

/// Stallings graph of the subgroup of a free group generated by `words`.
#[derive(Clone, Debug)]
pub struct FoldedGraph {
    /// `edges[v]` maps a letter to the vertex reached from `v`.
    edges: Vec<BTreeMap<Letter, usize>>,
}

impl FoldedGraph {
    pub fn new(words: &[FreeWord]) -> FoldedGraph {
        // Petals at vertex 0, one vertex per interior position.
        let mut raw: Vec<(usize, Letter, usize)> = Vec::new();
        let mut n = 1;
        for w in words.iter().filter(|w| !w.is_empty()) {
            let mut prev = 0;
            for (i, &l) in w.letters().iter().enumerate() {
                let next = if i + 1 == w.len() {
                    0
                } else {
                    n += 1;
                    n - 1
                };
                raw.push((prev, l, next));
                prev = next;
            }
        }
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        loop {
            let mut edges: Vec<BTreeMap<Letter, usize>> = vec![BTreeMap::new(); n];
            let mut merged = false;
            for &(u, l, v) in &raw {
                for (a, l, b) in [(u, l, v), (v, l.inv(), u)] {
                    let (a, b) = (find(&mut parent, a), find(&mut parent, b));
                    match edges[a].get(&l).copied() {
                        Some(c) => {
                            let c = find(&mut parent, c);
                            if c != b {
                                // Keep vertex 0 as the root of its class.
                                let (keep, drop) = if c.min(b) == 0 { (0, c.max(b)) } else { (c.min(b), c.max(b)) };
                                parent[drop] = keep;
                                merged = true;
                            }
                        }
                        None => {
                            edges[a].insert(l, b);
                        }
                    }
                }
            }
            if !merged {
                let edges = (0..n)
                    .map(|v| {
                        edges[v]
                            .iter()
                            .map(|(&l, &w)| (l, find(&mut parent, w)))
                            .collect()
                    })
                    .collect();
                return FoldedGraph { edges };
            }
        }
    }

    /// Whether `w` lies in the subgroup: it reads a closed path at the root.
    pub fn contains(&self, w: &FreeWord) -> bool {
        let mut v = 0;
        for l in w.letters() {
            match self.edges[v].get(l) {
                Some(&next) => v = next,
                None => return false,
            }
        }
        v == 0
    }
}

// ---------------------------------------------------------------------------
// Exact sequence

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PositionReport {
    pub name: &'static str,
    pub passed: bool,
    /// `false` where the check is bounded by word length.
    pub exact: bool,
    pub checked: usize,
    pub witness: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactSequenceReport {
    pub max_word_len: usize,
    pub base_rank: usize,
    pub total_rank: usize,
    pub delta_image: Vec<usize>,
    pub positions: Vec<PositionReport>,
}

impl ExactSequenceReport {
    pub fn passed(&self) -> bool {
        self.positions.iter().all(|p| p.passed)
    }
}

/// Verifies `π₁(E,x) → π₁(B,y) → π₀(F) → π₀(E) → π₀(B)` at `(a)`
/// injectivity on `π₁(E)`, `(b)` image of `δ`, `(c)` exactness at `π₀(F)`,
/// `(d)` surjectivity onto `π₀(E)`, `(e)` exactness at `π₁(B)`. Positions
/// `(a)` and `(e)` are checked on reduced words of length at most `max_len`;
/// membership in `p_*π₁(E)` at `(e)` is decided by folding the projected
/// generators, independently of lifting.
pub fn exact_sequence_check(c: &GraphCover, max_len: usize) -> Result<ExactSequenceReport> {
    let pi_b = graph_pi1(&c.base)?;
    let comps_e = pi0(&c.total);
    let x0 = c.total.basepoint;
    let fiber = c.fiber();

    let restricted = c.restrict_to_base_component();
    let pi_e = graph_pi1(&restricted.total)?;
    let project = |w: &FreeWord| -> FreeWord {
        let loop_e = pi_e.loop_of(&restricted.total, w);
        let darts: Vec<usize> = loop_e.iter().map(|&e| restricted.dmap[e]).collect();
        pi_b.word_of(&darts)
    };

    let mut positions = Vec::new();

    // (a) π₁(E) → π₁(B) has trivial kernel on short words.
    let words_e = reduced_words(pi_e.rank, max_len);
    let bad = words_e.iter().find(|w| !w.is_empty() && project(w).is_empty());
    positions.push(PositionReport {
        name: "pi1(E) -> pi1(B) injective",
        passed: bad.is_none(),
        exact: false,
        checked: words_e.len(),
        witness: bad.map(|w| format!("{w} maps to 1")),
    });

    // (b) δ-image, the monodromy orbit of x₀, equals F ∩ E_x.
    let mono = monodromy(c, &pi_b);
    let start = fiber.binary_search(&x0).expect("basepoint lies in the fiber");
    let mut orbit = vec![start];
    let mut seen = vec![false; fiber.len()];
    seen[start] = true;
    let mut i = 0;
    while i < orbit.len() {
        let j = orbit[i];
        for p in &mono.perms {
            let inv = p.iter().position(|&t| t == j).expect("permutation");
            for k in [p[j], inv] {
                if !core::mem::replace(&mut seen[k], true) {
                    orbit.push(k);
                }
            }
        }
        i += 1;
    }
    let mut delta_image: Vec<usize> = orbit.iter().map(|&k| fiber[k]).collect();
    delta_image.sort_unstable();
    let in_component: Vec<usize> = fiber.iter().copied().filter(|&y| comps_e.label[y] == comps_e.base_component).collect();
    let words_b = reduced_words(pi_b.rank, max_len);
    let stray = words_b.iter().find(|w| delta_image.binary_search(&delta_connecting(c, &pi_b, w)).is_err());
    positions.push(PositionReport {
        name: "image of delta = F ∩ E_x",
        passed: delta_image == in_component && stray.is_none(),
        exact: true,
        checked: fiber.len(),
        witness: if delta_image != in_component {
            Some(format!("delta image {delta_image:?} vs F ∩ E_x {in_component:?}"))
        } else {
            stray.map(|w| format!("delta({w}) leaves the orbit"))
        },
    });

    // (c) fiber points in the basepoint component are exactly the δ-image.
    positions.push(PositionReport {
        name: "pi0(F) -> pi0(E) exact at pi0(F)",
        passed: in_component == delta_image,
        exact: true,
        checked: fiber.len(),
        witness: (in_component != delta_image).then(|| format!("{in_component:?} vs {delta_image:?}")),
    });

    // (d) every component of E meets the fiber.
    let missing = (0..comps_e.count).find(|&k| !fiber.iter().any(|&y| comps_e.label[y] == k));
    positions.push(PositionReport {
        name: "pi0(F) -> pi0(E) surjective",
        passed: missing.is_none(),
        exact: true,
        checked: comps_e.count,
        witness: missing.map(|k| format!("component {k} misses the fiber")),
    });

    // (e) δ(w) = x₀ exactly when w ∈ p_*π₁(E, x₀).
    let images: Vec<FreeWord> = (0..pi_e.rank)
        .map(|i| project(&FreeWord::new([Letter { generator: i, inverse: false }])))
        .collect();
    let folded = FoldedGraph::new(&images);
    let bad = words_b.iter().find(|w| (delta_connecting(c, &pi_b, w) == x0) != folded.contains(w));
    positions.push(PositionReport {
        name: "pi1(E) -> pi1(B) -> pi0(F) exact at pi1(B)",
        passed: bad.is_none(),
        exact: false,
        checked: words_b.len(),
        witness: bad.map(|w| format!("{w}: delta and membership disagree")),
    });

    Ok(ExactSequenceReport { max_word_len: max_len, base_rank: pi_b.rank, total_rank: pi_e.rank, delta_image, positions })
}

// ---------------------------------------------------------------------------
// Fixtures

/// The `n`-cycle with edge `i: i → i+1`.
pub fn cycle(n: usize) -> Graph {
    let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    Graph::from_edges(n, &edges, 0).expect("cycle")
}

/// One vertex with loops `a` (darts 0, 1) and `b` (darts 2, 3).
pub fn figure_eight() -> Graph {
    Graph::from_edges(1, &[(0, 0), (0, 0)], 0).expect("figure eight")
}

/// `C_{kn} → C_n`, winding `k` times.
pub fn cycle_cover(n: usize, k: usize) -> GraphCover {
    let total = cycle(n * k);
    let vmap = (0..n * k).map(|i| i % n).collect();
    let dmap = (0..2 * n * k).map(|d| 2 * ((d / 2) % n) + d % 2).collect();
    mk_cover(total, cycle(n), vmap, dmap).expect("cyclic cover")
}

/// The double cover of the figure eight in which `a` swaps the sheets and
/// `b` is a loop on each.
pub fn figure_eight_double_cover() -> GraphCover {
    // a-edges 0 → 1 and 1 → 0, b-loops at 0 and 1.
    let total = Graph::from_edges(2, &[(0, 1), (1, 0), (0, 0), (1, 1)], 0).expect("double cover");
    let dmap = vec![0, 1, 0, 1, 2, 3, 2, 3];
    mk_cover(total, figure_eight(), vec![0, 0], dmap).expect("double cover is étale")
}

/// The connected 3-sheeted cover of the figure eight with monodromy
/// `a ↦ (0 1)`, `b ↦ (1 2)`; its deck group is trivial.
pub fn figure_eight_irregular_cover() -> GraphCover {
    let base = figure_eight();
    let pi = graph_pi1(&base).expect("connected");
    cover_from_permutations(&base, &pi, &[vec![1, 0, 2], vec![0, 2, 1]]).expect("valid permutations")
}

/// `C₃ ⊔ C₃ → C₃`.
pub fn two_triangles_cover() -> GraphCover {
    let total = Graph::from_edges(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)], 0).expect("two triangles");
    let vmap = (0..6).map(|v| v % 3).collect();
    let dmap = (0..12).map(|d| d % 6).collect();
    mk_cover(total, cycle(3), vmap, dmap).expect("trivial double cover")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn word(s: &str) -> FreeWord {
        FreeWord::parse(s).unwrap()
    }

    #[test]
    fn graph_validation() {
        assert!(Graph::new(1, vec![Dart { reverse: 0, source: 0 }], 0).is_err());
        assert!(Graph::new(1, vec![], 1).is_err());
        assert!(Graph::new(2, vec![Dart { reverse: 1, source: 0 }, Dart { reverse: 1, source: 1 }], 0).is_err());
        let g = figure_eight();
        assert_eq!(g.target(0), 0);
        assert_eq!(g.star(0), vec![0, 1, 2, 3]);
    }

    #[test]
    fn components() {
        assert_eq!(pi0(&cycle(5)).count, 1);
        let two = two_triangles_cover();
        let c = pi0(two.total());
        assert_eq!(c.count, 2);
        assert_eq!(c.label, vec![0, 0, 0, 1, 1, 1]);
        // The fiber of C6 → C3 over 0 as a discrete graph.
        let fiber = Graph::new(2, vec![], 0).unwrap();
        assert_eq!(pi0(&fiber).count, 2);
    }

    #[test]
    fn fundamental_group_ranks() {
        let tree = Graph::from_edges(4, &[(0, 1), (1, 2), (1, 3)], 0).unwrap();
        assert_eq!(graph_pi1(&tree).unwrap().rank, 0);
        assert_eq!(graph_pi1(&figure_eight()).unwrap().rank, 2);
        assert_eq!(graph_pi1(figure_eight_double_cover().total()).unwrap().rank, 3);
        assert_eq!(graph_pi1(two_triangles_cover().total()), Err(Error::NotConnected));
    }

    #[test]
    fn nielsen_schreier() {
        for c in [cycle_cover(3, 2), cycle_cover(4, 3), figure_eight_double_cover(), figure_eight_irregular_cover()] {
            let n = c.sheets().unwrap();
            let rb = graph_pi1(c.base()).unwrap().rank;
            let re = graph_pi1(c.total()).unwrap().rank;
            assert_eq!(re, n * (rb - 1) + 1);
        }
    }

    #[test]
    fn covers() {
        let id = GraphCover::identity(&figure_eight());
        assert_eq!(id.sheets(), Some(1));
        assert_eq!(figure_eight_double_cover().sheets(), Some(2));
        // Both darts at vertex 0 of a 2-cycle collapsed onto one dart.
        let total = cycle(2);
        let err = mk_cover(total, cycle(2), vec![0, 1], vec![0, 1, 0, 1]);
        assert!(matches!(err, Err(Error::InvalidGraph(_)) | Err(Error::NotEtale { .. })));
        let total = Graph::from_edges(2, &[(0, 1), (0, 1)], 0).unwrap();
        let base = Graph::from_edges(2, &[(0, 1)], 0).unwrap();
        assert!(matches!(mk_cover(total, base, vec![0, 1], vec![0, 1, 0, 1]), Err(Error::NotEtale { vertex: 0, .. })));
    }

    #[test]
    fn lifting_and_delta() {
        let c = cycle_cover(3, 2);
        let pi = graph_pi1(c.base()).unwrap();
        assert_eq!(lift_path(&c, &pi, &FreeWord::empty(), 0), 0);
        assert_eq!(lift_path(&c, &pi, &word("a"), 0), 3);
        for k in 0..6 {
            let w = FreeWord::new(vec![Letter { generator: 0, inverse: false }; k]);
            assert_eq!(delta_connecting(&c, &pi, &w), 3 * (k % 2));
        }
        let d = figure_eight_double_cover();
        let pi = graph_pi1(d.base()).unwrap();
        assert_eq!(delta_connecting(&d, &pi, &word("a")), 1);
        assert_eq!(delta_connecting(&d, &pi, &word("b")), 0);
        let id = GraphCover::identity(&figure_eight());
        for w in reduced_words(2, 3) {
            assert_eq!(delta_connecting(&id, &pi, &w), 0);
        }
    }

    #[test]
    fn monodromy_examples() {
        let c = cycle_cover(3, 2);
        let pi = graph_pi1(c.base()).unwrap();
        assert_eq!(monodromy(&c, &pi).perms, vec![vec![1, 0]]);
        let d = figure_eight_double_cover();
        let pi = graph_pi1(d.base()).unwrap();
        assert_eq!(monodromy(&d, &pi).perms, vec![vec![1, 0], vec![0, 1]]);
        let t = two_triangles_cover();
        let pi = graph_pi1(t.base()).unwrap();
        assert_eq!(monodromy(&t, &pi).perms, vec![vec![0, 1]]);
    }

    /// Rebuilding from monodromy gives a cover isomorphic over the base,
    /// by the map sending `x` to `(vmap x, sheet reached from x back to y)`.
    #[test]
    fn monodromy_reconstruction() {
        for c in [cycle_cover(3, 2), figure_eight_double_cover(), figure_eight_irregular_cover(), cycle_cover(2, 3)] {
            let pi = graph_pi1(c.base()).unwrap();
            let m = monodromy(&c, &pi);
            let r = cover_from_permutations(c.base(), &pi, &m.perms).unwrap();
            let n = m.fiber.len();
            let iso: Vec<usize> = (0..c.total().vertices())
                .map(|x| {
                    let b = c.vmap()[x];
                    let back: Vec<usize> = pi.tree_path(c.base(), b).into_iter().rev().map(|d| c.base().reverse(d)).collect();
                    let y = c.lift_darts(x, &back);
                    b * n + m.fiber.binary_search(&y).unwrap()
                })
                .collect();
            let mut sorted = iso.clone();
            sorted.sort_unstable();
            assert_eq!(sorted, (0..r.total().vertices()).collect::<Vec<_>>());
            for e in 0..c.total().dart_count() {
                let x = c.total().source(e);
                let e2 = r.lift_dart(iso[x], c.dmap()[e]);
                assert_eq!(r.total().target(e2), iso[c.total().target(e)]);
            }
        }
    }

    #[test]
    fn deck_groups() {
        let id = deck_group(&GraphCover::identity(&cycle(3))).unwrap();
        assert_eq!((id.order(), id.is_regular), (1, true));
        let c = deck_group(&cycle_cover(3, 2)).unwrap();
        assert_eq!((c.order(), c.is_regular), (2, true));
        let irr = deck_group(&figure_eight_irregular_cover()).unwrap();
        assert_eq!((irr.order(), irr.is_regular), (1, false));
        assert!(deck_group(&two_triangles_cover()).is_err());
        let z = deck_group(&cycle_cover(2, 3)).unwrap();
        assert!(z.group.is_abelian() && z.order() == 3);
    }

    #[test]
    fn galois_groups() {
        assert_eq!(graph_galois_group(&GraphCover::identity(&cycle(3))).unwrap().order(), 1);
        let g = graph_galois_group(&cycle_cover(3, 2)).unwrap();
        assert_eq!((g.order(), g.deck.order()), (2, 2));
        let d = figure_eight_double_cover();
        let g = graph_galois_group(&d).unwrap();
        assert_eq!(g.order(), 2);
        let pi = graph_pi1(d.base()).unwrap();
        let image: Vec<usize> = reduced_words(2, 2).iter().map(|w| delta_connecting(&d, &pi, w)).collect();
        assert!(g.fiber.iter().all(|y| image.contains(y)));
        assert!(matches!(graph_galois_group(&figure_eight_irregular_cover()), Err(Error::NotNormalCover(_))));
        // Restricted to the basepoint component, C3 ⊔ C3 → C3 is trivial.
        assert_eq!(graph_galois_group(&two_triangles_cover()).unwrap().order(), 1);
    }

    #[test]
    fn folding_membership() {
        let f = FoldedGraph::new(&[word("aa"), word("b"), word("aBA")]);
        assert!(f.contains(&word("aa")) && f.contains(&word("b")) && f.contains(&word("aab")));
        // The subgroup is the even total a-exponent words.
        assert!(f.contains(&word("aBAbaa")) && !f.contains(&word("bab")));
        assert!(!f.contains(&word("aBAba")));
        assert!(f.contains(&FreeWord::empty()));
        assert!(!f.contains(&word("a")));
        let whole = FoldedGraph::new(&[word("a"), word("b")]);
        for w in reduced_words(2, 4) {
            assert!(whole.contains(&w));
        }
    }

    #[test]
    fn exact_sequences() {
        for (c, rank) in [(cycle_cover(3, 2), 1), (figure_eight_double_cover(), 3), (two_triangles_cover(), 1)] {
            let r = exact_sequence_check(&c, 8).unwrap();
            assert!(r.passed(), "{:?}", r.positions);
            assert_eq!(r.total_rank, rank);
        }
        let r = exact_sequence_check(&cycle_cover(3, 2), 8).unwrap();
        assert_eq!(r.delta_image, vec![0, 3]);
        let r = exact_sequence_check(&two_triangles_cover(), 8).unwrap();
        assert_eq!(r.delta_image, vec![0]);
        let r = exact_sequence_check(&GraphCover::identity(&figure_eight()), 4).unwrap();
        assert!(r.passed());
        let r = exact_sequence_check(&figure_eight_irregular_cover(), 5).unwrap();
        assert!(r.passed());
    }

    proptest! {
        #[test]
        fn free_reduction_is_a_group_law(a in proptest::collection::vec((0usize..3, any::<bool>()), 0..8),
                                         b in proptest::collection::vec((0usize..3, any::<bool>()), 0..8)) {
            let mk = |v: &[(usize, bool)]| FreeWord::new(v.iter().map(|&(g, i)| Letter { generator: g, inverse: i }));
            let (wa, wb) = (mk(&a), mk(&b));
            prop_assert!(wa.concat(&wa.inverse()).is_empty());
            prop_assert_eq!(wa.concat(&wb).inverse(), wb.inverse().concat(&wa.inverse()));
            prop_assert!(wa.letters().windows(2).all(|p| p[1] != p[0].inv()));
        }

        /// δ(w·v) is the lift of v from δ(w).
        #[test]
        fn delta_composition(a in proptest::collection::vec((0usize..2, any::<bool>()), 0..8),
                             b in proptest::collection::vec((0usize..2, any::<bool>()), 0..8)) {
            let c = figure_eight_irregular_cover();
            let pi = graph_pi1(c.base()).unwrap();
            let mk = |v: &[(usize, bool)]| FreeWord::new(v.iter().map(|&(g, i)| Letter { generator: g, inverse: i }));
            let (w, v) = (mk(&a), mk(&b));
            let lhs = delta_connecting(&c, &pi, &w.concat(&v));
            let rhs = lift_path(&c, &pi, &v, delta_connecting(&c, &pi, &w));
            prop_assert_eq!(lhs, rhs);
        }
    }
}
