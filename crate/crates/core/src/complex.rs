//! Two-colored square complexes and their invariants.
//!
//! Cells carry one of two colors: black edges run in the first-tree
//! direction ("horizontal"), red edges in the second ("vertical"). Every
//! square has two black sides (bottom, top) and two red sides (left, right),
//! with corners indexed c00, c10, c01, c11 so that bottom joins c00–c10 and
//! left joins c00–c01.
//!
//! The analyses here are purely combinatorial: hyperplane classes and their
//! tree property, one-color collapses, vertex links with their nine-type
//! classification, Euler characteristic, colored isomorphism, and a
//! line-based text serialization with deterministic ordering.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum ComplexError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("bad cell structure: {0}")]
    BadStructure(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Color {
    Black,
    Red,
}

impl Color {
    pub fn other(self) -> Color {
        match self {
            Color::Black => Color::Red,
            Color::Red => Color::Black,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Color::Black => "black",
            Color::Red => "red",
        }
    }
}

impl std::fmt::Display for Color {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeCell {
    pub color: Color,
    pub a: usize,
    pub b: usize,
    pub prov: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SquareCell {
    /// c00, c10, c01, c11.
    pub corners: [usize; 4],
    pub bottom: usize,
    pub top: usize,
    pub left: usize,
    pub right: usize,
    pub prov: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VhComplex {
    genus: u8,
    vertex_prov: Vec<Option<String>>,
    edges: Vec<EdgeCell>,
    squares: Vec<SquareCell>,
}

/// One dual hyperplane: a parallelism class of same-colored edges together
/// with the squares realizing the parallelism. Viewed as a graph whose
/// vertices are the class edges and whose arcs are the squares, each square
/// joining its two opposite sides; classes are connected by construction, so
/// the tree property is just the edge count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hyperplane {
    pub color: Color,
    pub edges: Vec<usize>,
    pub squares: Vec<usize>,
}

impl Hyperplane {
    pub fn is_tree(&self) -> bool {
        self.edges.len() == self.squares.len() + 1
    }
}

/// A link of a vertex: incident black and red edges, plus one (black, red)
/// pair per square corner at the vertex (indices into the two node lists).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexLink {
    pub black: Vec<usize>,
    pub red: Vec<usize>,
    pub pairs: Vec<(usize, usize)>,
}

/// The nine admissible link types. `genus` is the genus of the boundary
/// pattern: 1 - vertices + edges of the link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LinkClass {
    Path2,
    Path3,
    Cycle4,
    Cycle4Pendant,
    CompleteBipartite23,
    Cycle6,
    Theta,
    CompleteBipartite33MinusEdge,
    CompleteBipartite33,
}

impl LinkClass {
    pub fn all() -> [LinkClass; 9] {
        [
            LinkClass::Path2,
            LinkClass::Path3,
            LinkClass::Cycle4,
            LinkClass::Cycle4Pendant,
            LinkClass::CompleteBipartite23,
            LinkClass::Cycle6,
            LinkClass::Theta,
            LinkClass::CompleteBipartite33MinusEdge,
            LinkClass::CompleteBipartite33,
        ]
    }

    pub fn counts(self) -> (usize, usize) {
        match self {
            LinkClass::Path2 => (3, 2),
            LinkClass::Path3 => (4, 3),
            LinkClass::Cycle4 => (4, 4),
            LinkClass::Cycle4Pendant => (5, 5),
            LinkClass::CompleteBipartite23 => (5, 6),
            LinkClass::Cycle6 => (6, 6),
            LinkClass::Theta => (6, 7),
            LinkClass::CompleteBipartite33MinusEdge => (6, 8),
            LinkClass::CompleteBipartite33 => (6, 9),
        }
    }

    pub fn from_counts(v: usize, e: usize) -> Option<LinkClass> {
        LinkClass::all().into_iter().find(|c| c.counts() == (v, e))
    }

    /// Genus of the corresponding boundary pattern.
    pub fn genus(self) -> usize {
        let (v, e) = self.counts();
        1 + e - v
    }

    pub fn name(self) -> &'static str {
        match self {
            LinkClass::Path2 => "path2",
            LinkClass::Path3 => "path3",
            LinkClass::Cycle4 => "cycle4",
            LinkClass::Cycle4Pendant => "cycle4-pendant",
            LinkClass::CompleteBipartite23 => "K23",
            LinkClass::Cycle6 => "cycle6",
            LinkClass::Theta => "theta",
            LinkClass::CompleteBipartite33MinusEdge => "K33-minus-edge",
            LinkClass::CompleteBipartite33 => "K33",
        }
    }
}

/// A small undirected multigraph (loops allowed), the result of collapsing
/// one color.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmallGraph {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub pass: bool,
    pub name: &'static str,
    pub witness: String,
}

impl Check {
    pub fn line(&self) -> String {
        format!("{} {} {}", if self.pass { "PASS" } else { "FAIL" }, self.name, self.witness)
    }
}

impl VhComplex {
    pub fn new(
        genus: u8,
        vertex_prov: Vec<Option<String>>,
        edges: Vec<EdgeCell>,
        squares: Vec<SquareCell>,
    ) -> Result<VhComplex, ComplexError> {
        let nv = vertex_prov.len();
        let bad = |msg: String| Err(ComplexError::BadStructure(msg));
        for (i, e) in edges.iter().enumerate() {
            if e.a >= nv || e.b >= nv {
                return bad(format!("edge {i} touches a missing vertex"));
            }
        }
        for (i, s) in squares.iter().enumerate() {
            for &c in &s.corners {
                if c >= nv {
                    return bad(format!("square {i} touches a missing vertex"));
                }
            }
            for (side, want) in [(s.bottom, Color::Black), (s.top, Color::Black), (s.left, Color::Red), (s.right, Color::Red)] {
                if side >= edges.len() {
                    return bad(format!("square {i} uses a missing edge"));
                }
                if edges[side].color != want {
                    return bad(format!("square {i} side {side} has the wrong color"));
                }
            }
            let [c00, c10, c01, c11] = s.corners;
            for a in 0..4 {
                for b in a + 1..4 {
                    if s.corners[a] == s.corners[b] {
                        return bad(format!("square {i} has identified corners"));
                    }
                }
            }
            let ends = |e: usize| (edges[e].a.min(edges[e].b), edges[e].a.max(edges[e].b));
            let pair = |x: usize, y: usize| (x.min(y), x.max(y));
            if ends(s.bottom) != pair(c00, c10)
                || ends(s.top) != pair(c01, c11)
                || ends(s.left) != pair(c00, c01)
                || ends(s.right) != pair(c10, c11)
            {
                return bad(format!("square {i} sides disagree with its corners"));
            }
        }
        Ok(VhComplex { genus, vertex_prov, edges, squares })
    }

    pub fn genus(&self) -> u8 {
        self.genus
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_prov.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn square_count(&self) -> usize {
        self.squares.len()
    }

    pub fn edges(&self) -> &[EdgeCell] {
        &self.edges
    }

    pub fn squares(&self) -> &[SquareCell] {
        &self.squares
    }

    pub fn vertex_prov(&self, v: usize) -> Option<&str> {
        self.vertex_prov[v].as_deref()
    }

    pub fn edges_of_color(&self, color: Color) -> impl Iterator<Item = usize> + '_ {
        self.edges
            .iter()
            .enumerate()
            .filter(move |(_, e)| e.color == color)
            .map(|(i, _)| i)
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count() as i64 - self.edge_count() as i64 + self.square_count() as i64
    }

    pub fn is_connected(&self) -> bool {
        if self.vertex_count() == 0 {
            return false;
        }
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); self.vertex_count()];
        for e in &self.edges {
            adj[e.a].push(e.b);
            adj[e.b].push(e.a);
        }
        let mut seen = vec![false; self.vertex_count()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == self.vertex_count()
    }

    /// Parallelism classes of one color: union opposite sides across squares.
    pub fn hyperplanes(&self, color: Color) -> Vec<Hyperplane> {
        let ids: Vec<usize> = self.edges_of_color(color).collect();
        let mut uf = UnionFind::new(self.edges.len());
        for s in &self.squares {
            match color {
                Color::Black => uf.union(s.bottom, s.top),
                Color::Red => uf.union(s.left, s.right),
            }
        }
        let mut classes: BTreeMap<usize, Hyperplane> = BTreeMap::new();
        for &e in &ids {
            let root = uf.find(e);
            classes
                .entry(root)
                .or_insert_with(|| Hyperplane { color, edges: Vec::new(), squares: Vec::new() })
                .edges
                .push(e);
        }
        for (i, s) in self.squares.iter().enumerate() {
            let side = match color {
                Color::Black => s.bottom,
                Color::Red => s.left,
            };
            classes.get_mut(&uf.find(side)).unwrap().squares.push(i);
        }
        // Deterministic: classes ordered by their smallest edge id.
        let mut out: Vec<Hyperplane> = classes.into_values().collect();
        out.sort_by_key(|h| h.edges[0]);
        out
    }

    /// Contract every edge of `contracted`; surviving edges are the
    /// parallelism classes of the other color, one edge per class.
    pub fn collapse(&self, contracted: Color) -> SmallGraph {
        let mut uf = UnionFind::new(self.vertex_count());
        for e in &self.edges {
            if e.color == contracted {
                uf.union(e.a, e.b);
            }
        }
        // Components renumbered in order of smallest member.
        let mut label: BTreeMap<usize, usize> = BTreeMap::new();
        for v in 0..self.vertex_count() {
            let r = uf.find(v);
            let next = label.len();
            label.entry(r).or_insert(next);
        }
        let mut edges = Vec::new();
        for h in self.hyperplanes(contracted.other()) {
            let rep = &self.edges[h.edges[0]];
            let (a, b) = (label[&uf.find(rep.a)], label[&uf.find(rep.b)]);
            debug_assert!(h.edges.iter().all(|&e| {
                let ec = &self.edges[e];
                let (x, y) = (label[&uf.find(ec.a)], label[&uf.find(ec.b)]);
                (x.min(y), x.max(y)) == (a.min(b), a.max(b))
            }));
            edges.push((a.min(b), a.max(b)));
        }
        SmallGraph { n: label.len(), edges }
    }

    /// The bipartite link at a vertex: one node per incident edge of each
    /// color, one link edge per square corner sitting at the vertex.
    pub fn vertex_link(&self, v: usize) -> VertexLink {
        let mut black = Vec::new();
        let mut red = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            if e.a == v || e.b == v {
                // A loop is incident twice but contributes one link node per
                // end; represent ends as (edge, end) flattened.
                let times = 1 + usize::from(e.a == v && e.b == v);
                for _ in 0..times {
                    match e.color {
                        Color::Black => black.push(i),
                        Color::Red => red.push(i),
                    }
                }
            }
        }
        // Loop ends are not told apart: a loop's corners land on one node,
        // which duplicates pairs and correctly fails classification.
        let node = |list: &[usize], id: usize| list.iter().position(|&e| e == id).unwrap();
        let mut pairs = Vec::new();
        for s in &self.squares {
            let corner_sides = [
                (s.corners[0], s.bottom, s.left),
                (s.corners[1], s.bottom, s.right),
                (s.corners[2], s.top, s.left),
                (s.corners[3], s.top, s.right),
            ];
            for (c, be, re) in corner_sides {
                if c == v {
                    pairs.push((node(&black, be), node(&red, re)));
                }
            }
        }
        pairs.sort();
        VertexLink { black, red, pairs }
    }

    /// Classify a vertex link against the nine admissible types; `None` for
    /// anything else (too many nodes, repeated pairs, or a shape outside the
    /// census, e.g. a single edge).
    pub fn classify_link(link: &VertexLink) -> Option<LinkClass> {
        if link.black.len() > 3 || link.red.len() > 3 {
            return None;
        }
        let mut dedup = link.pairs.clone();
        dedup.dedup();
        if dedup.len() != link.pairs.len() {
            return None;
        }
        let mut matrix = [[false; 3]; 3];
        for &(b, r) in &dedup {
            matrix[b][r] = true;
        }
        // An incident edge carried by no square is invisible to the pair
        // matrix; reject it rather than classify the smaller shape.
        let isolated = (0..link.black.len()).any(|i| !matrix[i].iter().any(|&x| x))
            || (0..link.red.len()).any(|j| !matrix.iter().any(|row| row[j]));
        if isolated {
            return None;
        }
        let key = canonical_link_key(&matrix);
        if !link_census().contains(&key) {
            return None;
        }
        let (v, e) = link_counts(&matrix);
        LinkClass::from_counts(v, e)
    }

    /// Swap the two colors (transpose every square).
    pub fn swap_colors(&self) -> VhComplex {
        let edges: Vec<EdgeCell> = self
            .edges
            .iter()
            .map(|e| EdgeCell { color: e.color.other(), a: e.a, b: e.b, prov: e.prov.clone() })
            .collect();
        let squares: Vec<SquareCell> = self
            .squares
            .iter()
            .map(|s| SquareCell {
                corners: [s.corners[0], s.corners[2], s.corners[1], s.corners[3]],
                bottom: s.left,
                top: s.right,
                left: s.bottom,
                right: s.top,
                prov: s.prov.clone(),
            })
            .collect();
        VhComplex::new(self.genus, self.vertex_prov.clone(), edges, squares)
            .expect("transposing preserves structure")
    }

    /// The structural invariant report.
    pub fn validate_properties(&self) -> Vec<Check> {
        let g = self.genus as i64;
        let mut out = Vec::new();

        let chi = self.euler_characteristic();
        out.push(Check {
            pass: chi == 1 - g,
            name: "euler-characteristic",
            witness: format!("chi={chi} want={}", 1 - g),
        });
        out.push(Check {
            pass: self.is_connected(),
            name: "connected",
            witness: format!("vertices={}", self.vertex_count()),
        });

        for color in [Color::Black, Color::Red] {
            let hs = self.hyperplanes(color);
            let want = 3 * g - 3;
            let (count_name, tree_name) = match color {
                Color::Black => ("hyperplane-count-black", "hyperplanes-black-trees"),
                Color::Red => ("hyperplane-count-red", "hyperplanes-red-trees"),
            };
            out.push(Check {
                pass: hs.len() as i64 == want,
                name: count_name,
                witness: format!("got={} want={want}", hs.len()),
            });
            let bad = hs.iter().position(|h| !h.is_tree());
            out.push(Check {
                pass: bad.is_none(),
                name: tree_name,
                witness: match bad {
                    Some(i) => format!(
                        "class {i} has {} edges and {} squares",
                        hs[i].edges.len(),
                        hs[i].squares.len()
                    ),
                    None => format!("classes={}", hs.len()),
                },
            });
        }

        let bad_link = (0..self.vertex_count())
            .find(|&v| VhComplex::classify_link(&self.vertex_link(v)).is_none());
        out.push(Check {
            pass: bad_link.is_none(),
            name: "links-classified",
            witness: match bad_link {
                Some(v) => format!("vertex v{v} has an unrecognized link"),
                None => format!("vertices={}", self.vertex_count()),
            },
        });

        for (contracted, name) in
            [(Color::Red, "collapse-to-first"), (Color::Black, "collapse-to-second")]
        {
            let gr = self.collapse(contracted);
            let pass = gr.is_connected()
                && gr.is_trivalent()
                && gr.n as i64 == 2 * g - 2
                && gr.edges.len() as i64 == 3 * g - 3;
            out.push(Check {
                pass,
                name,
                witness: format!("vertices={} edges={}", gr.n, gr.edges.len()),
            });
        }
        out
    }

    pub fn serialize(&self) -> String {
        let mut out = format!("vhcomplex genus={}\n", self.genus);
        for (i, p) in self.vertex_prov.iter().enumerate() {
            out.push_str(&format!("vertex v{i}{}\n", prov_suffix(p)));
        }
        for (i, e) in self.edges.iter().enumerate() {
            out.push_str(&format!(
                "edge e{i} {} v{} v{}{}\n",
                e.color.name(),
                e.a,
                e.b,
                prov_suffix(&e.prov)
            ));
        }
        for (i, s) in self.squares.iter().enumerate() {
            out.push_str(&format!(
                "square s{i} corners v{} v{} v{} v{} sides e{} e{} e{} e{}{}\n",
                s.corners[0],
                s.corners[1],
                s.corners[2],
                s.corners[3],
                s.bottom,
                s.top,
                s.left,
                s.right,
                prov_suffix(&s.prov)
            ));
        }
        out
    }

    pub fn parse(text: &str) -> Result<VhComplex, ComplexError> {
        let perr = |line: usize, msg: &str| ComplexError::Parse { line, msg: msg.to_string() };
        let mut genus: Option<u8> = None;
        let mut vertex_prov = Vec::new();
        let mut edges: Vec<EdgeCell> = Vec::new();
        let mut squares = Vec::new();

        let id = |tok: &str, prefix: char, line: usize| -> Result<usize, ComplexError> {
            tok.strip_prefix(prefix)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| perr(line, &format!("expected {prefix}<n>, found {tok:?}")))
        };

        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            match toks[0] {
                "vhcomplex" => {
                    let g = toks
                        .get(1)
                        .and_then(|t| t.strip_prefix("genus="))
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| perr(lineno, "header needs genus=<n>"))?;
                    genus = Some(g);
                }
                "vertex" => {
                    if toks.len() < 2 || id(toks[1], 'v', lineno)? != vertex_prov.len() {
                        return Err(perr(lineno, "vertices must be numbered in order"));
                    }
                    vertex_prov.push(parse_prov(&toks[2..]));
                }
                "edge" => {
                    if toks.len() < 5 || id(toks[1], 'e', lineno)? != edges.len() {
                        return Err(perr(lineno, "edges must be numbered in order"));
                    }
                    let color = match toks[2] {
                        "black" => Color::Black,
                        "red" => Color::Red,
                        _ => return Err(perr(lineno, "edge color must be black or red")),
                    };
                    let a = id(toks[3], 'v', lineno)?;
                    let b = id(toks[4], 'v', lineno)?;
                    edges.push(EdgeCell { color, a, b, prov: parse_prov(&toks[5..]) });
                }
                "square" => {
                    if toks.len() < 11
                        || id(toks[1], 's', lineno)? != squares.len()
                        || toks[2] != "corners"
                        || toks[7] != "sides"
                    {
                        return Err(perr(lineno, "square line must list corners and sides"));
                    }
                    let c = [
                        id(toks[3], 'v', lineno)?,
                        id(toks[4], 'v', lineno)?,
                        id(toks[5], 'v', lineno)?,
                        id(toks[6], 'v', lineno)?,
                    ];
                    squares.push(SquareCell {
                        corners: c,
                        bottom: id(toks[8], 'e', lineno)?,
                        top: id(toks[9], 'e', lineno)?,
                        left: id(toks[10], 'e', lineno)?,
                        right: id(toks[11], 'e', lineno)?,
                        prov: parse_prov(&toks[12..]),
                    });
                }
                _ => return Err(perr(lineno, "unrecognized line")),
            }
        }
        let genus = genus.ok_or_else(|| perr(0, "missing vhcomplex header"))?;
        VhComplex::new(genus, vertex_prov, edges, squares)
    }

    /// The 1-skeleton in DOT format with colored edges, deterministically
    /// ordered.
    pub fn export_dot(&self) -> String {
        let mut out = String::from("graph core {\n");
        out.push_str(&format!("  // squares: {}\n", self.square_count()));
        for v in 0..self.vertex_count() {
            out.push_str(&format!("  v{v};\n"));
        }
        for e in &self.edges {
            out.push_str(&format!(
                "  v{} -- v{} [color={}];\n",
                e.a,
                e.b,
                match e.color {
                    Color::Black => "black",
                    Color::Red => "red",
                }
            ));
        }
        out.push_str("}\n");
        out
    }
}

fn prov_suffix(p: &Option<String>) -> String {
    match p {
        Some(s) => format!(" prov={s}"),
        None => String::new(),
    }
}

fn parse_prov(toks: &[&str]) -> Option<String> {
    toks.first().and_then(|t| t.strip_prefix("prov=").map(|s| s.to_string()))
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> UnionFind {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let r = self.find(self.parent[x]);
            self.parent[x] = r;
        }
        self.parent[x]
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

fn link_counts(matrix: &[[bool; 3]; 3]) -> (usize, usize) {
    let mut rows = [false; 3];
    let mut cols = [false; 3];
    let mut e = 0;
    for i in 0..3 {
        for j in 0..3 {
            if matrix[i][j] {
                rows[i] = true;
                cols[j] = true;
                e += 1;
            }
        }
    }
    let v = rows.iter().filter(|x| **x).count() + cols.iter().filter(|x| **x).count();
    (v, e)
}

/// Canonical key of a bipartite link graph on 3+3 slots: the minimum bit
/// pattern over row permutations, column permutations, and transposition.
fn canonical_link_key(matrix: &[[bool; 3]; 3]) -> u16 {
    const PERMS: [[usize; 3]; 6] =
        [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut best = u16::MAX;
    for transpose in [false, true] {
        for rp in PERMS {
            for cp in PERMS {
                let mut bits: u16 = 0;
                for i in 0..3 {
                    for j in 0..3 {
                        let val = if transpose {
                            matrix[cp[j]][rp[i]]
                        } else {
                            matrix[rp[i]][cp[j]]
                        };
                        if val {
                            bits |= 1 << (i * 3 + j);
                        }
                    }
                }
                best = best.min(bits);
            }
        }
    }
    best
}

/// The census of links derivable from admissible 3×3 intersection tables: a
/// table needs a cross in each row and column and no lonely cross (each
/// cross's row and column must together hold a second cross). A link edge
/// appears at a cross whose row contains another cross, whose column
/// contains another cross, and whose complementary 2×2 block contains a
/// cross — the four overlap conditions of a non-nested pair, read off the
/// table. Exactly nine nonempty link shapes arise.
fn link_census() -> &'static BTreeSet<u16> {
    static CENSUS: OnceLock<BTreeSet<u16>> = OnceLock::new();
    CENSUS.get_or_init(|| {
        let mut out = BTreeSet::new();
        for bits in 0u16..512 {
            let t = |i: usize, j: usize| bits & (1 << (i * 3 + j)) != 0;
            let row = |i: usize| (0..3).filter(|&j| t(i, j)).count();
            let col = |j: usize| (0..3).filter(|&i| t(i, j)).count();
            let admissible = (0..3).all(|i| row(i) >= 1)
                && (0..3).all(|j| col(j) >= 1)
                && (0..3).all(|i| (0..3).all(|j| !t(i, j) || row(i) + col(j) >= 3));
            if !admissible {
                continue;
            }
            let far = |i: usize, j: usize| {
                (0..3).any(|k| (0..3).any(|l| k != i && l != j && t(k, l)))
            };
            let mut matrix = [[false; 3]; 3];
            let mut any = false;
            for i in 0..3 {
                for j in 0..3 {
                    if t(i, j) && row(i) >= 2 && col(j) >= 2 && far(i, j) {
                        matrix[i][j] = true;
                        any = true;
                    }
                }
            }
            if any {
                out.insert(canonical_link_key(&matrix));
            }
        }
        out
    })
}

impl SmallGraph {
    pub fn degree(&self, v: usize) -> usize {
        self.edges
            .iter()
            .map(|&(a, b)| usize::from(a == v) + usize::from(b == v))
            .sum()
    }

    pub fn is_trivalent(&self) -> bool {
        (0..self.n).all(|v| self.degree(v) == 3)
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return false;
        }
        let mut adj = vec![Vec::new(); self.n];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut seen = vec![false; self.n];
        seen[0] = true;
        let mut queue = VecDeque::from([0usize]);
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == self.n
    }

    fn pair_counts(&self) -> BTreeMap<(usize, usize), usize> {
        let mut m = BTreeMap::new();
        for &(a, b) in &self.edges {
            *m.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
        m
    }

    /// Multigraph isomorphism by backtracking on a degree-and-loop
    /// signature; returns a vertex bijection self→other.
    pub fn isomorphic(&self, other: &SmallGraph) -> Option<Vec<usize>> {
        if self.n != other.n || self.edges.len() != other.edges.len() {
            return None;
        }
        let sig = |g: &SmallGraph, v: usize| {
            let loops = g.edges.iter().filter(|&&(a, b)| a == v && b == v).count();
            (g.degree(v), loops)
        };
        let mut ka: Vec<(usize, usize)> = (0..self.n).map(|v| sig(self, v)).collect();
        let mut kb: Vec<(usize, usize)> = (0..other.n).map(|v| sig(other, v)).collect();
        ka.sort();
        kb.sort();
        if ka != kb {
            return None;
        }

        let ca = self.pair_counts();
        let cb = other.pair_counts();
        let mut map = vec![usize::MAX; self.n];
        let mut used = vec![false; other.n];

        fn extend(
            g: &SmallGraph,
            h: &SmallGraph,
            ca: &BTreeMap<(usize, usize), usize>,
            cb: &BTreeMap<(usize, usize), usize>,
            map: &mut Vec<usize>,
            used: &mut Vec<bool>,
            v: usize,
        ) -> bool {
            if v == g.n {
                return true;
            }
            let sig = |g: &SmallGraph, v: usize| {
                let loops = g.edges.iter().filter(|&&(a, b)| a == v && b == v).count();
                (g.degree(v), loops)
            };
            for w in 0..h.n {
                if used[w] || sig(g, v) != sig(h, w) {
                    continue;
                }
                let ok = (0..v).all(|u| {
                    let key_a = (u.min(v), u.max(v));
                    let key_b = (map[u].min(w), map[u].max(w));
                    ca.get(&key_a).copied().unwrap_or(0) == cb.get(&key_b).copied().unwrap_or(0)
                }) && {
                    let la = ca.get(&(v, v)).copied().unwrap_or(0);
                    let lb = cb.get(&(w, w)).copied().unwrap_or(0);
                    la == lb
                };
                if !ok {
                    continue;
                }
                map[v] = w;
                used[w] = true;
                if extend(g, h, ca, cb, map, used, v + 1) {
                    return true;
                }
                map[v] = usize::MAX;
                used[w] = false;
            }
            false
        }

        if extend(self, other, &ca, &cb, &mut map, &mut used, 0) {
            Some(map)
        } else {
            None
        }
    }
}

/// Colored isomorphism of complexes: a vertex bijection preserving colored
/// edge multiplicities and square shapes.
pub fn isomorphic_colored(a: &VhComplex, b: &VhComplex) -> Option<Vec<usize>> {
    if a.vertex_count() != b.vertex_count()
        || a.edge_count() != b.edge_count()
        || a.square_count() != b.square_count()
    {
        return None;
    }
    let n = a.vertex_count();

    // Signature: colored degrees plus link classification.
    let signature = |c: &VhComplex, v: usize| {
        let mut db = 0;
        let mut dr = 0;
        for e in c.edges() {
            let times = usize::from(e.a == v) + usize::from(e.b == v);
            match e.color {
                Color::Black => db += times,
                Color::Red => dr += times,
            }
        }
        let link = c.vertex_link(v);
        (db, dr, link.pairs.len(), VhComplex::classify_link(&link))
    };
    let siga: Vec<_> = (0..n).map(|v| signature(a, v)).collect();
    let sigb: Vec<_> = (0..n).map(|v| signature(b, v)).collect();
    {
        let mut ka = siga.clone();
        let mut kb = sigb.clone();
        ka.sort();
        kb.sort();
        if ka != kb {
            return None;
        }
    }

    let pair_counts = |c: &VhComplex| {
        let mut m: BTreeMap<(Color, usize, usize), usize> = BTreeMap::new();
        for e in c.edges() {
            *m.entry((e.color, e.a.min(e.b), e.a.max(e.b))).or_insert(0) += 1;
        }
        m
    };
    let ca = pair_counts(a);
    let cb = pair_counts(b);

    let square_keys = |c: &VhComplex, map: Option<&[usize]>| {
        let mut keys: Vec<[usize; 4]> = c
            .squares()
            .iter()
            .map(|s| {
                let m = |v: usize| map.map_or(v, |mm| mm[v]);
                let c00 = m(s.corners[0]);
                let c10 = m(s.corners[1]);
                let c01 = m(s.corners[2]);
                let c11 = m(s.corners[3]);
                // Minimum over the color-preserving symmetries of a square.
                [
                    [c00, c10, c01, c11],
                    [c10, c00, c11, c01],
                    [c01, c11, c00, c10],
                    [c11, c01, c10, c00],
                ]
                .into_iter()
                .min()
                .unwrap()
            })
            .collect();
        keys.sort();
        keys
    };

    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];

    struct Ctx<'a> {
        siga: &'a [(usize, usize, usize, Option<LinkClass>)],
        sigb: &'a [(usize, usize, usize, Option<LinkClass>)],
        ca: &'a BTreeMap<(Color, usize, usize), usize>,
        cb: &'a BTreeMap<(Color, usize, usize), usize>,
    }

    fn extend(ctx: &Ctx, map: &mut Vec<usize>, used: &mut Vec<bool>, v: usize) -> bool {
        let n = map.len();
        if v == n {
            return true;
        }
        for w in 0..n {
            if used[w] || ctx.siga[v] != ctx.sigb[w] {
                continue;
            }
            let ok = (0..v).all(|u| {
                [Color::Black, Color::Red].into_iter().all(|col| {
                    let ka = (col, u.min(v), u.max(v));
                    let kb = (col, map[u].min(w), map[u].max(w));
                    ctx.ca.get(&ka).copied().unwrap_or(0) == ctx.cb.get(&kb).copied().unwrap_or(0)
                })
            });
            if !ok {
                continue;
            }
            map[v] = w;
            used[w] = true;
            if extend(ctx, map, used, v + 1) {
                return true;
            }
            map[v] = usize::MAX;
            used[w] = false;
        }
        false
    }

    let ctx = Ctx { siga: &siga, sigb: &sigb, ca: &ca, cb: &cb };
    if !extend(&ctx, &mut map, &mut used, 0) {
        return None;
    }
    // Final square-shape verification.
    if square_keys(a, Some(&map)) != square_keys(b, None) {
        return None;
    }
    Some(map)
}
