//! The core of a pair of marked trees and its finite quotient complex.
//!
//! Two marked graphs of equal genus present two trees with the same group
//! acting on both; a square of the core is a pair of edge lifts, one per
//! tree, whose end partitions are non-nested. The group acts freely and
//! diagonally on squares, so each orbit has a unique normal form: the
//! first-tree edge at its canonical lift and the residual deck word pushed
//! onto the second-tree coordinate through the marking transfer. The
//! quotient is assembled cell by cell from those normal forms.
//!
//! Everything here requires the separation hypothesis: no edge lift of the
//! first tree may induce the same end partition as an edge lift of the
//! second. Pair construction verifies it and reports a concrete violating
//! pair otherwise.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::complex::{Color, ComplexError, EdgeCell, SmallGraph, SquareCell, VhComplex};
use crate::endset::Bipartition;
use crate::tree::{CoverEdge, CoverVertex, EdgeId, MarkedGraph, VertexId};
use crate::word::Word;

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("genus mismatch: {0} vs {1}")]
    GenusMismatch(u8, u8),
    #[error(
        "edge orbit {orbit1} of the first tree and the lift of {orbit2} at deck {deck2} of the \
         second tree induce the same end partition"
    )]
    HypothesisViolated { orbit1: String, orbit2: String, deck2: String },
    #[error("square assembly produced identified corners: {0}")]
    DegenerateCore(String),
    #[error("internal invariant failed: {0}")]
    Internal(String),
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

/// Normal form of one square orbit: the first-tree edge orbit together with
/// a second-tree edge coordinate (forward-oriented), taken relative to the
/// canonical lift of the orbit edge.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct QuotientSquare {
    pub orbit1: EdgeId,
    pub edge2: CoverEdge,
}

#[derive(Debug, Clone)]
pub struct CorePair {
    t1: MarkedGraph,
    t2: MarkedGraph,
}

impl CorePair {
    /// Pair two marked graphs, verifying equal genus and the separation
    /// hypothesis.
    pub fn new(t1: MarkedGraph, t2: MarkedGraph) -> Result<CorePair, BuildError> {
        if t1.genus() != t2.genus() {
            return Err(BuildError::GenusMismatch(t1.genus(), t2.genus()));
        }
        let pair = CorePair { t1, t2 };
        if let Some((orbit, edge2)) = pair.hypothesis_counterexample() {
            return Err(pair.violation(orbit, &edge2));
        }
        Ok(pair)
    }

    pub fn t1(&self) -> &MarkedGraph {
        &self.t1
    }

    pub fn t2(&self) -> &MarkedGraph {
        &self.t2
    }

    fn violation(&self, orbit1: EdgeId, e2: &CoverEdge) -> BuildError {
        BuildError::HypothesisViolated {
            orbit1: self.t1.edge(orbit1).name.clone(),
            orbit2: self.t2.edge(e2.cell).name.clone(),
            deck2: e2.deck.render(),
        }
    }

    /// Translate a deck word of the first tree into the deck word acting the
    /// same way on the second tree.
    pub fn transfer(&self, deck1: &Word) -> Word {
        self.t2.marking_inv().apply(&self.t1.marking().apply(deck1))
    }

    /// Search for a pair of edge lifts inducing equal partitions. For each
    /// first-tree orbit, two ends are sampled on each side of its partition;
    /// any equal-partition edge of the second tree must separate the plus
    /// samples from the minus samples, hence lie on the segment between the
    /// two three-point medians — a finite, complete candidate list.
    pub fn hypothesis_counterexample(&self) -> Option<(EdgeId, CoverEdge)> {
        for orbit in 0..self.t1.edge_count() {
            let orbit = EdgeId(orbit);
            let lift = self.t1.canonical_lift(orbit);
            let part = self.t1.half_space(&lift);
            let plus = part.plus().sample_ends(2);
            let minus = part.minus().sample_ends(2);
            debug_assert!(plus.len() == 2 && minus.len() == 2);
            let xp: Vec<_> = plus.iter().map(|e| self.t2.end_from_std(e)).collect();
            let xm: Vec<_> = minus.iter().map(|e| self.t2.end_from_std(e)).collect();
            let m_plus = self.t2.median(&xp[0], &xp[1], &xm[0]);
            let m_minus = self.t2.median(&xm[0], &xm[1], &xp[0]);
            for cand in self.t2.geodesic(&m_plus, &m_minus) {
                if part.same_partition(&self.t2.half_space(&cand)) {
                    return Some((orbit, cand));
                }
            }
        }
        None
    }

    /// Whether two edge lifts, one per tree, span a square of the core.
    pub fn edges_non_nested(&self, e1: &CoverEdge, e2: &CoverEdge) -> bool {
        self.t1.half_space(e1).non_nested(&self.t2.half_space(e2))
    }

    /// Walk budget for the seed search: generous slack over the sampled
    /// prefix depth, scaled by how much the two markings can stretch words.
    fn seed_cap(&self, part: &Bipartition) -> usize {
        let depth = part.plus().max_prefix_len().max(part.minus().max_prefix_len());
        let stretch = 1
            + self.t1.marking_inv().lipschitz()
            + self.t2.marking().lipschitz()
            + self.t2.marking_inv().lipschitz();
        64 + 8 * (depth + 1) * stretch
    }

    /// Find one second-tree edge spanning a square with `e1`, by replaying
    /// the constructive existence proof: walk toward a plus-side end until
    /// the crossed edge is strictly nested inside the plus side, then walk
    /// back toward a minus-side end until the plus side is first swallowed;
    /// at that flip either the previous edge or the third edge at the shared
    /// vertex is non-nested.
    pub fn find_seed(&self, e1: &CoverEdge) -> Result<CoverEdge, BuildError> {
        let part = self.t1.half_space(e1);
        let eplus = part.plus();
        let xi_p = self.t2.end_from_std(&eplus.sample_ends(1)[0]);
        let xi_m = self.t2.end_from_std(&part.minus().sample_ends(1)[0]);
        let cap = self.seed_cap(&part);

        let mut v = self.t2.base_vertex();
        let mut nested = None;
        for _ in 0..cap {
            let (edge, next) = self.t2.walk_toward(&v, &xi_p);
            let h = self.t2.half_space(&edge);
            if part.same_partition(&h) {
                return Err(self.violation(e1.cell, &edge));
            }
            if h.plus().is_subset(eplus) {
                nested = Some(edge);
                break;
            }
            v = next;
        }
        let Some(mut prev) = nested else {
            return self.seed_fallback(e1, &part);
        };

        let mut v = self.t2.endpoints(&prev).0;
        for _ in 0..cap {
            let (away, next) = self.t2.walk_toward(&v, &xi_m);
            let toward = away.reversed();
            let h = self.t2.half_space(&toward);
            if part.same_partition(&h) {
                return Err(self.violation(e1.cell, &toward));
            }
            if eplus.is_subset(h.plus()) {
                // The flip: `prev` still fails to swallow the plus side.
                let hp = self.t2.half_space(&prev);
                if part.non_nested(&hp) {
                    return Ok(prev);
                }
                // Otherwise the third edge at the shared vertex must work.
                let third = self
                    .t2
                    .cover_neighbors(&v)
                    .into_iter()
                    .map(|(e, _)| e)
                    .find(|e| {
                        e.unoriented() != prev.unoriented() && e.unoriented() != away.unoriented()
                    })
                    .ok_or_else(|| {
                        BuildError::Internal("no third edge at the seed vertex".into())
                    })?;
                let ht = self.t2.half_space(&third);
                if part.same_partition(&ht) {
                    return Err(self.violation(e1.cell, &third));
                }
                if part.non_nested(&ht) {
                    return Ok(third);
                }
                return Err(BuildError::Internal(
                    "neither flip edge is non-nested at the seed vertex".into(),
                ));
            }
            prev = toward;
            v = next;
        }
        self.seed_fallback(e1, &part)
    }

    /// Fallback seed search: scan second-tree edges outward from the base
    /// until one is non-nested. Only reachable if the walk budget of the
    /// proof replay is ever exceeded.
    fn seed_fallback(&self, e1: &CoverEdge, part: &Bipartition) -> Result<CoverEdge, BuildError> {
        for radius in 1..=10 {
            let (_, edges) = self.t2.ball(radius);
            for e2 in edges {
                let h = self.t2.half_space(&e2);
                if part.same_partition(&h) {
                    return Err(self.violation(e1.cell, &e2));
                }
                if part.non_nested(&h) {
                    return Ok(e2);
                }
            }
        }
        Err(BuildError::Internal("seed search exhausted".into()))
    }

    /// All second-tree edges spanning squares with `e1`: breadth-first from
    /// a seed, keeping non-nested edges. The set is a connected subtree, so
    /// the search is complete.
    pub fn fiber_of(&self, e1: &CoverEdge) -> Result<Vec<CoverEdge>, BuildError> {
        let part = self.t1.half_space(e1);
        let seed = self.find_seed(e1)?;
        self.collect_subtree(seed, |h| part.non_nested(h), |h| part.same_partition(h))
            .map_err(|e2| self.violation(e1.cell, &e2))
    }

    /// Fiber of an orbit edge at its canonical lift.
    pub fn fiber(&self, orbit: EdgeId) -> Result<Vec<CoverEdge>, BuildError> {
        self.fiber_of(&self.t1.canonical_lift(orbit))
    }

    /// All second-tree edges whose squares touch the fiber of a first-tree
    /// vertex: edges whose half-spaces both meet at least two pieces of the
    /// vertex tripartition. Equals the union of the three incident edge
    /// fibers.
    pub fn vertex_fiber(&self, v1: &CoverVertex) -> Result<Vec<CoverEdge>, BuildError> {
        let parts = self.t1.tripartition(v1);
        debug_assert_eq!(parts.len(), 3);
        let keep = |h: &Bipartition| {
            parts
                .iter()
                .all(|(_, d)| !h.plus().is_subset(d) && !h.minus().is_subset(d))
        };
        let seed = self.find_seed(&parts[0].0)?;
        debug_assert!(keep(&self.t2.half_space(&seed)));
        self.collect_subtree(seed, keep, |_| false)
            .map_err(|_| BuildError::Internal("vertex fiber rejection cannot trip".into()))
    }

    /// Breadth-first closure over edge-adjacency in the second tree keeping
    /// `keep` edges; `reject` aborts with the offending edge (used to
    /// surface equal partitions met during exploration).
    fn collect_subtree(
        &self,
        seed: CoverEdge,
        keep: impl Fn(&Bipartition) -> bool,
        reject: impl Fn(&Bipartition) -> bool,
    ) -> Result<Vec<CoverEdge>, CoverEdge> {
        let mut seen: BTreeSet<(Word, EdgeId)> = BTreeSet::new();
        let mut out = Vec::new();
        let mut queue = VecDeque::new();
        seen.insert(seed.unoriented());
        queue.push_back(seed);
        while let Some(e) = queue.pop_front() {
            let (deck, cell) = e.unoriented();
            out.push(CoverEdge { deck, cell, rev: false });
            let (t, h) = self.t2.endpoints(&e);
            for v in [t, h] {
                for (n, _) in self.t2.cover_neighbors(&v) {
                    if !seen.insert(n.unoriented()) {
                        continue;
                    }
                    let hn = self.t2.half_space(&n);
                    if reject(&hn) {
                        return Err(n);
                    }
                    if keep(&hn) {
                        queue.push_back(n);
                    }
                }
            }
        }
        out.sort_by_key(CoverEdge::sort_key);
        Ok(out)
    }

    /// All square normal forms, sorted: one entry per orbit edge of the
    /// first graph and fiber element of its canonical lift.
    pub fn squares(&self) -> Result<Vec<QuotientSquare>, BuildError> {
        let mut out = Vec::new();
        for orbit in 0..self.t1.edge_count() {
            let orbit = EdgeId(orbit);
            for edge2 in self.fiber(orbit)? {
                out.push(QuotientSquare { orbit1: orbit, edge2 });
            }
        }
        Ok(out)
    }

    /// Assemble the quotient complex from the square normal forms. Corners
    /// are vertex pairs normalized by pushing the first-tree deck word onto
    /// the second-tree coordinate; freeness of the actions makes every
    /// normal form unique, so cells are identified purely by key.
    pub fn build(&self) -> Result<VhComplex, BuildError> {
        let squares = self.squares()?;

        type VKey = (usize, Word, usize);
        type BKey = (usize, Word, usize);
        type RKey = (usize, Word, usize);

        let vkey = |v1: VertexId, w: &CoverVertex| (v1.0, w.deck.clone(), w.cell.0);
        let bkey = |e1: EdgeId, w: &CoverVertex| (e1.0, w.deck.clone(), w.cell.0);
        let rkey = |v1: VertexId, f: &CoverEdge| {
            let (deck, cell) = f.unoriented();
            (v1.0, deck, cell.0)
        };

        struct Corner {
            key: VKey,
            prov: String,
        }

        // Per square: the four corner keys, the two black keys (bottom at
        // the tail of edge2, top at its head) and two red keys (left at the
        // tail of the orbit edge, right at its head).
        struct Assembled {
            corners: [Corner; 4],
            black: [(BKey, String); 2],
            red: [(RKey, String); 2],
            prov: String,
        }

        let mut assembled = Vec::new();
        for sq in &squares {
            let lift1 = self.t1.canonical_lift(sq.orbit1);
            let (p, q) = self.t1.endpoints(&lift1);
            debug_assert!(p.deck.is_empty());
            let shift = self.transfer(&q.deck.inverse());
            let (r, s) = self.t2.endpoints(&sq.edge2);
            let ver = |v1: &CoverVertex, w: &CoverVertex| -> Corner {
                let moved = if v1.deck.is_empty() {
                    w.clone()
                } else {
                    self.t2.translate_vertex(&shift, w)
                };
                Corner {
                    prov: format!(
                        "{}:{}:{}",
                        self.t1.vertex_name(v1.cell),
                        moved.deck.render(),
                        self.t2.vertex_name(moved.cell)
                    ),
                    key: vkey(v1.cell, &moved),
                }
            };
            let red = |v1: &CoverVertex| -> (RKey, String) {
                let moved = if v1.deck.is_empty() {
                    sq.edge2.clone()
                } else {
                    self.t2.translate_edge(&shift, &sq.edge2)
                };
                let prov = format!(
                    "{}:{}:{}",
                    self.t1.vertex_name(v1.cell),
                    moved.unoriented().0.render(),
                    self.t2.edge(moved.cell).name
                );
                (rkey(v1.cell, &moved), prov)
            };
            let black = |w: &CoverVertex| -> (BKey, String) {
                let prov = format!(
                    "{}:{}:{}",
                    self.t1.edge(sq.orbit1).name,
                    w.deck.render(),
                    self.t2.vertex_name(w.cell)
                );
                (bkey(sq.orbit1, w), prov)
            };
            assembled.push(Assembled {
                corners: [ver(&p, &r), ver(&q, &r), ver(&p, &s), ver(&q, &s)],
                black: [black(&r), black(&s)],
                red: [red(&p), red(&q)],
                prov: format!(
                    "{}:{}:{}",
                    self.t1.edge(sq.orbit1).name,
                    sq.edge2.deck.render(),
                    self.t2.edge(sq.edge2.cell).name
                ),
            });
        }

        // Deterministic ids: sorted keys; black edges before red ones.
        let mut vertices: BTreeMap<VKey, Option<String>> = BTreeMap::new();
        let mut blacks: BTreeMap<BKey, Option<String>> = BTreeMap::new();
        let mut reds: BTreeMap<RKey, Option<String>> = BTreeMap::new();
        for a in &assembled {
            for c in &a.corners {
                vertices.entry(c.key.clone()).or_insert_with(|| Some(c.prov.clone()));
            }
            for (k, prov) in &a.black {
                blacks.entry(k.clone()).or_insert_with(|| Some(prov.clone()));
            }
            for (k, prov) in &a.red {
                reds.entry(k.clone()).or_insert_with(|| Some(prov.clone()));
            }
        }
        let vid: BTreeMap<&VKey, usize> =
            vertices.keys().enumerate().map(|(i, k)| (k, i)).collect();
        let bid: BTreeMap<&BKey, usize> = blacks.keys().enumerate().map(|(i, k)| (k, i)).collect();
        let roff = blacks.len();
        let rid: BTreeMap<&RKey, usize> =
            reds.keys().enumerate().map(|(i, k)| (k, i + roff)).collect();

        // Edge endpoint bookkeeping, then square cells.
        let mut edge_cells: Vec<Option<EdgeCell>> = vec![None; blacks.len() + reds.len()];
        let mut square_cells = Vec::new();
        for a in &assembled {
            let c = [
                vid[&a.corners[0].key],
                vid[&a.corners[1].key],
                vid[&a.corners[2].key],
                vid[&a.corners[3].key],
            ];
            for i in 0..4 {
                for j in i + 1..4 {
                    if c[i] == c[j] {
                        return Err(BuildError::DegenerateCore(a.prov.clone()));
                    }
                }
            }
            let bottom = bid[&a.black[0].0];
            let top = bid[&a.black[1].0];
            let left = rid[&a.red[0].0];
            let right = rid[&a.red[1].0];
            let mut place = |id: usize, color: Color, x: usize, y: usize, prov: &str| {
                let cell = EdgeCell { color, a: x, b: y, prov: Some(prov.to_string()) };
                match &edge_cells[id] {
                    None => edge_cells[id] = Some(cell),
                    Some(old) => debug_assert_eq!((old.a, old.b), (cell.a, cell.b)),
                }
            };
            place(bottom, Color::Black, c[0], c[1], &a.black[0].1);
            place(top, Color::Black, c[2], c[3], &a.black[1].1);
            place(left, Color::Red, c[0], c[2], &a.red[0].1);
            place(right, Color::Red, c[1], c[3], &a.red[1].1);
            square_cells.push(SquareCell {
                corners: c,
                bottom,
                top,
                left,
                right,
                prov: Some(a.prov.clone()),
            });
        }

        let edge_cells: Vec<EdgeCell> = edge_cells
            .into_iter()
            .map(|e| e.ok_or_else(|| BuildError::Internal("edge cell never placed".into())))
            .collect::<Result<_, _>>()?;
        let complex = VhComplex::new(
            self.t1.genus(),
            vertices.into_values().collect(),
            edge_cells,
            square_cells,
        )?;
        Ok(complex)
    }

    /// Brute-force window comparison: enumerate all edge-lift pairs within
    /// radius `r` balls of both covers, test non-nestedness directly, and
    /// compare against the assembled squares lifted into the same window.
    pub fn oracle_window(&self, radius: usize) -> Result<OracleReport, BuildError> {
        let (_, edges1) = self.t1.ball(radius);
        let (_, edges2) = self.t2.ball(radius);
        let halves1: Vec<(CoverEdge, Bipartition)> =
            edges1.iter().map(|e| (e.clone(), self.t1.half_space(e))).collect();
        let halves2: Vec<(CoverEdge, Bipartition)> =
            edges2.iter().map(|e| (e.clone(), self.t2.half_space(e))).collect();

        type PairKey = ((Word, EdgeId), (Word, EdgeId));
        let mut window: BTreeSet<PairKey> = BTreeSet::new();
        for (e1, h1) in &halves1 {
            for (e2, h2) in &halves2 {
                if h1.non_nested(h2) {
                    window.insert((e1.unoriented(), e2.unoriented()));
                }
            }
        }

        let squares = self.squares()?;
        let mut by_orbit: BTreeMap<EdgeId, Vec<&CoverEdge>> = BTreeMap::new();
        for sq in &squares {
            by_orbit.entry(sq.orbit1).or_default().push(&sq.edge2);
        }
        let in2: BTreeSet<(Word, EdgeId)> = edges2.iter().map(CoverEdge::unoriented).collect();
        let mut lifted: BTreeSet<PairKey> = BTreeSet::new();
        for e1 in &edges1 {
            let (orbit, deck) = self.t1.orbit_normalize_edge(e1);
            let tau = self.transfer(&deck);
            for f in by_orbit.get(&orbit).into_iter().flatten() {
                let moved = self.t2.translate_edge(&tau, f);
                if in2.contains(&moved.unoriented()) {
                    lifted.insert((e1.unoriented(), moved.unoriented()));
                }
            }
        }

        let missing_in_core: Vec<PairKey> = window.difference(&lifted).cloned().collect();
        let missing_in_window: Vec<PairKey> = lifted.difference(&window).cloned().collect();
        Ok(OracleReport {
            window_pairs: window.len(),
            lifted_pairs: lifted.len(),
            missing_in_core,
            missing_in_window,
        })
    }
}

/// Result of the brute-force window comparison.
#[derive(Debug, Clone)]
pub struct OracleReport {
    pub window_pairs: usize,
    pub lifted_pairs: usize,
    pub missing_in_core: Vec<((Word, EdgeId), (Word, EdgeId))>,
    pub missing_in_window: Vec<((Word, EdgeId), (Word, EdgeId))>,
}

impl OracleReport {
    pub fn clean(&self) -> bool {
        self.missing_in_core.is_empty() && self.missing_in_window.is_empty()
    }
}

/// The underlying multigraph of a marked graph, for collapse comparisons.
pub fn graph_skeleton(g: &MarkedGraph) -> SmallGraph {
    SmallGraph {
        n: g.vertex_count(),
        edges: g
            .edges()
            .iter()
            .map(|e| (e.tail.0.min(e.head.0), e.tail.0.max(e.head.0)))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::isomorphic_colored;

    const THETA_ID: &str = "genus: 2\nvertices: u w\nedge t u w tree\nedge x u w marking=a\nedge y u w marking=b\nbasepoint: u\n";
    // A marking far enough from the identity that no partitions collide.
    const THETA_GEN: &str = "genus: 2\nvertices: u w\nedge t u w tree\nedge x u w marking=ab\nedge y u w marking=ABA\nbasepoint: u\n";

    fn graph(text: &str) -> MarkedGraph {
        MarkedGraph::parse(text).unwrap()
    }

    fn valid_pair() -> CorePair {
        CorePair::new(graph(THETA_ID), graph(THETA_GEN)).unwrap()
    }

    #[test]
    fn identical_trees_are_rejected_with_a_witness() {
        let err = CorePair::new(graph(THETA_ID), graph(THETA_ID)).unwrap_err();
        match err {
            BuildError::HypothesisViolated { orbit1, orbit2, .. } => {
                assert!(["t", "x", "y"].contains(&orbit1.as_str()));
                assert!(["t", "x", "y"].contains(&orbit2.as_str()));
            }
            other => panic!("expected a hypothesis violation, got {other:?}"),
        }
    }

    #[test]
    fn conjugated_marking_is_rejected() {
        // Identity marking conjugated by "a": the trees are equivariantly
        // isomorphic, so some partition must repeat at a nontrivial deck.
        let conj = "genus: 2\nvertices: u w\nedge t u w tree\nedge x u w marking=a\nedge y u w marking=abA\nbasepoint: u\n";
        let err = CorePair::new(graph(THETA_ID), graph(conj)).unwrap_err();
        assert!(matches!(err, BuildError::HypothesisViolated { .. }));
    }

    #[test]
    fn near_identity_markings_can_still_collide() {
        // One elementary move is not always enough: with y ↦ ab the tree
        // edge of the second theta induces exactly the first tree's x-edge
        // partition.
        let near = "genus: 2\nvertices: u w\nedge t u w tree\nedge x u w marking=a\nedge y u w marking=ab\nbasepoint: u\n";
        let err = CorePair::new(graph(THETA_ID), graph(near)).unwrap_err();
        match err {
            BuildError::HypothesisViolated { orbit1, orbit2, deck2 } => {
                assert_eq!((orbit1.as_str(), orbit2.as_str(), deck2.as_str()), ("x", "t", "1"));
            }
            other => panic!("expected a hypothesis violation, got {other:?}"),
        }
    }

    #[test]
    fn genus_mismatch_is_rejected() {
        let g3 = "genus: 3\nvertices: p q r s\nedge t1 p q tree\nedge t2 p r tree\nedge t3 p s tree\nedge n1 q r marking=a\nedge n2 r s marking=b\nedge n3 q s marking=c\nbasepoint: p\n";
        let err = CorePair::new(graph(THETA_ID), graph(g3)).unwrap_err();
        assert!(matches!(err, BuildError::GenusMismatch(2, 3)));
    }

    #[test]
    fn seeds_span_squares_for_every_orbit() {
        let pair = valid_pair();
        for orbit in 0..pair.t1().edge_count() {
            let lift = pair.t1().canonical_lift(EdgeId(orbit));
            let seed = pair.find_seed(&lift).unwrap();
            assert!(pair.edges_non_nested(&lift, &seed));
        }
    }

    #[test]
    fn fibers_ignore_orientation() {
        let pair = valid_pair();
        let lift = pair.t1().canonical_lift(EdgeId(0));
        let fwd = pair.fiber_of(&lift).unwrap();
        let rev = pair.fiber_of(&lift.reversed()).unwrap();
        assert_eq!(fwd, rev);
        assert!(!fwd.is_empty());
    }

    #[test]
    fn fibers_are_equivariant() {
        let pair = valid_pair();
        let g = Word::parse("ba", 2).unwrap();
        let tau = pair.transfer(&g);
        for orbit in 0..pair.t1().edge_count() {
            let lift = pair.t1().canonical_lift(EdgeId(orbit));
            let base: BTreeSet<(Word, EdgeId)> = pair
                .fiber_of(&lift)
                .unwrap()
                .iter()
                .map(|f| pair.t2().translate_edge(&tau, f).unoriented())
                .collect();
            let moved: BTreeSet<(Word, EdgeId)> = pair
                .fiber_of(&pair.t1().translate_edge(&g, &lift))
                .unwrap()
                .iter()
                .map(CoverEdge::unoriented)
                .collect();
            assert_eq!(base, moved);
        }
    }

    #[test]
    fn theta_pair_has_eleven_squares() {
        let pair = valid_pair();
        let squares = pair.squares().unwrap();
        assert_eq!(squares.len(), 11);
        // Every orbit of both graphs appears in at least one square.
        let orbits1: BTreeSet<EdgeId> = squares.iter().map(|s| s.orbit1).collect();
        let orbits2: BTreeSet<EdgeId> = squares.iter().map(|s| s.edge2.cell).collect();
        assert_eq!(orbits1.len(), 3);
        assert_eq!(orbits2.len(), 3);
    }

    #[test]
    fn built_complex_passes_all_property_checks() {
        let pair = valid_pair();
        let complex = pair.build().unwrap();
        assert_eq!(complex.euler_characteristic(), -1);
        let report = complex.validate_properties();
        assert!(report.iter().all(|c| c.pass), "{:#?}", report);
    }

    #[test]
    fn collapses_recover_the_input_graphs() {
        let pair = valid_pair();
        let complex = pair.build().unwrap();
        let first = complex.collapse(crate::complex::Color::Red);
        let second = complex.collapse(crate::complex::Color::Black);
        assert!(first.isomorphic(&graph_skeleton(pair.t1())).is_some());
        assert!(second.isomorphic(&graph_skeleton(pair.t2())).is_some());
    }

    #[test]
    fn swapping_the_pair_swaps_the_colors() {
        let pair = valid_pair();
        let complex = pair.build().unwrap();
        let swapped = CorePair::new(graph(THETA_GEN), graph(THETA_ID)).unwrap();
        let other = swapped.build().unwrap();
        assert_eq!(other.square_count(), complex.square_count());
        assert!(isomorphic_colored(&other, &complex.swap_colors()).is_some());
    }

    #[test]
    fn window_oracle_finds_no_discrepancies() {
        let pair = valid_pair();
        let report = pair.oracle_window(3).unwrap();
        assert!(report.clean(), "{report:?}");
        assert!(report.window_pairs > 0);
    }

    #[test]
    fn vertex_fibers_are_unions_of_incident_edge_fibers() {
        let pair = valid_pair();
        for v in 0..pair.t1().vertex_count() {
            let vertex = CoverVertex {
                deck: pair.t1().deck_identity(),
                cell: VertexId(v),
            };
            let direct: BTreeSet<(Word, EdgeId)> = pair
                .vertex_fiber(&vertex)
                .unwrap()
                .iter()
                .map(CoverEdge::unoriented)
                .collect();
            let mut union = BTreeSet::new();
            for (edge, _) in pair.t1().tripartition(&vertex) {
                for f in pair.fiber_of(&edge).unwrap() {
                    union.insert(f.unoriented());
                }
            }
            assert_eq!(direct, union);
            assert!(!direct.is_empty());
        }
    }
}
