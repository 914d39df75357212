//! Piece decomposition of a validated two-colored square complex, and the
//! inverse (dual) construction.
//!
//! The complex is read as the combinatorial shadow of a 3-manifold cut along
//! two embedded sphere systems: every square yields a *1-piece* (an
//! intersection circle), every edge a *2-piece* (a planar surface with
//! boundary — disc, annulus, or pair of pants according to how many squares
//! the edge bounds), and every vertex a *3-piece* (a complementary chunk
//! whose boundary pattern is assembled from the vertex link). The sphere
//! certificate regroups the 2-pieces into sphere components (one per dual
//! hyperplane) and checks the complement structure on both sides.
//!
//! `dual_complex` rebuilds the square complex from the incidence data alone;
//! round-tripping through `build_decomposition` is the identity up to
//! colored isomorphism.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::complex::{Color, ComplexError, EdgeCell, SquareCell, VhComplex};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PieceError {
    /// An edge bounds no square or more than three; the complex is not the
    /// quotient of a core.
    #[error("edge {edge} bounds {degree} squares, expected 1 to 3")]
    DegreeOutOfRange { edge: usize, degree: usize },
    /// A 2-piece must sit between two distinct 3-pieces.
    #[error("edge {edge} is a loop and cannot separate two 3-pieces")]
    LoopEdge { edge: usize },
    /// The vertex link is outside the nine admissible shapes.
    #[error("vertex {vertex} has an unclassifiable link")]
    InvalidLink { vertex: usize },
    /// A 3-piece whose whole boundary is two discs glued along one circle
    /// is a trivial ball; systems in minimal position never produce one.
    #[error("the boundary of 3-piece {vertex} is a single pair of discs")]
    TwoDiscs { vertex: usize },
    /// Every intersection circle lies on exactly four 3-pieces.
    #[error("circle {circle} meets {count} 3-pieces, expected 4")]
    CircleIncidence { circle: usize, count: usize },
    #[error("{color} component {index} is not a tree ({edges} surfaces, {circles} circles)")]
    HyperplaneNotTree { color: Color, index: usize, edges: usize, circles: usize },
    #[error("{color} system has {found} sphere components, expected {expected}")]
    SphereCount { color: Color, found: usize, expected: usize },
    #[error("complement region {region} of the {color} system is bounded by {count} spheres, expected 3")]
    ComplementNotThreeHoled { color: Color, region: usize, count: usize },
    #[error("{color} system has {found} complement regions, expected {expected}")]
    RegionCount { color: Color, found: usize, expected: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

/// Surface type of a 2-piece, by the number of squares on the edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PieceKind {
    Disc,
    Annulus,
    Pants,
}

impl PieceKind {
    pub fn name(self) -> &'static str {
        match self {
            PieceKind::Disc => "disc",
            PieceKind::Annulus => "annulus",
            PieceKind::Pants => "pants",
        }
    }

    fn from_name(s: &str) -> Option<PieceKind> {
        match s {
            "disc" => Some(PieceKind::Disc),
            "annulus" => Some(PieceKind::Annulus),
            "pants" => Some(PieceKind::Pants),
            _ => None,
        }
    }

    fn from_degree(d: usize) -> Option<PieceKind> {
        match d {
            1 => Some(PieceKind::Disc),
            2 => Some(PieceKind::Annulus),
            3 => Some(PieceKind::Pants),
            _ => None,
        }
    }
}

/// An intersection circle: the boundary walk of one square, read as four
/// corner 3-pieces alternating with four side 2-pieces. `sides[i]` joins
/// `corners[i]` to `corners[(i + 1) % 4]`; side colors alternate starting
/// black, so the circle meets exactly two black and two red 2-pieces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OnePiece {
    pub corners: [usize; 4],
    pub sides: [usize; 4],
}

/// A planar surface with boundary, one per edge. `ends` are the two
/// 3-pieces it separates; `circles` the 1-pieces along its boundary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoPiece {
    pub color: Color,
    pub kind: PieceKind,
    pub ends: [usize; 2],
    pub circles: Vec<usize>,
}

/// One gluing circle on a 3-piece boundary: the circle id plus the black
/// and red 2-pieces it joins there.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatternCircle {
    pub one: usize,
    pub black: usize,
    pub red: usize,
}

/// The closed surface bounding a 3-piece: its constituent 2-pieces and the
/// circles gluing them, with the genus read off the vertex link. Positive
/// genus records the standing requirement that the gluing circles be
/// essential in the chunk (`essential`); the flag is declarative and not
/// checked combinatorially.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryPattern {
    pub pieces: Vec<usize>,
    pub circles: Vec<PatternCircle>,
    pub genus: usize,
    pub essential: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThreePiece {
    pub pattern: BoundaryPattern,
}

/// The full decomposition. Index i of `ones`/`twos`/`threes` corresponds to
/// square/edge/vertex i of the source complex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PieceDecomposition {
    pub genus: u8,
    pub ones: Vec<OnePiece>,
    pub twos: Vec<TwoPiece>,
    pub threes: Vec<ThreePiece>,
}

/// One sphere component: the 2-pieces of a dual hyperplane class together
/// with the circles gluing them. `euler` is the surface Euler
/// characteristic, the sum of (2 - boundary circles) over the surfaces; it
/// equals 2 exactly when the hyperplane is a tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SphereComponent {
    pub color: Color,
    pub surfaces: Vec<usize>,
    pub circles: Vec<usize>,
    pub euler: i64,
}

/// One complementary region left after cutting along all spheres of a
/// color: the 3-pieces it contains and how many spheres bound it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionReport {
    pub members: Vec<usize>,
    pub boundary: usize,
}

/// Certificate that the two 2-piece families assemble into sphere systems
/// in standard position: every component a tree (hence a sphere), the right
/// component and region counts on both sides, every region three-holed.
/// `crossings` lists, per (black, red) component pair, how many circles the
/// two share; the per-lift crossings are simple by construction, so the
/// quotient statistics here just account for every circle once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SphereSystemCertificate {
    pub genus: u8,
    pub black: Vec<SphereComponent>,
    pub red: Vec<SphereComponent>,
    pub black_regions: Vec<RegionReport>,
    pub red_regions: Vec<RegionReport>,
    pub crossings: Vec<(usize, usize, usize)>,
    pub intersection_number: usize,
}

fn edge_degree(c: &VhComplex, edge: usize) -> usize {
    c.squares()
        .iter()
        .filter(|s| s.bottom == edge || s.top == edge || s.left == edge || s.right == edge)
        .count()
}

/// Surface type of the 2-piece carried by `edge`.
pub fn two_piece_type(c: &VhComplex, edge: usize) -> Result<PieceKind, PieceError> {
    let degree = edge_degree(c, edge);
    PieceKind::from_degree(degree).ok_or(PieceError::DegreeOutOfRange { edge, degree })
}

/// Assemble the boundary pattern of the 3-piece at `vertex` from its link.
pub fn boundary_pattern(c: &VhComplex, vertex: usize) -> Result<BoundaryPattern, PieceError> {
    let link = c.vertex_link(vertex);
    let class = VhComplex::classify_link(&link).ok_or(PieceError::InvalidLink { vertex })?;
    let mut pieces: Vec<usize> = link.black.iter().chain(link.red.iter()).copied().collect();
    pieces.sort_unstable();
    pieces.dedup();
    let mut circles = Vec::new();
    for (i, s) in c.squares().iter().enumerate() {
        let corner_sides = [
            (s.corners[0], s.bottom, s.left),
            (s.corners[1], s.bottom, s.right),
            (s.corners[2], s.top, s.left),
            (s.corners[3], s.top, s.right),
        ];
        for (corner, black, red) in corner_sides {
            if corner == vertex {
                circles.push(PatternCircle { one: i, black, red });
            }
        }
    }
    circles.sort_by_key(|pc| pc.one);
    let genus = class.genus();
    debug_assert_eq!(class.counts(), (link.black.len() + link.red.len(), circles.len()));
    Ok(BoundaryPattern { pieces, circles, genus, essential: genus > 0 })
}

/// Group the 3-pieces into the complementary regions left after cutting
/// along every sphere of `color`, and count the spheres bounding each.
pub fn complement_check(c: &VhComplex, color: Color) -> Result<Vec<RegionReport>, PieceError> {
    let retained = color.other();
    let mut label: Vec<Option<usize>> = vec![None; c.vertex_count()];
    let mut regions: Vec<Vec<usize>> = Vec::new();
    for v in 0..c.vertex_count() {
        if label[v].is_some() {
            continue;
        }
        let id = regions.len();
        let mut stack = vec![v];
        let mut members = Vec::new();
        label[v] = Some(id);
        while let Some(x) = stack.pop() {
            members.push(x);
            for e in c.edges() {
                if e.color != retained {
                    continue;
                }
                for (p, q) in [(e.a, e.b), (e.b, e.a)] {
                    if p == x && label[q].is_none() {
                        label[q] = Some(id);
                        stack.push(q);
                    }
                }
            }
        }
        members.sort_unstable();
        regions.push(members);
    }
    let mut boundary = vec![0usize; regions.len()];
    for h in c.hyperplanes(color) {
        let rep = &c.edges()[h.edges[0]];
        boundary[label[rep.a].unwrap()] += 1;
        boundary[label[rep.b].unwrap()] += 1;
    }
    let reports: Vec<RegionReport> = regions
        .into_iter()
        .zip(boundary)
        .map(|(members, boundary)| RegionReport { members, boundary })
        .collect();
    if let Some((i, r)) = reports.iter().enumerate().find(|(_, r)| r.boundary != 3) {
        return Err(PieceError::ComplementNotThreeHoled {
            color,
            region: i,
            count: r.boundary,
        });
    }
    let expected = 2 * c.genus() as usize - 2;
    if reports.len() != expected {
        return Err(PieceError::RegionCount { color, found: reports.len(), expected });
    }
    Ok(reports)
}

/// Compile the full decomposition and its sphere certificate.
pub fn build_decomposition(
    c: &VhComplex,
) -> Result<(PieceDecomposition, SphereSystemCertificate), PieceError> {
    let ones: Vec<OnePiece> = c
        .squares()
        .iter()
        .map(|s| OnePiece {
            corners: [s.corners[0], s.corners[1], s.corners[3], s.corners[2]],
            sides: [s.bottom, s.right, s.top, s.left],
        })
        .collect();

    let mut twos = Vec::with_capacity(c.edge_count());
    for (i, e) in c.edges().iter().enumerate() {
        if e.a == e.b {
            return Err(PieceError::LoopEdge { edge: i });
        }
        let circles: Vec<usize> = c
            .squares()
            .iter()
            .enumerate()
            .filter(|(_, s)| s.bottom == i || s.top == i || s.left == i || s.right == i)
            .map(|(k, _)| k)
            .collect();
        let kind = PieceKind::from_degree(circles.len())
            .ok_or(PieceError::DegreeOutOfRange { edge: i, degree: circles.len() })?;
        twos.push(TwoPiece { color: e.color, kind, ends: [e.a, e.b], circles });
    }

    let mut threes = Vec::with_capacity(c.vertex_count());
    for v in 0..c.vertex_count() {
        let incident: Vec<usize> = twos
            .iter()
            .enumerate()
            .filter(|(_, t)| t.ends.contains(&v))
            .map(|(i, _)| i)
            .collect();
        if incident.len() == 2 && incident.iter().all(|&e| twos[e].kind == PieceKind::Disc) {
            return Err(PieceError::TwoDiscs { vertex: v });
        }
        let pattern = boundary_pattern(c, v)?;
        threes.push(ThreePiece { pattern });
    }

    let mut circle_count = vec![0usize; ones.len()];
    for t in &threes {
        for pc in &t.pattern.circles {
            circle_count[pc.one] += 1;
        }
    }
    if let Some((i, &count)) = circle_count.iter().enumerate().find(|(_, &n)| n != 4) {
        return Err(PieceError::CircleIncidence { circle: i, count });
    }

    let pd = PieceDecomposition { genus: c.genus(), ones, twos, threes };
    let cert = certify(c, &pd)?;
    Ok((pd, cert))
}

fn certify(c: &VhComplex, pd: &PieceDecomposition) -> Result<SphereSystemCertificate, PieceError> {
    let expected = (3 * c.genus() as usize).saturating_sub(3);
    let mut components = BTreeMap::new();
    for color in [Color::Black, Color::Red] {
        let hs = c.hyperplanes(color);
        if hs.len() != expected {
            return Err(PieceError::SphereCount { color, found: hs.len(), expected });
        }
        let mut comps = Vec::new();
        for (i, h) in hs.iter().enumerate() {
            if !h.is_tree() {
                return Err(PieceError::HyperplaneNotTree {
                    color,
                    index: i,
                    edges: h.edges.len(),
                    circles: h.squares.len(),
                });
            }
            let euler: i64 =
                h.edges.iter().map(|&e| 2 - pd.twos[e].circles.len() as i64).sum();
            debug_assert_eq!(euler, 2);
            comps.push(SphereComponent {
                color,
                surfaces: h.edges.clone(),
                circles: h.squares.clone(),
                euler,
            });
        }
        components.insert(color.name(), comps);
    }
    let black = components.remove("black").unwrap();
    let red = components.remove("red").unwrap();

    let black_regions = complement_check(c, Color::Black)?;
    let red_regions = complement_check(c, Color::Red)?;

    let mut crossings = Vec::new();
    let mut total = 0usize;
    for (i, b) in black.iter().enumerate() {
        for (j, r) in red.iter().enumerate() {
            let shared = b.circles.iter().filter(|s| r.circles.contains(s)).count();
            if shared > 0 {
                crossings.push((i, j, shared));
                total += shared;
            }
        }
    }
    debug_assert_eq!(total, pd.ones.len());

    Ok(SphereSystemCertificate {
        genus: c.genus(),
        black,
        red,
        black_regions,
        red_regions,
        crossings,
        intersection_number: pd.ones.len(),
    })
}

/// Rebuild the square complex from the decomposition. Round trip contract:
/// the result is colored-isomorphic to the complex the decomposition came
/// from. Inconsistent incidence data (e.g. from a corrupted file) is
/// reported as a structural error.
pub fn dual_complex(pd: &PieceDecomposition) -> Result<VhComplex, PieceError> {
    let edges: Vec<EdgeCell> = pd
        .twos
        .iter()
        .map(|t| EdgeCell { color: t.color, a: t.ends[0], b: t.ends[1], prov: None })
        .collect();
    let squares: Vec<SquareCell> = pd
        .ones
        .iter()
        .map(|o| SquareCell {
            corners: [o.corners[0], o.corners[1], o.corners[3], o.corners[2]],
            bottom: o.sides[0],
            top: o.sides[2],
            left: o.sides[3],
            right: o.sides[1],
            prov: None,
        })
        .collect();
    let vertex_prov = vec![None; pd.threes.len()];
    Ok(VhComplex::new(pd.genus, vertex_prov, edges, squares)?)
}

impl PieceDecomposition {
    /// Text form: a header line, then one section per piece dimension.
    /// Ids are positional (`c`ircles, `s`urfaces, `b`odies).
    ///
    /// ```text
    /// pieces genus=2
    /// ONE-PIECES
    /// circle c0 corners b0 b1 b5 b4 sides s0 s14 s2 s13
    /// TWO-PIECES
    /// surface s0 black annulus ends b0 b1 circles c0 c3
    /// THREE-PIECES
    /// body b0 genus=0 surfaces s0 s13 s20 circles c0:s0:s13 c3:s0:s20
    /// ```
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "pieces genus={}", self.genus);
        let _ = writeln!(out, "ONE-PIECES");
        for o in &self.ones {
            let _ = writeln!(
                out,
                "circle c corners b{} b{} b{} b{} sides s{} s{} s{} s{}",
                o.corners[0],
                o.corners[1],
                o.corners[2],
                o.corners[3],
                o.sides[0],
                o.sides[1],
                o.sides[2],
                o.sides[3],
            );
        }
        let _ = writeln!(out, "TWO-PIECES");
        for t in &self.twos {
            let circles: Vec<String> = t.circles.iter().map(|c| format!("c{c}")).collect();
            let _ = writeln!(
                out,
                "surface s {} {} ends b{} b{} circles {}",
                t.color.name(),
                t.kind.name(),
                t.ends[0],
                t.ends[1],
                circles.join(" "),
            );
        }
        let _ = writeln!(out, "THREE-PIECES");
        for th in &self.threes {
            let p = &th.pattern;
            let surfaces: Vec<String> = p.pieces.iter().map(|e| format!("s{e}")).collect();
            let circles: Vec<String> = p
                .circles
                .iter()
                .map(|pc| format!("c{}:s{}:s{}", pc.one, pc.black, pc.red))
                .collect();
            let essential = if p.essential { " essential" } else { "" };
            let _ = writeln!(
                out,
                "body b genus={}{essential} surfaces {} circles {}",
                p.genus,
                surfaces.join(" "),
                circles.join(" "),
            );
        }
        // Ids are positional; stamp them in one pass for readability.
        let mut n = [0usize; 3];
        out.lines()
            .map(|l| {
                let stamped = if let Some(rest) = l.strip_prefix("circle c ") {
                    n[0] += 1;
                    format!("circle c{} {}", n[0] - 1, rest)
                } else if let Some(rest) = l.strip_prefix("surface s ") {
                    n[1] += 1;
                    format!("surface s{} {}", n[1] - 1, rest)
                } else if let Some(rest) = l.strip_prefix("body b ") {
                    n[2] += 1;
                    format!("body b{} {}", n[2] - 1, rest)
                } else {
                    l.to_string()
                };
                stamped + "\n"
            })
            .collect()
    }

    pub fn parse(text: &str) -> Result<PieceDecomposition, PieceError> {
        let fail = |line: usize, msg: &str| PieceError::Parse { line, msg: msg.to_string() };
        let id = |line: usize, tok: &str, prefix: char| -> Result<usize, PieceError> {
            tok.strip_prefix(prefix)
                .and_then(|d| d.parse::<usize>().ok())
                .ok_or_else(|| fail(line, &format!("expected {prefix}<n>, got {tok}")))
        };
        let mut genus: Option<u8> = None;
        let mut section = "";
        let mut ones = Vec::new();
        let mut twos = Vec::new();
        let mut threes = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let ln = i + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(g) = line.strip_prefix("pieces genus=") {
                genus = Some(g.parse().map_err(|_| fail(ln, "bad genus"))?);
                continue;
            }
            if line == "ONE-PIECES" || line == "TWO-PIECES" || line == "THREE-PIECES" {
                section = if line.starts_with("ONE") {
                    "one"
                } else if line.starts_with("TWO") {
                    "two"
                } else {
                    "three"
                };
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            match (section, toks.first().copied()) {
                ("one", Some("circle")) => {
                    if toks.len() != 12 || toks[2] != "corners" || toks[7] != "sides" {
                        return Err(fail(ln, "malformed circle line"));
                    }
                    if id(ln, toks[1], 'c')? != ones.len() {
                        return Err(fail(ln, "circle ids must be sequential"));
                    }
                    let mut corners = [0usize; 4];
                    let mut sides = [0usize; 4];
                    for k in 0..4 {
                        corners[k] = id(ln, toks[3 + k], 'b')?;
                        sides[k] = id(ln, toks[8 + k], 's')?;
                    }
                    ones.push(OnePiece { corners, sides });
                }
                ("two", Some("surface")) => {
                    if toks.len() < 9 || toks[4] != "ends" || toks[7] != "circles" {
                        return Err(fail(ln, "malformed surface line"));
                    }
                    if id(ln, toks[1], 's')? != twos.len() {
                        return Err(fail(ln, "surface ids must be sequential"));
                    }
                    let color = match toks[2] {
                        "black" => Color::Black,
                        "red" => Color::Red,
                        other => return Err(fail(ln, &format!("unknown color {other}"))),
                    };
                    let kind = PieceKind::from_name(toks[3])
                        .ok_or_else(|| fail(ln, &format!("unknown surface type {}", toks[3])))?;
                    let ends = [id(ln, toks[5], 'b')?, id(ln, toks[6], 'b')?];
                    let circles: Vec<usize> = toks[8..]
                        .iter()
                        .map(|t| id(ln, t, 'c'))
                        .collect::<Result<_, _>>()?;
                    twos.push(TwoPiece { color, kind, ends, circles });
                }
                ("three", Some("body")) => {
                    if id(ln, toks[1], 'b')? != threes.len() {
                        return Err(fail(ln, "body ids must be sequential"));
                    }
                    let g: usize = toks[2]
                        .strip_prefix("genus=")
                        .and_then(|d| d.parse().ok())
                        .ok_or_else(|| fail(ln, "missing genus"))?;
                    let mut at = 3;
                    let essential = toks.get(at) == Some(&"essential");
                    if essential {
                        at += 1;
                    }
                    if toks.get(at) != Some(&"surfaces") {
                        return Err(fail(ln, "missing surfaces list"));
                    }
                    at += 1;
                    let mut pieces = Vec::new();
                    while at < toks.len() && toks[at] != "circles" {
                        pieces.push(id(ln, toks[at], 's')?);
                        at += 1;
                    }
                    if toks.get(at) != Some(&"circles") {
                        return Err(fail(ln, "missing circles list"));
                    }
                    at += 1;
                    let mut circles = Vec::new();
                    for t in &toks[at..] {
                        let parts: Vec<&str> = t.split(':').collect();
                        if parts.len() != 3 {
                            return Err(fail(ln, &format!("malformed circle triple {t}")));
                        }
                        circles.push(PatternCircle {
                            one: id(ln, parts[0], 'c')?,
                            black: id(ln, parts[1], 's')?,
                            red: id(ln, parts[2], 's')?,
                        });
                    }
                    threes.push(ThreePiece {
                        pattern: BoundaryPattern { pieces, circles, genus: g, essential },
                    });
                }
                _ => return Err(fail(ln, &format!("unexpected line in section {section:?}"))),
            }
        }
        let genus = genus.ok_or_else(|| fail(1, "missing header"))?;
        let pd = PieceDecomposition { genus, ones, twos, threes };
        pd.check_ranges()?;
        Ok(pd)
    }

    fn check_ranges(&self) -> Result<(), PieceError> {
        let fail = |msg: String| PieceError::Parse { line: 0, msg };
        let (nb, ns, nc) = (self.threes.len(), self.twos.len(), self.ones.len());
        for o in &self.ones {
            if o.corners.iter().any(|&b| b >= nb) || o.sides.iter().any(|&s| s >= ns) {
                return Err(fail("circle references out of range".into()));
            }
        }
        for t in &self.twos {
            if t.ends.iter().any(|&b| b >= nb) || t.circles.iter().any(|&c| c >= nc) {
                return Err(fail("surface references out of range".into()));
            }
        }
        for th in &self.threes {
            let p = &th.pattern;
            if p.pieces.iter().any(|&s| s >= ns)
                || p.circles.iter().any(|pc| pc.one >= nc || pc.black >= ns || pc.red >= ns)
            {
                return Err(fail("body references out of range".into()));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::isomorphic_colored;
    use crate::corebuild::CorePair;
    use crate::tree::MarkedGraph;

    const THETA_ID: &str = "genus: 2\nvertices: u w\nedge t u w tree\nedge x u w marking=a\nedge y u w marking=b\nbasepoint: u\n";
    const THETA_GEN: &str = "genus: 2\nvertices: u w\nedge t u w tree\nedge x u w marking=ab\nedge y u w marking=ABA\nbasepoint: u\n";

    fn theta_core() -> VhComplex {
        let t1 = MarkedGraph::parse(THETA_ID).unwrap();
        let t2 = MarkedGraph::parse(THETA_GEN).unwrap();
        CorePair::new(t1, t2).unwrap().build().unwrap()
    }

    /// `k` squares sharing one black bottom edge.
    fn fan(k: usize) -> VhComplex {
        let mut edges = vec![EdgeCell { color: Color::Black, a: 0, b: 1, prov: None }];
        let mut squares = Vec::new();
        for i in 0..k {
            let (c, d) = (2 + 2 * i, 3 + 2 * i);
            let top = edges.len();
            edges.push(EdgeCell { color: Color::Black, a: c, b: d, prov: None });
            let left = edges.len();
            edges.push(EdgeCell { color: Color::Red, a: 0, b: c, prov: None });
            let right = edges.len();
            edges.push(EdgeCell { color: Color::Red, a: 1, b: d, prov: None });
            squares.push(SquareCell {
                corners: [0, 1, c, d],
                bottom: 0,
                top,
                left,
                right,
                prov: None,
            });
        }
        VhComplex::new(2, vec![None; 2 + 2 * k], edges, squares).unwrap()
    }

    #[test]
    fn surface_types_follow_square_counts() {
        assert_eq!(two_piece_type(&fan(1), 0).unwrap(), PieceKind::Disc);
        assert_eq!(two_piece_type(&fan(2), 0).unwrap(), PieceKind::Annulus);
        assert_eq!(two_piece_type(&fan(3), 0).unwrap(), PieceKind::Pants);
    }

    #[test]
    fn degree_out_of_range_is_rejected() {
        assert_eq!(
            two_piece_type(&fan(4), 0),
            Err(PieceError::DegreeOutOfRange { edge: 0, degree: 4 })
        );
        // A dangling edge bounds nothing.
        let mut edges: Vec<EdgeCell> = fan(1).edges().to_vec();
        edges.push(EdgeCell { color: Color::Red, a: 2, b: 3, prov: None });
        let c = VhComplex::new(2, vec![None; 4], edges, fan(1).squares().to_vec()).unwrap();
        assert_eq!(
            two_piece_type(&c, 4),
            Err(PieceError::DegreeOutOfRange { edge: 4, degree: 0 })
        );
    }

    #[test]
    fn core_decomposition_passes_all_checks() {
        let c = theta_core();
        let (pd, cert) = build_decomposition(&c).unwrap();
        assert_eq!(pd.ones.len(), c.square_count());
        assert_eq!(pd.twos.len(), c.edge_count());
        assert_eq!(pd.threes.len(), c.vertex_count());
        assert_eq!(cert.intersection_number, 11);
        assert_eq!(cert.black.len(), 3);
        assert_eq!(cert.red.len(), 3);
        for comp in cert.black.iter().chain(&cert.red) {
            assert_eq!(comp.euler, 2);
            assert_eq!(comp.surfaces.len(), comp.circles.len() + 1);
        }
        for regions in [&cert.black_regions, &cert.red_regions] {
            assert_eq!(regions.len(), 2);
            assert!(regions.iter().all(|r| r.boundary == 3));
        }
        let total: usize = cert.crossings.iter().map(|&(_, _, n)| n).sum();
        assert_eq!(total, 11);
    }

    #[test]
    fn patterns_read_genera_off_the_links() {
        let c = theta_core();
        for v in 0..c.vertex_count() {
            let p = boundary_pattern(&c, v).unwrap();
            assert!(p.genus <= 4);
            assert_eq!(p.essential, p.genus > 0);
            let class = VhComplex::classify_link(&c.vertex_link(v)).unwrap();
            assert_eq!(p.genus, class.genus());
            assert_eq!(p.circles.len(), class.counts().1);
            // Gluing circles pair one black with one red surface.
            for pc in &p.circles {
                assert_eq!(c.edges()[pc.black].color, Color::Black);
                assert_eq!(c.edges()[pc.red].color, Color::Red);
            }
        }
    }

    #[test]
    fn single_square_has_an_invalid_link() {
        assert_eq!(boundary_pattern(&fan(1), 0), Err(PieceError::InvalidLink { vertex: 0 }));
        // Every corner of a lone square is a trivial two-disc ball.
        assert_eq!(build_decomposition(&fan(1)), Err(PieceError::TwoDiscs { vertex: 0 }));
    }

    #[test]
    fn fan_complement_is_not_three_holed() {
        assert_eq!(
            complement_check(&fan(2), Color::Black),
            Err(PieceError::ComplementNotThreeHoled { color: Color::Black, region: 0, count: 1 })
        );
    }

    #[test]
    fn circles_meet_four_bodies() {
        let c = theta_core();
        let (pd, _) = build_decomposition(&c).unwrap();
        for o in &pd.ones {
            let mut corners = o.corners;
            corners.sort_unstable();
            assert!(corners.windows(2).all(|w| w[0] != w[1]));
            let blacks =
                o.sides.iter().filter(|&&s| pd.twos[s].color == Color::Black).count();
            assert_eq!(blacks, 2);
        }
    }

    #[test]
    fn dual_round_trip_is_isomorphic() {
        let c = theta_core();
        let (pd, _) = build_decomposition(&c).unwrap();
        let back = dual_complex(&pd).unwrap();
        assert_eq!(
            (back.vertex_count(), back.edge_count(), back.square_count()),
            (pd.threes.len(), pd.twos.len(), pd.ones.len())
        );
        assert!(isomorphic_colored(&back, &c).is_some());
    }

    #[test]
    fn serialization_round_trips() {
        let c = theta_core();
        let (pd, _) = build_decomposition(&c).unwrap();
        let text = pd.serialize();
        let parsed = PieceDecomposition::parse(&text).unwrap();
        assert_eq!(parsed, pd);
        assert_eq!(parsed.serialize(), text);
    }

    #[test]
    fn corrupted_text_fails_parse_or_round_trip() {
        let c = theta_core();
        let (pd, _) = build_decomposition(&c).unwrap();
        let text = pd.serialize();
        // Swapping two corner tokens breaks the side/corner agreement.
        let bad: String = text
            .lines()
            .map(|l| {
                if l.starts_with("circle c0 ") {
                    let mut toks: Vec<&str> = l.split_whitespace().collect();
                    toks.swap(3, 4);
                    toks.join(" ") + "\n"
                } else {
                    l.to_string() + "\n"
                }
            })
            .collect();
        let parsed = PieceDecomposition::parse(&bad).unwrap();
        match dual_complex(&parsed) {
            Err(_) => {}
            Ok(back) => assert!(isomorphic_colored(&back, &c).is_none()),
        }
        // Truncation is a parse error with a line number.
        let cut = &text[..text.len() / 2];
        assert!(matches!(
            PieceDecomposition::parse(cut),
            Err(PieceError::Parse { .. }) | Err(PieceError::Complex(_))
        ));
    }
}
