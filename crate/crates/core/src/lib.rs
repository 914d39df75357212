//! Combinatorial cores of pairs of marked trivalent trees.
//!
//! The pipeline: free-group words and automorphisms ([`word`]), clopen subsets
//! of the boundary at infinity ([`endset`]), marked trivalent graphs and their
//! universal covers ([`tree`]), the core of a pair of trees as a finite colored
//! square complex ([`corebuild`]), structural analysis of such complexes
//! ([`complex`]), and the dual decomposition into surface pieces ([`pieces`]).

pub mod complex;
pub mod corebuild;
pub mod endset;
pub mod instance;
pub mod pieces;
pub mod tree;
pub mod word;

pub use corebuild::{BuildError, CorePair, OracleReport, QuotientSquare, graph_skeleton};
pub use pieces::{
    BoundaryPattern, OnePiece, PatternCircle, PieceDecomposition, PieceError, PieceKind,
    RegionReport, SphereComponent, SphereSystemCertificate, ThreePiece, TwoPiece,
    boundary_pattern, build_decomposition, complement_check, dual_complex, two_piece_type,
};

pub use complex::{
    Check, Color, ComplexError, EdgeCell, Hyperplane, LinkClass, SmallGraph, SquareCell,
    VertexLink, VhComplex, isomorphic_colored,
};
pub use endset::{Bipartition, ClopenSet};
pub use instance::{base_graph, generate_pair, random_twist, twist_marking};
pub use tree::{CoverEdge, CoverVertex, EdgeId, GraphError, MarkedGraph, VertexId};
pub use word::{Automorphism, BoundaryFactor, Letter, RationalEnd, Word};
