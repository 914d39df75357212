//! Command-line driver: build cores of marked-graph pairs, inspect and
//! export them, compile piece decompositions, and run the window oracle.
//!
//! All outputs are deterministic for a fixed invocation; wall-clock timings
//! appear only behind `--timings` so reports stay byte-stable.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use treecore::{
    build_decomposition, dual_complex, generate_pair, isomorphic_colored, BuildError, Color,
    ComplexError, CorePair, GraphError, LinkClass, MarkedGraph, PieceDecomposition, PieceError,
    PieceKind, VertexId, VhComplex,
};

const EXIT_HELP: &str = "exit codes:
  0  success
  2  usage error
  3  parse error in an input file (reported with its line)
  4  graph validation failure, or a mismatched pair
  5  pair rejected: two edge partitions coincide, no core exists
  6  complex or decomposition validation failure
  7  i/o error
  8  round-trip mismatch (NOT-ISOMORPHIC)
  9  oracle discrepancy";

#[derive(Parser)]
#[command(name = "treecore", version, about = "Cores of marked trivalent graph pairs", after_help = EXIT_HELP)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build the core of a pair and print its anatomy report.
    Build(PairArgs),
    /// Parse and validate a single marked-graph file.
    Validate {
        /// Marked-graph file.
        #[arg(long)]
        input: PathBuf,
    },
    /// Compile the piece decomposition and print its taxonomy.
    Pieces(PairArgs),
    /// Rebuild the dual of the decomposition and compare with the core.
    Roundtrip {
        /// Marked-graph file (or a serialized complex file).
        #[arg(long)]
        input: PathBuf,
        /// Second marked-graph file (or a serialized decomposition file).
        #[arg(long)]
        input2: PathBuf,
        /// Directory for the witness file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit a deterministic seeded instance pair.
    Random {
        /// Genus of the pair (>= 2).
        #[arg(long)]
        genus: u8,
        /// Seed for the twist stream.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of elementary moves composed into the twist.
        #[arg(long, default_value_t = 4)]
        moves: u32,
        /// Directory receiving t1.graph and t2.graph.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Check fiber-built squares against brute-force window nestedness.
    Oracle {
        /// First marked-graph file.
        #[arg(long)]
        input: PathBuf,
        /// Second marked-graph file.
        #[arg(long)]
        input2: PathBuf,
        /// Ball radius for the brute-force window.
        #[arg(long, default_value_t = 3)]
        radius: usize,
    },
    /// Export Graphviz DOT for a graph, or for the core of a pair.
    ExportDot {
        /// Marked-graph file.
        #[arg(long)]
        input: PathBuf,
        /// Optional second graph: export the DOT of the built core instead.
        #[arg(long)]
        input2: Option<PathBuf>,
        /// Write to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct PairArgs {
    /// First marked-graph file.
    #[arg(long)]
    input: PathBuf,
    /// Second marked-graph file.
    #[arg(long)]
    input2: PathBuf,
    /// Directory receiving serialized outputs alongside the stdout report.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Append wall-clock timings to the report.
    #[arg(long)]
    timings: bool,
}

struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn new(code: u8, msg: impl Into<String>) -> Failure {
        Failure { code, msg: msg.into() }
    }

    fn io(path: &Path, e: std::io::Error) -> Failure {
        Failure::new(7, format!("{}: {e}", path.display()))
    }
}

fn graph_failure(path: &Path, e: GraphError) -> Failure {
    let code = match e {
        GraphError::Parse { .. } => 3,
        _ => 4,
    };
    Failure::new(code, format!("{}: {e}", path.display()))
}

fn build_failure(e: BuildError) -> Failure {
    let code = match e {
        BuildError::GenusMismatch(..) => 4,
        BuildError::HypothesisViolated { .. } => 5,
        _ => 6,
    };
    Failure::new(code, e.to_string())
}

fn complex_failure(path: &Path, e: ComplexError) -> Failure {
    let code = match e {
        ComplexError::Parse { .. } => 3,
        ComplexError::BadStructure(_) => 6,
    };
    Failure::new(code, format!("{}: {e}", path.display()))
}

fn piece_failure(e: PieceError) -> Failure {
    let code = match e {
        PieceError::Parse { .. } => 3,
        _ => 6,
    };
    Failure::new(code, e.to_string())
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::io(path, e))
}

fn read_graph(path: &Path) -> Result<MarkedGraph, Failure> {
    let text = read_file(path)?;
    MarkedGraph::parse(&text).map_err(|e| graph_failure(path, e))
}

fn build_pair(input: &Path, input2: &Path) -> Result<CorePair, Failure> {
    let t1 = read_graph(input)?;
    let t2 = read_graph(input2)?;
    CorePair::new(t1, t2).map_err(build_failure)
}

fn millis(d: std::time::Duration) -> String {
    format!("{:.2}ms", d.as_secs_f64() * 1e3)
}

/// Vertex links counted in the fixed admissible-class order, zeros skipped.
fn link_census(c: &VhComplex) -> String {
    let mut counts = [0usize; 9];
    for v in 0..c.vertex_count() {
        if let Some(class) = VhComplex::classify_link(&c.vertex_link(v)) {
            let idx = LinkClass::all().iter().position(|&k| k == class).unwrap();
            counts[idx] += 1;
        }
    }
    let mut s = String::from("links:");
    for (idx, class) in LinkClass::all().iter().enumerate() {
        if counts[idx] > 0 {
            let _ = write!(s, " {}={}", class.name(), counts[idx]);
        }
    }
    s
}

fn kind_census(pd: &PieceDecomposition) -> String {
    let count = |k: PieceKind| pd.twos.iter().filter(|t| t.kind == k).count();
    format!(
        "surface-kinds: disc={} annulus={} pants={}",
        count(PieceKind::Disc),
        count(PieceKind::Annulus),
        count(PieceKind::Pants)
    )
}

fn genus_census(pd: &PieceDecomposition) -> String {
    let mut counts = [0usize; 5];
    for t in &pd.threes {
        counts[t.pattern.genus] += 1;
    }
    let mut s = String::from("body-genera:");
    for (g, &n) in counts.iter().enumerate() {
        if n > 0 {
            let _ = write!(s, " genus{g}={n}");
        }
    }
    s
}

fn cmd_build(args: &PairArgs) -> Result<(), Failure> {
    let started = Instant::now();
    let pair = build_pair(&args.input, &args.input2)?;
    let complex = pair.build().map_err(build_failure)?;
    let built = started.elapsed();

    let checks = complex.validate_properties();
    if let Some(bad) = checks.iter().find(|c| !c.pass) {
        return Err(Failure::new(6, format!("check {} failed: {}", bad.name, bad.witness)));
    }

    let compiled = Instant::now();
    let (pd, cert) = build_decomposition(&complex).map_err(piece_failure)?;
    let dual = dual_complex(&pd).map_err(piece_failure)?;
    let round_trip = isomorphic_colored(&dual, &complex).is_some();
    let piece_time = compiled.elapsed();

    let mut report = String::new();
    let _ = writeln!(
        report,
        "instance: {} + {} genus={}",
        args.input.display(),
        args.input2.display(),
        complex.genus()
    );
    let _ = writeln!(report, "hypothesis: satisfied");
    let _ = writeln!(
        report,
        "cells: squares={} edges={} vertices={}",
        complex.square_count(),
        complex.edge_count(),
        complex.vertex_count()
    );
    let _ = writeln!(report, "euler-characteristic: {}", complex.euler_characteristic());
    let black = complex.hyperplanes(Color::Black);
    let red = complex.hyperplanes(Color::Red);
    let trees = black.iter().chain(red.iter()).all(|h| h.is_tree());
    let _ = writeln!(
        report,
        "hyperplanes: black={} red={} trees={}",
        black.len(),
        red.len(),
        if trees { "yes" } else { "no" }
    );
    let _ = writeln!(report, "{}", link_census(&complex));
    let _ = writeln!(
        report,
        "spheres: black={} red={} regions-black={} regions-red={}",
        cert.black.len(),
        cert.red.len(),
        cert.black_regions.len(),
        cert.red_regions.len()
    );
    let _ = writeln!(report, "intersection-number: {}", cert.intersection_number);
    let _ = writeln!(
        report,
        "round-trip: {}",
        if round_trip { "ISOMORPHIC" } else { "NOT-ISOMORPHIC" }
    );
    let _ = writeln!(report, "checks: {}/{} passed", checks.len(), checks.len());
    if args.timings {
        let _ = writeln!(report, "timings: build={} pieces={}", millis(built), millis(piece_time));
    }

    print!("{report}");

    if let Some(dir) = &args.out {
        fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
        write_file(&dir.join("core.complex"), &complex.serialize())?;
        write_file(&dir.join("core.dot"), &complex.export_dot())?;
        write_file(&dir.join("pieces.txt"), &pd.serialize())?;
        write_file(&dir.join("report.txt"), &report)?;
    }

    if !round_trip {
        return Err(Failure::new(8, "dual of the decomposition is not isomorphic to the core"));
    }
    Ok(())
}

fn cmd_validate(input: &Path) -> Result<(), Failure> {
    let g = read_graph(input)?;
    let tree = g.edges().iter().filter(|e| e.marking.is_none()).count();
    println!(
        "ok: genus={} vertices={} edges={} tree-edges={} marked-edges={} basepoint={}",
        g.genus(),
        g.vertex_count(),
        g.edge_count(),
        tree,
        g.edge_count() - tree,
        g.vertex_name(g.basepoint())
    );
    Ok(())
}

fn cmd_pieces(args: &PairArgs) -> Result<(), Failure> {
    let started = Instant::now();
    let pair = build_pair(&args.input, &args.input2)?;
    let complex = pair.build().map_err(build_failure)?;
    let (pd, cert) = build_decomposition(&complex).map_err(piece_failure)?;
    let total = started.elapsed();

    let mut report = String::new();
    let _ = writeln!(
        report,
        "pieces: squares={} surfaces={} bodies={}",
        pd.ones.len(),
        pd.twos.len(),
        pd.threes.len()
    );
    let _ = writeln!(report, "{}", kind_census(&pd));
    let _ = writeln!(report, "{}", genus_census(&pd));
    let essential = pd.threes.iter().filter(|t| t.pattern.essential).count();
    let _ = writeln!(report, "essential-bodies: {essential}");
    let _ = writeln!(report, "spheres: black={} red={}", cert.black.len(), cert.red.len());
    let _ = writeln!(report, "intersection-number: {}", cert.intersection_number);
    if args.timings {
        let _ = writeln!(report, "timings: total={}", millis(total));
    }

    print!("{report}");

    if let Some(dir) = &args.out {
        fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
        write_file(&dir.join("pieces.txt"), &pd.serialize())?;
    }
    Ok(())
}

enum AnyInput {
    Graph(Box<MarkedGraph>),
    Complex(VhComplex),
    Pieces(PieceDecomposition),
}

fn read_any(path: &Path) -> Result<AnyInput, Failure> {
    let text = read_file(path)?;
    if text.starts_with("vhcomplex ") {
        return Ok(AnyInput::Complex(VhComplex::parse(&text).map_err(|e| complex_failure(path, e))?));
    }
    if text.starts_with("pieces ") {
        return Ok(AnyInput::Pieces(PieceDecomposition::parse(&text).map_err(piece_failure)?));
    }
    Ok(AnyInput::Graph(Box::new(MarkedGraph::parse(&text).map_err(|e| graph_failure(path, e))?)))
}

/// The first counting invariant separating two complexes, if any.
fn first_mismatch(a: &VhComplex, b: &VhComplex) -> Option<String> {
    if a.genus() != b.genus() {
        return Some(format!("genus {} vs {}", a.genus(), b.genus()));
    }
    if a.vertex_count() != b.vertex_count() {
        return Some(format!("vertices {} vs {}", a.vertex_count(), b.vertex_count()));
    }
    for color in [Color::Black, Color::Red] {
        let na = a.edges_of_color(color).count();
        let nb = b.edges_of_color(color).count();
        if na != nb {
            return Some(format!("{} edges {na} vs {nb}", color.name()));
        }
    }
    if a.square_count() != b.square_count() {
        return Some(format!("squares {} vs {}", a.square_count(), b.square_count()));
    }
    if link_census(a) != link_census(b) {
        return Some(format!("{} vs {}", link_census(a), link_census(b)));
    }
    None
}

fn cmd_roundtrip(input: &Path, input2: &Path, out: Option<&Path>) -> Result<(), Failure> {
    // Two graphs run the full pipeline; a serialized complex paired with a
    // serialized decomposition compares the stored dual against the stored
    // core, so a decomposition file can be checked on its own.
    let (core, dual) = match (read_any(input)?, read_any(input2)?) {
        (AnyInput::Graph(t1), AnyInput::Graph(t2)) => {
            let pair = CorePair::new(*t1, *t2).map_err(build_failure)?;
            let complex = pair.build().map_err(build_failure)?;
            let (pd, _) = build_decomposition(&complex).map_err(piece_failure)?;
            let dual = dual_complex(&pd).map_err(piece_failure)?;
            (complex, dual)
        }
        (AnyInput::Complex(c), AnyInput::Pieces(pd)) | (AnyInput::Pieces(pd), AnyInput::Complex(c)) => {
            let dual = dual_complex(&pd).map_err(piece_failure)?;
            (c, dual)
        }
        _ => {
            return Err(Failure::new(
                2,
                "roundtrip needs two marked-graph files, or a complex file and a decomposition file",
            ));
        }
    };

    let mut witness = String::new();
    let verdict = match isomorphic_colored(&dual, &core) {
        Some(map) => {
            for (i, m) in map.iter().enumerate() {
                let _ = writeln!(witness, "v{i} -> v{m}");
            }
            true
        }
        None => {
            let line = match first_mismatch(&dual, &core) {
                Some(d) => format!("first mismatch: {d}"),
                None => "counting invariants agree; no color-preserving isomorphism".to_string(),
            };
            println!("{line}");
            let _ = writeln!(witness, "{line}");
            false
        }
    };
    println!("round-trip: {}", if verdict { "ISOMORPHIC" } else { "NOT-ISOMORPHIC" });

    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
        write_file(&dir.join("witness.txt"), &witness)?;
    }
    if !verdict {
        return Err(Failure::new(8, "round trip failed"));
    }
    Ok(())
}

fn cmd_random(genus: u8, seed: u64, moves: u32, out: &Path) -> Result<(), Failure> {
    let (t1, t2) = generate_pair(genus, seed, moves)
        .map_err(|e| graph_failure(Path::new("generated"), e))?;
    fs::create_dir_all(out).map_err(|e| Failure::io(out, e))?;
    let p1 = out.join("t1.graph");
    let p2 = out.join("t2.graph");
    write_file(&p1, &t1.render())?;
    write_file(&p2, &t2.render())?;
    println!("wrote {}", p1.display());
    println!("wrote {}", p2.display());
    println!("instance: genus={genus} seed={seed} moves={moves}");
    let status = match CorePair::new(t1, t2) {
        Ok(_) => "satisfied".to_string(),
        Err(e) => format!("violated ({e})"),
    };
    println!("hypothesis: {status}");
    Ok(())
}

fn cmd_oracle(input: &Path, input2: &Path, radius: usize) -> Result<(), Failure> {
    let pair = build_pair(input, input2)?;
    let report = pair.oracle_window(radius).map_err(build_failure)?;
    let discrepancies = report.missing_in_core.len() + report.missing_in_window.len();
    println!(
        "oracle: radius={radius} window-pairs={} lifted-pairs={} discrepancies={discrepancies}",
        report.window_pairs, report.lifted_pairs
    );
    let pair_line = |((d1, e1), (d2, e2)): &((treecore::Word, treecore::EdgeId), (treecore::Word, treecore::EdgeId))| {
        format!(
            "t1(deck={d1}, edge={}) x t2(deck={d2}, edge={})",
            pair.t1().edge(*e1).name,
            pair.t2().edge(*e2).name
        )
    };
    for m in report.missing_in_core.iter().take(10) {
        println!("missing-in-core: {}", pair_line(m));
    }
    for m in report.missing_in_window.iter().take(10) {
        println!("missing-in-window: {}", pair_line(m));
    }
    if discrepancies > 0 {
        return Err(Failure::new(9, format!("{discrepancies} discrepancies")));
    }
    Ok(())
}

fn graph_dot(g: &MarkedGraph) -> String {
    let mut s = String::from("graph marked {\n  node [shape=circle];\n");
    for v in 0..g.vertex_count() {
        let _ = writeln!(s, "  \"{}\";", g.vertex_name(VertexId(v)));
    }
    for e in g.edges() {
        let label = match &e.marking {
            Some(w) => format!("{}: {}", e.name, w),
            None => e.name.clone(),
        };
        let _ = writeln!(
            s,
            "  \"{}\" -- \"{}\" [label=\"{label}\"];",
            g.vertex_name(e.tail),
            g.vertex_name(e.head)
        );
    }
    s.push_str("}\n");
    s
}

fn cmd_export_dot(input: &Path, input2: Option<&Path>, out: Option<&Path>) -> Result<(), Failure> {
    let dot = match input2 {
        None => graph_dot(&read_graph(input)?),
        Some(p2) => {
            let pair = build_pair(input, p2)?;
            let complex = pair.build().map_err(build_failure)?;
            complex.export_dot()
        }
    };
    match out {
        Some(path) => write_file(path, &dot)?,
        None => print!("{dot}"),
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.cmd {
        Cmd::Build(args) => cmd_build(args),
        Cmd::Validate { input } => cmd_validate(input),
        Cmd::Pieces(args) => cmd_pieces(args),
        Cmd::Roundtrip { input, input2, out } => cmd_roundtrip(input, input2, out.as_deref()),
        Cmd::Random { genus, seed, moves, out } => cmd_random(*genus, *seed, *moves, out),
        Cmd::Oracle { input, input2, radius } => cmd_oracle(input, input2, *radius),
        Cmd::ExportDot { input, input2, out } => {
            cmd_export_dot(input, input2.as_deref(), out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
