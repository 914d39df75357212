//! Acceptance gate: seven suite-level criteria over a shared corpus of
//! seeded instances. Each test exercises one criterion end to end and
//! prints a single `PASS criterion-N` line when it holds; every bound and
//! tolerance is pinned in the assertions themselves.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use treecore::{
    base_graph, build_decomposition, dual_complex, generate_pair, graph_skeleton,
    isomorphic_colored, random_twist, twist_marking, Automorphism, BuildError, ClopenSet, Color,
    CorePair, LinkClass, MarkedGraph, PieceDecomposition, RationalEnd, SphereSystemCertificate,
    VhComplex, Word,
};

struct Instance {
    genus: u8,
    seed: u64,
    moves: u32,
    t1: MarkedGraph,
    t2: MarkedGraph,
    complex: VhComplex,
    swapped: VhComplex,
    pd: PieceDecomposition,
    cert: SphereSystemCertificate,
    swapped_cert: SphereSystemCertificate,
    build_time: Duration,
}

/// 100 genus-2 instances plus 20 genus-3 instances, built once and shared
/// by the criteria. Move counts stay within 3..=6: a twist with fewer
/// moves than the rank always leaves a generator untouched and is rejected.
fn corpus() -> &'static [Instance] {
    static CORPUS: OnceLock<Vec<Instance>> = OnceLock::new();
    CORPUS.get_or_init(|| {
        let mut out = Vec::with_capacity(120);
        for seed in 0..100u64 {
            out.push(build_instance(2, seed, 3 + (seed % 4) as u32));
        }
        for seed in 0..20u64 {
            out.push(build_instance(3, seed, 4 + (seed % 3) as u32));
        }
        out
    })
}

fn build_instance(genus: u8, seed: u64, moves: u32) -> Instance {
    let (t1, t2) = generate_pair(genus, seed, moves).expect("generation succeeds");
    let started = Instant::now();
    let pair = CorePair::new(t1.clone(), t2.clone())
        .unwrap_or_else(|e| panic!("g={genus} seed={seed} moves={moves} rejected: {e}"));
    let complex = pair.build().expect("build succeeds");
    let build_time = started.elapsed();

    let swapped = CorePair::new(t2.clone(), t1.clone())
        .expect("swapped pair admissible")
        .build()
        .expect("swapped build succeeds");
    let (pd, cert) = build_decomposition(&complex).expect("decomposition succeeds");
    let (_, swapped_cert) = build_decomposition(&swapped).expect("swapped decomposition");
    Instance { genus, seed, moves, t1, t2, complex, swapped, pd, cert, swapped_cert, build_time }
}

#[test]
fn criterion_1_core_validity_suite() {
    let mut max_g2 = Duration::ZERO;
    let mut max_g3 = Duration::ZERO;
    for ins in corpus() {
        let g = ins.genus;
        let c = &ins.complex;
        let label = format!("g={} seed={} moves={}", g, ins.seed, ins.moves);
        assert_eq!(c.euler_characteristic(), 1 - g as i64, "{label}");

        // Both collapses recover the inputs as unmarked trivalent graphs.
        for (contracted, input) in [(Color::Red, &ins.t1), (Color::Black, &ins.t2)] {
            let collapsed = c.collapse(contracted);
            assert!(collapsed.is_connected(), "{label}");
            assert!(collapsed.is_trivalent(), "{label}");
            assert_eq!(collapsed.edges.len(), 3 * g as usize - 3, "{label}");
            assert!(collapsed.isomorphic(&graph_skeleton(input)).is_some(), "{label}");
        }

        for color in [Color::Black, Color::Red] {
            let hp = c.hyperplanes(color);
            assert_eq!(hp.len(), 3 * g as usize - 3, "{label}");
            assert!(hp.iter().all(|h| h.is_tree()), "{label}");
        }

        for v in 0..c.vertex_count() {
            assert!(
                VhComplex::classify_link(&c.vertex_link(v)).is_some(),
                "{label}: vertex {v} link unclassified"
            );
        }

        let cap = if g == 2 { Duration::from_secs(5) } else { Duration::from_secs(60) };
        assert!(ins.build_time < cap, "{label}: build took {:?}", ins.build_time);
        if g == 2 {
            max_g2 = max_g2.max(ins.build_time);
        } else {
            max_g3 = max_g3.max(ins.build_time);
        }
    }
    println!(
        "PASS criterion-1: 120 instances valid (slowest build g2={:.3}s g3={:.3}s)",
        max_g2.as_secs_f64(),
        max_g3.as_secs_f64()
    );
}

#[test]
fn criterion_2_window_oracle_equivalence() {
    let g2: Vec<&Instance> = corpus().iter().filter(|i| i.genus == 2).take(25).collect();
    assert_eq!(g2.len(), 25);
    let mut pairs_total = 0;
    for ins in &g2 {
        let pair = CorePair::new(ins.t1.clone(), ins.t2.clone()).unwrap();
        let report = pair.oracle_window(3).expect("oracle runs");
        assert!(
            report.clean(),
            "seed {}: {} missing in core, {} missing in window",
            ins.seed,
            report.missing_in_core.len(),
            report.missing_in_window.len()
        );
        pairs_total += report.window_pairs;
    }

    // Radius zero sees no edges at all and must pass vacuously.
    let pair = CorePair::new(g2[0].t1.clone(), g2[0].t2.clone()).unwrap();
    let empty = pair.oracle_window(0).unwrap();
    assert!(empty.clean() && empty.window_pairs == 0);

    println!("PASS criterion-2: 25 seeded pairs, radius 3, {pairs_total} window pairs, zero discrepancies");
}

fn random_reduced_word(rank: u8, len: usize, rng: &mut ChaCha8Rng) -> Word {
    let mut w = Word::identity(rank);
    for _ in 0..len {
        let opts = w.extension_letters();
        w = w.push(opts[rng.gen_range(0..opts.len())]);
    }
    w
}

fn random_clopen(rank: u8, rng: &mut ChaCha8Rng) -> ClopenSet {
    let mut s = ClopenSet::empty(rank);
    for _ in 0..rng.gen_range(1..=3) {
        let len = rng.gen_range(1..=3);
        s = s.union(&ClopenSet::cylinder(&random_reduced_word(rank, len, rng)));
    }
    if rng.gen_bool(0.25) {
        s = s.complement();
    }
    s
}

/// `k` rational ends inside `s`: a prefix of `s` randomly extended, closed
/// off with a single-letter period.
fn sample_members(s: &ClopenSet, k: usize, rng: &mut ChaCha8Rng) -> Vec<RationalEnd> {
    let prefixes = s.prefixes();
    if prefixes.is_empty() {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(k);
    while out.len() < k {
        let mut head = prefixes[rng.gen_range(0..prefixes.len())].clone();
        for _ in 0..rng.gen_range(0..=2) {
            let opts = head.extension_letters();
            head = head.push(opts[rng.gen_range(0..opts.len())]);
        }
        let opts = head.extension_letters();
        let period = Word::single(s.rank(), opts[rng.gen_range(0..opts.len())]);
        let end = RationalEnd::new(head, period).expect("constructed period is reduced");
        debug_assert!(s.contains_end(&end));
        out.push(end);
    }
    out
}

#[test]
fn criterion_3_boundary_image_exactness() {
    let mut cases = 0;
    let mut memberships = 0;
    for rank in 2..=3u8 {
        let mut rng = ChaCha8Rng::seed_from_u64(900 + rank as u64);
        for _ in 0..500 {
            let alpha = random_twist(rank, rng.gen_range(1..=4), &mut rng);
            let s = random_clopen(rank, &mut rng);
            let t = random_clopen(rank, &mut rng);

            let s_mapped = s.map(&alpha).expect("map succeeds");
            let back = s_mapped.map(&alpha.inverse()).expect("inverse map succeeds");
            assert_eq!(back, s, "inverse round trip must be structural identity");

            let lhs = s.intersect(&t).map(&alpha).expect("map succeeds");
            let rhs = s_mapped.intersect(&t.map(&alpha).expect("map succeeds"));
            assert_eq!(lhs, rhs, "intersection must commute with the boundary map");

            // 100 sampled ends per case, membership compared exactly.
            let inside = sample_members(&s, 50, &mut rng);
            let outside = sample_members(&s.complement(), 100 - inside.len(), &mut rng);
            for end in inside.iter().chain(outside.iter()) {
                let image = alpha.apply_to_end(end);
                assert_eq!(
                    s.contains_end(end),
                    s_mapped.contains_end(&image),
                    "membership must transport along the boundary map"
                );
                memberships += 1;
            }
            cases += 1;
        }
    }
    println!("PASS criterion-3: {cases} automorphism/set cases, {memberships} end memberships, all exact");
}

#[test]
fn criterion_4_round_trip_and_color_swap() {
    for ins in corpus() {
        let label = format!("g={} seed={}", ins.genus, ins.seed);
        let dual = dual_complex(&ins.pd).expect("dual rebuilds");
        assert!(isomorphic_colored(&dual, &ins.complex).is_some(), "{label}: dual differs");
        assert!(
            isomorphic_colored(&ins.swapped, &ins.complex.swap_colors()).is_some(),
            "{label}: swapped core differs from color-swapped core"
        );
    }
    println!("PASS criterion-4: 120 dual round trips and color-swap symmetries");
}

#[test]
fn criterion_5_piece_taxonomy() {
    for ins in corpus() {
        let g = ins.genus;
        let c = &ins.complex;
        let label = format!("g={} seed={}", g, ins.seed);

        // Surface pieces: the square count on an edge fixes the kind.
        for (i, two) in ins.pd.twos.iter().enumerate() {
            let degree = c
                .squares()
                .iter()
                .filter(|s| s.bottom == i || s.top == i || s.left == i || s.right == i)
                .count();
            assert!((1..=3).contains(&degree), "{label}: edge {i} degree {degree}");
            assert_eq!(two.kind as usize, degree - 1, "{label}: edge {i} kind");
        }

        // Body pieces: genus read off the link, capped at 4, extremal only
        // for the complete bipartite link.
        for (v, three) in ins.pd.threes.iter().enumerate() {
            let link = c.vertex_link(v);
            let nodes = link.black.len() + link.red.len();
            let edges = link.pairs.len();
            assert_eq!(three.pattern.genus, 1 + edges - nodes, "{label}: vertex {v} genus");
            assert!(three.pattern.genus <= 4, "{label}: vertex {v}");
            let class = VhComplex::classify_link(&link).unwrap();
            assert_eq!(
                three.pattern.genus == 4,
                class == LinkClass::CompleteBipartite33,
                "{label}: vertex {v} extremal genus"
            );
        }

        let want = 3 * g as usize - 3;
        assert_eq!(ins.cert.black.len(), want, "{label}");
        assert_eq!(ins.cert.red.len(), want, "{label}");
        for region in ins.cert.black_regions.iter().chain(ins.cert.red_regions.iter()) {
            assert_eq!(region.boundary, 3, "{label}: region not three-holed");
        }

        assert_eq!(ins.cert.intersection_number, c.square_count(), "{label}");
        assert_eq!(
            ins.swapped_cert.intersection_number, ins.cert.intersection_number,
            "{label}: intersection number must not depend on input order"
        );
    }
    println!("PASS criterion-5: piece taxonomy verified on 120 instances");
}

#[test]
fn criterion_6_degenerate_detection() {
    let mut rejections = 0;
    for genus in 2..=3u8 {
        let t = base_graph(genus).unwrap();

        // Identical inputs.
        match CorePair::new(t.clone(), t.clone()) {
            Err(BuildError::HypothesisViolated { orbit1, orbit2, .. }) => {
                assert!(!orbit1.is_empty() && !orbit2.is_empty());
                rejections += 1;
            }
            other => panic!("identical pair at genus {genus} must be rejected, got {other:?}"),
        }

        // Inner twists present the same tree with translated markings.
        for i in 0..genus {
            let inner = Automorphism::inner(&Word::generator(genus, i));
            let twisted = twist_marking(&t, &inner).unwrap();
            match CorePair::new(t.clone(), twisted) {
                Err(BuildError::HypothesisViolated { orbit1, orbit2, deck2 }) => {
                    assert!(!orbit1.is_empty() && !orbit2.is_empty() && !deck2.is_empty());
                    rejections += 1;
                }
                other => {
                    panic!("inner twist {i} at genus {genus} must be rejected, got {other:?}")
                }
            }
        }

        // Zero-move instances reproduce the identical pair.
        for seed in 0..5u64 {
            let (t1, t2) = generate_pair(genus, seed, 0).unwrap();
            assert!(
                matches!(CorePair::new(t1, t2), Err(BuildError::HypothesisViolated { .. })),
                "zero moves at genus {genus} seed {seed} must be rejected"
            );
            rejections += 1;
        }
    }
    println!("PASS criterion-6: {rejections} degenerate fixtures rejected with concrete witnesses");
}

/// Every serialized artifact of one seed, in one deterministic bundle.
fn artifact_bundle(seed: u64) -> Vec<String> {
    let (t1, t2) = generate_pair(2, seed, 4).unwrap();
    let mut out = vec![t1.render(), t2.render()];
    if let Ok(pair) = CorePair::new(t1, t2) {
        let complex = pair.build().unwrap();
        let (pd, _) = build_decomposition(&complex).unwrap();
        out.push(complex.serialize());
        out.push(complex.export_dot());
        out.push(pd.serialize());
    }
    out
}

#[test]
fn criterion_7_deterministic_outputs() {
    let seeds: Vec<u64> = (0..10).collect();
    let baseline: Vec<Vec<String>> = seeds.iter().map(|&s| artifact_bundle(s)).collect();
    assert!(baseline.iter().all(|b| b.len() == 5), "every seed must build");

    let rerun: Vec<Vec<String>> = seeds.iter().map(|&s| artifact_bundle(s)).collect();
    assert_eq!(baseline, rerun, "second in-process run must be byte-identical");

    for threads in [2usize, 5] {
        let mut results: Vec<Option<Vec<Vec<String>>>> = vec![None; threads];
        std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for t in 0..threads {
                let chunk: Vec<u64> =
                    seeds.iter().copied().filter(|s| (*s as usize) % threads == t).collect();
                handles.push((t, scope.spawn(move || {
                    chunk.iter().map(|&s| artifact_bundle(s)).collect::<Vec<_>>()
                })));
            }
            for (t, h) in handles {
                results[t] = Some(h.join().unwrap());
            }
        });
        for t in 0..threads {
            let chunk: Vec<&Vec<String>> = seeds
                .iter()
                .filter(|s| (**s as usize) % threads == t)
                .map(|s| &baseline[*s as usize])
                .collect();
            let got = results[t].take().unwrap();
            assert_eq!(got.len(), chunk.len());
            for (g, want) in got.iter().zip(chunk) {
                assert_eq!(g, want, "{threads}-thread run must match the baseline bytes");
            }
        }
    }
    println!("PASS criterion-7: 10 seeds byte-identical across reruns and 2/5-thread schedules");
}
