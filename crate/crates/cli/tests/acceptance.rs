//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Every random choice is seeded, so runs are reproducible.

use std::collections::BTreeSet;
use std::panic::{self, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use kgraph_core::fixtures::{
    self, random_2graph, random_2graph_doc, random_3graph_doc, random_admissible_set, square_transpositions,
    square_transpositions_of_colors, RandomGraphParams,
};
use kgraph_core::fock::{operator_norm, CuntzPimsnerStatus, DEFAULT_TOL, DIAGONAL_TOL};
use kgraph_core::{Degree, EdgeId, FockSpace, Path, Skeleton, Tck};
use kgraph_oracle as oracle;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn d(c: &[u32]) -> Degree {
    Degree::from_coords(c.to_vec())
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("took {elapsed:.2?}, limit {limit:?}"))
}

fn small_params() -> RandomGraphParams {
    RandomGraphParams {
        min_vertices: 1,
        max_vertices: 3,
        max_multiplicity: 1,
        max_edges_per_color: 5,
    }
}

/// A sources-closed set of at most `max` paths.
fn admissible(sk: &Skeleton, rng: &mut ChaCha8Rng, max: usize, bound: &Degree) -> Vec<Path> {
    loop {
        let f = random_admissible_set(sk, rng, max, bound);
        if f.len() <= max {
            return f;
        }
    }
}

/// The named fixtures of the partition and Fock criteria.
fn named_fixtures() -> Vec<(String, Skeleton)> {
    let mut out = vec![
        ("loops".to_string(), fixtures::loops(2)),
        ("free2".to_string(), fixtures::free(2, 2)),
    ];
    for m in 1..=3 {
        out.push((format!("ex43(m={m})"), fixtures::ex43(m)));
    }
    out
}

fn skeleton_axioms() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for i in 0..100 {
        let doc = random_2graph_doc(&mut rng, &RandomGraphParams::default());
        ensure(doc.edges.len() <= 40, || format!("2-graph {i} has too many edges"))?;
        Skeleton::from_doc(&doc).map_err(|e| format!("2-graph {i}: {e}"))?;
    }
    let (mut rejected, mut twisted) = (0, 0);
    for i in 0..20 {
        let doc = random_3graph_doc(&mut rng);
        Skeleton::from_doc(&doc).map_err(|e| format!("3-graph {i}: {e}"))?;
        for bad in square_transpositions_of_colors(&doc, 1, 2) {
            let found = Skeleton::from_doc_unchecked_associativity(&bad)
                .map_err(|e| format!("3-graph {i} perturbation: {e}"))?
                .check_associativity();
            ensure(!found.is_empty(), || format!("3-graph {i}: perturbation accepted"))?;
            ensure(found.len() == oracle::doc_associativity_violations(&bad), || {
                format!("3-graph {i}: violation count disagrees with swap-chain oracle")
            })?;
            rejected += 1;
        }
        for bad in square_transpositions(&doc) {
            let valid = Skeleton::from_doc(&bad).is_ok();
            ensure(valid == (oracle::doc_associativity_violations(&bad) == 0), || {
                format!("3-graph {i}: verdict disagrees with swap-chain oracle")
            })?;
            twisted += usize::from(valid);
        }
    }
    within(start.elapsed(), Duration::from_secs(5))?;
    Ok(format!(
        "100 2-graphs and 20 3-graphs valid; {rejected} single-level square perturbations rejected \
         ({twisted} mixed-color exchanges are valid twisted products, confirmed by oracle)"
    ))
}

fn mce_correctness() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let bound = d(&[3, 3]);
    let mut pairs = 0;
    let mut nonempty = 0;
    let mut dfs_time = Duration::ZERO;
    while pairs < 500 {
        let sk = random_2graph(&mut rng, &RandomGraphParams::default());
        for _ in 0..25 {
            let mu = fixtures::random_path(&sk, &mut rng, &bound, None);
            let nu = fixtures::random_path(&sk, &mut rng, &bound, Some(mu.source()));
            let t0 = Instant::now();
            let ours = sk.mce_paths(&mu, &nu);
            dfs_time += t0.elapsed();
            let brute = oracle::brute_mce(&sk, &mu, &nu);
            ensure(ours == brute, || {
                format!("MCE({}, {}) = {} paths, brute force {}", sk.literal(&mu), sk.literal(&nu), ours.len(), brute.len())
            })?;
            nonempty += usize::from(!ours.is_empty());
            pairs += 1;
        }
    }
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!("{pairs} pairs agree with brute force ({nonempty} nonempty); DFS time {dfs_time:.2?}"))
}

fn counterexample_growth() -> Outcome {
    let mut seen = Vec::new();
    for m in 1..=6 {
        let sk = fixtures::ex43(m);
        let report = sk.is_finitely_aligned(&d(&[1, 1]));
        let brute = oracle::brute_generator_max_mce(&sk);
        ensure(report.max_generator_mce == m + 1 && brute == m + 1, || {
            format!("m={m}: maxGeneratorMce {} (brute force {brute}), expected {}", report.max_generator_mce, m + 1)
        })?;
        seen.push(report.max_generator_mce.to_string());
    }
    Ok(format!("maxGeneratorMce(1..6) = {}", seen.join(",")))
}

fn closure_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut families = 0;
    for i in 0..200 {
        let sk = random_2graph(&mut rng, &small_params());
        let f = admissible(&sk, &mut rng, 4, &d(&[2, 2]));
        let vee = sk.vee(&f);
        ensure(f.iter().all(|p| vee.contains(p)), || format!("F {i}: F not contained in its closure"))?;
        let sources: BTreeSet<_> = f.iter().map(Path::source).collect();
        let mut by_source = BTreeSet::new();
        for &v in &sources {
            let fv: Vec<Path> = f.iter().filter(|p| p.source() == v).cloned().collect();
            by_source.extend(sk.vee(&fv).closure);
        }
        ensure(by_source == vee.closure, || format!("F {i}: closure does not split by source"))?;
        ensure(vee.closure == oracle::brute_vee(&sk, &f), || {
            format!("F {i}: closure differs from subset enumeration")
        })?;
        let closure: Vec<Path> = vee.closure.iter().cloned().collect();
        for _ in 0..10 {
            let size = rng.gen_range(1..=3.min(closure.len()));
            let g: Vec<Path> = closure.choose_multiple(&mut rng, size).cloned().collect();
            for gamma in sk.mce_family(&g) {
                ensure(vee.contains(&gamma), || format!("F {i}: MCE of a subfamily escapes the closure"))?;
            }
            families += 1;
        }
    }
    Ok(format!("200 sets, {families} subfamilies closed"))
}

fn partition_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut graphs = named_fixtures();
    for i in 0..5 {
        graphs.push((format!("random{i}"), random_2graph(&mut rng, &small_params())));
    }
    let mut total = 0;
    for i in 0..100 {
        let (name, sk) = &graphs[i % graphs.len()];
        let bound = Degree::from_coords(vec![2; sk.k()]);
        let f = admissible(sk, &mut rng, 4, &bound);
        let tck = Tck::new(sk);
        let report = tck.partition_check(&f).map_err(|e| format!("{name}: {e}"))?;
        ensure(report.residual.is_zero(), || {
            format!("{name}: residual {}", report.residual.display(sk))
        })?;
        ensure(report.range_failures.is_empty(), || {
            format!("{name}: range identity fails at {}", sk.literal(&report.range_failures[0].0))
        })?;
        total += report.closure.closure.len();
    }
    Ok(format!("100 sets over {} skeletons, {total} projections, residual exactly 0", graphs.len()))
}

fn removal_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut cases, mut deltas) = (0, 0);
    while cases < 100 {
        let sk = random_2graph(&mut rng, &small_params());
        let f = admissible(&sk, &mut rng, 4, &d(&[2, 1]));
        let removable: Vec<&Path> = f.iter().filter(|p| !p.is_vertex()).collect();
        let Some(lambda) = removable.choose(&mut rng) else { continue };
        let report = Tck::new(&sk).removal_identity_check(&f, lambda).map_err(|e| e.to_string())?;
        ensure(report.failures.is_empty(), || {
            format!("removing {}: fails at {}", sk.literal(lambda), sk.literal(&report.failures[0].0))
        })?;
        cases += 1;
        deltas += report.instances;
    }
    Ok(format!("{cases} instances, {deltas} paths δ checked exactly"))
}

fn fock_relations() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut cases: Vec<(String, Skeleton, Degree)> = vec![("loops".into(), fixtures::loops(2), d(&[3]))];
    for (name, sk) in named_fixtures().into_iter().skip(1) {
        cases.push((name, sk, d(&[3, 3])));
    }
    for i in 0..3 {
        cases.push((format!("random{i}"), random_2graph(&mut rng, &small_params()), d(&[2, 2])));
    }
    let (mut defects, mut sinks, mut nica) = (0, 0, 0);
    for (name, sk, bound) in &cases {
        let space = FockSpace::new(sk, bound).map_err(|e| e.to_string())?;
        let report = space.check_relations();
        for r in &report.relations[..5] {
            ensure(r.status.is_pass(), || format!("{name}: relation {} fails ({:?})", r.relation, r.witness))?;
        }
        for e in &report.cuntz_pimsner {
            match e.status {
                CuntzPimsnerStatus::Sink => sinks += 1,
                _ => {
                    ensure(e.defect_is_e_v && e.defect == [e.vertex.clone()], || {
                        format!("{name}: defect at {} in degree ({}) is {:?}", e.vertex, e.degree, e.defect)
                    })?;
                    defects += 1;
                }
            }
        }
        for p in bound.lower_box() {
            for q in bound.lower_box() {
                if p.join(&q).le(bound) {
                    let r = space.check_nica_products(&p, &q).map_err(|e| e.to_string())?;
                    ensure(r.status.is_pass(), || format!("{name}: Nica product ({p})x({q}) fails"))?;
                    nica += 1;
                }
            }
        }
    }
    Ok(format!(
        "{} skeletons: relations (1)-(5) pass, {defects} defects equal e_v ({sinks} sink entries), {nica} Nica products",
        cases.len()
    ))
}

fn evaluation_homomorphism() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..200 {
        let sk = random_2graph(&mut rng, &small_params());
        let t = Tck::new(&sk);
        let a = oracle::random_element(&t, &mut rng, 5, &d(&[1, 1]));
        let b = oracle::random_element(&t, &mut rng, 5, &d(&[1, 1]));
        let margin = a.degree_support(2).add(&b.degree_support(2));
        let space = FockSpace::new(&sk, &margin.add(&d(&[1, 1]))).map_err(|e| e.to_string())?;
        let interior = space.interior(&margin).map_err(|e| e.to_string())?;
        let lhs = space.evaluate(&t.multiply(&a, &b)).map_err(|e| e.to_string())?;
        let rhs = space
            .evaluate(&a)
            .map_err(|e| e.to_string())?
            .mul(&space.evaluate(&b).map_err(|e| e.to_string())?);
        if let Some(c) = lhs.first_difference(&rhs, |c| interior.contains(c)) {
            return Err(format!("pair {i}: column {} differs", sk.literal(&space.basis()[c])));
        }
    }
    Ok("200 pairs agree exactly on interiors".into())
}

fn diagonal_map() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut gap: f64 = f64::INFINITY;
    for i in 0..100 {
        let sk = random_2graph(&mut rng, &small_params());
        let t = Tck::new(&sk);
        let space = FockSpace::new(&sk, &d(&[2, 2])).map_err(|e| e.to_string())?;
        let a = oracle::random_element(&t, &mut rng, 5, &d(&[1, 1]));
        let full = space.evaluate(&a).map_err(|e| e.to_string())?;
        let diag = space.evaluate(&a.diag()).map_err(|e| e.to_string())?;
        ensure(diag == full.diagonal_compression(), || format!("element {i}: diag is not the compression"))?;
        let nd = operator_norm(&diag, DIAGONAL_TOL).map_err(|e| e.to_string())?;
        let nf = operator_norm(&full, DEFAULT_TOL).map_err(|e| e.to_string())?;
        ensure(nd.value <= nf.value + 1e-6, || format!("element {i}: {} > {}", nd.value, nf.value))?;
        gap = gap.min(nf.value - nd.value);
    }
    Ok(format!("100 elements; compression exact, min norm gap {gap:.3e}"))
}

fn faithfulness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut families = 0;
    let mut skeletons = named_fixtures();
    skeletons.push(("random".into(), random_2graph(&mut rng, &small_params())));
    for (name, sk) in &skeletons {
        let bound = Degree::from_coords(vec![2; sk.k()]);
        let space = FockSpace::new(sk, &bound).map_err(|e| e.to_string())?;
        let degrees: Vec<Degree> = bound.lower_box().into_iter().filter(|p| !p.is_zero()).collect();
        for v in sk.vertices() {
            for _ in 0..10 {
                let count = rng.gen_range(1..=3.min(degrees.len()));
                let sets: Vec<(Degree, Vec<Path>)> = degrees
                    .choose_multiple(&mut rng, count)
                    .map(|p| {
                        let all = sk.enumerate_paths(p, Some(v));
                        let n = rng.gen_range(0..=all.len().min(4));
                        (p.clone(), all.choose_multiple(&mut rng, n).cloned().collect())
                    })
                    .collect();
                let r = space.faithfulness_hypothesis(v, &sets).map_err(|e| e.to_string())?;
                ensure(r.nonzero && r.diagonal_projection, || {
                    format!("{name} at {}: product is not a nonzero diagonal projection", r.vertex)
                })?;
                ensure(r.witness.as_deref() == Some(sk.vertex_name(v)), || {
                    format!("{name} at {}: witness {:?}", r.vertex, r.witness)
                })?;
                families += 1;
            }
        }
    }
    let mut witnesses = 0;
    for n in 3..=5 {
        let sk = fixtures::free(n, 2);
        let v = sk.vertex_id("v").expect("free fixture vertex");
        let space = FockSpace::new(&sk, &d(&[1, 1])).map_err(|e| e.to_string())?;
        for _ in 0..10 {
            let sets: Vec<Vec<EdgeId>> = (1..=2)
                .map(|c| {
                    let out = sk.out_edges(v, c);
                    let size = rng.gen_range(0..n);
                    out.choose_multiple(&mut rng, size).copied().collect()
                })
                .collect();
            let mu = sk
                .find_avoiding_path(v, &sets)
                .map_err(|e| e.to_string())?
                .ok_or_else(|| format!("free({n}): no avoiding path"))?;
            ensure(space.verify_avoiding_witness(v, &sets, &mu).map_err(|e| e.to_string())?, || {
                format!("free({n}): witness {} does not verify", sk.literal(&mu))
            })?;
            witnesses += 1;
        }
    }
    Ok(format!("{families} families with witness e_v; {witnesses} avoiding-path witnesses verified"))
}

fn end_to_end() -> Outcome {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_kgraph"))
        .args(["check", "--fixture", "ex43", "--m", "2", "--bound", "2,2"])
        .output()
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(out.status.code() == Some(0), || {
        format!("exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr))
    })?;
    within(elapsed, Duration::from_secs(30))?;
    Ok(format!("exit 0 in {elapsed:.2?}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("skeleton axioms", skeleton_axioms),
        ("MCE correctness", mce_correctness),
        ("counterexample growth", counterexample_growth),
        ("closure properties", closure_properties),
        ("partition identity", partition_identity),
        ("removal identity", removal_identity),
        ("Fock relations", fock_relations),
        ("evaluation homomorphism", evaluation_homomorphism),
        ("diagonal map", diagonal_map),
        ("faithfulness hypothesis", faithfulness),
        ("end-to-end check", end_to_end),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS [{:>2}] {name} ({elapsed:.2?}): {detail}", i + 1),
            Err(reason) => {
                failed += 1;
                println!("FAIL [{:>2}] {name} ({elapsed:.2?}): {reason}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
