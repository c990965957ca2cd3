use kgraph_core::fixtures::{self, random_2graph, random_path, RandomGraphParams};
use kgraph_core::{Degree, Path, Skeleton};
use kgraph_oracle as oracle;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn small_params() -> RandomGraphParams {
    RandomGraphParams {
        min_vertices: 1,
        max_vertices: 3,
        max_multiplicity: 2,
        max_edges_per_color: 8,
    }
}

fn graph(seed: u64) -> (Skeleton, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sk = random_2graph(&mut rng, &small_params());
    (sk, rng)
}

fn d(c: &[u32]) -> Degree {
    Degree::from_coords(c.to_vec())
}

/// A random path of degree `<= bound` starting at `src`.
fn path_from(sk: &Skeleton, rng: &mut ChaCha8Rng, bound: &Degree, src: kgraph_core::VertexId) -> Path {
    random_path(sk, rng, bound, Some(src))
}

fn random_subdegree(rng: &mut ChaCha8Rng, n: &Degree) -> Degree {
    Degree::from_coords(n.coords().iter().map(|&c| rng.gen_range(0..=c)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn compose_matches_exhaustive_rewriting(seed in any::<u64>()) {
        let (sk, mut rng) = graph(seed);
        let bound = d(&[2, 2]);
        let a = random_path(&sk, &mut rng, &bound, None);
        let b = path_from(&sk, &mut rng, &bound, a.range());
        let fast = sk.compose(&a, &b).unwrap();
        prop_assert_eq!(Some(fast.clone()), oracle::compose(&sk, &a, &b));
        prop_assert_eq!(fast.degree(), &a.degree().add(b.degree()));
        prop_assert_eq!(fast.source(), a.source());
        prop_assert_eq!(fast.range(), b.range());
    }

    #[test]
    fn compose_is_associative(seed in any::<u64>()) {
        let (sk, mut rng) = graph(seed);
        let bound = d(&[1, 1]);
        let a = random_path(&sk, &mut rng, &bound, None);
        let b = path_from(&sk, &mut rng, &bound, a.range());
        let c = path_from(&sk, &mut rng, &bound, b.range());
        let left = sk.compose(&sk.compose(&a, &b).unwrap(), &c);
        let right = sk.compose(&a, &sk.compose(&b, &c).unwrap());
        prop_assert_eq!(left, right);
    }

    #[test]
    fn refactor_is_schedule_independent(seed in any::<u64>()) {
        let (sk, mut rng) = graph(seed);
        let p = random_path(&sk, &mut rng, &d(&[2, 2]), None);
        let mut word: Vec<usize> = p.degree().sorted_colors().collect();
        word.shuffle(&mut rng);
        let ours = sk.refactor(&p, &word).unwrap();
        let all = oracle::words_with_colors(&sk, p.edges(), &word);
        prop_assert_eq!(all, vec![ours]);
    }

    #[test]
    fn segments_nest(seed in any::<u64>()) {
        let (sk, mut rng) = graph(seed);
        let p = random_path(&sk, &mut rng, &d(&[2, 2]), None);
        let c = random_subdegree(&mut rng, p.degree());
        let b = random_subdegree(&mut rng, &c);
        let a = random_subdegree(&mut rng, &b);
        let outer = sk.segment(&p, &a, &c).unwrap();
        let inner = sk.segment(&outer, &Degree::zero(2), &b.checked_sub(&a).unwrap()).unwrap();
        let direct = sk.segment(&p, &a, &b).unwrap();
        prop_assert_eq!(&inner, &direct);
        prop_assert_eq!(direct, oracle::segment(&sk, &p, &a, &b));
    }

    #[test]
    fn factorisation_is_unique(seed in any::<u64>()) {
        let (sk, mut rng) = graph(seed);
        let p = random_path(&sk, &mut rng, &d(&[2, 1]), None);
        let a = random_subdegree(&mut rng, p.degree());
        let head = sk.prefix(&p, &a).unwrap();
        let tail = sk.suffix(&p, &a).unwrap();
        prop_assert_eq!(sk.compose(&head, &tail), Some(p.clone()));
        prop_assert_eq!(oracle::factorizations(&sk, &p, &a), vec![(head, tail)]);
    }

    #[test]
    fn enumeration_matches_oracle(seed in any::<u64>()) {
        let (sk, mut rng) = graph(seed);
        let n = random_subdegree(&mut rng, &d(&[2, 2]));
        let mut ours = sk.enumerate_paths(&n, None);
        ours.sort();
        let before = ours.len();
        ours.dedup();
        prop_assert_eq!(before, ours.len());
        prop_assert_eq!(ours, oracle::all_paths(&sk, &n, None));
    }

    #[test]
    fn literals_round_trip(seed in any::<u64>()) {
        let (sk, mut rng) = graph(seed);
        let p = random_path(&sk, &mut rng, &d(&[2, 2]), None);
        let text = sk.literal(&p).to_string();
        prop_assert_eq!(sk.parse_path(&text).unwrap(), p);
    }
}

#[test]
fn three_colored_refactoring_is_schedule_independent() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let doc = fixtures::random_3graph_doc(&mut rng);
        let sk = Skeleton::from_doc(&doc).unwrap();
        let p = random_path(&sk, &mut rng, &d(&[1, 1, 1]), None);
        for _ in 0..6 {
            let mut word: Vec<usize> = p.degree().sorted_colors().collect();
            word.shuffle(&mut rng);
            let all = oracle::words_with_colors(&sk, p.edges(), &word);
            assert_eq!(all, vec![sk.refactor(&p, &word).unwrap()]);
        }
    }
}

#[test]
fn worked_example_counts() {
    let sk = fixtures::ex43(2);
    let v00 = sk.vertex_id("00").unwrap();
    assert_eq!(sk.enumerate_paths(&d(&[1, 1]), Some(v00)).len(), 3);
    let sk = fixtures::ex43(3);
    assert_eq!(sk.enumerate_paths(&d(&[1, 1]), Some(v00)).len(), 4);
}
