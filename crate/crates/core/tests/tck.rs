use kgraph_core::fixtures::{self, random_2graph, random_admissible_set, RandomGraphParams};
use kgraph_core::{Degree, FockSpace, Path, Skeleton, Tck};
use kgraph_oracle as oracle;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn d(c: &[u32]) -> Degree {
    Degree::from_coords(c.to_vec())
}

fn small_graph(seed: u64) -> (Skeleton, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = RandomGraphParams {
        min_vertices: 1,
        max_vertices: 3,
        max_multiplicity: 1,
        max_edges_per_color: 6,
    };
    let sk = random_2graph(&mut rng, &params);
    (sk, rng)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn multiply_is_associative(seed in any::<u64>()) {
        let (sk, mut rng) = small_graph(seed);
        let t = Tck::new(&sk);
        let bound = d(&[1, 1]);
        let a = oracle::random_element(&t, &mut rng, 3, &bound);
        let b = oracle::random_element(&t, &mut rng, 3, &bound);
        let c = oracle::random_element(&t, &mut rng, 3, &bound);
        prop_assert_eq!(t.multiply(&t.multiply(&a, &b), &c), t.multiply(&a, &t.multiply(&b, &c)));
    }

    #[test]
    fn adjoint_is_an_anti_homomorphism(seed in any::<u64>()) {
        let (sk, mut rng) = small_graph(seed);
        let t = Tck::new(&sk);
        let bound = d(&[2, 1]);
        let a = oracle::random_element(&t, &mut rng, 4, &bound);
        let b = oracle::random_element(&t, &mut rng, 4, &bound);
        prop_assert_eq!(a.adjoint().adjoint(), a.clone());
        prop_assert_eq!(t.multiply(&a, &b).adjoint(), t.multiply(&b.adjoint(), &a.adjoint()));
    }

    #[test]
    fn products_stay_in_the_span(seed in any::<u64>()) {
        let (sk, mut rng) = small_graph(seed);
        let t = Tck::new(&sk);
        let bound = d(&[2, 1]);
        let a = oracle::random_element(&t, &mut rng, 4, &bound);
        let b = oracle::random_element(&t, &mut rng, 4, &bound);
        for (term, _) in t.multiply(&a, &b).terms() {
            prop_assert_eq!(term.left.range(), term.right.range());
        }
    }

    #[test]
    fn diag_properties(seed in any::<u64>()) {
        let (sk, mut rng) = small_graph(seed);
        let t = Tck::new(&sk);
        let a = oracle::random_element(&t, &mut rng, 5, &d(&[2, 1]));
        prop_assert_eq!(a.diag().diag(), a.diag());
        prop_assert_eq!(a.adjoint().diag(), a.diag().adjoint());
    }

    #[test]
    fn q_projections_are_orthogonal_projections(seed in any::<u64>()) {
        let (sk, mut rng) = small_graph(seed);
        let t = Tck::new(&sk);
        let f = random_admissible_set(&sk, &mut rng, 4, &d(&[1, 1]));
        let vee = sk.vee(&f);
        let qs: Vec<_> = vee.closure.iter().map(|l| t.q_projection(l, &vee).unwrap()).collect();
        for (i, q) in qs.iter().enumerate() {
            prop_assert_eq!(&t.multiply(q, q), q);
            prop_assert_eq!(&q.adjoint(), q);
            for r in &qs[i + 1..] {
                prop_assert!(t.multiply(q, r).is_zero());
            }
        }
    }

    #[test]
    fn partition_identity(seed in any::<u64>()) {
        let (sk, mut rng) = small_graph(seed);
        let t = Tck::new(&sk);
        let f = random_admissible_set(&sk, &mut rng, 4, &d(&[2, 1]));
        let report = t.partition_check(&f).unwrap();
        prop_assert!(report.residual.is_zero());
        prop_assert!(report.range_failures.is_empty());
    }

    #[test]
    fn max_subpath_attains_the_join(seed in any::<u64>()) {
        let (sk, mut rng) = small_graph(seed);
        let t = Tck::new(&sk);
        let f = random_admissible_set(&sk, &mut rng, 4, &d(&[1, 1]));
        let vee = sk.vee(&f);
        let v = f[0].source();
        for gamma in sk.paths_up_to(&d(&[2, 2]), Some(v)) {
            let mu = t.max_subpath(&gamma, &vee).unwrap();
            prop_assert!(vee.contains(&mu));
            for p in &vee.closure {
                if oracle::is_prefix(&sk, p, &gamma) {
                    prop_assert!(p.degree().le(mu.degree()));
                }
            }
        }
    }

    #[test]
    fn refinement_kills_off_diagonal_terms(seed in any::<u64>()) {
        let (sk, mut rng) = small_graph(seed);
        let t = Tck::new(&sk);
        let f = random_admissible_set(&sk, &mut rng, 4, &d(&[1, 1]));
        let vee = sk.vee(&f);
        for gamma in &vee.closure {
            let q = t.refine_projection(gamma, &vee).unwrap();
            prop_assert!(!q.is_zero());
            prop_assert_eq!(&t.multiply(&q, &t.q_projection(gamma, &vee).unwrap()), &q);
            let prefixes: Vec<&Path> = vee.closure.iter().filter(|p| sk.is_prefix(p, gamma)).collect();
            for l in &prefixes {
                for m in &prefixes {
                    if l != m {
                        let off = t.gen(l, m);
                        if let Ok(off) = off {
                            prop_assert!(t.multiply(&q, &t.multiply(&off, &q)).is_zero());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn removal_identity(seed in any::<u64>()) {
        let (sk, mut rng) = small_graph(seed);
        let t = Tck::new(&sk);
        let f = random_admissible_set(&sk, &mut rng, 4, &d(&[2, 1]));
        let removable: Vec<&Path> = f.iter().filter(|p| !p.is_vertex()).collect();
        prop_assume!(!removable.is_empty());
        let lambda = (*removable.choose(&mut rng).unwrap()).clone();
        let report = t.removal_identity_check(&f, &lambda).unwrap();
        prop_assert!(report.failures.is_empty());
    }
}

#[test]
fn refined_projection_keeps_e_gamma() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..20 {
        let (sk, mut r2) = small_graph(rand::Rng::gen(&mut rng));
        let t = Tck::new(&sk);
        let f = random_admissible_set(&sk, &mut r2, 3, &d(&[1, 1]));
        let vee = sk.vee(&f);
        let support = Degree::join_all(2, vee.closure.iter().map(Path::degree));
        for gamma in &vee.closure {
            let q = t.refine_projection(gamma, &vee).unwrap();
            let bound = q.degree_support(2).join(&support);
            let space = FockSpace::new(&sk, &bound).unwrap();
            let op = space.evaluate(&q).unwrap();
            let i = space.index_of(gamma).unwrap();
            assert_eq!(op.column(i), &[(i, 1.0)]);
        }
    }
}

#[test]
fn loops_examples() {
    let sk = fixtures::loops(2);
    let t = Tck::new(&sk);
    let p = |s: &str| sk.parse_path(s).unwrap();
    assert!(t.multiply(&t.projection(&p("a")), &t.projection(&p("b"))).is_zero());
    let v = sk.vertex_id("v").unwrap();
    let x = t.gen(&p("a.b"), &p("b")).unwrap();
    assert_eq!(t.multiply(&t.vertex(v), &x), x);
    let vee = sk.vee(&[p("v")]);
    assert_eq!(t.q_projection(&p("v"), &vee).unwrap(), t.vertex(v));
    assert!(t.partition_check(&[p("v")]).unwrap().passed());
}

#[test]
fn vertex_acts_as_unit_only_on_its_own_paths() {
    let sk = fixtures::ex43(1);
    let t = Tck::new(&sk);
    let p = |s: &str| sk.parse_path(s).unwrap();
    let x = t.gen(&p("lambda"), &p("lambda")).unwrap();
    let v00 = sk.vertex_id("00").unwrap();
    let v01 = sk.vertex_id("01").unwrap();
    assert_eq!(t.multiply(&t.vertex(v00), &x), x);
    assert!(t.multiply(&t.vertex(v01), &x).is_zero());
}
