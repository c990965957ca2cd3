//! Subcommand implementations. Each returns a JSON report, a text summary and
//! whether every check passed.

use std::fmt::Write as _;

use kgraph_core::fixtures::random_admissible_set;
use kgraph_core::{operator_norm, Degree, EdgeId, FockSpace, FormalElement, Path, Skeleton, Tck};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{parse_path, parse_set, RunConfig};
use crate::CliError;

pub struct Outcome {
    pub json: Value,
    pub text: String,
    pub passed: bool,
}

fn literals(sk: &Skeleton, paths: &[Path]) -> Vec<String> {
    paths.iter().map(|p| sk.literal(p).to_string()).collect()
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

pub fn validate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let doc = cfg.document()?;
    let sk = match Skeleton::from_doc_unchecked_associativity(&doc) {
        Ok(sk) => sk,
        Err(e) => {
            return Ok(Outcome {
                json: json!({ "valid": false, "error": e.to_string(), "violations": [] }),
                text: format!("invalid: {e}\n"),
                passed: false,
            })
        }
    };
    let violations = sk.check_associativity();
    let valid = violations.is_empty();
    let mut text = if valid {
        format!(
            "valid: k={}, {} vertices, {} edges, {} squares\n",
            sk.k(),
            sk.vertex_count(),
            sk.edge_count(),
            sk.squares().len()
        )
    } else {
        format!("invalid: {} associativity violations\n", violations.len())
    };
    for v in &violations {
        let _ = writeln!(text, "  {v}");
    }
    Ok(Outcome {
        json: json!({
            "valid": valid,
            "k": sk.k(),
            "vertices": sk.vertex_count(),
            "edges": sk.edge_count(),
            "squares": sk.squares().len(),
            "violations": violations,
        }),
        text,
        passed: valid,
    })
}

pub fn mce(sk: &Skeleton, mu: &str, nu: &str) -> Result<Outcome, CliError> {
    let (m, n) = (parse_path(sk, mu)?, parse_path(sk, nu)?);
    let ext = literals(sk, &sk.mce_paths(&m, &n));
    let pair = [sk.literal(&m).to_string(), sk.literal(&n).to_string()];
    let text = format!("MCE({}, {}) = {{{}}} ({} paths)\n", pair[0], pair[1], ext.join(", "), ext.len());
    Ok(Outcome {
        json: json!({ "pair": pair, "mce": ext }),
        text,
        passed: true,
    })
}

pub fn vee(sk: &Skeleton, paths: &[String]) -> Result<Outcome, CliError> {
    let f: Vec<Path> = paths.iter().map(|s| parse_path(sk, s)).collect::<Result<_, _>>()?;
    let closure: Vec<Path> = sk.vee(&f).closure.into_iter().collect();
    let (f, closure) = (literals(sk, &f), literals(sk, &closure));
    let text = format!("vee{{{}}} = {{{}}} ({} paths)\n", f.join(", "), closure.join(", "), closure.len());
    Ok(Outcome {
        json: json!({ "F": f, "veeF": closure }),
        text,
        passed: true,
    })
}

pub fn align(cfg: &RunConfig, sk: &Skeleton) -> Result<Outcome, CliError> {
    let bound = cfg.bound_for(sk)?;
    let report = sk.is_finitely_aligned(&bound);
    let mut text = format!(
        "finitely aligned: {}\nmax generator MCE: {}",
        report.finitely_aligned, report.max_generator_mce
    );
    if let Some([a, b]) = &report.argmax {
        let _ = write!(text, " at ({a}, {b})");
    }
    let _ = writeln!(
        text,
        "\nmax MCE over {} pairs with degrees <= ({bound}): {}",
        report.bounded_pairs_checked, report.max_bounded_mce
    );
    Ok(Outcome {
        json: to_value(&report),
        text,
        passed: report.finitely_aligned,
    })
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Failure {
    #[serde(rename = "F")]
    f: Vec<String>,
    detail: Value,
}

pub fn check(cfg: &RunConfig, sk: &Skeleton, samples: usize) -> Result<Outcome, CliError> {
    let bound = cfg.bound_for(sk)?;
    let space = FockSpace::new(sk, &bound).map_err(|e| CliError::Usage(e.to_string()))?;
    let tck = Tck::new(sk);
    let mut text = String::new();

    let relations = space.check_relations();
    let toeplitz = relations.toeplitz_passed();
    let defect_is_e_v = relations
        .cuntz_pimsner
        .iter()
        .all(|e| e.status != kgraph_core::fock::CuntzPimsnerStatus::Fail || e.defect_is_e_v);
    for r in &relations.relations {
        let _ = writeln!(text, "relation {:<22} {:?}", r.relation, r.status);
    }
    for e in &relations.cuntz_pimsner {
        if e.status == kgraph_core::fock::CuntzPimsnerStatus::Fail {
            let _ = writeln!(
                text,
                "  (6) fails at {} in degree ({}); defect {{{}}}",
                e.vertex,
                e.degree,
                e.defect.join(", ")
            );
        }
    }

    let box_ = bound.lower_box();
    let mut nica_pairs = 0;
    let mut nica_failures = Vec::new();
    for p in &box_ {
        for q in &box_ {
            if p.join(q).le(&bound) {
                nica_pairs += 1;
                let r = space.check_nica_products(p, q).map_err(|e| CliError::Usage(e.to_string()))?;
                if !r.status.is_pass() {
                    nica_failures.push(r);
                }
            }
        }
    }
    let _ = writeln!(text, "Nica products: {} degree pairs, {} failures", nica_pairs, nica_failures.len());

    let mut rng = cfg.rng();
    let mut partition_failures = Vec::new();
    let mut removal_failures = Vec::new();
    let mut diagonal_failures = Vec::new();
    let (mut removal_samples, mut removal_instances) = (0, 0);
    let sample_bound = bound.meet(&Degree::from_coords(vec![1; sk.k()]));
    for _ in 0..samples {
        let f = random_admissible_set(sk, &mut rng, 4, &sample_bound);
        let report = tck.partition_check(&f).map_err(|e| CliError::Usage(e.to_string()))?;
        if !report.passed() {
            partition_failures.push(Failure {
                f: literals(sk, &f),
                detail: json!({
                    "residual": report.residual.to_doc(sk),
                    "rangeFailures": report.range_failures.iter().map(|(l, _)| sk.literal(l).to_string()).collect::<Vec<_>>(),
                }),
            });
        }
        let a = sample_element(&tck, &f, &mut rng);
        let full = space.evaluate(&a).map_err(|e| CliError::Usage(e.to_string()))?;
        let diag = space.evaluate(&a.diag()).map_err(|e| CliError::Usage(e.to_string()))?;
        let nf = operator_norm(&full, cfg.tol).map_err(|e| CliError::Usage(e.to_string()))?;
        let nd = operator_norm(&diag, cfg.tol).map_err(|e| CliError::Usage(e.to_string()))?;
        if diag != full.diagonal_compression() || nd.value > nf.value + cfg.tol {
            diagonal_failures.push(Failure {
                f: literals(sk, &f),
                detail: json!({ "element": a.to_doc(sk), "diagNorm": nd.value, "norm": nf.value }),
            });
        }
        let removable: Vec<&Path> = f.iter().filter(|p| !p.is_vertex()).collect();
        if let Some(lambda) = removable.choose(&mut rng) {
            removal_samples += 1;
            let report = tck
                .removal_identity_check(&f, lambda)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            removal_instances += report.instances;
            if !report.failures.is_empty() {
                removal_failures.push(Failure {
                    f: literals(sk, &f),
                    detail: json!({
                        "removed": sk.literal(lambda).to_string(),
                        "deltas": report.failures.iter().map(|(d, _, _)| sk.literal(d).to_string()).collect::<Vec<_>>(),
                    }),
                });
            }
        }
    }
    let _ = writeln!(text, "partition identity: {} samples, {} failures", samples, partition_failures.len());
    let _ = writeln!(text, "diagonal map: {} samples, {} failures", samples, diagonal_failures.len());
    let _ = writeln!(
        text,
        "removal identity: {} samples, {} instances, {} failures",
        removal_samples,
        removal_instances,
        removal_failures.len()
    );

    let passed = toeplitz
        && defect_is_e_v
        && nica_failures.is_empty()
        && partition_failures.is_empty()
        && removal_failures.is_empty()
        && diagonal_failures.is_empty();
    let _ = writeln!(text, "{}", if passed { "all checks pass" } else { "CHECK FAILED" });
    Ok(Outcome {
        json: json!({
            "bound": bound,
            "relations": relations,
            "toeplitz": toeplitz,
            "cuntzPimsnerDefectIsEV": defect_is_e_v,
            "nicaProducts": { "pairs": nica_pairs, "failures": nica_failures },
            "partition": { "samples": samples, "failures": partition_failures },
            "diagonalMap": { "samples": samples, "failures": diagonal_failures },
            "removal": {
                "samples": removal_samples,
                "instances": removal_instances,
                "failures": removal_failures,
            },
            "passed": passed,
        }),
        text,
        passed,
    })
}

pub fn faithful(cfg: &RunConfig, sk: &Skeleton, vertex: &str, sets: &[String]) -> Result<Outcome, CliError> {
    let v = sk
        .vertex_id(vertex)
        .ok_or_else(|| CliError::Usage(format!("unknown vertex {vertex:?}")))?;
    let sets: Vec<(Degree, Vec<Path>)> = sets.iter().map(|s| parse_set(sk, s)).collect::<Result<_, _>>()?;
    let generator_sets = edge_sets(sk, &sets);
    let avoiding = match &generator_sets {
        Some(g) => sk
            .find_avoiding_path(v, g)
            .map_err(|e| CliError::Usage(e.to_string()))?,
        None => None,
    };
    let mut bound = cfg.bound.clone().unwrap_or_else(|| Degree::zero(sk.k()));
    if bound.rank() != sk.k() {
        return Err(CliError::Usage(format!("--bound must have {} coordinates", sk.k())));
    }
    for (p, _) in &sets {
        if p.rank() != sk.k() {
            return Err(CliError::Usage(format!("degree ({p}) must have {} coordinates", sk.k())));
        }
        bound = bound.join(p);
    }
    if let Some(mu) = &avoiding {
        bound = bound.join(mu.degree());
    }
    let space = FockSpace::new(sk, &bound).map_err(|e| CliError::Usage(e.to_string()))?;
    let report = space
        .faithfulness_hypothesis(v, &sets)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let witness_verified = match (&generator_sets, &avoiding) {
        (Some(g), Some(mu)) => Some(
            space
                .verify_avoiding_witness(v, g, mu)
                .map_err(|e| CliError::Usage(e.to_string()))?,
        ),
        _ => None,
    };
    let passed = report.nonzero && report.diagonal_projection && witness_verified != Some(false);
    let mut text = format!(
        "product at {}: {}, {}; witness {}\n",
        report.vertex,
        if report.nonzero { "nonzero" } else { "zero" },
        if report.diagonal_projection { "diagonal projection" } else { "not a diagonal projection" },
        report.witness.as_deref().map_or("none".to_string(), |w| format!("e_{w}"))
    );
    if generator_sets.is_some() {
        match (&avoiding, witness_verified) {
            (Some(mu), Some(ok)) => {
                let _ = writeln!(
                    text,
                    "avoiding path {} ({})",
                    sk.literal(mu),
                    if ok { "verified" } else { "NOT verified" }
                );
            }
            _ => text.push_str("no avoiding path\n"),
        }
    }
    Ok(Outcome {
        json: json!({
            "bound": bound,
            "hypothesis": report,
            "avoidingPath": avoiding.as_ref().map(|mu| sk.literal(mu).to_string()),
            "avoidingPathVerified": witness_verified,
            "passed": passed,
        }),
        text,
        passed,
    })
}

/// `Σ ±t_λt_μ*` over pairs in `f` with a common range.
fn sample_element<R: Rng>(tck: &Tck, f: &[Path], rng: &mut R) -> FormalElement {
    let mut a = FormalElement::zero();
    for l in f {
        for m in f {
            if l.range() == m.range() && rng.gen_bool(0.5) {
                let t = tck.gen(l, m).expect("equal ranges");
                a = &a + &t.scale_int(if rng.gen_bool(0.5) { 1 } else { -1 });
            }
        }
    }
    a
}

/// The per-color edge sets when every degree is a generator `e_m`.
fn edge_sets(sk: &Skeleton, sets: &[(Degree, Vec<Path>)]) -> Option<Vec<Vec<EdgeId>>> {
    if sets.is_empty() {
        return None;
    }
    let mut out = vec![Vec::new(); sk.k()];
    for (p, paths) in sets {
        if p.rank() != sk.k() || p.total() != 1 {
            return None;
        }
        let m = p.coords().iter().position(|&c| c == 1).expect("total 1");
        out[m].extend(paths.iter().map(|q| q.edges()[0]));
    }
    Some(out)
}

pub fn fixture(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let doc = cfg.document()?;
    let json = to_value(&doc);
    let text = serde_json::to_string_pretty(&doc).expect("documents serialize") + "\n";
    Ok(Outcome { json, text, passed: true })
}
