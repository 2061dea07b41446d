//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use supersat_core::container::{container_step, verify_containers, StepConfig, TauChoice, DEFAULT_VERIFY_GUARD};
use supersat_core::experiments::{random_host, Density};
use supersat_core::family::audit::{
    audit_condition_ii, audit_link_bound, audit_x_bound, handshake_complete, handshake_theta, recheck_complete,
    recheck_theta,
};
use supersat_core::family::{
    greedy_build_complete, greedy_build_theta, BalancedFamily, CompleteFamily, Member, ScanOrder, StopReason,
    ThetaFamily,
};
use supersat_core::graph::generators::complete;
use supersat_core::params::approx_eq;
use supersat_core::pattern::{enumerate_rpartite, enumerate_theta, oracle_count};
use supersat_core::pipeline::{
    brute_force_free_count, check_coverage, run_pipeline, PipelineConfig, DEFAULT_COUNT_GUARD,
};
use supersat_core::{EdgeSet, HostGraph, Pattern, ScaleParams};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c4() -> Pattern {
    Pattern::Theta { a: 2, b: 2 }
}

fn from_mask(n: usize, mask: u64) -> HostGraph {
    let kn = complete(n, 2);
    let keep: Vec<usize> = (0..kn.m()).filter(|i| mask >> i & 1 == 1).collect();
    kn.edge_subgraph(&keep).unwrap()
}

fn fast_count(g: &HostGraph, pattern: &Pattern) -> u64 {
    match pattern {
        Pattern::Theta { a, b } => enumerate_theta(g, *a, *b).unwrap().len() as u64,
        Pattern::Complete(p) => enumerate_rpartite(g, p).unwrap().len() as u64,
    }
}

fn enumeration_equivalence() -> Outcome {
    let mut checked = 0;
    for mask in 0u64..1 << 10 {
        let g = from_mask(5, mask);
        let (fast, slow) = (
            fast_count(&g, &c4()),
            oracle_count(&g, &c4()).map_err(|e| e.to_string())?,
        );
        ensure(fast == slow, || {
            format!("theta:2,2 on mask {mask:#x}: {fast} vs {slow}")
        })?;
        checked += 1;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for pattern in [
        Pattern::Theta { a: 2, b: 3 },
        Pattern::Theta { a: 3, b: 2 },
        Pattern::Complete(vec![2, 2]),
    ] {
        for i in 0..200u64 {
            let n = rng.gen_range(6..=8);
            let p = rng.gen_range(0.15..0.85);
            let g = random_host(n, Density::Prob(p), 2, 1000 + i).unwrap();
            let (fast, slow) = (
                fast_count(&g, &pattern),
                oracle_count(&g, &pattern).map_err(|e| e.to_string())?,
            );
            ensure(fast == slow, || {
                format!("{pattern} on seed {}: {fast} vs {slow}", 1000 + i)
            })?;
            checked += 1;
        }
    }
    let tri = Pattern::Complete(vec![2, 2, 2]);
    for i in 0..100u64 {
        let n = rng.gen_range(6..=8);
        let p = rng.gen_range(0.3..0.95);
        let g = random_host(n, Density::Prob(p), 3, 5000 + i).unwrap();
        let (fast, slow) = (fast_count(&g, &tri), oracle_count(&g, &tri).map_err(|e| e.to_string())?);
        ensure(fast == slow, || format!("{tri} on seed {}: {fast} vs {slow}", 5000 + i))?;
        checked += 1;
    }
    Ok(format!("{checked} hosts agree"))
}

fn golden_counts() -> Outcome {
    let k5 = complete(5, 2);
    let (fast, slow) = (
        fast_count(&k5, &c4()),
        oracle_count(&k5, &c4()).map_err(|e| e.to_string())?,
    );
    ensure(fast == 15 && slow == 15, || {
        format!("K5 copies: enumerator {fast}, oracle {slow}")
    })?;
    let free = brute_force_free_count(4, &c4(), DEFAULT_COUNT_GUARD)
        .map_err(|e| e.to_string())?
        .count;
    let by_enumerator = (0u64..1 << 6)
        .filter(|&m| fast_count(&from_mask(4, m), &c4()) == 0)
        .count() as u64;
    ensure(free == 54 && by_enumerator == 54, || {
        format!("C4-free graphs on 4 vertices: oracle {free}, enumerator {by_enumerator}")
    })?;
    Ok("K5 has 15 copies, 54 C4-free graphs on [4]".into())
}

struct Families {
    theta: Vec<(ThetaFamily, ScaleParams)>,
    complete: Vec<(CompleteFamily, ScaleParams)>,
    vacuous: usize,
}

fn build_families() -> Result<Families, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut out = Families {
        theta: Vec::new(),
        complete: Vec::new(),
        vacuous: 0,
    };
    for i in 0..50u64 {
        let n = rng.gen_range(10..=30);
        let m = rng.gen_range(2 * n..=5 * n);
        let g = Arc::new(random_host(n, Density::Edges(m), 2, 100 + i).unwrap());
        for delta in [0.25, 0.5, 1.0] {
            let p = ScaleParams::for_host(c4(), &g, Some(delta)).map_err(|e| e.to_string())?;
            let built = greedy_build_theta(g.clone(), &p, p.target_count(), ScanOrder::Shuffled(i))
                .map_err(|e| e.to_string())?;
            if built.stop == StopReason::VacuousParameters {
                out.vacuous += 1;
            }
            out.theta.push((built.family, p));
        }
    }
    let tri = Pattern::Complete(vec![2, 2, 2]);
    for i in 0..20u64 {
        let n = rng.gen_range(7..=10);
        let total = n * (n - 1) * (n - 2) / 6;
        let m = rng.gen_range(total / 4..=total / 2);
        let g = Arc::new(random_host(n, Density::Edges(m), 3, 200 + i).unwrap());
        let p = ScaleParams::for_host(tri.clone(), &g, Some(1.0))
            .and_then(|p| p.with_k(2.0))
            .map_err(|e| e.to_string())?;
        let built = greedy_build_complete(g, &p, p.target_count(), ScanOrder::Canonical).map_err(|e| e.to_string())?;
        if built.stop == StopReason::VacuousParameters {
            out.vacuous += 1;
        }
        out.complete.push((built.family, p));
    }
    Ok(out)
}

fn builder_goodness(f: &Families) -> Outcome {
    for (i, (fam, p)) in f.theta.iter().enumerate() {
        let re = recheck_theta(fam, p).map_err(|e| e.to_string())?;
        ensure(re.ledger_matches && re.good.pass, || {
            format!("theta family {i}: {:?}", re.good.violation)
        })?;
    }
    for (i, (fam, p)) in f.complete.iter().enumerate() {
        let re = recheck_complete(fam, p).map_err(|e| e.to_string())?;
        ensure(re.ledger_matches && re.good.pass, || {
            format!("complete family {i}: {:?}", re.good.violation)
        })?;
    }
    let members: usize =
        f.theta.iter().map(|(x, _)| x.len()).sum::<usize>() + f.complete.iter().map(|(x, _)| x.len()).sum::<usize>();
    Ok(format!(
        "{} theta + {} complete families good ({members} members, {} refused as vacuous)",
        f.theta.len(),
        f.complete.len(),
        f.vacuous
    ))
}

fn handshakes(f: &Families) -> Outcome {
    for (i, (fam, _)) in f.theta.iter().enumerate() {
        let h = handshake_theta(fam).map_err(|e| e.to_string())?;
        ensure(h.holds(), || format!("theta family {i}: {} vs {}", h.lhs, h.rhs))?;
    }
    for (i, (fam, _)) in f.complete.iter().enumerate() {
        let h = handshake_complete(fam).map_err(|e| e.to_string())?;
        ensure(h.holds(), || format!("complete family {i}: {} vs {}", h.lhs, h.rhs))?;
    }
    Ok(format!("{} identities exact", f.theta.len() + f.complete.len()))
}

fn link_and_x_bounds(f: &Families) -> Outcome {
    let (mut links, mut xs, mut worst) = (0, 0, 0f64);
    for (i, (fam, p)) in f.theta.iter().enumerate() {
        let a = audit_link_bound(fam, p).map_err(|e| e.to_string())?;
        ensure(a.pass(), || format!("theta family {i}: {:?}", a.violation))?;
        links += a.checked;
        worst = worst.max(a.max_ratio);
    }
    for (i, (fam, p)) in f.complete.iter().enumerate() {
        let a = audit_x_bound(fam, p).map_err(|e| e.to_string())?;
        ensure(a.pass(), || format!("complete family {i}: {:?}", a.violation))?;
        xs += a.checked;
        worst = worst.max(a.max_ratio);
    }
    Ok(format!(
        "{links} link sizes and {xs} X_i sizes within bound, max ratio {worst:.4}"
    ))
}

fn container_soundness() -> Outcome {
    let mut details = Vec::new();
    for n in [5, 6] {
        let g = Arc::new(complete(n, 2));
        let copies = enumerate_theta(&g, 2, 2).unwrap();
        let fam = ThetaFamily::from_members(g.clone(), c4(), copies).map_err(|e| e.to_string())?;
        let cfg = StepConfig::new(0.99, 1.0 / 3.0, 1.0).with_tau(TauChoice::Auto);
        let cf = container_step(&g, &fam, &cfg).map_err(|e| format!("K{n}: {e}"))?;
        let r = verify_containers(&cf, &g, &c4(), DEFAULT_VERIFY_GUARD).map_err(|e| e.to_string())?;
        ensure(r.pass(), || format!("K{n}: {r:?}"))?;
        details.push(format!(
            "K{n}: {} containers <= {:.2}, {} free subgraphs covered",
            r.containers, r.count_bound, r.pattern_free_subgraphs
        ));
    }
    Ok(details.join("; "))
}

fn pipeline_soundness() -> Outcome {
    let mut details = Vec::new();
    for n in [4, 5] {
        let mut cfg = PipelineConfig::new(c4(), n, 0.99, 0.5, 0.5);
        cfg.family_k = Some(4.0);
        let out = run_pipeline(&cfg).map_err(|e| e.to_string())?;
        let exact = brute_force_free_count(n, &c4(), DEFAULT_COUNT_GUARD).map_err(|e| e.to_string())?;
        ensure(out.bound >= BigUint::from(exact.count), || {
            format!("n = {n}: {} < {}", out.bound, exact.count)
        })?;
        let cov = check_coverage(n, &c4(), out.tree.last(), DEFAULT_COUNT_GUARD).map_err(|e| e.to_string())?;
        ensure(cov.covered, || {
            format!("n = {n}: uncovered {:?}", cov.uncovered_example)
        })?;
        details.push(format!("n={n}: bound {} >= exact {}", out.bound, exact.count));
    }
    Ok(details.join("; "))
}

fn brute_force_c(sets: &[EdgeSet], k: f64, alpha: f64, m: usize) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for es in sets {
        for mask in 1u64..1 << es.len() {
            let sigma = es.select(mask);
            let d = sets.iter().filter(|t| sigma.is_subset(t)).count() as f64;
            best = best.max(d * k.powf((1.0 + alpha) * (sigma.len() as f64 - 1.0)) * m as f64 / sets.len() as f64);
        }
    }
    best
}

fn condition_ii_check<M: Member>(fam: &BalancedFamily<M>, p: &ScaleParams) -> Result<bool, String> {
    if fam.is_empty() {
        return Ok(false);
    }
    let alpha = fam.pattern().alpha();
    let c = audit_condition_ii(fam, p, alpha).map_err(|e| e.to_string())?.c;
    let brute = brute_force_c(&fam.edge_sets(), p.k, alpha, fam.host().m());
    ensure(approx_eq(c, brute), || format!("reported C {c}, brute force {brute}"))?;
    let doubled = fam.members().iter().chain(fam.members()).cloned().collect();
    let twice =
        BalancedFamily::from_members(fam.host().clone(), fam.pattern().clone(), doubled).map_err(|e| e.to_string())?;
    let c2 = audit_condition_ii(&twice, p, alpha).map_err(|e| e.to_string())?.c;
    ensure(approx_eq(c, c2), || format!("C changed under duplication: {c} vs {c2}"))?;
    Ok(true)
}

fn condition_ii(f: &Families) -> Outcome {
    let mut audited = 0;
    for (fam, p) in &f.theta {
        audited += condition_ii_check(fam, p)? as usize;
    }
    for (fam, p) in &f.complete {
        audited += condition_ii_check(fam, p)? as usize;
    }
    Ok(format!(
        "{audited} non-empty families match brute force and duplication"
    ))
}

fn run_cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_supersat"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.code() == Some(2) {
        return Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out.stdout)
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let (graph, family) = (path("g.json"), path("f.json"));
    std::fs::write(&graph, run_cli(&["gen", "--n", "7", "--m", "14", "--seed", "9"])?).map_err(|e| e.to_string())?;
    std::fs::write(
        &family,
        run_cli(&[
            "build",
            "--graph",
            &graph,
            "--pattern",
            "theta:2,2",
            "--delta",
            "0.5",
            "--k",
            "4",
        ])?,
    )
    .map_err(|e| e.to_string())?;
    let runs: Vec<Vec<&str>> = vec![
        vec!["gen", "--n", "9", "--p", "0.4", "--r", "3", "--seed", "5"],
        vec![
            "enum",
            "--graph",
            &graph,
            "--pattern",
            "theta:2,2",
            "--oracle",
            "--list",
        ],
        vec![
            "build",
            "--graph",
            &graph,
            "--pattern",
            "theta:2,2",
            "--delta",
            "0.5",
            "--k",
            "4",
            "--shuffle",
            "--seed",
            "3",
        ],
        vec!["audit", "--family", &family],
        vec!["containers", "--family", &family, "--eps", "0.99", "--tau", "auto"],
        vec![
            "count",
            "--pattern",
            "theta:2,2",
            "--n",
            "5",
            "--eps",
            "0.99",
            "--k0",
            "0.5",
            "--family-k",
            "4",
            "--oracle",
        ],
        vec!["oracle", "--pattern", "theta:2,2", "--n", "5"],
        vec![
            "trend",
            "--pattern",
            "theta:2,2",
            "--sizes",
            "6,7,8",
            "--random",
            "--seed",
            "4",
        ],
    ];
    let mut compared = 0;
    for args in &runs {
        for format in ["json", "csv"] {
            let mut full = args.clone();
            full.extend(["--format", format]);
            let (a, b) = (run_cli(&full)?, run_cli(&full)?);
            ensure(a == b && !a.is_empty(), || {
                format!("{} differs between runs", full.join(" "))
            })?;
            let echoed = path("echo.out");
            std::fs::write(&echoed, &a).map_err(|e| e.to_string())?;
            let replayed = run_cli(&["--replay", &echoed])?;
            ensure(replayed == a, || format!("{} differs on replay", full.join(" ")))?;
            compared += 1;
        }
    }
    ensure(Path::new(&graph).exists(), || "graph file vanished".into())?;
    Ok(format!("{compared} runs byte-identical twice and on replay"))
}

fn main() {
    let start = Instant::now();
    let families = build_families();
    let from_families = |check: fn(&Families) -> Outcome| -> Outcome {
        match &families {
            Ok(f) => check(f),
            Err(e) => Err(format!("building families failed: {e}")),
        }
    };
    let results: Vec<(&str, Outcome)> = vec![
        ("enumeration matches the brute-force oracle", enumeration_equivalence()),
        ("golden counts", golden_counts()),
        (
            "greedy builders pass an independent goodness recheck",
            from_families(builder_goodness),
        ),
        ("handshake identities", from_families(handshakes)),
        ("link and X_i size bounds", from_families(link_and_x_bounds)),
        ("container step verified exhaustively", container_soundness()),
        ("pipeline bounds never undercount", pipeline_soundness()),
        ("degree-decay constant C", from_families(condition_ii)),
        ("CLI output is deterministic", determinism()),
    ];
    let mut failed = 0;
    for (i, (name, outcome)) in results.iter().enumerate() {
        match outcome {
            Ok(detail) => println!("PASS  criterion {}: {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL  criterion {}: {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed in {:.1}s",
        results.len() - failed,
        results.len(),
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
