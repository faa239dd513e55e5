//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use fastslow_core::debug::{run_tests, DebugInstance, Limits};
use fastslow_core::gc::{parse_coloring, GraphColoringAdapter};
use fastslow_core::graph::{
    emit_dimacs, exact_color, generate_instance, parse_dimacs, score, ColorOutcome, ColoringCandidate, GraphInstance,
};
use fastslow_core::harness::{cmd_generate, cmd_run, generate_dataset, GenerateSpec, SweepSpec};
use fastslow_core::memory::{MemoryRecord, MemoryStore, MemoryVariant, SUCCESS_MARKER};
use fastslow_core::metacog::{run_instance, BaRule, FallbackVariant, MemoryAccess, Mode, RunConfig, Status};
use fastslow_core::solvers::{SolverError, SolverSpec};
use fastslow_core::{Exact, ExactOutcome};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use common::*;

type Check = Result<String, String>;
type CheckFn = fn() -> Check;
type GraphSets = (BTreeSet<String>, BTreeSet<(String, String)>);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, format!("took {took:.1?}, limit {limit:?}"))
}

fn oracle_equivalence() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut yes, mut no) = (0, 0);
    for i in 0..200 {
        let n = rng.gen_range(1..=8);
        let k = rng.gen_range(2..=4);
        let inst = generate_instance(n, rng.gen_range(0.0..=1.0), rng.gen(), k);
        let edges: Vec<(usize, usize)> = inst.graph.edge_indices().collect();
        let brute = brute_force_coloring(n, &edges, k);
        match exact_color(&inst, Duration::from_secs(10)) {
            ColorOutcome::Solution(c) => {
                ensure(
                    brute.is_some(),
                    format!("graph {i}: oracle colored an uncolorable graph"),
                )?;
                ensure(
                    c.len() == n && c.iter().all(|&x| (1..=k).contains(&x)) && edges.iter().all(|&(u, v)| c[u] != c[v]),
                    format!("graph {i}: invalid coloring {c:?}"),
                )?;
                yes += 1;
            }
            ColorOutcome::Unsolvable => {
                ensure(brute.is_none(), format!("graph {i}: oracle missed a coloring"))?;
                no += 1;
            }
            ColorOutcome::Timeout => return Err(format!("graph {i}: oracle timed out")),
        }
    }
    within(start, Duration::from_secs(60))?;
    Ok(format!(
        "200 graphs, {yes} colorable, {no} not, {:.2?}",
        start.elapsed()
    ))
}

fn score_fidelity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for i in 0..1000 {
        let n = rng.gen_range(1..=25);
        let k = rng.gen_range(1..=5);
        let inst = generate_instance(n, rng.gen_range(0.0..=1.0), rng.gen(), k);
        let mut colors = BTreeMap::new();
        for v in inst.graph.vertices() {
            if rng.gen_bool(0.9) {
                colors.insert(v.clone(), rng.gen_range(-1..=k as i64 + 1));
            }
        }
        let report =
            score::<Exact>(&inst, &ColoringCandidate::assignment(colors.clone())).map_err(|e| e.to_string())?;
        let expected = recount_score(&inst, &colors);
        ensure(
            report.score == expected,
            format!("pair {i}: score {} != recount {expected}", report.score),
        )?;
    }
    Ok("1000 pairs, exact rational equality".into())
}

fn dimacs_round_trip() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut with_isolated = 0;
    for i in 0..1000 {
        let n = rng.gen_range(5..=25);
        let p = if i % 4 == 0 { 0.1 } else { rng.gen_range(0.1..=0.9) };
        let inst = generate_instance(n, p, rng.gen(), 4);
        if inst.graph.degrees().contains(&0) {
            with_isolated += 1;
        }
        let back = parse_dimacs(&emit_dimacs(&inst.graph)).map_err(|e| format!("instance {i}: {e}"))?;
        ensure(
            back.vertex_set() == inst.graph.vertex_set() && back.edge_set() == inst.graph.edge_set(),
            format!("instance {i} changed on round trip"),
        )?;
    }
    ensure(with_isolated > 0, "no instance had isolated vertices")?;
    Ok(format!("1000 instances, {with_isolated} with isolated vertices"))
}

fn walkthrough_run(s1: &str, t: usize) -> ExactOutcome {
    let adapter = GraphColoringAdapter::new("walkthrough", Arc::new(walkthrough()));
    let cfg = RunConfig {
        max_iterations: t,
        ..RunConfig::default()
    };
    run_instance(
        &adapter,
        &replay(s1),
        &replay("walkthrough_s2.json"),
        &cfg,
        MemoryAccess::none(),
    )
}

fn adaptive_graph(feedback: &str) -> Option<GraphSets> {
    let start = feedback.find("p edge")?;
    let block: String = feedback[start..]
        .lines()
        .take_while(|l| l.starts_with("p edge") || l.starts_with("e ") || l.starts_with("c "))
        .collect::<Vec<_>>()
        .join("\n");
    let g = parse_dimacs(&block).ok()?;
    Some((g.vertex_set(), g.edge_set()))
}

fn walkthrough_replay() -> Check {
    let mut problems = Vec::new();
    let out = walkthrough_run("walkthrough_success.json", 5);
    let first = out.transcript.attempts.first().ok_or("no attempts recorded")?;

    let inst = walkthrough();
    let cand = parse_coloring(&first.candidate, &inst);
    let report = score::<Exact>(&inst, &cand).map_err(|e| e.to_string())?;
    let conflicts: BTreeSet<(String, String)> = report
        .conflicts
        .iter()
        .map(|(u, v, _)| (u.clone(), v.clone()))
        .collect();
    let want: BTreeSet<(String, String)> = [("h", "i"), ("h", "j"), ("i", "j")]
        .iter()
        .map(|(u, v)| (u.to_string(), v.to_string()))
        .collect();
    if conflicts != want {
        problems.push(format!("attempt-1 conflicts {conflicts:?}, expected {want:?}"));
    }
    if first.score != Exact::new(9, 12) {
        problems.push(format!("attempt-1 score {}, expected 3/4", first.score));
    }

    let fb = first.feedback_text.as_deref().unwrap_or_default();
    for (u, v) in [("h", "i"), ("h", "j"), ("i", "j")] {
        if !fb.contains(&format!("adjacent-conflict: vertices {u} and {v} share color 3")) {
            problems.push(format!("MLF text lacks the ({u},{v}) line"));
        }
    }
    let triangle = (
        ["h", "i", "j"].iter().map(|s| s.to_string()).collect::<BTreeSet<_>>(),
        want.clone(),
    );
    match adaptive_graph(fb) {
        Some(g) if g == triangle => {}
        Some((vs, es)) => problems.push(format!(
            "adaptive example has {} vertices {:?} and {} edges, expected the h-i-j triangle",
            vs.len(),
            vs,
            es.len()
        )),
        None => problems.push("no adaptive example in feedback".into()),
    }

    if out.status != (Status::SolvedByS1 { iteration: 2 }) {
        problems.push(format!("success scenario ended {:?}", out.status));
    }
    let fallback = walkthrough_run("walkthrough_failure.json", 2);
    if fallback.transcript.attempts.len() != 2 || fallback.status != Status::SolvedByS2 {
        problems.push(format!("fallback scenario ended {:?}", fallback.status));
    }

    if problems.is_empty() {
        Ok("conflicts, MLF lines, adaptive block, success at 2, fallback at T=2".into())
    } else {
        Err(problems.join("; "))
    }
}

fn kth_factor() -> Check {
    let start = Instant::now();
    let inst = DebugInstance::load(&fixture("kth_factor.json")).map_err(|e| e.to_string())?;
    let limits = Limits::default();
    let buggy = run_tests(&inst.buggy_code, &inst, &limits).map_err(|e| e.to_string())?;
    let last = buggy.last_failing.ok_or("buggy snippet passed every test")?;
    ensure(
        last.input == "n = 4, k = 3" && last.actual_output == "-1",
        format!("last failure was {:?} -> {:?}", last.input, last.actual_output),
    )?;
    let fixed = "class Solution:
    def kthFactor(self, n: int, k: int) -> int:
        count = 0
        for i in range(1, n + 1):
            if n % i == 0:
                count += 1
                if count == k:
                    return i
        return -1";
    let good = run_tests(fixed, &inst, &limits).map_err(|e| e.to_string())?;
    ensure(good.total >= 5, format!("suite has {} tests", good.total))?;
    ensure(
        good.pass_ratio::<Exact>() == Exact::from_integer(1),
        format!("corrected snippet passed {}/{}", good.passed, good.total),
    )?;
    within(start, Duration::from_secs(10))?;
    Ok(format!(
        "buggy {}/{} with (4,3) -> -1, corrected {}/{}, {:.2?}",
        buggy.passed,
        buggy.total,
        good.passed,
        good.total,
        start.elapsed()
    ))
}

fn fallback_contracts() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut violations = Vec::new();
    for trial in 0..500 {
        let t = rng.gen_range(1..=8);
        let variant = [FallbackVariant::Po, FallbackVariant::Ba, FallbackVariant::Fh][rng.gen_range(0..3)];
        let rule = [BaRule::Best, BaRule::Last][rng.gen_range(0..2)];
        let nums: Vec<i64> = (0..t).map(|_| rng.gen_range(0..=3)).collect();
        let script = nums
            .iter()
            .enumerate()
            .map(|(i, n)| Ok(format!("cand#{}# score={n}/4", i + 1)))
            .collect();
        let cfg = RunConfig {
            max_iterations: t,
            fallback_variant: variant,
            ba_rule: Some(rule),
            ..RunConfig::default()
        };
        let out: ExactOutcome = run_instance(
            &ScoreAdapter::new(format!("trial{trial}")),
            &scripted(script),
            &scripted(vec![Ok("slow".into())]),
            &cfg,
            MemoryAccess::none(),
        );
        let Some(fb) = out.transcript.fallback else {
            violations.push(format!("trial {trial}: no fallback"));
            continue;
        };
        let present: Vec<usize> = (1..=t).filter(|i| fb.prompt.contains(&format!("cand#{i}#"))).collect();
        let total = fb.prompt.matches("cand#").count();
        let best = (0..t).fold(0, |b, i| if nums[i] >= nums[b] { i } else { b }) + 1;
        let ok = total == present.len()
            && match variant {
                FallbackVariant::Po => present.is_empty(),
                FallbackVariant::Ba => present == [if rule == BaRule::Best { best } else { t }],
                FallbackVariant::Fh => {
                    present.len() == t && {
                        let pos: Vec<usize> = (1..=t).filter_map(|i| fb.prompt.find(&format!("cand#{i}#"))).collect();
                        pos.windows(2).all(|w| w[0] < w[1])
                    }
                }
            };
        if !ok {
            violations.push(format!("trial {trial}: {variant:?} with {present:?}"));
        }
    }
    ensure(
        violations.is_empty(),
        format!("{} violations, first: {}", violations.len(), violations.join(", ")),
    )?;
    Ok("500 trials, 0 violations".into())
}

fn solvable_size_15() -> Result<Vec<Arc<GraphInstance>>, String> {
    let spec = GenerateSpec {
        sizes: vec![15],
        count_per_size: 300,
        edge_prob_range: (0.1, 0.5),
        k: 4,
        seed: 7,
        ..GenerateSpec::default()
    };
    let (all, _) = generate_dataset(&spec).map_err(|e| e.to_string())?;
    let set: Vec<_> = all
        .into_iter()
        .filter(|i| i.meta.solvable == Some(true))
        .take(100)
        .map(Arc::new)
        .collect();
    ensure(set.len() == 100, format!("only {} solvable instances", set.len()))?;
    Ok(set)
}

fn solved_statuses(insts: &[Arc<GraphInstance>], fix_prob: f64, t: usize) -> Vec<bool> {
    let s1 = SolverSpec::synthetic(fix_prob, 17)
        .with_simulated_latency(1)
        .instantiate()
        .expect("synthetic solver");
    let cfg = RunConfig {
        max_iterations: t,
        mode: Mode::S1Only,
        ..RunConfig::default()
    };
    insts
        .iter()
        .enumerate()
        .map(|(i, inst)| {
            let adapter = GraphColoringAdapter::new(format!("n15-{i}"), Arc::clone(inst));
            run_instance::<Exact, _>(&adapter, &s1, &s1, &cfg, MemoryAccess::none())
                .status
                .is_solved()
        })
        .collect()
}

fn monotone_budget() -> Check {
    let start = Instant::now();
    let insts = solvable_size_15()?;
    let mut summary = Vec::new();
    for fix_prob in [0.5, 1.0] {
        let rates: Vec<usize> = [1, 5, 10, 15]
            .iter()
            .map(|&t| solved_statuses(&insts, fix_prob, t).iter().filter(|&&s| s).count())
            .collect();
        ensure(
            rates.windows(2).all(|w| w[0] <= w[1]),
            format!("fix_prob {fix_prob}: rates {rates:?} not monotone"),
        )?;
        if fix_prob == 1.0 {
            ensure(
                rates.windows(2).any(|w| w[0] < w[1]),
                format!("fix_prob 1.0: rates {rates:?} never improve"),
            )?;
        }
        summary.push(format!("p={fix_prob}: {rates:?}"));
    }
    ensure(
        solved_statuses(&insts, 0.5, 5) == solved_statuses(&insts, 0.5, 5),
        "repeated run differs",
    )?;
    within(start, Duration::from_secs(120))?;
    Ok(format!(
        "solved at T=1,5,10,15 {}, {:.1?}",
        summary.join(" "),
        start.elapsed()
    ))
}

fn determinism() -> Check {
    let root = tempfile::TempDir::new().map_err(|e| e.to_string())?;
    let spec = GenerateSpec {
        sizes: vec![6, 10],
        count_per_size: 5,
        k: 3,
        seed: 8,
        ..GenerateSpec::default()
    };
    cmd_generate(&spec, &root.path().join("data")).map_err(|e| e.to_string())?;
    let body = r#"
memory = "online"

[[configurations]]
label = "MLF+EEM"
T = 4
memory_variant = "EEM"
fallback_variant = "BA"
[configurations.s1]
backend = "synthetic_colorer"
fix_prob = 0.5
seed = 2
synthetic_latency_ms = 30
exclude_measured = true
[configurations.s2]
backend = "exact_colorer"
synthetic_latency_ms = 800
exclude_measured = true

[[configurations]]
label = "SLF"
T = 3
feedback_variant = "SLF"
workers = 2
[configurations.s1]
backend = "synthetic_colorer"
fix_prob = 1.0
seed = 2
synthetic_latency_ms = 30
exclude_measured = true
[configurations.s2]
backend = "exact_colorer"
synthetic_latency_ms = 800
exclude_measured = true
"#;
    let mut outputs = Vec::new();
    for run in ["first", "second"] {
        let path = root.path().join(format!("{run}.toml"));
        fs::write(&path, format!("dataset = \"data\"\noutput = \"{run}\"\n{body}")).map_err(|e| e.to_string())?;
        let summary = cmd_run(&SweepSpec::load(&path).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let mut bytes = Vec::new();
        for p in summary.transcripts.iter().chain([&summary.csv]) {
            bytes.push(fs::read(p).map_err(|e| e.to_string())?);
        }
        outputs.push(bytes);
    }
    ensure(outputs[0] == outputs[1], "outputs differ between identical runs")?;
    let size: usize = outputs[0].iter().map(Vec::len).sum();
    Ok(format!("2 transcripts and report.csv identical ({size} bytes)"))
}

fn memory_schema() -> Check {
    let dir = tempfile::TempDir::new().map_err(|e| e.to_string())?;
    let store = MemoryStore::open(dir.path()).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut expected = Vec::new();
    for run in 0..40 {
        let t = rng.gen_range(1..=8);
        let variant = if run % 2 == 0 {
            MemoryVariant::Eem
        } else {
            MemoryVariant::Mem
        };
        let mut script: Vec<Result<String, SolverError>> = (1..t)
            .map(|i| Ok(format!("try {i} score={}/5", rng.gen_range(0..5))))
            .collect();
        script.push(Ok(format!("try {t} score=1")));
        let cfg = RunConfig {
            max_iterations: 8,
            memory_variant: variant,
            ..RunConfig::default()
        };
        let out: ExactOutcome = run_instance(
            &ScoreAdapter::new(format!("m{run}")),
            &scripted(script),
            &scripted(vec![]),
            &cfg,
            MemoryAccess {
                recall: None,
                record: Some(&store),
            },
        );
        ensure(
            out.status == Status::SolvedByS1 { iteration: t },
            format!("run {run}: {:?}", out.status),
        )?;
        expected.push((variant, t));
    }
    let reopened = MemoryStore::open(dir.path()).map_err(|e| e.to_string())?.snapshot();
    ensure(reopened == store.snapshot(), "records changed across persistence")?;
    ensure(
        reopened.len() == expected.len(),
        format!("{} records persisted", reopened.len()),
    )?;
    for (r, (variant, t)) in reopened.iter().zip(&expected) {
        let want = if *variant == MemoryVariant::Eem { *t } else { 0 };
        ensure(
            r.interaction_history.len() == want,
            format!("{variant:?} run of {t} attempts kept {}", r.interaction_history.len()),
        )?;
        if let Some(last) = r.interaction_history.last() {
            ensure(
                last.feedback_received == SUCCESS_MARKER,
                "final entry lacks the success marker",
            )?;
        }
        ensure(
            r.interaction_history
                .iter()
                .enumerate()
                .all(|(i, h)| h.attempt == i + 1),
            "history indices not contiguous",
        )?;
    }

    let file = fs::read_to_string(dir.path().join("graph_coloring.jsonl")).map_err(|e| e.to_string())?;
    for line in file.lines() {
        let v: Value = serde_json::from_str(line).map_err(|e| e.to_string())?;
        let keys: BTreeSet<&str> = v
            .as_object()
            .ok_or("record is not an object")?
            .keys()
            .map(String::as_str)
            .collect();
        let rec: MemoryRecord = serde_json::from_value(v.clone()).map_err(|e| e.to_string())?;
        let want: BTreeSet<&str> = match rec.variant() {
            MemoryVariant::Eem => ["problem_instance", "interaction_history", "correct_solution"].into(),
            MemoryVariant::Mem => ["problem_instance", "correct_solution"].into(),
        };
        ensure(keys == want, format!("record keys {keys:?}"))?;
        for h in v["interaction_history"].as_array().into_iter().flatten() {
            let hk: BTreeSet<&str> = h
                .as_object()
                .ok_or("entry is not an object")?
                .keys()
                .map(String::as_str)
                .collect();
            ensure(
                hk == ["attempt", "candidate_solution", "feedback_received"].into(),
                format!("entry keys {hk:?}"),
            )?;
        }
    }
    Ok(format!(
        "{} records round-tripped, EEM holds t entries, MEM none",
        reopened.len()
    ))
}

fn budget_safety() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let modes = [Mode::S1Only, Mode::S2Only, Mode::Pipeline];
    let variants = [FallbackVariant::Po, FallbackVariant::Ba, FallbackVariant::Fh];
    let mut tally = BTreeMap::new();
    for run in 0..1000 {
        let n = rng.gen_range(3..=12);
        let inst = generate_instance(n, rng.gen_range(0.1..=0.9), rng.gen(), rng.gen_range(2..=4));
        let cfg = RunConfig {
            max_iterations: rng.gen_range(1..=10),
            mode: modes[rng.gen_range(0..3)],
            fallback_variant: variants[rng.gen_range(0..3)],
            stagnation_window: if rng.gen_bool(0.5) {
                Some(rng.gen_range(2..=4))
            } else {
                None
            },
            ..RunConfig::default()
        };
        let s1_calls = Arc::new(AtomicUsize::new(0));
        let s2_calls = Arc::new(AtomicUsize::new(0));
        let s1 = SolverSpec::synthetic(rng.gen_range(0.0..=1.0), rng.gen())
            .instantiate()
            .map_err(|e| e.to_string())?;
        let s2 = if rng.gen_bool(0.5) {
            SolverSpec::exact().instantiate()
        } else {
            SolverSpec::synthetic(0.5, rng.gen()).instantiate()
        }
        .map_err(|e| e.to_string())?;
        let adapter = GraphColoringAdapter::new(format!("r{run}"), Arc::new(inst));
        let out: ExactOutcome = run_instance(
            &adapter,
            &counted(s1, s1_calls.clone()),
            &counted(s2, s2_calls.clone()),
            &cfg,
            MemoryAccess::none(),
        );
        let attempts = out.transcript.attempts.len();
        let s2n = s2_calls.load(Ordering::SeqCst);
        ensure(
            attempts <= cfg.max_iterations,
            format!("run {run}: {attempts} attempts with T={}", cfg.max_iterations),
        )?;
        ensure(
            s1_calls.load(Ordering::SeqCst) == attempts,
            format!("run {run}: s1 calls != attempts"),
        )?;
        let fell_back = matches!(out.status, Status::SolvedByS2 | Status::Failed { .. }) && cfg.mode != Mode::S1Only;
        ensure(
            s2n == usize::from(fell_back),
            format!(
                "run {run}: {s2n} S2 calls, status {:?}, mode {:?}",
                out.status, cfg.mode
            ),
        )?;
        let kind = match out.status {
            Status::SolvedByS1 { .. } => "S1",
            Status::SolvedByS2 => "S2",
            Status::Failed { .. } => "failed",
        };
        *tally.entry(kind).or_insert(0) += 1;
    }
    Ok(format!("1000 runs, outcomes {tally:?}"))
}

fn main() {
    let checks: [(&str, CheckFn); 10] = [
        ("oracle equivalence", oracle_equivalence),
        ("score fidelity", score_fidelity),
        ("DIMACS round trip", dimacs_round_trip),
        ("walkthrough replay", walkthrough_replay),
        ("kthFactor end to end", kth_factor),
        ("fallback context contracts", fallback_contracts),
        ("monotone budget", monotone_budget),
        ("sweep determinism", determinism),
        ("memory schema", memory_schema),
        ("controller budget safety", budget_safety),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let result = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match result {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", checks.len() - failed, checks.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
