//! End-to-end acceptance checks. Prints one line per criterion and exits
//! non-zero if any criterion fails. MNIST checks run only when `MNIST_DIR`
//! points at the IDX files.

use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use monotone_core::cli::MNIST_DIR_ENV;
use monotone_core::data::SourceSpec;
use monotone_core::harness::metrics::mean_std;
use monotone_core::harness::output::{rounds_csv, summary_csv};
use monotone_core::harness::{
    consistency_smoke, run_experiment, sweep, verify_theorem1, ExperimentConfig, ExperimentResults, Summary,
};
use monotone_core::seed::{rng_for, Purpose};
use monotone_core::stats::{mcnemar_exact_one_tailed, update_ht, PairedOutcomeCounts};
use monotone_core::wrappers::LearnerKind;
use rand::Rng;

enum Verdict {
    Pass(String),
    Fail(String),
}

use Verdict::{Fail, Pass};

fn verdict(ok: bool, detail: String) -> Verdict {
    if ok {
        Pass(detail)
    } else {
        Fail(detail)
    }
}

fn report(n: usize, title: &str, v: &Verdict, secs: f64) -> bool {
    let (tag, detail, ok) = match v {
        Pass(d) => ("PASS", d, true),
        Fail(d) => ("FAIL", d, false),
    };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "criterion {n} [{tag}] {title}: {detail} ({secs:.1}s)");
    let _ = out.flush();
    ok
}

fn preset(name: &str) -> ExperimentConfig {
    let mut c = ExperimentConfig::preset(name).expect("known preset");
    if let SourceSpec::Mnist(p) = &mut c.source {
        p.dir = std::env::var_os(MNIST_DIR_ENV).map(Into::into);
    }
    c
}

fn mnist_available() -> bool {
    std::env::var_os(MNIST_DIR_ENV).is_some()
}

fn binomial_oracle(b: usize, c: usize) -> f64 {
    let n = b + c;
    let mut row = vec![1u64];
    for _ in 0..n {
        let mut next = vec![1u64; row.len() + 1];
        for j in 1..row.len() {
            next[j] = row[j - 1] + row[j];
        }
        row = next;
    }
    row[b..].iter().sum::<u64>() as f64 / (1u64 << n) as f64
}

fn bc(b: usize, c: usize) -> PairedOutcomeCounts {
    PairedOutcomeCounts {
        n10: b,
        n01: c,
        ..Default::default()
    }
}

fn mcnemar_oracle() -> Verdict {
    let mut worst = 0.0f64;
    let mut cells = 0;
    for n in 0..=20 {
        for b in 0..=n {
            worst = worst.max((mcnemar_exact_one_tailed(&bc(b, n - b)) - binomial_oracle(b, n - b)).abs());
            cells += 1;
        }
    }
    verdict(worst <= 1e-12, format!("{cells} (b, c) cells, max |diff| {worst:.2e}"))
}

fn false_positive_rate() -> Verdict {
    const TRIALS: usize = 10_000;
    let mut worst = f64::NEG_INFINITY;
    let mut failures = Vec::new();
    for &alpha in &[0.01, 0.05, 0.1, 0.5] {
        for &nd in &[1usize, 5, 20, 100] {
            let mut rng = rng_for((alpha * 1e4) as u64 * 1000 + nd as u64, Purpose::Batches);
            let rejected = (0..TRIALS)
                .filter(|_| {
                    let b = (0..nd).filter(|_| rng.random::<bool>()).count();
                    update_ht(&bc(b, nd - b), alpha).expect("valid alpha").update
                })
                .count();
            let rate = rejected as f64 / TRIALS as f64;
            let limit = alpha + 3.0 * (alpha * (1.0 - alpha) / TRIALS as f64).sqrt();
            worst = worst.max(rate - limit);
            if rate > limit {
                failures.push(format!("alpha={alpha} nd={nd} rate={rate}"));
            }
        }
    }
    verdict(
        failures.is_empty(),
        if failures.is_empty() {
            format!("16 cells, largest rate minus limit {worst:+.4}")
        } else {
            failures.join("; ")
        },
    )
}

fn fraction(results: &ExperimentResults, kind: LearnerKind) -> f64 {
    results.stats_for(kind).expect("learner ran").fraction_mean
}

fn ht_rate_line(name: &str, results: &ExperimentResults) -> (bool, String) {
    let t = verify_theorem1(results).expect("MT_HT configured");
    let frac = fraction(results, LearnerKind::MtHt);
    let ok = t.decision_check_passed && frac < 0.01;
    (
        ok,
        format!(
            "{name}: {}/{} non-monotone decisions = {:.4} (alpha {}), fraction {:.4}",
            t.nonmonotone_decisions, t.decisions, t.decision_rate, t.alpha, frac
        ),
    )
}

/// Largest interior local maximum of a curve as `(index, value)`.
fn largest_local_max(curve: &[f64]) -> Option<(usize, f64)> {
    (1..curve.len().saturating_sub(1))
        .filter(|&i| curve[i] > curve[i - 1] && curve[i] >= curve[i + 1])
        .map(|i| (i, curve[i]))
        .max_by(|a, b| a.1.total_cmp(&b.1))
}

/// Largest rise of the expected curve in units of the standard error of
/// the paired round-to-round difference.
fn largest_rise_in_se(results: &ExperimentResults, kind: LearnerKind) -> (usize, f64) {
    let runs = results.learner_runs(kind);
    let rounds = runs[0].errors.len();
    let r = runs.len() as f64;
    (1..rounds)
        .map(|i| {
            let diffs: Vec<f64> = runs.iter().map(|run| run.errors[i] - run.errors[i - 1]).collect();
            let (mean, sd) = mean_std(&diffs);
            let se = sd / r.sqrt();
            let z = if mean <= 0.0 {
                0.0
            } else if se == 0.0 {
                f64::INFINITY
            } else {
                mean / se
            };
            (i + 1, z)
        })
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap_or((0, 0.0))
}

fn csv_outputs(results: &ExperimentResults) -> (Vec<u8>, Vec<u8>) {
    (
        rounds_csv(results).expect("rounds csv"),
        summary_csv(&Summary::from(results)).expect("summary csv"),
    )
}

fn main() -> ExitCode {
    let mut all_ok = true;
    let mut timed = |n: usize, title: &str, f: &mut dyn FnMut() -> Verdict| {
        let start = Instant::now();
        let v = f();
        all_ok &= report(n, title, &v, start.elapsed().as_secs_f64());
    };

    timed(1, "McNemar oracle equivalence", &mut mcnemar_oracle);
    timed(2, "false positive rate under H0", &mut false_positive_rate);

    let start = Instant::now();
    let peaking = run_experiment(&preset("table1-peaking")).expect("peaking preset runs");
    let dipping = run_experiment(&preset("table1-dipping")).expect("dipping preset runs");
    let setup = start.elapsed().as_secs_f64();
    println!("(peaking and dipping presets ran in {setup:.1}s)");

    timed(3, "per-decision non-monotone rate of MT_HT", &mut || {
        let (p_ok, p_line) = ht_rate_line("peaking", &peaking);
        let (d_ok, d_line) = ht_rate_line("dipping", &dipping);
        let mut ok = p_ok && d_ok;
        let mut lines = vec![p_line, d_line];
        if mnist_available() {
            match run_experiment(&preset("table1-mnist")) {
                Ok(mnist) => {
                    let (m_ok, m_line) = ht_rate_line("mnist", &mnist);
                    ok &= m_ok;
                    lines.push(m_line);
                }
                Err(e) => {
                    ok = false;
                    lines.push(format!("mnist: {e}"));
                }
            }
        } else {
            lines.push(format!("mnist skipped, {MNIST_DIR_ENV} not set"));
        }
        verdict(ok, lines.join("; "))
    });

    timed(4, "dipping behaviour of SL and MT_CV", &mut || {
        let sl = dipping.stats_for(LearnerKind::Standard).expect("SL ran");
        let cv = dipping.stats_for(LearnerKind::MtCv).expect("MT_CV ran");
        let ok = (sl.fraction_mean - 0.50).abs() <= 0.10
            && (sl.aulc_mean - 0.49).abs() <= 0.05
            && sl.aulc_mean - cv.aulc_mean >= 0.10;
        verdict(
            ok,
            format!(
                "SL fraction {:.3}, SL AULC {:.3}, MT_CV AULC {:.3}",
                sl.fraction_mean, sl.aulc_mean, cv.aulc_mean
            ),
        )
    });

    timed(5, "peaking of SL near d", &mut || {
        let mut config = preset("first-experiment");
        config.runs = config.runs.max(50);
        config.learners = vec![LearnerKind::Standard];
        let results = run_experiment(&config).expect("first experiment runs");
        let curve = &results.stats[0].mean_curve;
        match largest_local_max(curve) {
            Some((i, v)) => {
                let size = results.training_sizes[i];
                verdict(
                    (100..=400).contains(&size),
                    format!("{} runs, largest local maximum {v:.4} at training size {size}", config.runs),
                )
            }
            None => Fail("expected curve has no interior local maximum".into()),
        }
    });

    timed(6, "regularization removes peaking but not dipping", &mut || {
        let (pr, pz) = largest_rise_in_se(&peaking, LearnerKind::LambdaS);
        let (dr, dz) = largest_rise_in_se(&dipping, LearnerKind::LambdaS);
        verdict(
            pz <= 2.0 && dz > 2.0,
            format!("largest LAMBDA_S rise: peaking {pz:.2} SE at round {pr}, dipping {dz:.2} SE at round {dr}"),
        )
    });

    timed(7, "sweep shape", &mut || {
        let mut base = preset("table1-dipping");
        base.plan.append_validation = false;
        base.learners = vec![LearnerKind::MtSimple, LearnerKind::MtHt];

        let mut half = base.clone();
        half.alpha = Some(0.5);
        let results = run_experiment(&half).expect("alpha 0.5 runs");
        let mut checked = 0;
        let mut disagreements = 0;
        for run in results.learner_runs(LearnerKind::MtHt) {
            for d in &run.decisions {
                if let Some(c) = d.counts.filter(|c| c.b() != c.c()) {
                    checked += 1;
                    if d.update != (c.c() <= c.b()) {
                        disagreements += 1;
                    }
                }
            }
        }
        // Both wrappers see the same batches, so their incumbents coincide
        // until the first round on which their decisions differ.
        let mut synced_checked = 0;
        let mut synced_disagreements = 0;
        for (simple, ht) in results
            .learner_runs(LearnerKind::MtSimple)
            .iter()
            .zip(results.learner_runs(LearnerKind::MtHt))
        {
            for (a, b) in simple.decisions.iter().zip(&ht.decisions) {
                let tie = a.counts.is_some_and(|c| c.b() == c.c());
                if !tie && a.counts.is_some() {
                    synced_checked += 1;
                    synced_disagreements += usize::from(a.update != b.update);
                }
                if a.update != b.update {
                    break;
                }
            }
        }

        let mut tight = base.clone();
        tight.learners = vec![LearnerKind::MtHt];
        tight.alpha = Some(0.01);
        tight.plan.val_per_round = 2;
        let results = run_experiment(&tight).expect("tight level runs");
        let frozen = consistency_smoke(&results).entry(LearnerKind::MtHt).expect("MT_HT").frozen_runs;

        let grid = sweep(&base, &[0.01, 0.5], &[2, 16]).expect("sweep runs");
        let cells_ok = grid.cells.len() == 4 && grid.cells.iter().all(|c| c.stats.len() == 2);

        let ok = disagreements == 0
            && synced_disagreements == 0
            && checked > 0
            && 2 * frozen >= tight.runs
            && cells_ok;
        verdict(
            ok,
            format!(
                "alpha 0.5: {disagreements}/{checked} rounds with b != c break the simple rule, \
                 {synced_disagreements}/{synced_checked} differ from MT_SIMPLE's own decisions; \
                 N_v=2 alpha=0.01: frozen in {frozen}/{} runs",
                tight.runs
            ),
        )
    });

    timed(8, "MT_SIMPLE final error close to SL", &mut || {
        let report = consistency_smoke(&peaking);
        let gap = report
            .entry(LearnerKind::MtSimple)
            .and_then(|e| e.gap_to_standard)
            .expect("SL and MT_SIMPLE ran");
        verdict(gap.abs() <= 0.05, format!("final error gap MT_SIMPLE - SL = {gap:+.4} on peaking"))
    });

    timed(9, "byte-identical CSV outputs on re-run", &mut || {
        let mut lines = Vec::new();
        let mut ok = true;
        let mut check = |name: &str, first: Option<&ExperimentResults>| {
            let config = preset(name);
            let fresh_first;
            let first = match first {
                Some(r) => r,
                None => {
                    fresh_first = run_experiment(&config).expect("preset runs");
                    &fresh_first
                }
            };
            let second = run_experiment(&config).expect("preset runs");
            let same = csv_outputs(first) == csv_outputs(&second);
            ok &= same;
            lines.push(format!("{name} {}", if same { "identical" } else { "DIFFERS" }));
        };
        check("first-experiment", None);
        check("table1-dipping", Some(&dipping));
        check("table1-peaking", Some(&peaking));
        if mnist_available() {
            check("table1-mnist", None);
        } else {
            lines.push(format!("table1-mnist skipped, {MNIST_DIR_ENV} not set"));
        }
        verdict(ok, lines.join(", "))
    });

    if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
