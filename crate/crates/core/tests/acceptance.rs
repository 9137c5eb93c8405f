//! Acceptance criteria, one line each. Exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use kritzinger::cli::{run, Cli};
use kritzinger::greedy::{GreedyOptions, SequenceState, TieRule};
use kritzinger::lemma::{main_lemma_sweep, sharpness_scan};
use kritzinger::metrics::l2_discrepancy_squared;
use kritzinger::numeric::{rational_from_parts, Rational};
use kritzinger::oracle::ARGMIN_RESOLUTION;
use kritzinger::verify::{
    argmin_instance, cn_zero_instance, exact_audits, float_audits, oracle_instance, example_seeds, h_windows_reference,
    EXACT_SHADOW_STEPS, LEMMA_MAX_PIECES,
};

/// Supremum of star/ln n over 100 <= n <= 5000 for the run seeded with 1/2,
/// measured once: 15/8 / ln 114.
const FROZEN_KRITZINGER_SUP: f64 = 0.395_887_127_710_115;

const AUDIT_SEED: u64 = 2024;

type Outcome = Result<String, String>;

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut state = SequenceState::from_seeds(example_seeds()).map_err(|e| e.to_string())?;
    let got: Vec<String> = state
        .extend(6, &GreedyOptions::default())
        .map_err(|e| e.to_string())?
        .iter()
        .map(|p| p.raw_string())
        .collect();
    let elapsed = start.elapsed().as_secs_f64();
    let want = ["7/8", "1/10", "7/12", "7/14", "13/16", "3/18"];
    let detail = format!("x4..x9 = {} in {elapsed:.4}s", got.join(", "));
    if got == want && elapsed < 1.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criteria_2_and_3() -> (Outcome, Outcome) {
    let opts = GreedyOptions::default();
    let float = match float_audits(AUDIT_SEED, 5000, &opts) {
        Ok(a) => a,
        Err(e) => return (Err(e.to_string()), Err(e.to_string())),
    };
    let exact = match exact_audits(AUDIT_SEED, EXACT_SHADOW_STEPS, &opts) {
        Ok(a) => a,
        Err(e) => return (Ok(String::new()), Err(e.to_string())),
    };

    let reached = float.iter().all(|a| a.final_n == 5000);
    let form: usize = float.iter().map(|a| a.form_violations).sum();
    let novelty: usize = float.iter().map(|a| a.novelty_violations).sum();
    let bound: usize = float.iter().map(|a| a.bound_violations).sum();
    let margin = float.iter().map(|a| a.min_bound_margin).fold(f64::INFINITY, f64::min);
    let seeds: Vec<usize> = float.iter().map(|a| a.seeds).collect();
    let d2 = format!(
        "{} configs, seeds {seeds:?}, to n = 5000: form {form}, novelty {novelty}, bound {bound}, min margin {margin:.4}",
        float.len()
    );
    let c2 = if reached && form + novelty + bound == 0 { Ok(d2) } else { Err(d2) };

    let fv: usize = float.iter().map(|a| a.increment_violations).sum();
    let ev: usize = exact.iter().map(|a| a.increment_violations + a.novelty_violations + a.bound_violations).sum();
    let fmax = float.iter().map(|a| a.max_increment).fold(f64::NEG_INFINITY, f64::max);
    let emax = exact.iter().map(|a| a.max_increment).fold(f64::NEG_INFINITY, f64::max);
    let d3 = format!(
        "float to 5000: {fv} violations, max increment {fmax:.6}; exact {EXACT_SHADOW_STEPS} steps: {ev} violations, max {emax:.6}"
    );
    let c3 = if fv + ev == 0 { Ok(d3) } else { Err(d3) };
    (c2, c3)
}

fn criterion_4() -> Outcome {
    let results: Vec<(usize, bool)> = (0..100).map(|i| cn_zero_instance(4000 + i, 200)).collect();
    let bad = results.iter().filter(|r| !r.1).count();
    let largest = results.iter().map(|r| r.0).max().unwrap_or(0);
    let detail = format!("100 exact sets up to n = {largest}: {bad} mismatches");
    if bad == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_5() -> Outcome {
    let sweep = main_lemma_sweep::<Rational>(1000, 5000, LEMMA_MAX_PIECES, 1e-12);
    let s = &sweep.summary;
    let eps: Vec<Rational> = [4u64, 100, 1000].iter().map(|q| rational_from_parts(1, *q).unwrap()).collect();
    let ratios = sharpness_scan(&eps).map_err(|e| e.to_string())?;
    let eight = Rational::from_integer(8);
    let sharp = ratios.iter().all(|(_, r)| *r == eight);
    let detail = format!(
        "1000 trials: {} violations ({} discontinuous below bound), min ratio {:.4}; sharpness ratios {}",
        s.violations,
        s.outside_hypothesis,
        s.min_ratio,
        ratios.iter().map(|(_, r)| r.to_string()).collect::<Vec<_>>().join(", ")
    );
    if s.violations == 0 && s.fact_violations == 0 && sharp {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_6() -> Outcome {
    let r = h_windows_reference(10_000).map_err(|e| e.to_string())?;
    let missing: Vec<_> = r.windows.iter().filter(|w| w.witness.is_none()).map(|w| w.start).collect();
    let detail = format!(
        "{} windows, {} without witness, {} of {} n satisfy max|H_n|^3 <= 8n",
        r.windows.len(),
        missing.len(),
        r.hits,
        r.horizon
    );
    if r.windows.len() == 100 && missing.is_empty() {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_7() -> Outcome {
    let opts = GreedyOptions::with_tie_rule(TieRule::Smallest);
    let rows: Vec<_> = (0..50).map(|i| argmin_instance(7000 + i, ARGMIN_RESOLUTION, &opts)).collect();
    let bad = rows.iter().filter(|r| !r.passed()).count();
    let worst = rows.iter().map(|r| r.cells_apart).fold(0.0, f64::max);
    let via_e = rows.iter().all(|r| r.via_e_agrees);
    let detail = format!("50 states: {bad} failures, worst distance {worst:.3} cells, via E agrees: {via_e}");
    if bad == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_8() -> Outcome {
    let rows: Vec<_> = (0..100).map(|i| oracle_instance(8000 + i, ARGMIN_RESOLUTION)).collect();
    let worst = rows.iter().map(|r| r.max_error()).fold(0.0, f64::max);
    let detail = format!("100 sets, worst closed-form vs oracle error {worst:.2e}");
    if worst <= 1e-6 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn compare_output() -> Result<Vec<u8>, String> {
    let cli = Cli::try_parse_from(["kritzinger", "compare", "--count", "5000"]).map_err(|e| e.to_string())?;
    let mut buf = Vec::new();
    run(cli, &mut buf).map_err(|e| e.to_string())?;
    Ok(buf)
}

fn criterion_9() -> Outcome {
    let a = compare_output()?;
    let b = compare_output()?;
    let text = String::from_utf8(a.clone()).map_err(|e| e.to_string())?;
    let mut labels = Vec::new();
    let mut sup = f64::NEG_INFINITY;
    for line in text.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        if !labels.contains(&f[0]) {
            labels.push(f[0]);
        }
        let n: usize = f[1].parse().map_err(|_| format!("bad row {line}"))?;
        if f[0] == "kritzinger" && (100..=5000).contains(&n) {
            sup = sup.max(f[3].parse::<f64>().map_err(|_| format!("bad row {line}"))?);
        }
    }
    let rel = (sup - FROZEN_KRITZINGER_SUP).abs() / FROZEN_KRITZINGER_SUP;
    let detail = format!(
        "series {labels:?}, byte-identical: {}, sup star/ln n = {sup:.6} (frozen {FROZEN_KRITZINGER_SUP:.6}, rel. diff {rel:.1e})",
        a == b
    );
    if a == b && labels == ["kritzinger", "vdc", "kronecker"] && rel <= 0.01 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_10() -> Outcome {
    let opts = GreedyOptions::default();
    let mut exact = SequenceState::<Rational>::new();
    let mut float = SequenceState::<f64>::new();
    let a = exact.next_point(&opts).map_err(|e| e.to_string())?;
    let b = float.next_point(&opts).map_err(|e| e.to_string())?;
    let half = rational_from_parts(1, 2).unwrap();
    let twelfth = rational_from_parts(1, 12).unwrap();
    let lattice_ok = (1..=100u64).all(|n| {
        let pts: Vec<Rational> = (1..=n).map(|k| rational_from_parts(2 * k as i64 - 1, 2 * n).unwrap()).collect();
        l2_discrepancy_squared(&pts).unwrap() == twelfth
    });
    let detail = format!("x1 = {} (exact), {} (float); lattice L2 = 1/12 for n <= 100: {lattice_ok}", a.reduced(), b.reduced());
    if a.reduced() == half && b.reduced() == half && lattice_ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() -> ExitCode {
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let timed = |id: u32, name: &'static str, f: &dyn Fn() -> Outcome, results: &mut Vec<(u32, &str, Outcome)>| {
        let start = Instant::now();
        let r = f();
        let secs = start.elapsed().as_secs_f64();
        let r = r.map(|d| format!("{d} [{secs:.1}s]")).map_err(|d| format!("{d} [{secs:.1}s]"));
        results.push((id, name, r));
    };
    timed(1, "worked example from irrational seeds", &criterion_1, &mut results);
    let start = Instant::now();
    let (c2, c3) = criteria_2_and_3();
    let secs = start.elapsed().as_secs_f64();
    let tag = |r: Outcome| r.map(|d| format!("{d} [{secs:.1}s]")).map_err(|d| format!("{d} [{secs:.1}s]"));
    results.push((2, "greedy form, novelty and n/3 + c bound", tag(c2)));
    results.push((3, "L2 increments at most 1/3", tag(c3)));
    timed(4, "L2 = n^2 W2 exactly", &criterion_4, &mut results);
    timed(5, "integral inequality and sharpness", &criterion_5, &mut results);
    timed(6, "max|H_n| windows", &criterion_6, &mut results);
    timed(7, "candidate argmin vs grid argmin", &criterion_7, &mut results);
    timed(8, "closed forms vs oracles", &criterion_8, &mut results);
    timed(9, "comparison series regression", &criterion_9, &mut results);
    timed(10, "empty start and centered lattice", &criterion_10, &mut results);

    let mut failed = 0;
    for (id, name, r) in &results {
        match r {
            Ok(d) => println!("PASS criterion {id:>2}: {name}: {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL criterion {id:>2}: {name}: {d}");
            }
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
