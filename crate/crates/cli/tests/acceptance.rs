//! Acceptance run: one PASS/FAIL line per criterion, with the failing checks
//! listed underneath. Exits nonzero if any criterion fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use solitonlab::suite::{run_criterion, SuiteConfig};

/// Wall-clock budget per criterion.
const BUDGETS: [(u32, u64); 7] = [(1, 1), (2, 1), (3, 1), (4, 5), (5, 60), (6, 600), (7, 120)];

/// Runs `reproduce-paper` through the built binary twice and compares the
/// output byte for byte. Grids are reduced to keep the double run short.
fn binary_determinism() -> Result<usize, String> {
    let exe = env!("CARGO_BIN_EXE_solitonlab");
    let run = || {
        Command::new(exe)
            .args(["reproduce-paper", "--resolvent-grid", "12", "--convergence-grid", "10", "--semigroup-grid", "10"])
            .output()
            .map_err(|e| e.to_string())
    };
    let a = run()?;
    let b = run()?;
    if a.stdout.is_empty() {
        return Err("empty output".into());
    }
    if a.stdout != b.stdout {
        return Err("outputs differ".into());
    }
    Ok(a.stdout.len())
}

fn main() -> ExitCode {
    let cfg = SuiteConfig::default();
    let mut all = true;
    println!("acceptance criteria (seed {})", cfg.seed);
    for (id, budget) in BUDGETS {
        let start = Instant::now();
        let outcome = run_criterion(id, &cfg).expect("known criterion");
        let mut problems: Vec<String> =
            outcome.checks.iter().filter(|c| c.gating && !c.passed).map(|c| format!("{}: {}", c.name, c.summary)).collect();
        if id == 7 {
            match binary_determinism() {
                Ok(bytes) => println!("    reproduce-paper output identical across runs ({bytes} bytes)"),
                Err(e) => problems.push(format!("reproduce-paper determinism: {e}")),
            }
        }
        let elapsed = start.elapsed();
        if elapsed > Duration::from_secs(budget) {
            problems.push(format!("runtime {:.2}s exceeds {budget}s", elapsed.as_secs_f64()));
        }
        let passed = problems.is_empty();
        all &= passed;
        println!(
            "{} criterion {id}: {} ({:.2}s)",
            if passed { "PASS" } else { "FAIL" },
            outcome.title,
            elapsed.as_secs_f64()
        );
        for p in &problems {
            println!("    failing: {p}");
        }
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
