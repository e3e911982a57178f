//! One pass/fail line per acceptance criterion, with the observed worst case
//! and the wall time against its budget.

use std::time::{Duration, Instant};

use jsloss::par::Exec;
use jsloss::verify::suites::{
    check_all_gradients, check_asym, check_bound_limits, check_bounds, check_decomposition, check_gap_vs_m, check_js_gradient,
    check_limits, check_risk, Claim, VerifyOptions,
};

mod training;

const SEED: u64 = 20_240_601;

struct Outcome {
    id: usize,
    title: &'static str,
    claims: Vec<Claim>,
    elapsed: Duration,
    budget: Duration,
}

impl Outcome {
    fn passed(&self) -> bool {
        self.claims.iter().all(|c| c.passed) && self.elapsed <= self.budget
    }

    fn print(&self) {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        println!(
            "[{status}] criterion {:>2}: {} ({:.2}s / {:.0}s budget)",
            self.id,
            self.title,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs_f64()
        );
        for c in &self.claims {
            let mark = if c.passed { "ok " } else { "BAD" };
            println!("        {mark} {:<34} observed {:.3e} <= {:.1e}  {}", c.name, c.observed, c.tolerance, c.detail);
        }
    }
}

fn run(id: usize, title: &'static str, budget_s: u64, f: impl FnOnce() -> Vec<Claim>) -> Outcome {
    let start = Instant::now();
    let claims = f();
    Outcome { id, title, claims, elapsed: start.elapsed(), budget: Duration::from_secs(budget_s) }
}

fn numerical_criteria() -> Vec<Outcome> {
    let exec = Exec::Parallel;
    let opts = VerifyOptions { seed: SEED, exec, z_override: None };
    let outcomes = vec![
        run(1, "closed-form JS gradient vs finite differences", 5, || vec![check_js_gradient(1000, SEED, exec).unwrap()]),
        run(2, "every loss kind vs finite differences", 30, || check_all_gradients(200, SEED, exec).unwrap()),
        run(3, "GJS decomposition identity", 10, || check_decomposition(10_000, SEED, exec).unwrap()),
        run(4, "closed-form bounds by brute-force search", 60, || check_bounds(100_000, 30, &opts).unwrap()),
        run(5, "robustness in the limit pi1 -> 1", 1, || check_bound_limits().unwrap()),
        run(6, "larger M loosens the GJS bounds", 1, || check_gap_vs_m().unwrap()),
        run(7, "CE and MAE asymptotes", 5, || check_limits(10_000, SEED).unwrap()),
        run(8, "uniform-noise risk bounds by enumeration", 60, || check_risk(20, SEED, exec).unwrap()),
        run(9, "asymmetric-noise conditions and constants C1, C2", 10, || check_asym(100_000, SEED, exec).unwrap()),
    ];
    outcomes.iter().for_each(Outcome::print);
    outcomes
}

fn main() {
    let mut outcomes = numerical_criteria();
    outcomes.extend(training::training_criteria());
    let failed: Vec<usize> = outcomes.iter().filter(|o| !o.passed()).map(|o| o.id).collect();
    let passed = outcomes.len() - failed.len();
    println!("acceptance: {passed}/{} criteria passed", outcomes.len());
    if !failed.is_empty() {
        println!("failing criteria: {failed:?}");
        std::process::exit(1);
    }
}
