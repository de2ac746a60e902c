//! Acceptance suite: every release gate in one place, one pass/fail line
//! per criterion. Run with `cargo test --test acceptance -- --nocapture`
//! to see the lines; each criterion also asserts, so a plain `cargo test`
//! fails loudly when a gate is missed.

use std::time::{Duration, Instant};

use hdpmix::conjugate::{FamilyPrior, GammaPoissonParams, HdpHyper, NormalGammaParams};
use hdpmix::oracle::{
    check_block_three_way, check_chain_vs_enumeration, check_enumeration, check_geweke,
    check_gp_closed_vs_quad, check_nb_normalization, check_ng_closed_vs_quad,
    check_t_normalization, label_agreement, Check, Grid,
};
use hdpmix::sampler::{run_chain, SamplerConfig};
use hdpmix::synth::fixed_scenario;

fn report(criterion: &str, checks: &[Check], elapsed: Duration, budget: Duration) {
    let failed: Vec<&Check> = checks.iter().filter(|c| !c.pass).collect();
    let pass = failed.is_empty() && elapsed <= budget;
    println!(
        "ACCEPTANCE {criterion}: {} ({} checks, {} failed, {:.1}s of {:.0}s budget)",
        if pass { "PASS" } else { "FAIL" },
        checks.len(),
        failed.len(),
        elapsed.as_secs_f64(),
        budget.as_secs_f64(),
    );
    for c in failed.iter().take(10) {
        println!("  {c}");
    }
    assert!(
        failed.is_empty(),
        "{criterion}: {} checks failed",
        failed.len()
    );
    assert!(
        elapsed <= budget,
        "{criterion}: took {elapsed:?}, budget {budget:?}"
    );
}

#[test]
fn criterion_1_gp_closed_form_vs_quadrature() {
    let start = Instant::now();
    let checks = check_gp_closed_vs_quad(Grid::Full).expect("quadrature converges");
    assert!(checks.len() >= 200, "grid must cover at least 200 cases");
    report(
        "1 gamma-poisson closed vs quadrature",
        &checks,
        start.elapsed(),
        Duration::from_secs(10),
    );
}

#[test]
fn criterion_2_ng_closed_form_vs_quadrature() {
    let start = Instant::now();
    let checks = check_ng_closed_vs_quad(Grid::Full).expect("quadrature converges");
    assert!(checks.len() >= 100, "grid must cover at least 100 cases");
    report(
        "2 normal-gamma closed vs quadrature",
        &checks,
        start.elapsed(),
        Duration::from_secs(30),
    );
}

#[test]
fn criterion_3_predictive_normalization() {
    let start = Instant::now();
    let mut checks = check_nb_normalization().unwrap();
    let nb_count = checks.len();
    assert!(
        nb_count >= 20,
        "need at least 20 NB settings, got {nb_count}"
    );
    let t_checks = check_t_normalization().unwrap();
    assert!(t_checks.len() >= 10, "need at least 10 Student-t settings");
    checks.extend(t_checks);
    report(
        "3 predictive normalization",
        &checks,
        start.elapsed(),
        Duration::from_secs(60),
    );
}

#[test]
fn criterion_4_block_predictive_three_way_agreement() {
    let start = Instant::now();
    let checks = check_block_three_way().unwrap();
    report(
        "4 block predictive three-way agreement",
        &checks,
        start.elapsed(),
        Duration::from_secs(30),
    );
}

#[test]
fn criterion_5_exact_posterior_and_chain_agreement() {
    let start = Instant::now();
    let mut checks = check_enumeration().unwrap();
    checks.extend(check_chain_vs_enumeration(Grid::Quick).unwrap());
    report(
        "5 exact posterior vs chain",
        &checks,
        start.elapsed(),
        Duration::from_secs(60),
    );
}

#[test]
fn criterion_6_joint_distribution_check() {
    let start = Instant::now();
    let checks = check_geweke(Grid::Full).unwrap();
    report(
        "6 joint-distribution (Geweke) check",
        &checks,
        start.elapsed(),
        Duration::from_secs(300),
    );
}

fn recovery(scenario_name: &str, hyper: &HdpHyper) -> Vec<Check> {
    let scenario = fixed_scenario(scenario_name).unwrap();
    let mut successes = 0;
    let mut detail = Vec::new();
    for seed in 0..10u64 {
        let config = SamplerConfig::new(150, 50, seed);
        let (trace, state) = run_chain(&scenario.data, hyper, &config).unwrap();
        let modal = trace.modal_num_dishes(config.burn_in);
        let agreement = label_agreement(&scenario.truth, &state.assignment_dishes());
        if modal == Some(3) && agreement >= 0.9 {
            successes += 1;
        }
        detail.push((seed, modal, agreement));
    }
    if successes < 8 {
        for (seed, modal, agreement) in &detail {
            println!("  seed {seed}: modal K = {modal:?}, agreement = {agreement:.3}");
        }
    }
    vec![Check::above(
        format!("recovery/{scenario_name} successful seeds"),
        8.0,
        successes as f64,
    )]
}

#[test]
fn criterion_7_recovery_gp_3rates() {
    let start = Instant::now();
    // broad rate prior (mean 10) spanning the three scales, and a dish
    // concentration low enough that the mode sits at the true K
    let hyper = HdpHyper::new(
        0.3,
        1.0,
        FamilyPrior::GammaPoisson(GammaPoissonParams::new(1.0, 0.1).unwrap()),
    )
    .unwrap();
    let checks = recovery("gp-3rates", &hyper);
    report(
        "7a recovery on gp-3rates",
        &checks,
        start.elapsed(),
        Duration::from_secs(120),
    );
}

#[test]
fn criterion_7_recovery_ng_3means() {
    let start = Instant::now();
    let hyper = HdpHyper::new(
        1.0,
        1.0,
        FamilyPrior::NormalGamma(NormalGammaParams::new(vec![0.0, 0.0], 0.05, 2.0, 2.0).unwrap()),
    )
    .unwrap();
    let checks = recovery("ng-3means", &hyper);
    report(
        "7b recovery on ng-3means",
        &checks,
        start.elapsed(),
        Duration::from_secs(120),
    );
}

#[test]
fn criterion_8_determinism_byte_identical_traces() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("data.jsonl");
    let scenario = fixed_scenario("gp-3rates").unwrap();
    hdpmix::io::write_dataset(&input, &scenario.data).unwrap();
    let config = hdpmix::io::RunConfig {
        family: hdpmix::io::Family::GammaPoisson,
        gamma: 1.0,
        alpha0: 1.0,
        alpha: Some(1.0),
        beta: Some(1.0),
        mu0: None,
        kappa0: None,
        alpha0_ng: None,
        beta0: None,
        sweeps: 60,
        burn_in: 20,
        chains: 2,
        seed: 777,
        snapshot_every: 0,
        init_mode: "all-together".into(),
        scan_order: "shuffled".into(),
        input: Some(input),
        output: Some(dir.path().join("run1")),
        group_sizes: None,
    };
    let first = hdpmix::io::run_fit(&config).unwrap();
    let second = hdpmix::io::run_fit(&hdpmix::io::RunConfig {
        output: Some(dir.path().join("run2")),
        ..config
    })
    .unwrap();
    let mut identical = true;
    for (a, b) in first.iter().zip(&second) {
        let ta = std::fs::read(a.join("trace.csv")).unwrap();
        let tb = std::fs::read(b.join("trace.csv")).unwrap();
        identical &= ta == tb;
    }
    let checks = vec![Check {
        name: "determinism/trace.csv byte-identical".into(),
        expected: "identical bytes across reruns".into(),
        got: if identical { "identical" } else { "diverged" }.into(),
        tolerance: "exact".into(),
        pass: identical,
    }];
    report(
        "8 determinism",
        &checks,
        start.elapsed(),
        Duration::from_secs(60),
    );
}
