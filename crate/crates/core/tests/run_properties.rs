//! End-to-end runs checked against the regret bounds and trace invariants.

mod support;

use freegrad_core::analysis::{
    bound_cor_eps, bound_cor_main, bound_cor_sqrt, bound_warmup, check_phase_growth, cumulative_regret, k_bar,
    k_star, any_h_regret_bound,
};
use freegrad_core::baselines::{
    adagrad_max_distance, adagrad_regret_bound, adagrad_regret_bound_with_radius, oracle_regret_bound, run_adagrad,
    run_oracle,
};
use freegrad_core::free_adagrad::{self, FreeState};
use freegrad_core::problems::ProblemSpec;
use freegrad_core::{Problem, Run, StepScale, ThresholdRule, Vector};
use support::listing;

fn specs(seed: u64) -> Vec<ProblemSpec> {
    vec![
        ProblemSpec::norm(1, 50, seed),
        ProblemSpec::norm(2, 50, seed),
        ProblemSpec::abs_linear(100, 50, seed, seed),
    ]
}

fn dist(problem: &Problem) -> f64 {
    problem.initial_distance().expect("test problems know x*")
}

fn regret(problem: &Problem, run: &Run) -> f64 {
    cumulative_regret(&run.records, problem.known_f_star().unwrap()).unwrap()
}

fn check_trace_invariants(run: &Run) {
    for w in run.records.windows(2) {
        assert!(w[1].k_t >= w[0].k_t);
        assert!(w[1].h_t >= w[0].h_t || !w[0].h_t.is_finite());
        assert!(w[1].s_t >= w[0].s_t);
    }
    for r in &run.records {
        assert!(r.dist_to_x1 <= r.b_value, "t={}: {} > {}", r.t, r.dist_to_x1, r.b_value);
    }
}

fn trajectory(problem: &Problem, gamma0: f64, iters: usize) -> Vec<Vec<f64>> {
    let mut state = FreeState::new(problem.x1().clone(), gamma0).unwrap();
    let mut out = vec![state.x.as_slice().to_vec()];
    for _ in 0..iters {
        state.step(problem, &StepScale::MainH, ThresholdRule::FullB).unwrap();
        out.push(state.x.as_slice().to_vec());
    }
    out
}

#[test]
fn matches_reference_listing_on_l2() {
    for gamma0 in [1.0, 1e-3, 1e-6] {
        for seed in 0..5 {
            let problem = ProblemSpec::norm(2, 10, seed).build().unwrap();
            let port = listing::free_adagrad(100, listing::l2_subgrad, problem.x1().as_slice(), 2.0 * gamma0);
            let lib = trajectory(&problem, gamma0, 100);
            let gap = listing::max_gap(&port, &lib);
            assert!(gap <= 1e-12, "gamma0={gamma0} seed={seed}: gap {gap:e}");
        }
    }
}

#[test]
fn main_scale_satisfies_its_bound_and_phase_cap() {
    for seed in 0..3 {
        for spec in specs(seed) {
            let problem = spec.build().unwrap();
            for gamma0 in [1.0, 1e-2] {
                let run = free_adagrad::run(&problem, StepScale::MainH, ThresholdRule::FullB, gamma0, 1000).unwrap();
                check_trace_invariants(&run);
                let d = dist(&problem);
                let r = regret(&problem, &run);
                assert!(r <= bound_cor_main(d, gamma0, run.s_final(), run.s_next).unwrap());
                assert!(r <= any_h_regret_bound(d, &run, &StepScale::MainH).unwrap());
                assert!(run.final_phase() <= k_bar(k_star(gamma0, d).unwrap()).unwrap());
                check_phase_growth(d, gamma0, run.final_phase()).unwrap();
            }
        }
    }
}

#[test]
fn sqrt_and_eps_scales_satisfy_their_bounds() {
    for seed in 0..3 {
        for spec in specs(seed) {
            let problem = spec.build().unwrap();
            let d = dist(&problem);

            let run = free_adagrad::run(&problem, StepScale::SqrtS, ThresholdRule::FullB, 1e-2, 1000).unwrap();
            check_trace_invariants(&run);
            let g1 = run.records[0].grad_norm_sq;
            let r = regret(&problem, &run);
            assert!(r <= bound_cor_sqrt(d, 1e-2, run.s_final(), run.s_next, g1).unwrap());
            assert!(r <= any_h_regret_bound(d, &run, &StepScale::SqrtS).unwrap());

            for eps in [1e-2, 1.0, 100.0] {
                let scale = StepScale::SqrtEpsS { epsilon: eps };
                let run = free_adagrad::run(&problem, scale, ThresholdRule::FullB, 1e-2, 1000).unwrap();
                check_trace_invariants(&run);
                let r = regret(&problem, &run);
                assert!(r <= bound_cor_eps(d, 1e-2, run.s_final(), run.s_next, eps).unwrap());
                assert!(r <= any_h_regret_bound(d, &run, &scale).unwrap());
            }
        }
    }
}

#[test]
fn warmup_thresholds_satisfy_their_bounds() {
    let horizon = 1000;
    for seed in 0..3 {
        for spec in specs(seed) {
            let problem = spec.build().unwrap();
            let d = dist(&problem);
            let l = problem.lipschitz_bound().unwrap();
            let scale = StepScale::ConstLT { lipschitz: l, horizon };
            for gamma0 in [1.0, 1e-3] {
                let simple = free_adagrad::run(&problem, scale, ThresholdRule::SimpleB, gamma0, horizon).unwrap();
                check_trace_invariants(&simple);
                assert!(regret(&problem, &simple) <= bound_warmup(d, gamma0, l, horizon, true, d).unwrap());
                assert!(simple.final_phase() <= k_star(gamma0, d).unwrap());

                let rule = ThresholdRule::ImprovedWarmupB { horizon };
                let improved = free_adagrad::run(&problem, scale, rule, gamma0, horizon).unwrap();
                check_trace_invariants(&improved);
                assert!(regret(&problem, &improved) <= bound_warmup(d, gamma0, l, horizon, false, d).unwrap());
            }
        }
    }
}

#[test]
fn baselines_satisfy_their_bounds() {
    let horizon = 1000;
    for seed in 0..3 {
        for spec in specs(seed) {
            let problem = spec.build().unwrap();
            let d = dist(&problem);
            let l = problem.lipschitz_bound().unwrap();

            let oracle = run_oracle(&problem, d, l, horizon).unwrap();
            assert!(regret(&problem, &oracle) <= oracle_regret_bound(d, l, horizon));

            let ada = run_adagrad(&problem, d, horizon).unwrap();
            let r = regret(&problem, &ada);
            let x_star = problem.known_minimizer().unwrap();
            let radius = adagrad_max_distance(&problem, d, horizon, x_star).unwrap();
            assert!(r <= adagrad_regret_bound_with_radius(d, radius, ada.s_final()));
            if radius <= d {
                assert!(r <= adagrad_regret_bound(d, ada.s_final()));
            }
        }
    }
}

#[test]
fn expsum_runs_without_divergence_and_improves_the_average() {
    let problem = ProblemSpec::expsum_default(10, 5, 0).build().unwrap();
    let run = free_adagrad::run(&problem, StepScale::MainH, ThresholdRule::FullB, 1.0, 2000).unwrap();
    check_trace_invariants(&run);
    assert!(run.x_average.as_slice().iter().all(|v| *v >= 0.0));
    let f = problem.objective();
    let early = free_adagrad::run(&problem, StepScale::MainH, ThresholdRule::FullB, 1.0, 200).unwrap();
    assert!(f.value(&run.x_average) <= f.value(&early.x_average));
}

#[test]
fn forced_doubling_produces_step_jumps() {
    let problem = ProblemSpec::norm(2, 10, 0).build().unwrap();
    let x1 = Vector::new(problem.x1().as_slice().iter().map(|v| v * 10.0 / problem.x1().norm()).collect()).unwrap();
    let problem = problem.with_x1(x1).unwrap();
    let run = free_adagrad::run(&problem, StepScale::MainH, ThresholdRule::FullB, 1e-3, 500).unwrap();
    assert!(!run.step_size_jumps().is_empty());
    assert!(run.final_phase() > 1);
}
