//! Acceptance criteria at the published scale (N = 100, t ∈ [0, 60],
//! dt = 0.01). Prints one PASS/FAIL line per criterion and exits nonzero if
//! any fails.

use dissipative_transport::experiments::{
    coefficient_oracle_suite, compare_modes, evaluate_sweep, exact_oracle_run, simulate, ExperimentConfig,
    SweepAxis, SweepConfig, SweepReport,
};
use dissipative_transport::integrator::{DissipatorConvention, Mode, TimeGrid};
use dissipative_transport::model::LatticeState;
use std::process::ExitCode;
use std::time::{Duration, Instant};

const COEFFICIENT_TOL: f64 = 1e-8;
const COEFFICIENT_BUDGET: Duration = Duration::from_secs(1);
const TRACE_TOL: f64 = 1e-8;
const HERMITICITY_TOL: f64 = 1e-10;
const RUN_BUDGET: Duration = Duration::from_secs(60);
const ARRIVAL_P_MIN: f64 = 0.9;
const EXCITED_DISTANCE_MAX: f64 = 0.05;
const GROUND_DISTANCE_MIN: f64 = 0.95;
const GAP_MARGIN: f64 = 0.02;
const ALPHA_TOL: f64 = 0.05;
const SPACING_REL_TOL: f64 = 0.02;
const ORDER_RANGE: (f64, f64) = (12.0, 20.0);
const REFERENCE_TOL: f64 = 1e-8;
const EXCITATION_TOL: f64 = 1e-8;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn sweep(axis: SweepAxis, values: &[f64]) -> SweepReport {
    let mut cfg = ExperimentConfig::default();
    cfg.sweep = Some(SweepConfig {
        axis,
        values: values.to_vec(),
    });
    evaluate_sweep(&cfg).expect("sweep runs")
}

fn rows_text(report: &SweepReport) -> String {
    report
        .rows
        .iter()
        .map(|r| format!("{}: t_max={:.2} P_max={:.4}", r.value, r.t_max, r.p_max))
        .collect::<Vec<_>>()
        .join("; ")
}

fn c1_coefficient_oracle() -> Outcome {
    let problem = ExperimentConfig::default().build().unwrap();
    let start = Instant::now();
    let report = coefficient_oracle_suite(&problem.params).unwrap();
    let elapsed = start.elapsed();
    let diff = report.max_shift_difference.max(report.max_rate_difference);
    outcome(
        report.points * report.levels == 1200 && diff <= COEFFICIENT_TOL && elapsed < COEFFICIENT_BUDGET,
        format!("max |closed − quadrature| = {diff:.2e} over 600 × 2 points in {elapsed:.2?}"),
    )
}

fn c2_conservation() -> Outcome {
    let start = Instant::now();
    let mut worst_trace = 0.0f64;
    let mut worst_herm = 0.0f64;
    for convention in [DissipatorConvention::LindbladRaising, DissipatorConvention::Lowering] {
        for mode in [Mode::Redfield, Mode::Markov] {
            let mut cfg = ExperimentConfig::default();
            cfg.convention = convention;
            cfg.mode = mode;
            let out = simulate(&cfg.build().unwrap()).unwrap();
            worst_trace = worst_trace.max(out.trajectory.max_trace_defect());
            worst_herm = worst_herm.max(out.trajectory.max_hermiticity_defect());
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst_trace <= TRACE_TOL && worst_herm <= HERMITICITY_TOL && elapsed < RUN_BUDGET,
        format!("trace drift {worst_trace:.2e}, Hermiticity defect {worst_herm:.2e}, 4 runs in {elapsed:.2?}"),
    )
}

fn c3_c4_arrival() -> (Outcome, Outcome) {
    let start = Instant::now();
    let out = simulate(&ExperimentConfig::default().build().unwrap()).unwrap();
    let elapsed = start.elapsed();
    let s = &out.summary;
    let c3 = outcome(
        s.p_max >= ARRIVAL_P_MIN && s.v_n < 1.0 && elapsed < RUN_BUDGET,
        format!("P_max = {:.4} at t_max = {}, v_N = {}, in {elapsed:.2?}", s.p_max, s.t_max, s.v_n),
    );
    let (e, g) = (s.distances_at_t_max.to_excited, s.distances_at_t_max.to_ground);
    let c4 = outcome(
        matches!(e, Some(d) if d <= EXCITED_DISTANCE_MAX) && matches!(g, Some(d) if d >= GROUND_DISTANCE_MIN),
        format!("T(ρ_N, ρ_e) = {e:?}, T(ρ_N, ρ_g) = {g:?}"),
    );
    (c3, c4)
}

fn c5_gap_ordering() -> Outcome {
    let report = sweep(SweepAxis::SystemGap, &[10.0, 4.0, 1.5]);
    let p: Vec<f64> = report.rows.iter().map(|r| r.p_max).collect();
    let pass = report.failures.is_empty() && p.len() == 3 && p.windows(2).all(|w| w[0] - w[1] >= GAP_MARGIN);
    outcome(pass, rows_text(&report))
}

fn non_increasing_with_strict(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] <= w[0]) && xs.windows(2).any(|w| w[1] < w[0])
}

fn c6_level_count_ordering() -> Outcome {
    let report = sweep(SweepAxis::EnvLevelCount, &[2.0, 5.0, 10.0, 20.0]);
    let p: Vec<f64> = report.rows.iter().map(|r| r.p_max).collect();
    let t: Vec<f64> = report.rows.iter().map(|r| r.t_max).collect();
    let pass = report.failures.is_empty() && p.len() == 4 && non_increasing_with_strict(&p) && non_increasing_with_strict(&t);
    outcome(pass, rows_text(&report))
}

fn c7_alpha_linearity() -> Outcome {
    let report = sweep(SweepAxis::InitialAlpha, &[0.25, 0.5, 0.75]);
    let worst = report.rows.iter().map(|r| (r.p_max - r.value).abs()).fold(0.0, f64::max);
    outcome(
        report.failures.is_empty() && report.rows.len() == 3 && worst <= ALPHA_TOL,
        format!("max |P_max − α| = {worst:.4} ({})", rows_text(&report)),
    )
}

fn relative_spread(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
    (max - min) / max.abs()
}

fn c8_spacing_insensitivity() -> Outcome {
    let report = sweep(SweepAxis::EnvSpacing, &[1.0, 5.0, 20.0]);
    let p: Vec<f64> = report.rows.iter().map(|r| r.p_max).collect();
    let t: Vec<f64> = report.rows.iter().map(|r| r.t_max).collect();
    let (sp, st) = (relative_spread(&p), relative_spread(&t));
    outcome(
        report.failures.is_empty() && p.len() == 3 && sp <= SPACING_REL_TOL && st <= SPACING_REL_TOL,
        format!("relative spread P_max {:.1}%, t_max {:.1}% ({})", 100.0 * sp, 100.0 * st, rows_text(&report)),
    )
}

fn c9_markov_earlier() -> Outcome {
    let cmp = compare_modes(&ExperimentConfig::default(), None).unwrap();
    outcome(
        cmp.markov_earlier == Some(true),
        format!(
            "t_max Markov = {} (P_max {:.4}), Redfield = {} (P_max {:.4})",
            cmp.markov.t_max, cmp.markov.p_max, cmp.redfield.t_max, cmp.redfield.p_max
        ),
    )
}

fn order_instance(dt: f64) -> LatticeState {
    let cfg = ExperimentConfig::from_toml_str(
        "[system]\nnum_nodes = 2\nlevels = [1.0, 3.0]\n[environment]\nlevels = [0.2, 0.5]\n[coupling]\nuniform = 0.3\n[initial]\nalpha = 0.7\n",
    )
    .unwrap();
    let p = cfg.build().unwrap();
    let grid = TimeGrid::new(0.0, 1.0, dt, usize::MAX).unwrap();
    let traj = p.equation().evolve(&p.initial, &grid).unwrap();
    traj.final_state().unwrap().clone()
}

fn max_entry_difference(a: &LatticeState, b: &LatticeState) -> f64 {
    a.blocks()
        .iter()
        .zip(b.blocks())
        .flat_map(|(x, y)| (x - y).iter().map(|z| z.norm()).collect::<Vec<_>>())
        .fold(0.0, f64::max)
}

fn c10_rk4_order() -> Outcome {
    let coarse = 0.1;
    let reference = order_instance(coarse / 20.0);
    let e1 = max_entry_difference(&order_instance(coarse), &reference);
    let e2 = max_entry_difference(&order_instance(coarse / 2.0), &reference);
    let ratio = e1 / e2;
    let default_dt = 0.01;
    let e_default = max_entry_difference(&order_instance(default_dt), &order_instance(default_dt / 10.0));
    outcome(
        (ORDER_RANGE.0..=ORDER_RANGE.1).contains(&ratio) && e_default <= REFERENCE_TOL,
        format!("error ratio {ratio:.2} (dt 0.1 → 0.05), |ρ(dt=0.01) − ρ(dt=0.001)| = {e_default:.2e} at t = 1"),
    )
}

fn c11_exact_oracle() -> Outcome {
    let base = "[system]\nnum_nodes = 3\nlevels = [1.0, 10.0]\n[environment]\ncount = 1\n[initial]\nalpha = 0.5\n[time]\nt_start = 0.0\nt_end = 10.0\ndt = 0.01\nsample_stride = 10\n";
    let coupled = ExperimentConfig::from_toml_str(&format!("{base}[coupling]\nuniform = 0.01\n")).unwrap();
    let free = ExperimentConfig::from_toml_str(&format!("{base}[coupling]\nuniform = 0.0\n")).unwrap();
    let r = exact_oracle_run(&coupled.build().unwrap()).unwrap();
    let z = exact_oracle_run(&free.build().unwrap()).unwrap();
    outcome(
        r.max_excitation_drift <= EXCITATION_TOL && z.max_deviation == 0.0,
        format!(
            "excitation drift {:.2e}, g = 0 deviation {:.1e}; reported Born deviation {:.2e} (envelope {:.2e}, within: {})",
            r.max_excitation_drift,
            z.max_deviation,
            r.max_deviation,
            r.envelope.last().copied().unwrap_or(0.0),
            r.within_envelope
        ),
    )
}

fn main() -> ExitCode {
    let (c3, c4) = c3_c4_arrival();
    let results = [
        ("C1 coefficient oracle equivalence", c1_coefficient_oracle()),
        ("C2 conservation suite", c2_conservation()),
        ("C3 end-node arrival", c3),
        ("C4 arriving state identity", c4),
        ("C5 gap ordering", c5_gap_ordering()),
        ("C6 reservoir level count ordering", c6_level_count_ordering()),
        ("C7 initial amplitude linearity", c7_alpha_linearity()),
        ("C8 reservoir spacing insensitivity", c8_spacing_insensitivity()),
        ("C9 Markov arrival earlier", c9_markov_earlier()),
        ("C10 integrator order", c10_rk4_order()),
        ("C11 exact oracle sanity", c11_exact_oracle()),
    ];
    let mut failed = 0;
    for (name, o) in &results {
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
