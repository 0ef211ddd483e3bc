//! wasm-bindgen entry points for the static demo page in `www/`. Every
//! export takes and returns JSON so the page needs no generated bindings
//! beyond strings.

use dissipative_transport::coefficients::Level;
use dissipative_transport::experiments::{ExperimentConfig, Problem};
use dissipative_transport::integrator::{DissipatorConvention, Mode, TimeGrid};
use dissipative_transport::observables::{summarize_series, OccupationProfile};
use serde::{Deserialize, Serialize};
use serde_json::json;
use wasm_bindgen::prelude::*;

pub const MAX_NODES: usize = 200;
pub const MAX_STEPS: usize = 20_000;
pub const MAX_CURVE_POINTS: usize = 5_000;

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DemoParams {
    pub num_nodes: usize,
    pub levels: [f64; 2],
    pub env_ground: f64,
    pub env_spacing: f64,
    pub env_count: usize,
    pub coupling: f64,
    pub alpha: f64,
    pub t_end: f64,
    pub dt: f64,
    pub sample_stride: usize,
    pub eta_factor: f64,
    pub convention: DissipatorConvention,
    /// Sample count for coefficient curves.
    pub points: usize,
}

impl Default for DemoParams {
    fn default() -> Self {
        Self {
            num_nodes: 20,
            levels: [1.0, 10.0],
            env_ground: 0.05,
            env_spacing: 5.0,
            env_count: 5,
            coupling: 0.05,
            alpha: 1.0,
            t_end: 20.0,
            dt: 0.01,
            sample_stride: 10,
            eta_factor: 0.1,
            convention: DissipatorConvention::LindbladRaising,
            points: 600,
        }
    }
}

impl DemoParams {
    fn problem(&self) -> Result<Problem, String> {
        if self.num_nodes > MAX_NODES {
            return Err(format!("num_nodes {} exceeds the demo limit of {MAX_NODES}", self.num_nodes));
        }
        let mut cfg = ExperimentConfig::default();
        cfg.system.num_nodes = self.num_nodes;
        cfg.system.levels = self.levels;
        cfg.environment.ground = Some(self.env_ground);
        cfg.environment.spacing = Some(self.env_spacing);
        cfg.environment.count = Some(self.env_count);
        cfg.coupling.uniform = Some(self.coupling);
        cfg.initial.alpha = self.alpha;
        cfg.time = TimeGrid {
            t_start: 0.0,
            t_end: self.t_end,
            dt: self.dt,
            sample_stride: self.sample_stride,
        };
        cfg.markov.eta_factor = self.eta_factor;
        cfg.convention = self.convention;
        let problem = cfg.build().map_err(|e| e.to_string())?;
        if problem.grid.steps() > MAX_STEPS {
            return Err(format!("{} steps exceeds the demo limit of {MAX_STEPS}", problem.grid.steps()));
        }
        Ok(problem)
    }
}

fn parse(input: &str) -> Result<DemoParams, String> {
    if input.trim().is_empty() {
        return Ok(DemoParams::default());
    }
    serde_json::from_str(input).map_err(|e| format!("bad parameters: {e}"))
}

#[derive(Debug, Serialize)]
struct Peak {
    t_max: f64,
    p_max: f64,
    v_n: f64,
}

fn profile(problem: &Problem, mode: Mode) -> Result<OccupationProfile, String> {
    let traj = problem
        .equation_in(mode)
        .evolve(&problem.initial, &problem.grid)
        .map_err(|e| e.to_string())?;
    Ok(OccupationProfile::from_trajectory(&traj))
}

/// Last-node occupation under both modes, with arrival summaries.
pub fn end_node_curves_json(input: &str) -> Result<String, String> {
    let p = parse(input)?;
    let problem = p.problem()?;
    let n = problem.system.num_nodes();
    let red = profile(&problem, Mode::Redfield)?;
    let mar = profile(&problem, Mode::Markov)?;
    let peak = |prof: &OccupationProfile| {
        let s = summarize_series(&prof.times, prof.node(n), n);
        Peak {
            t_max: s.t_max,
            p_max: s.p_max,
            v_n: s.v_n,
        }
    };
    Ok(json!({
        "t": red.times,
        "redfield": red.node(n),
        "markov": mar.node(n),
        "redfield_peak": peak(&red),
        "markov_peak": peak(&mar),
        "eta": problem.regularizer.eta(),
    })
    .to_string())
}

/// Level-summed `Γ(t)` and `γ(t)` on `[0, t_end]` plus the Markov constants.
pub fn coefficient_curves_json(input: &str) -> Result<String, String> {
    let p = parse(input)?;
    if p.points < 2 || p.points > MAX_CURVE_POINTS {
        return Err(format!("points must be in 2..={MAX_CURVE_POINTS}"));
    }
    let problem = p.problem()?;
    let params = &problem.params;
    let mut t = Vec::with_capacity(p.points);
    let mut shift = Vec::with_capacity(p.points);
    let mut rate = Vec::with_capacity(p.points);
    for i in 0..p.points {
        let ti = p.t_end * i as f64 / (p.points - 1) as f64;
        let (mut s, mut r) = (0.0, 0.0);
        for level in Level::ALL {
            let c = params.redfield(level, ti).map_err(|e| e.to_string())?;
            s += c.shift;
            r += c.rate;
        }
        t.push(ti);
        shift.push(s);
        rate.push(r);
    }
    let markov = Level::ALL
        .iter()
        .map(|&l| params.markov(l, problem.regularizer))
        .fold((0.0, 0.0), |acc, c| (acc.0 + c.shift, acc.1 + c.rate));
    Ok(json!({
        "t": t,
        "shift": shift,
        "rate": rate,
        "markov_shift": markov.0,
        "markov_rate": markov.1,
        "eta": problem.regularizer.eta(),
    })
    .to_string())
}

/// `P_j(t)` for every node under Redfield dynamics.
pub fn occupation_heatmap_json(input: &str) -> Result<String, String> {
    let problem = parse(input)?.problem()?;
    let prof = profile(&problem, Mode::Redfield)?;
    Ok(json!({ "t": prof.times, "p": prof.probabilities }).to_string())
}

#[wasm_bindgen]
pub fn end_node_curves(input: &str) -> Result<String, JsValue> {
    end_node_curves_json(input).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn coefficient_curves(input: &str) -> Result<String, JsValue> {
    coefficient_curves_json(input).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn occupation_heatmap(input: &str) -> Result<String, JsValue> {
    occupation_heatmap_json(input).map_err(|e| JsValue::from_str(&e))
}
