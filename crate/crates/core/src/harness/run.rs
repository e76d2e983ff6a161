use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde_json::{json, Value};

use super::config::*;
use super::record::{config_digest, Check, ResultRecord, Series};
use crate::cliffordsim::{clifford_spacetime, random_layered_clifford, stabilizer_states, MergeOrder};
use crate::designlab::{
    accessible_dimension, complexity_bound, ensemble_frame_potential, frame_potential_estimate, haar_frame_potential,
    moment_distance, projected_ensemble, ProjectedEnsemble, MAX_MOMENT_DIM,
};
use crate::ensembles::{
    build_brickwork, choi_state, sample_density_matrix, sample_haar_state, sample_haar_unitary, EnsembleSpec,
};
use crate::error::{Error, Result};
use crate::rng::{self, StreamRng};
use crate::shadow::{
    estimate_observables, median_of_means, plan_estimation, snapshot_values, Observable, PlanMode, ShadowSampler,
};
use crate::statevector::{fidelity, StateVector};
use crate::teleport::{depth_budget, spacetime_convert_state, teleport_gate};

const FIDELITY_TOL: f64 = 1e-9;

#[derive(Default)]
struct Outcome {
    outputs: BTreeMap<String, Value>,
    series: BTreeMap<String, Series>,
    checks: Vec<Check>,
}

impl Outcome {
    fn put(&mut self, key: &str, v: Value) {
        self.outputs.insert(key.into(), v);
    }

    fn row(&mut self, series: &str, row: Vec<Value>) {
        self.series.entry(series.into()).or_default().rows.push(row);
    }
}

/// Private stream for item `parts` of the experiment.
fn stream(cfg: &ExperimentConfig, parts: &[u64]) -> StreamRng {
    let mut key = vec![rng::tag(cfg.kind().as_str())];
    key.extend_from_slice(parts);
    rng::stream(cfg.seed, &key)
}

/// Runs `config` on its own worker pool. Results depend only on the
/// configuration and seed, never on the worker count.
pub fn run(config: &ExperimentConfig) -> Result<ResultRecord> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::config("workers", e.to_string()))?;
    let start = Instant::now();
    let outcome = pool.install(|| match &config.experiment {
        Experiment::TeleportVerify(c) => teleport_verify(config, c),
        Experiment::SpacetimeRandom(c) => spacetime_random(config, c),
        Experiment::SpacetimeClifford(c) => spacetime_cliff(config, c),
        Experiment::ShadowRun(c) => shadow_run(config, c),
        Experiment::DesignCheck(c) => design_check(config, c),
        Experiment::Accdim(c) => accdim(config, c),
        Experiment::BoundsTable(c) => bounds_table(c),
    })?;
    Ok(ResultRecord {
        kind: config.kind(),
        config_digest: config_digest(config)?,
        seed: config.seed,
        version: env!("CARGO_PKG_VERSION").into(),
        pass: outcome.checks.iter().all(|c| c.pass),
        outputs: outcome.outputs,
        series: outcome.series,
        checks: outcome.checks,
        wall_clock_ms: start.elapsed().as_millis() as u64,
        workers: config.workers,
    })
}

fn teleport_verify(cfg: &ExperimentConfig, c: &TeleportVerify) -> Result<Outcome> {
    let trials: Vec<(f64, u64)> = (0..c.trials)
        .into_par_iter()
        .map(|i| {
            let mut r = stream(cfg, &[i as u64]);
            let u = sample_haar_unitary(1 << c.n, &mut r);
            let input = sample_haar_state(c.n + c.spectators, &mut r)?;
            let (post, trace) = teleport_gate(&choi_state(c.n, &u)?, &input, &mut r)?;
            let front: Vec<usize> = (0..c.n).collect();
            let mut expected = input;
            trace.pauli_error.apply_to_state(&mut expected, &front)?;
            expected.apply_matrix(&u, &front)?;
            Ok((fidelity(&post, &expected)?, trace.outcome.index()))
        })
        .collect::<Result<_>>()?;
    let mut out = Outcome::default();
    let mut counts = vec![0u64; 1 << (2 * c.n)];
    for (i, &(f, idx)) in trials.iter().enumerate() {
        counts[idx as usize] += 1;
        out.row("fidelity", vec![json!(i), json!(f)]);
    }
    let min = trials.iter().map(|t| t.0).fold(f64::INFINITY, f64::min);
    out.put("min_fidelity", json!(min));
    out.put("outcome_counts", json!(counts));
    out.checks.push(Check::at_most("infidelity", 1.0 - min, FIDELITY_TOL));
    Ok(out)
}

fn frame_check(out: &mut Outcome, label: &str, a: &[StateVector], b: &[StateVector], t: usize) -> Result<()> {
    let fa = frame_potential_estimate(a, t)?;
    let fb = frame_potential_estimate(b, t)?;
    let sigma = (fa.stderr.powi(2) + fb.stderr.powi(2)).sqrt();
    let diff = (fa.value - fb.value).abs();
    out.put(&format!("{label}_frame_potential_t{t}"), json!({ "converted": fa, "direct": fb }));
    out.checks.push(Check::at_most(&format!("{label}_frame_potential_t{t}_gap"), diff, 3.0 * sigma + 1e-12));
    Ok(())
}

fn spacetime_random(cfg: &ExperimentConfig, c: &SpacetimeRandom) -> Result<Outcome> {
    let mut out = Outcome::default();
    for &k in &c.ks {
        let runs: Vec<(StateVector, f64, usize, usize, usize)> = (0..c.runs)
            .into_par_iter()
            .map(|i| {
                let mut r = stream(cfg, &[k as u64, i as u64]);
                let run = spacetime_convert_state(c.n, k, c.t, &mut r)?;
                let mut replay = StateVector::zero(c.n)?;
                run.program.apply(&mut replay)?;
                let f = fidelity(&run.state, &replay)?;
                Ok((run.state, f, run.trace.depth_used, run.trace.qubits_used, run.trace.effective_t))
            })
            .collect::<Result<_>>()?;
        let budget = depth_budget(c.t, k)?;
        let effective_t = runs[0].4;
        let min_f = runs.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
        let depth_ok = runs.iter().all(|r| r.2 == budget && r.3 == k * c.n && r.4 == effective_t);
        out.row("depth-tradeoff", vec![json!(k), json!(k * c.n), json!(budget), json!(effective_t)]);
        out.checks.push(Check::exact(&format!("k{k}_depth_and_width"), depth_ok));
        out.checks.push(Check::at_least(&format!("k{k}_effective_depth"), effective_t as f64, c.t as f64));
        out.checks.push(Check::at_most(&format!("k{k}_replay_infidelity"), 1.0 - min_f, FIDELITY_TOL));
        let direct: Vec<StateVector> = (0..c.runs)
            .into_par_iter()
            .map(|i| {
                let mut r = stream(cfg, &[rng::tag("direct"), k as u64, i as u64]);
                let mut s = StateVector::zero(c.n)?;
                build_brickwork(c.n, effective_t, &mut r)?.apply(&mut s)?;
                Ok(s)
            })
            .collect::<Result<_>>()?;
        let converted: Vec<StateVector> = runs.into_iter().map(|r| r.0).collect();
        for t in 1..=2 {
            frame_check(&mut out, &format!("k{k}"), &converted, &direct, t)?;
        }
    }
    Ok(out)
}

fn spacetime_cliff(cfg: &ExperimentConfig, c: &SpacetimeClifford) -> Result<Outcome> {
    let mut out = Outcome::default();
    for &k in &c.ks {
        let trials: Vec<(f64, usize, usize)> = (0..c.trials)
            .into_par_iter()
            .map(|i| {
                let mut r = stream(cfg, &[k as u64, i as u64]);
                let circuit = random_layered_clifford(c.n, c.t, &mut r);
                let run = clifford_spacetime(&circuit, k, None, MergeOrder::LeftToRight, &mut r)?;
                let mut expected = StateVector::zero(c.n)?;
                circuit.apply_to_state(&mut expected, 0)?;
                Ok((fidelity(&run.state, &expected)?, run.trace.depth_used, run.trace.qubits_used))
            })
            .collect::<Result<_>>()?;
        let budget = depth_budget(c.t, k)?;
        let min_f = trials.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
        out.row("depth-tradeoff", vec![json!(k), json!(k * c.n), json!(budget), json!(c.t)]);
        out.checks.push(Check::exact(
            &format!("k{k}_depth_and_width"),
            trials.iter().all(|r| r.1 == budget && r.2 == k * c.n),
        ));
        out.checks.push(Check::at_most(&format!("k{k}_infidelity"), 1.0 - min_f, FIDELITY_TOL));
    }
    Ok(out)
}

fn shadow_run(cfg: &ExperimentConfig, c: &ShadowRun) -> Result<Outcome> {
    let mut out = Outcome::default();
    let rho = sample_density_matrix(c.n, &mut stream(cfg, &[rng::tag("state")]))?;
    let observables = c.observables.iter().map(|l| Observable::pauli(l)).collect::<Result<Vec<_>>>()?;
    let (ensemble, mode) = match c.ensemble {
        ShadowEnsembleKind::Clifford => (EnsembleSpec::CliffordStates { n: c.n }, PlanMode::Global),
        ShadowEnsembleKind::Haar => (EnsembleSpec::HaarStates { n: c.n }, PlanMode::Global),
        ShadowEnsembleKind::Local => (EnsembleSpec::LocalStab { n: c.n }, PlanMode::Local),
    };
    let plan = plan_estimation(&observables, c.epsilon, c.delta, mode)?;
    let sampler = ShadowSampler::new(rho.clone(), ensemble, c.mode)?;
    let total = plan.num_samples().max(c.checkpoints.iter().copied().max().unwrap_or(0));
    let samples = sampler.sample_many(total, derive(cfg, "samples"))?;
    let truth = observables.iter().map(|o| o.expectation(&rho)).collect::<Result<Vec<_>>>()?;
    let estimates = estimate_observables(&samples, &observables, &plan)?;
    let errors: Vec<f64> = estimates.iter().zip(&truth).map(|(e, t)| (e - t).abs()).collect();
    let values = observables.iter().map(|o| snapshot_values(&samples, o)).collect::<Result<Vec<_>>>()?;
    for &n in &c.checkpoints {
        let groups = plan.groups.min(n);
        let worst = values
            .iter()
            .zip(&truth)
            .map(|(v, t)| Ok((median_of_means(&v[..n], groups)? - t).abs()))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        out.row("convergence", vec![json!(n), json!(worst)]);
    }
    out.put("plan", serde_json::to_value(plan)?);
    out.put("estimates", json!(estimates));
    out.put("truth", json!(truth));
    out.put("abs_errors", json!(errors));
    out.checks.push(Check::at_most("max_abs_error", errors.iter().copied().fold(0.0, f64::max), c.epsilon));
    Ok(out)
}

fn derive(cfg: &ExperimentConfig, name: &str) -> u64 {
    rng::derive_seed(cfg.seed, &[rng::tag(cfg.kind().as_str()), rng::tag(name)])
}

fn design_check(cfg: &ExperimentConfig, c: &DesignCheck) -> Result<Outcome> {
    let mut out = Outcome::default();
    let exact: Option<ProjectedEnsemble> = match c.ensemble {
        DesignEnsembleKind::Stabilizer => Some(ProjectedEnsemble::uniform(stabilizer_states(c.n)?.to_vec())?),
        DesignEnsembleKind::Computational => Some(ProjectedEnsemble::uniform(
            (0..1usize << c.n).map(|i| StateVector::basis(c.n, i)).collect::<Result<_>>()?,
        )?),
        DesignEnsembleKind::Projected => {
            let mut r = stream(cfg, &[rng::tag("projected")]);
            let mut s = StateVector::zero(c.m)?;
            build_brickwork(c.m, c.d, &mut r)?.apply(&mut s)?;
            Some(projected_ensemble(&s, c.n)?)
        }
        DesignEnsembleKind::Haar => None,
    };
    match exact {
        Some(e) => {
            out.put("ensemble_size", json!(e.len()));
            for t in 1..=c.t_max {
                let f = ensemble_frame_potential(&e, t)?;
                let haar = haar_frame_potential(c.n, t);
                out.row("frame-potential", vec![json!(t), json!(f), json!(0.0), json!(haar)]);
                if (c.n * t) <= MAX_MOMENT_DIM.trailing_zeros() as usize {
                    let dist = moment_distance(&e, t)?;
                    out.row("moment-distance", vec![json!(t), json!(dist)]);
                    if (f - haar).abs() < 1e-10 {
                        out.checks.push(Check::at_most(&format!("t{t}_moment_distance"), dist, 1e-10));
                    }
                }
                // The frame potential never undercuts the Haar value.
                out.checks.push(Check::at_least(&format!("t{t}_frame_potential"), f, haar - 1e-12));
            }
        }
        None => {
            let states: Vec<StateVector> = (0..c.samples)
                .into_par_iter()
                .map(|i| sample_haar_state(c.n, &mut stream(cfg, &[i as u64])))
                .collect::<Result<_>>()?;
            for t in 1..=c.t_max {
                let est = frame_potential_estimate(&states, t)?;
                let haar = haar_frame_potential(c.n, t);
                out.row("frame-potential", vec![json!(t), json!(est.value), json!(est.stderr), json!(haar)]);
                out.checks.push(Check::at_most(&format!("t{t}_haar_gap"), (est.value - haar).abs(), 3.0 * est.stderr + 1e-12));
            }
        }
    }
    Ok(out)
}

fn accdim(cfg: &ExperimentConfig, c: &Accdim) -> Result<Outcome> {
    let mut out = Outcome::default();
    let mut ds = c.ds.clone();
    ds.sort_unstable();
    ds.dedup();
    let mut ranks = Vec::new();
    let mut unstable = 0;
    let mut total = 0;
    for &d in &ds {
        let a = accessible_dimension(c.m, c.n, d, &mut stream(cfg, &[d as u64]), c.points)?;
        out.row("ranks", vec![json!(d), json!(a.rank), json!(a.unstable_points()), json!(a.points.len())]);
        unstable += a.unstable_points();
        total += a.points.len();
        ranks.push(a.rank);
        if d == 0 {
            out.checks.push(Check::exact("rank_at_depth_zero", a.rank == 0));
        }
    }
    out.put("max_rank", json!(ranks.iter().max()));
    out.checks.push(Check::exact("monotone_in_depth", ranks.windows(2).all(|w| w[0] <= w[1])));
    out.checks.push(Check::at_most("unstable_fraction", unstable as f64 / total as f64, 0.1));
    Ok(out)
}

fn bounds_table(c: &BoundsTable) -> Result<Outcome> {
    let mut out = Outcome::default();
    for &[m, n, d] in &c.grid {
        let b = complexity_bound(m, n, d);
        out.row(
            "bounds",
            vec![json!(m), json!(n), json!(d), json!(b.thm1_bound), json!(b.l_value), json!(b.in_domain)],
        );
    }
    Ok(out)
}
