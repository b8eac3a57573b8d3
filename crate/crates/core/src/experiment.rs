//! Monte Carlo memory and surgery experiments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;

use crate::circuit::{build_circuit, Basis, Circuit, Init};
use crate::decoder::{build_matching_graph, decode, logical_failure, MatchingGraph};
use crate::error::{Error, Result};
use crate::lattice::{GeometryKind, GeometrySpec, SpacetimeLattice};
use crate::noise::NoiseParams;
use crate::observables::{default_observables, parity, surgery_outcome_labels};
use crate::sampler::FrameSampler;
use crate::stabilizer::symbolic_run;
use crate::syndrome::{build_detector_graph_with, DetectorGraph};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub geometry: GeometrySpec,
    pub noise: NoiseParams,
    pub shots: u64,
    pub seed: u64,
    /// Worker threads; 0 uses the rayon default.
    #[serde(default)]
    pub workers: usize,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.shots == 0 {
            return Err(Error::Config("shots must be at least 1".into()));
        }
        self.noise.validate()?;
        SpacetimeLattice::new(self.geometry)?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub geometry: GeometrySpec,
    pub noise: NoiseParams,
    pub shots: u64,
    pub seed: u64,
    /// Shots of the Z-basis run with any logical failure.
    pub fails_z: u64,
    /// Shots of the X-basis run with any logical failure.
    pub fails_x: u64,
    /// Failures per observable, Z run then X run.
    pub per_observable: Vec<(String, u64)>,
    /// Wilson 95% interval of `(fails_z + fails_x) / (2 shots)`.
    pub ci: (f64, f64),
    /// Decoded surgery outcome classes `[M0, M1]` for the Z and X runs.
    pub classes: Option<[[u64; 2]; 2]>,
    pub wall_seconds: f64,
}

impl Stats {
    pub fn failure_rate(&self) -> f64 {
        (self.fails_z + self.fails_x) as f64 / (2 * self.shots) as f64
    }

    pub const CSV_HEADER: &'static str =
        "geometry,L1,L2,rounds,p_gate,p_idle,p_meas,p_prep,shots,fails_Z,fails_X,ci_low,ci_high,seed,wall_seconds";

    pub fn csv_row(&self) -> String {
        let g = &self.geometry;
        let n = &self.noise;
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{:.6e},{:.6e},{},{:.3}",
            g.kind, g.l1, g.l2, g.rounds, n.p_gate, n.p_idle, n.p_meas, n.p_prep, self.shots, self.fails_z,
            self.fails_x, self.ci.0, self.ci.1, self.seed, self.wall_seconds
        )
    }
}

/// Wilson score interval at 95% confidence.
pub fn wilson_interval(k: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054_f64;
    let n = n as f64;
    let p = k as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Everything needed to score shots of one circuit.
pub struct Prepared {
    pub circuit: Circuit,
    pub graph: DetectorGraph,
    pub matching: MatchingGraph,
    /// Index of the surgery outcome observable, if tracked.
    pub outcome: Option<usize>,
    /// Coins of the noiseless outcome parity and its constant.
    outcome_ref: (Vec<usize>, bool),
}

pub fn prepare(spec: GeometrySpec, basis: Basis) -> Result<Prepared> {
    let lat = SpacetimeLattice::new(spec)?;
    let init = match basis {
        Basis::Z => Init::Z,
        Basis::X => Init::X,
    };
    let circuit = build_circuit(&lat, Some(init), Some(basis))?;
    let mut obs = default_observables(&circuit)?;
    let mut outcome = None;
    let mut outcome_ref = (vec![], false);
    if spec.kind == GeometryKind::Surgery {
        let m = surgery_outcome_labels(&circuit)?;
        let p = parity(&symbolic_run(&circuit), &m.labels);
        outcome_ref = (p.coin_indices(), p.constant);
        outcome = Some(obs.len());
        obs.push(m);
    }
    let graph = build_detector_graph_with(&circuit, obs)?;
    let matching = build_matching_graph(&graph)?;
    Ok(Prepared { circuit, graph, matching, outcome, outcome_ref })
}

#[derive(Clone, Debug, Default)]
struct Tally {
    fails: u64,
    per_obs: Vec<u64>,
    classes: [u64; 2],
}

impl Tally {
    fn merge(mut self, o: Tally) -> Tally {
        self.fails += o.fails;
        if self.per_obs.len() < o.per_obs.len() {
            self.per_obs.resize(o.per_obs.len(), 0);
        }
        for (a, b) in self.per_obs.iter_mut().zip(&o.per_obs) {
            *a += b;
        }
        self.classes[0] += o.classes[0];
        self.classes[1] += o.classes[1];
        self
    }
}

fn run_shots(p: &Prepared, noise: &NoiseParams, shots: u64, seed: u64) -> Result<Tally> {
    let sampler = FrameSampler::new(&p.circuit, noise, &p.graph);
    let batches = shots.div_ceil(64);
    let nobs = p.graph.observables.len();
    (0..batches)
        .into_par_iter()
        .map(|b| -> Result<Tally> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let batch = sampler.sample(&mut rng);
            let lanes = (shots - 64 * b).min(64) as u32;
            let mut t = Tally { per_obs: vec![0; nobs], ..Default::default() };
            for lane in 0..lanes {
                let truth = batch.truth(lane);
                let dr = decode(&p.matching, &batch.fired(&p.graph, lane))?;
                let fail = logical_failure(&dr, truth);
                if fail != 0 {
                    t.fails += 1;
                }
                for (k, c) in t.per_obs.iter_mut().enumerate() {
                    *c += (fail >> k) & 1;
                }
                if let Some(k) = p.outcome {
                    // noiseless outcome drawn from its coins, then the measured flip and the correction
                    let (coins, constant) = &p.outcome_ref;
                    let mut m = *constant;
                    for _ in coins {
                        m ^= rng.gen::<bool>();
                    }
                    let decoded = m ^ ((truth >> k) & 1 == 1) ^ ((dr.predicted >> k) & 1 == 1);
                    t.classes[decoded as usize] += 1;
                }
            }
            Ok(t)
        })
        .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))
}

fn run_both(cfg: &ExperimentConfig) -> Result<Stats> {
    cfg.validate()?;
    let start = Instant::now();
    let mut fails = [0u64; 2];
    let mut per_observable = Vec::new();
    let mut classes = [[0u64; 2]; 2];
    for (i, basis) in [Basis::Z, Basis::X].into_iter().enumerate() {
        let p = prepare(cfg.geometry, basis)?;
        let t = run_shots(&p, &cfg.noise, cfg.shots, cfg.seed.wrapping_add(i as u64))?;
        fails[i] = t.fails;
        classes[i] = t.classes;
        for (o, c) in p.graph.observables.iter().zip(&t.per_obs) {
            per_observable.push((o.name.clone(), *c));
        }
    }
    let surgery = cfg.geometry.kind == GeometryKind::Surgery;
    Ok(Stats {
        geometry: cfg.geometry,
        noise: cfg.noise,
        shots: cfg.shots,
        seed: cfg.seed,
        fails_z: fails[0],
        fails_x: fails[1],
        per_observable,
        ci: wilson_interval(fails[0] + fails[1], 2 * cfg.shots),
        classes: surgery.then_some(classes),
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

fn in_pool<T: Send>(workers: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    if workers == 0 {
        return f();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("workers: {e}")))?;
    pool.install(f)
}

pub fn run_memory_experiment(cfg: &ExperimentConfig) -> Result<Stats> {
    if cfg.geometry.kind == GeometryKind::Surgery {
        return Err(Error::Config("geometry: memory needs torus or rectangle".into()));
    }
    in_pool(cfg.workers, || run_both(cfg))
}

pub fn run_surgery_experiment(cfg: &ExperimentConfig) -> Result<Stats> {
    if cfg.geometry.kind != GeometryKind::Surgery {
        return Err(Error::Config("geometry: surgery experiment needs the surgery geometry".into()));
    }
    in_pool(cfg.workers, || run_both(cfg))
}
