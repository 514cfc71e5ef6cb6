use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::navigation::run_navigation;
use super::record::RunRecord;
use super::scenario::Scenario;
use super::tasks::{self, TaskOutcome};
use super::HarnessError;
use crate::seeding;
use crate::world::{BehaviorParams, EdgeSampling, Payload, Scene};

/// Simulated durations of the steps of the scene-understanding tasks.
/// These are calibration knobs for the clock, not measurements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeModel {
    pub startup_s: f64,
    pub capture_s: f64,
    pub announce_s: f64,
    pub walk_s: f64,
    pub hang_s: f64,
    pub shift_s: f64,
    pub select_s: f64,
}

impl Default for TimeModel {
    fn default() -> Self {
        Self {
            startup_s: 10.0,
            capture_s: 3.0,
            announce_s: 2.0,
            walk_s: 8.0,
            hang_s: 6.0,
            shift_s: 1.5,
            select_s: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub behavior: BehaviorParams,
    pub depth_noise: f64,
    pub edge_sampling: EdgeSampling,
    pub inflation_radius: f64,
    pub pilot_radius: f64,
    pub ocr_error_rate: f64,
    pub colour_noise: u8,
    /// Pixel noise on detected screen corners.
    pub corner_noise: f64,
    /// Probability of a pilot execution error per run (per shirt for Colours).
    pub pilot_error_rate: f64,
    pub timeout_s: f64,
    pub time: TimeModel,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            behavior: BehaviorParams::default(),
            depth_noise: 0.01,
            edge_sampling: EdgeSampling::default(),
            inflation_radius: 0.3,
            pilot_radius: 0.25,
            ocr_error_rate: 0.1,
            colour_noise: 5,
            corner_noise: 0.5,
            pilot_error_rate: 0.0,
            timeout_s: 480.0,
            time: TimeModel::default(),
        }
    }
}

pub fn run_scenario(scene: &Scene, config: &RunConfig, seed: u64) -> RunRecord {
    let task = scene.task_kind;
    let outcome = match &scene.payload {
        _ if task.is_navigation() => {
            let nav = run_navigation(scene, config, seed);
            let slip = nav.success && seeding::rng(seed, 0x9A).random_bool(config.pilot_error_rate);
            TaskOutcome {
                device_success: nav.success,
                pilot_success: nav.success && !slip,
                duration_s: nav.duration_s,
                failure_reason: nav.failure_reason.or_else(|| slip.then(|| "pilot strayed".to_string())),
            }
        }
        Payload::Doorbell(p) => tasks::doorbell(p, config, seed),
        Payload::Seats(p) => tasks::seats(p, scene, config, seed),
        Payload::Grocery(p) => tasks::grocery(p, config, seed),
        Payload::Colours(p) => tasks::colours(p, config, seed),
        Payload::Finder(p) => tasks::finder(p, config, seed),
        Payload::Touchscreen(p) => tasks::touchscreen(p, config, seed),
        Payload::None => TaskOutcome {
            device_success: false,
            pilot_success: false,
            duration_s: 0.0,
            failure_reason: Some("scene has no payload for this task".into()),
        },
    };
    let timed_out = outcome.duration_s > config.timeout_s;
    RunRecord {
        task: task.name().to_string(),
        seed,
        device_success: Some(outcome.device_success && !timed_out),
        pilot_success: outcome.pilot_success && !timed_out,
        duration_s: outcome.duration_s.min(config.timeout_s),
        failure_reason: if timed_out {
            Some("timeout".into())
        } else {
            outcome.failure_reason
        },
    }
}

/// One scenario at one seed.
#[derive(Debug, Clone)]
pub struct Job {
    pub scenario: Arc<Scenario>,
    pub seed: u64,
    /// Overrides the scenario's timeout when set.
    pub timeout_s: Option<f64>,
}

impl Job {
    pub fn run(&self) -> Result<RunRecord, HarnessError> {
        let scene = self.scenario.build_scene(self.seed)?;
        let mut config = self.scenario.config();
        if let Some(t) = self.timeout_s {
            config.timeout_s = t;
        }
        Ok(run_scenario(&scene, &config, self.seed))
    }
}

/// Runs every job, on `parallel` worker threads when given. Records come
/// back in job order regardless of scheduling.
pub fn run_batch(jobs: &[Job], parallel: Option<usize>) -> Result<Vec<RunRecord>, HarnessError> {
    let results: Vec<Result<RunRecord, HarnessError>> = match parallel {
        Some(k) if k > 1 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| HarnessError::Internal(e.to_string()))?;
            pool.install(|| jobs.par_iter().map(Job::run).collect())
        }
        _ => jobs.iter().map(Job::run).collect(),
    };
    results.into_iter().collect()
}
