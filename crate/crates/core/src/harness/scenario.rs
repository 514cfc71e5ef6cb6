use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::run::RunConfig;
use super::HarnessError;
use crate::seeding;
use crate::world::{generate_scene, DifficultyParams, Obstacle, Payload, Scene, SceneError, TaskKind, PRODUCTS};

/// A scenario file: `{task, seed, params{...}, ground_truth{...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub task: TaskKind,
    pub seed: u64,
    #[serde(default)]
    pub params: ScenarioParams,
    #[serde(default)]
    pub ground_truth: Option<GroundTruth>,
}

/// Flat optional knobs; anything left out takes the library default.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioParams {
    pub obstacle_count: Option<usize>,
    pub length: Option<f64>,
    pub width: Option<f64>,
    pub yaw_jitter_deg: Option<f64>,
    pub pole_radius: Option<f64>,
    pub pilot_diameter: Option<f64>,
    pub inflation_radius: Option<f64>,
    pub walk_speed: Option<f64>,
    pub turn_rate: Option<f64>,
    pub reaction_delay: Option<f64>,
    pub heading_jitter: Option<f64>,
    pub depth_noise: Option<f64>,
    pub edge_noise: Option<f64>,
    pub outlier_fraction: Option<f64>,
    pub ocr_error_rate: Option<f64>,
    pub colour_noise: Option<u8>,
    pub corner_noise: Option<f64>,
    pub pilot_error_rate: Option<f64>,
    /// Grocery only: remove the target product from the shelf.
    pub target_absent: Option<bool>,
    pub timeout_s: Option<f64>,
}

/// Fixed ground truth replacing the generated obstacles or payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundTruth {
    #[serde(default)]
    pub obstacles: Option<Vec<Obstacle>>,
    #[serde(default)]
    pub payload: Option<Payload>,
}

const SCENE_ATTEMPTS: u64 = 8;

impl Scenario {
    pub fn from_json(text: &str, origin: &str) -> Result<Self, HarnessError> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| HarnessError::schema(origin, e.to_string()))?;
        s.validate(origin)?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let origin = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Internal(format!("{origin}: {e}")))?;
        Self::from_json(&text, &origin)
    }

    pub fn difficulty(&self) -> DifficultyParams {
        let p = &self.params;
        let d = DifficultyParams::default();
        DifficultyParams {
            obstacle_count: p.obstacle_count.or(d.obstacle_count),
            pilot_diameter: p.pilot_diameter.unwrap_or(d.pilot_diameter),
            inflation_radius: p.inflation_radius.unwrap_or(d.inflation_radius),
            pole_radius: p.pole_radius.unwrap_or(d.pole_radius),
            yaw_jitter_deg: p.yaw_jitter_deg.unwrap_or(d.yaw_jitter_deg),
            start_clear: d.start_clear,
            length: p.length.or(d.length),
            width: p.width.or(d.width),
        }
    }

    pub fn config(&self) -> RunConfig {
        let p = &self.params;
        let mut c = RunConfig::default();
        let d = self.difficulty();
        c.pilot_radius = d.pilot_diameter / 2.0;
        c.inflation_radius = d.inflation_radius;
        if let Some(v) = p.walk_speed {
            c.behavior.walk_speed = v;
        }
        if let Some(v) = p.turn_rate {
            c.behavior.turn_rate = v;
        }
        if let Some(v) = p.reaction_delay {
            c.behavior.reaction_delay = v;
        }
        if let Some(v) = p.heading_jitter {
            c.behavior.heading_jitter = v;
        }
        if let Some(v) = p.depth_noise {
            c.depth_noise = v;
        }
        if let Some(v) = p.edge_noise {
            c.edge_sampling.noise_sigma = v;
        }
        if let Some(v) = p.outlier_fraction {
            c.edge_sampling.outlier_fraction = v;
        }
        if let Some(v) = p.ocr_error_rate {
            c.ocr_error_rate = v;
        }
        if let Some(v) = p.colour_noise {
            c.colour_noise = v;
        }
        if let Some(v) = p.corner_noise {
            c.corner_noise = v;
        }
        if let Some(v) = p.pilot_error_rate {
            c.pilot_error_rate = v;
        }
        if let Some(v) = p.timeout_s {
            c.timeout_s = v;
        }
        c
    }

    fn validate(&self, origin: &str) -> Result<(), HarnessError> {
        let p = &self.params;
        let bad = |m: &str| Err(HarnessError::schema(origin, m));
        let non_neg = |v: Option<f64>| v.is_none_or(|x| x.is_finite() && x >= 0.0);
        let positive = |v: Option<f64>| v.is_none_or(|x| x.is_finite() && x > 0.0);
        let rate = |v: Option<f64>| v.is_none_or(|x| (0.0..=1.0).contains(&x));
        if !positive(p.walk_speed) || !positive(p.turn_rate) || !positive(p.timeout_s) {
            return bad("walk_speed, turn_rate and timeout_s must be positive");
        }
        if p.timeout_s.is_some_and(|t| t > 1e5) {
            return bad("timeout_s must be at most 100000");
        }
        if !non_neg(p.reaction_delay) || !non_neg(p.heading_jitter) || !non_neg(p.depth_noise) || !non_neg(p.edge_noise)
        {
            return bad("delays and noise levels must be non-negative");
        }
        if p.depth_noise.is_some_and(|x| x > 1.0) || p.edge_noise.is_some_and(|x| x > 1.0) {
            return bad("depth_noise and edge_noise must be at most 1 m");
        }
        if !non_neg(p.corner_noise) || p.corner_noise.is_some_and(|x| x > 50.0) {
            return bad("corner_noise must be in [0, 50] px");
        }
        if !rate(p.outlier_fraction) || !rate(p.ocr_error_rate) || !rate(p.pilot_error_rate) {
            return bad("fractions and rates must lie in [0, 1]");
        }
        if p.outlier_fraction.is_some_and(|x| x >= 1.0) {
            return bad("outlier_fraction must be below 1");
        }
        if p.target_absent.is_some() && self.task != TaskKind::Grocery {
            return bad("target_absent only applies to Grocery");
        }
        if let Some(gt) = &self.ground_truth {
            if gt.obstacles.is_some() && !self.task.is_navigation() {
                return bad("obstacles only apply to navigation tasks");
            }
            if let Some(obs) = &gt.obstacles {
                if obs.len() > 200 {
                    return bad("at most 200 obstacles");
                }
                for o in obs {
                    if !obstacle_ok(o) {
                        return bad("obstacles need finite coordinates and a radius in (0, 2]");
                    }
                }
            }
            if let Some(payload) = &gt.payload {
                check_payload(self.task, payload).or_else(|m| bad(&m))?;
            }
        }
        // Reject difficulty settings up front so every seed fails the same way.
        let probe = self.difficulty();
        match generate_scene(TaskKind::Doorbell, 0, &probe) {
            Err(SceneError::InvalidParams(m)) => bad(m),
            _ => Ok(()),
        }
    }

    /// Generates the scene for `seed` and applies ground-truth overrides.
    /// A navigation layout that cannot be placed or solved is regenerated
    /// from derived seeds a bounded number of times.
    pub fn build_scene(&self, seed: u64) -> Result<Scene, HarnessError> {
        let params = self.difficulty();
        let mut last = None;
        let mut scene = None;
        for attempt in 0..SCENE_ATTEMPTS {
            let s = if attempt == 0 {
                seed
            } else {
                seeding::derive(seed, 0xA77E_0000 + attempt)
            };
            match generate_scene(self.task, s, &params) {
                Ok(mut sc) => {
                    sc.seed = seed;
                    scene = Some(sc);
                    break;
                }
                Err(SceneError::InvalidParams(m)) => return Err(HarnessError::schema("params", m)),
                Err(e) => last = Some(e),
            }
        }
        let mut scene = scene.ok_or_else(|| {
            HarnessError::Internal(format!(
                "{} seed {seed}: scene generation failed: {}",
                self.task,
                last.map_or_else(String::new, |e| e.to_string())
            ))
        })?;
        if let Some(gt) = &self.ground_truth {
            if let Some(obs) = &gt.obstacles {
                scene.obstacles = obs.clone();
            }
            if let Some(payload) = &gt.payload {
                scene.payload = payload.clone();
            }
        }
        if self.params.target_absent == Some(true) {
            remove_grocery_target(&mut scene);
        }
        Ok(scene)
    }
}

fn obstacle_ok(o: &Obstacle) -> bool {
    match o {
        Obstacle::Disc { center, radius } => center.is_finite() && *radius > 0.0 && *radius <= 2.0,
        Obstacle::Segment { a, b } => a.is_finite() && b.is_finite(),
    }
}

fn check_payload(task: TaskKind, payload: &Payload) -> Result<(), String> {
    let ok = |c: bool, m: &str| if c { Ok(()) } else { Err(m.to_string()) };
    match (task, payload) {
        (TaskKind::Doorbell, Payload::Doorbell(d)) => {
            ok(
                d.rows >= 1 && d.cols >= 1 && d.rows * d.cols <= 64,
                "doorbell grid must be 1..=64 cells",
            )?;
            ok(d.names.len() == d.rows * d.cols, "doorbell needs one name per cell")?;
            ok(d.target < d.names.len(), "doorbell target index out of range")?;
            ok(
                d.names.iter().all(|n| !n.is_empty() && n.len() <= 40),
                "doorbell names must be 1..=40 bytes",
            )
        }
        (TaskKind::Seats, Payload::Seats(s)) => ok(s.seats.len() == 6, "seats payload needs exactly six seats"),
        (TaskKind::Grocery, Payload::Grocery(g)) => {
            ok(
                g.rows >= 1 && g.cols >= 1 && g.rows * g.cols <= 64,
                "shelf must be 1..=64 cells",
            )?;
            ok(g.shelf.len() == g.rows * g.cols, "shelf needs one product per cell")?;
            ok(!g.dictionaries.is_empty(), "grocery needs keyword dictionaries")?;
            let names: HashSet<&str> = g.dictionaries.iter().map(|(n, _)| n.as_str()).collect();
            ok(names.contains(g.target.as_str()), "grocery target has no dictionary")?;
            ok(
                g.shelf.iter().all(|p| names.contains(p.as_str())),
                "every shelf product needs a dictionary",
            )?;
            ok(
                g.dictionaries
                    .iter()
                    .all(|(_, kw)| !kw.is_empty() && kw.iter().all(|k| !k.is_empty())),
                "dictionaries need non-empty keywords",
            )
        }
        (TaskKind::Colours, Payload::Colours(c)) => {
            ok(c.base_hues.iter().all(|h| h.is_finite()), "base hues must be finite")?;
            let mut seen = HashSet::new();
            ok(!c.arrival.is_empty(), "colours needs at least one shirt")?;
            ok(
                c.arrival
                    .iter()
                    .all(|&(b, l)| b <= 1 && (1..=3).contains(&l) && seen.insert((b, l))),
                "shirts are distinct (base 0..=1, level 1..=3)",
            )
        }
        (TaskKind::Finder, Payload::Finder(f)) => {
            ok(!f.objects.is_empty(), "finder needs objects")?;
            ok(
                f.objects.iter().all(|(_, x)| (0.0..=1.0).contains(x)),
                "object positions lie in [0, 1]",
            )
        }
        (TaskKind::Touchscreen, Payload::Touchscreen(t)) => {
            ok(
                t.rows >= 1 && t.cols >= 1 && t.rows <= 20 && t.cols <= 20,
                "screen grid must be 1..=20 per axis",
            )?;
            ok(
                t.screen.0.is_finite() && t.screen.1.is_finite() && t.screen.0 > 0.0 && t.screen.1 > 0.0,
                "screen size must be positive",
            )?;
            ok(
                (1..=t.rows).contains(&t.target.0) && (1..=t.cols).contains(&t.target.1),
                "touchscreen target out of range",
            )?;
            ok(
                t.finger_start.is_finite()
                    && (0.0..=t.screen.0).contains(&t.finger_start.x)
                    && (0.0..=t.screen.1).contains(&t.finger_start.y),
                "finger_start must lie on the screen",
            )
        }
        (_, Payload::None) if task.is_navigation() => Ok(()),
        _ => Err(format!("payload does not match task {task}")),
    }
}

/// Swaps every copy of the target for a product that is not the target.
fn remove_grocery_target(scene: &mut Scene) {
    let Payload::Grocery(g) = &mut scene.payload else {
        return;
    };
    let replacement = g
        .dictionaries
        .iter()
        .map(|(n, _)| n.clone())
        .chain(PRODUCTS.iter().map(|(n, _)| n.to_string()))
        .find(|n| *n != g.target);
    if let Some(r) = replacement {
        for slot in g.shelf.iter_mut().filter(|s| **s == g.target) {
            *slot = r.clone();
        }
        if !g.dictionaries.iter().any(|(n, _)| *n == r) {
            if let Some((_, kw)) = PRODUCTS.iter().find(|(n, _)| *n == r) {
                g.dictionaries
                    .push((r.clone(), kw.iter().map(|k| k.to_string()).collect()));
            }
        }
    }
}
