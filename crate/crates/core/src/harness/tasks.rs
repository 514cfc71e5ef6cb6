//! Scene-understanding pipelines on synthetic detections.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::run::RunConfig;
use crate::colour::{
    classify_shirt, insertion_plan, mean_rgb, palette_from_hues, segment_dominant_region, shirt_image, total_order,
    RackSide, SegmentParams, ShirtClass,
};
use crate::geometry::Vec2;
use crate::seats::{analyze_seats, expected_free, seats_points, SeatsParams, SeatsSynth};
use crate::seeding;
use crate::structuring::synth::{corrupt_word, doorbell_detections, grocery_boxes, DoorbellSynth};
use crate::structuring::{
    assign_rows_cols, cluster_detections, finder_proximity, finder_side, grocery_grid, match_keywords, match_name,
    rectify_centers, GridCell, GroceryParams, Side,
};
use crate::touch::{
    fingertip, homography_from_corners, Homography, Phase, ScreenGrid, TouchCue, TouchGuidance, GUIDANCE_PERIOD,
};
use crate::world::{
    ColoursPayload, DoorbellPayload, FinderPayload, GroceryPayload, Scene, SeatsPayload, TouchscreenPayload,
};

#[derive(Debug, Clone, PartialEq)]
pub struct TaskOutcome {
    pub device_success: bool,
    pub pilot_success: bool,
    pub duration_s: f64,
    pub failure_reason: Option<String>,
}

impl TaskOutcome {
    fn device_failure(reason: impl Into<String>, duration_s: f64) -> Self {
        Self {
            device_success: false,
            pilot_success: false,
            duration_s,
            failure_reason: Some(reason.into()),
        }
    }

    /// Device verdict plus a Bernoulli pilot slip.
    fn judged(device_ok: bool, device_reason: &str, pilot_slip: bool, slip_reason: &str, duration_s: f64) -> Self {
        let failure_reason = if !device_ok {
            Some(device_reason.to_string())
        } else if pilot_slip {
            Some(slip_reason.to_string())
        } else {
            None
        };
        Self {
            device_success: device_ok,
            pilot_success: device_ok && !pilot_slip,
            duration_s,
            failure_reason,
        }
    }
}

/// Detections closer than this (pixels) belong to one name plate.
const PLATE_EPS: f64 = 50.0;
const MAX_NAME_DIST: usize = 2;
const MAX_KEYWORD_DIST: usize = 1;

fn maybe_corrupt(word: &str, rate: f64, rng: &mut ChaCha8Rng) -> String {
    if rng.random_bool(rate) {
        corrupt_word(word, rng)
    } else {
        word.to_string()
    }
}

fn row_major(index: usize, cols: usize) -> GridCell {
    GridCell::new(index / cols + 1, index % cols + 1)
}

pub fn doorbell(p: &DoorbellPayload, cfg: &RunConfig, seed: u64) -> TaskOutcome {
    let tm = &cfg.time;
    let mut rng = seeding::rng(seed, 0xDB);
    let mut t = tm.startup_s + tm.capture_s;
    let card = maybe_corrupt(&p.names[p.target], cfg.ocr_error_rate, &mut rng);
    let synth = DoorbellSynth {
        ocr_error_rate: cfg.ocr_error_rate,
        ..DoorbellSynth::default()
    };
    t += tm.walk_s + tm.capture_s;
    let det = doorbell_detections(&p.names, p.rows, p.cols, &synth, seeding::derive(seed, 0xDC));
    let centers: Vec<Vec2> = det.iter().map(|d| d.center).collect();
    let clusters = cluster_detections(&centers, PLATE_EPS);
    let wanted = p.rows * p.cols;
    if clusters.len() != wanted {
        return TaskOutcome::device_failure(format!("found {} plates, expected {wanted}", clusters.len()), t);
    }
    let centroids: Vec<Vec2> = clusters.iter().map(|c| c.centroid).collect();
    let cells = match rectify_centers(&centroids).and_then(|r| assign_rows_cols(&r, p.rows, p.cols, seed)) {
        Ok(c) => c,
        Err(e) => return TaskOutcome::device_failure(format!("grid: {e}"), t),
    };
    let mut best: Option<(usize, usize)> = None;
    for (ci, cluster) in clusters.iter().enumerate() {
        let words: Vec<String> = cluster.members.iter().map(|&i| det[i].text.clone()).collect();
        if let Some((_, d)) = match_name(&words, std::slice::from_ref(&card), MAX_NAME_DIST) {
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, ci));
            }
        }
    }
    t += tm.announce_s;
    let Some((_, ci)) = best else {
        return TaskOutcome::device_failure("no match", t);
    };
    let truth = row_major(p.target, p.cols);
    t += tm.walk_s;
    let slip = rng.random_bool(cfg.pilot_error_rate);
    TaskOutcome::judged(cells[ci] == truth, "wrong plate", slip, "pilot rang the wrong bell", t)
}

pub fn seats(p: &SeatsPayload, scene: &Scene, cfg: &RunConfig, seed: u64) -> TaskOutcome {
    let tm = &cfg.time;
    let rect = scene.boundary();
    let mut t = tm.startup_s + 2.0 * tm.capture_s;
    let points = seats_points(&p.seats, &rect, &SeatsSynth::default(), seeding::derive(seed, 0x5E));
    let report = match analyze_seats(&points, &rect, &SeatsParams::default()) {
        Ok(r) => r,
        Err(e) => return TaskOutcome::device_failure(format!("seats: {e}"), t),
    };
    t += tm.announce_s + tm.walk_s;
    let ok = report.free == expected_free(&p.seats);
    let mut rng = seeding::rng(seed, 0x5F);
    let slip = rng.random_bool(cfg.pilot_error_rate);
    TaskOutcome::judged(
        ok && !report.free.is_empty(),
        "wrong free-seat set",
        slip,
        "pilot sat on a taken seat",
        t,
    )
}

fn read_keywords(keywords: &[String], rate: f64, rng: &mut ChaCha8Rng) -> Vec<String> {
    keywords.iter().map(|k| maybe_corrupt(k, rate, rng)).collect()
}

pub fn grocery(p: &GroceryPayload, cfg: &RunConfig, seed: u64) -> TaskOutcome {
    let tm = &cfg.time;
    let mut rng = seeding::rng(seed, 0x6C);
    let keywords_of = |name: &str| {
        p.dictionaries
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, k)| k.clone())
            .unwrap_or_default()
    };
    let mut t = tm.startup_s + tm.capture_s;
    let label = read_keywords(&keywords_of(&p.target), cfg.ocr_error_rate, &mut rng);
    let Some(wanted) = match_keywords(&label, &p.dictionaries, MAX_KEYWORD_DIST) else {
        return TaskOutcome::device_failure("label not recognised", t);
    };
    t += tm.walk_s;
    let truth = p
        .shelf
        .iter()
        .position(|s| *s == p.target)
        .map(|i| row_major(i, p.cols));
    let pitch = Vec2::new(100.0, 120.0);
    // One picture, then one retry after the "no match" signal.
    for attempt in 0..2u64 {
        t += tm.capture_s;
        let boxes = grocery_boxes(p.rows, p.cols, pitch, 0.1, seeding::derive(seed, 0x6D + attempt));
        let cells = match grocery_grid(&boxes, &GroceryParams::default()) {
            Ok(c) => c,
            Err(e) => return TaskOutcome::device_failure(format!("shelf grid: {e}"), t),
        };
        let hit = p.shelf.iter().enumerate().find_map(|(i, product)| {
            let words = read_keywords(&keywords_of(product), cfg.ocr_error_rate, &mut rng);
            (match_keywords(&words, &p.dictionaries, MAX_KEYWORD_DIST).as_deref() == Some(wanted.as_str())).then_some(i)
        });
        t += tm.announce_s;
        if let Some(i) = hit {
            let slip = rng.random_bool(cfg.pilot_error_rate);
            t += tm.walk_s;
            return TaskOutcome::judged(
                Some(cells[i]) == truth,
                "wrong product",
                slip,
                "pilot took the wrong box",
                t,
            );
        }
    }
    TaskOutcome::device_failure("no match", t)
}

/// Slot index counted from the left for an instruction on an `n`-item rack.
fn slot_from_left(side: RackSide, position: usize, n: usize) -> usize {
    match side {
        RackSide::Left => position - 1,
        RackSide::Right => n + 1 - position,
    }
}

pub fn colours(p: &ColoursPayload, cfg: &RunConfig, seed: u64) -> TaskOutcome {
    let tm = &cfg.time;
    let mut rng = seeding::rng(seed, 0xC0);
    let palette = palette_from_hues(p.base_hues);
    let order = total_order(&palette);
    let mut t = tm.startup_s;
    let mut model: Vec<ShirtClass> = Vec::new();
    let mut device_rack: Vec<ShirtClass> = Vec::new();
    let mut pilot_rack: Vec<ShirtClass> = Vec::new();
    let noise = i16::from(cfg.colour_noise);
    for (k, &(base, level)) in p.arrival.iter().enumerate() {
        let truth = ShirtClass::new(base, level);
        let reference = palette
            .iter()
            .find(|e| e.class == truth)
            .map(|e| e.rgb)
            .unwrap_or([128, 128, 128]);
        let lit = reference.map(|c| (i16::from(c) + rng.random_range(-noise..=noise)).clamp(0, 255) as u8);
        t += tm.capture_s;
        let img = shirt_image(lit, 64, 48, 6, seeding::derive(seed, 0xC100 + k as u64));
        let class = segment_dominant_region(&img, &SegmentParams::default())
            .map_err(|e| e.to_string())
            .and_then(|mask| classify_shirt(mean_rgb(&img, &mask), &palette, 10.0).map_err(|e| e.to_string()));
        let class = match class {
            Ok(c) => c,
            Err(e) => return TaskOutcome::device_failure(format!("shirt {}: {e}", k + 1), t),
        };
        let ins = match insertion_plan(&model, class, &order) {
            Ok(i) => i,
            Err(e) => return TaskOutcome::device_failure(format!("shirt {}: {e}", k + 1), t),
        };
        t += tm.announce_s + tm.hang_s + tm.shift_s * ins.moves as f64;
        model = ins.rack.clone();
        let slot = slot_from_left(ins.side, ins.position, device_rack.len());
        device_rack.insert(slot, truth);
        let mut pilot_slot = slot;
        if !pilot_rack.is_empty() && rng.random_bool(cfg.pilot_error_rate) {
            pilot_slot = if slot == 0 { 1 } else { slot - 1 };
        }
        pilot_rack.insert(pilot_slot.min(pilot_rack.len()), truth);
    }
    let sorted = |r: &[ShirtClass]| r.windows(2).all(|w| w[0] < w[1]);
    let device_ok = sorted(&device_rack);
    TaskOutcome {
        device_success: device_ok,
        pilot_success: device_ok && sorted(&pilot_rack),
        duration_s: t,
        failure_reason: if !device_ok {
            Some("rack out of order".into())
        } else if !sorted(&pilot_rack) {
            Some("pilot hung a shirt in the wrong slot".into())
        } else {
            None
        },
    }
}

pub fn finder(p: &FinderPayload, cfg: &RunConfig, seed: u64) -> TaskOutcome {
    let tm = &cfg.time;
    let mut rng = seeding::rng(seed, 0xF1);
    let noise = Normal::new(0.0, 0.02).expect("finite sigma");
    let seen: Vec<(String, f64)> = p
        .objects
        .iter()
        .map(|(l, x)| (l.clone(), (x + noise.sample(&mut rng)).clamp(0.0, 1.0)))
        .collect();
    let mut t = tm.startup_s + tm.capture_s;
    let side = match finder_side(&seen, &p.target) {
        Ok(s) => s,
        Err(e) => return TaskOutcome::device_failure(format!("finder: {e}"), t),
    };
    let truth = p
        .objects
        .iter()
        .find(|(l, _)| *l == p.target)
        .map(|(_, x)| if *x < 0.5 { Side::Left } else { Side::Right });
    t += tm.announce_s;
    // The pilot turns towards the announced side until the proximity tone
    // reaches its lowest band.
    let target_dir = match side {
        Side::Left => rng.random_range(0.35..1.0),
        Side::Right => -rng.random_range(0.35..1.0),
    };
    let mut pointing: f64 = 0.0;
    let step = 5f64.to_radians();
    for _ in 0..200 {
        if finder_proximity(pointing, target_dir, 12) == 0 {
            break;
        }
        pointing += step * (target_dir - pointing).signum();
        t += 0.5;
    }
    t += tm.walk_s;
    let slip = rng.random_bool(cfg.pilot_error_rate);
    TaskOutcome::judged(
        Some(side) == truth,
        "wrong side",
        slip,
        "pilot picked up the wrong object",
        t,
    )
}

/// Camera view of the screen: image corners for screen corners.
fn camera_corners(base: &[Vec2; 4], rng: &mut ChaCha8Rng, drift: f64) -> [Vec2; 4] {
    base.map(|c| c + Vec2::new(rng.random_range(-drift..=drift), rng.random_range(-drift..=drift)))
}

fn noisy(p: &[Vec2; 4], sigma: f64, rng: &mut ChaCha8Rng) -> [Vec2; 4] {
    let n = Normal::new(0.0, sigma.max(0.0)).expect("finite sigma");
    p.map(|c| {
        if sigma > 0.0 {
            c + Vec2::new(n.sample(rng), n.sample(rng))
        } else {
            c
        }
    })
}

/// Finger silhouette in screen millimetres: a rounded strip extending
/// downwards from the tip.
fn finger_mask(tip: Vec2) -> Vec<Vec2> {
    let mut out = Vec::new();
    for iy in 0..=30 {
        for ix in -7..=7 {
            let (dx, dy) = (f64::from(ix), f64::from(iy) * 2.0);
            if dy >= dx * dx / 14.0 {
                out.push(tip + Vec2::new(dx, dy));
            }
        }
    }
    out
}

/// Fingertip seen through the camera and mapped back to the screen frame.
fn observe_finger(tip: Vec2, cam: &Homography, est: &Homography) -> Option<Vec2> {
    let pixels: Vec<Vec2> = finger_mask(tip)
        .into_iter()
        .filter_map(|p| cam.apply(p).ok())
        .map(|q| Vec2::new(q.x.round(), q.y.round()))
        .filter_map(|q| est.apply(q).ok())
        .collect();
    fingertip(&pixels).ok()
}

fn step_for(band: u8, tol: f64) -> f64 {
    tol * [0.5, 0.8, 2.0, 4.0][usize::from(band.min(3))]
}

pub fn touchscreen(p: &TouchscreenPayload, cfg: &RunConfig, seed: u64) -> TaskOutcome {
    let tm = &cfg.time;
    let mut rng = seeding::rng(seed, 0x70);
    let grid = ScreenGrid {
        size: p.screen,
        rows: p.rows,
        cols: p.cols,
    };
    let screen = grid.corners();
    let scale = 800.0 / p.screen.0.max(p.screen.1);
    let base = camera_corners(
        &screen.map(|c| Vec2::new(300.0, 200.0) + c * scale),
        &mut rng,
        0.05 * 800.0,
    );
    let mut t = tm.startup_s + tm.capture_s;

    // Target found once and kept fixed in the screen frame.
    let cam0 = match homography_from_corners(&screen, &base) {
        Ok(h) => h,
        Err(e) => return TaskOutcome::device_failure(format!("camera: {e}"), t),
    };
    let est0 = match homography_from_corners(&noisy(&base, cfg.corner_noise, &mut rng), &screen) {
        Ok(h) => h,
        Err(e) => return TaskOutcome::device_failure(format!("screen corners: {e}"), t),
    };
    let truth_target = grid.item_center(p.target.0, p.target.1);
    let seen_target = cam0
        .apply(truth_target)
        .and_then(|q| est0.apply(q + Vec2::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0))));
    let target = match seen_target {
        Ok(v) => v,
        Err(e) => return TaskOutcome::device_failure(format!("target: {e}"), t),
    };
    t += tm.announce_s;

    let tol = grid.tolerance();
    let mut guidance = TouchGuidance::new(target, tol);
    let mut finger = p.finger_start;
    let tremor = Normal::new(0.0, 0.1).expect("finite sigma");
    let mut now = 0.0;
    while t + now < cfg.timeout_s {
        let cam = camera_corners(&base, &mut rng, 3.0);
        let detected = noisy(&cam, cfg.corner_noise, &mut rng);
        let seen = homography_from_corners(&screen, &cam)
            .ok()
            .zip(homography_from_corners(&detected, &screen).ok())
            .and_then(|(c, e)| observe_finger(finger, &c, &e));
        let Some(tip) = seen else {
            now += GUIDANCE_PERIOD;
            continue;
        };
        let cue = guidance.step(tip, now).unwrap_or(TouchCue::Silent);
        now += GUIDANCE_PERIOD;
        if guidance.phase == Phase::Select && cue == TouchCue::Select {
            guidance.confirm();
            t += now + tm.select_s;
            let device_ok = grid.cell_at(finger) == Some(p.target);
            let slip = rng.random_bool(cfg.pilot_error_rate);
            return TaskOutcome::judged(
                device_ok,
                "finger guided to the wrong item",
                slip,
                "finger slipped while tapping",
                t,
            );
        }
        let (dir, band) = match cue {
            TouchCue::Left(b) | TouchCue::Right(b) => (0, b),
            TouchCue::Up(b) | TouchCue::Down(b) => (1, b),
            _ => continue,
        };
        let step = step_for(band, if dir == 0 { tol.0 } else { tol.1 });
        let moved = crate::touch::obey(finger, cue, step);
        finger = moved + Vec2::new(tremor.sample(&mut rng), tremor.sample(&mut rng)) * step;
    }
    TaskOutcome::device_failure("timeout", cfg.timeout_s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instruction_slots() {
        assert_eq!(slot_from_left(RackSide::Left, 1, 3), 0);
        assert_eq!(slot_from_left(RackSide::Right, 1, 3), 3);
        assert_eq!(slot_from_left(RackSide::Right, 2, 3), 2);
    }

    #[test]
    fn finger_mask_tip_is_unique_top() {
        let m = finger_mask(Vec2::new(10.0, 20.0));
        assert_eq!(fingertip(&m), Ok(Vec2::new(10.0, 20.0)));
        assert_eq!(m.iter().filter(|p| p.y == 20.0).count(), 1);
    }
}
