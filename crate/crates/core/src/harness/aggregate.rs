use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::record::RunRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSummary {
    pub task: String,
    pub runs: usize,
    /// Mean device success in percent; `None` if no run involved the device.
    pub device_pct: Option<f64>,
    pub pilot_pct: f64,
    pub time_mean: f64,
    /// Sample standard deviation; 0 for a single run.
    pub time_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateTable {
    /// Sorted by task name.
    pub tasks: Vec<TaskSummary>,
    /// Mean of the per-task device rates over tasks that involve the device.
    pub overall_device: Option<f64>,
    /// Mean of the per-task pilot rates over all tasks.
    pub overall_pilot: f64,
    /// Sum of the per-task mean times.
    pub total_time: f64,
}

pub fn round_to(x: f64, decimals: i32) -> f64 {
    let s = 10f64.powi(decimals);
    (x * s).round() / s
}

fn sorted_sum(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v.iter().sum()
}

fn summarize(task: &str, runs: &[&RunRecord]) -> TaskSummary {
    let n = runs.len();
    let with_device: Vec<bool> = runs.iter().filter_map(|r| r.device_success).collect();
    let device_pct = (!with_device.is_empty())
        .then(|| 100.0 * with_device.iter().filter(|&&b| b).count() as f64 / with_device.len() as f64);
    let pilot_pct = 100.0 * runs.iter().filter(|r| r.pilot_success).count() as f64 / n as f64;
    let times: Vec<f64> = runs.iter().map(|r| r.duration_s).collect();
    let mean = sorted_sum(times.clone()) / n as f64;
    let time_std = if n < 2 {
        0.0
    } else {
        (sorted_sum(times.iter().map(|t| (t - mean).powi(2)).collect()) / (n - 1) as f64).sqrt()
    };
    TaskSummary {
        task: task.to_string(),
        runs: n,
        device_pct,
        pilot_pct,
        time_mean: mean,
        time_std,
    }
}

/// Overall (device %, pilot %, total time) from per-task summaries.
pub fn overall(tasks: &[TaskSummary]) -> (Option<f64>, f64, f64) {
    let device: Vec<f64> = tasks.iter().filter_map(|t| t.device_pct).collect();
    let overall_device = (!device.is_empty()).then(|| sorted_sum(device.clone()) / device.len() as f64);
    let overall_pilot = if tasks.is_empty() {
        0.0
    } else {
        sorted_sum(tasks.iter().map(|t| t.pilot_pct).collect()) / tasks.len() as f64
    };
    let total_time = sorted_sum(tasks.iter().map(|t| t.time_mean).collect());
    (overall_device, overall_pilot, total_time)
}

/// Per-task means and overall figures. Independent of record order.
pub fn aggregate(records: &[RunRecord]) -> AggregateTable {
    let mut by_task: BTreeMap<&str, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        by_task.entry(r.task.as_str()).or_default().push(r);
    }
    let tasks: Vec<TaskSummary> = by_task.iter().map(|(t, runs)| summarize(t, runs)).collect();
    let (overall_device, overall_pilot, total_time) = overall(&tasks);
    AggregateTable {
        tasks,
        overall_device,
        overall_pilot,
        total_time,
    }
}

impl fmt::Display for AggregateTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pct = |p: Option<f64>| p.map_or_else(|| "-".to_string(), |v| format!("{:.1}", round_to(v, 1)));
        writeln!(
            f,
            "{:<14} {:>5} {:>10} {:>10} {:>16}",
            "Task", "Runs", "Device [%]", "Pilot [%]", "Time [s]"
        )?;
        for t in &self.tasks {
            let time = format!("{:.1} ± {:.1}", round_to(t.time_mean, 1), round_to(t.time_std, 1));
            writeln!(
                f,
                "{:<14} {:>5} {:>10} {:>10} {:>16}",
                t.task,
                t.runs,
                pct(t.device_pct),
                pct(Some(t.pilot_pct)),
                time
            )?;
        }
        let runs: usize = self.tasks.iter().map(|t| t.runs).sum();
        writeln!(
            f,
            "{:<14} {:>5} {:>10} {:>10} {:>16}",
            "All",
            runs,
            pct(self.overall_device),
            pct(Some(self.overall_pilot)),
            format!("{:.0}", round_to(self.total_time, 0))
        )
    }
}
