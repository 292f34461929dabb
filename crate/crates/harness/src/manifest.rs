//! Run manifest: config snapshot, timing and per-point status.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct PointRecord {
    pub index: usize,
    pub point: String,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub experiment: String,
    pub config: BTreeMap<String, String>,
    pub resolved: serde_json::Value,
    pub started_unix_s: u64,
    pub wall_clock_s: f64,
    pub outputs: Vec<String>,
    pub points_ok: usize,
    pub points_failed: usize,
    pub points: Vec<PointRecord>,
}

impl RunManifest {
    pub fn new(experiment: &str, config: BTreeMap<String, String>, resolved: serde_json::Value) -> Self {
        let started = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            tool: "starkqfi",
            version: env!("CARGO_PKG_VERSION"),
            experiment: experiment.to_string(),
            config,
            resolved,
            started_unix_s: started,
            wall_clock_s: 0.0,
            outputs: vec![],
            points_ok: 0,
            points_failed: 0,
            points: vec![],
        }
    }

    pub fn record<T>(&mut self, point: String, result: &Result<T, String>) {
        let index = self.points.len();
        let (status, reason) = match result {
            Ok(_) => {
                self.points_ok += 1;
                ("ok", None)
            }
            Err(e) => {
                self.points_failed += 1;
                ("failed", Some(e.clone()))
            }
        };
        self.points.push(PointRecord {
            index,
            point,
            status,
            reason,
        });
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        std::fs::write(path, text + "\n")
    }
}
