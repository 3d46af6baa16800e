//! Console progress output.

use std::io::Write;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use eonsim_core::engine::Observer;
use eonsim_core::report::SimulationReport;

/// A line sink shared by parallel runs; each line is written whole.
pub type SharedWriter = Arc<Mutex<dyn Write + Send>>;

pub fn stdout_writer() -> SharedWriter {
    Arc::new(Mutex::new(std::io::stdout()))
}

/// Writes the start, progress and summary lines of one run.
pub struct ConsoleObserver {
    out: SharedWriter,
    per_bitrate: bool,
    started: Option<Instant>,
}

impl ConsoleObserver {
    pub fn new(out: SharedWriter, per_bitrate: bool) -> Self {
        Self {
            out,
            per_bitrate,
            started: None,
        }
    }

    fn emit(&self, lines: &[String]) {
        let mut out = self.out.lock().unwrap_or_else(|p| p.into_inner());
        for l in lines {
            // Console output is best effort.
            let _ = writeln!(out, "{l}");
        }
        let _ = out.flush();
    }
}

impl Observer for ConsoleObserver {
    fn on_start(&mut self, report: &SimulationReport) {
        self.started = Some(Instant::now());
        self.emit(&[report.header_line()]);
    }

    fn on_progress(&mut self, report: &SimulationReport) {
        self.emit(&[report.progress_line()]);
    }

    fn on_finish(&mut self, report: &SimulationReport) {
        let mut r = report.clone();
        r.wall_clock_seconds = self.started.map_or(0.0, |t| t.elapsed().as_secs_f64());
        let mut lines = vec![r.summary_line()];
        if self.per_bitrate {
            lines.extend(r.bitrate_lines());
        }
        self.emit(&lines);
    }
}
