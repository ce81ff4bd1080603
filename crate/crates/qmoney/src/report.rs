//! Deterministic experiment reports.
//!
//! Every number in an emitted report is a pure function of the experiment's
//! configuration, so two runs with the same command and seed produce
//! byte-identical output. Wall-clock time is deliberately kept out of the
//! emitted bytes for that reason; the CLI prints it to stderr instead.

use std::fmt::Write as _;
use std::path::PathBuf;

use crate::error::{Error, Result};

/// Output encodings the emitters understand.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(text: &str) -> Result<Format> {
        match text.to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(Error::InvalidArgument(format!(
                "unknown report format {other:?}, expected json or csv"
            ))),
        }
    }
}

impl std::fmt::Display for Format {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Everything an experiment driver needs to know, as parsed from the command
/// line. `variant` selects a sub-mode within a command (for example the
/// attack flavor under `wiesner`); commands without modes leave it empty.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub command: String,
    pub variant: Option<String>,
    pub n: usize,
    pub trials: u64,
    pub epsilon: f64,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub format: Format,
}

impl ExperimentConfig {
    /// Checks the knobs every command shares. Command-specific ranges are
    /// enforced by [`crate::experiments::validate`].
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be finite and positive, got {}",
                self.epsilon
            )));
        }
        if self.n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        Ok(())
    }

    /// Canonical key/value echo of the run configuration. The output path is
    /// excluded on purpose: where a report lands must not change its bytes.
    pub fn echo(&self) -> Vec<(String, String)> {
        let mut pairs = vec![("command".into(), self.command.clone())];
        if let Some(v) = &self.variant {
            pairs.push(("variant".into(), v.clone()));
        }
        pairs.push(("n".into(), self.n.to_string()));
        pairs.push(("trials".into(), self.trials.to_string()));
        pairs.push(("epsilon".into(), fmt12(self.epsilon)));
        pairs.push(("seed".into(), self.seed.to_string()));
        pairs.push(("format".into(), self.format.name().into()));
        pairs
    }
}

/// One reported quantity. Sampled estimates always carry the trial count and
/// a 3-sigma interval; exact values carry neither.
#[derive(Clone, Debug)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    pub ci: Option<(f64, f64)>,
    pub trials: Option<u64>,
}

impl Metric {
    /// A deterministically computed value: no interval, no trial count.
    pub fn exact(name: impl Into<String>, value: f64) -> Metric {
        Metric { name: name.into(), value, ci: None, trials: None }
    }

    /// An empirical success rate with its 3-sigma Bernoulli interval,
    /// clamped to [0, 1].
    pub fn rate(name: impl Into<String>, successes: u64, trials: u64) -> Metric {
        let t = trials.max(1) as f64;
        let p = successes as f64 / t;
        let sigma = (p * (1.0 - p) / t).sqrt();
        Metric {
            name: name.into(),
            value: p,
            ci: Some(((p - 3.0 * sigma).max(0.0), (p + 3.0 * sigma).min(1.0))),
            trials: Some(trials),
        }
    }

    /// A sample mean with a 3-sigma interval from the sample standard error.
    pub fn from_samples(name: impl Into<String>, samples: &[f64]) -> Metric {
        let t = samples.len().max(1) as f64;
        let mean = samples.iter().sum::<f64>() / t;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / t;
        let sigma = (var / t).sqrt();
        Metric {
            name: name.into(),
            value: mean,
            ci: Some((mean - 3.0 * sigma, mean + 3.0 * sigma)),
            trials: Some(samples.len() as u64),
        }
    }

    fn check_finite(&self) -> Result<()> {
        let bad = !self.value.is_finite()
            || self.ci.is_some_and(|(lo, hi)| !lo.is_finite() || !hi.is_finite());
        if bad {
            return Err(Error::InvalidState(format!(
                "metric {} holds a non-finite value",
                self.name
            )));
        }
        Ok(())
    }
}

/// A finished experiment: the configuration echo, the measured metrics, and
/// the library version that produced them. `wall_clock` is carried for the
/// caller's logging but never emitted, keeping reports reproducible.
#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub command: String,
    pub config: Vec<(String, String)>,
    pub metrics: Vec<Metric>,
    pub version: String,
    pub wall_clock: f64,
}

impl ExperimentReport {
    pub fn new(config: &ExperimentConfig, metrics: Vec<Metric>) -> ExperimentReport {
        ExperimentReport {
            command: config.command.clone(),
            config: config.echo(),
            metrics,
            version: crate::VERSION.into(),
            wall_clock: 0.0,
        }
    }

    pub fn metric(&self, name: &str) -> Option<&Metric> {
        self.metrics.iter().find(|m| m.name == name)
    }

    /// Serializes the report. JSON keys appear in a fixed order; CSV is the
    /// header `metric,value,ci_low,ci_high,trials` plus one row per metric.
    pub fn render(&self, format: Format) -> Result<String> {
        for m in &self.metrics {
            m.check_finite()?;
        }
        Ok(match format {
            Format::Json => self.render_json(),
            Format::Csv => self.render_csv(),
        })
    }

    fn render_json(&self) -> String {
        let mut out = String::new();
        out.push_str("{\n");
        let _ = writeln!(out, "  \"command\": {},", json_string(&self.command));
        out.push_str("  \"config\": {\n");
        for (i, (key, value)) in self.config.iter().enumerate() {
            let comma = if i + 1 < self.config.len() { "," } else { "" };
            let _ = writeln!(out, "    {}: {}{comma}", json_string(key), json_string(value));
        }
        out.push_str("  },\n");
        if self.metrics.is_empty() {
            out.push_str("  \"metrics\": [],\n");
        } else {
            out.push_str("  \"metrics\": [\n");
            for (i, m) in self.metrics.iter().enumerate() {
                out.push_str("    {\n");
                let _ = writeln!(out, "      \"name\": {},", json_string(&m.name));
                let tail_comma = m.ci.is_some() || m.trials.is_some();
                let comma = if tail_comma { "," } else { "" };
                let _ = writeln!(out, "      \"value\": {}{comma}", fmt12(m.value));
                if let Some((lo, hi)) = m.ci {
                    let comma = if m.trials.is_some() { "," } else { "" };
                    let _ = writeln!(out, "      \"ci_low\": {},", fmt12(lo));
                    let _ = writeln!(out, "      \"ci_high\": {}{comma}", fmt12(hi));
                }
                if let Some(t) = m.trials {
                    let _ = writeln!(out, "      \"trials\": {t}");
                }
                let comma = if i + 1 < self.metrics.len() { "," } else { "" };
                let _ = writeln!(out, "    }}{comma}");
            }
            out.push_str("  ],\n");
        }
        let _ = writeln!(out, "  \"version\": {}", json_string(&self.version));
        out.push_str("}\n");
        out
    }

    fn render_csv(&self) -> String {
        let mut out = String::from("metric,value,ci_low,ci_high,trials\n");
        for m in &self.metrics {
            let (lo, hi) = match m.ci {
                Some((lo, hi)) => (fmt12(lo), fmt12(hi)),
                None => (String::new(), String::new()),
            };
            let trials = m.trials.map(|t| t.to_string()).unwrap_or_default();
            let _ = writeln!(out, "{},{},{lo},{hi},{trials}", m.name, fmt12(m.value));
        }
        out
    }
}

/// 12 significant digits in scientific notation; valid as a JSON number.
pub fn fmt12(x: f64) -> String {
    format!("{x:.11e}")
}

fn json_string(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}
