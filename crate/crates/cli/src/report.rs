//! Machine-readable outputs: run configuration, CSV/JSON constant
//! reports, and the JSON wire format for expansions.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use laplace_expansions::{CoefficientTable, Expansion, ExpansionKind, Vec3};

use crate::experiments::{Chain, ConstantReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
        }
    }
}

impl FromStr for ReportFormat {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(anyhow!("unknown format '{other}' (expected csv or json)")),
        }
    }
}

/// Configuration for a table run; the JSON schema mirrors the field
/// names. Unknown keys are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_chains")]
    pub chains: Vec<Chain>,
    #[serde(default = "default_orders")]
    pub orders: Vec<u32>,
    #[serde(default = "default_samples")]
    pub samples_per_cell: u32,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_size_scale")]
    pub size_scale: f64,
    #[serde(default)]
    pub output_path: Option<String>,
    #[serde(default = "default_format")]
    pub format: ReportFormat,
}

fn default_chains() -> Vec<Chain> {
    Chain::all().to_vec()
}
fn default_orders() -> Vec<u32> {
    vec![3, 5, 10]
}
fn default_samples() -> u32 {
    200
}
fn default_seed() -> u64 {
    1
}
fn default_size_scale() -> f64 {
    1.0
}
fn default_format() -> ReportFormat {
    ReportFormat::Csv
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            chains: default_chains(),
            orders: default_orders(),
            samples_per_cell: default_samples(),
            seed: default_seed(),
            size_scale: default_size_scale(),
            output_path: None,
            format: default_format(),
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let config: RunConfig = serde_json::from_str(&text)
            .with_context(|| format!("invalid config {}", path.display()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.chains.is_empty() {
            bail!("chain list must not be empty");
        }
        if self.orders.is_empty() {
            bail!("order set must not be empty");
        }
        if self.samples_per_cell == 0 {
            bail!("samples_per_cell must be at least 1");
        }
        if !self.size_scale.is_finite() || self.size_scale <= 0.0 {
            bail!("size_scale must be positive and finite");
        }
        Ok(())
    }
}

/// Formats with 17 significant digits, enough to reproduce the f64.
pub fn format_g17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Renders a constant report as RFC-4180 CSV: one row per order cell
/// under a `chain,p,q,samples,max_ratio,mean_ratio,seed` header.
pub fn report_to_csv(report: &ConstantReport) -> String {
    let mut out = String::from("chain,p,q,samples,max_ratio,mean_ratio,seed\r\n");
    for cell in &report.cells {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\r\n",
            report.chain,
            cell.p,
            cell.q,
            cell.samples,
            format_g17(cell.max_ratio),
            format_g17(cell.mean_ratio),
            report.seed
        ));
    }
    out
}

/// Writes a report as CSV or JSON (JSON mirrors the report's field
/// names). I/O failures carry the path.
pub fn write_report(report: &ConstantReport, path: &Path, format: ReportFormat) -> Result<()> {
    let payload = match format {
        ReportFormat::Csv => report_to_csv(report),
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).context("serializing report")?;
            s.push('\n');
            s
        }
    };
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .with_context(|| format!("cannot create directory {}", parent.display()))?;
        }
    }
    fs::write(path, payload).with_context(|| format!("cannot write report {}", path.display()))
}

pub fn read_report_json(path: &Path) -> Result<ConstantReport> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read report {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("invalid report {}", path.display()))
}

/// Expansion wire format:
/// `{kind, center, order, radius, coefficients}` with coefficients as
/// `[re, im]` pairs in `(n, m)` row-major order.
pub fn expansion_to_json(e: &Expansion) -> Value {
    let kind = match e.kind() {
        ExpansionKind::Local => "local",
        ExpansionKind::Multipole => "multipole",
    };
    let coefficients: Vec<Value> = e
        .coefficients()
        .entries()
        .iter()
        .map(|c| json!([c.re, c.im]))
        .collect();
    json!({
        "kind": kind,
        "center": [e.center().x, e.center().y, e.center().z],
        "order": e.order(),
        "radius": e.radius(),
        "coefficients": coefficients,
    })
}

pub fn expansion_from_json(value: &Value) -> Result<Expansion> {
    let kind = match value
        .get("kind")
        .and_then(Value::as_str)
        .context("expansion JSON needs a 'kind' string")?
    {
        "local" => ExpansionKind::Local,
        "multipole" => ExpansionKind::Multipole,
        other => bail!("unknown expansion kind '{other}'"),
    };
    let center = value
        .get("center")
        .and_then(Value::as_array)
        .filter(|a| a.len() == 3)
        .context("expansion JSON needs a 3-element 'center'")?;
    let center = Vec3::new(
        center[0].as_f64().context("center[0]")?,
        center[1].as_f64().context("center[1]")?,
        center[2].as_f64().context("center[2]")?,
    );
    let order = value
        .get("order")
        .and_then(Value::as_u64)
        .context("expansion JSON needs an integer 'order'")? as u32;
    let radius = value
        .get("radius")
        .and_then(Value::as_f64)
        .context("expansion JSON needs a numeric 'radius'")?;
    let raw = value
        .get("coefficients")
        .and_then(Value::as_array)
        .context("expansion JSON needs a 'coefficients' array")?;
    let mut entries = Vec::with_capacity(raw.len());
    for pair in raw {
        let pair = pair.as_array().filter(|a| a.len() == 2).context("coefficient pair")?;
        entries.push(Complex64::new(
            pair[0].as_f64().context("re")?,
            pair[1].as_f64().context("im")?,
        ));
    }
    let table = CoefficientTable::from_entries(order, entries)
        .map_err(|e| anyhow!("bad coefficient table: {e}"))?;
    Expansion::new(kind, center, order, radius, table).map_err(|e| anyhow!("bad expansion: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::estimate_constant;
    use laplace_expansions::expansion::s2l;

    #[test]
    fn config_defaults_and_validation() {
        let config: RunConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(config, RunConfig::default());
        assert_eq!(config.orders, vec![3, 5, 10]);
        assert_eq!(config.samples_per_cell, 200);
        assert!(config.validate().is_ok());

        let bad: Result<RunConfig, _> = serde_json::from_str(r#"{"chans": []}"#);
        assert!(bad.is_err(), "unknown keys must be rejected");

        let empty: RunConfig = serde_json::from_str(r#"{"chains": []}"#).unwrap();
        assert!(empty.validate().is_err());
    }

    #[test]
    fn csv_shape() {
        let report = estimate_constant(Chain::S2M2L, &[3, 5], 3, 9, 1.0).unwrap();
        let csv = report_to_csv(&report);
        let lines: Vec<&str> = csv.trim_end().split("\r\n").collect();
        assert_eq!(lines.len(), 1 + 4, "header plus |orders|^2 rows");
        assert_eq!(lines[0], "chain,p,q,samples,max_ratio,mean_ratio,seed");
        for line in &lines[1..] {
            assert_eq!(line.split(',').count(), 7);
            assert!(line.starts_with("S2M2L,"));
        }
    }

    #[test]
    fn report_json_roundtrip() {
        let report = estimate_constant(Chain::M2L2L, &[3], 4, 5, 1.0).unwrap();
        let text = serde_json::to_string(&report).unwrap();
        let back: ConstantReport = serde_json::from_str(&text).unwrap();
        assert_eq!(report, back);
    }

    #[test]
    fn expansion_json_roundtrip() {
        let e = s2l(Vec3::new(1.0, -2.0, 0.5), 1.25, Vec3::new(0.1, 0.0, -0.2), 5).unwrap();
        let value = expansion_to_json(&e);
        assert_eq!(value["kind"], "local");
        assert_eq!(value["coefficients"].as_array().unwrap().len(), 36);
        let back = expansion_from_json(&value).unwrap();
        assert_eq!(back.order(), e.order());
        assert_eq!(back.center(), e.center());
        assert_eq!(back.radius(), e.radius());
        assert_eq!(back.coefficients().entries(), e.coefficients().entries());
    }

    #[test]
    fn g17_reproduces_doubles() {
        for &x in &[0.1, 2.0 / 3.0, 1.2345678901234567e-7, 6.25e-2] {
            let s = format_g17(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back, x, "{s}");
        }
    }
}
