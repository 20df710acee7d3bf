//! Serialization of reports, tables, and curvature-curve samples.
//!
//! Documents carry a `schema_version`, a metadata block, and one payload.
//! JSON output is canonical: keys sorted lexicographically, no insignificant
//! whitespace, numbers in their shortest round-trip decimal form, so a
//! serialize → parse → serialize cycle is byte-identical. CSV output is
//! comma-separated with a header row, line-feed newlines, `.` decimal
//! points, and the same shortest round-trip number formatting.

use crate::geometry::{Latitude, LatitudeKernel};
use crate::models::{CircleTag, DistortionReport, LatitudeRow};
use crate::oracle::{OracleMethod, OracleResult};
use crate::verify::VerifySummary;
use crate::{Error, Result};
use serde::Serialize;
use std::f64::consts::PI;
use std::io::Write;

/// One point of the curvature curve `sigma(phi, dtheta)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CurveSample {
    pub phi: f64,
    pub dtheta: f64,
    pub sigma: f64,
}

/// For each latitude, `samples` evenly spaced offsets over `[0, pi]`
/// (endpoints included) with the offset distance at each.
pub fn emit_curve(phis: &[Latitude], samples: usize) -> Result<Vec<CurveSample>> {
    if samples < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 samples per curve, got {samples}"
        )));
    }
    let mut out = Vec::with_capacity(phis.len() * samples);
    for &phi in phis {
        let kernel = LatitudeKernel::new(phi);
        for i in 0..samples {
            let dtheta = PI * i as f64 / (samples - 1) as f64;
            out.push(CurveSample {
                phi: phi.value(),
                dtheta,
                sigma: kernel.sigma(dtheta),
            });
        }
    }
    Ok(out)
}

/// Document metadata: what was computed and with which parameters.
#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    /// Document kind: `error`, `quantize`, `oracle`, `curve`, `table`, `verify`.
    pub kind: String,
    /// Tool version that produced the document.
    pub version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub codes: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi0: Option<f64>,
    /// Per-circle sample count `M` for the two-circle model (`points = 2M`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_circle_points: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub restarts: Option<u64>,
    /// Random generator algorithm, when randomness was involved.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rng: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extended: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<String>,
}

impl Metadata {
    pub fn new(kind: &str) -> Self {
        Metadata {
            kind: kind.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            model: None,
            points: None,
            codes: None,
            phi0: None,
            per_circle_points: None,
            method: None,
            seed: None,
            restarts: None,
            rng: None,
            extended: None,
            budget: None,
        }
    }
}

/// The payload of an output document.
#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Payload {
    Report(DistortionReport),
    Table(Vec<LatitudeRow>),
    Curve(Vec<CurveSample>),
    Oracle(OracleResult),
    Verify(VerifySummary),
}

/// A complete output document.
#[derive(Debug, Clone, Serialize)]
pub struct OutputDocument {
    pub schema_version: String,
    pub metadata: Metadata,
    pub payload: Payload,
}

const SCHEMA_VERSION: &str = "1";

fn model_name(report: &DistortionReport) -> &'static str {
    match report.model.kind {
        crate::models::ModelKind::Equator => "equator",
        crate::models::ModelKind::OneSmallCircle => "one-circle",
        crate::models::ModelKind::TwoSmallCircles => "two-circles",
    }
}

impl OutputDocument {
    /// Document for an `error` or `quantize` request (`kind` picks which
    /// tabular rendering CSV uses).
    pub fn for_distortion(kind: &str, report: DistortionReport) -> Self {
        let mut md = Metadata::new(kind);
        md.model = Some(model_name(&report).to_string());
        md.points = Some(report.model.total_points as u64);
        md.codes = Some(report.model.codes as u64);
        md.phi0 = Some(report.model.phi0);
        if report.model.kind == crate::models::ModelKind::TwoSmallCircles {
            md.per_circle_points = Some((report.model.total_points / 2) as u64);
        }
        if report.extended {
            md.extended = Some(true);
        }
        OutputDocument {
            schema_version: SCHEMA_VERSION.to_string(),
            metadata: md,
            payload: Payload::Report(report),
        }
    }

    pub fn for_oracle(
        points: u64,
        phi0: f64,
        seed: Option<u64>,
        restarts: Option<u64>,
        result: OracleResult,
    ) -> Self {
        let mut md = Metadata::new("oracle");
        md.points = Some(points);
        md.codes = Some(result.codebook.len() as u64);
        md.phi0 = Some(phi0);
        md.method = Some(
            match result.method {
                OracleMethod::Dp => "dp",
                OracleMethod::Exhaustive => "exhaustive",
                OracleMethod::Lloyd => "lloyd",
            }
            .to_string(),
        );
        md.seed = seed;
        md.restarts = restarts;
        if seed.is_some() {
            md.rng = Some("chacha8".to_string());
        }
        OutputDocument {
            schema_version: SCHEMA_VERSION.to_string(),
            metadata: md,
            payload: Payload::Oracle(result),
        }
    }

    pub fn for_table(points: u64, codes: u64, rows: Vec<LatitudeRow>) -> Self {
        let mut md = Metadata::new("table");
        md.points = Some(points);
        md.codes = Some(codes);
        OutputDocument {
            schema_version: SCHEMA_VERSION.to_string(),
            metadata: md,
            payload: Payload::Table(rows),
        }
    }

    pub fn for_curve(samples: Vec<CurveSample>) -> Self {
        OutputDocument {
            schema_version: SCHEMA_VERSION.to_string(),
            metadata: Metadata::new("curve"),
            payload: Payload::Curve(samples),
        }
    }

    pub fn for_verify(summary: VerifySummary) -> Self {
        let mut md = Metadata::new("verify");
        md.budget = Some(summary.budget.clone());
        OutputDocument {
            schema_version: SCHEMA_VERSION.to_string(),
            metadata: md,
            payload: Payload::Verify(summary),
        }
    }

    /// Canonical JSON form: sorted keys, compact separators, shortest
    /// round-trip numbers.
    pub fn to_canonical_json(&self) -> Result<String> {
        // Round-tripping through Value sorts object keys (BTreeMap).
        let value = serde_json::to_value(self)?;
        Ok(value.to_string())
    }
}

/// Shortest decimal representation that parses back to exactly `x`.
pub fn format_float(x: f64) -> String {
    format!("{x}")
}

/// Writes the canonical JSON document plus a trailing newline.
pub fn write_json<W: Write>(doc: &OutputDocument, sink: &mut W) -> Result<()> {
    sink.write_all(doc.to_canonical_json()?.as_bytes())?;
    sink.write_all(b"\n")?;
    Ok(())
}

fn tag_name(tag: CircleTag) -> &'static str {
    match tag {
        CircleTag::Upper => "upper",
        CircleTag::Lower => "lower",
        CircleTag::Equator => "equator",
    }
}

/// Writes the tabular rendering of a document: header row, then data rows.
///
/// Errors with `InvalidArgument` when the payload has no tabular form
/// (verification summaries are JSON-only).
pub fn write_csv<W: Write>(doc: &OutputDocument, sink: &mut W) -> Result<()> {
    let mut out = String::new();
    match &doc.payload {
        Payload::Curve(samples) => {
            out.push_str("phi,dtheta,sigma\n");
            for s in samples {
                out.push_str(&format!(
                    "{},{},{}\n",
                    format_float(s.phi),
                    format_float(s.dtheta),
                    format_float(s.sigma)
                ));
            }
        }
        Payload::Table(rows) => {
            out.push_str("phi0,cos2phi0,V_exact,V_asymptotic,reduction_pct\n");
            for r in rows {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    format_float(r.phi0),
                    format_float(r.cos2phi0),
                    format_float(r.v_exact),
                    format_float(r.v_asymptotic),
                    format_float(r.reduction_pct)
                ));
            }
        }
        Payload::Report(report) => {
            if doc.metadata.kind == "quantize" {
                out.push_str("entry,circle,longitude,block_size,block_total\n");
                for (i, e) in report.codebook.entries.iter().enumerate() {
                    let b = &report.per_block[i];
                    out.push_str(&format!(
                        "{},{},{},{},{}\n",
                        i,
                        tag_name(e.circle),
                        format_float(e.longitude),
                        b.size,
                        format_float(b.distortion)
                    ));
                }
            } else {
                out.push_str("model,points,codes,phi0,error\n");
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    model_name(report),
                    report.model.total_points,
                    report.model.codes,
                    format_float(report.model.phi0),
                    format_float(report.error)
                ));
            }
        }
        Payload::Oracle(result) => {
            out.push_str("method,points,codes,phi0,error,iterations,reseed_events\n");
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                doc.metadata.method.as_deref().unwrap_or(""),
                doc.metadata.points.unwrap_or(0),
                result.codebook.len(),
                format_float(doc.metadata.phi0.unwrap_or(0.0)),
                format_float(result.error),
                result.iterations,
                result.reseed_events
            ));
        }
        Payload::Verify(_) => {
            return Err(Error::InvalidArgument(
                "verification summaries have no tabular form; use json".into(),
            ));
        }
    }
    sink.write_all(out.as_bytes())?;
    Ok(())
}
