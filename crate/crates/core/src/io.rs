//! Text formats: barcode and filtration files, profile and flow-model JSON
//! specs, and canonical JSON emission for estimates and reports.
//!
//! Canonical JSON: keys sorted, floats rounded to 12 significant digits and
//! printed in their shortest round-trip form, no NaN or infinity ever
//! serialized. Identical inputs produce bit-identical output.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bars::{Bar, Barcode};
use crate::entropy::EntropyEstimate;
use crate::error::{Error, Result};
use crate::filtration::{FilteredCell, FilteredComplex};
use crate::lab::{ComparisonReport, Provenance, RatioReport};
use crate::profile::Profile;
use crate::symbolic::{SftFlow, TorusFlow};

// ---------------------------------------------------------------------------
// barcode files: birth<TAB>death<TAB>multiplicity, `inf` for infinite deaths

pub fn parse_barcode(text: &str) -> Result<Barcode> {
    let mut bars = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 3 tab-separated fields, got {}", fields.len()),
            });
        }
        let birth: f64 = fields[0].trim().parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("bad birth {:?}", fields[0]),
        })?;
        let death: f64 = if fields[1].trim() == "inf" {
            f64::INFINITY
        } else {
            fields[1].trim().parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("bad death {:?}", fields[1]),
            })?
        };
        let multiplicity: u64 = fields[2].trim().parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("bad multiplicity {:?}", fields[2]),
        })?;
        if birth.is_nan() || death.is_nan() {
            return Err(Error::Parse {
                line: line_no,
                message: "non-finite endpoint".to_string(),
            });
        }
        if !(death > birth) {
            return Err(Error::Parse {
                line: line_no,
                message: "birth >= death".to_string(),
            });
        }
        bars.push(
            Bar::new(birth, death, multiplicity).map_err(|e| Error::Parse {
                line: line_no,
                message: e.to_string(),
            })?,
        );
    }
    Ok(Barcode::new(bars))
}

pub fn emit_barcode(code: &Barcode) -> String {
    let mut out = String::new();
    for bar in code.bars() {
        out.push_str(&fmt_f64(bar.birth()));
        out.push('\t');
        if bar.is_infinite() {
            out.push_str("inf");
        } else {
            out.push_str(&fmt_f64(bar.death()));
        }
        out.push('\t');
        out.push_str(&bar.multiplicity().to_string());
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// filtration files: id<SP>dim<SP>birth<SP>boundary_id...

pub fn parse_filtration(text: &str) -> Result<FilteredComplex> {
    let mut cells = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 3 {
            return Err(Error::Parse {
                line: line_no,
                message: "expected `id dim birth boundary...`".to_string(),
            });
        }
        let id: usize = fields[0].parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("bad id {:?}", fields[0]),
        })?;
        let dim: u32 = fields[1].parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("bad dimension {:?}", fields[1]),
        })?;
        let birth: f64 = fields[2].parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("bad birth {:?}", fields[2]),
        })?;
        let boundary = fields[3..]
            .iter()
            .map(|f| {
                f.parse().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("bad boundary id {f:?}"),
                })
            })
            .collect::<Result<Vec<usize>>>()?;
        cells.push(FilteredCell {
            id,
            dim,
            birth,
            boundary,
        });
    }
    FilteredComplex::new(cells)
}

pub fn emit_filtration(complex: &FilteredComplex) -> String {
    let mut out = String::new();
    for cell in complex.cells() {
        out.push_str(&cell.id.to_string());
        out.push(' ');
        out.push_str(&cell.dim.to_string());
        out.push(' ');
        out.push_str(&fmt_f64(cell.birth));
        for b in &cell.boundary {
            out.push(' ');
            out.push_str(&b.to_string());
        }
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// profile and flow-model specs (JSON). Unknown keys are hard errors.

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub kind: String,
    pub a: f64,
    pub rmax: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub knots: Option<Vec<(f64, f64)>>,
}

pub fn parse_profile_spec(text: &str) -> Result<Profile> {
    let spec: ProfileSpec = serde_json::from_str(text)?;
    profile_from_spec(&spec)
}

pub fn profile_from_spec(spec: &ProfileSpec) -> Result<Profile> {
    match spec.kind.as_str() {
        "quadratic" => {
            if spec.knots.is_some() {
                return Err(Error::InvalidArgument(
                    "quadratic profiles take no knots".into(),
                ));
            }
            Profile::quadratic(spec.a, spec.rmax)
        }
        "spline" => {
            let knots = spec
                .knots
                .as_ref()
                .ok_or_else(|| Error::InvalidArgument("spline profiles need knots".into()))?;
            Profile::spline(spec.a, spec.rmax, knots)
        }
        other => Err(Error::InvalidArgument(format!(
            "unknown profile kind {other:?}"
        ))),
    }
}

pub fn profile_to_spec(profile: &Profile) -> ProfileSpec {
    ProfileSpec {
        kind: if profile.is_quadratic() {
            "quadratic".to_string()
        } else {
            "spline".to_string()
        },
        a: profile.slope(),
        rmax: profile.rmax(),
        knots: profile.spline_knots(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FlowSpec {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transition: Option<Vec<Vec<u8>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roof: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<[[i64; 2]; 2]>,
}

/// Either kind of flow model a spec file can describe.
#[derive(Debug, Clone)]
pub enum FlowModel {
    Sft(SftFlow),
    Torus(TorusFlow),
}

pub fn parse_flow_spec(text: &str) -> Result<FlowModel> {
    let spec: FlowSpec = serde_json::from_str(text)?;
    flow_from_spec(&spec)
}

pub fn flow_from_spec(spec: &FlowSpec) -> Result<FlowModel> {
    match spec.kind.as_str() {
        "sft" => {
            if spec.matrix.is_some() {
                return Err(Error::InvalidArgument(
                    "sft flows take a transition matrix, not `matrix`".into(),
                ));
            }
            let transition = spec
                .transition
                .as_ref()
                .ok_or_else(|| Error::InvalidArgument("sft flows need `transition`".into()))?;
            let roof = match &spec.roof {
                Some(r) => r.clone(),
                None => vec![1.0; transition.len()],
            };
            Ok(FlowModel::Sft(SftFlow::new(transition, &roof)?))
        }
        "torus" => {
            if spec.transition.is_some() || spec.roof.is_some() {
                return Err(Error::InvalidArgument(
                    "torus flows take only `matrix`".into(),
                ));
            }
            let matrix = spec
                .matrix
                .ok_or_else(|| Error::InvalidArgument("torus flows need `matrix`".into()))?;
            Ok(FlowModel::Torus(TorusFlow::new(matrix)?))
        }
        other => Err(Error::InvalidArgument(format!(
            "unknown flow kind {other:?}"
        ))),
    }
}

// ---------------------------------------------------------------------------
// canonical JSON emission

/// Round to 12 significant digits, then print the shortest representation of
/// the rounded value. Rejects non-finite input.
pub fn fmt_f64(x: f64) -> String {
    if x.is_infinite() || x.is_nan() {
        // callers guard; text formats use the explicit `inf` token instead
        return "inf".to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("rounded float");
    format!("{rounded}")
}

fn number(x: f64) -> Result<Value> {
    if !x.is_finite() {
        return Err(Error::NonFiniteJson(x));
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("rounded float");
    serde_json::Number::from_f64(rounded)
        .map(Value::Number)
        .ok_or(Error::NonFiniteJson(x))
}

/// Serialize a JSON value with sorted keys and canonical floats.
pub fn canonical_json(value: &Value) -> Result<String> {
    let mut out = String::new();
    write_canonical(value, &mut out)?;
    Ok(out)
}

fn write_canonical(value: &Value, out: &mut String) -> Result<()> {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                out.push_str(&i.to_string());
            } else if let Some(u) = n.as_u64() {
                out.push_str(&u.to_string());
            } else {
                let x = n.as_f64().ok_or(Error::NonFiniteJson(f64::NAN))?;
                if !x.is_finite() {
                    return Err(Error::NonFiniteJson(x));
                }
                out.push_str(&fmt_f64(x));
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s)?),
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_canonical(item, out)?;
            }
            out.push(']');
        }
        Value::Object(map) => {
            // serde_json's default map is a BTreeMap: keys already sorted
            out.push('{');
            for (i, (k, v)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(k)?);
                out.push(':');
                write_canonical(v, out)?;
            }
            out.push('}');
        }
    }
    Ok(())
}

fn estimate_value(est: &EntropyEstimate) -> Result<Value> {
    let trace = est
        .trace
        .iter()
        .map(|&(x, y)| Ok(Value::Array(vec![number(x)?, number(y)?])))
        .collect::<Result<Vec<_>>>()?;
    Ok(serde_json::json!({
        "value": number(est.value)?,
        "tail_sup": number(est.tail_sup)?,
        "slope": number(est.slope)?,
        "stable": est.stable,
        "trace": Value::Array(trace),
    }))
}

/// Canonical JSON for a growth-rate estimate.
pub fn emit_estimate(est: &EntropyEstimate) -> Result<String> {
    canonical_json(&estimate_value(est)?)
}

pub fn parse_estimate(text: &str) -> Result<EntropyEstimate> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Raw {
        value: f64,
        tail_sup: f64,
        slope: f64,
        stable: bool,
        trace: Vec<(f64, f64)>,
    }
    let raw: Raw = serde_json::from_str(text)?;
    Ok(EntropyEstimate {
        value: raw.value,
        tail_sup: raw.tail_sup,
        slope: raw.slope,
        stable: raw.stable,
        trace: raw.trace,
    })
}

fn provenance_value(p: &Provenance) -> Result<Value> {
    let taus = p
        .tau_values
        .iter()
        .map(|&t| number(t))
        .collect::<Result<Vec<_>>>()?;
    let eps = p
        .eps_grid
        .iter()
        .map(|&e| number(e))
        .collect::<Result<Vec<_>>>()?;
    let band = match p.band {
        Some((lo, hi)) => Value::Array(vec![number(lo)?, number(hi)?]),
        None => Value::Null,
    };
    let etas = match &p.eta_schedule {
        Some(es) => Value::Array(es.iter().map(|&e| number(e)).collect::<Result<Vec<_>>>()?),
        None => Value::Null,
    };
    Ok(serde_json::json!({
        "flow": p.flow,
        "profile": p.profile,
        "sigma": number(p.sigma)?,
        "bars_per_orbit": p.bars_per_orbit,
        "band": band,
        "eta_schedule": etas,
        "tau_values": Value::Array(taus),
        "eps_grid": Value::Array(eps),
        "tail_fraction": number(p.tail_fraction)?,
    }))
}

/// Canonical JSON for a comparison report.
pub fn emit_report(report: &ComparisonReport) -> Result<String> {
    let ratio = match report.ratio {
        RatioReport::Value(r) => number(r)?,
        RatioReport::UndefinedZeroHtop => Value::String("undefined (htop=0)".to_string()),
    };
    let flags: Value = report
        .inequality_flags
        .iter()
        .map(|(k, v)| (k.clone(), Value::Bool(*v)))
        .collect::<serde_json::Map<String, Value>>()
        .into();
    let value = serde_json::json!({
        "hbar_estimate": estimate_value(&report.hbar_estimate)?,
        "htop_estimate": estimate_value(&report.htop_estimate)?,
        "ratio": ratio,
        "inequality_flags": flags,
        "provenance": provenance_value(&report.provenance)?,
    });
    canonical_json(&value)
}

/// Reparse a report emitted by [`emit_report`]; used for round-trip checks.
pub fn parse_report(text: &str) -> Result<ComparisonReport> {
    let v: Value = serde_json::from_str(text)?;
    let obj = v
        .as_object()
        .ok_or_else(|| Error::InvalidArgument("report must be an object".into()))?;
    let known = [
        "hbar_estimate",
        "htop_estimate",
        "ratio",
        "inequality_flags",
        "provenance",
    ];
    for key in obj.keys() {
        if !known.contains(&key.as_str()) {
            return Err(Error::InvalidArgument(format!(
                "unknown report key {key:?}"
            )));
        }
    }
    let grab = |key: &str| -> Result<&Value> {
        obj.get(key)
            .ok_or_else(|| Error::InvalidArgument(format!("missing report key {key:?}")))
    };
    let hbar = parse_estimate(&serde_json::to_string(grab("hbar_estimate")?)?)?;
    let htop = parse_estimate(&serde_json::to_string(grab("htop_estimate")?)?)?;
    let ratio = match grab("ratio")? {
        Value::Number(n) => RatioReport::Value(n.as_f64().unwrap_or(f64::NAN)),
        Value::String(s) if s == "undefined (htop=0)" => RatioReport::UndefinedZeroHtop,
        other => {
            return Err(Error::InvalidArgument(format!(
                "unexpected ratio {other:?}"
            )))
        }
    };
    let flags = grab("inequality_flags")?
        .as_object()
        .ok_or_else(|| Error::InvalidArgument("flags must be an object".into()))?
        .iter()
        .map(|(k, v)| {
            v.as_bool()
                .map(|b| (k.clone(), b))
                .ok_or_else(|| Error::InvalidArgument("flags must be booleans".into()))
        })
        .collect::<Result<_>>()?;
    let p = grab("provenance")?
        .as_object()
        .ok_or_else(|| Error::InvalidArgument("provenance must be an object".into()))?;
    let f64_list = |v: &Value| -> Vec<f64> {
        v.as_array()
            .map(|a| a.iter().filter_map(Value::as_f64).collect())
            .unwrap_or_default()
    };
    let provenance = Provenance {
        flow: p.get("flow").cloned().unwrap_or(Value::Null),
        profile: p.get("profile").cloned().unwrap_or(Value::Null),
        sigma: p.get("sigma").and_then(Value::as_f64).unwrap_or(f64::NAN),
        bars_per_orbit: p.get("bars_per_orbit").and_then(Value::as_u64).unwrap_or(0) as u32,
        band: p.get("band").and_then(|b| {
            let arr = b.as_array()?;
            Some((arr.first()?.as_f64()?, arr.get(1)?.as_f64()?))
        }),
        eta_schedule: p.get("eta_schedule").and_then(|v| {
            if v.is_null() {
                None
            } else {
                Some(f64_list(v))
            }
        }),
        tau_values: p.get("tau_values").map(f64_list).unwrap_or_default(),
        eps_grid: p.get("eps_grid").map(f64_list).unwrap_or_default(),
        tail_fraction: p
            .get("tail_fraction")
            .and_then(Value::as_f64)
            .unwrap_or(f64::NAN),
    };
    Ok(ComparisonReport {
        hbar_estimate: hbar,
        htop_estimate: htop,
        ratio,
        inequality_flags: flags,
        provenance,
    })
}
