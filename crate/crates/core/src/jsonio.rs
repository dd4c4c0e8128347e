//! Deterministic serialization: 17-significant-digit floats everywhere, fixed
//! field order, streamable JSONL records. serde_json handles parsing; writing
//! goes through a small builder so output bytes are a pure function of the
//! data.

use serde_json::Value;

use crate::experiments::{CouplingStats, MassStats, Mode, Summary, TrialRecord};

/// 17 significant digits: round-trip exact for f64.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "null".to_string()
    } else if x > 0.0 {
        "1e999".to_string()
    } else {
        "-1e999".to_string()
    }
}

/// JSON tree with deterministic rendering.
pub enum Jv {
    Null,
    Bool(bool),
    Int(u64),
    Num(f64),
    Str(String),
    Arr(Vec<Jv>),
    Obj(Vec<(&'static str, Jv)>),
}

impl Jv {
    pub fn render(&self, out: &mut String) {
        match self {
            Jv::Null => out.push_str("null"),
            Jv::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Jv::Int(i) => out.push_str(&i.to_string()),
            Jv::Num(x) => out.push_str(&fmt_f64(*x)),
            Jv::Str(s) => {
                out.push('"');
                for c in s.chars() {
                    match c {
                        '"' => out.push_str("\\\""),
                        '\\' => out.push_str("\\\\"),
                        '\n' => out.push_str("\\n"),
                        c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
                        c => out.push(c),
                    }
                }
                out.push('"');
            }
            Jv::Arr(items) => {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    item.render(out);
                }
                out.push(']');
            }
            Jv::Obj(fields) => {
                out.push('{');
                for (i, (k, v)) in fields.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push('"');
                    out.push_str(k);
                    out.push_str("\":");
                    v.render(out);
                }
                out.push('}');
            }
        }
    }

    pub fn to_string(&self) -> String {
        let mut s = String::new();
        self.render(&mut s);
        s
    }
}

fn num_array(xs: &[f64]) -> Jv {
    Jv::Arr(xs.iter().map(|&x| Jv::Num(x)).collect())
}

fn opt_num(x: Option<f64>) -> Jv {
    match x {
        Some(v) => Jv::Num(v),
        None => Jv::Null,
    }
}

fn opt_bool(x: Option<bool>) -> Jv {
    match x {
        Some(v) => Jv::Bool(v),
        None => Jv::Null,
    }
}

/// One record as a JSONL line (no trailing newline).
pub fn record_to_line(r: &TrialRecord) -> String {
    Jv::Obj(vec![
        ("trial_index", Jv::Int(r.trial_index)),
        ("derived_seed", Jv::Int(r.derived_seed)),
        ("top_v", num_array(&r.top_v)),
        ("top_mu", num_array(&r.top_mu)),
        ("vector_masses", num_array(&r.vector_masses)),
        ("max_off_mass", num_array(&r.max_off_mass)),
        (
            "off_mass_block",
            Jv::Arr(r.off_mass_block.iter().map(|row| num_array(row)).collect()),
        ),
        ("l_hat", opt_num(r.l_hat)),
    ])
    .to_string()
}

#[derive(Debug, thiserror::Error)]
#[error("record schema violation: {0}")]
pub struct SchemaError(pub String);

const RECORD_FIELDS: [&str; 8] = [
    "trial_index",
    "derived_seed",
    "top_v",
    "top_mu",
    "vector_masses",
    "max_off_mass",
    "off_mass_block",
    "l_hat",
];

fn field_f64_array(v: &Value, key: &str) -> Result<Vec<f64>, SchemaError> {
    v.get(key)
        .and_then(Value::as_array)
        .ok_or_else(|| SchemaError(format!("field `{key}` missing or not an array")))?
        .iter()
        .map(|x| x.as_f64().ok_or_else(|| SchemaError(format!("non-numeric entry in `{key}`"))))
        .collect()
}

/// Strict parse of one JSONL record line.
pub fn record_from_line(line: &str) -> Result<TrialRecord, SchemaError> {
    let v: Value = serde_json::from_str(line)
        .map_err(|e| SchemaError(format!("invalid JSON: {e}")))?;
    let obj = v.as_object().ok_or_else(|| SchemaError("record line is not an object".into()))?;
    for key in obj.keys() {
        if !RECORD_FIELDS.contains(&key.as_str()) {
            return Err(SchemaError(format!("unexpected field `{key}`")));
        }
    }
    for key in RECORD_FIELDS {
        if !obj.contains_key(key) {
            return Err(SchemaError(format!("missing field `{key}`")));
        }
    }
    let trial_index = v["trial_index"]
        .as_u64()
        .ok_or_else(|| SchemaError("`trial_index` is not an unsigned integer".into()))?;
    let derived_seed = v["derived_seed"]
        .as_u64()
        .ok_or_else(|| SchemaError("`derived_seed` is not an unsigned integer".into()))?;
    let block = v["off_mass_block"]
        .as_array()
        .ok_or_else(|| SchemaError("`off_mass_block` is not an array".into()))?
        .iter()
        .map(|row| {
            row.as_array()
                .ok_or_else(|| SchemaError("`off_mass_block` row is not an array".into()))?
                .iter()
                .map(|x| {
                    x.as_f64().ok_or_else(|| SchemaError("non-numeric block entry".into()))
                })
                .collect::<Result<Vec<f64>, _>>()
        })
        .collect::<Result<Vec<Vec<f64>>, _>>()?;
    let l_hat = match &v["l_hat"] {
        Value::Null => None,
        x => Some(x.as_f64().ok_or_else(|| SchemaError("`l_hat` is not a number".into()))?),
    };
    Ok(TrialRecord {
        trial_index,
        derived_seed,
        top_v: field_f64_array(&v, "top_v")?,
        top_mu: field_f64_array(&v, "top_mu")?,
        vector_masses: field_f64_array(&v, "vector_masses")?,
        max_off_mass: field_f64_array(&v, "max_off_mass")?,
        off_mass_block: block,
        l_hat,
    })
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Weibull => "weibull",
        Mode::Eigenvector => "eigenvector",
        Mode::GaussianEdge => "gaussian-edge",
        Mode::LocalLaw => "local-law",
    }
}

fn coupling_jv(c: &CouplingStats) -> Jv {
    Jv::Obj(vec![
        ("k", Jv::Int(c.k as u64)),
        ("median", Jv::Num(c.median)),
        ("q90", Jv::Num(c.q90)),
        ("ratio_to_v_std", Jv::Num(c.ratio_to_v_std)),
    ])
}

fn mass_jv(m: &MassStats) -> Jv {
    Jv::Obj(vec![
        ("target_mass", opt_num(m.target_mass)),
        ("mass_mean", num_array(&m.mass_mean)),
        ("mass_std", num_array(&m.mass_std)),
        ("mass_band_fraction", num_array(&m.mass_band_fraction)),
        ("off_mass_violation_fraction", num_array(&m.off_mass_violation_fraction)),
        ("residual_mass_mean", num_array(&m.residual_mass_mean)),
        ("residual_mass_target", Jv::Num(m.residual_mass_target)),
        ("block_off_mass_mean", num_array(&m.block_off_mass_mean)),
        ("block_off_mass_predicted", num_array(&m.block_off_mass_predicted)),
        ("max_off_mass_mean", num_array(&m.max_off_mass_mean)),
    ])
}

/// Summary as a deterministic JSON document.
pub fn summary_to_json(s: &Summary) -> String {
    let mut doc = Jv::Obj(vec![
        ("mode", Jv::Str(mode_name(s.mode).to_string())),
        ("n", Jv::Int(s.n as u64)),
        ("lambda", Jv::Num(s.lambda)),
        ("trials_recorded", Jv::Int(s.trials_recorded as u64)),
        ("measure_mean", Jv::Num(s.measure_mean)),
        ("measure_uncentered", Jv::Bool(s.measure_uncentered)),
        ("ks_weibull", opt_num(s.ks_weibull)),
        ("ks_coupling", opt_num(s.ks_coupling)),
        (
            "coupling",
            match &s.coupling {
                Some(cs) => Jv::Arr(cs.iter().map(coupling_jv).collect()),
                None => Jv::Null,
            },
        ),
        (
            "mass",
            match &s.mass {
                Some(m) => mass_jv(m),
                None => Jv::Null,
            },
        ),
        ("edge_var_emp", opt_num(s.edge_var_emp)),
        ("edge_var_target", opt_num(s.edge_var_target)),
        ("pass_ks_weibull", opt_bool(s.pass_ks_weibull)),
        ("pass_ks_coupling", opt_bool(s.pass_ks_coupling)),
        ("pass_coupling_ratio", opt_bool(s.pass_coupling_ratio)),
        ("pass_mass_band", opt_bool(s.pass_mass_band)),
        ("pass_edge_var", opt_bool(s.pass_edge_var)),
    ])
    .to_string();
    doc.push('\n');
    doc
}

fn csv_push(out: &mut String, key: &str, value: String) {
    out.push_str(key);
    out.push(',');
    out.push_str(&value);
    out.push('\n');
}

/// Summary flattened to key,value CSV rows.
pub fn summary_to_csv(s: &Summary) -> String {
    let mut out = String::from("key,value\n");
    csv_push(&mut out, "mode", mode_name(s.mode).to_string());
    csv_push(&mut out, "n", s.n.to_string());
    csv_push(&mut out, "lambda", fmt_f64(s.lambda));
    csv_push(&mut out, "trials_recorded", s.trials_recorded.to_string());
    csv_push(&mut out, "measure_mean", fmt_f64(s.measure_mean));
    csv_push(&mut out, "measure_uncentered", s.measure_uncentered.to_string());
    if let Some(x) = s.ks_weibull {
        csv_push(&mut out, "ks_weibull", fmt_f64(x));
    }
    if let Some(x) = s.ks_coupling {
        csv_push(&mut out, "ks_coupling", fmt_f64(x));
    }
    if let Some(cs) = &s.coupling {
        for c in cs {
            csv_push(&mut out, &format!("coupling.k{}.median", c.k), fmt_f64(c.median));
            csv_push(&mut out, &format!("coupling.k{}.q90", c.k), fmt_f64(c.q90));
            csv_push(
                &mut out,
                &format!("coupling.k{}.ratio_to_v_std", c.k),
                fmt_f64(c.ratio_to_v_std),
            );
        }
    }
    if let Some(m) = &s.mass {
        if let Some(t) = m.target_mass {
            csv_push(&mut out, "mass.target", fmt_f64(t));
        }
        for (k, x) in m.mass_mean.iter().enumerate() {
            csv_push(&mut out, &format!("mass.mean.k{k}"), fmt_f64(*x));
        }
        for (k, x) in m.mass_std.iter().enumerate() {
            csv_push(&mut out, &format!("mass.std.k{k}"), fmt_f64(*x));
        }
        for (k, x) in m.max_off_mass_mean.iter().enumerate() {
            csv_push(&mut out, &format!("mass.max_off_mean.k{k}"), fmt_f64(*x));
        }
        for (k, x) in m.residual_mass_mean.iter().enumerate() {
            csv_push(&mut out, &format!("mass.residual_mean.k{k}"), fmt_f64(*x));
        }
        csv_push(&mut out, "mass.residual_target", fmt_f64(m.residual_mass_target));
    }
    if let Some(x) = s.edge_var_emp {
        csv_push(&mut out, "edge_var_emp", fmt_f64(x));
    }
    if let Some(x) = s.edge_var_target {
        csv_push(&mut out, "edge_var_target", fmt_f64(x));
    }
    for (key, flag) in [
        ("pass_ks_weibull", s.pass_ks_weibull),
        ("pass_ks_coupling", s.pass_ks_coupling),
        ("pass_coupling_ratio", s.pass_coupling_ratio),
        ("pass_mass_band", s.pass_mass_band),
        ("pass_edge_var", s.pass_edge_var),
    ] {
        if let Some(b) = flag {
            csv_push(&mut out, key, b.to_string());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_record() -> TrialRecord {
        TrialRecord {
            trial_index: 3,
            derived_seed: 0xE220_A839_7B1D_CDAF,
            top_v: vec![0.99, 0.95],
            top_mu: vec![2.61, 2.55],
            vector_masses: vec![0.38, 0.36],
            max_off_mass: vec![0.01, 0.02],
            off_mass_block: vec![vec![0.38, 0.001], vec![0.002, 0.36]],
            l_hat: None,
        }
    }

    #[test]
    fn fmt_is_17_significant_digits() {
        assert_eq!(fmt_f64(2.625), "2.6250000000000000e0");
        let x = 0.1 + 0.2;
        let back: f64 = fmt_f64(x).parse().unwrap();
        assert_eq!(back.to_bits(), x.to_bits());
    }

    #[test]
    fn record_roundtrip_is_identity() {
        let r = sample_record();
        let line = record_to_line(&r);
        let back = record_from_line(&line).unwrap();
        assert_eq!(r, back);
        // bytes are reproducible
        assert_eq!(line, record_to_line(&back));
    }

    #[test]
    fn record_schema_is_strict() {
        let r = sample_record();
        let line = record_to_line(&r).replace("trial_index", "trial_idx");
        assert!(record_from_line(&line).is_err());
        assert!(record_from_line("{}").is_err());
        assert!(record_from_line("not json").is_err());
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]
        #[test]
        fn record_roundtrip_property(
            idx in 0u64..u64::MAX,
            seed in 0u64..u64::MAX,
            vs in proptest::collection::vec(-1.0f64..1.0, 1..6),
            lhat in proptest::option::of(-5.0f64..5.0),
        ) {
            let r = TrialRecord {
                trial_index: idx,
                derived_seed: seed,
                top_v: vs.clone(),
                top_mu: vs.iter().map(|x| x * 2.0).collect(),
                vector_masses: vs.iter().map(|x| x.abs()).collect(),
                max_off_mass: vs.iter().map(|x| x.abs() / 2.0).collect(),
                off_mass_block: vec![vs.clone(); vs.len()],
                l_hat: lhat,
            };
            let back = record_from_line(&record_to_line(&r)).unwrap();
            proptest::prop_assert_eq!(r, back);
        }
    }
}
