//! JSON run configuration: schema, defaults, and exhaustive validation.
//!
//! Validation collects every schema violation instead of stopping at the
//! first, so one round trip fixes a whole config file.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde_json::Value;

use leakywire::band_sweep::{grating_grid, grating_path, line_grid, KSet, Model};
use leakywire::coupling::CouplingFunction;

/// Defaults applied when a field is absent.
pub const DEFAULT_TRUNCATION: usize = 128;
pub const DEFAULT_LAMBDA_TOL: f64 = 1e-9;
pub const DEFAULT_TERM_TOL: f64 = 1e-14;
pub const DEFAULT_THRESHOLD_MARGIN: f64 = 1e-6;
pub const DEFAULT_LINE_KGRID: usize = 201;
pub const DEFAULT_GRATING_KGRID: [usize; 2] = [41, 41];

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: Model,
    pub sigma: CouplingFunction,
    pub kset: KSet,
    pub truncation: usize,
    pub lambda_tol: f64,
    pub term_tol: f64,
    pub threshold_margin: f64,
    pub threads: Option<usize>,
    pub outputs: BTreeMap<String, String>,
}

/// All schema violations found in a config document.
#[derive(Debug)]
pub struct ConfigErrors(pub Vec<String>);

impl std::fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "config error: {e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

fn get_f64(v: &Value, field: &str, errors: &mut Vec<String>) -> Option<f64> {
    match v.get(field) {
        None => None,
        Some(Value::Number(n)) => n.as_f64(),
        Some(_) => {
            errors.push(format!("field `{field}` must be a number"));
            None
        }
    }
}

fn parse_coupling(root: &Value, errors: &mut Vec<String>) -> Option<CouplingFunction> {
    let coupling = match root.get("coupling") {
        Some(c) if c.is_object() => c,
        Some(_) => {
            errors.push("field `coupling` must be an object".into());
            return None;
        }
        None => {
            errors.push("missing required field `coupling`".into());
            return None;
        }
    };
    let ctype = match coupling.get("type").and_then(Value::as_str) {
        Some(t) => t,
        None => {
            errors.push(
                "field `coupling.type` must be one of \"constant\", \"fourier\", \"samples\""
                    .into(),
            );
            return None;
        }
    };
    match ctype {
        "constant" => match coupling.get("value").and_then(Value::as_f64) {
            Some(v) if v.is_finite() => Some(CouplingFunction::constant(v)),
            _ => {
                errors.push("field `coupling.value` must be a finite number".into());
                None
            }
        },
        "fourier" => {
            let coeffs = match coupling.get("coeffs").and_then(Value::as_object) {
                Some(c) => c,
                None => {
                    errors.push(
                        "field `coupling.coeffs` must map mode indices to [re, im] pairs".into(),
                    );
                    return None;
                }
            };
            let mut map: Vec<(i32, Complex64)> = Vec::new();
            let mut bad = false;
            for (key, val) in coeffs {
                let m: i32 = match key.parse() {
                    Ok(m) => m,
                    Err(_) => {
                        errors.push(format!(
                            "field `coupling.coeffs`: key `{key}` is not an integer mode index"
                        ));
                        bad = true;
                        continue;
                    }
                };
                let pair = val.as_array().and_then(|a| {
                    if a.len() == 2 {
                        Some((a[0].as_f64(), a[1].as_f64()))
                    } else {
                        None
                    }
                });
                match pair {
                    Some((Some(re), Some(im))) => map.push((m, Complex64::new(re, im))),
                    _ => {
                        errors.push(format!(
                            "field `coupling.coeffs.{key}` must be an [re, im] pair"
                        ));
                        bad = true;
                    }
                }
            }
            if bad {
                return None;
            }
            match CouplingFunction::from_fourier(map) {
                Ok(c) => Some(c),
                Err(e) => {
                    errors.push(format!("field `coupling.coeffs`: {e}"));
                    None
                }
            }
        }
        "samples" => {
            let values = match coupling.get("values").and_then(Value::as_array) {
                Some(v) => v,
                None => {
                    errors.push("field `coupling.values` must be an array of numbers".into());
                    return None;
                }
            };
            let mut samples = Vec::with_capacity(values.len());
            for (i, v) in values.iter().enumerate() {
                match v.as_f64() {
                    Some(x) => samples.push(x),
                    None => {
                        errors.push(format!("field `coupling.values[{i}]` must be a number"));
                        return None;
                    }
                }
            }
            match CouplingFunction::from_samples(&samples) {
                Ok(c) => Some(c),
                Err(e) => {
                    errors.push(format!("field `coupling.values`: {e}"));
                    None
                }
            }
        }
        other => {
            errors.push(format!(
                "field `coupling.type`: unknown type `{other}` (expected constant|fourier|samples)"
            ));
            None
        }
    }
}

fn parse_pair(v: &Value) -> Option<[f64; 2]> {
    let a = v.as_array()?;
    if a.len() != 2 {
        return None;
    }
    Some([a[0].as_f64()?, a[1].as_f64()?])
}

fn parse_kset(root: &Value, model: Option<Model>, errors: &mut Vec<String>) -> Option<KSet> {
    let spec = match root.get("k_spec") {
        None => {
            // defaults
            return match model? {
                Model::Line => Some(KSet::Line(line_grid(DEFAULT_LINE_KGRID))),
                Model::Grating => Some(KSet::Grating(grating_grid(
                    DEFAULT_GRATING_KGRID[0],
                    DEFAULT_GRATING_KGRID[1],
                ))),
            };
        }
        Some(s) if s.is_object() => s,
        Some(_) => {
            errors.push("field `k_spec` must be an object".into());
            return None;
        }
    };
    let model = model?;
    let stype = match spec.get("type").and_then(Value::as_str) {
        Some(t) => t,
        None => {
            errors.push("field `k_spec.type` must be one of \"grid\", \"list\", \"path\"".into());
            return None;
        }
    };
    match (model, stype) {
        (Model::Line, "grid") => match spec.get("count").and_then(Value::as_u64) {
            Some(c) if c >= 1 => Some(KSet::Line(line_grid(c as usize))),
            _ => {
                errors.push(
                    "field `k_spec.count` must be a positive integer for the line model".into(),
                );
                None
            }
        },
        (Model::Line, "list") => {
            let values = spec.get("values").and_then(Value::as_array);
            match values {
                Some(vs) => {
                    let mut ks = Vec::with_capacity(vs.len());
                    for (i, v) in vs.iter().enumerate() {
                        match v.as_f64() {
                            Some(x) => ks.push(x),
                            None => {
                                errors.push(format!(
                                    "field `k_spec.values[{i}]` must be a scalar quasimomentum for the line model"
                                ));
                                return None;
                            }
                        }
                    }
                    Some(KSet::Line(ks))
                }
                None => {
                    errors.push("field `k_spec.values` must be an array".into());
                    None
                }
            }
        }
        (Model::Grating, "grid") => {
            match spec.get("count").and_then(|c| {
                c.as_array().and_then(|a| {
                    if a.len() == 2 {
                        Some((a[0].as_u64(), a[1].as_u64()))
                    } else {
                        None
                    }
                })
            }) {
                Some((Some(c1), Some(c2))) if c1 >= 1 && c2 >= 1 => {
                    Some(KSet::Grating(grating_grid(c1 as usize, c2 as usize)))
                }
                _ => {
                    errors.push(
                        "field `k_spec.count` must be a [count1, count2] pair for the grating model"
                            .into(),
                    );
                    None
                }
            }
        }
        (Model::Grating, "list") => {
            let values = spec.get("values").and_then(Value::as_array);
            match values {
                Some(vs) => {
                    let mut ks = Vec::with_capacity(vs.len());
                    for (i, v) in vs.iter().enumerate() {
                        match parse_pair(v) {
                            Some(p) => ks.push(p),
                            None => {
                                errors.push(format!(
                                    "field `k_spec.values[{i}]` must be a [k1, k2] pair for the grating model"
                                ));
                                return None;
                            }
                        }
                    }
                    Some(KSet::Grating(ks))
                }
                None => {
                    errors.push("field `k_spec.values` must be an array".into());
                    None
                }
            }
        }
        (Model::Grating, "path") => {
            let vertices = spec.get("vertices").and_then(Value::as_array);
            let count = spec.get("count").and_then(Value::as_u64).unwrap_or(50);
            match vertices {
                Some(vs) => {
                    let mut verts = Vec::with_capacity(vs.len());
                    for (i, v) in vs.iter().enumerate() {
                        match parse_pair(v) {
                            Some(p) => verts.push(p),
                            None => {
                                errors.push(format!(
                                    "field `k_spec.vertices[{i}]` must be a [k1, k2] pair"
                                ));
                                return None;
                            }
                        }
                    }
                    match grating_path(&verts, count as usize) {
                        Ok(p) => Some(KSet::Grating(p)),
                        Err(e) => {
                            errors.push(format!("field `k_spec`: {e}"));
                            None
                        }
                    }
                }
                None => {
                    errors
                        .push("field `k_spec.vertices` must be an array of [k1, k2] pairs".into());
                    None
                }
            }
        }
        (Model::Line, "path") => {
            errors.push("field `k_spec`: type \"path\" applies to the grating model only".into());
            None
        }
        (_, other) => {
            errors.push(format!("field `k_spec.type`: unknown type `{other}`"));
            None
        }
    }
}

/// Parse and validate a configuration document, reporting every violation.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigErrors> {
    let root: Value =
        serde_json::from_str(text).map_err(|e| ConfigErrors(vec![format!("invalid JSON: {e}")]))?;
    let mut errors = Vec::new();
    if !root.is_object() {
        return Err(ConfigErrors(vec!["config must be a JSON object".into()]));
    }

    let model = match root.get("model").and_then(Value::as_str) {
        Some("line") => Some(Model::Line),
        Some("grating") => Some(Model::Grating),
        Some(other) => {
            errors.push(format!(
                "field `model`: unknown model `{other}` (expected line|grating)"
            ));
            None
        }
        None => {
            errors.push("missing required field `model` (line|grating)".into());
            None
        }
    };

    let sigma = parse_coupling(&root, &mut errors);
    let kset = parse_kset(&root, model, &mut errors);

    let truncation = match root.get("truncation") {
        None => DEFAULT_TRUNCATION,
        Some(Value::Number(n)) => match n.as_u64() {
            Some(t) if t >= 1 => t as usize,
            _ => {
                errors.push("field `truncation` must be a positive integer".into());
                DEFAULT_TRUNCATION
            }
        },
        Some(_) => {
            errors.push("field `truncation` must be a positive integer".into());
            DEFAULT_TRUNCATION
        }
    };

    let mut tol = |name: &str, default: f64| -> f64 {
        match get_f64(&root, name, &mut errors) {
            None => default,
            Some(v) if v > 0.0 && v.is_finite() => v,
            Some(v) => {
                errors.push(format!("field `{name}` must be positive (got {v})"));
                default
            }
        }
    };
    let lambda_tol = tol("lambda_tol", DEFAULT_LAMBDA_TOL);
    let term_tol = tol("term_tol", DEFAULT_TERM_TOL);
    let threshold_margin = tol("threshold_margin", DEFAULT_THRESHOLD_MARGIN);

    let threads = match root.get("threads") {
        None => None,
        Some(Value::String(s)) if s == "auto" => None,
        Some(Value::Number(n)) => match n.as_u64() {
            Some(t) if t >= 1 => Some(t as usize),
            _ => {
                errors.push("field `threads` must be \"auto\" or a positive integer".into());
                None
            }
        },
        Some(_) => {
            errors.push("field `threads` must be \"auto\" or a positive integer".into());
            None
        }
    };

    let mut outputs = BTreeMap::new();
    match root.get("outputs") {
        None => {}
        Some(Value::Object(map)) => {
            for (k, v) in map {
                match v.as_str() {
                    Some(path) => {
                        outputs.insert(k.clone(), path.to_string());
                    }
                    None => errors.push(format!("field `outputs.{k}` must be a path string")),
                }
            }
        }
        Some(_) => errors.push("field `outputs` must be an object of path strings".into()),
    }

    // cross-field checks
    if let Some(s) = &sigma {
        if (truncation as u32) < s.max_index() {
            errors.push(format!(
                "field `truncation`: N={truncation} is below the coupling degree M={}",
                s.max_index()
            ));
        }
    }

    if !errors.is_empty() {
        return Err(ConfigErrors(errors));
    }
    Ok(RunConfig {
        model: model.expect("validated"),
        sigma: sigma.expect("validated"),
        kset: kset.expect("validated"),
        truncation,
        lambda_tol,
        term_tol,
        threshold_margin,
        threads,
        outputs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg =
            parse_config(r#"{"model":"line","coupling":{"type":"constant","value":0.1}}"#).unwrap();
        assert_eq!(cfg.truncation, 128);
        assert_eq!(cfg.lambda_tol, 1e-9);
        assert_eq!(cfg.term_tol, 1e-14);
        assert_eq!(cfg.threshold_margin, 1e-6);
        assert_eq!(cfg.kset.len(), 201);
        assert!((cfg.sigma.mean() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn grating_with_scalar_kspec_names_the_field() {
        let err = parse_config(
            r#"{"model":"grating","coupling":{"type":"constant","value":0.1},
                "k_spec":{"type":"grid","count":11}}"#,
        )
        .unwrap_err();
        assert!(err.0.iter().any(|e| e.contains("k_spec")), "{err}");
    }

    #[test]
    fn bad_sample_length_is_schema_error() {
        let err = parse_config(&format!(
            r#"{{"model":"line","coupling":{{"type":"samples","values":[{}]}}}}"#,
            vec!["0.1"; 24].join(",")
        ))
        .unwrap_err();
        assert!(err.0.iter().any(|e| e.contains("power of two")), "{err}");
    }

    #[test]
    fn errors_are_collected_not_first_failure() {
        let err = parse_config(
            r#"{"model":"nope","coupling":{"type":"constant","value":"x"},
                "lambda_tol":-1,"truncation":0}"#,
        )
        .unwrap_err();
        assert!(
            err.0.len() >= 3,
            "expected multiple errors, got {:?}",
            err.0
        );
    }

    #[test]
    fn fourier_coupling_parses() {
        let cfg = parse_config(
            r#"{"model":"line","coupling":{"type":"fourier","coeffs":
                {"0":[0.6266570686577501,0.0],"1":[0.1,0.05],"-1":[0.1,-0.05]}}}"#,
        )
        .unwrap();
        assert!((cfg.sigma.mean() - 0.25).abs() < 1e-12);
        assert_eq!(cfg.sigma.max_index(), 1);
    }

    #[test]
    fn truncation_below_degree_rejected() {
        let err = parse_config(
            r#"{"model":"line","truncation":1,"coupling":{"type":"fourier","coeffs":
                {"3":[0.1,0.0],"-3":[0.1,0.0]}}}"#,
        )
        .unwrap_err();
        assert!(err.0.iter().any(|e| e.contains("truncation")), "{err}");
    }

    #[test]
    fn malformed_json_is_reported() {
        let err = parse_config("{not json").unwrap_err();
        assert!(err.0[0].contains("invalid JSON"));
    }
}
