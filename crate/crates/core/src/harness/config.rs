//! Flat key=value configuration files (UTF-8, `#` comments).

use super::ExperimentSpec;
use crate::flux::FluxSpec;
use crate::interp::InterpKind;
use crate::lambda::{lambda4, lambda5, LambdaSet};
use crate::stepper::{SchemeConfig, DEFAULT_FP_MAX_ITER, DEFAULT_FP_TOL};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected key=value, got {text:?}")]
    Malformed { line: usize, text: String },
    #[error("unknown key {0:?}")]
    UnknownKey(String),
    #[error("duplicate key {0:?}")]
    DuplicateKey(String),
    #[error("missing required key {0:?}")]
    MissingKey(&'static str),
    #[error("key {key:?}: {message}")]
    BadValue { key: String, message: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Sweep {
    DtList(Vec<f64>),
    HList {
        h_list: Vec<f64>,
        dt_rule_coeff: f64,
        dt_rule_exp: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reference {
    CorrectedCnoidal,
    None,
}

const KNOWN_KEYS: &[&str] = &[
    "nu",
    "flux",
    "flux_coeffs",
    "lambda",
    "interp",
    "nx",
    "dt",
    "t_end",
    "fp_tol",
    "fp_max_iter",
    "sweep",
    "dt_list",
    "h_list",
    "dt_rule_coeff",
    "dt_rule_exp",
    "reference",
    "output",
];

fn parse_f64(map: &BTreeMap<String, String>, key: &str) -> Result<Option<f64>, ConfigError> {
    match map.get(key) {
        None => Ok(None),
        Some(raw) => raw
            .parse::<f64>()
            .map(Some)
            .map_err(|e| ConfigError::BadValue {
                key: key.into(),
                message: format!("{e} in {raw:?}"),
            }),
    }
}

fn parse_list(map: &BTreeMap<String, String>, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
    match map.get(key) {
        None => Ok(None),
        Some(raw) => raw
            .split(',')
            .map(|s| {
                s.trim().parse::<f64>().map_err(|e| ConfigError::BadValue {
                    key: key.into(),
                    message: format!("{e} in {:?}", s.trim()),
                })
            })
            .collect::<Result<Vec<f64>, _>>()
            .map(Some),
    }
}

/// Parse the key=value text of an experiment description.
pub fn parse_config(text: &str) -> Result<ExperimentSpec, ConfigError> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Malformed {
            line: i + 1,
            text: line.into(),
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey(key));
        }
        if map.insert(key.clone(), value).is_some() {
            return Err(ConfigError::DuplicateKey(key));
        }
    }

    let nu = parse_f64(&map, "nu")?.ok_or(ConfigError::MissingKey("nu"))?;

    let flux = match map.get("flux").map(String::as_str) {
        None => return Err(ConfigError::MissingKey("flux")),
        Some("zero") => FluxSpec::Zero,
        Some("kdv") => FluxSpec::Kdv,
        Some("polynomial") => {
            let coeffs =
                parse_list(&map, "flux_coeffs")?.ok_or(ConfigError::MissingKey("flux_coeffs"))?;
            FluxSpec::polynomial(coeffs).map_err(|e| ConfigError::BadValue {
                key: "flux_coeffs".into(),
                message: e.to_string(),
            })?
        }
        Some(other) => {
            return Err(ConfigError::BadValue {
                key: "flux".into(),
                message: format!("unknown flux {other:?} (zero | kdv | polynomial)"),
            })
        }
    };

    let lambda: LambdaSet = match map.get("lambda").map(String::as_str) {
        None => return Err(ConfigError::MissingKey("lambda")),
        Some("l4") => lambda4(),
        Some("l5") => lambda5(),
        Some(other) => {
            return Err(ConfigError::BadValue {
                key: "lambda".into(),
                message: format!("unknown lambda set {other:?} (l4 | l5)"),
            })
        }
    };

    let interp = match map.get("interp").map(String::as_str) {
        None => return Err(ConfigError::MissingKey("interp")),
        Some("spline") => InterpKind::Spline,
        Some("hermite") => InterpKind::Hermite,
        Some(other) => {
            return Err(ConfigError::BadValue {
                key: "interp".into(),
                message: format!("unknown interpolation {other:?} (spline | hermite)"),
            })
        }
    };

    let t_end = parse_f64(&map, "t_end")?.ok_or(ConfigError::MissingKey("t_end"))?;
    let fp_tol = parse_f64(&map, "fp_tol")?.unwrap_or(DEFAULT_FP_TOL);
    let fp_max_iter = match map.get("fp_max_iter") {
        None => DEFAULT_FP_MAX_ITER,
        Some(raw) => raw.parse::<u32>().map_err(|e| ConfigError::BadValue {
            key: "fp_max_iter".into(),
            message: format!("{e} in {raw:?}"),
        })?,
    };

    let sweep = match map.get("sweep").map(String::as_str) {
        None | Some("none") => None,
        Some("dt") => {
            let list = parse_list(&map, "dt_list")?.ok_or(ConfigError::MissingKey("dt_list"))?;
            if list.is_empty() {
                return Err(ConfigError::Invalid("empty dt_list".into()));
            }
            Some(Sweep::DtList(list))
        }
        Some("h") => {
            let h_list = parse_list(&map, "h_list")?.ok_or(ConfigError::MissingKey("h_list"))?;
            if h_list.is_empty() {
                return Err(ConfigError::Invalid("empty h_list".into()));
            }
            let coeff = parse_f64(&map, "dt_rule_coeff")?
                .ok_or(ConfigError::MissingKey("dt_rule_coeff"))?;
            let exp =
                parse_f64(&map, "dt_rule_exp")?.ok_or(ConfigError::MissingKey("dt_rule_exp"))?;
            if exp.is_nan() || exp <= 0.0 {
                return Err(ConfigError::Invalid(format!(
                    "dt_rule_exp = {exp} must be positive"
                )));
            }
            Some(Sweep::HList {
                h_list,
                dt_rule_coeff: coeff,
                dt_rule_exp: exp,
            })
        }
        Some(other) => {
            return Err(ConfigError::BadValue {
                key: "sweep".into(),
                message: format!("unknown sweep {other:?} (dt | h | none)"),
            })
        }
    };

    let reference = match map.get("reference").map(String::as_str) {
        None | Some("none") => Reference::None,
        Some("cnoidal") => Reference::CorrectedCnoidal,
        Some(other) => {
            return Err(ConfigError::BadValue {
                key: "reference".into(),
                message: format!("unknown reference {other:?} (cnoidal | none)"),
            })
        }
    };

    // the template dt: required for run and dt used directly; for sweeps a
    // placeholder from the sweep itself keeps SchemeConfig valid
    let dt = match parse_f64(&map, "dt")? {
        Some(dt) => dt,
        None => match &sweep {
            Some(Sweep::DtList(list)) => list[0],
            Some(Sweep::HList {
                h_list,
                dt_rule_coeff,
                dt_rule_exp,
            }) => dt_rule_coeff * h_list[0].powf(*dt_rule_exp),
            None => return Err(ConfigError::MissingKey("dt")),
        },
    };

    let nx = match map.get("nx") {
        Some(raw) => raw.parse::<usize>().map_err(|e| ConfigError::BadValue {
            key: "nx".into(),
            message: format!("{e} in {raw:?}"),
        })?,
        None => match &sweep {
            Some(Sweep::HList { h_list, .. }) => {
                let nx_f = 1.0 / h_list[0];
                nx_f.round() as usize
            }
            _ => return Err(ConfigError::MissingKey("nx")),
        },
    };

    let scheme =
        SchemeConfig::with_fixed_point(nu, flux, lambda, interp, dt, t_end, fp_tol, fp_max_iter)
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;

    Ok(ExperimentSpec {
        scheme,
        nx,
        sweep: sweep.unwrap_or(Sweep::DtList(vec![dt])),
        reference,
        output_path: map.get("output").cloned(),
    })
}
