//! Flat `key=value` run configuration.
//!
//! ```text
//! # seven-tone benchmark
//! n=512
//! component=32,3.5,0
//! component=38,3,0
//! m_values=200..=300:25
//! seeds=0..100
//! algorithms=sira,omp,iht
//! iht.eps=1e-3
//! ```
//!
//! Blank lines and `#` comments are ignored. Integer lists accept single
//! values and ranges (`a..b` exclusive, `a..=b` inclusive, optional `:step`)
//! separated by commas.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::bench::{Algorithm, AlgorithmConfigs};
use crate::recovery::{EnergyMode, ThresholdForm};
use crate::sensing::ColumnScaling;
use crate::spectral::SignalSpec;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("config line {line}: {message}")]
pub struct ConfigError {
    /// 1-based; 0 when the problem is not tied to a line (missing key).
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub spec: SignalSpec,
    pub m_values: Vec<usize>,
    pub seeds: Vec<u64>,
    pub algorithms: Vec<Algorithm>,
    pub configs: AlgorithmConfigs,
    pub success_tol: f64,
    /// Search range for `minm`; defaults to 1..=N.
    pub minm_range: Vec<usize>,
    pub minm_fraction: f64,
}

#[derive(Default)]
struct Raw {
    n: Option<usize>,
    components: Vec<(usize, Complex64)>,
    m_values: Option<Vec<usize>>,
    seeds: Option<Vec<u64>>,
    algorithms: Option<Vec<Algorithm>>,
    omp_k: Option<usize>,
    iht_k: Option<usize>,
    iht_max_iters: Option<usize>,
    iht_eps: Option<f64>,
    iht_mu: Option<f64>,
    sira_p: Option<f64>,
    sira_form: Option<ThresholdForm>,
    sira_known_energy: Option<bool>,
    scaling: Option<ColumnScaling>,
    success_tol: Option<f64>,
    minm_range: Option<Vec<usize>>,
    minm_fraction: Option<f64>,
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut raw = Raw::default();
    let mut n_line = 0;
    let mut component_lines = Vec::new();

    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = match line.find('#') {
            Some(p) => &line[..p],
            None => line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(lineno, format!("expected key=value, found `{line}`")))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "n" => {
                raw.n = Some(parse_num(value, lineno)?);
                n_line = lineno;
            }
            "component" => {
                raw.components.push(parse_component(value, lineno)?);
                component_lines.push(lineno);
            }
            "m_values" => raw.m_values = Some(parse_int_list(value, lineno)?),
            "seeds" => raw.seeds = Some(parse_int_list(value, lineno)?),
            "algorithms" => {
                raw.algorithms = Some(
                    value
                        .split(',')
                        .map(|s| s.parse::<Algorithm>().map_err(|e| err(lineno, e.to_string())))
                        .collect::<Result<_, _>>()?,
                )
            }
            "omp.k" => raw.omp_k = Some(parse_num(value, lineno)?),
            "iht.k" => raw.iht_k = Some(parse_num(value, lineno)?),
            "iht.max_iters" => raw.iht_max_iters = Some(parse_num(value, lineno)?),
            "iht.eps" => raw.iht_eps = Some(parse_num(value, lineno)?),
            "iht.mu" => raw.iht_mu = Some(parse_num(value, lineno)?),
            "sira.p" => raw.sira_p = Some(parse_num(value, lineno)?),
            "sira.threshold_form" => {
                raw.sira_form = Some(match value {
                    "literature" => ThresholdForm::Literature,
                    "printed" => ThresholdForm::Printed,
                    other => return Err(err(lineno, format!("unknown threshold form `{other}`"))),
                })
            }
            "sira.energy_mode" => {
                raw.sira_known_energy = Some(match value {
                    "estimate" | "estimate_from_samples" => false,
                    "known" | "known_amplitudes" => true,
                    other => return Err(err(lineno, format!("unknown energy mode `{other}`"))),
                })
            }
            "scaling" => {
                raw.scaling = Some(match value {
                    "unit_exponential" => ColumnScaling::UnitExponential,
                    "unit_norm" => ColumnScaling::UnitNorm,
                    other => return Err(err(lineno, format!("unknown scaling `{other}`"))),
                })
            }
            "success_tol" => raw.success_tol = Some(parse_num(value, lineno)?),
            "minm.range" => raw.minm_range = Some(parse_int_list(value, lineno)?),
            "minm.fraction" => raw.minm_fraction = Some(parse_num(value, lineno)?),
            other => return Err(err(lineno, format!("unknown key `{other}`"))),
        }
    }

    let n = raw.n.ok_or_else(|| err(0, "missing required key `n`"))?;
    let spec = SignalSpec::new(n, raw.components.clone()).map_err(|e| {
        // Point at the first offending component when possible.
        let line = raw
            .components
            .iter()
            .zip(&component_lines)
            .enumerate()
            .find(|(i, ((bin, _), _))| {
                *bin >= n || raw.components[..*i].iter().any(|(b, _)| b == bin)
            })
            .map(|(_, (_, &l))| l)
            .unwrap_or(n_line);
        err(line, e.to_string())
    })?;
    let k = spec.sparsity().max(1);

    let mut configs = AlgorithmConfigs::with_sparsity(k);
    configs.omp.k_components = raw.omp_k.unwrap_or(k);
    configs.iht.k_components = raw.iht_k.unwrap_or(k);
    if let Some(v) = raw.iht_max_iters {
        configs.iht.max_iters = v;
    }
    if let Some(v) = raw.iht_eps {
        configs.iht.eps = v;
    }
    configs.iht.step_mu = raw.iht_mu;
    if let Some(p) = raw.sira_p {
        configs.sira.p_detect = p;
    }
    if let Some(f) = raw.sira_form {
        configs.sira.threshold_form = f;
    }
    if raw.sira_known_energy == Some(true) {
        configs.sira.energy_mode = EnergyMode::KnownAmplitudes(spec.energy());
    }
    if let Some(s) = raw.scaling {
        configs.scaling = s;
    }

    Ok(RunConfig {
        m_values: raw.m_values.unwrap_or_default(),
        seeds: raw.seeds.unwrap_or_else(|| vec![0]),
        algorithms: raw.algorithms.unwrap_or_else(|| Algorithm::ALL.to_vec()),
        configs,
        success_tol: raw.success_tol.unwrap_or(1e-6),
        minm_range: raw.minm_range.unwrap_or_else(|| (1..=n).collect()),
        minm_fraction: raw.minm_fraction.unwrap_or(0.5),
        spec,
    })
}

fn parse_num<T: std::str::FromStr>(s: &str, line: usize) -> Result<T, ConfigError> {
    s.trim()
        .parse::<T>()
        .map_err(|_| err(line, format!("cannot parse `{s}` as a number")))
}

fn parse_component(value: &str, line: usize) -> Result<(usize, Complex64), ConfigError> {
    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(err(line, "component expects <bin>,<re>,<im>"));
    }
    let bin = parse_num(parts[0], line)?;
    let re = parse_num(parts[1], line)?;
    let im = parse_num(parts[2], line)?;
    Ok((bin, Complex64::new(re, im)))
}

/// Comma-separated integers and ranges; the result is sorted and deduplicated.
pub fn parse_int_list<T>(value: &str, line: usize) -> Result<Vec<T>, ConfigError>
where
    T: TryFrom<u64> + Ord + Copy,
{
    let mut out: Vec<u64> = Vec::new();
    for item in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (body, step) = match item.split_once(':') {
            Some((b, s)) => (b, parse_num::<u64>(s, line)?),
            None => (item, 1),
        };
        if step == 0 {
            return Err(err(line, "range step must be positive"));
        }
        if let Some((a, b)) = body.split_once("..=") {
            let (a, b): (u64, u64) = (parse_num(a, line)?, parse_num(b, line)?);
            out.extend((a..=b).step_by(step as usize));
        } else if let Some((a, b)) = body.split_once("..") {
            let (a, b): (u64, u64) = (parse_num(a, line)?, parse_num(b, line)?);
            out.extend((a..b).step_by(step as usize));
        } else if step != 1 {
            return Err(err(line, format!("step given without a range in `{item}`")));
        } else {
            out.push(parse_num(body, line)?);
        }
    }
    if out.is_empty() {
        return Err(err(line, "empty list"));
    }
    out.sort_unstable();
    out.dedup();
    out.into_iter()
        .map(|v| T::try_from(v).map_err(|_| err(line, format!("value {v} out of range"))))
        .collect()
}

/// The `n=` / `component=` block describing `spec`.
pub fn spec_to_config(spec: &SignalSpec) -> String {
    let mut s = format!("n={}\n", spec.length_n());
    for &(bin, a) in spec.components() {
        let _ = writeln!(s, "component={bin},{},{}", a.re, a.im);
    }
    s
}
