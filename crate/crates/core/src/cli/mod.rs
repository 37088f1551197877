//! Command implementations behind the `cs-recovery` binary.
//!
//! Each command writes plot-ready CSV into the output directory. Row order
//! and every non-timing column are deterministic for a given config.

pub mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::bench::{
    find_min_measurements, run_sweep, run_trial_detailed, success_curve, summarize, Algorithm,
    CurvePoint, ExperimentConfig, ExperimentRecord, SuccessCriterion,
};
use crate::error::Error;
use crate::spectral::{dft, generate_signal};

pub use config::{parse_config, ConfigError, RunConfig};

pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_RECOVERY: i32 = 4;
pub const EXIT_IO: i32 = 5;

pub const SWEEP_HEADER: &str = "algorithm,m,seed,n,k,error,time_s,support_exact,iterations,failed";
pub const SUMMARY_HEADER: &str =
    "algorithm,m,error_median,error_q1,error_q3,time_median_s,success_rate";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Argument(String),
    #[error("recovery failed ({}): {source}", source.kind())]
    Recovery {
        algorithm: Algorithm,
        m: usize,
        seed: u64,
        source: Error,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Argument(_) => EXIT_CONFIG,
            CliError::Recovery { .. } => EXIT_RECOVERY,
            CliError::Io { .. } => EXIT_IO,
        }
    }

    /// Single machine-readable line describing the failure.
    pub fn error_line(&self) -> String {
        match self {
            CliError::Config(e) => format!("error,config,line={},{}", e.line, e.message),
            CliError::Argument(msg) => format!("error,config,line=0,{msg}"),
            CliError::Recovery {
                algorithm,
                m,
                seed,
                source,
            } => format!("error,recovery,{algorithm},{m},{seed},{},{source}", source.kind()),
            CliError::Io { path, source } => format!("error,io,{},{source}", path.display()),
        }
    }
}

/// Resolved invocation: where the config came from, where output goes.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub config_path: PathBuf,
    pub out_dir: PathBuf,
    pub jobs: usize,
    pub config: RunConfig,
}

impl RunManifest {
    pub fn load(config_path: &Path, out_dir: &Path, jobs: usize) -> Result<Self, CliError> {
        let text = fs::read_to_string(config_path).map_err(|source| CliError::Io {
            path: config_path.to_path_buf(),
            source,
        })?;
        let config = parse_config(&text)?;
        fs::create_dir_all(out_dir).map_err(|source| CliError::Io {
            path: out_dir.to_path_buf(),
            source,
        })?;
        Ok(Self {
            config_path: config_path.to_path_buf(),
            out_dir: out_dir.to_path_buf(),
            jobs: jobs.max(1),
            config,
        })
    }

    fn experiment(&self) -> Result<ExperimentConfig, CliError> {
        let c = &self.config;
        if c.m_values.is_empty() {
            return Err(CliError::Argument("missing required key `m_values`".into()));
        }
        let exp = ExperimentConfig {
            spec: c.spec.clone(),
            m_values: c.m_values.clone(),
            seeds: c.seeds.clone(),
            algorithms: c.algorithms.clone(),
            configs: c.configs,
            success_tol: c.success_tol,
        };
        exp.validate().map_err(|e| CliError::Argument(e.to_string()))?;
        Ok(exp)
    }

    fn write(&self, name: &str, contents: &str) -> Result<PathBuf, CliError> {
        let path = self.out_dir.join(name);
        let io = |source| CliError::Io {
            path: path.clone(),
            source,
        };
        let mut f = fs::File::create(&path).map_err(io)?;
        f.write_all(contents.as_bytes()).map_err(io)?;
        Ok(path)
    }
}

fn fmt_error(v: f64) -> String {
    format!("{v:.9e}")
}

/// `signal_time.csv` (n,re,im) and `signal_dft.csv` (bin,magnitude, raw
/// forward-DFT scale).
pub fn cmd_generate(manifest: &RunManifest) -> Result<Vec<PathBuf>, CliError> {
    let x = generate_signal(&manifest.config.spec);
    let spectrum = dft(&x).map_err(|e| CliError::Argument(e.to_string()))?;

    let mut time = String::from("n,re,im\n");
    for (t, s) in x.samples().iter().enumerate() {
        time.push_str(&format!("{t},{:e},{:e}\n", s.re, s.im));
    }
    let mut freq = String::from("bin,magnitude\n");
    for (k, m) in spectrum.magnitudes().iter().enumerate() {
        freq.push_str(&format!("{k},{m:e}\n"));
    }
    Ok(vec![
        manifest.write("signal_time.csv", &time)?,
        manifest.write("signal_dft.csv", &freq)?,
    ])
}

/// Outcome of `recover`: the summary line and the reconstruction file.
#[derive(Debug, Clone)]
pub struct RecoverOutput {
    pub record: ExperimentRecord,
    pub summary_line: String,
    pub path: PathBuf,
}

pub fn cmd_recover(
    manifest: &RunManifest,
    algorithm: Algorithm,
    m: usize,
    seed: u64,
) -> Result<RecoverOutput, CliError> {
    let spec = &manifest.config.spec;
    let trial = run_trial_detailed(spec, algorithm, m, seed, &manifest.config.configs)
        .map_err(|e| CliError::Argument(e.to_string()))?;
    let record = trial.record;
    let result = match (trial.result, &record.failure) {
        (Some(r), None) => r,
        (_, Some(e)) => {
            return Err(CliError::Recovery {
                algorithm,
                m,
                seed,
                source: e.clone(),
            })
        }
        (None, None) => unreachable!("a trial without a result always records its failure"),
    };

    let truth = spec.amplitude_vector();
    let mut csv = String::from("bin,true_magnitude,recovered_magnitude\n");
    for (k, (t, r)) in truth.iter().zip(&result.spectrum).enumerate() {
        csv.push_str(&format!("{k},{:e},{:e}\n", t.norm(), r.norm()));
    }
    let path = manifest.write(&format!("recon_{algorithm}_M{m}_s{seed}.csv"), &csv)?;
    let summary_line = format!(
        "{algorithm},{m},{seed},{},{},{}",
        fmt_error(record.error),
        record.elapsed_seconds,
        record.support_exact
    );
    Ok(RecoverOutput {
        record,
        summary_line,
        path,
    })
}

pub fn sweep_csv(records: &[ExperimentRecord]) -> String {
    let mut out = format!("{SWEEP_HEADER}\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.algorithm,
            r.m,
            r.seed,
            r.n,
            r.k,
            fmt_error(r.error),
            r.elapsed_seconds,
            r.support_exact,
            r.iterations,
            r.failed()
        ));
    }
    out
}

pub fn summary_csv(records: &[ExperimentRecord], success_tol: f64) -> String {
    let mut out = format!("{SUMMARY_HEADER}\n");
    for s in summarize(records, success_tol) {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            s.algorithm,
            s.m,
            fmt_error(s.error_median),
            fmt_error(s.error_q1),
            fmt_error(s.error_q3),
            s.time_median,
            s.success_rate
        ));
    }
    out
}

/// `sweep.csv` and `sweep_summary.csv`. Per-trial failures become rows with
/// `failed=true`; they never abort the sweep.
pub fn cmd_sweep(manifest: &RunManifest) -> Result<(Vec<ExperimentRecord>, Vec<PathBuf>), CliError> {
    let exp = manifest.experiment()?;
    let records = run_sweep(&exp, manifest.jobs).map_err(|e| CliError::Argument(e.to_string()))?;
    let paths = vec![
        manifest.write("sweep.csv", &sweep_csv(&records))?,
        manifest.write("sweep_summary.csv", &summary_csv(&records, exp.success_tol))?,
    ];
    Ok((records, paths))
}

#[derive(Debug, Clone)]
pub struct MinmOutput {
    pub found: Option<usize>,
    pub curve: Vec<CurvePoint>,
    pub path: PathBuf,
}

impl MinmOutput {
    pub fn status_line(&self, algorithm: Algorithm) -> String {
        match self.found {
            Some(m) => format!("{algorithm},min_m={m}"),
            None => format!("{algorithm},min_m=none"),
        }
    }
}

/// Minimal-M search over `minm.range`; with `full_curve` every M in the range
/// is evaluated instead of stopping at the first qualifying one.
pub fn cmd_minm(
    manifest: &RunManifest,
    algorithm: Algorithm,
    full_curve: bool,
) -> Result<MinmOutput, CliError> {
    let c = &manifest.config;
    let criterion = SuccessCriterion {
        tolerance: c.success_tol,
        min_fraction: c.minm_fraction,
    };
    let arg = |e: Error| CliError::Argument(e.to_string());
    let (found, curve) = if full_curve {
        let curve = success_curve(
            &c.spec,
            algorithm,
            &c.configs,
            criterion,
            &c.seeds,
            &c.minm_range,
            manifest.jobs,
        )
        .map_err(arg)?;
        let found = curve
            .iter()
            .find(|p| p.success_rate >= criterion.min_fraction)
            .map(|p| p.m);
        (found, curve)
    } else {
        let s = find_min_measurements(
            &c.spec,
            algorithm,
            &c.configs,
            criterion,
            &c.seeds,
            &c.minm_range,
            manifest.jobs,
        )
        .map_err(arg)?;
        (s.found, s.curve)
    };

    let mut csv = String::from("m,success_rate,error_median\n");
    for p in &curve {
        csv.push_str(&format!("{},{},{}\n", p.m, p.success_rate, fmt_error(p.error_median)));
    }
    let path = manifest.write(&format!("minm_{algorithm}.csv"), &csv)?;
    Ok(MinmOutput { found, curve, path })
}
