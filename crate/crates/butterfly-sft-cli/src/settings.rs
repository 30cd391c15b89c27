//! Resolution of defaults, config-file entries and command-line flags into
//! one validated run configuration.

use std::path::PathBuf;

use crate::{CliError, CommonOpts};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone)]
pub struct Settings {
    pub dim: usize,
    pub n_list: Vec<u64>,
    pub p_list: Vec<usize>,
    pub density: f64,
    pub seed: u64,
    pub sample: usize,
    pub geometry_x: String,
    pub geometry_k: String,
    pub out: Option<PathBuf>,
    pub format: ReportFormat,
    pub threads: usize,
    pub raw: bool,
}

impl Settings {
    /// The single N of a non-bench command.
    pub fn n(&self) -> u64 {
        self.n_list[0]
    }

    /// The single p of a non-bench command.
    pub fn p(&self) -> usize {
        self.p_list[0]
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn resolve(opts: &CommonOpts) -> Result<Settings, CliError> {
    // start from the config file if given, then let flags override
    let mut merged = opts.clone();
    if let Some(path) = &opts.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let from_file = parse_config(&text, &path.display().to_string())?;
        merged = overlay(from_file, merged);
    }

    let dim = merged.dim.unwrap_or(2);
    if dim != 2 && dim != 3 {
        return Err(usage(format!("dim must be 2 or 3, got {dim}")));
    }
    let n_list = parse_u64_list(merged.n.as_deref().unwrap_or("64"))?;
    for &n in &n_list {
        if n < 4 || !butterfly_sft::is_power_of_two(n) {
            return Err(usage(format!("N must be a power of two >= 4, got {n}")));
        }
    }
    let p_list = parse_usize_list(merged.p.as_deref().unwrap_or("5"))?;
    for &p in &p_list {
        if !(3..=15).contains(&p) {
            return Err(usage(format!("p must lie in 3..=15, got {p}")));
        }
    }
    let density = merged.density.unwrap_or(if dim == 2 { 5.0 } else { 25.0 });
    if density <= 0.0 {
        return Err(usage(format!("density must be positive, got {density}")));
    }
    let format = match merged.format.as_deref().unwrap_or("csv") {
        "csv" => ReportFormat::Csv,
        "json" => ReportFormat::Json,
        other => return Err(usage(format!("format must be csv or json, got {other:?}"))),
    };
    let geometry_x = merged
        .geometry_x
        .unwrap_or_else(|| if dim == 2 { "ellipse" } else { "sphere" }.into());
    let geometry_k = merged
        .geometry_k
        .unwrap_or_else(|| if dim == 2 { "ellipse-k" } else { "torus" }.into());

    Ok(Settings {
        dim,
        n_list,
        p_list,
        density,
        seed: merged.seed.unwrap_or(1),
        sample: merged.sample.unwrap_or(200).max(1),
        geometry_x,
        geometry_k,
        out: merged.out,
        format,
        threads: merged.threads.unwrap_or(1),
        raw: merged.raw,
    })
}

/// Config-file entries become the base; explicit flags stay on top.
fn overlay(base: CommonOpts, flags: CommonOpts) -> CommonOpts {
    CommonOpts {
        config: flags.config,
        dim: flags.dim.or(base.dim),
        n: flags.n.or(base.n),
        p: flags.p.or(base.p),
        density: flags.density.or(base.density),
        seed: flags.seed.or(base.seed),
        sample: flags.sample.or(base.sample),
        geometry_x: flags.geometry_x.or(base.geometry_x),
        geometry_k: flags.geometry_k.or(base.geometry_k),
        out: flags.out.or(base.out),
        format: flags.format.or(base.format),
        threads: flags.threads.or(base.threads),
        raw: flags.raw || base.raw,
    }
}

/// Flat `key = value` (or `key value`) lines; `#` starts a comment.
fn parse_config(text: &str, path: &str) -> Result<CommonOpts, CliError> {
    let mut out = CommonOpts::default();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = match line.split_once('=') {
            Some((k, v)) => (k.trim(), v.trim()),
            None => match line.split_once(char::is_whitespace) {
                Some((k, v)) => (k.trim(), v.trim()),
                None => {
                    return Err(usage(format!(
                        "{path}:{}: expected `key = value`, got {line:?}",
                        lineno + 1
                    )))
                }
            },
        };
        let bad = |what: &str| {
            usage(format!("{path}:{}: bad {what}: {value:?}", lineno + 1))
        };
        match key {
            "dim" => out.dim = Some(value.parse().map_err(|_| bad("dim"))?),
            "n" => out.n = Some(value.to_string()),
            "p" => out.p = Some(value.to_string()),
            "density" => out.density = Some(value.parse().map_err(|_| bad("density"))?),
            "seed" => out.seed = Some(value.parse().map_err(|_| bad("seed"))?),
            "sample" => out.sample = Some(value.parse().map_err(|_| bad("sample"))?),
            "geometry_x" => out.geometry_x = Some(value.to_string()),
            "geometry_k" => out.geometry_k = Some(value.to_string()),
            "out" => out.out = Some(PathBuf::from(value)),
            "format" => out.format = Some(value.to_string()),
            "threads" => out.threads = Some(value.parse().map_err(|_| bad("threads"))?),
            "raw" => out.raw = value.parse().map_err(|_| bad("raw"))?,
            other => {
                return Err(usage(format!(
                    "{path}:{}: unknown key {other:?}",
                    lineno + 1
                )))
            }
        }
    }
    Ok(out)
}

fn parse_u64_list(s: &str) -> Result<Vec<u64>, CliError> {
    let vals: Result<Vec<u64>, _> = s.split(',').map(|t| t.trim().parse()).collect();
    let vals = vals.map_err(|_| usage(format!("bad integer list {s:?}")))?;
    if vals.is_empty() {
        return Err(usage("empty N list"));
    }
    Ok(vals)
}

fn parse_usize_list(s: &str) -> Result<Vec<usize>, CliError> {
    let vals: Result<Vec<usize>, _> = s.split(',').map(|t| t.trim().parse()).collect();
    let vals = vals.map_err(|_| usage(format!("bad integer list {s:?}")))?;
    if vals.is_empty() {
        return Err(usage("empty p list"));
    }
    Ok(vals)
}
