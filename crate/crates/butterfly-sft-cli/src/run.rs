//! Subcommand implementations.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use butterfly_sft::geometry::{attach_random_charges, sample_curve_2d, sample_surface_3d, PointSet};
use butterfly_sft::io::{read_point_set_file, write_point_set_file, write_potentials, AnyPointSet};
use butterfly_sft::oracle::{direct_transform, estimate_error, sample_indices, SAMPLE_SEED};
use butterfly_sft::transform::plan;
use butterfly_sft::Complex64;
use serde::Serialize;

use crate::settings::{resolve, ReportFormat, Settings};
use crate::{geospec, CliError, CommonOpts, TransformOpts};

/// Above this point count the direct reference time is always extrapolated
/// from a sample instead of measured in full.
const FULL_DIRECT_LIMIT: usize = 50_000;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn sci(x: f64, raw: bool) -> String {
    if raw {
        format!("{x:.17e}")
    } else {
        format!("{x:.2e}")
    }
}

/// Runs `f` serially or inside a dedicated rayon pool of `threads` workers
/// (0 = one per core).
fn with_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    if threads == 1 {
        Ok(f())
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| usage(format!("cannot build thread pool: {e}")))?;
        Ok(pool.install(f))
    }
}

fn make_pair_2d(st: &Settings, n: u64) -> Result<(PointSet<2>, PointSet<2>), CliError> {
    let spec_x = geospec::parse(&st.geometry_x, 2)?;
    let spec_k = geospec::parse(&st.geometry_k, 2)?;
    let targets = sample_curve_2d(&spec_x, n, st.density)?;
    let sources = attach_random_charges(sample_curve_2d(&spec_k, n, st.density)?, st.seed);
    Ok((sources, targets))
}

fn make_pair_3d(st: &Settings, n: u64) -> Result<(PointSet<3>, PointSet<3>), CliError> {
    let spec_x = geospec::parse(&st.geometry_x, 3)?;
    let spec_k = geospec::parse(&st.geometry_k, 3)?;
    let targets = sample_surface_3d(&spec_x, n, st.density)?;
    let sources = attach_random_charges(sample_surface_3d(&spec_k, n, st.density)?, st.seed);
    Ok((sources, targets))
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

pub fn generate(opts: &CommonOpts) -> Result<(), CliError> {
    let st = resolve(opts)?;
    let prefix = st
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("points"));
    let src_path = with_extension(&prefix, "src.pts");
    let tgt_path = with_extension(&prefix, "tgt.pts");
    let (n_src, n_tgt) = match st.dim {
        2 => {
            let (sources, targets) = make_pair_2d(&st, st.n())?;
            write_point_set_file(&src_path, &sources).map_err(|e| io_err(&src_path, e))?;
            write_point_set_file(&tgt_path, &targets).map_err(|e| io_err(&tgt_path, e))?;
            (sources.len(), targets.len())
        }
        _ => {
            let (sources, targets) = make_pair_3d(&st, st.n())?;
            write_point_set_file(&src_path, &sources).map_err(|e| io_err(&src_path, e))?;
            write_point_set_file(&tgt_path, &targets).map_err(|e| io_err(&tgt_path, e))?;
            (sources.len(), targets.len())
        }
    };
    println!("wrote {} ({n_src} sources, with charges)", src_path.display());
    println!("wrote {} ({n_tgt} targets)", tgt_path.display());
    Ok(())
}

fn with_extension(prefix: &Path, ext: &str) -> PathBuf {
    let mut name = prefix.file_name().unwrap_or_default().to_os_string();
    name.push(".");
    name.push(ext);
    prefix.with_file_name(name)
}

// ---------------------------------------------------------------------------
// transform
// ---------------------------------------------------------------------------

pub fn transform(opts: &TransformOpts) -> Result<(), CliError> {
    let st = resolve(&opts.common)?;
    match (&opts.sources, &opts.targets) {
        (Some(src), Some(tgt)) => {
            let sources = read_point_set_file(src)?;
            let targets = read_point_set_file(tgt)?;
            if sources.dim() != targets.dim() {
                return Err(usage(format!(
                    "dimension mismatch between files: {} vs {}",
                    sources.dim(),
                    targets.dim()
                )));
            }
            if sources.n_scale() != targets.n_scale() {
                return Err(usage(format!(
                    "N mismatch between files: {} vs {}",
                    sources.n_scale(),
                    targets.n_scale()
                )));
            }
            if !sources.has_charges() {
                return Err(usage("source file does not carry charges"));
            }
            if targets.has_charges() {
                return Err(usage("target file must not carry charges"));
            }
            match (sources, targets) {
                (AnyPointSet::D2(s), AnyPointSet::D2(t)) => transform_pair(&st, &s, &t),
                (AnyPointSet::D3(s), AnyPointSet::D3(t)) => transform_pair(&st, &s, &t),
                _ => unreachable!("dimension checked above"),
            }
        }
        (None, None) => match st.dim {
            2 => {
                let (sources, targets) = make_pair_2d(&st, st.n())?;
                transform_pair(&st, &sources, &targets)
            }
            _ => {
                let (sources, targets) = make_pair_3d(&st, st.n())?;
                transform_pair(&st, &sources, &targets)
            }
        },
        _ => Err(usage("--sources and --targets must be given together")),
    }
}

fn transform_pair<const D: usize>(
    st: &Settings,
    sources: &PointSet<D>,
    targets: &PointSet<D>,
) -> Result<(), CliError> {
    let charges = sources
        .charges()
        .ok_or_else(|| usage("sources carry no charges"))?
        .to_vec();
    let p = st.p();
    let t0 = Instant::now();
    let potentials = with_pool(st.threads, || {
        let mut plan = plan(sources, targets, p)?;
        plan.set_parallel(st.threads != 1);
        plan.transform(&charges)
    })??;
    eprintln!(
        "transform: {} sources -> {} targets, p = {p}, {:.3}s",
        sources.len(),
        targets.len(),
        t0.elapsed().as_secs_f64()
    );
    match &st.out {
        Some(path) => {
            let file = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
            let mut buf = std::io::BufWriter::new(file);
            write_potentials(&mut buf, targets, &potentials)?;
            buf.flush().map_err(|e| io_err(path, e))?;
        }
        None => {
            let stdout = std::io::stdout();
            write_potentials(stdout.lock(), targets, &potentials)?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// verify / bench
// ---------------------------------------------------------------------------

/// One benchmark row.
#[derive(Debug, Clone, Serialize)]
pub struct BenchRecord {
    pub n: u64,
    pub p: usize,
    /// Max of source and target counts.
    pub count: usize,
    pub t_a: f64,
    pub t_d: f64,
    pub speedup: f64,
    pub eps_a: f64,
}

/// Measures one (N, p) cell: transform time (median of `reps` full runs),
/// sampled error, and the direct reference time (measured in full only for
/// small instances).
fn run_cell<const D: usize>(
    st: &Settings,
    sources: &PointSet<D>,
    targets: &PointSet<D>,
    n: u64,
    p: usize,
    reps: usize,
    full_direct_allowed: bool,
) -> Result<BenchRecord, CliError> {
    let charges = sources.charges().expect("generated with charges").to_vec();
    let parallel = st.threads != 1;

    let (approx, t_a) = with_pool(st.threads, || -> Result<_, butterfly_sft::Error> {
        let mut times = Vec::with_capacity(reps);
        let mut out = Vec::new();
        for _ in 0..reps {
            let t0 = Instant::now();
            let mut plan = plan(sources, targets, p)?;
            plan.set_parallel(parallel);
            out = plan.transform(&charges)?;
            times.push(t0.elapsed().as_secs_f64());
        }
        times.sort_by(f64::total_cmp);
        Ok((out, times[times.len() / 2]))
    })??;

    // sampled reference: error estimate plus timing for the extrapolation
    let sample = st.sample.min(targets.len());
    let idx = sample_indices(targets.len(), sample, SAMPLE_SEED);
    let sample_targets: Vec<[f64; D]> = idx.iter().map(|&i| targets.points()[i]).collect();
    let t0 = Instant::now();
    let exact = direct_transform(sources.points(), &charges, &sample_targets, n)?;
    let t_probe = t0.elapsed().as_secs_f64();
    let approx_sample: Vec<Complex64> = idx.iter().map(|&i| approx[i]).collect();
    let eps_a = estimate_error(idx, exact, approx_sample)?.eps_a;

    let count = sources.len().max(targets.len());
    let t_d = if full_direct_allowed && count <= FULL_DIRECT_LIMIT {
        let t0 = Instant::now();
        let full = direct_transform(sources.points(), &charges, targets.points(), n)?;
        std::hint::black_box(full);
        t0.elapsed().as_secs_f64()
    } else {
        t_probe * targets.len() as f64 / sample as f64
    };

    Ok(BenchRecord {
        n,
        p,
        count,
        t_a,
        t_d,
        speedup: t_d / t_a,
        eps_a,
    })
}

pub fn verify(opts: &CommonOpts) -> Result<(), CliError> {
    let st = resolve(opts)?;
    let record = match st.dim {
        2 => {
            let (sources, targets) = make_pair_2d(&st, st.n())?;
            run_cell(&st, &sources, &targets, st.n(), st.p(), 1, false)?
        }
        _ => {
            let (sources, targets) = make_pair_3d(&st, st.n())?;
            run_cell(&st, &sources, &targets, st.n(), st.p(), 1, false)?
        }
    };
    let report = match st.format {
        ReportFormat::Json => {
            let mut value = serde_json::to_value(&record).expect("serializable record");
            value["sample"] = st.sample.into();
            value["seed"] = st.seed.into();
            value["dim"] = st.dim.into();
            format!("{}\n", serde_json::to_string_pretty(&value).unwrap())
        }
        ReportFormat::Csv => {
            let raw = st.raw;
            format!(
                "N = {}  p = {}  dim = {}  P = {}\n\
                 T_a = {} s  T_d (estimated) = {} s  speedup = {}\n\
                 eps_a = {}  (sample = {}, seed = {})\n",
                record.n,
                record.p,
                st.dim,
                record.count,
                sci(record.t_a, raw),
                sci(record.t_d, raw),
                sci(record.speedup, raw),
                sci(record.eps_a, raw),
                st.sample,
                st.seed
            )
        }
    };
    emit(&st.out, &report)
}

pub fn bench(opts: &CommonOpts) -> Result<(), CliError> {
    let st = resolve(opts)?;
    let mut records = Vec::new();
    for &p in &st.p_list {
        for &n in &st.n_list {
            eprintln!("bench: N = {n}, p = {p} ...");
            let record = match st.dim {
                2 => {
                    let (sources, targets) = make_pair_2d(&st, n)?;
                    run_cell(&st, &sources, &targets, n, p, 3, true)?
                }
                _ => {
                    let (sources, targets) = make_pair_3d(&st, n)?;
                    run_cell(&st, &sources, &targets, n, p, 3, true)?
                }
            };
            eprintln!(
                "bench: N = {n}, p = {p}: T_a = {:.2e}s, speedup = {:.1}, eps_a = {:.2e}",
                record.t_a, record.speedup, record.eps_a
            );
            records.push(record);
        }
    }
    let report = match st.format {
        ReportFormat::Csv => bench_csv(&records, st.raw),
        ReportFormat::Json => {
            format!("{}\n", serde_json::to_string_pretty(&records).unwrap())
        }
    };
    emit(&st.out, &report)
}

pub fn bench_csv(records: &[BenchRecord], raw: bool) -> String {
    let mut out = String::from("N,p,P,T_a,T_d,speedup,eps_a\n");
    for r in records {
        let count = if raw {
            r.count.to_string()
        } else {
            sci(r.count as f64, false)
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.n,
            r.p,
            count,
            sci(r.t_a, raw),
            sci(r.t_d, raw),
            sci(r.speedup, raw),
            sci(r.eps_a, raw)
        ));
    }
    out
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, content).map_err(|e| io_err(path, e)),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}
