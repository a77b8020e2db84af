use std::fs;
use std::path::{Path, PathBuf};

use evigrid::grid::io::write_grid;
use evigrid::pipeline::{render, ClassIou};
use evigrid::simulator::{generate_scenario, ScenarioConfig};
use evigrid::{run_experiment, Error, EvalReport, PredictionSource, Recording, Result};

use crate::config::{Overrides, RunConfig, THREADS_ENV};

/// Present in an output directory until every file of the run is written.
pub const PARTIAL_MARKER: &str = "PARTIAL";

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.into(), source }
}

pub fn simulate(config_path: &Path, out: &Path) -> Result<()> {
    let config = ScenarioConfig::load(config_path)?;
    let recording = generate_scenario(&config, out)?;
    println!("wrote {} epochs ({} scans) to {}", recording.epochs().len(), recording.scans.len(), out.display());
    Ok(())
}

fn iou_row(label: &str, iou: &ClassIou) -> String {
    format!("{label:<22} {:>7.2} {:>7.2} {:>7.2}", iou.free, iou.occupied, iou.unknown)
}

fn header() -> String {
    format!("{:<22} {:>7} {:>7} {:>7}", "ISM used for mapping", "fr.", "oc.", "un.")
}

pub fn map(config_path: &Path, overrides: &Overrides) -> Result<()> {
    let config = RunConfig::load(config_path, overrides)?;
    let env = std::env::var(THREADS_ENV).ok();
    let threads = config.thread_limit(env.as_deref())?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| Error::Invariant(format!("thread pool: {e}")))?;

    let recording = Recording::load(&config.recording)?;
    let source = match &config.predictions {
        Some(dir) => Some(PredictionSource::Directory(dir.clone())),
        None => PredictionSource::for_recording(&recording.meta),
    };
    let experiment = pool.install(|| run_experiment(&recording, &config.variants, &config.params, source.as_ref()))?;

    let out = &config.output;
    fs::create_dir_all(out).map_err(io(out))?;
    let marker = out.join(PARTIAL_MARKER);
    fs::write(&marker, "run incomplete; files in this directory may be missing or stale\n").map_err(io(&marker))?;

    let resolved = out.join("config.json");
    fs::write(&resolved, serde_json::to_string_pretty(&config).expect("config serializes") + "\n").map_err(io(&resolved))?;
    write_grid(out.join("reference.evgr"), &experiment.reference)?;
    if let Some(truth) = &experiment.ground_truth {
        write_grid(out.join("ground_truth.evgr"), truth)?;
    }
    println!("{}", header());
    for run in &experiment.runs {
        let dir = out.join(run.variant.name());
        fs::create_dir_all(&dir).map_err(io(&dir))?;
        write_grid(dir.join("final.evgr"), &run.map)?;
        run.report.write_json(dir.join("report.json"))?;
        run.report.write_csv(dir.join("report.csv"))?;
        render(&run.map, dir.join("render.png"))?;
        println!("{}", iou_row(run.variant.name(), &run.report.iou));
    }
    fs::remove_file(&marker).map_err(io(&marker))?;
    Ok(())
}

pub fn compare(paths: &[PathBuf]) -> Result<()> {
    let reports = paths.iter().map(EvalReport::read_json).collect::<Result<Vec<_>>>()?;
    let first = &reports[0].config_hash;
    if reports.iter().any(|r| &r.config_hash != first) {
        eprintln!("warning: reports come from different configurations");
    }
    println!("{}", header());
    for report in &reports {
        println!("{}", iou_row(report.variant.name(), &report.iou));
    }
    Ok(())
}
