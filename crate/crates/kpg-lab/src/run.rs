//! `run`: execute one experiment (or a seed sweep) and persist its trace.

use std::path::{Path, PathBuf};

use kpg_core::engine::{gsppm_solve, train};
use kpg_core::tabular::kpg_tabular_train;
use kpg_core::trace::ConvergenceTrace;

use crate::config::{AlgoKind, ExperimentConfig};
use crate::csvio;
use crate::error::LabError;

/// Files written by one `run` invocation.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    /// Trace CSVs, in seed order for sweeps.
    pub traces: Vec<PathBuf>,
    /// Echo configs, parallel to `traces`.
    pub echoes: Vec<PathBuf>,
    /// Sweep index file listing the traces in seed order.
    pub index: Option<PathBuf>,
}

/// Base output path: explicit `--out` wins, then the config's `out` key,
/// then the config path with its extension dropped.
fn base_path(config_path: &Path, config: &ExperimentConfig, out: Option<&Path>) -> PathBuf {
    if let Some(path) = out {
        return path.to_path_buf();
    }
    if let Some(path) = &config.out {
        return PathBuf::from(path);
    }
    config_path.with_extension("")
}

/// Execute the experiment described by an already-resolved config. The
/// config is mutated so the echo pins the drawn start.
fn execute(config: &mut ExperimentConfig) -> Result<ConvergenceTrace, LabError> {
    let rates = config.rates()?;
    match config.algo {
        AlgoKind::Kpg => {
            let game = config.game.build_differentiable()?;
            let theta0 = config.resolve_start(game.as_ref())?;
            let mut opt = config.optimizer.build(&game.dims());
            let reference = game.known_optimum();
            let (_, trace) = train(
                game.as_ref(),
                &theta0,
                &rates,
                config.k_levels,
                config.steps,
                &mut opt,
                reference.as_ref(),
            )?;
            Ok(trace)
        }
        AlgoKind::Gsppm => {
            let game = config.game.build_differentiable()?;
            let theta0 = config.resolve_start(game.as_ref())?;
            let reference = game.known_optimum();
            let outcome = gsppm_solve(
                game.as_ref(),
                &theta0,
                &rates,
                config.tolerance,
                config.gsppm_k_max,
                reference.as_ref(),
            )?;
            if !outcome.converged {
                log::warn!(
                    "fixed-point recursion did not converge within {} levels",
                    config.gsppm_k_max
                );
            }
            let mut trace = ConvergenceTrace::new();
            trace.extend(outcome.rows);
            Ok(trace)
        }
        AlgoKind::TabularKmappo => {
            let game = config.game.build_tabular()?;
            let (_, trace) = kpg_tabular_train(
                &game,
                config.k_levels,
                &rates,
                config.steps,
                config.eps_clip,
                config.clip_mode.into(),
                config.seed,
            )?;
            Ok(trace)
        }
    }
}

/// Run one seed and write `{base}.trace.csv` + `{base}.echo.json`.
fn run_single(
    mut config: ExperimentConfig,
    base: &Path,
) -> Result<(PathBuf, PathBuf), LabError> {
    let trace = execute(&mut config)?;
    let trace_path = PathBuf::from(format!("{}.trace.csv", base.display()));
    let echo_path = PathBuf::from(format!("{}.echo.json", base.display()));
    if let Some(parent) = trace_path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| LabError::io(parent, e))?;
        }
    }
    csvio::write_trace(&trace_path, &trace)?;
    std::fs::write(&echo_path, config.echo_json()).map_err(|e| LabError::io(&echo_path, e))?;
    log::info!("wrote {} ({} rows)", trace_path.display(), trace.rows.len());
    Ok((trace_path, echo_path))
}

/// Entry point for the `run` subcommand.
///
/// With `--seeds a..b` every seed in the half-open range runs as its own
/// task on its own output files, and `{base}.index.txt` lists the trace
/// files in seed order.
pub fn cmd_run(
    config_path: &Path,
    out: Option<&Path>,
    seed: Option<u64>,
    seeds: Option<(u64, u64)>,
) -> Result<RunArtifacts, LabError> {
    let mut config = ExperimentConfig::load(config_path)?;
    if let Some(s) = seed {
        config.seed = s;
    }
    let base = base_path(config_path, &config, out);

    let Some((lo, hi)) = seeds else {
        let (trace, echo) = run_single(config, &base)?;
        return Ok(RunArtifacts { traces: vec![trace], echoes: vec![echo], index: None });
    };

    if lo >= hi {
        return Err(LabError::Config(format!(
            "`--seeds {lo}..{hi}` is empty; the range is half-open and needs a < b"
        )));
    }

    // Independent seeds run concurrently; each writes only its own files,
    // so the only shared step is the index written after all joins.
    let seeds_list: Vec<u64> = (lo..hi).collect();
    let mut results: Vec<Option<Result<(PathBuf, PathBuf), LabError>>> =
        (0..seeds_list.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for &s in &seeds_list {
            let mut per_seed = config.clone();
            per_seed.seed = s;
            let seed_base = PathBuf::from(format!("{}.seed{s}", base.display()));
            handles.push(scope.spawn(move || run_single(per_seed, &seed_base)));
        }
        for (slot, handle) in results.iter_mut().zip(handles) {
            *slot = Some(handle.join().unwrap_or_else(|_| {
                Err(LabError::Numeric("a sweep task panicked".into()))
            }));
        }
    });

    let mut traces = Vec::new();
    let mut echoes = Vec::new();
    for result in results {
        let (trace, echo) = result.expect("every slot is filled")?;
        traces.push(trace);
        echoes.push(echo);
    }

    let index = PathBuf::from(format!("{}.index.txt", base.display()));
    let mut listing = String::new();
    for t in &traces {
        listing.push_str(&t.display().to_string());
        listing.push('\n');
    }
    std::fs::write(&index, listing).map_err(|e| LabError::io(&index, e))?;
    Ok(RunArtifacts { traces, echoes, index: Some(index) })
}
