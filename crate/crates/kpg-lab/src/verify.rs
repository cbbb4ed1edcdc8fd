//! `verify`: run a convergence-certificate suite and report pass/fail.

use std::path::{Path, PathBuf};

use kpg_core::theory::{
    theorem1_suite, theorem2_suite, theorem3_suite, SuiteReport, Theorem1Params, Theorem2Params,
    Theorem3Params,
};

use crate::config::ExperimentConfig;
use crate::csvio;
use crate::error::LabError;

/// Files written by one `verify` invocation.
#[derive(Debug, Clone)]
pub struct VerifyArtifacts {
    pub report: SuiteReport,
    pub detail: PathBuf,
}

/// Entry point for the `verify` subcommand.
///
/// Prints the one-line verdict (`THEOREM <n> PASS|FAIL|SKIPPED checked=<c>
/// violations=<v>`) on stdout and writes the per-check detail rows under
/// the trace schema. A skipped suite means the certificate's precondition
/// did not hold — nothing was checked, and that is not a failure.
pub fn cmd_verify(
    theorem: u8,
    config_path: &Path,
    out: Option<&Path>,
) -> Result<VerifyArtifacts, LabError> {
    let config = ExperimentConfig::load(config_path)?;
    let game = config.game.build_differentiable()?;
    let rates = config.rates()?;

    let report = match theorem {
        1 => {
            let params = Theorem1Params { seed: config.seed, ..Theorem1Params::default() };
            theorem1_suite(game.as_ref(), &rates, &params)?
        }
        2 => {
            let params = Theorem2Params { seed: config.seed, ..Theorem2Params::default() };
            theorem2_suite(game.as_ref(), &rates, &params)?
        }
        3 => {
            let params = Theorem3Params { seed: config.seed, ..Theorem3Params::default() };
            theorem3_suite(game.as_ref(), &rates, &params)?
        }
        other => {
            return Err(LabError::Config(format!(
                "no theorem {other}; choose 1, 2, or 3"
            )))
        }
    };

    let base = match out {
        Some(path) => path.to_path_buf(),
        None => config_path.with_extension(""),
    };
    let detail = PathBuf::from(format!("{}.theorem{theorem}.csv", base.display()));
    if let Some(parent) = detail.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| LabError::io(parent, e))?;
        }
    }
    csvio::write_trace(&detail, &report.detail)?;

    if let Some(reason) = &report.skip_reason {
        log::warn!("theorem {theorem} suite skipped: {reason}");
    }
    for note in &report.notes {
        log::info!("theorem {theorem}: {note}");
    }
    println!("{}", report.summary_line());
    Ok(VerifyArtifacts { report, detail })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
        let path = dir.join(name);
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(text.as_bytes()).unwrap();
        path
    }

    const QUADRATIC: &str = r#"{
        "game": {"kind": "quadratic"},
        "algo": "kpg",
        "K": 2,
        "etas": [0.1, 0.1]
    }"#;

    #[test]
    fn theorem_two_passes_on_the_canonical_quadratic() {
        let dir = tempfile::tempdir().unwrap();
        let config = write_config(dir.path(), "quad.json", QUADRATIC);
        let artifacts = cmd_verify(2, &config, None).unwrap();
        assert!(artifacts.report.passed);
        assert!(!artifacts.report.skipped);
        assert_eq!(
            artifacts.report.summary_line(),
            format!(
                "THEOREM 2 PASS checked={} violations=0",
                artifacts.report.checked
            )
        );
        // The contraction ratio heads the detail rows.
        let detail = csvio::read_trace(&artifacts.detail).unwrap();
        let ratio = detail.rows[0].bound_t1.unwrap();
        let expected = (0.9f64 / 0.95).powi(2);
        assert!((ratio - expected).abs() < 1e-10, "ratio {ratio}");
    }

    #[test]
    fn oversized_rates_skip_theorem_one_without_failing() {
        let text = r#"{
            "game": {"kind": "quadratic"},
            "algo": "kpg",
            "K": 2,
            "etas": [2.5, 2.5]
        }"#;
        let dir = tempfile::tempdir().unwrap();
        let config = write_config(dir.path(), "hot.json", text);
        let artifacts = cmd_verify(1, &config, None).unwrap();
        assert!(artifacts.report.skipped);
        assert_eq!(artifacts.report.checked, 0);
        assert!(artifacts.report.summary_line().contains("SKIPPED"));
    }

    #[test]
    fn unknown_theorem_number_is_an_input_error() {
        let dir = tempfile::tempdir().unwrap();
        let config = write_config(dir.path(), "quad.json", QUADRATIC);
        let err = cmd_verify(4, &config, None).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn tabular_games_cannot_back_a_certificate_suite() {
        let text = r#"{
            "game": {"kind": "matrix", "action_counts": [2, 2], "payoffs": [4.0, 0.0, 0.0, 2.0]},
            "algo": "tabular-kmappo",
            "K": 2,
            "etas": [0.5, 0.5]
        }"#;
        let dir = tempfile::tempdir().unwrap();
        let config = write_config(dir.path(), "matrix.json", text);
        let err = cmd_verify(2, &config, None).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
