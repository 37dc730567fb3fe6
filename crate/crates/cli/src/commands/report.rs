//! `report`: per-criterion terminal quality and relative improvements.

use std::collections::BTreeMap;
use std::path::Path;

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};
use crate::runner::{scene_list, RunDirs, Split};

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub criterion: String,
    pub mean_final_cd_cm: f64,
    /// (CD_coverage - CD_this) / CD_coverage.
    pub rel_improvement_vs_coverage: Option<f64>,
    pub rel_improvement_vs_random: Option<f64>,
}

/// Mean terminal Chamfer distance per criterion from the per-scene traces,
/// plus the relative improvement over the coverage and random baselines.
pub fn compute_report(cfg: &ExperimentConfig, run_dir: &Path) -> CliResult<Vec<ReportRow>> {
    let dirs = RunDirs::new(run_dir);
    let specs = scene_list(cfg, Split::Eval);
    let mut terminal: BTreeMap<String, f64> = BTreeMap::new();
    for name in &cfg.rollout.criteria {
        let mut sum = 0.0;
        let mut n = 0u64;
        for spec in &specs {
            let path = dirs.rollout_csv(name, spec.seed);
            if !path.exists() {
                return Err(CliError::MissingInput(format!(
                    "rollout trace {} not found; run rollout first",
                    path.display()
                )));
            }
            let rows = super::rollout::read_rollout_csv(&path)?;
            let last = rows.last().ok_or_else(|| {
                CliError::Config(format!("{} has no data rows", path.display()))
            })?;
            sum += last.1;
            n += 1;
        }
        terminal.insert(name.clone(), sum / n as f64);
    }
    let coverage = terminal.get("coverage").copied();
    let random = terminal.get("random").copied();
    let rel = |base: Option<f64>, x: f64| base.map(|b| (b - x) / b);
    Ok(cfg
        .rollout
        .criteria
        .iter()
        .map(|name| {
            let cd = terminal[name];
            ReportRow {
                criterion: name.clone(),
                mean_final_cd_cm: cd,
                rel_improvement_vs_coverage: rel(coverage, cd),
                rel_improvement_vs_random: rel(random, cd),
            }
        })
        .collect())
}

pub fn cmd_report(cfg: &ExperimentConfig, run_dir: &Path) -> CliResult<()> {
    let rows = compute_report(cfg, run_dir)?;
    let dirs = RunDirs::new(run_dir);

    let fmt_rel = |r: Option<f64>| {
        r.map(|v| format!("{:+.1}%", v * 100.0))
            .unwrap_or_else(|| "-".into())
    };
    println!("criterion   final CD (cm)   vs coverage   vs random");
    for row in &rows {
        println!(
            "{:<11} {:>13.4}   {:>11}   {:>9}",
            row.criterion,
            row.mean_final_cd_cm,
            fmt_rel(row.rel_improvement_vs_coverage),
            fmt_rel(row.rel_improvement_vs_random),
        );
    }

    let mut csv =
        String::from("criterion,mean_final_cd_cm,rel_improvement_vs_coverage,rel_improvement_vs_random\n");
    for row in &rows {
        let opt = |r: Option<f64>| r.map(|v| v.to_string()).unwrap_or_default();
        csv.push_str(&format!(
            "{},{},{},{}\n",
            row.criterion,
            row.mean_final_cd_cm,
            opt(row.rel_improvement_vs_coverage),
            opt(row.rel_improvement_vs_random)
        ));
    }
    std::fs::write(dirs.report_csv(), csv)
        .map_err(|e| CliError::io(dirs.report_csv().display().to_string(), e))?;
    println!("report written to {}", dirs.report_csv().display());
    Ok(())
}
