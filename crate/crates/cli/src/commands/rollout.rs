//! `rollout`: run every (eval scene × criterion) cell, persist per-scene
//! traces, and aggregate the mean per-step curves.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;

use nbvlab::features::{build_feature_grid, write_channel_pgm};
use nbvlab::geom::write_ply;
use nbvlab::policy::{run_policy, FitnessCriterion};
use nbvlab::seed::sub_seed;
use nbvlab::vin::load_checkpoint;

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};
use crate::manifest::{RunManifest, SceneEntry};
use crate::runner::{build_scene, scene_list, RunDirs, Split};

pub fn cmd_rollout(cfg: &ExperimentConfig, dump_grids: bool) -> CliResult<()> {
    let started = std::time::Instant::now();
    let dirs = RunDirs::new(&cfg.out_dir);
    dirs.ensure(&dirs.rollouts())?;
    let pipeline = cfg.recon_pipeline();
    let term = cfg.termination();
    let fparams = cfg.feature_params();

    let vin_params = if cfg.rollout.criteria.iter().any(|c| c == "vin") {
        let path = dirs.checkpoint_file();
        if !path.exists() {
            return Err(CliError::MissingInput(format!(
                "checkpoint {} not found; run train first",
                path.display()
            )));
        }
        let params = load_checkpoint(&path)?;
        let expect = cfg.vin_profile();
        if params.profile != expect {
            return Err(CliError::Config(format!(
                "checkpoint profile '{}' does not match configured '{}'",
                params.profile.id, expect.id
            )));
        }
        Some(Arc::new(params))
    } else {
        None
    };

    let specs = scene_list(cfg, Split::Eval);
    let cells: Vec<CliResult<SceneEntry>> = specs
        .par_iter()
        .map(|spec| {
            let scene = build_scene(cfg, *spec)?;
            let ctx = scene.rollout_ctx(&pipeline);
            let oracle_gt = Arc::new(scene.oracle_ground_truth());
            let mut files = Vec::new();
            for name in &cfg.rollout.criteria {
                let criterion = match name.as_str() {
                    "coverage" => FitnessCriterion::Coverage,
                    "oracle" => FitnessCriterion::OracleRri(oracle_gt.clone()),
                    "vin" => FitnessCriterion::Vin {
                        params: vin_params.clone().expect("checkpoint loaded"),
                        features: fparams,
                    },
                    "random" => FitnessCriterion::Random {
                        seed: sub_seed(cfg.seed, "criterion-noise", spec.seed),
                    },
                    other => return Err(CliError::Config(format!("unknown criterion '{other}'"))),
                };
                let record = run_policy(
                    &ctx,
                    &criterion,
                    &term,
                    sub_seed(cfg.seed, "rollout", spec.seed),
                )?;
                let csv_rel = format!("rollouts/{name}_scene_{:05}.csv", spec.seed);
                let ply_rel = format!("rollouts/{name}_scene_{:05}_final.ply", spec.seed);
                record.write_csv(&dirs.root.join(&csv_rel))?;
                write_ply(&record.final_cloud, &dirs.root.join(&ply_rel))?;
                files.push(csv_rel);
                files.push(ply_rel);
            }
            Ok(SceneEntry {
                seed: spec.seed,
                category: spec.category.name().to_string(),
                split: "eval".into(),
                files,
            })
        })
        .collect();

    let mut entries = Vec::new();
    for c in cells {
        entries.push(c?);
    }

    // Single-threaded merge: aggregate per-step means straight from the
    // per-scene CSV values so a recomputation from the files is exact.
    let mut agg = String::from("criterion,step,mean_cd_cm,mean_coverage_pct,mean_f1,n_scenes\n");
    for name in &cfg.rollout.criteria {
        let mut per_step: BTreeMap<u64, (f64, f64, f64, u64)> = BTreeMap::new();
        for spec in &specs {
            let rows = read_rollout_csv(&dirs.root.join(format!(
                "rollouts/{name}_scene_{:05}.csv",
                spec.seed
            )))?;
            for (step, cd_cm, cov, f1) in rows {
                let cell = per_step.entry(step).or_insert((0.0, 0.0, 0.0, 0));
                cell.0 += cd_cm;
                cell.1 += cov;
                cell.2 += f1;
                cell.3 += 1;
            }
        }
        for (step, (cd, cov, f1, n)) in per_step {
            let nf = n as f64;
            agg.push_str(&format!(
                "{},{},{},{},{},{}\n",
                name,
                step,
                cd / nf,
                cov / nf,
                f1 / nf,
                n
            ));
        }
    }
    std::fs::write(dirs.aggregate_csv(), &agg)
        .map_err(|e| CliError::io(dirs.aggregate_csv().display().to_string(), e))?;

    if dump_grids {
        dump_debug_grids(cfg, &dirs)?;
    }

    let manifest = RunManifest::upsert(
        &cfg.out_dir,
        &cfg.hash(),
        "rollout",
        started.elapsed().as_secs_f64(),
        entries,
    )?;
    manifest.verify_files(&cfg.out_dir)?;
    println!(
        "rollout: {} scenes x {} criteria in {:.1}s -> {}",
        specs.len(),
        cfg.rollout.criteria.len(),
        started.elapsed().as_secs_f64(),
        dirs.aggregate_csv().display()
    );
    Ok(())
}

/// Parses (step, cd_cm, coverage_pct, f1) rows from a rollout CSV.
pub fn read_rollout_csv(path: &std::path::Path) -> CliResult<Vec<(u64, f64, f64, f64)>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(path.display().to_string(), e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(CliError::Config(format!(
                "{}: row {i} has {} fields",
                path.display(),
                fields.len()
            )));
        }
        let parse = |s: &str| -> CliResult<f64> {
            s.parse::<f64>()
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
        };
        out.push((
            fields[0]
                .parse::<u64>()
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?,
            parse(fields[3])?,
            parse(fields[4])?,
            parse(fields[5])?,
        ));
    }
    Ok(out)
}

/// Dumps the five feature-grid channels of a few candidate views of the
/// first eval scene as PGM images.
fn dump_debug_grids(cfg: &ExperimentConfig, dirs: &RunDirs) -> CliResult<()> {
    dirs.ensure(&dirs.debug())?;
    let spec = scene_list(cfg, Split::Eval)[0];
    let scene = build_scene(cfg, spec)?;
    let pipeline = cfg.recon_pipeline();
    let state = nbvlab::policy::init_state(
        &scene.catalog,
        &scene.mesh,
        &pipeline,
        sub_seed(cfg.seed, "rollout", spec.seed),
        cfg.rollout.speed_mps,
    )?;
    let fparams = cfg.feature_params();
    let channel_names = ["nx", "ny", "nz", "visibility", "depth"];
    for cand in (0..scene.catalog.len()).filter(|i| !state.visited.contains(i)).take(3) {
        let grid = build_feature_grid(
            &state.reconstruction,
            &scene.catalog.views[cand],
            fparams.grid_res,
            fparams.radius_px(),
        )?;
        for (c, cname) in channel_names.iter().enumerate() {
            let path = dirs
                .debug()
                .join(format!("scene_{:05}_view_{cand:03}_{cname}.pgm", spec.seed));
            write_channel_pgm(&grid, c, &path)?;
        }
    }
    Ok(())
}
