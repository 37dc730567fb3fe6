//! `gen-labels`: exhaustive oracle improvement for every candidate view at
//! every capture stage of the demonstrator trajectory.

use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::dataset::write_label_file;
use crate::error::CliResult;
use crate::manifest::{RunManifest, SceneEntry};
use crate::runner::{build_scene, generate_scene_labels, scene_list, RunDirs, Split};

pub fn cmd_gen_labels(cfg: &ExperimentConfig) -> CliResult<()> {
    let started = std::time::Instant::now();
    let dirs = RunDirs::new(&cfg.out_dir);
    dirs.ensure(&dirs.labels())?;
    let specs = scene_list(cfg, Split::Train);
    let pooled_res = cfg.features.grid_res / 2;

    let entries: Vec<CliResult<(SceneEntry, usize)>> = specs
        .par_iter()
        .map(|spec| {
            let scene = build_scene(cfg, *spec)?;
            let records = generate_scene_labels(cfg, &scene)?;
            let rel = format!("labels/scene_{:05}.vinl", spec.seed);
            write_label_file(
                &dirs.root.join(&rel),
                pooled_res,
                cfg.features.grid_res,
                &records,
            )?;
            Ok((
                SceneEntry {
                    seed: spec.seed,
                    category: spec.category.name().to_string(),
                    split: "train".into(),
                    files: vec![rel],
                },
                records.len(),
            ))
        })
        .collect();

    let mut scene_entries = Vec::new();
    let mut total = 0usize;
    for e in entries {
        let (entry, n) = e?;
        scene_entries.push(entry);
        total += n;
    }
    let manifest = RunManifest::upsert(
        &cfg.out_dir,
        &cfg.hash(),
        "gen-labels",
        started.elapsed().as_secs_f64(),
        scene_entries,
    )?;
    manifest.verify_files(&cfg.out_dir)?;
    println!(
        "gen-labels: {total} records across {} scenes in {:.1}s",
        specs.len(),
        started.elapsed().as_secs_f64()
    );
    Ok(())
}
