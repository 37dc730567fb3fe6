//! `gen-scenes`: materialize the procedural scenes for inspection.

use rayon::prelude::*;

use nbvlab::geom::write_ply;

use crate::config::ExperimentConfig;
use crate::error::CliResult;
use crate::manifest::{RunManifest, SceneEntry};
use crate::runner::{build_scene, scene_list, RunDirs, Split};

pub fn cmd_gen_scenes(cfg: &ExperimentConfig) -> CliResult<()> {
    let started = std::time::Instant::now();
    let dirs = RunDirs::new(&cfg.out_dir);
    dirs.ensure(&dirs.scenes())?;
    let specs: Vec<_> = scene_list(cfg, Split::Train)
        .into_iter()
        .chain(scene_list(cfg, Split::Eval))
        .collect();
    let entries: Vec<CliResult<SceneEntry>> = specs
        .par_iter()
        .map(|spec| {
            let scene = build_scene(cfg, *spec)?;
            let obj_rel = format!(
                "scenes/{}_{:05}_{}.obj",
                spec.split.name(),
                spec.seed,
                spec.category
            );
            let gt_rel = format!("scenes/{}_{:05}_gt.ply", spec.split.name(), spec.seed);
            scene.mesh.write_obj(&dirs.root.join(&obj_rel))?;
            write_ply(&scene.gt_cloud, &dirs.root.join(&gt_rel))?;
            Ok(SceneEntry {
                seed: spec.seed,
                category: spec.category.name().to_string(),
                split: spec.split.name().to_string(),
                files: vec![obj_rel, gt_rel],
            })
        })
        .collect();
    let mut scene_entries = Vec::with_capacity(entries.len());
    for e in entries {
        scene_entries.push(e?);
    }
    let n = scene_entries.len();
    let manifest = RunManifest::upsert(
        &cfg.out_dir,
        &cfg.hash(),
        "gen-scenes",
        started.elapsed().as_secs_f64(),
        scene_entries,
    )?;
    manifest.verify_files(&cfg.out_dir)?;
    println!("gen-scenes: wrote {n} scenes to {}", dirs.scenes().display());
    Ok(())
}
