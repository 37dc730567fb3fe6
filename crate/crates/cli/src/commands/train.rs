//! `train`: ordinal labels from the stored improvements, then imitation
//! training of the view scorer.

use nbvlab::vin::{make_labels, save_checkpoint, train, TrainingSample};

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;
use crate::runner::{scene_list, RunDirs, Split};

pub fn cmd_train(cfg: &ExperimentConfig) -> CliResult<()> {
    let started = std::time::Instant::now();
    let dirs = RunDirs::new(&cfg.out_dir);
    dirs.ensure(&dirs.checkpoints())?;

    // Load every training scene's records in scene order.
    let mut records = Vec::new();
    for spec in scene_list(cfg, Split::Train) {
        let path = dirs.label_file(spec.seed);
        if !path.exists() {
            return Err(CliError::MissingInput(format!(
                "label file {} not found; run gen-labels first",
                path.display()
            )));
        }
        records.extend(crate::dataset::read_label_file(&path)?);
    }
    if records.is_empty() {
        return Err(CliError::MissingInput("label dataset is empty".into()));
    }

    let raw: Vec<(u32, f64)> = records.iter().map(|r| (r.stage, r.rri)).collect();
    let labels = make_labels(&raw)?;
    let dataset: Vec<TrainingSample> = records
        .into_iter()
        .zip(labels)
        .map(|(r, label)| TrainingSample {
            bundle: r.bundle,
            label,
            stage: r.stage,
            raw_rri: r.rri,
            scene: r.scene_seed,
        })
        .collect();

    let profile = cfg.vin_profile();
    let (params, stats) = train(&profile, &dataset, &cfg.train_config())?;
    save_checkpoint(&params, &dirs.checkpoint_file())?;

    let mut csv = String::from("epoch,mean_loss,within1_acc\n");
    for s in &stats {
        csv.push_str(&format!("{},{},{}\n", s.epoch, s.mean_loss, s.within1_acc));
    }
    std::fs::write(dirs.training_csv(), csv)
        .map_err(|e| CliError::io(dirs.training_csv().display().to_string(), e))?;

    RunManifest::upsert(
        &cfg.out_dir,
        &cfg.hash(),
        "train",
        started.elapsed().as_secs_f64(),
        vec![],
    )?;
    let last = stats.last().expect("at least one epoch");
    println!(
        "train: {} samples, {} epochs, final loss {:.4}, within-1 {:.3} ({:.1}s)",
        dataset.len(),
        stats.len(),
        last.mean_loss,
        last.within1_acc,
        started.elapsed().as_secs_f64()
    );
    Ok(())
}
