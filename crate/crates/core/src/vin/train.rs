//! Imitation training: AdamW with cosine-annealed steps over per-object
//! batches, deterministic for a fixed seed regardless of worker count.

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::features::FeatureBundle;
use crate::seed::sub_rng;
use crate::vin::labels::OrdinalLabel;
use crate::vin::net::{backward, class_from_logits, coral_loss, coral_loss_grad, forward_cached};
use crate::vin::params::{init_params, ParamSet, VinParams, VinProfile};

/// One labeled candidate view.
#[derive(Debug, Clone)]
pub struct TrainingSample {
    pub bundle: FeatureBundle,
    pub label: OrdinalLabel,
    /// Base-view count when the candidate was scored (>= 2).
    pub stage: u32,
    pub raw_rri: f64,
    /// Scene identifier; samples of one (scene, stage) form a batch.
    pub scene: u64,
}

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub weight_decay: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 30,
            lr: 1e-3,
            weight_decay: 0.01,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub mean_loss: f64,
    pub within1_acc: f64,
}

const ADAM_BETA1: f32 = 0.9;
const ADAM_BETA2: f32 = 0.999;
const ADAM_EPS: f32 = 1e-8;
/// Fixed gradient-accumulation chunk, independent of the worker count, so
/// the reduction order (and therefore every f32 rounding) is reproducible.
const GRAD_CHUNK: usize = 8;

/// Trains the scorer by imitation of the precomputed oracle labels.
///
/// Batches are the (scene, stage) groups — all candidates scored against one
/// reconstruction snapshot — shuffled each epoch. After every optimizer step
/// the CORAL thresholds are projected to descending order, which keeps the
/// predicted rank probabilities monotone.
pub fn train(
    profile: &VinProfile,
    dataset: &[TrainingSample],
    config: &TrainConfig,
) -> Result<(VinParams<f32>, Vec<EpochStats>)> {
    if dataset.is_empty() {
        return Err(Error::Parameter("training dataset is empty".into()));
    }
    if config.epochs == 0 {
        return Err(Error::Parameter("epochs must be >= 1".into()));
    }
    // Per-object batches in a deterministic base order.
    use std::collections::BTreeMap;
    let mut batches: BTreeMap<(u64, u32), Vec<usize>> = BTreeMap::new();
    for (i, s) in dataset.iter().enumerate() {
        batches.entry((s.scene, s.stage)).or_default().push(i);
    }
    let base_order: Vec<Vec<usize>> = batches.into_values().collect();

    let mut params = init_params(profile, crate::seed::sub_seed(config.seed, "vin-init", 0));
    let mut m = ParamSet::<f32>::zeros_like_profile(profile);
    let mut v = ParamSet::<f32>::zeros_like_profile(profile);
    let total_steps = (config.epochs * base_order.len()) as f64;
    let mut step = 0usize;
    let mut stats = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        let mut order: Vec<usize> = (0..base_order.len()).collect();
        order.shuffle(&mut sub_rng(config.seed, "train-shuffle", epoch as u64));
        let mut epoch_loss = 0.0f64;
        let mut epoch_within1 = 0usize;
        let mut epoch_samples = 0usize;

        for &bi in &order {
            let batch = &base_order[bi];
            let (mut grads, loss_sum, within1) = batch_gradients(&params, dataset, batch)?;
            let scale = 1.0 / batch.len() as f32;
            grads.scale(scale);
            epoch_loss += loss_sum;
            epoch_within1 += within1;
            epoch_samples += batch.len();

            let lr_t = config.lr * 0.5 * (1.0 + (std::f64::consts::PI * step as f64 / total_steps).cos());
            adamw_step(
                &mut params.set,
                &grads,
                &mut m,
                &mut v,
                step as i32 + 1,
                lr_t as f32,
                config.weight_decay as f32,
            );
            // Projection: thresholds stay descending. The permutation is
            // applied to the Adam moments as well so optimizer state stays
            // attached to the threshold it was estimated for.
            sort_thresholds(&mut params.set.coral_b, &mut m.coral_b, &mut v.coral_b);
            step += 1;
        }
        let mean_loss = epoch_loss / epoch_samples as f64;
        if !mean_loss.is_finite() {
            return Err(Error::Parameter(format!(
                "non-finite training loss in epoch {epoch}"
            )));
        }
        stats.push(EpochStats {
            epoch,
            mean_loss,
            within1_acc: epoch_within1 as f64 / epoch_samples as f64,
        });
    }
    Ok((params, stats))
}

/// Sum of per-sample gradients over one batch, reduced in fixed chunk order.
fn batch_gradients(
    params: &VinParams<f32>,
    dataset: &[TrainingSample],
    batch: &[usize],
) -> Result<(ParamSet<f32>, f64, usize)> {
    let chunks: Vec<&[usize]> = batch.chunks(GRAD_CHUNK).collect();
    let partials: Vec<Result<(ParamSet<f32>, f64, usize)>> = chunks
        .par_iter()
        .map(|chunk| {
            let mut grads = ParamSet::<f32>::zeros_like_profile(&params.profile);
            let mut loss_sum = 0.0f64;
            let mut within1 = 0usize;
            for &i in *chunk {
                let sample = &dataset[i];
                let acts = forward_cached(params, &sample.bundle)?;
                let loss = coral_loss(&acts.logits, &sample.label);
                if !loss.is_finite() {
                    return Err(Error::Parameter(format!(
                        "non-finite loss on sample {i}"
                    )));
                }
                loss_sum += f64::from(loss);
                let predicted = class_from_logits(&acts.logits);
                if predicted.abs_diff(sample.label.class_index) <= 1 {
                    within1 += 1;
                }
                let dlogits = coral_loss_grad(&acts.logits, &sample.label);
                backward(params, &acts, &dlogits, &mut grads);
            }
            Ok((grads, loss_sum, within1))
        })
        .collect();
    let mut total = ParamSet::<f32>::zeros_like_profile(&params.profile);
    let mut loss_sum = 0.0f64;
    let mut within1 = 0usize;
    for part in partials {
        let (g, l, w) = part?;
        total.add_assign(&g);
        loss_sum += l;
        within1 += w;
    }
    Ok((total, loss_sum, within1))
}

fn sort_thresholds(b: &mut [f32], m: &mut [f32], v: &mut [f32]) {
    let mut order: Vec<usize> = (0..b.len()).collect();
    order.sort_by(|&i, &j| b[j].partial_cmp(&b[i]).unwrap().then(i.cmp(&j)));
    let apply = |x: &mut [f32], order: &[usize]| {
        let old = x.to_vec();
        for (dst, &src) in x.iter_mut().zip(order) {
            *dst = old[src];
        }
    };
    apply(b, &order);
    apply(m, &order);
    apply(v, &order);
}

fn adamw_step(
    params: &mut ParamSet<f32>,
    grads: &ParamSet<f32>,
    m: &mut ParamSet<f32>,
    v: &mut ParamSet<f32>,
    t: i32,
    lr: f32,
    weight_decay: f32,
) {
    let bc1 = 1.0 - ADAM_BETA1.powi(t);
    let bc2 = 1.0 - ADAM_BETA2.powi(t);
    let names = ParamSet::<f32>::tensor_names();
    for ((((p, g), mm), vv), name) in params
        .tensors_mut()
        .into_iter()
        .zip(grads.tensors())
        .zip(m.tensors_mut())
        .zip(v.tensors_mut())
        .zip(names)
    {
        // Decoupled weight decay on weight matrices only; decaying biases
        // would squeeze the CORAL thresholds together.
        let wd = if name.ends_with(".w") { weight_decay } else { 0.0 };
        for i in 0..p.len() {
            let gi = g[i];
            mm[i] = ADAM_BETA1 * mm[i] + (1.0 - ADAM_BETA1) * gi;
            vv[i] = ADAM_BETA2 * vv[i] + (1.0 - ADAM_BETA2) * gi * gi;
            let mhat = mm[i] / bc1;
            let vhat = vv[i] / bc2;
            p[i] -= lr * (mhat / (vhat.sqrt() + ADAM_EPS) + wd * p[i]);
        }
    }
}
