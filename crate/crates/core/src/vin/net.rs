//! Forward and backward passes of the view scorer.
//!
//! The math is generic over the scalar type: production runs in f32, the
//! finite-difference gradient check instantiates the same code in f64.

use num_traits::Float;

use crate::error::{Error, Result};
use crate::features::{FeatureBundle, CHANNELS};
use crate::vin::labels::OrdinalLabel;
use crate::vin::params::{ParamSet, VinParams, INPUT_CHANNELS};

/// Scalar bound for the network math.
pub trait Scalar:
    Float
    + std::ops::AddAssign
    + std::ops::SubAssign
    + std::ops::MulAssign
    + std::fmt::Debug
    + Send
    + Sync
    + 'static
{
    fn c(x: f64) -> Self;
}

impl Scalar for f32 {
    fn c(x: f64) -> Self {
        x as f32
    }
}

impl Scalar for f64 {
    fn c(x: f64) -> Self {
        x
    }
}

/// Dot product with fixed 8-lane association (deterministic and
/// vectorizable).
fn dot<F: Scalar>(a: &[F], b: &[F]) -> F {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [F::zero(); 8];
    let n8 = a.len() - a.len() % 8;
    let mut i = 0;
    while i < n8 {
        for l in 0..8 {
            acc[l] += a[i + l] * b[i + l];
        }
        i += 8;
    }
    let mut s = ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
    while i < a.len() {
        s += a[i] * b[i];
        i += 1;
    }
    s
}

fn sigmoid<F: Scalar>(x: F) -> F {
    F::one() / (F::one() + (-x).exp())
}

/// Everything the backward pass needs from one forward evaluation.
#[derive(Debug, Clone)]
pub struct Activations<F> {
    pub input: Vec<F>,
    pub input_res: usize,
    /// Post-ReLU output of each conv stage.
    pub conv_out: [Vec<F>; 4],
    pub stage_res: [usize; 4],
    pub head_in: Vec<F>,
    pub fc1_out: Vec<F>,
    pub fc2_out: Vec<F>,
    pub logits: Vec<F>,
}

/// Builds the scaled network input from a feature bundle: the pooled means
/// and variances channel-concatenated (10 channels, HWC) plus the three
/// normalized scalars (inside, outside, base count).
pub fn input_from_bundle<F: Scalar>(
    params: &VinParams<F>,
    bundle: &FeatureBundle,
) -> Result<(Vec<F>, [F; 3])> {
    let profile = &params.profile;
    if bundle.f_p.res != profile.pooled_res || bundle.grid_res != profile.grid_res {
        return Err(Error::Dimension(format!(
            "bundle grids {}/{} do not match profile '{}' ({}/{})",
            bundle.f_p.res, bundle.grid_res, profile.id, profile.pooled_res, profile.grid_res
        )));
    }
    let res = profile.pooled_res as usize;
    let vis = f64::from(profile.vis_scale);
    let dep = f64::from(profile.depth_scale);
    let mean_scale = [1.0, 1.0, 1.0, vis, dep];
    let var_scale = [1.0, 1.0, 1.0, vis * vis, dep * dep];
    let mut x = vec![F::zero(); res * res * INPUT_CHANNELS];
    for p in 0..res * res {
        let src = p * CHANNELS;
        let dst = p * INPUT_CHANNELS;
        for c in 0..CHANNELS {
            x[dst + c] = F::c(f64::from(bundle.f_p.data[src + c]) * mean_scale[c]);
            x[dst + CHANNELS + c] = F::c(f64::from(bundle.f_v.data[src + c]) * var_scale[c]);
        }
    }
    let total_px = f64::from(bundle.grid_res) * f64::from(bundle.grid_res);
    let extras = [
        F::c(bundle.f_empty.0 as f64 / total_px),
        F::c(bundle.f_empty.1 as f64 / total_px),
        F::c(f64::from(bundle.f_base) / f64::from(profile.base_scale)),
    ];
    Ok((x, extras))
}

/// 3×3 stride-2 pad-1 convolution; output spatial size is ceil(n/2).
fn conv_forward<F: Scalar>(
    x: &[F],
    in_res: usize,
    cin: usize,
    w: &[F],
    b: &[F],
    cout: usize,
) -> (Vec<F>, usize) {
    let out_res = in_res.div_ceil(2);
    let mut y = vec![F::zero(); out_res * out_res * cout];
    for oy in 0..out_res {
        for ox in 0..out_res {
            let acc = &mut y[(oy * out_res + ox) * cout..][..cout];
            acc.copy_from_slice(b);
            for ky in 0..3usize {
                let iy = (2 * oy + ky).wrapping_sub(1);
                if iy >= in_res {
                    continue;
                }
                for kx in 0..3usize {
                    let ix = (2 * ox + kx).wrapping_sub(1);
                    if ix >= in_res {
                        continue;
                    }
                    let xrow = &x[(iy * in_res + ix) * cin..][..cin];
                    let wbase = (ky * 3 + kx) * cin * cout;
                    for (ci, &xv) in xrow.iter().enumerate() {
                        if xv == F::zero() {
                            continue;
                        }
                        let wrow = &w[wbase + ci * cout..][..cout];
                        for (a, &wv) in acc.iter_mut().zip(wrow) {
                            *a += xv * wv;
                        }
                    }
                }
            }
        }
    }
    (y, out_res)
}

fn relu_inplace<F: Scalar>(x: &mut [F]) {
    for v in x.iter_mut() {
        if !(*v > F::zero()) {
            *v = F::zero();
        }
    }
}

fn dense_forward<F: Scalar>(x: &[F], w: &[F], b: &[F], out: usize) -> Vec<F> {
    let mut y = b.to_vec();
    for (i, &xv) in x.iter().enumerate() {
        if xv == F::zero() {
            continue;
        }
        let wrow = &w[i * out..][..out];
        for (a, &wv) in y.iter_mut().zip(wrow) {
            *a += xv * wv;
        }
    }
    y
}

/// Full forward pass keeping intermediate activations.
pub fn forward_cached<F: Scalar>(
    params: &VinParams<F>,
    bundle: &FeatureBundle,
) -> Result<Activations<F>> {
    let (input, extras) = input_from_bundle(params, bundle)?;
    Ok(forward_from_input(params, input, extras))
}

pub(crate) fn forward_from_input<F: Scalar>(
    params: &VinParams<F>,
    input: Vec<F>,
    extras: [F; 3],
) -> Activations<F> {
    let profile = &params.profile;
    let set = &params.set;
    let mut res = profile.pooled_res as usize;
    let mut cin = INPUT_CHANNELS;
    let mut cur: &[F] = &input;
    let mut conv_out: [Vec<F>; 4] = Default::default();
    let mut stage_res = [0usize; 4];
    for s in 0..4 {
        let cout = profile.conv_channels[s];
        let (mut y, out_res) = conv_forward(cur, res, cin, &set.conv_w[s], &set.conv_b[s], cout);
        relu_inplace(&mut y);
        conv_out[s] = y;
        stage_res[s] = out_res;
        res = out_res;
        cin = cout;
        cur = &conv_out[s];
    }
    // Global average pool.
    let c4 = profile.conv_channels[3];
    let npix = stage_res[3] * stage_res[3];
    let inv = F::c(1.0 / npix as f64);
    let mut head_in = vec![F::zero(); c4 + extras.len()];
    for p in 0..npix {
        let row = &conv_out[3][p * c4..][..c4];
        for (h, &v) in head_in[..c4].iter_mut().zip(row) {
            *h += v;
        }
    }
    for h in head_in[..c4].iter_mut() {
        *h *= inv;
    }
    head_in[c4..].copy_from_slice(&extras);

    let mut fc1_out = dense_forward(&head_in, &set.fc1_w, &set.fc1_b, profile.hidden);
    relu_inplace(&mut fc1_out);
    let mut fc2_out = dense_forward(&fc1_out, &set.fc2_w, &set.fc2_b, profile.hidden);
    relu_inplace(&mut fc2_out);

    let shared = dot(&set.coral_w, &fc2_out);
    let logits: Vec<F> = set.coral_b.iter().map(|&b| shared + b).collect();

    let input_res = profile.pooled_res as usize;
    Activations {
        input,
        input_res,
        conv_out,
        stage_res,
        head_in,
        fc1_out,
        fc2_out,
        logits,
    }
}

/// Rank logits and the scalar fitness score (expected rank, the sum of the
/// threshold sigmoids, a real in `[0, 14]`).
pub fn forward<F: Scalar>(params: &VinParams<F>, bundle: &FeatureBundle) -> Result<(Vec<F>, F)> {
    let acts = forward_cached(params, bundle)?;
    let score = score_from_logits(&acts.logits);
    Ok((acts.logits, score))
}

pub fn score_from_logits<F: Scalar>(logits: &[F]) -> F {
    let mut s = F::zero();
    for &l in logits {
        s += sigmoid(l);
    }
    s
}

/// Predicted ordinal class: the number of thresholds passed.
pub fn class_from_logits<F: Scalar>(logits: &[F]) -> usize {
    logits.iter().filter(|&&l| l > F::zero()).count()
}

/// CORAL loss: the sum over thresholds of binary cross-entropy between
/// `sigmoid(logit_j)` and the prefix targets. Computed in the numerically
/// stable logit form.
pub fn coral_loss<F: Scalar>(logits: &[F], label: &OrdinalLabel) -> F {
    let targets = label.binary_targets();
    let mut loss = F::zero();
    for (j, &l) in logits.iter().enumerate() {
        let t = if targets[j] { F::one() } else { F::zero() };
        let max_part = if l > F::zero() { l } else { F::zero() };
        loss += max_part - l * t + (F::one() + (-l.abs()).exp()).ln();
    }
    loss
}

/// dLoss/dlogit_j = sigmoid(logit_j) - target_j.
pub fn coral_loss_grad<F: Scalar>(logits: &[F], label: &OrdinalLabel) -> Vec<F> {
    let targets = label.binary_targets();
    logits
        .iter()
        .enumerate()
        .map(|(j, &l)| {
            let t = if targets[j] { F::one() } else { F::zero() };
            sigmoid(l) - t
        })
        .collect()
}

/// Accumulates parameter gradients for one sample into `grads`.
pub fn backward<F: Scalar>(
    params: &VinParams<F>,
    acts: &Activations<F>,
    dlogits: &[F],
    grads: &mut ParamSet<F>,
) {
    let profile = &params.profile;
    let set = &params.set;
    let hidden = profile.hidden;
    let c4 = profile.conv_channels[3];

    // CORAL layer: logits_j = w·h + b_j.
    let mut dshared = F::zero();
    for (gb, &dl) in grads.coral_b.iter_mut().zip(dlogits) {
        *gb += dl;
        dshared += dl;
    }
    for (gw, &h) in grads.coral_w.iter_mut().zip(&acts.fc2_out) {
        *gw += dshared * h;
    }
    let mut dfc2 = vec![F::zero(); hidden];
    for ((d, &w), &post) in dfc2.iter_mut().zip(&set.coral_w).zip(&acts.fc2_out) {
        if post > F::zero() {
            *d = dshared * w;
        }
    }

    // fc2.
    let mut dfc1 = vec![F::zero(); hidden];
    dense_backward(
        &acts.fc1_out,
        &set.fc2_w,
        &dfc2,
        &mut grads.fc2_w,
        &mut grads.fc2_b,
        &mut dfc1,
    );
    for (d, &post) in dfc1.iter_mut().zip(&acts.fc1_out) {
        if !(post > F::zero()) {
            *d = F::zero();
        }
    }

    // fc1.
    let mut dhead = vec![F::zero(); acts.head_in.len()];
    dense_backward(
        &acts.head_in,
        &set.fc1_w,
        &dfc1,
        &mut grads.fc1_w,
        &mut grads.fc1_b,
        &mut dhead,
    );

    // Global average pool: broadcast back over pixels.
    let npix = acts.stage_res[3] * acts.stage_res[3];
    let inv = F::c(1.0 / npix as f64);
    let mut dcur = vec![F::zero(); npix * c4];
    for p in 0..npix {
        let row = &mut dcur[p * c4..][..c4];
        for (d, &dh) in row.iter_mut().zip(&dhead[..c4]) {
            *d = dh * inv;
        }
    }

    // Conv stages in reverse.
    for s in (0..4).rev() {
        // ReLU mask of this stage's output.
        for (d, &post) in dcur.iter_mut().zip(&acts.conv_out[s]) {
            if !(post > F::zero()) {
                *d = F::zero();
            }
        }
        let (x, in_res, cin): (&[F], usize, usize) = if s == 0 {
            (&acts.input, acts.input_res, INPUT_CHANNELS)
        } else {
            (
                &acts.conv_out[s - 1],
                acts.stage_res[s - 1],
                profile.conv_channels[s - 1],
            )
        };
        let dprev = conv_backward(
            x,
            in_res,
            cin,
            &set.conv_w[s],
            profile.conv_channels[s],
            &dcur,
            acts.stage_res[s],
            &mut grads.conv_w[s],
            &mut grads.conv_b[s],
            s > 0,
        );
        if s > 0 {
            dcur = dprev;
        }
    }
}

fn dense_backward<F: Scalar>(
    x: &[F],
    w: &[F],
    dy: &[F],
    dw: &mut [F],
    db: &mut [F],
    dx: &mut [F],
) {
    let out = dy.len();
    for (gb, &d) in db.iter_mut().zip(dy) {
        *gb += d;
    }
    for (i, &xv) in x.iter().enumerate() {
        let wrow = &w[i * out..][..out];
        dx[i] = dot(wrow, dy);
        if xv == F::zero() {
            continue;
        }
        let gw = &mut dw[i * out..][..out];
        for (g, &d) in gw.iter_mut().zip(dy) {
            *g += xv * d;
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn conv_backward<F: Scalar>(
    x: &[F],
    in_res: usize,
    cin: usize,
    w: &[F],
    cout: usize,
    dout: &[F],
    out_res: usize,
    dw: &mut [F],
    db: &mut [F],
    want_dx: bool,
) -> Vec<F> {
    let mut dx = vec![F::zero(); if want_dx { in_res * in_res * cin } else { 0 }];
    for oy in 0..out_res {
        for ox in 0..out_res {
            let dacc = &dout[(oy * out_res + ox) * cout..][..cout];
            for (gb, &d) in db.iter_mut().zip(dacc) {
                *gb += d;
            }
            for ky in 0..3usize {
                let iy = (2 * oy + ky).wrapping_sub(1);
                if iy >= in_res {
                    continue;
                }
                for kx in 0..3usize {
                    let ix = (2 * ox + kx).wrapping_sub(1);
                    if ix >= in_res {
                        continue;
                    }
                    let xrow = &x[(iy * in_res + ix) * cin..][..cin];
                    let wbase = (ky * 3 + kx) * cin * cout;
                    if want_dx {
                        let dxrow = &mut dx[(iy * in_res + ix) * cin..][..cin];
                        for ci in 0..cin {
                            dxrow[ci] += dot(&w[wbase + ci * cout..][..cout], dacc);
                        }
                    }
                    for (ci, &xv) in xrow.iter().enumerate() {
                        if xv == F::zero() {
                            continue;
                        }
                        let gw = &mut dw[wbase + ci * cout..][..cout];
                        for (g, &d) in gw.iter_mut().zip(dacc) {
                            *g += xv * d;
                        }
                    }
                }
            }
        }
    }
    dx
}
