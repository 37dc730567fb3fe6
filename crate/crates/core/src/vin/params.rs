//! Network shape profiles and parameter storage.

use num_traits::Float;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::vin::labels::NUM_THRESHOLDS;

/// Input channels of the encoder: the 5 pooled-mean channels concatenated
/// with the 5 pooled-variance channels.
pub const INPUT_CHANNELS: usize = 10;
/// Scalars appended to the encoder output: normalized inside/outside empty
/// counts and the normalized base-view count.
pub const EXTRA_FEATURES: usize = 3;

/// Everything that fixes the network architecture and its input scaling.
/// Stored in checkpoints; inference rejects bundles from other shapes.
#[derive(Debug, Clone, PartialEq)]
pub struct VinProfile {
    pub id: String,
    /// Pooled grid resolution the encoder consumes (= grid_res / 2).
    pub pooled_res: u32,
    /// Unpooled feature-grid resolution (normalizes the empty counts).
    pub grid_res: u32,
    /// Output channels of the four stride-2 conv stages.
    pub conv_channels: [usize; 4],
    /// Hidden width of the two fully-connected layers before the CORAL head.
    pub hidden: usize,
    /// Input scale of the visibility channel (variance scaled by its square).
    pub vis_scale: f32,
    /// Input scale of the depth channel (variance scaled by its square).
    pub depth_scale: f32,
    /// Base-view count divisor.
    pub base_scale: f32,
}

impl VinProfile {
    /// Laptop-scale profile: 64² pooled grids, ~0.5 M parameters.
    pub fn desk() -> Self {
        VinProfile {
            id: "desk".into(),
            pooled_res: 64,
            grid_res: 128,
            conv_channels: [16, 32, 64, 128],
            hidden: 256,
            vis_scale: 0.125,
            depth_scale: 0.04,
            base_scale: 16.0,
        }
    }

    /// Full-scale profile: 256² pooled grids from 512² feature grids.
    pub fn paper() -> Self {
        VinProfile {
            id: "paper".into(),
            pooled_res: 256,
            grid_res: 512,
            conv_channels: [32, 64, 128, 256],
            hidden: 256,
            vis_scale: 0.125,
            depth_scale: 0.04,
            base_scale: 16.0,
        }
    }

    /// Tiny profile for finite-difference gradient checks.
    pub fn micro() -> Self {
        VinProfile {
            id: "micro".into(),
            pooled_res: 4,
            grid_res: 8,
            conv_channels: [4, 8, 8, 8],
            hidden: 16,
            vis_scale: 0.125,
            depth_scale: 0.04,
            base_scale: 16.0,
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "desk" => Ok(Self::desk()),
            "paper" => Ok(Self::paper()),
            "micro" => Ok(Self::micro()),
            other => Err(Error::Parameter(format!("unknown profile '{other}'"))),
        }
    }

    /// Spatial sizes of the conv-stage outputs (stride 2, pad 1, kernel 3).
    pub fn stage_sizes(&self) -> [usize; 4] {
        let mut s = self.pooled_res as usize;
        let mut out = [0usize; 4];
        for o in &mut out {
            s = (s + 1) / 2;
            *o = s;
        }
        out
    }

    /// Length of the vector entering the fully-connected head.
    pub fn head_input(&self) -> usize {
        self.conv_channels[3] + EXTRA_FEATURES
    }
}

/// One tensor per field; shared by parameter values, gradients, and
/// optimizer moments. Conv weights are `[ky][kx][cin][cout]` (output
/// channels innermost), dense weights `[in][out]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSet<F> {
    pub conv_w: [Vec<F>; 4],
    pub conv_b: [Vec<F>; 4],
    pub fc1_w: Vec<F>,
    pub fc1_b: Vec<F>,
    pub fc2_w: Vec<F>,
    pub fc2_b: Vec<F>,
    pub coral_w: Vec<F>,
    pub coral_b: Vec<F>,
}

impl<F: Float> ParamSet<F> {
    pub fn zeros_like_profile(profile: &VinProfile) -> Self {
        let z = F::zero();
        let cin = |stage: usize| {
            if stage == 0 {
                INPUT_CHANNELS
            } else {
                profile.conv_channels[stage - 1]
            }
        };
        let conv_w = std::array::from_fn(|s| {
            vec![z; 9 * cin(s) * profile.conv_channels[s]]
        });
        let conv_b = std::array::from_fn(|s| vec![z; profile.conv_channels[s]]);
        ParamSet {
            conv_w,
            conv_b,
            fc1_w: vec![z; profile.head_input() * profile.hidden],
            fc1_b: vec![z; profile.hidden],
            fc2_w: vec![z; profile.hidden * profile.hidden],
            fc2_b: vec![z; profile.hidden],
            coral_w: vec![z; profile.hidden],
            coral_b: vec![z; NUM_THRESHOLDS],
        }
    }

    /// Fixed-order enumeration used by the optimizer, the checkpoint writer,
    /// and the finite-difference check.
    pub fn tensor_names() -> [&'static str; 14] {
        [
            "conv0.w", "conv0.b", "conv1.w", "conv1.b", "conv2.w", "conv2.b", "conv3.w",
            "conv3.b", "fc1.w", "fc1.b", "fc2.w", "fc2.b", "coral.w", "coral.b",
        ]
    }

    pub fn tensors(&self) -> [&Vec<F>; 14] {
        [
            &self.conv_w[0],
            &self.conv_b[0],
            &self.conv_w[1],
            &self.conv_b[1],
            &self.conv_w[2],
            &self.conv_b[2],
            &self.conv_w[3],
            &self.conv_b[3],
            &self.fc1_w,
            &self.fc1_b,
            &self.fc2_w,
            &self.fc2_b,
            &self.coral_w,
            &self.coral_b,
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut Vec<F>; 14] {
        let ParamSet {
            conv_w: [cw0, cw1, cw2, cw3],
            conv_b: [cb0, cb1, cb2, cb3],
            fc1_w,
            fc1_b,
            fc2_w,
            fc2_b,
            coral_w,
            coral_b,
        } = self;
        [
            cw0, cb0, cw1, cb1, cw2, cb2, cw3, cb3, fc1_w, fc1_b, fc2_w, fc2_b, coral_w, coral_b,
        ]
    }

    pub fn param_count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    /// `self += other`, tensor by tensor.
    pub fn add_assign(&mut self, other: &ParamSet<F>)
    where
        F: std::ops::AddAssign,
    {
        for (dst, src) in self.tensors_mut().into_iter().zip(other.tensors()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += *s;
            }
        }
    }

    pub fn scale(&mut self, k: F) {
        for dst in self.tensors_mut() {
            for d in dst.iter_mut() {
                *d = *d * k;
            }
        }
    }
}

/// The trained model: architecture profile plus parameter values.
#[derive(Debug, Clone, PartialEq)]
pub struct VinParams<F> {
    pub profile: VinProfile,
    pub set: ParamSet<F>,
}

impl VinParams<f32> {
    /// Widens every parameter to f64 (for gradient verification).
    pub fn to_f64(&self) -> VinParams<f64> {
        let mut set = ParamSet::<f64>::zeros_like_profile(&self.profile);
        for (dst, src) in set.tensors_mut().into_iter().zip(self.set.tensors()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d = f64::from(*s);
            }
        }
        VinParams {
            profile: self.profile.clone(),
            set,
        }
    }
}

/// He-uniform initialization, biases zero except the CORAL thresholds,
/// which start as a descending ramp so rank monotonicity holds from step 0.
pub fn init_params(profile: &VinProfile, seed: u64) -> VinParams<f32> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut set = ParamSet::<f32>::zeros_like_profile(profile);
    let init_dense = |w: &mut Vec<f32>, fan_in: usize, rng: &mut ChaCha20Rng| {
        let limit = (6.0 / fan_in as f64).sqrt();
        for x in w.iter_mut() {
            *x = rng.gen_range(-limit..limit) as f32;
        }
    };
    for s in 0..4 {
        let cin = if s == 0 {
            INPUT_CHANNELS
        } else {
            profile.conv_channels[s - 1]
        };
        init_dense(&mut set.conv_w[s], 9 * cin, &mut rng);
    }
    init_dense(&mut set.fc1_w, profile.head_input(), &mut rng);
    init_dense(&mut set.fc2_w, profile.hidden, &mut rng);
    init_dense(&mut set.coral_w, profile.hidden, &mut rng);
    let k = NUM_THRESHOLDS as f32;
    for (j, b) in set.coral_b.iter_mut().enumerate() {
        *b = 1.5 - 3.0 * (j as f32 + 0.5) / k;
    }
    VinParams {
        profile: profile.clone(),
        set,
    }
}
