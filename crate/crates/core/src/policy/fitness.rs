//! Candidate-view fitness criteria.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::features::FeatureParams;
use crate::geom::{chamfer_points, CameraView, KdTree3, PointCloud};
use crate::policy::{CaptureState, ReconPipeline};
use crate::render::{project_points, render_depth};
use crate::scenes::SceneMesh;
use crate::seed::sub_seed;
use crate::vin::{forward, VinParams};

/// Ground truth the oracle criterion is allowed to consult.
#[derive(Debug, Clone)]
pub struct OracleGroundTruth {
    pub mesh: SceneMesh,
    pub gt_cloud: PointCloud,
    pub gt_tree: KdTree3,
}

impl OracleGroundTruth {
    pub fn new(mesh: SceneMesh, gt_cloud: PointCloud) -> Self {
        let gt_tree = KdTree3::build(&gt_cloud.points);
        OracleGroundTruth {
            mesh,
            gt_cloud,
            gt_tree,
        }
    }
}

/// What the policy maximizes at each step.
#[derive(Debug, Clone)]
pub enum FitnessCriterion {
    /// Empty pixels when projecting the current reconstruction into the
    /// candidate view.
    Coverage,
    /// Exact relative reconstruction improvement against ground truth.
    OracleRri(Arc<OracleGroundTruth>),
    /// Learned improvement score.
    Vin {
        params: Arc<VinParams<f32>>,
        features: FeatureParams,
    },
    /// Seeded uniform noise (the random baseline).
    Random { seed: u64 },
}

impl FitnessCriterion {
    pub fn name(&self) -> &'static str {
        match self {
            FitnessCriterion::Coverage => "coverage",
            FitnessCriterion::OracleRri(_) => "oracle",
            FitnessCriterion::Vin { .. } => "vin",
            FitnessCriterion::Random { .. } => "random",
        }
    }
}

/// Number of pixels of the candidate view that the current reconstruction
/// leaves empty: `W·H - |non-empty splat pixels|`.
pub fn coverage_fitness(
    recon: &PointCloud,
    cam_q: &CameraView,
    radius_px: f64,
) -> f64 {
    let map = project_points(recon, cam_q, radius_px);
    let total = u64::from(cam_q.resolution.0) * u64::from(cam_q.resolution.1);
    (total - map.non_empty_count() as u64) as f64
}

/// Deterministic uniform score in [0, 1) for the random baseline, a pure
/// function of (seed, capture stage, candidate index) so parallel scoring
/// order cannot perturb it.
pub fn random_fitness(seed: u64, stage: usize, candidate: usize) -> f64 {
    let h = sub_seed(seed, "random-criterion", (stage as u64) << 32 | candidate as u64);
    (h >> 11) as f64 / (1u64 << 53) as f64
}

/// Per-step oracle evaluator: shares the merged base reconstruction and the
/// base Chamfer distance across all candidates of one step.
pub struct OracleStepEval<'a> {
    gt: &'a OracleGroundTruth,
    base_acc: crate::geom::VoxelAccumulator,
    /// CD(base, GT); `None` when the base reconstruction is empty.
    pub cd_base: Option<f64>,
    next_source: u32,
}

impl<'a> OracleStepEval<'a> {
    pub fn new(
        state: &CaptureState,
        gt: &'a OracleGroundTruth,
        pipeline: &'a ReconPipeline,
    ) -> Result<Self> {
        let views: Vec<_> = state
            .base_views
            .iter()
            .map(|(_, cam, depth)| (cam.clone(), depth.clone()))
            .collect();
        let base_acc = pipeline.accumulate(&views)?;
        let positions = base_acc.positions();
        let cd_base = (!positions.is_empty()).then(|| {
            let tree = KdTree3::build(&positions);
            chamfer_points(&positions, &tree, &gt.gt_cloud.points, &gt.gt_tree)
        });
        Ok(OracleStepEval {
            gt,
            base_acc,
            cd_base,
            next_source: views.len() as u32,
        })
    }

    /// RRI of adding a pre-back-projected candidate cloud. The candidate
    /// cloud must be empty when its camera duplicates a base view (the
    /// caller handles dedup via [`Self::eval_view`]).
    pub fn eval_cloud(&self, q_cloud: &PointCloud) -> f64 {
        let Some(cd_base) = self.cd_base else {
            return 0.0;
        };
        if cd_base <= 0.0 {
            log::warn!("base reconstruction already exact; oracle improvement defined as 0");
            return 0.0;
        }
        let mut acc = self.base_acc.clone();
        acc.insert_cloud(q_cloud);
        let positions = acc.positions();
        let tree = KdTree3::build(&positions);
        let cd_union = chamfer_points(&positions, &tree, &self.gt.gt_cloud.points, &self.gt.gt_tree);
        (cd_base - cd_union) / cd_base
    }

    /// Renders the candidate against the ground-truth mesh and evaluates
    /// its improvement. A candidate that bit-duplicates a base view adds
    /// nothing (set union), so its improvement is exactly 0.
    pub fn eval_view(&self, state: &CaptureState, cam_q: &CameraView) -> Result<f64> {
        if state.base_views.iter().any(|(_, c, _)| c.bit_eq(cam_q)) {
            let Some(cd_base) = self.cd_base else {
                return Ok(0.0);
            };
            return Ok(if cd_base <= 0.0 {
                0.0
            } else {
                (cd_base - cd_base) / cd_base
            });
        }
        let depth = render_depth(&self.gt.mesh, cam_q);
        let cloud = crate::geom::backproject(&depth, cam_q, self.next_source)?;
        Ok(self.eval_cloud(&cloud))
    }
}

/// One-shot oracle relative reconstruction improvement
/// `(CD(base, GT) - CD(base ∪ q, GT)) / CD(base, GT)`; may be negative.
pub fn oracle_rri(
    state: &CaptureState,
    cam_q: &CameraView,
    gt: &OracleGroundTruth,
    pipeline: &ReconPipeline,
) -> Result<f64> {
    OracleStepEval::new(state, gt, pipeline)?.eval_view(state, cam_q)
}

/// Learned fitness: featurize the current reconstruction for the candidate
/// view and run the scorer.
pub fn vin_fitness(
    state: &CaptureState,
    cam_q: &CameraView,
    params: &VinParams<f32>,
    features: &FeatureParams,
) -> Result<f64> {
    let bundle = crate::features::make_bundle(
        &state.reconstruction,
        state.base_views.len(),
        cam_q,
        features,
    )?;
    let (_, score) = forward(params, &bundle)?;
    Ok(f64::from(score))
}

/// Scores one candidate under the given criterion.
pub fn score_candidate(
    state: &CaptureState,
    cam_q: &CameraView,
    candidate: usize,
    criterion: &FitnessCriterion,
    pipeline: &ReconPipeline,
    oracle_eval: Option<&OracleStepEval<'_>>,
) -> Result<f64> {
    match criterion {
        FitnessCriterion::Coverage => Ok(coverage_fitness(
            &state.reconstruction,
            cam_q,
            pipeline.radius_px,
        )),
        FitnessCriterion::OracleRri(_) => {
            let eval = oracle_eval.ok_or_else(|| {
                Error::Parameter("oracle criterion requires a step evaluator".into())
            })?;
            eval.eval_view(state, cam_q)
        }
        FitnessCriterion::Vin { params, features } => {
            vin_fitness(state, cam_q, params, features)
        }
        FitnessCriterion::Random { seed } => Ok(random_fitness(
            *seed,
            state.base_views.len(),
            candidate,
        )),
    }
}
