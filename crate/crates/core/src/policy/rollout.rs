//! Greedy sequential acquisition: reconstruct, score candidates, move,
//! capture, repeat.

use std::collections::BTreeSet;
use std::path::Path;

use nalgebra::Point3;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::{chamfer_points, CameraView, DepthImage, KdTree3, PointCloud};
use crate::policy::fitness::{score_candidate, FitnessCriterion, OracleStepEval};
use crate::policy::{feasible, ReconPipeline, TerminationCriteria};
use crate::render::render_depth;
use crate::scenes::{SceneMesh, ViewCatalog};
use crate::seed::sub_rng;

/// The policy's evolving capture set and motion accounting.
#[derive(Debug, Clone)]
pub struct CaptureState {
    /// Captures in acquisition order: catalog index, camera, depth.
    pub base_views: Vec<(usize, CameraView, DepthImage)>,
    /// Enriched voxel-downsampled reconstruction of `base_views`.
    pub reconstruction: PointCloud,
    pub visited: BTreeSet<usize>,
    pub agent_position: Point3<f64>,
    /// Total straight-line distance traversed, including the hop between
    /// the two initial views.
    pub path_length: f64,
    pub speed: f64,
}

impl CaptureState {
    pub fn elapsed_motion_time(&self) -> f64 {
        self.path_length / self.speed
    }
}

/// Immutable per-scene inputs of a rollout.
pub struct RolloutContext<'a> {
    pub mesh: &'a SceneMesh,
    pub catalog: &'a ViewCatalog,
    pub pipeline: &'a ReconPipeline,
    /// Ground truth used for metrics reporting (not visible to the policy
    /// except through the oracle criterion).
    pub gt_cloud: &'a PointCloud,
    pub gt_tree: &'a KdTree3,
    /// Distance threshold for coverage / F1 reporting.
    pub tau: f64,
}

/// One row of the per-step metrics trace. `step` is the capture count after
/// the row's capture; the first row (step 2) describes the initial pair and
/// carries no fitness.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub chosen_view: usize,
    pub fitness: Option<f64>,
    pub cd_m: f64,
    pub coverage_pct: f64,
    pub f1: f64,
    pub path_m: f64,
    pub time_s: f64,
    /// Segment traversed to reach this capture (equal endpoints for the
    /// first initial view).
    pub moved_from: Point3<f64>,
    pub moved_to: Point3<f64>,
}

#[derive(Debug, Clone)]
pub struct RolloutRecord {
    pub seed: u64,
    pub criterion: String,
    pub init_views: (usize, usize),
    pub steps: Vec<StepRecord>,
    pub final_cloud: PointCloud,
}

impl RolloutRecord {
    /// CSV with one row per capture step.
    pub fn csv_string(&self) -> String {
        let mut out = String::from("step,chosen_view,fitness,cd_cm,coverage_pct,f1,path_m,time_s\n");
        for s in &self.steps {
            let fitness = s.fitness.map(|f| f.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                s.step,
                s.chosen_view,
                fitness,
                s.cd_m * 100.0,
                s.coverage_pct,
                s.f1,
                s.path_m,
                s.time_s
            ));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.csv_string())
            .map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn final_step(&self) -> &StepRecord {
        self.steps.last().expect("rollout has at least the initial row")
    }
}

/// Renders the initial pair: a seeded-random first view plus the catalog
/// view nearest to it, then builds the starting reconstruction.
pub fn init_state(
    catalog: &ViewCatalog,
    mesh: &SceneMesh,
    pipeline: &ReconPipeline,
    seed: u64,
    speed: f64,
) -> Result<CaptureState> {
    if catalog.len() < 2 {
        return Err(Error::Parameter(format!(
            "catalog of {} views cannot seed a two-view start",
            catalog.len()
        )));
    }
    let mut rng = sub_rng(seed, "init-view", 0);
    let first = rng.gen_range(0..catalog.len());
    let first_pos = catalog.views[first].position();
    let mut second = usize::MAX;
    let mut best = f64::INFINITY;
    for (j, v) in catalog.views.iter().enumerate() {
        if j == first {
            continue;
        }
        let d = (v.position() - first_pos).norm();
        if d < best {
            best = d;
            second = j;
        }
    }
    let mut state = CaptureState {
        base_views: Vec::new(),
        reconstruction: PointCloud::default(),
        visited: BTreeSet::new(),
        agent_position: first_pos,
        path_length: 0.0,
        speed,
    };
    capture_view(&mut state, catalog, mesh, pipeline, first)?;
    capture_view(&mut state, catalog, mesh, pipeline, second)?;
    Ok(state)
}

/// Moves to the view, captures it, and rebuilds the reconstruction.
pub fn capture_view(
    state: &mut CaptureState,
    catalog: &ViewCatalog,
    mesh: &SceneMesh,
    pipeline: &ReconPipeline,
    index: usize,
) -> Result<()> {
    let cam = catalog.views[index].clone();
    let target = cam.position();
    state.path_length += (target - state.agent_position).norm();
    state.agent_position = target;
    let depth = render_depth(mesh, &cam);
    state.base_views.push((index, cam, depth));
    let inserted = state.visited.insert(index);
    debug_assert!(inserted, "view {index} captured twice");
    let views: Vec<(CameraView, DepthImage)> = state
        .base_views
        .iter()
        .map(|(_, c, d)| (c.clone(), d.clone()))
        .collect();
    state.reconstruction = pipeline.rebuild(&views)?;
    Ok(())
}

/// Scores the candidates and returns `(catalog index, fitness)` of the
/// maximum; bit-equal scores resolve to the smallest index. Candidate
/// scoring runs in parallel against the immutable state snapshot.
pub fn select_next(
    state: &CaptureState,
    candidates: &[usize],
    criterion: &FitnessCriterion,
    ctx: &RolloutContext<'_>,
) -> Result<(usize, f64)> {
    if candidates.is_empty() {
        return Err(Error::CandidatesExhausted);
    }
    let oracle_eval = match criterion {
        FitnessCriterion::OracleRri(gt) => Some(OracleStepEval::new(state, gt, ctx.pipeline)?),
        _ => None,
    };
    let scores: Vec<Result<f64>> = candidates
        .par_iter()
        .map(|&c| {
            score_candidate(
                state,
                &ctx.catalog.views[c],
                c,
                criterion,
                ctx.pipeline,
                oracle_eval.as_ref(),
            )
        })
        .collect();
    let mut best: Option<(usize, f64)> = None;
    for (&c, score) in candidates.iter().zip(scores) {
        let s = score?;
        if best.is_none_or(|(_, bs)| s > bs) {
            best = Some((c, s));
        }
    }
    Ok(best.unwrap())
}

/// Runs the greedy loop to termination. See [`run_policy_observed`] for the
/// step hook used by verification tooling.
pub fn run_policy(
    ctx: &RolloutContext<'_>,
    criterion: &FitnessCriterion,
    term: &TerminationCriteria,
    seed: u64,
) -> Result<RolloutRecord> {
    run_policy_observed(ctx, criterion, term, seed, |_, _| {})
}

/// Greedy loop with a per-step observer receiving the state snapshot after
/// each capture (including the initial pair) and the recorded row.
pub fn run_policy_observed<F>(
    ctx: &RolloutContext<'_>,
    criterion: &FitnessCriterion,
    term: &TerminationCriteria,
    seed: u64,
    mut observer: F,
) -> Result<RolloutRecord>
where
    F: FnMut(&CaptureState, &StepRecord),
{
    term.validate()?;
    let mut state = init_state(ctx.catalog, ctx.mesh, ctx.pipeline, seed, term.speed)?;
    let init_first = state.base_views[0].0;
    let init_second = state.base_views[1].0;
    let first_pos = ctx.catalog.views[init_first].position();

    let mut steps = Vec::new();
    let (cd, cov, f1) = metrics_row(&state.reconstruction, ctx);
    let initial = StepRecord {
        step: 2,
        chosen_view: init_second,
        fitness: None,
        cd_m: cd,
        coverage_pct: cov,
        f1,
        path_m: state.path_length,
        time_s: state.elapsed_motion_time(),
        moved_from: first_pos,
        moved_to: state.agent_position,
    };
    observer(&state, &initial);
    steps.push(initial);

    loop {
        if let Some(max) = term.max_captures {
            if state.base_views.len() >= max {
                break;
            }
        }
        let candidates: Vec<usize> = (0..ctx.catalog.len())
            .filter(|i| !state.visited.contains(i))
            .filter(|&i| feasible(&state, &ctx.catalog.views[i], term))
            .collect();
        let (choice, fitness) = match select_next(&state, &candidates, criterion, ctx) {
            Ok(sel) => sel,
            Err(Error::CandidatesExhausted) => break,
            Err(e) => return Err(e),
        };
        let from = state.agent_position;
        let points_before = state.reconstruction.len();
        capture_view(&mut state, ctx.catalog, ctx.mesh, ctx.pipeline, choice)?;
        debug_assert!(state.reconstruction.len() >= points_before);

        let (cd, cov, f1) = metrics_row(&state.reconstruction, ctx);
        let row = StepRecord {
            step: state.base_views.len(),
            chosen_view: choice,
            fitness: Some(fitness),
            cd_m: cd,
            coverage_pct: cov,
            f1,
            path_m: state.path_length,
            time_s: state.elapsed_motion_time(),
            moved_from: from,
            moved_to: state.agent_position,
        };
        observer(&state, &row);
        steps.push(row);
    }

    Ok(RolloutRecord {
        seed,
        criterion: criterion.name().to_string(),
        init_views: (init_first, init_second),
        steps,
        final_cloud: state.reconstruction,
    })
}

/// Chamfer (m), coverage (%), and F1 of a reconstruction against the
/// context ground truth, sharing one tree build.
pub fn metrics_row(recon: &PointCloud, ctx: &RolloutContext<'_>) -> (f64, f64, f64) {
    if recon.is_empty() {
        return (f64::INFINITY, 0.0, 0.0);
    }
    let recon_tree = KdTree3::build(&recon.points);
    let cd = chamfer_points(&recon.points, &recon_tree, &ctx.gt_cloud.points, ctx.gt_tree);
    let covered = ctx
        .gt_cloud
        .points
        .iter()
        .filter(|g| recon_tree.nearest_distance(g) <= ctx.tau)
        .count();
    let recall = covered as f64 / ctx.gt_cloud.len() as f64;
    let precise = recon
        .points
        .iter()
        .filter(|p| ctx.gt_tree.nearest_distance(p) <= ctx.tau)
        .count();
    let precision = precise as f64 / recon.len() as f64;
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    (cd, 100.0 * recall, f1)
}
