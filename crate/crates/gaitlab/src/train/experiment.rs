//! Grid experiment: trains one model per (angle group × window length ×
//! feature dimensionality × fold) cell and scores it on held-out videos.
//!
//! Determinism with respect to scheduling and grid subsetting:
//! * fold assignment uses one seed shared by every group, derived only
//!   from the master seed, so the same videos land in the same folds in
//!   every cell;
//! * per-cell seeds hash the group's angle bounds (bit patterns), not its
//!   position in the grid, so running a subset reproduces the full run's
//!   numbers for the cells it covers;
//! * model initialization depends only on the feature channel count, so
//!   every fold of a given dimensionality starts from bit-identical
//!   weights;
//! * cells are computed in parallel and then sorted by key, making the
//!   output independent of thread interleaving.

use rayon::prelude::*;

use crate::data::adjacency::normalized_adjacency;
use crate::data::features::Dimensionality;
use crate::data::folds::{split_validation, stratified_kfold, FoldSplit};
use crate::data::window::window_overlap;
use crate::data::{build_samples, GraphSample};
use crate::error::{Error, Result};
use crate::metrics::auroc;
use crate::nn::model::ModelParams;
use crate::seed::derive_seed;
use crate::sim::gait::PoseSequence;
use crate::train::adamw::AdamWConfig;
use crate::train::trainer::{train_model, EpochLog, TrainConfig};

/// One loaded pose clip with its stable identifier (usually the file stem).
#[derive(Debug, Clone)]
pub struct LabeledVideo {
    pub id: String,
    pub seq: PoseSequence,
}

/// All clips recorded under one camera-azimuth interval.
#[derive(Debug, Clone)]
pub struct GroupVideos {
    pub angle_lo: f64,
    pub angle_hi: f64,
    pub videos: Vec<LabeledVideo>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub timesteps: Vec<usize>,
    pub dimensionalities: Vec<Dimensionality>,
    pub k_folds: usize,
    pub validation_fraction: f64,
    pub hidden_size: usize,
    pub optimizer: AdamWConfig,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub master_seed: u64,
    /// Worker threads; 0 uses the global default pool.
    pub jobs: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            timesteps: vec![5, 10, 15, 30],
            dimensionalities: vec![Dimensionality::TwoD, Dimensionality::ThreeD],
            k_folds: 5,
            validation_fraction: 0.25,
            hidden_size: 32,
            optimizer: AdamWConfig::default(),
            batch_size: 8,
            max_epochs: 30,
            patience: 6,
            master_seed: 42,
            jobs: 0,
        }
    }
}

/// Outcome of one grid cell.
#[derive(Debug, Clone)]
pub struct CellResult {
    pub angle_lo: f64,
    pub angle_hi: f64,
    pub timestep: usize,
    pub overlap: usize,
    pub dimensionality: Dimensionality,
    pub fold: usize,
    /// Window-level AUROC on the held-out test videos.
    pub auroc: f64,
    pub epochs_run: usize,
    pub best_epoch: usize,
    pub train_videos: Vec<String>,
    pub validation_videos: Vec<String>,
    pub test_videos: Vec<String>,
    pub log: Vec<EpochLog>,
}

/// Seed used to initialize the model for a given channel count. Shared by
/// every fold (and every group) of that dimensionality.
pub fn model_init_seed(master_seed: u64, dim: Dimensionality) -> u64 {
    derive_seed(master_seed, "model-init", &[dim.channels() as u64])
}

/// Per-cell training seed; keyed by the group's angle bounds rather than
/// its index so subset runs reproduce full-run cells.
pub fn cell_train_seed(
    master_seed: u64,
    angle_lo: f64,
    angle_hi: f64,
    timestep: usize,
    dim: Dimensionality,
    fold: usize,
) -> u64 {
    derive_seed(
        master_seed,
        "train",
        &[
            angle_lo.to_bits(),
            angle_hi.to_bits(),
            timestep as u64,
            dim.channels() as u64,
            fold as u64,
        ],
    )
}

fn validate_groups(groups: &[GroupVideos], cfg: &ExperimentConfig) -> Result<()> {
    if groups.is_empty() {
        return Err(Error::Protocol("no angle groups to evaluate".into()));
    }
    if cfg.timesteps.is_empty() {
        return Err(Error::Parameter("no window lengths configured".into()));
    }
    if cfg.dimensionalities.is_empty() {
        return Err(Error::Parameter("no dimensionalities configured".into()));
    }
    if cfg.hidden_size == 0 {
        return Err(Error::Parameter("hidden size must be at least 1".into()));
    }
    let reference = &groups[0]
        .videos
        .first()
        .ok_or_else(|| Error::Protocol("angle group has no videos".into()))?
        .seq
        .topology;
    let max_timestep = *cfg.timesteps.iter().max().expect("non-empty");
    for group in groups {
        if group.videos.is_empty() {
            return Err(Error::Protocol(format!(
                "angle group {}-{} has no videos",
                group.angle_lo, group.angle_hi
            )));
        }
        let mut ids: Vec<&str> = group.videos.iter().map(|v| v.id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() != group.videos.len() {
            return Err(Error::Protocol(format!(
                "angle group {}-{} has duplicate video identifiers",
                group.angle_lo, group.angle_hi
            )));
        }
        for video in &group.videos {
            let topo = &video.seq.topology;
            if topo.joint_names() != reference.joint_names() || topo.edges() != reference.edges()
            {
                return Err(Error::Protocol(format!(
                    "video {:?} uses a different skeleton than the rest of the corpus",
                    video.id
                )));
            }
            if video.seq.frame_count() < max_timestep {
                return Err(Error::Protocol(format!(
                    "video {:?} has {} frames, shorter than the longest window ({})",
                    video.id,
                    video.seq.frame_count(),
                    max_timestep
                )));
            }
        }
    }
    Ok(())
}

/// Fold assignments for one group, with validation subsets carved out.
fn plan_folds(labels: &[u8], cfg: &ExperimentConfig) -> Result<Vec<FoldSplit>> {
    let fold_seed = derive_seed(cfg.master_seed, "folds", &[]);
    let mut folds = stratified_kfold(labels, cfg.k_folds, fold_seed)?;
    for split in &mut folds {
        let val_seed = derive_seed(cfg.master_seed, "val-split", &[split.fold as u64]);
        let (reduced, validation) =
            split_validation(&split.train, labels, cfg.validation_fraction, val_seed)?;
        split.train = reduced;
        split.validation = validation;
    }
    Ok(folds)
}

fn assert_no_leakage(split: &FoldSplit) -> Result<()> {
    let mut seen = std::collections::BTreeSet::new();
    for idx in split
        .train
        .iter()
        .chain(&split.validation)
        .chain(&split.test)
    {
        if !seen.insert(*idx) {
            return Err(Error::Protocol(format!(
                "video index {idx} appears in more than one partition of fold {}",
                split.fold
            )));
        }
    }
    Ok(())
}

struct Job<'a> {
    group: &'a GroupVideos,
    split: &'a FoldSplit,
    timestep: usize,
    dim: Dimensionality,
}

fn gather_samples(
    group: &GroupVideos,
    members: &[usize],
    timestep: usize,
    dim: Dimensionality,
) -> Result<Vec<GraphSample>> {
    let mut out = Vec::new();
    for &idx in members {
        let video = &group.videos[idx];
        out.extend(build_samples(&video.seq, &video.id, timestep, dim)?);
    }
    Ok(out)
}

fn run_cell(job: &Job<'_>, cfg: &ExperimentConfig) -> Result<CellResult> {
    let group = job.group;
    let split = job.split;
    assert_no_leakage(split)?;

    let train = gather_samples(group, &split.train, job.timestep, job.dim)?;
    let validation = gather_samples(group, &split.validation, job.timestep, job.dim)?;
    let test = gather_samples(group, &split.test, job.timestep, job.dim)?;
    if test.is_empty() {
        return Err(Error::Protocol(format!(
            "fold {} yielded no test windows at window length {}",
            split.fold, job.timestep
        )));
    }

    let adj = normalized_adjacency(&group.videos[0].seq.topology);
    let init = ModelParams::init(
        job.dim.channels(),
        cfg.hidden_size,
        model_init_seed(cfg.master_seed, job.dim),
    )?;
    let train_cfg = TrainConfig {
        optimizer: cfg.optimizer.clone(),
        batch_size: cfg.batch_size,
        max_epochs: cfg.max_epochs,
        patience: cfg.patience,
        seed: cell_train_seed(
            cfg.master_seed,
            group.angle_lo,
            group.angle_hi,
            job.timestep,
            job.dim,
            split.fold,
        ),
    };
    let outcome = train_model(&init, &adj, &train, &validation, &train_cfg)?;

    let mut scores = Vec::with_capacity(test.len());
    let mut labels = Vec::with_capacity(test.len());
    for sample in &test {
        scores.push(crate::nn::model::predict(
            &outcome.params,
            &adj,
            &sample.frames,
        )?);
        labels.push(sample.label);
    }
    let auroc = auroc(&scores, &labels)?;

    let names = |members: &[usize]| -> Vec<String> {
        members
            .iter()
            .map(|&i| group.videos[i].id.clone())
            .collect()
    };
    Ok(CellResult {
        angle_lo: group.angle_lo,
        angle_hi: group.angle_hi,
        timestep: job.timestep,
        overlap: window_overlap(job.timestep),
        dimensionality: job.dim,
        fold: split.fold,
        auroc,
        epochs_run: outcome.epochs_run,
        best_epoch: outcome.best_epoch,
        train_videos: names(&split.train),
        validation_videos: names(&split.validation),
        test_videos: names(&split.test),
        log: outcome.log,
    })
}

/// Runs every grid cell and returns results sorted by
/// (angle_lo, angle_hi, timestep, dimensionality, fold).
pub fn run_experiment(groups: &[GroupVideos], cfg: &ExperimentConfig) -> Result<Vec<CellResult>> {
    validate_groups(groups, cfg)?;

    // Sort videos by id inside each group so fold indices are stable no
    // matter how the caller ordered the files.
    let groups: Vec<GroupVideos> = {
        let mut gs = groups.to_vec();
        for g in &mut gs {
            g.videos.sort_by(|a, b| a.id.cmp(&b.id));
        }
        gs.sort_by(|a, b| {
            (a.angle_lo, a.angle_hi)
                .partial_cmp(&(b.angle_lo, b.angle_hi))
                .expect("finite angles")
        });
        gs
    };

    let fold_plans: Vec<Vec<FoldSplit>> = groups
        .iter()
        .map(|g| {
            let labels: Vec<u8> = g.videos.iter().map(|v| v.seq.label.label()).collect();
            plan_folds(&labels, cfg)
        })
        .collect::<Result<_>>()?;

    let mut jobs = Vec::new();
    for (group, folds) in groups.iter().zip(&fold_plans) {
        for &timestep in &cfg.timesteps {
            for &dim in &cfg.dimensionalities {
                for split in folds {
                    jobs.push(Job {
                        group,
                        split,
                        timestep,
                        dim,
                    });
                }
            }
        }
    }

    let run_all = || -> Result<Vec<CellResult>> {
        jobs.par_iter().map(|job| run_cell(job, cfg)).collect()
    };
    let mut results = if cfg.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?
            .install(run_all)?
    } else {
        run_all()?
    };

    results.sort_by(|a, b| {
        (
            a.angle_lo,
            a.angle_hi,
            a.timestep,
            a.dimensionality.channels(),
            a.fold,
        )
            .partial_cmp(&(
                b.angle_lo,
                b.angle_hi,
                b.timestep,
                b.dimensionality.channels(),
                b.fold,
            ))
            .expect("finite keys")
    });
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::gait::GaitClass;
    use crate::sim::{simulate_video, SimulatorParams};
    use crate::sim::skeleton::{build_skeleton, SkeletonConfig};

    /// Simulated corpus small enough for unit tests: 3 videos per class.
    fn tiny_group(angle_lo: f64, angle_hi: f64) -> GroupVideos {
        let topology = build_skeleton(&SkeletonConfig::Default).unwrap();
        let params = SimulatorParams::default();
        let mut videos = Vec::new();
        for (class, prefix) in [(GaitClass::Healthy, "healthy"), (GaitClass::Unhealthy, "unhealthy")] {
            for idx in 0..3u64 {
                let seed = derive_seed(7, "simulate", &[angle_lo.to_bits(), class.label() as u64, idx]);
                let seq = simulate_video(
                    &topology, class, angle_lo, angle_hi, 2.0, 25, seed, &params,
                )
                .unwrap();
                videos.push(LabeledVideo {
                    id: format!("{prefix}_{idx:02}"),
                    seq,
                });
            }
        }
        GroupVideos {
            angle_lo,
            angle_hi,
            videos,
        }
    }

    fn tiny_config() -> ExperimentConfig {
        ExperimentConfig {
            timesteps: vec![5],
            dimensionalities: vec![Dimensionality::ThreeD],
            k_folds: 3,
            validation_fraction: 0.25,
            hidden_size: 4,
            max_epochs: 2,
            master_seed: 99,
            ..Default::default()
        }
    }

    #[test]
    fn produces_one_result_per_cell_in_sorted_order() {
        let groups = [tiny_group(0.0, 90.0)];
        let mut cfg = tiny_config();
        cfg.timesteps = vec![5, 10];
        let results = run_experiment(&groups, &cfg).unwrap();
        assert_eq!(results.len(), 2 * 3); // 2 timesteps × 3 folds
        let keys: Vec<_> = results
            .iter()
            .map(|r| (r.timestep, r.fold))
            .collect();
        let mut sorted = keys.clone();
        sorted.sort_unstable();
        assert_eq!(keys, sorted);
        for r in &results {
            assert!(r.auroc.is_finite() && (0.0..=1.0).contains(&r.auroc));
            assert_eq!(r.overlap, r.timestep / 2);
            assert!(!r.test_videos.is_empty());
            assert_eq!(r.epochs_run, r.log.len());
        }
    }

    #[test]
    fn partitions_are_disjoint_and_cover_the_group() {
        let groups = [tiny_group(90.0, 180.0)];
        let cfg = tiny_config();
        let results = run_experiment(&groups, &cfg).unwrap();
        for r in &results {
            let mut all: Vec<&String> = r
                .train_videos
                .iter()
                .chain(&r.validation_videos)
                .chain(&r.test_videos)
                .collect();
            all.sort_unstable();
            let before = all.len();
            all.dedup();
            assert_eq!(all.len(), before, "video reused across partitions");
            assert_eq!(before, groups[0].videos.len());
        }
    }

    #[test]
    fn rerunning_gives_identical_results() {
        let groups = [tiny_group(0.0, 45.0)];
        let cfg = tiny_config();
        let a = run_experiment(&groups, &cfg).unwrap();
        let b = run_experiment(&groups, &cfg).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.auroc.to_bits(), y.auroc.to_bits());
            assert_eq!(x.best_epoch, y.best_epoch);
            assert_eq!(x.log, y.log);
            assert_eq!(x.test_videos, y.test_videos);
        }
    }

    #[test]
    fn video_order_does_not_change_results() {
        let mut group = tiny_group(0.0, 45.0);
        let cfg = tiny_config();
        let a = run_experiment(&[group.clone()], &cfg).unwrap();
        group.videos.reverse();
        let b = run_experiment(&[group], &cfg).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.auroc.to_bits(), y.auroc.to_bits());
            assert_eq!(x.test_videos, y.test_videos);
        }
    }

    #[test]
    fn fold_membership_is_shared_across_timesteps_and_dims() {
        let groups = [tiny_group(180.0, 270.0)];
        let mut cfg = tiny_config();
        cfg.timesteps = vec![5, 10];
        cfg.dimensionalities = vec![Dimensionality::TwoD, Dimensionality::ThreeD];
        let results = run_experiment(&groups, &cfg).unwrap();
        for r in &results {
            let reference = results
                .iter()
                .find(|o| o.fold == r.fold)
                .expect("fold present");
            assert_eq!(r.test_videos, reference.test_videos);
            assert_eq!(r.train_videos, reference.train_videos);
            assert_eq!(r.validation_videos, reference.validation_videos);
        }
    }

    #[test]
    fn rejects_window_longer_than_clip() {
        let groups = [tiny_group(0.0, 90.0)]; // 2 s × 25 fps = 50 frames
        let mut cfg = tiny_config();
        cfg.timesteps = vec![60];
        let err = run_experiment(&groups, &cfg).unwrap_err();
        assert_eq!(err.category(), "protocol");
    }

    #[test]
    fn rejects_mismatched_skeletons() {
        let mut groups = [tiny_group(0.0, 90.0)];
        let other = build_skeleton(&SkeletonConfig::Custom {
            joints: vec!["a".into(), "b".into()],
            edges: vec![(0, 1)],
            affected_joints: vec![1],
        })
        .unwrap();
        groups[0].videos[0].seq.topology = other;
        // Frame shapes no longer match the topology, but validation should
        // reject before anything is built.
        let err = run_experiment(&groups, &tiny_config()).unwrap_err();
        assert_eq!(err.category(), "protocol");
    }
}
