//! `gaitlab` command line: drives the synthetic gait pipeline end to end.
//!
//! Three subcommands mirror the pipeline stages:
//!
//! * `simulate` — generate labeled pose files for every configured
//!   camera-angle group, plus a manifest of content hashes.
//! * `experiment` — load pose files, train/evaluate the classifier over
//!   the (angle group × window length × dimensionality × fold) grid, and
//!   emit results, tables, and plot data.
//! * `report` — regenerate tables and plot data from a stored results CSV
//!   without retraining.
//!
//! Every run is a pure function of (config, master seed): reruns produce
//! byte-identical artifacts. Failures print a single machine-parsable
//! line, `error[<category>]: <message>`, and exit nonzero.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use gaitlab::config::{load_config, Config, GridSubset};
use gaitlab::error::{Error, Result};
use gaitlab::manifest::{Manifest, MANIFEST_FILE_NAME};
use gaitlab::report::{
    emit_report, fmt_angle, fmt_f64, read_results_csv, write_results_csv, ResultRow,
};
use gaitlab::sim::{
    build_skeleton, group_dir_name, pose_file_bytes, pose_file_name, read_pose_file,
    simulate_video, video_seed, GaitClass, SkeletonConfig, SkeletonTopology,
};
use gaitlab::train::{run_experiment, CellResult, GroupVideos, LabeledVideo};

#[derive(Parser)]
#[command(
    name = "gaitlab",
    version,
    about = "Synthetic quadruped gait laboratory",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate labeled pose files for every configured camera-angle group.
    Simulate {
        /// Run configuration file (`key = value` lines).
        #[arg(long)]
        config: PathBuf,
        /// Output directory for pose files and their manifest.
        #[arg(long)]
        out: PathBuf,
        /// Override the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (0 = one per core).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Train and evaluate the classifier across the configured grid.
    Experiment {
        /// Run configuration file (`key = value` lines).
        #[arg(long)]
        config: PathBuf,
        /// Directory of pose files produced by `simulate`.
        #[arg(long)]
        poses: PathBuf,
        /// Output directory for results, tables, and plot data.
        #[arg(long)]
        out: PathBuf,
        /// Override the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Concurrent grid cells (0 = one per core).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Restrict the grid for quick runs, e.g.
        /// `groups=0-90,180-270;timesteps=10,30;dims=3d`.
        #[arg(long)]
        grid_subset: Option<String>,
    },
    /// Regenerate tables and plot data from a stored results CSV.
    Report {
        /// results.csv from a previous experiment run.
        #[arg(long)]
        results: PathBuf,
        /// Output directory for the regenerated files.
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli.command) {
        eprintln!("error[{}]: {}", e.category(), e.message());
        std::process::exit(1);
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Simulate {
            config,
            out,
            seed,
            jobs,
        } => cmd_simulate(&config, &out, seed, jobs),
        Command::Experiment {
            config,
            poses,
            out,
            seed,
            jobs,
            grid_subset,
        } => cmd_experiment(&config, &poses, &out, seed, jobs, grid_subset.as_deref()),
        Command::Report { results, out } => cmd_report(&results, &out),
    }
}

/// Runs `f` on a dedicated `jobs`-thread rayon pool, or on the global pool
/// when `jobs` is 0.
fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    if jobs == 0 {
        return f();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Parameter(format!("cannot build a {jobs}-thread worker pool: {e}")))?;
    pool.install(f)
}

fn load_config_with_seed(path: &Path, seed: Option<u64>) -> Result<Config> {
    let mut config = load_config(path)?;
    if let Some(s) = seed {
        config.master_seed = s;
    }
    Ok(config)
}

fn cmd_simulate(config_path: &Path, out: &Path, seed: Option<u64>, jobs: usize) -> Result<()> {
    let config = load_config_with_seed(config_path, seed)?;
    let groups = config.angle_groups()?;
    let topology = build_skeleton(&SkeletonConfig::Default)?;

    struct Task {
        angle_lo: f64,
        angle_hi: f64,
        class: GaitClass,
        seed: u64,
        rel: String,
    }
    let mut tasks = Vec::new();
    for &(lo, hi) in &groups {
        let dir = group_dir_name(lo, hi);
        for class in [GaitClass::Healthy, GaitClass::Unhealthy] {
            for index in 0..config.videos_per_class {
                tasks.push(Task {
                    angle_lo: lo,
                    angle_hi: hi,
                    class,
                    seed: video_seed(config.master_seed, lo, hi, class, index),
                    rel: format!("{dir}/{}", pose_file_name(class, index)),
                });
            }
        }
    }

    // Simulate in parallel, then write sequentially in path order so the
    // output (and any I/O failure) is deterministic.
    let mut files: Vec<(String, Vec<u8>)> = with_jobs(jobs, || {
        tasks
            .par_iter()
            .map(|t| {
                let seq = simulate_video(
                    &topology,
                    t.class,
                    t.angle_lo,
                    t.angle_hi,
                    config.duration_s,
                    config.fps,
                    t.seed,
                    &config.simulator,
                )?;
                Ok((t.rel.clone(), pose_file_bytes(&seq)?))
            })
            .collect()
    })?;
    files.sort_by(|a, b| a.0.cmp(&b.0));

    let mut manifest = Manifest::new(config.master_seed, config.to_key_values());
    for (rel, bytes) in &files {
        let path = out.join(rel);
        let parent = path.parent().expect("pose path has a parent");
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        manifest.record_file(out, rel)?;
    }
    manifest.write(&out.join(MANIFEST_FILE_NAME))?;
    println!(
        "wrote {} pose files across {} angle groups to {}",
        files.len(),
        groups.len(),
        out.display()
    );
    Ok(())
}

/// Loads every pose file the config expects for the given groups,
/// cross-checking each against the config and its file name.
fn load_groups(
    poses: &Path,
    groups: &[(f64, f64)],
    config: &Config,
    topology: &SkeletonTopology,
) -> Result<Vec<GroupVideos>> {
    let expected_frames = config.frames_per_video();
    let mut out = Vec::with_capacity(groups.len());
    for &(lo, hi) in groups {
        let dir = group_dir_name(lo, hi);
        let mut videos = Vec::with_capacity(2 * config.videos_per_class);
        for class in [GaitClass::Healthy, GaitClass::Unhealthy] {
            for index in 0..config.videos_per_class {
                let rel = format!("{dir}/{}", pose_file_name(class, index));
                let seq = read_pose_file(&poses.join(&rel), topology)?;
                if seq.label != class {
                    return Err(Error::Validation(format!(
                        "{rel}: file name says {:?} but the content is labeled {:?}",
                        class.as_str(),
                        seq.label.as_str()
                    )));
                }
                if seq.fps != config.fps {
                    return Err(Error::Validation(format!(
                        "{rel}: pose fps {} does not match config fps {}",
                        seq.fps, config.fps
                    )));
                }
                if seq.frame_count() != expected_frames {
                    return Err(Error::Validation(format!(
                        "{rel}: {} frames, config expects {expected_frames}",
                        seq.frame_count()
                    )));
                }
                let id = rel.trim_end_matches(".json").to_string();
                videos.push(LabeledVideo { id, seq });
            }
        }
        out.push(GroupVideos {
            angle_lo: lo,
            angle_hi: hi,
            videos,
        });
    }
    Ok(out)
}

/// Per-epoch loss curves from every trained cell, one CSV row per epoch.
fn training_log_csv(results: &[CellResult]) -> String {
    let mut out =
        String::from("angle_lo,angle_hi,timestep,dimensionality,fold,epoch,train_loss,val_loss\n");
    for cell in results {
        for entry in &cell.log {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                fmt_angle(cell.angle_lo),
                fmt_angle(cell.angle_hi),
                cell.timestep,
                cell.dimensionality.as_str(),
                cell.fold,
                entry.epoch,
                fmt_f64(entry.train_loss),
                fmt_f64(entry.val_loss)
            );
        }
    }
    out
}

fn cmd_experiment(
    config_path: &Path,
    poses: &Path,
    out: &Path,
    seed: Option<u64>,
    jobs: usize,
    grid_subset: Option<&str>,
) -> Result<()> {
    let config = load_config_with_seed(config_path, seed)?;
    let mut groups = config.angle_groups()?;
    let mut exp_cfg = config.experiment_config(jobs);
    if let Some(spec) = grid_subset {
        let subset = GridSubset::parse(spec)?;
        groups = subset.filter_groups(&groups)?;
        exp_cfg.timesteps = subset.filter_timesteps(&exp_cfg.timesteps)?;
        exp_cfg.dimensionalities = subset.filter_dims(&exp_cfg.dimensionalities)?;
    }

    // When the pose directory carries a manifest, refuse to train on
    // files that do not match their recorded hashes.
    let pose_manifest = poses.join(MANIFEST_FILE_NAME);
    if pose_manifest.exists() {
        Manifest::read(&pose_manifest)?.verify(poses)?;
    }

    let topology = build_skeleton(&SkeletonConfig::Default)?;
    let group_videos = load_groups(poses, &groups, &config, &topology)?;
    let results = run_experiment(&group_videos, &exp_cfg)?;

    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let rows: Vec<ResultRow> = results.iter().map(ResultRow::from).collect();
    write_results_csv(&out.join("results.csv"), &rows)?;
    let log_path = out.join("training_log.csv");
    std::fs::write(&log_path, training_log_csv(&results)).map_err(|e| Error::io(&log_path, e))?;

    let mut written = emit_report(&rows, out)?;
    written.push("results.csv".into());
    written.push("training_log.csv".into());
    written.sort();

    let mut manifest = Manifest::new(config.master_seed, config.to_key_values());
    for rel in &written {
        manifest.record_file(out, rel)?;
    }
    manifest.write(&out.join(MANIFEST_FILE_NAME))?;
    println!(
        "trained {} models; wrote {} artifact files to {}",
        results.len(),
        written.len(),
        out.display()
    );
    Ok(())
}

fn cmd_report(results: &Path, out: &Path) -> Result<()> {
    let rows = read_results_csv(results)?;
    if rows.is_empty() {
        return Err(Error::Validation(format!(
            "no results in {}",
            results.display()
        )));
    }
    let written = emit_report(&rows, out)?;
    println!("wrote {} report files to {}", written.len(), out.display());
    Ok(())
}
