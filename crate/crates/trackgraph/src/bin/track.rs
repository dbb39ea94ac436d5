//! Command-line front end: offline and online tracking, CLEAR-MOT
//! evaluation, and the synthetic scenario generator.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use trackgraph::config::load_config;
use trackgraph::error::Error;
use trackgraph::incremental::OnlineState;
use trackgraph::model::{parse_detection_file, parse_track_file, write_track_file, TrackSet};
use trackgraph::nodewise::NodewiseConfig;
use trackgraph::pipeline::{
    evaluate_clear_mot, extract_tracks, postfilter, run_offline, EvalReport, MatchRule,
    SolverKind,
};
use trackgraph::synth::{generate, write_detection_file, Scenario};

#[derive(Parser)]
#[command(name = "track", about = "Multi-object tracking by label propagation on complementary graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Track a full detection file at once.
    Offline {
        #[arg(long)]
        dets: PathBuf,
        #[arg(long)]
        gt: Option<PathBuf>,
        #[arg(long)]
        config: PathBuf,
        /// joint or nodewise (overrides the config).
        #[arg(long)]
        solver: Option<String>,
        #[arg(long)]
        workers: Option<usize>,
        /// Write the per-iteration objective values as CSV.
        #[arg(long)]
        energy_trace: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Track frame by frame through the incremental graph.
    Online {
        #[arg(long)]
        dets: PathBuf,
        #[arg(long)]
        gt: Option<PathBuf>,
        #[arg(long)]
        config: PathBuf,
        /// Observation window override (frames).
        #[arg(long)]
        window: Option<i64>,
        #[arg(long)]
        energy_trace: Option<PathBuf>,
        /// Append per-frame track assignments here as frames complete.
        #[arg(long)]
        stream: Option<PathBuf>,
        /// Resume from a checkpoint file.
        #[arg(long)]
        checkpoint_in: Option<PathBuf>,
        /// Dump the final state as a checkpoint file.
        #[arg(long)]
        checkpoint_out: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a track file against ground truth.
    Eval {
        #[arg(long)]
        tracks: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        /// Match rule, e.g. iou:0.5 or dist:30.
        #[arg(long, default_value = "dist:30")]
        r#match: String,
    },
    /// Generate a synthetic scenario (detections + ground truth).
    Synth {
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out_dets: PathBuf,
        #[arg(long)]
        out_gt: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Parse { .. }
                | Error::Config(_)
                | Error::FeatureDimension { .. }
                | Error::InvalidInput(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn print_report(report: &EvalReport, rule: MatchRule) {
    let rule_name = match rule {
        MatchRule::Iou(t) => format!("iou:{t}"),
        MatchRule::Dist(t) => format!("dist:{t}"),
    };
    println!("# matcher: greedy persistent, rule = {rule_name}");
    println!("mota {:.6}", report.mota);
    println!("motp {:.6}", report.motp);
    println!("switches {}", report.switches);
    println!("misses {}", report.misses);
    println!("false_positives {}", report.false_positives);
    println!("matches {}", report.matches);
    println!("gt_boxes {}", report.total_gt);
}

fn run(cli: Cli) -> trackgraph::Result<ExitCode> {
    match cli.command {
        Command::Offline {
            dets,
            gt,
            config,
            solver,
            workers,
            energy_trace,
            out,
        } => {
            let mut cfg = load_config(&config)?;
            if let Some(name) = solver {
                cfg.solver = SolverKind::parse_name(&name)?;
            }
            if let Some(w) = workers {
                cfg.workers = w;
            }
            let detections = parse_detection_file(&dets, cfg.format)?;
            let result = run_offline(&cfg, detections)?;
            write_track_file(&result.tracks, &out)?;
            if let Some(path) = energy_trace {
                result.trace.write_csv(&path)?;
            }
            if let Some(gt_path) = gt {
                let gt = parse_track_file(&gt_path)?;
                print_report(&evaluate_clear_mot(&result.tracks, &gt, cfg.match_rule), cfg.match_rule);
            }
            if !result.converged {
                eprintln!("warning: solver did not converge within its iteration budget");
                return Ok(ExitCode::from(3));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Online {
            dets,
            gt,
            config,
            window,
            energy_trace,
            stream,
            checkpoint_in,
            checkpoint_out,
            out,
        } => {
            let mut cfg = load_config(&config)?;
            if let Some(w) = window {
                cfg.online.observation_window = w;
            }
            let detections = parse_detection_file(&dets, cfg.format)?;
            let ncfg = NodewiseConfig {
                t_con: cfg.online_sweeps,
                seed: cfg.seed,
                ..cfg.nodewise.clone()
            };
            let mut state = match checkpoint_in {
                Some(path) => OnlineState::restore(&std::fs::read_to_string(&path)?)?,
                None => OnlineState::new(cfg.graph.alphas.clone()),
            };
            let mut by_frame: std::collections::BTreeMap<i64, Vec<trackgraph::model::Detection>> =
                Default::default();
            let mut max_frame = state.t();
            for det in detections {
                max_frame = max_frame.max(det.frame);
                by_frame.entry(det.frame).or_default().push(det);
            }
            let mut stream_out = String::new();
            for frame in (state.t() + 1)..=max_frame {
                let dets = by_frame.remove(&frame).unwrap_or_default();
                state.online_step(&dets, &cfg.online, &ncfg)?;
                if stream.is_some() {
                    if let Some(y) = state.labels() {
                        for node in state.nodes() {
                            if node.span.1 != frame {
                                continue;
                            }
                            let det = node.last_detection();
                            let e = det.extent.unwrap_or([0.0, 0.0]);
                            writeln!(
                                stream_out,
                                "{},{},{},{},{},{}",
                                frame,
                                y.argmax_row(node.id),
                                det.center[0],
                                det.center[1],
                                e[0],
                                e[1]
                            )
                            .unwrap();
                        }
                    }
                }
            }
            if let Some(path) = &stream {
                std::fs::write(path, stream_out)?;
            }
            let tracks = match state.labels() {
                Some(y) => postfilter(
                    extract_tracks(y, state.nodes()),
                    cfg.min_track_frames,
                    cfg.min_track_conf,
                ),
                None => TrackSet::default(),
            };
            write_track_file(&tracks, &out)?;
            if let Some(path) = energy_trace {
                state.trace().write_csv(&path)?;
            }
            if let Some(path) = checkpoint_out {
                std::fs::write(&path, state.checkpoint())?;
            }
            if let Some(gt_path) = gt {
                let gt = parse_track_file(&gt_path)?;
                print_report(&evaluate_clear_mot(&tracks, &gt, cfg.match_rule), cfg.match_rule);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Eval { tracks, gt, r#match } => {
            let rule = MatchRule::parse_name(&r#match)?;
            let tracks = parse_track_file(&tracks)?;
            let gt = parse_track_file(&gt)?;
            print_report(&evaluate_clear_mot(&tracks, &gt, rule), rule);
            Ok(ExitCode::SUCCESS)
        }
        Command::Synth {
            scenario,
            seed,
            out_dets,
            out_gt,
        } => {
            let scenario = Scenario::parse_name(&scenario)?;
            let output = generate(scenario, seed);
            write_detection_file(&output.detections, &out_dets)?;
            write_track_file(&output.ground_truth, &out_gt)?;
            println!(
                "wrote {} detections over {} tracks (bounds {:?})",
                output.detections.len(),
                output.ground_truth.records.len(),
                output.bounds
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}
