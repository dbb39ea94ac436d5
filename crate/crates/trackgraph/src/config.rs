//! Key = value configuration files, one section per subsystem. Unknown
//! sections or keys are errors.

use std::path::Path;

use crate::error::{Error, Result};
use crate::model::DetectionFormat;
use crate::nodewise::SweepOrder;
use crate::pipeline::{MatchRule, PipelineConfig, SolverKind, TrackletConfig};

pub fn load_config(path: &Path) -> Result<PipelineConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text, &path.display().to_string())
}

pub fn parse_config(text: &str, path: &str) -> Result<PipelineConfig> {
    let mut cfg = PipelineConfig::default();
    let mut section = String::new();
    let mut tracker_enabled = false;
    let mut tracker = TrackletConfig::default();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let err = |msg: String| Error::Parse {
            path: path.into(),
            line: line_no,
            msg,
        };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| err("unterminated section header".into()))?;
            match name {
                "model" | "graph" | "online" | "solver" | "tracker" | "pipeline" => {
                    section = name.to_string();
                }
                other => return Err(err(format!("unknown section `{other}`"))),
            }
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err("expected key = value".into()))?;
        let key = key.trim();
        let value = value.trim();
        let f64_val = || -> Result<f64> {
            value
                .parse()
                .map_err(|_| err(format!("bad number `{value}` for {key}")))
        };
        let i64_val = || -> Result<i64> {
            value
                .parse()
                .map_err(|_| err(format!("bad integer `{value}` for {key}")))
        };
        let usize_val = || -> Result<usize> {
            value
                .parse()
                .map_err(|_| err(format!("bad integer `{value}` for {key}")))
        };
        let list_val = || -> Result<Vec<f64>> {
            value
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse()
                        .map_err(|_| err(format!("bad number `{v}` in {key}")))
                })
                .collect()
        };

        match (section.as_str(), key) {
            ("model", "format") => cfg.format = DetectionFormat::parse_name(value)?,
            ("graph", "t_window") => cfg.graph.t_window = i64_val()?,
            ("graph", "gamma") => cfg.graph.gamma = f64_val()?,
            ("graph", "v_max") => cfg.graph.v_max = f64_val()?,
            ("graph", "delta") => cfg.graph.delta = f64_val()?,
            ("graph", "k_app") => {
                cfg.graph.k_app = if value == "none" {
                    None
                } else {
                    Some(usize_val()?)
                }
            }
            ("graph", "appearance_window") => {
                cfg.graph.appearance_window = if value == "none" {
                    None
                } else {
                    Some(i64_val()?)
                }
            }
            ("graph", "alphas") => cfg.graph.alphas = list_val()?,
            ("online", "st_window") => cfg.online.st_window = i64_val()?,
            ("online", "st_sigma") => cfg.online.st_sigma = f64_val()?,
            ("online", "app_window") => cfg.online.app_window = i64_val()?,
            ("online", "app_sigma") => cfg.online.app_sigma = f64_val()?,
            ("online", "observation_window") => cfg.online.observation_window = i64_val()?,
            ("online", "border_sigma") => cfg.online.border_sigma = f64_val()?,
            ("online", "bounds") => {
                let vals = list_val()?;
                if vals.len() != 4 {
                    return Err(err("bounds needs four numbers".into()));
                }
                cfg.online.bounds = Some([vals[0], vals[1], vals[2], vals[3]]);
            }
            ("solver", "kind") => cfg.solver = SolverKind::parse_name(value)?,
            ("solver", "seed") => cfg.seed = usize_val()? as u64,
            ("solver", "t_joint") => cfg.joint.t_joint = usize_val()?,
            ("solver", "outer_tol") => cfg.joint.outer_tol = f64_val()?,
            ("solver", "t_con") => cfg.nodewise.t_con = usize_val()?,
            ("solver", "sweep_tol") => cfg.nodewise.sweep_tol = f64_val()?,
            ("solver", "online_sweeps") => cfg.online_sweeps = usize_val()?,
            ("solver", "sweep_order") => {
                cfg.nodewise.sweep_order = match value {
                    "sequential" => SweepOrder::Sequential,
                    "random" => SweepOrder::SeededRandom(cfg.seed),
                    other => return Err(err(format!("unknown sweep order `{other}`"))),
                }
            }
            ("solver", "pgd_max_iters") => {
                cfg.nodewise.inner.max_iters = usize_val()?;
                cfg.joint.inner.max_iters = cfg.nodewise.inner.max_iters;
            }
            ("solver", "pgd_tol") => {
                cfg.nodewise.inner.tol = f64_val()?;
                cfg.joint.inner.tol = cfg.nodewise.inner.tol;
            }
            ("solver", "workers") => cfg.workers = usize_val()?,
            ("tracker", "enabled") => {
                tracker_enabled = value
                    .parse()
                    .map_err(|_| err(format!("bad bool `{value}` for {key}")))?
            }
            ("tracker", "max_dist") => tracker.max_dist = f64_val()?,
            ("tracker", "window") => tracker.window = i64_val()?,
            ("pipeline", "strip_overlap") => {
                cfg.strip_overlap = if value == "none" {
                    None
                } else {
                    Some(f64_val()?)
                }
            }
            ("pipeline", "min_track_frames") => cfg.min_track_frames = usize_val()?,
            ("pipeline", "min_track_conf") => cfg.min_track_conf = f64_val()?,
            ("pipeline", "match") => cfg.match_rule = MatchRule::parse_name(value)?,
            ("", k) => return Err(err(format!("key `{k}` outside any section"))),
            (s, k) => return Err(err(format!("unknown key `{k}` in section [{s}]"))),
        }
    }

    if tracker_enabled {
        cfg.tracklets = Some(tracker);
    }
    // the gating and time-scaling parameters are shared with the online path
    cfg.online.v_max = cfg.graph.v_max;
    cfg.online.gamma = cfg.graph.gamma;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_empty_config() {
        let cfg = parse_config("", "t").unwrap();
        assert_eq!(cfg.graph.t_window, 10);
        assert_eq!(cfg.graph.alphas, vec![1.0, 0.5]);
        assert_eq!(cfg.min_track_frames, 10);
        assert!(cfg.tracklets.is_none());
    }

    #[test]
    fn full_config_parses() {
        let text = "\
[model]
format = apidis_csv

[graph]
t_window = 12
gamma = 2.5
v_max = 20
delta = 0.001
k_app = none
appearance_window = 300
alphas = 1.0, 0.1, 0.5

[online]
st_window = 8
st_sigma = 15
app_window = 150
app_sigma = 0.1
observation_window = 40
border_sigma = 25
bounds = 0, 0, 2800, 1500

[solver]
kind = joint
seed = 11
t_joint = 50
outer_tol = 1e-6
t_con = 30
sweep_tol = 1e-9
online_sweeps = 5
sweep_order = random
pgd_max_iters = 200
pgd_tol = 1e-10
workers = 4

[tracker]
enabled = true
max_dist = 15
window = 100

[pipeline]
strip_overlap = 0.05
min_track_frames = 5
min_track_conf = 0.5
match = iou:0.5
";
        let cfg = parse_config(text, "t").unwrap();
        assert_eq!(cfg.format, DetectionFormat::ApidisCsv);
        assert_eq!(cfg.graph.alphas.len(), 3);
        assert_eq!(cfg.graph.k_app, None);
        assert_eq!(cfg.graph.appearance_window, Some(300));
        assert_eq!(cfg.solver, SolverKind::Joint);
        assert_eq!(cfg.seed, 11);
        assert_eq!(cfg.workers, 4);
        assert_eq!(cfg.online.observation_window, 40);
        assert_eq!(cfg.online.v_max, 20.0);
        assert!(cfg.tracklets.is_some());
        assert_eq!(cfg.strip_overlap, Some(0.05));
        assert_eq!(cfg.match_rule, MatchRule::Iou(0.5));
        assert!(matches!(cfg.nodewise.sweep_order, SweepOrder::SeededRandom(11)));
    }

    #[test]
    fn unknown_key_is_an_error_with_line_number() {
        let err = parse_config("[graph]\nnot_a_key = 3\n", "t").unwrap_err();
        match err {
            Error::Parse { line, msg, .. } => {
                assert_eq!(line, 2);
                assert!(msg.contains("not_a_key"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_section_is_an_error() {
        assert!(parse_config("[nope]\n", "t").is_err());
    }

    #[test]
    fn comments_and_blanks_ignored() {
        let cfg = parse_config("# top\n\n[graph]\nv_max = 3.5 # inline\n", "t").unwrap();
        assert_eq!(cfg.graph.v_max, 3.5);
    }
}
