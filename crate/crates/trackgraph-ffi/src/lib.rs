//! C ABI over the tracking engine: opaque handles, status codes, and a
//! last-error message per thread. Every function catches panics and maps
//! errors onto [`TgStatus`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use trackgraph::config::load_config;
use trackgraph::model::{
    parse_detection_file, parse_track_file, write_track_file, Detection, DetectionFormat, TrackSet,
};
use trackgraph::pipeline::{
    evaluate_clear_mot, run_offline, run_online, MatchRule, PipelineConfig, SolverKind,
};
use trackgraph::Error;

/// Status code returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TgStatus {
    Ok = 0,
    NullArgument = 1,
    ParseError = 2,
    ConfigError = 3,
    IoError = 4,
    SolverError = 5,
    InvalidUtf8 = 6,
    Panic = 7,
}

/// Detection file layout.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TgFormat {
    MotCsv = 0,
    ApidisCsv = 1,
}

/// Solver selection for offline tracking.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TgSolver {
    ConfigDefault = 0,
    Joint = 1,
    Nodewise = 2,
}

/// CLEAR-MOT summary returned by value.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct TgEvalReport {
    pub mota: f64,
    pub motp: f64,
    pub switches: u64,
    pub misses: u64,
    pub false_positives: u64,
    pub matches: u64,
    pub gt_boxes: u64,
}

/// Opaque pipeline configuration.
pub struct TgConfig(PipelineConfig);
/// Opaque detection set.
pub struct TgDetections(Vec<Detection>);
/// Opaque track set.
pub struct TgTracks(TrackSet);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let cleaned = msg.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(cleaned).unwrap_or_default();
    });
}

fn status_of(err: &Error) -> TgStatus {
    match err {
        Error::Parse { .. } | Error::FeatureDimension { .. } => TgStatus::ParseError,
        Error::Config(_) | Error::InvalidInput(_) => TgStatus::ConfigError,
        Error::Io(_) => TgStatus::IoError,
        _ => TgStatus::SolverError,
    }
}

fn guard(f: impl FnOnce() -> TgStatus) -> TgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            TgStatus::Panic
        }
    }
}

/// # Safety
/// `ptr` must be a valid NUL-terminated string.
unsafe fn path_arg<'a>(ptr: *const c_char) -> Result<&'a Path, TgStatus> {
    if ptr.is_null() {
        set_error("null path");
        return Err(TgStatus::NullArgument);
    }
    match unsafe { CStr::from_ptr(ptr) }.to_str() {
        Ok(s) => Ok(Path::new(s)),
        Err(_) => {
            set_error("path is not valid UTF-8");
            Err(TgStatus::InvalidUtf8)
        }
    }
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn tg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message describing the most recent failure on this thread. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn tg_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Default configuration; free with [`tg_config_free`].
#[no_mangle]
pub extern "C" fn tg_config_default() -> *mut TgConfig {
    Box::into_raw(Box::new(TgConfig(PipelineConfig::default())))
}

/// Loads a key = value configuration file.
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tg_config_load(
    path: *const c_char,
    out: *mut *mut TgConfig,
) -> TgStatus {
    guard(|| {
        if out.is_null() {
            set_error("null out pointer");
            return TgStatus::NullArgument;
        }
        let path = match unsafe { path_arg(path) } {
            Ok(p) => p,
            Err(status) => return status,
        };
        match load_config(path) {
            Ok(cfg) => {
                unsafe { *out = Box::into_raw(Box::new(TgConfig(cfg))) };
                TgStatus::Ok
            }
            Err(err) => {
                set_error(&err.to_string());
                status_of(&err)
            }
        }
    })
}

/// # Safety
/// `cfg` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn tg_config_free(cfg: *mut TgConfig) {
    if !cfg.is_null() {
        drop(unsafe { Box::from_raw(cfg) });
    }
}

/// Parses a detection file.
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tg_detections_load(
    path: *const c_char,
    format: TgFormat,
    out: *mut *mut TgDetections,
) -> TgStatus {
    guard(|| {
        if out.is_null() {
            set_error("null out pointer");
            return TgStatus::NullArgument;
        }
        let path = match unsafe { path_arg(path) } {
            Ok(p) => p,
            Err(status) => return status,
        };
        let format = match format {
            TgFormat::MotCsv => DetectionFormat::MotCsv,
            TgFormat::ApidisCsv => DetectionFormat::ApidisCsv,
        };
        match parse_detection_file(path, format) {
            Ok(dets) => {
                unsafe { *out = Box::into_raw(Box::new(TgDetections(dets))) };
                TgStatus::Ok
            }
            Err(err) => {
                set_error(&err.to_string());
                status_of(&err)
            }
        }
    })
}

/// Number of detections behind the handle; 0 for null.
///
/// # Safety
/// `dets` must come from this library if non-null.
#[no_mangle]
pub unsafe extern "C" fn tg_detections_len(dets: *const TgDetections) -> usize {
    if dets.is_null() {
        return 0;
    }
    unsafe { &*dets }.0.len()
}

/// # Safety
/// `dets` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn tg_detections_free(dets: *mut TgDetections) {
    if !dets.is_null() {
        drop(unsafe { Box::from_raw(dets) });
    }
}

/// Runs the offline tracking pipeline.
///
/// # Safety
/// `cfg` and `dets` must be valid handles from this library; `out` must be a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tg_track_offline(
    cfg: *const TgConfig,
    dets: *const TgDetections,
    solver: TgSolver,
    workers: u32,
    out: *mut *mut TgTracks,
) -> TgStatus {
    guard(|| {
        if cfg.is_null() || dets.is_null() || out.is_null() {
            set_error("null argument");
            return TgStatus::NullArgument;
        }
        let mut config = unsafe { &*cfg }.0.clone();
        match solver {
            TgSolver::ConfigDefault => {}
            TgSolver::Joint => config.solver = SolverKind::Joint,
            TgSolver::Nodewise => config.solver = SolverKind::Nodewise,
        }
        if workers > 0 {
            config.workers = workers as usize;
        }
        let detections = unsafe { &*dets }.0.clone();
        match run_offline(&config, detections) {
            Ok(result) => {
                unsafe { *out = Box::into_raw(Box::new(TgTracks(result.tracks))) };
                TgStatus::Ok
            }
            Err(err) => {
                set_error(&err.to_string());
                status_of(&err)
            }
        }
    })
}

/// Runs the online (incremental) tracking pipeline. `window <= 0` keeps the
/// configured observation window.
///
/// # Safety
/// `cfg` and `dets` must be valid handles from this library; `out` must be a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tg_track_online(
    cfg: *const TgConfig,
    dets: *const TgDetections,
    window: i64,
    out: *mut *mut TgTracks,
) -> TgStatus {
    guard(|| {
        if cfg.is_null() || dets.is_null() || out.is_null() {
            set_error("null argument");
            return TgStatus::NullArgument;
        }
        let config = unsafe { &*cfg }.0.clone();
        let detections = unsafe { &*dets }.0.clone();
        let override_window = (window > 0).then_some(window);
        match run_online(&config, detections, override_window) {
            Ok(result) => {
                unsafe { *out = Box::into_raw(Box::new(TgTracks(result.tracks))) };
                TgStatus::Ok
            }
            Err(err) => {
                set_error(&err.to_string());
                status_of(&err)
            }
        }
    })
}

/// Number of tracks behind the handle; 0 for null.
///
/// # Safety
/// `tracks` must come from this library if non-null.
#[no_mangle]
pub unsafe extern "C" fn tg_tracks_len(tracks: *const TgTracks) -> usize {
    if tracks.is_null() {
        return 0;
    }
    unsafe { &*tracks }.0.records.len()
}

/// Loads a track CSV file (also used for ground truth).
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tg_tracks_load(path: *const c_char, out: *mut *mut TgTracks) -> TgStatus {
    guard(|| {
        if out.is_null() {
            set_error("null out pointer");
            return TgStatus::NullArgument;
        }
        let path = match unsafe { path_arg(path) } {
            Ok(p) => p,
            Err(status) => return status,
        };
        match parse_track_file(path) {
            Ok(tracks) => {
                unsafe { *out = Box::into_raw(Box::new(TgTracks(tracks))) };
                TgStatus::Ok
            }
            Err(err) => {
                set_error(&err.to_string());
                status_of(&err)
            }
        }
    })
}

/// Writes tracks as `frame,track_id,x,y,w,h` CSV.
///
/// # Safety
/// `tracks` must be a valid handle; `path` a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn tg_tracks_write(tracks: *const TgTracks, path: *const c_char) -> TgStatus {
    guard(|| {
        if tracks.is_null() {
            set_error("null tracks");
            return TgStatus::NullArgument;
        }
        let path = match unsafe { path_arg(path) } {
            Ok(p) => p,
            Err(status) => return status,
        };
        match write_track_file(&unsafe { &*tracks }.0, path) {
            Ok(()) => TgStatus::Ok,
            Err(err) => {
                set_error(&err.to_string());
                status_of(&err)
            }
        }
    })
}

/// # Safety
/// `tracks` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn tg_tracks_free(tracks: *mut TgTracks) {
    if !tracks.is_null() {
        drop(unsafe { Box::from_raw(tracks) });
    }
}

/// CLEAR-MOT evaluation of `tracks` against `gt`. `rule` is `"dist:30"` /
/// `"iou:0.5"` style; null keeps the default distance rule.
///
/// # Safety
/// `tracks` and `gt` must be valid handles; `out` a valid pointer; `rule`
/// null or a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn tg_eval(
    tracks: *const TgTracks,
    gt: *const TgTracks,
    rule: *const c_char,
    out: *mut TgEvalReport,
) -> TgStatus {
    guard(|| {
        if tracks.is_null() || gt.is_null() || out.is_null() {
            set_error("null argument");
            return TgStatus::NullArgument;
        }
        let rule = if rule.is_null() {
            MatchRule::Dist(30.0)
        } else {
            let text = match unsafe { CStr::from_ptr(rule) }.to_str() {
                Ok(s) => s,
                Err(_) => {
                    set_error("rule is not valid UTF-8");
                    return TgStatus::InvalidUtf8;
                }
            };
            match MatchRule::parse_name(text) {
                Ok(rule) => rule,
                Err(err) => {
                    set_error(&err.to_string());
                    return TgStatus::ConfigError;
                }
            }
        };
        let report = evaluate_clear_mot(&unsafe { &*tracks }.0, &unsafe { &*gt }.0, rule);
        unsafe {
            *out = TgEvalReport {
                mota: report.mota,
                motp: report.motp,
                switches: report.switches as u64,
                misses: report.misses as u64,
                false_positives: report.false_positives as u64,
                matches: report.matches as u64,
                gt_boxes: report.total_gt as u64,
            };
        }
        TgStatus::Ok
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CString;
    use std::ptr;

    fn c_path(path: &Path) -> CString {
        CString::new(path.to_str().unwrap()).unwrap()
    }

    #[test]
    fn offline_round_trip_through_the_c_abi() {
        let dir = tempfile::tempdir().unwrap();
        let dets_path = dir.path().join("dets.csv");
        let gt_path = dir.path().join("gt.csv");
        let out_path = dir.path().join("tracks.csv");
        let scenario = trackgraph::synth::generate(trackgraph::synth::Scenario::Crossing, 7);
        trackgraph::synth::write_detection_file(&scenario.detections, &dets_path).unwrap();
        trackgraph::model::write_track_file(&scenario.ground_truth, &gt_path).unwrap();

        unsafe {
            let cfg = tg_config_default();
            let mut dets: *mut TgDetections = ptr::null_mut();
            assert_eq!(
                tg_detections_load(c_path(&dets_path).as_ptr(), TgFormat::MotCsv, &mut dets),
                TgStatus::Ok
            );
            assert_eq!(tg_detections_len(dets), 190);

            let mut tracks: *mut TgTracks = ptr::null_mut();
            assert_eq!(
                tg_track_offline(cfg, dets, TgSolver::Nodewise, 1, &mut tracks),
                TgStatus::Ok
            );
            assert_eq!(tg_tracks_len(tracks), 2);
            assert_eq!(tg_tracks_write(tracks, c_path(&out_path).as_ptr()), TgStatus::Ok);

            let mut gt: *mut TgTracks = ptr::null_mut();
            assert_eq!(tg_tracks_load(c_path(&gt_path).as_ptr(), &mut gt), TgStatus::Ok);
            let mut report = TgEvalReport {
                mota: 0.0,
                motp: 0.0,
                switches: 0,
                misses: 0,
                false_positives: 0,
                matches: 0,
                gt_boxes: 0,
            };
            assert_eq!(tg_eval(tracks, gt, ptr::null(), &mut report), TgStatus::Ok);
            assert_eq!(report.mota, 1.0);
            assert_eq!(report.switches, 0);
            assert_eq!(report.gt_boxes, 190);

            tg_tracks_free(tracks);
            tg_tracks_free(gt);
            tg_detections_free(dets);
            tg_config_free(cfg);
        }
    }

    #[test]
    fn null_arguments_are_rejected() {
        unsafe {
            let mut out: *mut TgDetections = ptr::null_mut();
            assert_eq!(
                tg_detections_load(ptr::null(), TgFormat::MotCsv, &mut out),
                TgStatus::NullArgument
            );
            let mut tracks: *mut TgTracks = ptr::null_mut();
            assert_eq!(
                tg_track_offline(ptr::null(), ptr::null(), TgSolver::ConfigDefault, 0, &mut tracks),
                TgStatus::NullArgument
            );
        }
    }

    #[test]
    fn missing_file_sets_the_error_message() {
        unsafe {
            let mut out: *mut TgDetections = ptr::null_mut();
            let path = CString::new("/definitely/not/here.csv").unwrap();
            let status = tg_detections_load(path.as_ptr(), TgFormat::MotCsv, &mut out);
            assert_eq!(status, TgStatus::IoError);
            let msg = CStr::from_ptr(tg_last_error()).to_str().unwrap();
            assert!(!msg.is_empty());
        }
    }

    #[test]
    fn config_load_reports_unknown_keys() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.ini");
        std::fs::write(&path, "[graph]\nwhat = 1\n").unwrap();
        unsafe {
            let mut out: *mut TgConfig = ptr::null_mut();
            let status = tg_config_load(c_path(&path).as_ptr(), &mut out);
            assert_eq!(status, TgStatus::ParseError);
            let msg = CStr::from_ptr(tg_last_error()).to_str().unwrap();
            assert!(msg.contains("what"), "{msg}");
        }
    }

    #[test]
    fn online_through_the_c_abi() {
        let dir = tempfile::tempdir().unwrap();
        let dets_path = dir.path().join("dets.csv");
        let cfg_path = dir.path().join("cfg.ini");
        std::fs::write(&cfg_path, "[online]\nbounds = 0, 0, 280, 200\n").unwrap();
        let scenario = trackgraph::synth::generate(trackgraph::synth::Scenario::Crossing, 3);
        trackgraph::synth::write_detection_file(&scenario.detections, &dets_path).unwrap();
        unsafe {
            let mut cfg: *mut TgConfig = ptr::null_mut();
            assert_eq!(tg_config_load(c_path(&cfg_path).as_ptr(), &mut cfg), TgStatus::Ok);
            let mut dets: *mut TgDetections = ptr::null_mut();
            assert_eq!(
                tg_detections_load(c_path(&dets_path).as_ptr(), TgFormat::MotCsv, &mut dets),
                TgStatus::Ok
            );
            let mut tracks: *mut TgTracks = ptr::null_mut();
            assert_eq!(tg_track_online(cfg, dets, 0, &mut tracks), TgStatus::Ok);
            assert_eq!(tg_tracks_len(tracks), 2);
            tg_tracks_free(tracks);
            tg_detections_free(dets);
            tg_config_free(cfg);
        }
    }
}
