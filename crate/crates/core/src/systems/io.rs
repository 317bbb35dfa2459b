//! Dataset file: one JSON metadata line, then a CSV body with columns
//! `episode,t,s_0..,a_0..,o_0..`. Actions are blank on the last row of each
//! episode and observations are blank when absent.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::dataset::{DatasetMeta, Trajectory, TrajectoryDataset};
use crate::error::{Error, Result};

/// Shortest decimal that parses back to the same `f64`.
pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

pub fn write_dataset<W: Write>(ds: &TrajectoryDataset, mut out: W) -> std::io::Result<()> {
    let header = serde_json::to_string(&ds.meta).map_err(std::io::Error::other)?;
    writeln!(out, "{header}")?;
    let (d_s, d_a) = (ds.meta.d_s, ds.meta.d_a);
    let mut cols = vec!["episode".to_string(), "t".to_string()];
    cols.extend((0..d_s).map(|j| format!("s_{j}")));
    cols.extend((0..d_a).map(|j| format!("a_{j}")));
    cols.extend((0..d_s).map(|j| format!("o_{j}")));
    let mut w = csv::WriterBuilder::new().from_writer(out);
    w.write_record(&cols)?;
    let mut row: Vec<String> = Vec::with_capacity(cols.len());
    for (e, traj) in ds.trajectories.iter().enumerate() {
        for (t, s) in traj.states.iter().enumerate() {
            row.clear();
            row.push(e.to_string());
            row.push(t.to_string());
            row.extend(s.iter().map(|&v| fmt_f64(v)));
            match traj.actions.get(t) {
                Some(a) => row.extend(a.iter().map(|&v| fmt_f64(v))),
                None => row.extend((0..d_a).map(|_| String::new())),
            }
            match &traj.observations {
                Some(o) => row.extend(o[t].iter().map(|&v| fmt_f64(v))),
                None => row.extend((0..d_s).map(|_| String::new())),
            }
            w.write_record(&row)?;
        }
    }
    w.flush()
}

pub fn save_dataset(ds: &TrajectoryDataset, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut buf = Vec::new();
    write_dataset(ds, &mut buf).map_err(|e| Error::io(path, e))?;
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn load_dataset(path: &Path) -> Result<TrajectoryDataset> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    read_dataset(&text, path)
}

/// Parse the dataset format from a string; `path` is only used in errors.
pub fn read_dataset(text: &str, path: &Path) -> Result<TrajectoryDataset> {
    let perr = |line: u64, message: String| Error::Parse { path: path.to_path_buf(), line, message };
    let (header, body) = match text.split_once('\n') {
        Some(parts) => parts,
        None => return Err(perr(1, "missing metadata header line".into())),
    };
    let meta: DatasetMeta = serde_json::from_str(header).map_err(|e| perr(1, format!("bad metadata: {e}")))?;
    let (d_s, d_a) = (meta.d_s, meta.d_a);
    if meta.state_min.len() != d_s || meta.state_max.len() != d_s {
        return Err(perr(1, "state bounds do not match d_s".into()));
    }
    let width = 2 + 2 * d_s + d_a;

    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(body.as_bytes());
    let cols = rdr.headers().map_err(|e| perr(2, e.to_string()))?.clone();
    if cols.len() != width || cols.get(0) != Some("episode") || cols.get(1) != Some("t") {
        return Err(perr(2, format!("expected {width} columns starting with episode,t")));
    }

    let mut trajectories: Vec<Trajectory> = Vec::new();
    let mut last_line = 2u64;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| perr(e.position().map_or(last_line + 1, |p| p.line() + 1), e.to_string()))?;
        let line = rec.position().map_or(last_line + 1, |p| p.line() + 1);
        last_line = line;
        if rec.len() != width {
            return Err(perr(line, format!("expected {width} fields, found {}", rec.len())));
        }
        let int = |i: usize| -> Result<usize> {
            rec[i].parse().map_err(|_| perr(line, format!("bad integer `{}` in column {}", &rec[i], &cols[i])))
        };
        let float = |i: usize| -> Result<f64> {
            let v: f64 = rec[i].parse().map_err(|_| perr(line, format!("bad number `{}` in column {}", &rec[i], &cols[i])))?;
            if !v.is_finite() {
                return Err(perr(line, format!("non-finite value in column {}", &cols[i])));
            }
            Ok(v)
        };
        let (e, t) = (int(0)?, int(1)?);
        if e == trajectories.len() && t == 0 {
            trajectories.push(Trajectory { states: vec![], actions: vec![], observations: None });
        } else if e + 1 != trajectories.len() || t != trajectories[e].states.len() {
            return Err(perr(line, format!("out-of-order row episode={e} t={t}")));
        }
        let traj = &mut trajectories[e];
        let state = (0..d_s).map(|j| float(2 + j)).collect::<Result<Vec<_>>>()?;
        traj.states.push(state);

        let a_cols = 2 + d_s..2 + d_s + d_a;
        let a_blank = a_cols.clone().all(|i| rec[i].is_empty());
        if d_a == 0 || !a_blank {
            traj.actions.push(a_cols.map(float).collect::<Result<Vec<_>>>()?);
        }
        let o_cols = 2 + d_s + d_a..width;
        let o_blank = o_cols.clone().all(|i| rec[i].is_empty());
        if t == 0 {
            traj.observations = (!o_blank).then(Vec::new);
        }
        match (&mut traj.observations, o_blank) {
            (Some(obs), false) => obs.push(o_cols.map(float).collect::<Result<Vec<_>>>()?),
            (None, true) => {}
            _ => return Err(perr(line, "observation columns blank on some rows only".into())),
        }
    }

    if !body.is_empty() && !text.ends_with('\n') {
        return Err(perr(last_line, "file does not end with a newline (truncated?)".into()));
    }
    // With no actions the final row is indistinguishable, so drop the extra one.
    for traj in &mut trajectories {
        if d_a == 0 {
            traj.actions.pop();
        }
    }
    let lengths: Vec<usize> = trajectories.iter().map(|t| t.states.len()).collect();
    if lengths != meta.episode_lengths {
        return Err(perr(last_line, "episode lengths disagree with metadata (truncated file?)".into()));
    }
    for (e, traj) in trajectories.iter().enumerate() {
        traj.validate(d_s, d_a).map_err(|err| perr(last_line, format!("episode {e}: {err}")))?;
    }
    Ok(TrajectoryDataset { meta, trajectories })
}
