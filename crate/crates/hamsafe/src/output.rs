//! Telemetry CSV and JSON artifacts.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::run::{Row, RunRecord};

/// Header in the fixed column order.
pub fn csv_header(m: usize) -> String {
    let mut cols: Vec<String> = ["t", "px", "py", "pz", "qw", "qx", "qy", "qz", "vx", "vy", "vz", "wx", "wy", "wz"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    cols.extend((0..m).map(|i| format!("u{i}")));
    cols.extend(["sigma", "V", "dE", "dist_p", "dist_g"].iter().map(|s| s.to_string()));
    cols.join(",")
}

pub fn write_csv<W: Write>(rows: &[Row], mut w: W) -> io::Result<()> {
    let m = rows.first().map_or(0, |r| r.u.len());
    writeln!(w, "{}", csv_header(m))?;
    for r in rows {
        let mut vals = vec![r.t];
        vals.extend_from_slice(&r.p);
        vals.extend_from_slice(&r.quat);
        vals.extend_from_slice(&r.zeta);
        vals.extend_from_slice(&r.u);
        vals.extend_from_slice(&[r.sigma, r.v, r.de, r.dist_p, r.dist_g]);
        let line: Vec<String> = vals.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

/// Refuses to overwrite an existing file unless `force`.
pub fn target(dir: &Path, name: &str, force: bool) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let p = dir.join(name);
    if p.exists() && !force {
        return Err(io::Error::new(io::ErrorKind::AlreadyExists, format!("{} exists; use --force", p.display())));
    }
    Ok(p)
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T, force: bool) -> io::Result<PathBuf> {
    let p = target(dir, name, force)?;
    let text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    fs::write(&p, text + "\n")?;
    Ok(p)
}

/// `telemetry.csv`, `summary.json` and `certificate.json` for one run.
pub fn write_run(dir: &Path, rec: &RunRecord, force: bool) -> io::Result<()> {
    let p = target(dir, "telemetry.csv", force)?;
    write_csv(&rec.rows, io::BufWriter::new(fs::File::create(p)?))?;
    #[derive(Serialize)]
    struct Out<'a> {
        scenario: &'a str,
        c1: f64,
        c2: f64,
        goal: [f64; 3],
        aborted: &'a Option<String>,
        #[serde(flatten)]
        summary: &'a crate::run::Summary,
    }
    let out = Out { scenario: &rec.scenario, c1: rec.c1, c2: rec.c2, goal: rec.goal, aborted: &rec.aborted, summary: &rec.summary };
    write_json(dir, "summary.json", &out, force)?;
    write_json(dir, "certificate.json", &rec.certificate, force)?;
    Ok(())
}
