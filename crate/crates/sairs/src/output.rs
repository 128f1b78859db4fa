//! File formats and atomic writes.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use sairs_core::simulator::{OccupationHistogram, Trajectory};

/// Writes `bytes` to a temporary file next to `path`, then renames it into
/// place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// `t,S,A,I,R,regime,eta`, one row per sample, 17 significant digits,
/// regimes numbered from 1.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::with_capacity(traj.len() * 150 + 32);
    out.push_str("t,S,A,I,R,regime,eta\n");
    for k in 0..traj.len() {
        let x = traj.states[k];
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{:.16e}",
            traj.times[k],
            x.s,
            x.a,
            x.i,
            x.r,
            traj.regimes[k] + 1,
            traj.eta[k]
        )
        .expect("writing to a String cannot fail");
    }
    out
}

#[derive(serde::Serialize)]
struct Cell {
    s: u32,
    a: u32,
    i: u32,
    eta: u32,
    regime: usize,
    weight: f64,
}

#[derive(serde::Serialize)]
struct Edges {
    s: Vec<f64>,
    a: Vec<f64>,
    i: Vec<f64>,
    /// Finite bins; index `eta.len() - 1` of a cell is the overflow bin.
    eta: Vec<f64>,
}

/// Histogram with explicit bin edges. Cell indices are zero-based bin
/// numbers; regimes are numbered from 1.
pub fn histogram_json(h: &OccupationHistogram, expected_regime_marginal: &[f64]) -> serde_json::Value {
    let b = h.binning();
    let cells: Vec<Cell> = h
        .cells()
        .map(|(c, w)| Cell {
            s: c.s,
            a: c.a,
            i: c.i,
            eta: c.eta,
            regime: c.regime as usize + 1,
            weight: *w,
        })
        .collect();
    serde_json::json!({
        "window": h.window_bounds(),
        "total_weight": h.total_weight(),
        "edges": Edges { s: b.s_edges(), a: b.a_edges(), i: b.i_edges(), eta: b.eta_edges() },
        "eta_overflow_bin": b.eta_bins,
        "regimes": b.regimes,
        "regime_marginal": h.regime_marginal(),
        "expected_regime_marginal": expected_regime_marginal,
        "eta_overflow_fraction": h.overflow_fraction(),
        "cells": cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use sairs_core::semi_markov::RegimePath;
    use sairs_core::simulator::{simulate_on_path, IntegratorConfig};
    use sairs_core::{EpidemicParams, EpidemicState4};

    fn traj() -> Trajectory {
        let p = EpidemicParams {
            beta_a: vec![0.3, 0.6],
            beta_i: vec![0.3, 0.6],
            delta_a: 0.1,
            delta_i: 0.1,
            alpha: 0.5,
            gamma: 0.02,
            nu: 0.01,
            mu: 1e-4,
        };
        let path = RegimePath::new(vec![0.0, 0.25], vec![0, 1], 0.5).unwrap();
        let x0 = EpidemicState4::new(0.9, 0.05, 0.05, 0.0).unwrap();
        simulate_on_path(&p, &path, x0, &IntegratorConfig::default()).unwrap()
    }

    #[test]
    fn csv_layout() {
        let csv = trajectory_csv(&traj());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,S,A,I,R,regime,eta");
        assert_eq!(lines.len(), 1 + 7);
        assert!(lines[1].starts_with("0.0000000000000000e0,9.0000000000000002e-1,"));
        let jump: Vec<&str> = lines[4].split(',').collect();
        assert_eq!(jump[0].parse::<f64>().unwrap(), 0.25);
        assert_eq!((jump[5], jump[6].parse::<f64>().unwrap()), ("2", 0.0));
        for line in &lines[1..] {
            let fields: Vec<f64> = line.split(',').map(|f| f.parse().unwrap()).collect();
            assert_eq!(fields.len(), 7);
        }
    }

    #[test]
    fn csv_floats_round_trip() {
        let t = traj();
        let csv = trajectory_csv(&t);
        for (k, line) in csv.lines().skip(1).enumerate() {
            let s: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
            assert_eq!(s, t.states[k].s);
        }
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.txt");
        write_atomic(&path, b"first").unwrap();
        write_atomic(&path, b"second").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "second");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
