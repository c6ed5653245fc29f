// Copyright 2026 liebrob contributors
// SPDX-License-Identifier: Apache-2.0

//! Buffered run outputs, flushed to disk only once a run has finished.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

#[derive(Debug, Default, Clone)]
pub struct Outputs {
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.files.push((name.to_string(), bytes));
        Ok(())
    }

    pub fn text(&mut self, name: &str, text: String) {
        self.files.push((name.to_string(), text.into_bytes()));
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, b)| b.as_slice())
    }

    pub fn write_all(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for (name, bytes) in &self.files {
            let path = dir.join(name);
            std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(())
    }
}

/// Minimal CSV builder; cells never contain commas or quotes.
pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut buf = header.join(",");
        buf.push('\n');
        Self { buf }
    }

    pub fn row(&mut self, cells: &[String]) {
        let _ = writeln!(self.buf, "{}", cells.join(","));
    }

    pub fn finish(self) -> String {
        self.buf
    }
}

/// Shortest round-trip form, in exponent notation outside `[1e-4, 1e15)`.
pub fn cell(v: f64) -> String {
    let a = v.abs();
    if v.is_finite() && a != 0.0 && !(1e-4..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

pub fn opt_cell(v: Option<f64>) -> String {
    v.map(cell).unwrap_or_default()
}

pub fn sites(s: &[usize]) -> String {
    s.iter().map(usize::to_string).collect::<Vec<_>>().join(";")
}

/// `(distance, arrival)` table.
pub fn lightcone_csv(arrivals: &[(f64, f64)], epsilon: f64) -> String {
    let mut csv = Csv::new(&["d", "arrival", "epsilon"]);
    for &(d, a) in arrivals {
        csv.row(&[cell(d), cell(a), cell(epsilon)]);
    }
    csv.finish()
}

/// Arrival times are expected to be nondecreasing in distance.
pub fn lightcone_monotone(arrivals: &[(f64, f64)]) -> bool {
    arrivals.windows(2).all(|w| w[1].1 >= w[0].1)
}
