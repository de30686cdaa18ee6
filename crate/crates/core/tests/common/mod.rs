//! Brute-force reference used by integration and acceptance tests.
//!
//! Deliberately naive: every cell against every beacon, readings kept as
//! `Vec<bool>`, grouping by linear search. Shares only the cell-center
//! convention with the library.

#![allow(dead_code)]

use beaconloc::{Deployment, GridSpec};

pub struct BruteMap {
    /// Row-major per-cell readings.
    pub readings: Vec<Vec<bool>>,
    /// Distinct readings with their cell counts, first-appearance order.
    pub groups: Vec<(Vec<bool>, usize)>,
}

pub fn brute_force(dep: &Deployment, grid: &GridSpec) -> BruteMap {
    let cs = grid.cell_size();
    let mut readings = Vec::new();
    for iy in 0..grid.ny() {
        for ix in 0..grid.nx() {
            let cx = (ix as f64 + 0.5) * cs;
            let cy = (iy as f64 + 0.5) * cs;
            let reading: Vec<bool> = dep
                .beacons()
                .iter()
                .map(|b| {
                    let dx = cx - b.position.x;
                    let dy = cy - b.position.y;
                    dx * dx + dy * dy < b.radius * b.radius
                })
                .collect();
            readings.push(reading);
        }
    }
    let mut groups: Vec<(Vec<bool>, usize)> = Vec::new();
    for r in &readings {
        match groups.iter_mut().find(|(g, _)| g == r) {
            Some((_, n)) => *n += 1,
            None => groups.push((r.clone(), 1)),
        }
    }
    BruteMap { readings, groups }
}

pub fn bits_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}
