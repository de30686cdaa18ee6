//! Grid mapping: label every grid cell of the domain with the signature read
//! at its center, group cells by signature, and turn group areas into
//! localization uncertainty.

use std::collections::HashMap;

use thiserror::Error;

use crate::geometry::{detects, words_for, Deployment, Domain, Point, Signature};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("cell size must be finite and > 0, got {0}")]
    InvalidCellSize(f64),
    #[error("cell size {cell_size} does not evenly divide the {width} x {height} domain")]
    UnevenCells {
        cell_size: f64,
        width: f64,
        height: f64,
    },
    #[error("grid was laid out for a different domain than the deployment")]
    DomainMismatch,
    #[error("reading has {got} bits but the deployment has {expected} beacons")]
    ReadingLength { expected: usize, got: usize },
}

/// Uniform square cells covering a domain exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    domain: Domain,
    cell_size: f64,
    nx: usize,
    ny: usize,
}

// relative slack when checking that cell_size divides the extent
const DIVISIBILITY_EPS: f64 = 1e-9;

fn cell_count(extent: f64, cell_size: f64) -> Option<usize> {
    let n = (extent / cell_size).round();
    if n < 1.0 || (n * cell_size - extent).abs() > DIVISIBILITY_EPS * extent {
        return None;
    }
    Some(n as usize)
}

impl GridSpec {
    pub const DEFAULT_CELL_SIZE: f64 = 1.0;

    pub fn new(domain: Domain, cell_size: f64) -> Result<Self, GridError> {
        if !(cell_size.is_finite() && cell_size > 0.0) {
            return Err(GridError::InvalidCellSize(cell_size));
        }
        let uneven = || GridError::UnevenCells {
            cell_size,
            width: domain.width(),
            height: domain.height(),
        };
        let nx = cell_count(domain.width(), cell_size).ok_or_else(uneven)?;
        let ny = cell_count(domain.height(), cell_size).ok_or_else(uneven)?;
        Ok(Self {
            domain,
            cell_size,
            nx,
            ny,
        })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn cell_count(&self) -> usize {
        self.nx * self.ny
    }

    pub fn cell_area(&self) -> f64 {
        self.cell_size * self.cell_size
    }

    /// Row-major index: `iy * nx + ix`.
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    pub fn coords(&self, index: usize) -> (usize, usize) {
        (index % self.nx, index / self.nx)
    }

    pub fn cell_center(&self, ix: usize, iy: usize) -> Point {
        Point {
            x: (ix as f64 + 0.5) * self.cell_size,
            y: (iy as f64 + 0.5) * self.cell_size,
        }
    }

    /// Cell containing `p`, with points on the far edges folded into the last cell.
    pub fn cell_of(&self, p: &Point) -> Option<(usize, usize)> {
        if !self.domain.contains(p) {
            return None;
        }
        let ix = ((p.x / self.cell_size) as usize).min(self.nx - 1);
        let iy = ((p.y / self.cell_size) as usize).min(self.ny - 1);
        Some((ix, iy))
    }

    /// Inclusive range of cell indices along one axis whose centers may lie
    /// within `radius` of `center`. Conservative by one cell on each side.
    fn axis_span(&self, center: f64, radius: f64, n: usize) -> Option<(usize, usize)> {
        let lo = ((center - radius) / self.cell_size - 0.5).floor() - 1.0;
        let hi = ((center + radius) / self.cell_size - 0.5).ceil() + 1.0;
        if hi < 0.0 || lo > (n - 1) as f64 {
            return None;
        }
        Some((lo.max(0.0) as usize, (hi as usize).min(n - 1)))
    }
}

/// Cells sharing one signature.
#[derive(Debug, Clone, PartialEq)]
pub struct SignatureGroup {
    pub signature: Signature,
    /// Row-major cell indices in ascending order.
    pub cells: Vec<usize>,
    pub area: f64,
}

#[derive(Debug, Clone)]
pub struct SignatureMap {
    grid: GridSpec,
    deployment: Deployment,
    /// Groups in order of first appearance in row-major cell order.
    groups: Vec<SignatureGroup>,
    cell_group: Vec<u32>,
    lookup: HashMap<Signature, usize>,
}

/// Signature of every cell center, `words_for(n)` words per cell.
fn cell_words(dep: &Deployment, grid: &GridSpec) -> Vec<u64> {
    let nw = words_for(dep.len());
    let mut words = vec![0u64; grid.cell_count() * nw];
    for (i, beacon) in dep.beacons().iter().enumerate() {
        let (word, mask) = (i / 64, 1u64 << (i % 64));
        let Some((x0, x1)) = grid.axis_span(beacon.position.x, beacon.radius, grid.nx) else {
            continue;
        };
        let Some((y0, y1)) = grid.axis_span(beacon.position.y, beacon.radius, grid.ny) else {
            continue;
        };
        for iy in y0..=y1 {
            for ix in x0..=x1 {
                if detects(beacon, &grid.cell_center(ix, iy)) {
                    words[grid.index(ix, iy) * nw + word] |= mask;
                }
            }
        }
    }
    words
}

/// Label each cell with the signature at its center and group cells by signature.
pub fn build_signature_map(dep: &Deployment, grid: &GridSpec) -> Result<SignatureMap, GridError> {
    if dep.domain() != grid.domain() {
        return Err(GridError::DomainMismatch);
    }
    let n = dep.len();
    let ncells = grid.cell_count();
    let nw = words_for(n);
    let words = cell_words(dep, grid);

    let mut groups: Vec<SignatureGroup> = Vec::new();
    let mut cell_group = Vec::with_capacity(ncells);
    if nw == 0 {
        groups.push(SignatureGroup {
            signature: Signature::zeros(0),
            cells: (0..ncells).collect(),
            area: 0.0,
        });
        cell_group.resize(ncells, 0);
    } else {
        let mut by_key: HashMap<&[u64], usize> = HashMap::new();
        for (cell, key) in words.chunks_exact(nw).enumerate() {
            let g = *by_key.entry(key).or_insert_with(|| {
                groups.push(SignatureGroup {
                    signature: Signature::from_words(n, key),
                    cells: Vec::new(),
                    area: 0.0,
                });
                groups.len() - 1
            });
            groups[g].cells.push(cell);
            cell_group.push(g as u32);
        }
    }

    let cell_area = grid.cell_area();
    let mut lookup = HashMap::with_capacity(groups.len());
    for (g, group) in groups.iter_mut().enumerate() {
        group.area = group.cells.len() as f64 * cell_area;
        lookup.insert(group.signature.clone(), g);
    }

    Ok(SignatureMap {
        grid: *grid,
        deployment: dep.clone(),
        groups,
        cell_group,
        lookup,
    })
}

impl SignatureMap {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn deployment(&self) -> &Deployment {
        &self.deployment
    }

    pub fn groups(&self) -> &[SignatureGroup] {
        &self.groups
    }

    pub fn group_of_cell(&self, ix: usize, iy: usize) -> &SignatureGroup {
        &self.groups[self.cell_group[self.grid.index(ix, iy)] as usize]
    }

    pub fn cell_signature(&self, ix: usize, iy: usize) -> &Signature {
        &self.group_of_cell(ix, iy).signature
    }

    pub fn group(&self, reading: &Signature) -> Option<&SignatureGroup> {
        self.lookup.get(reading).map(|&g| &self.groups[g])
    }

    /// Number of cells labelled with `reading`; zero if none.
    pub fn cells_matching(&self, reading: &Signature) -> Result<usize, GridError> {
        self.check_len(reading)?;
        Ok(self.group(reading).map_or(0, |g| g.cells.len()))
    }

    fn check_len(&self, reading: &Signature) -> Result<(), GridError> {
        if reading.len() != self.deployment.len() {
            return Err(GridError::ReadingLength {
                expected: self.deployment.len(),
                got: reading.len(),
            });
        }
        Ok(())
    }

    /// Iterate `(ix, iy, signature)` in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, &Signature)> + '_ {
        self.cell_group.iter().enumerate().map(|(i, &g)| {
            let (ix, iy) = self.grid.coords(i);
            (ix, iy, &self.groups[g as usize].signature)
        })
    }
}

/// Percentage of the domain whose cells share `reading`.
pub fn uncertainty_for_reading(map: &SignatureMap, reading: &Signature) -> Result<f64, GridError> {
    let count = map.cells_matching(reading)?;
    Ok(100.0 * count as f64 / map.grid.cell_count() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalizationResult {
    pub reading: Signature,
    pub cells: Vec<usize>,
    pub area: f64,
    pub uncertainty_pct: f64,
    /// Mean of member cell centers; `None` when no cell matches.
    pub centroid: Option<Point>,
}

impl LocalizationResult {
    /// No grid cell carries this reading (the target sits between grid points).
    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

pub fn localize(map: &SignatureMap, reading: &Signature) -> Result<LocalizationResult, GridError> {
    map.check_len(reading)?;
    let cells = map
        .group(reading)
        .map(|g| g.cells.clone())
        .unwrap_or_default();
    let centroid = (!cells.is_empty()).then(|| {
        let (sx, sy) = cells.iter().fold((0.0, 0.0), |(sx, sy), &c| {
            let (ix, iy) = map.grid.coords(c);
            let p = map.grid.cell_center(ix, iy);
            (sx + p.x, sy + p.y)
        });
        let n = cells.len() as f64;
        Point {
            x: sx / n,
            y: sy / n,
        }
    });
    Ok(LocalizationResult {
        reading: reading.clone(),
        area: cells.len() as f64 * map.grid.cell_area(),
        uncertainty_pct: 100.0 * cells.len() as f64 / map.grid.cell_count() as f64,
        cells,
        centroid,
    })
}

/// Mean uncertainty for a target drawn uniformly over the domain:
/// `100 * Σ_k (A_k / A)²` over signature groups.
pub fn expected_uncertainty(map: &SignatureMap) -> f64 {
    let total = map.grid.cell_count() as f64;
    100.0
        * map
            .groups
            .iter()
            .map(|g| {
                let p = g.cells.len() as f64 / total;
                p * p
            })
            .sum::<f64>()
}
