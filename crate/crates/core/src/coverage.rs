//! Coverage masks and the analytics built on them: union fractions,
//! per-cell redundancy, best-gateway association, the coverage-vs-K table and
//! sensor evaluation.
//!
//! Every mask carries the number of cells its fractions are taken over (its
//! denominator). A freshly thresholded mask counts the whole grid; a mask
//! restricted to a domain (for example, outdoor cells only) counts the
//! domain. Masks that are combined must agree on grid and denominator.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::cellset::CellSet;
use crate::linkbudget::{SnrMap, SNR_NONE};
use crate::scene::{GridError, GridSpec, Point2};

#[derive(Debug, Clone, PartialEq)]
pub enum CoverageError {
    GridMismatch,
    DuplicateSite { site: usize },
    UnknownSite { site: usize },
    NoMasks,
    Grid(GridError),
}

impl fmt::Display for CoverageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoverageError::GridMismatch => {
                f.write_str("maps do not share one grid and denominator")
            }
            CoverageError::DuplicateSite { site } => {
                write!(f, "site {site} appears more than once")
            }
            CoverageError::UnknownSite { site } => write!(f, "site {site} has no coverage mask"),
            CoverageError::NoMasks => f.write_str("no coverage maps given"),
            CoverageError::Grid(e) => e.fmt(f),
        }
    }
}

impl core::error::Error for CoverageError {}

impl From<GridError> for CoverageError {
    fn from(e: GridError) -> Self {
        CoverageError::Grid(e)
    }
}

/// Cells of one gateway meeting an SNR threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageMask {
    site_id: usize,
    grid: GridSpec,
    cells: CellSet,
    denominator: usize,
}

impl CoverageMask {
    /// Mask from an explicit cell set; the denominator is the whole grid.
    pub fn from_cells(site_id: usize, grid: GridSpec, cells: CellSet) -> Option<Self> {
        (cells.universe() == grid.cell_count()).then(|| CoverageMask {
            site_id,
            grid,
            denominator: grid.cell_count(),
            cells,
        })
    }

    pub fn site_id(&self) -> usize {
        self.site_id
    }
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }
    pub fn cells(&self) -> &CellSet {
        &self.cells
    }
    pub fn denominator(&self) -> usize {
        self.denominator
    }
    pub fn covered(&self, n: usize) -> bool {
        self.cells.contains(n)
    }
    pub fn count(&self) -> usize {
        self.cells.count()
    }

    /// Restricts the mask to `domain`; fractions are then taken over
    /// `|domain|`.
    pub fn restricted_to(&self, domain: &CellSet) -> CoverageMask {
        let mut cells = self.cells.clone();
        cells.intersect_with(domain);
        CoverageMask {
            site_id: self.site_id,
            grid: self.grid,
            cells,
            denominator: domain.count(),
        }
    }

    /// Same cells under a different site id.
    pub fn relabeled(&self, site_id: usize) -> CoverageMask {
        CoverageMask {
            site_id,
            ..self.clone()
        }
    }
}

/// Thresholds an SNR map (inclusive: `snr >= gamma_db` is covered).
pub fn coverage_mask(snr: &SnrMap, gamma_db: f64) -> CoverageMask {
    let grid = *snr.grid();
    let cells = CellSet::from_indices(
        grid.cell_count(),
        snr.snr_db()
            .iter()
            .enumerate()
            .filter(|&(_, &s)| s != SNR_NONE && s >= gamma_db)
            .map(|(n, _)| n),
    );
    CoverageMask {
        site_id: snr.site_id(),
        grid,
        denominator: grid.cell_count(),
        cells,
    }
}

pub(crate) fn fraction(cells: usize, denominator: usize) -> f64 {
    if denominator == 0 {
        0.0
    } else {
        cells as f64 / denominator as f64
    }
}

/// Checks that masks share one grid and denominator and have distinct site
/// ids. Returns the shared `(grid, denominator)`.
pub(crate) fn check_masks(masks: &[CoverageMask]) -> Result<(GridSpec, usize), CoverageError> {
    let first = masks.first().ok_or(CoverageError::NoMasks)?;
    for (k, m) in masks.iter().enumerate() {
        if m.grid != first.grid || m.denominator != first.denominator {
            return Err(CoverageError::GridMismatch);
        }
        if masks[..k].iter().any(|o| o.site_id == m.site_id) {
            return Err(CoverageError::DuplicateSite { site: m.site_id });
        }
    }
    Ok((first.grid, first.denominator))
}

fn find(masks: &[CoverageMask], site: usize) -> Result<&CoverageMask, CoverageError> {
    masks
        .iter()
        .find(|m| m.site_id == site)
        .ok_or(CoverageError::UnknownSite { site })
}

/// Union of the coverage sets of `subset`.
pub fn union_cells(masks: &[CoverageMask], subset: &[usize]) -> Result<CellSet, CoverageError> {
    let (grid, _) = check_masks(masks)?;
    let mut acc = CellSet::new(grid.cell_count());
    for &g in subset {
        acc.union_with(find(masks, g)?.cells());
    }
    Ok(acc)
}

/// Covered area fraction `|∪_{g∈S} C_g| / denominator`. An empty subset
/// gives 0.
pub fn union_fraction(masks: &[CoverageMask], subset: &[usize]) -> Result<f64, CoverageError> {
    let (_, denominator) = check_masks(masks)?;
    Ok(fraction(union_cells(masks, subset)?.count(), denominator))
}

/// Number of covering gateways per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct RedundancyMap {
    grid: GridSpec,
    counts: Vec<u16>,
    denominator: usize,
}

impl RedundancyMap {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }
    pub fn counts(&self) -> &[u16] {
        &self.counts
    }

    /// Fraction of cells covered by at least `k` gateways.
    pub fn fraction_with_at_least(&self, k: u16) -> f64 {
        fraction(
            self.counts.iter().filter(|&&c| c >= k).count(),
            self.denominator,
        )
    }
}

pub fn redundancy_map(masks: &[CoverageMask]) -> Result<RedundancyMap, CoverageError> {
    let (grid, denominator) = check_masks(masks)?;
    let mut counts = vec![0u16; grid.cell_count()];
    for m in masks {
        for n in m.cells.iter() {
            counts[n] += 1;
        }
    }
    Ok(RedundancyMap {
        grid,
        counts,
        denominator,
    })
}

/// Best serving gateway per cell among those meeting the threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct AssociationMap {
    grid: GridSpec,
    best: Vec<Option<usize>>,
    best_snr_db: Vec<f64>,
}

impl AssociationMap {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }
    /// `None` where no gateway meets the threshold.
    pub fn best(&self) -> &[Option<usize>] {
        &self.best
    }
    /// SNR of the best gateway, [`SNR_NONE`] where uncovered.
    pub fn best_snr_db(&self) -> &[f64] {
        &self.best_snr_db
    }
}

fn check_snrs(snrs: &[SnrMap]) -> Result<GridSpec, CoverageError> {
    let first = snrs.first().ok_or(CoverageError::NoMasks)?;
    for (k, s) in snrs.iter().enumerate() {
        if s.grid() != first.grid() {
            return Err(CoverageError::GridMismatch);
        }
        if snrs[..k].iter().any(|o| o.site_id() == s.site_id()) {
            return Err(CoverageError::DuplicateSite { site: s.site_id() });
        }
    }
    Ok(*first.grid())
}

/// Best qualifying gateway at cell `n`: highest SNR `>= gamma_db`, lowest
/// site id on ties.
fn best_at(snrs: &[SnrMap], n: usize, gamma_db: f64) -> (Option<usize>, f64) {
    let mut best: Option<(usize, f64)> = None;
    for s in snrs {
        let v = s.snr_db()[n];
        if v == SNR_NONE || v < gamma_db {
            continue;
        }
        let better = match best {
            None => true,
            Some((id, bv)) => v > bv || (v == bv && s.site_id() < id),
        };
        if better {
            best = Some((s.site_id(), v));
        }
    }
    match best {
        Some((id, v)) => (Some(id), v),
        None => (None, SNR_NONE),
    }
}

pub fn association_map(snrs: &[SnrMap], gamma_db: f64) -> Result<AssociationMap, CoverageError> {
    let grid = check_snrs(snrs)?;
    let (best, best_snr_db) = (0..grid.cell_count())
        .map(|n| best_at(snrs, n, gamma_db))
        .unzip();
    Ok(AssociationMap {
        grid,
        best,
        best_snr_db,
    })
}

/// One row of the coverage-vs-K table. Fractions are in `[0, 1]` and
/// unrounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageRow {
    pub k: usize,
    pub at_least_one: f64,
    pub at_least_two: f64,
}

impl CoverageRow {
    pub fn at_least_one_pct(&self) -> f64 {
        100.0 * self.at_least_one
    }
    pub fn at_least_two_pct(&self) -> f64 {
        100.0 * self.at_least_two
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageTable {
    pub rows: Vec<CoverageRow>,
}

/// Coverage by at least one and at least two gateways when the first `K`
/// gateways of `order` are deployed, for `K = 1..=order.len()`.
pub fn coverage_table(
    masks: &[CoverageMask],
    order: &[usize],
) -> Result<CoverageTable, CoverageError> {
    let (grid, denominator) = check_masks(masks)?;
    let n = grid.cell_count();
    let mut once = CellSet::new(n);
    let mut twice = CellSet::new(n);
    let mut rows = Vec::with_capacity(order.len());
    for (k, &g) in order.iter().enumerate() {
        let m = find(masks, g)?;
        if order[..k].contains(&g) {
            return Err(CoverageError::DuplicateSite { site: g });
        }
        let mut overlap = once.clone();
        overlap.intersect_with(m.cells());
        twice.union_with(&overlap);
        once.union_with(m.cells());
        rows.push(CoverageRow {
            k: k + 1,
            at_least_one: fraction(once.count(), denominator),
            at_least_two: fraction(twice.count(), denominator),
        });
    }
    Ok(CoverageTable { rows })
}

/// Association and SNR at a sensor's cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorReading {
    pub cell: usize,
    pub best: Option<usize>,
    pub snr_db: f64,
}

/// Evaluates each sensor at the grid cell whose center is nearest.
pub fn evaluate_sensors(
    snrs: &[SnrMap],
    sensors: &[Point2],
    gamma_db: f64,
) -> Result<Vec<SensorReading>, CoverageError> {
    let grid = check_snrs(snrs)?;
    sensors
        .iter()
        .map(|&p| {
            let cell = grid.nearest_cell(p)?;
            let (best, snr_db) = best_at(snrs, cell, gamma_db);
            Ok(SensorReading { cell, best, snr_db })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linkbudget::SnrMap;

    fn grid(n: usize) -> GridSpec {
        GridSpec::new(Point2::new(0.0, 0.0), 1.0, 1.0, n, 1, 1.5).unwrap()
    }

    fn mask(site: usize, n: usize, cells: &[usize]) -> CoverageMask {
        CoverageMask::from_cells(
            site,
            grid(n),
            CellSet::from_indices(n, cells.iter().copied()),
        )
        .unwrap()
    }

    #[test]
    fn coverage_mask_edges() {
        let g = grid(4);
        let none = SnrMap::from_values(0, g, vec![SNR_NONE; 4]).unwrap();
        assert_eq!(coverage_mask(&none, -500.0).count(), 0);

        let snr = SnrMap::from_values(0, g, vec![-10.0, SNR_NONE, -400.0, -10.000001]).unwrap();
        let all = coverage_mask(&snr, -500.0);
        assert_eq!(all.cells().iter().collect::<Vec<_>>(), vec![0, 2, 3]);
        let at = coverage_mask(&snr, -10.0);
        assert_eq!(at.cells().iter().collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn union_fraction_examples() {
        let ms = [
            mask(0, 100, &(0..10).collect::<Vec<_>>()),
            mask(1, 100, &(50..60).collect::<Vec<_>>()),
        ];
        assert_eq!(union_fraction(&ms, &[]).unwrap(), 0.0);
        assert!((union_fraction(&ms, &[0, 1]).unwrap() - 0.2).abs() < 1e-15);

        let ms = [mask(0, 10, &[1, 2, 3]), mask(1, 10, &[3, 4])];
        assert!((union_fraction(&ms, &[0, 1]).unwrap() - 0.4).abs() < 1e-15);
        assert_eq!(
            union_fraction(&ms, &[7]),
            Err(CoverageError::UnknownSite { site: 7 })
        );
    }

    #[test]
    fn grid_mismatch_detected() {
        let ms = [mask(0, 10, &[1]), mask(1, 11, &[1])];
        assert_eq!(union_fraction(&ms, &[0]), Err(CoverageError::GridMismatch));
        assert_eq!(redundancy_map(&ms), Err(CoverageError::GridMismatch));
        let dup = [mask(0, 10, &[1]), mask(0, 10, &[2])];
        assert_eq!(
            redundancy_map(&dup),
            Err(CoverageError::DuplicateSite { site: 0 })
        );
    }

    #[test]
    fn redundancy_examples() {
        let r = redundancy_map(&[mask(0, 10, &[1, 2, 3])]).unwrap();
        assert!(r.counts().iter().all(|&c| c <= 1));
        assert_eq!(r.fraction_with_at_least(2), 0.0);

        let r = redundancy_map(&[mask(0, 10, &[1, 2, 3]), mask(1, 10, &[1, 2, 3])]).unwrap();
        assert!((r.fraction_with_at_least(2) - 0.3).abs() < 1e-15);

        // cells 1..4 of a 4-cell grid as indices 0..3
        let r =
            redundancy_map(&[mask(0, 4, &[0, 1]), mask(1, 4, &[1, 2]), mask(2, 4, &[2])]).unwrap();
        assert_eq!(r.counts(), &[1, 2, 2, 0]);
    }

    #[test]
    fn association_rules() {
        let g = grid(3);
        let a = SnrMap::from_values(0, g, vec![-5.0, -12.0, -20.0]).unwrap();
        let b = SnrMap::from_values(1, g, vec![-5.0, -8.0, SNR_NONE]).unwrap();
        let assoc = association_map(&[b.clone(), a.clone()], -10.0).unwrap();
        assert_eq!(assoc.best(), &[Some(0), Some(1), None]);
        assert_eq!(assoc.best_snr_db()[2], SNR_NONE);

        let single = association_map(core::slice::from_ref(&a), -10.0).unwrap();
        assert_eq!(single.best(), &[Some(0), None, None]);

        assert_eq!(
            association_map(&[a.clone(), a], -10.0),
            Err(CoverageError::DuplicateSite { site: 0 })
        );
    }

    #[test]
    fn coverage_table_rows() {
        let ms = [
            mask(0, 10, &[0, 1, 2, 3]),
            mask(1, 10, &[2, 3, 4]),
            mask(2, 10, &[9]),
        ];
        let t = coverage_table(&ms, &[0, 1, 2]).unwrap();
        assert_eq!(t.rows.len(), 3);
        assert_eq!(t.rows[0].at_least_two, 0.0);
        assert!((t.rows[1].at_least_one - 0.5).abs() < 1e-15);
        assert!((t.rows[1].at_least_two - 0.2).abs() < 1e-15);
        assert!((t.rows[2].at_least_one_pct() - 60.0).abs() < 1e-12);
        assert_eq!(
            coverage_table(&ms, &[0, 5]),
            Err(CoverageError::UnknownSite { site: 5 })
        );
        assert!(coverage_table(&ms, &[0, 0]).is_err());
    }

    #[test]
    fn restricted_mask_denominator() {
        let m = mask(0, 10, &[0, 1, 2, 7]);
        let domain = CellSet::from_indices(10, [0, 1, 5, 6, 7]);
        let r = m.restricted_to(&domain);
        assert_eq!(r.count(), 3);
        assert!((union_fraction(core::slice::from_ref(&r), &[0]).unwrap() - 0.6).abs() < 1e-15);
        assert_eq!(
            union_fraction(&[r, m], &[0]),
            Err(CoverageError::GridMismatch)
        );
    }

    #[test]
    fn sensors_snap_to_cells() {
        let g = GridSpec::new(Point2::new(0.0, 0.0), 5.0, 5.0, 3, 2, 1.5).unwrap();
        let a = SnrMap::from_values(0, g, vec![-5.0, -12.0, 0.0, -30.0, 1.0, 2.0]).unwrap();
        let b = SnrMap::from_values(1, g, vec![-6.0, -11.0, 3.0, -40.0, 1.0, 1.0]).unwrap();
        let snrs = [a, b];
        let assoc = association_map(&snrs, -10.0).unwrap();
        let pts = [
            Point2::new(0.0, 0.0),
            Point2::new(4.0, 1.0),
            Point2::new(9.0, 6.0),
            Point2::new(0.4, 5.2),
        ];
        let r = evaluate_sensors(&snrs, &pts, -10.0).unwrap();
        assert_eq!(r[0].best, assoc.best()[0]);
        assert_eq!(r[0].snr_db, -5.0);
        assert_eq!(r[1].cell, 1);
        assert_eq!((r[1].best, r[1].snr_db), (None, SNR_NONE));
        assert_eq!((r[2].cell, r[2].best), (5, Some(0)));
        assert_eq!((r[3].cell, r[3].best), (3, None));
        assert!(evaluate_sensors(&snrs, &[Point2::new(100.0, 0.0)], -10.0).is_err());
    }
}
