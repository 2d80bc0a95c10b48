//! The four pipeline commands. Each reads the run config, recomputes what it
//! needs and writes its files into the output directory.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use lora_place_core::{
    association_map, coverage_mask, coverage_table, evaluate_sensors, exhaustive_optimum,
    lazy_greedy_select, redundancy_map, standalone_ranking, CellSet, CoverageMask, CoverageTable,
    GridSpec, PathGainMap, PathGainModel, Point2, Scene, Selection, SnrMap, NO_PATH, SNR_NONE,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{DenominatorMode, LoadedConfig};
use crate::error::{Error, Result};
use crate::gridio::{export_path_gain_map, import_path_gain_map};
use crate::render;
use crate::report;
use crate::scene_json::load_scene;

pub const COVERAGE_TABLE: &str = "coverage_table.csv";
pub const REDUNDANCY_CSV: &str = "redundancy.csv";
pub const REDUNDANCY_PGM: &str = "redundancy.pgm";
pub const ASSOCIATION_CSV: &str = "association.csv";
pub const ASSOCIATION_PPM: &str = "association.ppm";
pub const SNR_BEST_PGM: &str = "snr_best.pgm";
pub const SENSORS_CSV: &str = "sensors.csv";
pub const SELECTION_JSON: &str = "selection.json";
pub const STANDALONE_CSV: &str = "standalone.csv";
pub const ORACLE_JSON: &str = "oracle.json";
pub const SUMMARY_MD: &str = "summary.md";

pub fn gain_file_name(site_id: usize) -> String {
    format!("gain_site{site_id}.pgg")
}

/// Config plus the scene it refers to.
pub struct Run {
    pub loaded: LoadedConfig,
    pub scene: Scene,
}

impl Run {
    pub fn load(loaded: LoadedConfig) -> Result<Self> {
        let scene = load_scene(&loaded.scene_path)?;
        if let Some(&bad) = loaded.imported.keys().find(|&&id| scene.site(id).is_none()) {
            return Err(Error::Config(format!(
                "imported_gain_paths: site {bad} is not in the scene"
            )));
        }
        Ok(Run { loaded, scene })
    }

    fn grid(&self) -> GridSpec {
        self.scene.grid()
    }

    fn out_dir(&self) -> Result<&Path> {
        let dir = &self.loaded.output_dir;
        fs::create_dir_all(dir).map_err(Error::io(dir))?;
        Ok(dir)
    }

    fn out_path(&self, name: &str) -> Result<PathBuf> {
        Ok(self.out_dir()?.join(name))
    }

    fn write(&self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.out_path(name)?;
        fs::write(&path, bytes).map_err(Error::io(path))
    }

    /// Path gain maps for every site, in site-id order. Imported sites are
    /// read from disk, the rest are computed cell by cell in parallel.
    pub fn gain_maps(&self) -> Result<Vec<PathGainMap>> {
        let grid = self.grid();
        let cfg = self.loaded.config.propagation();
        self.scene
            .sites()
            .iter()
            .map(|site| {
                if let Some(path) = self.loaded.imported.get(&site.id) {
                    return import_path_gain_map(path, &grid, site.id);
                }
                let err = |source| Error::Propagation {
                    site: site.id,
                    source,
                };
                let model = PathGainModel::new(&self.scene, site, cfg).map_err(err)?;
                let gains: Vec<f64> = (0..grid.cell_count())
                    .into_par_iter()
                    .map(|n| model.gain_at_cell(&grid, n))
                    .collect();
                PathGainMap::computed(site.id, grid, gains).map_err(err)
            })
            .collect()
    }

    /// SNR maps in site-id order. Cells outside [`Run::domain`] read as
    /// [`SNR_NONE`] so association and sensor outputs agree with the masks.
    pub fn snr_maps(&self, gains: &[PathGainMap]) -> Vec<SnrMap> {
        let budget = self.loaded.config.link_budget();
        let domain = self.domain();
        gains
            .iter()
            .map(|g| {
                let snr = budget.snr_map(g);
                if domain.count() == domain.universe() {
                    return snr;
                }
                let values = snr
                    .snr_db()
                    .iter()
                    .enumerate()
                    .map(|(n, &v)| if domain.contains(n) { v } else { SNR_NONE })
                    .collect();
                SnrMap::from_values(snr.site_id(), *snr.grid(), values).expect("same grid")
            })
            .collect()
    }

    /// Cells that count towards coverage fractions.
    pub fn domain(&self) -> CellSet {
        let grid = self.grid();
        match self.loaded.config.denominator_mode {
            DenominatorMode::AllCells => CellSet::full(grid.cell_count()),
            DenominatorMode::ExcludeBuildingInteriors => CellSet::from_indices(
                grid.cell_count(),
                (0..grid.cell_count()).filter(|&n| {
                    let c = grid.cell_center(n).expect("cell in grid");
                    !self.scene.is_inside_building(c.xy())
                }),
            ),
        }
    }

    pub fn masks(&self, snrs: &[SnrMap]) -> Vec<CoverageMask> {
        let gamma = self.loaded.config.gamma_db();
        let domain = self.domain();
        snrs.iter()
            .map(|s| coverage_mask(s, gamma).restricted_to(&domain))
            .collect()
    }

    pub fn select(&self, masks: &[CoverageMask]) -> Result<Selection> {
        Ok(lazy_greedy_select(masks, self.loaded.config.budget_k)?)
    }

    fn site_name(&self, id: usize) -> &str {
        self.scene.site(id).map_or("", |s| s.name.as_str())
    }
}

fn console(out: &mut dyn Write, line: &str) -> Result<()> {
    writeln!(out, "{line}").map_err(Error::io("<stdout>"))
}

fn csv_bytes<I, R>(path: &str, header: &[&str], rows: I) -> Result<Vec<u8>>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let wrap = |source| Error::Csv {
        path: path.into(),
        source,
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(wrap)?;
    for r in rows {
        w.write_record(r).map_err(wrap)?;
    }
    w.into_inner().map_err(|e| Error::io(path)(e.into_error()))
}

/// Writes `gain_site<id>.pgg` for every site and prints gain statistics.
pub fn cmd_pathgain(loaded: LoadedConfig, out: &mut dyn Write) -> Result<()> {
    let run = Run::load(loaded)?;
    for map in run.gain_maps()? {
        let path = run.out_path(&gain_file_name(map.site_id()))?;
        export_path_gain_map(&map, &path)?;
        let reachable: Vec<f64> = map
            .gains_db()
            .iter()
            .copied()
            .filter(|&g| g != NO_PATH)
            .collect();
        let line = if reachable.is_empty() {
            format!("site {}: no reachable cells", map.site_id())
        } else {
            let min = reachable.iter().copied().fold(f64::INFINITY, f64::min);
            let max = reachable.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mean = reachable.iter().sum::<f64>() / reachable.len() as f64;
            format!(
                "site {}: gain min {min:.2} dB, mean {mean:.2} dB, max {max:.2} dB, no-path cells {}",
                map.site_id(),
                map.gains_db().len() - reachable.len()
            )
        };
        console(out, &line)?;
    }
    Ok(())
}

fn cell_fields(grid: &GridSpec, n: usize) -> [String; 5] {
    let (i, j) = grid.coords(n).expect("cell in grid");
    let c = grid.cell_center(n).expect("cell in grid");
    [
        n.to_string(),
        i.to_string(),
        j.to_string(),
        c.x.to_string(),
        c.y.to_string(),
    ]
}

fn opt_f64(v: f64) -> String {
    if v.is_finite() {
        v.to_string()
    } else {
        String::new()
    }
}

pub fn coverage_table_csv(table: &CoverageTable) -> Result<Vec<u8>> {
    csv_bytes(
        COVERAGE_TABLE,
        &report::COVERAGE_HEADER,
        table.rows.iter().map(|r| {
            [
                r.k.to_string(),
                format!("{:.2}", r.at_least_one_pct()),
                format!("{:.2}", r.at_least_two_pct()),
            ]
        }),
    )
}

/// Writes the coverage-vs-K table for the greedy order plus redundancy,
/// association and best-SNR rasters over the selected gateways.
pub fn cmd_coverage(loaded: LoadedConfig, out: &mut dyn Write) -> Result<()> {
    let run = Run::load(loaded)?;
    let gamma = run.loaded.config.gamma_db();
    let grid = run.grid();
    let snrs = run.snr_maps(&run.gain_maps()?);
    let masks = run.masks(&snrs);
    let selection = run.select(&masks)?;

    let table = coverage_table(&masks, &selection.order)?;
    run.write(COVERAGE_TABLE, &coverage_table_csv(&table)?)?;
    for r in &table.rows {
        console(
            out,
            &format!(
                "K={}: >=1 GW {:.2}%, >=2 GW {:.2}%",
                r.k,
                r.at_least_one_pct(),
                r.at_least_two_pct()
            ),
        )?;
    }

    let selected_masks: Vec<CoverageMask> =
        selection.order.iter().map(|&g| masks[g].clone()).collect();
    let selected_snrs: Vec<SnrMap> = selection.order.iter().map(|&g| snrs[g].clone()).collect();
    let label = format!("gateways {:?}, threshold {gamma} dB", selection.order);

    let redundancy = redundancy_map(&selected_masks)?;
    run.write(
        REDUNDANCY_CSV,
        &csv_bytes(
            REDUNDANCY_CSV,
            &["cell", "i", "j", "x", "y", "count"],
            redundancy.counts().iter().enumerate().map(|(n, c)| {
                let [a, b, c2, d, e] = cell_fields(&grid, n);
                [a, b, c2, d, e, c.to_string()]
            }),
        )?,
    )?;
    run.write(
        REDUNDANCY_PGM,
        &render::redundancy_pgm(
            &redundancy,
            &format!("lora-place redundancy (covering gateway count), {label}"),
        ),
    )?;

    let association = association_map(&selected_snrs, gamma)?;
    run.write(
        ASSOCIATION_CSV,
        &csv_bytes(
            ASSOCIATION_CSV,
            &["cell", "i", "j", "x", "y", "site_id", "snr_db"],
            association
                .best()
                .iter()
                .zip(association.best_snr_db())
                .enumerate()
                .map(|(n, (b, s))| {
                    let [a, b2, c, d, e] = cell_fields(&grid, n);
                    [
                        a,
                        b2,
                        c,
                        d,
                        e,
                        b.map_or(String::new(), |id| id.to_string()),
                        opt_f64(*s),
                    ]
                }),
        )?,
    )?;
    run.write(
        ASSOCIATION_PPM,
        &render::association_ppm(
            &association,
            &format!("lora-place association (palette by site id mod 16, grey uncovered), {label}"),
        ),
    )?;

    let best_any = association_map(&selected_snrs, f64::NEG_INFINITY)?;
    run.write(
        SNR_BEST_PGM,
        &render::snr_pgm(
            &grid,
            best_any.best_snr_db(),
            &format!(
                "lora-place best SNR, -40..40 dB to 0..255, gateways {:?}",
                selection.order
            ),
        ),
    )?;

    let sensors = &run.loaded.config.sensors;
    if !sensors.is_empty() {
        let points: Vec<Point2> = sensors.iter().map(|s| s.point()).collect();
        let readings = evaluate_sensors(&selected_snrs, &points, gamma)?;
        let covered = readings.iter().filter(|r| r.best.is_some()).count();
        run.write(
            SENSORS_CSV,
            &csv_bytes(
                SENSORS_CSV,
                &["name", "x", "y", "cell", "site_id", "snr_db"],
                sensors.iter().zip(&readings).map(|(s, r)| {
                    [
                        s.name.clone(),
                        s.position[0].to_string(),
                        s.position[1].to_string(),
                        r.cell.to_string(),
                        r.best.map_or(String::new(), |id| id.to_string()),
                        opt_f64(r.snr_db),
                    ]
                }),
            )?,
        )?;
        console(
            out,
            &format!("sensors: {covered} of {} covered", sensors.len()),
        )?;
    }
    Ok(())
}

/// Contents of `selection.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectionDoc {
    pub order: Vec<usize>,
    pub marginal_cells: Vec<usize>,
    pub fractions: Vec<f64>,
    pub budget: usize,
}

impl From<&Selection> for SelectionDoc {
    fn from(s: &Selection) -> Self {
        SelectionDoc {
            order: s.order.clone(),
            marginal_cells: s.marginal_cells.clone(),
            fractions: s.fractions.clone(),
            budget: s.budget,
        }
    }
}

/// Contents of `oracle.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleDoc {
    pub budget: usize,
    pub greedy_cells: usize,
    pub optimal_cells: usize,
    pub optimal_subset: Vec<usize>,
    /// `greedy_cells / optimal_cells`, or 1 when both are zero.
    pub ratio: f64,
}

fn json_bytes<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s.into_bytes()
}

/// Writes the greedy selection and the standalone ranking; with `oracle`
/// also compares against the exhaustive optimum.
pub fn cmd_place(loaded: LoadedConfig, oracle: bool, out: &mut dyn Write) -> Result<()> {
    let run = Run::load(loaded)?;
    let snrs = run.snr_maps(&run.gain_maps()?);
    let masks = run.masks(&snrs);
    let selection = run.select(&masks)?;
    run.write(SELECTION_JSON, &json_bytes(&SelectionDoc::from(&selection)))?;

    let ranking = standalone_ranking(&masks)?;
    run.write(
        STANDALONE_CSV,
        &csv_bytes(
            STANDALONE_CSV,
            &report::STANDALONE_HEADER,
            ranking.iter().enumerate().map(|(k, &(id, f))| {
                [
                    (k + 1).to_string(),
                    id.to_string(),
                    run.site_name(id).to_string(),
                    format!("{:.2}", 100.0 * f),
                    masks[id].count().to_string(),
                ]
            }),
        )?,
    )?;

    let mut line = String::from("greedy order:");
    for (g, m) in selection.order.iter().zip(&selection.marginal_cells) {
        let _ = write!(line, " {g} (+{m})");
    }
    console(out, &line)?;

    if oracle {
        let opt = exhaustive_optimum(&masks, run.loaded.config.budget_k)?;
        let greedy = selection.covered_cells();
        let ratio = if opt.cells == 0 {
            1.0
        } else {
            greedy as f64 / opt.cells as f64
        };
        run.write(
            ORACLE_JSON,
            &json_bytes(&OracleDoc {
                budget: run.loaded.config.budget_k,
                greedy_cells: greedy,
                optimal_cells: opt.cells,
                optimal_subset: opt.subset,
                ratio,
            }),
        )?;
        console(
            out,
            &format!("greedy/optimal: {greedy}/{} = {ratio:.4}", opt.cells),
        )?;
    }
    Ok(())
}

/// Writes `summary.md` from the files left by the other commands.
pub fn cmd_report(loaded: LoadedConfig, out: &mut dyn Write) -> Result<()> {
    let dir = loaded.output_dir.clone();
    let summary = report::build_summary(&loaded.config, &dir)?;
    fs::create_dir_all(&dir).map_err(Error::io(&dir))?;
    let path = dir.join(SUMMARY_MD);
    fs::write(&path, summary).map_err(Error::io(&path))?;
    console(out, &format!("wrote {}", path.display()))
}
