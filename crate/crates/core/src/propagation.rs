//! Per-gateway path-gain maps.
//!
//! The built-in model is a direct-path estimate: free-space gain over the 3D
//! distance, minus the penetration loss of every wall the link crosses, minus
//! (optionally) the single knife-edge loss of the most obstructing roof edge
//! in the vertical plane of the link. Maps produced elsewhere (for example by
//! a ray tracer) enter through [`PathGainMap::imported`].

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use crate::scene::{GatewaySite, GridSpec, Point3, Scene};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Marker for cells with no usable propagation path, in dB.
pub const NO_PATH: f64 = -1000.0;

/// Excess loss beyond which a cell is reported as [`NO_PATH`].
pub const MAX_EXCESS_LOSS_DB: f64 = 500.0;

/// Knife-edge parameter at or below which diffraction loss is zero.
pub const KNIFE_EDGE_CLEARANCE_NU: f64 = -0.78;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PropagationError {
    InvalidDistance,
    InvalidFrequency,
    InvalidMinDistance,
    SiteNotInScene { site: usize },
    LengthMismatch { expected: usize, got: usize },
    NonFiniteGain { cell: usize },
}

impl fmt::Display for PropagationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PropagationError::InvalidDistance => f.write_str("distance must be finite and > 0"),
            PropagationError::InvalidFrequency => {
                f.write_str("carrier frequency must be finite and > 0")
            }
            PropagationError::InvalidMinDistance => {
                f.write_str("min_distance_m must be finite and >= 0.1")
            }
            PropagationError::SiteNotInScene { site } => {
                write!(f, "site {site} is not part of the scene")
            }
            PropagationError::LengthMismatch { expected, got } => {
                write!(f, "gain array has {got} cells, grid has {expected}")
            }
            PropagationError::NonFiniteGain { cell } => write!(f, "non-finite gain at cell {cell}"),
        }
    }
}

impl core::error::Error for PropagationError {}

/// Free-space path gain in dB (the negative of FSPL).
pub fn free_space_path_gain(distance_m: f64, carrier_hz: f64) -> Result<f64, PropagationError> {
    if !(distance_m.is_finite() && distance_m > 0.0) {
        return Err(PropagationError::InvalidDistance);
    }
    if !(carrier_hz.is_finite() && carrier_hz > 0.0) {
        return Err(PropagationError::InvalidFrequency);
    }
    Ok(fspl_gain(distance_m, carrier_hz))
}

fn fspl_gain(distance_m: f64, carrier_hz: f64) -> f64 {
    -(20.0 * libm::log10(distance_m)
        + 20.0 * libm::log10(carrier_hz)
        + 20.0 * libm::log10(4.0 * PI / SPEED_OF_LIGHT))
}

/// Single knife-edge diffraction loss in dB for Fresnel parameter `nu`.
pub fn knife_edge_loss(nu: f64) -> f64 {
    if nu <= KNIFE_EDGE_CLEARANCE_NU {
        return 0.0;
    }
    let v = nu - 0.1;
    6.9 + 20.0 * libm::log10(libm::sqrt(v * v + 1.0) + v)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationConfig {
    pub carrier_hz: f64,
    pub knife_edge_enabled: bool,
    /// Distances below this are clamped before the free-space term.
    pub min_distance_m: f64,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        PropagationConfig {
            carrier_hz: 1.0e9,
            knife_edge_enabled: false,
            min_distance_m: 1.0,
        }
    }
}

impl PropagationConfig {
    pub fn validate(&self) -> Result<(), PropagationError> {
        if !(self.carrier_hz.is_finite() && self.carrier_hz > 0.0) {
            return Err(PropagationError::InvalidFrequency);
        }
        if !(self.min_distance_m.is_finite() && self.min_distance_m >= 0.1) {
            return Err(PropagationError::InvalidMinDistance);
        }
        Ok(())
    }

    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Computed,
    Imported,
}

/// Large-scale path gain from one site to every grid cell, in dB.
#[derive(Debug, Clone, PartialEq)]
pub struct PathGainMap {
    site_id: usize,
    grid: GridSpec,
    gains_db: Vec<f64>,
    provenance: Provenance,
}

impl PathGainMap {
    /// Wraps gains produced by the built-in model. Every entry must be
    /// finite (use [`NO_PATH`] for unreachable cells).
    pub fn computed(
        site_id: usize,
        grid: GridSpec,
        gains_db: Vec<f64>,
    ) -> Result<Self, PropagationError> {
        if gains_db.len() != grid.cell_count() {
            return Err(PropagationError::LengthMismatch {
                expected: grid.cell_count(),
                got: gains_db.len(),
            });
        }
        if let Some(cell) = gains_db.iter().position(|g| !g.is_finite()) {
            return Err(PropagationError::NonFiniteGain { cell });
        }
        Ok(PathGainMap {
            site_id,
            grid,
            gains_db,
            provenance: Provenance::Computed,
        })
    }

    /// Wraps externally produced gains; NaN and infinite entries become
    /// [`NO_PATH`].
    pub fn imported(
        site_id: usize,
        grid: GridSpec,
        mut gains_db: Vec<f64>,
    ) -> Result<Self, PropagationError> {
        if gains_db.len() != grid.cell_count() {
            return Err(PropagationError::LengthMismatch {
                expected: grid.cell_count(),
                got: gains_db.len(),
            });
        }
        for g in &mut gains_db {
            if !g.is_finite() {
                *g = NO_PATH;
            }
        }
        Ok(PathGainMap {
            site_id,
            grid,
            gains_db,
            provenance: Provenance::Imported,
        })
    }

    pub fn site_id(&self) -> usize {
        self.site_id
    }
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }
    pub fn gains_db(&self) -> &[f64] {
        &self.gains_db
    }
    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn is_no_path(&self, n: usize) -> bool {
        self.gains_db[n] == NO_PATH
    }
}

/// Per-cell evaluator of the built-in model for one site. Cells are
/// independent, so callers may evaluate them in any order or in parallel and
/// still get bitwise-identical results.
#[derive(Debug, Clone, Copy)]
pub struct PathGainModel<'a> {
    scene: &'a Scene,
    site: &'a GatewaySite,
    cfg: PropagationConfig,
    wavelength_m: f64,
}

impl<'a> PathGainModel<'a> {
    pub fn new(
        scene: &'a Scene,
        site: &'a GatewaySite,
        cfg: PropagationConfig,
    ) -> Result<Self, PropagationError> {
        cfg.validate()?;
        match scene.site(site.id) {
            Some(s) if s == site => {}
            _ => return Err(PropagationError::SiteNotInScene { site: site.id }),
        }
        Ok(PathGainModel {
            scene,
            site,
            cfg,
            wavelength_m: cfg.wavelength_m(),
        })
    }

    /// Path gain from the site to receiver point `rx`.
    pub fn gain_at(&self, rx: Point3) -> f64 {
        let tx = self.site.position;
        let d = tx.distance(rx);
        let free = fspl_gain(d.max(self.cfg.min_distance_m), self.cfg.carrier_hz);
        if d <= crate::scene::GEOM_EPS {
            return free;
        }
        let mut excess = 0.0;
        if let Ok(crossings) = self.scene.wall_crossings(tx, rx) {
            for c in &crossings {
                excess += self.scene.materials()[c.material].penetration_loss_db;
            }
        }
        if self.cfg.knife_edge_enabled {
            if let Some(nu) = self.worst_edge_nu(tx, rx, d) {
                excess += knife_edge_loss(nu);
            }
        }
        if excess > MAX_EXCESS_LOSS_DB {
            NO_PATH
        } else {
            free - excess
        }
    }

    /// Largest Fresnel parameter over all roof edges met by the link's
    /// vertical plane.
    fn worst_edge_nu(&self, tx: Point3, rx: Point3, d: f64) -> Option<f64> {
        let mut worst: Option<f64> = None;
        for b in self.scene.buildings() {
            for t in b.transitions(tx.xy(), rx.xy()) {
                let d1 = t * d;
                let d2 = (1.0 - t) * d;
                if d1 <= crate::scene::GEOM_EPS || d2 <= crate::scene::GEOM_EPS {
                    continue;
                }
                let h = b.height_m() - (tx.z + t * (rx.z - tx.z));
                let nu = h * libm::sqrt(2.0 / self.wavelength_m * (1.0 / d1 + 1.0 / d2));
                worst = Some(match worst {
                    Some(w) if w >= nu => w,
                    _ => nu,
                });
            }
        }
        worst
    }

    /// Path gain at grid cell `n`.
    pub fn gain_at_cell(&self, grid: &GridSpec, n: usize) -> f64 {
        let rx = grid.cell_center(n).expect("cell index within grid");
        self.gain_at(rx)
    }
}

/// Evaluates the built-in model over every cell of `grid`.
pub fn compute_path_gain_map(
    scene: &Scene,
    site: &GatewaySite,
    grid: &GridSpec,
    cfg: &PropagationConfig,
) -> Result<PathGainMap, PropagationError> {
    let model = PathGainModel::new(scene, site, *cfg)?;
    let gains = (0..grid.cell_count())
        .map(|n| model.gain_at_cell(grid, n))
        .collect();
    PathGainMap::computed(site.id, *grid, gains)
}
