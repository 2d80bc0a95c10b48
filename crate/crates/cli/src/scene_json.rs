//! Scene JSON reader.
//!
//! ```json
//! {
//!   "materials": [{"name": "concrete", "penetration_loss_db": 18}],
//!   "buildings": [{"id": 0, "footprint": [[0,0],[10,0],[10,10],[0,10]],
//!                  "height_m": 20, "material": "concrete"}],
//!   "sites": [{"id": 0, "name": "roof-a", "position": [5, 5, 24]}],
//!   "bounds": {"min": [-50, -50], "max": [50, 50]},
//!   "grid": {"origin": [-47.5, -47.5], "dx": 5, "dy": 5, "nx": 20, "ny": 20,
//!            "rx_height_m": 1.5}
//! }
//! ```
//!
//! Lengths are meters. Unknown keys are rejected.

use std::fs;
use std::path::Path;

use lora_place_core::scene::DEFAULT_RX_HEIGHT_M;
use lora_place_core::{
    Bounds, Building, GatewaySite, GridSpec, Material, Point2, Point3, Scene, SceneError,
};
use serde::Deserialize;

use crate::error::{Error, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneDoc {
    #[serde(default)]
    materials: Vec<MaterialDoc>,
    #[serde(default)]
    buildings: Vec<BuildingDoc>,
    sites: Vec<SiteDoc>,
    bounds: BoundsDoc,
    grid: GridDoc,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MaterialDoc {
    name: String,
    penetration_loss_db: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BuildingDoc {
    id: u32,
    footprint: Vec<[f64; 2]>,
    height_m: f64,
    material: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SiteDoc {
    id: usize,
    name: String,
    position: [f64; 3],
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundsDoc {
    min: [f64; 2],
    max: [f64; 2],
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridDoc {
    origin: [f64; 2],
    dx: f64,
    dy: f64,
    nx: usize,
    ny: usize,
    #[serde(default = "default_rx_height")]
    rx_height_m: f64,
}

fn default_rx_height() -> f64 {
    DEFAULT_RX_HEIGHT_M
}

fn pt([x, y]: [f64; 2]) -> Point2 {
    Point2::new(x, y)
}

impl SceneDoc {
    fn build(self) -> Result<Scene, SceneError> {
        let materials = self
            .materials
            .into_iter()
            .map(|m| Material::new(m.name, m.penetration_loss_db))
            .collect::<Result<Vec<_>, _>>()?;
        let buildings = self
            .buildings
            .into_iter()
            .map(|b| {
                Building::new(
                    b.id,
                    b.footprint.into_iter().map(pt).collect(),
                    b.height_m,
                    b.material,
                )
            })
            .collect::<Result<Vec<_>, _>>()?;
        let sites = self
            .sites
            .into_iter()
            .map(|s| GatewaySite {
                id: s.id,
                name: s.name,
                position: Point3::new(s.position[0], s.position[1], s.position[2]),
            })
            .collect();
        let g = self.grid;
        let grid = GridSpec::new(pt(g.origin), g.dx, g.dy, g.nx, g.ny, g.rx_height_m)?;
        Scene::new(
            materials,
            buildings,
            sites,
            Bounds {
                min: pt(self.bounds.min),
                max: pt(self.bounds.max),
            },
            grid,
        )
    }
}

/// Parses and validates scene JSON. `origin` only labels errors.
pub fn parse_scene(text: &str, origin: &Path) -> Result<Scene> {
    let doc: SceneDoc = serde_json::from_str(text).map_err(|source| Error::Json {
        path: origin.to_path_buf(),
        source,
    })?;
    doc.build().map_err(|source| Error::Scene {
        path: origin.to_path_buf(),
        source,
    })
}

pub fn load_scene(path: &Path) -> Result<Scene> {
    let text = fs::read_to_string(path).map_err(Error::io(path))?;
    parse_scene(&text, path)
}
