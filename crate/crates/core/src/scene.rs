//! 2.5D city model: materials, extruded building footprints, candidate
//! gateway sites and the receiver grid, plus the wall-crossing kernel used by
//! the propagation model.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Geometric tolerance in meters for intersection and on-boundary tests.
pub const GEOM_EPS: f64 = 1e-9;

/// Default receiver height above ground for grid cells.
pub const DEFAULT_RX_HEIGHT_M: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }

    fn cross(self, o: Point2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    fn dot(self, o: Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    fn norm(self) -> f64 {
        libm::sqrt(self.dot(self))
    }

    fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    pub fn xy(self) -> Point2 {
        Point2::new(self.x, self.y)
    }

    pub fn distance(self, o: Point3) -> f64 {
        let (dx, dy, dz) = (self.x - o.x, self.y - o.y, self.z - o.z);
        libm::sqrt(dx * dx + dy * dy + dz * dz)
    }

    fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// Radio material with a scalar loss applied once per wall crossing.
#[derive(Debug, Clone, PartialEq)]
pub struct Material {
    pub name: String,
    pub penetration_loss_db: f64,
}

impl Material {
    pub fn new(name: impl Into<String>, penetration_loss_db: f64) -> Result<Self, SceneError> {
        let name = name.into();
        if !penetration_loss_db.is_finite() || penetration_loss_db < 0.0 {
            return Err(SceneError::InvalidMaterialLoss { material: name });
        }
        Ok(Material {
            name,
            penetration_loss_db,
        })
    }
}

/// Extruded footprint. Construct through [`Building::new`]; the material
/// reference is resolved when the building is added to a [`Scene`].
#[derive(Debug, Clone, PartialEq)]
pub struct Building {
    id: u32,
    footprint: Vec<Point2>,
    height_m: f64,
    material: String,
    material_index: usize,
    min: Point2,
    max: Point2,
}

/// Why a footprint polygon was rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FootprintDefect {
    TooFewVertices,
    NonFinite,
    RepeatedVertex,
    SelfIntersecting,
    NonPositiveArea,
}

impl fmt::Display for FootprintDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FootprintDefect::TooFewVertices => "footprint has fewer than 3 vertices",
            FootprintDefect::NonFinite => "footprint has non-finite coordinates",
            FootprintDefect::RepeatedVertex => "footprint has repeated consecutive vertices",
            FootprintDefect::SelfIntersecting => "self-intersecting footprint",
            FootprintDefect::NonPositiveArea => {
                "footprint area is not strictly positive (vertices must be counter-clockwise)"
            }
        })
    }
}

impl Building {
    pub fn new(
        id: u32,
        footprint: Vec<Point2>,
        height_m: f64,
        material: impl Into<String>,
    ) -> Result<Self, SceneError> {
        let mut footprint = footprint;
        if footprint.len() > 3 && footprint.first() == footprint.last() {
            footprint.pop();
        }
        validate_footprint(&footprint).map_err(|defect| SceneError::Footprint {
            building: id,
            defect,
        })?;
        if !height_m.is_finite() || height_m <= 0.0 {
            return Err(SceneError::InvalidHeight { building: id });
        }
        let mut min = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &footprint {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        Ok(Building {
            id,
            footprint,
            height_m,
            material: material.into(),
            material_index: usize::MAX,
            min,
            max,
        })
    }

    pub fn id(&self) -> u32 {
        self.id
    }

    pub fn footprint(&self) -> &[Point2] {
        &self.footprint
    }

    pub fn height_m(&self) -> f64 {
        self.height_m
    }

    pub fn material_name(&self) -> &str {
        &self.material
    }

    /// Footprint area in m² (positive for valid buildings).
    pub fn area(&self) -> f64 {
        signed_area(&self.footprint)
    }

    /// Strictly inside the footprint; points within [`GEOM_EPS`] of a wall
    /// are not inside.
    pub fn contains_xy(&self, p: Point2) -> bool {
        if p.x < self.min.x || p.x > self.max.x || p.y < self.min.y || p.y > self.max.y {
            return false;
        }
        point_strictly_inside(&self.footprint, p)
    }

    fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.footprint.len();
        (0..n).map(move |k| (self.footprint[k], self.footprint[(k + 1) % n]))
    }

    /// Parameters `t` in (0, 1) along the horizontal projection of `a → b`
    /// where the segment passes from outside to inside the footprint or back.
    pub(crate) fn transitions(&self, a: Point2, b: Point2) -> Vec<f64> {
        let r = b.sub(a);
        let len = r.norm();
        if len <= GEOM_EPS {
            return Vec::new();
        }
        // bounding-box rejection
        if a.x.max(b.x) < self.min.x - GEOM_EPS
            || a.x.min(b.x) > self.max.x + GEOM_EPS
            || a.y.max(b.y) < self.min.y - GEOM_EPS
            || a.y.min(b.y) > self.max.y + GEOM_EPS
        {
            return Vec::new();
        }
        let t_eps = GEOM_EPS / len;
        let mut ts: Vec<f64> = Vec::new();
        for (p, q) in self.edges() {
            let s = q.sub(p);
            let s_len = s.norm();
            let ap = p.sub(a);
            let denom = r.cross(s);
            if libm::fabs(denom) > 1e-12 * len * s_len {
                let t = ap.cross(s) / denom;
                let u = ap.cross(r) / denom;
                let u_eps = GEOM_EPS / s_len;
                if t >= -t_eps && t <= 1.0 + t_eps && u >= -u_eps && u <= 1.0 + u_eps {
                    ts.push(t.clamp(0.0, 1.0));
                }
            } else if libm::fabs(ap.cross(r)) / len <= GEOM_EPS {
                // collinear: the overlap endpoints are the breakpoints
                for v in [p, q] {
                    let t = v.sub(a).dot(r) / (len * len);
                    if (-t_eps..=1.0 + t_eps).contains(&t) {
                        ts.push(t.clamp(0.0, 1.0));
                    }
                }
            }
        }
        if ts.is_empty() {
            return ts;
        }
        ts.push(0.0);
        ts.push(1.0);
        ts.sort_by(f64::total_cmp);
        ts.dedup_by(|x, y| *x - *y <= t_eps);
        // `dedup_by` keeps the first of a run; make sure the final breakpoint is 1
        if let Some(last) = ts.last_mut() {
            *last = 1.0;
        }

        // inside/outside state of each sub-interval, tested at its midpoint
        let at = |t: f64| Point2::new(a.x + t * r.x, a.y + t * r.y);
        let inside: Vec<bool> = ts
            .windows(2)
            .map(|w| self.contains_xy(at(0.5 * (w[0] + w[1]))))
            .collect();
        inside
            .windows(2)
            .enumerate()
            .filter(|(_, w)| w[0] != w[1])
            .map(|(k, _)| ts[k + 1])
            .collect()
    }
}

fn signed_area(poly: &[Point2]) -> f64 {
    let n = poly.len();
    let mut acc = 0.0;
    for k in 0..n {
        acc += poly[k].cross(poly[(k + 1) % n]);
    }
    0.5 * acc
}

fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    b.sub(a).cross(c.sub(a))
}

fn on_segment(a: Point2, b: Point2, p: Point2) -> bool {
    p.x >= a.x.min(b.x) - GEOM_EPS
        && p.x <= a.x.max(b.x) + GEOM_EPS
        && p.y >= a.y.min(b.y) - GEOM_EPS
        && p.y <= a.y.max(b.y) + GEOM_EPS
}

/// Closed-segment intersection test (touching counts).
fn segments_touch(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    let tol = |u: Point2, v: Point2| GEOM_EPS * u.sub(v).norm();
    let (tcd, tab) = (tol(c, d), tol(a, b));
    if ((d1 > tcd && d2 < -tcd) || (d1 < -tcd && d2 > tcd))
        && ((d3 > tab && d4 < -tab) || (d3 < -tab && d4 > tab))
    {
        return true;
    }
    (libm::fabs(d1) <= tcd && on_segment(c, d, a))
        || (libm::fabs(d2) <= tcd && on_segment(c, d, b))
        || (libm::fabs(d3) <= tab && on_segment(a, b, c))
        || (libm::fabs(d4) <= tab && on_segment(a, b, d))
}

fn validate_footprint(poly: &[Point2]) -> Result<(), FootprintDefect> {
    let n = poly.len();
    if n < 3 {
        return Err(FootprintDefect::TooFewVertices);
    }
    if !poly.iter().all(|p| p.is_finite()) {
        return Err(FootprintDefect::NonFinite);
    }
    for k in 0..n {
        if poly[k].sub(poly[(k + 1) % n]).norm() <= GEOM_EPS {
            return Err(FootprintDefect::RepeatedVertex);
        }
    }
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        for j in (i + 1)..n {
            let (c, d) = (poly[j], poly[(j + 1) % n]);
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                // adjacent edges share one vertex; they must not fold back onto each other
                let shared = if j == i + 1 { b } else { a };
                let other_a = if j == i + 1 { a } else { b };
                let other_c = if j == i + 1 { d } else { c };
                let u = other_a.sub(shared);
                let v = other_c.sub(shared);
                if libm::fabs(u.cross(v)) <= GEOM_EPS * u.norm() * v.norm() && u.dot(v) > 0.0 {
                    return Err(FootprintDefect::SelfIntersecting);
                }
            } else if segments_touch(a, b, c, d) {
                return Err(FootprintDefect::SelfIntersecting);
            }
        }
    }
    if signed_area(poly) <= 0.0 {
        return Err(FootprintDefect::NonPositiveArea);
    }
    Ok(())
}

fn distance_to_segment(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b.sub(a);
    let l2 = ab.dot(ab);
    let t = if l2 > 0.0 {
        (p.sub(a).dot(ab) / l2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    p.sub(Point2::new(a.x + t * ab.x, a.y + t * ab.y)).norm()
}

fn point_strictly_inside(poly: &[Point2], p: Point2) -> bool {
    let n = poly.len();
    let mut inside = false;
    for k in 0..n {
        let (a, b) = (poly[k], poly[(k + 1) % n]);
        if distance_to_segment(p, a, b) <= GEOM_EPS {
            return false;
        }
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Candidate rooftop gateway.
#[derive(Debug, Clone, PartialEq)]
pub struct GatewaySite {
    pub id: usize,
    pub name: String,
    pub position: Point3,
}

/// Regular receiver grid. Cell `n` maps to `(i, j)` with `n = j * nx + i`;
/// `origin` is the center of cell `(0, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    origin: Point2,
    dx: f64,
    dy: f64,
    nx: usize,
    ny: usize,
    rx_height_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridError {
    InvalidSpacing,
    EmptyGrid,
    InvalidOrigin,
    InvalidRxHeight,
    IndexOutOfRange { index: usize, cells: usize },
    OutsideGrid { x: f64, y: f64 },
}

impl fmt::Display for GridError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridError::InvalidSpacing => f.write_str("grid: dx and dy must be finite and > 0"),
            GridError::EmptyGrid => f.write_str("grid: nx and ny must be >= 1"),
            GridError::InvalidOrigin => f.write_str("grid: origin must be finite"),
            GridError::InvalidRxHeight => f.write_str("grid: rx_height_m must be finite and >= 0"),
            GridError::IndexOutOfRange { index, cells } => {
                write!(
                    f,
                    "cell index {index} out of range (grid has {cells} cells)"
                )
            }
            GridError::OutsideGrid { x, y } => write!(f, "point ({x}, {y}) lies outside the grid"),
        }
    }
}

impl core::error::Error for GridError {}

impl GridSpec {
    pub fn new(
        origin: Point2,
        dx: f64,
        dy: f64,
        nx: usize,
        ny: usize,
        rx_height_m: f64,
    ) -> Result<Self, GridError> {
        if !(dx.is_finite() && dy.is_finite() && dx > 0.0 && dy > 0.0) {
            return Err(GridError::InvalidSpacing);
        }
        if nx == 0 || ny == 0 || nx.checked_mul(ny).is_none() {
            return Err(GridError::EmptyGrid);
        }
        if !origin.is_finite() {
            return Err(GridError::InvalidOrigin);
        }
        if !(rx_height_m.is_finite() && rx_height_m >= 0.0) {
            return Err(GridError::InvalidRxHeight);
        }
        Ok(GridSpec {
            origin,
            dx,
            dy,
            nx,
            ny,
            rx_height_m,
        })
    }

    pub fn origin(&self) -> Point2 {
        self.origin
    }
    pub fn dx(&self) -> f64 {
        self.dx
    }
    pub fn dy(&self) -> f64 {
        self.dy
    }
    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn rx_height_m(&self) -> f64 {
        self.rx_height_m
    }

    /// Total cell count `N = nx * ny`.
    pub fn cell_count(&self) -> usize {
        self.nx * self.ny
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.nx && j < self.ny);
        j * self.nx + i
    }

    /// `(i, j)` of cell `n`.
    pub fn coords(&self, n: usize) -> Result<(usize, usize), GridError> {
        if n >= self.cell_count() {
            return Err(GridError::IndexOutOfRange {
                index: n,
                cells: self.cell_count(),
            });
        }
        Ok((n % self.nx, n / self.nx))
    }

    /// Center of cell `n` at receiver height.
    pub fn cell_center(&self, n: usize) -> Result<Point3, GridError> {
        let (i, j) = self.coords(n)?;
        Ok(Point3::new(
            self.origin.x + i as f64 * self.dx,
            self.origin.y + j as f64 * self.dy,
            self.rx_height_m,
        ))
    }

    /// Cell whose center is nearest to `p`, or an error when `p` falls
    /// outside the grid's cell extents.
    pub fn nearest_cell(&self, p: Point2) -> Result<usize, GridError> {
        let fi = libm::round((p.x - self.origin.x) / self.dx);
        let fj = libm::round((p.y - self.origin.y) / self.dy);
        if !(fi >= 0.0 && fj >= 0.0 && fi < self.nx as f64 && fj < self.ny as f64) {
            return Err(GridError::OutsideGrid { x: p.x, y: p.y });
        }
        Ok(self.index(fi as usize, fj as usize))
    }
}

/// Axis-aligned scene extent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub min: Point2,
    pub max: Point2,
}

impl Bounds {
    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SceneError {
    DuplicateMaterial {
        material: String,
    },
    InvalidMaterialLoss {
        material: String,
    },
    DuplicateBuilding {
        building: u32,
    },
    Footprint {
        building: u32,
        defect: FootprintDefect,
    },
    InvalidHeight {
        building: u32,
    },
    UnresolvedMaterial {
        building: u32,
        material: String,
    },
    BuildingOutOfBounds {
        building: u32,
    },
    SiteIds,
    InvalidSitePosition {
        site: usize,
    },
    SiteOutOfBounds {
        site: usize,
    },
    InvalidBounds,
    Grid(GridError),
    DegenerateSegment,
}

impl fmt::Display for SceneError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SceneError::DuplicateMaterial { material } => {
                write!(f, "material {material:?} defined more than once")
            }
            SceneError::InvalidMaterialLoss { material } => write!(
                f,
                "material {material:?}: penetration_loss_db must be finite and >= 0"
            ),
            SceneError::DuplicateBuilding { building } => {
                write!(f, "building {building}: duplicate id")
            }
            SceneError::Footprint { building, defect } => {
                write!(f, "building {building}: {defect}")
            }
            SceneError::InvalidHeight { building } => {
                write!(f, "building {building}: height_m must be finite and > 0")
            }
            SceneError::UnresolvedMaterial { building, material } => {
                write!(f, "building {building}: unresolved material {material:?}")
            }
            SceneError::BuildingOutOfBounds { building } => {
                write!(f, "building {building}: footprint outside scene bounds")
            }
            SceneError::SiteIds => f.write_str("site ids must be exactly 0..G-1 with no gaps"),
            SceneError::InvalidSitePosition { site } => {
                write!(f, "site {site}: position must be finite with z > 0")
            }
            SceneError::SiteOutOfBounds { site } => write!(f, "site {site}: outside scene bounds"),
            SceneError::InvalidBounds => f.write_str("bounds: min must be finite and below max"),
            SceneError::Grid(e) => e.fmt(f),
            SceneError::DegenerateSegment => f.write_str("degenerate segment (p0 = p1)"),
        }
    }
}

impl core::error::Error for SceneError {}

impl From<GridError> for SceneError {
    fn from(e: GridError) -> Self {
        SceneError::Grid(e)
    }
}

/// One wall hit along a segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WallCrossing {
    pub building_id: u32,
    /// Index into [`Scene::materials`].
    pub material: usize,
    /// Position along the segment, in `(0, 1)`.
    pub t: f64,
    /// Height of the segment at the wall.
    pub z: f64,
}

/// Validated city model. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    materials: Vec<Material>,
    buildings: Vec<Building>,
    sites: Vec<GatewaySite>,
    bounds: Bounds,
    grid: GridSpec,
}

impl Scene {
    pub fn new(
        materials: Vec<Material>,
        buildings: Vec<Building>,
        sites: Vec<GatewaySite>,
        bounds: Bounds,
        grid: GridSpec,
    ) -> Result<Self, SceneError> {
        if !(bounds.min.is_finite()
            && bounds.max.is_finite()
            && bounds.min.x < bounds.max.x
            && bounds.min.y < bounds.max.y)
        {
            return Err(SceneError::InvalidBounds);
        }
        for (k, m) in materials.iter().enumerate() {
            if !m.penetration_loss_db.is_finite() || m.penetration_loss_db < 0.0 {
                return Err(SceneError::InvalidMaterialLoss {
                    material: m.name.clone(),
                });
            }
            if materials[..k].iter().any(|o| o.name == m.name) {
                return Err(SceneError::DuplicateMaterial {
                    material: m.name.clone(),
                });
            }
        }
        let mut buildings = buildings;
        for k in 0..buildings.len() {
            let id = buildings[k].id;
            if buildings[..k].iter().any(|o| o.id == id) {
                return Err(SceneError::DuplicateBuilding { building: id });
            }
            let b = &mut buildings[k];
            b.material_index = materials
                .iter()
                .position(|m| m.name == b.material)
                .ok_or_else(|| SceneError::UnresolvedMaterial {
                    building: id,
                    material: b.material.clone(),
                })?;
            if !b.footprint.iter().all(|&p| bounds.contains(p)) {
                return Err(SceneError::BuildingOutOfBounds { building: id });
            }
        }
        let mut sites = sites;
        sites.sort_by_key(|s| s.id);
        if sites.iter().enumerate().any(|(k, s)| s.id != k) {
            return Err(SceneError::SiteIds);
        }
        for s in &sites {
            if !s.position.is_finite() || s.position.z <= 0.0 {
                return Err(SceneError::InvalidSitePosition { site: s.id });
            }
            if !bounds.contains(s.position.xy()) {
                return Err(SceneError::SiteOutOfBounds { site: s.id });
            }
        }
        Ok(Scene {
            materials,
            buildings,
            sites,
            bounds,
            grid,
        })
    }

    pub fn materials(&self) -> &[Material] {
        &self.materials
    }
    pub fn buildings(&self) -> &[Building] {
        &self.buildings
    }
    /// Sites ordered by id, so `sites()[g].id == g`.
    pub fn sites(&self) -> &[GatewaySite] {
        &self.sites
    }
    pub fn site(&self, id: usize) -> Option<&GatewaySite> {
        self.sites.get(id)
    }
    pub fn bounds(&self) -> Bounds {
        self.bounds
    }
    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn material_of(&self, b: &Building) -> &Material {
        &self.materials[b.material_index]
    }

    /// Material name of a crossing.
    pub fn crossing_material(&self, c: &WallCrossing) -> &str {
        &self.materials[c.material].name
    }

    /// Whether `p` is strictly inside some footprint.
    pub fn is_inside_building(&self, p: Point2) -> bool {
        self.buildings.iter().any(|b| b.contains_xy(p))
    }

    /// Wall crossings of the segment `p0 → p1`, ordered by distance from `p0`.
    ///
    /// A crossing is a transition between outside and strictly inside a
    /// footprint whose height on the segment lies in `(0, height_m)`.
    /// Touching a wall or a corner without entering the footprint does not
    /// count.
    pub fn wall_crossings(&self, p0: Point3, p1: Point3) -> Result<Vec<WallCrossing>, SceneError> {
        if !(p0.is_finite() && p1.is_finite()) || p0.distance(p1) <= GEOM_EPS {
            return Err(SceneError::DegenerateSegment);
        }
        let mut out = Vec::new();
        for b in &self.buildings {
            for t in b.transitions(p0.xy(), p1.xy()) {
                let z = p0.z + t * (p1.z - p0.z);
                if z > 0.0 && z < b.height_m {
                    out.push(WallCrossing {
                        building_id: b.id,
                        material: b.material_index,
                        t,
                        z,
                    });
                }
            }
        }
        out.sort_by(|a, b| a.t.total_cmp(&b.t).then(a.building_id.cmp(&b.building_id)));
        Ok(out)
    }
}
