//! Scenario descriptions and the built-in scenario registry.

use std::path::PathBuf;

use hamsafe_core::controller::Gains;
use hamsafe_core::plant::{NoiseSpec, PlantParams};
use hamsafe_core::world::{grid_astar, warehouse, Bounds, Obstacle, ReferencePath, WarehouseSpec, World, WorldError};
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WorldSource {
    Empty { d_max: f64 },
    Warehouse(WarehouseSpec),
    /// The two planar walls `-x + z < 1.1` and `0.8 x + z < 0.4`.
    Walls2d,
    Inline(World),
    File { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PathSource {
    Waypoints { points: Vec<[f64; 3]> },
    Planner { start: [f64; 3], goal: [f64; 3], clearance: f64, cell: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSource {
    GroundTruth,
    Checkpoint { path: PathBuf },
}

/// Level sets used by the safety margin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LevelSets {
    /// Fixed values, e.g. the published configuration.
    Fixed { c1: f64, c2: f64 },
    /// `c1`, `c2` from the certificate at the scenario's `delta_d`.
    Computed,
}

impl LevelSets {
    pub fn published() -> Self {
        LevelSets::Fixed { c1: 2.2050, c2: 8.8200 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistanceMode {
    Exact,
    /// Minimum over a simulated lidar scan taken from the robot.
    Lidar { rays: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub world: WorldSource,
    pub plant: PlantParams,
    pub model: ModelSource,
    pub gains: Gains,
    pub alpha: f64,
    pub beta: f64,
    /// Disturbance magnitude injected into the plant and used by the certificate.
    pub delta_d: f64,
    pub levels: LevelSets,
    pub noise: NoiseSpec,
    pub path: PathSource,
    pub duration: f64,
    pub dt: f64,
    /// Plant substeps per control period.
    pub substeps: usize,
    pub k_g: f64,
    /// Hold the governor at the start of the path.
    pub static_governor: bool,
    /// When the configured `rho` does not certify the controller's model,
    /// replace it with this fraction of the smallest admissible value.
    pub rho_margin: Option<f64>,
    pub distance: DistanceMode,
    /// Heading used by the underactuated attitude construction.
    pub yaw: f64,
    pub seed: u64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            name: "hover".into(),
            world: WorldSource::Empty { d_max: 30.0 },
            plant: PlantParams::default(),
            model: ModelSource::GroundTruth,
            gains: Gains::default(),
            alpha: 2.0,
            beta: 20.0,
            delta_d: 0.0,
            levels: LevelSets::published(),
            noise: NoiseSpec::default(),
            path: PathSource::Waypoints { points: vec![[0.0, 0.0, 1.0]] },
            duration: 10.0,
            dt: 1.0 / 120.0,
            substeps: 10,
            k_g: 0.5,
            static_governor: false,
            rho_margin: Some(0.9),
            distance: DistanceMode::Exact,
            yaw: 0.0,
            seed: 0,
        }
    }
}

/// Planar wall pair; the occupied side of each is `n . p >= b`.
pub fn walls_2d() -> World {
    let obstacles = vec![
        Obstacle::HalfSpace { normal: Vector3::new(-1.0, 0.0, 1.0), offset: 1.1 },
        Obstacle::HalfSpace { normal: Vector3::new(0.8, 0.0, 1.0), offset: 0.4 },
    ];
    let bounds = Bounds { min: Vector3::new(-4.0, -1.0, -4.0), max: Vector3::new(4.0, 1.0, 2.0) };
    World::new(obstacles, bounds, 30.0).expect("fixed walls are valid")
}

impl Scenario {
    pub fn build_world(&self) -> Result<World, String> {
        match &self.world {
            WorldSource::Empty { d_max } => {
                let b = Bounds { min: Vector3::repeat(-1e3), max: Vector3::repeat(1e3) };
                World::new(vec![], b, *d_max).map_err(|e| e.to_string())
            }
            WorldSource::Warehouse(spec) => warehouse(spec).map_err(|e| e.to_string()),
            WorldSource::Walls2d => Ok(walls_2d()),
            WorldSource::Inline(w) => {
                w.validate().map_err(|e| e.to_string())?;
                Ok(w.clone())
            }
            WorldSource::File { path } => {
                let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
                let w: World = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
                w.validate().map_err(|e| e.to_string())?;
                Ok(w)
            }
        }
    }

    pub fn build_path(&self, world: &World) -> Result<ReferencePath, WorldError> {
        match &self.path {
            PathSource::Waypoints { points } => ReferencePath::new(points.iter().map(|p| Vector3::from(*p)).collect()),
            PathSource::Planner { start, goal, clearance, cell } => {
                grid_astar(world, &Vector3::from(*start), &Vector3::from(*goal), *clearance, *cell)
            }
        }
    }
}

/// Warehouse layout used by the navigation scenarios.
pub fn warehouse_spec() -> WarehouseSpec {
    WarehouseSpec { length: 30.0, rows: 4, ..WarehouseSpec::default() }
}

/// Hexarotor through the warehouse on a planned serpentine route.
pub fn warehouse3d_hexarotor() -> Scenario {
    Scenario {
        name: "warehouse3d-hexarotor".into(),
        world: WorldSource::Warehouse(warehouse_spec()),
        path: PathSource::Planner { start: [2.0, 2.0, 2.0], goal: [28.0, 2.0, 2.0], clearance: 1.5, cell: 0.5 },
        duration: 120.0,
        distance: DistanceMode::Lidar { rays: 1024 },
        ..Scenario::default()
    }
}

pub fn warehouse3d_quadrotor() -> Scenario {
    Scenario {
        name: "warehouse3d-quadrotor".into(),
        plant: PlantParams::quadrotor(),
        ..warehouse3d_hexarotor()
    }
}

/// Piecewise-linear path below the apex of the two walls.
pub fn walls2d() -> Scenario {
    Scenario {
        name: "walls2d".into(),
        world: WorldSource::Walls2d,
        path: PathSource::Waypoints { points: vec![[-1.0, 0.0, -1.3], [-0.4, 0.0, -0.55], [0.8, 0.0, -1.6]] },
        duration: 30.0,
        ..Scenario::default()
    }
}

/// Straight corridor whose narrow stretch stresses the disturbance sweep.
pub fn corridor_world() -> World {
    let h = 4.0;
    let obstacles = vec![
        Obstacle::HalfSpace { normal: Vector3::new(0.0, 0.0, -1.0), offset: 0.0 },
        Obstacle::HalfSpace { normal: Vector3::new(0.0, 0.0, 1.0), offset: h },
        Obstacle::aabb([4.0, -5.0, 0.0], [8.0, -1.0, h]),
        Obstacle::aabb([4.0, 1.0, 0.0], [8.0, 5.0, h]),
    ];
    let bounds = Bounds { min: Vector3::new(-1.0, -5.0, 0.0), max: Vector3::new(13.0, 5.0, h) };
    World::new(obstacles, bounds, 30.0).expect("fixed corridor is valid")
}

pub fn disturbance_sweep(delta_d: f64) -> Scenario {
    Scenario {
        name: format!("disturbance-sweep-{delta_d}"),
        world: WorldSource::Inline(corridor_world()),
        path: PathSource::Waypoints { points: vec![[0.0, 0.0, 2.0], [12.0, 0.0, 2.0]] },
        delta_d,
        duration: 45.0,
        ..Scenario::default()
    }
}

/// Distance from the static hover point to the wall.
pub const STATIC_WALL_GAP: f64 = 0.12;

/// Governor frozen at a hover point `STATIC_WALL_GAP` from a wall, with
/// level sets computed for a small disturbance bound so the margin is tight.
pub fn static_governor(noise: NoiseSpec) -> Scenario {
    let wall = Obstacle::HalfSpace { normal: Vector3::new(1.0, 0.0, 0.0), offset: STATIC_WALL_GAP };
    let bounds = Bounds { min: Vector3::new(-2.0, -2.0, 0.0), max: Vector3::new(2.0, 2.0, 4.0) };
    let substeps = if noise.input_amplitude > 0.0 { 400 } else { 10 };
    Scenario {
        name: "static-governor".into(),
        world: WorldSource::Inline(World::new(vec![wall], bounds, 30.0).expect("valid wall")),
        path: PathSource::Waypoints { points: vec![[0.0, 0.0, 2.0], [-1.0, 0.0, 2.0]] },
        static_governor: true,
        levels: LevelSets::Computed,
        delta_d: 0.0,
        noise,
        substeps,
        duration: 10.0,
        ..Scenario::default()
    }
}

pub const SWEEP: [f64; 7] = [0.001, 0.01, 0.1, 1.0, 10.0, 20.0, 30.0];

pub fn registry(name: &str) -> Option<Scenario> {
    Some(match name {
        "warehouse3d-hexarotor" => warehouse3d_hexarotor(),
        "warehouse3d-quadrotor" => warehouse3d_quadrotor(),
        "walls2d" => walls2d(),
        "disturbance-sweep" => disturbance_sweep(0.1),
        "static-governor" => static_governor(NoiseSpec::sinusoid()),
        _ => return None,
    })
}
