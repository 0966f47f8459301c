//! Subcommand implementations behind the `hamsafe` binary.

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use hamsafe_core::certify::{q_matrices, rho_caps, select_rho, Certificate};
use hamsafe_core::controller::Gains;
use hamsafe_core::learner::{
    dataset_hash, dataset_samples, estimate_disturbance_bound, read_jsonl, train, write_jsonl, Checkpoint, LearnedModel,
    ModelSpec, TrainConfig,
};
use hamsafe_core::plant::{PlantParams, RigidBody};
use hamsafe_core::se3::Pose;
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::datagen::{gen_data, gen_planar, GenConfig};
use crate::output::{target, write_json, write_run};
use crate::run::{load_model, run_scenario, Summary};
use crate::scenario::{registry, ModelSource, Scenario};

pub type CmdResult<T> = Result<T, Box<dyn std::error::Error>>;

pub fn read_config<T: DeserializeOwned>(path: &Path) -> CmdResult<T> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PlanarConfig {
    pub samples: usize,
    pub dt: f64,
    pub substeps: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GenDataConfig {
    #[serde(default)]
    pub plant: PlantParams,
    #[serde(default)]
    pub gen: GenConfig,
    /// Planar single-interval samples instead of pilot flights.
    #[serde(default)]
    pub planar: Option<PlanarConfig>,
}

pub fn gen_data_cmd(cfg: &GenDataConfig, seed: Option<u64>, out: &Path, force: bool) -> CmdResult<PathBuf> {
    let body = RigidBody::new(cfg.plant.clone())?;
    let seed = seed.unwrap_or(cfg.gen.seed);
    let data = match &cfg.planar {
        Some(p) => gen_planar(&body, p.samples, p.dt, p.substeps, seed),
        None => gen_data(&body, &GenConfig { seed, ..cfg.gen.clone() }),
    };
    let path = target(out, "dataset.jsonl", force)?;
    write_jsonl(&data, std::io::BufWriter::new(fs::File::create(&path)?))?;
    Ok(path)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrainCmdConfig {
    pub dataset: PathBuf,
    /// Trajectories held out for the disturbance estimate.
    pub heldout: Option<PathBuf>,
    pub model: ModelSpec,
    #[serde(default)]
    pub train: TrainConfig,
}

pub fn train_cmd(cfg: &TrainCmdConfig, seed: Option<u64>, out: &Path, force: bool) -> CmdResult<Checkpoint> {
    let data = read_jsonl(BufReader::new(fs::File::open(&cfg.dataset).map_err(|e| format!("{}: {e}", cfg.dataset.display()))?))?;
    let samples = dataset_samples(&data);
    let tc = TrainConfig { seed: seed.unwrap_or(cfg.train.seed), ..cfg.train.clone() };
    let mut model = LearnedModel::init(cfg.model.clone(), tc.seed);
    let report = train(&mut model, &samples, &tc)?;
    let heldout = match &cfg.heldout {
        Some(p) => dataset_samples(&read_jsonl(BufReader::new(fs::File::open(p)?))?),
        None => samples,
    };
    let delta_d = estimate_disturbance_bound(&model, &heldout, tc.substeps)?;
    let ck = Checkpoint { model, dataset_hash: dataset_hash(&data), train: tc, delta_d, report: Some(report) };
    write_json(out, "model.json", &ck, force)?;
    Ok(ck)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertifyConfig {
    #[serde(default)]
    pub plant: PlantParams,
    #[serde(default = "ground_truth")]
    pub model: ModelSource,
    #[serde(default)]
    pub gains: Gains,
    pub alpha: f64,
    pub beta: f64,
    pub delta_d: f64,
    /// Safety factor applied to the smallest cross-term cap.
    #[serde(default = "default_margin")]
    pub rho_margin: f64,
}

fn ground_truth() -> ModelSource {
    ModelSource::GroundTruth
}

fn default_margin() -> f64 {
    0.9
}

/// Certificate report: our constants next to the published ones.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertifyReport {
    pub inputs: CertifyConfig,
    pub q_eigenvalues: [[f64; 2]; 3],
    pub rho_caps: [f64; 4],
    pub selected_rho: f64,
    pub certificate: Certificate,
    pub published_c1: f64,
    pub published_c2: f64,
    pub checks: Vec<(String, bool)>,
}

fn eig2(m: &nalgebra::Matrix2<f64>) -> [f64; 2] {
    let e = m.symmetric_eigenvalues();
    [e.min(), e.max()]
}

pub fn certify_cmd(cfg: &CertifyConfig) -> CmdResult<CertifyReport> {
    let s = Scenario { plant: cfg.plant.clone(), model: cfg.model.clone(), ..Scenario::default() };
    let model = load_model(&s)?;
    let minv = model.mass_inverse(&Pose::identity());
    let q = q_matrices(&minv, &cfg.gains, cfg.alpha, cfg.beta)?;
    let caps = rho_caps(&minv, &cfg.gains, cfg.beta)?;
    let rho = select_rho(&minv, &cfg.gains, cfg.beta, cfg.rho_margin)?;
    let selected = Gains { rho, ..cfg.gains.clone() };
    let selected_ok = q_matrices(&minv, &selected, cfg.alpha, cfg.beta).is_ok();
    let cert = Certificate::compute(&minv, &cfg.gains, cfg.alpha, cfg.beta, cfg.delta_d)?;
    let checks = vec![
        ("Q matrices positive definite".to_string(), true),
        ("selected rho keeps Q positive definite".to_string(), selected_ok),
        ("delta_d cap positive".to_string(), cert.delta_cap > 0.0),
        ("c1 < c2".to_string(), cert.valid),
    ];
    Ok(CertifyReport {
        inputs: cfg.clone(),
        q_eigenvalues: [eig2(&q.q1), eig2(&q.q2), eig2(&q.q3)],
        rho_caps: caps,
        selected_rho: rho,
        certificate: cert,
        published_c1: 2.2050,
        published_c2: 8.8200,
        checks,
    })
}

/// A scenario file is either a full scenario or `{"registry": name}` plus overrides.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScenarioConfig {
    Registry { registry: String, delta_d: Option<f64>, model: Option<ModelSource>, duration: Option<f64> },
    Full(Box<Scenario>),
}

impl ScenarioConfig {
    pub fn resolve(&self) -> CmdResult<Scenario> {
        match self {
            ScenarioConfig::Full(s) => Ok((**s).clone()),
            ScenarioConfig::Registry { registry: name, delta_d, model, duration } => {
                let mut s = registry(name).ok_or_else(|| format!("unknown scenario {name}"))?;
                if let Some(d) = delta_d {
                    s.delta_d = *d;
                }
                if let Some(m) = model {
                    s.model = m.clone();
                }
                if let Some(t) = duration {
                    s.duration = *t;
                }
                Ok(s)
            }
        }
    }
}

pub fn simulate_cmd(cfg: &ScenarioConfig, seed: Option<u64>, out: &Path, force: bool) -> CmdResult<Summary> {
    let mut s = cfg.resolve()?;
    if let Some(seed) = seed {
        s.seed = seed;
    }
    let rec = run_scenario(&s, force)?;
    write_run(out, &rec, force)?;
    Ok(rec.summary)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepConfig {
    pub scenario: ScenarioConfig,
    pub deltas: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepEntry {
    pub delta_d: f64,
    pub summary: Summary,
}

/// Runs the scenario once per disturbance level; levels above the certified
/// cap need `force`, as in `simulate`.
pub fn sweep_cmd(cfg: &SweepConfig, seed: Option<u64>, out: &Path, force: bool) -> CmdResult<Vec<SweepEntry>> {
    let base = cfg.scenario.resolve()?;
    let mut entries = Vec::new();
    for &d in &cfg.deltas {
        let s = Scenario { delta_d: d, seed: seed.unwrap_or(base.seed), name: format!("{}-{d}", base.name), ..base.clone() };
        let rec = run_scenario(&s, force)?;
        write_run(&out.join(format!("delta_{d}")), &rec, force)?;
        entries.push(SweepEntry { delta_d: d, summary: rec.summary });
    }
    write_json(out, "summary.json", &entries, force)?;
    Ok(entries)
}
