//! Configuration-driven runs: forward simulation, reconstruction from the
//! stored response data alone, verification against the oracle side, and the
//! geodesic utilities.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::algebra::{commutator_profile, compact_defect, spectrum_cloud, SpectrumCloud};
use crate::error::{Error, Result};
use crate::forward::{cfl_limit, OracleFields, OracleMeta, Physics, TimeGrid, WaveSystem};
use crate::io;
use crate::manifold::{MetricGrid, MetricSpec, PatchSpec};
use crate::model_space::{eikonal, oracle_eikonal, reachable_subspace, OracleSpace};
use crate::reconstruction::{
    check_horizon, density_audit, distance_fields, ground_truth_embedding, hausdorff, separation_audit, ComparisonReport,
    DensityReport, SeparationReport,
};
use crate::response::{gram_matrix, simulate, sorted_eigen, sqrt_operator, BasisSpec, ControlBasis, ResponseData, ResponseMatrix};

pub const MANIFEST: &str = "manifest.json";
pub const RESPONSE: &str = "response.bin";
pub const ORACLE: &str = "oracle.bin";
pub const CONNECTING_FORM: &str = "connecting_form.bin";
pub const CLOUD: &str = "cloud.csv";
pub const DIAGNOSTICS: &str = "diagnostics.json";
pub const REPORT: &str = "report.json";
pub const DISTANCES: &str = "distances.csv";
pub const EMBEDDING: &str = "embedding.csv";

pub fn eikonal_file(patch: &str) -> String {
    format!("eikonal_{patch}.bin")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Cells per axis.
    pub dims: [usize; 3],
    /// Grid step per axis; `1/dims` (unit cube) when absent.
    pub spacing: Option<[f64; 3]>,
    pub metric: MetricSpec,
    pub physics: Physics,
    /// Observation time `T`.
    pub horizon: f64,
    pub patches: Vec<PatchSpec>,
    pub basis: BasisSpec,
    /// Time step as a fraction of the stability limit.
    pub cfl: f64,
    /// Relative singular-value cutoff for reachable subspaces.
    pub rank_threshold: f64,
    pub jad_tol: f64,
    pub jad_max_sweeps: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub verify: VerifySettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dims: [16; 3],
            spacing: None,
            metric: MetricSpec::Identity,
            physics: Physics::Maxwell,
            horizon: 0.4,
            patches: PatchSpec::default_family(),
            basis: BasisSpec::default(),
            cfl: 0.15,
            rank_threshold: 1e-6,
            jad_tol: 1e-6,
            jad_max_sweeps: 200,
            seed: 0,
            out: None,
            verify: VerifySettings::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySettings {
    pub separation_pairs: usize,
    pub defect_samples: usize,
    /// Defect profiles are computed for the first this many patches.
    pub defect_patches: usize,
    pub consistency_tol: f64,
    pub unitary_tol: f64,
    /// Hausdorff bound in units of the largest grid step.
    pub hausdorff_steps: f64,
    pub rank_sweep: Vec<f64>,
}

impl Default for VerifySettings {
    fn default() -> Self {
        Self {
            separation_pairs: 500,
            defect_samples: 20,
            defect_patches: 6,
            consistency_tol: 0.05,
            unitary_tol: 0.05,
            hausdorff_steps: 3.0,
            rank_sweep: vec![1e-4, 1e-6, 1e-8],
        }
    }
}

/// Grid, solver and control family derived from a config.
pub struct Setup {
    pub grid: MetricGrid<f64>,
    pub system: WaveSystem<f64>,
    pub basis: Option<ControlBasis<f64>>,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let cfg: Self = io::read_json(path).map_err(|e| match e {
            Error::Json(j) => Error::Config(format!("{}: {j}", path.display())),
            e => e,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks that need no grid.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.dims.iter().any(|&d| d < 4) {
            return bad(format!("dims {:?}: need at least 4 cells per axis", self.dims));
        }
        if let Some(s) = self.spacing {
            if s.iter().any(|v| !(*v > 0.0)) {
                return bad(format!("spacing {s:?} must be positive"));
            }
        }
        if !(self.horizon > 0.0) {
            return bad(format!("horizon {} must be positive", self.horizon));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return bad(format!("cfl factor {} must lie in (0, 1]", self.cfl));
        }
        for (name, v) in [
            ("rank_threshold", self.rank_threshold),
            ("jad_tol", self.jad_tol),
            ("consistency_tol", self.verify.consistency_tol),
            ("unitary_tol", self.verify.unitary_tol),
            ("hausdorff_steps", self.verify.hausdorff_steps),
        ] {
            if !(v > 0.0) {
                return bad(format!("{name} = {v} must be positive"));
            }
        }
        if self.verify.rank_sweep.iter().any(|v| !(*v > 0.0)) {
            return bad("rank_sweep entries must be positive".into());
        }
        if self.patches.is_empty() {
            return bad("empty patch family".into());
        }
        if self.basis.delays == 0 {
            return bad("basis needs at least one delay".into());
        }
        if !(1..=2).contains(&self.basis.polarizations) {
            return bad(format!("polarizations = {}: expected 1 or 2", self.basis.polarizations));
        }
        Ok(())
    }

    pub fn hash(&self) -> Result<String> {
        io::config_hash(self)
    }

    pub fn grid(&self) -> Result<MetricGrid<f64>> {
        let spacing = self.spacing.unwrap_or(self.dims.map(|d| 1.0 / d as f64));
        MetricGrid::new(self.dims, spacing, self.metric.clone())
    }

    pub fn setup(&self) -> Result<Setup> {
        self.validate()?;
        let grid = self.grid()?;
        check_horizon(&grid, self.horizon)?;
        let time = TimeGrid::fit(self.horizon, cfl_limit(&grid, self.cfl), 2 * self.basis.delays)?;
        let system = WaveSystem::new(&grid, self.physics, time.dt)?;
        let basis = if self.basis.rects.is_empty() { None } else { Some(ControlBasis::new(&system, time, &self.basis)?) };
        Ok(Setup { grid, system, basis })
    }

    /// Output directory: the explicit override, else the config's.
    pub fn out_dir(&self, over: Option<&Path>) -> Result<PathBuf> {
        over.map(Path::to_path_buf)
            .or_else(|| self.out.clone())
            .ok_or_else(|| Error::Config("no output directory (set `out` or pass --out)".into()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    /// The full config with every default written out.
    pub config: RunConfig,
    pub config_hash: String,
    pub basis_size: usize,
    pub profiles: usize,
    pub steps_per_t: usize,
    pub dt: f64,
    /// File name → SHA-256 of its bytes.
    pub files: BTreeMap<String, String>,
}

impl Manifest {
    fn read(dir: &Path, cfg: &RunConfig) -> Result<Self> {
        let m: Manifest = io::read_json(&dir.join(MANIFEST))?;
        let hash = cfg.hash()?;
        if m.config_hash != hash {
            return Err(Error::Config(format!(
                "{} was written for config {}, current config is {}",
                dir.display(),
                m.config_hash,
                hash
            )));
        }
        Ok(m)
    }
}

/// Runs every profile over `[0, 2T]`, writes the boundary traces and the
/// interior snapshots of the basis controls.
pub fn forward(cfg: &RunConfig, out: &Path) -> Result<Manifest> {
    let setup = cfg.setup()?;
    let hash = cfg.hash()?;
    let mut manifest = Manifest {
        config: cfg.clone(),
        config_hash: hash.clone(),
        basis_size: 0,
        profiles: 0,
        steps_per_t: 0,
        dt: setup.system.dt,
        files: BTreeMap::new(),
    };
    if let Some(basis) = &setup.basis {
        let (data, oracle) = simulate(&setup.system, basis, true).map_err(Error::stage("forward"))?;
        let oracle = oracle.expect("oracle requested");
        let p = data.projections.len();
        let len = data.projections[0][0].len();
        let traces = DMatrix::from_fn(p * p, len, |r, c| data.projections[r / p][r % p][c]);
        let snaps = DMatrix::from_fn(oracle.snapshots.len(), setup.system.primary_len(), |r, c| oracle.snapshots[r][c]);
        let rp = out.join(RESPONSE);
        io::write_matrix(&rp, &traces, &hash)?;
        let op = out.join(ORACLE);
        io::write_matrix(&op, &snaps, &hash)?;
        manifest.files.insert(RESPONSE.into(), io::file_digest(&rp)?);
        manifest.files.insert(ORACLE.into(), io::file_digest(&op)?);
        manifest.basis_size = basis.len();
        manifest.profiles = p;
        manifest.steps_per_t = data.steps_per_t;
    }
    io::write_json(&out.join(MANIFEST), &manifest)?;
    Ok(manifest)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainDiagnostics {
    pub patch: String,
    /// `dim U^{s_k}` for `k = 1..K`.
    pub ranks: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub config_hash: String,
    pub basis_size: usize,
    pub asymmetry: f64,
    /// Negative eigenvalues of the connecting form set to zero.
    pub clamped_eigenvalues: usize,
    pub psd_violations: usize,
    pub chains: Vec<ChainDiagnostics>,
    pub jad_residual: f64,
    pub jad_converged: bool,
    /// Cloud coordinates moved by the clamp to `[0, T]`.
    pub clamped_coordinates: usize,
}

pub struct Reconstruction {
    pub connecting_form: DMatrix<f64>,
    pub eikonals: Vec<DMatrix<f64>>,
    pub cloud: SpectrumCloud,
    pub diagnostics: Diagnostics,
}

fn read_response(dir: &Path, manifest: &Manifest) -> Result<ResponseData<f64>> {
    let (m, header) = io::read_matrix(&dir.join(RESPONSE))?;
    let p = manifest.profiles;
    if header.config_hash != manifest.config_hash || m.nrows() != p * p {
        return Err(Error::Format(format!("{RESPONSE} does not match the manifest")));
    }
    let projections = (0..p).map(|a| (0..p).map(|b| m.row(a * p + b).iter().copied().collect()).collect()).collect();
    Ok(ResponseData { steps_per_t: manifest.steps_per_t, projections })
}

/// Response traces ⇒ connecting form ⇒ `|W|` ⇒ reachable subspaces ⇒
/// eikonals ⇒ spectrum cloud. Reads only the manifest and the traces.
pub fn reconstruct(cfg: &RunConfig, dir: &Path) -> Result<Reconstruction> {
    let manifest = Manifest::read(dir, cfg)?;
    let hash = manifest.config_hash.clone();
    let setup = cfg.setup()?;
    let m = cfg.patches.len();
    let Some(basis) = &setup.basis else {
        let cloud = SpectrumCloud { points: vec![vec![0.0; m]], weights: vec![1.0], residual: 0.0, converged: true, clamped: 0 };
        let diagnostics = Diagnostics {
            config_hash: hash,
            basis_size: 0,
            asymmetry: 0.0,
            clamped_eigenvalues: 0,
            psd_violations: 0,
            chains: Vec::new(),
            jad_residual: 0.0,
            jad_converged: true,
            clamped_coordinates: 0,
        };
        write_cloud(&dir.join(CLOUD), &cfg.patches, &cloud)?;
        io::write_json(&dir.join(DIAGNOSTICS), &diagnostics)?;
        return Ok(Reconstruction { connecting_form: DMatrix::zeros(0, 0), eikonals: Vec::new(), cloud, diagnostics });
    };
    let data = read_response(dir, &manifest)?;
    let resp = ResponseMatrix::from_data(basis, &data).map_err(Error::stage("response matrix"))?;
    let c = gram_matrix(&resp).map_err(Error::stage("connecting form"))?;
    let w = sqrt_operator(&c, &basis.gram).map_err(Error::stage("model operator"))?;
    let mut chains = Vec::with_capacity(m);
    let mut eikonals = Vec::with_capacity(m);
    for patch in &cfg.patches {
        let chain = reachable_subspace(&w.matrix, &w.chol, basis, patch, cfg.rank_threshold).map_err(Error::stage("reachable subspaces"))?;
        chains.push(ChainDiagnostics { patch: patch.id.clone(), ranks: chain.ranks[1..].to_vec() });
        eikonals.push(eikonal(&chain).matrix);
    }
    let cloud = spectrum_cloud(&eikonals, cfg.horizon, cfg.jad_tol, cfg.jad_max_sweeps).map_err(Error::stage("joint diagonalization"))?;

    io::write_matrix(&dir.join(CONNECTING_FORM), &c.entries, &hash)?;
    for (patch, e) in cfg.patches.iter().zip(&eikonals) {
        io::write_matrix(&dir.join(eikonal_file(&patch.id)), e, &hash)?;
    }
    write_cloud(&dir.join(CLOUD), &cfg.patches, &cloud)?;
    let diagnostics = Diagnostics {
        config_hash: hash,
        basis_size: basis.len(),
        asymmetry: c.asymmetry,
        clamped_eigenvalues: w.clamped,
        psd_violations: w.psd_violations,
        chains,
        jad_residual: cloud.residual,
        jad_converged: cloud.converged,
        clamped_coordinates: cloud.clamped,
    };
    io::write_json(&dir.join(DIAGNOSTICS), &diagnostics)?;
    Ok(Reconstruction { connecting_form: c.entries, eikonals, cloud, diagnostics })
}

/// One row per point: a coordinate per patch, then the weight.
pub fn write_cloud(path: &Path, patches: &[PatchSpec], cloud: &SpectrumCloud) -> Result<()> {
    let mut header: Vec<String> = patches.iter().map(|p| p.id.clone()).collect();
    header.push("weight".into());
    let rows: Vec<Vec<f64>> = cloud.points.iter().zip(&cloud.weights).map(|(p, w)| p.iter().copied().chain([*w]).collect()).collect();
    io::write_csv(path, &header, &rows)
}

pub fn read_cloud(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>, Vec<f64>)> {
    let (mut header, rows) = io::read_csv(path)?;
    if header.pop().as_deref() != Some("weight") {
        return Err(Error::Format(format!("{}: last column must be `weight`", path.display())));
    }
    let points = rows.iter().map(|r| r[..r.len() - 1].to_vec()).collect();
    let weights = rows.iter().map(|r| r[r.len() - 1]).collect();
    Ok((header, points, weights))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectSummary {
    pub patch: String,
    pub k0: Option<usize>,
    pub leading_singular_values: Vec<f64>,
    pub identity_error: f64,
    pub identity_tolerance: f64,
    pub curl_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub config_hash: String,
    pub passed: bool,
    pub criteria: Vec<CriterionResult>,
    pub consistency_error: f64,
    /// Relative ℓ² distance of model and oracle eikonal spectra, per patch.
    pub unitary_errors: Vec<(String, f64)>,
    pub commutator_max: f64,
    pub commutator_mean: f64,
    pub defects: Vec<DefectSummary>,
    pub separation: SeparationReport,
    pub density: DensityReport,
    pub comparison: ComparisonReport,
    /// Subspace dimension per patch at each threshold of the sweep.
    pub rank_sweep: Vec<(f64, Vec<usize>)>,
}

/// Relative ℓ² distance of two descending spectra, the shorter padded with zeros.
pub fn spectrum_distance(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().max(b.len());
    let at = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
    let num: f64 = (0..n).map(|i| (at(a, i) - at(b, i)).powi(2)).sum();
    let den: f64 = b.iter().map(|x| x * x).sum();
    if den > 0.0 {
        (num / den).sqrt()
    } else {
        num.sqrt()
    }
}

fn read_oracle(dir: &Path, manifest: &Manifest, basis: &ControlBasis<f64>, physics: Physics) -> Result<OracleFields<f64>> {
    let (m, header) = io::read_matrix(&dir.join(ORACLE))?;
    if header.config_hash != manifest.config_hash || m.nrows() != basis.len() {
        return Err(Error::Format(format!("{ORACLE} does not match the manifest")));
    }
    let snapshots = (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect();
    let meta = basis
        .controls
        .iter()
        .enumerate()
        .map(|(i, c)| OracleMeta { control: i, profile: c.profile, delay: c.delay })
        .collect();
    Ok(OracleFields { physics, snapshots, meta })
}

/// Every oracle-side check of the stored run, written to `report.json`.
pub fn verify(cfg: &RunConfig, dir: &Path) -> Result<VerifyReport> {
    let manifest = Manifest::read(dir, cfg)?;
    let setup = cfg.setup()?;
    let basis = setup.basis.as_ref().ok_or_else(|| Error::Config("nothing to verify: the control basis is empty".into()))?;
    let grid = &setup.grid;
    let h = grid.max_spacing();
    let eps = cfg.rank_threshold;
    let s = &cfg.verify;
    let mut criteria = Vec::new();
    let mut push = |name: &str, measured: f64, threshold: f64, passed: bool| {
        criteria.push(CriterionResult { name: name.into(), passed, measured, threshold });
    };

    let (c, _) = io::read_matrix(&dir.join(CONNECTING_FORM))?;
    let oracle = read_oracle(dir, &manifest, basis, cfg.physics)?;
    let chol = crate::response::cholesky(&basis.gram)?;
    let space = OracleSpace::new(&oracle, setup.system.primary_mass(), &chol, eps).map_err(Error::stage("oracle space"))?;
    let consistency_error = (&c - &space.gram).norm() / space.gram.norm().max(f64::MIN_POSITIVE);
    push("connecting form vs interior oracle", consistency_error, s.consistency_tol, consistency_error <= s.consistency_tol);

    let mut eikonals = Vec::with_capacity(cfg.patches.len());
    let mut unitary_errors = Vec::with_capacity(cfg.patches.len());
    for patch in &cfg.patches {
        let (e, _) = io::read_matrix(&dir.join(eikonal_file(&patch.id)))?;
        let model = sorted_eigen(e.clone()).0;
        let (oe, _) = oracle_eikonal(&space, &chol, basis, patch, eps)?;
        unitary_errors.push((patch.id.clone(), spectrum_distance(&model, &oe.eigenvalues())));
        eikonals.push(e);
    }
    let worst = unitary_errors.iter().map(|u| u.1).fold(0.0, f64::max);
    push("model vs oracle eikonal spectra", worst, s.unitary_tol, worst <= s.unitary_tol);

    let prof = commutator_profile(&eikonals, false);

    let mut defects = Vec::new();
    for patch in cfg.patches.iter().take(s.defect_patches) {
        let d = compact_defect(&space, setup.system.calculus(), &chol, basis, patch, eps, s.defect_samples, cfg.seed)?;
        defects.push(DefectSummary {
            patch: d.patch,
            k0: d.k0,
            leading_singular_values: d.singular_values.iter().take(8).copied().collect(),
            identity_error: d.identity_error,
            identity_tolerance: d.identity_tolerance,
            curl_ratio: d.curl_ratio,
        });
    }
    let (worst, tol) = defects.iter().fold((0.0f64, f64::INFINITY), |(w, t), d| (w.max(d.identity_error), t.min(d.identity_tolerance)));
    push("defect quadrature identity", worst, tol, defects.iter().all(|d| d.identity_error <= d.identity_tolerance));

    let separation = separation_audit(grid, cfg.horizon, s.separation_pairs, cfg.seed)?;
    push("separation of layer pairs", separation.fraction, 1.0, separation.separated == separation.pairs);
    let density = density_audit(&cfg.patches, grid, cfg.horizon)?;
    push("patch family injective", density.collisions as f64, 0.0, density.injective);

    let (_, points, _) = read_cloud(&dir.join(CLOUD))?;
    let truth = ground_truth_embedding(grid, &cfg.patches, cfg.horizon)?;
    let mut comparison = hausdorff(&points, &truth.points)?;
    comparison.config_hash = manifest.config_hash.clone();
    let bound = s.hausdorff_steps * h;
    push("cloud vs ground-truth embedding", comparison.hausdorff, bound, comparison.hausdorff <= bound);

    let resp = ResponseMatrix::from_data(basis, &read_response(dir, &manifest)?)?;
    let w = sqrt_operator(&gram_matrix(&resp)?, &basis.gram)?;
    let mut rank_sweep = Vec::new();
    for &e in &s.rank_sweep {
        let dims = cfg
            .patches
            .iter()
            .map(|p| reachable_subspace(&w.matrix, &w.chol, basis, p, e).map(|ch| ch.dim()))
            .collect::<Result<Vec<_>>>()?;
        rank_sweep.push((e, dims));
    }

    let report = VerifyReport {
        config_hash: manifest.config_hash,
        passed: criteria.iter().all(|c| c.passed),
        criteria,
        consistency_error,
        unitary_errors,
        commutator_max: prof.max_normalized(),
        commutator_mean: prof.mean_normalized(),
        defects,
        separation,
        density,
        comparison,
        rank_sweep,
    };
    io::write_json(&dir.join(REPORT), &report)?;
    Ok(report)
}

/// Boundary distance of every node to every patch, and the embedding image
/// of the layer, as CSV.
pub fn oracle(cfg: &RunConfig, out: &Path) -> Result<EmbeddingSummary> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let depth = check_horizon(&grid, cfg.horizon)?;
    let fields = distance_fields(&grid, &cfg.patches)?;
    let lat = grid.node_lattice();
    let mut header: Vec<String> = ["i", "j", "k", "depth"].map(String::from).to_vec();
    header.extend(cfg.patches.iter().map(|p| p.id.clone()));
    let rows: Vec<Vec<f64>> = (0..lat.len())
        .map(|n| {
            let p = lat.coords(n);
            let mut r = vec![p[0] as f64, p[1] as f64, p[2] as f64, depth.values[n]];
            r.extend(fields.iter().map(|f| f.values[n]));
            r
        })
        .collect();
    io::write_csv(&out.join(DISTANCES), &header, &rows)?;
    let truth = ground_truth_embedding(&grid, &cfg.patches, cfg.horizon)?;
    let mut header: Vec<String> = ["node", "depth"].map(String::from).to_vec();
    header.extend(cfg.patches.iter().map(|p| p.id.clone()));
    let rows: Vec<Vec<f64>> = truth
        .nodes
        .iter()
        .zip(&truth.depth)
        .zip(&truth.points)
        .map(|((n, d), p)| [*n as f64, *d].into_iter().chain(p.iter().copied()).collect())
        .collect();
    io::write_csv(&out.join(EMBEDDING), &header, &rows)?;
    Ok(EmbeddingSummary { nodes: lat.len(), layer_nodes: truth.points.len(), max_depth: depth.values.iter().copied().fold(0.0, f64::max) })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingSummary {
    pub nodes: usize,
    pub layer_nodes: usize,
    pub max_depth: f64,
}
