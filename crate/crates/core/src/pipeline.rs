//! Configuration, presets and the full build → scaffold → synthesize →
//! verify run, with its JSON artifacts.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_matrix_unit_axioms, ClosurePolicy, Element};
use crate::report::{Check, VerificationReport, Worst};
use crate::scaffold::{
    build_qwu, matrix_units_from_u, partial_iso_closure_check, select_stages, verify_lambda, verify_qwu, BratteliData, LambdaSet,
    QwuSets,
};
use crate::synthesis::{synthesize, verify_g_families, GeneratorBundle, GeneratorExport};
use crate::system::{verify_af_action, AfActionReport, DiagonalMap, SampledSpace, SeedEntry, SnapshotExport, Stage, SystemSnapshot, VilladsenParams};
use crate::tolerance::Tolerances;
use crate::verification::{
    action_oracles, extract_projections, extraction_clusters, recover_scaffold, verify_single_generation, verify_upt, LexOrder, SingleGeneration,
};

/// Largest ambient vector-space dimension a run may build.
pub const MAX_AMBIENT: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Uhf2,
    Goodearl,
    VilladsenSmall,
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uhf2" => Ok(Preset::Uhf2),
            "goodearl" => Ok(Preset::Goodearl),
            "villadsen-small" => Ok(Preset::VilladsenSmall),
            other => Err(Error::config("system.preset", format!("unknown preset `{other}` (expected uhf2, goodearl or villadsen-small)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AhStage {
    pub sizes: Vec<usize>,
    /// Sample points of each block's space.
    pub spaces: Vec<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum SystemSpec {
    Preset(Preset),
    Villadsen(VilladsenParams),
    Bratteli(BratteliData),
    /// Explicit stages and seed tables: maps[r][target block] lists the
    /// seed entries of the step from stage r+1 to r+2.
    Ah { stages: Vec<AhStage>, maps: Vec<Vec<Vec<SeedEntry>>> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemSpec,
    pub depth: usize,
    pub truncate: usize,
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default = "default_word_length")]
    pub word_length: usize,
    #[serde(default = "default_scale")]
    pub tolerance_scale: f64,
    #[serde(default)]
    pub tolerances: Option<Tolerances>,
    #[serde(default)]
    pub tensor: Option<usize>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default = "default_floor")]
    pub multiplicity_floor: usize,
    /// Closeness required of every single-generation target. Defaults to
    /// 1e-4 for systems over points and 1e-3 otherwise.
    #[serde(default)]
    pub generation_eps: Option<f64>,
}

fn default_grid() -> usize {
    3
}
fn default_word_length() -> usize {
    14
}
fn default_scale() -> f64 {
    1.0
}
fn default_floor() -> usize {
    1
}

impl RunConfig {
    pub fn preset(preset: Preset, depth: usize, truncate: usize) -> Self {
        RunConfig {
            system: SystemSpec::Preset(preset),
            depth,
            truncate,
            grid: default_grid(),
            word_length: default_word_length(),
            tolerance_scale: default_scale(),
            tolerances: None,
            tensor: None,
            out: None,
            multiplicity_floor: default_floor(),
            generation_eps: None,
        }
    }

    /// Parses JSON and reports the path of the offending field on failure.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let mut path = e.path().to_string();
            let message = e.inner().to_string();
            if let Some(field) = message.strip_prefix("missing field `").and_then(|m| m.split('`').next()) {
                path = if path == "." { field.to_string() } else { format!("{path}.{field}") };
            }
            Error::config(if path == "." { "(root)".into() } else { path }, message)
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.depth < 2 {
            return Err(Error::config("depth", "at least two stages are needed"));
        }
        if self.truncate == 0 || self.truncate > self.depth {
            return Err(Error::config("truncate", format!("must lie in 1..={}", self.depth)));
        }
        if self.grid == 0 {
            return Err(Error::config("grid", "must be positive"));
        }
        if self.word_length == 0 {
            return Err(Error::config("word_length", "must be positive"));
        }
        if !(self.tolerance_scale > 0.0 && self.tolerance_scale.is_finite()) {
            return Err(Error::config("tolerance_scale", "must be a positive number"));
        }
        if self.tensor == Some(0) {
            return Err(Error::config("tensor", "must be positive"));
        }
        if let SystemSpec::Villadsen(params) = &self.system {
            params.validate(self.depth).map_err(|e| match e {
                Error::Config { path, message } => Error::config(format!("system.villadsen.{path}"), message),
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tolerances.clone().unwrap_or_default().scaled(self.tolerance_scale)
    }

    pub fn policy(&self) -> ClosurePolicy {
        ClosurePolicy { max_word_length: self.word_length, max_ambient: MAX_AMBIENT, ..ClosurePolicy::default() }
    }
}

pub fn goodearl_params(grid: usize, depth: usize) -> Result<VilladsenParams> {
    let steps = depth.saturating_sub(1);
    Ok(VilladsenParams {
        base: SampledSpace::unit_interval(grid)?,
        c: vec![1; steps],
        k: vec![1; steps],
        l: vec![1; steps],
        s: vec![vec![1]; steps],
        eval_points: vec![vec![0]; steps],
        n0: 1,
    })
}

/// X = [0, 1] on a grid, 2 × 2 matrices at the first stage, first step X → X with one coordinate copy, later
/// steps X^c → X^{2c} with one copy of each coordinate projection, and one
/// point evaluation per step.
pub fn villadsen_small_params(grid: usize, depth: usize) -> Result<VilladsenParams> {
    let steps = depth.saturating_sub(1);
    let c: Vec<usize> = (0..steps).map(|r| if r == 0 { 1 } else { 2 }).collect();
    Ok(VilladsenParams {
        base: SampledSpace::unit_interval(grid)?,
        l: c.clone(),
        s: c.iter().map(|&x| vec![1; x]).collect(),
        c,
        k: vec![1; steps],
        eval_points: vec![vec![0]; steps],
        n0: 2,
    })
}

pub fn uhf2_bratteli(depth: usize) -> Result<BratteliData> {
    BratteliData::new((0..depth).map(|r| vec![2usize << r]).collect(), vec![vec![vec![2]]; depth.saturating_sub(1)])
}

pub fn build_snapshot(cfg: &RunConfig) -> Result<SystemSnapshot> {
    let d = cfg.truncate;
    let snap = match &cfg.system {
        SystemSpec::Preset(Preset::Uhf2) => SystemSnapshot::af(&uhf2_bratteli(cfg.depth)?, d)?,
        SystemSpec::Preset(Preset::Goodearl) => SystemSnapshot::villadsen(&goodearl_params(cfg.grid, cfg.depth)?, cfg.depth, d)?,
        SystemSpec::Preset(Preset::VilladsenSmall) => {
            if cfg.depth > 3 {
                return Err(Error::Resource("villadsen-small is limited to depth 3".into()));
            }
            SystemSnapshot::villadsen(&villadsen_small_params(cfg.grid, cfg.depth)?, cfg.depth, d)?
        }
        SystemSpec::Villadsen(params) => SystemSnapshot::villadsen(params, cfg.depth, d)?,
        SystemSpec::Bratteli(data) => {
            if data.depth() < cfg.depth {
                return Err(Error::config("system.bratteli.sizes", format!("{} stages given, depth {} requested", data.depth(), cfg.depth)));
            }
            let cut = BratteliData::new(data.sizes[..cfg.depth].to_vec(), data.incidence[..cfg.depth - 1].to_vec())?;
            SystemSnapshot::af(&cut, d)?
        }
        SystemSpec::Ah { stages, maps } => {
            if stages.len() < cfg.depth || maps.len() + 1 < cfg.depth {
                return Err(Error::config("system.ah.stages", format!("{} stages given, depth {} requested", stages.len(), cfg.depth)));
            }
            let st = stages[..cfg.depth]
                .iter()
                .enumerate()
                .map(|(r, s)| {
                    let spaces = s
                        .spaces
                        .iter()
                        .map(|p| SampledSpace::from_points(p.clone()))
                        .collect::<Result<Vec<_>>>()
                        .map_err(|e| Error::config(format!("system.ah.stages[{r}].spaces"), e.to_string()))?;
                    Ok(Stage { sizes: s.sizes.clone(), spaces })
                })
                .collect::<Result<Vec<Stage>>>()?;
            let m = maps[..cfg.depth - 1]
                .iter()
                .enumerate()
                .map(|(r, entries)| DiagonalMap::new(st[r].shape(), st[r + 1].shape(), entries.clone()))
                .collect::<Result<Vec<_>>>()?;
            SystemSnapshot::new(st, m, d)?
        }
    };
    let flat = snap.ambient().flat_len();
    if flat > MAX_AMBIENT {
        return Err(Error::Resource(format!("ambient dimension {flat} exceeds {MAX_AMBIENT}")));
    }
    match cfg.tensor {
        Some(c) if c > 1 => snap.tensor_with(c, MAX_AMBIENT),
        _ => Ok(snap),
    }
}

/// Everything a run produces.
pub struct PipelineRun {
    pub config: RunConfig,
    pub snapshot: SystemSnapshot,
    pub qwu: QwuSets,
    pub bundle: GeneratorBundle,
    pub af_action: AfActionReport,
    pub single: SingleGeneration,
    pub report: VerificationReport,
}

/// Builds the system, scaffold and generator without verifying them.
pub fn build(cfg: &RunConfig) -> Result<(SystemSnapshot, QwuSets, GeneratorBundle)> {
    cfg.validate()?;
    let tol = cfg.tolerances();
    let snap = build_snapshot(cfg)?;
    let sel = select_stages(&snap.af_skeleton, snap.depth(), cfg.multiplicity_floor)?;
    if cfg.truncate > sel.len() {
        return Err(Error::InsufficientDepth(format!(
            "truncation {} needs {} selected stages, depth {} yields {:?}",
            cfg.truncate,
            cfg.truncate,
            cfg.depth,
            sel.s
        )));
    }
    let qwu = build_qwu(&snap, &sel)?;
    let bundle = synthesize(&snap, &qwu, cfg.truncate, &tol)?;
    Ok((snap, qwu, bundle))
}

fn af_checks(r: &AfActionReport, tol: &Tolerances) -> Vec<Check> {
    vec![
        Check::flag("af_action.generates", "AF-action", r.generates).with_detail(format!("closure dimension {} of {}", r.closure_dimension, r.ambient_dimension)),
        Check::at_most("af_action.commutes", "AF-action", r.max_commutator, tol.commutator),
        Check::at_most("af_action.conjugates_in_d", "AF-action", r.max_conjugate_distance, tol.af_membership)
            .with_detail(format!("D span dimension {}", r.d_span_dimension)),
    ]
}

fn matrix_unit_check(qwu: &QwuSets, el: &crate::scaffold::QwuElements, snap: &SystemSnapshot, n_prime: usize, tol: f64) -> Check {
    let mut worst = Worst::default();
    for i in 0..n_prime {
        for (j, us) in el.u[i].iter().enumerate() {
            let grid = matrix_units_from_u(us);
            let unit = (0..snap.stages[qwu.selection.s[i] - 1].sizes[j])
                .fold(Element::zeros(&snap.ambient()), |acc, a| &acc + &snap.unit(qwu.selection.s[i], j, a, a));
            let rep = check_matrix_unit_axioms(&grid, &unit, tol);
            worst.update(rep.max_violation, || format!("U_{},{}", i + 1, j + 1));
        }
    }
    worst.check("qwu.U_matrix_units", "U", tol)
}

/// The full pipeline with every check.
pub fn run_pipeline(cfg: &RunConfig) -> Result<PipelineRun> {
    let (snap, full, bundle) = build(cfg)?;
    let tol = cfg.tolerances();
    let policy = cfg.policy();
    let n_prime = cfg.truncate;
    let qwu = full.truncated(n_prime)?;
    let el = qwu.elements(&snap);
    let mut report = VerificationReport::default();

    let af = verify_af_action(&snap, &policy, tol.commutator, tol.af_membership)?;
    report.checks.extend(af_checks(&af, &tol));

    report.extend(verify_qwu(&full, &snap, tol.exact));
    for i in 0..full.selection.len() - 1 {
        report.extend(partial_iso_closure_check(&full, &snap, i, &policy)?);
    }
    report.push(matrix_unit_check(&qwu, &el, &snap, n_prime, tol.matrix_unit));
    let spectra: Vec<Vec<f64>> = bundle.g.iter().flatten().map(|x| x.spectrum.clone()).collect();
    report.extend(verify_lambda(&bundle.lambda, &spectra, tol.lambda_clearance));
    report.extend(verify_g_families(&bundle, &el, &snap, &policy, &tol)?);

    let order = LexOrder::new(&qwu, &el);
    let (upt, _) = verify_upt(&bundle.generator, &order.projections, bundle.tail_bound, tol.identity, tol.spectral_gap)?;
    report.extend(upt);
    let q_hat = extract_projections(&bundle.generator, &extraction_clusters(&bundle, &order)?)?;
    let mut ex = Worst::default();
    for ((idx, p), q) in order.indices.iter().zip(&order.projections).zip(&q_hat) {
        ex.update(q.distance(p), || format!("{idx:?}"));
    }
    report.push(ex.check("extraction.projections", "upTfinal", tol.extraction).with_detail(format!("{} projections", q_hat.len())));
    report.extend(action_oracles(&bundle, &qwu, &el, tol.identity));
    report.extend(recover_scaffold(&bundle, &qwu, &el, &q_hat, &snap, &policy, tol.recovery, tol.membership)?.0);

    let eps = cfg.generation_eps.unwrap_or(if snap.stages.iter().all(|s| s.spaces.iter().all(|x| x.len() == 1)) { 1e-4 } else { 1e-3 });
    let (single_rep, single) = verify_single_generation(&bundle, &snap, &qwu, &policy, eps)?;
    report.extend(single_rep);

    Ok(PipelineRun { config: cfg.clone(), snapshot: snap, qwu: full, bundle, af_action: af, single, report: report.sorted() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaffoldExport {
    pub qwu: QwuSets,
    pub lambda: LambdaSet,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportExport {
    pub all_pass: bool,
    pub word_length: usize,
    pub checks: Vec<Check>,
    pub af_action: AfActionReport,
    pub single_generation: SingleGeneration,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Artifacts {
    pub snapshot: SnapshotExport,
    pub scaffold: ScaffoldExport,
    pub generator: GeneratorExport,
}

pub fn artifacts(snap: &SystemSnapshot, qwu: &QwuSets, bundle: &GeneratorBundle) -> Artifacts {
    Artifacts {
        snapshot: snap.export(),
        scaffold: ScaffoldExport { qwu: qwu.clone(), lambda: bundle.lambda.clone() },
        generator: bundle.export(),
    }
}

impl PipelineRun {
    pub fn report_export(&self) -> ReportExport {
        ReportExport {
            all_pass: self.report.all_pass(),
            word_length: self.config.word_length,
            checks: self.report.checks.clone(),
            af_action: self.af_action.clone(),
            single_generation: self.single.clone(),
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Writes snapshot.json, scaffold.json and generator.json, plus
/// report.json when a report is given. Returns the written paths.
pub fn write_artifacts(dir: &Path, a: &Artifacts, report: Option<&ReportExport>) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut files = vec![
        ("snapshot.json", to_json(&a.snapshot)?),
        ("scaffold.json", to_json(&a.scaffold)?),
        ("generator.json", to_json(&a.generator)?),
    ];
    if let Some(r) = report {
        files.push(("report.json", to_json(r)?));
    }
    let mut out = Vec::new();
    for (name, body) in files {
        let p = dir.join(name);
        std::fs::write(&p, body)?;
        out.push(p);
    }
    Ok(out)
}
