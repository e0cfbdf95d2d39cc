//! Verification sweeps, profile tables and the CSV they are written to.

use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::dist::{check_factorization, JointTable, VarSet, MODEL_SUM_TOL};
use crate::error::{Error, Result};
use crate::info::{chain_rule_residual, mutual_information, mutual_information_raw, Nats, DEFAULT_TOL};
use crate::model_file::{load_model, save_document, LoadedModel, ModelDocument};
use crate::modelgen::{derived_seed, try_random_model, ModelSpec};
use crate::placement::{
    dependent_count, optimal_head_position_joint, plain_check, stage_view, theorem_checks, Aggregate,
    HeadSearch, Objective, Placement, Relation, RelationCheck, SearchOptions,
};

/// Symmetry of information is exact, so it is checked with zero tolerance.
const SYMMETRY_TOL: f64 = 0.0;
/// Largest `n` for which every ordered triple of disjoint sets is fed to the
/// chain rule; above it only single-variable triples are used.
const CHAIN_RULE_MAX_N: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Absolute tolerance in nats.
    pub tolerance: f64,
    /// Random models per `(n, alphabet size)` cell.
    pub sweep_size: usize,
    pub n_values: Vec<usize>,
    pub sizes: Vec<usize>,
    pub concentration: f64,
    pub seed: u64,
    /// Model files to verify instead of random models.
    pub models: Vec<PathBuf>,
    pub out: Option<PathBuf>,
    /// Where failing models are written; defaults to `witnesses/`.
    pub witness_dir: Option<PathBuf>,
    pub aggregate: AggregateChoice,
    pub timestamp: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AggregateChoice {
    #[default]
    Min,
    Mean,
}

impl From<AggregateChoice> for Aggregate {
    fn from(a: AggregateChoice) -> Self {
        match a {
            AggregateChoice::Min => Aggregate::Min,
            AggregateChoice::Mean => Aggregate::Mean,
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            tolerance: DEFAULT_TOL,
            sweep_size: 1000,
            n_values: vec![2, 3, 4],
            sizes: vec![2, 3, 5],
            concentration: 1.0,
            seed: 42,
            models: Vec::new(),
            out: None,
            witness_dir: None,
            aggregate: AggregateChoice::Min,
            timestamp: true,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if self.sweep_size == 0 {
            return Err(Error::InvalidArgument("sweep size must be at least 1".into()));
        }
        if self.models.is_empty() {
            if self.n_values.is_empty() || self.n_values.contains(&0) {
                return Err(Error::InvalidArgument("n values must be nonempty and at least 1".into()));
            }
            if self.sizes.is_empty() || self.sizes.contains(&0) {
                return Err(Error::InvalidArgument("alphabet sizes must be nonempty and at least 1".into()));
            }
        }
        if !(self.concentration.is_finite() && self.concentration > 0.0) {
            return Err(Error::InvalidArgument("concentration must be positive".into()));
        }
        Ok(())
    }
}

/// One model under verification.
#[derive(Clone, Debug)]
pub struct SweepModel {
    pub id: String,
    pub model: LoadedModel,
}

/// Random models, `sweep_size` for each `(n, size)` cell. Model `i` overall
/// is seeded with `derived_seed(seed, i)`.
pub fn random_models(cfg: &RunConfig) -> Result<Vec<SweepModel>> {
    let mut out = Vec::new();
    let mut index = 0u64;
    for &n in &cfg.n_values {
        for &size in &cfg.sizes {
            for i in 0..cfg.sweep_size {
                let spec = ModelSpec::uniform_sizes(n, size, size, cfg.concentration, derived_seed(cfg.seed, index));
                out.push(SweepModel {
                    id: format!("n{n}_s{size}_{i:05}"),
                    model: LoadedModel::Factored(try_random_model(&spec)?),
                });
                index += 1;
            }
        }
    }
    Ok(out)
}

fn file_models(paths: &[PathBuf]) -> Result<Vec<SweepModel>> {
    paths
        .iter()
        .map(|p| {
            Ok(SweepModel {
                id: p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| p.display().to_string()),
                model: load_model(p)?,
            })
        })
        .collect()
}

/// Chain rule residuals and symmetry of information, over ordered triples of
/// disjoint variable sets and every produced/pending split.
pub fn identity_checks(joint: &JointTable, tol: f64) -> Result<Vec<RelationCheck>> {
    let n = dependent_count(joint)?;
    let vars = joint.var_set();
    let members = vars.members();
    let mut worst_chain = 0.0f64;
    let mut worst_symmetry = 0.0f64;
    let mut symmetry = |x: &VarSet, y: &VarSet| -> Result<()> {
        let a = mutual_information_raw(joint, x, y)?;
        let b = mutual_information_raw(joint, y, x)?;
        worst_symmetry = worst_symmetry.max((a - b).abs());
        Ok(())
    };

    if n <= CHAIN_RULE_MAX_N {
        // label each variable 0 (unused), 1 (X1), 2 (X2) or 3 (Y)
        let total = 4usize.pow(members.len() as u32);
        for code in 0..total {
            let mut sets = [VarSet::empty(), VarSet::empty(), VarSet::empty()];
            let mut c = code;
            for &v in members {
                if c % 4 > 0 {
                    sets[c % 4 - 1].insert(v);
                }
                c /= 4;
            }
            if sets.iter().any(VarSet::is_empty) {
                continue;
            }
            let [x1, x2, y] = &sets;
            worst_chain = worst_chain.max(chain_rule_residual(joint, x1, x2, y)?.0);
            symmetry(&x1.union(x2), y)?;
        }
    } else {
        for &a in members {
            for &b in members {
                for &c in members {
                    if a == b || b == c || a == c {
                        continue;
                    }
                    let (x1, x2, y) = (VarSet::from_iter([a]), VarSet::from_iter([b]), VarSet::from_iter([c]));
                    worst_chain = worst_chain.max(chain_rule_residual(joint, &x1, &x2, &y)?.0);
                    symmetry(&x1.union(&x2), &y)?;
                }
            }
        }
    }
    for k in 1..=n {
        let view = stage_view(&Placement::identity(n, 1)?, k)?;
        symmetry(&view.produced, &view.pending)?;
        let view = stage_view(&Placement::identity(n, n + 1)?, k)?;
        symmetry(&view.produced, &view.pending)?;
    }

    let mut checks = vec![plain_check(
        "identity",
        "chain_rule".into(),
        Nats(worst_chain),
        Nats::ZERO,
        Relation::Eq,
        tol,
    )];
    checks.push(plain_check(
        "identity",
        "symmetry".into(),
        Nats(worst_symmetry),
        Nats::ZERO,
        Relation::Eq,
        SYMMETRY_TOL,
    ));
    Ok(checks)
}

/// Harmony of the optimal head position: for `n >= 2` head-last maximizes
/// head predictability and head-first maximizes dependent predictability;
/// for `n = 1` both ends give the same remainder predictability.
pub fn harmony_checks(joint: &JointTable, tol: f64, aggregate: Aggregate) -> Result<Vec<RelationCheck>> {
    let n = dependent_count(joint)?;
    let options = SearchOptions {
        aggregate,
        dependent_order: None,
        tol,
    };
    if n == 1 {
        let s = optimal_head_position_joint(joint, Objective::RemainderAtK(1), &options)?;
        return Ok(vec![plain_check(
            "harmony",
            "remainder_symmetry[n=1]".into(),
            s.scores[0].1,
            s.scores[1].1,
            Relation::Eq,
            tol,
        )]);
    }
    let best = |s: &HeadSearch| Nats(s.scores.iter().map(|(_, v)| v.0).fold(f64::NEG_INFINITY, f64::max));
    let head = optimal_head_position_joint(joint, Objective::HeadPredictability, &options)?;
    let dep = optimal_head_position_joint(joint, Objective::DependentPredictability, &options)?;
    Ok(vec![
        plain_check("harmony", "head_last_maximizes_head".into(), head.scores[n].1, best(&head), Relation::Ge, tol),
        plain_check("harmony", "head_first_maximizes_dependents".into(), dep.scores[0].1, best(&dep), Relation::Ge, tol),
    ])
}

pub fn factorization_check(joint: &JointTable, tol: f64) -> Result<RelationCheck> {
    let report = check_factorization(joint, MODEL_SUM_TOL.max(tol.min(1e-12)))?;
    Ok(plain_check(
        "factorization",
        "conditional_independence".into(),
        Nats(report.max_violation),
        Nats::ZERO,
        Relation::Eq,
        tol,
    ))
}

/// Every check for one model, in a fixed order.
pub fn verify_joint(joint: &JointTable, tol: f64, aggregate: Aggregate) -> Result<Vec<RelationCheck>> {
    let mut checks = vec![factorization_check(joint, tol)?];
    checks.extend(theorem_checks(joint, tol)?);
    checks.extend(harmony_checks(joint, tol, aggregate)?);
    checks.extend(identity_checks(joint, tol)?);
    Ok(checks)
}

#[derive(Clone, Debug)]
pub struct ModelOutcome {
    pub id: String,
    pub checks: Vec<RelationCheck>,
}

impl ModelOutcome {
    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.holds).count()
    }
}

#[derive(Clone, Debug)]
pub struct SweepReport {
    /// Sorted by model id; checks keep their per-model order.
    pub outcomes: Vec<ModelOutcome>,
    pub witnesses: Vec<PathBuf>,
}

impl SweepReport {
    pub fn models(&self) -> usize {
        self.outcomes.len()
    }

    pub fn checks(&self) -> usize {
        self.outcomes.iter().map(|o| o.checks.len()).sum()
    }

    pub fn failures(&self) -> usize {
        self.outcomes.iter().map(ModelOutcome::failures).sum()
    }

    pub fn passed(&self) -> bool {
        self.failures() == 0
    }

    pub fn all_checks(&self) -> impl Iterator<Item = (&str, &RelationCheck)> {
        self.outcomes.iter().flat_map(|o| o.checks.iter().map(move |c| (o.id.as_str(), c)))
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CHECK_COLUMNS)?;
        for (id, c) in self.all_checks() {
            w.write_record(check_record(id, c))?;
        }
        w.flush()?;
        Ok(())
    }
}

pub const CHECK_COLUMNS: [&str; 8] = [
    "model_id",
    "theorem",
    "relation",
    "lhs_nats",
    "rhs_nats",
    "slack",
    "holds",
    "equality_diagnosis",
];

pub fn check_record(model_id: &str, c: &RelationCheck) -> [String; 8] {
    let diagnosis = match &c.equality_diagnosis {
        None => String::new(),
        Some(d) => format!("{}:{}", if d.is_chain { "chain" } else { "not_chain" }, d.residual.0),
    };
    [
        model_id.to_string(),
        c.theorem.to_string(),
        format!("{} {}", c.name, c.relation),
        c.lhs.0.to_string(),
        c.rhs.0.to_string(),
        c.slack.to_string(),
        c.holds.to_string(),
        diagnosis,
    ]
}

/// Runs the configured sweep. Models that fail any check are written to the
/// witness directory.
pub fn run_verify(cfg: &RunConfig) -> Result<SweepReport> {
    cfg.validate()?;
    let models = if cfg.models.is_empty() {
        random_models(cfg)?
    } else {
        file_models(&cfg.models)?
    };
    run_models(&models, cfg)
}

pub fn run_models(models: &[SweepModel], cfg: &RunConfig) -> Result<SweepReport> {
    let aggregate: Aggregate = cfg.aggregate.into();
    let mut outcomes = models
        .par_iter()
        .map(|m| {
            let joint = m.model.joint()?;
            Ok(ModelOutcome {
                id: m.id.clone(),
                checks: verify_joint(&joint, cfg.tolerance, aggregate)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    outcomes.sort_by(|a, b| a.id.cmp(&b.id));

    let mut witnesses = Vec::new();
    let failing: Vec<&ModelOutcome> = outcomes.iter().filter(|o| o.failures() > 0).collect();
    if !failing.is_empty() {
        let dir = cfg.witness_dir.clone().unwrap_or_else(|| PathBuf::from("witnesses"));
        std::fs::create_dir_all(&dir)?;
        for o in failing {
            let m = models.iter().find(|m| m.id == o.id).expect("model for outcome");
            let mut meta = Map::new();
            meta.insert("model_id".into(), Value::from(o.id.clone()));
            meta.insert("failed_checks".into(), Value::from(o.failures()));
            let doc = match &m.model {
                LoadedModel::Factored(f) => ModelDocument::from_factored(f, meta),
                LoadedModel::Joint(j) => ModelDocument::from_joint(j, meta)?,
            };
            let path = dir.join(format!("{}.json", o.id));
            save_document(&doc, &path)?;
            witnesses.push(path);
        }
    }
    Ok(SweepReport { outcomes, witnesses })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum InfoUnit {
    #[default]
    Nats,
    Bits,
}

impl InfoUnit {
    pub fn convert(self, v: Nats) -> f64 {
        match self {
            InfoUnit::Nats => v.0,
            InfoUnit::Bits => v.bits(),
        }
    }

    pub fn suffix(self) -> &'static str {
        match self {
            InfoUnit::Nats => "nats",
            InfoUnit::Bits => "bits",
        }
    }
}

/// Long-format profile table: one row per head position, stage and pending
/// element.
pub fn write_profile_csv<W: Write>(search: &HeadSearch, unit: InfoUnit, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let u = unit.suffix();
    w.write_record([
        "head_position".to_string(),
        "placement".to_string(),
        "k".to_string(),
        "produced".to_string(),
        format!("remainder_{u}"),
        "pending_element".to_string(),
        format!("element_{u}"),
    ])?;
    for prof in &search.profiles {
        for stage in &prof.stages {
            for (elem, value) in &stage.elements {
                w.write_record([
                    prof.placement.head_position().to_string(),
                    prof.placement.to_string(),
                    stage.k.to_string(),
                    stage.produced.to_string(),
                    unit.convert(stage.remainder).to_string(),
                    elem.to_string(),
                    unit.convert(*value).to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn search_summary(search: &HeadSearch, unit: InfoUnit) -> String {
    let mut s = format!("objective: {:?}\n", search.objective);
    for (p, v) in &search.scores {
        s.push_str(&format!("  head position {p}: {:.6} {}\n", unit.convert(*v), unit.suffix()));
    }
    let best: Vec<String> = search.argmax.iter().map(|p| p.to_string()).collect();
    s.push_str(&format!("argmax head positions: {{{}}}\n", best.join(",")));
    s
}

/// Short description of a model: per-slot and total head information plus
/// the factorization check.
pub fn model_summary(joint: &JointTable, unit: InfoUnit) -> Result<String> {
    let n = dependent_count(joint)?;
    let report = check_factorization(joint, MODEL_SUM_TOL)?;
    let mut s = format!(
        "n = {n}, factored: {} (max violation {:e})\n",
        report.holds, report.max_violation
    );
    for i in 1..=n {
        let v = mutual_information(joint, &VarSet::head(), &VarSet::dep(i))?;
        s.push_str(&format!("  I(L; M{i}) = {:.6} {}\n", unit.convert(v), unit.suffix()));
    }
    let all = mutual_information(joint, &VarSet::head(), &VarSet::deps(1, n))?;
    s.push_str(&format!("  I(L; M1..M{n}) = {:.6} {}\n", unit.convert(all), unit.suffix()));
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::build_joint;
    use crate::modelgen::{copy_model, correlated_pair_counterexample, independent_model};

    fn small_config() -> RunConfig {
        RunConfig {
            sweep_size: 10,
            n_values: vec![1, 2, 3],
            sizes: vec![2, 3],
            ..RunConfig::default()
        }
    }

    #[test]
    fn small_sweep_passes() {
        let report = run_verify(&small_config()).unwrap();
        assert_eq!(report.models(), 60);
        assert!(report.passed(), "{:?}", report.all_checks().find(|(_, c)| !c.holds));
        assert!(report.witnesses.is_empty());
    }

    #[test]
    fn sweep_is_deterministic() {
        let render = || {
            let mut buf = Vec::new();
            run_verify(&small_config()).unwrap().write_csv(&mut buf).unwrap();
            buf
        };
        assert_eq!(render(), render());
    }

    #[test]
    fn zero_sweep_is_rejected() {
        let cfg = RunConfig {
            sweep_size: 0,
            ..RunConfig::default()
        };
        assert!(run_verify(&cfg).is_err());
    }

    #[test]
    fn counterexample_fails_and_leaves_a_witness() {
        let dir = tempfile::tempdir().unwrap();
        let models = vec![SweepModel {
            id: "counterexample".into(),
            model: LoadedModel::Joint(correlated_pair_counterexample()),
        }];
        let cfg = RunConfig {
            witness_dir: Some(dir.path().to_path_buf()),
            ..RunConfig::default()
        };
        let report = run_models(&models, &cfg).unwrap();
        assert!(!report.passed());
        let remainder = report
            .all_checks()
            .find(|(_, c)| c.theorem == "remainder" && c.name == "k=1")
            .unwrap()
            .1;
        assert!(!remainder.holds);
        assert_eq!(report.witnesses.len(), 1);
        let back = load_model(&report.witnesses[0]).unwrap();
        assert_eq!(back.joint().unwrap(), correlated_pair_counterexample());
    }

    #[test]
    fn csv_columns() {
        let models = vec![SweepModel {
            id: "copy".into(),
            model: LoadedModel::Factored(copy_model(2, 2, 0.0).unwrap()),
        }];
        let report = run_models(&models, &RunConfig::default()).unwrap();
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "model_id,theorem,relation,lhs_nats,rhs_nats,slack,holds,equality_diagnosis"
        );
        assert!(text.contains("copy,remainder,k=1 >=,"));
        assert!(text.lines().skip(1).all(|l| l.contains(",true,")));
    }

    #[test]
    fn harmony_rows_on_equality_models() {
        let joint = build_joint(&independent_model(3, 2)).unwrap();
        let checks = harmony_checks(&joint, DEFAULT_TOL, Aggregate::Mean).unwrap();
        assert!(checks.iter().all(|c| c.holds));
    }

    #[test]
    fn summary_mentions_factorization() {
        let joint = build_joint(&copy_model(2, 2, 0.1).unwrap()).unwrap();
        let s = model_summary(&joint, InfoUnit::Bits).unwrap();
        assert!(s.contains("factored: true"));
        let s = model_summary(&correlated_pair_counterexample(), InfoUnit::Nats).unwrap();
        assert!(s.contains("factored: false"));
    }

    #[test]
    fn config_json_defaults() {
        let cfg: RunConfig = serde_json::from_str(r#"{"sweep_size": 5, "aggregate": "mean"}"#).unwrap();
        assert_eq!(cfg.sweep_size, 5);
        assert_eq!(cfg.aggregate, AggregateChoice::Mean);
        assert_eq!(cfg.n_values, vec![2, 3, 4]);
        assert!(serde_json::from_str::<RunConfig>(r#"{"sweep": 5}"#).is_err());
    }
}
