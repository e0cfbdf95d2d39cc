//! Head placements, the predictability relations between produced and
//! pending elements, and the search for the best head position.
//!
//! Relation checks index dependents in production order: `M_1` is the first
//! dependent produced, `M_n` the last. Every check is computed on a
//! [`JointTable`], so the same code runs on factored models and on joints
//! that violate conditional independence.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::dist::{build_joint, FactoredModel, JointTable, VarSet, VariableId};
use crate::error::{Error, Result};
use crate::info::{
    conditional_mutual_information, is_markov_chain, mutual_information, MarkovVerdict, Nats,
};

/// Diagnosis of equality conditions is only attempted within this multiple of
/// the tolerance.
const DIAGNOSIS_WINDOW: f64 = 10.0;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Placement {
    n: usize,
    head_position: usize,
    dependent_order: Vec<usize>,
}

impl Placement {
    /// `head_position` is 1-based in `1..=n+1`; `dependent_order` lists the
    /// dependent slots (1-based) in the order they are produced.
    pub fn new(n: usize, head_position: usize, dependent_order: Vec<usize>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("placement needs n >= 1".into()));
        }
        if !(1..=n + 1).contains(&head_position) {
            return Err(Error::Range(format!("head position {head_position} outside [1, {}]", n + 1)));
        }
        let mut sorted = dependent_order.clone();
        sorted.sort_unstable();
        if sorted != (1..=n).collect::<Vec<_>>() {
            return Err(Error::InvalidArgument(format!(
                "dependent order {dependent_order:?} is not a permutation of 1..={n}"
            )));
        }
        Ok(Placement {
            n,
            head_position,
            dependent_order,
        })
    }

    pub fn identity(n: usize, head_position: usize) -> Result<Self> {
        Self::new(n, head_position, (1..=n).collect())
    }

    pub fn head_first(n: usize) -> Self {
        Self::identity(n, 1).expect("valid")
    }

    pub fn head_last(n: usize) -> Self {
        Self::identity(n, n + 1).expect("valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn head_position(&self) -> usize {
        self.head_position
    }

    pub fn dependent_order(&self) -> &[usize] {
        &self.dependent_order
    }

    /// The variables in production order (length `n + 1`).
    pub fn sequence(&self) -> Vec<VariableId> {
        let mut seq: Vec<VariableId> = self.dependent_order.iter().map(|&i| VariableId::Dep(i)).collect();
        seq.insert(self.head_position - 1, VariableId::Head);
        seq
    }
}

impl fmt::Display for Placement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.sequence().iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StageView {
    pub placement: Placement,
    pub k: usize,
    pub produced: VarSet,
    pub pending: VarSet,
}

/// Splits the sequence after the first `k` elements. Only the sets matter,
/// not the order inside the prefix.
pub fn stage_view(placement: &Placement, k: usize) -> Result<StageView> {
    let seq = placement.sequence();
    if k > seq.len() {
        return Err(Error::Range(format!("stage k={k} outside [0, {}]", seq.len())));
    }
    Ok(StageView {
        placement: placement.clone(),
        k,
        produced: seq[..k].iter().copied().collect(),
        pending: seq[k..].iter().copied().collect(),
    })
}

/// `I(produced; pending)` at an interior stage.
pub fn remainder_predictability(joint: &JointTable, view: &StageView) -> Result<Nats> {
    if view.produced.is_empty() || view.pending.is_empty() {
        return Err(Error::EmptySet("remainder predictability needs 1 <= k <= n"));
    }
    mutual_information(joint, &view.produced, &view.pending)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        })
    }
}

/// What was observed for a relation, independent of what it claims.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Outcome {
    Equality,
    Strict,
    Violated,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelationCheck {
    pub theorem: &'static str,
    pub name: String,
    pub lhs: Nats,
    pub rhs: Nats,
    pub relation: Relation,
    pub holds: bool,
    /// Margin by which the relation is satisfied; negative means violated.
    pub slack: f64,
    pub outcome: Outcome,
    pub equality_diagnosis: Option<MarkovVerdict>,
}

impl RelationCheck {
    pub fn gap(&self) -> f64 {
        (self.lhs.0 - self.rhs.0).abs()
    }
}

/// A chain `X -> Y -> Z` whose validity is the equality condition.
struct Chain {
    x: VarSet,
    y: VarSet,
    z: VarSet,
}

fn chain(x: VarSet, y: VarSet, z: VarSet) -> Option<Chain> {
    Some(Chain { x, y, z })
}

#[allow(clippy::too_many_arguments)]
fn relation_check(
    joint: &JointTable,
    theorem: &'static str,
    name: String,
    lhs: Nats,
    rhs: Nats,
    relation: Relation,
    tol: f64,
    condition: Option<Chain>,
) -> Result<RelationCheck> {
    let diff = lhs.0 - rhs.0;
    let slack = match relation {
        Relation::Le => -diff,
        Relation::Ge => diff,
        Relation::Eq => -diff.abs(),
    };
    let satisfied = slack >= -tol;
    let equal = diff.abs() <= tol;

    let mut equality_diagnosis = None;
    if let Some(c) = condition {
        if diff.abs() <= DIAGNOSIS_WINDOW * tol {
            equality_diagnosis = Some(if c.x.is_empty() || c.z.is_empty() {
                MarkovVerdict {
                    is_chain: true,
                    residual: Nats::ZERO,
                }
            } else {
                is_markov_chain(joint, &c.x, &c.y, &c.z, tol)?
            });
        }
    }
    let consistent = equality_diagnosis.is_none_or(|d| d.is_chain == equal);
    let outcome = if !satisfied {
        Outcome::Violated
    } else if equal {
        Outcome::Equality
    } else {
        Outcome::Strict
    };
    Ok(RelationCheck {
        theorem,
        name,
        lhs,
        rhs,
        relation,
        holds: satisfied && consistent,
        slack,
        outcome,
        equality_diagnosis,
    })
}

/// A relation between two numbers with no equality condition attached.
pub(crate) fn plain_check(
    theorem: &'static str,
    name: String,
    lhs: Nats,
    rhs: Nats,
    relation: Relation,
    tol: f64,
) -> RelationCheck {
    let diff = lhs.0 - rhs.0;
    let slack = match relation {
        Relation::Le => -diff,
        Relation::Ge => diff,
        Relation::Eq => -diff.abs(),
    };
    let outcome = if slack < -tol {
        Outcome::Violated
    } else if diff.abs() <= tol {
        Outcome::Equality
    } else {
        Outcome::Strict
    };
    RelationCheck {
        theorem,
        name,
        lhs,
        rhs,
        relation,
        holds: slack >= -tol,
        slack,
        outcome,
        equality_diagnosis: None,
    }
}

fn mi(joint: &JointTable, x: &VarSet, y: &VarSet) -> Result<Nats> {
    mutual_information(joint, x, y)
}

/// Number of dependents, requiring the table to hold exactly `L, M_1..M_n`.
pub fn dependent_count(joint: &JointTable) -> Result<usize> {
    let vars = joint.var_set();
    let n = vars.len().saturating_sub(1);
    if n == 0 || vars != VarSet::head_and_deps(1, n) {
        return Err(Error::InvalidJoint(format!(
            "expected variables L, M1..Mn, found {vars}"
        )));
    }
    Ok(n)
}

pub fn verify_remainder_theorem(model: &FactoredModel, tol: f64) -> Result<Vec<RelationCheck>> {
    remainder_checks(&build_joint(model)?, tol)
}

/// Remainder predictability at both ends:
/// `I(L; M_1^n) >= I(M_1; L, M_2^n)` and `I(M_1^n; L) >= I(L, M_1^{n-1}; M_n)`.
pub fn remainder_checks(joint: &JointTable, tol: f64) -> Result<Vec<RelationCheck>> {
    let n = dependent_count(joint)?;
    let head = VarSet::head();
    let all_deps = VarSet::deps(1, n);
    let rel = if n == 1 { Relation::Eq } else { Relation::Ge };

    let first = relation_check(
        joint,
        "remainder",
        "k=1".into(),
        mi(joint, &head, &all_deps)?,
        mi(joint, &VarSet::dep(1), &VarSet::head_and_deps(2, n))?,
        rel,
        tol,
        (n > 1).then(|| Chain {
            x: head.clone(),
            y: VarSet::dep(1),
            z: VarSet::deps(2, n),
        }),
    )?;
    let last = relation_check(
        joint,
        "remainder",
        "k=n".into(),
        mi(joint, &all_deps, &head)?,
        mi(joint, &VarSet::head_and_deps(1, n - 1), &VarSet::dep(n))?,
        rel,
        tol,
        (n > 1).then(|| Chain {
            x: VarSet::deps(1, n - 1),
            y: VarSet::dep(n),
            z: head.clone(),
        }),
    )?;
    Ok(vec![first, last])
}

pub fn verify_pending_theorem(model: &FactoredModel, k: usize, j: usize, tol: f64) -> Result<Vec<RelationCheck>> {
    pending_checks(&build_joint(model)?, k, j, tol)
}

/// "A dependent cannot be more predictable than the head", head produced:
/// `I(L, M_1^{k-1}; M_j) <= I(M_1^{k-1}, M_j; L)`. For `j = k` this is the
/// literal `I(M_1^k; L)` on the right; for `j > k` the pending target `M_j`
/// takes the place of `M_k` so both sides involve the same variables.
fn head_dominance(joint: &JointTable, k: usize, j: usize, tol: f64) -> Result<RelationCheck> {
    let before = VarSet::deps(1, k - 1);
    let target = VarSet::dep(j);
    let lhs = mi(joint, &before.clone().with(VariableId::Head), &target)?;
    let rhs = mi(joint, &before.clone().with(VariableId::Dep(j)), &VarSet::head())?;
    let (rel, cond) = if k == 1 {
        (Relation::Eq, None)
    } else {
        (Relation::Le, chain(VarSet::head(), target, before))
    };
    relation_check(joint, "pending", format!("part1[k={k},j={j}]"), lhs, rhs, rel, tol, cond)
}

/// Pending-element relations for `k` produced elements and target `M_j`.
/// Part 1 needs `k <= j <= n`; parts 2 and 3 need `k < j <= n` and are left
/// out when `j = k`.
pub fn pending_checks(joint: &JointTable, k: usize, j: usize, tol: f64) -> Result<Vec<RelationCheck>> {
    let n = dependent_count(joint)?;
    if !(1..=n).contains(&k) {
        return Err(Error::Range(format!("k={k} outside [1, n={n}]")));
    }
    if !(k..=n).contains(&j) {
        return Err(Error::Range(format!(
            "j={j} outside [k, n] = [{k}, {n}] (parts 2 and 3 need k < j <= n)"
        )));
    }
    let mut checks = vec![head_dominance(joint, k, j, tol)?];
    if j > k {
        let produced = VarSet::deps(1, k);
        let target = VarSet::dep(j);
        checks.push(relation_check(
            joint,
            "pending",
            format!("part2[k={k},j={j}]"),
            mi(joint, &produced, &target)?,
            mi(joint, &produced, &VarSet::head())?,
            Relation::Le,
            tol,
            chain(produced.clone(), target.clone(), VarSet::head()),
        )?);
        checks.push(relation_check(
            joint,
            "pending",
            format!("part3[k={k},j={j}]"),
            mi(joint, &VarSet::head_and_deps(1, k - 1), &target)?,
            mi(joint, &produced, &target)?,
            Relation::Ge,
            tol,
            chain(VarSet::head(), produced, target),
        )?);
    }
    Ok(checks)
}

pub fn verify_irrelevance(model: &FactoredModel, k: usize, j: usize, tol: f64) -> Result<RelationCheck> {
    irrelevance_check(&build_joint(model)?, k, j, tol)
}

/// Once the head is known, produced dependents add nothing:
/// `I(L, M_1^k; M_j) = I(L; M_j)` for `1 <= k < j <= n`.
pub fn irrelevance_check(joint: &JointTable, k: usize, j: usize, tol: f64) -> Result<RelationCheck> {
    let n = dependent_count(joint)?;
    if !(1 <= k && k < j && j <= n) {
        return Err(Error::Range(format!("need 1 <= k < j <= n, got k={k}, j={j}, n={n}")));
    }
    let target = VarSet::dep(j);
    relation_check(
        joint,
        "irrelevance",
        format!("k={k},j={j}"),
        mi(joint, &VarSet::head_and_deps(1, k), &target)?,
        mi(joint, &VarSet::head(), &target)?,
        Relation::Eq,
        tol,
        chain(VarSet::deps(1, k), VarSet::head(), target),
    )
}

/// `I(M_i^j; M_i'^j' | L) = 0` for every pair of disjoint dependent intervals.
pub fn conditional_independence_checks(joint: &JointTable, tol: f64) -> Result<Vec<RelationCheck>> {
    let n = dependent_count(joint)?;
    let mut checks = Vec::new();
    for i in 1..=n {
        for j in i..=n {
            for i2 in j + 1..=n {
                for j2 in i2..=n {
                    let (a, b) = (VarSet::deps(i, j), VarSet::deps(i2, j2));
                    let cmi = conditional_mutual_information(joint, &a, &b, &VarSet::head())?;
                    checks.push(relation_check(
                        joint,
                        "conditional_independence",
                        format!("M{i}..M{j}|M{i2}..M{j2}"),
                        cmi,
                        Nats::ZERO,
                        Relation::Eq,
                        tol,
                        chain(a, VarSet::head(), b),
                    )?);
                }
            }
        }
    }
    Ok(checks)
}

/// The six predictability values around stage `k`. Rows: predicting the
/// head, predicting a dependent after the head, predicting a dependent before
/// the head. Columns: `k` and `k + 1` elements produced.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LatticeCells {
    /// `I(M_1^k; L)`
    pub head_k: Nats,
    /// `I(M_1^{k+1}; L)`
    pub head_k1: Nats,
    /// `I(L, M_1^{k-1}; M_k)`
    pub after_head_k: Nats,
    /// `I(L, M_1^k; M_{k+1})`
    pub after_head_k1: Nats,
    /// `I(M_1^k; M_{k+1})`
    pub before_head_k: Nats,
    /// `I(M_1^{k+1}; M_{k+2})`, absent when `k = n - 1`
    pub before_head_k1: Option<Nats>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LatticeReport {
    pub k: usize,
    pub cells: LatticeCells,
    /// Relations (1) through (7); `None` marks a relation that does not apply.
    pub relations: [Option<RelationCheck>; 7],
}

impl LatticeReport {
    pub fn checks(&self) -> impl Iterator<Item = &RelationCheck> {
        self.relations.iter().flatten()
    }
}

pub fn lattice_report(model: &FactoredModel, k: usize, tol: f64) -> Result<LatticeReport> {
    lattice_report_joint(&build_joint(model)?, k, tol)
}

/// Relations between the lattice cells. Vertical relations (2), (3) compare
/// the head with a dependent over the same variables. The horizontal and
/// lower relations (4)-(7) keep the predicted dependent fixed while one more
/// element is produced, which is the form in which they hold for
/// non-exchangeable dependents; on exchangeable models the compared values
/// coincide with the cells.
pub fn lattice_report_joint(joint: &JointTable, k: usize, tol: f64) -> Result<LatticeReport> {
    let n = dependent_count(joint)?;
    if !(1 <= k && k < n) {
        return Err(Error::Range(format!("lattice needs 1 <= k < n, got k={k}, n={n}")));
    }
    let head = VarSet::head();
    let next = VarSet::dep(k + 1);
    let has_far = k + 2 <= n;

    let cells = LatticeCells {
        head_k: mi(joint, &VarSet::deps(1, k), &head)?,
        head_k1: mi(joint, &VarSet::deps(1, k + 1), &head)?,
        after_head_k: mi(joint, &VarSet::head_and_deps(1, k - 1), &VarSet::dep(k))?,
        after_head_k1: mi(joint, &VarSet::head_and_deps(1, k), &next)?,
        before_head_k: mi(joint, &VarSet::deps(1, k), &next)?,
        before_head_k1: if has_far {
            Some(mi(joint, &VarSet::deps(1, k + 1), &VarSet::dep(k + 2))?)
        } else {
            None
        },
    };
    let name = |r: usize| format!("({r})[k={k}]");
    let with_label = |mut c: RelationCheck, r: usize| {
        c.theorem = "postponement";
        c.name = name(r);
        c
    };

    let r1 = relation_check(
        joint,
        "postponement",
        name(1),
        cells.head_k,
        cells.head_k1,
        Relation::Le,
        tol,
        chain(next.clone(), VarSet::deps(1, k), head.clone()),
    )?;
    let r2 = with_label(head_dominance(joint, k, k, tol)?, 2);
    let r3 = with_label(head_dominance(joint, k + 1, k + 1, tol)?, 3);

    // predicting M_{k+1} with the head known, before and after M_k appears
    let after_head_shifted = mi(joint, &VarSet::head_and_deps(1, k - 1), &next)?;
    let r4 = relation_check(
        joint,
        "postponement",
        name(4),
        after_head_shifted,
        cells.after_head_k1,
        Relation::Eq,
        tol,
        chain(VarSet::dep(k), VarSet::head_and_deps(1, k - 1), next.clone()),
    )?;
    let r5 = relation_check(
        joint,
        "postponement",
        name(5),
        cells.before_head_k,
        after_head_shifted,
        Relation::Le,
        tol,
        chain(head.clone(), VarSet::deps(1, k), next.clone()),
    )?;

    let (r6, r7) = if let Some(far_cell) = cells.before_head_k1 {
        let far = VarSet::dep(k + 2);
        let r6 = relation_check(
            joint,
            "postponement",
            name(6),
            far_cell,
            mi(joint, &VarSet::head_and_deps(1, k), &far)?,
            Relation::Le,
            tol,
            chain(head.clone(), VarSet::deps(1, k + 1), far.clone()),
        )?;
        let r7 = relation_check(
            joint,
            "postponement",
            name(7),
            mi(joint, &VarSet::deps(1, k), &far)?,
            far_cell,
            Relation::Le,
            tol,
            chain(next.clone(), VarSet::deps(1, k), far),
        )?;
        (Some(r6), Some(r7))
    } else {
        (None, None)
    };

    Ok(LatticeReport {
        k,
        cells,
        relations: [Some(r1), Some(r2), Some(r3), Some(r4), Some(r5), r6, r7],
    })
}

/// Every relation check for one joint: remainder, pending-element (all valid
/// `k, j`), irrelevance, conditional independence and the lattice (all `k`).
pub fn theorem_checks(joint: &JointTable, tol: f64) -> Result<Vec<RelationCheck>> {
    let n = dependent_count(joint)?;
    let mut checks = remainder_checks(joint, tol)?;
    for k in 1..=n {
        for j in k..=n {
            checks.extend(pending_checks(joint, k, j, tol)?);
        }
    }
    for k in 1..n {
        for j in k + 1..=n {
            checks.push(irrelevance_check(joint, k, j, tol)?);
        }
    }
    checks.extend(conditional_independence_checks(joint, tol)?);
    for k in 1..n {
        checks.extend(lattice_report_joint(joint, k, tol)?.relations.into_iter().flatten());
    }
    Ok(checks)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Objective {
    /// `I(dependents produced before the head; L)`.
    HeadPredictability,
    /// Aggregate over pending dependents of `I(first element; M_j)`.
    DependentPredictability,
    /// `I(produced; pending)` after `k` elements.
    RemainderAtK(usize),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Aggregate {
    #[default]
    Min,
    Mean,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchOptions {
    pub aggregate: Aggregate,
    /// Dependent production order; identity when `None`.
    pub dependent_order: Option<Vec<usize>>,
    /// Scores within this distance of the best count as tied.
    pub tol: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            aggregate: Aggregate::Min,
            dependent_order: None,
            tol: crate::info::DEFAULT_TOL,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StageRow {
    pub k: usize,
    pub produced: VarSet,
    pub remainder: Nats,
    /// `I(produced; {e})` for each pending element `e`, in sequence order.
    pub elements: Vec<(VariableId, Nats)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProfileReport {
    pub placement: Placement,
    /// Stages `k = 0..=n`; the fully produced stage has nothing pending.
    pub stages: Vec<StageRow>,
}

pub fn profile(joint: &JointTable, placement: &Placement) -> Result<ProfileReport> {
    let n = placement.n();
    let seq = placement.sequence();
    let mut stages = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let view = stage_view(placement, k)?;
        let pending_elems = &seq[k..];
        let (remainder, elements) = if k == 0 {
            (Nats::ZERO, pending_elems.iter().map(|&e| (e, Nats::ZERO)).collect())
        } else {
            let elements = pending_elems
                .iter()
                .map(|&e| Ok((e, mi(joint, &view.produced, &VarSet::from_iter([e]))?)))
                .collect::<Result<Vec<_>>>()?;
            (remainder_predictability(joint, &view)?, elements)
        };
        stages.push(StageRow {
            k,
            produced: view.produced,
            remainder,
            elements,
        });
    }
    Ok(ProfileReport {
        placement: placement.clone(),
        stages,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct HeadSearch {
    pub objective: Objective,
    /// `(head position, score)` for every position `1..=n+1`.
    pub scores: Vec<(usize, Nats)>,
    pub argmax: BTreeSet<usize>,
    pub profiles: Vec<ProfileReport>,
}

fn score(profile: &ProfileReport, objective: Objective, aggregate: Aggregate) -> Result<Nats> {
    let p = profile.placement.head_position();
    match objective {
        Objective::HeadPredictability => {
            let row = &profile.stages[p - 1];
            Ok(row
                .elements
                .iter()
                .find(|(v, _)| v.is_head())
                .map(|(_, x)| *x)
                .expect("head pending before its position"))
        }
        Objective::DependentPredictability => {
            let values: Vec<f64> = profile.stages[1]
                .elements
                .iter()
                .filter(|(v, _)| !v.is_head())
                .map(|(_, x)| x.0)
                .collect();
            // nothing pending to predict scores zero
            if values.is_empty() {
                return Ok(Nats::ZERO);
            }
            Ok(Nats(match aggregate {
                Aggregate::Min => values.iter().copied().fold(f64::INFINITY, f64::min),
                Aggregate::Mean => values.iter().sum::<f64>() / values.len() as f64,
            }))
        }
        Objective::RemainderAtK(k) => Ok(profile.stages[k].remainder),
    }
}

pub fn optimal_head_position(
    model: &FactoredModel,
    objective: Objective,
    options: &SearchOptions,
) -> Result<HeadSearch> {
    optimal_head_position_joint(&build_joint(model)?, objective, options)
}

/// Scores every head position `1..=n+1` with the dependent order held fixed
/// and returns all positions within `tol` of the best score.
pub fn optimal_head_position_joint(
    joint: &JointTable,
    objective: Objective,
    options: &SearchOptions,
) -> Result<HeadSearch> {
    let n = dependent_count(joint)?;
    if let Objective::RemainderAtK(k) = objective {
        if !(1..=n).contains(&k) {
            return Err(Error::Range(format!("remainder stage k={k} outside [1, n={n}]")));
        }
    }
    let order = options.dependent_order.clone().unwrap_or_else(|| (1..=n).collect());
    let mut profiles = Vec::with_capacity(n + 1);
    let mut scores = Vec::with_capacity(n + 1);
    for p in 1..=n + 1 {
        let placement = Placement::new(n, p, order.clone())?;
        let prof = profile(joint, &placement)?;
        scores.push((p, score(&prof, objective, options.aggregate)?));
        profiles.push(prof);
    }
    let best = scores.iter().map(|(_, s)| s.0).fold(f64::NEG_INFINITY, f64::max);
    let argmax = scores
        .iter()
        .filter(|(_, s)| s.0 >= best - options.tol)
        .map(|(p, _)| *p)
        .collect();
    Ok(HeadSearch {
        objective,
        scores,
        argmax,
        profiles,
    })
}
