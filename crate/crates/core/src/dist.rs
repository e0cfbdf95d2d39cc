//! Discrete distributions over one head and `n` dependents.
//!
//! A [`FactoredModel`] stores a head prior and one conditional table per
//! dependent slot, so dependents are conditionally independent given the head
//! by construction. A [`JointTable`] is the dense expansion used by every
//! information query. Tables always keep their variables in canonical order
//! (head first, then `Dep(1)..Dep(n)`), so two tables over the same variables
//! compare entrywise.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row and prior sums must land within this distance of 1.
pub const MODEL_SUM_TOL: f64 = 1e-12;
/// Joint tables must sum to 1 within this distance.
pub const JOINT_SUM_TOL: f64 = 1e-9;
/// Default cap on the number of cells in a dense joint table.
pub const DEFAULT_MAX_CELLS: usize = 10_000_000;

/// One sequence variable: the head `L` or a dependent `M_i` (1-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum VariableId {
    Head,
    Dep(usize),
}

impl VariableId {
    pub fn is_head(self) -> bool {
        matches!(self, VariableId::Head)
    }
}

impl fmt::Display for VariableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VariableId::Head => write!(f, "L"),
            VariableId::Dep(i) => write!(f, "M{i}"),
        }
    }
}

/// A set of sequence variables, always kept sorted in canonical order.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarSet(Vec<VariableId>);

impl VarSet {
    pub fn empty() -> Self {
        VarSet(Vec::new())
    }

    pub fn head() -> Self {
        VarSet(vec![VariableId::Head])
    }

    pub fn dep(i: usize) -> Self {
        VarSet(vec![VariableId::Dep(i)])
    }

    /// Dependents `first..=last`; empty when `first > last`.
    pub fn deps(first: usize, last: usize) -> Self {
        VarSet((first..=last).map(VariableId::Dep).collect())
    }

    /// The head together with dependents `first..=last`.
    pub fn head_and_deps(first: usize, last: usize) -> Self {
        let mut set = Self::deps(first, last);
        set.insert(VariableId::Head);
        set
    }

    pub fn insert(&mut self, var: VariableId) {
        if let Err(pos) = self.0.binary_search(&var) {
            self.0.insert(pos, var);
        }
    }

    pub fn with(mut self, var: VariableId) -> Self {
        self.insert(var);
        self
    }

    pub fn union(&self, other: &VarSet) -> VarSet {
        self.iter().chain(other.iter()).collect()
    }

    pub fn difference(&self, other: &VarSet) -> VarSet {
        self.iter().filter(|v| !other.contains(*v)).collect()
    }

    pub fn contains(&self, var: VariableId) -> bool {
        self.0.binary_search(&var).is_ok()
    }

    /// First shared member, if any.
    pub fn overlap(&self, other: &VarSet) -> Option<VariableId> {
        self.iter().find(|v| other.contains(*v))
    }

    pub fn is_disjoint(&self, other: &VarSet) -> bool {
        self.overlap(other).is_none()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = VariableId> + '_ {
        self.0.iter().copied()
    }

    pub fn members(&self) -> &[VariableId] {
        &self.0
    }
}

impl FromIterator<VariableId> for VarSet {
    fn from_iter<I: IntoIterator<Item = VariableId>>(iter: I) -> Self {
        let set: BTreeSet<VariableId> = iter.into_iter().collect();
        VarSet(set.into_iter().collect())
    }
}

impl fmt::Display for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet {
    pub size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl Alphabet {
    pub fn new(size: usize) -> Self {
        Alphabet { size, labels: None }
    }

    pub fn with_labels(labels: Vec<String>) -> Self {
        Alphabet {
            size: labels.len(),
            labels: Some(labels),
        }
    }

    pub fn validate(&self, what: &str) -> Result<()> {
        if self.size == 0 {
            return Err(Error::InvalidModel(format!("{what}: alphabet size must be at least 1")));
        }
        if let Some(labels) = &self.labels {
            if labels.len() != self.size {
                return Err(Error::InvalidModel(format!(
                    "{what}: {} labels for alphabet of size {}",
                    labels.len(),
                    self.size
                )));
            }
            let unique: BTreeSet<&String> = labels.iter().collect();
            if unique.len() != labels.len() {
                return Err(Error::InvalidModel(format!("{what}: labels are not unique")));
            }
        }
        Ok(())
    }

    pub fn label(&self, value: usize) -> String {
        match &self.labels {
            Some(labels) => labels[value].clone(),
            None => value.to_string(),
        }
    }
}

/// Head prior plus one conditional table per dependent slot:
/// `cond_tables[i][l][m] = p(M_{i+1} = m | L = l)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FactoredModel {
    head_alphabet: Alphabet,
    dep_alphabets: Vec<Alphabet>,
    head_prior: Vec<f64>,
    cond_tables: Vec<Vec<Vec<f64>>>,
}

impl FactoredModel {
    /// Builds a model, rejecting any prior or row that does not sum to 1
    /// within [`MODEL_SUM_TOL`].
    pub fn new(
        head_alphabet: Alphabet,
        dep_alphabets: Vec<Alphabet>,
        head_prior: Vec<f64>,
        cond_tables: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        let model = FactoredModel {
            head_alphabet,
            dep_alphabets,
            head_prior,
            cond_tables,
        };
        model.validate()?;
        Ok(model)
    }

    /// Like [`FactoredModel::new`] but divides the prior and every row by its
    /// sum first. Entries must still be finite and nonnegative.
    pub fn new_renormalized(
        head_alphabet: Alphabet,
        dep_alphabets: Vec<Alphabet>,
        mut head_prior: Vec<f64>,
        mut cond_tables: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        renormalize(&mut head_prior, "head_prior")?;
        for (i, table) in cond_tables.iter_mut().enumerate() {
            for (l, row) in table.iter_mut().enumerate() {
                renormalize(row, &format!("cond_tables[{i}][{l}]"))?;
            }
        }
        Self::new(head_alphabet, dep_alphabets, head_prior, cond_tables)
    }

    fn validate(&self) -> Result<()> {
        if self.dep_alphabets.is_empty() {
            return Err(Error::InvalidModel("model needs at least one dependent (n >= 1)".into()));
        }
        self.head_alphabet.validate("head_alphabet")?;
        for (i, a) in self.dep_alphabets.iter().enumerate() {
            a.validate(&format!("dep_alphabets[{i}]"))?;
        }
        check_distribution(&self.head_prior, self.head_alphabet.size, "head_prior")?;
        if self.cond_tables.len() != self.dep_alphabets.len() {
            return Err(Error::InvalidModel(format!(
                "{} conditional tables for {} dependents",
                self.cond_tables.len(),
                self.dep_alphabets.len()
            )));
        }
        for (i, table) in self.cond_tables.iter().enumerate() {
            if table.len() != self.head_alphabet.size {
                return Err(Error::InvalidModel(format!(
                    "cond_tables[{i}] has {} rows, expected one per head value ({})",
                    table.len(),
                    self.head_alphabet.size
                )));
            }
            for (l, row) in table.iter().enumerate() {
                check_distribution(row, self.dep_alphabets[i].size, &format!("cond_tables[{i}][{l}]"))?;
            }
        }
        Ok(())
    }

    /// Number of dependent slots.
    pub fn n(&self) -> usize {
        self.dep_alphabets.len()
    }

    pub fn head_alphabet(&self) -> &Alphabet {
        &self.head_alphabet
    }

    pub fn dep_alphabets(&self) -> &[Alphabet] {
        &self.dep_alphabets
    }

    pub fn head_prior(&self) -> &[f64] {
        &self.head_prior
    }

    pub fn cond_tables(&self) -> &[Vec<Vec<f64>>] {
        &self.cond_tables
    }

    /// `p(M_slot = m | L = l)` with a 1-based slot.
    pub fn cond(&self, slot: usize, l: usize, m: usize) -> f64 {
        self.cond_tables[slot - 1][l][m]
    }

    pub fn alphabet(&self, var: VariableId) -> &Alphabet {
        match var {
            VariableId::Head => &self.head_alphabet,
            VariableId::Dep(i) => &self.dep_alphabets[i - 1],
        }
    }

    /// Canonically ordered variables with their alphabets.
    pub fn variables(&self) -> Vec<(VariableId, Alphabet)> {
        std::iter::once((VariableId::Head, self.head_alphabet.clone()))
            .chain(
                self.dep_alphabets
                    .iter()
                    .enumerate()
                    .map(|(i, a)| (VariableId::Dep(i + 1), a.clone())),
            )
            .collect()
    }

    pub fn joint_cells(&self) -> u128 {
        self.variables().iter().map(|(_, a)| a.size as u128).product()
    }
}

fn check_distribution(values: &[f64], size: usize, what: &str) -> Result<()> {
    if values.len() != size {
        return Err(Error::InvalidModel(format!(
            "{what} has {} entries, expected {size}",
            values.len()
        )));
    }
    for (idx, &p) in values.iter().enumerate() {
        if !p.is_finite() || !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidModel(format!("{what}[{idx}] = {p} is not a probability")));
        }
    }
    let sum: f64 = values.iter().sum();
    if (sum - 1.0).abs() > MODEL_SUM_TOL {
        return Err(Error::InvalidModel(format!("{what} sums to {sum}, not 1")));
    }
    Ok(())
}

fn renormalize(values: &mut [f64], what: &str) -> Result<()> {
    if let Some((idx, p)) = values.iter().enumerate().find(|(_, p)| !p.is_finite() || **p < 0.0) {
        return Err(Error::InvalidModel(format!("{what}[{idx}] = {p} is negative or not finite")));
    }
    let sum: f64 = values.iter().sum();
    if sum <= 0.0 {
        return Err(Error::InvalidModel(format!("{what} has zero total mass")));
    }
    values.iter_mut().for_each(|p| *p /= sum);
    Ok(())
}

/// Dense joint distribution, row-major in canonical variable order (the last
/// variable varies fastest).
#[derive(Clone, Debug, PartialEq)]
pub struct JointTable {
    variables: Vec<(VariableId, Alphabet)>,
    probabilities: Vec<f64>,
}

impl JointTable {
    pub fn new(variables: Vec<(VariableId, Alphabet)>, probabilities: Vec<f64>) -> Result<Self> {
        Self::check_layout(&variables, probabilities.len())?;
        if let Some((idx, p)) = probabilities
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < 0.0)
        {
            return Err(Error::InvalidJoint(format!("cell {idx} = {p} is negative or not finite")));
        }
        let sum: f64 = probabilities.iter().sum();
        if (sum - 1.0).abs() > JOINT_SUM_TOL {
            return Err(Error::InvalidJoint(format!("probabilities sum to {sum}, not 1")));
        }
        Ok(JointTable {
            variables,
            probabilities,
        })
    }

    /// Builds a table from nonnegative weights, dividing by their total.
    pub fn from_weights(variables: Vec<(VariableId, Alphabet)>, mut weights: Vec<f64>) -> Result<Self> {
        Self::check_layout(&variables, weights.len())?;
        renormalize(&mut weights, "weights").map_err(|e| Error::InvalidJoint(e.to_string()))?;
        Self::new(variables, weights)
    }

    fn check_layout(variables: &[(VariableId, Alphabet)], len: usize) -> Result<()> {
        for w in variables.windows(2) {
            if w[0].0 >= w[1].0 {
                return Err(Error::InvalidJoint(format!(
                    "variables must be distinct and in canonical order, found {} before {}",
                    w[0].0, w[1].0
                )));
            }
        }
        for (v, a) in variables {
            if let VariableId::Dep(0) = v {
                return Err(Error::InvalidJoint("dependent indices start at 1".into()));
            }
            a.validate(&v.to_string()).map_err(|e| Error::InvalidJoint(e.to_string()))?;
        }
        let cells: usize = variables.iter().map(|(_, a)| a.size).product();
        if cells != len {
            return Err(Error::InvalidJoint(format!(
                "{len} probabilities for a table with {cells} cells"
            )));
        }
        Ok(())
    }

    pub fn variables(&self) -> &[(VariableId, Alphabet)] {
        &self.variables
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn var_set(&self) -> VarSet {
        self.variables.iter().map(|(v, _)| *v).collect()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.variables.iter().map(|(_, a)| a.size).collect()
    }

    pub fn position(&self, var: VariableId) -> Option<usize> {
        self.variables.iter().position(|(v, _)| *v == var)
    }

    pub fn alphabet(&self, var: VariableId) -> Option<&Alphabet> {
        self.position(var).map(|p| &self.variables[p].1)
    }

    /// Dependent variables present in the table, in order.
    pub fn dependents(&self) -> Vec<VariableId> {
        self.variables.iter().map(|(v, _)| *v).filter(|v| !v.is_head()).collect()
    }

    /// Probability of one full assignment, given in canonical order.
    pub fn get(&self, values: &[usize]) -> f64 {
        assert_eq!(values.len(), self.variables.len(), "index arity mismatch");
        let mut flat = 0;
        for (&v, (_, a)) in values.iter().zip(&self.variables) {
            assert!(v < a.size, "value out of range");
            flat = flat * a.size + v;
        }
        self.probabilities[flat]
    }

    /// Decodes a flat cell index into one value per variable.
    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut values = vec![0; self.variables.len()];
        for (slot, (_, a)) in values.iter_mut().zip(&self.variables).rev() {
            *slot = flat % a.size;
            flat /= a.size;
        }
        values
    }

    fn positions_of(&self, set: &VarSet) -> Result<Vec<usize>> {
        set.iter()
            .map(|v| self.position(v).ok_or(Error::UnknownVariable(v)))
            .collect()
    }
}

/// For every cell of a table with `shape`, the flat index of the same cell
/// projected onto the axes in `keep` (which must be increasing).
pub(crate) fn projection(shape: &[usize], keep: &[usize]) -> Vec<usize> {
    let total: usize = shape.iter().product();
    // stride of each full axis inside the projected table, 0 for dropped axes
    let mut strides = vec![0usize; shape.len()];
    let mut s = 1;
    for &axis in keep.iter().rev() {
        strides[axis] = s;
        s *= shape[axis];
    }
    let mut out = Vec::with_capacity(total);
    let mut digits = vec![0usize; shape.len()];
    let mut current = 0usize;
    for _ in 0..total {
        out.push(current);
        for axis in (0..shape.len()).rev() {
            digits[axis] += 1;
            current += strides[axis];
            if digits[axis] < shape[axis] {
                break;
            }
            current -= strides[axis] * shape[axis];
            digits[axis] = 0;
        }
    }
    out
}

pub fn build_joint(model: &FactoredModel) -> Result<JointTable> {
    build_joint_limited(model, DEFAULT_MAX_CELLS)
}

/// Expands a factored model into its dense joint:
/// `p(l, m_1..m_n) = p(l) * prod_i p(m_i | l)`.
pub fn build_joint_limited(model: &FactoredModel, max_cells: usize) -> Result<JointTable> {
    model.validate()?;
    let cells = model.joint_cells();
    if cells > max_cells as u128 {
        return Err(Error::TooLarge {
            cells,
            limit: max_cells,
        });
    }
    // grow the table one dependent axis at a time
    let mut probs: Vec<f64> = model.head_prior.clone();
    let mut block = 1usize;
    for table in &model.cond_tables {
        let size = table[0].len();
        let mut next = Vec::with_capacity(probs.len() * size);
        for (idx, &p) in probs.iter().enumerate() {
            let l = idx / block;
            for &c in &table[l] {
                next.push(p * c);
            }
        }
        block *= size;
        probs = next;
    }
    JointTable::new(model.variables(), probs)
}

/// Sums out every variable not in `keep`. Variable order follows canonical
/// order, which is also the order of `keep`.
pub fn marginal(joint: &JointTable, keep: &VarSet) -> Result<JointTable> {
    if keep.is_empty() {
        return Err(Error::EmptySet("marginal keep set"));
    }
    let positions = joint.positions_of(keep)?;
    let shape = joint.shape();
    let proj = projection(&shape, &positions);
    let size: usize = positions.iter().map(|&p| shape[p]).product();
    let mut probs = vec![0.0; size];
    for (&p, &target) in joint.probabilities.iter().zip(&proj) {
        probs[target] += p;
    }
    let variables = positions.iter().map(|&p| joint.variables[p].clone()).collect();
    Ok(JointTable {
        variables,
        probabilities: probs,
    })
}

/// The slice `p(rest | on = value)`, renormalized.
pub fn condition(joint: &JointTable, on: VariableId, value: usize) -> Result<JointTable> {
    let pos = joint.position(on).ok_or(Error::UnknownVariable(on))?;
    let size = joint.variables[pos].1.size;
    if value >= size {
        return Err(Error::ValueOutOfRange { var: on, value, size });
    }
    let inner: usize = joint.variables[pos + 1..].iter().map(|(_, a)| a.size).product();
    let outer = joint.probabilities.len() / (inner * size);
    let mut slice = Vec::with_capacity(outer * inner);
    for o in 0..outer {
        let start = (o * size + value) * inner;
        slice.extend_from_slice(&joint.probabilities[start..start + inner]);
    }
    let mass: f64 = slice.iter().sum();
    if mass <= 0.0 {
        return Err(Error::ZeroProbability { var: on, value });
    }
    slice.iter_mut().for_each(|p| *p /= mass);
    let variables = joint
        .variables
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != pos)
        .map(|(_, v)| v.clone())
        .collect();
    Ok(JointTable {
        variables,
        probabilities: slice,
    })
}

/// Where the largest factorization violation was found.
#[derive(Clone, Debug, PartialEq)]
pub enum Witness {
    /// `|p(a, b | l) - p(a | l) p(b | l)|` for dependents `first`, `second`.
    Pair {
        head_value: usize,
        first: VariableId,
        second: VariableId,
        first_value: usize,
        second_value: usize,
    },
    /// `|p(m_1..m_n | l) - prod_i p(m_i | l)|` at one full assignment.
    Product { head_value: usize, values: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct CondIndepReport {
    pub holds: bool,
    pub max_violation: f64,
    pub witness: Option<Witness>,
}

/// Checks that dependents are conditionally independent given the head, both
/// pairwise and as a full product, over every head value with positive mass.
pub fn check_factorization(joint: &JointTable, tol: f64) -> Result<CondIndepReport> {
    let head_pos = joint.position(VariableId::Head).ok_or(Error::UnknownVariable(VariableId::Head))?;
    let head_size = joint.variables[head_pos].1.size;
    let deps = joint.dependents();
    let mut max_violation = 0.0f64;
    let mut witness = None;

    for l in 0..head_size {
        let slice = match condition(joint, VariableId::Head, l) {
            Ok(s) => s,
            Err(Error::ZeroProbability { .. }) => continue,
            Err(e) => return Err(e),
        };
        if deps.len() < 2 {
            continue;
        }
        let singles: Vec<Vec<f64>> = deps
            .iter()
            .map(|&d| marginal(&slice, &VarSet::from_iter([d])).map(|t| t.probabilities))
            .collect::<Result<_>>()?;

        for i in 0..deps.len() {
            for j in i + 1..deps.len() {
                let pair = marginal(&slice, &VarSet::from_iter([deps[i], deps[j]]))?;
                let width = singles[j].len();
                for (idx, &p) in pair.probabilities.iter().enumerate() {
                    let (a, b) = (idx / width, idx % width);
                    let v = (p - singles[i][a] * singles[j][b]).abs();
                    if v > max_violation {
                        max_violation = v;
                        witness = Some(Witness::Pair {
                            head_value: l,
                            first: deps[i],
                            second: deps[j],
                            first_value: a,
                            second_value: b,
                        });
                    }
                }
            }
        }

        for (idx, &p) in slice.probabilities.iter().enumerate() {
            let values = slice.unflatten(idx);
            let product: f64 = values.iter().zip(&singles).map(|(&v, s)| s[v]).product();
            let v = (p - product).abs();
            if v > max_violation {
                max_violation = v;
                witness = Some(Witness::Product { head_value: l, values });
            }
        }
    }

    Ok(CondIndepReport {
        holds: max_violation <= tol,
        max_violation,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modelgen::{copy_model, correlated_pair_counterexample, independent_model};

    fn assert_table(table: &JointTable, expected: &[f64]) {
        assert_eq!(table.probabilities().len(), expected.len());
        for (a, b) in table.probabilities().iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{:?} vs {:?}", table.probabilities(), expected);
        }
    }

    // explicit triple loop, independent of the axis-growing expansion
    fn brute_joint_n2(model: &FactoredModel) -> Vec<f64> {
        let (h, a, b) = (
            model.head_alphabet().size,
            model.dep_alphabets()[0].size,
            model.dep_alphabets()[1].size,
        );
        let mut out = Vec::new();
        for l in 0..h {
            for x in 0..a {
                for y in 0..b {
                    out.push(model.head_prior()[l] * model.cond(1, l, x) * model.cond(2, l, y));
                }
            }
        }
        out
    }

    #[test]
    fn independent_binary_joint_is_uniform() {
        let joint = build_joint(&independent_model(2, 2)).unwrap();
        assert_table(&joint, &[0.125; 8]);
    }

    #[test]
    fn noiseless_copy_joint_is_two_point() {
        let joint = build_joint(&copy_model(2, 2, 0.0).unwrap()).unwrap();
        let mut expected = [0.0; 8];
        expected[0] = 0.5;
        expected[7] = 0.5;
        assert_table(&joint, &expected);
    }

    #[test]
    fn noisy_copy_joint_matches_hand_product() {
        let joint = build_joint(&copy_model(1, 2, 0.1).unwrap()).unwrap();
        assert_table(&joint, &[0.45, 0.05, 0.05, 0.45]);
    }

    #[test]
    fn expansion_matches_brute_force() {
        let model = FactoredModel::new(
            Alphabet::new(2),
            vec![Alphabet::new(3), Alphabet::new(2)],
            vec![0.3, 0.7],
            vec![
                vec![vec![0.2, 0.5, 0.3], vec![0.6, 0.1, 0.3]],
                vec![vec![0.9, 0.1], vec![0.4, 0.6]],
            ],
        )
        .unwrap();
        let joint = build_joint(&model).unwrap();
        assert_table(&joint, &brute_joint_n2(&model));
        assert!((joint.get(&[1, 2, 0]) - 0.7 * 0.3 * 0.4).abs() < 1e-15);
    }

    #[test]
    fn rejects_unnormalized_row_by_name() {
        let err = FactoredModel::new(
            Alphabet::new(2),
            vec![Alphabet::new(2)],
            vec![0.5, 0.5],
            vec![vec![vec![0.5, 0.5], vec![0.7, 0.2]]],
        )
        .unwrap_err();
        assert!(err.to_string().contains("cond_tables[0][1]"), "{err}");
    }

    #[test]
    fn renormalize_is_explicit() {
        let m = FactoredModel::new_renormalized(
            Alphabet::new(2),
            vec![Alphabet::new(2)],
            vec![1.0, 3.0],
            vec![vec![vec![1.0, 1.0], vec![2.0, 6.0]]],
        )
        .unwrap();
        assert_eq!(m.head_prior(), &[0.25, 0.75]);
        assert_eq!(m.cond_tables()[0][1], vec![0.25, 0.75]);
    }

    #[test]
    fn rejects_oversized_joint() {
        let model = independent_model(3, 10);
        let err = build_joint_limited(&model, 1000).unwrap_err();
        assert!(matches!(err, Error::TooLarge { cells: 10_000, .. }));
    }

    #[test]
    fn rejects_bad_labels_and_empty_models() {
        let bad = Alphabet {
            size: 2,
            labels: Some(vec!["a".into(), "a".into()]),
        };
        assert!(bad.validate("x").is_err());
        assert!(FactoredModel::new(Alphabet::new(2), vec![], vec![0.5, 0.5], vec![]).is_err());
    }

    #[test]
    fn marginal_examples() {
        let uniform = build_joint(&independent_model(2, 2)).unwrap();
        assert_table(&marginal(&uniform, &VarSet::head()).unwrap(), &[0.5, 0.5]);

        let copy = build_joint(&copy_model(2, 2, 0.0).unwrap()).unwrap();
        assert_table(&marginal(&copy, &VarSet::deps(1, 2)).unwrap(), &[0.5, 0.0, 0.0, 0.5]);

        let noisy = build_joint(&copy_model(1, 2, 0.1).unwrap()).unwrap();
        assert_table(&marginal(&noisy, &VarSet::dep(1)).unwrap(), &[0.5, 0.5]);

        assert!(matches!(
            marginal(&noisy, &VarSet::dep(3)),
            Err(Error::UnknownVariable(VariableId::Dep(3)))
        ));
        assert!(marginal(&noisy, &VarSet::empty()).is_err());
    }

    #[test]
    fn marginal_keeps_middle_axis() {
        let model = FactoredModel::new(
            Alphabet::new(2),
            vec![Alphabet::new(3), Alphabet::new(2)],
            vec![0.3, 0.7],
            vec![
                vec![vec![0.2, 0.5, 0.3], vec![0.6, 0.1, 0.3]],
                vec![vec![0.9, 0.1], vec![0.4, 0.6]],
            ],
        )
        .unwrap();
        let joint = build_joint(&model).unwrap();
        let m = marginal(&joint, &VarSet::dep(1)).unwrap();
        let expected: Vec<f64> = (0..3)
            .map(|x| 0.3 * model.cond(1, 0, x) + 0.7 * model.cond(1, 1, x))
            .collect();
        assert_table(&m, &expected);
    }

    #[test]
    fn condition_examples() {
        let copy = build_joint(&copy_model(2, 2, 0.0).unwrap()).unwrap();
        assert_table(&condition(&copy, VariableId::Head, 0).unwrap(), &[1.0, 0.0, 0.0, 0.0]);

        let uniform = build_joint(&independent_model(2, 2)).unwrap();
        assert_table(&condition(&uniform, VariableId::Head, 0).unwrap(), &[0.25; 4]);

        let noisy = build_joint(&copy_model(2, 2, 0.1).unwrap()).unwrap();
        assert_table(
            &condition(&noisy, VariableId::Head, 1).unwrap(),
            &[0.01, 0.09, 0.09, 0.81],
        );
    }

    #[test]
    fn condition_on_zero_mass_fails() {
        let model = FactoredModel::new(
            Alphabet::new(2),
            vec![Alphabet::new(2)],
            vec![1.0, 0.0],
            vec![vec![vec![0.5, 0.5], vec![0.5, 0.5]]],
        )
        .unwrap();
        let joint = build_joint(&model).unwrap();
        assert!(matches!(
            condition(&joint, VariableId::Head, 1),
            Err(Error::ZeroProbability { .. })
        ));
        // zero-mass head values are skipped by the factorization check
        assert!(check_factorization(&joint, 1e-12).unwrap().holds);
    }

    #[test]
    fn factorization_examples() {
        let built = build_joint(&copy_model(3, 3, 0.2).unwrap()).unwrap();
        let report = check_factorization(&built, 1e-12).unwrap();
        assert!(report.holds && report.max_violation <= 1e-12);

        let counter = correlated_pair_counterexample();
        let report = check_factorization(&counter, 1e-12).unwrap();
        assert!(!report.holds);
        assert!((report.max_violation - 0.25).abs() <= 1e-12);
        assert!(matches!(report.witness, Some(Witness::Pair { .. })));

        let single = build_joint(&copy_model(1, 2, 0.3).unwrap()).unwrap();
        let report = check_factorization(&single, 0.0).unwrap();
        assert!(report.holds && report.max_violation == 0.0);
    }

    #[test]
    fn factorization_catches_xor_dependents() {
        // pairwise independent given L, but M3 = M1 xor M2
        let vars = vec![
            (VariableId::Head, Alphabet::new(1)),
            (VariableId::Dep(1), Alphabet::new(2)),
            (VariableId::Dep(2), Alphabet::new(2)),
            (VariableId::Dep(3), Alphabet::new(2)),
        ];
        let mut w = vec![0.0; 8];
        for a in 0..2 {
            for b in 0..2 {
                w[a * 4 + b * 2 + (a ^ b)] = 0.25;
            }
        }
        let joint = JointTable::new(vars, w).unwrap();
        let report = check_factorization(&joint, 1e-12).unwrap();
        assert!(!report.holds);
        assert!(matches!(report.witness, Some(Witness::Product { .. })));
        assert!((report.max_violation - 0.125).abs() < 1e-15);
    }

    #[test]
    fn joint_validation() {
        let vars = vec![(VariableId::Dep(1), Alphabet::new(2)), (VariableId::Head, Alphabet::new(2))];
        assert!(JointTable::new(vars, vec![0.25; 4]).is_err());
        let vars = vec![(VariableId::Head, Alphabet::new(2))];
        assert!(JointTable::new(vars.clone(), vec![0.5, 0.4]).is_err());
        assert!(JointTable::new(vars.clone(), vec![1.5, -0.5]).is_err());
        assert!(JointTable::new(vars.clone(), vec![1.0]).is_err());
        let t = JointTable::from_weights(vars, vec![1.0, 3.0]).unwrap();
        assert_eq!(t.probabilities(), &[0.25, 0.75]);
    }

    #[test]
    fn varset_basics() {
        let s: VarSet = [VariableId::Dep(2), VariableId::Head, VariableId::Dep(2)].into_iter().collect();
        assert_eq!(s.members(), &[VariableId::Head, VariableId::Dep(2)]);
        assert_eq!(s.to_string(), "{L,M2}");
        assert!(VarSet::deps(3, 2).is_empty());
        assert_eq!(VarSet::head_and_deps(1, 2).len(), 3);
        assert_eq!(s.overlap(&VarSet::dep(2)), Some(VariableId::Dep(2)));
        assert!(s.is_disjoint(&VarSet::dep(1)));
    }

    #[test]
    fn projection_matches_decoding() {
        let shape = [2, 3, 4];
        let proj = projection(&shape, &[0, 2]);
        for (flat, &p) in proj.iter().enumerate() {
            let (a, c) = (flat / 12, flat % 4);
            assert_eq!(p, a * 4 + c);
        }
    }
}
