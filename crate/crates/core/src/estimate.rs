//! Sampling, plug-in mutual information, and Bayes-optimal next-element
//! prediction.
//!
//! The plug-in estimator is the mutual information of the empirical joint
//! frequencies. It is biased upward for finite samples (roughly by
//! `(|X|-1)(|Y|-1) / 2N` nats) and no correction is applied.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedIndex;
use rand_distr::Distribution;

use crate::dist::{build_joint, marginal, projection, Alphabet, FactoredModel, JointTable, VarSet, VariableId};
use crate::error::{Error, Result};
use crate::info::{mutual_information, Nats};
use crate::placement::{dependent_count, Placement};

#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    pub placement: Placement,
    /// Alphabets of `L, M_1..M_n` in canonical order.
    pub alphabets: Vec<Alphabet>,
    /// Value indices in production order, `n + 1` per row.
    pub rows: Vec<Vec<usize>>,
    pub seed: u64,
}

fn canonical_slot(var: VariableId) -> usize {
    match var {
        VariableId::Head => 0,
        VariableId::Dep(i) => i,
    }
}

impl SampleSet {
    pub fn count(&self) -> usize {
        self.rows.len()
    }

    /// Empirical joint frequencies over `L, M_1..M_n`.
    pub fn empirical_joint(&self) -> Result<JointTable> {
        if self.rows.is_empty() {
            return Err(Error::InvalidArgument("empty sample set".into()));
        }
        let seq = self.placement.sequence();
        let vars: Vec<(VariableId, Alphabet)> = self
            .alphabets
            .iter()
            .enumerate()
            .map(|(i, a)| (if i == 0 { VariableId::Head } else { VariableId::Dep(i) }, a.clone()))
            .collect();
        let cells: usize = self.alphabets.iter().map(|a| a.size).product();
        let mut counts = vec![0.0; cells];
        let mut canonical = vec![0; seq.len()];
        for row in &self.rows {
            for (&var, &value) in seq.iter().zip(row) {
                canonical[canonical_slot(var)] = value;
            }
            let flat = canonical
                .iter()
                .zip(&self.alphabets)
                .fold(0, |acc, (&v, a)| acc * a.size + v);
            counts[flat] += 1.0;
        }
        JointTable::from_weights(vars, counts)
    }

    /// Writes a headered CSV, one column per sequence position.
    pub fn write_csv<W: Write>(&self, out: W, labels: bool) -> Result<()> {
        let seq = self.placement.sequence();
        let mut w = csv::Writer::from_writer(out);
        w.write_record(seq.iter().map(|v| v.to_string()))?;
        for row in &self.rows {
            w.write_record(seq.iter().zip(row).map(|(&var, &value)| {
                if labels {
                    self.alphabets[canonical_slot(var)].label(value)
                } else {
                    value.to_string()
                }
            }))?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn sample(model: &FactoredModel, placement: &Placement, count: usize, seed: u64) -> Result<SampleSet> {
    sample_joint(&build_joint(model)?, placement, count, seed)
}

/// Draws `count` i.i.d. rows from `joint` with ChaCha8 seeded by `seed`.
pub fn sample_joint(joint: &JointTable, placement: &Placement, count: usize, seed: u64) -> Result<SampleSet> {
    let n = dependent_count(joint)?;
    if placement.n() != n {
        return Err(Error::InvalidArgument(format!(
            "placement has {} dependents, model has {n}",
            placement.n()
        )));
    }
    if count == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    let dist = WeightedIndex::new(joint.probabilities())
        .map_err(|e| Error::InvalidJoint(format!("cannot sample: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seq = placement.sequence();
    let rows = (0..count)
        .map(|_| {
            let values = joint.unflatten(dist.sample(&mut rng));
            seq.iter().map(|&v| values[canonical_slot(v)]).collect()
        })
        .collect();
    Ok(SampleSet {
        placement: placement.clone(),
        alphabets: joint.variables().iter().map(|(_, a)| a.clone()).collect(),
        rows,
        seed,
    })
}

pub fn plug_in_mi(samples: &SampleSet, x: &VarSet, y: &VarSet) -> Result<Nats> {
    mutual_information(&samples.empirical_joint()?, x, y)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PredictionScore {
    pub target: VariableId,
    pub k: usize,
    /// Accuracy of the posterior-argmax guess under the exact model.
    pub exact_bayes_accuracy: f64,
    /// Accuracy, under the exact model, of the argmax rule fit on samples.
    pub empirical_accuracy: Option<f64>,
    /// `I(produced; target)`.
    pub exact_mi: Nats,
    pub plug_in_mi: Option<Nats>,
}

/// `(prefix index, target value)` for every cell of the produced-plus-target
/// marginal, with the marginal's probabilities.
struct PrefixTable {
    probs: Vec<f64>,
    prefix: Vec<usize>,
    value: Vec<usize>,
    prefixes: usize,
    values: usize,
}

fn prefix_table(joint: &JointTable, produced: &VarSet, target: VariableId) -> Result<PrefixTable> {
    let table = marginal(joint, &produced.clone().with(target))?;
    let shape = table.shape();
    let prefix_axes: Vec<usize> = produced.iter().map(|v| table.position(v).expect("kept")).collect();
    let target_axis = table.position(target).expect("kept");
    Ok(PrefixTable {
        prefix: projection(&shape, &prefix_axes),
        value: projection(&shape, &[target_axis]),
        prefixes: prefix_axes.iter().map(|&a| shape[a]).product(),
        values: shape[target_axis],
        probs: table.probabilities().to_vec(),
    })
}

impl PrefixTable {
    /// `p(prefix, value)` laid out as one row per prefix.
    fn rows(&self) -> Vec<Vec<f64>> {
        let mut rows = vec![vec![0.0; self.values]; self.prefixes];
        for (i, &p) in self.probs.iter().enumerate() {
            rows[self.prefix[i]][self.value[i]] += p;
        }
        rows
    }
}

/// Index of the largest entry, lowest index on ties.
fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

/// Scores guessing the element at position `k + 1` from the first `k`.
pub fn next_element_score(
    model: &FactoredModel,
    placement: &Placement,
    k: usize,
    samples: Option<&SampleSet>,
) -> Result<PredictionScore> {
    next_element_score_joint(&build_joint(model)?, placement, k, samples)
}

pub fn next_element_score_joint(
    joint: &JointTable,
    placement: &Placement,
    k: usize,
    samples: Option<&SampleSet>,
) -> Result<PredictionScore> {
    let seq = placement.sequence();
    if k >= seq.len() {
        return Err(Error::Range(format!(
            "k={k}: nothing left to predict (need 0 <= k <= n = {})",
            seq.len() - 1
        )));
    }
    let produced: VarSet = seq[..k].iter().copied().collect();
    let target = seq[k];
    let target_set = VarSet::from_iter([target]);

    let exact_rows = prefix_table(joint, &produced, target)?.rows();
    let exact_bayes_accuracy = exact_rows
        .iter()
        .map(|row| row.iter().copied().fold(0.0, f64::max))
        .sum();
    let exact_mi = if k == 0 {
        Nats::ZERO
    } else {
        mutual_information(joint, &produced, &target_set)?
    };

    let (empirical_accuracy, plug_in) = match samples {
        None => (None, None),
        Some(s) => {
            let empirical = s.empirical_joint()?;
            let fit = prefix_table(&empirical, &produced, target)?.rows();
            let mut overall = vec![0.0; fit[0].len()];
            for row in &fit {
                overall.iter_mut().zip(row).for_each(|(o, v)| *o += v);
            }
            let fallback = argmax(&overall);
            let accuracy = fit
                .iter()
                .zip(&exact_rows)
                .map(|(seen, truth)| {
                    let guess = if seen.iter().any(|&c| c > 0.0) { argmax(seen) } else { fallback };
                    truth[guess]
                })
                .sum();
            let mi = if k == 0 {
                Nats::ZERO
            } else {
                mutual_information(&empirical, &produced, &target_set)?
            };
            (Some(accuracy), Some(mi))
        }
    };

    Ok(PredictionScore {
        target,
        k,
        exact_bayes_accuracy,
        empirical_accuracy,
        exact_mi,
        plug_in_mi: plug_in,
    })
}
