//! Model generators: seeded random models, symmetric copy channels, fully
//! independent models, and a joint that breaks conditional independence.
//!
//! Randomness comes from ChaCha8 seeded through `seed_from_u64`, which is
//! specified to be portable. Every simplex point is a normalized vector of
//! `Gamma(concentration, 1)` draws, i.e. a symmetric Dirichlet sample; with
//! concentration 1 these are normalized exponential draws.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::dist::{Alphabet, FactoredModel, JointTable, VariableId};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    pub head_size: usize,
    pub dep_sizes: Vec<usize>,
    pub concentration: f64,
    pub seed: u64,
}

impl ModelSpec {
    pub fn uniform_sizes(n: usize, head_size: usize, dep_size: usize, concentration: f64, seed: u64) -> Self {
        ModelSpec {
            head_size,
            dep_sizes: vec![dep_size; n],
            concentration,
            seed,
        }
    }

    pub fn n(&self) -> usize {
        self.dep_sizes.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.dep_sizes.is_empty() {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        if self.head_size == 0 || self.dep_sizes.contains(&0) {
            return Err(Error::InvalidArgument("alphabet sizes must be at least 1".into()));
        }
        if !(self.concentration > 0.0 && self.concentration.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "concentration must be positive, got {}",
                self.concentration
            )));
        }
        Ok(())
    }
}

/// SplitMix64 finalizer; derives per-model seeds as `mix(seed ^ index)`.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derived_seed(seed: u64, index: u64) -> u64 {
    mix64(seed ^ index)
}

fn simplex_point(rng: &mut ChaCha8Rng, gamma: &Gamma<f64>, size: usize) -> Vec<f64> {
    if size == 1 {
        return vec![1.0];
    }
    let mut draws: Vec<f64> = (0..size).map(|_| gamma.sample(rng)).collect();
    let total: f64 = draws.iter().sum();
    if total > 0.0 {
        draws.iter_mut().for_each(|d| *d /= total);
    } else {
        // every draw underflowed (tiny concentration): the limit is a vertex
        let vertex = rng.random_range(0..size);
        draws = vec![0.0; size];
        draws[vertex] = 1.0;
    }
    // push the rounding residue into the largest entry so sums are tight
    let residue = 1.0 - draws.iter().sum::<f64>();
    let largest = (0..size)
        .max_by(|&a, &b| draws[a].total_cmp(&draws[b]))
        .expect("size >= 2");
    draws[largest] += residue;
    draws
}

/// Draws a model whose prior and conditional rows come from a symmetric
/// Dirichlet. The output is a pure function of `spec`.
pub fn random_model(spec: &ModelSpec) -> FactoredModel {
    try_random_model(spec).expect("invalid model spec")
}

pub fn try_random_model(spec: &ModelSpec) -> Result<FactoredModel> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let gamma = Gamma::new(spec.concentration, 1.0)
        .map_err(|e| Error::InvalidArgument(format!("gamma: {e}")))?;
    let head_prior = simplex_point(&mut rng, &gamma, spec.head_size);
    let cond_tables = spec
        .dep_sizes
        .iter()
        .map(|&size| {
            (0..spec.head_size)
                .map(|_| simplex_point(&mut rng, &gamma, size))
                .collect()
        })
        .collect();
    FactoredModel::new(
        Alphabet::new(spec.head_size),
        spec.dep_sizes.iter().map(|&s| Alphabet::new(s)).collect(),
        head_prior,
        cond_tables,
    )
}

/// Uniform head; every dependent keeps the head value with probability
/// `1 - noise` and otherwise moves to one of the other values uniformly.
pub fn copy_model(n: usize, size: usize, noise: f64) -> Result<FactoredModel> {
    if size < 2 {
        return Err(Error::InvalidArgument(format!("copy model needs size >= 2, got {size}")));
    }
    if !(0.0..=0.5).contains(&noise) {
        return Err(Error::InvalidArgument(format!("noise {noise} outside [0, 0.5]")));
    }
    let off = noise / (size - 1) as f64;
    let table: Vec<Vec<f64>> = (0..size)
        .map(|l| (0..size).map(|m| if m == l { 1.0 - noise } else { off }).collect())
        .collect();
    FactoredModel::new(
        Alphabet::new(size),
        vec![Alphabet::new(size); n],
        vec![1.0 / size as f64; size],
        vec![table; n],
    )
}

pub fn independent_model(n: usize, size: usize) -> FactoredModel {
    independent_model_sized(size, &vec![size; n])
}

/// Uniform head and uniform conditional rows, identical across head values.
pub fn independent_model_sized(head_size: usize, dep_sizes: &[usize]) -> FactoredModel {
    let uniform = |s: usize| vec![1.0 / s as f64; s];
    FactoredModel::new_renormalized(
        Alphabet::new(head_size),
        dep_sizes.iter().map(|&s| Alphabet::new(s)).collect(),
        uniform(head_size),
        dep_sizes.iter().map(|&s| vec![uniform(s); head_size]).collect(),
    )
    .expect("uniform tables are valid")
}

/// Three binary variables: the head is uniform and independent of the
/// dependents, `M1` is uniform and `M2 = M1`.
pub fn correlated_pair_counterexample() -> JointTable {
    let vars = vec![
        (VariableId::Head, Alphabet::new(2)),
        (VariableId::Dep(1), Alphabet::new(2)),
        (VariableId::Dep(2), Alphabet::new(2)),
    ];
    let mut probs = vec![0.0; 8];
    for l in 0..2 {
        for m in 0..2 {
            probs[l * 4 + m * 2 + m] = 0.25;
        }
    }
    JointTable::new(vars, probs).expect("valid by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{build_joint, check_factorization, VarSet};
    use crate::info::{is_markov_chain, mutual_information};
    use std::f64::consts::LN_2;

    #[test]
    fn random_model_is_deterministic() {
        let spec = ModelSpec::uniform_sizes(3, 3, 2, 0.5, 7);
        assert_eq!(random_model(&spec), random_model(&spec));
        let other = ModelSpec { seed: 8, ..spec.clone() };
        assert_ne!(random_model(&spec), random_model(&other));
    }

    #[test]
    fn huge_concentration_is_nearly_uniform() {
        let spec = ModelSpec::uniform_sizes(2, 2, 2, 1e6, 3);
        let joint = build_joint(&random_model(&spec)).unwrap();
        let mi = mutual_information(&joint, &VarSet::head(), &VarSet::deps(1, 2)).unwrap();
        assert!(mi.0 <= 0.01, "{mi}");
    }

    #[test]
    fn seeded_model_factorizes() {
        let joint = build_joint(&random_model(&ModelSpec::uniform_sizes(2, 2, 2, 1.0, 42))).unwrap();
        assert!(check_factorization(&joint, 1e-12).unwrap().holds);
    }

    #[test]
    fn tiny_concentration_stays_valid() {
        for seed in 0..20 {
            let m = random_model(&ModelSpec::uniform_sizes(2, 3, 3, 1e-3, seed));
            assert!(build_joint(&m).is_ok());
        }
    }

    #[test]
    fn invalid_specs() {
        assert!(try_random_model(&ModelSpec::uniform_sizes(2, 2, 2, 0.0, 1)).is_err());
        assert!(try_random_model(&ModelSpec::uniform_sizes(0, 2, 2, 1.0, 1)).is_err());
        assert!(try_random_model(&ModelSpec::uniform_sizes(2, 0, 2, 1.0, 1)).is_err());
        assert!(copy_model(2, 2, 0.6).is_err());
        assert!(copy_model(2, 1, 0.0).is_err());
    }

    #[test]
    fn copy_model_information() {
        for (noise, expected) in [
            (0.0, LN_2),
            (0.5, 0.0),
            (0.1, LN_2 + 0.1 * 0.1f64.ln() + 0.9 * 0.9f64.ln()),
        ] {
            let joint = build_joint(&copy_model(3, 2, noise).unwrap()).unwrap();
            for i in 1..=3 {
                let mi = mutual_information(&joint, &VarSet::head(), &VarSet::dep(i)).unwrap().0;
                assert!((mi - expected).abs() < 1e-12, "noise {noise}: {mi}");
            }
        }
    }

    #[test]
    fn noiseless_copies_are_sufficient_for_the_head() {
        let joint = build_joint(&copy_model(3, 3, 0.0).unwrap()).unwrap();
        for i in 1..=3 {
            let others = joint.var_set().difference(&VarSet::head().with(VariableId::Dep(i)));
            let v = is_markov_chain(&joint, &VarSet::head(), &VarSet::dep(i), &others, 1e-12).unwrap();
            assert!(v.is_chain);
        }
    }

    #[test]
    fn independent_model_has_no_information() {
        let joint = build_joint(&independent_model_sized(3, &[2, 5])).unwrap();
        assert!(check_factorization(&joint, 1e-12).unwrap().holds);
        let mi = mutual_information(&joint, &VarSet::head(), &VarSet::deps(1, 2)).unwrap();
        assert!(mi.0 <= 1e-12);
    }

    #[test]
    fn counterexample_reverses_remainder_inequality() {
        let joint = correlated_pair_counterexample();
        let head_side = mutual_information(&joint, &VarSet::head(), &VarSet::deps(1, 2)).unwrap();
        let dep_side = mutual_information(&joint, &VarSet::dep(1), &VarSet::head_and_deps(2, 2)).unwrap();
        assert!(head_side.0.abs() < 1e-15);
        assert!((dep_side.0 - LN_2).abs() < 1e-12);
    }

    #[test]
    fn seed_derivation_spreads() {
        assert_ne!(derived_seed(1, 0), derived_seed(1, 1));
        assert_eq!(derived_seed(5, 9), mix64(5 ^ 9));
    }
}
