use harmonia::dist::{build_joint, FactoredModel, VarSet};
use harmonia::estimate::{next_element_score, plug_in_mi, sample};
use harmonia::info::mutual_information;
use harmonia::modelgen::{copy_model, derived_seed, random_model, ModelSpec};
use harmonia::placement::Placement;
use proptest::prelude::*;

fn mean_abs_error(model: &FactoredModel, count: usize) -> f64 {
    let joint = build_joint(model).unwrap();
    let (x, y) = (VarSet::head(), VarSet::dep(1));
    let exact = mutual_information(&joint, &x, &y).unwrap().0;
    let placement = Placement::head_first(model.n());
    let total: f64 = (0..20)
        .map(|i| {
            let s = sample(model, &placement, count, derived_seed(2024, i)).unwrap();
            (plug_in_mi(&s, &x, &y).unwrap().0 - exact).abs()
        })
        .sum();
    total / 20.0
}

#[test]
fn plug_in_error_shrinks_with_sample_count() {
    let models = [
        copy_model(2, 2, 0.1).unwrap(),
        random_model(&ModelSpec::uniform_sizes(2, 3, 3, 1.0, 11)),
    ];
    for model in &models {
        let errors: Vec<f64> = [100, 1_000, 10_000, 100_000].iter().map(|&c| mean_abs_error(model, c)).collect();
        assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
    }
}

#[test]
fn head_last_guesses_the_head_at_least_as_well() {
    for seed in 0..50 {
        let model = random_model(&ModelSpec::uniform_sizes(3, 3, 3, 1.0, seed));
        let last = next_element_score(&model, &Placement::head_last(3), 3, None).unwrap();
        let after_one = next_element_score(&model, &Placement::identity(3, 2).unwrap(), 1, None).unwrap();
        assert!(last.target.is_head() && after_one.target.is_head());
        assert!(last.exact_bayes_accuracy >= after_one.exact_bayes_accuracy - 1e-12);
    }
}

proptest! {
    #[test]
    fn reported_mi_matches_direct_computation(seed in any::<u64>(), head_position in 1usize..=4, k in 0usize..=3) {
        let model = random_model(&ModelSpec::uniform_sizes(3, 2, 3, 0.7, seed));
        let placement = Placement::identity(3, head_position).unwrap();
        let score = next_element_score(&model, &placement, k, None).unwrap();
        let seq = placement.sequence();
        let produced: VarSet = seq[..k].iter().copied().collect();
        let direct = mutual_information(&build_joint(&model).unwrap(), &produced, &VarSet::from_iter([seq[k]]));
        let direct = if produced.is_empty() { 0.0 } else { direct.unwrap().0 };
        prop_assert!((score.exact_mi.0 - direct).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&score.exact_bayes_accuracy));
    }
}
