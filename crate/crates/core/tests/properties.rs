use gfra_core::dataset::{generate_dataset, ApPolicy, Dataset, FeatureScaler, SlotRange};
use gfra_core::detect::{
    fused_scores, hard_decision, majority_fuse, threshold_grid, DecisionThreshold,
};
use gfra_core::dmlp::{init_model, read_model, write_model, MlpArchitecture};
use gfra_core::numerics::SeededRng;
use gfra_core::robustness::{perturb, quantize, FixedPointFormat};
use gfra_core::scenario::{Seeds, System, SystemConfig};
use proptest::prelude::*;

fn format() -> impl Strategy<Value = FixedPointFormat> {
    (2u32..=40)
        .prop_flat_map(|w| (Just(w), 1..w))
        .prop_map(|(w, f)| FixedPointFormat::new(w, f).unwrap())
}

proptest! {
    #[test]
    fn quantize_is_a_monotone_projection(fmt in format(), a in -1e6f64..1e6, b in -1e6f64..1e6) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let q = quantize(lo, fmt);
        prop_assert_eq!(quantize(q, fmt), q);
        prop_assert!(q <= quantize(hi, fmt));
        prop_assert!(q >= fmt.min_value() && q <= fmt.max_value());
        if lo >= fmt.min_value() && lo <= fmt.max_value() {
            prop_assert!((q - lo).abs() <= fmt.resolution() / 2.0);
        }
    }

    #[test]
    fn format_text_round_trips(fmt in format()) {
        prop_assert_eq!(fmt.to_string().parse::<FixedPointFormat>().unwrap(), fmt);
    }

    #[test]
    fn zero_perturbation_is_bitwise_identity(values in prop::collection::vec(-1e3f64..1e3, 2..200), seed in any::<u64>()) {
        let out = perturb(&values, 0.0, &mut SeededRng::new(seed)).unwrap();
        prop_assert!(values.iter().zip(&out).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn fused_score_threshold_equals_majority_vote(
        rows in (1usize..=6, 1usize..20).prop_flat_map(|(t, k)| prop::collection::vec(prop::collection::vec(0.0f64..=1.0, k), t)),
        tau in 0.0f64..=1.0,
    ) {
        let tau = DecisionThreshold::new(tau).unwrap();
        let votes: Vec<Vec<bool>> = rows.iter().map(|r| hard_decision(r, tau)).collect();
        let fused = fused_scores(&rows).unwrap();
        prop_assert_eq!(hard_decision(&fused, tau), majority_fuse(&votes).unwrap());
    }

    #[test]
    fn threshold_grid_is_sorted_and_spans_unit_interval(step in 0.001f64..=0.5) {
        let grid = threshold_grid(step).unwrap();
        prop_assert_eq!(grid[0], 0.0);
        prop_assert_eq!(*grid.last().unwrap(), 1.0);
        prop_assert!(grid.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn model_bytes_round_trip(inputs in 1usize..12, z in 1usize..4, v in 1usize..10, k in 1usize..6, seed in any::<u64>()) {
        let arch = MlpArchitecture { input_dim: inputs, hidden_layers: z, hidden_width: v, output_dim: k };
        let mut model = init_model(arch, FeatureScaler::identity(inputs), &SeededRng::new(seed)).unwrap();
        model.round_to_single();
        let mut bytes = Vec::new();
        write_model(&model, &mut bytes).unwrap();
        let back = read_model(&mut bytes.as_slice()).unwrap();
        prop_assert_eq!(back, model);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn dataset_bytes_round_trip(seed in any::<u64>(), slots in 1usize..20, policy in prop_oneof![
        Just(ApPolicy::UniformRandomAp), Just(ApPolicy::DominantRandomUser), Just(ApPolicy::AllAps)
    ]) {
        let mut cfg = SystemConfig::scenario_one();
        cfg.topology.num_aps = 3;
        cfg.topology.num_users = 5;
        cfg.pilot_length = 4;
        let seeds = Seeds { topology: seed, activity: seed ^ 1, ..Seeds::default() };
        let sys = System::realize(&cfg, seeds).unwrap();
        let ds = generate_dataset(&sys, SlotRange::new(seed % 1000, slots), policy).unwrap();
        let mut bytes = Vec::new();
        ds.write_to(&mut bytes).unwrap();
        let back = Dataset::read_from(&mut bytes.as_slice()).unwrap();
        prop_assert_eq!(back, ds);
    }
}
