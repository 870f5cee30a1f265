//! Property tests for the crate's structural invariants.

use proptest::prelude::*;
use qbayes::*;
use std::f64::consts::PI;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Largest-remainder allocation: counts sum exactly to the budget and
    /// every count is within one of its real-valued target.
    #[test]
    fn allocation_counts_track_weights(
        raw in prop::collection::vec(0.0f64..10.0, 4..40),
        m_train in 1u64..50_000,
    ) {
        prop_assume!(raw.iter().sum::<f64>() > 0.0);
        let grid = ThetaGrid::new(raw.len(), 0.0, PI).unwrap();
        let alloc = allocate(&grid, &AllocationShape::Custom { weights: raw }, m_train).unwrap();
        prop_assert_eq!(alloc.counts().iter().sum::<u64>(), m_train);
        for (&q, &c) in alloc.weights().iter().zip(alloc.counts()) {
            prop_assert!((c as f64 - q * m_train as f64).abs() < 1.0);
        }
    }

    /// Softmax output is a probability vector for any weights and input.
    #[test]
    fn network_forward_always_normalizes(
        seed in any::<u64>(),
        mu in -5.0f64..5.0,
        width in 1usize..9,
        depth in 0usize..3,
    ) {
        let hidden = vec![width; depth];
        let cfg = NetworkConfig::new(hidden, 12, (1.0, 0.0)).unwrap();
        let net = init(cfg, seed);
        let a = net.forward(mu).unwrap();
        let sum: f64 = a.iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-9);
        prop_assert!(a.iter().all(|&x| x >= 0.0));
    }

    /// Detection noise preserves normalization and nonnegativity; zero
    /// variance is the identity.
    #[test]
    fn detection_noise_preserves_normalization(
        raw in prop::collection::vec(0.0f64..1.0, 5..30),
        sigma_sq in 0.0f64..4.0,
    ) {
        prop_assume!(raw.iter().sum::<f64>() > 1e-6);
        let n = raw.len() - 1;
        let outcomes = OutcomeSet::for_qubits(n);
        let total: f64 = raw.iter().sum();
        let probs: Vec<f64> = raw.iter().map(|&x| x / total).collect();
        let out = apply_detection_noise(&probs, &outcomes, sigma_sq);
        let sum: f64 = out.iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-10);
        prop_assert!(out.iter().all(|&p| p >= 0.0));
        let same = apply_detection_noise(&probs, &outcomes, 0.0);
        prop_assert_eq!(same, probs);
    }

    /// Posterior composition is invariant under reordering the sequence.
    #[test]
    fn composition_ignores_sequence_order(
        seq in prop::collection::vec(0usize..2, 1..40),
        shuffle_seed in any::<u64>(),
    ) {
        let model = LikelihoodModel::qubit();
        let grid = ThetaGrid::new(25, 0.0, PI).unwrap();
        let table = SingleShotTable::from_model(&model, &grid).unwrap();
        let prior = GridDistribution::flat(grid);
        let mut shuffled = seq.clone();
        // Deterministic Fisher-Yates driven by the seed.
        let mut state = shuffle_seed;
        for i in (1..shuffled.len()).rev() {
            state = qbayes::seeds::splitmix64(&mut state);
            shuffled.swap(i, (state % (i as u64 + 1)) as usize);
        }
        let a = compose_posterior(&prior, &table, &seq).unwrap();
        let b = compose_posterior(&prior, &table, &shuffled).unwrap();
        prop_assert_eq!(a.values(), b.values());
    }

    /// Composed posteriors are valid grid distributions.
    #[test]
    fn composed_posterior_is_normalized(
        seq in prop::collection::vec(0usize..2, 0..60),
    ) {
        let model = LikelihoodModel::qubit();
        let grid = ThetaGrid::new(31, 0.0, PI).unwrap();
        let table = SingleShotTable::from_model(&model, &grid).unwrap();
        let prior = GridDistribution::flat(grid);
        let post = compose_posterior(&prior, &table, &seq).unwrap();
        let total: f64 = post.values().iter().sum::<f64>() * grid.delta();
        prop_assert!((total - 1.0).abs() < 1e-9);
    }
}
