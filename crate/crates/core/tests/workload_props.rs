// Copyright The fslnet Authors.
// SPDX-License-Identifier: Apache-2.0

use fslnet::engine::Framing;
use fslnet::topology::{build, TopologyKind};
use fslnet::workload::{build_matmul_program, matmul_reference, Matrix};
use fslnet::{CodecMode, SimConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn kind() -> impl Strategy<Value = TopologyKind> {
    prop_oneof![
        Just(TopologyKind::Ring),
        Just(TopologyKind::Star),
        Just(TopologyKind::Hypercube),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    // Rectangular operands, both framings: rawbits is exact and the
    // observed traffic matches the closed-form volume.
    #[test]
    fn rectangular_products_are_exact(
        kind in kind(),
        m in 1usize..12,
        k in 1usize..6,
        p in 1usize..6,
        bulk in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let cfg = SimConfig {
            codec_mode: CodecMode::RawBits,
            framing: if bulk { Framing::Bulk } else { Framing::PerElement },
            ..SimConfig::default()
        };
        let t = build(kind, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = Matrix::random(m, k, 100.0, &mut rng);
        let b = Matrix::random(k, p, 100.0, &mut rng);
        let prog = build_matmul_program(&a, &b, &t, &cfg).unwrap();
        let volume = prog.expected_volume();
        let run = prog.run(&cfg, &t).unwrap();
        prop_assert_eq!(run.result, matmul_reference(&a, &b).unwrap());
        prop_assert_eq!(run.metrics.messages_sent, volume.messages);
        prop_assert_eq!(run.metrics.messages_delivered, volume.messages);
        prop_assert_eq!(run.metrics.payload_words_sent, volume.payload_words());
    }
}
