mod common;

use cimsim::mapping::{
    encode_inputs, encode_weights, mvm_on_crossbar, published_cost, MappedTile, MappingKind,
    MappingScheme, MvmOptions, Variant,
};
use cimsim::xbar::{Crossbar, CrossbarConfig};
use cimsim::IntMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn scheme() -> impl Strategy<Value = MappingScheme> {
    proptest::sample::select(MappingScheme::all())
}

fn crossbar_mvm(w: &IntMatrix, v: &[i32], scheme: MappingScheme, cfg: CrossbarConfig, opts: MvmOptions) -> Vec<i32> {
    let mut xbar = Crossbar::new(cfg).unwrap();
    let tile = MappedTile::program(encode_weights(w, scheme).unwrap(), &mut xbar).unwrap();
    mvm_on_crossbar(&tile, &encode_inputs(v, scheme).unwrap(), &opts).unwrap()
}

/// A scheme, a matrix over its alphabet and a matching input vector.
fn case(max: usize) -> impl Strategy<Value = (MappingScheme, IntMatrix, Vec<i32>)> {
    (scheme(), 1..=max, 1..=max, any::<u64>()).prop_map(|(s, m, n, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = common::random_matrix(&mut rng, s.alphabet(), m, n);
        let v = common::random_vec(&mut rng, s.alphabet(), n);
        (s, w, v)
    })
}

proptest! {
    #[test]
    fn ideal_crossbar_is_exact(
        (s, w, v) in case(40),
        i_hrs in 0.1f64..20.0,
        i_mm in 0.1f64..50.0,
    ) {
        let cfg = CrossbarConfig::ideal(64, 64, i_hrs, i_hrs + i_mm);
        prop_assert_eq!(crossbar_mvm(&w, &v, s, cfg, MvmOptions::default()), common::int_mvm(&w, &v));
    }

    #[test]
    fn variants_agree((s, w, v) in case(24)) {
        let cfg = common::ideal(5.0, 10.0);
        let cells = MappingScheme::new(s.kind(), Variant::MoreCells).unwrap_or(s);
        let cycles = MappingScheme::new(s.kind(), Variant::MoreCycles).unwrap_or(s);
        prop_assert_eq!(
            crossbar_mvm(&w, &v, cells, cfg.clone(), MvmOptions::default()),
            crossbar_mvm(&w, &v, cycles, cfg, MvmOptions::default())
        );
    }

    #[test]
    fn encodings_round_trip((s, w, v) in case(16)) {
        let plan = encode_weights(&w, s).unwrap();
        prop_assert_eq!(plan.decode_weights(), w);
        let enc = encode_inputs(&v, s).unwrap();
        prop_assert_eq!(enc.len(), v.len());
        prop_assert_eq!(enc.decode(), v);
        prop_assert_eq!(enc.cycle_drives().len(), s.cycles());
    }

    #[test]
    fn binary_mappings_skip_zero_inputs((s, w, v) in case(24), mask in proptest::collection::vec(any::<bool>(), 24)) {
        // a zero input leaves its row undriven; the product must still be exact
        let v: Vec<i32> = v.iter().zip(&mask).map(|(&x, &m)| if m { 0 } else { x }).collect();
        let cfg = common::ideal(5.0, 10.0);
        prop_assert_eq!(crossbar_mvm(&w, &v, s, cfg, MvmOptions::default()), common::int_mvm(&w, &v));
    }
}

#[test]
fn out_of_alphabet_values_are_rejected() {
    for s in MappingScheme::all() {
        let bad_w = IntMatrix::from_rows(&[[2, 1]]).unwrap();
        assert!(matches!(encode_weights(&bad_w, s), Err(cimsim::Error::Encoding { .. })), "{s}");
        assert!(matches!(encode_inputs(&[1, -2], s), Err(cimsim::Error::Encoding { .. })), "{s}");
        if s.kind().is_binary() {
            let zero_w = IntMatrix::from_rows(&[[0, 1]]).unwrap();
            assert!(encode_weights(&zero_w, s).is_err(), "{s}");
        }
    }
}

#[test]
fn cycle_and_cell_counts_per_scheme() {
    use MappingKind::*;
    let expected = [
        ("bnn-i", 1, 2),
        ("bnn-ii", 1, 2),
        ("bnn-iii+cells", 1, 2),
        ("bnn-iii+cycles", 2, 1),
        ("bnn-iv+cells", 1, 2),
        ("bnn-iv+cycles", 2, 1),
        ("bnn-v", 1, 2),
        ("bnn-vi+cells", 1, 4),
        ("bnn-vi+cycles", 2, 2),
        ("tnn-i+cells", 1, 4),
        ("tnn-i+cycles", 2, 2),
        ("tnn-ii+cells", 1, 4),
        ("tnn-ii+cycles", 2, 2),
        ("tnn-iii+cells", 1, 4),
        ("tnn-iii+cycles", 2, 2),
        ("tnn-iv+cells", 1, 4),
        ("tnn-iv+cycles", 2, 2),
        ("tnn-v+cells", 1, 4),
        ("tnn-v+cycles", 2, 2),
    ];
    assert_eq!(MappingScheme::all().len(), expected.len());
    for (name, cycles, cells) in expected {
        let s: MappingScheme = name.parse().unwrap();
        assert_eq!((s.cycles(), s.cells_per_weight()), (cycles, cells), "{name}");
        assert_eq!(published_cost(s), (cycles, cells), "{name}");
        assert_eq!(s.name(), name);
    }
    assert!(!BnnI.has_variants() && BnnVI.has_variants() && TnnV.has_variants());
}

#[test]
fn worked_encodings() {
    let bnn1: MappingScheme = "bnn-i".parse().unwrap();
    let plan = encode_weights(&IntMatrix::from_rows(&[[1, -1]]).unwrap(), bnn1).unwrap();
    assert_eq!(plan.digital_constant(), vec![0]);
    assert_eq!(encode_inputs(&[1, -1, 1], bnn1).unwrap().cycle_drives(), vec![vec![true, false, true]]);

    // BNN V, all ones, N = 4: crossbar term 8, digital correction -4
    let bnn5: MappingScheme = "bnn-v".parse().unwrap();
    let w = IntMatrix::from_rows(&[[1, 1, 1, 1]]).unwrap();
    assert_eq!(crossbar_mvm(&w, &[1, 1, 1, 1], bnn5, common::ideal(5.0, 10.0), MvmOptions::default()), vec![4]);
}

#[test]
fn bnn_iii_needs_the_analog_correction() {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let s: MappingScheme = "bnn-iii+cells".parse().unwrap();
    let cfg = CrossbarConfig::ideal(8, 8, 5.0, 10.0);
    let off = MvmOptions { analog_correction: false };
    let mut broken = 0;
    for _ in 0..200 {
        let w = common::random_matrix(&mut rng, s.alphabet(), 8, 8);
        let v: Vec<i32> = (0..8).map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect();
        let want = common::int_mvm(&w, &v);
        assert_eq!(crossbar_mvm(&w, &v, s, cfg.clone(), MvmOptions::default()), want);
        let sum: i32 = v.iter().sum();
        let got = crossbar_mvm(&w, &v, s, cfg.clone(), off);
        // without the term every output is off by 2 (I_hrs / I_mm) sum(v)
        assert!(got.iter().zip(&want).all(|(g, w)| g - w == 2 * sum));
        broken += (got != want) as usize;
    }
    assert!(broken > 0);
}
