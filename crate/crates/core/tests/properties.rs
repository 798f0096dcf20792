use fesim::bch::{bch_decode, bch_encode, BchConfig, BmaMode};
use fesim::device::{FaultSpec, PufDevice};
use fesim::fe::{fe_generate, fe_reconstruct};
use fesim::rs::{rs_decode, rs_encode, RsConfig};
use fesim::{Codec, DecodeStatus};
use proptest::prelude::*;
use std::collections::BTreeMap;

fn rs_errors() -> impl Strategy<Value = BTreeMap<usize, u16>> {
    prop::collection::btree_map(0usize..8, 1u16..256, 0..=2)
}

proptest! {
    #[test]
    fn rs_corrects_up_to_two_symbols(msg in prop::collection::vec(0u16..256, 4), errors in rs_errors()) {
        let cfg = RsConfig::paper("paper-rs").unwrap();
        let cw = rs_encode(&msg, &cfg).unwrap();
        let mut r = cw.clone();
        for (&j, &v) in &errors {
            r[j] ^= v;
        }
        let out = rs_decode(&r, &cfg).unwrap();
        prop_assert_eq!(out.status, DecodeStatus::Ok);
        prop_assert_eq!(&out.corrected, &cw);
        prop_assert_eq!(&out.error_values, &errors);
        let expected = [38, 66, 72][errors.len()];
        prop_assert_eq!(out.cycles, expected);
    }

    #[test]
    fn rs_worstcase_latency_is_constant(msg in prop::collection::vec(0u16..256, 4), errors in rs_errors()) {
        let cfg = RsConfig::paper("paper-rs-worstcase").unwrap();
        let mut r = rs_encode(&msg, &cfg).unwrap();
        for (&j, &v) in &errors {
            r[j] ^= v;
        }
        prop_assert_eq!(rs_decode(&r, &cfg).unwrap().cycles, 72);
    }

    #[test]
    fn bch_corrects_up_to_two_bits(msg in prop::collection::vec(any::<bool>(), 4),
                                   flips in prop::collection::btree_set(0usize..12, 0..=2),
                                   serial in any::<bool>()) {
        let mode = if serial { BmaMode::Serial } else { BmaMode::Parallel };
        let cfg = BchConfig::paper(mode);
        let cw = bch_encode(&msg, &cfg).unwrap();
        let mut r = cw.clone();
        for &j in &flips {
            r[j] ^= true;
        }
        let out = bch_decode(&r, &cfg).unwrap();
        prop_assert_eq!(&out.corrected, &cw);
        prop_assert_eq!(out.cycles, if serial { 28 } else { 21 });
    }

    #[test]
    fn fe_key_survives_any_single_fault(seed in any::<u64>(), position in 0usize..64, value in any::<bool>()) {
        let codec = Codec::from_id("rs", None).unwrap();
        let mut device = PufDevice::random(64, seed);
        let secret: Vec<bool> = (0..32).map(|i| (seed >> (i % 64)) & 1 == 1).collect();
        let (helper, key) = fe_generate(device.secret_w(), &secret, &codec).unwrap();
        let flipped = device.secret_w()[position] != value;
        device.inject_fault(FaultSpec { position, value }).unwrap();
        let rec = fe_reconstruct(&device.measure(), &helper, &codec).unwrap();
        prop_assert_eq!(rec.key.key_bytes, key.key_bytes);
        prop_assert_eq!(rec.cycles, if flipped { 66 } else { 38 });
    }
}
