use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vt_core::{corrupt_fixed, corrupt_iid, decode_hd, edit_distance, BitWord, ErrorKind, HdStatus, VtParams};

fn word(max_len: usize) -> impl Strategy<Value = BitWord> {
    prop::collection::vec(0u8..=1, 0..max_len).prop_map(BitWord::from_bits)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn encode_extract_round_trip(n in 4usize..=64, seed: u64) {
        let code = VtParams::with_length(n).unwrap();
        let y = code.message_len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = BitWord::from_bits((0..y).map(|_| rand::Rng::gen_range(&mut rng, 0..=1u8)));
        if let Ok(cw) = code.encode(&u) {
            prop_assert_eq!(cw.len(), n);
            prop_assert!(code.is_codeword(&cw));
            prop_assert_eq!(code.extract_message(&cw).unwrap(), u);
            let out = decode_hd(&cw, &code);
            prop_assert_eq!(out.status, HdStatus::Clean);
            prop_assert_eq!(out.decoded, cw);
        }
    }

    #[test]
    fn fixed_channel_length_law_and_replay(w in word(40), k in 0usize..5, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (r, log) = corrupt_fixed(&w, k, &mut rng);
        prop_assert_eq!(log.events.len(), k);
        prop_assert_eq!(
            r.len() as isize - w.len() as isize,
            log.count(ErrorKind::Insertion) as isize - log.count(ErrorKind::Deletion) as isize
        );
        prop_assert_eq!(log.replay(&w), r.clone());
        prop_assert!(edit_distance(&w, &r) <= k);
        let mut again = ChaCha8Rng::seed_from_u64(seed);
        prop_assert_eq!(corrupt_fixed(&w, k, &mut again), (r, log));
    }

    #[test]
    fn iid_channel_replays(w in word(40), rate in 0.0f64..0.5, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (r, log) = corrupt_iid(&w, rate, &mut rng);
        prop_assert_eq!(log.replay(&w), r.clone());
        prop_assert_eq!(log.result_length, r.len());
        prop_assert!(log.events.len() <= w.len() + 1);
    }

    #[test]
    fn edit_distance_is_a_metric(a in word(16), b in word(16), c in word(16)) {
        let ab = edit_distance(&a, &b);
        prop_assert_eq!(ab, edit_distance(&b, &a));
        prop_assert_eq!(edit_distance(&a, &a), 0);
        prop_assert!(ab <= edit_distance(&a, &c) + edit_distance(&c, &b));
        prop_assert!(ab >= a.len().abs_diff(b.len()));
    }

    #[test]
    fn hd_output_always_has_length_n(r in word(30), n in 5usize..25) {
        let code = VtParams::with_length(n).unwrap();
        prop_assert_eq!(decode_hd(&r, &code).decoded.len(), n);
    }

    #[test]
    fn substitution_never_looks_clean(n in 5usize..40, seed: u64, pos_seed: usize) {
        let code = VtParams::with_length(n).unwrap();
        let book_word = {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let y = code.message_len();
            loop {
                let u = BitWord::from_bits((0..y).map(|_| rand::Rng::gen_range(&mut rng, 0..=1u8)));
                if let Ok(cw) = code.encode(&u) { break cw; }
            }
        };
        let mut r = book_word.clone();
        r.flip(pos_seed % n + 1);
        prop_assert!(!code.is_codeword(&r));
        prop_assert_eq!(decode_hd(&r, &code).decoded, book_word);
    }
}
