use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vt_core::siso::log_sum_exp;
use vt_core::{corrupt_iid, decode_hd, decode_siso, exact_map_oracle, forward_backward, BitWord, ChannelPrior, VtParams};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a.is_infinite() && a == b) || (a - b).abs() <= tol
}

#[test]
fn trellis_matches_enumeration_on_random_vt8_trials() {
    let code = VtParams::new(8, 4).unwrap();
    let book = code.codebook();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut compared = 0;
    for trial in 0..1200 {
        let rate = [0.01, 0.03, 0.05, 0.1][trial % 4];
        let cw = &book[rng.gen_range(0..book.len())];
        let (r, _) = corrupt_iid(cw, rate, &mut rng);
        let prior = ChannelPrior::new(rate / 3.0, rate / 3.0, rate / 3.0, (r.len().abs_diff(8) + 2).max(4)).unwrap();
        let fb = forward_backward(&r, &code, &prior);
        let ex = exact_map_oracle(&r, &code, &prior);
        match (fb, ex) {
            (Ok(fb), Ok(ex)) => {
                assert!(close(fb.log_evidence, ex.log_evidence, 1e-6), "trial {trial}: {r}");
                for (t, (a, b)) in fb.log_joint.iter().zip(&ex.log_joint).enumerate() {
                    for bit in 0..2 {
                        assert!(close(a[bit], b[bit], 1e-6), "trial {trial} t {t}: {r}");
                    }
                }
                for (a, b) in fb.llr.values().iter().zip(ex.llr.values()) {
                    assert!(close(*a, *b, 1e-6), "trial {trial}: {r} {a} vs {b}");
                }
                compared += 1;
            }
            (Err(_), Err(_)) => {}
            (a, b) => panic!("trial {trial}: trellis {:?} vs oracle {:?}", a.is_ok(), b.is_ok()),
        }
    }
    assert!(compared >= 1000, "{compared}");
}

#[test]
fn posterior_is_normalized_at_every_position() {
    let code = VtParams::with_length(20).unwrap();
    let book = code.codebook();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..200 {
        let cw = &book[rng.gen_range(0..book.len())];
        let (r, _) = corrupt_iid(cw, 0.05, &mut rng);
        let prior = ChannelPrior::new(0.05 / 3.0, 0.05 / 3.0, 0.05 / 3.0, (r.len().abs_diff(20) + 2).max(4)).unwrap();
        let Ok(post) = forward_backward(&r, &code, &prior) else {
            continue;
        };
        assert!((post.log_evidence - post.log_evidence_backward).abs() < 1e-9);
        for [a, b] in &post.log_joint {
            assert!((log_sum_exp(&[*a, *b]) - post.log_evidence).abs() < 1e-9);
        }
    }
}

#[test]
fn single_deletion_of_example_codeword() {
    let code = VtParams::with_length(10).unwrap();
    let r: BitWord = "001011111".parse().unwrap();
    let prior = ChannelPrior::new(0.01, 0.01, 0.01, 4).unwrap();
    let out = decode_siso(&r, &code, &prior);
    assert_eq!(out.decoded.to_string(), "0010101111");
    assert_eq!(out.decoded, decode_hd(&r, &code).decoded);
}
