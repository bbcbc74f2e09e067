use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vt_core::{corrupt_fixed, BitWord, VtParams};
use vt_tvtd::embed::symbol_row;
use vt_tvtd::linalg::softmax_rows;
use vt_tvtd::mask::causal_mask;
use vt_tvtd::{build_masks, prefix_stats, stat_sums, TvtdConfig, TvtdModel};

fn word(min: usize, max: usize) -> impl Strategy<Value = BitWord> {
    prop::collection::vec(0u8..=1, min..=max).prop_map(BitWord::from_bits)
}

fn small_config(n: usize, window: usize, layers: usize, stats: bool) -> TvtdConfig {
    TvtdConfig {
        d_model: 8,
        n_heads: 2,
        n_layers: layers,
        window,
        memory_stats: stats,
        target_stats: stats,
        ..TvtdConfig::desk(n)
    }
}

/// Codeword of length `n` and a corrupted copy with up to two errors.
fn pair(n: usize, seed: u64) -> (BitWord, BitWord) {
    let code = VtParams::with_length(n).unwrap();
    let book = code.codebook();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cw = book[(seed as usize) % book.len()].clone();
    let k = (seed % 3) as usize;
    let (r, _) = corrupt_fixed(&cw, k, &mut rng);
    (cw, r)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    /// Flipping teacher bit `q` leaves the logits of bits `1..=q` untouched
    /// and changes the logits of bit `q + 1`.
    #[test]
    fn causality(
        n in 4usize..12,
        w_frac in 0.0f64..1.2,
        layers in 1usize..3,
        stats: bool,
        seed: u64,
        q_seed: usize,
    ) {
        let window = ((w_frac * n as f64) as usize).max(1);
        let model = TvtdModel::<f64>::new(small_config(n, window, layers, stats), seed).unwrap();
        let (cw, r) = pair(n, seed);
        let q = q_seed % n + 1;
        let mut flipped = cw.clone();
        flipped.flip(q);
        let a = model.forward(&r, &cw).unwrap();
        let b = model.forward(&r, &flipped).unwrap();
        for p in 1..=q {
            prop_assert_eq!(a[p - 1], b[p - 1], "bit {} moved after flipping {}", p, q);
        }
        if q < n {
            prop_assert_ne!(a[q], b[q]);
        }
    }

    /// Softmax over a masked score row puts exactly zero weight on the
    /// `-inf` entries and sums to one; every row keeps an allowed entry.
    #[test]
    fn mask_soundness(len in 1usize..40, window in 1usize..45, seed: u64) {
        let mask = build_masks::<f64>(len, window);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut scores: Vec<f64> = (0..len * len)
            .map(|_| rand::Rng::gen_range(&mut rng, -30.0..30.0))
            .collect();
        for (s, m) in scores.iter_mut().zip(&mask) {
            *s += m;
        }
        softmax_rows(&mut scores, len);
        for k in 0..len {
            let row = &mask[k * len..(k + 1) * len];
            prop_assert!(row.iter().any(|m| m.is_finite()));
            prop_assert!(row[k] == 0.0);
            let probs = &scores[k * len..(k + 1) * len];
            for j in 0..len {
                let allowed = j <= k && k - j <= window;
                prop_assert_eq!(row[j] == 0.0, allowed);
                if !allowed {
                    prop_assert!(probs[j] == 0.0);
                }
            }
            prop_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    /// The symbol embedding is a pure gather: row `i` is table row
    /// `2 (i - 1) + c_i`, and flipping bit `i` changes row `i` only.
    #[test]
    fn gather_purity(c in word(1, 24), seed: u64, i_seed: usize) {
        let model = TvtdModel::<f32>::new(small_config(20, 20, 1, true), seed).unwrap();
        let tables = model.source_tables();
        let d = tables.d_model;
        let e = tables.symbol_embed(&c).unwrap();
        prop_assert_eq!(e.len(), c.len() * d);
        for (i, b) in c.iter().enumerate() {
            let r = symbol_row(i + 1, b);
            prop_assert_eq!(&e[i * d..(i + 1) * d], &tables.symbol[r * d..(r + 1) * d]);
        }
        let i = i_seed % c.len();
        let mut f = c.clone();
        f.flip(i + 1);
        let e2 = tables.symbol_embed(&f).unwrap();
        for row in 0..c.len() {
            let same = e[row * d..(row + 1) * d] == e2[row * d..(row + 1) * d];
            prop_assert_eq!(same, row != i);
        }
        let full = tables.embed_codeword(&c).unwrap();
        prop_assert_eq!(full.len(), (c.len() + 2) * d);
        prop_assert_eq!(&full[2 * d..], &e[..]);
    }

    #[test]
    fn statistic_identity(c in word(0, 130)) {
        let l = c.len();
        let (s0, s1) = stat_sums(&c);
        prop_assert_eq!(s0 + s1, l * (l + 1) / 2);
        let ones: usize = (1..=l).filter(|&i| c.bit(i) == 1).sum();
        prop_assert_eq!(s1, ones);
        let prefixes = prefix_stats(&c);
        prop_assert_eq!(prefixes.len(), l);
        for (t, &(p0, p1)) in prefixes.iter().enumerate() {
            let head = BitWord::from_bits(c.iter().take(t));
            prop_assert_eq!((p0, p1), stat_sums(&head));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// A window covering the whole word is plain causal masking, so a model
    /// with `w = n` matches one with an arbitrarily larger window exactly.
    #[test]
    fn full_window_equals_pure_causal(n in 3usize..12, seed: u64) {
        prop_assert_eq!(build_masks::<f32>(n, n), causal_mask::<f32>(n));
        let a = TvtdModel::<f32>::new(small_config(n, n, 2, true), seed).unwrap();
        let b = TvtdModel::<f32>::new(small_config(n, 10 * n, 2, true), seed).unwrap();
        prop_assert_eq!(a.params(), b.params());
        let (cw, r) = pair(n, seed);
        prop_assert_eq!(a.forward(&r, &cw).unwrap(), b.forward(&r, &cw).unwrap());
    }

    /// Greedy decoding is reproduced by the teacher-forced pass fed its own
    /// output (up to float ties).
    #[test]
    fn greedy_inference_is_self_consistent(n in 4usize..12, window in 1usize..12, stats: bool, seed: u64) {
        let model = TvtdModel::<f64>::new(small_config(n, window, 2, stats), seed).unwrap();
        let (_, r) = pair(n, seed);
        let out = model.infer(&r).unwrap();
        prop_assert_eq!(out.len(), n);
        let logits = model.forward(&r, &out).unwrap();
        for (t, [l0, l1]) in logits.iter().enumerate() {
            let argmax = u8::from(l1 > l0);
            prop_assert!(argmax == out.bit(t + 1) || (l1 - l0).abs() < 1e-9, "bit {}", t + 1);
        }
    }

    #[test]
    fn memory_length_follows_statistics_flag(c in word(0, 24), stats: bool) {
        let model = TvtdModel::<f32>::new(small_config(20, 20, 1, stats), 0).unwrap();
        let rows = model.source_tables().embed_codeword(&c).unwrap().len() / 8;
        prop_assert_eq!(rows, c.len() + if stats { 2 } else { 0 });
    }
}

#[test]
fn gather_example() {
    let model = TvtdModel::<f32>::new(small_config(5, 5, 1, true), 3).unwrap();
    let t = model.source_tables();
    let c: BitWord = "01011".parse().unwrap();
    assert_eq!(stat_sums(&c), (4, 11));
    let e = t.symbol_embed(&c).unwrap();
    for (i, r) in [0usize, 3, 4, 7, 9].into_iter().enumerate() {
        assert_eq!(&e[i * 8..(i + 1) * 8], &t.symbol[r * 8..(r + 1) * 8]);
    }
    let zeros = t.symbol_embed(&BitWord::zeros(5)).unwrap();
    for i in 0..5 {
        assert_eq!(&zeros[i * 8..(i + 1) * 8], &t.symbol[2 * i * 8..(2 * i + 1) * 8]);
    }
}

/// A length-22 received word for n = 20 has 24 memory positions.
#[test]
fn memory_for_two_insertions() {
    let model = TvtdModel::<f32>::new(small_config(20, 20, 1, true), 0).unwrap();
    let r = BitWord::from_bits((0..22).map(|i| (i % 3 == 1) as u8));
    assert_eq!(model.source_tables().embed_codeword(&r).unwrap().len(), 24 * 8);
}
