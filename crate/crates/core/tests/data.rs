use monotone_core::data::mnist::{decode_mnist, encode_idx_images, encode_idx_labels, load_mnist, parse_idx_images};
use monotone_core::data::{
    draw_batches, generate_dipping, generate_peaking, random_fourier_features, BatchPlan, BatchSource,
    DippingParams, PeakingParams, Sampling, Synthetic,
};
use monotone_core::error::{Error, IdxError};
use monotone_core::LabeledDataset;
use proptest::prelude::*;

#[test]
fn peaking_bayes_error() {
    let m = 200_000;
    let data = generate_peaking(&PeakingParams::new(5), m, 11).unwrap();
    let wrong = (0..m)
        .filter(|&i| {
            let s: f64 = data.row(i).iter().sum();
            usize::from(s >= 0.0) != data.labels()[i]
        })
        .count();
    let rate = wrong as f64 / m as f64;
    let bayes = 0.009_903_075_559_164_25;
    let sigma = (bayes * (1.0 - bayes) / m as f64).sqrt();
    assert!((rate - bayes).abs() < 4.0 * sigma, "rate {rate} vs {bayes}");
}

#[test]
fn dipping_has_the_stated_dimension_and_outliers() {
    let p = DippingParams::default();
    let data = generate_dipping(&p, 20_000, 3).unwrap();
    assert_eq!(data.n_features(), 1 + p.noise_dims);
    let far = (0..data.len()).filter(|&i| data.row(i)[0] > p.outlier_offset / 2.0).count();
    let ones = data.labels().iter().filter(|&&l| l == 1).count();
    let share = far as f64 / ones as f64;
    assert!((share - (1.0 - p.majority_weight)).abs() < 0.01, "outlier share {share}");
}

#[test]
fn idx_round_trip() {
    let pixels: Vec<u8> = (0..3 * 4 * 5).map(|i| (i * 7 % 256) as u8).collect();
    let labels = [3u8, 9, 0];
    let images = encode_idx_images(4, 5, &pixels);
    let parsed = parse_idx_images(&images).unwrap();
    assert_eq!((parsed.count, parsed.rows, parsed.cols), (3, 4, 5));
    assert_eq!(parsed.pixels, pixels);
    let data = decode_mnist(&images, &encode_idx_labels(&labels)).unwrap();
    assert_eq!(data.n_features(), 20);
    assert_eq!(data.labels(), &[3, 9, 0]);
    assert_eq!(data.row(1)[0], f64::from(pixels[20]) / 255.0);
}

#[test]
fn idx_errors() {
    let images = encode_idx_images(2, 2, &[0; 8]);
    assert!(matches!(parse_idx_images(&images[..10]), Err(IdxError::Truncated { .. })));
    assert!(matches!(parse_idx_images(&images[..20]), Err(IdxError::Truncated { .. })));
    let mut bad = images.clone();
    bad[3] = 0x01;
    assert!(matches!(parse_idx_images(&bad), Err(IdxError::BadMagic { .. })));
    assert!(matches!(
        decode_mnist(&images, &encode_idx_labels(&[1])),
        Err(IdxError::CountMismatch { images: 2, labels: 1 })
    ));
    assert!(matches!(
        decode_mnist(&images, &encode_idx_labels(&[1, 12])),
        Err(IdxError::BadLabel { row: 1, label: 12 })
    ));

    let dir = tempfile::tempdir().unwrap();
    let (ip, lp) = (dir.path().join("img"), dir.path().join("lbl"));
    std::fs::write(&ip, &images).unwrap();
    std::fs::write(&lp, encode_idx_labels(&[1, 12])).unwrap();
    match load_mnist(&ip, &lp) {
        Err(Error::Idx { path, .. }) => assert_eq!(path, lp),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn fourier_features_are_bounded_and_seeded() {
    let data = LabeledDataset::from_rows(&[vec![0.1, 0.2], vec![0.9, 0.4], vec![0.5, 0.5]], vec![0, 1, 0], 2).unwrap();
    let a = random_fourier_features(&data, 16, 5.0, 9).unwrap();
    let b = random_fourier_features(&data, 16, 5.0, 9).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.n_features(), 16);
    let bound = (2.0f64 / 16.0).sqrt() + 1e-12;
    assert!(a.features().iter().all(|v| v.abs() <= bound));
    assert_ne!(a, random_fourier_features(&data, 16, 5.0, 10).unwrap());
}

fn plan(rounds: usize, t: usize, v: usize, sampling: Sampling) -> BatchPlan {
    BatchPlan {
        rounds,
        train_per_round: t,
        val_per_round: v,
        sampling,
        append_validation: true,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn stratified_batches_balance_classes(seed in any::<u64>(), t in 1usize..30, v in 0usize..30) {
        let source = Synthetic::Peaking(PeakingParams::new(3));
        let batches = draw_batches(BatchSource::Synthetic(&source), &plan(4, t, v, Sampling::Stratified), seed).unwrap();
        for b in &batches {
            prop_assert_eq!(b.train.len(), t);
            prop_assert_eq!(b.validation.len(), v);
            for split in [&b.train, &b.validation] {
                let counts = split.class_counts();
                prop_assert!(counts.iter().max().unwrap() - counts.iter().min().unwrap() <= 1);
            }
        }
    }

    #[test]
    fn batches_are_a_function_of_the_seed(seed in any::<u64>()) {
        let source = Synthetic::Dipping(DippingParams::default());
        let p = plan(3, 5, 4, Sampling::Random);
        let a = draw_batches(BatchSource::Synthetic(&source), &p, seed).unwrap();
        let b = draw_batches(BatchSource::Synthetic(&source), &p, seed).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn pool_batches_never_repeat_rows(seed in any::<u64>(), t in 1usize..6, v in 0usize..6) {
        let n = 200;
        let rows: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64]).collect();
        let labels: Vec<usize> = (0..n).map(|i| i % 4).collect();
        let pool = LabeledDataset::from_rows(&rows, labels, 4).unwrap();
        let batches = draw_batches(BatchSource::Pool(&pool), &plan(8, t, v, Sampling::Random), seed).unwrap();
        let mut seen: Vec<usize> = batches
            .iter()
            .flat_map(|b| {
                let w = b.whole();
                (0..w.len()).map(move |i| w.row(i)[0] as usize).collect::<Vec<_>>()
            })
            .collect();
        let total = seen.len();
        seen.sort_unstable();
        seen.dedup();
        prop_assert_eq!(seen.len(), total);
        for b in &batches {
            let w = b.whole();
            for i in 0..w.len() {
                prop_assert_eq!(w.labels()[i], w.row(i)[0] as usize % 4);
            }
        }
    }
}
