use monotone_core::stats::{binomial_half_upper_tail, mcnemar_exact_one_tailed, PairedOutcomeCounts};

/// P(X ≥ b) for X ~ Binomial(b + c, ½) as an exact ratio of integers.
fn oracle(b: usize, c: usize) -> f64 {
    let n = b + c;
    let mut row = vec![1u64];
    for _ in 0..n {
        let mut next = vec![1u64; row.len() + 1];
        for j in 1..row.len() {
            next[j] = row[j - 1] + row[j];
        }
        row = next;
    }
    let favourable: u64 = row[b..].iter().sum();
    favourable as f64 / (1u64 << n) as f64
}

#[test]
fn exact_enumeration_up_to_twenty_discordant() {
    for n in 0..=20 {
        for b in 0..=n {
            let counts = PairedOutcomeCounts {
                n10: b,
                n01: n - b,
                n00: 3,
                n11: 11,
            };
            let p = mcnemar_exact_one_tailed(&counts);
            let want = oracle(b, n - b);
            assert!((p - want).abs() <= 1e-12, "b={b} c={} p={p} oracle={want}", n - b);
        }
    }
}

#[test]
fn tail_is_one_at_zero_and_zero_past_n() {
    for n in 0..50 {
        assert_eq!(binomial_half_upper_tail(n, 0), 1.0);
        assert_eq!(binomial_half_upper_tail(n, n + 1), 0.0);
    }
}

#[test]
fn large_n_stays_a_probability() {
    for n in [100, 1000, 5000] {
        let mut prev = 1.0;
        for k in 0..=n {
            let p = binomial_half_upper_tail(n, k);
            assert!((0.0..=1.0).contains(&p));
            assert!(p <= prev + 1e-12);
            prev = p;
        }
        for k in 1..=n {
            let total = binomial_half_upper_tail(n, k) + binomial_half_upper_tail(n, n - k + 1);
            assert!((total - 1.0).abs() < 1e-9, "n={n} k={k}");
        }
    }
}
