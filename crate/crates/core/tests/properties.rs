use num_complex::Complex64;
use proptest::prelude::*;
use toda_lab::shannon::{
    distribution_from_ratios, dominates, entropy, entropy_bounds_check, lemma_pq_verdict,
    Distribution, RatioChain,
};
use toda_lab::spectrum::{baseline_entropy, lambda_exact};
use toda_lab::weights::RDifferential;

fn ratios(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1e-3f64..=1.0, 1..max_len)
}

proptest! {
    #[test]
    fn ratio_chain_round_trips(s in ratios(12)) {
        let d = distribution_from_ratios(&RatioChain::new(s.clone()).unwrap());
        let back = RatioChain::from_distribution(&d).unwrap();
        for (a, b) in s.iter().zip(back.ratios()) {
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        }
    }

    #[test]
    fn entropy_stays_between_zero_and_log_n(w in prop::collection::vec(0.0f64..10.0, 1..20)) {
        prop_assume!(w.iter().sum::<f64>() > 1e-9);
        let d = Distribution::from_weights(&w).unwrap();
        let s = entropy(&d);
        prop_assert!(s >= 0.0);
        prop_assert!(s <= (w.len() as f64).ln() + 1e-12);
        prop_assert!(entropy_bounds_check(&d).within_bounds);
    }

    /// Shrinking every adjacent ratio of an ascending chain never raises the entropy.
    #[test]
    fn domination_lowers_entropy(
        pairs in prop::collection::vec((1e-3f64..=1.0, 1e-3f64..=1.0), 1..10),
    ) {
        let s: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let t: Vec<f64> = pairs.iter().map(|p| p.0 * p.1).collect();
        let p = distribution_from_ratios(&RatioChain::new(s).unwrap());
        let q = distribution_from_ratios(&RatioChain::new(t).unwrap());
        prop_assert!(dominates(&p, &q).unwrap());
        let v = lemma_pq_verdict(&p, &q).unwrap();
        prop_assert!(v.holds, "margin {}", v.margin);
    }

    #[test]
    fn lambda_is_j_times_r_minus_j(r in 2usize..80) {
        let x = lambda_exact(r).unwrap();
        for (i, v) in x.iter().enumerate() {
            let j = (i + 1) as i128;
            prop_assert!(v.is_integer());
            prop_assert_eq!(v.to_integer(), j * (r as i128 - j));
        }
    }

    /// `λ_j` only takes `⌈(r-1)/2⌉` distinct values, so `S_{r,β} <= log(r - 1)`.
    #[test]
    fn baseline_entropy_is_below_log_r_minus_one(r in 3usize..300, beta in -3.0f64..3.0) {
        prop_assume!(beta.abs() > 1e-3);
        let s = baseline_entropy(r, beta).unwrap();
        prop_assert!(s > 0.0 && s <= ((r - 1) as f64).ln() + 1e-12);
    }

    /// `|q|²` is the product of the factor moduli, and `log|q|²` agrees with it.
    #[test]
    fn differential_modulus_factorizes(
        a in -1.0f64..1.0, b in -1.0f64..1.0, x in -1.0f64..1.0, y in -1.0f64..1.0, t in 0.1f64..100.0,
    ) {
        let q = RDifferential::monic(3, &[(a, b, 2)]).unwrap().scaled(t);
        let z = Complex64::new(x, y);
        let direct = t * t * ((x - a).powi(2) + (y - b).powi(2)).powi(2);
        prop_assert!((q.abs2(z) - direct).abs() <= 1e-12 * direct.max(1e-300));
        prop_assert!((q.eval(z).norm_sqr() - direct).abs() <= 1e-10 * direct.max(1e-300));
        if direct > 1e-200 {
            prop_assert!((q.log_abs2(z) - direct.ln()).abs() <= 1e-10);
        }
    }
}
