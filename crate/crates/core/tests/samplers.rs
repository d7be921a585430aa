use fdsi::models::{DeltaKind, FitTables};
use fdsi::neighborhood::NeighborhoodSpec;
use fdsi::stats::{gamma_cdf, ks_statistic, normal_cdf};
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Mean of sqrt(n) * D over independent seeds. Under a correct sampler this
/// follows the Kolmogorov distribution: mean 0.8687, sd 0.2603.
fn mean_scaled_ks<D: Distribution<f64>>(d: &D, cdf: impl Fn(f64) -> f64, seeds: u64, n: usize) -> f64 {
    let mut total = 0.0;
    for seed in 0..seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v: Vec<f64> = d.sample_iter(&mut rng).take(n).collect();
        v.sort_unstable_by(f64::total_cmp);
        total += ks_statistic(&v, &cdf) * (n as f64).sqrt();
    }
    total / seeds as f64
}

#[test]
fn samplers_follow_kolmogorov_distribution() {
    let t = FitTables::embedded();
    let (seeds, n) = (40, 100_000);
    // 3 standard errors of the mean around 0.8687
    let ok = |m: f64| (0.745..=0.992).contains(&m);

    let g = t.global().normal;
    let m = mean_scaled_ks(&g.distribution(), |x| normal_cdf(x, &g), seeds, n);
    assert!(ok(m), "global {m}");

    let r = t.range_fit(NeighborhoodSpec::new(4, 1)).unwrap();
    let m = mean_scaled_ks(&r.distribution(), |x| gamma_cdf(x, &r), seeds, n);
    assert!(ok(m), "range {m}");

    // smallest tabulated shape
    let d = t.delta_fit_lookup(DeltaKind::Min, NeighborhoodSpec::new(2, 2), -20.0).unwrap().fit;
    assert!(d.shape < 0.2);
    let m = mean_scaled_ks(&d.distribution(), |x| gamma_cdf(x, &d), seeds, n);
    assert!(ok(m), "delta {m}");
}
