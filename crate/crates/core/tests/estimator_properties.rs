use proptest::prelude::*;
use rand::Rng as _;
use rankdiv::distributions::{continuous_divergence, quantile_density_ratio};
use rankdiv::divergence::{
    default_quad_points, discrete_f_divergence, rank_divergence, rank_divergence_exact_grid, tv_isl_identity_check,
};
use rankdiv::rng::rng;
use rankdiv::univariate::{rank_pmf_exact, Provenance};
use rankdiv::{Dist1D, EntropyKind, EntropySpec, RankHistogram, Route, Samples1D};

fn analytic_pairs() -> Vec<(String, Dist1D, Dist1D)> {
    let std = Dist1D::standard_normal();
    let mut pairs = Vec::new();
    for delta in [0.5, 1.0, 2.0] {
        pairs.push((format!("shift {delta}"), std, Dist1D::gaussian(delta, 1.0).unwrap()));
    }
    for sigma in [1.2, 1.5, 2.0] {
        pairs.push((format!("scale {sigma}"), std, Dist1D::gaussian(0.0, sigma).unwrap()));
    }
    pairs.push(("mixture".into(), Dist1D::gauss_mix2(2.0, 1.0).unwrap(), std));
    pairs.push(("laplace".into(), Dist1D::laplace(0.0, 1.0).unwrap(), std));
    pairs
}

const GENERATORS: [EntropyKind; 5] = [
    EntropyKind::Kl,
    EntropyKind::JensenShannon,
    EntropyKind::TotalVariation,
    EntropyKind::SqHellinger,
    EntropyKind::ChiSq,
];

#[test]
fn exact_rank_divergence_increases_in_order_below_the_divergence() {
    let orders: Vec<usize> = (1..=9).map(|p| 1 << p).collect();
    for (name, mu, nu) in analytic_pairs() {
        let ratio = quantile_density_ratio(mu, nu).unwrap();
        for kind in GENERATORS {
            let spec = EntropySpec::new(kind);
            let full = continuous_divergence(&mu, &nu, &spec, 64).unwrap();
            let values = rank_divergence_exact_grid(&ratio, &orders, &spec).unwrap();
            for w in values.windows(2) {
                assert!(w[1] >= w[0] - 1e-9, "{name}/{kind:?}: {values:?}");
            }
            let last = *values.last().unwrap();
            assert!(last <= full + 1e-9, "{name}/{kind:?}: {last} > {full}");
        }
    }
}

#[test]
fn equal_laws_give_the_uniform_histogram() {
    let std = Dist1D::standard_normal();
    let ratio = quantile_density_ratio(std, std).unwrap();
    for k in [0usize, 1, 2, 7, 64, 513] {
        let h = rank_pmf_exact(&ratio, k, default_quad_points(k)).unwrap();
        let u = 1.0 / (k + 1) as f64;
        assert!(h.probs().iter().all(|&p| p == u), "K={k}");
        for kind in EntropyKind::ALL {
            assert_eq!(discrete_f_divergence(&h, &EntropySpec::new(kind)), 0.0, "K={k} {kind:?}");
        }
    }
}

#[test]
fn tv_equals_the_integrated_sampling_loss() {
    let mut r = rng(11);
    for _ in 0..1000 {
        let k = r.random_range(0..200usize);
        let raw: Vec<f64> = (0..=k).map(|_| r.random::<f64>().powi(3)).collect();
        let total: f64 = raw.iter().sum();
        let p = RankHistogram::new(raw.iter().map(|v| v / total).collect(), Provenance::Counted).unwrap();
        let (tv, isl) = tv_isl_identity_check(&p);
        assert!((tv - isl).abs() <= 1e-14, "{tv} vs {isl}");
    }
}

fn strictly_increasing(xs: &[f64], ys: &[f64]) -> bool {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    idx.windows(2).all(|w| xs[w[0]] < xs[w[1]] && ys[w[0]] < ys[w[1]])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn hard_ranks_ignore_increasing_maps(seed in 0u64..10_000, k in 1usize..200, which in 0usize..3) {
        let a = Dist1D::standard_normal().sample(300, seed).unwrap();
        let b = Dist1D::gaussian(0.4, 1.3).unwrap().sample(250, seed + 1).unwrap();
        let map = |x: f64| match which {
            0 => 2.0 * x + 3.0,
            1 => x.exp(),
            _ => x * x * x + x,
        };
        let fa: Vec<f64> = a.values().iter().map(|&x| map(x)).collect();
        let fb: Vec<f64> = b.values().iter().map(|&x| map(x)).collect();
        let all: Vec<f64> = a.values().iter().chain(b.values()).copied().collect();
        let mapped: Vec<f64> = fa.iter().chain(&fb).copied().collect();
        prop_assume!(strictly_increasing(&all, &mapped));
        let spec = EntropySpec::new(EntropyKind::Kl);
        let before = rank_divergence(&a, &b, k, &spec, Route::HARD, 0).unwrap().value;
        let after = rank_divergence(
            &Samples1D::new(fa, 0).unwrap(),
            &Samples1D::new(fb, 0).unwrap(),
            k,
            &spec,
            Route::HARD,
            0,
        )
        .unwrap()
        .value;
        prop_assert_eq!(before.to_bits(), after.to_bits());
    }

    #[test]
    fn estimates_are_nonnegative(seed in 0u64..10_000, k in 1usize..100, counted in any::<bool>()) {
        let a = Dist1D::laplace(0.0, 1.0).unwrap().sample(200, seed).unwrap();
        let b = Dist1D::standard_normal().sample(200, seed + 7).unwrap();
        let route = if counted { Route::Counted } else { Route::HARD };
        for kind in GENERATORS {
            let v = rank_divergence(&a, &b, k, &EntropySpec::new(kind), route, seed).unwrap().value;
            prop_assert!(v >= 0.0);
        }
    }
}
