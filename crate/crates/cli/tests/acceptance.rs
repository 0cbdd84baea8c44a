//! Acceptance suite: one line per criterion, then a summary.
//!
//! Runs the shipped configurations under `configs/` through the library
//! runners. A failing line whose id is listed in `KNOWN_SHORTFALLS` is
//! reported but does not fail the run; any other failure does.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng as _;
use rankdiv::distributions::{
    benchmark_box, continuous_divergence, js_reference_quadrature, kl_gaussian, kl_truncgauss_vs_uniform,
    quantile_density_ratio,
};
use rankdiv::divergence::{
    default_quad_points, discrete_f_divergence, rank_divergence, rank_divergence_exact_grid, tv_isl_identity_check,
};
use rankdiv::rng::rng;
use rankdiv::transport::{rank_energy_gradient, rank_prox_with, RankEnergy};
use rankdiv::univariate::rank_pmf_exact;
use rankdiv::{Dist1D, EntropyKind, EntropySpec, Provenance, RankHistogram, Route, Samples1D};
use rankdiv_cli::experiments::{
    run_bench1d, run_bench_sliced, run_bounds, run_kl_vs_n, run_rates, run_transport_experiment,
    write_transport,
};
use rankdiv_cli::{ExperimentConfig, ExperimentKind};

/// Lines expected to fail; the reasons are in the README.
const KNOWN_SHORTFALLS: &[&str] = &["2b", "2c", "3"];

struct Line {
    id: String,
    pass: bool,
    text: String,
}

#[derive(Default)]
struct Report {
    lines: Vec<Line>,
}

impl Report {
    fn check(&mut self, id: &str, pass: bool, text: String) {
        let tag = match (pass, KNOWN_SHORTFALLS.contains(&id)) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known shortfall)",
            (false, false) => "FAIL",
        };
        println!("[{tag}] {id}: {text}");
        self.lines.push(Line {
            id: id.into(),
            pass,
            text,
        });
    }
}

fn config(file: &str, overrides: &[&str]) -> ExperimentConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(file);
    let text = std::fs::read_to_string(&path).unwrap();
    let kind: ExperimentKind = toml::from_str::<toml::Table>(&text).unwrap()["experiment"]
        .clone()
        .try_into()
        .unwrap();
    let overrides: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
    ExperimentConfig::resolve(kind, Some(&path), &overrides).unwrap()
}

fn within(value: f64, target: f64, tol: f64) -> bool {
    (value - target).abs() <= tol
}

fn univariate_benchmark(report: &mut Report) {
    // (config, K, target ratio, reported std); tolerance is three stds
    let rows = [
        ("univariate_shift_kl.toml", 32, 0.775, 0.030),
        ("univariate_shift_kl.toml", 512, 0.959, 0.048),
        ("univariate_scale_kl.toml", 512, 0.998, 0.066),
        ("univariate_multimodal_js.toml", 512, 0.985, 0.063),
        ("univariate_laplace_js.toml", 512, 0.933, 0.138),
        ("univariate_shift_tv.toml", 256, 0.994, 0.033),
    ];
    let mut out = Vec::new();
    let mut all = true;
    for (file, k, target, std) in rows {
        let cfg = config(file, &[]);
        let row = run_bench1d(&cfg).unwrap().into_iter().find(|r| r.order == k).unwrap();
        let ok = within(row.mean_ratio, target, 3.0 * std);
        all &= ok;
        out.push(format!(
            "{} {} {}={} K={k}: {:.3}±{:.3} vs {target}±3·{std} ({}){}",
            row.family,
            row.kind,
            if row.family == "scale" { "σ" } else { "Δ" },
            row.param,
            row.mean_ratio,
            row.std_ratio,
            row.reference_route,
            if ok { "" } else { " OUT" }
        ));
    }
    report.check("1", all, format!("univariate ratios, n=1e4, 10 seeds; {}", out.join("; ")));
}

fn kl_versus_size(report: &mut Report) {
    let cfg = config("kl_vs_n.toml", &["dims=[2]", "sizes=[10000, 640000]"]);
    let rows = run_kl_vs_n(&cfg).unwrap();
    let small = rows.iter().find(|r| r.n == 10_000).unwrap();
    report.check(
        "2a",
        (0.123..=0.153).contains(&small.mean),
        format!("axis-corrected KL d=2 n=1e4 K=64: {:.4}±{:.4} in [0.123, 0.153]", small.mean, small.std),
    );
    let large = rows.iter().find(|r| r.n == 640_000).unwrap();
    report.check(
        "2b",
        within(large.mean, 0.138189, 0.004),
        format!(
            "axis-corrected KL d=2 n=6.4e5 K=64: {:.4}±{:.4} vs 0.138189±0.004",
            large.mean, large.std
        ),
    );
    let cfg = config("kl_vs_n.toml", &["dims=[10]", "sizes=[1280000]", "seeds=3"]);
    let r = &run_kl_vs_n(&cfg).unwrap()[0];
    report.check(
        "2c",
        within(r.mean, 0.785051, 0.01),
        format!("axis-corrected KL d=10 n=1.28e6 K=64, 3 seeds: {:.4}±{:.4} vs 0.785051±0.01", r.mean, r.std),
    );
}

fn sliced_benchmark(report: &mut Report) {
    let cfg = config("sliced_gaussian.toml", &["dims=[5]"]);
    let r = &run_bench_sliced(&cfg).unwrap()[0];
    report.check(
        "3",
        within(r.mean_scaled_ratio, 1.087, 3.0 * 0.032),
        format!(
            "d×sliced/truth d=5 KL K=64 L=128 n=1e4: {:.3}±{:.3} vs 1.087±3·0.032",
            r.mean_scaled_ratio, r.std_scaled_ratio
        ),
    );
}

fn rate_slopes(report: &mut Report) {
    let chi2 = run_rates(&config("rates_scale_chi2.toml", &["kinds=[\"chi2\"]"])).unwrap()[0].slope;
    let js = run_rates(&config("rates_laplace_js.toml", &[])).unwrap()[0].slope;
    report.check(
        "4",
        chi2 <= -0.9 && (-0.7..=-0.35).contains(&js),
        format!("log-log gap slopes over K=16..1024: scale χ² {chi2:.3} (≤ -0.9), laplace JS {js:.3} (in [-0.7, -0.35])"),
    );
}

fn reference_constants(report: &mut Report) {
    let mut ok = true;
    let mut parts = Vec::new();
    for (d, want) in [(2, 0.138189), (5, 0.392526), (10, 0.785051)] {
        let v = kl_truncgauss_vs_uniform(&benchmark_box(d).unwrap()).unwrap();
        ok &= within(v, want, 1e-5);
        parts.push(format!("box d={d} {v:.6}"));
    }
    let shift = kl_gaussian(0.0, 1.0, 2.0, 1.0);
    let scale = kl_gaussian(0.0, 1.0, 0.0, 2.0);
    let js = js_reference_quadrature(&Dist1D::laplace(0.0, 1.0).unwrap(), &Dist1D::standard_normal(), 64).unwrap();
    ok &= shift == 2.0 && within(scale, 0.318147, 1e-5) && within(js, 0.021869, 1e-4);
    parts.push(format!("shift KL {shift}, scale KL {scale:.6}, laplace JS {js:.6}"));
    report.check("5", ok, format!("reference constants: {}", parts.join(", ")));
}

fn analytic_pairs() -> Vec<(Dist1D, Dist1D)> {
    let std = Dist1D::standard_normal();
    vec![
        (std, Dist1D::gaussian(2.0, 1.0).unwrap()),
        (std, Dist1D::gaussian(0.0, 2.0).unwrap()),
        (Dist1D::gauss_mix2(2.0, 1.0).unwrap(), std),
        (Dist1D::laplace(0.0, 1.0).unwrap(), std),
        (Dist1D::student_t(5.0).unwrap(), std),
    ]
}

fn monotone_in_order(report: &mut Report) {
    let kinds = [
        EntropyKind::Kl,
        EntropyKind::JensenShannon,
        EntropyKind::TotalVariation,
        EntropyKind::SqHellinger,
        EntropyKind::ChiSq,
    ];
    let orders: Vec<usize> = (1..=9).map(|p| 1 << p).collect();
    let mut worst_step = f64::INFINITY;
    let mut worst_gap = f64::INFINITY;
    for (mu, nu) in analytic_pairs() {
        let ratio = quantile_density_ratio(mu, nu).unwrap();
        for kind in kinds {
            let spec = EntropySpec::new(kind);
            let full = continuous_divergence(&mu, &nu, &spec, 64).unwrap();
            let values = rank_divergence_exact_grid(&ratio, &orders, &spec).unwrap();
            for w in values.windows(2) {
                worst_step = worst_step.min(w[1] - w[0]);
            }
            worst_gap = worst_gap.min(full - values[values.len() - 1]);
        }
    }
    report.check(
        "6",
        worst_step >= -1e-9 && worst_gap >= -1e-9,
        format!("exact D^(K) over K=2..512, 5 pairs × 5 generators: min step {worst_step:.2e}, min D − D^(512) {worst_gap:.2e}"),
    );
}

fn uniform_at_equality(report: &mut Report) {
    let mut ok = true;
    for law in [Dist1D::standard_normal(), Dist1D::laplace(1.0, 2.0).unwrap(), Dist1D::student_t(3.0).unwrap()] {
        let ratio = quantile_density_ratio(law, law).unwrap();
        for k in [1usize, 2, 8, 64, 512, 1024] {
            let h = rank_pmf_exact(&ratio, k, default_quad_points(k)).unwrap();
            ok &= h.probs().iter().all(|&p| p == 1.0 / (k + 1) as f64);
            for kind in EntropyKind::ALL {
                ok &= discrete_f_divergence(&h, &EntropySpec::new(kind)) == 0.0;
            }
        }
    }
    report.check("7", ok, "equal laws: exactly uniform pmf and zero for every generator, K up to 1024".into());
}

fn tv_identity(report: &mut Report) {
    let mut r = rng(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let k = r.random_range(0..256usize);
        let raw: Vec<f64> = (0..=k).map(|_| r.random::<f64>()).collect();
        let total: f64 = raw.iter().sum();
        let p = RankHistogram::new(raw.iter().map(|v| v / total).collect(), Provenance::Counted).unwrap();
        let (tv, isl) = tv_isl_identity_check(&p);
        worst = worst.max((tv - isl).abs());
    }
    report.check("8", worst <= 1e-14, format!("TV = ISL on 1e3 random pmfs: max gap {worst:.1e}"));
}

fn bounds(report: &mut Report) {
    let r = &run_bounds(&config("bounds_tv.toml", &[])).unwrap()[0];
    report.check(
        "9",
        r.mean_within_bound && r.coverage_ok,
        format!(
            "TV K=8 N=M=1e3, 200 trials: mean error {:.4} ≤ bound {:.3}; coverage {:.3} ≥ 0.95 at radius {:.3}",
            r.trial_mean_error, r.mean_bound, r.coverage, r.radius
        ),
    );
}

fn pushforward(report: &mut Report) {
    let spec = EntropySpec::new(EntropyKind::Kl);
    let maps: [fn(f64) -> f64; 3] = [|x| 2.0 * x + 3.0, f64::exp, |x| x * x * x + x];
    let mut ok = true;
    let mut checked = 0;
    for seed in 0..30u64 {
        let a = Dist1D::standard_normal().sample(500, seed).unwrap();
        let b = Dist1D::gaussian(0.5, 1.5).unwrap().sample(400, 1000 + seed).unwrap();
        for map in maps {
            let fa: Vec<f64> = a.values().iter().map(|&x| map(x)).collect();
            let fb: Vec<f64> = b.values().iter().map(|&x| map(x)).collect();
            let mut pairs: Vec<(f64, f64)> =
                a.values().iter().chain(b.values()).copied().zip(fa.iter().chain(&fb).copied()).collect();
            pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
            if !pairs.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1) {
                continue;
            }
            let fa = Samples1D::new(fa, 0).unwrap();
            let fb = Samples1D::new(fb, 0).unwrap();
            for k in [8, 64, 512] {
                let x = rank_divergence(&a, &b, k, &spec, Route::HARD, 0).unwrap().value;
                let y = rank_divergence(&fa, &fb, k, &spec, Route::HARD, 0).unwrap().value;
                ok &= x.to_bits() == y.to_bits();
                checked += 1;
            }
        }
    }
    report.check(
        "10",
        ok && checked > 0,
        format!("τ=0 estimate under 2x+3, exp, x³+x: bit-identical in {checked} cases"),
    );
}

fn transport(report: &mut Report) {
    // gradient against central differences
    let mut r = rng(99);
    let kinds = [EntropyKind::Kl, EntropyKind::JensenShannon, EntropyKind::ChiSq, EntropyKind::SqHellinger];
    let mut worst: f64 = 0.0;
    for trial in 0..100 {
        let spec = EntropySpec::new(kinds[trial % kinds.len()]);
        let k = [4, 16, 32][trial % 3];
        let u: Vec<f64> = (0..r.random_range(8..48)).map(|_| r.random_range(0.05..0.95)).collect();
        let g = rank_energy_gradient(&u, k, &spec).unwrap();
        let energy = RankEnergy::new(k, spec);
        let h = 1e-5;
        let fd: Vec<f64> = (0..u.len())
            .map(|i| {
                let (mut up, mut dn) = (u.clone(), u.clone());
                up[i] += h;
                dn[i] -= h;
                (energy.value(&up) - energy.value(&dn)) / (2.0 * h)
            })
            .collect();
        let num = g.iter().zip(&fd).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let den = fd.iter().map(|b| b * b).sum::<f64>().sqrt();
        worst = worst.max(num / den);
    }

    // the proximal objective never rises
    let mut prox_ok = true;
    for trial in 0..200 {
        let energy = RankEnergy::new([8, 32, 64][trial % 3], EntropySpec::new(kinds[trial % kinds.len()]));
        let u0: Vec<f64> = (0..64).map(|_| r.random::<f64>().powi(2)).collect();
        let eta = [0.01, 0.1, 1.0][trial % 3];
        let out = rank_prox_with(&energy, &u0, eta, 10, 0.05).unwrap();
        prox_ok &= out.objective_end <= out.objective_start;
    }

    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config("transport_two_blobs.toml", &[]);
    cfg.output = dir.path().join("full");
    let states = run_transport_experiment(&cfg).unwrap();
    let files = write_transport(&cfg, &states).unwrap();
    let trace = &states.last().unwrap().trace;
    let (e0, e_end) = (trace[0].energy, trace[trace.len() - 1].energy);
    let step_files = files.iter().filter(|p| p.to_string_lossy().contains("_step_")).count();

    // the header records the output directory, so both runs share it
    let rerun = || -> Vec<(PathBuf, Vec<u8>)> {
        let mut c = config("transport_two_blobs.toml", &["steps=40", "snapshots=[0, 20, 40]"]);
        c.output = dir.path().join("rerun");
        let _ = std::fs::remove_dir_all(&c.output);
        let states = run_transport_experiment(&c).unwrap();
        write_transport(&c, &states)
            .unwrap()
            .into_iter()
            .map(|p| (PathBuf::from(p.file_name().unwrap()), std::fs::read(&p).unwrap()))
            .collect()
    };
    let same = rerun() == rerun();

    report.check(
        "11",
        worst < 1e-5 && prox_ok && e_end < 0.15 * e0 && step_files == 9 && same,
        format!(
            "gradient rel. err {worst:.1e} (100 configs); prox nonincreasing in 200 calls: {prox_ok}; two-blobs energy {e0:.3} → {e_end:.4} ({:.1}%) in {} steps, {step_files} snapshots; identical reruns: {same}",
            100.0 * e_end / e0,
            trace.len() - 1
        ),
    );
}

fn variance_decay(report: &mut Report) {
    let rows = run_bench1d(&config("variance_tv.toml", &[])).unwrap();
    let scaled: Vec<f64> = rows.iter().map(|r| r.std_ratio * r.reference * (r.n as f64).sqrt()).collect();
    let hi = scaled.iter().cloned().fold(f64::MIN, f64::max);
    let lo = scaled.iter().cloned().fold(f64::MAX, f64::min);
    let shown: Vec<String> = rows.iter().zip(&scaled).map(|(r, s)| format!("N={} {s:.3}", r.n)).collect();
    report.check(
        "12",
        hi / lo <= 1.6,
        format!("std·√N of TV K=64 over 30 seeds: {}; max/min {:.2} ≤ 1.6", shown.join(", "), hi / lo),
    );
}

type Criterion = (&'static str, fn(&mut Report));

fn main() {
    let start = Instant::now();
    let mut report = Report::default();
    let suite: [Criterion; 12] = [
        ("1", univariate_benchmark),
        ("2", kl_versus_size),
        ("3", sliced_benchmark),
        ("4", rate_slopes),
        ("5", reference_constants),
        ("6", monotone_in_order),
        ("7", uniform_at_equality),
        ("8", tv_identity),
        ("9", bounds),
        ("10", pushforward),
        ("11", transport),
        ("12", variance_decay),
    ];
    for (id, run) in suite {
        let t = Instant::now();
        run(&mut report);
        eprintln!("  criterion {id} took {:.1}s", t.elapsed().as_secs_f64());
    }
    let failed: Vec<&Line> = report.lines.iter().filter(|l| !l.pass).collect();
    let unexpected: Vec<&str> = failed
        .iter()
        .filter(|l| !KNOWN_SHORTFALLS.contains(&l.id.as_str()))
        .map(|l| l.id.as_str())
        .collect();
    println!(
        "acceptance: {} of {} lines pass, {} known shortfalls, {} unexpected failures ({:.0}s)",
        report.lines.len() - failed.len(),
        report.lines.len(),
        failed.len() - unexpected.len(),
        unexpected.len(),
        start.elapsed().as_secs_f64()
    );
    if !unexpected.is_empty() {
        for l in failed.iter().filter(|l| unexpected.contains(&l.id.as_str())) {
            eprintln!("unexpected failure {}: {}", l.id, l.text);
        }
        std::process::exit(1);
    }
}
