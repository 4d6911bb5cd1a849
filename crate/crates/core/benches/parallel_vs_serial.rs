//! Data-parallel hot loops against their sequential fallbacks.
//!
//! The two inner loops that dominate wall time are the grid sweep of jet
//! magnitudes during calibration and the random-series trials of the
//! contraction estimate. Both run through `exec::map`, which uses the rayon
//! pool under the default `parallel` feature; `exec::map_serial` is the
//! always-available sequential reference measured here side by side.

use criterion::{criterion_group, criterion_main, Criterion};
use pde_series::exec;
use pde_series::fixed_point::{apply_m, OperatorBundle};
use pde_series::fixtures;
use pde_series::majorant::SupSequence;
use pde_series::norms::{default_config, g_norm};
use pde_series::series::JetSeries;
use pde_series::xflow::grid_square;
use pde_series::Complex64;
use rand::{Rng, SeedableRng};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn bench_jet_grid(criterion: &mut Criterion) {
    let p = fixtures::example1(8);
    let grid = grid_square(c(0.0), c(0.0), 0.2, 24);
    let jet_order = 13;
    let sweep = |points: Vec<(Complex64, Complex64)>, parallel: bool| -> f64 {
        let body = |(t, z): (Complex64, Complex64)| -> f64 {
            p.x.x_jets(t, z, jet_order, 1.0)
                .unwrap()
                .into_iter()
                .map(|v| v.norm())
                .fold(0.0, f64::max)
        };
        let mags = if parallel {
            exec::map(points, body)
        } else {
            exec::map_serial(points, body)
        };
        mags.into_iter().fold(0.0, f64::max)
    };
    let mut group = criterion.benchmark_group("jet_grid_sweep");
    group.bench_function("exec_map", |b| {
        b.iter(|| sweep(std::hint::black_box(grid.clone()), true))
    });
    group.bench_function("serial", |b| {
        b.iter(|| sweep(std::hint::black_box(grid.clone()), false))
    });
    group.finish();
}

fn random_series(bundle: &OperatorBundle, seed: u64) -> JetSeries {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut s = JetSeries::zero(bundle.a_order, bundle.degree_cap);
    for alpha in 0..=bundle.a_order {
        for _ in 0..3 {
            let mut l = vec![0u32; alpha + 1];
            l[rng.gen_range(0..=alpha)] = rng.gen_range(0..3);
            let idx =
                pde_series::index::MultiIndex::new(rng.gen_range(0..3), rng.gen_range(0..3), &l);
            s.level_mut(alpha).add_term(idx, c(rng.gen_range(0.0..1.0)));
        }
    }
    s
}

fn bench_contraction_trials(criterion: &mut Criterion) {
    let p = fixtures::example1(8);
    let a_order = 12;
    let grid = fixtures::example1_grid(3);
    let region = pde_series::xflow::calibrate(&p.x, &grid, p.radius, 2.0, a_order + 1).unwrap();
    let sup = SupSequence::from_problem(&p, p.radius, region.rho, region.nu, a_order).unwrap();
    let bundle = OperatorBundle::from_sup(&sup, p.s_order, &p.ks, a_order, 8).unwrap();
    let cfg = default_config(region.rho);
    let trials: Vec<JetSeries> = (0..24).map(|i| random_series(&bundle, i)).collect();
    let factor = |series: Vec<JetSeries>, parallel: bool| -> f64 {
        let body = |s: JetSeries| -> f64 {
            let norm = g_norm(&s, &cfg);
            if norm == 0.0 {
                return 0.0;
            }
            g_norm(&apply_m(&bundle, &s).unwrap(), &cfg) / norm
        };
        let factors = if parallel {
            exec::map(series, body)
        } else {
            exec::map_serial(series, body)
        };
        factors.into_iter().fold(0.0, f64::max)
    };
    let mut group = criterion.benchmark_group("contraction_trials");
    group.sample_size(20);
    group.bench_function("exec_map", |b| {
        b.iter(|| factor(std::hint::black_box(trials.clone()), true))
    });
    group.bench_function("serial", |b| {
        b.iter(|| factor(std::hint::black_box(trials.clone()), false))
    });
    group.finish();
}

criterion_group!(benches, bench_jet_grid, bench_contraction_trials);
criterion_main!(benches);
