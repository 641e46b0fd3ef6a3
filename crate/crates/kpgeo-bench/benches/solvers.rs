use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};
use kpgeo::disc_family::{Background, DiscProblem, IterationConfig};
use kpgeo::elliptic::PoissonSolver;
use kpgeo::fields::{holder_norm, GridField, HolderIndex, PlanarDomainGrid, Support, TorusGrid};
use kpgeo::geodesic::cosine_profile;
use kpgeo::nash_moser::{choose_indices, derive_schedule};
use kpgeo::potential::disc_potential;
use kpgeo::smoothing::smooth;
use kpgeo::strip_geodesic::{StripGeometry, StripProblem, StripTriple};
use kpgeo_bench::{disc_case, torus_field};

fn fields(c: &mut Criterion) {
    let u = torus_field(64);
    c.bench_function("smooth_64x64_q8", |b| b.iter(|| smooth(black_box(&u), 8.0)));
    c.bench_function("holder_norm_64x64_r2.5", |b| b.iter(|| holder_norm(black_box(&u), HolderIndex::new(2, 0.5)).unwrap()));
}

fn elliptic(c: &mut Criterion) {
    let grid = Arc::new(PlanarDomainGrid::disc(32, 1024).unwrap());
    let solver = PoissonSolver::new(grid.clone()).unwrap();
    let f: Vec<f64> = (0..grid.n_interior()).map(|k| grid.node_pos(k).re).collect();
    let g: Vec<f64> = (0..grid.boundary_samples).map(|k| grid.boundary_point(k).im).collect();
    c.bench_function("poisson_disc_32", |b| b.iter(|| solver.solve_slice(black_box(&f), black_box(&g))));
}

fn disc_family(c: &mut Criterion) {
    let (dom, bg, data) = disc_case(64, 16, 0.05);
    let cfg = IterationConfig::default();
    c.bench_function("disc_family_m64_t16", |b| {
        b.iter(|| DiscProblem::new(&dom, &bg, data.clone()).unwrap().solve(&cfg).unwrap())
    });
    let mut group = c.benchmark_group("potential");
    group.sample_size(10);
    group.bench_function("disc_potential_m64_c16", |b| b.iter(|| disc_potential(&dom, &bg, data.clone(), 16, &cfg).unwrap()));
    group.finish();
}

fn strip(c: &mut Criterion) {
    let torus = TorusGrid::new(16, 1);
    let geom = StripGeometry::with_spacing(5.0, 6, 0.04).unwrap();
    let prob = StripProblem::new(&geom, Background::flat(torus));
    let tr = StripTriple::endpoints(geom.window, GridField::zeros(Support::Torus, torus), cosine_profile(torus, 0.05));
    let mut group = c.benchmark_group("strip");
    group.sample_size(10);
    group.bench_function("strip_apply_theta5_w6", |b| b.iter(|| prob.apply(black_box(&tr)).unwrap()));
    group.finish();
}

fn schedule(c: &mut Criterion) {
    c.bench_function("schedule_k5_j0.1", |b| {
        b.iter(|| {
            let idx = choose_indices(5.0, 0.1).unwrap();
            derive_schedule(&idx, 1.5, 1.5, 1.0, 0.05, 20).unwrap()
        })
    });
}

criterion_group!(benches, fields, elliptic, disc_family, strip, schedule);
criterion_main!(benches);
