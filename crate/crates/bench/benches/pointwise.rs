use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use focalnet::report::evaluate_grid;
use focalnet::{frame_point, proposition_report, ToleranceSet};
use focalnet_bench::{lattice, program};

fn pointwise(c: &mut Criterion) {
    let tol = ToleranceSet::default();
    let points = lattice(4);
    for name in ["graph_generic", "dini"] {
        let prog = program(name);
        c.bench_function(&format!("frame_point/{name}"), |b| {
            b.iter(|| {
                for &(u, v) in &points {
                    let _ = black_box(frame_point(&prog, u, v, &tol));
                }
            })
        });
        let frames: Vec<_> = points.iter().filter_map(|&(u, v)| frame_point(&prog, u, v, &tol).ok()).collect();
        c.bench_function(&format!("proposition_report/{name}"), |b| {
            b.iter(|| {
                for fp in &frames {
                    let _ = black_box(proposition_report(fp, &tol));
                }
            })
        });
    }
}

fn grid(c: &mut Criterion) {
    let tol = ToleranceSet::default();
    let prog = program("enneper");
    c.bench_function("evaluate_grid/enneper_16x16", |b| b.iter(|| evaluate_grid(&prog, 16, 16, &tol).expect("grid")));
}

criterion_group!(benches, pointwise, grid);
criterion_main!(benches);
