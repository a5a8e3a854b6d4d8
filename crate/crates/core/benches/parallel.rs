use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;

use weighted_lp::algebra::{lpalg_ratio_with, GroupFunction};
use weighted_lp::asymptotics::{case4_sum_check, doubling_grid, f_table, LaplaceProblem};
use weighted_lp::weight::{Weight, WeightSpec};
use weighted_lp::{Execution, GroupModel};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn dense(model: &GroupModel, radius: usize) -> GroupFunction {
    let pts = model.enumerate_ball(radius).unwrap();
    GroupFunction::from_pairs(model, pts.iter().enumerate().map(|(i, &x)| (x, Complex64::new(1.0 / (1.0 + i as f64), (i as f64).cos())))).unwrap()
}

fn convolution(c: &mut Criterion) {
    let mut group = c.benchmark_group("convolve");
    let z2 = GroupModel::integer_lattice(2).unwrap();
    let h = GroupModel::heisenberg();
    for (label, model, radius) in [("Z^2", &z2, 24), ("Heisenberg", &h, 8)] {
        let f = dense(model, radius);
        for (mode, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(mode, label), &exec, |b, &exec| {
                b.iter(|| black_box(f.convolve_with(&f, exec, usize::MAX).unwrap()))
            });
        }
    }
    group.finish();
}

fn ratio_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("lpalg_ratio");
    group.sample_size(20);
    let w = Weight::on(WeightSpec::subexponential(1.0, 0.5), &GroupModel::integers()).unwrap();
    for (mode, exec) in MODES {
        group.bench_function(mode, |b| b.iter(|| black_box(lpalg_ratio_with(&w, 2.0, 400, exec).unwrap())));
    }
    group.finish();
}

fn axiom_scan(c: &mut Criterion) {
    let mut group = c.benchmark_group("weight_axioms");
    group.sample_size(20);
    let w = Weight::on(WeightSpec::product(WeightSpec::subexponential(0.5, 0.5), WeightSpec::polynomial(1.0, 2.0)), &GroupModel::heisenberg()).unwrap();
    for (mode, exec) in MODES {
        group.bench_function(mode, |b| b.iter(|| black_box(w.check_weight_axioms_with(6, exec).unwrap())));
    }
    group.finish();
}

fn laplace(c: &mut Criterion) {
    let mut group = c.benchmark_group("laplace");
    group.sample_size(10);
    let p = LaplaceProblem::new(1.0, 0.5, 2.0).unwrap();
    let xs = doubling_grid(1.0, 4096.0);
    for (mode, exec) in MODES {
        group.bench_function(BenchmarkId::new("f_table", mode), |b| b.iter(|| black_box(f_table(&p, &xs, exec).unwrap())));
        group.bench_function(BenchmarkId::new("case4", mode), |b| b.iter(|| black_box(case4_sum_check(1.0, 0.5, 2.0, 2000, exec).unwrap())));
    }
    group.finish();
}

criterion_group!(benches, convolution, ratio_sweep, axiom_scan, laplace);
criterion_main!(benches);
