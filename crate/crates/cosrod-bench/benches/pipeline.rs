//! Benchmarks along the main analysis pipeline: closed-form solves,
//! defect Hessian assembly, FEM mesh solves, and a full verification case.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use cosrod::*;

fn reference() -> (RodSpec, DefectProfile) {
    let rod = RodSpec::reference_beam();
    let nick = make_nick(&rod, 50e-6, 1.5e-6, 1.5e-6).unwrap();
    (rod, nick)
}

fn bench_closed_form(c: &mut Criterion) {
    let (rod, nick) = reference();
    let q = EndDisplacement::unit(6);

    c.bench_function("solve_ideal", |b| {
        b.iter(|| solve_ideal(black_box(&rod), black_box(&q)).unwrap())
    });
    c.bench_function("ideal_stiffness_12x12", |b| {
        b.iter(|| ideal_stiffness(black_box(&rod)).unwrap())
    });
    c.bench_function("defect_stiffness_hessian", |b| {
        b.iter(|| defect_stiffness(black_box(&rod), black_box(&nick)).unwrap())
    });
    c.bench_function("modal_estimate_tip_mass", |b| {
        let comp = assemble_component(&rod, std::slice::from_ref(&nick)).unwrap();
        b.iter(|| modal_estimate(black_box(&comp), Boundary::CLAMP_END2, 1.573e-10).unwrap())
    });
}

fn bench_fem(c: &mut Criterion) {
    let (rod, nick) = reference();
    let mut group = c.benchmark_group("fem_lowest_mode");
    for n in [16usize, 64, 256] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| {
                let model = build_mesh(&rod, std::slice::from_ref(&nick), n).unwrap();
                lowest_frequency_fem(&model, Boundary::CLAMP_END2, 0.0).unwrap()
            })
        });
    }
    group.finish();

    c.bench_function("verification_case_full_ladder", |b| {
        let case = CaseSpec {
            name: "bench".into(),
            rod: rod.clone(),
            profiles: vec![nick.clone()],
            boundary: Boundary::CLAMP_END2,
            tip_mass_kg: 1.573e-10,
            ladder: vec![8, 16, 32, 64, 128, 256],
        };
        b.iter(|| compare_cases(black_box(std::slice::from_ref(&case))).unwrap())
    });
}

criterion_group!(benches, bench_closed_form, bench_fem);
criterion_main!(benches);
