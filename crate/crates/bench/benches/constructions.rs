use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use hyperdescent::descent::{limit_over_hypercover, roundtrip_theorem_check, RoundtripConfig, SetPresheaf};
use hyperdescent::fin::{build_cf, symmetrize, FinMap};
use hyperdescent::homotopy::{homology, verify_sym_coinitiality_instance};
use hyperdescent::hypercover::{cech_from_cover, refine_to_basis, Hypercover};
use hyperdescent::simplicial::{boundary_of_simplex, standard_simplex};
use hyperdescent::FiniteSpace;

fn simplicial(c: &mut Criterion) {
    let k = boundary_of_simplex(2);
    c.bench_function("symmetrize ∂Δ2 to level 3", |b| b.iter(|| symmetrize(black_box(&k), 3).unwrap()));

    let f = FinMap::new(1, vec![0, 1, 0, 1]).unwrap();
    c.bench_function("C^f homology through degree 3", |b| {
        b.iter(|| homology(&build_cf(black_box(&f), 4), 3).unwrap())
    });

    let d1 = standard_simplex(1);
    c.bench_function("sym coinitiality Δ1 levels ≤ 2", |b| {
        b.iter(|| verify_sym_coinitiality_instance(black_box(&d1), 2, 2).unwrap())
    });
}

fn hypercovers(c: &mut Criterion) {
    let x = FiniteSpace::pseudocircle();
    let abc = x.open(["a", "b", "c"]).unwrap();
    let abd = x.open(["a", "b", "d"]).unwrap();
    let cech = cech_from_cover(&x, x.full(), &[abc, abd], 3).unwrap();
    c.bench_function("check Čech hypercover at N = 3", |b| b.iter(|| black_box(&cech).check(3).unwrap()));

    let trivial = Hypercover::trivial(&x, x.full()).unwrap();
    let basis = x.minimal_basis();
    c.bench_function("refine trivial hypercover to level 2", |b| {
        b.iter(|| refine_to_basis(black_box(&trivial), &basis, 2).unwrap())
    });

    let refined = refine_to_basis(&trivial, &basis, 2).unwrap();
    let index = x.all_opens_basis().members().to_vec();
    let f = SetPresheaf::maps_to_two(&x, &index).unwrap();
    c.bench_function("limit over refined hypercover", |b| {
        b.iter(|| limit_over_hypercover(black_box(&f), refined.hypercover()).unwrap())
    });
}

fn descent(c: &mut Criterion) {
    let x = FiniteSpace::sierpinski();
    let basis = x.all_opens_basis();
    let config = RoundtripConfig::default();
    c.bench_function("Sierpinski round trip, cap 2", |b| {
        b.iter(|| roundtrip_theorem_check(black_box(&basis), &config, &[]).unwrap())
    });
}

criterion_group!(benches, simplicial, hypercovers, descent);
criterion_main!(benches);
