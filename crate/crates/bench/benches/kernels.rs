use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;
use ymqm_bench::mid_params;
use ymqm_core::{heat_kernel, special, spectral, wk::Potential, BasisSpec};

fn closed_forms(c: &mut Criterion) {
    let p = mid_params();
    c.bench_function("tf_partition_n2", |b| b.iter(|| heat_kernel::tf_partition_n2(black_box(&p))));
    c.bench_function("z2_closed_n2", |b| b.iter(|| heat_kernel::z2_closed_n2(black_box(&p))));
    c.bench_function("whittaker_w", |b| {
        let args = special::WhittakerArgs::for_moment(2, 1, 0.5).unwrap();
        b.iter(|| special::whittaker_w(black_box(args)))
    });
}

fn symbolic(c: &mut Criterion) {
    c.bench_function("wk_kernels_order4_n2", |b| {
        let pot = Potential::yang_mills_higgs(2);
        b.iter(|| ymqm_core::wk::wk_kernels(&pot, black_box(4)))
    });
}

fn diagonalization(c: &mut Criterion) {
    let p = mid_params();
    c.bench_function("spectrum_n2_cutoff24", |b| {
        b.iter(|| spectral::build_hamiltonian(black_box(&p), &BasisSpec::new(24)).and_then(|h| h.all_eigenvalues()))
    });
}

criterion_group!(benches, closed_forms, symbolic, diagonalization);
criterion_main!(benches);
