use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use diskchain::bohr::{k2_certificate, reference_d, reference_rho, REFERENCE_DEG};
use diskchain::numlin::spectral_norm;
use diskchain::realize::{eval_realization_scalar, random_colligation};
use diskchain::{CMatrix, DomainSpec, C64};

fn bench_k2(c: &mut Criterion) {
    let (d, rho) = (reference_d(), reference_rho());
    c.bench_function("k2_certificate/deg12", |b| {
        b.iter(|| k2_certificate(black_box(&d), black_box(&rho), REFERENCE_DEG).unwrap())
    });
}

fn bench_norm(c: &mut Criterion) {
    let data: Vec<C64> = (0..64 * 64).map(|i| C64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos())).collect();
    let a = CMatrix::from_vec(64, 64, data).unwrap();
    c.bench_function("spectral_norm/64", |b| b.iter(|| spectral_norm(black_box(&a)).unwrap()));
}

fn bench_realization(c: &mut Criterion) {
    let spec = DomainSpec::annulus(1.0, 0.4);
    let col = random_colligation(spec.k(), 4, 2, 2, 0.9, 7).unwrap();
    let z = C64::new(0.3, 0.5);
    c.bench_function("realization_eval/k2m4", |b| {
        b.iter(|| eval_realization_scalar(black_box(&col), &spec, black_box(z)).unwrap())
    });
}

criterion_group!(kernels, bench_k2, bench_norm, bench_realization);
criterion_main!(kernels);
