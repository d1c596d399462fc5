use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use stadium_limits::billiard::DEFAULT_CAP;
use stadium_limits::limits::birkhoff_sum;
use stadium_limits::observables::Observable;
use stadium_limits::sampling::{sample_mu, sample_mu0, SeedSpec};
use stadium_limits::{forward, induced_forward, macro_forward, StadiumGeometry};

fn collision_map(c: &mut Criterion) {
    let g = StadiumGeometry::new(2.0).unwrap();
    let starts: Vec<_> = (0..1024)
        .map(|i| sample_mu0(&g, SeedSpec::new(1, i)))
        .collect();
    c.bench_function("forward x1024", |b| {
        b.iter(|| {
            for &x in &starts {
                black_box(forward(&g, black_box(x)).unwrap());
            }
        })
    });
    c.bench_function("macro_forward x1024", |b| {
        b.iter(|| {
            for &x in &starts {
                black_box(macro_forward(&g, black_box(x), DEFAULT_CAP).unwrap());
            }
        })
    });
}

fn induced_map(c: &mut Criterion) {
    let g = StadiumGeometry::new(2.0).unwrap();
    let starts: Vec<_> = (0..1024)
        .map(|i| sample_mu(&g, SeedSpec::new(2, i)).unwrap())
        .collect();
    c.bench_function("induced_forward x1024", |b| {
        b.iter(|| {
            for &x in &starts {
                black_box(induced_forward(&g, black_box(x)).unwrap());
            }
        })
    });
}

fn birkhoff(c: &mut Criterion) {
    let g = StadiumGeometry::new(2.0).unwrap();
    let tau0 = Observable::tau0(&g);
    let x = sample_mu0(&g, SeedSpec::new(3, 0));
    c.bench_function("birkhoff_sum n=4096", |b| {
        b.iter(|| black_box(birkhoff_sum(&g, &tau0, black_box(x), 4096).unwrap()))
    });
}

criterion_group!(benches, collision_map, induced_map, birkhoff);
criterion_main!(benches);
