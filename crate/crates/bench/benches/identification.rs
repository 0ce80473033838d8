use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;
use steer_core::driver::DriverParams;
use steer_core::ident::{generate_dataset, identify, predict, AngleObservation, DataMode, IdentConfig, NoiseSpec};
use steer_core::simulator::Scenario;
use steer_core::subjects::haptic_subject;

fn identification(c: &mut Criterion) {
    let theta = haptic_subject(5, &DriverParams::IDENT_DEFAULT).unwrap();
    let data = generate_dataset(
        &theta,
        &Scenario::default(),
        DataMode::Haptic,
        AngleObservation::TargetAngle,
        &NoiseSpec::default(),
    )
    .unwrap();
    let cfg = IdentConfig::default();

    let mut group = c.benchmark_group("ident");
    group.sample_size(10);
    group.bench_function("predict_120s", |b| {
        b.iter(|| predict(black_box(&theta), black_box(&data)))
    });
    group.bench_function("identify_table6_row5", |b| {
        b.iter(|| identify(black_box(&data), black_box(&cfg)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, identification);
criterion_main!(benches);
