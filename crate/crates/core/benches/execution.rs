use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use noma_core::montecarlo::{simulate_bpsk_link, McConfig};
use noma_core::scenario::Scenario;
use noma_core::sweep::{run_sweep, Axis, Grid, Metric, SweepSpec};
use noma_core::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn link(c: &mut Criterion) {
    let s = Scenario::new(0.75, 10.0, 1.0, 1.0).unwrap();
    let cfg = McConfig {
        chunk: 1 << 16,
        ..McConfig::new(1 << 20, 7).unwrap()
    };
    let mut g = c.benchmark_group("simulate_bpsk_link");
    g.sample_size(10);
    for (name, mode) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &m| {
            b.iter(|| simulate_bpsk_link(&s, &cfg.with_execution(m)).unwrap())
        });
    }
    g.finish();
}

fn sweep(c: &mut Criterion) {
    let mut g = c.benchmark_group("capacity_sweep");
    g.sample_size(10);
    for (name, mode) in MODES {
        let spec = SweepSpec {
            metric: Metric::Capacity,
            scenario: Scenario::new(0.8, 0.0, 1.0, 1.0).unwrap(),
            zeta: 0.0,
            axis: Axis::Snr,
            grid: Grid::new(0.0, 1.0, Some(30.0)),
            mc: None,
            execution: mode,
        };
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| run_sweep(&spec).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, link, sweep);
criterion_main!(benches);
