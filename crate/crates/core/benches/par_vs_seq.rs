use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use npc_core::complex::Complex;
use npc_core::generators::gen_equilateral_disc;
use npc_core::metric::{delta_estimate, DeltaMethod};
use npc_core::par;
use npc_core::sap::sap_probe;
use npc_core::wsys::check_weakly_systolic;

fn both(c: &mut Criterion, group: &str, inputs: &[(u32, Complex)], f: impl Fn(&Complex) + Copy) {
    let mut g = c.benchmark_group(group);
    g.sample_size(10);
    for (r, cx) in inputs {
        g.bench_with_input(BenchmarkId::new("parallel", r), cx, |b, cx| b.iter(|| f(cx)));
        g.bench_with_input(BenchmarkId::new("sequential", r), cx, |b, cx| b.iter(|| par::sequential(|| f(cx))));
    }
    g.finish();
}

fn discs(radii: &[u32]) -> Vec<(u32, Complex)> {
    radii.iter().map(|&r| (r, gen_equilateral_disc(r))).collect()
}

fn wsys(c: &mut Criterion) {
    both(c, "check_weakly_systolic", &discs(&[3, 5]), |cx| {
        check_weakly_systolic(cx).unwrap();
    });
}

fn delta(c: &mut Criterion) {
    both(c, "delta_four_point", &discs(&[2, 3]), |cx| {
        delta_estimate(cx, DeltaMethod::FourPointExhaustive).unwrap();
    });
}

fn sap(c: &mut Criterion) {
    both(c, "sap_probe_n1", &discs(&[2]), |cx| {
        sap_probe(cx, 1, u32::MAX, 10_000).unwrap();
    });
}

criterion_group!(benches, wsys, delta, sap);
criterion_main!(benches);
