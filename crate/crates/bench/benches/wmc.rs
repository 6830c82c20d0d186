use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use nesy_bench::bernoulli_workload;
use nesy_core::{compile, grad_wmc, infer, infer_compiled, Belief, LogicFn, MeasureSpec};

fn exact_backends(c: &mut Criterion) {
    let mut group = c.benchmark_group("wmc");
    group.sample_size(20);
    for atoms in [8, 12, 16] {
        let (model, f) = bernoulli_workload(atoms, atoms * 2, 7);
        group.bench_with_input(BenchmarkId::new("enumeration", atoms), &atoms, |b, _| {
            b.iter(|| {
                infer(
                    &model,
                    &LogicFn::Direct,
                    black_box(&f),
                    &MeasureSpec::Counting,
                    None,
                )
                .unwrap()
            })
        });
        group.bench_with_input(BenchmarkId::new("circuit", atoms), &atoms, |b, _| {
            b.iter(|| infer_compiled(&model, &LogicFn::Direct, black_box(&f), None).unwrap())
        });
    }
    group.finish();
}

fn circuit_reuse(c: &mut Criterion) {
    let (model, f) = bernoulli_workload(24, 60, 11);
    let table = model.table();
    let Belief::Bernoulli(b) = model.belief() else {
        unreachable!()
    };
    let circuit = compile(&f, table).unwrap();
    let probs = b.dense(table.len());
    c.bench_function("compile/24", |bench| {
        bench.iter(|| compile(black_box(&f), table).unwrap())
    });
    c.bench_function("evaluate/24", |bench| {
        bench.iter(|| circuit.wmc(black_box(&probs)))
    });
    c.bench_function("gradient/24", |bench| {
        bench.iter(|| grad_wmc(&circuit, black_box(b), table))
    });
}

criterion_group!(benches, exact_backends, circuit_reuse);
criterion_main!(benches);
