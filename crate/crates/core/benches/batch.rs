use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rasp::batch::{evaluate_many, evaluate_many_sequential};
use rasp::stdlib::Stdlib;
use rasp::Sequence;

fn brackets(rng: &mut StdRng, len: usize) -> Sequence {
    let text: String = (0..len)
        .map(|_| ['(', ')', '{', '}', '[', ']'][rng.gen_range(0..6)])
        .collect();
    Sequence::from_chars(&text)
}

fn batch(c: &mut Criterion) {
    let lib = Stdlib::load_all().expect("library loads");
    let root = lib.sop("dyck3PTF").expect("dyck3PTF is bound").id();
    let mut rng = StdRng::seed_from_u64(1);
    let mut group = c.benchmark_group("dyck3PTF batch");
    for (count, len) in [(64, 16), (256, 32), (64, 128)] {
        let inputs: Vec<Sequence> = (0..count).map(|_| brackets(&mut rng, len)).collect();
        let id = format!("{count}x{len}");
        group.bench_with_input(BenchmarkId::new("parallel", &id), &inputs, |b, inputs| {
            b.iter(|| evaluate_many(&lib.interp.graph, root, inputs))
        });
        group.bench_with_input(BenchmarkId::new("sequential", &id), &inputs, |b, inputs| {
            b.iter(|| evaluate_many_sequential(&lib.interp.graph, root, inputs))
        });
    }
    group.finish();
}

criterion_group!(benches, batch);
criterion_main!(benches);
