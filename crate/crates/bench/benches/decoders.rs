use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

use procflow::numeric::{Encoder, EncoderConfig, ParamStore};
use procflow::parser::{cle_decode, NEG_INF};
use procflow::synthetic::{generate_corpus, SyntheticDomain};
use procflow::tagger::viterbi;

fn arc_matrix(n: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let mut a = Array2::from_shape_simple_fn((n + 1, n + 1), || rng.gen_range(-3.0..3.0));
    for v in 0..=n {
        a[[n, v]] = NEG_INF;
        a[[v, v]] = NEG_INF;
    }
    a
}

fn cle(c: &mut Criterion) {
    let mut group = c.benchmark_group("cle_decode");
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in [8, 16, 32] {
        let a = arc_matrix(n, &mut rng);
        group.bench_with_input(BenchmarkId::from_parameter(n), &a, |b, a| {
            b.iter(|| cle_decode(black_box(a.view())).unwrap())
        });
    }
    group.finish();
}

fn crf(c: &mut Criterion) {
    let mut group = c.benchmark_group("viterbi_21_labels");
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let transitions = Array2::from_shape_simple_fn((23, 23), || rng.gen_range(-1.0..1.0));
    for len in [50, 200] {
        let emissions = Array2::from_shape_simple_fn((len, 21), || rng.gen_range(-1.0..1.0));
        group.bench_with_input(BenchmarkId::from_parameter(len), &emissions, |b, e| {
            b.iter(|| viterbi(black_box(e.view()), transitions.view()))
        });
    }
    group.finish();
}

fn encoder(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut store = ParamStore::new();
    let enc = Encoder::new(&mut store, EncoderConfig::default(), "encoder", &mut rng).unwrap();
    let doc = generate_corpus(&SyntheticDomain::cooking(), 1, 4).remove(0).document;
    c.bench_function("encoder_forward", |b| b.iter(|| enc.forward(&store, black_box(&doc))));
}

criterion_group!(benches, cle, crf, encoder);
criterion_main!(benches);
