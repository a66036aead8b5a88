use criterion::{criterion_group, criterion_main, Criterion};
use hypermsg_core::autodiff::Tape;
use hypermsg_core::bp::{self, CheckUpdate, DecodeConfig};
use hypermsg_core::channel::{self, GaussianSource};
use hypermsg_core::codes::{bank, parse_alist, to_alist};
use hypermsg_core::hyperdec::HyperDecoder;
use hypermsg_core::tanner::TannerGraph;
use hypermsg_core::train::{multiloss, DecoderModel, LossNorm};
use std::hint::black_box;

fn frame(h: &hypermsg_core::codes::ParityCheckMatrix, snr_db: f64, seed: u64) -> (f64, Vec<f64>) {
    let sigma = channel::sigma_from_ebn0(snr_db, h.code_rate()).unwrap();
    let mut noise = GaussianSource::from_seed(seed, &[]);
    let signal = vec![1.0; h.num_vars()];
    (sigma, channel::transmit(&signal, sigma, &mut noise))
}

fn bench_plain_decode(c: &mut Criterion) {
    let h = bank::get("BCH(63,51)").unwrap();
    let graph = TannerGraph::build(&h);
    let (sigma, y) = frame(&h, 4.0, 7);
    let llr = channel::llr(&y, sigma).unwrap();
    let cfg = DecodeConfig::plain(5);
    c.bench_function("plain_decode_bch_63_51", |b| {
        b.iter(|| bp::decode(&graph, black_box(&llr), &cfg, None))
    });
}

fn bench_hyper_decode(c: &mut Criterion) {
    let h = bank::get("BCH(15,11)").unwrap();
    let graph = TannerGraph::build(&h);
    let dec = HyperDecoder::for_graph(&graph, &[16, 16, 16], &[12], CheckUpdate::ExactArctanh);
    let store = dec.init_store(3);
    let (sigma, y) = frame(&h, 4.0, 9);
    let llr = channel::llr(&y, sigma).unwrap();
    c.bench_function("hyper_decode_bch_15_11", |b| {
        b.iter(|| dec.decode(&graph, black_box(&llr), 5, true, &store, true))
    });
}

fn bench_unroll_backward(c: &mut Criterion) {
    let h = bank::get("BCH(15,11)").unwrap();
    let graph = TannerGraph::build(&h);
    let dec = HyperDecoder::for_graph(&graph, &[16, 16, 16], &[12], CheckUpdate::ExactArctanh);
    let model = DecoderModel::Hyper { decoder: dec, damped: true };
    let store = model.init_store(&graph, 3);
    let (sigma, y) = frame(&h, 3.0, 11);
    let llr = channel::llr(&y, sigma).unwrap();
    let targets = vec![0u8; h.num_vars()];
    c.bench_function("unroll_and_backward_bch_15_11", |b| {
        let mut tape = Tape::new();
        b.iter(|| {
            tape.clear();
            let trace = model.unroll(&mut tape, &store, &graph, llr.values(), 3);
            let loss = multiloss(&mut tape, &trace, &targets, LossNorm::PerBit);
            black_box(tape.backward(loss, &store))
        })
    });
}

fn bench_alist_parse(c: &mut Criterion) {
    let h = bank::get("BCH(63,51)").unwrap();
    let text = to_alist(&h);
    c.bench_function("alist_parse_bch_63_51", |b| {
        b.iter(|| parse_alist(black_box(&text)).unwrap())
    });
}

criterion_group!(
    benches,
    bench_plain_decode,
    bench_hyper_decode,
    bench_unroll_backward,
    bench_alist_parse
);
criterion_main!(benches);
