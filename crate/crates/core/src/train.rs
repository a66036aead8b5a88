//! Training loops for the weighted and generated-weight decoders: batch
//! generation, the multi-iteration logistic loss, divergence monitoring and
//! the Adam loop with damping clipping.
//!
//! All batches transmit the all-zero codeword. The channel is symmetric and
//! every decoder variant here is sign-equivariant (bias-free odd networks,
//! odd check rules), so the error statistics under the all-zero word match
//! those under any codeword; no encoder is needed.
//!
//! Divergence (a non-finite loss, gradient or parameter) is an experimental
//! outcome, not an error: the loop stops at the first bad step, flags the
//! report and leaves the trace truncated right there.

use crate::autodiff::{AdamConfig, Gradients, ParameterStore, Tape, Value};
use crate::bp::{self, CheckUpdate};
use crate::channel::{self, seeded_rng, GaussianSource, LlrVector};
use crate::codes::ParityCheckMatrix;
use crate::hyperdec::HyperDecoder;
use crate::tanner::TannerGraph;
use rand::Rng;
use std::time::{Duration, Instant};

pub const EDGE_WEIGHTS: &str = "edge_weights";

/// Loss normalization mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LossNorm {
    /// Divide by bits x iterations (loss of an uninformative decoder = ln 2).
    #[default]
    PerBit,
    /// Divide by iterations only.
    PerFrame,
}

/// Knobs of one training run. The defaults mirror the usual small-decoder
/// recipe (these exact values are not pinned anywhere authoritative):
/// lr 1e-4, batch 120, SNR range 1..8 dB, 5 unrolled pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub lr: f64,
    pub batch_size: usize,
    pub steps: usize,
    pub snr_range_db: (f64, f64),
    pub seed: u64,
    pub gradient_clip_norm: Option<f64>,
    /// Unrolled iteration pairs.
    pub iterations: usize,
    /// Validation cadence in steps; 0 disables validation.
    pub eval_every: usize,
    pub eval_frames: usize,
    pub loss_norm: LossNorm,
    /// Worker threads for batch-parallel tape evaluation.
    pub threads: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr: 1e-4,
            batch_size: 120,
            steps: 1000,
            snr_range_db: (1.0, 8.0),
            seed: 0,
            gradient_clip_norm: None,
            iterations: 5,
            eval_every: 0,
            eval_frames: 200,
            loss_norm: LossNorm::default(),
            threads: 1,
        }
    }
}

impl TrainConfig {
    fn validate(&self) {
        assert!(self.lr > 0.0, "learning rate must be positive");
        assert!(self.batch_size > 0 && self.iterations > 0);
        assert!(
            self.snr_range_db.0 <= self.snr_range_db.1,
            "SNR range must be ordered"
        );
    }
}

/// Outcome of a run.
#[derive(Debug, Clone)]
pub struct TrainReport {
    pub loss_trace: Vec<f64>,
    pub diverged: bool,
    pub divergence_step: Option<usize>,
    pub final_damping: Option<f64>,
    pub best_val_ber: Option<f64>,
    pub wall_clock: Duration,
}

impl TrainReport {
    /// Per-step loss trace as CSV.
    pub fn loss_csv(&self) -> String {
        let mut out = String::from("step,loss\n");
        for (i, l) in self.loss_trace.iter().enumerate() {
            out.push_str(&format!("{i},{l}\n"));
        }
        out
    }

    /// One-object JSON summary.
    pub fn summary_json(&self) -> String {
        let last = self.loss_trace.last().copied().unwrap_or(f64::NAN);
        format!(
            "{{\"steps\": {}, \"final_loss\": {}, \"diverged\": {}, \"divergence_step\": {}, \"final_damping\": {}, \"best_val_ber\": {}, \"wall_clock_s\": {:.3}}}",
            self.loss_trace.len(),
            last,
            self.diverged,
            self.divergence_step.map_or("null".into(), |s| s.to_string()),
            self.final_damping.map_or("null".into(), |c| c.to_string()),
            self.best_val_ber.map_or("null".into(), |b| b.to_string()),
            self.wall_clock.as_secs_f64(),
        )
    }
}

/// Which trainable decoder a run optimizes.
#[derive(Debug, Clone)]
pub enum DecoderModel {
    /// Classical update with one learned weight per edge.
    Weighted { check_update: CheckUpdate },
    /// Generated-weight decoder, optionally damped.
    Hyper { decoder: HyperDecoder, damped: bool },
}

impl DecoderModel {
    /// Fresh parameters for this model.
    pub fn init_store(&self, graph: &TannerGraph, seed: u64) -> ParameterStore {
        match self {
            DecoderModel::Weighted { .. } => {
                let mut store = ParameterStore::new();
                store.register(EDGE_WEIGHTS, vec![1.0; graph.num_edges()]);
                store
            }
            DecoderModel::Hyper { decoder, .. } => decoder.init_store(seed),
        }
    }

    /// Unrolls one frame, returning per-pair marginal nodes.
    pub fn unroll(
        &self,
        tape: &mut Tape,
        store: &ParameterStore,
        graph: &TannerGraph,
        llr: &[f64],
        iterations: usize,
    ) -> Vec<Vec<Value>> {
        match self {
            DecoderModel::Weighted { check_update } => {
                unroll_weighted(tape, store, graph, llr, iterations, *check_update)
            }
            DecoderModel::Hyper { decoder, damped } => {
                decoder.unroll(tape, store, graph, llr, iterations, *damped)
            }
        }
    }

    /// Plain f64 decode with the current parameters (validation path).
    pub fn decode(
        &self,
        graph: &TannerGraph,
        llr: &LlrVector,
        iterations: usize,
        store: &ParameterStore,
    ) -> bp::DecodeOutput {
        match self {
            DecoderModel::Weighted { check_update } => {
                let cfg = bp::DecodeConfig {
                    iterations,
                    check_update: *check_update,
                    variant: bp::Variant::Weighted,
                    early_stop: true,
                };
                let w = store.values(store.id(EDGE_WEIGHTS).expect("weighted store"));
                bp::decode(graph, llr, &cfg, Some(w))
            }
            DecoderModel::Hyper { decoder, damped } => {
                decoder.decode(graph, llr, iterations, *damped, store, true)
            }
        }
    }

    fn post_step(&self, store: &mut ParameterStore) {
        if let DecoderModel::Hyper { decoder, .. } = self {
            decoder.clip_damping(store);
        }
    }

    fn damping(&self, store: &ParameterStore) -> Option<f64> {
        match self {
            DecoderModel::Weighted { .. } => None,
            DecoderModel::Hyper { decoder, .. } => Some(decoder.damping(store)),
        }
    }
}

/// Unrolled classical decoder with learned edge weights:
/// `x_e = tanh((l_v + sum of w_e' * u_e') / 2)` on the odd step.
pub fn unroll_weighted(
    tape: &mut Tape,
    store: &ParameterStore,
    graph: &TannerGraph,
    llr: &[f64],
    iterations: usize,
    check_update: CheckUpdate,
) -> Vec<Vec<Value>> {
    let wid = store.id(EDGE_WEIGHTS).expect("weighted store");
    let w = tape.bind(store, wid);
    let llr_nodes: Vec<Value> = llr.iter().map(|&v| tape.input(v)).collect();
    let zero = tape.input(0.0);
    let mut state: Vec<Value> = vec![zero; graph.num_edges()];
    let mut trace = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let odd: Vec<Value> = (0..graph.num_edges())
            .map(|e| {
                let slice = graph.extrinsic_var(e);
                let xs: Vec<Value> = slice.iter().map(|&e2| state[e2]).collect();
                let ws: Vec<Value> = slice.iter().map(|&e2| w[e2]).collect();
                let weighted = tape.dot(&xs, &ws);
                let l = llr_nodes[graph.edge(e).var];
                let pre = tape.add(l, weighted);
                let half = tape.scale(pre, 0.5);
                tape.tanh(half)
            })
            .collect();
        state = bp::check_to_var_tape(tape, graph, &odd, check_update);
        trace.push(bp::marginalize_tape(tape, graph, &llr_nodes, &state));
    }
    trace
}

/// Knobs for the update-mimic pretraining phase.
#[derive(Debug, Clone)]
pub struct MimicConfig {
    pub steps: usize,
    pub lr: f64,
    pub batch: usize,
    pub seed: u64,
    /// LLR samples are uniform in +-`llr_span`.
    pub llr_span: f64,
    /// Wide (even-step magnitude) message samples are uniform in
    /// +-`message_span`; narrow samples are uniform in (-1, 1).
    pub message_span: f64,
}

impl Default for MimicConfig {
    fn default() -> Self {
        MimicConfig {
            steps: 1500,
            lr: 1e-3,
            batch: 64,
            seed: 0,
            llr_span: 12.0,
            message_span: 8.0,
        }
    }
}

/// Pretrains the weight generator so the generated update approximates the
/// classical one, `tanh((l + sum of extrinsic) / 2)`, on synthetic samples.
///
/// Starting the generated-weight decoder from random parameters leaves it in
/// a do-nothing optimum (emit zero messages, score on the channel LLRs
/// alone); starting from a classical-update mimic puts it at roughly the
/// classical decoder's quality, and end-to-end fine-tuning improves from
/// there. Returns the mean squared mimic error of the final step.
pub fn pretrain_update_mimic(
    dec: &HyperDecoder,
    store: &mut ParameterStore,
    cfg: &MimicConfig,
) -> f64 {
    let ext = dec.extrinsic_width();
    let adam = AdamConfig {
        lr: cfg.lr,
        ..Default::default()
    };
    let theta_id = store.id(crate::hyperdec::THETA_F).expect("hyper store");
    let damping_id = store.id(crate::hyperdec::DAMPING).expect("hyper store");
    let mut tape = Tape::new();
    let mut last_mse = f64::NAN;
    for step in 0..cfg.steps {
        let mut rng = seeded_rng(cfg.seed, &[0x717c, step as u64]);
        let mut grads = Gradients::zeros_like(store);
        let mut loss_sum = 0.0;
        for _ in 0..cfg.batch {
            // Random active degree; inactive slots stay at the pad value.
            let deg = rng.random_range(0..=ext);
            let mut u = vec![0.0; ext];
            for slot in u.iter_mut().take(deg) {
                let span = if rng.random::<f64>() < 0.5 {
                    1.0
                } else {
                    cfg.message_span
                };
                *slot = span * (2.0 * rng.random::<f64>() - 1.0);
            }
            let l = cfg.llr_span * (2.0 * rng.random::<f64>() - 1.0);
            let target = (0.5 * (l + u.iter().sum::<f64>())).tanh();
            tape.clear();
            let theta_f = tape.bind(store, theta_id);
            let f_in: Vec<Value> = u.iter().map(|&x| tape.input(x.abs())).collect();
            let theta_g = dec.f_spec.apply(&mut tape, &theta_f, &f_in);
            let mut g_in = vec![tape.input(l)];
            g_in.extend(u.iter().map(|&x| tape.input(x)));
            let out = dec.g_spec.apply(&mut tape, &theta_g, &g_in)[0];
            let t = tape.input(target);
            let diff = tape.sub(out, t);
            let loss = tape.mul(diff, diff);
            loss_sum += tape.val(loss);
            grads.add_assign(&tape.backward(loss, store));
        }
        grads.scale(1.0 / cfg.batch as f64);
        store.adam_step(&grads, &adam);
        store.clamp(damping_id, 0.0, 1.0);
        last_mse = loss_sum / cfg.batch as f64;
    }
    last_mse
}

/// Full training recipe for the generated-weight decoder: mimic pretraining
/// followed by end-to-end fine-tuning. `mimic.seed` is ignored; both phases
/// derive from `tune.seed`.
pub fn train_hyper_decoder(
    decoder: &HyperDecoder,
    damped: bool,
    h: &ParityCheckMatrix,
    mimic: &MimicConfig,
    tune: &TrainConfig,
) -> (TrainReport, ParameterStore) {
    let mut store = decoder.init_store(tune.seed);
    let mimic_cfg = MimicConfig {
        seed: tune.seed ^ 0x5151,
        ..mimic.clone()
    };
    pretrain_update_mimic(decoder, &mut store, &mimic_cfg);
    let model = DecoderModel::Hyper {
        decoder: decoder.clone(),
        damped,
    };
    fine_tune(&model, h, tune, store)
}

/// Draws one batch of all-zero-codeword frames with Eb/N0 uniform in
/// `snr_range`; returns the LLR vectors (targets are implicitly all zero).
pub fn make_batch(
    h: &ParityCheckMatrix,
    batch_size: usize,
    snr_range: (f64, f64),
    noise: &mut GaussianSource,
) -> Vec<LlrVector> {
    let rate = h.code_rate();
    let n = h.num_vars();
    let signal = vec![1.0; n];
    (0..batch_size)
        .map(|_| {
            let span = snr_range.1 - snr_range.0;
            let ebn0 = snr_range.0 + span * noise.rng().random::<f64>();
            let sigma = channel::sigma_from_ebn0(ebn0, rate).expect("valid rate");
            let y = channel::transmit(&signal, sigma, noise);
            channel::llr(&y, sigma).expect("sigma > 0")
        })
        .collect()
}

/// Multi-iteration logistic loss over a marginal trace, on the tape.
///
/// Each iteration contributes `BCE(sigmoid(-o_v), target_v)`; the total is
/// divided by iterations and, in per-bit mode, by the bit count.
pub fn multiloss(
    tape: &mut Tape,
    trace: &[Vec<Value>],
    targets: &[u8],
    norm: LossNorm,
) -> Value {
    assert!(!trace.is_empty(), "need at least one iteration of marginals");
    let mut pieces = Vec::with_capacity(trace.len() * targets.len());
    for marginals in trace {
        assert_eq!(marginals.len(), targets.len());
        for (&o, &t) in marginals.iter().zip(targets) {
            let z = tape.neg(o);
            pieces.push(tape.bce_logit(z, t as f64));
        }
    }
    let total = tape.sum(&pieces);
    let denom = match norm {
        LossNorm::PerBit => (trace.len() * targets.len()) as f64,
        LossNorm::PerFrame => trace.len() as f64,
    };
    tape.scale(total, 1.0 / denom)
}

/// One batch element's contribution: loss value and parameter gradients.
fn element_pass(
    model: &DecoderModel,
    store: &ParameterStore,
    graph: &TannerGraph,
    llr: &LlrVector,
    iterations: usize,
    norm: LossNorm,
    tape: &mut Tape,
) -> (f64, Gradients) {
    tape.clear();
    let targets = vec![0u8; graph.num_vars()];
    let trace = model.unroll(tape, store, graph, llr.values(), iterations);
    let loss = multiloss(tape, &trace, &targets, norm);
    let value = tape.val(loss);
    let grads = tape.backward(loss, store);
    (value, grads)
}

/// Mean loss and summed gradients over a batch, evaluated with up to
/// `threads` workers. Per-element results are reduced serially in batch
/// order, so the outcome does not depend on the thread count.
fn batch_pass(
    model: &DecoderModel,
    store: &ParameterStore,
    graph: &TannerGraph,
    batch: &[LlrVector],
    iterations: usize,
    norm: LossNorm,
    threads: usize,
) -> (f64, Gradients) {
    let results: Vec<(f64, Gradients)> = if threads <= 1 || batch.len() <= 1 {
        let mut tape = Tape::new();
        batch
            .iter()
            .map(|llr| element_pass(model, store, graph, llr, iterations, norm, &mut tape))
            .collect()
    } else {
        let workers = threads.min(batch.len());
        let chunk = batch.len().div_ceil(workers);
        let mut slots: Vec<Vec<(f64, Gradients)>> = Vec::with_capacity(workers);
        std::thread::scope(|scope| {
            let handles: Vec<_> = batch
                .chunks(chunk)
                .map(|part| {
                    scope.spawn(move || {
                        let mut tape = Tape::new();
                        part.iter()
                            .map(|llr| {
                                element_pass(model, store, graph, llr, iterations, norm, &mut tape)
                            })
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            for h in handles {
                slots.push(h.join().expect("worker panicked"));
            }
        });
        slots.into_iter().flatten().collect()
    };

    let mut grads = Gradients::zeros_like(store);
    let mut loss_sum = 0.0;
    for (l, g) in &results {
        loss_sum += l;
        grads.add_assign(g);
    }
    let scale = 1.0 / batch.len() as f64;
    grads.scale(scale);
    (loss_sum * scale, grads)
}

/// Validation BER at the midpoint SNR with the current parameters.
fn validation_ber(
    model: &DecoderModel,
    store: &ParameterStore,
    h: &ParityCheckMatrix,
    graph: &TannerGraph,
    cfg: &TrainConfig,
) -> f64 {
    let mid = 0.5 * (cfg.snr_range_db.0 + cfg.snr_range_db.1);
    let mut noise = GaussianSource::from_seed(cfg.seed, &[0xe7a1]);
    let batch = make_batch(h, cfg.eval_frames, (mid, mid), &mut noise);
    let mut bit_errors = 0usize;
    for llr in &batch {
        let out = model.decode(graph, llr, cfg.iterations, store);
        bit_errors += out.bits.weight();
    }
    bit_errors as f64 / (cfg.eval_frames * h.num_vars()) as f64
}

/// Adam training loop with divergence capture; returns the report and the
/// best store seen (by validation BER when enabled, else the final one).
pub fn train_decoder(
    model: &DecoderModel,
    h: &ParityCheckMatrix,
    cfg: &TrainConfig,
) -> (TrainReport, ParameterStore) {
    let graph = TannerGraph::build(h);
    let store = model.init_store(&graph, cfg.seed);
    fine_tune(model, h, cfg, store)
}

/// The training loop proper, starting from the given parameters (fresh or
/// pretrained).
pub fn fine_tune(
    model: &DecoderModel,
    h: &ParityCheckMatrix,
    cfg: &TrainConfig,
    store: ParameterStore,
) -> (TrainReport, ParameterStore) {
    cfg.validate();
    let start = Instant::now();
    let graph = TannerGraph::build(h);
    let mut store = store;
    let adam = AdamConfig {
        lr: cfg.lr,
        ..Default::default()
    };
    let mut loss_trace = Vec::with_capacity(cfg.steps);
    let mut diverged = false;
    let mut divergence_step = None;
    let mut best: Option<(f64, ParameterStore)> = None;

    for step in 0..cfg.steps {
        let mut noise = GaussianSource::from_seed(cfg.seed, &[0xba7c, step as u64]);
        let batch = make_batch(h, cfg.batch_size, cfg.snr_range_db, &mut noise);
        let (loss, mut grads) = batch_pass(
            model,
            &store,
            &graph,
            &batch,
            cfg.iterations,
            cfg.loss_norm,
            cfg.threads,
        );
        loss_trace.push(loss);
        if !loss.is_finite() || !grads.all_finite() {
            diverged = true;
            divergence_step = Some(step);
            break;
        }
        if let Some(max_norm) = cfg.gradient_clip_norm {
            let norm = grads.l2_norm();
            if norm > max_norm {
                grads.scale(max_norm / norm);
            }
        }
        store.adam_step(&grads, &adam);
        model.post_step(&mut store);
        if !store.all_finite() {
            diverged = true;
            divergence_step = Some(step);
            break;
        }
        if cfg.eval_every > 0 && (step + 1) % cfg.eval_every == 0 {
            let ber = validation_ber(model, &store, h, &graph, cfg);
            if best.as_ref().is_none_or(|(b, _)| ber < *b) {
                best = Some((ber, store.clone()));
            }
        }
    }

    let (best_val_ber, final_store) = match best {
        Some((ber, s)) if !diverged => (Some(ber), s),
        Some((ber, s)) => (Some(ber), s),
        None => (None, store),
    };
    let report = TrainReport {
        final_damping: model.damping(&final_store),
        loss_trace,
        diverged,
        divergence_step,
        best_val_ber,
        wall_clock: start.elapsed(),
    };
    (report, final_store)
}
