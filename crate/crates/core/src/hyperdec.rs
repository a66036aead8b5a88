//! The dynamic-weight decoder: the odd (variable-to-check) half-step is an
//! MLP `g` whose weights are produced per edge, per iteration, by a fixed
//! network `f`, and the damped variant feeds both networks a learned convex
//! mix of the first message and the current message.
//!
//! For edge e = (c, v) at odd iteration j, with `u` the damped mix
//! `c * x0 + (1 - c) * x^(j-1)` (or just `x^(j-1)` when undamped):
//!
//! ```text
//! theta_g = f(|u| gathered over N(v) \ {e})
//! x_e^j   = g(l_v, u gathered over N(v) \ {e}; theta_g)
//! ```
//!
//! `f` sees absolute values; `g` sees signed values prefixed by the channel
//! LLR. Extrinsic slices shorter than the graph's maximum variable degree are
//! zero padded; with bias-free layers the padding drops out of every sum. The
//! even half-step and the readout are the classical ones from [`crate::bp`].
//!
//! The damping factor starts from a uniform [0,1] draw and is clamped back
//! into [0,1] after every optimizer step.

use crate::autodiff::{Activation, MlpSpec, ParamId, ParameterStore, Tape, Value};
use crate::bp::{self, CheckUpdate, DecodeOutput, MessageState, Parity};
use crate::channel::{seeded_rng, LlrVector};
use crate::tanner::TannerGraph;
use rand::Rng;

pub const THETA_F: &str = "theta_f";
pub const DAMPING: &str = "damping";

/// Scope of the generated weights within one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThetaScope {
    /// One weight vector per edge, from that edge's own gathered slice.
    #[default]
    PerEdge,
    /// One weight vector per iteration, from the mean absolute slice
    /// (ablation mode).
    SharedMean,
}

/// What "one iteration" means for the cached first message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FirstMessageMode {
    /// One odd half-step of the classical update: `x0 = tanh(l_v / 2)`.
    #[default]
    OddHalfStep,
    /// A full odd+even pair of the classical update.
    FullPair,
}

/// Decoder shape: the two network specs plus layout constants.
#[derive(Debug, Clone)]
pub struct HyperDecoder {
    pub f_spec: MlpSpec,
    pub g_spec: MlpSpec,
    pub check_update: CheckUpdate,
    pub theta_scope: ThetaScope,
    pub first_message_mode: FirstMessageMode,
    /// Maximum variable degree of the target graph; fixes input widths.
    pub max_var_degree: usize,
}

impl HyperDecoder {
    /// Builds the default shape for a graph: `g` is a two-layer tanh network
    /// reading `[l_v, extrinsic slice]`, `f` a four-layer stack (tanh hidden,
    /// linear output) reading `|extrinsic slice|` and emitting `g`'s weights.
    /// No biases anywhere, which keeps both networks odd functions of the
    /// messages and the decoder sign-symmetric.
    pub fn for_graph(
        graph: &TannerGraph,
        f_hidden: &[usize],
        g_hidden: &[usize],
        check_update: CheckUpdate,
    ) -> Self {
        let d = graph.max_var_degree();
        assert!(d >= 1, "graph has no edges");
        let ext = d.saturating_sub(1).max(1);
        let mut g_widths = vec![1 + ext];
        g_widths.extend_from_slice(g_hidden);
        g_widths.push(1);
        let g_spec = MlpSpec::tanh_stack(g_widths, Activation::Tanh, false);
        let mut f_widths = vec![ext];
        f_widths.extend_from_slice(f_hidden);
        f_widths.push(g_spec.param_count());
        let f_spec = MlpSpec::tanh_stack(f_widths, Activation::Linear, false);
        Self::from_specs(f_spec, g_spec, check_update, d)
    }

    /// Builds from explicit specs, checking the width contract.
    pub fn from_specs(
        f_spec: MlpSpec,
        g_spec: MlpSpec,
        check_update: CheckUpdate,
        max_var_degree: usize,
    ) -> Self {
        let ext = max_var_degree.saturating_sub(1).max(1);
        assert_eq!(
            f_spec.output_width(),
            g_spec.param_count(),
            "weight generator output must match generated parameter count"
        );
        assert_eq!(f_spec.input_width(), ext, "f reads the extrinsic slice");
        assert_eq!(
            g_spec.input_width(),
            1 + ext,
            "g reads the LLR plus the extrinsic slice"
        );
        assert_eq!(g_spec.output_width(), 1, "g emits one message");
        HyperDecoder {
            f_spec,
            g_spec,
            check_update,
            theta_scope: ThetaScope::default(),
            first_message_mode: FirstMessageMode::default(),
            max_var_degree,
        }
    }

    pub fn extrinsic_width(&self) -> usize {
        self.max_var_degree.saturating_sub(1).max(1)
    }

    /// Registers `theta_f` (Glorot) and `damping` (uniform [0,1]) parameters.
    pub fn init_store(&self, seed: u64) -> ParameterStore {
        let mut store = ParameterStore::new();
        let mut rng = seeded_rng(seed, &[0x0f]);
        store.register(THETA_F, self.f_spec.init_params(&mut rng));
        store.register(DAMPING, vec![rng.random::<f64>()]);
        store
    }

    pub fn theta_f_id(&self, store: &ParameterStore) -> ParamId {
        store.id(THETA_F).expect("store carries theta_f")
    }

    pub fn damping_id(&self, store: &ParameterStore) -> ParamId {
        store.id(DAMPING).expect("store carries damping")
    }

    /// Effective damping factor: the raw parameter clamped to [0,1].
    pub fn damping(&self, store: &ParameterStore) -> f64 {
        store.values(self.damping_id(store))[0].clamp(0.0, 1.0)
    }

    /// Clamps the raw damping parameter into [0,1]; call after each
    /// optimizer step.
    pub fn clip_damping(&self, store: &mut ParameterStore) {
        let id = self.damping_id(store);
        store.clamp(id, 0.0, 1.0);
    }

    /// Checkpoint metadata describing this decoder's shape, echoed into
    /// result CSVs and sufficient to rebuild the decoder.
    pub fn checkpoint_meta(&self, code: &str, damped: bool, iterations: usize) -> Vec<(String, String)> {
        let widths = |w: &[usize]| {
            w.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
        };
        vec![
            ("code".to_string(), code.to_string()),
            (
                "variant".to_string(),
                if damped { "hyper_damped" } else { "hyper" }.to_string(),
            ),
            ("check_update".to_string(), self.check_update.spelling()),
            ("iterations".to_string(), iterations.to_string()),
            ("f_widths".to_string(), widths(&self.f_spec.widths)),
            ("g_widths".to_string(), widths(&self.g_spec.widths)),
            ("max_var_degree".to_string(), self.max_var_degree.to_string()),
        ]
    }

    /// Rebuilds a decoder (and its damped flag) from checkpoint metadata.
    pub fn from_checkpoint_meta(meta: &[(String, String)]) -> Result<(Self, bool), String> {
        let get = |key: &str| {
            meta.iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.as_str())
                .ok_or_else(|| format!("checkpoint missing meta key {key:?}"))
        };
        let parse_widths = |s: &str| -> Result<Vec<usize>, String> {
            s.split(',')
                .map(|t| t.parse().map_err(|_| format!("bad width {t:?}")))
                .collect()
        };
        let variant = get("variant")?;
        let damped = match variant {
            "hyper_damped" => true,
            "hyper" => false,
            other => return Err(format!("not a hyper checkpoint (variant {other:?})")),
        };
        let check_update = CheckUpdate::parse(get("check_update")?)
            .ok_or_else(|| "bad check_update".to_string())?;
        let f_widths = parse_widths(get("f_widths")?)?;
        let g_widths = parse_widths(get("g_widths")?)?;
        let max_var_degree: usize = get("max_var_degree")?
            .parse()
            .map_err(|_| "bad max_var_degree".to_string())?;
        let g_spec = MlpSpec::tanh_stack(g_widths, Activation::Tanh, false);
        let f_spec = MlpSpec::tanh_stack(f_widths, Activation::Linear, false);
        Ok((
            Self::from_specs(f_spec, g_spec, check_update, max_var_degree),
            damped,
        ))
    }

    /// The cached first message: one classical half-step (or pair) from the
    /// all-zero state.
    pub fn compute_x0(&self, graph: &TannerGraph, llr: &LlrVector) -> Vec<f64> {
        let initial = MessageState::initial(graph.num_edges());
        let odd = bp::var_to_check(graph, llr, &initial, None);
        match self.first_message_mode {
            FirstMessageMode::OddHalfStep => odd.x,
            FirstMessageMode::FullPair => bp::check_to_var(graph, &odd, self.check_update).x,
        }
    }

    /// One generated-weight odd half-step on f64 state.
    #[allow(clippy::too_many_arguments)]
    pub fn odd_update(
        &self,
        graph: &TannerGraph,
        llr: &LlrVector,
        prev: &[f64],
        x0: &[f64],
        damped: bool,
        theta_f: &[f64],
        c: f64,
    ) -> Vec<f64> {
        let num_edges = graph.num_edges();
        let ext = self.extrinsic_width();
        let u: Vec<f64> = if damped {
            prev.iter()
                .zip(x0)
                .map(|(&p, &x)| c * x + (1.0 - c) * p)
                .collect()
        } else {
            prev.to_vec()
        };
        let shared_theta = match self.theta_scope {
            ThetaScope::PerEdge => None,
            ThetaScope::SharedMean => {
                let mut mean = vec![0.0; ext];
                for e in 0..num_edges {
                    for (i, &e2) in graph.extrinsic_var(e).iter().enumerate() {
                        mean[i] += u[e2].abs();
                    }
                }
                for m in &mut mean {
                    *m /= num_edges as f64;
                }
                Some(self.f_spec.forward_f64(theta_f, &mean))
            }
        };
        let l = llr.values();
        let mut f_in = vec![0.0; ext];
        let mut g_in = vec![0.0; 1 + ext];
        (0..num_edges)
            .map(|e| {
                let slice = graph.extrinsic_var(e);
                f_in.fill(0.0);
                g_in.fill(0.0);
                g_in[0] = l[graph.edge(e).var];
                for (i, &e2) in slice.iter().enumerate() {
                    f_in[i] = u[e2].abs();
                    g_in[1 + i] = u[e2];
                }
                let theta_g = match &shared_theta {
                    Some(t) => t.clone(),
                    None => self.f_spec.forward_f64(theta_f, &f_in),
                };
                self.g_spec.forward_f64(&theta_g, &g_in)[0]
            })
            .collect()
    }

    /// Full decode with per-pair marginals (the trace is what the training
    /// loss consumes; the final entry is the readout).
    pub fn decode_with_trace(
        &self,
        graph: &TannerGraph,
        llr: &LlrVector,
        iterations: usize,
        damped: bool,
        store: &ParameterStore,
        early_stop: bool,
    ) -> (DecodeOutput, Vec<Vec<f64>>) {
        let theta_f = store.values(self.theta_f_id(store)).to_vec();
        let c = self.damping(store);
        let x0 = self.compute_x0(graph, llr);
        let mut state = vec![0.0; graph.num_edges()];
        let mut trace = Vec::with_capacity(iterations);
        let mut marginals = llr.values().to_vec();
        let mut bits = bp::hard_decision(&marginals);
        let mut converged = early_stop && bp::checks_satisfied(graph, &bits);
        let mut pairs_run = 0;
        if !converged {
            for _ in 0..iterations {
                let odd = self.odd_update(graph, llr, &state, &x0, damped, &theta_f, c);
                let odd_state = MessageState {
                    x: odd,
                    parity: Parity::Odd,
                    first_message: None,
                };
                let even = bp::check_to_var(graph, &odd_state, self.check_update);
                state = even.x;
                pairs_run += 1;
                marginals = bp::marginalize(
                    graph,
                    llr,
                    &MessageState {
                        x: state.clone(),
                        parity: Parity::Even,
                        first_message: None,
                    },
                );
                trace.push(marginals.clone());
                bits = bp::hard_decision(&marginals);
                if early_stop && bp::checks_satisfied(graph, &bits) {
                    converged = true;
                    break;
                }
            }
            if !early_stop {
                converged = bp::checks_satisfied(graph, &bits);
            }
        }
        (
            DecodeOutput {
                bits,
                marginals,
                converged,
                pairs_run,
            },
            trace,
        )
    }

    /// Inference entry point.
    pub fn decode(
        &self,
        graph: &TannerGraph,
        llr: &LlrVector,
        iterations: usize,
        damped: bool,
        store: &ParameterStore,
        early_stop: bool,
    ) -> DecodeOutput {
        self.decode_with_trace(graph, llr, iterations, damped, store, early_stop)
            .0
    }

    /// Unrolls the decoder on a tape for one frame, returning the marginal
    /// nodes after each iteration pair. No early stop: the unrolled shape is
    /// fixed so gradients always flow through the same structure.
    pub fn unroll(
        &self,
        tape: &mut Tape,
        store: &ParameterStore,
        graph: &TannerGraph,
        llr_values: &[f64],
        iterations: usize,
        damped: bool,
    ) -> Vec<Vec<Value>> {
        let num_edges = graph.num_edges();
        let ext = self.extrinsic_width();
        let theta_f = tape.bind(store, self.theta_f_id(store));
        let c = tape.param(store, self.damping_id(store), 0);
        let neg_c = tape.neg(c);
        let one_minus_c = tape.add_const(neg_c, 1.0);

        let llr_nodes: Vec<Value> = llr_values.iter().map(|&v| tape.input(v)).collect();
        let zero = tape.input(0.0);

        // First message on the tape: constant w.r.t. the network weights,
        // but the damping gradient flows through the mix.
        let x0: Vec<Value> = {
            let odd: Vec<Value> = (0..num_edges)
                .map(|e| {
                    let l = llr_nodes[graph.edge(e).var];
                    let half = tape.scale(l, 0.5);
                    tape.tanh(half)
                })
                .collect();
            match self.first_message_mode {
                FirstMessageMode::OddHalfStep => odd,
                FirstMessageMode::FullPair => self.check_step(tape, graph, &odd),
            }
        };

        let mut state: Vec<Value> = vec![zero; num_edges];
        let mut trace = Vec::with_capacity(iterations);
        for _ in 0..iterations {
            let u: Vec<Value> = if damped {
                state
                    .iter()
                    .zip(&x0)
                    .map(|(&p, &x)| {
                        let a = tape.mul(c, x);
                        let b = tape.mul(one_minus_c, p);
                        tape.add(a, b)
                    })
                    .collect()
            } else {
                state.clone()
            };
            let shared_theta = match self.theta_scope {
                ThetaScope::PerEdge => None,
                ThetaScope::SharedMean => {
                    let mut sums: Vec<Vec<Value>> = vec![Vec::new(); ext];
                    for e in 0..num_edges {
                        for (i, &e2) in graph.extrinsic_var(e).iter().enumerate() {
                            let a = tape.abs_val(u[e2]);
                            sums[i].push(a);
                        }
                    }
                    let mean: Vec<Value> = sums
                        .iter()
                        .map(|vals| {
                            let s = tape.sum(vals);
                            tape.scale(s, 1.0 / num_edges as f64)
                        })
                        .collect();
                    Some(self.f_spec.apply(tape, &theta_f, &mean))
                }
            };
            let odd: Vec<Value> = (0..num_edges)
                .map(|e| {
                    let slice = graph.extrinsic_var(e);
                    let mut f_in = vec![zero; ext];
                    let mut g_in = vec![zero; 1 + ext];
                    g_in[0] = llr_nodes[graph.edge(e).var];
                    for (i, &e2) in slice.iter().enumerate() {
                        f_in[i] = tape.abs_val(u[e2]);
                        g_in[1 + i] = u[e2];
                    }
                    let theta_g = match &shared_theta {
                        Some(t) => t.clone(),
                        None => self.f_spec.apply(tape, &theta_f, &f_in),
                    };
                    self.g_spec.apply(tape, &theta_g, &g_in)[0]
                })
                .collect();
            state = self.check_step(tape, graph, &odd);
            trace.push(bp::marginalize_tape(tape, graph, &llr_nodes, &state));
        }
        trace
    }

    /// Classical even half-step on tape values.
    fn check_step(&self, tape: &mut Tape, graph: &TannerGraph, odd: &[Value]) -> Vec<Value> {
        bp::check_to_var_tape(tape, graph, odd, self.check_update)
    }
}
