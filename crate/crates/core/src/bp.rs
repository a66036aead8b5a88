//! Sum-product decoding on a Tanner graph: the classical parameter-free
//! update and the edge-weighted variant, with a selectable check-node rule
//! (exact arctanh or its truncated odd series).
//!
//! The schedule is flooding (all edges update simultaneously): one iteration
//! pair is a variable-to-check half-step followed by a check-to-variable
//! half-step. Messages live in flat arrays indexed by edge id.
//!
//! The exact check rule clips the extrinsic product to `1 - 1e-9` before
//! arctanh; the series rule is a polynomial and needs no clip. That asymmetry
//! is deliberate: the unbounded growth of the exact rule near saturation is
//! exactly what the damped decoder variants are built to survive.

use crate::autodiff::{arctanh_taylor_f64, Tape, Value, ARCTANH_CLIP};
use crate::channel::LlrVector;
use crate::codes::BitVector;
use crate::tanner::TannerGraph;

/// Check-node update rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckUpdate {
    ExactArctanh,
    /// Truncated odd series of degree 2q+1.
    Taylor(usize),
}

impl CheckUpdate {
    /// Applies `2 * rule(p)` to an extrinsic product.
    pub fn apply(self, p: f64) -> f64 {
        match self {
            CheckUpdate::ExactArctanh => 2.0 * p.clamp(-ARCTANH_CLIP, ARCTANH_CLIP).atanh(),
            CheckUpdate::Taylor(q) => 2.0 * arctanh_taylor_f64(p, q),
        }
    }

    /// Config-file spelling: `exact` or `taylor:<q>`.
    pub fn parse(s: &str) -> Option<CheckUpdate> {
        if s == "exact" || s == "exact_arctanh" {
            return Some(CheckUpdate::ExactArctanh);
        }
        let q = s.strip_prefix("taylor:")?.parse().ok()?;
        Some(CheckUpdate::Taylor(q))
    }

    pub fn spelling(self) -> String {
        match self {
            CheckUpdate::ExactArctanh => "exact".to_string(),
            CheckUpdate::Taylor(q) => format!("taylor:{q}"),
        }
    }
}

/// Decoder family selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Plain,
    Weighted,
    Hyper,
    HyperDamped,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Plain => "plain",
            Variant::Weighted => "weighted",
            Variant::Hyper => "hyper",
            Variant::HyperDamped => "hyper_damped",
        }
    }

    pub fn parse(s: &str) -> Option<Variant> {
        Some(match s {
            "plain" => Variant::Plain,
            "weighted" => Variant::Weighted,
            "hyper" => Variant::Hyper,
            "hyper_damped" => Variant::HyperDamped,
            _ => return None,
        })
    }

    pub fn is_hyper(self) -> bool {
        matches!(self, Variant::Hyper | Variant::HyperDamped)
    }
}

/// Half-step parity of a message state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    /// Produced by a check-to-variable step (or the initial zero state).
    Even,
    /// Produced by a variable-to-check step; values lie in (-1, 1).
    Odd,
}

/// Per-edge messages for one half-step.
#[derive(Debug, Clone)]
pub struct MessageState {
    pub x: Vec<f64>,
    pub parity: Parity,
    /// First variable-to-check message set, kept for damped variants.
    pub first_message: Option<Vec<f64>>,
}

impl MessageState {
    /// The all-zero initial state (even parity: ready for an odd step).
    pub fn initial(num_edges: usize) -> Self {
        MessageState {
            x: vec![0.0; num_edges],
            parity: Parity::Even,
            first_message: None,
        }
    }
}

/// Decode configuration shared by every variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecodeConfig {
    /// Number of odd/even iteration pairs.
    pub iterations: usize,
    pub check_update: CheckUpdate,
    pub variant: Variant,
    /// Stop as soon as the hard decision satisfies every check. Enabled for
    /// BER runs, disabled during training so the unrolled graph is fixed.
    pub early_stop: bool,
}

impl DecodeConfig {
    pub fn plain(iterations: usize) -> Self {
        DecodeConfig {
            iterations,
            check_update: CheckUpdate::ExactArctanh,
            variant: Variant::Plain,
            early_stop: true,
        }
    }
}

/// Variable-to-check half-step:
/// `x_e = tanh( (l_v + sum of w_e' * x_e' over the extrinsic set) / 2 )`.
/// The plain variant uses unit weights.
pub fn var_to_check(
    graph: &TannerGraph,
    llr: &LlrVector,
    prev: &MessageState,
    weights: Option<&[f64]>,
) -> MessageState {
    assert_eq!(prev.parity, Parity::Even, "odd step consumes an even state");
    let l = llr.values();
    let x: Vec<f64> = (0..graph.num_edges())
        .map(|e| {
            let v = graph.edge(e).var;
            let mut acc = l[v];
            match weights {
                None => {
                    for &e2 in graph.extrinsic_var(e) {
                        acc += prev.x[e2];
                    }
                }
                Some(w) => {
                    for &e2 in graph.extrinsic_var(e) {
                        acc += w[e2] * prev.x[e2];
                    }
                }
            }
            (0.5 * acc).tanh()
        })
        .collect();
    MessageState {
        x,
        parity: Parity::Odd,
        first_message: prev.first_message.clone(),
    }
}

/// Check-to-variable half-step: `x_e = 2 * rule( product of extrinsic x )`.
/// A degree-1 check has an empty product, taken as 1 and saturated by the
/// rule's clip.
pub fn check_to_var(graph: &TannerGraph, prev: &MessageState, rule: CheckUpdate) -> MessageState {
    assert_eq!(prev.parity, Parity::Odd, "even step consumes an odd state");
    let x: Vec<f64> = (0..graph.num_edges())
        .map(|e| {
            let p: f64 = graph.extrinsic_check(e).iter().map(|&e2| prev.x[e2]).product();
            rule.apply(p)
        })
        .collect();
    MessageState {
        x,
        parity: Parity::Even,
        first_message: prev.first_message.clone(),
    }
}

/// Readout: `o_v = l_v + sum of x_e over all edges of v`.
pub fn marginalize(graph: &TannerGraph, llr: &LlrVector, state: &MessageState) -> Vec<f64> {
    assert_eq!(state.parity, Parity::Even, "readout follows an even step");
    let l = llr.values();
    (0..graph.num_vars())
        .map(|v| l[v] + graph.var_edges(v).iter().map(|&e| state.x[e]).sum::<f64>())
        .collect()
}

/// 0 when the marginal is positive, 1 when negative, 0 on an exact tie.
pub fn hard_decision(marginals: &[f64]) -> BitVector {
    BitVector::new(
        marginals
            .iter()
            .map(|&o| if o < 0.0 { 1 } else { 0 })
            .collect(),
    )
}

/// True iff every check is satisfied by `bits` (syndrome from the graph).
pub fn checks_satisfied(graph: &TannerGraph, bits: &BitVector) -> bool {
    let b = bits.bits();
    (0..graph.num_checks()).all(|c| {
        graph
            .check_edges(c)
            .iter()
            .fold(0u8, |acc, &e| acc ^ b[graph.edge(e).var])
            == 0
    })
}

/// Result of a decode call.
#[derive(Debug, Clone)]
pub struct DecodeOutput {
    pub bits: BitVector,
    pub marginals: Vec<f64>,
    pub converged: bool,
    /// Iteration pairs actually executed.
    pub pairs_run: usize,
}

/// Runs `config.iterations` odd/even pairs of plain or weighted BP,
/// marginalizing after each pair; stops early on a zero syndrome when
/// enabled.
pub fn decode(
    graph: &TannerGraph,
    llr: &LlrVector,
    config: &DecodeConfig,
    weights: Option<&[f64]>,
) -> DecodeOutput {
    assert!(
        matches!(config.variant, Variant::Plain | Variant::Weighted),
        "hyper variants decode through their own module"
    );
    let w = if config.variant == Variant::Weighted { weights } else { None };
    let mut state = MessageState::initial(graph.num_edges());
    let mut marginals = llr.values().to_vec();
    let mut bits = hard_decision(&marginals);
    let mut converged = checks_satisfied(graph, &bits) && config.early_stop;
    let mut pairs_run = 0;
    if !converged {
        for _ in 0..config.iterations {
            let odd = var_to_check(graph, llr, &state, w);
            state = check_to_var(graph, &odd, config.check_update);
            pairs_run += 1;
            marginals = marginalize(graph, llr, &state);
            bits = hard_decision(&marginals);
            if config.early_stop && checks_satisfied(graph, &bits) {
                converged = true;
                break;
            }
        }
        if !config.early_stop {
            converged = checks_satisfied(graph, &bits);
        }
    }
    DecodeOutput {
        bits,
        marginals,
        converged,
        pairs_run,
    }
}

/// Tape mirror of [`check_to_var`]: the even half-step on node values.
pub fn check_to_var_tape(
    tape: &mut Tape,
    graph: &TannerGraph,
    odd: &[Value],
    rule: CheckUpdate,
) -> Vec<Value> {
    (0..graph.num_edges())
        .map(|e| {
            let slice = graph.extrinsic_check(e);
            let p = match slice.len() {
                0 => tape.input(1.0),
                _ => {
                    let mut p = odd[slice[0]];
                    for &e2 in &slice[1..] {
                        p = tape.mul(p, odd[e2]);
                    }
                    p
                }
            };
            let r = match rule {
                CheckUpdate::ExactArctanh => tape.arctanh_clip(p),
                CheckUpdate::Taylor(q) => tape.arctanh_taylor(p, q),
            };
            tape.scale(r, 2.0)
        })
        .collect()
}

/// Tape mirror of [`marginalize`].
pub fn marginalize_tape(
    tape: &mut Tape,
    graph: &TannerGraph,
    llr_nodes: &[Value],
    state: &[Value],
) -> Vec<Value> {
    (0..graph.num_vars())
        .map(|v| {
            let incident: Vec<Value> = graph.var_edges(v).iter().map(|&e| state[e]).collect();
            let s = tape.sum(&incident);
            tape.add(llr_nodes[v], s)
        })
        .collect()
}
