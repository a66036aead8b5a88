//! Toy-scale graph classification: sum-aggregation message passing with
//! per-iteration MLPs, and the generated-weight variant where a fixed network
//! `f` emits the update network's weights from a damped mix of the first
//! node state and the aggregated current state.
//!
//! The first state is always
//! `h0_v = MLP0((1 + eps0) * x_v + sum of neighbor features)`. Plain
//! iterations do the same with per-iteration MLPs and epsilons; generated
//! iterations compute, per node,
//!
//! ```text
//! mix_v  = c * h0_v + (1 - c) * (h_v + sum of neighbor states)
//! theta_g = f(mix_v)          // no absolute value on this side
//! h'_v   = g(mix_v; theta_g)
//! ```
//!
//! The readout concatenates the per-iteration node sums (iterations 1..K)
//! and feeds a small head; it is permutation invariant because only sums
//! touch the node dimension.

use crate::autodiff::{Activation, AdamConfig, Gradients, MlpSpec, ParameterStore, Tape, Value};
use crate::channel::seeded_rng;
use crate::train::TrainReport;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GinError {
    #[error("dataset parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// An undirected labelled graph with node features.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphInstance {
    pub num_nodes: usize,
    /// Sorted neighbor lists; symmetric, no self-loops.
    pub neighbors: Vec<Vec<usize>>,
    pub features: Vec<Vec<f64>>,
    pub label: u8,
}

impl GraphInstance {
    pub fn new(
        num_nodes: usize,
        edges: &[(usize, usize)],
        features: Vec<Vec<f64>>,
        label: u8,
    ) -> Self {
        assert!(num_nodes >= 1, "graphs must have at least one node");
        assert_eq!(features.len(), num_nodes);
        let mut neighbors = vec![Vec::new(); num_nodes];
        for &(u, v) in edges {
            assert!(u != v, "self-loops are not allowed");
            assert!(u < num_nodes && v < num_nodes, "edge out of range");
            neighbors[u].push(v);
            neighbors[v].push(u);
        }
        for list in &mut neighbors {
            list.sort_unstable();
            list.dedup();
        }
        GraphInstance {
            num_nodes,
            neighbors,
            features,
            label,
        }
    }

    pub fn feature_dim(&self) -> usize {
        self.features[0].len()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (u, list) in self.neighbors.iter().enumerate() {
            for &v in list {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Relabels nodes: new node `i` is old node `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.num_nodes);
        let mut inverse = vec![0usize; self.num_nodes];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }
        let edges: Vec<(usize, usize)> = self
            .edges()
            .iter()
            .map(|&(u, v)| (inverse[u], inverse[v]))
            .collect();
        let features: Vec<Vec<f64>> = perm.iter().map(|&old| self.features[old].clone()).collect();
        GraphInstance::new(self.num_nodes, &edges, features, self.label)
    }

    fn triangle_count(&self) -> usize {
        let mut count = 0;
        for u in 0..self.num_nodes {
            for &v in &self.neighbors[u] {
                if v <= u {
                    continue;
                }
                for &w in &self.neighbors[v] {
                    if w > v && self.neighbors[u].binary_search(&w).is_ok() {
                        count += 1;
                    }
                }
            }
        }
        count
    }
}

/// Update rule family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GinVariant {
    /// Per-iteration MLPs with learned epsilons.
    Plain,
    /// Weight-generating update with the damped first-state mix.
    Hyper,
}

/// Model shape; parameters live in a [`ParameterStore`].
#[derive(Debug, Clone)]
pub struct GinModel {
    pub variant: GinVariant,
    pub feature_dim: usize,
    pub hidden: usize,
    pub k_iters: usize,
    pub eps_learned: bool,
    mlp0_spec: MlpSpec,
    /// Plain variant only: one spec per iteration.
    step_spec: MlpSpec,
    f_spec: MlpSpec,
    g_spec: MlpSpec,
    head_spec: MlpSpec,
}

impl GinModel {
    /// `hidden` is the node-state width; `k_iters` the message-passing depth.
    pub fn new(variant: GinVariant, feature_dim: usize, hidden: usize, k_iters: usize) -> Self {
        assert!(k_iters >= 1);
        let d = hidden;
        let mlp0_spec = MlpSpec::tanh_stack(vec![feature_dim, d, d], Activation::Tanh, false);
        let step_spec = MlpSpec::tanh_stack(vec![d, d, d], Activation::Tanh, false);
        // g: two hidden layers; f: three hidden layers, linear weight output.
        let g_spec = MlpSpec::tanh_stack(vec![d, d, d, d], Activation::Tanh, false);
        let f_spec = MlpSpec::tanh_stack(
            vec![d, d, d, d, g_spec.param_count()],
            Activation::Linear,
            false,
        );
        // Readout sums grow with the node count; a linear head avoids
        // saturating on them.
        let head_spec = MlpSpec::new(vec![k_iters * d, 1], vec![Activation::Linear], true);
        GinModel {
            variant,
            feature_dim,
            hidden,
            k_iters,
            eps_learned: true,
            mlp0_spec,
            step_spec,
            f_spec,
            g_spec,
            head_spec,
        }
    }

    pub fn init_store(&self, seed: u64) -> ParameterStore {
        let mut rng = seeded_rng(seed, &[0x61]);
        let mut store = ParameterStore::new();
        store.register("mlp0", self.mlp0_spec.init_params(&mut rng));
        store.register("eps0", vec![0.0]);
        match self.variant {
            GinVariant::Plain => {
                for k in 1..=self.k_iters {
                    store.register(format!("mlp{k}"), self.step_spec.init_params(&mut rng));
                    store.register(format!("eps{k}"), vec![0.0]);
                }
            }
            GinVariant::Hyper => {
                // Small output gain: the generated network starts in its
                // active region rather than saturated.
                store.register(
                    "theta_f",
                    self.f_spec.init_params_with_output_gain(&mut rng, 0.3),
                );
                store.register("damping", vec![rng.random::<f64>()]);
            }
        }
        store.register("head", self.head_spec.init_params(&mut rng));
        store
    }

    /// Effective damping factor (hyper variant).
    pub fn damping(&self, store: &ParameterStore) -> Option<f64> {
        store.id("damping").map(|id| store.values(id)[0].clamp(0.0, 1.0))
    }

    pub fn clip_damping(&self, store: &mut ParameterStore) {
        if let Some(id) = store.id("damping") {
            store.clamp(id, 0.0, 1.0);
        }
    }

    /// Weight-generator spec (probing and tooling).
    pub fn f_spec_for_probe(&self) -> &MlpSpec {
        &self.f_spec
    }

    fn eps_node(&self, tape: &mut Tape, store: &ParameterStore, name: &str) -> Value {
        let id = store.id(name).expect("epsilon registered");
        if self.eps_learned {
            tape.param(store, id, 0)
        } else {
            tape.input(store.values(id)[0])
        }
    }

    /// First node states from the raw features.
    fn step_0(
        &self,
        tape: &mut Tape,
        store: &ParameterStore,
        graph: &GraphInstance,
    ) -> Vec<Vec<Value>> {
        let mlp0 = tape.bind(store, store.id("mlp0").unwrap());
        let eps0 = self.eps_node(tape, store, "eps0");
        let one_plus_eps = tape.add_const(eps0, 1.0);
        let feat: Vec<Vec<Value>> = graph
            .features
            .iter()
            .map(|fv| fv.iter().map(|&x| tape.input(x)).collect())
            .collect();
        (0..graph.num_nodes)
            .map(|v| {
                let agg: Vec<Value> = (0..self.feature_dim)
                    .map(|i| {
                        let own = tape.mul(one_plus_eps, feat[v][i]);
                        let neigh: Vec<Value> =
                            graph.neighbors[v].iter().map(|&u| feat[u][i]).collect();
                        let s = tape.sum(&neigh);
                        tape.add(own, s)
                    })
                    .collect();
                self.mlp0_spec.apply(tape, &mlp0, &agg)
            })
            .collect()
    }

    /// All node states per iteration (index 0 holds the first states).
    fn node_states(
        &self,
        tape: &mut Tape,
        store: &ParameterStore,
        graph: &GraphInstance,
    ) -> Vec<Vec<Vec<Value>>> {
        let d = self.hidden;
        let h0 = self.step_0(tape, store, graph);
        let mut states = vec![h0];
        match self.variant {
            GinVariant::Plain => {
                for k in 1..=self.k_iters {
                    let mlp = tape.bind(store, store.id(&format!("mlp{k}")).unwrap());
                    let eps = self.eps_node(tape, store, &format!("eps{k}"));
                    let one_plus_eps = tape.add_const(eps, 1.0);
                    let prev = states.last().unwrap();
                    let next: Vec<Vec<Value>> = (0..graph.num_nodes)
                        .map(|v| {
                            let agg: Vec<Value> = (0..d)
                                .map(|i| {
                                    let own = tape.mul(one_plus_eps, prev[v][i]);
                                    let neigh: Vec<Value> = graph.neighbors[v]
                                        .iter()
                                        .map(|&u| prev[u][i])
                                        .collect();
                                    let s = tape.sum(&neigh);
                                    tape.add(own, s)
                                })
                                .collect();
                            self.step_spec.apply(tape, &mlp, &agg)
                        })
                        .collect();
                    states.push(next);
                }
            }
            GinVariant::Hyper => {
                let theta_f = tape.bind(store, store.id("theta_f").unwrap());
                let c = tape.param(store, store.id("damping").unwrap(), 0);
                let neg_c = tape.neg(c);
                let one_minus_c = tape.add_const(neg_c, 1.0);
                let h0 = states[0].clone();
                for _ in 1..=self.k_iters {
                    let prev = states.last().unwrap();
                    let next: Vec<Vec<Value>> = (0..graph.num_nodes)
                        .map(|v| {
                            let mix: Vec<Value> = (0..d)
                                .map(|i| {
                                    let neigh: Vec<Value> = graph.neighbors[v]
                                        .iter()
                                        .map(|&u| prev[u][i])
                                        .collect();
                                    let s = tape.sum(&neigh);
                                    let agg = tape.add(prev[v][i], s);
                                    let a = tape.mul(c, h0[v][i]);
                                    let b = tape.mul(one_minus_c, agg);
                                    tape.add(a, b)
                                })
                                .collect();
                            let theta_g = self.f_spec.apply(tape, &theta_f, &mix);
                            self.g_spec.apply(tape, &theta_g, &mix)
                        })
                        .collect();
                    states.push(next);
                }
            }
        }
        states
    }

    /// Graph embedding: concatenated per-iteration node sums (1..K).
    fn readout(
        &self,
        tape: &mut Tape,
        states: &[Vec<Vec<Value>>],
    ) -> Vec<Value> {
        let d = self.hidden;
        let mut h_g = Vec::with_capacity(self.k_iters * d);
        for state in &states[1..] {
            for i in 0..d {
                let per_node: Vec<Value> = state.iter().map(|h| h[i]).collect();
                h_g.push(tape.sum(&per_node));
            }
        }
        h_g
    }

    /// Class logit for one graph; positive favors label 1.
    pub fn forward(
        &self,
        tape: &mut Tape,
        store: &ParameterStore,
        graph: &GraphInstance,
    ) -> Value {
        assert_eq!(graph.feature_dim(), self.feature_dim);
        let states = self.node_states(tape, store, graph);
        let h_g = self.readout(tape, &states);
        let head = tape.bind(store, store.id("head").unwrap());
        self.head_spec.apply(tape, &head, &h_g)[0]
    }

    /// Logit and hard class with the current parameters.
    pub fn predict(&self, store: &ParameterStore, graph: &GraphInstance) -> (f64, u8) {
        let mut tape = Tape::new();
        let logit = self.forward(&mut tape, store, graph);
        let z = tape.val(logit);
        (z, if z > 0.0 { 1 } else { 0 })
    }
}

/// Synthetic task families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// One cycle and one path per size; the cycle is labelled 1.
    CycleVsPath,
    /// Random graphs labelled by triangle-count parity.
    TriangleParity,
    /// Sparse (label 0) versus dense (label 1) random graphs per size.
    DensityPair,
}

impl Family {
    pub fn parse(s: &str) -> Option<Family> {
        Some(match s {
            "cycle-vs-path" => Family::CycleVsPath,
            "triangle-count-parity" => Family::TriangleParity,
            "density-pair" => Family::DensityPair,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Family::CycleVsPath => "cycle-vs-path",
            Family::TriangleParity => "triangle-count-parity",
            Family::DensityPair => "density-pair",
        }
    }
}

/// A labelled split.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub train: Vec<GraphInstance>,
    pub test: Vec<GraphInstance>,
}

fn unit_features(n: usize) -> Vec<Vec<f64>> {
    vec![vec![1.0]; n]
}

fn cycle(n: usize, label: u8) -> GraphInstance {
    let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    GraphInstance::new(n, &edges, unit_features(n), label)
}

fn path(n: usize, label: u8) -> GraphInstance {
    let edges: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
    GraphInstance::new(n, &edges, unit_features(n), label)
}

fn random_graph(n: usize, p: f64, rng: &mut ChaCha8Rng, label: u8) -> GraphInstance {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    GraphInstance::new(n, &edges, unit_features(n), label)
}

/// Builds a balanced, seeded dataset and splits it 80/20 per label class.
pub fn make_synthetic_dataset(family: Family, sizes: &[usize], seed: u64) -> Dataset {
    assert!(sizes.iter().all(|&n| n >= 3), "sizes must be at least 3");
    let mut rng = seeded_rng(seed, &[0xda7a]);
    let mut instances: Vec<GraphInstance> = Vec::new();
    match family {
        Family::CycleVsPath => {
            for &n in sizes {
                instances.push(cycle(n, 1));
                instances.push(path(n, 0));
            }
        }
        Family::TriangleParity => {
            // Draw until each size contributes one of each parity.
            for &n in sizes {
                let mut wanted = [true, true];
                let mut guard = 0;
                while wanted.iter().any(|&w| w) {
                    guard += 1;
                    assert!(guard < 10_000, "parity sampling did not balance");
                    let g = random_graph(n, 0.4, &mut rng, 0);
                    let parity = (g.triangle_count() % 2) as u8;
                    if wanted[parity as usize] {
                        wanted[parity as usize] = false;
                        instances.push(GraphInstance {
                            label: parity,
                            ..g
                        });
                    }
                }
            }
        }
        Family::DensityPair => {
            for &n in sizes {
                instances.push(random_graph(n, 0.25, &mut rng, 0));
                instances.push(random_graph(n, 0.6, &mut rng, 1));
            }
        }
    }
    // Stratified 80/20 split with a seeded shuffle per class.
    let mut train = Vec::new();
    let mut test = Vec::new();
    for label in [0u8, 1u8] {
        let mut class: Vec<GraphInstance> =
            instances.iter().filter(|g| g.label == label).cloned().collect();
        for i in (1..class.len()).rev() {
            let j = rng.random_range(0..=i);
            class.swap(i, j);
        }
        let n_test = (class.len() + 4) / 5; // ceil(20%)
        for (i, g) in class.into_iter().enumerate() {
            if i < n_test {
                test.push(g);
            } else {
                train.push(g);
            }
        }
    }
    Dataset { train, test }
}

/// Line-oriented text dump of a graph list.
pub fn dump_dataset(graphs: &[GraphInstance]) -> String {
    let mut out = format!("hypermsg-graphs v1 {}\n", graphs.len());
    for g in graphs {
        out.push_str(&format!(
            "graph {} {} {}\n",
            g.num_nodes,
            g.feature_dim(),
            g.label
        ));
        for fv in &g.features {
            let line: Vec<String> = fv.iter().map(|x| x.to_string()).collect();
            out.push_str(&format!("feat {}\n", line.join(" ")));
        }
        let edges = g.edges();
        out.push_str(&format!("edges {}\n", edges.len()));
        for (u, v) in edges {
            out.push_str(&format!("{u} {v}\n"));
        }
    }
    out
}

/// Parses the dump format back into graph instances.
pub fn load_dataset(text: &str) -> Result<Vec<GraphInstance>, GinError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(GinError::Parse {
        line: 1,
        msg: "empty dataset".into(),
    })?;
    let mut head = header.split_whitespace();
    if head.next() != Some("hypermsg-graphs") || head.next() != Some("v1") {
        return Err(GinError::Parse {
            line: 1,
            msg: format!("unsupported header {header:?}"),
        });
    }
    let count: usize = head
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or(GinError::Parse {
            line: 1,
            msg: "missing graph count".into(),
        })?;
    let mut graphs = Vec::with_capacity(count);
    let parse_err = |line: usize, msg: &str| GinError::Parse {
        line,
        msg: msg.to_string(),
    };
    for _ in 0..count {
        let (i, gline) = lines
            .next()
            .ok_or_else(|| parse_err(0, "unexpected end of dataset"))?;
        let toks: Vec<&str> = gline.split_whitespace().collect();
        if toks.len() != 4 || toks[0] != "graph" {
            return Err(parse_err(i + 1, "expected 'graph <n> <fdim> <label>'"));
        }
        let n: usize = toks[1].parse().map_err(|_| parse_err(i + 1, "bad n"))?;
        let fdim: usize = toks[2].parse().map_err(|_| parse_err(i + 1, "bad fdim"))?;
        let label: u8 = toks[3].parse().map_err(|_| parse_err(i + 1, "bad label"))?;
        let mut features = Vec::with_capacity(n);
        for _ in 0..n {
            let (j, fline) = lines
                .next()
                .ok_or_else(|| parse_err(0, "missing feature line"))?;
            let toks: Vec<&str> = fline.split_whitespace().collect();
            if toks.first() != Some(&"feat") || toks.len() != fdim + 1 {
                return Err(parse_err(j + 1, "expected 'feat <values>'"));
            }
            let fv: Result<Vec<f64>, _> = toks[1..].iter().map(|t| t.parse()).collect();
            features.push(fv.map_err(|_| parse_err(j + 1, "bad feature value"))?);
        }
        let (j, eline) = lines
            .next()
            .ok_or_else(|| parse_err(0, "missing edges line"))?;
        let m: usize = eline
            .strip_prefix("edges ")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| parse_err(j + 1, "expected 'edges <m>'"))?;
        let mut edges = Vec::with_capacity(m);
        for _ in 0..m {
            let (k, el) = lines.next().ok_or_else(|| parse_err(0, "missing edge"))?;
            let mut it = el.split_whitespace();
            let u: usize = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| parse_err(k + 1, "bad edge"))?;
            let v: usize = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| parse_err(k + 1, "bad edge"))?;
            edges.push((u, v));
        }
        graphs.push(GraphInstance::new(n, &edges, features, label));
    }
    Ok(graphs)
}

/// Training knobs for the classifier.
#[derive(Debug, Clone)]
pub struct GinTrainConfig {
    pub lr: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for GinTrainConfig {
    fn default() -> Self {
        GinTrainConfig {
            lr: 5e-3,
            epochs: 200,
            seed: 0,
        }
    }
}

/// Full-batch Adam on the logistic loss; clamps the damping factor after
/// every step. Divergence handling mirrors the decoder loop.
pub fn train_gin(
    model: &GinModel,
    train_set: &[GraphInstance],
    cfg: &GinTrainConfig,
) -> (TrainReport, ParameterStore) {
    let store = model.init_store(cfg.seed);
    fine_tune_gin(model, train_set, cfg, store)
}

/// The classifier training loop from existing parameters.
pub fn fine_tune_gin(
    model: &GinModel,
    train_set: &[GraphInstance],
    cfg: &GinTrainConfig,
    store: ParameterStore,
) -> (TrainReport, ParameterStore) {
    assert!(!train_set.is_empty());
    let start = Instant::now();
    let mut store = store;
    let adam = AdamConfig {
        lr: cfg.lr,
        ..Default::default()
    };
    let mut loss_trace = Vec::with_capacity(cfg.epochs);
    let mut diverged = false;
    let mut divergence_step = None;
    let mut tape = Tape::new();
    for epoch in 0..cfg.epochs {
        let mut grads = Gradients::zeros_like(&store);
        let mut loss_sum = 0.0;
        for g in train_set {
            tape.clear();
            let logit = model.forward(&mut tape, &store, g);
            let loss = tape.bce_logit(logit, g.label as f64);
            loss_sum += tape.val(loss);
            grads.add_assign(&tape.backward(loss, &store));
        }
        let scale = 1.0 / train_set.len() as f64;
        grads.scale(scale);
        let loss = loss_sum * scale;
        loss_trace.push(loss);
        if !loss.is_finite() || !grads.all_finite() {
            diverged = true;
            divergence_step = Some(epoch);
            break;
        }
        store.adam_step(&grads, &adam);
        model.clip_damping(&mut store);
        if !store.all_finite() {
            diverged = true;
            divergence_step = Some(epoch);
            break;
        }
    }
    let report = TrainReport {
        final_damping: model.damping(&store),
        loss_trace,
        diverged,
        divergence_step,
        best_val_ber: None,
        wall_clock: start.elapsed(),
    };
    (report, store)
}

/// Fraction of correctly classified graphs.
pub fn accuracy(model: &GinModel, store: &ParameterStore, set: &[GraphInstance]) -> f64 {
    if set.is_empty() {
        return 1.0;
    }
    let correct = set
        .iter()
        .filter(|g| model.predict(store, g).1 == g.label)
        .count();
    correct as f64 / set.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_model(variant: GinVariant) -> GinModel {
        GinModel::new(variant, 1, 6, 3)
    }

    #[test]
    fn isolated_node_uses_only_its_own_feature() {
        // Two isolated nodes with equal features get equal first states; the
        // neighbor sum is empty.
        let g = GraphInstance::new(2, &[], vec![vec![0.7], vec![0.7]], 0);
        let model = tiny_model(GinVariant::Plain);
        let store = model.init_store(3);
        let mut tape = Tape::new();
        let states = model.node_states(&mut tape, &store, &g);
        for i in 0..model.hidden {
            assert_eq!(tape.val(states[0][0][i]), tape.val(states[0][1][i]));
        }
    }

    #[test]
    fn connected_twins_share_first_state() {
        let g = GraphInstance::new(2, &[(0, 1)], vec![vec![1.0], vec![1.0]], 0);
        let model = tiny_model(GinVariant::Plain);
        let store = model.init_store(5);
        let mut tape = Tape::new();
        let states = model.node_states(&mut tape, &store, &g);
        for i in 0..model.hidden {
            assert_eq!(tape.val(states[0][0][i]), tape.val(states[0][1][i]));
        }
    }

    #[test]
    fn step_zero_matches_dense_hand_evaluation() {
        // 3-cycle with one-hot features: aggregate = (1+eps)*e_v + e_u + e_w,
        // evaluated through the same MLP weights by hand.
        let feats = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        let g = GraphInstance::new(3, &[(0, 1), (1, 2), (2, 0)], feats.clone(), 1);
        let model = GinModel::new(GinVariant::Plain, 3, 4, 2);
        let mut store = model.init_store(7);
        let eps_id = store.id("eps0").unwrap();
        store.values_mut(eps_id)[0] = 0.25;
        let mut tape = Tape::new();
        let states = model.node_states(&mut tape, &store, &g);
        let mlp0 = store.values(store.id("mlp0").unwrap()).to_vec();
        for v in 0..3 {
            let mut agg = vec![0.0; 3];
            for i in 0..3 {
                agg[i] += 1.25 * feats[v][i];
                for &u in &g.neighbors[v] {
                    agg[i] += feats[u][i];
                }
            }
            let expected = model.mlp0_spec.forward_f64(&mlp0, &agg);
            for i in 0..4 {
                assert!((tape.val(states[0][v][i]) - expected[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_damping_reduces_to_pure_aggregation() {
        // c = 0: the mix equals the aggregated previous state exactly, so the
        // forward pass equals one where the first state is never consulted.
        let g = cycle(5, 1);
        let model = tiny_model(GinVariant::Hyper);
        let mut store = model.init_store(11);
        let did = store.id("damping").unwrap();
        store.values_mut(did)[0] = 0.0;
        let mut tape = Tape::new();
        let states = model.node_states(&mut tape, &store, &g);
        // Recompute iteration 1 by hand from the stored first states.
        let theta_f = store.values(store.id("theta_f").unwrap()).to_vec();
        let h0: Vec<Vec<f64>> = states[0]
            .iter()
            .map(|hv| hv.iter().map(|&x| tape.val(x)).collect())
            .collect();
        for v in 0..g.num_nodes {
            let mut agg: Vec<f64> = h0[v].clone();
            for &u in &g.neighbors[v] {
                for i in 0..model.hidden {
                    agg[i] += h0[u][i];
                }
            }
            let theta_g = model.f_spec.forward_f64(&theta_f, &agg);
            let expected = model.g_spec.forward_f64(&theta_g, &agg);
            for i in 0..model.hidden {
                assert!(
                    (tape.val(states[1][v][i]) - expected[i]).abs() < 1e-12,
                    "node {v} dim {i}"
                );
            }
        }
    }

    #[test]
    fn full_damping_freezes_states_across_iterations() {
        let g = cycle(6, 1);
        let model = tiny_model(GinVariant::Hyper);
        let mut store = model.init_store(13);
        let did = store.id("damping").unwrap();
        store.values_mut(did)[0] = 1.0;
        let mut tape = Tape::new();
        let states = model.node_states(&mut tape, &store, &g);
        for k in 2..states.len() {
            for v in 0..g.num_nodes {
                for i in 0..model.hidden {
                    assert_eq!(
                        tape.val(states[k][v][i]),
                        tape.val(states[1][v][i]),
                        "iteration {k} node {v}"
                    );
                }
            }
        }
    }

    #[test]
    fn logit_is_permutation_invariant() {
        let g = cycle(7, 1);
        let model = tiny_model(GinVariant::Hyper);
        let store = model.init_store(17);
        let (z, _) = model.predict(&store, &g);
        let perm = vec![3, 0, 6, 2, 5, 1, 4];
        let (zp, _) = model.predict(&store, &g.permuted(&perm));
        assert!((z - zp).abs() <= 1e-9, "{z} vs {zp}");
    }

    #[test]
    fn disjoint_union_doubles_the_embedding_sums() {
        // Duplicate a graph as two components: every readout sum doubles, so
        // check the raw embedding rather than the head output.
        let g = path(4, 0);
        let model = tiny_model(GinVariant::Plain);
        let store = model.init_store(19);
        let mut edges = g.edges();
        edges.extend(g.edges().iter().map(|&(u, v)| (u + 4, v + 4)));
        let doubled = GraphInstance::new(8, &edges, unit_features(8), 0);
        let mut tape = Tape::new();
        let s1 = model.node_states(&mut tape, &store, &g);
        let e1: Vec<f64> = model.readout(&mut tape, &s1).iter().map(|&v| tape.val(v)).collect();
        let s2 = model.node_states(&mut tape, &store, &doubled);
        let e2: Vec<f64> = model.readout(&mut tape, &s2).iter().map(|&v| tape.val(v)).collect();
        for (a, b) in e1.iter().zip(&e2) {
            assert!((2.0 * a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn wl_refinement_separates_cycle_from_path_in_two_rounds() {
        // Color refinement oracle: the multiset of (degree, sorted neighbor
        // colors) differs between C6 and P6 by round 2, so a depth-2 or
        // deeper sum-aggregation model can separate them.
        fn wl_colors(g: &GraphInstance, rounds: usize) -> Vec<u64> {
            let mut colors: Vec<u64> = g.neighbors.iter().map(|n| n.len() as u64).collect();
            for _ in 0..rounds {
                let mut sigs: Vec<(u64, Vec<u64>)> = (0..g.num_nodes)
                    .map(|v| {
                        let mut nc: Vec<u64> =
                            g.neighbors[v].iter().map(|&u| colors[u]).collect();
                        nc.sort_unstable();
                        (colors[v], nc)
                    })
                    .collect();
                let mut uniq = sigs.clone();
                uniq.sort();
                uniq.dedup();
                colors = sigs
                    .drain(..)
                    .map(|s| uniq.binary_search(&s).unwrap() as u64)
                    .collect();
            }
            let mut c = colors;
            c.sort_unstable();
            c
        }
        let c6 = cycle(6, 1);
        let p6 = path(6, 0);
        assert_ne!(wl_colors(&c6, 2), wl_colors(&p6, 2));
    }

    #[test]
    fn dataset_generation_is_deterministic_and_balanced() {
        let sizes = [6, 7, 8];
        let a = make_synthetic_dataset(Family::CycleVsPath, &sizes, 5);
        let b = make_synthetic_dataset(Family::CycleVsPath, &sizes, 5);
        assert_eq!(a.train, b.train);
        assert_eq!(a.test, b.test);
        let all: Vec<&GraphInstance> = a.train.iter().chain(&a.test).collect();
        let ones = all.iter().filter(|g| g.label == 1).count();
        assert_eq!(ones * 2, all.len());
        // Both labels reach the test split.
        assert!(a.test.iter().any(|g| g.label == 0));
        assert!(a.test.iter().any(|g| g.label == 1));
    }

    #[test]
    fn density_and_parity_families_generate() {
        let d = make_synthetic_dataset(Family::DensityPair, &[8, 10], 3);
        assert_eq!(d.train.len() + d.test.len(), 4);
        let t = make_synthetic_dataset(Family::TriangleParity, &[7, 8], 3);
        let all: Vec<&GraphInstance> = t.train.iter().chain(&t.test).collect();
        assert_eq!(all.iter().filter(|g| g.label == 1).count() * 2, all.len());
    }

    #[test]
    fn dataset_text_round_trips() {
        let ds = make_synthetic_dataset(Family::CycleVsPath, &[5, 6], 9);
        let text = dump_dataset(&ds.train);
        let loaded = load_dataset(&text).unwrap();
        assert_eq!(loaded, ds.train);
    }

    #[test]
    fn load_rejects_garbage() {
        assert!(load_dataset("not a dataset\n").is_err());
        let err = load_dataset("hypermsg-graphs v1 1\ngraph 2 1 0\nfeat 1\nfeat 1\nedges x\n");
        assert!(err.is_err());
    }

    #[test]
    fn plain_gin_learns_cycle_vs_path_quickly() {
        let ds = make_synthetic_dataset(Family::CycleVsPath, &[6, 7, 8, 9], 1);
        let model = GinModel::new(GinVariant::Plain, 1, 8, 2);
        let cfg = GinTrainConfig {
            lr: 1e-2,
            epochs: 150,
            seed: 1,
        };
        let (report, store) = train_gin(&model, &ds.train, &cfg);
        assert!(!report.diverged);
        assert_eq!(accuracy(&model, &store, &ds.train), 1.0);
    }
}
