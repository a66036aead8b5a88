//! Gradient verification: reverse-mode adjoints against central finite
//! differences.
//!
//! The differencing side only ever evaluates the forward pass, so it is an
//! independent oracle for the backward sweep. [`run_suite`] draws random
//! configurations that exercise generated-weight compositions, the
//! truncated-series arctanh, absolute values and the damping mix, and checks
//! every parameter of each.

use super::{MlpSpec, Activation, ParameterStore, Tape, Value};
use crate::channel::seeded_rng;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Central finite differences of `eval` at the store's current values.
///
/// Returns one array per parameter array, shaped like the store.
pub fn central_difference<F>(store: &ParameterStore, mut eval: F, h: f64) -> Vec<Vec<f64>>
where
    F: FnMut(&ParameterStore) -> f64,
{
    let mut out = Vec::new();
    let mut work = store.clone();
    for id in store.ids() {
        let n = store.values(id).len();
        let mut grad = vec![0.0; n];
        for i in 0..n {
            let orig = work.values(id)[i];
            work.values_mut(id)[i] = orig + h;
            let plus = eval(&work);
            work.values_mut(id)[i] = orig - h;
            let minus = eval(&work);
            work.values_mut(id)[i] = orig;
            grad[i] = (plus - minus) / (2.0 * h);
        }
        out.push(grad);
    }
    out
}

/// Outcome of one comparison.
#[derive(Debug, Clone)]
pub struct CaseResult {
    pub label: String,
    pub num_params: usize,
    pub max_rel_err: f64,
    pub passed: bool,
}

/// Outcome of a whole suite run.
#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub cases: Vec<CaseResult>,
    pub rtol: f64,
    pub floor: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.cases.iter().all(|c| c.passed)
    }

    pub fn worst(&self) -> f64 {
        self.cases.iter().map(|c| c.max_rel_err).fold(0.0, f64::max)
    }

    pub fn num_failed(&self) -> usize {
        self.cases.iter().filter(|c| !c.passed).count()
    }
}

/// Compares backward-pass gradients against central differences for a tape
/// built by `build`. The relative error uses `max(|a|, |fd|, floor/rtol)` as
/// denominator, i.e. discrepancies below `floor` always pass.
pub fn check<F>(
    store: &ParameterStore,
    build: F,
    label: &str,
    rtol: f64,
    floor: f64,
) -> CaseResult
where
    F: Fn(&mut Tape, &ParameterStore) -> Value,
{
    let mut tape = Tape::new();
    let loss = build(&mut tape, store);
    let analytic = tape.backward(loss, store);

    let h = 1e-5;
    let fd = central_difference(store, |s| {
        let mut t = Tape::new();
        let l = build(&mut t, s);
        t.val(l)
    }, h);

    let denom_floor = floor / rtol;
    let mut max_rel: f64 = 0.0;
    let mut num_params = 0;
    for (id, fd_arr) in store.ids().zip(&fd) {
        let a_arr = analytic.get(id);
        for (&a, &f) in a_arr.iter().zip(fd_arr) {
            let denom = a.abs().max(f.abs()).max(denom_floor);
            max_rel = max_rel.max((a - f).abs() / denom);
            num_params += 1;
        }
    }
    CaseResult {
        label: label.to_string(),
        num_params,
        max_rel_err: max_rel,
        passed: max_rel <= rtol,
    }
}

fn rand_in(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// A generated-weight composition: a weight network applied to the absolute
/// value of a damped mix feeds a message network, whose outputs pass through
/// the series arctanh and a logistic loss.
fn hyper_composition_case(
    tape: &mut Tape,
    store: &ParameterStore,
    f_spec: &MlpSpec,
    g_spec: &MlpSpec,
    u: &[f64],
    x0: &[f64],
    l: f64,
    q: usize,
) -> Value {
    let theta_f = tape.bind(store, store.id("theta_f").unwrap());
    let c = tape.param(store, store.id("damping").unwrap(), 0);
    let neg_c = tape.neg(c);
    let one_minus_c = tape.add_const(neg_c, 1.0);

    // Damped mix of the first message and the current message.
    let mixed: Vec<Value> = u
        .iter()
        .zip(x0)
        .map(|(&ui, &x0i)| {
            let uv = tape.input(ui);
            let xv = tape.input(x0i);
            let a = tape.mul(c, xv);
            let b = tape.mul(one_minus_c, uv);
            tape.add(a, b)
        })
        .collect();

    let f_in: Vec<Value> = mixed.iter().map(|&m| tape.abs_val(m)).collect();
    let theta_g = f_spec.apply(tape, &theta_f, &f_in);

    let mut g_in = vec![tape.input(l)];
    g_in.extend(&mixed);
    let out = g_spec.apply(tape, &theta_g, &g_in);

    let pieces: Vec<Value> = out
        .iter()
        .map(|&y| {
            let t = tape.arctanh_taylor(y, q);
            let s = tape.scale(t, 2.0);
            tape.bce_logit(s, 0.0)
        })
        .collect();
    tape.sum(&pieces)
}

/// Weighted-sum message path: tanh of a weighted LLR sum, an extrinsic
/// product, and both check-update rules feeding the loss.
fn weighted_message_case(
    tape: &mut Tape,
    store: &ParameterStore,
    llr: &[f64],
    q: usize,
) -> Value {
    let w = tape.bind(store, store.id("edge_weights").unwrap());
    let msgs: Vec<Value> = llr
        .iter()
        .zip(&w)
        .map(|(&l, &wi)| {
            let lv = tape.input(l);
            let prod = tape.mul(wi, lv);
            let half = tape.scale(prod, 0.5);
            tape.tanh(half)
        })
        .collect();
    // Leave-one-out style product of the first three messages.
    let p01 = tape.mul(msgs[0], msgs[1]);
    let p = tape.mul(p01, msgs[2]);
    let exact = tape.arctanh_clip(p);
    let series = tape.arctanh_taylor(p, q);
    let both = tape.add(exact, series);
    let scaled = tape.scale(both, 2.0);
    let rest = tape.sum(&msgs[3..]);
    let o = tape.add(scaled, rest);
    let z = tape.neg(o);
    tape.bce_logit(z, 0.0)
}

/// Plain stack with softplus and abs mixed in.
fn plain_mlp_case(
    tape: &mut Tape,
    store: &ParameterStore,
    spec: &MlpSpec,
    input: &[f64],
) -> Value {
    let w = tape.bind(store, store.id("weights").unwrap());
    let x: Vec<Value> = input.iter().map(|&v| tape.input(v)).collect();
    let out = spec.apply(tape, &w, &x);
    let pieces: Vec<Value> = out
        .iter()
        .enumerate()
        .map(|(i, &y)| {
            let a = tape.abs_val(y);
            let s = tape.softplus_shifted(a);
            let t = if i % 2 == 0 { tape.bce_logit(s, 1.0) } else { tape.mul(s, s) };
            t
        })
        .collect();
    tape.sum(&pieces)
}

/// Runs `count` random configurations with the given tolerance.
pub fn run_suite(seed: u64, count: usize, rtol: f64, floor: f64) -> SuiteReport {
    let mut cases = Vec::with_capacity(count);
    for case_idx in 0..count {
        let mut rng = seeded_rng(seed, &[0x67c4, case_idx as u64]);
        let result = match case_idx % 3 {
            0 => {
                let d = rng.random_range(2..5usize);
                let hidden = rng.random_range(3..6usize);
                let g_spec = MlpSpec::tanh_stack(vec![d + 1, hidden, 1], Activation::Tanh, false);
                let f_hidden = rng.random_range(3..6usize);
                let f_spec = MlpSpec::tanh_stack(
                    vec![d, f_hidden, f_hidden, g_spec.param_count()],
                    Activation::Linear,
                    false,
                );
                let mut store = ParameterStore::new();
                store.register("theta_f", f_spec.init_params(&mut rng));
                store.register("damping", vec![rand_in(&mut rng, 0.1, 0.9)]);
                let u: Vec<f64> = (0..d).map(|_| rand_in(&mut rng, -0.8, 0.8)).collect();
                let x0: Vec<f64> = (0..d).map(|_| rand_in(&mut rng, -0.8, 0.8)).collect();
                let l = rand_in(&mut rng, -2.0, 2.0);
                let q = rng.random_range(1..8usize);
                check(
                    &store,
                    |tape, s| hyper_composition_case(tape, s, &f_spec, &g_spec, &u, &x0, l, q),
                    &format!("hyper-composition d={d} q={q}"),
                    rtol,
                    floor,
                )
            }
            1 => {
                let n = rng.random_range(4..9usize);
                let mut store = ParameterStore::new();
                store.register(
                    "edge_weights",
                    (0..n).map(|_| rand_in(&mut rng, 0.5, 1.5)).collect(),
                );
                let llr: Vec<f64> = (0..n).map(|_| rand_in(&mut rng, -2.5, 2.5)).collect();
                let q = rng.random_range(1..10usize);
                check(
                    &store,
                    |tape, s| weighted_message_case(tape, s, &llr, q),
                    &format!("weighted-message n={n} q={q}"),
                    rtol,
                    floor,
                )
            }
            _ => {
                let d_in = rng.random_range(2..6usize);
                let d_out = rng.random_range(1..4usize);
                let hidden = rng.random_range(3..7usize);
                let spec = MlpSpec::tanh_stack(
                    vec![d_in, hidden, hidden, d_out],
                    Activation::Linear,
                    rng.random::<bool>(),
                );
                let mut store = ParameterStore::new();
                store.register("weights", spec.init_params(&mut rng));
                let input: Vec<f64> = (0..d_in).map(|_| rand_in(&mut rng, -1.5, 1.5)).collect();
                check(
                    &store,
                    |tape, s| plain_mlp_case(tape, s, &spec, &input),
                    &format!("plain-mlp {d_in}->{d_out}"),
                    rtol,
                    floor,
                )
            }
        };
        cases.push(result);
    }
    SuiteReport { cases, rtol, floor }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_layer_tanh_network_matches_differences() {
        // 64 inputs through a 3-layer tanh stack; every weight checked.
        let spec = MlpSpec::tanh_stack(vec![64, 8, 8, 1], Activation::Linear, false);
        let mut rng = seeded_rng(31, &[]);
        let mut store = ParameterStore::new();
        store.register("weights", spec.init_params(&mut rng));
        let input: Vec<f64> = (0..64).map(|_| rand_in(&mut rng, -1.0, 1.0)).collect();
        let result = check(
            &store,
            |tape, s| {
                let w = tape.bind(s, s.id("weights").unwrap());
                let x: Vec<Value> = input.iter().map(|&v| tape.input(v)).collect();
                let out = spec.apply(tape, &w, &x);
                out[0]
            },
            "3-layer tanh",
            1e-4,
            1e-7,
        );
        assert!(result.passed, "max rel err {}", result.max_rel_err);
    }

    #[test]
    fn small_suite_passes() {
        let report = run_suite(1234, 12, 1e-4, 1e-7);
        assert!(report.passed(), "worst {}", report.worst());
    }

    #[test]
    fn suite_is_deterministic() {
        let a = run_suite(7, 6, 1e-4, 1e-7);
        let b = run_suite(7, 6, 1e-4, 1e-7);
        let errs =
            |r: &SuiteReport| r.cases.iter().map(|c| c.max_rel_err).collect::<Vec<_>>();
        assert_eq!(errs(&a), errs(&b));
    }
}
