//! Named flat parameter arrays with Adam moment buffers, plus the versioned
//! text checkpoint format.

use std::fmt::Write as _;
use std::io;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("checkpoint parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Handle to one named array in a [`ParameterStore`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamId(usize);

impl ParamId {
    pub(crate) fn raw(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone)]
struct Entry {
    name: String,
    values: Vec<f64>,
    m: Vec<f64>,
    v: Vec<f64>,
}

/// Hyperparameters of the bias-corrected moment update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamConfig {
    pub fn with_lr(lr: f64) -> Self {
        AdamConfig {
            lr,
            ..Default::default()
        }
    }
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Named flat f64 arrays with first/second moment buffers and a step counter.
#[derive(Debug, Clone, Default)]
pub struct ParameterStore {
    entries: Vec<Entry>,
    step: u64,
}

impl ParameterStore {
    pub fn new() -> Self {
        ParameterStore::default()
    }

    /// Registers a named array; names must be unique.
    pub fn register(&mut self, name: impl Into<String>, values: Vec<f64>) -> ParamId {
        let name = name.into();
        assert!(
            self.id(&name).is_none(),
            "parameter {name:?} already registered"
        );
        let n = values.len();
        self.entries.push(Entry {
            name,
            values,
            m: vec![0.0; n],
            v: vec![0.0; n],
        });
        ParamId(self.entries.len() - 1)
    }

    pub fn id(&self, name: &str) -> Option<ParamId> {
        self.entries
            .iter()
            .position(|e| e.name == name)
            .map(ParamId)
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.entries[id.0].name
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> + '_ {
        (0..self.entries.len()).map(ParamId)
    }

    pub fn values(&self, id: ParamId) -> &[f64] {
        &self.entries[id.0].values
    }

    pub fn values_mut(&mut self, id: ParamId) -> &mut [f64] {
        &mut self.entries[id.0].values
    }

    pub fn num_arrays(&self) -> usize {
        self.entries.len()
    }

    pub fn total_len(&self) -> usize {
        self.entries.iter().map(|e| e.values.len()).sum()
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// True iff every parameter is finite.
    pub fn all_finite(&self) -> bool {
        self.entries
            .iter()
            .all(|e| e.values.iter().all(|v| v.is_finite()))
    }

    /// Clamps one array elementwise (used for the damping factor).
    pub fn clamp(&mut self, id: ParamId, lo: f64, hi: f64) {
        for v in &mut self.entries[id.0].values {
            *v = v.clamp(lo, hi);
        }
    }

    /// One bias-corrected moment update over every array.
    ///
    /// Gradient shapes must match; zero gradients leave parameters unchanged
    /// except for the vanishing `eps` division, which is exactly zero here
    /// because the numerator is zero.
    pub fn adam_step(&mut self, grads: &Gradients, cfg: &AdamConfig) {
        assert_eq!(grads.arrays.len(), self.entries.len(), "gradient shape mismatch");
        self.step += 1;
        let t = self.step as i32;
        let bc1 = 1.0 - cfg.beta1.powi(t);
        let bc2 = 1.0 - cfg.beta2.powi(t);
        for (entry, garr) in self.entries.iter_mut().zip(&grads.arrays) {
            assert_eq!(entry.values.len(), garr.len(), "gradient shape mismatch");
            for i in 0..entry.values.len() {
                let g = garr[i];
                entry.m[i] = cfg.beta1 * entry.m[i] + (1.0 - cfg.beta1) * g;
                entry.v[i] = cfg.beta2 * entry.v[i] + (1.0 - cfg.beta2) * g * g;
                let m_hat = entry.m[i] / bc1;
                let v_hat = entry.v[i] / bc2;
                entry.values[i] -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
            }
        }
    }

    /// Serializes values (not moments) to the versioned text format.
    pub fn to_checkpoint(&self, meta: &[(String, String)]) -> String {
        let mut out = String::from("hypermsg-checkpoint v1\n");
        for (k, v) in meta {
            debug_assert!(!k.contains(char::is_whitespace));
            let _ = writeln!(out, "meta {k} {v}");
        }
        for e in &self.entries {
            let _ = writeln!(out, "array {} {}", e.name, e.values.len());
            let mut line = String::new();
            for (i, v) in e.values.iter().enumerate() {
                if i > 0 {
                    line.push(' ');
                }
                let _ = write!(line, "{v}");
            }
            out.push_str(&line);
            out.push('\n');
        }
        out.push_str("end\n");
        out
    }

    /// Parses the text format; moment buffers start fresh and the step
    /// counter is zero. Returns the store and the metadata lines.
    pub fn from_checkpoint(text: &str) -> Result<(Self, Vec<(String, String)>), CheckpointError> {
        let mut lines = text.lines().enumerate();
        let (_, first) = lines.next().ok_or(CheckpointError::Parse {
            line: 1,
            msg: "empty checkpoint".into(),
        })?;
        if first.trim() != "hypermsg-checkpoint v1" {
            return Err(CheckpointError::Parse {
                line: 1,
                msg: format!("unsupported header {first:?}"),
            });
        }
        let mut store = ParameterStore::new();
        let mut meta = Vec::new();
        let mut saw_end = false;
        while let Some((i, line)) = lines.next() {
            let lineno = i + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if line == "end" {
                saw_end = true;
                break;
            }
            if let Some(rest) = line.strip_prefix("meta ") {
                let (k, v) = rest.split_once(' ').unwrap_or((rest, ""));
                meta.push((k.to_string(), v.to_string()));
                continue;
            }
            let Some(rest) = line.strip_prefix("array ") else {
                return Err(CheckpointError::Parse {
                    line: lineno,
                    msg: format!("expected 'array', 'meta' or 'end', got {line:?}"),
                });
            };
            let mut parts = rest.split_whitespace();
            let name = parts.next().ok_or(CheckpointError::Parse {
                line: lineno,
                msg: "missing array name".into(),
            })?;
            let len: usize = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or(CheckpointError::Parse {
                    line: lineno,
                    msg: "missing or invalid array length".into(),
                })?;
            let (j, data_line) = lines.next().ok_or(CheckpointError::Parse {
                line: lineno,
                msg: "missing array data line".into(),
            })?;
            let values: Result<Vec<f64>, _> = data_line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect();
            let values = values.map_err(|e| CheckpointError::Parse {
                line: j + 1,
                msg: format!("bad float: {e}"),
            })?;
            if values.len() != len {
                return Err(CheckpointError::Parse {
                    line: j + 1,
                    msg: format!("array {name}: expected {len} values, got {}", values.len()),
                });
            }
            store.register(name.to_string(), values);
        }
        if !saw_end {
            return Err(CheckpointError::Parse {
                line: 0,
                msg: "missing 'end' marker".into(),
            });
        }
        Ok((store, meta))
    }

    pub fn save(&self, path: &Path, meta: &[(String, String)]) -> Result<(), CheckpointError> {
        std::fs::write(path, self.to_checkpoint(meta))?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<(Self, Vec<(String, String)>), CheckpointError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_checkpoint(&text)
    }
}

/// Gradient buffer shaped like a [`ParameterStore`].
#[derive(Debug, Clone)]
pub struct Gradients {
    pub(crate) arrays: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(store: &ParameterStore) -> Self {
        Gradients {
            arrays: store
                .entries
                .iter()
                .map(|e| vec![0.0; e.values.len()])
                .collect(),
        }
    }

    pub(crate) fn accumulate(&mut self, array: usize, index: usize, v: f64) {
        self.arrays[array][index] += v;
    }

    pub fn get(&self, id: ParamId) -> &[f64] {
        &self.arrays[id.raw()]
    }

    /// Elementwise sum with another buffer of the same shape.
    pub fn add_assign(&mut self, other: &Gradients) {
        assert_eq!(self.arrays.len(), other.arrays.len());
        for (a, b) in self.arrays.iter_mut().zip(&other.arrays) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    pub fn scale(&mut self, k: f64) {
        for a in &mut self.arrays {
            for x in a.iter_mut() {
                *x *= k;
            }
        }
    }

    pub fn l2_norm(&self) -> f64 {
        self.arrays
            .iter()
            .flat_map(|a| a.iter())
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
    }

    pub fn all_finite(&self) -> bool {
        self.arrays
            .iter()
            .all(|a| a.iter().all(|v| v.is_finite()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_parameters_unchanged() {
        let mut store = ParameterStore::new();
        let p = store.register("w", vec![1.0, -0.5]);
        let grads = Gradients::zeros_like(&store);
        store.adam_step(&grads, &AdamConfig::with_lr(0.1));
        assert_eq!(store.values(p), &[1.0, -0.5]);
    }

    #[test]
    fn first_step_moves_by_at_most_lr() {
        // f(x) = x^2 at x0 = 1: gradient 2, first Adam step is lr * g/|g| (up
        // to eps), so the move is just under lr toward zero.
        let mut store = ParameterStore::new();
        let p = store.register("x", vec![1.0]);
        let mut grads = Gradients::zeros_like(&store);
        grads.arrays[0][0] = 2.0;
        store.adam_step(&grads, &AdamConfig::with_lr(0.1));
        let x = store.values(p)[0];
        let delta = 1.0 - x;
        assert!(delta > 0.0, "moved toward zero");
        assert!(delta <= 0.1 + 1e-12, "step {delta} bounded by lr");
        assert!(delta > 0.09, "step {delta} close to lr for a clean gradient");
    }

    #[test]
    fn identical_runs_are_identical() {
        let run = || {
            let mut store = ParameterStore::new();
            store.register("w", vec![0.3, -0.7, 0.1]);
            for step in 0..25 {
                let mut grads = Gradients::zeros_like(&store);
                for (i, g) in grads.arrays[0].iter_mut().enumerate() {
                    *g = ((step * 7 + i) % 5) as f64 - 2.0;
                }
                store.adam_step(&grads, &AdamConfig::with_lr(0.01));
            }
            store.values(ParamId(0)).to_vec()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn shape_mismatch_panics() {
        let mut store = ParameterStore::new();
        store.register("w", vec![0.0; 3]);
        let mut other = ParameterStore::new();
        other.register("w", vec![0.0; 4]);
        let grads = Gradients::zeros_like(&other);
        let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| {
            store.adam_step(&grads, &AdamConfig::default());
        }));
        assert!(result.is_err());
    }

    #[test]
    fn checkpoint_round_trip_is_exact() {
        let mut store = ParameterStore::new();
        store.register("theta", vec![0.1, -2.5e-17, 3.0f64.sqrt(), f64::MIN_POSITIVE]);
        store.register("damping", vec![0.42]);
        let meta = vec![("code".to_string(), "BCH(15,7)".to_string())];
        let text = store.to_checkpoint(&meta);
        let (loaded, meta2) = ParameterStore::from_checkpoint(&text).unwrap();
        assert_eq!(meta2, meta);
        for id in store.ids() {
            let id2 = loaded.id(store.name(id)).unwrap();
            assert_eq!(loaded.values(id2), store.values(id));
        }
        // Serializing again is byte-identical.
        assert_eq!(loaded.to_checkpoint(&meta2), text);
    }

    #[test]
    fn checkpoint_rejects_bad_header() {
        let err = ParameterStore::from_checkpoint("nonsense v9\nend\n").unwrap_err();
        assert!(matches!(err, CheckpointError::Parse { line: 1, .. }));
    }

    #[test]
    fn clamp_bounds_values() {
        let mut store = ParameterStore::new();
        let p = store.register("c", vec![1.7, -0.2, 0.42]);
        store.clamp(p, 0.0, 1.0);
        assert_eq!(store.values(p), &[1.0, 0.0, 0.42]);
    }
}
