//! Shared oracles for the integration suites. Everything here recomputes
//! expectations from first principles, independent of the decoder path.

use hypermsg_core::codes::ParityCheckMatrix;

/// Exhaustive posterior log-likelihood ratios: enumerate every codeword,
/// weight it by its channel likelihood and marginalize per bit.
///
/// With `l_v = log P(y_v|0) / P(y_v|1)`, the relative weight of codeword `c`
/// against the all-zero word is `exp(-sum of l_v over the support of c)`.
pub fn exhaustive_posteriors(h: &ParityCheckMatrix, llr: &[f64]) -> Vec<f64> {
    let words = h.enumerate_codewords().expect("small code");
    let n = h.num_vars();
    let mut zero_mass = vec![0.0f64; n];
    let mut one_mass = vec![0.0f64; n];
    for word in &words {
        let weight: f64 = (-word
            .bits()
            .iter()
            .zip(llr)
            .map(|(&b, lv)| b as f64 * lv)
            .sum::<f64>())
        .exp();
        for (v, &b) in word.bits().iter().enumerate() {
            if b == 0 {
                zero_mass[v] += weight;
            } else {
                one_mass[v] += weight;
            }
        }
    }
    (0..n).map(|v| (zero_mass[v] / one_mass[v]).ln()).collect()
}
