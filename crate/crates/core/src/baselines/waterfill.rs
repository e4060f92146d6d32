//! Weighted water-filling over parallel interference-free channels.

/// Maximize `Σ_k w_k ln(1 + c_k p_k)` subject to `Σ_k p_k <= budget`, `p >= 0`.
///
/// `cnr[k]` is the channel-to-noise ratio `|h_k|² / σ²`. The optimum is
/// `p_k = max(0, w_k/ν - 1/c_k)` with the level `ν` chosen to exhaust the
/// budget. Channels with zero weight or zero gain get nothing.
pub fn weighted_waterfill(weights: &[f64], cnr: &[f64], budget: f64) -> Vec<f64> {
    assert_eq!(weights.len(), cnr.len());
    let mut out = vec![0.0; cnr.len()];
    if budget <= 0.0 {
        return out;
    }
    let mut order: Vec<usize> = (0..cnr.len()).filter(|&k| weights[k] > 0.0 && cnr[k] > 0.0).collect();
    // activation order: largest marginal utility at zero power first
    order.sort_by(|&a, &b| (weights[b] * cnr[b]).total_cmp(&(weights[a] * cnr[a])).then(a.cmp(&b)));

    let mut active = 0;
    let mut w_sum = 0.0;
    let mut inv_sum = 0.0;
    let mut level = 0.0;
    for (n, &k) in order.iter().enumerate() {
        let w_try = w_sum + weights[k];
        let inv_try = inv_sum + 1.0 / cnr[k];
        let nu = w_try / (budget + inv_try);
        // channel k must receive positive power at the new level
        if weights[k] / nu - 1.0 / cnr[k] <= 0.0 {
            break;
        }
        w_sum = w_try;
        inv_sum = inv_try;
        level = nu;
        active = n + 1;
    }
    for &k in &order[..active] {
        out[k] = (weights[k] / level - 1.0 / cnr[k]).max(0.0);
    }
    out
}
