/// Logistic sigmoid, stable for large |x|.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `−ln σ(x) = ln(1 + e^{−x})` without overflow for large negative `x`.
#[inline]
pub fn softplus_neg(x: f64) -> f64 {
    if x > 0.0 {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    }
}

/// BPR pairwise loss `−ln σ(s_ui − s_uj)`.
#[inline]
pub fn bpr_loss(s_ui: f64, s_uj: f64) -> f64 {
    softplus_neg(s_ui - s_uj)
}

/// `∂ bpr_loss / ∂ s_ui` (the derivative w.r.t. `s_uj` is its negation).
#[inline]
pub fn bpr_margin_gradient(s_ui: f64, s_uj: f64) -> f64 {
    sigmoid(s_ui - s_uj) - 1.0
}
