use crate::matrix::Matrix;

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub first_moment: Vec<Matrix>,
    pub second_moment: Vec<Matrix>,
    pub step: u64,
}

impl AdamState {
    pub fn new(params: &[Matrix]) -> Self {
        let zeros: Vec<Matrix> = params
            .iter()
            .map(|p| Matrix::zeros(p.rows(), p.cols()))
            .collect();
        AdamState {
            first_moment: zeros.clone(),
            second_moment: zeros,
            step: 0,
        }
    }
}

/// One bias-corrected Adam update over every parameter tensor.
pub fn adam_step(params: &mut [Matrix], grads: &[Matrix], state: &mut AdamState, lr: f64) {
    assert_eq!(
        params.len(),
        grads.len(),
        "parameter/gradient count mismatch"
    );
    state.step += 1;
    let t = state.step as i32;
    let bias1 = 1.0 - BETA1.powi(t);
    let bias2 = 1.0 - BETA2.powi(t);
    for (k, (p, g)) in params.iter_mut().zip(grads).enumerate() {
        assert_eq!(p.shape(), g.shape(), "gradient shape mismatch");
        let m = state.first_moment[k].as_mut_slice();
        let v = state.second_moment[k].as_mut_slice();
        for (((pi, &gi), mi), vi) in p.as_mut_slice().iter_mut().zip(g.as_slice()).zip(m).zip(v) {
            *mi = BETA1 * *mi + (1.0 - BETA1) * gi;
            *vi = BETA2 * *vi + (1.0 - BETA2) * gi * gi;
            let m_hat = *mi / bias1;
            let v_hat = *vi / bias2;
            *pi -= lr * m_hat / (v_hat.sqrt() + EPSILON);
        }
    }
}
