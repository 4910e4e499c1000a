use super::{Mlp, NnError};

/// Gradients below this magnitude are compared absolutely rather than relatively.
pub const RELATIVE_FLOOR: f64 = 1e-6;

/// Worst relative error between `analytic` and central differences of `loss`
/// around `params`: |a - n| / max(|n|, RELATIVE_FLOOR).
pub fn gradient_check<F>(params: &[f64], analytic: &[f64], h: f64, mut loss: F) -> f64
where
    F: FnMut(&[f64]) -> f64,
{
    let mut probe = params.to_vec();
    let mut worst: f64 = 0.0;
    for i in 0..params.len() {
        probe[i] = params[i] + h;
        let up = loss(&probe);
        probe[i] = params[i] - h;
        let down = loss(&probe);
        probe[i] = params[i];
        let numeric = (up - down) / (2.0 * h);
        let err = (analytic[i] - numeric).abs() / numeric.abs().max(RELATIVE_FLOOR);
        worst = worst.max(if err.is_nan() { f64::INFINITY } else { err });
    }
    worst
}

/// Fixed projection weights used to reduce a network output to a scalar.
pub fn projection(len: usize) -> Vec<f64> {
    (0..len).map(|k| 1.0 / (k as f64 + 1.0) * if k % 2 == 0 { 1.0 } else { -0.7 }).collect()
}

/// Checks backprop gradients of `projection · net(input)` against central differences.
pub fn finite_diff_check(net: &Mlp, input: &[f64], h: f64) -> Result<f64, NnError> {
    if !(1e-7..=1e-3).contains(&h) {
        return Err(NnError::InvalidArchitecture(format!(
            "step {h} outside [1e-7, 1e-3]"
        )));
    }
    let w = projection(net.output_len());
    let (_, cache) = net.forward(input)?;
    let analytic = net.backward(&cache, &w)?;
    let mut probe = net.clone();
    Ok(gradient_check(net.params(), &analytic, h, |p| {
        probe.params_mut().copy_from_slice(p);
        let out = probe.predict(input).expect("shape checked");
        out.iter().zip(&w).map(|(o, w)| o * w).sum()
    }))
}
