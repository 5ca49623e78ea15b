use crate::error::Error;
use crate::scalar::Real;

/// Root-mean-square error over N samples, `sqrt((1/N) sum (y - yhat)^2)`.
/// The targets are assumed normalized by nominal power upstream.
pub fn nrmse<F: Real>(y: &[F], yhat: &[F]) -> Result<F, Error> {
    if y.is_empty() {
        return Err(Error::EmptyInput("nrmse"));
    }
    if y.len() != yhat.len() {
        return Err(Error::FeatureCountMismatch {
            expected: y.len(),
            got: yhat.len(),
        });
    }
    let mut sum = F::zero();
    for (a, b) in y.iter().zip(yhat) {
        let d = *a - *b;
        sum = sum + d * d;
    }
    Ok((sum / F::c(y.len() as f64)).sqrt())
}

/// Skill of a model against a reference: `nrmse_model - nrmse_ref`.
/// Values below zero indicate the model improves on the reference.
pub fn skill<F: Real>(nrmse_model: F, nrmse_ref: F) -> F {
    nrmse_model - nrmse_ref
}
