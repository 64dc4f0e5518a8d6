use super::{Gradients, ParamStore};
use crate::error::{Error, Result};

/// Denominator floor for the relative error, so that entries whose true
/// gradient is (near) zero are judged on absolute error instead. Central
/// differences at step 1e-5 carry roundoff near `1e-16 * |L| / 1e-5`, about
/// 1e-10 for the losses here; a smaller floor would grade that noise.
pub const RELATIVE_ERROR_FLOOR: f64 = 1e-5;

#[derive(Clone, Debug, PartialEq)]
pub struct BlockReport {
    pub name: String,
    pub entries: usize,
    pub max_relative_error: f64,
    pub max_absolute_error: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckReport {
    pub tolerance: f64,
    pub blocks: Vec<BlockReport>,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.blocks.iter().all(|b| b.passed)
    }

    pub fn max_relative_error(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.max_relative_error)
            .fold(0.0, f64::max)
    }
}

/// Compares the analytic gradient returned by `loss_fn` with central
/// differences `(L(θ + h) − L(θ − h)) / 2h`, entry by entry, and reports
/// the worst relative error `|a − n| / max(|a|, |n|, floor)` per block.
pub fn finite_difference_check<F>(
    loss_fn: F,
    params: &ParamStore,
    step_size: f64,
    tolerance: f64,
) -> Result<GradCheckReport>
where
    F: Fn(&ParamStore) -> Result<(f64, Gradients)>,
{
    let (loss, analytic) = loss_fn(params)?;
    if !loss.is_finite() {
        return Err(Error::NonFinite("loss".into()));
    }
    let mut probe = params.clone();
    let mut blocks = Vec::with_capacity(params.len());
    for (b, param) in params.params().iter().enumerate() {
        let mut max_rel: f64 = 0.0;
        let mut max_abs: f64 = 0.0;
        for i in 0..param.value.len() {
            let original = param.value.as_slice().expect("standard layout")[i];
            let mut eval = |value: f64| -> Result<f64> {
                probe.values_mut().nth(b).unwrap().as_slice_mut().unwrap()[i] = value;
                let (l, _) = loss_fn(&probe)?;
                if !l.is_finite() {
                    return Err(Error::NonFinite("loss".into()));
                }
                Ok(l)
            };
            let plus = eval(original + step_size)?;
            let minus = eval(original - step_size)?;
            eval(original)?;
            let numeric = (plus - minus) / (2.0 * step_size);
            let a = analytic.blocks()[b].as_slice().unwrap()[i];
            let abs = (a - numeric).abs();
            let rel = abs / a.abs().max(numeric.abs()).max(RELATIVE_ERROR_FLOOR);
            max_abs = max_abs.max(abs);
            max_rel = max_rel.max(rel);
        }
        blocks.push(BlockReport {
            name: param.name.clone(),
            entries: param.value.len(),
            max_relative_error: max_rel,
            max_absolute_error: max_abs,
            passed: max_rel <= tolerance,
        });
    }
    Ok(GradCheckReport { tolerance, blocks })
}
