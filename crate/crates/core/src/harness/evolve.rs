use rayon::prelude::*;

use super::fit::Exclusion;
use crate::error::Result;
use crate::fields::SampledField;
use crate::spectral::{guard_fraction, DispersionPolynomial, Evolution, GUARD_THRESHOLD};

/// Kept `(t, value)` samples and the times dropped for contamination.
pub(crate) type Sampled<R> = (Vec<(f64, R)>, Vec<Exclusion>);

/// Evaluates `f(t, u(t))` at every time in parallel, keeping the input order.
/// Times at which the boundary guard trips are returned as exclusions instead.
pub(crate) fn sample_times<R, F>(
    u0: &SampledField,
    disp: &DispersionPolynomial,
    times: &[f64],
    f: F,
) -> Result<Sampled<R>>
where
    R: Send,
    F: Fn(f64, &SampledField) -> Result<R> + Sync,
{
    let ev = Evolution::new(u0, disp)?;
    let results: Vec<Result<std::result::Result<(f64, R), Exclusion>>> = times
        .par_iter()
        .map(|&t| {
            let u = ev.at(t);
            let guard = guard_fraction(&u);
            if guard >= GUARD_THRESHOLD {
                return Ok(Err(Exclusion::Contaminated { t, guard_fraction: guard }));
            }
            Ok(Ok((t, f(t, &u)?)))
        })
        .collect();
    let mut kept = Vec::with_capacity(times.len());
    let mut excluded = Vec::new();
    for r in results {
        match r? {
            Ok(v) => kept.push(v),
            Err(e) => excluded.push(e),
        }
    }
    Ok((kept, excluded))
}
