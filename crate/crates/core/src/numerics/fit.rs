use crate::error::{Error, Result};

/// Least-squares slope of `ln(value)` against `ln(distance)`.
///
/// Samples must have positive, strictly decreasing distances and positive
/// values.
pub fn fit_power_exponent(samples: &[(f64, f64)]) -> Result<f64> {
    if samples.len() < 4 {
        return Err(Error::InsufficientSamples {
            needed: 4,
            got: samples.len(),
        });
    }
    for w in samples.windows(2) {
        if !(w[1].0 < w[0].0) {
            return Err(Error::Domain {
                what: "fit_power_exponent (distances must decrease)",
                value: w[1].0,
            });
        }
    }
    if let Some(&(d, v)) = samples.iter().find(|(d, v)| !(*d > 0.0) || !(*v > 0.0)) {
        return Err(Error::Domain {
            what: "fit_power_exponent (non-positive sample)",
            value: if d > 0.0 { v } else { d },
        });
    }
    let n = samples.len() as f64;
    let (sx, sy) = samples
        .iter()
        .fold((0.0, 0.0), |(sx, sy), (d, v)| (sx + d.ln(), sy + v.ln()));
    let (mx, my) = (sx / n, sy / n);
    let (sxy, sxx) = samples.iter().fold((0.0, 0.0), |(sxy, sxx), (d, v)| {
        let dx = d.ln() - mx;
        (sxy + dx * (v.ln() - my), sxx + dx * dx)
    });
    Ok(sxy / sxx)
}
