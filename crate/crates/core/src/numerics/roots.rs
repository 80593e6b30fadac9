use crate::error::{Error, Result};

const MAX_ITERS: usize = 200;

/// A sign-change bracket `[lo, hi]` with cached function values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

impl Bracket {
    /// Evaluates `f` at both ends and checks for a sign change.
    pub fn new<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64) -> Result<Self> {
        let f_lo = f(lo);
        let f_hi = f(hi);
        Self::from_values(lo, hi, f_lo, f_hi)
    }

    pub fn from_values(lo: f64, hi: f64, f_lo: f64, f_hi: f64) -> Result<Self> {
        if !(lo < hi) || f_lo.is_nan() || f_hi.is_nan() || f_lo * f_hi > 0.0 {
            return Err(Error::NoSignChange { lo, hi, f_lo, f_hi });
        }
        Ok(Self { lo, hi, f_lo, f_hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Root of a continuous function with a sign change on `bracket`.
///
/// Bisection safeguarded with secant steps: a secant proposal is accepted
/// only when it lands strictly inside the current bracket and the bracket
/// shrank by at least half over the previous two steps. Every iterate stays
/// inside the initial bracket.
pub fn find_root_monotone<F>(mut f: F, bracket: Bracket, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let Bracket {
        mut lo,
        mut hi,
        mut f_lo,
        mut f_hi,
    } = bracket;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    let tol = tol.max(0.0);
    let mut widths = [hi - lo; 2];
    for iter in 0..MAX_ITERS {
        let width = hi - lo;
        if width <= tol {
            return Ok(secant_point(lo, hi, f_lo, f_hi));
        }
        let shrinking = width <= 0.5 * widths[iter % 2];
        let mut x = secant_point(lo, hi, f_lo, f_hi);
        let margin = 0.01 * width;
        if !shrinking || !(x > lo + margin && x < hi - margin) {
            x = lo + 0.5 * width;
        }
        if x <= lo || x >= hi {
            // Bracket is at floating-point resolution.
            return Ok(if f_lo.abs() <= f_hi.abs() { lo } else { hi });
        }
        widths[iter % 2] = width;
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.is_nan() {
            return Err(Error::MaxIterations {
                what: "find_root_monotone (NaN)",
                iters: iter,
            });
        }
        if (fx < 0.0) == (f_lo < 0.0) {
            lo = x;
            f_lo = fx;
        } else {
            hi = x;
            f_hi = fx;
        }
    }
    if hi - lo <= tol {
        return Ok(secant_point(lo, hi, f_lo, f_hi));
    }
    Err(Error::MaxIterations {
        what: "find_root_monotone",
        iters: MAX_ITERS,
    })
}

fn secant_point(lo: f64, hi: f64, f_lo: f64, f_hi: f64) -> f64 {
    let denom = f_hi - f_lo;
    if denom == 0.0 || !denom.is_finite() {
        return 0.5 * (lo + hi);
    }
    let x = lo - f_lo * (hi - lo) / denom;
    x.clamp(lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_root() {
        let f = |x: f64| x - 2.0;
        let r = find_root_monotone(f, Bracket::new(f, 0.0, 5.0).unwrap(), 1e-14).unwrap();
        assert!((r - 2.0).abs() < 1e-13);
    }

    #[test]
    fn cubic_root_matches_bisection() {
        // 60 plain bisection steps on [1, 2].
        let f = |x: f64| x * x * x - x - 2.0;
        let (mut a, mut b) = (1.0f64, 2.0f64);
        for _ in 0..60 {
            let c = 0.5 * (a + b);
            if f(c) < 0.0 {
                a = c;
            } else {
                b = c;
            }
        }
        let oracle = 0.5 * (a + b);
        assert!((oracle - 1.521_379_706_804_567_6).abs() < 1e-14);
        let r = find_root_monotone(f, Bracket::new(f, 1.0, 2.0).unwrap(), 1e-14).unwrap();
        assert!((r - oracle).abs() < 1e-12);
    }

    #[test]
    fn root_at_bracket_end() {
        let f = |x: f64| x;
        let b = Bracket::new(f, 0.0, 1.0).unwrap();
        assert_eq!(find_root_monotone(f, b, 1e-12).unwrap(), 0.0);
    }

    #[test]
    fn no_sign_change_rejected() {
        let f = |x: f64| x * x + 1.0;
        assert!(matches!(
            Bracket::new(f, -1.0, 1.0),
            Err(Error::NoSignChange { .. })
        ));
    }

    #[test]
    fn iterates_stay_inside_bracket() {
        let (lo, hi) = (0.3, 4.0);
        let mut seen = Vec::new();
        let f = |x: f64| (x - 1.0).powi(3) + 0.1 * x;
        let b = Bracket::new(f, lo, hi).unwrap();
        find_root_monotone(
            |x| {
                seen.push(x);
                f(x)
            },
            b,
            1e-13,
        )
        .unwrap();
        assert!(seen.iter().all(|&x| x >= lo && x <= hi));
    }
}
