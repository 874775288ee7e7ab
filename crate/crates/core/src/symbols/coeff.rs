use num_complex::Complex64;

use super::SymbolError;

/// Right-continuous piecewise-constant function of time.
///
/// `values[i]` holds on `[breakpoints[i], breakpoints[i+1])`; the first value
/// extends to `-∞` and the last to `+∞`.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseConstant {
    breakpoints: Vec<f64>,
    values: Vec<Complex64>,
}

impl PiecewiseConstant {
    pub fn new(breakpoints: Vec<f64>, values: Vec<Complex64>) -> Result<Self, SymbolError> {
        if breakpoints.is_empty() || breakpoints.len() != values.len() {
            return Err(SymbolError::Invalid(format!(
                "need one value per breakpoint, got {} breakpoints and {} values",
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints.iter().any(|b| !b.is_finite())
            || values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(SymbolError::NonFinite);
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SymbolError::Invalid(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        Ok(Self { breakpoints, values })
    }

    pub fn constant(value: Complex64) -> Self {
        Self {
            breakpoints: vec![0.0],
            values: vec![value],
        }
    }

    pub fn real_constant(value: f64) -> Self {
        Self::constant(Complex64::new(value, 0.0))
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn is_constant(&self) -> bool {
        self.values.windows(2).all(|w| w[0] == w[1])
    }

    /// Index of the piece active at `t` (clamped to the first piece).
    pub fn segment(&self, t: f64) -> usize {
        self.breakpoints
            .partition_point(|&b| b <= t)
            .saturating_sub(1)
    }

    pub fn value_at(&self, t: f64) -> Complex64 {
        self.values[self.segment(t)]
    }

    /// Exact `∫ₛᵗ a(r) dr` for `s ≤ t`.
    pub fn integral(&self, s: f64, t: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (len, idx) in segment_overlaps(&self.breakpoints, s, t) {
            acc += self.values[idx] * len;
        }
        acc
    }
}

/// Overlap lengths of `[s, t]` with the pieces defined by `breakpoints`,
/// as `(length, piece index)` pairs in time order.
pub(crate) fn segment_overlaps(breakpoints: &[f64], s: f64, t: f64) -> Vec<(f64, usize)> {
    let mut out = Vec::new();
    if t <= s {
        return out;
    }
    let first = breakpoints.partition_point(|&b| b <= s).saturating_sub(1);
    let mut lo = s;
    let mut idx = first;
    loop {
        let hi = breakpoints.get(idx + 1).copied().unwrap_or(f64::INFINITY).min(t);
        if hi > lo {
            out.push((hi - lo, idx));
        }
        if hi >= t {
            break;
        }
        lo = hi;
        idx += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    #[test]
    fn rejects_unsorted_breakpoints() {
        assert!(PiecewiseConstant::new(vec![0.0, 0.0], vec![c(1.0), c(2.0)]).is_err());
        assert!(PiecewiseConstant::new(vec![1.0, 0.0], vec![c(1.0), c(2.0)]).is_err());
        assert!(PiecewiseConstant::new(vec![0.0], vec![]).is_err());
        assert!(PiecewiseConstant::new(vec![f64::NAN], vec![c(1.0)]).is_err());
    }

    #[test]
    fn hand_sum_of_segments() {
        let a = PiecewiseConstant::new(vec![0.0, 1.0], vec![c(1.0), c(2.0)]).unwrap();
        assert_eq!(a.integral(0.0, 2.0), c(3.0));
        assert_eq!(a.integral(0.5, 1.5), c(1.5));
        assert_eq!(a.integral(-1.0, 0.0), c(1.0));
        assert_eq!(a.integral(0.7, 0.7), c(0.0));
        assert_eq!(a.value_at(1.0), c(2.0));
        assert_eq!(a.value_at(-5.0), c(1.0));
    }

    #[test]
    fn overlaps_cover_interval() {
        let bps = [0.0, 1.0, 2.5, 3.0];
        let parts = segment_overlaps(&bps, -0.5, 2.75);
        let total: f64 = parts.iter().map(|p| p.0).sum();
        assert!((total - 3.25).abs() < 1e-15);
        assert_eq!(parts.iter().map(|p| p.1).collect::<Vec<_>>(), vec![0, 1, 2]);
    }
}
