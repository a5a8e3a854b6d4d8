//! Small numerical kernels shared by the modules: compensated summation,
//! log-space accumulation, line fits and exponential-series remainders.

/// Neumaier (improved Kahan) summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// `ln Σ exp(xᵢ)` with max-shift and compensated accumulation.
/// Returns `-∞` for an empty input.
pub fn log_sum_exp(logs: &[f64]) -> f64 {
    let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + compensated_sum(logs.iter().map(|&x| (x - m).exp())).ln()
}

/// Ordinary least-squares line `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Some(LineFit { slope, intercept: my - slope * mx })
}

/// Upper bound for `Σ_{k>K} x^k / k!` with `x ≥ 0`.
///
/// Uses the geometric majorant of the tail once `K + 2 > x`; returns `+∞`
/// before that point.
pub fn exp_tail_bound(x: f64, order: usize) -> f64 {
    let x = x.abs();
    if x == 0.0 {
        return 0.0;
    }
    let k1 = (order + 1) as f64;
    let ratio = x / (k1 + 1.0);
    if ratio >= 1.0 {
        return f64::INFINITY;
    }
    // ln(x^{K+1} / (K+1)!)
    let ln_first = k1 * x.ln() - ln_factorial(order + 1);
    ln_first.exp() / (1.0 - ratio)
}

pub fn ln_factorial(n: usize) -> f64 {
    statrs::function::factorial::ln_factorial(n as u64)
}

/// Relative comparison `lhs ≤ rhs (1 + slack)` with an absolute floor for
/// values near zero.
pub fn le_with_slack(lhs: f64, rhs: f64, slack: f64) -> bool {
    lhs <= rhs + slack * rhs.abs() + f64::MIN_POSITIVE
}
