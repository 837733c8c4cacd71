//! Least-squares fits of the asymptotic curve families.

use std::fmt;
use std::str::FromStr;

use num_traits::Float;

use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 500;
pub const STEP_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    /// `a exp(-b n) + c`, parameters `(a, b, c)`.
    ExpPlusConst,
    /// `a exp(-b n)`, parameters `(a, b)`.
    ExpDecay,
    /// `a (n + c)^(-1/2)`, parameters `(a, c)`.
    InvSqrtShift,
    /// `ln v = slope n + intercept`, parameters `(slope, intercept)`; errors are in log space.
    LogLinear,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::ExpPlusConst, Family::ExpDecay, Family::InvSqrtShift, Family::LogLinear];

    pub fn name(self) -> &'static str {
        match self {
            Family::ExpPlusConst => "exp-plus-const",
            Family::ExpDecay => "exp-decay",
            Family::InvSqrtShift => "inv-sqrt-shift",
            Family::LogLinear => "log-linear",
        }
    }

    pub fn parameter_names(self) -> &'static [&'static str] {
        match self {
            Family::ExpPlusConst => &["a", "b", "c"],
            Family::ExpDecay => &["a", "b"],
            Family::InvSqrtShift => &["a", "c"],
            Family::LogLinear => &["slope", "intercept"],
        }
    }

    fn log_domain(self) -> bool {
        matches!(self, Family::ExpDecay | Family::LogLinear)
    }

    /// Model value at `n`.
    pub fn eval<F: Float>(self, params: &[F], n: F) -> F {
        match self {
            Family::ExpPlusConst => params[0] * (-params[1] * n).exp() + params[2],
            Family::ExpDecay => params[0] * (-params[1] * n).exp(),
            Family::InvSqrtShift => params[0] / (n + params[1]).sqrt(),
            Family::LogLinear => (params[0] * n + params[1]).exp(),
        }
    }

    fn gradient<F: Float>(self, params: &[F], n: F, out: &mut [F]) {
        match self {
            Family::ExpPlusConst => {
                let e = (-params[1] * n).exp();
                out[0] = e;
                out[1] = -params[0] * n * e;
                out[2] = F::one();
            }
            Family::ExpDecay => {
                let e = (-params[1] * n).exp();
                out[0] = e;
                out[1] = -params[0] * n * e;
            }
            Family::InvSqrtShift => {
                let s = n + params[1];
                out[0] = F::one() / s.sqrt();
                out[1] = -params[0] / (f::<F>(2.0) * s * s.sqrt());
            }
            Family::LogLinear => unreachable!("solved in closed form"),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        Family::ALL
            .into_iter()
            .find(|f| f.name() == key || f.name().replace('-', "") == key.replace('-', ""))
            .ok_or_else(|| Error::invalid("curve family", format!("unknown family {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurveFit<F> {
    pub family: Family,
    pub params: Vec<F>,
    pub rmse: F,
    pub r_squared: F,
    pub iterations: usize,
}

fn f<F: Float>(v: f64) -> F {
    F::from(v).expect("representable constant")
}

/// Least squares over `(x, y)`; returns `(slope, intercept)`.
fn linear_regression<F: Float>(xs: &[F], ys: &[F]) -> Result<(F, F)> {
    let k = F::from(xs.len()).expect("small count");
    let mx = xs.iter().fold(F::zero(), |a, &x| a + x) / k;
    let my = ys.iter().fold(F::zero(), |a, &y| a + y) / k;
    let (mut sxx, mut sxy) = (F::zero(), F::zero());
    for (&x, &y) in xs.iter().zip(ys) {
        sxx = sxx + (x - mx) * (x - mx);
        sxy = sxy + (x - mx) * (y - my);
    }
    if sxx <= F::zero() {
        return Err(Error::invalid("series", "all n values are equal"));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

fn stats<F: Float>(ys: &[F], predicted: impl Iterator<Item = F>) -> (F, F) {
    let k = F::from(ys.len()).expect("small count");
    let mean = ys.iter().fold(F::zero(), |a, &y| a + y) / k;
    let mut sse = F::zero();
    let mut sst = F::zero();
    for (&y, p) in ys.iter().zip(predicted) {
        sse = sse + (y - p) * (y - p);
        sst = sst + (y - mean) * (y - mean);
    }
    let r2 = if sst > F::zero() {
        F::one() - sse / sst
    } else if sse == F::zero() {
        F::one()
    } else {
        F::zero()
    };
    ((sse / k).sqrt(), r2)
}

/// Solves the small dense system `a x = b` by partial pivoting.
fn solve<F: Float>(mut a: Vec<Vec<F>>, mut b: Vec<F>) -> Option<Vec<F>> {
    let k = b.len();
    for col in 0..k {
        let p = (col..k).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap_or(std::cmp::Ordering::Equal))?;
        if a[p][col].abs() <= F::min_positive_value() || !a[p][col].is_finite() {
            return None;
        }
        a.swap(col, p);
        b.swap(col, p);
        for r in col + 1..k {
            let factor = a[r][col] / a[col][col];
            let (top, bottom) = a.split_at_mut(r);
            for (x, &y) in bottom[0][col..k].iter_mut().zip(&top[col][col..k]) {
                *x = *x - factor * y;
            }
            b[r] = b[r] - factor * b[col];
        }
    }
    let mut x = vec![F::zero(); k];
    for r in (0..k).rev() {
        let mut acc = b[r];
        for c in r + 1..k {
            acc = acc - a[r][c] * x[c];
        }
        x[r] = acc / a[r][r];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

fn initial<F: Float>(family: Family, xs: &[F], ys: &[F]) -> Result<Vec<F>> {
    let last = ys.len() - 1;
    Ok(match family {
        Family::ExpDecay => {
            let logs: Vec<F> = ys.iter().map(|y| y.ln()).collect();
            let (slope, intercept) = linear_regression(xs, &logs)?;
            vec![intercept.exp(), -slope]
        }
        Family::ExpPlusConst => {
            let c = ys[last];
            let sign = if ys[0] >= c { F::one() } else { -F::one() };
            let (px, py): (Vec<F>, Vec<F>) = xs
                .iter()
                .zip(ys)
                .filter(|(_, &y)| (y - c) * sign > F::zero())
                .map(|(&x, &y)| (x, ((y - c) * sign).ln()))
                .unzip();
            if px.len() >= 2 && px[0] != px[px.len() - 1] {
                let (slope, intercept) = linear_regression(&px, &py)?;
                vec![sign * intercept.exp(), -slope, c]
            } else {
                let span = xs[last] - xs[0];
                vec![ys[0] - c, f::<F>(5.0) / span, c]
            }
        }
        Family::InvSqrtShift => {
            let inv = |y: F| F::one() / (y * y);
            let s = (inv(ys[last]) - inv(ys[0])) / (xs[last] - xs[0]);
            if s <= F::zero() {
                return Err(Error::Fit {
                    reason: "series does not decrease, no inverse square root shape".into(),
                    rmse: f64::NAN,
                    iterations: 0,
                });
            }
            vec![F::one() / s.sqrt(), inv(ys[0]) / s - xs[0]]
        }
        Family::LogLinear => unreachable!(),
    })
}

fn sse<F: Float>(family: Family, params: &[F], xs: &[F], ys: &[F]) -> F {
    xs.iter().zip(ys).fold(F::zero(), |acc, (&x, &y)| {
        let r = y - family.eval(params, x);
        acc + r * r
    })
}

/// Fits `family` to `series` of `(n, value)` points.
///
/// Exponential and shifted-root families start from a log-linear regression or
/// from the two endpoints and are refined by damped Gauss-Newton, stopping when
/// a step moves the parameters by less than `1e-10` relative.
pub fn fit_curve<F: Float>(series: &[(F, F)], family: Family) -> Result<CurveFit<F>> {
    if series.len() < 4 {
        return Err(Error::invalid("series", format!("need at least 4 points, got {}", series.len())));
    }
    let mut points = series.to_vec();
    points.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::invalid("series", "non-finite value"));
    }
    if family.log_domain() && points.iter().any(|&(_, y)| y <= F::zero() || y > F::one()) {
        return Err(Error::invalid("series", format!("{family} needs values in (0, 1]")));
    }
    let xs: Vec<F> = points.iter().map(|p| p.0).collect();
    let ys: Vec<F> = points.iter().map(|p| p.1).collect();

    if family == Family::LogLinear {
        let logs: Vec<F> = ys.iter().map(|y| y.ln()).collect();
        let (slope, intercept) = linear_regression(&xs, &logs)?;
        let (rmse, r_squared) = stats(&logs, xs.iter().map(|&x| slope * x + intercept));
        return Ok(CurveFit {
            family,
            params: vec![slope, intercept],
            rmse,
            r_squared,
            iterations: 0,
        });
    }

    let mut params = initial(family, &xs, &ys)?;
    let k = params.len();
    let valid = |p: &[F]| family != Family::InvSqrtShift || xs.iter().all(|&x| x + p[1] > F::zero());
    if !valid(&params) {
        params[1] = F::one() - xs[0];
    }
    let mut current = sse(family, &params, &xs, &ys);
    let mut lambda = f::<F>(1e-3);
    let tol = f::<F>(STEP_TOLERANCE);
    let mut grad = vec![F::zero(); k];
    let mut iterations = 0;
    let mut converged = current == F::zero();
    while !converged && iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut jtj = vec![vec![F::zero(); k]; k];
        let mut jtr = vec![F::zero(); k];
        for (&x, &y) in xs.iter().zip(&ys) {
            family.gradient(&params, x, &mut grad);
            let r = y - family.eval(&params, x);
            for i in 0..k {
                jtr[i] = jtr[i] + grad[i] * r;
                for j in 0..k {
                    jtj[i][j] = jtj[i][j] + grad[i] * grad[j];
                }
            }
        }
        loop {
            let mut damped = jtj.clone();
            for (i, row) in damped.iter_mut().enumerate() {
                row[i] = row[i] + lambda * (jtj[i][i] + f::<F>(1e-12));
            }
            let step = solve(damped, jtr.clone());
            let candidate: Option<Vec<F>> = step.map(|s| params.iter().zip(&s).map(|(&p, &d)| p + d).collect());
            if let Some(candidate) = candidate.filter(|c| valid(c)) {
                let next = sse(family, &candidate, &xs, &ys);
                if next.is_finite() && next <= current {
                    let moved = params
                        .iter()
                        .zip(&candidate)
                        .fold(F::zero(), |m, (&p, &c)| m.max((c - p).abs() / (p.abs() + tol)));
                    params = candidate;
                    current = next;
                    lambda = (lambda / f::<F>(10.0)).max(f::<F>(1e-15));
                    converged = moved <= tol || current == F::zero();
                    break;
                }
            }
            lambda = lambda * f::<F>(10.0);
            if lambda > f::<F>(1e16) {
                // No descent direction left: a stationary point at working precision.
                converged = true;
                break;
            }
        }
    }
    let (rmse, r_squared) = stats(&ys, xs.iter().map(|&x| family.eval(&params, x)));
    if !converged {
        return Err(Error::Fit {
            reason: format!("{family} did not converge within {MAX_ITERATIONS} iterations"),
            rmse: rmse.to_f64().unwrap_or(f64::NAN),
            iterations,
        });
    }
    Ok(CurveFit {
        family,
        params,
        rmse,
        r_squared,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(f: impl Fn(f64) -> f64, ns: impl Iterator<Item = u32>) -> Vec<(f64, f64)> {
        ns.map(|n| (f64::from(n), f(f64::from(n)))).collect()
    }

    #[test]
    fn inv_sqrt_round_trip() {
        let s = series(|n| 0.96124 / (n + 0.12519).sqrt(), (2..=200).step_by(2));
        let fit = fit_curve(&s, Family::InvSqrtShift).unwrap();
        assert!((fit.params[0] - 0.96124).abs() < 1e-6, "{fit:?}");
        assert!((fit.params[1] - 0.12519).abs() < 1e-6, "{fit:?}");
        assert!(fit.rmse < 1e-9);
    }

    #[test]
    fn exp_plus_const_round_trip() {
        let s = series(|n| 0.25 - 0.27476 * (-0.18796 * n).exp(), 1..=60);
        let fit = fit_curve(&s, Family::ExpPlusConst).unwrap();
        for (got, want) in fit.params.iter().zip([-0.27476, 0.18796, 0.25]) {
            assert!((got - want).abs() < 1e-6, "{fit:?}");
        }
        assert!(fit.r_squared > 0.999_999);

        let s = series(|n| 1.0 - 0.82227 * (-0.05941 * n).exp(), 1..=100);
        let fit = fit_curve(&s, Family::ExpPlusConst).unwrap();
        assert!((fit.params[1] - 0.05941).abs() < 1e-6, "{fit:?}");
    }

    #[test]
    fn constant_series() {
        let s = series(|_| 0.3, 1..=10);
        let fit = fit_curve(&s, Family::ExpPlusConst).unwrap();
        assert!(fit.params[0].abs() < 1e-12);
        assert!(fit.rmse < 1e-12);
    }

    #[test]
    fn exp_decay_and_log_linear() {
        let s = series(|n| 0.65588 * (-0.64539 * n).exp(), (2..=20).step_by(2));
        let fit = fit_curve(&s, Family::ExpDecay).unwrap();
        assert!((fit.params[1] - 0.64539).abs() < 1e-8);
        let line = fit_curve(&s, Family::LogLinear).unwrap();
        assert!((line.params[0] + 0.64539).abs() < 1e-12);
        assert!((line.params[1] - 0.65588f64.ln()).abs() < 1e-10);
        assert!(line.r_squared > 0.999_999);
    }

    #[test]
    fn works_in_single_precision() {
        let s: Vec<(f32, f32)> = (1..=30).map(|n| (n as f32, (-0.1 * n as f32 - 1.0).exp())).collect();
        let line = fit_curve(&s, Family::LogLinear).unwrap();
        assert!((line.params[0] + 0.1).abs() < 1e-4);
    }

    #[test]
    fn rejects_bad_input() {
        let short = series(|n| n, 1..=3);
        assert!(fit_curve(&short, Family::ExpDecay).is_err());
        let negative = series(|n| -n, 1..=6);
        assert!(fit_curve(&negative, Family::LogLinear).is_err());
        let rising = series(|n| n.sqrt() / 10.0, 1..=6);
        assert!(matches!(fit_curve(&rising, Family::InvSqrtShift), Err(Error::Fit { .. })));
    }

    #[test]
    fn family_names_parse() {
        for f in Family::ALL {
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
        }
        assert_eq!("ExpPlusConst".parse::<Family>().unwrap(), Family::ExpPlusConst);
        assert!("cubic".parse::<Family>().is_err());
    }
}
