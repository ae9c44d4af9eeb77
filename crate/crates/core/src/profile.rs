//! One-dimensional profiles: closed-form expressions, sampled data, or closures.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::Expr;

type Callable = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Constant(f64),
    Expression { expr: Arc<Expr>, length: f64 },
    Sampled(Arc<CubicSpline>),
    Callable(Callable),
}

/// A function on an interval with value and derivative evaluation.
#[derive(Clone)]
pub struct Profile1D {
    domain: (f64, f64),
    kind: Kind,
    source: String,
}

impl fmt::Debug for Profile1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Profile1D({} on [{}, {}])", self.source, self.domain.0, self.domain.1)
    }
}

impl Profile1D {
    pub fn constant(value: f64, domain: (f64, f64)) -> Self {
        Self { domain, kind: Kind::Constant(value), source: format!("{value}") }
    }

    /// Parses an expression in `x`; `L` inside the expression evaluates to `length`.
    pub fn expression(src: &str, length: f64, domain: (f64, f64)) -> Result<Self> {
        let expr = Expr::parse(src)?;
        Ok(Self { domain, kind: Kind::Expression { expr: Arc::new(expr), length }, source: src.to_string() })
    }

    pub fn sampled(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let spline = CubicSpline::new(xs, ys)?;
        let domain = (spline.xs[0], *spline.xs.last().unwrap());
        Ok(Self { domain, kind: Kind::Sampled(Arc::new(spline)), source: "samples".into() })
    }

    pub fn from_fn<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F, domain: (f64, f64), label: &str) -> Self {
        Self { domain, kind: Kind::Callable(Arc::new(f)), source: label.to_string() }
    }

    /// Reads a two-column CSV (coordinate, value); a non-numeric first row is taken as a header.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for (k, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
            if rec.len() < 2 {
                return Err(Error::Parse(format!("{}: row {} needs two columns", path.display(), k + 1)));
            }
            match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
                (Ok(x), Ok(y)) => {
                    xs.push(x);
                    ys.push(y);
                }
                _ if k == 0 => continue,
                _ => return Err(Error::Parse(format!("{}: row {} is not numeric", path.display(), k + 1))),
            }
        }
        let mut p = Self::sampled(xs, ys)?;
        p.source = path.display().to_string();
        Ok(p)
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn value(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Constant(c) => *c,
            Kind::Expression { expr, length } => expr.eval(x, *length).0,
            Kind::Sampled(s) => s.eval(x).0,
            Kind::Callable(f) => f(x),
        }
    }

    pub fn value_and_derivative(&self, x: f64) -> (f64, f64) {
        match &self.kind {
            Kind::Constant(c) => (*c, 0.0),
            Kind::Expression { expr, length } => expr.eval(x, *length),
            Kind::Sampled(s) => s.eval(x),
            Kind::Callable(f) => {
                let h = 1e-5 * (1.0 + (self.domain.1 - self.domain.0).abs().min(1e6));
                (f(x), (f(x + h) - f(x - h)) / (2.0 * h))
            }
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.value_and_derivative(x).1
    }

    /// Pointwise product with a scalar.
    pub fn scaled(&self, factor: f64) -> Self {
        let inner = self.clone();
        Self::from_fn(move |x| factor * inner.value(x), self.domain, &format!("{factor}*({})", self.source))
    }
}

/// Natural cubic spline through strictly increasing nodes; the end cubics extrapolate.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let n = xs.len();
        if n < 2 || ys.len() != n {
            return Err(Error::Parse("sampled profile needs at least two (x, y) pairs".into()));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) || xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::Parse("sample coordinates must be finite and strictly increasing".into()));
        }
        let mut m = vec![0.0; n];
        if n > 2 {
            let k = n - 2;
            let (mut a, mut b, mut c, mut d) = (vec![0.0; k], vec![0.0; k], vec![0.0; k], vec![0.0; k]);
            for i in 1..n - 1 {
                let h0 = xs[i] - xs[i - 1];
                let h1 = xs[i + 1] - xs[i];
                a[i - 1] = h0;
                b[i - 1] = 2.0 * (h0 + h1);
                c[i - 1] = h1;
                d[i - 1] = 6.0 * ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0);
            }
            let sol = thomas(&a, &b, &c, &d);
            m[1..n - 1].copy_from_slice(&sol);
        }
        Ok(Self { xs, ys, m })
    }

    pub fn eval(&self, x: f64) -> (f64, f64) {
        let n = self.xs.len();
        let i = match self.xs.partition_point(|&v| v <= x) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let h = x1 - x0;
        let (a, b) = ((x1 - x) / h, (x - x0) / h);
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let v = a * self.ys[i] + b * self.ys[i + 1] + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let d = (self.ys[i + 1] - self.ys[i]) / h + ((1.0 - 3.0 * a * a) * m0 + (3.0 * b * b - 1.0) * m1) * h / 6.0;
        (v, d)
    }
}

/// Tridiagonal solve; `a` is the sub-diagonal (a[0] unused), `c` the super-diagonal.
pub(crate) fn thomas(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut cp = vec![0.0; n];
    let mut dp = vec![0.0; n];
    cp[0] = c[0] / b[0];
    dp[0] = d[0] / b[0];
    for i in 1..n {
        let den = b[i] - a[i] * cp[i - 1];
        cp[i] = c[i] / den;
        dp[i] = (d[i] - a[i] * dp[i - 1]) / den;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = dp[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = dp[i] - cp[i] * x[i + 1];
    }
    x
}
