//! Contraction certification and successive approximation.
//!
//! A [`System`] is the map `T_i(p) = f_i(p_{-i}) + c_i`. Its contraction
//! modulus in the sup-norm metric is `max_i f_i(1_{N-1})`; when that is below
//! one, Picard iteration from any start converges geometrically to the unique
//! fixed point.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rules::VectorFn;
use crate::types::{
    remove_component_into, sup_norm_or_zero, AdjustmentRule, FeasibilityReport, IterationTrace, PowerVector,
};

pub const DEFAULT_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 100_000;
const ROUNDING_FLOOR: f64 = 4.0 * f64::EPSILON;

#[derive(Debug, Clone, PartialEq)]
pub struct System {
    rules: Vec<AdjustmentRule>,
}

impl System {
    pub fn new(rules: Vec<AdjustmentRule>) -> Result<Self> {
        let n = rules.len();
        if n == 0 {
            return Err(Error::invalid("system needs at least one terminal"));
        }
        for (i, r) in rules.iter().enumerate() {
            if r.terminal != i {
                return Err(Error::invalid(format!("rule at position {} is for terminal {}", i + 1, r.terminal + 1)));
            }
            if r.f.dim() != n - 1 {
                return Err(Error::Dimension { expected: n - 1, got: r.f.dim() });
            }
        }
        Ok(System { rules })
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn rules(&self) -> &[AdjustmentRule] {
        &self.rules
    }

    pub fn offsets(&self) -> Vec<f64> {
        self.rules.iter().map(|r| r.c).collect()
    }

    /// One synchronous update `T(x)`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.len()];
        let mut buf = Vec::with_capacity(self.len());
        self.apply_into(x, &mut out, &mut buf)?;
        Ok(out)
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64], buf: &mut Vec<f64>) -> Result<()> {
        if x.len() != self.len() {
            return Err(Error::Dimension { expected: self.len(), got: x.len() });
        }
        for (i, rule) in self.rules.iter().enumerate() {
            remove_component_into(x, i, buf);
            out[i] = rule.f.eval(buf)? + rule.c;
        }
        Ok(())
    }

    /// `T(x) - c`, the homogeneous part of the map.
    pub fn apply_homogeneous(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = self.apply(x)?;
        for (o, r) in out.iter_mut().zip(&self.rules) {
            *o -= r.c;
        }
        Ok(out)
    }

    /// `||T(x) - x||_inf`.
    pub fn residual(&self, x: &[f64]) -> Result<f64> {
        let tx = self.apply(x)?;
        Ok(sup_dist(&tx, x))
    }
}

pub(crate) fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Per-terminal `f_i(1)`, their maximum, and the binding constraint.
pub fn contraction_modulus(sys: &System) -> Result<FeasibilityReport> {
    let ones = vec![1.0; sys.len().saturating_sub(1)];
    let mut moduli = Vec::with_capacity(sys.len());
    let mut receivers = Vec::with_capacity(sys.len());
    for rule in sys.rules() {
        let m = rule.f.eval(&ones)?;
        if !m.is_finite() {
            return Err(Error::InvalidFunction(format!("f_{}(1) = {m} is not finite", rule.terminal + 1)));
        }
        moduli.push(m);
        receivers.push(rule.f.binding_receiver(&ones)?);
    }
    Ok(FeasibilityReport::from_moduli(moduli, receivers))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    pub tolerance: f64,
    pub max_iter: usize,
    /// Start point; zeros when `None`.
    pub initial: Option<PowerVector>,
    /// Iterate even without a contraction certificate.
    pub force: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig { tolerance: DEFAULT_TOLERANCE, max_iter: DEFAULT_MAX_ITER, initial: None, force: false }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::invalid(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter must be >= 1"));
        }
        Ok(())
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_initial(mut self, initial: PowerVector) -> Self {
        self.initial = Some(initial);
        self
    }

    pub fn forced(mut self) -> Self {
        self.force = true;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Solution {
    pub power: Vec<f64>,
    pub trace: IterationTrace,
    pub report: FeasibilityReport,
}

/// Picard iteration `x_{t+1} = T(x_t)`.
///
/// On a certified system the run stops once both the step
/// `||x_{t+1} - x_t||_inf` and the a-posteriori bound `lambda / (1 - lambda)`
/// times that step on the distance to the fixed point are within `tol`, so
/// two runs from different starts land within `2 tol` of each other; a step
/// at rounding level also stops it.
/// Refuses to run on a system whose modulus is not below one unless
/// `cfg.force` is set; such runs are marked uncertified and stop on
/// `||x_{t+1} - x_t||_inf <= tol`.
pub fn solve(sys: &System, cfg: &SolveConfig) -> Result<Solution> {
    cfg.validate()?;
    let report = contraction_modulus(sys)?;
    if !report.feasible && !cfg.force {
        return Err(Error::Infeasible(Box::new(report)));
    }
    let n = sys.len();
    let start = match &cfg.initial {
        Some(p) if p.len() != n => return Err(Error::Dimension { expected: n, got: p.len() }),
        Some(p) => p.as_slice().to_vec(),
        None => vec![0.0; n],
    };

    let mut trace = IterationTrace {
        iterates: vec![start],
        deltas: Vec::new(),
        converged: false,
        iterations_used: 0,
        certified: report.feasible,
    };
    let error_factor = report.feasible.then(|| report.lambda / (1.0 - report.lambda));
    let mut next = vec![0.0; n];
    let mut buf = Vec::with_capacity(n);
    while trace.iterations_used < cfg.max_iter {
        let cur = trace.iterates.last().expect("trace starts non-empty");
        sys.apply_into(cur, &mut next, &mut buf)?;
        let delta = sup_dist(&next, cur);
        trace.iterates.push(next.clone());
        trace.deltas.push(delta);
        trace.iterations_used += 1;
        if !delta.is_finite() || next.iter().any(|v| !v.is_finite()) {
            break;
        }
        let done = match error_factor {
            Some(k) => {
                (delta <= cfg.tolerance && k * delta <= cfg.tolerance)
                    || delta <= ROUNDING_FLOOR * sup_norm_or_zero(&next).max(1.0)
            }
            None => delta <= cfg.tolerance,
        };
        if done {
            trace.converged = true;
            break;
        }
    }
    if !trace.converged {
        return Err(Error::NonConvergence { trace: Box::new(trace) });
    }
    let power = trace.iterates.last().cloned().unwrap_or_default();
    Ok(Solution { power, trace, report })
}

/// Solves `(I - A) p = c` by Gaussian elimination with partial pivoting.
///
/// Ground truth for affine systems `p = A p + c`; it shares no code with the
/// iterative path.
pub fn linear_oracle(a: &[Vec<f64>], c: &[f64]) -> Result<Vec<f64>> {
    let n = c.len();
    if a.len() != n {
        return Err(Error::Dimension { expected: n, got: a.len() });
    }
    for (i, row) in a.iter().enumerate() {
        if row.len() != n {
            return Err(Error::Dimension { expected: n, got: row.len() });
        }
        for (j, v) in row.iter().enumerate() {
            if !(v.is_finite() && *v >= 0.0) {
                return Err(Error::invalid(format!("A[{},{}] = {v} must be finite and non-negative", i + 1, j + 1)));
            }
        }
        if row[i] != 0.0 {
            return Err(Error::invalid(format!("A[{0},{0}] must be zero", i + 1)));
        }
    }
    if let Some(v) = c.iter().find(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("offset {v} is not finite")));
    }

    // augmented [I - A | c]
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r: Vec<f64> = row.iter().map(|v| -v).collect();
            r[i] += 1.0;
            r.push(c[i]);
            r
        })
        .collect();
    let scale = m.iter().flat_map(|r| r[..n].iter()).fold(0.0_f64, |s, v| s.max(v.abs()));
    let eps = f64::EPSILON * scale * n as f64;

    for col in 0..n {
        let pivot = (col..n).max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs())).expect("non-empty range");
        if m[pivot][col].abs() <= eps {
            return Err(Error::Singular(format!("I - A has no usable pivot in column {}", col + 1)));
        }
        m.swap(col, pivot);
        for row in col + 1..n {
            let factor = m[row][col] / m[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..=n {
                m[row][k] -= factor * m[col][k];
            }
        }
    }
    let mut p = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| m[row][k] * p[k]).sum();
        p[row] = (m[row][n] - s) / m[row][row];
    }
    Ok(p)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateVerdict {
    pub passed: bool,
    /// Largest observed `delta_{t+1} / delta_t` over steps with `delta_t > 0`.
    pub worst_ratio: f64,
    /// First step `t` where `delta_{t+1} > lambda * delta_t + tol`.
    pub first_violation: Option<usize>,
}

/// Geometric-rate check: `delta_{t+1} <= lambda * delta_t + 1e-12 (1 + delta_t)`.
pub fn rate_check(trace: &IterationTrace, lambda: f64) -> RateVerdict {
    let mut worst = 0.0_f64;
    let mut first_violation = None;
    for (t, w) in trace.deltas.windows(2).enumerate() {
        let (d0, d1) = (w[0], w[1]);
        if d0 > 0.0 {
            worst = worst.max(d1 / d0);
        }
        if d1 > lambda * d0 + 1e-12 * (1.0 + d0) && first_violation.is_none() {
            first_violation = Some(t);
        }
    }
    RateVerdict { passed: first_violation.is_none(), worst_ratio: worst, first_violation }
}

/// Writes a trace as CSV: `iter,p_1..p_N,delta`. Row 0 is the start point
/// and has an empty delta.
pub fn write_trace_csv<W: std::io::Write>(trace: &IterationTrace, w: W) -> std::result::Result<(), csv::Error> {
    let n = trace.iterates.first().map_or(0, |v| v.len());
    let mut wr = csv::Writer::from_writer(w);
    let mut header = vec!["iter".to_string()];
    header.extend((1..=n).map(|i| format!("p_{i}")));
    header.push("delta".into());
    wr.write_record(&header)?;
    for (t, x) in trace.iterates.iter().enumerate() {
        let mut rec = vec![t.to_string()];
        rec.extend(x.iter().map(|v| v.to_string()));
        rec.push(if t == 0 { String::new() } else { trace.deltas[t - 1].to_string() });
        wr.write_record(&rec)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn export_trace(trace: &IterationTrace, path: &std::path::Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    write_trace_csv(trace, std::io::BufWriter::new(file))
        .map_err(|source| Error::Csv { path: path.to_path_buf(), source })
}
