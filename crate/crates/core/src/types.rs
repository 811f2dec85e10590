//! Value types shared by every other module.
//!
//! Indices are 0-based everywhere in the API. `Display` impls print them
//! 1-based, which is the convention used for terminals and receivers in
//! admission-control output.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rules::RuleFn;

/// Tolerance on `sum_k g_{i,k} == 1`.
pub const RELATIVE_GAIN_SUM_TOL: f64 = 1e-12;

/// Largest absolute component. Errors on an empty vector.
pub fn sup_norm(x: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::invalid("sup_norm of an empty vector"));
    }
    Ok(x.iter().fold(0.0_f64, |m, v| m.max(v.abs())))
}

/// Sup-norm that treats the empty vector as 0. Used where a zero-length
/// argument is legitimate (a single-terminal system has no interferers).
pub(crate) fn sup_norm_or_zero(x: &[f64]) -> f64 {
    x.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// `x` with component `i` deleted, remaining order preserved (`x_{-i}`).
pub fn remove_component(x: &[f64], i: usize) -> Result<Vec<f64>> {
    if i >= x.len() {
        return Err(Error::Index { index: i, len: x.len() });
    }
    let mut out = Vec::with_capacity(x.len() - 1);
    out.extend_from_slice(&x[..i]);
    out.extend_from_slice(&x[i + 1..]);
    Ok(out)
}

/// Inverse of [`remove_component`]: place `value` at position `i`.
pub fn insert_component(x: &[f64], i: usize, value: f64) -> Result<Vec<f64>> {
    if i > x.len() {
        return Err(Error::Index { index: i, len: x.len() + 1 });
    }
    let mut out = Vec::with_capacity(x.len() + 1);
    out.extend_from_slice(&x[..i]);
    out.push(value);
    out.extend_from_slice(&x[i..]);
    Ok(out)
}

/// Writes `x_{-i}` into `buf` without allocating.
pub(crate) fn remove_component_into(x: &[f64], i: usize, buf: &mut Vec<f64>) {
    buf.clear();
    buf.extend(x.iter().enumerate().filter(|&(n, _)| n != i).map(|(_, v)| *v));
}

/// Per-terminal CIR targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct QosVector(Vec<f64>);

impl QosVector {
    pub fn new(alphas: Vec<f64>) -> Result<Self> {
        if alphas.is_empty() {
            return Err(Error::invalid("QoS vector must have at least one terminal"));
        }
        if let Some((i, a)) = alphas.iter().enumerate().find(|(_, a)| !(a.is_finite() && **a > 0.0)) {
            return Err(Error::invalid(format!("alpha_{} = {a} must be positive and finite", i + 1)));
        }
        Ok(QosVector(alphas))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<f64>> for QosVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        QosVector::new(v)
    }
}

impl From<QosVector> for Vec<f64> {
    fn from(q: QosVector) -> Self {
        q.0
    }
}

/// Channel gains `h[i][k]` from terminal `i` to receiver `k` (terminal-major).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct GainMatrix {
    rows: Vec<Vec<f64>>,
    row_sums: Vec<f64>,
}

impl GainMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::invalid("gain matrix has no rows"));
        }
        let k = rows[0].len();
        if k == 0 {
            return Err(Error::invalid("gain matrix has no receivers"));
        }
        let mut row_sums = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            if row.len() != k {
                return Err(Error::invalid(format!("gain row {} has {} entries, expected {k}", i + 1, row.len())));
            }
            for (kk, h) in row.iter().enumerate() {
                if !(h.is_finite() && *h >= 0.0) {
                    return Err(Error::invalid(format!(
                        "gain h[{},{}] = {h} must be finite and non-negative",
                        i + 1,
                        kk + 1
                    )));
                }
            }
            let s: f64 = row.iter().sum();
            if s <= 0.0 {
                return Err(Error::invalid(format!("gain row {} is all zeros", i + 1)));
            }
            row_sums.push(s);
        }
        Ok(GainMatrix { rows, row_sums })
    }

    /// Every terminal hears every receiver with the same gain: `g_{i,k} = 1/K`.
    pub fn uniform(n: usize, k: usize) -> Result<Self> {
        GainMatrix::new(vec![vec![1.0; k]; n])
    }

    pub fn terminals(&self) -> usize {
        self.rows.len()
    }

    pub fn receivers(&self) -> usize {
        self.rows[0].len()
    }

    pub fn gain(&self, terminal: usize, receiver: usize) -> f64 {
        self.rows[terminal][receiver]
    }

    pub fn row(&self, terminal: usize) -> &[f64] {
        &self.rows[terminal]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// `h_i = sum_k h_{i,k}`.
    pub fn row_sum(&self, terminal: usize) -> f64 {
        self.row_sums[terminal]
    }

    /// `g_{i,k} = h_{i,k} / h_i`.
    pub fn relative(&self, terminal: usize, receiver: usize) -> f64 {
        self.rows[terminal][receiver] / self.row_sums[terminal]
    }
}

impl TryFrom<Vec<Vec<f64>>> for GainMatrix {
    type Error = Error;
    fn try_from(v: Vec<Vec<f64>>) -> Result<Self> {
        GainMatrix::new(v)
    }
}

impl From<GainMatrix> for Vec<Vec<f64>> {
    fn from(g: GainMatrix) -> Self {
        g.rows
    }
}

/// Noise power at each receiver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct NoiseVector(Vec<f64>);

impl NoiseVector {
    pub fn new(sigma_sq: Vec<f64>) -> Result<Self> {
        if let Some((k, s)) = sigma_sq.iter().enumerate().find(|(_, s)| !(s.is_finite() && **s >= 0.0)) {
            return Err(Error::invalid(format!("noise sigma_{} = {s} must be finite and non-negative", k + 1)));
        }
        Ok(NoiseVector(sigma_sq))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `max_k sigma_k^2`, or 0 for an empty vector.
    pub fn max(&self) -> f64 {
        sup_norm_or_zero(&self.0)
    }
}

impl TryFrom<Vec<f64>> for NoiseVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        NoiseVector::new(v)
    }
}

impl From<NoiseVector> for Vec<f64> {
    fn from(n: NoiseVector) -> Self {
        n.0
    }
}

/// Non-negative power levels, one per terminal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct PowerVector(Vec<f64>);

impl PowerVector {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = p.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::invalid(format!("power p_{} = {v} must be finite and non-negative", i + 1)));
        }
        Ok(PowerVector(p))
    }

    pub fn zeros(n: usize) -> Self {
        PowerVector(vec![0.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<f64>> for PowerVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        PowerVector::new(v)
    }
}

impl From<PowerVector> for Vec<f64> {
    fn from(p: PowerVector) -> Self {
        p.0
    }
}

/// One terminal's update `p_i <- f(p_{-i}) + c`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjustmentRule {
    pub f: RuleFn,
    pub c: f64,
    pub terminal: usize,
}

impl AdjustmentRule {
    pub fn new(terminal: usize, f: RuleFn, c: f64) -> Result<Self> {
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::invalid(format!("offset c_{} = {c} must be finite and non-negative", terminal + 1)));
        }
        Ok(AdjustmentRule { f, c, terminal })
    }
}

/// The constraint that attains the contraction modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Binding {
    pub terminal: usize,
    pub receiver: Option<usize>,
}

impl fmt::Display for Binding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.receiver {
            Some(k) => write!(f, "terminal {} at receiver {}", self.terminal + 1, k + 1),
            None => write!(f, "terminal {}", self.terminal + 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    /// `f_i(1_{N-1})` per terminal.
    pub per_terminal_modulus: Vec<f64>,
    /// Receiver attaining each terminal's modulus, where the rule has one.
    pub per_terminal_receiver: Vec<Option<usize>>,
    pub lambda: f64,
    pub feasible: bool,
    pub binding: Option<Binding>,
}

impl FeasibilityReport {
    /// Builds a report from per-terminal moduli; `lambda`, `feasible` and
    /// `binding` are derived so the invariants hold by construction.
    pub fn from_moduli(moduli: Vec<f64>, receivers: Vec<Option<usize>>) -> Self {
        debug_assert_eq!(moduli.len(), receivers.len());
        let mut lambda = f64::NEG_INFINITY;
        let mut binding = None;
        for (i, m) in moduli.iter().enumerate() {
            if *m > lambda {
                lambda = *m;
                binding = Some(Binding { terminal: i, receiver: receivers[i] });
            }
        }
        if moduli.is_empty() {
            lambda = 0.0;
        }
        FeasibilityReport {
            per_terminal_modulus: moduli,
            per_terminal_receiver: receivers,
            lambda,
            feasible: lambda < 1.0,
            binding,
        }
    }
}

impl fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "terminal  modulus  receiver")?;
        for (i, m) in self.per_terminal_modulus.iter().enumerate() {
            let recv = match self.per_terminal_receiver.get(i).copied().flatten() {
                Some(k) => (k + 1).to_string(),
                None => "-".to_string(),
            };
            writeln!(f, "{:>8}  {}  {}", i + 1, m, recv)?;
        }
        writeln!(f, "lambda = {}", self.lambda)?;
        if let Some(b) = self.binding {
            writeln!(f, "binding: {b}")?;
        }
        write!(f, "verdict: {}", if self.feasible { "FEASIBLE" } else { "INFEASIBLE" })
    }
}

/// Record of a Picard run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationTrace {
    pub iterates: Vec<Vec<f64>>,
    /// `||x_{t+1} - x_t||_inf`; one shorter than `iterates`.
    pub deltas: Vec<f64>,
    pub converged: bool,
    pub iterations_used: usize,
    /// False when the run was forced on a system without a contraction certificate.
    pub certified: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sup_norm_examples() {
        assert_eq!(sup_norm(&[0.0, 0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(sup_norm(&[1.0, -3.0, 2.0]).unwrap(), 3.0);
        assert_eq!(sup_norm(&[0.99, 0.99, 0.99]).unwrap(), 0.99);
        assert!(matches!(sup_norm(&[]), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn remove_component_examples() {
        assert_eq!(remove_component(&[1.0, 2.0, 3.0], 1).unwrap(), vec![1.0, 3.0]);
        assert_eq!(remove_component(&[5.0, 7.0], 0).unwrap(), vec![7.0]);
        assert_eq!(remove_component(&[4.0; 4], 3).unwrap(), vec![4.0; 3]);
        assert!(matches!(remove_component(&[1.0, 2.0], 2), Err(Error::Index { index: 2, len: 2 })));
    }

    #[test]
    fn gain_matrix_rejects_zero_row_but_allows_zero_entries() {
        assert!(GainMatrix::new(vec![vec![1.0, 1.0, 0.0], vec![2.0, 2.0, 0.0]]).is_ok());
        assert!(GainMatrix::new(vec![vec![1.0, 1.0], vec![0.0, 0.0]]).is_err());
        assert!(GainMatrix::new(vec![vec![1.0, 1.0], vec![1.0]]).is_err());
        assert!(GainMatrix::new(vec![vec![1.0, -1.0]]).is_err());
        assert!(GainMatrix::new(vec![vec![1.0, f64::NAN]]).is_err());
    }

    #[test]
    fn relative_gains_sum_to_one() {
        let g = GainMatrix::new(vec![vec![2.0, 1.0], vec![0.3, 7.0], vec![1e-9, 5.0]]).unwrap();
        for i in 0..3 {
            let s: f64 = (0..2).map(|k| g.relative(i, k)).sum();
            assert!((s - 1.0).abs() <= RELATIVE_GAIN_SUM_TOL);
        }
    }

    #[test]
    fn qos_vector_rejects_non_positive() {
        assert!(QosVector::new(vec![]).is_err());
        assert!(QosVector::new(vec![0.3, 0.0]).is_err());
        assert!(QosVector::new(vec![0.3, f64::INFINITY]).is_err());
        assert!(QosVector::new(vec![0.3, 0.4]).is_ok());
    }

    #[test]
    fn report_invariants() {
        let r = FeasibilityReport::from_moduli(vec![0.4, 0.3], vec![None, None]);
        assert_eq!(r.lambda, 0.4);
        assert!(r.feasible);
        assert_eq!(r.binding, Some(Binding { terminal: 0, receiver: None }));
        let r = FeasibilityReport::from_moduli(vec![1.0, 1.0, 1.0], vec![None; 3]);
        assert!(!r.feasible);
    }

    #[test]
    fn report_display_is_one_based() {
        let r = FeasibilityReport::from_moduli(vec![0.2, 0.9], vec![Some(0), Some(1)]);
        let s = r.to_string();
        assert!(s.contains("binding: terminal 2 at receiver 2"), "{s}");
    }
}
