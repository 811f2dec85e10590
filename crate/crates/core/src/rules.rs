//! Quasi-semi-normal building blocks for adjustment rules.
//!
//! Every function here is closed data (weights and a small combinator tree)
//! rather than an opaque closure, so a report can say *which* weighted sum
//! attains a modulus. [`VectorFn`] is the common evaluation interface; it is
//! also what the axiom checker consumes, so ad-hoc closures can be wrapped
//! with [`FnRule`] for testing.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::sup_norm_or_zero;

/// A real-valued function on `R^dim`.
pub trait VectorFn: Send + Sync {
    fn dim(&self) -> usize;

    fn eval(&self, x: &[f64]) -> Result<f64>;

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), got: x.len() });
        }
        Ok(())
    }

    /// Value at the all-ones vector.
    fn at_ones(&self) -> Result<f64> {
        self.eval(&vec![1.0; self.dim()])
    }
}

impl<T: VectorFn + ?Sized> VectorFn for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, x: &[f64]) -> Result<f64> {
        (**self).eval(x)
    }
}

impl<T: VectorFn + ?Sized> VectorFn for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, x: &[f64]) -> Result<f64> {
        (**self).eval(x)
    }
}

/// Adapter for arbitrary closures.
pub struct FnRule<F> {
    dim: usize,
    name: String,
    f: F,
}

impl<F> FnRule<F>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
{
    pub fn new(name: impl Into<String>, dim: usize, f: F) -> Self {
        FnRule { dim, name: name.into(), f }
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl<F> VectorFn for FnRule<F>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok((self.f)(x))
    }
}

/// `(sum_m |x_m|)^2`: satisfies everything except sub-additivity (and hence
/// the reverse triangle inequality and sub-homogeneity beyond `r = 1`).
pub fn squared_l1(dim: usize) -> FnRule<impl Fn(&[f64]) -> f64 + Send + Sync> {
    FnRule::new("squared-l1", dim, |x: &[f64]| {
        let s: f64 = x.iter().map(|v| v.abs()).sum();
        s * s
    })
}

/// Exponent of a Hölder norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum HolderExponent {
    Finite(f64),
    Infinity,
}

impl HolderExponent {
    pub fn new(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            Ok(HolderExponent::Infinity)
        } else if p.is_finite() && p >= 1.0 {
            Ok(HolderExponent::Finite(p))
        } else {
            Err(Error::invalid(format!("Hölder exponent must be >= 1, got {p}")))
        }
    }

    pub fn norm(self, x: &[f64]) -> f64 {
        match self {
            HolderExponent::Infinity => sup_norm_or_zero(x),
            HolderExponent::Finite(1.0) => x.iter().map(|v| v.abs()).sum(),
            HolderExponent::Finite(2.0) => {
                // scaled to avoid overflow on large components
                let m = sup_norm_or_zero(x);
                if m == 0.0 {
                    return 0.0;
                }
                m * x.iter().map(|v| (v / m) * (v / m)).sum::<f64>().sqrt()
            }
            HolderExponent::Finite(p) => {
                let m = sup_norm_or_zero(x);
                if m == 0.0 {
                    return 0.0;
                }
                m * x.iter().map(|v| (v.abs() / m).powf(p)).sum::<f64>().powf(1.0 / p)
            }
        }
    }
}

impl fmt::Display for HolderExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HolderExponent::Finite(p) => write!(f, "{p}"),
            HolderExponent::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for HolderExponent {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "Infinity" | "∞" | "max" => Ok(HolderExponent::Infinity),
            other => {
                let p: f64 = other.parse().map_err(|_| Error::invalid(format!("bad Hölder exponent {other:?}")))?;
                HolderExponent::new(p)
            }
        }
    }
}

impl From<HolderExponent> for String {
    fn from(h: HolderExponent) -> Self {
        h.to_string()
    }
}

impl TryFrom<String> for HolderExponent {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// `x -> sum_m |a_m x_m|`. Zero weights are allowed (a semi-norm).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightedAbsSum {
    weights: Vec<f64>,
}

impl WeightedAbsSum {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !w.is_finite()) {
            return Err(Error::InvalidFunction(format!("non-finite weight {w}")));
        }
        Ok(WeightedAbsSum { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(a, v)| (a * v).abs()).sum()
    }
}

impl VectorFn for WeightedAbsSum {
    fn dim(&self) -> usize {
        self.weights.len()
    }

    fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.eval_unchecked(x))
    }
}

impl TryFrom<Vec<f64>> for WeightedAbsSum {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        WeightedAbsSum::new(v)
    }
}

impl From<WeightedAbsSum> for Vec<f64> {
    fn from(w: WeightedAbsSum) -> Self {
        w.weights
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderNorm {
    pub p: HolderExponent,
    pub dim: usize,
}

impl HolderNorm {
    pub fn new(p: HolderExponent, dim: usize) -> Self {
        HolderNorm { p, dim }
    }
}

impl VectorFn for HolderNorm {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.p.norm(x))
    }
}

/// Outer monotonic norm applied to a vector of weighted absolute sums.
///
/// The outer norm is restricted to Hölder norms; those are absolute, hence
/// monotonic, which is what makes the composition a norm again.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NormOfNormsRepr")]
pub struct NormOfNorms {
    inner: Vec<WeightedAbsSum>,
    outer: HolderExponent,
}

impl NormOfNorms {
    pub fn new(inner: Vec<WeightedAbsSum>, outer: HolderExponent) -> Result<Self> {
        let Some(first) = inner.first() else {
            return Err(Error::invalid("norm of norms needs at least one inner function"));
        };
        let m = first.dim();
        if let Some(bad) = inner.iter().find(|w| w.dim() != m) {
            return Err(Error::Dimension { expected: m, got: bad.dim() });
        }
        Ok(NormOfNorms { inner, outer })
    }

    pub fn inner(&self) -> &[WeightedAbsSum] {
        &self.inner
    }

    pub fn outer(&self) -> HolderExponent {
        self.outer
    }

    pub fn inner_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        Ok(self.inner.iter().map(|w| w.eval_unchecked(x)).collect())
    }

    /// Index of the inner function attaining the max; only meaningful for an
    /// infinity-norm outer, `None` otherwise.
    pub fn binding_inner(&self, x: &[f64]) -> Result<Option<usize>> {
        if self.outer != HolderExponent::Infinity {
            return Ok(None);
        }
        Ok(argmax(&self.inner_values(x)?))
    }
}

#[derive(Deserialize)]
struct NormOfNormsRepr {
    inner: Vec<WeightedAbsSum>,
    #[serde(default = "infinity")]
    outer: HolderExponent,
}

fn infinity() -> HolderExponent {
    HolderExponent::Infinity
}

impl TryFrom<NormOfNormsRepr> for NormOfNorms {
    type Error = Error;

    fn try_from(r: NormOfNormsRepr) -> Result<Self> {
        NormOfNorms::new(r.inner, r.outer)
    }
}

impl VectorFn for NormOfNorms {
    fn dim(&self) -> usize {
        self.inner[0].dim()
    }

    fn eval(&self, x: &[f64]) -> Result<f64> {
        Ok(self.outer.norm(&self.inner_values(x)?))
    }
}

/// `phi(x) = ||x||_inf * f(1)`: the scaled sup-norm that dominates any
/// non-negative, max-monotone, positively sub-homogeneous `f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DominationBound {
    pub scale: f64,
    pub dim: usize,
}

impl VectorFn for DominationBound {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(sup_norm_or_zero(x) * self.scale)
    }
}

/// Build the domination bound of `f`. The caller is responsible for `f`
/// actually having the required properties; see [`crate::axioms`].
pub fn dominate(f: &dyn VectorFn) -> Result<DominationBound> {
    let scale = f.at_ones()?;
    if !scale.is_finite() {
        return Err(Error::InvalidFunction(format!("f(1) = {scale} is not finite")));
    }
    if scale < 0.0 {
        return Err(Error::InvalidFunction(format!("f(1) = {scale} is negative")));
    }
    Ok(DominationBound { scale, dim: f.dim() })
}

/// The `order`-th smallest (1-based) of a family of weighted absolute sums.
///
/// This is the noiseless multiple-connection requirement: a terminal only
/// needs its target met at its `order` cheapest receivers. `labels[r]` is the
/// receiver index behind row `r`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderStatistic {
    rows: Vec<WeightedAbsSum>,
    labels: Vec<usize>,
    order: usize,
}

impl OrderStatistic {
    pub fn new(rows: Vec<WeightedAbsSum>, labels: Vec<usize>, order: usize) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::Dimension { expected: rows.len(), got: labels.len() });
        }
        if order == 0 || order > rows.len() {
            return Err(Error::invalid(format!("order statistic {order} out of range 1..={}", rows.len())));
        }
        let m = rows[0].dim();
        if let Some(bad) = rows.iter().find(|w| w.dim() != m) {
            return Err(Error::Dimension { expected: m, got: bad.dim() });
        }
        Ok(OrderStatistic { rows, labels, order })
    }

    pub fn rows(&self) -> &[WeightedAbsSum] {
        &self.rows
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Value and the receiver label that supplies it.
    pub fn eval_with_label(&self, x: &[f64]) -> Result<(f64, usize)> {
        self.check_dim(x)?;
        let vals: Vec<f64> = self.rows.iter().map(|w| w.eval_unchecked(x)).collect();
        let r = kth_smallest_index(&vals, self.order);
        Ok((vals[r], self.labels[r]))
    }
}

impl VectorFn for OrderStatistic {
    fn dim(&self) -> usize {
        self.rows[0].dim()
    }

    fn eval(&self, x: &[f64]) -> Result<f64> {
        Ok(self.eval_with_label(x)?.0)
    }
}

/// Every function an [`crate::types::AdjustmentRule`] can carry.
#[derive(Debug, Clone, PartialEq)]
pub enum RuleFn {
    WeightedAbsSum(WeightedAbsSum),
    Holder(HolderNorm),
    NormOfNorms(NormOfNorms),
    Domination(DominationBound),
    OrderStatistic(OrderStatistic),
}

impl RuleFn {
    /// Receiver attaining the value at `x`, when the rule has that notion.
    pub fn binding_receiver(&self, x: &[f64]) -> Result<Option<usize>> {
        match self {
            RuleFn::NormOfNorms(n) => n.binding_inner(x),
            RuleFn::OrderStatistic(o) => Ok(Some(o.eval_with_label(x)?.1)),
            _ => Ok(None),
        }
    }
}

impl VectorFn for RuleFn {
    fn dim(&self) -> usize {
        match self {
            RuleFn::WeightedAbsSum(w) => w.dim(),
            RuleFn::Holder(h) => h.dim(),
            RuleFn::NormOfNorms(n) => n.dim(),
            RuleFn::Domination(d) => d.dim(),
            RuleFn::OrderStatistic(o) => o.dim(),
        }
    }

    fn eval(&self, x: &[f64]) -> Result<f64> {
        match self {
            RuleFn::WeightedAbsSum(w) => w.eval(x),
            RuleFn::Holder(h) => h.eval(x),
            RuleFn::NormOfNorms(n) => n.eval(x),
            RuleFn::Domination(d) => d.eval(x),
            RuleFn::OrderStatistic(o) => o.eval(x),
        }
    }
}

fn fmt_weights(f: &mut fmt::Formatter<'_>, w: &[f64]) -> fmt::Result {
    f.write_str("(")?;
    for (i, a) in w.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{a}")?;
    }
    f.write_str(")")
}

impl fmt::Display for RuleFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleFn::WeightedAbsSum(w) => {
                f.write_str("sum|a.x| a=")?;
                fmt_weights(f, w.weights())
            }
            RuleFn::Holder(h) => write!(f, "||x||_{}", h.p),
            RuleFn::NormOfNorms(n) => {
                write!(f, "||[")?;
                for (k, w) in n.inner().iter().enumerate() {
                    if k > 0 {
                        f.write_str("; ")?;
                    }
                    fmt_weights(f, w.weights())?;
                }
                write!(f, "]||_{}", n.outer())
            }
            RuleFn::Domination(d) => write!(f, "{} * ||x||_inf", d.scale),
            RuleFn::OrderStatistic(o) => write!(f, "min(.; {}) over {} receivers", o.order(), o.rows().len()),
        }
    }
}

impl From<WeightedAbsSum> for RuleFn {
    fn from(w: WeightedAbsSum) -> Self {
        RuleFn::WeightedAbsSum(w)
    }
}

impl From<NormOfNorms> for RuleFn {
    fn from(n: NormOfNorms) -> Self {
        RuleFn::NormOfNorms(n)
    }
}

impl From<DominationBound> for RuleFn {
    fn from(d: DominationBound) -> Self {
        RuleFn::Domination(d)
    }
}

impl From<HolderNorm> for RuleFn {
    fn from(h: HolderNorm) -> Self {
        RuleFn::Holder(h)
    }
}

impl From<OrderStatistic> for RuleFn {
    fn from(o: OrderStatistic) -> Self {
        RuleFn::OrderStatistic(o)
    }
}

/// First index of the maximum.
pub(crate) fn argmax(v: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, x) in v.iter().enumerate() {
        match best {
            Some((_, b)) if *x <= b => {}
            _ => best = Some((i, *x)),
        }
    }
    best.map(|(i, _)| i)
}

/// Index of the `k`-th smallest value (1-based `k`); duplicates count
/// separately, ties resolved by position.
pub(crate) fn kth_smallest_index(v: &[f64], k: usize) -> usize {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]).then(a.cmp(&b)));
    idx[k - 1]
}

/// `k`-th largest value (1-based `k`).
pub fn kth_largest(v: &[f64], k: usize) -> Option<f64> {
    if k == 0 || k > v.len() {
        return None;
    }
    let mut s = v.to_vec();
    s.sort_by(|a, b| b.total_cmp(a));
    Some(s[k - 1])
}

/// `k`-th smallest value (1-based `k`).
pub fn kth_smallest(v: &[f64], k: usize) -> Option<f64> {
    if k == 0 || k > v.len() {
        return None;
    }
    Some(v[kth_smallest_index(v, k)])
}
