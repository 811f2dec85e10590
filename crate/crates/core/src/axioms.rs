//! Randomized checker for the quasi-semi-normal axioms.
//!
//! Each check draws seeded samples (deterministic corner cases first, then
//! uniform draws on `[-10, 10]^dim`), evaluates both sides of one inequality
//! and reports the first violation beyond a relative tolerance. A failing
//! verdict always carries a [`Counterexample`] that can be re-evaluated with
//! [`Counterexample::recheck`].

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rules::VectorFn;
use crate::types::sup_norm_or_zero;

pub const DEFAULT_SAMPLES: usize = 2000;
const SAMPLE_RANGE: f64 = 10.0;
const HUGE: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Axiom {
    NonNegativity,
    SubHomogeneityAtOne,
    SubAdditivity,
    MaxMonotonicity,
    ReverseTriangle,
    ExtendedSubHomogeneity,
}

impl Axiom {
    pub const ALL: [Axiom; 6] = [
        Axiom::NonNegativity,
        Axiom::SubHomogeneityAtOne,
        Axiom::SubAdditivity,
        Axiom::MaxMonotonicity,
        Axiom::ReverseTriangle,
        Axiom::ExtendedSubHomogeneity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Axiom::NonNegativity => "non-negativity",
            Axiom::SubHomogeneityAtOne => "sub-homogeneity at 1",
            Axiom::SubAdditivity => "sub-additivity",
            Axiom::MaxMonotonicity => "max-monotonicity",
            Axiom::ReverseTriangle => "reverse triangle",
            Axiom::ExtendedSubHomogeneity => "extended sub-homogeneity",
        }
    }

    /// The inequality being tested, in `lhs <= rhs` form.
    pub fn statement(self) -> &'static str {
        match self {
            Axiom::NonNegativity => "0 <= f(x)",
            Axiom::SubHomogeneityAtOne => "f(l*1) <= l*f(1), l in (0,1)",
            Axiom::SubAdditivity => "f(x+y) <= f(x)+f(y)",
            Axiom::MaxMonotonicity => "f(x) <= f(||x||_inf*1)",
            Axiom::ReverseTriangle => "|f(x)-f(y)| <= f(x-y)",
            Axiom::ExtendedSubHomogeneity => "f(r*1) <= r*f(1), r > 1",
        }
    }

    fn salt(self) -> u64 {
        match self {
            Axiom::NonNegativity => 0x9e37_79b9_7f4a_7c15,
            Axiom::SubHomogeneityAtOne => 0xbf58_476d_1ce4_e5b9,
            Axiom::SubAdditivity => 0x94d0_49bb_1331_11eb,
            Axiom::MaxMonotonicity => 0x2545_f491_4f6c_dd1d,
            Axiom::ReverseTriangle => 0xd6e8_feb8_6659_fd93,
            Axiom::ExtendedSubHomogeneity => 0xa076_1d64_78bd_642f,
        }
    }

    /// The four defining properties; the other two are consequences.
    pub fn is_defining(self) -> bool {
        matches!(
            self,
            Axiom::NonNegativity | Axiom::SubHomogeneityAtOne | Axiom::SubAdditivity | Axiom::MaxMonotonicity
        )
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckConfig {
    pub samples: usize,
    pub seed: u64,
}

impl CheckConfig {
    pub fn new(samples: usize, seed: u64) -> Result<Self> {
        if samples == 0 {
            return Err(Error::invalid("samples must be >= 1"));
        }
        Ok(CheckConfig { samples, seed })
    }

    pub fn with_seed(seed: u64) -> Self {
        CheckConfig { samples: DEFAULT_SAMPLES, seed }
    }
}

/// `1e-12 * (1 + |lhs| + |rhs|)`.
pub fn tolerance(lhs: f64, rhs: f64) -> f64 {
    1e-12 * (1.0 + lhs.abs() + rhs.abs())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub axiom: Axiom,
    /// Vector arguments (`x`, or `x` and `y`); empty for the ray axioms.
    pub inputs: Vec<Vec<f64>>,
    /// `lambda` or `r` for the ray axioms.
    pub scalar: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs - rhs`, strictly larger than the tolerance.
    pub margin: f64,
    pub seed: u64,
    pub sample_index: usize,
}

impl Counterexample {
    /// Re-evaluates the inequality; true if it is still violated.
    pub fn recheck(&self, f: &dyn VectorFn) -> Result<bool> {
        let (lhs, rhs) = sides(self.axiom, f, &self.inputs, self.scalar)?;
        Ok(lhs > rhs + tolerance(lhs, rhs))
    }
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = ["x", "y"];
        let mut first = true;
        for (name, v) in names.iter().zip(&self.inputs) {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            write!(f, "{name}={v:?}")?;
        }
        if let Some(s) = self.scalar {
            if !first {
                f.write_str(" ")?;
            }
            let name = if self.axiom == Axiom::SubHomogeneityAtOne { "lambda" } else { "r" };
            write!(f, "{name}={s}")?;
        }
        write!(f, ": {} > {} (margin {:e}, seed {})", self.lhs, self.rhs, self.margin, self.seed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub axiom: Axiom,
    pub passed: bool,
    pub samples_checked: usize,
    pub counterexample: Option<Counterexample>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomReport {
    pub dim: usize,
    pub seed: u64,
    pub verdicts: Vec<Verdict>,
}

impl AxiomReport {
    pub fn all_passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    /// Passes the four defining properties.
    pub fn is_quasi_semi_normal(&self) -> bool {
        self.verdicts.iter().filter(|v| v.axiom.is_defining()).all(|v| v.passed)
    }

    pub fn verdict(&self, axiom: Axiom) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.axiom == axiom)
    }
}

impl fmt::Display for AxiomReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<26} {:<28} {:<6} witness", "axiom", "inequality", "result")?;
        for v in &self.verdicts {
            let witness = v.counterexample.as_ref().map(|c| c.to_string()).unwrap_or_default();
            writeln!(
                f,
                "{:<26} {:<28} {:<6} {}",
                v.axiom.name(),
                v.axiom.statement(),
                if v.passed { "PASS" } else { "FAIL" },
                witness
            )?;
        }
        write!(f, "dim = {}, seed = {}", self.dim, self.seed)
    }
}

fn eval(f: &dyn VectorFn, x: &[f64]) -> Result<f64> {
    match f.eval(x) {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(v) => Err(Error::Evaluation { input: x.to_vec(), reason: format!("non-finite value {v}") }),
        Err(e) => Err(Error::Evaluation { input: x.to_vec(), reason: e.to_string() }),
    }
}

fn sides(axiom: Axiom, f: &dyn VectorFn, inputs: &[Vec<f64>], scalar: Option<f64>) -> Result<(f64, f64)> {
    let m = f.dim();
    let arg = |i: usize| -> Result<&Vec<f64>> {
        inputs.get(i).ok_or_else(|| Error::invalid(format!("{axiom} needs {} vector inputs", i + 1)))
    };
    let s = || scalar.ok_or_else(|| Error::invalid(format!("{axiom} needs a scalar")));
    Ok(match axiom {
        Axiom::NonNegativity => (0.0, eval(f, arg(0)?)?),
        Axiom::SubHomogeneityAtOne | Axiom::ExtendedSubHomogeneity => {
            let t = s()?;
            let ones = vec![1.0; m];
            let scaled = vec![t; m];
            (eval(f, &scaled)?, t * eval(f, &ones)?)
        }
        Axiom::SubAdditivity => {
            let (x, y) = (arg(0)?, arg(1)?);
            let sum: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
            (eval(f, &sum)?, eval(f, x)? + eval(f, y)?)
        }
        Axiom::MaxMonotonicity => {
            let x = arg(0)?;
            let flat = vec![sup_norm_or_zero(x); m];
            (eval(f, x)?, eval(f, &flat)?)
        }
        Axiom::ReverseTriangle => {
            let (x, y) = (arg(0)?, arg(1)?);
            let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
            ((eval(f, x)? - eval(f, y)?).abs(), eval(f, &diff)?)
        }
    })
}

/// Deterministic corner cases: all-ones first, then zeros, signed unit
/// vectors, an alternating-sign vector and a vector with one huge component.
fn corner_vectors(m: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![1.0; m], vec![0.0; m]];
    for sign in [1.0, -1.0] {
        for i in 0..m {
            let mut e = vec![0.0; m];
            e[i] = sign;
            out.push(e);
        }
    }
    if m >= 2 {
        out.push((0..m).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect());
    }
    if m >= 1 {
        let mut h = vec![1.0; m];
        h[0] = HUGE;
        out.push(h);
        let mut h = vec![0.0; m];
        h[m - 1] = -HUGE;
        out.push(h);
    }
    out
}

fn random_vector(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    (0..m).map(|_| rng.random_range(-SAMPLE_RANGE..=SAMPLE_RANGE)).collect()
}

enum Draw {
    One(Vec<f64>),
    Two(Vec<f64>, Vec<f64>),
    Scalar(f64),
}

fn draws(axiom: Axiom, m: usize, cfg: &CheckConfig) -> impl Iterator<Item = Draw> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ axiom.salt());
    let corners = corner_vectors(m);
    let n = cfg.samples;
    let mut fixed: Vec<Draw> = match axiom {
        Axiom::NonNegativity | Axiom::MaxMonotonicity => corners.iter().cloned().map(Draw::One).collect(),
        Axiom::SubAdditivity | Axiom::ReverseTriangle => {
            corners.iter().flat_map(|a| corners.iter().map(move |b| Draw::Two(a.clone(), b.clone()))).collect()
        }
        Axiom::SubHomogeneityAtOne => [0.5, 1e-9, 0.1, 0.9, 1.0 - 1e-9].into_iter().map(Draw::Scalar).collect(),
        Axiom::ExtendedSubHomogeneity => [2.0, 3.0, 7.3, 1.5, 1e6].into_iter().map(Draw::Scalar).collect(),
    };
    fixed.truncate(n);
    let remaining = n - fixed.len();
    let random = (0..remaining).map(move |_| match axiom {
        Axiom::NonNegativity | Axiom::MaxMonotonicity => Draw::One(random_vector(&mut rng, m)),
        Axiom::SubAdditivity | Axiom::ReverseTriangle => {
            let x = random_vector(&mut rng, m);
            Draw::Two(x, random_vector(&mut rng, m))
        }
        Axiom::SubHomogeneityAtOne => {
            let mut l = rng.random::<f64>();
            while l == 0.0 {
                l = rng.random::<f64>();
            }
            Draw::Scalar(l)
        }
        Axiom::ExtendedSubHomogeneity => Draw::Scalar(rng.random_range(1.0..100.0_f64).max(1.0 + f64::EPSILON)),
    });
    fixed.into_iter().chain(random)
}

/// Checks one axiom on `cfg.samples` draws.
pub fn check(axiom: Axiom, f: &dyn VectorFn, cfg: &CheckConfig) -> Result<Verdict> {
    if cfg.samples == 0 {
        return Err(Error::invalid("samples must be >= 1"));
    }
    let m = f.dim();
    let mut checked = 0;
    for (idx, d) in draws(axiom, m, cfg).enumerate() {
        let (inputs, scalar) = match d {
            Draw::One(x) => (vec![x], None),
            Draw::Two(x, y) => (vec![x, y], None),
            Draw::Scalar(s) => (Vec::new(), Some(s)),
        };
        let (lhs, rhs) = sides(axiom, f, &inputs, scalar)?;
        checked += 1;
        if lhs > rhs + tolerance(lhs, rhs) {
            return Ok(Verdict {
                axiom,
                passed: false,
                samples_checked: checked,
                counterexample: Some(Counterexample {
                    axiom,
                    inputs,
                    scalar,
                    lhs,
                    rhs,
                    margin: lhs - rhs,
                    seed: cfg.seed,
                    sample_index: idx,
                }),
            });
        }
    }
    Ok(Verdict { axiom, passed: true, samples_checked: checked, counterexample: None })
}

pub fn check_nonneg(f: &dyn VectorFn, cfg: &CheckConfig) -> Result<Verdict> {
    check(Axiom::NonNegativity, f, cfg)
}

pub fn check_subhom_at_one(f: &dyn VectorFn, cfg: &CheckConfig) -> Result<Verdict> {
    check(Axiom::SubHomogeneityAtOne, f, cfg)
}

pub fn check_subadd(f: &dyn VectorFn, cfg: &CheckConfig) -> Result<Verdict> {
    check(Axiom::SubAdditivity, f, cfg)
}

pub fn check_max_monotone(f: &dyn VectorFn, cfg: &CheckConfig) -> Result<Verdict> {
    check(Axiom::MaxMonotonicity, f, cfg)
}

pub fn check_reverse_triangle(f: &dyn VectorFn, cfg: &CheckConfig) -> Result<Verdict> {
    check(Axiom::ReverseTriangle, f, cfg)
}

pub fn check_extended_subhom(f: &dyn VectorFn, cfg: &CheckConfig) -> Result<Verdict> {
    check(Axiom::ExtendedSubHomogeneity, f, cfg)
}

/// Runs all six checks.
pub fn check_all(f: &dyn VectorFn, cfg: &CheckConfig) -> Result<AxiomReport> {
    let verdicts = Axiom::ALL.iter().map(|a| check(*a, f, cfg)).collect::<Result<Vec<_>>>()?;
    Ok(AxiomReport { dim: f.dim(), seed: cfg.seed, verdicts })
}

/// `g(x) = f(x_{-skip})` on `R^{dim(f)+1}`.
pub struct Lifted<F> {
    inner: F,
    skip: usize,
}

impl<F: VectorFn> Lifted<F> {
    pub fn new(inner: F, skip: usize) -> Result<Self> {
        if skip > inner.dim() {
            return Err(Error::Index { index: skip, len: inner.dim() + 1 });
        }
        Ok(Lifted { inner, skip })
    }
}

impl<F: VectorFn> VectorFn for Lifted<F> {
    fn dim(&self) -> usize {
        self.inner.dim() + 1
    }

    fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        let mut buf = Vec::with_capacity(x.len() - 1);
        crate::types::remove_component_into(x, self.skip, &mut buf);
        self.inner.eval(&buf)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::{squared_l1, FnRule, HolderExponent, HolderNorm, WeightedAbsSum};

    fn cfg() -> CheckConfig {
        CheckConfig::new(500, 7).unwrap()
    }

    #[test]
    fn nonneg_examples() {
        let l2 = HolderNorm::new(HolderExponent::Finite(2.0), 4);
        assert!(check_nonneg(&l2, &cfg()).unwrap().passed);

        let coord = FnRule::new("x1", 2, |x: &[f64]| x[0]);
        let v = check_nonneg(&coord, &cfg()).unwrap();
        assert!(!v.passed);
        assert_eq!(v.counterexample.unwrap().inputs, vec![vec![-1.0, 0.0]]);
    }

    #[test]
    fn subhom_at_one_examples() {
        for p in [HolderExponent::Finite(1.0), HolderExponent::Finite(2.5), HolderExponent::Infinity] {
            assert!(check_subhom_at_one(&HolderNorm::new(p, 3), &cfg()).unwrap().passed);
        }
        let shifted = FnRule::new("l1+1", 3, |x: &[f64]| x.iter().map(|v| v.abs()).sum::<f64>() + 1.0);
        assert!(!check_subhom_at_one(&shifted, &cfg()).unwrap().passed);
        assert!(check_subhom_at_one(&squared_l1(1), &cfg()).unwrap().passed);
    }

    #[test]
    fn subadd_examples() {
        assert!(check_subadd(&HolderNorm::new(HolderExponent::Finite(2.0), 3), &cfg()).unwrap().passed);
        let v = check_subadd(&squared_l1(1), &cfg()).unwrap();
        let c = v.counterexample.unwrap();
        assert_eq!(c.inputs, vec![vec![1.0], vec![1.0]]);
        assert_eq!((c.lhs, c.rhs), (4.0, 2.0));
    }

    #[test]
    fn max_monotone_examples() {
        assert!(check_max_monotone(&HolderNorm::new(HolderExponent::Finite(1.0), 3), &cfg()).unwrap().passed);
        let diff = FnRule::new("x1-x2", 2, |x: &[f64]| x[0] - x[1]);
        let v = check_max_monotone(&diff, &cfg()).unwrap();
        assert!(!v.passed);
        assert!(v.counterexample.unwrap().recheck(&diff).unwrap());
        // f(1,-1) = 2 > f(1,1) = 0, the textbook witness
        let (lhs, rhs) = sides(Axiom::MaxMonotonicity, &diff, &[vec![1.0, -1.0]], None).unwrap();
        assert_eq!((lhs, rhs), (2.0, 0.0));
        let w = WeightedAbsSum::new(vec![2.0 / 3.0, 1.0 / 3.0]).unwrap();
        assert!(check_max_monotone(&w, &cfg()).unwrap().passed);
    }

    #[test]
    fn reverse_triangle_examples() {
        let sup = HolderNorm::new(HolderExponent::Infinity, 2);
        let (lhs, rhs) = sides(Axiom::ReverseTriangle, &sup, &[vec![3.0, 0.0], vec![1.0, 0.0]], None).unwrap();
        assert_eq!((lhs, rhs), (2.0, 2.0));
        assert!(check_reverse_triangle(&HolderNorm::new(HolderExponent::Finite(2.0), 3), &cfg()).unwrap().passed);
        let (lhs, rhs) = sides(Axiom::ReverseTriangle, &squared_l1(1), &[vec![2.0], vec![1.0]], None).unwrap();
        assert_eq!((lhs, rhs), (3.0, 1.0));
        assert!(!check_reverse_triangle(&squared_l1(1), &cfg()).unwrap().passed);
    }

    #[test]
    fn extended_subhom_examples() {
        let l1 = HolderNorm::new(HolderExponent::Finite(1.0), 4);
        let (lhs, rhs) = sides(Axiom::ExtendedSubHomogeneity, &l1, &[], Some(7.3)).unwrap();
        assert!((lhs - rhs).abs() <= tolerance(lhs, rhs));
        assert!(check_extended_subhom(&l1, &cfg()).unwrap().passed);

        // sub-homogeneity on (0,1) and beyond 1 are distinct tests
        let shifted = FnRule::new("l1+1", 1, |x: &[f64]| x[0].abs() + 1.0);
        let (lhs, rhs) = sides(Axiom::ExtendedSubHomogeneity, &shifted, &[], Some(2.0)).unwrap();
        assert_eq!((lhs, rhs), (3.0, 4.0));
        assert!(check_extended_subhom(&shifted, &cfg()).unwrap().passed);
        assert!(!check_subhom_at_one(&shifted, &cfg()).unwrap().passed);
    }

    #[test]
    fn evaluation_errors_carry_input() {
        let bad = FnRule::new("nan", 2, |x: &[f64]| if x[0] < 0.0 { f64::NAN } else { 1.0 });
        match check_nonneg(&bad, &cfg()) {
            Err(Error::Evaluation { input, .. }) => assert!(input[0] < 0.0),
            other => panic!("expected evaluation error, got {other:?}"),
        }
        assert!(CheckConfig::new(0, 1).is_err());
    }

    #[test]
    fn same_seed_same_report() {
        let f = squared_l1(3);
        let a = check_all(&f, &cfg()).unwrap();
        let b = check_all(&f, &cfg()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn lifted_ignores_skipped_component() {
        let w = WeightedAbsSum::new(vec![1.0, 2.0]).unwrap();
        let g = Lifted::new(&w, 1).unwrap();
        assert_eq!(g.dim(), 3);
        assert_eq!(g.eval(&[1.0, 100.0, 1.0]).unwrap(), 3.0);
        assert!(check_all(&g, &cfg()).unwrap().all_passed());
    }
}
