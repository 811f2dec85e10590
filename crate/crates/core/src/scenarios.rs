//! Physical scenarios and the adjustment systems they induce.
//!
//! Each scenario can be built in more than one coordinate system. The
//! transformed coordinates rescale each terminal's power so that the QoS
//! targets move from the row weights into the column weights, which gives a
//! less conservative modulus. The `*_moduli` functions evaluate each
//! feasibility condition in closed form, straight from the scenario
//! parameters, without going through the rule objects; they accept zero
//! targets so region sampling can include the coordinate planes.

use serde::Serialize;

use crate::engine::System;
use crate::error::{Error, Result};
use crate::rules::{
    dominate, kth_largest, kth_smallest_index, HolderExponent, NormOfNorms, OrderStatistic, RuleFn, WeightedAbsSum,
};
use crate::types::{AdjustmentRule, FeasibilityReport, GainMatrix, NoiseVector, QosVector};

/// Isolated cell: one receiver, terminal gains `h_i`, scalar noise.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingleCell {
    pub alphas: QosVector,
    pub gains: Vec<f64>,
    pub sigma: f64,
}

impl SingleCell {
    pub fn new(alphas: QosVector, gains: Vec<f64>, sigma: f64) -> Result<Self> {
        if gains.len() != alphas.len() {
            return Err(Error::invalid(format!("{} gains for {} terminals", gains.len(), alphas.len())));
        }
        if let Some((i, h)) = gains.iter().enumerate().find(|(_, h)| !(h.is_finite() && **h > 0.0)) {
            return Err(Error::invalid(format!("gain h_{} = {h} must be positive", i + 1)));
        }
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::invalid(format!("noise {sigma} must be finite and non-negative")));
        }
        Ok(SingleCell { alphas, gains, sigma })
    }

    pub fn unit_gains(alphas: QosVector, sigma: f64) -> Result<Self> {
        let n = alphas.len();
        SingleCell::new(alphas, vec![1.0; n], sigma)
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    /// Received powers to transformed coordinates: `q_i = P_i / alpha_i`.
    pub fn to_transformed(&self, received: &[f64]) -> Vec<f64> {
        received.iter().zip(self.alphas.as_slice()).map(|(p, a)| p / a).collect()
    }
}

/// Every terminal jointly decoded by all `K` receivers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MacroDiversity {
    pub alphas: QosVector,
    pub gains: GainMatrix,
    pub noise: NoiseVector,
}

impl MacroDiversity {
    pub fn new(alphas: QosVector, gains: GainMatrix, noise: NoiseVector) -> Result<Self> {
        check_shape(&alphas, &gains, &noise)?;
        Ok(MacroDiversity { alphas, gains, noise })
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    /// `q_i = h_i P_i / alpha_i`.
    pub fn to_transformed(&self, p: &[f64]) -> Vec<f64> {
        p.iter().enumerate().map(|(i, v)| self.gains.row_sum(i) * v / self.alphas.as_slice()[i]).collect()
    }
}

/// Each terminal decoded only at its assigned receiver.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedAssignment {
    pub alphas: QosVector,
    pub gains: GainMatrix,
    /// Receiver index (0-based) per terminal.
    pub assignment: Vec<usize>,
    pub noise: NoiseVector,
}

impl FixedAssignment {
    pub fn new(alphas: QosVector, gains: GainMatrix, assignment: Vec<usize>, noise: NoiseVector) -> Result<Self> {
        check_shape(&alphas, &gains, &noise)?;
        if assignment.len() != alphas.len() {
            return Err(Error::invalid(format!("{} assignments for {} terminals", assignment.len(), alphas.len())));
        }
        for (j, &a) in assignment.iter().enumerate() {
            if a >= gains.receivers() {
                return Err(Error::invalid(format!(
                    "terminal {} assigned to receiver {} of {}",
                    j + 1,
                    a + 1,
                    gains.receivers()
                )));
            }
            if gains.gain(j, a) <= 0.0 {
                return Err(Error::invalid(format!(
                    "terminal {} has zero gain to its assigned receiver {}",
                    j + 1,
                    a + 1
                )));
            }
        }
        Ok(FixedAssignment { alphas, gains, assignment, noise })
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }
}

/// Terminal `j` must meet its target at its `d_j` best receivers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiConnection {
    pub alphas: QosVector,
    pub gains: GainMatrix,
    /// Diversity order per terminal, `1 <= d_j <= K`.
    pub d: Vec<usize>,
    pub noise: NoiseVector,
}

impl MultiConnection {
    pub fn new(alphas: QosVector, gains: GainMatrix, d: Vec<usize>, noise: NoiseVector) -> Result<Self> {
        check_shape(&alphas, &gains, &noise)?;
        check_diversity(&gains, &d)?;
        Ok(MultiConnection { alphas, gains, d, noise })
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    /// `h_j`: the `d_j`-th largest gain of terminal `j`.
    pub fn effective_gain(&self, j: usize) -> f64 {
        mc_effective_gain(&self.gains, &self.d, j)
    }

    /// Transmit powers to bounded-mode coordinates: `q_j = p_j h_j / gamma_j`.
    pub fn to_bounded(&self, p: &[f64]) -> Vec<f64> {
        p.iter().enumerate().map(|(j, v)| v * self.effective_gain(j) / self.alphas.as_slice()[j]).collect()
    }
}

fn check_shape(alphas: &QosVector, gains: &GainMatrix, noise: &NoiseVector) -> Result<()> {
    if gains.terminals() != alphas.len() {
        return Err(Error::invalid(format!(
            "gain matrix has {} rows for {} terminals",
            gains.terminals(),
            alphas.len()
        )));
    }
    if noise.len() != gains.receivers() {
        return Err(Error::invalid(format!("{} noise values for {} receivers", noise.len(), gains.receivers())));
    }
    Ok(())
}

fn check_diversity(gains: &GainMatrix, d: &[usize]) -> Result<()> {
    if d.len() != gains.terminals() {
        return Err(Error::invalid(format!("{} diversity orders for {} terminals", d.len(), gains.terminals())));
    }
    let k = gains.receivers();
    for (j, &dj) in d.iter().enumerate() {
        if dj == 0 || dj > k {
            return Err(Error::invalid(format!("d_{} = {dj} outside 1..={k}", j + 1)));
        }
        let heard = gains.row(j).iter().filter(|h| **h > 0.0).count();
        if heard < dj {
            return Err(Error::invalid(format!("terminal {} reaches {heard} receivers but needs d = {dj}", j + 1)));
        }
    }
    Ok(())
}

fn mc_effective_gain(gains: &GainMatrix, d: &[usize], j: usize) -> f64 {
    kth_largest(gains.row(j), d[j]).expect("diversity order validated")
}

fn others(n: usize, i: usize) -> impl Iterator<Item = usize> {
    (0..n).filter(move |&m| m != i)
}

fn was(weights: Vec<f64>) -> Result<WeightedAbsSum> {
    WeightedAbsSum::new(weights)
}

fn system(rules: impl IntoIterator<Item = Result<AdjustmentRule>>) -> Result<System> {
    System::new(rules.into_iter().collect::<Result<Vec<_>>>()?)
}

/// Received-power coordinates: `P_i = alpha_i (sum_{n != i} P_n + sigma)`.
pub fn build_single_cell_received(sc: &SingleCell) -> Result<System> {
    let a = sc.alphas.as_slice();
    let n = a.len();
    system((0..n).map(|i| {
        let f = was(vec![a[i]; n - 1])?;
        AdjustmentRule::new(i, f.into(), sc.sigma * a[i])
    }))
}

/// `q_i = P_i / alpha_i`: `q_i = sum_{n != i} alpha_n q_n + sigma`.
pub fn build_single_cell_transformed(sc: &SingleCell) -> Result<System> {
    let a = sc.alphas.as_slice();
    let n = a.len();
    system((0..n).map(|i| {
        let f = was(others(n, i).map(|m| a[m]).collect())?;
        AdjustmentRule::new(i, f.into(), sc.sigma)
    }))
}

/// Transmit-power coordinates: `p_i = sum_{n != i} (alpha_i h_n / h_i) p_n + sigma alpha_i / h_i`.
pub fn build_single_cell_transmit(sc: &SingleCell) -> Result<System> {
    let a = sc.alphas.as_slice();
    let h = &sc.gains;
    let n = a.len();
    system((0..n).map(|i| {
        let f = was(others(n, i).map(|m| a[i] * h[m] / h[i]).collect())?;
        AdjustmentRule::new(i, f.into(), sc.sigma * a[i] / h[i])
    }))
}

/// Bounded macro-diversity adjustment in transmit-power coordinates:
/// `P_i = (alpha_i / h_i)(max_k Y_{i,k} + max_k sigma_k^2)`.
pub fn build_macro_diversity(md: &MacroDiversity) -> Result<System> {
    let a = md.alphas.as_slice();
    let g = &md.gains;
    let (n, k) = (a.len(), g.receivers());
    let sigma_hat = md.noise.max();
    system((0..n).map(|i| {
        let scale = a[i] / g.row_sum(i);
        let inner =
            (0..k).map(|kk| was(others(n, i).map(|m| scale * g.gain(m, kk)).collect())).collect::<Result<Vec<_>>>()?;
        let f = NormOfNorms::new(inner, HolderExponent::Infinity)?;
        AdjustmentRule::new(i, f.into(), scale * sigma_hat)
    }))
}

/// `q_i = h_i P_i / alpha_i`: `q_i = max_k sum_{n != i} alpha_n g_{n,k} q_n + max_k sigma_k^2`.
pub fn build_macro_diversity_transformed(md: &MacroDiversity) -> Result<System> {
    build_macro_diversity_transformed_with(md, HolderExponent::Infinity)
}

/// As [`build_macro_diversity_transformed`] with a different outer norm.
/// Only the infinity norm corresponds to the physical adjustment; other
/// exponents give a more conservative rule.
pub fn build_macro_diversity_transformed_with(md: &MacroDiversity, outer: HolderExponent) -> Result<System> {
    let a = md.alphas.as_slice();
    let g = &md.gains;
    let (n, k) = (a.len(), g.receivers());
    let sigma_hat = md.noise.max();
    system((0..n).map(|i| {
        let inner = (0..k)
            .map(|kk| was(others(n, i).map(|m| a[m] * g.relative(m, kk)).collect()))
            .collect::<Result<Vec<_>>>()?;
        let f = NormOfNorms::new(inner, outer)?;
        AdjustmentRule::new(i, f.into(), sigma_hat)
    }))
}

/// `p_j = (gamma_j / h_{a_j j}) sum_{i != j} h_{a_j i} p_i + gamma_j sigma_{a_j} / h_{a_j j}`.
pub fn build_fixed_assignment(fa: &FixedAssignment) -> Result<System> {
    let gm = fa.alphas.as_slice();
    let g = &fa.gains;
    let n = gm.len();
    system((0..n).map(|j| {
        let r = fa.assignment[j];
        let own = g.gain(j, r);
        let f = was(others(n, j).map(|i| gm[j] * g.gain(i, r) / own).collect())?;
        AdjustmentRule::new(j, f.into(), gm[j] * fa.noise.as_slice()[r] / own)
    }))
}

/// Right-hand side of the exact macro-diversity update
/// `P_i = alpha_i (sum_k h_{i,k} / (Y_{i,k} + sigma_k^2))^{-1}`.
///
/// Not certified as a contraction; kept to check that the bounded rule
/// over-estimates it.
pub fn macro_div_exact_update(md: &MacroDiversity, p: &[f64]) -> Result<Vec<f64>> {
    let n = md.len();
    if p.len() != n {
        return Err(Error::Dimension { expected: n, got: p.len() });
    }
    let g = &md.gains;
    let sigma = md.noise.as_slice();
    Ok((0..n)
        .map(|i| {
            let s: f64 = (0..g.receivers())
                .filter(|&k| g.gain(i, k) > 0.0)
                .map(|k| {
                    let y: f64 = others(n, i).map(|m| p[m] * g.gain(m, k)).sum();
                    g.gain(i, k) / (y + sigma[k])
                })
                .sum();
            md.alphas.as_slice()[i] / s
        })
        .collect())
}

/// Exact noiseless multiple-connection rules in `q_j = p_j / gamma_j`
/// coordinates: `f_j(q) = min_{d_j}(sum_{i != j} h_{k,i} gamma_i q_i / h_{k,j})`.
///
/// Receivers with `h_{k,j} = 0` would contribute `+inf` and are left out.
pub fn mc_exact_rules(mc: &MultiConnection) -> Result<Vec<OrderStatistic>> {
    mc_exact_rules_scaled(mc, |_| 1.0)
}

/// The exact rules expressed in the bounded-mode coordinates
/// `q_j = p_j h_j / gamma_j`, for pointwise comparison with the bounded rule.
pub fn mc_exact_rules_bounded_coords(mc: &MultiConnection) -> Result<Vec<OrderStatistic>> {
    let h: Vec<f64> = (0..mc.len()).map(|j| mc.effective_gain(j)).collect();
    // input q'_i = q_i / h_i, output scaled by h_j
    let rules = mc_exact_rules_scaled(mc, |j| h[j])?;
    let n = mc.len();
    rules
        .into_iter()
        .enumerate()
        .map(|(j, o)| {
            let rows = o
                .rows()
                .iter()
                .map(|w| was(w.weights().iter().zip(others(n, j)).map(|(a, i)| a / h[i]).collect()))
                .collect::<Result<Vec<_>>>()?;
            OrderStatistic::new(rows, o.labels().to_vec(), o.order())
        })
        .collect()
}

fn mc_exact_rules_scaled(mc: &MultiConnection, out_scale: impl Fn(usize) -> f64) -> Result<Vec<OrderStatistic>> {
    let gm = mc.alphas.as_slice();
    let g = &mc.gains;
    let (n, k) = (gm.len(), g.receivers());
    (0..n)
        .map(|j| {
            let s = out_scale(j);
            let mut rows = Vec::new();
            let mut labels = Vec::new();
            for kk in 0..k {
                let own = g.gain(j, kk);
                if own <= 0.0 {
                    continue;
                }
                rows.push(was(others(n, j).map(|i| s * g.gain(i, kk) * gm[i] / own).collect())?);
                labels.push(kk);
            }
            OrderStatistic::new(rows, labels, mc.d[j])
        })
        .collect()
}

/// Bounded multiple-connection rule: `q_j = max_k sum_{i != j} gamma_i g_{k,i} q_i + max_k sigma_k^2`
/// with `g_{k,i} = h_{k,i} / h_i` and `h_i` the `d_i`-th largest gain of `i`.
pub fn build_multi_connection_bounded(mc: &MultiConnection) -> Result<System> {
    let gm = mc.alphas.as_slice();
    let g = &mc.gains;
    let (n, k) = (gm.len(), g.receivers());
    let h: Vec<f64> = (0..n).map(|i| mc.effective_gain(i)).collect();
    let sigma_hat = mc.noise.max();
    system((0..n).map(|j| {
        let inner = (0..k)
            .map(|kk| was(others(n, j).map(|i| gm[i] * g.gain(i, kk) / h[i]).collect()))
            .collect::<Result<Vec<_>>>()?;
        let f = NormOfNorms::new(inner, HolderExponent::Infinity)?;
        AdjustmentRule::new(j, f.into(), sigma_hat)
    }))
}

/// Exact noiseless rules certified through their domination bounds
/// `phi_j(q) = ||q||_inf f_j(1)`. The offsets are zero: noise is dropped.
pub fn build_multi_connection_exact(mc: &MultiConnection) -> Result<System> {
    let rules = mc_exact_rules(mc)?;
    system(rules.iter().enumerate().map(|(j, o)| {
        let phi = dominate(o)?;
        AdjustmentRule::new(j, RuleFn::Domination(phi), 0.0)
    }))
}

/// `noiseless = true` selects the exact order-statistic rule (noise dropped,
/// certified by domination); `false` the bounded rule with noise.
pub fn build_multi_connection(mc: &MultiConnection, noiseless: bool) -> Result<System> {
    if noiseless {
        build_multi_connection_exact(mc)
    } else {
        build_multi_connection_bounded(mc)
    }
}

// ---------------------------------------------------------------------------
// Closed-form moduli. Zero targets allowed.

/// Per-terminal modulus and the receiver attaining it.
pub type Moduli = Vec<(f64, Option<usize>)>;

fn report(m: Moduli) -> FeasibilityReport {
    let (v, r) = m.into_iter().unzip();
    FeasibilityReport::from_moduli(v, r)
}

/// `alpha_i (N - 1)`: received-power coordinates.
pub fn single_cell_received_moduli(alphas: &[f64]) -> Moduli {
    let n = alphas.len();
    alphas.iter().map(|a| (a * (n as f64 - 1.0), None)).collect()
}

/// `sum_{n != i} alpha_n`.
pub fn simple_moduli(alphas: &[f64]) -> Moduli {
    (0..alphas.len()).map(|i| (others(alphas.len(), i).map(|m| alphas[m]).sum(), None)).collect()
}

/// `alpha_i sum_{n != i} h_n / h_i`.
pub fn single_cell_transmit_moduli(alphas: &[f64], gains: &[f64]) -> Moduli {
    (0..alphas.len())
        .map(|i| (alphas[i] * others(alphas.len(), i).map(|m| gains[m]).sum::<f64>() / gains[i], None))
        .collect()
}

/// `max_k alpha_i sum_{n != i} h_{n,k} / h_i` (original coordinates).
pub fn macro_div_original_moduli(alphas: &[f64], gains: &GainMatrix) -> Moduli {
    let n = alphas.len();
    (0..n)
        .map(|i| {
            max_over_receivers(gains.receivers(), |k| {
                alphas[i] * others(n, i).map(|m| gains.gain(m, k)).sum::<f64>() / gains.row_sum(i)
            })
        })
        .collect()
}

/// `max_k sum_{n != i} alpha_n g_{n,k}` (transformed coordinates).
pub fn macro_div_moduli(alphas: &[f64], gains: &GainMatrix) -> Moduli {
    let n = alphas.len();
    (0..n)
        .map(|i| {
            max_over_receivers(gains.receivers(), |k| others(n, i).map(|m| alphas[m] * gains.relative(m, k)).sum())
        })
        .collect()
}

/// `gamma_j sum_{i != j} h_{a_j,i} / h_{a_j,j}`.
pub fn fixed_assignment_moduli(alphas: &[f64], gains: &GainMatrix, assignment: &[usize]) -> Moduli {
    let n = alphas.len();
    (0..n)
        .map(|j| {
            let r = assignment[j];
            let s: f64 = others(n, j).map(|i| gains.gain(i, r)).sum();
            (alphas[j] * s / gains.gain(j, r), Some(r))
        })
        .collect()
}

/// `min_{d_j}(sum_{i != j} h_{k,i} gamma_i / h_{k,j})` over receivers that hear `j`.
pub fn mc_exact_moduli(alphas: &[f64], gains: &GainMatrix, d: &[usize]) -> Moduli {
    let n = alphas.len();
    (0..n)
        .map(|j| {
            let mut sums = Vec::new();
            let mut labels = Vec::new();
            for k in 0..gains.receivers() {
                let own = gains.gain(j, k);
                if own > 0.0 {
                    sums.push(others(n, j).map(|i| gains.gain(i, k) * alphas[i]).sum::<f64>() / own);
                    labels.push(k);
                }
            }
            let r = kth_smallest_index(&sums, d[j]);
            (sums[r], Some(labels[r]))
        })
        .collect()
}

/// `max_k sum_{i != j} gamma_i h_{k,i} / h_i` with `h_i` the `d_i`-th largest gain.
pub fn mc_bounded_moduli(alphas: &[f64], gains: &GainMatrix, d: &[usize]) -> Moduli {
    let n = alphas.len();
    let h: Vec<f64> = (0..n).map(|i| mc_effective_gain(gains, d, i)).collect();
    (0..n)
        .map(|j| {
            max_over_receivers(gains.receivers(), |k| others(n, j).map(|i| alphas[i] * gains.gain(i, k) / h[i]).sum())
        })
        .collect()
}

fn max_over_receivers(k: usize, f: impl Fn(usize) -> f64) -> (f64, Option<usize>) {
    let mut best = (f64::NEG_INFINITY, None);
    for kk in 0..k {
        let v = f(kk);
        if v > best.0 {
            best = (v, Some(kk));
        }
    }
    best
}

/// Baseline macro-diversity test `sum_n alpha_n < K`, independent of gains.
pub fn hanly(alphas: &[f64], receivers: usize) -> bool {
    alphas.iter().sum::<f64>() < receivers as f64
}

/// A scenario together with the coordinate system it is analysed in.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum Model {
    SingleCellReceived(SingleCell),
    SingleCellTransformed(SingleCell),
    SingleCellTransmit(SingleCell),
    MacroDiversity(MacroDiversity),
    MacroDiversityTransformed(MacroDiversity),
    FixedAssignment(FixedAssignment),
    McExact(MultiConnection),
    McBounded(MultiConnection),
}

impl Model {
    pub fn build(&self) -> Result<System> {
        match self {
            Model::SingleCellReceived(s) => build_single_cell_received(s),
            Model::SingleCellTransformed(s) => build_single_cell_transformed(s),
            Model::SingleCellTransmit(s) => build_single_cell_transmit(s),
            Model::MacroDiversity(m) => build_macro_diversity(m),
            Model::MacroDiversityTransformed(m) => build_macro_diversity_transformed(m),
            Model::FixedAssignment(f) => build_fixed_assignment(f),
            Model::McExact(m) => build_multi_connection_exact(m),
            Model::McBounded(m) => build_multi_connection_bounded(m),
        }
    }

    pub fn alphas(&self) -> &QosVector {
        match self {
            Model::SingleCellReceived(s) | Model::SingleCellTransformed(s) | Model::SingleCellTransmit(s) => &s.alphas,
            Model::MacroDiversity(m) | Model::MacroDiversityTransformed(m) => &m.alphas,
            Model::FixedAssignment(f) => &f.alphas,
            Model::McExact(m) | Model::McBounded(m) => &m.alphas,
        }
    }

    /// Number of receivers (1 for a single cell).
    pub fn receivers(&self) -> usize {
        match self {
            Model::SingleCellReceived(_) | Model::SingleCellTransformed(_) | Model::SingleCellTransmit(_) => 1,
            Model::MacroDiversity(m) | Model::MacroDiversityTransformed(m) => m.gains.receivers(),
            Model::FixedAssignment(f) => f.gains.receivers(),
            Model::McExact(m) | Model::McBounded(m) => m.gains.receivers(),
        }
    }

    /// What the coordinates of a solved power vector mean.
    pub fn coordinates(&self) -> &'static str {
        match self {
            Model::SingleCellReceived(_) => "received power P_i",
            Model::SingleCellTransformed(_) => "q_i = P_i / alpha_i",
            Model::SingleCellTransmit(_) | Model::FixedAssignment(_) | Model::MacroDiversity(_) => "transmit power p_i",
            Model::MacroDiversityTransformed(_) => "q_i = h_i P_i / alpha_i",
            Model::McExact(_) => "q_j = p_j / gamma_j",
            Model::McBounded(_) => "q_j = p_j h_j / gamma_j",
        }
    }

    /// Closed-form evaluation of the model's feasibility condition.
    pub fn feasibility_formula(&self) -> FeasibilityReport {
        let a = self.alphas().as_slice();
        report(match self {
            Model::SingleCellReceived(_) => single_cell_received_moduli(a),
            Model::SingleCellTransformed(_) => simple_moduli(a),
            Model::SingleCellTransmit(s) => single_cell_transmit_moduli(a, &s.gains),
            Model::MacroDiversity(m) => macro_div_original_moduli(a, &m.gains),
            Model::MacroDiversityTransformed(m) => macro_div_moduli(a, &m.gains),
            Model::FixedAssignment(f) => fixed_assignment_moduli(a, &f.gains, &f.assignment),
            Model::McExact(m) => mc_exact_moduli(a, &m.gains, &m.d),
            Model::McBounded(m) => mc_bounded_moduli(a, &m.gains, &m.d),
        })
    }
}

pub fn feasibility_formula(model: &Model) -> FeasibilityReport {
    model.feasibility_formula()
}

/// Both multiple-connection verdicts side by side; neither dominates the
/// other in general.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McComparison {
    pub exact: FeasibilityReport,
    pub bounded: FeasibilityReport,
}

impl McComparison {
    pub fn new(mc: &MultiConnection) -> Self {
        let a = mc.alphas.as_slice();
        McComparison {
            exact: report(mc_exact_moduli(a, &mc.gains, &mc.d)),
            bounded: report(mc_bounded_moduli(a, &mc.gains, &mc.d)),
        }
    }

    pub fn agree(&self) -> bool {
        self.exact.feasible == self.bounded.feasible
    }
}
