#![allow(dead_code)]

use powcap::scenarios::{FixedAssignment, MacroDiversity, Model, MultiConnection, SingleCell};
use powcap::{GainMatrix, NoiseVector, QosVector};
use rand::Rng;

pub fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

pub fn gains<R: Rng>(rng: &mut R, n: usize, k: usize, zero_prob: f64) -> GainMatrix {
    loop {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                (0..k)
                    .map(|_| if rng.random::<f64>() < zero_prob { 0.0 } else { rng.random_range(0.05..5.0) })
                    .collect()
            })
            .collect();
        if let Ok(g) = GainMatrix::new(rows) {
            return g;
        }
    }
}

fn raw_alphas<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(0.05..1.0)).collect()
}

/// Rescales targets so the given per-terminal moduli (linear in the
/// targets) peak at `lambda`.
fn scale_to(alphas: &[f64], moduli_max: f64, lambda: f64) -> QosVector {
    QosVector::new(alphas.iter().map(|a| a * lambda / moduli_max).collect()).unwrap()
}

fn max_modulus(m: &Model) -> f64 {
    m.feasibility_formula().lambda
}

pub fn single_cell<R: Rng>(rng: &mut R, n: usize, lambda: f64) -> SingleCell {
    let a = raw_alphas(rng, n);
    let h: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..3.0)).collect();
    let sigma = rng.random_range(0.1..1.0);
    let probe = SingleCell::new(QosVector::new(a.clone()).unwrap(), h.clone(), sigma).unwrap();
    let lam = max_modulus(&Model::SingleCellReceived(probe));
    SingleCell::new(scale_to(&a, lam, lambda), h, sigma).unwrap()
}

pub fn macro_diversity<R: Rng>(rng: &mut R, n: usize, k: usize, lambda: f64) -> MacroDiversity {
    let g = gains(rng, n, k, 0.0);
    let a = raw_alphas(rng, n);
    let noise = NoiseVector::new((0..k).map(|_| rng.random_range(0.1..1.0)).collect()).unwrap();
    let probe = MacroDiversity::new(QosVector::new(a.clone()).unwrap(), g.clone(), noise.clone()).unwrap();
    let lam = max_modulus(&Model::MacroDiversityTransformed(probe));
    MacroDiversity::new(scale_to(&a, lam, lambda), g, noise).unwrap()
}

/// Scaled so the original-coordinate condition peaks at `lambda`.
pub fn macro_diversity_original<R: Rng>(rng: &mut R, n: usize, k: usize, lambda: f64) -> MacroDiversity {
    match rescaled(Model::MacroDiversity(macro_diversity(rng, n, k, 0.5)), lambda) {
        Model::MacroDiversity(m) => m,
        _ => unreachable!(),
    }
}

pub fn fixed_assignment<R: Rng>(rng: &mut R, n: usize, k: usize, lambda: f64) -> FixedAssignment {
    let g = gains(rng, n, k, 0.0);
    let assignment: Vec<usize> =
        (0..n).map(|j| (0..k).max_by(|&x, &y| g.gain(j, x).total_cmp(&g.gain(j, y))).unwrap()).collect();
    let a = raw_alphas(rng, n);
    let noise = NoiseVector::new((0..k).map(|_| rng.random_range(0.1..1.0)).collect()).unwrap();
    let probe =
        FixedAssignment::new(QosVector::new(a.clone()).unwrap(), g.clone(), assignment.clone(), noise.clone()).unwrap();
    let lam = max_modulus(&Model::FixedAssignment(probe));
    FixedAssignment::new(scale_to(&a, lam, lambda), g, assignment, noise).unwrap()
}

/// Random multiple-connection scenario; some gains are zero and each `d_j`
/// fits the receivers terminal `j` actually reaches.
pub fn multi_connection<R: Rng>(rng: &mut R, n: usize, k: usize, lambda: f64) -> MultiConnection {
    let g = gains(rng, n, k, 0.2);
    let d: Vec<usize> = (0..n)
        .map(|j| {
            let heard = g.row(j).iter().filter(|h| **h > 0.0).count();
            rng.random_range(1..=heard)
        })
        .collect();
    let a = raw_alphas(rng, n);
    let noise = NoiseVector::new((0..k).map(|_| rng.random_range(0.1..1.0)).collect()).unwrap();
    let probe = MultiConnection::new(QosVector::new(a.clone()).unwrap(), g.clone(), d.clone(), noise.clone()).unwrap();
    let lam = max_modulus(&Model::McBounded(probe));
    MultiConnection::new(scale_to(&a, lam, lambda), g, d, noise).unwrap()
}

/// Same scenario with its targets scaled so the model's own condition
/// peaks at `lambda`.
pub fn rescaled(model: Model, lambda: f64) -> Model {
    let lam = max_modulus(&model);
    if lam == 0.0 {
        return model;
    }
    let q = scale_to(model.alphas().as_slice(), lam, lambda);
    match model {
        Model::SingleCellReceived(s) => Model::SingleCellReceived(SingleCell { alphas: q, ..s }),
        Model::SingleCellTransformed(s) => Model::SingleCellTransformed(SingleCell { alphas: q, ..s }),
        Model::SingleCellTransmit(s) => Model::SingleCellTransmit(SingleCell { alphas: q, ..s }),
        Model::MacroDiversity(m) => Model::MacroDiversity(MacroDiversity { alphas: q, ..m }),
        Model::MacroDiversityTransformed(m) => Model::MacroDiversityTransformed(MacroDiversity { alphas: q, ..m }),
        Model::FixedAssignment(f) => Model::FixedAssignment(FixedAssignment { alphas: q, ..f }),
        Model::McExact(m) => Model::McExact(MultiConnection { alphas: q, ..m }),
        Model::McBounded(m) => Model::McBounded(MultiConnection { alphas: q, ..m }),
    }
}

/// Every scenario family at a random size, scaled to `lambda`.
pub fn any_model<R: Rng>(rng: &mut R, lambda: f64) -> Model {
    let n = rng.random_range(2..=5);
    let k = rng.random_range(1..=4);
    let m = match rng.random_range(0..8) {
        0 => Model::SingleCellReceived(single_cell(rng, n, 0.5)),
        1 => Model::SingleCellTransformed(single_cell(rng, n, 0.5)),
        2 => Model::SingleCellTransmit(single_cell(rng, n, 0.5)),
        3 => Model::MacroDiversity(macro_diversity(rng, n, k, 0.5)),
        4 => Model::MacroDiversityTransformed(macro_diversity(rng, n, k, 0.5)),
        5 => Model::FixedAssignment(fixed_assignment(rng, n, k, 0.5)),
        6 => Model::McExact(multi_connection(rng, n, k, 0.5)),
        _ => Model::McBounded(multi_connection(rng, n, k, 0.5)),
    };
    rescaled(m, lambda)
}

/// `A` and `c` of `p = A p + c`, written directly from the scenario
/// parameters.
pub fn single_cell_affine(sc: &SingleCell) -> (Vec<Vec<f64>>, Vec<f64>) {
    let a = sc.alphas.as_slice();
    let n = a.len();
    let m = (0..n).map(|i| (0..n).map(|j| if i == j { 0.0 } else { a[i] }).collect()).collect();
    (m, a.iter().map(|x| x * sc.sigma).collect())
}

pub fn fixed_assignment_affine(fa: &FixedAssignment) -> (Vec<Vec<f64>>, Vec<f64>) {
    let gm = fa.alphas.as_slice();
    let n = gm.len();
    let mut m = vec![vec![0.0; n]; n];
    let mut c = vec![0.0; n];
    for j in 0..n {
        let r = fa.assignment[j];
        let own = fa.gains.gain(j, r);
        for i in 0..n {
            if i != j {
                m[j][i] = gm[j] * fa.gains.gain(i, r) / own;
            }
        }
        c[j] = gm[j] * fa.noise.as_slice()[r] / own;
    }
    (m, c)
}
