//! TOML scenario files.
//!
//! ```toml
//! kind = "macro_diversity"        # single_cell | macro_diversity | fixed_assignment | multi_connection
//! coordinates = "transformed"     # optional, see `Coordinates`
//! n = 3
//! k = 2
//! alphas = [0.99, 0.99, 0.99]
//! gains = [[1.0, 1.0], [1.0, 1.0], [1.0, 1.0]]   # one row per terminal
//! sigma = 1.0                     # scalar, or one value per receiver
//!
//! [solver]
//! tolerance = 1e-10
//! max_iter = 100000
//! initial = [0.0, 0.0, 0.0]
//! ```
//!
//! Receiver indices in `assignment` are 1-based. Multiple-connection files
//! add `d = [...]` and `mode = "bounded" | "exact"`; exact mode drops the
//! noise and therefore requires `noiseless = true`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::capacity::Predicate;
use crate::engine::SolveConfig;
use crate::error::{Error, Result};
use crate::scenarios::{FixedAssignment, MacroDiversity, Model, MultiConnection, SingleCell};
use crate::types::{GainMatrix, NoiseVector, PowerVector, QosVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    SingleCell,
    MacroDiversity,
    FixedAssignment,
    MultiConnection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coordinates {
    /// Single cell: received powers.
    Received,
    /// Single cell: transmit powers with per-terminal gains.
    Transmit,
    /// Macro-diversity: transmit powers, bounded rule as stated.
    Original,
    /// Both single cell and macro-diversity: normalised powers.
    Transformed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum McMode {
    Bounded,
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Gains {
    PerTerminal(Vec<f64>),
    Matrix(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Sigma {
    Scalar(f64),
    PerReceiver(Vec<f64>),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coordinates: Option<Coordinates>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<McMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noiseless: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub alphas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gains: Option<Gains>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Sigma>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assignment: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverSection>,
}

fn cfg_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| cfg_err(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => cfg_err(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| cfg_err(e.to_string()))
    }

    fn qos(&self) -> Result<QosVector> {
        if let Some(n) = self.n {
            if n != self.alphas.len() {
                return Err(cfg_err(format!("n = {n} but alphas has {} entries", self.alphas.len())));
            }
        }
        QosVector::new(self.alphas.clone()).map_err(|e| cfg_err(format!("alphas: {e}")))
    }

    fn matrix(&self, n: usize) -> Result<GainMatrix> {
        let rows = match &self.gains {
            Some(Gains::Matrix(rows)) => rows.clone(),
            Some(Gains::PerTerminal(_)) => {
                return Err(cfg_err("gains must be a matrix with one row per terminal"));
            }
            None => return Err(cfg_err("gains missing")),
        };
        if rows.len() != n {
            return Err(cfg_err(format!("gains has {} rows for {n} terminals", rows.len())));
        }
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != rows[0].len()) {
            return Err(cfg_err(format!("gains row {} has {} entries, row 1 has {}", i + 1, r.len(), rows[0].len())));
        }
        if let Some(k) = self.k {
            if rows[0].len() != k {
                return Err(cfg_err(format!("k = {k} but gains rows have {} entries", rows[0].len())));
            }
        }
        GainMatrix::new(rows).map_err(|e| cfg_err(format!("gains: {e}")))
    }

    fn noise(&self, k: usize) -> Result<NoiseVector> {
        let v = match &self.sigma {
            Some(Sigma::Scalar(s)) => vec![*s; k],
            Some(Sigma::PerReceiver(v)) => {
                if v.len() != k {
                    return Err(cfg_err(format!("sigma has {} entries for {k} receivers", v.len())));
                }
                v.clone()
            }
            None => return Err(cfg_err("sigma missing")),
        };
        NoiseVector::new(v).map_err(|e| cfg_err(format!("sigma: {e}")))
    }

    fn reject(&self, field: &str, present: bool) -> Result<()> {
        if present {
            return Err(cfg_err(format!("field `{field}` does not apply to {:?}", self.kind)));
        }
        Ok(())
    }

    /// Validates the file and turns it into a scenario model.
    pub fn to_model(&self) -> Result<Model> {
        let alphas = self.qos()?;
        let n = alphas.len();
        if self.kind != ScenarioKind::MultiConnection {
            self.reject("mode", self.mode.is_some())?;
            self.reject("noiseless", self.noiseless.is_some())?;
            self.reject("d", self.d.is_some())?;
        }
        if self.kind != ScenarioKind::FixedAssignment {
            self.reject("assignment", self.assignment.is_some())?;
        }
        match self.kind {
            ScenarioKind::SingleCell => {
                if let Some(k) = self.k {
                    if k != 1 {
                        return Err(cfg_err(format!("single cell has one receiver, k = {k}")));
                    }
                }
                let sigma = match &self.sigma {
                    Some(Sigma::Scalar(s)) => *s,
                    Some(Sigma::PerReceiver(v)) if v.len() == 1 => v[0],
                    Some(Sigma::PerReceiver(v)) => {
                        return Err(cfg_err(format!("single cell takes one sigma, got {}", v.len())));
                    }
                    None => return Err(cfg_err("sigma missing")),
                };
                let gains = match &self.gains {
                    None => vec![1.0; n],
                    Some(Gains::PerTerminal(g)) => g.clone(),
                    Some(Gains::Matrix(rows)) if rows.iter().all(|r| r.len() == 1) => {
                        rows.iter().map(|r| r[0]).collect()
                    }
                    Some(Gains::Matrix(_)) => return Err(cfg_err("single-cell gains must be one value per terminal")),
                };
                let sc = SingleCell::new(alphas, gains, sigma).map_err(|e| cfg_err(e.to_string()))?;
                Ok(match self.coordinates.unwrap_or(Coordinates::Transformed) {
                    Coordinates::Received => Model::SingleCellReceived(sc),
                    Coordinates::Transformed => Model::SingleCellTransformed(sc),
                    Coordinates::Transmit => Model::SingleCellTransmit(sc),
                    Coordinates::Original => {
                        return Err(cfg_err("single cell coordinates are received, transmit or transformed"))
                    }
                })
            }
            ScenarioKind::MacroDiversity => {
                let g = self.matrix(n)?;
                let noise = self.noise(g.receivers())?;
                let md = MacroDiversity::new(alphas, g, noise).map_err(|e| cfg_err(e.to_string()))?;
                Ok(match self.coordinates.unwrap_or(Coordinates::Transformed) {
                    Coordinates::Original => Model::MacroDiversity(md),
                    Coordinates::Transformed => Model::MacroDiversityTransformed(md),
                    other => {
                        return Err(cfg_err(format!(
                            "macro-diversity coordinates are original or transformed, got {other:?}"
                        )))
                    }
                })
            }
            ScenarioKind::FixedAssignment => {
                self.reject("coordinates", self.coordinates.is_some())?;
                let g = self.matrix(n)?;
                let noise = self.noise(g.receivers())?;
                let assignment = self
                    .assignment
                    .as_ref()
                    .ok_or_else(|| cfg_err("assignment missing"))?
                    .iter()
                    .enumerate()
                    .map(|(j, &a)| {
                        a.checked_sub(1).ok_or_else(|| {
                            cfg_err(format!("assignment of terminal {} is 0; receivers are 1-based", j + 1))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let fa = FixedAssignment::new(alphas, g, assignment, noise).map_err(|e| cfg_err(e.to_string()))?;
                Ok(Model::FixedAssignment(fa))
            }
            ScenarioKind::MultiConnection => {
                self.reject("coordinates", self.coordinates.is_some())?;
                let g = self.matrix(n)?;
                let d = self.d.clone().ok_or_else(|| cfg_err("d missing"))?;
                let mode = self.mode.unwrap_or(McMode::Bounded);
                let noiseless = self.noiseless.unwrap_or(false);
                match mode {
                    McMode::Exact if !noiseless => {
                        return Err(cfg_err("exact mode drops the noise terms; set noiseless = true to confirm"))
                    }
                    McMode::Bounded if noiseless => {
                        return Err(cfg_err("noiseless = true only applies to mode = \"exact\""))
                    }
                    _ => {}
                }
                let noise = match (&self.sigma, mode) {
                    (None, McMode::Exact) => NoiseVector::new(vec![0.0; g.receivers()])?,
                    _ => self.noise(g.receivers())?,
                };
                let mc = MultiConnection::new(alphas, g, d, noise).map_err(|e| cfg_err(e.to_string()))?;
                Ok(match mode {
                    McMode::Exact => Model::McExact(mc),
                    McMode::Bounded => Model::McBounded(mc),
                })
            }
        }
    }

    /// Solver settings from the `[solver]` table, defaults elsewhere.
    pub fn solve_config(&self) -> Result<SolveConfig> {
        let mut cfg = SolveConfig::default();
        if let Some(s) = &self.solver {
            if let Some(t) = s.tolerance {
                cfg.tolerance = t;
            }
            if let Some(m) = s.max_iter {
                cfg.max_iter = m;
            }
            if let Some(p) = &s.initial {
                if p.len() != self.alphas.len() {
                    return Err(cfg_err(format!(
                        "solver.initial has {} entries for {} terminals",
                        p.len(),
                        self.alphas.len()
                    )));
                }
                cfg.initial = Some(PowerVector::new(p.clone()).map_err(|e| cfg_err(format!("solver.initial: {e}")))?);
            }
        }
        cfg.validate().map_err(|e| cfg_err(format!("solver: {e}")))?;
        Ok(cfg)
    }
}

/// Region predicate matching a model's feasibility condition.
pub fn region_predicate(model: &Model) -> Predicate {
    match model {
        Model::SingleCellReceived(_) => Predicate::SingleCellReceived,
        Model::SingleCellTransformed(_) => Predicate::Simple,
        Model::SingleCellTransmit(s) => Predicate::FixedAssignment {
            gains: GainMatrix::new(s.gains.iter().map(|h| vec![*h]).collect()).expect("validated gains"),
            assignment: vec![0; s.len()],
        },
        Model::MacroDiversity(m) => Predicate::MacroDivOriginal { gains: m.gains.clone() },
        Model::MacroDiversityTransformed(m) => Predicate::MacroDiv { gains: m.gains.clone() },
        Model::FixedAssignment(f) => {
            Predicate::FixedAssignment { gains: f.gains.clone(), assignment: f.assignment.clone() }
        }
        Model::McExact(m) => Predicate::McExact { gains: m.gains.clone(), d: m.d.clone() },
        Model::McBounded(m) => Predicate::McBounded { gains: m.gains.clone(), d: m.d.clone() },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SYMMETRIC: &str = r#"
kind = "macro_diversity"
n = 3
k = 2
alphas = [0.99, 0.99, 0.99]
gains = [[1.0, 1.0], [1.0, 1.0], [1.0, 1.0]]
sigma = 1.0
"#;

    #[test]
    fn loads_symmetric() {
        let c = ScenarioConfig::from_toml(SYMMETRIC).unwrap();
        let m = c.to_model().unwrap();
        assert!(matches!(m, Model::MacroDiversityTransformed(_)));
        let r = m.feasibility_formula();
        assert!((r.lambda - 0.99).abs() < 1e-15);
    }

    #[test]
    fn round_trip() {
        let configs = [
            SYMMETRIC.to_string(),
            "kind = \"single_cell\"\ncoordinates = \"received\"\nalphas = [0.3, 0.4]\nsigma = 1.0\n[solver]\ntolerance = 1e-12\ninitial = [1.0, 2.0]\n".into(),
            "kind = \"fixed_assignment\"\nalphas = [0.3, 0.4]\ngains = [[1.0, 0.1], [0.2, 1.0]]\nassignment = [1, 2]\nsigma = [1.0, 0.5]\n".into(),
            "kind = \"multi_connection\"\nmode = \"exact\"\nnoiseless = true\nalphas = [0.1, 0.2]\ngains = [[1.0, 0.5], [0.2, 1.0]]\nd = [2, 1]\n".into(),
        ];
        for text in configs {
            let c = ScenarioConfig::from_toml(&text).unwrap();
            let again = ScenarioConfig::from_toml(&c.to_toml().unwrap()).unwrap();
            assert_eq!(c, again);
            assert_eq!(c.to_model().unwrap(), again.to_model().unwrap());
            assert_eq!(c.solve_config().unwrap(), again.solve_config().unwrap());
        }
    }

    #[test]
    fn malformed_row_reports_line() {
        let bad = SYMMETRIC.replace("[1.0, 1.0], [1.0, 1.0]]", "[1.0, 1.0], [1.0, oops]]");
        let e = ScenarioConfig::from_toml(&bad).unwrap_err().to_string();
        assert!(e.contains("line 6"), "{e}");
        let ragged = SYMMETRIC.replace("[1.0, 1.0], [1.0, 1.0]]", "[1.0, 1.0], [1.0]]");
        let e = ScenarioConfig::from_toml(&ragged).unwrap().to_model().unwrap_err().to_string();
        assert!(e.contains("row 3"), "{e}");
    }

    #[test]
    fn dimension_cross_checks() {
        let c = ScenarioConfig::from_toml(&SYMMETRIC.replace("n = 3", "n = 4")).unwrap();
        assert!(c.to_model().is_err());
        let c = ScenarioConfig::from_toml(&SYMMETRIC.replace("k = 2", "k = 3")).unwrap();
        assert!(c.to_model().is_err());
        let c = ScenarioConfig::from_toml(&SYMMETRIC.replace("sigma = 1.0", "sigma = [1.0, 2.0, 3.0]")).unwrap();
        assert!(c.to_model().is_err());
        assert!(ScenarioConfig::from_toml(&format!("{SYMMETRIC}\nbogus = 1\n")).is_err());
        let c = ScenarioConfig::from_toml(&format!("{SYMMETRIC}\nassignment = [1, 1, 1]\n")).unwrap();
        assert!(c.to_model().is_err());
    }

    #[test]
    fn exact_mode_needs_explicit_noiseless() {
        let text = "kind = \"multi_connection\"\nmode = \"exact\"\nalphas = [0.1, 0.2]\ngains = [[1.0, 0.5], [0.2, 1.0]]\nd = [2, 1]\nsigma = 1.0\n";
        let e = ScenarioConfig::from_toml(text).unwrap().to_model().unwrap_err().to_string();
        assert!(e.contains("noiseless"), "{e}");
    }

    #[test]
    fn assignment_is_one_based() {
        let text = "kind = \"fixed_assignment\"\nalphas = [0.3, 0.4]\ngains = [[1.0, 0.1], [0.2, 1.0]]\nassignment = [0, 2]\nsigma = 1.0\n";
        assert!(ScenarioConfig::from_toml(text).unwrap().to_model().is_err());
        let ok = text.replace("[0, 2]", "[1, 2]");
        let Model::FixedAssignment(fa) = ScenarioConfig::from_toml(&ok).unwrap().to_model().unwrap() else { panic!() };
        assert_eq!(fa.assignment, vec![0, 1]);
    }

    #[test]
    fn transmit_region_predicate_matches_model() {
        let text = "kind = \"single_cell\"\ncoordinates = \"transmit\"\nalphas = [0.3, 0.4]\ngains = [2.0, 0.5]\nsigma = 1.0\n";
        let m = ScenarioConfig::from_toml(text).unwrap().to_model().unwrap();
        let p = region_predicate(&m);
        let got: Vec<f64> = p.moduli(&[0.3, 0.4]).unwrap().iter().map(|x| x.0).collect();
        assert_eq!(got, m.feasibility_formula().per_terminal_modulus);
    }
}
