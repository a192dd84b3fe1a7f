//! Problem-file parsing and report serialization.
//!
//! Problem files are JSON objects. Complex scalars are two-element
//! `[re, im]` arrays, matrices are row-major nested arrays of those, and the
//! token `"trace"` in a state position stands for the normalized trace
//! (density `I/dim`). Exactly one of `T`, `vector`, `subspace`, `classical`
//! carries the problem payload, depending on the subcommand.

use coupcap::classical::ClassicalInstance;
use coupcap::linalg::{Complex64, ComplexMatrix, HermitianOperator, Subspace};
use coupcap::model::MeasuredAlgebra;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub phi: Option<StateSpec>,
    pub psi: Option<StateSpec>,
    #[serde(rename = "T")]
    pub t: Option<Vec<Vec<[f64; 2]>>>,
    pub vector: Option<Vec<[f64; 2]>>,
    pub subspace: Option<Vec<Vec<[f64; 2]>>>,
    pub classical: Option<ClassicalSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum StateSpec {
    Token(String),
    Matrix(Vec<Vec<[f64; 2]>>),
}

#[derive(Debug, Deserialize)]
pub struct ClassicalSpec {
    pub mu: Vec<f64>,
    pub nu: Vec<f64>,
    pub cost: Vec<Vec<f64>>,
}

/// A problem-file or dimension error, reported with exit code 2.
#[derive(Debug)]
pub struct ValidationError(pub String);

impl std::fmt::Display for ValidationError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<coupcap::Error> for ValidationError {
    fn from(e: coupcap::Error) -> Self {
        ValidationError(e.to_string())
    }
}

pub fn complex_matrix(rows: &[Vec<[f64; 2]>]) -> Result<ComplexMatrix, ValidationError> {
    let r = rows.len();
    if r == 0 {
        return Err(ValidationError("empty matrix".into()));
    }
    let c = rows[0].len();
    let mut entries = Vec::with_capacity(r * c);
    for row in rows {
        if row.len() != c {
            return Err(ValidationError("ragged matrix rows".into()));
        }
        for &[re, im] in row {
            entries.push(Complex64::new(re, im));
        }
    }
    ComplexMatrix::new(r, c, entries).map_err(Into::into)
}

pub fn complex_vector(entries: &[[f64; 2]]) -> Vec<Complex64> {
    entries
        .iter()
        .map(|&[re, im]| Complex64::new(re, im))
        .collect()
}

pub fn matrix_json(m: &ComplexMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.rows())
        .map(|i| {
            (0..m.cols())
                .map(|j| [m.get(i, j).re, m.get(i, j).im])
                .collect()
        })
        .collect()
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self, ValidationError> {
        serde_json::from_str(text).map_err(|e| {
            ValidationError(format!(
                "problem file parse error at line {}, column {}: {e}",
                e.line(),
                e.column()
            ))
        })
    }

    pub fn dims(&self) -> Result<(usize, usize), ValidationError> {
        match (self.n, self.m) {
            (Some(n), Some(m)) if n >= 1 && m >= 1 => Ok((n, m)),
            _ => Err(ValidationError(
                "problem file must carry positive dimensions n and m".into(),
            )),
        }
    }

    fn state(
        &self,
        spec: &Option<StateSpec>,
        dim: usize,
        name: &str,
    ) -> Result<MeasuredAlgebra, ValidationError> {
        match spec {
            None => Ok(MeasuredAlgebra::uniform(dim)),
            Some(StateSpec::Token(tok)) if tok == "trace" => Ok(MeasuredAlgebra::uniform(dim)),
            Some(StateSpec::Token(tok)) => Err(ValidationError(format!(
                "unknown state token {tok:?} for {name} (expected \"trace\" or a density matrix)"
            ))),
            Some(StateSpec::Matrix(rows)) => {
                let m = complex_matrix(rows)?;
                if m.rows() != dim {
                    return Err(ValidationError(format!(
                        "{name} has dimension {} but the declared dimension is {dim}",
                        m.rows()
                    )));
                }
                MeasuredAlgebra::new(HermitianOperator::new(m)?).map_err(Into::into)
            }
        }
    }

    pub fn states(&self) -> Result<(MeasuredAlgebra, MeasuredAlgebra), ValidationError> {
        let (n, m) = self.dims()?;
        Ok((
            self.state(&self.phi, n, "phi")?,
            self.state(&self.psi, m, "psi")?,
        ))
    }

    /// The operator input: an explicit `T`, or the rank-one projection of
    /// `vector`.
    pub fn operator(&self) -> Result<HermitianOperator, ValidationError> {
        let (n, m) = self.dims()?;
        if let Some(rows) = &self.t {
            let mat = complex_matrix(rows)?;
            if mat.rows() != n * m {
                return Err(ValidationError(format!(
                    "T has dimension {} but n*m = {}",
                    mat.rows(),
                    n * m
                )));
            }
            return HermitianOperator::new(mat).map_err(Into::into);
        }
        if let Some(v) = &self.vector {
            let xi = complex_vector(v);
            if xi.len() != n * m {
                return Err(ValidationError(format!(
                    "vector has length {} but n*m = {}",
                    xi.len(),
                    n * m
                )));
            }
            let norm = coupcap::linalg::vec_norm(&xi);
            if (norm - 1.0).abs() > 1e-10 {
                return Err(ValidationError(format!(
                    "vector must be normalized (norm {norm})"
                )));
            }
            return Ok(HermitianOperator::outer(&xi));
        }
        Err(ValidationError(
            "problem file needs either \"T\" or \"vector\"".into(),
        ))
    }

    pub fn unit_vector(&self) -> Result<Vec<Complex64>, ValidationError> {
        let (n, m) = self.dims()?;
        let v = self
            .vector
            .as_ref()
            .ok_or_else(|| ValidationError("problem file needs \"vector\"".into()))?;
        let xi = complex_vector(v);
        if xi.len() != n * m {
            return Err(ValidationError(format!(
                "vector has length {} but n*m = {}",
                xi.len(),
                n * m
            )));
        }
        Ok(xi)
    }

    pub fn subspace(&self) -> Result<Subspace, ValidationError> {
        let (n, m) = self.dims()?;
        let vectors = self
            .subspace
            .as_ref()
            .ok_or_else(|| ValidationError("problem file needs \"subspace\"".into()))?;
        let cols: Vec<Vec<Complex64>> = vectors.iter().map(|v| complex_vector(v)).collect();
        Subspace::span(n * m, &cols).map_err(Into::into)
    }

    pub fn classical_instance(&self) -> Result<ClassicalInstance, ValidationError> {
        let spec = self
            .classical
            .as_ref()
            .ok_or_else(|| ValidationError("problem file needs \"classical\"".into()))?;
        let (n, m) = (spec.mu.len(), spec.nu.len());
        if spec.cost.len() != n || spec.cost.iter().any(|row| row.len() != m) {
            return Err(ValidationError(format!(
                "classical cost must be {n} x {m} to match mu and nu"
            )));
        }
        let cost: Vec<f64> = spec.cost.iter().flatten().copied().collect();
        ClassicalInstance::new(spec.mu.clone(), spec.nu.clone(), cost).map_err(Into::into)
    }
}

/// Machine-readable result of one command invocation. Serialization is
/// lossless: floats print in shortest round-trip form.
#[derive(Debug, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub input: String,
    pub n: usize,
    pub m: usize,
    /// Named scalar results in deterministic order.
    pub values: BTreeMap<String, f64>,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
    pub iterations: usize,
    pub residuals: Residuals,
    pub seed: u64,
    pub tolerances: Tolerances,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schmidt_coefficients: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plan: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cover: Option<CoverJson>,
    pub wall_time_ms: f64,
}

#[derive(Debug, Serialize, Deserialize, Default)]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Tolerances {
    pub residual_tol: f64,
    pub max_iterations: usize,
    pub restarts: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CertificateJson {
    pub a: Vec<Vec<[f64; 2]>>,
    pub b: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CoverJson {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

impl Report {
    pub fn new(command: &str, input: &str, n: usize, m: usize) -> Self {
        Self {
            command: command.to_string(),
            input: input.to_string(),
            n,
            m,
            values: BTreeMap::new(),
            status: "ok".to_string(),
            method: None,
            verdict: None,
            iterations: 0,
            residuals: Residuals::default(),
            seed: 0,
            tolerances: Tolerances {
                residual_tol: 0.0,
                max_iterations: 0,
                restarts: 0,
            },
            witness: None,
            certificate: None,
            schmidt_coefficients: None,
            plan: None,
            cover: None,
            wall_time_ms: 0.0,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }
}
