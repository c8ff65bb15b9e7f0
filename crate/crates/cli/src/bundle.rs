//! Serializable report bundle.
//!
//! Field order here is the key order of the JSON output. Tensor indices are
//! 0-based positions in `metadata.basis.labels`.

use dissipalg::{ContractionReport, LimitClass, LimitTensor, OperatorMatrix, StructureTensor};
use serde::{Deserialize, Serialize};

use crate::config::{Cx, ModelSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub metadata: Metadata,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub evolution: Vec<EvolutionTable>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub structure_tables: Vec<StructureTable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contraction: Option<ContractionDump>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleDump>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub model: ModelSpec,
    pub basis: BasisDump,
    /// `γ_max`; times are multiples of its inverse.
    pub rate_scale: f64,
    pub times: Vec<f64>,
    pub times_abs: Vec<f64>,
    pub tolerances: ToleranceDump,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisDump {
    pub kind: String,
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToleranceDump {
    pub spec_rel: f64,
    pub coeff_rel: f64,
    /// Flags that replaced a default.
    pub overrides: Vec<String>,
}

/// Coordinates of `Λ♯ₜ[A_j]` for every basis element `A_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionTable {
    pub t: f64,
    pub t_abs: f64,
    pub columns: Vec<Column>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub label: String,
    pub coords: Vec<Cx>,
}

/// Dense `T_ij^k(t)` in row-major `(i, j, k)` order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureTable {
    pub kind: String,
    pub t: f64,
    pub t_abs: f64,
    /// `solve` (LU against `Λ♯ₜ`) or `spectral`.
    pub method: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<f64>,
    pub size: usize,
    pub coeffs: Vec<Cx>,
}

impl StructureTable {
    pub fn get(&self, i: usize, j: usize, k: usize) -> Cx {
        self.coeffs[(i * self.size + j) * self.size + k]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionDump {
    pub spec_tol: f64,
    pub coeff_tol: f64,
    pub eigenvalues: Vec<Cx>,
    pub survivors: Vec<Survivor>,
    /// Coordinates of `Λ♯∞[A_j]`.
    pub asymptotic_map: Vec<Column>,
    pub diagnostics: Diagnostics,
    pub alpha_inf: LimitTable,
    pub c_inf: LimitTable,
    pub s_inf: LimitTable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Survivor {
    pub label: String,
    pub matrix: Vec<Vec<Cx>>,
}

impl Survivor {
    /// True when the survivor is a multiple of the identity.
    pub fn is_identity_multiple(&self) -> bool {
        let d0 = self.matrix[0][0];
        self.matrix.iter().enumerate().all(|(r, row)| {
            row.iter().enumerate().all(|(c, z)| {
                let want = if r == c { d0 } else { Cx(0.0, 0.0) };
                (z.0 - want.0).abs() <= 1e-12 && (z.1 - want.1).abs() <= 1e-12
            })
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Full asymptotic bracket `c(∞)` vanishes.
    pub is_abelian: bool,
    /// Asymptotic brackets among survivors vanish.
    pub survivors_abelian: bool,
    pub center_dim: usize,
    /// `None` when not finite.
    pub associativity_residual: Option<f64>,
    pub abelian_subalgebra_witness: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitTable {
    pub kind: String,
    pub size: usize,
    pub entries: Vec<LimitEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitEntry {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub class: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<Cx>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent: Option<Cx>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequencies: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleDump {
    pub model: String,
    pub deviations: Vec<Deviation>,
    pub max_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deviation {
    pub label: String,
    pub max_deviation: f64,
}

pub fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

pub fn matrix_rows(m: &OperatorMatrix) -> Vec<Vec<Cx>> {
    (0..m.dim()).map(|r| (0..m.dim()).map(|c| m.get(r, c).into()).collect()).collect()
}

impl StructureTable {
    pub fn from_tensor(tensor: &StructureTensor, t: f64, t_abs: f64, method: &str, condition: Option<f64>) -> Self {
        Self {
            kind: tensor.kind.name().to_string(),
            t,
            t_abs,
            method: method.to_string(),
            condition: condition.and_then(finite),
            size: tensor.size(),
            coeffs: tensor.coeffs().iter().map(|&z| z.into()).collect(),
        }
    }
}

impl LimitTable {
    pub fn from_tensor(tensor: &LimitTensor) -> Self {
        let n = tensor.size();
        let mut entries = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    entries.push(LimitEntry::new(i, j, k, tensor.class(i, j, k)));
                }
            }
        }
        Self {
            kind: tensor.values.kind.name().to_string(),
            size: n,
            entries,
        }
    }

    pub fn entry(&self, i: usize, j: usize, k: usize) -> &LimitEntry {
        &self.entries[(i * self.size + j) * self.size + k]
    }
}

impl LimitEntry {
    fn new(i: usize, j: usize, k: usize, class: &LimitClass) -> Self {
        let mut e = Self {
            i,
            j,
            k,
            class: class.name().to_string(),
            value: class.value().map(Cx::from),
            exponent: None,
            frequencies: None,
            power: None,
        };
        match class {
            LimitClass::DivergesExponentially(z) => e.exponent = Some((*z).into()),
            LimitClass::Oscillates(f) => e.frequencies = Some(f.clone()),
            LimitClass::PolynomialGrowth(p) => e.power = Some(*p),
            _ => {}
        }
        e
    }
}

impl ContractionDump {
    pub fn new(report: &ContractionReport, eigenvalues: &[dissipalg::C64]) -> dissipalg::Result<Self> {
        let basis = &report.basis;
        let asymptotic_map = basis
            .elements()
            .iter()
            .zip(basis.labels())
            .map(|(a, label)| {
                let image = report.asymptotic_map.apply(a)?;
                Ok(Column {
                    label: label.clone(),
                    coords: basis.expand(&image)?.into_iter().map(Cx::from).collect(),
                })
            })
            .collect::<dissipalg::Result<Vec<_>>>()?;
        let d = &report.diagnostics;
        Ok(Self {
            spec_tol: report.tolerances.spec,
            coeff_tol: report.tolerances.coeff,
            eigenvalues: eigenvalues.iter().map(|&z| z.into()).collect(),
            survivors: report
                .survivors
                .elements()
                .iter()
                .zip(report.survivors.labels())
                .map(|(m, label)| Survivor {
                    label: label.clone(),
                    matrix: matrix_rows(m),
                })
                .collect(),
            asymptotic_map,
            diagnostics: Diagnostics {
                is_abelian: d.is_abelian,
                survivors_abelian: d.survivors_abelian,
                center_dim: d.center_dim,
                associativity_residual: finite(d.associativity_residual),
                abelian_subalgebra_witness: d.abelian_subalgebra_witness.clone(),
            },
            alpha_inf: LimitTable::from_tensor(&report.alpha_inf),
            c_inf: LimitTable::from_tensor(&report.c_inf),
            s_inf: LimitTable::from_tensor(&report.s_inf),
        })
    }
}
