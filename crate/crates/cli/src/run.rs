//! Command execution.

use dissipalg::{
    adjoint_generator, contract, oracle_check, propagator, spectral_decompose, structure_constants_t,
    symbolic_structure_constants, DeformedProduct, Error, SpectralData, StructureKind, Superoperator,
    SymbolicTensor, TolerancePolicy,
};
use serde_json::json;

use crate::bundle::{
    BasisDump, Column, ContractionDump, Deviation, EvolutionTable, Metadata, OracleDump, ReportBundle,
    StructureTable, ToleranceDump,
};
use crate::config::{check_times, parse_basis_name, ConfigCode, ConfigError, Cx, ModelSpec};

/// Default time grid in units of `1/γ_max`.
pub const DEFAULT_TIMES: [f64; 5] = [0.0, 0.5, 1.0, 2.0, 5.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Evolve,
    ProductTable,
    Contract,
    ZooRun,
    Report,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Evolve => "evolve",
            Command::ProductTable => "product-table",
            Command::Contract => "contract",
            Command::ZooRun => "zoo-run",
            Command::Report => "report",
        }
    }
}

/// Command-line overrides of config fields and tolerance defaults.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub times: Option<Vec<f64>>,
    pub basis: Option<String>,
    pub tol_spec: Option<f64>,
    pub tol_coeff: Option<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Analysis(#[from] Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl RunError {
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) | RunError::Io { .. } => 1,
            RunError::Analysis(_) => 2,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            RunError::Config(e) => e.code.as_str(),
            RunError::Io { .. } => "IoError",
            RunError::Analysis(e) => analysis_code(e),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut obj = json!({
            "code": self.code(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        });
        if let RunError::Config(e) = self {
            obj["key"] = json!(e.key);
            obj["line"] = json!(e.line);
        }
        json!({ "error": obj })
    }
}

fn analysis_code(e: &Error) -> &'static str {
    match e {
        Error::Dimension { .. } => "DimensionError",
        Error::Basis(_) => "BasisError",
        Error::NotInSpan { .. } => "NotInSpanError",
        Error::Model(_) => "ModelError",
        Error::Time(_) => "TimeError",
        Error::NonDiagonalizable { .. } => "NonDiagonalizableError",
        Error::StationaryState(_) => "StationaryStateError",
        Error::IllConditioned { .. } => "IllConditionedError",
        Error::SpectralSpan { .. } => "SpectralSpanError",
        Error::OscillatoryPeripheralSpectrum { .. } => "OscillatoryPeripheralSpectrumError",
        Error::NonConvergentEntry { .. } => "NonConvergentEntryError",
        Error::Projection(_) => "ProjectionError",
        Error::IncompleteProbeBasis { .. } => "IncompleteProbeBasisError",
        Error::Positivity { .. } => "PositivityError",
        Error::Truncation { .. } => "TruncationError",
        Error::Quadrature(_) => "QuadratureError",
        Error::Numerical(_) => "NumericalError",
    }
}

fn tolerance(value: Option<f64>, default: f64, flag: &str, overrides: &mut Vec<String>) -> Result<f64, ConfigError> {
    match value {
        None => Ok(default),
        Some(x) if x.is_finite() && x > 0.0 => {
            overrides.push(flag.to_string());
            Ok(x)
        }
        Some(x) => Err(ConfigError {
            code: ConfigCode::InvalidValue,
            message: format!("tolerance {x} must be positive and finite"),
            key: Some(flag.to_string()),
            line: None,
        }),
    }
}

/// Runs `command` on `spec`.
pub fn run(command: Command, spec: &ModelSpec, overrides: &Overrides) -> Result<ReportBundle, RunError> {
    let mut spec = spec.clone();
    if let Some(name) = &overrides.basis {
        spec.basis = Some(parse_basis_name(name)?);
    }
    if let Some(times) = &overrides.times {
        check_times(times, "--times")?;
        spec.times = Some(times.clone());
    }
    let instance = spec.instantiate()?;
    let defaults = TolerancePolicy::default();
    let mut flags = Vec::new();
    let spec_rel = tolerance(overrides.tol_spec, defaults.spec_rel, "--tol-spec", &mut flags)?;
    let coeff_rel = tolerance(overrides.tol_coeff, defaults.coeff_rel, "--tol-coeff", &mut flags)?;

    let gamma = ModelSpec::rate_scale(&instance.model);
    let policy = TolerancePolicy {
        spec_rel,
        coeff_rel,
        rate_scale: Some(gamma),
    };
    let times = spec.times.clone().unwrap_or_else(|| DEFAULT_TIMES.to_vec());
    let times_abs: Vec<f64> = times.iter().map(|t| t / gamma).collect();
    let basis = &instance.basis;

    let mut bundle = ReportBundle {
        metadata: Metadata {
            tool: "dissipalg".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.name().into(),
            basis: BasisDump {
                kind: spec.basis_kind().name().into(),
                labels: basis.labels().to_vec(),
            },
            model: spec,
            rate_scale: gamma,
            times: times.clone(),
            times_abs: times_abs.clone(),
            tolerances: ToleranceDump {
                spec_rel,
                coeff_rel,
                overrides: flags,
            },
        },
        evolution: Vec::new(),
        structure_tables: Vec::new(),
        contraction: None,
        oracle: None,
    };

    let ls = adjoint_generator(&instance.model)?;
    match command {
        Command::Evolve => {
            for (&t, &t_abs) in times.iter().zip(&times_abs) {
                let prop = propagator(&ls, t_abs)?;
                bundle.evolution.push(EvolutionTable {
                    t,
                    t_abs,
                    columns: columns(basis, &prop)?,
                });
            }
        }
        Command::ProductTable => {
            let mut spectral = Spectral::default();
            for (&t, &t_abs) in times.iter().zip(&times_abs) {
                for kind in [StructureKind::Product, StructureKind::Commutator, StructureKind::Anticommutator] {
                    let table = match DeformedProduct::new(&ls, t_abs) {
                        Ok(engine) => {
                            let tensor = structure_constants_t(basis, t_abs, &ls, kind)?;
                            StructureTable::from_tensor(&tensor, t, t_abs, "solve", Some(engine.condition()))
                        }
                        Err(Error::IllConditioned { .. }) => {
                            let tensor = spectral.tensor(basis, &ls, kind, &policy)?.eval(t_abs);
                            StructureTable::from_tensor(&tensor, t, t_abs, "spectral", None)
                        }
                        Err(e) => return Err(e.into()),
                    };
                    bundle.structure_tables.push(table);
                }
            }
        }
        Command::Contract | Command::Report => {
            let sp = spectral_decompose(&ls)?;
            let report = contract(basis, &sp, &ls, &policy)?;
            bundle.contraction = Some(ContractionDump::new(&report, sp.eigenvalues())?);
        }
        Command::ZooRun => {
            let (id, params) = instance.zoo.ok_or_else(|| ConfigError {
                code: ConfigCode::InvalidValue,
                message: "zoo-run needs a zoo model".into(),
                key: Some("source".into()),
                line: None,
            })?;
            let report = oracle_check(id, &params, &times_abs)?;
            bundle.oracle = Some(OracleDump {
                model: id.name().into(),
                max_deviation: report.max_deviation(),
                deviations: report
                    .deviations
                    .into_iter()
                    .map(|(label, max_deviation)| Deviation { label, max_deviation })
                    .collect(),
            });
        }
    }
    Ok(bundle)
}

fn columns(basis: &dissipalg::OperatorBasis, map: &Superoperator) -> Result<Vec<Column>, Error> {
    basis
        .elements()
        .iter()
        .zip(basis.labels())
        .map(|(a, label)| {
            let coords = basis.expand(&map.apply(a)?)?;
            Ok(Column {
                label: label.clone(),
                coords: coords.into_iter().map(Cx::from).collect(),
            })
        })
        .collect()
}

/// Spectral data and symbolic tensors, computed on first use.
#[derive(Default)]
struct Spectral {
    data: Option<SpectralData>,
    tensors: Vec<(StructureKind, SymbolicTensor)>,
}

impl Spectral {
    fn tensor(
        &mut self,
        basis: &dissipalg::OperatorBasis,
        ls: &Superoperator,
        kind: StructureKind,
        policy: &TolerancePolicy,
    ) -> Result<&SymbolicTensor, Error> {
        if let Some(pos) = self.tensors.iter().position(|(k, _)| *k == kind) {
            return Ok(&self.tensors[pos].1);
        }
        if self.data.is_none() {
            self.data = Some(spectral_decompose(ls)?);
        }
        let sp = self.data.as_ref().expect("set above");
        let tensor = symbolic_structure_constants(basis, sp, kind, policy)?;
        self.tensors.push((kind, tensor));
        Ok(&self.tensors.last().expect("just pushed").1)
    }
}
