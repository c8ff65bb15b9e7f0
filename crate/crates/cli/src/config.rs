//! Model configuration documents.
//!
//! A config is one JSON object. Complex scalars are `[re, im]` pairs and
//! matrices are row lists of them.

use std::collections::BTreeMap;
use std::fmt;

use dissipalg::{
    build_basis, zoo, BasisKind, GkslModel, Jump, ModelId, OperatorBasis, OperatorMatrix, PinchingProjection,
    ZooParams, C64,
};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

/// A complex number serialized as `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cx(pub f64, pub f64);

impl From<C64> for Cx {
    fn from(z: C64) -> Self {
        Cx(z.re, z.im)
    }
}

impl From<Cx> for C64 {
    fn from(z: Cx) -> Self {
        C64::new(z.0, z.1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfigCode {
    Syntax,
    MissingField,
    UnknownModel,
    DimensionMismatch,
    NegativeRate,
    InvalidValue,
}

impl ConfigCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ConfigCode::Syntax => "CONFIG_SYNTAX",
            ConfigCode::MissingField => "CONFIG_MISSING_FIELD",
            ConfigCode::UnknownModel => "CONFIG_UNKNOWN_MODEL",
            ConfigCode::DimensionMismatch => "CONFIG_DIMENSION_MISMATCH",
            ConfigCode::NegativeRate => "CONFIG_NEGATIVE_RATE",
            ConfigCode::InvalidValue => "CONFIG_INVALID_VALUE",
        }
    }
}

/// A config diagnostic. `line` is 1-based and points at the offending key
/// when it can be located in the source text.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub code: ConfigCode,
    pub message: String,
    pub key: Option<String>,
    pub line: Option<usize>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code.as_str(), self.message)?;
        if let Some(key) = &self.key {
            write!(f, " (key `{key}`")?;
            if let Some(line) = self.line {
                write!(f, ", line {line}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpSpec {
    pub operator: Vec<Vec<Cx>>,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Source {
    Zoo {
        model: String,
        gamma: f64,
        n: f64,
        m: Cx,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim: Option<usize>,
    },
    Custom {
        dim: usize,
        hamiltonian: Vec<Vec<Cx>>,
        jumps: Vec<JumpSpec>,
    },
    Pinching {
        dim: usize,
        blocks: Vec<Vec<usize>>,
        gamma: f64,
    },
}

/// Validated model configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub source: Source,
    /// Basis name; `None` selects the source's default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<String>,
    /// Times in units of `1/γ_max`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    /// Parameters recorded by the model builder (`beta_hbar_omega` etc.).
    #[serde(default)]
    pub derived: BTreeMap<String, f64>,
}

/// A model ready for analysis.
pub struct Instance {
    pub model: GkslModel,
    pub basis: OperatorBasis,
    pub zoo: Option<(ModelId, ZooParams)>,
}

impl ModelSpec {
    /// The configured basis, or the source's default.
    pub fn basis_kind(&self) -> BasisKind {
        if let Some(kind) = self.basis.as_deref().and_then(BasisKind::parse) {
            return kind;
        }
        match &self.source {
            Source::Zoo { model, .. } => ModelId::parse(model).map_or(BasisKind::MatrixUnits, ModelId::default_basis),
            _ => BasisKind::MatrixUnits,
        }
    }

    /// Builds the model and basis. Failures are reported against the key
    /// that caused them, without line information.
    pub fn instantiate(&self) -> Result<Instance, ConfigError> {
        let (model, zoo) = match &self.source {
            Source::Zoo { model, gamma, n, m, dim } => {
                let id = ModelId::parse(model)
                    .ok_or_else(|| err(ConfigCode::UnknownModel, "model", format!("unknown model `{model}`")))?;
                let params = ZooParams {
                    gamma: *gamma,
                    n: *n,
                    m: (*m).into(),
                    trunc_dim: *dim,
                };
                let (built, _) = zoo::build(id, &params).map_err(|e| zoo_error(e, id))?;
                (built, Some((id, params)))
            }
            Source::Custom { dim, hamiltonian, jumps } => {
                let h = matrix(hamiltonian, *dim, "hamiltonian")?;
                let jumps = jumps
                    .iter()
                    .enumerate()
                    .map(|(k, j)| Ok(Jump::new(matrix(&j.operator, *dim, &format!("jumps[{k}].operator"))?, j.rate)))
                    .collect::<Result<Vec<_>, ConfigError>>()?;
                let model = GkslModel::new(h, jumps).map_err(|e| err(ConfigCode::InvalidValue, "hamiltonian", e.to_string()))?;
                (model, None)
            }
            Source::Pinching { dim, blocks, gamma } => {
                let p = PinchingProjection::from_index_sets(*dim, blocks)
                    .map_err(|e| err(ConfigCode::InvalidValue, "blocks", e.to_string()))?;
                let model = p
                    .gksl_model(*gamma)
                    .map_err(|e| err(ConfigCode::InvalidValue, "gamma", e.to_string()))?
                    .with_param("gamma", *gamma);
                (model, None)
            }
        };
        let basis = build_basis(self.basis_kind(), model.dim())
            .map_err(|e| err(ConfigCode::InvalidValue, "basis", e.to_string()))?;
        Ok(Instance { model, basis, zoo })
    }

    /// Rate unit for times: `γ_max`, or 1 for purely Hamiltonian models.
    pub fn rate_scale(model: &GkslModel) -> f64 {
        let g = model.max_rate();
        if g > 0.0 {
            g
        } else {
            1.0
        }
    }
}

fn zoo_error(e: dissipalg::Error, id: ModelId) -> ConfigError {
    use dissipalg::Error;
    let key = match &e {
        Error::Positivity { .. } => "m",
        Error::Truncation { .. } => "dim",
        Error::Model(msg) if msg.starts_with("rate") => "gamma",
        Error::Model(_) if id == ModelId::ThermalOsc => "m",
        Error::Model(_) => "n",
        _ => "model",
    };
    err(ConfigCode::InvalidValue, key, e.to_string())
}

fn matrix(rows: &[Vec<Cx>], dim: usize, key: &str) -> Result<OperatorMatrix, ConfigError> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(err(
            ConfigCode::DimensionMismatch,
            key,
            format!("expected a {dim}x{dim} matrix"),
        ));
    }
    Ok(OperatorMatrix::from_fn(dim, |r, c| rows[r][c].into()))
}

fn err(code: ConfigCode, key: &str, message: String) -> ConfigError {
    ConfigError {
        code,
        message,
        key: Some(key.to_string()),
        line: None,
    }
}

const ZOO_KEYS: &[&str] = &["source", "model", "gamma", "n", "m", "dim", "basis", "times"];
const CUSTOM_KEYS: &[&str] = &["source", "dim", "hamiltonian", "jumps", "basis", "times"];
const PINCHING_KEYS: &[&str] = &["source", "dim", "blocks", "gamma", "basis", "times"];

/// Parses and validates a config document.
pub fn parse_config(text: &str) -> Result<ModelSpec, ConfigError> {
    let value: Value = serde_json::from_str(text).map_err(|e| ConfigError {
        code: ConfigCode::Syntax,
        message: e.to_string(),
        key: None,
        line: Some(e.line()),
    })?;
    let spec = spec_from_value(&value).map_err(|e| locate(e, text))?;
    let instance = spec.instantiate().map_err(|e| locate(e, text))?;
    Ok(ModelSpec {
        derived: instance.model.params.clone(),
        ..spec
    })
}

fn spec_from_value(value: &Value) -> Result<ModelSpec, ConfigError> {
    let obj = value
        .as_object()
        .ok_or_else(|| err(ConfigCode::InvalidValue, "$", "config must be an object".into()))?;
    let source_name = match obj.get("source") {
        Some(v) => v
            .as_str()
            .ok_or_else(|| err(ConfigCode::InvalidValue, "source", "expected a string".into()))?,
        None if obj.contains_key("model") => "zoo",
        None => return Err(missing("source")),
    };
    let (allowed, source) = match source_name {
        "zoo" => {
            let model = obj
                .get("model")
                .ok_or_else(|| missing("model"))?
                .as_str()
                .ok_or_else(|| err(ConfigCode::InvalidValue, "model", "expected a string".into()))?;
            if ModelId::parse(model).is_none() {
                return Err(err(ConfigCode::UnknownModel, "model", format!("unknown model `{model}`")));
            }
            let defaults = ZooParams::default();
            let source = Source::Zoo {
                model: model.to_string(),
                gamma: opt_rate(obj, "gamma")?.unwrap_or(defaults.gamma),
                n: opt_nonneg(obj, "n")?.unwrap_or(defaults.n),
                m: match obj.get("m") {
                    Some(v) => scalar(v, "m")?,
                    None => defaults.m.into(),
                },
                dim: opt_usize(obj, "dim")?,
            };
            (ZOO_KEYS, source)
        }
        "custom" => {
            let dim = req_dim(obj)?;
            let hamiltonian = match obj.get("hamiltonian") {
                Some(v) => matrix_value(v, dim, "hamiltonian")?,
                None => vec![vec![Cx(0.0, 0.0); dim]; dim],
            };
            let jumps = match obj.get("jumps") {
                None => Vec::new(),
                Some(v) => v
                    .as_array()
                    .ok_or_else(|| err(ConfigCode::InvalidValue, "jumps", "expected a list".into()))?
                    .iter()
                    .enumerate()
                    .map(|(k, j)| jump_value(j, dim, k))
                    .collect::<Result<_, _>>()?,
            };
            (CUSTOM_KEYS, Source::Custom { dim, hamiltonian, jumps })
        }
        "pinching" => {
            let dim = req_dim(obj)?;
            let blocks = obj
                .get("blocks")
                .ok_or_else(|| missing("blocks"))?
                .as_array()
                .ok_or_else(|| err(ConfigCode::InvalidValue, "blocks", "expected a list of index lists".into()))?
                .iter()
                .map(|b| {
                    b.as_array()
                        .and_then(|idx| idx.iter().map(|i| i.as_u64().map(|i| i as usize)).collect::<Option<Vec<_>>>())
                        .ok_or_else(|| err(ConfigCode::InvalidValue, "blocks", "expected a list of index lists".into()))
                })
                .collect::<Result<Vec<_>, _>>()?;
            if let Some(&bad) = blocks.iter().flatten().find(|&&i| i >= dim) {
                return Err(err(
                    ConfigCode::DimensionMismatch,
                    "blocks",
                    format!("index {bad} out of range for dim {dim}"),
                ));
            }
            let gamma = opt_rate(obj, "gamma")?.unwrap_or(1.0);
            (PINCHING_KEYS, Source::Pinching { dim, blocks, gamma })
        }
        other => {
            return Err(err(
                ConfigCode::InvalidValue,
                "source",
                format!("unknown source `{other}` (expected zoo, custom or pinching)"),
            ))
        }
    };
    if let Some(key) = obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(err(
            ConfigCode::InvalidValue,
            key,
            format!("unknown key for {source_name} source"),
        ));
    }
    let basis = match obj.get("basis") {
        None => None,
        Some(v) => Some(parse_basis_name(v.as_str().unwrap_or_default()).map_err(|mut e| {
            e.key = Some("basis".into());
            e
        })?),
    };
    let times = match obj.get("times") {
        None => None,
        Some(v) => Some(times_value(v)?),
    };
    Ok(ModelSpec {
        source,
        basis,
        times,
        derived: BTreeMap::new(),
    })
}

/// Validates a basis name.
pub fn parse_basis_name(name: &str) -> Result<String, ConfigError> {
    BasisKind::parse(name).map(|k| k.name().to_string()).ok_or_else(|| {
        err(
            ConfigCode::InvalidValue,
            "--basis",
            format!("unknown basis `{name}` (expected pauli, matrix_units or fock_ladder)"),
        )
    })
}

/// Validates a time list: finite and non-negative.
pub fn check_times(times: &[f64], key: &str) -> Result<(), ConfigError> {
    match times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        Some(t) => Err(err(ConfigCode::InvalidValue, key, format!("time {t} must be finite and >= 0"))),
        None => Ok(()),
    }
}

fn times_value(v: &Value) -> Result<Vec<f64>, ConfigError> {
    let times = v
        .as_array()
        .and_then(|a| a.iter().map(Value::as_f64).collect::<Option<Vec<_>>>())
        .ok_or_else(|| err(ConfigCode::InvalidValue, "times", "expected a list of numbers".into()))?;
    check_times(&times, "times")?;
    Ok(times)
}

fn missing(key: &str) -> ConfigError {
    err(ConfigCode::MissingField, key, format!("missing required key `{key}`"))
}

fn number(obj: &Map<String, Value>, key: &str) -> Result<Option<f64>, ConfigError> {
    match obj.get(key) {
        None => Ok(None),
        Some(v) => v
            .as_f64()
            .map(Some)
            .ok_or_else(|| err(ConfigCode::InvalidValue, key, "expected a number".into())),
    }
}

fn check_rate(x: f64, key: &str) -> Result<f64, ConfigError> {
    if x < 0.0 {
        Err(err(ConfigCode::NegativeRate, key, format!("rate {x} is negative")))
    } else if x.is_finite() {
        Ok(x)
    } else {
        Err(err(ConfigCode::InvalidValue, key, format!("rate {x} is not finite")))
    }
}

fn opt_rate(obj: &Map<String, Value>, key: &str) -> Result<Option<f64>, ConfigError> {
    number(obj, key)?.map(|x| check_rate(x, key)).transpose()
}

fn opt_nonneg(obj: &Map<String, Value>, key: &str) -> Result<Option<f64>, ConfigError> {
    match number(obj, key)? {
        Some(x) if x < 0.0 => Err(err(ConfigCode::InvalidValue, key, format!("{key} must be >= 0, got {x}"))),
        other => Ok(other),
    }
}

fn opt_usize(obj: &Map<String, Value>, key: &str) -> Result<Option<usize>, ConfigError> {
    match obj.get(key) {
        None => Ok(None),
        Some(v) => v
            .as_u64()
            .map(|x| Some(x as usize))
            .ok_or_else(|| err(ConfigCode::InvalidValue, key, "expected a non-negative integer".into())),
    }
}

fn req_dim(obj: &Map<String, Value>) -> Result<usize, ConfigError> {
    match opt_usize(obj, "dim")? {
        None => Err(missing("dim")),
        Some(0) => Err(err(ConfigCode::InvalidValue, "dim", "dimension must be positive".into())),
        Some(d) => Ok(d),
    }
}

/// A real number, or a complex one as `[re, im]`.
fn scalar(v: &Value, key: &str) -> Result<Cx, ConfigError> {
    if let Some(x) = v.as_f64() {
        return Ok(Cx(x, 0.0));
    }
    complex(v, key)
}

fn complex(v: &Value, key: &str) -> Result<Cx, ConfigError> {
    match v.as_array().map(Vec::as_slice) {
        Some([re, im]) => match (re.as_f64(), im.as_f64()) {
            (Some(re), Some(im)) => Ok(Cx(re, im)),
            _ => Err(err(ConfigCode::InvalidValue, key, "expected [re, im] numbers".into())),
        },
        _ => Err(err(ConfigCode::InvalidValue, key, "expected a complex number [re, im]".into())),
    }
}

fn matrix_value(v: &Value, dim: usize, key: &str) -> Result<Vec<Vec<Cx>>, ConfigError> {
    let rows = v
        .as_array()
        .ok_or_else(|| err(ConfigCode::InvalidValue, key, "expected a list of rows".into()))?;
    let rows = rows
        .iter()
        .map(|r| {
            r.as_array()
                .ok_or_else(|| err(ConfigCode::InvalidValue, key, "expected a list of rows".into()))?
                .iter()
                .map(|z| complex(z, key))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        let shape = rows.first().map_or(0, Vec::len);
        return Err(err(
            ConfigCode::DimensionMismatch,
            key,
            format!("expected {dim}x{dim}, found {}x{shape}", rows.len()),
        ));
    }
    Ok(rows)
}

fn jump_value(v: &Value, dim: usize, k: usize) -> Result<JumpSpec, ConfigError> {
    let obj = v
        .as_object()
        .ok_or_else(|| err(ConfigCode::InvalidValue, &format!("jumps[{k}]"), "expected an object".into()))?;
    let key = |name: &str| format!("jumps[{k}].{name}");
    let operator = matrix_value(obj.get("operator").ok_or_else(|| missing(&key("operator")))?, dim, &key("operator"))?;
    let rate = match obj.get("rate") {
        None => return Err(missing(&key("rate"))),
        Some(r) => r
            .as_f64()
            .ok_or_else(|| err(ConfigCode::InvalidValue, &key("rate"), "expected a number".into()))?,
    };
    let rate = check_rate(rate, &key("rate"))?;
    if let Some(extra) = obj.keys().find(|n| !matches!(n.as_str(), "operator" | "rate")) {
        return Err(err(ConfigCode::InvalidValue, &key(extra), "unknown key in jump".into()));
    }
    Ok(JumpSpec { operator, rate })
}

/// Fills in the line of `err.key` by walking its path through `text`.
///
/// Array indices select the n-th occurrence of the following key, which is
/// exact for documents where each list element names its keys once.
fn locate(mut e: ConfigError, text: &str) -> ConfigError {
    let Some(path) = e.key.clone() else { return e };
    let mut pos = 0;
    let mut skip = 0;
    let mut found = None;
    for seg in path.split('.') {
        let (name, index) = match seg.split_once('[') {
            Some((name, rest)) => (name, rest.trim_end_matches(']').parse::<usize>().ok()),
            None => (seg, None),
        };
        match find_key(text, pos, name, skip) {
            Some(at) => {
                pos = at;
                found = Some(at);
            }
            None => break,
        }
        skip = index.unwrap_or(0);
    }
    e.line = found.map(|at| text[..at].matches('\n').count() + 1);
    e
}

fn find_key(text: &str, from: usize, name: &str, skip: usize) -> Option<usize> {
    let needle = format!("\"{name}\"");
    let mut start = from;
    let mut seen = 0;
    while let Some(off) = text[start..].find(&needle) {
        let at = start + off;
        let after = text[at + needle.len()..].trim_start();
        if after.starts_with(':') {
            if seen == skip {
                return Some(at);
            }
            seen += 1;
        }
        start = at + needle.len();
    }
    None
}
