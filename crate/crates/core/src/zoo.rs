//! Reference dissipative models with closed-form Heisenberg-picture
//! solutions, plus two scalar side checks.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::operator::{
    annihilation, creation, number, pauli, sigma_minus, sigma_plus, BasisKind, DensityState, OperatorMatrix,
};
use crate::projection::three_level_projection;
use crate::superop::{adjoint_generator, build_generator, propagator, GkslModel, Jump};

/// Smallest truncation accepted for oscillator models.
pub const MIN_TRUNCATION: usize = 6;
pub const DEFAULT_TRUNCATION: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelId {
    PhaseQubit,
    PhaseOsc,
    EnergyQubit,
    EnergyOsc,
    ThermalQubit,
    ThermalOsc,
    SqueezedQubit,
    Pinching3Level,
}

impl ModelId {
    pub const ALL: [ModelId; 8] = [
        ModelId::PhaseQubit,
        ModelId::PhaseOsc,
        ModelId::EnergyQubit,
        ModelId::EnergyOsc,
        ModelId::ThermalQubit,
        ModelId::ThermalOsc,
        ModelId::SqueezedQubit,
        ModelId::Pinching3Level,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelId::PhaseQubit => "phase_qubit",
            ModelId::PhaseOsc => "phase_osc",
            ModelId::EnergyQubit => "energy_qubit",
            ModelId::EnergyOsc => "energy_osc",
            ModelId::ThermalQubit => "thermal_qubit",
            ModelId::ThermalOsc => "thermal_osc",
            ModelId::SqueezedQubit => "squeezed_qubit",
            ModelId::Pinching3Level => "pinching_3level",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == name)
    }

    pub fn is_oscillator(self) -> bool {
        matches!(self, ModelId::PhaseOsc | ModelId::EnergyOsc | ModelId::ThermalOsc)
    }

    /// A product-closed basis suited to the model.
    pub fn default_basis(self) -> BasisKind {
        match self {
            ModelId::PhaseQubit | ModelId::EnergyQubit | ModelId::ThermalQubit | ModelId::SqueezedQubit => {
                BasisKind::Pauli
            }
            _ => BasisKind::MatrixUnits,
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Model parameters.
///
/// `n` is the thermal occupation of the qubit models; the thermal
/// oscillator reads its occupation from `m` (real part, imaginary part
/// zero) and the squeezed qubit uses the complex `m` as squeezing
/// parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZooParams {
    pub gamma: f64,
    pub n: f64,
    pub m: C64,
    pub trunc_dim: Option<usize>,
}

impl Default for ZooParams {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            n: 0.5,
            m: C64::new(0.0, 0.0),
            trunc_dim: None,
        }
    }
}

impl ZooParams {
    pub fn with_gamma(gamma: f64) -> Self {
        Self {
            gamma,
            ..Self::default()
        }
    }
}

type Evolution = Arc<dyn Fn(f64) -> OperatorMatrix + Send + Sync>;

/// A labelled observable with its closed-form `Λ♯ₜ` image.
#[derive(Clone)]
pub struct HeisenbergForm {
    pub label: String,
    pub operator: OperatorMatrix,
    evolve: Evolution,
}

impl HeisenbergForm {
    fn new(label: impl Into<String>, operator: OperatorMatrix, evolve: impl Fn(f64) -> OperatorMatrix + Send + Sync + 'static) -> Self {
        Self {
            label: label.into(),
            operator,
            evolve: Arc::new(evolve),
        }
    }

    /// Eigen-operator with `Λ♯ₜ[X] = e^{λt} X`.
    fn eigen(label: impl Into<String>, operator: OperatorMatrix, lambda: f64) -> Self {
        let op = operator.clone();
        Self::new(label, operator, move |t| op.scale_re((lambda * t).exp()))
    }

    pub fn at(&self, t: f64) -> OperatorMatrix {
        (self.evolve)(t)
    }
}

impl fmt::Debug for HeisenbergForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HeisenbergForm").field("label", &self.label).finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StationaryOracle {
    Unique(DensityState),
    /// Stationary states form a convex set spanning this many dimensions.
    Family { dim: usize },
}

#[derive(Debug, Clone)]
pub struct OracleSet {
    pub heisenberg_forms: Vec<HeisenbergForm>,
    pub expected_survivor_dim: usize,
    pub expected_stationary: StationaryOracle,
    /// Edge length of the trusted top-left block for truncated oscillators.
    pub valid_block: Option<usize>,
}

impl OracleSet {
    pub fn form(&self, label: &str) -> Option<&HeisenbergForm> {
        self.heisenberg_forms.iter().find(|f| f.label == label)
    }
}

fn check_params(id: ModelId, p: &ZooParams) -> Result<()> {
    if !(p.gamma.is_finite() && p.gamma > 0.0) {
        return Err(Error::Model(format!("rate must be positive, got {}", p.gamma)));
    }
    match id {
        ModelId::ThermalQubit | ModelId::SqueezedQubit if !(p.n.is_finite() && p.n >= 0.0) => {
            Err(Error::Model(format!("thermal occupation must be non-negative, got {}", p.n)))
        }
        ModelId::ThermalOsc if !(p.m.re.is_finite() && p.m.re >= 0.0 && p.m.im == 0.0) => Err(Error::Model(
            format!("oscillator thermal occupation must be real and non-negative, got {}", p.m),
        )),
        ModelId::SqueezedQubit => {
            let m_sq = p.m.norm_sqr();
            let bound = p.n * (p.n + 1.0);
            if m_sq > bound * (1.0 + 1e-12) {
                Err(Error::Positivity { m_sq, bound })
            } else {
                Ok(())
            }
        }
        _ => Ok(()),
    }
}

fn truncation(id: ModelId, p: &ZooParams) -> Result<usize> {
    let d = p.trunc_dim.unwrap_or(DEFAULT_TRUNCATION);
    if id.is_oscillator() && d < MIN_TRUNCATION {
        return Err(Error::Truncation {
            found: d,
            min: MIN_TRUNCATION,
        });
    }
    Ok(d)
}

/// `βħΩ` from a thermal occupation `n = 1/(e^{βħΩ} − 1)`.
pub fn beta_hbar_omega(n: f64) -> f64 {
    (1.0 + 1.0 / n).ln()
}

/// Two-level Gibbs state with ground state `P−` and occupation `n` of `P+`.
pub fn thermal_qubit_state(n: f64) -> Result<DensityState> {
    let z = 2.0 * n + 1.0;
    let upper = crate::operator::qubit_projector(true).scale_re(n / z);
    let lower = crate::operator::qubit_projector(false).scale_re((n + 1.0) / z);
    DensityState::new(&upper + &lower)
}

/// Geometric populations `∝ (m/(m+1))^k` on `dim` Fock levels.
pub fn thermal_oscillator_state(m: f64, dim: usize) -> Result<DensityState> {
    let ratio = m / (m + 1.0);
    let weights: Vec<f64> = (0..dim).map(|k| ratio.powi(k as i32)).collect();
    let z: f64 = weights.iter().sum();
    let diag: Vec<C64> = weights.iter().map(|w| C64::new(w / z, 0.0)).collect();
    DensityState::new(OperatorMatrix::diagonal(&diag))
}

/// Jump operators and rates diagonalizing the squeezed-bath Kossakowski
/// matrix `γ[[n+1, m*], [m, n]]` over `{σ−, σ+}`.
pub fn squeezed_jumps(gamma: f64, n: f64, m: C64) -> Result<Vec<Jump>> {
    let k = OperatorMatrix::from_rows(&[
        vec![C64::new(gamma * (n + 1.0), 0.0), m.conj() * gamma],
        vec![m * gamma, C64::new(gamma * n, 0.0)],
    ])?;
    let evd = k
        .as_mat()
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Numerical(format!("{e:?}")))?;
    let vals: Vec<f64> = evd.S().column_vector().iter().map(|z| z.re).collect();
    let floor = 1e-12 * gamma * (2.0 * n + 1.0);
    let mut jumps = Vec::new();
    for (l, &mu) in vals.iter().enumerate() {
        if mu < -floor {
            return Err(Error::Positivity {
                m_sq: m.norm_sqr(),
                bound: n * (n + 1.0),
            });
        }
        if mu <= floor {
            continue;
        }
        let u = evd.U().col(l);
        let op = &sigma_minus().scale(u[0]) + &sigma_plus().scale(u[1]);
        jumps.push(Jump::new(op, mu));
    }
    Ok(jumps)
}

pub fn build(id: ModelId, params: &ZooParams) -> Result<(GkslModel, OracleSet)> {
    check_params(id, params)?;
    let g = params.gamma;
    let n = params.n;
    let (model, oracles) = match id {
        ModelId::PhaseQubit => {
            let model = GkslModel::dissipative(2, vec![Jump::new(pauli(3), g / 2.0)])?;
            let forms = vec![
                HeisenbergForm::eigen("σ0", pauli(0), 0.0),
                HeisenbergForm::eigen("σ1", pauli(1), -g),
                HeisenbergForm::eigen("σ2", pauli(2), -g),
                HeisenbergForm::eigen("σ3", pauli(3), 0.0),
            ];
            (model, oracle(forms, 2, StationaryOracle::Family { dim: 2 }, None))
        }
        ModelId::EnergyQubit => {
            let model = GkslModel::dissipative(2, vec![Jump::new(sigma_minus(), g)])?;
            let forms = vec![
                HeisenbergForm::eigen("σ0", pauli(0), 0.0),
                HeisenbergForm::eigen("σ1", pauli(1), -g / 2.0),
                HeisenbergForm::eigen("σ2", pauli(2), -g / 2.0),
                HeisenbergForm::new("σ3", pauli(3), move |t| {
                    &(&pauli(3) + &pauli(0)).scale_re((-g * t).exp()) - &pauli(0)
                }),
            ];
            let ground = DensityState::new(crate::operator::qubit_projector(false))?;
            (model, oracle(forms, 1, StationaryOracle::Unique(ground), None))
        }
        ModelId::ThermalQubit => {
            let model = GkslModel::dissipative(
                2,
                vec![Jump::new(sigma_minus(), g * (n + 1.0)), Jump::new(sigma_plus(), g * n)],
            )?;
            let forms = thermal_qubit_forms(g, n);
            let state = thermal_qubit_state(n)?;
            (model, oracle(forms, 1, StationaryOracle::Unique(state), None))
        }
        ModelId::SqueezedQubit => {
            let m = params.m;
            let model = GkslModel::dissipative(2, squeezed_jumps(g, n, m)?)?
                .with_param("m_re", m.re)
                .with_param("m_im", m.im);
            let mut forms = thermal_qubit_forms(g, n);
            if m.norm() > 0.0 {
                forms.retain(|f| f.label == "σ0" || f.label == "σ3");
                forms.extend(squeezed_forms(g, n, m));
            }
            let state = thermal_qubit_state(n)?;
            (model, oracle(forms, 1, StationaryOracle::Unique(state), None))
        }
        ModelId::PhaseOsc | ModelId::EnergyOsc | ModelId::ThermalOsc => {
            let d = truncation(id, params)?;
            let (a, ad, num) = (annihilation(d), creation(d), number(d));
            let id_op = OperatorMatrix::identity(d);
            let half = -g / 2.0;
            let (jumps, n_form, survivors, stationary) = match id {
                ModelId::PhaseOsc => (
                    vec![Jump::new(num.clone(), g)],
                    HeisenbergForm::eigen("N", num.clone(), 0.0),
                    d,
                    StationaryOracle::Family { dim: d },
                ),
                ModelId::EnergyOsc => {
                    let vacuum = DensityState::new(OperatorMatrix::ket_bra(d, 0, 0))?;
                    (
                        vec![Jump::new(a.clone(), g)],
                        HeisenbergForm::eigen("N", num.clone(), -g),
                        1,
                        StationaryOracle::Unique(vacuum),
                    )
                }
                _ => {
                    let m = params.m.re;
                    let nn = num.clone();
                    let form = HeisenbergForm::new("N", num.clone(), move |t| {
                        let decay = (-g * t).exp();
                        &nn.scale_re(decay) + &OperatorMatrix::identity(d).scale_re(m * (1.0 - decay))
                    });
                    (
                        vec![Jump::new(a.clone(), g * (m + 1.0)), Jump::new(ad.clone(), g * m)],
                        form,
                        1,
                        StationaryOracle::Unique(thermal_oscillator_state(m, d)?),
                    )
                }
            };
            let forms = vec![
                HeisenbergForm::eigen("𝟙", id_op, 0.0),
                HeisenbergForm::eigen("a", a, half),
                HeisenbergForm::eigen("a†", ad, half),
                n_form,
            ];
            let mut model = GkslModel::dissipative(d, jumps)?;
            if id == ModelId::ThermalOsc {
                model = model.with_param("m", params.m.re);
                if params.m.re > 0.0 {
                    model = model.with_param("beta_hbar_omega", beta_hbar_omega(params.m.re));
                }
            }
            (model, oracle(forms, survivors, stationary, Some(d - 2)))
        }
        ModelId::Pinching3Level => {
            let model = three_level_projection().gksl_model(g)?;
            let ket = |r, s| OperatorMatrix::ket_bra(3, r, s);
            let mut forms = Vec::new();
            for (r, name) in ["a", "b", "c"].iter().enumerate() {
                forms.push(HeisenbergForm::eigen(format!("|{name}⟩⟨{name}|"), ket(r, r), 0.0));
            }
            for (r, name) in [(1, "b"), (2, "c")] {
                forms.push(HeisenbergForm::eigen(
                    format!("|a⟩⟨{name}| + |{name}⟩⟨a|"),
                    &ket(0, r) + &ket(r, 0),
                    -g,
                ));
                forms.push(HeisenbergForm::eigen(
                    format!("|a⟩⟨{name}| − |{name}⟩⟨a|"),
                    &ket(0, r) - &ket(r, 0),
                    -g,
                ));
            }
            forms.push(HeisenbergForm::eigen("|b⟩⟨c| + |c⟩⟨b|", &ket(1, 2) + &ket(2, 1), 0.0));
            forms.push(HeisenbergForm::eigen("|b⟩⟨c| − |c⟩⟨b|", &ket(1, 2) - &ket(2, 1), 0.0));
            (model, oracle(forms, 5, StationaryOracle::Family { dim: 5 }, None))
        }
    };
    let mut model = model.with_param("gamma", g);
    if matches!(id, ModelId::ThermalQubit | ModelId::SqueezedQubit) {
        model = model.with_param("n", n);
        if n > 0.0 {
            model = model.with_param("beta_hbar_omega", beta_hbar_omega(n));
        }
    }
    if id.is_oscillator() {
        let dim = model.dim() as f64;
        model = model.with_param("dim", dim);
    }
    Ok((model, oracles))
}

fn oracle(
    heisenberg_forms: Vec<HeisenbergForm>,
    expected_survivor_dim: usize,
    expected_stationary: StationaryOracle,
    valid_block: Option<usize>,
) -> OracleSet {
    OracleSet {
        heisenberg_forms,
        expected_survivor_dim,
        expected_stationary,
        valid_block,
    }
}

fn thermal_qubit_forms(g: f64, n: f64) -> Vec<HeisenbergForm> {
    let rate = g * (1.0 + 2.0 * n);
    vec![
        HeisenbergForm::eigen("σ0", pauli(0), 0.0),
        HeisenbergForm::eigen("σ1", pauli(1), -g * (n + 0.5)),
        HeisenbergForm::eigen("σ2", pauli(2), -g * (n + 0.5)),
        HeisenbergForm::new("σ3", pauli(3), move |t| {
            let decay = (-rate * t).exp();
            &pauli(3).scale_re(decay) + &pauli(0).scale_re((decay - 1.0) / (1.0 + 2.0 * n))
        }),
    ]
}

fn squeezed_forms(g: f64, n: f64, m: C64) -> Vec<HeisenbergForm> {
    let abs = m.norm();
    // (m + m*)/(2|m|) and i(m − m*)/(2|m|)
    let even = m.re / abs;
    let odd = -m.im / abs;
    let envelope = move |t: f64| (-g * (n + 0.5) * t).exp();
    let mut forms = vec![
        HeisenbergForm::new("σ1", pauli(1), move |t| {
            let (s, c) = ((g * abs * t).sinh(), (g * abs * t).cosh());
            (&pauli(1).scale_re(even * s + c) + &pauli(2).scale_re(odd * s)).scale_re(envelope(t))
        }),
        HeisenbergForm::new("σ2", pauli(2), move |t| {
            let (s, c) = ((g * abs * t).sinh(), (g * abs * t).cosh());
            (&pauli(2).scale_re(-even * s + c) + &pauli(1).scale_re(odd * s)).scale_re(envelope(t))
        }),
    ];
    for sign in [1.0, -1.0] {
        let denom = 2.0 * m.re + sign * 2.0 * abs;
        if denom.abs() <= 1e-12 * abs {
            continue;
        }
        // σ2 − i(m − m*)/(m + m* ± 2|m|) σ1
        let coeff = C64::new(2.0 * m.im / denom, 0.0);
        let op = &pauli(2) + &pauli(1).scale(coeff);
        let label = if sign > 0.0 { "σ2 − κ₊σ1" } else { "σ2 − κ₋σ1" };
        forms.push(HeisenbergForm::eigen(label, op, -g * (n + 0.5) - sign * g * abs));
    }
    forms
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub model: ModelId,
    /// `(label, max deviation over the time grid)`.
    pub deviations: Vec<(String, f64)>,
}

impl OracleReport {
    pub fn max_deviation(&self) -> f64 {
        self.deviations.iter().map(|(_, d)| *d).fold(0.0, f64::max)
    }
}

/// Compares generic propagation of every labelled observable against its
/// closed form, restricted to the valid block for oscillators.
pub fn oracle_check(id: ModelId, params: &ZooParams, t_grid: &[f64]) -> Result<OracleReport> {
    let (model, oracles) = build(id, params)?;
    let ls = adjoint_generator(&model)?;
    let mut deviations: Vec<(String, f64)> =
        oracles.heisenberg_forms.iter().map(|f| (f.label.clone(), 0.0)).collect();
    for &t in t_grid {
        let prop = propagator(&ls, t)?;
        for (form, dev) in oracles.heisenberg_forms.iter().zip(deviations.iter_mut()) {
            let numeric = prop.apply(&form.operator)?;
            let exact = form.at(t);
            let diff = &numeric - &exact;
            let diff = match oracles.valid_block {
                Some(k) => diff.top_left(k),
                None => diff,
            };
            dev.1 = dev.1.max(diff.max_abs());
        }
    }
    Ok(OracleReport { model: id, deviations })
}

/// One commutation relation checked under the oscillator-to-qubit
/// substitution.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationCheck {
    pub relation: String,
    pub residual: f64,
    pub preserved: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalogyReport {
    /// Least-squares factor `s` in `L_substituted ≈ s · L_qubit`.
    pub scale: f64,
    pub residual: f64,
    pub relations: Vec<RelationCheck>,
    pub identity_fixed: bool,
}

/// Substitutes `a → σ−`, `N → (σ0 + σ3)/2` into the oscillator dephasing
/// generator and compares with qubit dephasing at the same rate.
pub fn analogy_check(gamma: f64) -> Result<AnalogyReport> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::Model(format!("rate must be positive, got {gamma}")));
    }
    let n_sub = crate::operator::qubit_projector(true);
    let substituted = build_generator(&GkslModel::dissipative(2, vec![Jump::new(n_sub.clone(), gamma)])?)?;
    let (qubit, _) = build(ModelId::PhaseQubit, &ZooParams::with_gamma(gamma))?;
    let qubit = build_generator(&qubit)?;

    let (ls, lq) = (substituted.matrix(), qubit.matrix());
    let mut num = C64::new(0.0, 0.0);
    let mut den = 0.0;
    for c in 0..lq.ncols() {
        for r in 0..lq.nrows() {
            num += lq[(r, c)].conj() * ls[(r, c)];
            den += lq[(r, c)].norm_sqr();
        }
    }
    let scale = num.re / den;
    let residual = (ls - lq * faer::Scale(C64::new(scale, 0.0))).norm_max();

    let (a, ad) = (sigma_minus(), sigma_plus());
    let id = pauli(0);
    let rel = |relation: &str, lhs: OperatorMatrix, rhs: OperatorMatrix| {
        let residual = (&lhs - &rhs).max_abs();
        RelationCheck {
            relation: relation.to_string(),
            residual,
            preserved: residual <= 1e-12,
        }
    };
    let relations = vec![
        rel("[a, N] = a", a.commutator(&n_sub), a.clone()),
        rel("[a†, N] = −a†", ad.commutator(&n_sub), -&ad),
        rel("[a, a†] = 𝟙", a.commutator(&ad), id.clone()),
    ];
    let identity_fixed = adjoint_generator(&GkslModel::dissipative(2, vec![Jump::new(n_sub, gamma)])?)?
        .apply(&id)?
        .max_abs()
        <= 1e-15;
    Ok(AnalogyReport {
        scale,
        residual,
        relations,
        identity_fixed,
    })
}

// Gauss–Kronrod 7/15 nodes and weights on [-1, 1].
const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const G_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gauss_kronrod(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = GK_WEIGHTS[7] * fc;
    let mut gauss = G_WEIGHTS[3] * fc;
    for k in 0..7 {
        let x = h * GK_NODES[k];
        let pair = f(c - x) + f(c + x);
        kronrod += GK_WEIGHTS[k] * pair;
        if k % 2 == 1 {
            gauss += G_WEIGHTS[k / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

fn adaptive(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> Result<f64> {
    let (value, err) = gauss_kronrod(f, a, b);
    if err <= tol.max(1e-15 * value.abs()) {
        return Ok(value);
    }
    if depth == 0 {
        return Err(Error::Quadrature(format!("no convergence on [{a}, {b}] (error {err:.3e})")));
    }
    let mid = 0.5 * (a + b);
    Ok(adaptive(f, a, mid, 0.5 * tol, depth - 1)? + adaptive(f, mid, b, 0.5 * tol, depth - 1)?)
}

/// `2Γ² ∫_{−c}^{c} sin²(ωt)/ω² dω`, the decay exponent accumulated by time
/// `t` with coupling `Γ` and frequency cutoff `c`.
pub fn golden_rule_quadrature(coupling: f64, t: f64, cutoff: f64) -> Result<f64> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::Quadrature(format!("time must be positive, got {t}")));
    }
    if !(cutoff.is_finite() && cutoff > 0.0) {
        return Err(Error::Quadrature(format!("cutoff must be positive, got {cutoff}")));
    }
    // ∫_0^c sin²(ωt)/ω² dω = t ∫_0^{ct} sin²(u)/u² du; the integrand is even.
    let f = |u: f64| {
        if u.abs() < 1e-4 {
            let u2 = u * u;
            1.0 - u2 / 3.0 + 2.0 * u2 * u2 / 45.0
        } else {
            let s = u.sin();
            s * s / (u * u)
        }
    };
    let upper = cutoff * t;
    let period = std::f64::consts::PI;
    let chunks = (upper / period).ceil() as usize;
    let mut total = 0.0;
    for k in 0..chunks {
        let a = k as f64 * period;
        let b = ((k + 1) as f64 * period).min(upper);
        if b <= a {
            break;
        }
        total += adaptive(&f, a, b, 1e-14, 30)?;
    }
    let value = 4.0 * coupling * coupling * t * total;
    if !value.is_finite() {
        return Err(Error::Quadrature("non-finite result".into()));
    }
    Ok(value)
}
