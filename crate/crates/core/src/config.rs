//! JSON model configurations and the composed rates they imply.

use serde::{Deserialize, Serialize};

use crate::discretize::{build_instance, DiscreteInstance};
use crate::error::{Error, Result};
use crate::model::{
    default_h, partition_constants, DomainKind, DomainSpec, MeasureSummary, ModelSpec, Point, PotentialSpec, Side,
    DEFAULT_QUADRATURE,
};
use crate::ratefn::{
    classify_regime, compose_alpha_no_boundary, compose_alpha_with_boundary, compose_beta_no_boundary,
    compose_beta_with_boundary, constants_from_h, power_tau_rates, AlphaVariant, Constants, RateFunction, RegimeReport,
};

const CONSTANTS_QUADRATURE: usize = 128;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainConfig {
    Interval {
        a: f64,
        b: f64,
        #[serde(default)]
        sticky: Option<Vec<Side>>,
    },
    /// `[0, truncation_L]`, sticky at `0`.
    HalfLine,
    Strip {
        width: f64,
        circumference: f64,
        #[serde(default)]
        sticky: Option<Vec<Side>>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n_interior: usize,
    #[serde(default = "one")]
    pub n_boundary: usize,
}

fn one() -> usize {
    1
}

/// Explicit interior/boundary rates replacing the built-in families.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatesConfig {
    pub beta_v: Option<RateFunction<f64>>,
    pub beta_w: Option<RateFunction<f64>>,
    pub alpha_v: Option<RateFunction<f64>>,
    pub alpha_w: Option<RateFunction<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub domain: DomainConfig,
    #[serde(rename = "V")]
    pub v: PotentialSpec<f64>,
    #[serde(rename = "W")]
    pub w: PotentialSpec<f64>,
    pub gamma: f64,
    pub delta: f64,
    #[serde(default, rename = "truncation_L")]
    pub truncation_l: Option<f64>,
    pub collar_s0: Option<f64>,
    #[serde(default)]
    pub mass_floor: Option<f64>,
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub rates: RatesConfig,
    /// Multiplicative constant of the built-in interior families.
    pub calibration: Option<f64>,
    #[serde(default)]
    pub alpha_variant: AlphaVariant,
}

/// Which composition produced a rate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CompositionPath {
    /// `max{βV(r)/θ, βW(δr)/(1-θ)}`
    E1,
    /// Additive-constant composition with boundary diffusion.
    E2,
    /// No-boundary-diffusion super Poincaré composition.
    B1,
    /// No-boundary-diffusion weak Poincaré composition.
    B2,
}

impl CompositionPath {
    pub fn label(&self) -> &'static str {
        match self {
            CompositionPath::E1 => "E1",
            CompositionPath::E2 => "E2'",
            CompositionPath::B1 => "B1",
            CompositionPath::B2 => "B2",
        }
    }

    /// Whether the composition keeps the growth class of the interior rate.
    fn preserves_growth(&self) -> bool {
        !matches!(self, CompositionPath::B1)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ComposedRates {
    pub beta: Option<RateFunction<f64>>,
    pub alpha: Option<RateFunction<f64>>,
    pub beta_path: CompositionPath,
    pub alpha_path: CompositionPath,
    pub constants: Option<Constants<f64>>,
    pub regime: Option<RegimeReport>,
    pub notes: Vec<String>,
}

impl ModelConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.model()?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn model(&self) -> Result<ModelSpec<f64>> {
        let domain = match &self.domain {
            DomainConfig::Interval { a, b, sticky } => {
                let d = DomainSpec::interval(*a, *b);
                match sticky {
                    Some(s) => d.with_sticky(s),
                    None => d,
                }
            }
            DomainConfig::HalfLine => {
                let l = self.truncation_l.ok_or_else(|| Error::InvalidModel("half_line needs truncation_L".into()))?;
                DomainSpec::half_line(l)
            }
            DomainConfig::Strip { width, circumference, sticky } => {
                let d = DomainSpec::strip(*width, *circumference);
                match sticky {
                    Some(s) => d.with_sticky(s),
                    None => d,
                }
            }
        };
        let mut model = ModelSpec::new(domain, self.v.clone(), self.w.clone(), self.gamma, self.delta);
        if self.mass_floor.is_some() {
            model.mass_floor = self.mass_floor;
        }
        model.validate()?;
        Ok(model)
    }

    pub fn grid(&self) -> GridConfig {
        self.grid.unwrap_or(GridConfig { n_interior: 200, n_boundary: 1 })
    }

    pub fn instance(&self) -> Result<DiscreteInstance<f64>> {
        let g = self.grid();
        build_instance(&self.model()?, g.n_interior, g.n_boundary)
    }

    pub fn summary(&self) -> Result<MeasureSummary<f64>> {
        partition_constants(&self.model()?, DEFAULT_QUADRATURE)
    }

    /// Collar depth: the configured one, else a quarter of the half thickness.
    pub fn s0(&self) -> Result<f64> {
        let model = self.model()?;
        Ok(self.collar_s0.unwrap_or(model.domain.half_thickness() / 4.0))
    }

    pub fn constants(&self) -> Result<Constants<f64>> {
        let model = self.model()?;
        let h = default_h(&model.domain, self.s0()?)?;
        constants_from_h(&model, &h, CONSTANTS_QUADRATURE)
    }

    pub fn with_calibration(&self, c: f64) -> Self {
        Self { calibration: Some(c), ..self.clone() }
    }

    fn c(&self) -> f64 {
        self.calibration.unwrap_or(1.0)
    }

    /// Interior and boundary rates: overrides first, then the built-in
    /// families for the domain.
    pub fn base_rates(&self) -> Result<RatesConfig> {
        let model = self.model()?;
        let c = self.c();
        let mut base = match (&model.domain.kind, &model.v) {
            (DomainKind::Strip { .. }, _) => RatesConfig {
                beta_v: Some(RateFunction::Poly { c, p: 1.0 }),
                beta_w: Some(RateFunction::Poly { c, p: 0.5 }),
                alpha_v: Some(RateFunction::Constant { c }),
                alpha_w: Some(RateFunction::Constant { c }),
            },
            (DomainKind::TruncatedHalfLine { .. }, PotentialSpec::PowerTau { tau }) => {
                let ex = power_tau_rates(*tau, c);
                RatesConfig { beta_v: ex.beta_v, beta_w: None, alpha_v: ex.alpha_v, alpha_w: None }
            }
            (DomainKind::TruncatedHalfLine { .. }, _) => RatesConfig::default(),
            (DomainKind::Interval { .. }, _) => RatesConfig {
                beta_v: Some(RateFunction::Poly { c, p: 0.5 }),
                beta_w: None,
                alpha_v: Some(RateFunction::Constant { c }),
                alpha_w: None,
            },
        };
        if model.domain.boundary_dimension() == 0 {
            base.beta_w = Some(RateFunction::Constant { c: 1.0 / min_atom_weight(&model)? });
        }
        let o = &self.rates;
        Ok(RatesConfig {
            beta_v: o.beta_v.clone().or(base.beta_v),
            beta_w: o.beta_w.clone().or(base.beta_w),
            alpha_v: o.alpha_v.clone().or(base.alpha_v),
            alpha_w: o.alpha_w.clone().or(base.alpha_w),
        })
    }

    /// Composed `β`, `α` and the regime labels they imply.
    pub fn composed(&self) -> Result<ComposedRates> {
        let model = self.model()?;
        let theta = self.summary()?.theta;
        let base = self.base_rates()?;
        let mut notes = model.warnings();
        let constants = match self.constants() {
            Ok(k) => Some(k),
            Err(e) => {
                notes.push(format!("collar constants unavailable: {e}"));
                None
            }
        };
        let with_boundary = model.delta > 0.0;
        let beta_path = if with_boundary { CompositionPath::E1 } else { CompositionPath::B1 };
        let alpha_path = if with_boundary && model.domain.boundary_dimension() >= 1 {
            CompositionPath::E2
        } else {
            CompositionPath::B2
        };

        let beta = match (&base.beta_v, beta_path) {
            (None, _) => None,
            (Some(bv), CompositionPath::E1) => match &base.beta_w {
                Some(bw) => Some(compose_beta_with_boundary(bv, bw, theta, model.delta)?),
                None => None,
            },
            (Some(bv), _) => constants.as_ref().and_then(|k| compose_beta_no_boundary(bv, k).ok()),
        };
        let alpha = match (&base.alpha_v, alpha_path) {
            (None, _) => None,
            (Some(av), CompositionPath::E2) => match (&base.alpha_w, &constants) {
                (Some(aw), Some(k)) => compose_alpha_with_boundary(av, aw, k, model.delta, self.alpha_variant).ok(),
                _ => None,
            },
            (Some(av), _) => constants.as_ref().and_then(|k| compose_alpha_no_boundary(av, k).ok()),
        };
        if base.beta_v.is_some() && beta.is_none() {
            notes.push(format!("{} composition of beta unavailable", beta_path.label()));
        }
        if base.alpha_v.is_some() && alpha.is_none() {
            notes.push(format!("{} composition of alpha unavailable", alpha_path.label()));
        }

        // a missing composition that keeps the growth class is classified
        // from the interior rate
        let beta_class = beta.clone().or_else(|| base.beta_v.clone().filter(|_| beta_path.preserves_growth()));
        let alpha_class = alpha.clone().or_else(|| base.alpha_v.clone().filter(|_| alpha_path.preserves_growth()));
        if beta.is_none() && beta_class.is_some() || alpha.is_none() && alpha_class.is_some() {
            notes.push("regime read from the interior rate, whose growth class the composition keeps".into());
        }
        let regime = classify_regime(beta_class.as_ref(), alpha_class.as_ref()).ok();
        Ok(ComposedRates { beta, alpha, beta_path, alpha_path, constants, regime, notes })
    }
}

/// Smallest `μ_W` weight of a boundary point.
fn min_atom_weight(model: &ModelSpec<f64>) -> Result<f64> {
    let comps = model.domain.sticky_components();
    let weights: Vec<f64> = comps.iter().map(|c| model.w.value(Point::on_line(c.x)).exp()).collect();
    let z: f64 = weights.iter().sum();
    let w = weights.iter().copied().fold(f64::INFINITY, f64::min) / z;
    if w > 0.0 && w.is_finite() {
        Ok(w)
    } else {
        Err(Error::InvalidModel("boundary has no positive atom".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratefn::Regime;

    fn half_line(tau: f64) -> ModelConfig {
        ModelConfig::from_json(&format!(
            r#"{{"domain":{{"kind":"half_line"}},"V":{{"form":"PowerTau","tau":{tau}}},
                "W":{{"form":"PowerTau","tau":{tau}}},"gamma":1.0,"delta":1.0,"truncation_L":10.0}}"#
        ))
        .unwrap()
    }

    #[test]
    fn interval_dispatch() {
        let cfg = ModelConfig::from_json(
            r#"{"domain":{"kind":"interval","a":0,"b":1},"V":{"form":"Zero"},"W":{"form":"Zero"},
                "gamma":0.5,"delta":0.0,"collar_s0":0.25}"#,
        )
        .unwrap();
        let rates = cfg.composed().unwrap();
        assert_eq!(rates.beta_path, CompositionPath::B1);
        assert_eq!(rates.alpha_path, CompositionPath::B2);
        assert!(rates.beta.is_some() && rates.alpha.is_some());
        assert_eq!(cfg.base_rates().unwrap().beta_w, Some(RateFunction::Constant { c: 2.0 }));
    }

    #[test]
    fn strip_dispatch() {
        let cfg = ModelConfig::from_json(
            r#"{"domain":{"kind":"strip","width":1,"circumference":1,"sticky":["lower"]},
                "V":{"form":"Zero"},"W":{"form":"Zero"},"gamma":1.0,"delta":1.0}"#,
        )
        .unwrap();
        let rates = cfg.composed().unwrap();
        assert_eq!(rates.beta_path, CompositionPath::E1);
        assert_eq!(rates.alpha_path, CompositionPath::E2);
    }

    #[test]
    fn half_line_regimes() {
        let primary = |tau: f64| {
            let r = half_line(tau).composed().unwrap().regime.unwrap();
            r.primary_beta().or(r.primary_alpha()).unwrap()
        };
        assert_eq!(primary(2.0), Regime::Hyperbounded);
        assert_eq!(primary(3.0), Regime::Ultrabounded(3.0));
        assert_eq!(primary(0.5), Regime::Subexponential(0.2));
        match primary(1.5) {
            Regime::UniformlyIntegrable(e) => assert!((e - 2.0 / 3.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_bad_json() {
        assert!(ModelConfig::from_json("{").is_err());
        assert!(ModelConfig::from_json(
            r#"{"domain":{"kind":"half_line"},"V":{"form":"Zero"},"W":{"form":"Zero"},"gamma":1,"delta":0}"#
        )
        .is_err());
    }
}
