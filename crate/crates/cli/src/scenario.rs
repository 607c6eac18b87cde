//! Scenario files: one TOML document describing one computation.

use std::fmt;
use std::path::Path;

use reebkit::certify::TheoremId;
use reebkit::geometry::{ClassOrder, FactorSpec, HomotopyClass, ModelKind};
use serde::{Deserialize, Deserializer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Spectrum,
    Constellation,
    Certify,
    Profile,
    Plug,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Command::Spectrum => "spectrum",
            Command::Constellation => "constellation",
            Command::Certify => "certify",
            Command::Profile => "profile",
            Command::Plug => "plug",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub command: Command,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub model: Option<ModelKind>,
    #[serde(default)]
    pub factor: Option<FactorSpec>,
    #[serde(default, deserialize_with = "class_opt")]
    pub class: Option<HomotopyClass>,
    /// Constellation period T.
    #[serde(default)]
    pub t: Option<f64>,
    /// Period cap of the analytic spectrum.
    #[serde(default)]
    pub cap: Option<f64>,
    /// Integrator tolerance.
    #[serde(default)]
    pub tol: Option<f64>,
    /// Grid used to enclose the extrema of the conformal factor.
    #[serde(default)]
    pub factor_grid: Option<usize>,
    #[serde(default)]
    pub spectrum: SpectrumSection,
    #[serde(default)]
    pub theorem: Option<TheoremSection>,
    #[serde(default)]
    pub scan: ScanSection,
    #[serde(default)]
    pub profile: ProfileSection,
    #[serde(default)]
    pub plug: Option<PlugSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumMode {
    #[default]
    Analytic,
    Numeric,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    #[serde(default)]
    pub mode: SpectrumMode,
    /// Period window of a numeric scan.
    #[serde(default)]
    pub window: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NondegeneracyMode {
    #[default]
    Assume,
    Sample,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoremSection {
    #[serde(deserialize_with = "theorem_id")]
    pub id: TheoremId,
    #[serde(default)]
    pub filled: bool,
    /// Katok ε.
    #[serde(default)]
    pub epsilon: Option<f64>,
    /// Complex dimension for the Katok bound.
    #[serde(default)]
    pub n: Option<usize>,
    /// Prequantization bundle data.
    #[serde(default)]
    pub dim_q: Option<usize>,
    #[serde(default, deserialize_with = "order_opt")]
    pub order: Option<ClassOrder>,
    #[serde(default)]
    pub primitive: Option<bool>,
    /// [min f, max f] when no model factor is given.
    #[serde(default)]
    pub f_range: Option<[f64; 2]>,
    #[serde(default)]
    pub cross_validate: bool,
    #[serde(default)]
    pub nondegeneracy: NondegeneracyMode,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    #[serde(default)]
    pub seeds_per_dim: Option<usize>,
    #[serde(default)]
    pub max_seeds: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSection {
    #[serde(default)]
    pub kappa0: f64,
    #[serde(default)]
    pub kappa1: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlugSection {
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub c1: Option<f64>,
    #[serde(default)]
    pub c2: Option<f64>,
    #[serde(default = "three")]
    pub dimension: usize,
    /// Intervals on the s-axis of the Gray grid.
    #[serde(default)]
    pub s_grid: Option<usize>,
}

fn three() -> usize {
    3
}

fn class_opt<'de, D: Deserializer<'de>>(d: D) -> Result<Option<HomotopyClass>, D::Error> {
    let s = String::deserialize(d)?;
    s.parse().map(Some).map_err(serde::de::Error::custom)
}

fn theorem_id<'de, D: Deserializer<'de>>(d: D) -> Result<TheoremId, D::Error> {
    let s = String::deserialize(d)?;
    TheoremId::parse(&s).ok_or_else(|| {
        serde::de::Error::custom(format!(
            "unknown theorem `{s}` (expected sphere, prequantization, persist, t3, s2xs1, s3, flat-torus, katok or fast)"
        ))
    })
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OrderValue {
    Count(u64),
    Word(String),
}

fn order_opt<'de, D: Deserializer<'de>>(d: D) -> Result<Option<ClassOrder>, D::Error> {
    match OrderValue::deserialize(d)? {
        OrderValue::Count(0) => Err(serde::de::Error::custom("order must be positive")),
        OrderValue::Count(m) => Ok(Some(ClassOrder::Finite(m))),
        OrderValue::Word(w) if w == "infinite" => Ok(Some(ClassOrder::Infinite)),
        OrderValue::Word(w) => {
            Err(serde::de::Error::custom(format!("order must be a positive integer or \"infinite\", got `{w}`")))
        }
    }
}

/// A scenario that failed to parse or is missing a field its command needs.
#[derive(Debug, Clone)]
pub struct ParseError {
    pub file: String,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.file, self.message)
    }
}

impl Scenario {
    /// A scenario with only its command set.
    pub fn empty(command: Command) -> Self {
        Self {
            command,
            name: None,
            model: None,
            factor: None,
            class: None,
            t: None,
            cap: None,
            tol: None,
            factor_grid: None,
            spectrum: SpectrumSection::default(),
            theorem: None,
            scan: ScanSection::default(),
            profile: ProfileSection::default(),
            plug: None,
        }
    }

    pub fn parse(text: &str, file: &str) -> Result<Self, ParseError> {
        let s: Scenario = toml::from_str(text).map_err(|e| ParseError { file: file.into(), message: e.to_string() })?;
        s.check().map_err(|message| ParseError { file: file.into(), message })?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, ParseError> {
        let file = path.display().to_string();
        let text = std::fs::read_to_string(path)
            .map_err(|e| ParseError { file: file.clone(), message: format!("cannot read: {e}") })?;
        Self::parse(&text, &file)
    }

    /// Fields each command needs, reported by name.
    fn check(&self) -> Result<(), String> {
        let need = |ok: bool, field: &str| {
            if ok {
                Ok(())
            } else {
                Err(format!("field `{field}` is required for command `{}`", self.command))
            }
        };
        let positive = |v: Option<f64>, field: &str| match v {
            Some(x) if !(x > 0.0 && x.is_finite()) => Err(format!("field `{field}` must be positive, got {x}")),
            _ => Ok(()),
        };
        positive(self.tol, "tol")?;
        positive(self.cap, "cap")?;
        positive(self.t, "t")?;
        match self.command {
            Command::Spectrum => {
                need(self.model.is_some(), "model")?;
                if self.spectrum.mode == SpectrumMode::Numeric {
                    need(self.spectrum.window.is_some(), "spectrum.window")?;
                }
            }
            Command::Constellation | Command::Profile => {
                need(self.model.is_some(), "model")?;
                need(self.t.is_some(), "t")?;
            }
            Command::Certify => {
                let th = self
                    .theorem
                    .as_ref()
                    .ok_or_else(|| "section `[theorem]` is required for command `certify`".to_string())?;
                match th.id {
                    TheoremId::ElSphere => need(self.model.is_some(), "model")?,
                    TheoremId::Prequantization => {
                        need(th.dim_q.is_some(), "theorem.dim_q")?;
                        need(th.order.is_some(), "theorem.order")?;
                        need(th.f_range.is_some() || self.model.is_some(), "theorem.f_range")?;
                    }
                    TheoremId::Katok => {
                        need(th.epsilon.is_some(), "theorem.epsilon")?;
                        need(th.n.is_some(), "theorem.n")?;
                        need(th.f_range.is_some(), "theorem.f_range")?;
                    }
                    TheoremId::Fast => need(self.plug.is_some(), "plug")?,
                    _ => {
                        need(self.model.is_some(), "model")?;
                        need(self.t.is_some(), "t")?;
                    }
                }
                if let Some([lo, hi]) = th.f_range {
                    if !(lo > 0.0 && hi >= lo) {
                        return Err(format!("field `theorem.f_range` must satisfy 0 < min ≤ max, got [{lo}, {hi}]"));
                    }
                }
            }
            Command::Plug => {
                let p =
                    self.plug.as_ref().ok_or_else(|| "section `[plug]` is required for command `plug`".to_string())?;
                let direct = p.epsilon.is_some() && p.delta.is_some();
                let targets = p.c1.is_some() && p.c2.is_some();
                if !direct && !targets {
                    return Err("section `[plug]` needs either `epsilon` and `delta` or `c1` and `c2`".into());
                }
            }
        }
        if let Some(TheoremSection { id: TheoremId::Fast, .. }) = &self.theorem {
            let p = self.plug.as_ref().expect("checked above");
            need(p.c1.is_some() && p.c2.is_some(), "plug.c1 and plug.c2")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_persist_scenario() {
        let s = Scenario::parse(
            r#"
command = "certify"
class = "(1,0,0)"
t = 1.0
[model]
kind = "torus3"
k = 2
[factor]
preset = "cos-bump"
amplitude = 0.2
[theorem]
id = "persist"
"#,
            "x.toml",
        )
        .unwrap();
        assert_eq!(s.class, Some(HomotopyClass::winding(vec![1, 0, 0])));
        assert_eq!(s.theorem.unwrap().id, TheoremId::Persist);
    }

    #[test]
    fn malformed_class_reports_its_line() {
        let e = Scenario::parse("command = \"constellation\"\nt = 1.0\nclass = \"(1,x,0)\"\n", "bad.toml").unwrap_err();
        assert!(e.message.contains("line 3"), "{}", e.message);
        assert!(e.message.contains("class"), "{}", e.message);
    }

    #[test]
    fn missing_fields_are_named() {
        let e =
            Scenario::parse("command = \"constellation\"\n[model]\nkind = \"sphere\"\nn = 2\n", "m.toml").unwrap_err();
        assert!(e.message.contains("`t`"), "{}", e.message);
        let e = Scenario::parse("command = \"plug\"\n[plug]\nepsilon = 0.05\n", "p.toml").unwrap_err();
        assert!(e.message.contains("c1"), "{}", e.message);
        let e = Scenario::parse("command = \"certify\"\n[theorem]\nid = \"nope\"\n", "t.toml").unwrap_err();
        assert!(e.message.contains("unknown theorem"), "{}", e.message);
    }
}
