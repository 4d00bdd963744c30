//! Flat `key=value` run configuration.
//!
//! One pair per line, `#` starts a comment, blank lines are ignored. Every
//! value is validated while parsing. [`RunConfig::to_text`] writes the
//! canonical form, which parses back to an equal config.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model1d::{cosine_init, StationaryOptions, ToyParams};
use crate::model3d::Params3D;
use crate::radial::RadialGrid;
use crate::reduced::{ReducedKind, ReducedParams};
use crate::report::Cadence;
use crate::spectral::CosineField1D;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelTag {
    Toy1d,
    Stationary1d,
    Full3d,
    Polar2d,
    Cone,
}

impl ModelTag {
    pub const ALL: [ModelTag; 5] = [
        ModelTag::Toy1d,
        ModelTag::Stationary1d,
        ModelTag::Full3d,
        ModelTag::Polar2d,
        ModelTag::Cone,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelTag::Toy1d => "toy1d",
            ModelTag::Stationary1d => "stationary1d",
            ModelTag::Full3d => "full3d",
            ModelTag::Polar2d => "polar2d",
            ModelTag::Cone => "cone",
        }
    }

    fn default_init(self) -> InitKind {
        match self {
            ModelTag::Toy1d | ModelTag::Stationary1d => InitKind::Cosine,
            ModelTag::Full3d => InitKind::Paper3d,
            ModelTag::Polar2d => InitKind::Paper2d,
            ModelTag::Cone => InitKind::PaperCone,
        }
    }
}

impl fmt::Display for ModelTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelTag::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown model `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InitKind {
    #[serde(rename = "cosine")]
    Cosine,
    #[serde(rename = "paper3d")]
    Paper3d,
    #[serde(rename = "paper2d")]
    Paper2d,
    #[serde(rename = "papercone")]
    PaperCone,
    #[serde(rename = "custom-coeffs")]
    CustomCoeffs,
}

impl InitKind {
    pub fn as_str(self) -> &'static str {
        match self {
            InitKind::Cosine => "cosine",
            InitKind::Paper3d => "paper3d",
            InitKind::Paper2d => "paper2d",
            InitKind::PaperCone => "papercone",
            InitKind::CustomCoeffs => "custom-coeffs",
        }
    }
}

impl FromStr for InitKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            InitKind::Cosine,
            InitKind::Paper3d,
            InitKind::Paper2d,
            InitKind::PaperCone,
            InitKind::CustomCoeffs,
        ]
        .into_iter()
        .find(|k| k.as_str() == s)
        .ok_or_else(|| Error::Config(format!("unknown init `{s}`")))
    }
}

/// A validated run description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub model: ModelTag,
    pub nu: f64,
    pub omega: f64,
    pub lambda: Option<f64>,
    pub mu1: Option<f64>,
    pub mu2: Option<f64>,
    pub n: usize,
    pub m: Option<usize>,
    pub r_max: Option<f64>,
    /// Time step, or the initial pseudo-time step for `stationary1d`.
    pub dt: Option<f64>,
    pub t_final: Option<f64>,
    pub init: InitKind,
    pub amplitude: f64,
    pub sign: f64,
    /// `c_1..c_N` for `custom-coeffs` (the zero mode is implied).
    pub coeffs: Option<Vec<f64>>,
    pub snapshot_every: usize,
    pub diag_every: usize,
    pub stop_on_onset: bool,
    pub nl_enabled: bool,
    pub threads: Option<usize>,
}

const KNOWN_KEYS: &[&str] = &[
    "model",
    "nu",
    "omega",
    "lambda",
    "mu1",
    "mu2",
    "N",
    "M",
    "r_max",
    "dt",
    "t_final",
    "init",
    "amplitude",
    "sign",
    "coeffs",
    "snapshot_every",
    "diag_every",
    "stop_on_onset",
    "nl_enabled",
    "threads",
];

fn required_keys(model: ModelTag) -> &'static [&'static str] {
    match model {
        ModelTag::Toy1d => &["nu", "omega", "lambda", "mu1", "mu2", "N", "dt", "t_final"],
        ModelTag::Stationary1d => &["nu", "omega", "N"],
        ModelTag::Full3d | ModelTag::Polar2d | ModelTag::Cone => &["nu", "omega", "N", "M", "r_max", "dt", "t_final"],
    }
}

struct Pairs(BTreeMap<String, (usize, String)>);

impl Pairs {
    fn raw(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(|(_, v)| v.as_str())
    }

    fn parse<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.0.get(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Config(format!("line {line}: cannot parse `{key}` value `{v}`"))),
        }
    }
}

fn range_error(key: &str, reason: &str) -> Error {
    Error::Config(format!("`{key}` {reason}"))
}

fn positive(key: &str, v: Option<f64>) -> Result<Option<f64>> {
    match v {
        Some(x) if !(x.is_finite() && x > 0.0) => Err(range_error(key, "must be positive and finite")),
        other => Ok(other),
    }
}

fn finite(key: &str, v: Option<f64>) -> Result<Option<f64>> {
    match v {
        Some(x) if !x.is_finite() => Err(range_error(key, "must be finite")),
        other => Ok(other),
    }
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Config(format!("`{key}` must be true or false, got `{v}`"))),
    }
}

/// Parses a config whose `model` key is mandatory.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_config_for(text, None)
}

/// Parses a config for `model`. The `model` key may then be omitted, but if
/// present it must agree.
pub fn parse_config_for(text: &str, model: Option<ModelTag>) -> Result<RunConfig> {
    let mut map = BTreeMap::new();
    let mut unknown = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key=value", i + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if !KNOWN_KEYS.contains(&k) {
            unknown.push(k.to_string());
            continue;
        }
        if map.insert(k.to_string(), (i + 1, v.to_string())).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key `{k}`", i + 1)));
        }
    }
    if !unknown.is_empty() {
        return Err(Error::Config(format!("unknown keys: {}", unknown.join(", "))));
    }
    let p = Pairs(map);

    let declared: Option<ModelTag> = p.raw("model").map(str::parse).transpose()?;
    let model = match (declared, model) {
        (Some(a), Some(b)) if a != b => {
            return Err(Error::Config(format!("config is for model `{a}`, not `{b}`")));
        }
        (Some(a), _) => a,
        (None, Some(b)) => b,
        (None, None) => return Err(Error::Config("missing required key `model`".into())),
    };
    let missing: Vec<&str> = required_keys(model)
        .iter()
        .copied()
        .filter(|k| p.raw(k).is_none())
        .collect();

    let nu: Option<f64> = p.parse("nu")?;
    if let Some(v) = nu {
        if !(v.is_finite() && v >= 0.0) {
            return Err(range_error("nu", "must be finite and non-negative"));
        }
    }
    let omega = positive("omega", p.parse("omega")?)?;
    let lambda = finite("lambda", p.parse("lambda")?)?;
    let mu1 = finite("mu1", p.parse("mu1")?)?;
    let mu2 = finite("mu2", p.parse("mu2")?)?;
    let n: Option<usize> = p.parse("N")?;
    if n == Some(0) {
        return Err(range_error("N", "must be at least 1"));
    }
    let m: Option<usize> = p.parse("M")?;
    if matches!(m, Some(v) if v < 4) {
        return Err(range_error("M", "must be at least 4"));
    }
    let r_max = positive("r_max", p.parse("r_max")?)?;
    let dt = positive("dt", p.parse("dt")?)?;
    let t_final = positive("t_final", p.parse("t_final")?)?;
    if !missing.is_empty() {
        return Err(Error::Config(format!("missing required keys: {}", missing.join(", "))));
    }

    let init = match p.raw("init") {
        Some(v) => v.parse()?,
        None => model.default_init(),
    };
    let allowed = match model {
        ModelTag::Toy1d | ModelTag::Stationary1d => {
            matches!(init, InitKind::Cosine | InitKind::CustomCoeffs)
        }
        ModelTag::Full3d => init == InitKind::Paper3d,
        ModelTag::Polar2d => init == InitKind::Paper2d,
        ModelTag::Cone => init == InitKind::PaperCone,
    };
    if !allowed {
        return Err(Error::Config(format!(
            "init `{}` does not apply to model `{model}`",
            init.as_str()
        )));
    }
    let amplitude = finite("amplitude", p.parse("amplitude")?)?.unwrap_or(1.0);
    let sign: f64 = p.parse("sign")?.unwrap_or(1.0);
    if sign != 1.0 && sign != -1.0 {
        return Err(range_error("sign", "must be 1 or -1"));
    }
    let n = n.expect("N is required for every model");
    let coeffs = match p.raw("coeffs") {
        None => None,
        Some(v) => {
            let vals = v
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::Config(format!("cannot parse `coeffs` value `{v}`")))?;
            if vals.len() != n || vals.iter().any(|x| !x.is_finite()) {
                return Err(range_error("coeffs", "must list N finite values c_1..c_N"));
            }
            Some(vals)
        }
    };
    if (init == InitKind::CustomCoeffs) != coeffs.is_some() {
        return Err(Error::Config(
            "`coeffs` is required by, and only allowed with, init=custom-coeffs".into(),
        ));
    }

    let snapshot_every: usize = p.parse("snapshot_every")?.unwrap_or(100);
    let diag_every: usize = p.parse("diag_every")?.unwrap_or(10);
    if snapshot_every == 0 {
        return Err(range_error("snapshot_every", "must be at least 1"));
    }
    if diag_every == 0 {
        return Err(range_error("diag_every", "must be at least 1"));
    }
    let stop_on_onset = p
        .raw("stop_on_onset")
        .map(|v| parse_bool("stop_on_onset", v))
        .transpose()?
        .unwrap_or(true);
    let nl_enabled = p
        .raw("nl_enabled")
        .map(|v| parse_bool("nl_enabled", v))
        .transpose()?
        .unwrap_or(true);
    let threads: Option<usize> = p.parse("threads")?;

    let cfg = RunConfig {
        model,
        nu: nu.expect("nu is required"),
        omega: omega.expect("omega is required"),
        lambda,
        mu1,
        mu2,
        n,
        m,
        r_max,
        dt,
        t_final,
        init,
        amplitude,
        sign,
        coeffs,
        snapshot_every,
        diag_every,
        stop_on_onset,
        nl_enabled,
        threads,
    };
    cfg.check_model()?;
    Ok(cfg)
}

impl RunConfig {
    /// Model-level validation beyond per-key ranges.
    fn check_model(&self) -> Result<()> {
        match self.model {
            ModelTag::Toy1d => self.toy_params()?.validate(),
            ModelTag::Stationary1d => {
                if self.nu <= 0.0 {
                    return Err(range_error("nu", "must be positive for stationary1d"));
                }
                Ok(())
            }
            ModelTag::Full3d => self.params_3d()?.validate(),
            ModelTag::Polar2d | ModelTag::Cone => self.reduced_params()?.validate(),
        }
    }

    pub fn cadence(&self) -> Cadence {
        Cadence {
            diag_every: self.diag_every,
            snapshot_every: self.snapshot_every,
            stop_on_onset: self.stop_on_onset,
        }
    }

    fn need<T: Copy>(v: Option<T>, key: &str) -> Result<T> {
        v.ok_or_else(|| Error::Config(format!("missing required key `{key}`")))
    }

    pub fn toy_params(&self) -> Result<ToyParams> {
        Ok(ToyParams {
            nu: self.nu,
            omega: self.omega,
            lambda: Self::need(self.lambda, "lambda")?,
            mu1: Self::need(self.mu1, "mu1")?,
            mu2: Self::need(self.mu2, "mu2")?,
            n: self.n,
            dt: Self::need(self.dt, "dt")?,
            t_final: Self::need(self.t_final, "t_final")?,
            nl_enabled: self.nl_enabled,
        })
    }

    pub fn stationary_options(&self) -> StationaryOptions {
        let mut opts = StationaryOptions::default();
        if let Some(dt) = self.dt {
            opts.dt = dt;
        }
        opts
    }

    /// Initial coefficients for the 1D models, scaled by `sign`.
    pub fn init_1d(&self) -> Result<CosineField1D> {
        let mut f = match self.init {
            InitKind::CustomCoeffs => {
                let mut c = vec![0.0];
                c.extend(self.coeffs.as_deref().unwrap_or_default());
                CosineField1D::new(self.omega, c)?
            }
            _ => cosine_init(self.omega, self.n, self.amplitude)?,
        };
        f.coeffs_mut().iter_mut().for_each(|v| *v *= self.sign);
        Ok(f)
    }

    fn grid(&self) -> Result<RadialGrid> {
        RadialGrid::new(Self::need(self.r_max, "r_max")?, Self::need(self.m, "M")?)
    }

    pub fn params_3d(&self) -> Result<Params3D> {
        Ok(Params3D {
            nu: self.nu,
            omega: self.omega,
            n: self.n,
            grid: self.grid()?,
            dt: Self::need(self.dt, "dt")?,
            t_final: Self::need(self.t_final, "t_final")?,
            init_sign: self.sign,
            nl_enabled: self.nl_enabled,
        })
    }

    pub fn reduced_params(&self) -> Result<ReducedParams> {
        let kind = match self.model {
            ModelTag::Polar2d => ReducedKind::Polar2d,
            ModelTag::Cone => ReducedKind::Cone,
            other => {
                return Err(Error::Config(format!(
                    "model `{other}` is not a single-angle radial model"
                )))
            }
        };
        Ok(ReducedParams {
            kind,
            nu: self.nu,
            omega: self.omega,
            n: self.n,
            grid: self.grid()?,
            dt: Self::need(self.dt, "dt")?,
            t_final: Self::need(self.t_final, "t_final")?,
            init_sign: self.sign,
            nl_enabled: self.nl_enabled,
        })
    }

    /// Canonical `key=value` text; parses back to `self`.
    pub fn to_text(&self) -> String {
        let mut out = Vec::new();
        let mut put = |k: &str, v: String| out.push(format!("{k}={v}"));
        put("model", self.model.to_string());
        put("nu", self.nu.to_string());
        put("omega", self.omega.to_string());
        for (k, v) in [("lambda", self.lambda), ("mu1", self.mu1), ("mu2", self.mu2)] {
            if let Some(v) = v {
                put(k, v.to_string());
            }
        }
        put("N", self.n.to_string());
        if let Some(m) = self.m {
            put("M", m.to_string());
        }
        for (k, v) in [("r_max", self.r_max), ("dt", self.dt), ("t_final", self.t_final)] {
            if let Some(v) = v {
                put(k, v.to_string());
            }
        }
        put("init", self.init.as_str().to_string());
        put("amplitude", self.amplitude.to_string());
        put("sign", self.sign.to_string());
        if let Some(c) = &self.coeffs {
            put("coeffs", c.iter().map(f64::to_string).collect::<Vec<_>>().join(","));
        }
        put("snapshot_every", self.snapshot_every.to_string());
        put("diag_every", self.diag_every.to_string());
        put("stop_on_onset", self.stop_on_onset.to_string());
        put("nl_enabled", self.nl_enabled.to_string());
        if let Some(t) = self.threads {
            put("threads", t.to_string());
        }
        out.join("\n") + "\n"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOY: &str = "model=toy1d\nnu=0.01\nomega=4\nlambda=-3\nmu1=0.5\nmu2=-1.5\nN=50\ndt=1e-4\nt_final=1.6";
    const FULL: &str = "model=full3d\nnu=0.02\nomega=4\nN=7\nM=73\nr_max=10\ndt=1e-4\nt_final=0.11\ninit=paper3d";

    #[test]
    fn toy_example_matches_blowup_params() {
        let cfg = parse_config(TOY).unwrap();
        assert_eq!(cfg.toy_params().unwrap(), ToyParams::blowup());
        assert_eq!(cfg.init, InitKind::Cosine);
    }

    #[test]
    fn full3d_example_matches_reference() {
        let cfg = parse_config(FULL).unwrap();
        assert_eq!(cfg.params_3d().unwrap(), Params3D::reference());
    }

    #[test]
    fn negative_nu_is_a_range_error() {
        let err = parse_config("model=toy1d\nnu=-1").unwrap_err().to_string();
        assert!(err.contains("nu"), "{err}");
    }

    #[test]
    fn unknown_keys_are_listed() {
        let err = parse_config(&format!("{TOY}\nfoo=1\nbar=2")).unwrap_err().to_string();
        assert!(err.contains("foo") && err.contains("bar"), "{err}");
    }

    #[test]
    fn unknown_model_and_missing_keys() {
        assert!(parse_config("model=navier").unwrap_err().to_string().contains("navier"));
        let err = parse_config("model=full3d\nnu=0.02").unwrap_err().to_string();
        assert!(err.contains("omega") && err.contains("r_max"), "{err}");
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = format!("# toy run\n\n{}  # trailing\n", TOY.replace('\n', "\n  "));
        assert_eq!(parse_config(&text).unwrap(), parse_config(TOY).unwrap());
    }

    #[test]
    fn echo_round_trips() {
        for text in [TOY, FULL] {
            let cfg = parse_config(text).unwrap();
            assert_eq!(parse_config(&cfg.to_text()).unwrap(), cfg);
        }
    }

    #[test]
    fn subcommand_model_must_agree() {
        assert!(parse_config_for(TOY, Some(ModelTag::Cone)).is_err());
        let body = TOY.replace("model=toy1d\n", "");
        assert_eq!(
            parse_config_for(&body, Some(ModelTag::Toy1d)).unwrap().model,
            ModelTag::Toy1d
        );
    }
}
