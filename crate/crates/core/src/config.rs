//! Flat `key = value` run configuration.
//!
//! One pair per line, `#` starts a comment. Coupling keys (`eta`, `kappa`,
//! `gamma`, `g_atom`) and `t_ints` accept comma-separated lists; numbers may
//! be written as fractions such as `1/8`. `G` is the unit of frequency, so
//! `g_coupling` may only be given as `1`.
//!
//! ```text
//! engine = bath
//! n_total = 500
//! omega = 100
//! delta = 20
//! eta = 2
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::params::{
    gamma_from_eta, gamma_from_kappa, g_from_kappa, kappa_from_collision_with, BathSpec,
    CollisionRateConvention, CollisionSpec, FrequencyLayout, MasterSpec, TimeGrid,
};

pub const DEFAULT_OMEGA: f64 = 100.0;
pub const DEFAULT_T_MAX: f64 = 5.0;
pub const DEFAULT_SAMPLES: usize = 500;
pub const DEFAULT_T_INT: f64 = 1e-3;
pub const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineChoice {
    Bath,
    Lindblad,
    Collision,
    All,
}

impl EngineChoice {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "bath" => Some(EngineChoice::Bath),
            "lindblad" => Some(EngineChoice::Lindblad),
            "collision" => Some(EngineChoice::Collision),
            "all" => Some(EngineChoice::All),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            EngineChoice::Bath => "bath",
            EngineChoice::Lindblad => "lindblad",
            EngineChoice::Collision => "collision",
            EngineChoice::All => "all",
        }
    }

    fn uses_bath(&self) -> bool {
        matches!(self, EngineChoice::Bath | EngineChoice::All)
    }

    fn uses_lindblad(&self) -> bool {
        matches!(self, EngineChoice::Lindblad | EngineChoice::All)
    }

    fn uses_collision(&self) -> bool {
        matches!(self, EngineChoice::Collision | EngineChoice::All)
    }
}

/// How the dissipation strength was specified.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrengthKey {
    /// `κ = ηG`, translated into `Γ` and `g` through the parameter maps.
    Eta,
    Kappa,
    /// Bath coupling `Γ` (bath engine only).
    Gamma,
    /// Atom coupling `g` (collision engine only).
    GAtom,
}

impl StrengthKey {
    pub fn as_str(&self) -> &'static str {
        match self {
            StrengthKey::Eta => "eta",
            StrengthKey::Kappa => "kappa",
            StrengthKey::Gamma => "gamma",
            StrengthKey::GAtom => "g_atom",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LindbladSolver {
    Closed,
    Rk4,
}

/// A validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub engine: EngineChoice,
    pub strength_key: StrengthKey,
    pub strengths: Vec<f64>,
    pub omega: f64,
    pub t_max: f64,
    pub samples: usize,
    pub n_total: Option<usize>,
    pub delta: Option<f64>,
    pub layout: FrequencyLayout,
    pub seed: u64,
    pub solver: LindbladSolver,
    pub dt: Option<f64>,
    pub t_int: f64,
    pub n_collisions: Option<usize>,
    pub rate_convention: CollisionRateConvention,
    pub t_ints: Vec<f64>,
    pub output: Option<PathBuf>,
}

const COMMON_KEYS: &[&str] = &["engine", "omega", "g_coupling", "t_max", "samples", "output"];
const BATH_KEYS: &[&str] = &["n_total", "delta", "layout", "seed"];
const LINDBLAD_KEYS: &[&str] = &["solver", "dt"];
const COLLISION_KEYS: &[&str] = &["t_int", "n_collisions", "rate_convention", "t_ints"];
const STRENGTH_KEYS: &[&str] = &["eta", "kappa", "gamma", "g_atom"];

#[derive(Debug, Clone)]
struct Entry {
    line: usize,
    value: String,
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let entries = tokenize(text)?;
    Parsed { entries }.build()
}

fn tokenize(text: &str) -> Result<BTreeMap<String, Entry>> {
    let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| Error::config(Some(line), format!("expected `key = value`, got `{content}`")))?;
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() {
            return Err(Error::config(Some(line), "missing key before `=`"));
        }
        if value.is_empty() {
            return Err(Error::config(Some(line), format!("missing value for `{key}`")));
        }
        let known = COMMON_KEYS
            .iter()
            .chain(BATH_KEYS)
            .chain(LINDBLAD_KEYS)
            .chain(COLLISION_KEYS)
            .chain(STRENGTH_KEYS)
            .any(|k| *k == key);
        if !known {
            return Err(Error::config(Some(line), format!("unknown key `{key}`")));
        }
        if let Some(prev) = entries.get(key) {
            return Err(Error::config(
                Some(line),
                format!("duplicate key `{key}` (first set on line {})", prev.line),
            ));
        }
        entries.insert(
            key.to_string(),
            Entry {
                line,
                value: value.to_string(),
            },
        );
    }
    Ok(entries)
}

fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((n, d)) => n.trim().parse::<f64>().ok()? / d.trim().parse::<f64>().ok()?,
        None => s.parse::<f64>().ok()?,
    };
    v.is_finite().then_some(v)
}

struct Parsed {
    entries: BTreeMap<String, Entry>,
}

impl Parsed {
    fn line(&self, key: &str) -> Option<usize> {
        self.entries.get(key).map(|e| e.line)
    }

    fn raw(&self, key: &str) -> Option<&Entry> {
        self.entries.get(key)
    }

    fn float(&self, key: &str) -> Result<Option<f64>> {
        match self.raw(key) {
            None => Ok(None),
            Some(e) => parse_number(&e.value).map(Some).ok_or_else(|| {
                Error::config(Some(e.line), format!("`{key}` expects a number, got `{}`", e.value))
            }),
        }
    }

    fn integer<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some(e) => e.value.parse::<T>().map(Some).map_err(|_| {
                Error::config(
                    Some(e.line),
                    format!("`{key}` expects a non-negative integer, got `{}`", e.value),
                )
            }),
        }
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.raw(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .split(',')
                .map(|item| {
                    parse_number(item).ok_or_else(|| {
                        Error::config(
                            Some(e.line),
                            format!("`{key}` expects numbers, got `{}`", item.trim()),
                        )
                    })
                })
                .collect::<Result<Vec<f64>>>()
                .map(Some),
        }
    }

    fn reject_unless(&self, allowed: bool, keys: &[&str], engine: EngineChoice) -> Result<()> {
        if allowed {
            return Ok(());
        }
        for key in keys {
            if let Some(line) = self.line(key) {
                return Err(Error::config(
                    Some(line),
                    format!("key `{key}` does not apply to engine `{}`", engine.as_str()),
                ));
            }
        }
        Ok(())
    }

    fn build(self) -> Result<RunConfig> {
        let engine_entry = self
            .raw("engine")
            .ok_or_else(|| Error::config(None, "missing required key `engine`"))?;
        let engine = EngineChoice::parse(&engine_entry.value).ok_or_else(|| {
            Error::config(
                Some(engine_entry.line),
                format!(
                    "`engine` must be one of bath, lindblad, collision, all; got `{}`",
                    engine_entry.value
                ),
            )
        })?;

        self.reject_unless(engine.uses_bath(), BATH_KEYS, engine)?;
        self.reject_unless(engine.uses_lindblad(), LINDBLAD_KEYS, engine)?;
        self.reject_unless(engine.uses_collision(), COLLISION_KEYS, engine)?;
        self.reject_unless(engine == EngineChoice::Bath, &["gamma"], engine)?;
        self.reject_unless(engine == EngineChoice::Collision, &["g_atom"], engine)?;

        // Values and per-key invariants, each reported on its own line.
        if let Some(g) = self.float("g_coupling")? {
            if g != 1.0 {
                return Err(Error::config(
                    self.line("g_coupling"),
                    format!("`g_coupling` is the frequency unit and must be 1, got {g}"),
                ));
            }
        }
        let omega = self.float("omega")?.unwrap_or(DEFAULT_OMEGA);
        let t_max = self.float("t_max")?.unwrap_or(DEFAULT_T_MAX);
        if !(t_max > 0.0) {
            return Err(Error::config(self.line("t_max"), format!("`t_max` must be > 0, got {t_max}")));
        }
        let samples = self.integer::<usize>("samples")?.unwrap_or(DEFAULT_SAMPLES);
        if samples == 0 {
            return Err(Error::config(self.line("samples"), "`samples` must be at least 1"));
        }

        let layout = match self.raw("layout") {
            None => FrequencyLayout::PairedEquispaced,
            Some(e) => match e.value.as_str() {
                "paired" => FrequencyLayout::PairedEquispaced,
                "random" => FrequencyLayout::RandomUniform,
                other => {
                    return Err(Error::config(
                        Some(e.line),
                        format!("`layout` must be `paired` or `random`, got `{other}`"),
                    ))
                }
            },
        };
        let seed = self.integer::<u64>("seed")?;
        if seed.is_some() && layout != FrequencyLayout::RandomUniform {
            return Err(Error::config(
                self.line("seed"),
                "`seed` only applies to `layout = random`",
            ));
        }
        let n_total = self.integer::<usize>("n_total")?;
        if let Some(n) = n_total {
            if n < 4 {
                return Err(Error::config(
                    self.line("n_total"),
                    format!("`n_total` must be at least 4, got {n}"),
                ));
            }
            if layout == FrequencyLayout::PairedEquispaced && (n - 2) % 2 != 0 {
                return Err(Error::config(
                    self.line("n_total"),
                    format!(
                        "odd environment count {} (n_total = {n}) cannot be split into +/- pairs \
                         for the paired layout",
                        n - 2
                    ),
                ));
            }
        }
        let delta = self.float("delta")?;
        if let Some(d) = delta {
            if !(d > 0.0) {
                return Err(Error::config(self.line("delta"), format!("`delta` must be > 0, got {d}")));
            }
        }

        let solver = match self.raw("solver") {
            None => LindbladSolver::Closed,
            Some(e) => match e.value.as_str() {
                "closed" => LindbladSolver::Closed,
                "rk4" => LindbladSolver::Rk4,
                other => {
                    return Err(Error::config(
                        Some(e.line),
                        format!("`solver` must be `closed` or `rk4`, got `{other}`"),
                    ))
                }
            },
        };
        let dt = self.float("dt")?;
        if let Some(step) = dt {
            if !(step > 0.0) {
                return Err(Error::config(self.line("dt"), format!("`dt` must be > 0, got {step}")));
            }
            if solver != LindbladSolver::Rk4 {
                return Err(Error::config(self.line("dt"), "`dt` only applies to `solver = rk4`"));
            }
        }

        let t_int = self.float("t_int")?.unwrap_or(DEFAULT_T_INT);
        if !(t_int > 0.0) {
            return Err(Error::config(self.line("t_int"), format!("`t_int` must be > 0, got {t_int}")));
        }
        let n_collisions = self.integer::<usize>("n_collisions")?;
        if n_collisions == Some(0) {
            return Err(Error::config(self.line("n_collisions"), "`n_collisions` must be positive"));
        }
        let rate_convention = match self.raw("rate_convention") {
            None => CollisionRateConvention::HalfSquare,
            Some(e) => match e.value.as_str() {
                "half" => CollisionRateConvention::HalfSquare,
                "full" => CollisionRateConvention::FullSquare,
                other => {
                    return Err(Error::config(
                        Some(e.line),
                        format!("`rate_convention` must be `half` or `full`, got `{other}`"),
                    ))
                }
            },
        };
        let t_ints = self.list("t_ints")?.unwrap_or_default();
        if t_ints.iter().any(|t| !(*t > 0.0)) {
            return Err(Error::config(self.line("t_ints"), "`t_ints` entries must be > 0"));
        }

        // Exactly one strength key.
        let present: Vec<&str> = STRENGTH_KEYS
            .iter()
            .copied()
            .filter(|k| self.entries.contains_key(*k))
            .collect();
        let strength_key = match present.as_slice() {
            [] => {
                return Err(Error::config(
                    None,
                    "missing dissipation strength: give one of `eta`, `kappa`, `gamma`, `g_atom`",
                ))
            }
            [one] => match *one {
                "eta" => StrengthKey::Eta,
                "kappa" => StrengthKey::Kappa,
                "gamma" => StrengthKey::Gamma,
                _ => StrengthKey::GAtom,
            },
            [first, second, ..] => {
                return Err(Error::config(
                    self.line(second),
                    format!("`{first}` and `{second}` are mutually exclusive"),
                ))
            }
        };
        let strengths = self.list(strength_key.as_str())?.unwrap_or_default();
        if let Some(v) = strengths.iter().find(|v| !(**v >= 0.0)) {
            return Err(Error::config(
                self.line(strength_key.as_str()),
                format!("`{}` must be >= 0, got {v}", strength_key.as_str()),
            ));
        }

        // Required keys.
        if engine.uses_bath() {
            for key in ["n_total", "delta"] {
                if !self.entries.contains_key(key) {
                    return Err(Error::config(
                        None,
                        format!("missing required key `{key}` for engine `{}`", engine.as_str()),
                    ));
                }
            }
        }

        let output = self.raw("output").map(|e| PathBuf::from(&e.value));

        Ok(RunConfig {
            engine,
            strength_key,
            strengths,
            omega,
            t_max,
            samples,
            n_total,
            delta,
            layout,
            seed: seed.unwrap_or(DEFAULT_SEED),
            solver,
            dt,
            t_int,
            n_collisions,
            rate_convention,
            t_ints,
            output,
        })
    }
}

impl RunConfig {
    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::uniform(self.t_max, self.samples)
    }

    /// Damping rate `κ` (units of `G`) that strength `value` corresponds to.
    pub fn kappa_of(&self, value: f64) -> Result<f64> {
        match self.strength_key {
            StrengthKey::Eta | StrengthKey::Kappa => Ok(value),
            StrengthKey::Gamma => crate::params::kappa_from_gamma(value, self.require_delta()?),
            StrengthKey::GAtom => kappa_from_collision_with(value, self.t_int, self.rate_convention),
        }
    }

    fn require_delta(&self) -> Result<f64> {
        self.delta
            .ok_or_else(|| Error::config(None, "missing required key `delta`"))
    }

    pub fn bath_spec(&self, value: f64) -> Result<BathSpec> {
        let n_total = self
            .n_total
            .ok_or_else(|| Error::config(None, "missing required key `n_total`"))?;
        let delta = self.require_delta()?;
        let gamma = match self.strength_key {
            StrengthKey::Gamma => value,
            StrengthKey::Eta => gamma_from_eta(value, delta, 1.0)?,
            _ => gamma_from_kappa(self.kappa_of(value)?, delta)?,
        };
        Ok(BathSpec::paired(n_total, self.omega, delta, gamma).with_layout(self.layout, self.seed))
    }

    pub fn master_spec(&self, value: f64) -> Result<MasterSpec> {
        Ok(MasterSpec::new(self.kappa_of(value)?, self.omega))
    }

    pub fn collision_spec(&self, value: f64) -> Result<CollisionSpec> {
        let g_atom = match self.strength_key {
            StrengthKey::GAtom => value,
            _ => {
                let kappa = self.kappa_of(value)?;
                match self.rate_convention {
                    CollisionRateConvention::HalfSquare => g_from_kappa(kappa, self.t_int)?,
                    CollisionRateConvention::FullSquare => (kappa / self.t_int).sqrt(),
                }
            }
        };
        let n = self
            .n_collisions
            .unwrap_or_else(|| ((self.t_max / self.t_int).round() as usize).max(1));
        Ok(CollisionSpec::new(g_atom, self.t_int, n, self.omega))
    }
}
