//! Run configuration: JSON file, command-line flags and defaults, merged in
//! that order of increasing precedence (flags > file > defaults).

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};

use phasekit::direct::Method;
use phasekit::numerics::IntegratorConfig;
use phasekit::potentials::{Model, PotentialSpec, Tabulated, MAX_ELL};
use phasekit::Context64;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Flags shared by every subcommand.
#[derive(Args, Debug, Clone, Default)]
pub struct CommonArgs {
    /// JSON configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// zero | square_well:V0,a | exponential:V0,a | gaussian:V0,a | tabulated:PATH
    #[arg(long, allow_hyphen_values = true)]
    pub potential: Option<String>,
    /// Long-range part of the potential, same syntax as --potential.
    #[arg(long = "long-range", allow_hyphen_values = true)]
    pub long_range: Option<String>,
    #[arg(long)]
    pub ell: Option<u32>,
    /// One or more comma-separated energies.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, conflicts_with = "energy_range")]
    pub energy: Option<Vec<f64>>,
    /// min:max:count[:log]
    #[arg(long = "energy-range", allow_hyphen_values = true)]
    pub energy_range: Option<String>,
    /// Method tag or "all".
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub rmax: Option<f64>,
    /// abs[,rel]
    #[arg(long, allow_hyphen_values = true)]
    pub tol: Option<String>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Run the energy sweep on one thread.
    #[arg(long)]
    pub serial: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodSel {
    All,
    One(Method),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub potential: PotentialSpec<f64>,
    pub potential_text: String,
    pub long_range_text: Option<String>,
    pub ell: u32,
    pub energies: Vec<f64>,
    pub method: MethodSel,
    pub r_max: Option<f64>,
    pub tol: IntegratorConfig<f64>,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub concurrent: bool,
}

impl RunConfig {
    /// Defaults for everything but the problem itself.
    pub fn new(potential: PotentialSpec<f64>, ell: u32, energies: Vec<f64>) -> Self {
        let potential_text = describe(&potential.model);
        let long_range_text = potential.long_range.as_ref().map(describe);
        Self {
            potential,
            potential_text,
            long_range_text,
            ell,
            energies,
            method: MethodSel::All,
            r_max: None,
            tol: IntegratorConfig::default(),
            output: None,
            format: Format::Csv,
            concurrent: true,
        }
    }

    pub fn context(&self, energy: f64) -> phasekit::Result<Context64> {
        let ctx = Context64::new(self.potential.clone(), self.ell, energy)?;
        match self.r_max {
            Some(r) => ctx.with_r_max(r),
            None => Ok(ctx),
        }
    }

    /// Methods to run; "all" leaves out those that do not apply to `ℓ > 0`.
    pub fn methods(&self) -> Vec<Method> {
        match self.method {
            MethodSel::One(m) => vec![m],
            MethodSel::All => Method::ALL.into_iter().filter(|&m| self.ell == 0 || !ell_zero_only(m)).collect(),
        }
    }

    /// The resolved configuration as written into output headers. Execution
    /// details (output path, threading) are left out so that equivalent runs
    /// produce identical files.
    pub fn echo(&self) -> Value {
        json!({
            "potential": self.potential_text,
            "long_range": self.long_range_text,
            "ell": self.ell,
            "energies": self.energies,
            "method": match self.method {
                MethodSel::All => "all",
                MethodSel::One(m) => m.as_str(),
            },
            "r_max": self.r_max,
            "tolerances": { "abs": self.tol.abs_tol, "rel": self.tol.rel_tol },
        })
    }
}

pub fn ell_zero_only(m: Method) -> bool {
    matches!(m, Method::Jwkb | Method::VpaLocal | Method::Variational)
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    potential: Option<PotentialEntry>,
    long_range: Option<PotentialEntry>,
    ell: Option<u32>,
    energies: Option<Value>,
    method: Option<String>,
    r_max: Option<f64>,
    tolerances: Option<TolConfig>,
    output: Option<PathBuf>,
    format: Option<Format>,
    concurrent: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
enum PotentialEntry {
    Zero,
    SquareWell { depth: f64, radius: f64 },
    Exponential { strength: f64, range: f64 },
    Gaussian { strength: f64, width: f64 },
    Tabulated { path: PathBuf },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TolConfig {
    abs: Option<f64>,
    rel: Option<f64>,
    max_steps: Option<usize>,
    max_step: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EnergyRange {
    min: f64,
    max: f64,
    count: usize,
    #[serde(default)]
    spacing: Spacing,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Spacing {
    #[default]
    Linear,
    Log,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl PotentialEntry {
    fn into_model(self, base: &Path) -> CliResult<Model<f64>> {
        Ok(match self {
            PotentialEntry::Zero => Model::Zero,
            PotentialEntry::SquareWell { depth, radius } => Model::square_well(depth, radius),
            PotentialEntry::Exponential { strength, range } => Model::exponential(strength, range),
            PotentialEntry::Gaussian { strength, width } => Model::gaussian(strength, width),
            PotentialEntry::Tabulated { path } => load_table(&base.join(path))?,
        })
    }
}

fn load_table(path: &Path) -> CliResult<Model<f64>> {
    Tabulated::from_path(path).map(Model::Tabulated).map_err(|e| config_err(e.to_string()))
}

/// Parses `name[:params]` as accepted by `--potential`.
pub fn parse_potential(text: &str) -> CliResult<Model<f64>> {
    let (name, params) = text.split_once(':').unwrap_or((text, ""));
    let two = |field: &str| -> CliResult<(f64, f64)> {
        let vals: Vec<f64> = params
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| config_err(format!("potential: {field} parameters '{params}': {e}")))?;
        match vals[..] {
            [a, b] => Ok((a, b)),
            _ => Err(config_err(format!("potential: {field} takes two parameters, got '{params}'"))),
        }
    };
    match name {
        "zero" if params.is_empty() => Ok(Model::Zero),
        "square_well" | "square" => two(name).map(|(v, a)| Model::square_well(v, a)),
        "exponential" | "exp" => two(name).map(|(v, a)| Model::exponential(v, a)),
        "gaussian" | "gauss" => two(name).map(|(v, a)| Model::gaussian(v, a)),
        "tabulated" | "table" if !params.is_empty() => load_table(Path::new(params)),
        _ => Err(config_err(format!("potential: cannot parse '{text}'"))),
    }
}

/// Short text form of a model, the inverse of [`parse_potential`] for the
/// analytic models.
pub fn describe(model: &Model<f64>) -> String {
    match model {
        Model::Zero => "zero".into(),
        Model::SquareWell { depth, radius } => format!("square_well:{depth},{radius}"),
        Model::Exponential { strength, range } => format!("exponential:{strength},{range}"),
        Model::Gaussian { strength, width } => format!("gaussian:{strength},{width}"),
        Model::Tabulated(t) => format!("tabulated:{} nodes to r = {}", t.trace().len(), t.last_radius()),
    }
}

/// Parses `min:max:count[:log]`.
pub fn parse_energy_range(text: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || config_err(format!("energy-range: expected min:max:count[:log], got '{text}'"));
    if !(3..=4).contains(&parts.len()) {
        return Err(bad());
    }
    let min: f64 = parts[0].parse().map_err(|_| bad())?;
    let max: f64 = parts[1].parse().map_err(|_| bad())?;
    let count: usize = parts[2].parse().map_err(|_| bad())?;
    let spacing = match parts.get(3) {
        None | Some(&"lin") | Some(&"linear") => Spacing::Linear,
        Some(&"log") => Spacing::Log,
        Some(_) => return Err(bad()),
    };
    energy_grid(min, max, count, spacing, "energy-range")
}

fn energy_grid(min: f64, max: f64, count: usize, spacing: Spacing, field: &str) -> CliResult<Vec<f64>> {
    if count == 0 {
        return Err(config_err(format!("{field}: count must be at least 1")));
    }
    if !(min > 0.0) || !(max >= min) || !max.is_finite() {
        return Err(config_err(format!("{field}: need 0 < min <= max, got min = {min}, max = {max}")));
    }
    if count == 1 {
        return Ok(vec![min]);
    }
    let n = (count - 1) as f64;
    Ok((0..count)
        .map(|i| {
            let t = i as f64 / n;
            match spacing {
                Spacing::Linear => min + (max - min) * t,
                Spacing::Log => (min.ln() + (max.ln() - min.ln()) * t).exp(),
            }
        })
        .collect())
}

/// Parses `abs[,rel]`; `rel` defaults to `abs`.
pub fn parse_tol(text: &str) -> CliResult<(f64, f64)> {
    let vals: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| config_err(format!("tol: '{text}': {e}")))?;
    match vals[..] {
        [a] => Ok((a, a)),
        [a, r] => Ok((a, r)),
        _ => Err(config_err(format!("tol: expected abs[,rel], got '{text}'"))),
    }
}

fn file_energies(v: Value) -> CliResult<Vec<f64>> {
    match v {
        Value::Array(_) => {
            serde_json::from_value(v).map_err(|e| config_err(format!("energies: expected a list of numbers: {e}")))
        }
        Value::Object(_) => {
            let r: EnergyRange = serde_json::from_value(v).map_err(|e| config_err(format!("energies: {e}")))?;
            energy_grid(r.min, r.max, r.count, r.spacing, "energies")
        }
        Value::Number(n) => Ok(vec![n.as_f64().unwrap_or(f64::NAN)]),
        _ => Err(config_err("energies: expected a number, a list or {min, max, count, spacing}")),
    }
}

fn read_file(path: &Path) -> CliResult<FileConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))
}

/// Merges flags over the file over defaults and validates the result.
pub fn resolve(args: &CommonArgs) -> CliResult<RunConfig> {
    let (file, base) = match &args.config {
        Some(p) => (read_file(p)?, p.parent().map(Path::to_path_buf).unwrap_or_default()),
        None => (FileConfig::default(), PathBuf::new()),
    };

    let short = match (&args.potential, file.potential) {
        (Some(text), _) => parse_potential(text)?,
        (None, Some(entry)) => entry.into_model(&base)?,
        (None, None) => return Err(config_err("potential: missing (use --potential or the config file)")),
    };
    let long = match (&args.long_range, file.long_range) {
        (Some(text), _) => Some(parse_potential(text)?),
        (None, Some(entry)) => Some(entry.into_model(&base)?),
        (None, None) => None,
    };
    let mut spec = PotentialSpec::new(short);
    if let Some(l) = long {
        spec = spec.with_long_range(l);
    }
    spec.validate().map_err(|e| config_err(format!("potential: {e}")))?;

    let ell = args.ell.or(file.ell).unwrap_or(0);
    if ell > MAX_ELL {
        return Err(config_err(format!("ell: must be at most {MAX_ELL}, got {ell}")));
    }

    let energies = if let Some(list) = &args.energy {
        list.clone()
    } else if let Some(text) = &args.energy_range {
        parse_energy_range(text)?
    } else if let Some(v) = file.energies {
        file_energies(v)?
    } else {
        return Err(config_err("energies: missing (use --energy, --energy-range or the config file)"));
    };
    if energies.is_empty() {
        return Err(config_err("energies: empty list"));
    }
    for (i, &e) in energies.iter().enumerate() {
        if !(e > 0.0) || !e.is_finite() {
            return Err(config_err(format!("energies[{i}]: must be positive, got {e}")));
        }
    }

    let method = match args.method.as_deref().or(file.method.as_deref()).unwrap_or("all") {
        "all" => MethodSel::All,
        tag => MethodSel::One(tag.parse().map_err(|_| {
            let tags: Vec<&str> = Method::ALL.iter().map(|m| m.as_str()).collect();
            config_err(format!("method: unknown tag '{tag}' (expected all or one of {})", tags.join(", ")))
        })?),
    };
    if let MethodSel::One(m) = method {
        if ell > 0 && ell_zero_only(m) {
            return Err(config_err(format!("method: {m} applies to ell = 0 only")));
        }
    }

    let r_max = args.rmax.or(file.r_max);
    if let Some(r) = r_max {
        if !(r > 0.0) || !r.is_finite() {
            return Err(config_err(format!("r_max: must be positive, got {r}")));
        }
    }

    let mut tol = IntegratorConfig::default();
    if let Some(t) = file.tolerances {
        if let Some(a) = t.abs {
            tol.abs_tol = a;
            tol.rel_tol = a;
        }
        if let Some(r) = t.rel {
            tol.rel_tol = r;
        }
        if let Some(n) = t.max_steps {
            tol.max_steps = n;
        }
        tol.max_step = t.max_step.or(tol.max_step);
    }
    if let Some(text) = &args.tol {
        (tol.abs_tol, tol.rel_tol) = parse_tol(text)?;
    }
    for (name, v) in [("abs", tol.abs_tol), ("rel", tol.rel_tol)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(config_err(format!("tolerances.{name}: must lie in (0, 1), got {v}")));
        }
    }
    if tol.max_step.is_some_and(|h| !(h > 0.0)) {
        return Err(config_err("tolerances.max_step: must be positive"));
    }

    let potential_text = args.potential.clone().unwrap_or_else(|| describe(&spec.model));
    let long_range_text = args.long_range.clone().or_else(|| spec.long_range.as_ref().map(describe));
    Ok(RunConfig {
        potential: spec,
        potential_text,
        long_range_text,
        ell,
        energies,
        method,
        r_max,
        tol,
        output: args.output.clone().or(file.output),
        format: args.format.or(file.format).unwrap_or_default(),
        concurrent: !args.serial && file.concurrent.unwrap_or(true),
    })
}
