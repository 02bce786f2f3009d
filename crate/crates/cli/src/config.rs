//! Scenario files: one `key = value` per line, `#` starts a comment.
//!
//! ```text
//! model = spin_half
//! mu_B = 10
//! theta = pi/3
//! omega0 = 0.1
//! t1 = period
//! steps = 2048
//! coeffs = 0.7071067811865476, 0.7071067811865476
//! ```

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use adiaphase::models::parse_complex;
use adiaphase::{
    GaugeTransform, HamiltonianPath, HermitianOperator, PhaseProfile, SampledHamiltonian, SpinHalfParams, SpinHalfPath,
    Superposition, TimeGrid, C64,
};

use crate::error::{CliError, CliResult};

const KEYS: [&str; 12] = [
    "model",
    "mu_B",
    "theta",
    "omega0",
    "t0",
    "t1",
    "steps",
    "coeffs",
    "gauge",
    "alpha_tracer",
    "observable",
    "output",
];

pub const DEFAULT_STEPS: usize = 2048;

pub enum Model {
    SpinHalf(SpinHalfPath),
    Sampled(SampledHamiltonian),
}

impl Model {
    pub fn path(&self) -> &dyn HamiltonianPath {
        match self {
            Model::SpinHalf(p) => p,
            Model::Sampled(s) => s,
        }
    }

    pub fn spin_half(&self) -> Option<&SpinHalfParams> {
        match self {
            Model::SpinHalf(p) => Some(&p.0),
            Model::Sampled(_) => None,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Model::SpinHalf(_) => 2,
            Model::Sampled(s) => s.dim(),
        }
    }
}

pub enum Observable {
    SpinZ,
    Matrix(HermitianOperator),
}

impl Observable {
    pub fn operator(&self) -> HermitianOperator {
        match self {
            Observable::SpinZ => HermitianOperator::spin_z(),
            Observable::Matrix(m) => m.clone(),
        }
    }
}

/// A validated scenario.
pub struct Scenario {
    pub model: Model,
    pub grid: TimeGrid,
    pub superposition: Superposition,
    pub gauge: Option<GaugeTransform>,
    /// Frequency of the smooth random-gauge family.
    pub gauge_frequency: f64,
    pub alpha_tracer: f64,
    pub observable: Observable,
    pub output: Option<PathBuf>,
}

struct Entry {
    line: usize,
    value: String,
}

struct Reader<'a> {
    path: &'a Path,
    entries: BTreeMap<String, Entry>,
}

impl Reader<'_> {
    fn error(&self, key: &str, message: impl Into<String>) -> CliError {
        let line = self.entries.get(key).map_or(0, |e| e.line);
        CliError::Config { path: self.path.to_path_buf(), line, message: message.into() }
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| e.value.as_str())
    }

    fn number(&self, key: &str) -> CliResult<Option<f64>> {
        self.raw(key)
            .map(|v| parse_expr(v).map_err(|m| self.error(key, format!("{key}: {m}"))))
            .transpose()
    }

    fn required(&self, key: &str) -> CliResult<f64> {
        self.number(key)?.ok_or_else(|| self.error(key, format!("missing key `{key}`")))
    }

    /// Resolves a path relative to the scenario file's directory.
    fn relative(&self, file: &str) -> PathBuf {
        let file = Path::new(file.trim());
        match self.path.parent() {
            Some(dir) if file.is_relative() => dir.join(file),
            _ => file.to_path_buf(),
        }
    }
}

pub fn load(path: &Path) -> CliResult<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    parse(&text, path)
}

/// Parses and validates a scenario; `path` locates relative file references.
pub fn parse(text: &str, path: &Path) -> CliResult<Scenario> {
    let config_error = |line: usize, message: String| CliError::Config { path: path.to_path_buf(), line, message };
    let mut entries = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| config_error(line, format!("expected `key = value`, got `{content}`")))?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(config_error(line, format!("unknown key `{key}`")));
        }
        let entry = Entry { line, value: value.trim().to_string() };
        if entries.insert(key.to_string(), entry).is_some() {
            return Err(config_error(line, format!("duplicate key `{key}`")));
        }
    }
    let r = Reader { path, entries };

    let model_spec = r.raw("model").ok_or_else(|| r.error("model", "missing key `model`"))?;
    let model = if model_spec == "spin_half" {
        let theta = r.required("theta")?;
        let params = SpinHalfParams::including_poles(r.required("mu_B")?, theta, r.required("omega0")?)
            .map_err(|e| r.error("theta", e.to_string()))?;
        Model::SpinHalf(SpinHalfPath(params))
    } else if let Some(file) = model_spec.strip_prefix("sampled:") {
        for key in ["mu_B", "theta"] {
            if r.raw(key).is_some() {
                return Err(r.error(key, format!("`{key}` only applies to model = spin_half")));
            }
        }
        let file = r.relative(file);
        let text = std::fs::read_to_string(&file).map_err(|source| CliError::Io { path: file.clone(), source })?;
        let sampled = SampledHamiltonian::parse(&text).map_err(|e| CliError::Scenario(format!("{}: {e}", file.display())))?;
        Model::Sampled(sampled)
    } else {
        return Err(r.error("model", format!("unknown model `{model_spec}`; expected spin_half or sampled:<path>")));
    };
    let dim = model.dim();

    let t0 = r.number("t0")?.unwrap_or(0.0);
    let t1 = match (r.raw("t1"), &model) {
        (Some("period"), Model::SpinHalf(SpinHalfPath(p))) => {
            t0 + p.period().ok_or_else(|| r.error("t1", "t1 = period needs omega0 != 0"))?
        }
        (Some("period"), Model::Sampled(_)) => return Err(r.error("t1", "t1 = period needs model = spin_half")),
        (Some(_), _) => r.required("t1")?,
        (None, Model::SpinHalf(SpinHalfPath(p))) => t0 + p.period().ok_or_else(|| r.error("t1", "missing key `t1`"))?,
        (None, Model::Sampled(_)) => return Err(r.error("t1", "missing key `t1`")),
    };
    let steps = match r.raw("steps") {
        Some(v) => v.parse::<usize>().map_err(|e| r.error("steps", format!("steps: {e}")))?,
        None => DEFAULT_STEPS,
    };
    let grid = TimeGrid::new(t0, t1, steps).map_err(|e| r.error("steps", e.to_string()))?;

    let coeffs: Vec<C64> = match r.raw("coeffs") {
        Some(v) => v
            .split(',')
            .map(|c| parse_complex(c.trim()))
            .collect::<Result<_, _>>()
            .map_err(|m| r.error("coeffs", m))?,
        None => vec![C64::new(1.0 / (dim as f64).sqrt(), 0.0); dim],
    };
    if coeffs.len() > dim {
        return Err(r.error("coeffs", format!("{} coefficients for a {dim}-level model", coeffs.len())));
    }
    let superposition = Superposition::on_lowest(coeffs).map_err(|e| r.error("coeffs", e.to_string()))?;

    let gauge_frequency = match &model {
        Model::SpinHalf(p) => p.0.omega0(),
        Model::Sampled(_) => r.number("omega0")?.unwrap_or(1.0),
    };
    let gauge = parse_gauge(r.raw("gauge").unwrap_or("none"), dim, gauge_frequency).map_err(|m| r.error("gauge", m))?;

    let alpha_tracer = r.number("alpha_tracer")?.unwrap_or(1.0);
    let observable = match r.raw("observable").unwrap_or("s_z") {
        "s_z" if dim == 2 => Observable::SpinZ,
        "s_z" => return Err(r.error("observable", format!("s_z needs a 2-level model, got {dim} levels"))),
        spec => match spec.strip_prefix("file:") {
            Some(file) => {
                let file = r.relative(file);
                let text =
                    std::fs::read_to_string(&file).map_err(|source| CliError::Io { path: file.clone(), source })?;
                let op = parse_matrix(&text).map_err(|m| CliError::Scenario(format!("{}: {m}", file.display())))?;
                if op.dim() != dim {
                    return Err(r.error("observable", format!("observable is {}x{0}, model has {dim} levels", op.dim())));
                }
                Observable::Matrix(op)
            }
            None => return Err(r.error("observable", format!("unknown observable `{spec}`"))),
        },
    };
    let output = r.raw("output").map(|o| r.relative(o));

    Ok(Scenario { model, grid, superposition, gauge, gauge_frequency, alpha_tracer, observable, output })
}

/// `none`, `constants:c1,c2,...` or `smooth:c0,c1,c2,c3;...` (one group per level).
pub fn parse_gauge(spec: &str, dim: usize, frequency: f64) -> Result<Option<GaugeTransform>, String> {
    let numbers = |s: &str| -> Result<Vec<f64>, String> { s.split(',').map(|v| parse_expr(v.trim())).collect() };
    let gauge = if spec == "none" {
        return Ok(None);
    } else if let Some(rest) = spec.strip_prefix("constants:") {
        GaugeTransform::constants(&numbers(rest)?).map_err(|e| e.to_string())?
    } else if let Some(rest) = spec.strip_prefix("smooth:") {
        let profiles = rest
            .split(';')
            .map(|group| {
                let c: [f64; 4] = numbers(group)?
                    .try_into()
                    .map_err(|v: Vec<f64>| format!("smooth gauge needs 4 coefficients per level, got {}", v.len()))?;
                Ok(PhaseProfile::smooth(c, frequency))
            })
            .collect::<Result<Vec<_>, String>>()?;
        GaugeTransform::new(profiles).map_err(|e| e.to_string())?
    } else {
        return Err(format!("unknown gauge `{spec}`; expected none, constants:... or smooth:..."));
    };
    if gauge.dim() != dim {
        return Err(format!("gauge has {} levels, model has {dim}", gauge.dim()));
    }
    Ok(Some(gauge))
}

/// `dim N` followed by N rows of N complex entries.
pub fn parse_matrix(text: &str) -> Result<HermitianOperator, String> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let dim = match lines.next() {
        Some((_, l)) => match l.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["dim", n] => n.parse::<usize>().map_err(|e| format!("line 1: {e}"))?,
            _ => return Err(format!("expected `dim N`, got `{l}`")),
        },
        None => return Err("empty matrix file".into()),
    };
    let mut entries = Vec::with_capacity(dim * dim);
    for (line, row) in lines {
        let parsed = row.split_whitespace().map(parse_complex).collect::<Result<Vec<_>, _>>();
        let parsed = parsed.map_err(|m| format!("line {line}: {m}"))?;
        if parsed.len() != dim {
            return Err(format!("line {line}: expected {dim} entries, got {}", parsed.len()));
        }
        entries.extend(parsed);
    }
    if entries.len() != dim * dim {
        return Err(format!("expected {dim} rows, got {}", entries.len() / dim.max(1)));
    }
    HermitianOperator::new(dim, entries).map_err(|e| e.to_string())
}

/// Products and quotients of numbers and `pi`, e.g. `2*pi/3`, `-pi/6`, `0.1`.
pub fn parse_expr(text: &str) -> Result<f64, String> {
    let text = text.trim();
    if text.is_empty() {
        return Err("empty value".into());
    }
    let mut value = 1.0;
    let mut divide = false;
    let mut rest = text;
    loop {
        let end = rest.find(['*', '/']).unwrap_or(rest.len());
        let token = rest[..end].trim();
        let (sign, body) = match token.strip_prefix('-') {
            Some(b) => (-1.0, b.trim()),
            None => (1.0, token),
        };
        let factor = sign
            * match body {
                "pi" => PI,
                _ => body.parse::<f64>().map_err(|_| format!("cannot parse `{text}` as a number"))?,
            };
        if divide {
            value /= factor;
        } else {
            value *= factor;
        }
        if end == rest.len() {
            break;
        }
        divide = rest.as_bytes()[end] == b'/';
        rest = &rest[end + 1..];
    }
    if !value.is_finite() {
        return Err(format!("`{text}` is not finite"));
    }
    Ok(value)
}
