//! Run configuration: a sectioned `key = value` text file.
//!
//! ```text
//! # Paul trap, a = 1, q = 0.25, r = 10
//! [system]
//! mass = 1
//! hbar = 1
//! omega = 1
//!
//! [potential]
//! family = paul-trap
//! a = 1
//! q = 0.25
//! r = 10
//!
//! [initial]
//! width = matched
//!
//! [integration]
//! u_max = 20
//! step = 0.01
//! ```
//!
//! Blank lines and anything after `#` are ignored. Keys are unique within a
//! section and unknown sections or keys are rejected. Relative output paths
//! are resolved against the directory of the configuration file.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use quadprop_core::expr::Expr;
use quadprop_core::ode::{DEFAULT_ATOL, DEFAULT_RTOL};
use quadprop_core::{parse_expression, Bindings};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq)]
struct Entry {
    value: String,
    line: usize,
    /// 1-based column of the first character of `value`.
    column: usize,
}

type Section = BTreeMap<String, Entry>;

/// Raw sections of a file, with source positions for error reporting.
#[derive(Debug)]
struct Document {
    path: PathBuf,
    sections: BTreeMap<String, (usize, Section)>,
}

const SECTIONS: &[(&str, &[&str])] = &[
    ("system", &["mass", "hbar", "omega"]),
    ("potential", &["family", "omega", "a", "q", "r", "drive", "c", "e"]),
    ("parameters", &[]),
    ("initial", &["width"]),
    ("integration", &["t_max", "u_max", "step", "rtol", "atol"]),
    ("output", &["columns", "n_max", "path", "format"]),
    (
        "kernel",
        &["t", "u", "x_min", "x_max", "x_count", "x_prime_min", "x_prime_max", "x_prime_count", "path"],
    ),
    ("wigner", &["t", "u", "x_min", "x_max", "x_count", "p_min", "p_max", "p_count", "path"]),
    ("scan", &["a_min", "a_max", "a_count", "q_min", "q_max", "q_count", "r", "path"]),
];

impl Document {
    fn parse(path: &Path, text: &str) -> Result<Self, CliError> {
        let mut sections: BTreeMap<String, (usize, Section)> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("");
            let trimmed = content.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(rest) = trimmed.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| CliError::at_line(path, line, "unterminated section header"))?
                    .trim()
                    .to_string();
                if !SECTIONS.iter().any(|(s, _)| *s == name) {
                    return Err(CliError::at_line(path, line, format!("unknown section [{name}]")));
                }
                if sections.contains_key(&name) {
                    return Err(CliError::at_line(path, line, format!("duplicate section [{name}]")));
                }
                sections.insert(name.clone(), (line, Section::new()));
                current = Some(name);
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(CliError::at_line(path, line, "expected `key = value`"));
            };
            let Some(section) = current.as_ref() else {
                return Err(CliError::at_line(path, line, "key outside of any section"));
            };
            let key = key.trim().to_string();
            let known = SECTIONS.iter().find(|(s, _)| s == section).map(|(_, k)| *k).unwrap_or(&[]);
            let free_keys = section == "parameters";
            if key.is_empty() || (!free_keys && !known.contains(&key.as_str())) {
                return Err(CliError::at_line(path, line, format!("unknown key `{key}` in [{section}]")));
            }
            let lead = value.len() - value.trim_start().len();
            let column = content.len() - value.len() + lead + 1;
            let entry = Entry {
                value: value.trim().to_string(),
                line,
                column,
            };
            let sec = &mut sections.get_mut(section).expect("section exists").1;
            if sec.insert(key.clone(), entry).is_some() {
                return Err(CliError::at_line(path, line, format!("duplicate key `{key}` in [{section}]")));
            }
        }
        Ok(Document {
            path: path.to_path_buf(),
            sections,
        })
    }

    fn section(&self, name: &str) -> Option<&Section> {
        self.sections.get(name).map(|(_, s)| s)
    }

    fn entry(&self, section: &str, key: &str) -> Option<&Entry> {
        self.section(section).and_then(|s| s.get(key))
    }

    fn err(&self, e: &Entry, msg: impl Into<String>) -> CliError {
        CliError::at_line(&self.path, e.line, msg)
    }

    fn missing(&self, section: &str, key: &str) -> CliError {
        let line = self.sections.get(section).map(|(l, _)| *l);
        CliError::Config {
            file: Some(self.path.clone()),
            line,
            column: None,
            message: format!("missing `{key}` in [{section}]"),
        }
    }

    fn get<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<T>, CliError> {
        match self.entry(section, key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<T>()
                .map(Some)
                .map_err(|_| self.err(e, format!("invalid value `{}` for `{key}`", e.value))),
        }
    }

    fn require<T: FromStr>(&self, section: &str, key: &str) -> Result<T, CliError> {
        self.get(section, key)?.ok_or_else(|| self.missing(section, key))
    }

    fn positive(&self, section: &str, key: &str) -> Result<Option<f64>, CliError> {
        let v: Option<f64> = self.get(section, key)?;
        match v {
            Some(x) if !(x > 0.0 && x.is_finite()) => {
                Err(self.err(self.entry(section, key).expect("present"), format!("`{key}` must be positive")))
            }
            other => Ok(other),
        }
    }

    fn expression(&self, section: &str, key: &str) -> Result<Option<Expr>, CliError> {
        let Some(e) = self.entry(section, key) else {
            return Ok(None);
        };
        parse_expression(&e.value).map(Some).map_err(|err| CliError::Config {
            file: Some(self.path.clone()),
            line: Some(e.line),
            column: Some(e.column + err.offset()),
            message: format!("in `{key}`: {err}"),
        })
    }

    fn path_value(&self, section: &str, key: &str) -> Option<PathBuf> {
        self.entry(section, key).map(|e| {
            let p = PathBuf::from(&e.value);
            if p.is_absolute() {
                p
            } else {
                self.path.parent().unwrap_or(Path::new(".")).join(p)
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    Free,
    Harmonic,
    DrivenHarmonic { drive: Expr },
    PaulTrap { a: f64, q: f64, r: f64 },
    Custom { c: Expr, e: Expr },
}

impl Family {
    pub fn tag(&self) -> &'static str {
        match self {
            Family::Free => "free",
            Family::Harmonic => "harmonic",
            Family::DrivenHarmonic { .. } => "driven-harmonic",
            Family::PaulTrap { .. } => "paul-trap",
            Family::Custom { .. } => "custom",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Width {
    /// `λ₀ = mω/ħ`.
    Matched,
    Value(f64),
}

/// Integration span in physical time or in `u = ωt`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Span {
    Time(f64),
    Dimensionless(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        quadprop_core::potentials::AxisRange::new(self.min, self.max, self.count).values()
    }
}

/// A time given either directly or as `u = ωt`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Instant {
    Time(f64),
    Dimensionless(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct KernelRequest {
    pub at: Instant,
    pub x: Axis,
    pub x_prime: Axis,
    pub path: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WignerRequest {
    pub at: Instant,
    pub x: Axis,
    pub p: Axis,
    /// Written next to the time series, so always a file.
    pub path: PathBuf,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanRequest {
    pub a: Axis,
    pub q: Axis,
    pub r: f64,
    pub path: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub source: PathBuf,
    pub mass: f64,
    pub hbar: f64,
    pub omega: Option<f64>,
    pub family: Family,
    pub bindings: Bindings,
    pub width: Width,
    pub span: Option<Span>,
    pub step: Option<f64>,
    pub rtol: f64,
    pub atol: f64,
    pub columns: Option<Vec<String>>,
    pub n_max: u32,
    pub path: Option<PathBuf>,
    pub format: Format,
    pub kernel: Option<KernelRequest>,
    pub wigner: Option<WignerRequest>,
    pub scan: Option<ScanRequest>,
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config {
        file: Some(path.to_path_buf()),
        line: None,
        column: None,
        message: format!("cannot read configuration: {e}"),
    })?;
    parse_config(path, &text)
}

pub fn parse_config(path: &Path, text: &str) -> Result<RunConfig, CliError> {
    let doc = Document::parse(path, text)?;

    let mass = doc.positive("system", "mass")?.unwrap_or(1.0);
    let hbar = doc.positive("system", "hbar")?.unwrap_or(1.0);
    let omega = match (doc.positive("system", "omega")?, doc.positive("potential", "omega")?) {
        (Some(_), Some(_)) => {
            let e = doc.entry("potential", "omega").expect("present");
            return Err(doc.err(e, "`omega` given in both [system] and [potential]"));
        }
        (a, b) => a.or(b),
    };

    let family_entry = doc.entry("potential", "family").ok_or_else(|| doc.missing("potential", "family"))?;
    let family = match family_entry.value.as_str() {
        "free" => Family::Free,
        "harmonic" => Family::Harmonic,
        "driven-harmonic" => Family::DrivenHarmonic {
            drive: doc.expression("potential", "drive")?.ok_or_else(|| doc.missing("potential", "drive"))?,
        },
        "paul-trap" => Family::PaulTrap {
            a: doc.require("potential", "a")?,
            q: doc.require("potential", "q")?,
            r: doc.positive("potential", "r")?.ok_or_else(|| doc.missing("potential", "r"))?,
        },
        "custom" => Family::Custom {
            c: doc.expression("potential", "c")?.ok_or_else(|| doc.missing("potential", "c"))?,
            e: doc.expression("potential", "e")?.unwrap_or(Expr::Const(0.0)),
        },
        other => {
            return Err(doc.err(
                family_entry,
                format!("unknown family `{other}` (expected free, harmonic, driven-harmonic, paul-trap or custom)"),
            ))
        }
    };
    // Keys that belong to other families are mistakes, not silent no-ops.
    let allowed: &[&str] = match family {
        Family::Free => &["family"],
        Family::Harmonic => &["family", "omega"],
        Family::DrivenHarmonic { .. } => &["family", "omega", "drive"],
        Family::PaulTrap { .. } => &["family", "omega", "a", "q", "r"],
        Family::Custom { .. } => &["family", "omega", "c", "e"],
    };
    if let Some(sec) = doc.section("potential") {
        if let Some((k, e)) = sec.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
            return Err(doc.err(e, format!("`{k}` does not apply to family `{}`", family.tag())));
        }
    }
    if matches!(family, Family::Harmonic | Family::DrivenHarmonic { .. } | Family::PaulTrap { .. }) && omega.is_none() {
        return Err(doc.missing("system", "omega"));
    }

    let mut bindings = Bindings::new();
    if let Some(sec) = doc.section("parameters") {
        for (k, e) in sec {
            let v: f64 = e
                .value
                .parse()
                .map_err(|_| doc.err(e, format!("parameter `{k}` must be a number")))?;
            bindings.insert(k.clone(), v);
        }
    }
    for (key, expr) in [("drive", &family), ("c", &family), ("e", &family)]
        .iter()
        .filter_map(|(k, f)| family_expr(f, k).map(|e| (*k, e)))
    {
        if let Some(name) = expr.params().into_iter().find(|p| !bindings.contains_key(*p)) {
            let e = doc.entry("potential", key).expect("present");
            return Err(doc.err(e, format!("unbound parameter `{name}` in `{key}` (add it to [parameters])")));
        }
    }

    let width = match doc.entry("initial", "width") {
        None => Width::Matched,
        Some(e) if e.value == "matched" => Width::Matched,
        Some(e) => match e.value.parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => Width::Value(v),
            _ => return Err(doc.err(e, "`width` must be `matched` or a positive number")),
        },
    };
    if width == Width::Matched && omega.is_none() {
        let line = doc.entry("initial", "width").map(|e| e.line);
        return Err(CliError::Config {
            file: Some(doc.path.clone()),
            line,
            column: None,
            message: "matched width needs a reference `omega`".into(),
        });
    }

    let span = match (doc.positive("integration", "t_max")?, doc.positive("integration", "u_max")?) {
        (Some(_), Some(_)) => {
            let e = doc.entry("integration", "u_max").expect("present");
            return Err(doc.err(e, "give either `t_max` or `u_max`, not both"));
        }
        (Some(t), None) => Some(Span::Time(t)),
        (None, Some(u)) => {
            if omega.is_none() {
                let e = doc.entry("integration", "u_max").expect("present");
                return Err(doc.err(e, "`u_max` needs a reference `omega`"));
            }
            Some(Span::Dimensionless(u))
        }
        (None, None) => None,
    };
    let step = doc.positive("integration", "step")?;
    let rtol = doc.positive("integration", "rtol")?.unwrap_or(DEFAULT_RTOL);
    let atol = doc.positive("integration", "atol")?.unwrap_or(DEFAULT_ATOL);

    let columns = doc.entry("output", "columns").map(|e| {
        e.value
            .split(',')
            .map(|c| c.trim().to_string())
            .filter(|c| !c.is_empty())
            .collect::<Vec<_>>()
    });
    let n_max: u32 = doc.get("output", "n_max")?.unwrap_or(6);
    let format = match doc.entry("output", "format") {
        None => Format::Csv,
        Some(e) => e.value.parse().map_err(|m: String| doc.err(e, m))?,
    };

    let kernel = if doc.section("kernel").is_some() {
        Some(KernelRequest {
            at: instant(&doc, "kernel", omega)?,
            x: axis(&doc, "kernel", "x")?,
            x_prime: axis(&doc, "kernel", "x_prime")?,
            path: doc.path_value("kernel", "path"),
        })
    } else {
        None
    };
    let wigner = if doc.section("wigner").is_some() {
        Some(WignerRequest {
            at: instant(&doc, "wigner", omega)?,
            x: axis(&doc, "wigner", "x")?,
            p: axis(&doc, "wigner", "p")?,
            path: doc.path_value("wigner", "path").ok_or_else(|| doc.missing("wigner", "path"))?,
        })
    } else {
        None
    };
    let scan = if doc.section("scan").is_some() {
        let r = match (doc.positive("scan", "r")?, &family) {
            (Some(r), _) => r,
            (None, Family::PaulTrap { r, .. }) => *r,
            (None, _) => return Err(doc.missing("scan", "r")),
        };
        Some(ScanRequest {
            a: axis(&doc, "scan", "a")?,
            q: axis(&doc, "scan", "q")?,
            r,
            path: doc.path_value("scan", "path"),
        })
    } else {
        None
    };

    Ok(RunConfig {
        source: path.to_path_buf(),
        mass,
        hbar,
        omega,
        family,
        bindings,
        width,
        span,
        step,
        rtol,
        atol,
        columns,
        n_max,
        path: doc.path_value("output", "path"),
        format,
        kernel,
        wigner,
        scan,
    })
}

fn family_expr<'a>(family: &'a Family, key: &str) -> Option<&'a Expr> {
    match (family, key) {
        (Family::DrivenHarmonic { drive }, "drive") => Some(drive),
        (Family::Custom { c, .. }, "c") => Some(c),
        (Family::Custom { e, .. }, "e") => Some(e),
        _ => None,
    }
}

fn instant(doc: &Document, section: &str, omega: Option<f64>) -> Result<Instant, CliError> {
    let t: Option<f64> = doc.get(section, "t")?;
    let u: Option<f64> = doc.get(section, "u")?;
    match (t, u) {
        (Some(t), None) => Ok(Instant::Time(t)),
        (None, Some(u)) if omega.is_some() => Ok(Instant::Dimensionless(u)),
        (None, Some(_)) => Err(doc.err(doc.entry(section, "u").expect("present"), "`u` needs a reference `omega`")),
        (Some(_), Some(_)) => Err(doc.err(doc.entry(section, "u").expect("present"), "give either `t` or `u`, not both")),
        (None, None) => Err(doc.missing(section, "t")),
    }
}

/// `{prefix}_min`, `{prefix}_max`, `{prefix}_count`.
fn axis(doc: &Document, section: &str, prefix: &str) -> Result<Axis, CliError> {
    let min: f64 = doc.require(section, &format!("{prefix}_min"))?;
    let max: f64 = doc.require(section, &format!("{prefix}_max"))?;
    let count_key = format!("{prefix}_count");
    let count: usize = doc.require(section, &count_key)?;
    let ok = count > 0 && min.is_finite() && max.is_finite() && (count == 1 || max > min);
    if !ok {
        let e = doc.entry(section, &count_key).expect("present");
        return Err(doc.err(e, format!("empty or inverted range for `{prefix}`")));
    }
    Ok(Axis { min, max, count })
}
