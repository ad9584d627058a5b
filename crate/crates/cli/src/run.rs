use std::path::{Path, PathBuf};

use quadprop_core::gaussian::matched_width;
use quadprop_core::observables::{
    com_energy, mean_energy, poisson_excitation, thermo_rates, trap_energy_normalized, trap_excitation, ThermoRates,
};
use quadprop_core::ode::uniform_grid;
use quadprop_core::potentials::{classify, make_spec, scan_points, AxisRange};
use quadprop_core::{
    compute_coefficients_with, kernel_at, CoefficientSample, CoefficientSpec, EvolutionCoefficients,
    GaussianState, PotentialFamily, Tolerances,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{Family, Format, Instant, RunConfig, Span, Width};
use crate::error::CliError;
use crate::output::{sidecar_path, Cell, Table};

/// Environment variable holding the scan's worker count.
pub const THREADS_ENV: &str = "QUADPROP_THREADS";

const RATE_COLUMNS: [&str; 8] = [
    "du_dt",
    "t1",
    "t2",
    "chi",
    "rate_work_source",
    "rate_work_tr",
    "rate_heat_def",
    "rate_heat_tr",
];

const STATE_COLUMNS: [&str; 16] = [
    "t",
    "alpha",
    "alpha_dot",
    "beta",
    "beta_dot",
    "gamma",
    "gamma_dot",
    "lambda_phase",
    "caustics",
    "zeta",
    "center",
    "momentum",
    "chirp",
    "var_x",
    "var_p",
    "purity",
];

/// A finished simulation: the time series, its summary, and any extra grid.
pub struct SimulationOutput {
    pub table: Table,
    pub summary: Value,
    pub wigner: Option<(PathBuf, Table)>,
}

pub fn spec_for(cfg: &RunConfig) -> Result<CoefficientSpec, CliError> {
    let omega = cfg.omega.unwrap_or(0.0);
    let family = match &cfg.family {
        Family::Free => PotentialFamily::Free,
        Family::Harmonic => PotentialFamily::Harmonic { omega },
        Family::DrivenHarmonic { drive } => PotentialFamily::DrivenHarmonic {
            omega,
            drive: drive.clone(),
        },
        Family::PaulTrap { a, q, r } => PotentialFamily::PaulTrap {
            omega,
            a: *a,
            q: *q,
            r: *r,
        },
        Family::Custom { c, e } => PotentialFamily::Custom { c: c.clone(), e: e.clone() },
    };
    let spec = make_spec(&family, cfg.mass, cfg.hbar, &cfg.bindings)?;
    Ok(match cfg.omega {
        Some(w) if spec.reference_omega().is_none() => spec.with_reference_omega(w),
        _ => spec,
    })
}

fn tolerances(cfg: &RunConfig) -> Tolerances {
    Tolerances::new(cfg.rtol, cfg.atol)
}

fn lambda0(cfg: &RunConfig) -> f64 {
    match cfg.width {
        Width::Value(v) => v,
        Width::Matched => matched_width(cfg.mass, cfg.hbar, cfg.omega.expect("validated at load")),
    }
}

fn instant_time(cfg: &RunConfig, at: Instant) -> Result<f64, CliError> {
    let t = match at {
        Instant::Time(t) => t,
        Instant::Dimensionless(u) => u / cfg.omega.expect("validated at load"),
    };
    if t < 0.0 || !t.is_finite() {
        return Err(CliError::config(format!("time must be non-negative (got {t})")));
    }
    Ok(t)
}

/// Columns emitted when the configuration does not list any.
pub fn default_columns(cfg: &RunConfig) -> Vec<String> {
    let mut cols: Vec<&str> = match cfg.family {
        Family::PaulTrap { .. } => return ["u", "zeta", "energy_norm"].map(String::from).to_vec(),
        Family::DrivenHarmonic { .. } => {
            let mut c = vec!["t", "u", "alpha", "beta", "gamma", "gamma_dot", "lambda_phase", "zeta", "energy"];
            if cfg.width == Width::Matched {
                c.push("com_energy");
                c.extend(RATE_COLUMNS);
            }
            c
        }
        _ => vec!["t", "u", "alpha", "beta", "gamma", "gamma_dot", "lambda_phase", "zeta", "energy"],
    };
    if cfg.omega.is_none() {
        cols.retain(|c| *c != "u");
    }
    let mut out: Vec<String> = cols.into_iter().map(String::from).collect();
    if matches!(cfg.family, Family::DrivenHarmonic { .. }) && cfg.width == Width::Matched {
        out.extend(probability_columns(cfg));
    }
    out
}

/// `P0, P1, …, P{n_max}` for the driven oscillator; only the even levels
/// `P0, P2, …, P{2 n_max}` for the trap, whose odd levels vanish.
fn probability_columns(cfg: &RunConfig) -> Vec<String> {
    match cfg.family {
        Family::PaulTrap { .. } => (0..=cfg.n_max).map(|n| format!("P{}", 2 * n)).collect(),
        _ => (0..=cfg.n_max).map(|n| format!("P{n}")).collect(),
    }
}

/// Reject column names that are unknown or meaningless for this run.
pub fn check_columns(cfg: &RunConfig, columns: &[String]) -> Result<(), CliError> {
    let driven = matches!(cfg.family, Family::Harmonic | Family::DrivenHarmonic { .. });
    let trap = matches!(cfg.family, Family::PaulTrap { .. });
    let matched = cfg.width == Width::Matched;
    for c in columns {
        let ok = if STATE_COLUMNS.contains(&c.as_str()) || c == "energy" {
            true
        } else if c == "u" {
            cfg.omega.is_some()
        } else if c == "energy_norm" {
            trap && matched
        } else if c == "com_energy" || RATE_COLUMNS.contains(&c.as_str()) {
            driven && matched
        } else if let Some(n) = c.strip_prefix('P').and_then(|n| n.parse::<u32>().ok()) {
            matched && (driven || (trap && n % 2 == 0))
        } else {
            false
        };
        if !ok {
            let hint = if STATE_COLUMNS.contains(&c.as_str())
                || c == "u"
                || c == "energy_norm"
                || c == "com_energy"
                || RATE_COLUMNS.contains(&c.as_str())
                || c.starts_with('P')
            {
                format!(" for family `{}` with this width and omega", cfg.family.tag())
            } else {
                String::new()
            };
            return Err(CliError::config(format!("column `{c}` is not available{hint}")));
        }
    }
    if columns.is_empty() {
        return Err(CliError::config("no output columns"));
    }
    Ok(())
}

struct Row<'a> {
    s: &'a CoefficientSample,
    st: &'a GaussianState,
    spec: &'a CoefficientSpec,
    omega: Option<f64>,
    rates: Option<ThermoRates>,
    com: Option<f64>,
}

impl Row<'_> {
    fn value(&mut self, col: &str) -> Result<f64, CliError> {
        let (s, st) = (self.s, self.st);
        Ok(match col {
            "t" => s.t,
            "u" => s.t * self.omega.expect("checked"),
            "alpha" => s.alpha,
            "alpha_dot" => s.alpha_dot,
            "beta" => s.beta,
            "beta_dot" => s.beta_dot,
            "gamma" => s.gamma,
            "gamma_dot" => s.gamma_dot,
            "lambda_phase" => s.lambda,
            "caustics" => s.caustics as f64,
            "zeta" => st.zeta,
            "center" => st.center,
            "momentum" => st.momentum,
            "chirp" => st.chirp,
            "var_x" => st.position_variance(),
            "var_p" => st.momentum_variance(),
            "purity" => st.purity(),
            "energy" => mean_energy(st, self.spec)?,
            "energy_norm" => trap_energy_normalized(st, self.spec)?,
            "com_energy" => self.com()?,
            _ if RATE_COLUMNS.contains(&col) => {
                let r = match self.rates {
                    Some(r) => r,
                    None => *self.rates.insert(thermo_rates(st, self.spec)?),
                };
                match col {
                    "du_dt" => r.du_dt,
                    "t1" => r.t1,
                    "t2" => r.t2,
                    "chi" => r.chi,
                    "rate_work_source" => r.rate_work_source,
                    "rate_work_tr" => r.rate_work_tr,
                    "rate_heat_def" => r.rate_heat_def,
                    _ => r.rate_heat_tr,
                }
            }
            _ => {
                let n: u32 = col[1..].parse().expect("checked");
                if matches!(self.spec.kind(), quadprop_core::SystemKind::PaulTrap { .. }) {
                    trap_excitation(st, self.spec, n)?
                } else {
                    let hw = self.spec.hbar() * self.omega.expect("checked");
                    poisson_excitation(self.com()?, hw, n)
                }
            }
        })
    }

    fn com(&mut self) -> Result<f64, CliError> {
        match self.com {
            Some(v) => Ok(v),
            None => Ok(*self.com.insert(com_energy(self.st, self.spec)?)),
        }
    }
}

fn grid(cfg: &RunConfig) -> Result<Vec<f64>, CliError> {
    let span = cfg
        .span
        .ok_or_else(|| CliError::config("simulate needs `t_max` or `u_max` in [integration]"))?;
    let (t_max, scale) = match span {
        Span::Time(t) => (t, 1.0),
        Span::Dimensionless(u) => {
            let w = cfg.omega.expect("validated at load");
            (u / w, w)
        }
    };
    // `step` is measured in the same variable as the span.
    let dt = cfg.step.unwrap_or(t_max * scale / 1000.0) / scale;
    let n = t_max / dt;
    if n > 1e8 {
        return Err(CliError::config(format!("step is too small for the span ({n:.0} rows)")));
    }
    Ok(uniform_grid(t_max, dt))
}

fn coefficients(cfg: &RunConfig, spec: &CoefficientSpec, grid: &[f64]) -> Result<EvolutionCoefficients, CliError> {
    Ok(compute_coefficients_with(spec, grid, tolerances(cfg))?)
}

pub fn simulate(cfg: &RunConfig) -> Result<SimulationOutput, CliError> {
    let columns = cfg.columns.clone().unwrap_or_else(|| default_columns(cfg));
    check_columns(cfg, &columns)?;
    let spec = spec_for(cfg)?;
    let times = grid(cfg)?;
    let co = coefficients(cfg, &spec, &times)?;
    let lambda0 = lambda0(cfg);

    let mut table = Table::new(columns.clone());
    let mut zeta_min = (f64::INFINITY, 0.0);
    let mut zeta_max = (f64::NEG_INFINITY, 0.0);
    for s in co.samples() {
        let st = GaussianState::from_sample(s, spec.mass(), spec.hbar(), lambda0);
        if st.zeta < zeta_min.0 {
            zeta_min = (st.zeta, s.t);
        }
        if st.zeta > zeta_max.0 {
            zeta_max = (st.zeta, s.t);
        }
        let mut row = Row {
            s,
            st: &st,
            spec: &spec,
            omega: cfg.omega,
            rates: None,
            com: None,
        };
        let cells = columns
            .iter()
            .map(|c| row.value(c).map(Cell::Num))
            .collect::<Result<Vec<_>, _>>()?;
        table.push(cells);
    }

    let (t0, t1) = co.span();
    let summary = json!({
        "family": cfg.family.tag(),
        "rows": table.rows.len(),
        "t_start": t0,
        "t_end": t1,
        "omega": cfg.omega,
        "lambda0": lambda0,
        "zeta_min": zeta_min.0,
        "zeta_min_at": zeta_min.1,
        "zeta_max": zeta_max.0,
        "zeta_max_at": zeta_max.1,
        "beta_zeros": co.beta_zeros(),
        "wronskian_drift": co.wronskian_drift(),
        "rtol": cfg.rtol,
        "atol": cfg.atol,
    });

    let wigner = match &cfg.wigner {
        None => None,
        Some(req) => {
            let t = instant_time(cfg, req.at)?;
            let wc = coefficients(cfg, &spec, &[0.0, t])?;
            let st = GaussianState::at(&wc, &spec, lambda0, t)?;
            let mut w = Table::new(vec!["x".into(), "p".into(), "w".into()]);
            for x in req.x.values() {
                for p in req.p.values() {
                    w.push(vec![Cell::Num(x), Cell::Num(p), Cell::Num(st.wigner(x, p))]);
                }
            }
            Some((req.path.clone(), w))
        }
    };

    Ok(SimulationOutput { table, summary, wigner })
}

pub fn kernel(cfg: &RunConfig) -> Result<Table, CliError> {
    let req = cfg
        .kernel
        .as_ref()
        .ok_or_else(|| CliError::config("kernel needs a [kernel] section"))?;
    let spec = spec_for(cfg)?;
    let t = instant_time(cfg, req.at)?;
    let grid = if t > 0.0 { vec![0.0, t] } else { vec![0.0] };
    let co = coefficients(cfg, &spec, &grid)?;
    let form = kernel_at(&co, &spec, t)?;
    let mut table = Table::new(["x", "x_prime", "re", "im", "abs"].map(String::from).to_vec());
    for x in req.x.values() {
        for x1 in req.x_prime.values() {
            let k = form.evaluate(x, x1);
            table.push(vec![
                Cell::Num(x),
                Cell::Num(x1),
                Cell::Num(k.re),
                Cell::Num(k.im),
                Cell::Num(k.norm()),
            ]);
        }
    }
    Ok(table)
}

/// Worker count from [`THREADS_ENV`]; `None` lets rayon decide.
pub fn thread_count(value: Option<&str>) -> Result<Option<usize>, CliError> {
    match value.map(str::trim) {
        None | Some("") => Ok(None),
        Some(v) => match v.parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::config(format!("{THREADS_ENV} must be a positive integer (got `{v}`)"))),
        },
    }
}

pub fn scan(cfg: &RunConfig, threads: Option<usize>) -> Result<Table, CliError> {
    let req = cfg.scan.as_ref().ok_or_else(|| CliError::config("scan needs a [scan] section"))?;
    let a = AxisRange::new(req.a.min, req.a.max, req.a.count);
    let q = AxisRange::new(req.q.min, req.q.max, req.q.count);
    let points = scan_points(&a, &q)?;
    let tol = tolerances(cfg);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Numeric(format!("cannot start scan workers: {e}")))?;
    // `collect` on an indexed parallel iterator keeps input order.
    let verdicts: Vec<_> = pool.install(|| points.par_iter().map(|&(a, q)| classify(a, q, req.r, tol)).collect());

    let mut table = Table::new(
        ["a", "q", "abs_trace", "determinant", "stability", "error"]
            .map(String::from)
            .to_vec(),
    );
    for (&(a, q), v) in points.iter().zip(verdicts) {
        table.push(match v {
            Ok(v) => vec![
                Cell::Num(a),
                Cell::Num(q),
                Cell::Num(v.abs_trace),
                Cell::Num(v.determinant),
                Cell::Int(v.stability.code() as i64),
                Cell::Empty,
            ],
            Err(e) => vec![
                Cell::Num(a),
                Cell::Num(q),
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                Cell::Text(e.to_string()),
            ],
        });
    }
    Ok(table)
}

/// Destination for the main table: `--output`, then the configured path,
/// then stdout.
pub fn destination<'a>(flag: Option<&'a Path>, configured: Option<&'a Path>) -> Option<&'a Path> {
    flag.or(configured)
}

pub fn summary_destination(main: Option<&Path>) -> Option<PathBuf> {
    main.map(sidecar_path)
}

pub fn resolve_format(flag: Option<Format>, cfg: &RunConfig) -> Format {
    flag.unwrap_or(cfg.format)
}
