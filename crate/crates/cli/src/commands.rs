use ruin_alloc::verify::verify;
use ruin_alloc::{
    allocate_asymptotic, allocate_gradient, allocate_sup_location_with, allocate_time_of_ruin_with,
    dynamic_var, ruin_prob_with, AllocationReport, Horizon, RiskModel, RuinQuery, SimConfig,
};

use crate::error::CliError;
use crate::output::{num, opt, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Method {
    /// Time-of-ruin allocation
    K,
    /// Supremum-location allocation
    Kbar,
    /// Gradient (Euler) allocation of the dynamic VaR
    Gvar,
    /// Large-capital limit m_i/m
    Asymptotic,
}

/// What is being allocated: a capital level, or the VaR at a level `α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    Capital(f64),
    Alpha(f64),
    Unspecified,
}

impl Target {
    pub fn from_flags(u: Option<f64>, alpha: Option<f64>) -> Result<Self, CliError> {
        match (u, alpha) {
            (Some(_), Some(_)) => Err(CliError::Usage(
                "give either --u or --alpha, not both".into(),
            )),
            (Some(u), None) => Ok(Target::Capital(u)),
            (None, Some(a)) => Ok(Target::Alpha(a)),
            (None, None) => Ok(Target::Unspecified),
        }
    }

    fn alpha(self) -> Option<f64> {
        match self {
            Target::Alpha(a) => Some(a),
            _ => None,
        }
    }
}

pub fn parse_horizon(s: &str) -> Result<Horizon, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "inf" | "infinity" => Ok(Horizon::Infinite),
        t => {
            let t: f64 = t
                .parse()
                .map_err(|_| format!("expected \"inf\" or a positive number, got {s:?}"))?;
            Horizon::finite(t).map_err(|e| e.to_string())
        }
    }
}

fn capital(
    model: &RiskModel,
    target: Target,
    horizon: Horizon,
    method: Method,
) -> Result<f64, CliError> {
    match target {
        Target::Capital(u) => Ok(u),
        Target::Alpha(a) => Ok(dynamic_var(model, a, horizon)?),
        Target::Unspecified => Err(CliError::Usage(
            format!("method {method:?} needs --u or --alpha").to_lowercase(),
        )),
    }
}

pub fn allocate(
    model: &RiskModel,
    method: Method,
    target: Target,
    horizon: Horizon,
    cfg: &SimConfig,
) -> Result<AllocationReport, CliError> {
    Ok(match method {
        Method::K => allocate_time_of_ruin_with(
            model,
            capital(model, target, horizon, method)?,
            horizon,
            cfg,
        )?,
        Method::Kbar => allocate_sup_location_with(
            model,
            capital(model, target, horizon, method)?,
            horizon,
            cfg,
        )?,
        Method::Gvar => match target {
            Target::Alpha(a) => allocate_gradient(model, a, horizon)?,
            _ => return Err(CliError::Usage("method gvar needs --alpha".into())),
        },
        Method::Asymptotic => {
            let u = match target {
                Target::Unspecified => None,
                t => Some(capital(model, t, horizon, method)?),
            };
            allocate_asymptotic(model, u)?
        }
    })
}

pub fn allocation_header(d: usize) -> Vec<String> {
    let mut h: Vec<String> = ["method", "engine", "alpha", "u", "horizon"]
        .map(String::from)
        .to_vec();
    h.extend((1..=d).map(|i| format!("c_{i}")));
    h.extend((1..=d).map(|i| format!("K_{i}")));
    h.extend((1..=d).map(|i| format!("se_{i}")));
    h.push("expected_time".into());
    h
}

pub fn allocation_row(rep: &AllocationReport, alpha: Option<f64>) -> Vec<String> {
    let d = rep.fractions.len();
    let mut row = vec![
        rep.method.as_str().to_string(),
        rep.engine.as_str().to_string(),
        opt(alpha),
        opt(rep.u),
        rep.horizon.to_string(),
    ];
    row.extend(rep.fractions.iter().copied().map(num));
    match &rep.amounts {
        Some(a) => row.extend(a.iter().copied().map(num)),
        None => row.extend(std::iter::repeat_n(String::new(), d)),
    }
    match &rep.std_errors {
        Some(s) => row.extend(s.iter().copied().map(num)),
        None => row.extend(std::iter::repeat_n(String::new(), d)),
    }
    row.push(opt(rep
        .diagnostics
        .expected_ruin_time
        .or(rep.diagnostics.expected_argmax_time)));
    row
}

pub fn run_ruin(
    model: &RiskModel,
    u: f64,
    horizon: Horizon,
    cfg: &SimConfig,
) -> Result<Table, CliError> {
    let res = ruin_prob_with(model, RuinQuery::new(u, horizon)?, cfg)?;
    let mut t = Table::new(["u", "horizon", "psi", "method", "std_error"]);
    t.push(vec![
        num(u),
        horizon.to_string(),
        num(res.probability),
        res.method.as_str().into(),
        opt(res.std_error),
    ]);
    Ok(t)
}

pub fn run_var(model: &RiskModel, alpha: f64, horizon: Horizon) -> Result<Table, CliError> {
    let var = dynamic_var(model, alpha, horizon)?;
    let mut t = Table::new(["alpha", "horizon", "var"]);
    t.push(vec![num(alpha), horizon.to_string(), num(var)]);
    Ok(t)
}

pub fn run_allocate(
    model: &RiskModel,
    method: Method,
    target: Target,
    horizon: Horizon,
    cfg: &SimConfig,
) -> Result<Table, CliError> {
    let rep = allocate(model, method, target, horizon, cfg)?;
    let mut t = Table::new(allocation_header(model.dim()));
    t.push(allocation_row(&rep, target.alpha()));
    Ok(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Axis {
    U,
    Alpha,
    #[value(name = "T")]
    T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub from: f64,
    pub to: f64,
    pub points: usize,
    pub log: bool,
}

impl Grid {
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        if self.points == 0 {
            return Err(CliError::Usage("--points must be at least 1".into()));
        }
        if !(self.from.is_finite() && self.to.is_finite())
            || (self.log && (self.from <= 0.0 || self.to <= 0.0))
        {
            return Err(CliError::Usage(
                "grid bounds must be finite, and positive with --log".into(),
            ));
        }
        let (a, b) = if self.log {
            (self.from.log10(), self.to.log10())
        } else {
            (self.from, self.to)
        };
        Ok(spaced(a, b, self.points)
            .map(|x| if self.log { 10f64.powf(x) } else { x })
            .collect())
    }
}

/// `n` evenly spaced points from `a` to `b` inclusive.
pub fn spaced(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| {
        if n == 1 {
            a
        } else {
            a + (b - a) * k as f64 / (n - 1) as f64
        }
    })
}

pub fn run_sweep(
    model: &RiskModel,
    method: Method,
    axis: Axis,
    grid: Grid,
    target: Target,
    horizon: Horizon,
    cfg: &SimConfig,
) -> Result<Table, CliError> {
    let name = match axis {
        Axis::U => "u",
        Axis::Alpha => "alpha",
        Axis::T => "T",
    };
    match (axis, target) {
        (Axis::U | Axis::Alpha, Target::Capital(_) | Target::Alpha(_)) => {
            return Err(CliError::Usage(format!(
                "--u and --alpha are set by the sweep over {name}"
            )));
        }
        (Axis::T, _) if !horizon.is_infinite() => {
            return Err(CliError::Usage(
                "--horizon is set by the sweep over T".into(),
            ));
        }
        _ => {}
    }
    let mut header = vec![name.to_string()];
    header.extend(allocation_header(model.dim()));
    let mut table = Table::new(header);
    for x in grid.values()? {
        let (target, horizon) = match axis {
            Axis::U => (Target::Capital(x), horizon),
            Axis::Alpha => (Target::Alpha(x), horizon),
            Axis::T => (target, Horizon::finite(x)?),
        };
        let rep = allocate(model, method, target, horizon, cfg)?;
        let mut row = vec![num(x)];
        row.extend(allocation_row(&rep, target.alpha()));
        table.push(row);
    }
    Ok(table)
}

/// Runs the oracle checks; the table is returned even when checks fail.
pub fn run_verify(model: &RiskModel, cfg: &SimConfig) -> Result<(Table, usize), CliError> {
    let checks = verify(model, cfg)?;
    let mut t = Table::new(["check", "status", "value", "reference", "tolerance"]);
    let mut failed = 0;
    for c in &checks {
        failed += usize::from(!c.passed);
        t.push(vec![
            format!("\"{}\"", c.name),
            if c.passed { "PASS" } else { "FAIL" }.into(),
            num(c.value),
            num(c.reference),
            num(c.tolerance),
        ]);
    }
    Ok((t, failed))
}
