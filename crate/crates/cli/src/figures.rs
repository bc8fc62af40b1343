//! Closed-form data behind the allocation-fraction plots, one CSV per panel.

use std::path::Path;

use ruin_alloc::{
    allocate_gradient, allocate_sup_location, allocate_time_of_ruin, dynamic_var, BrownianModel,
    CompoundPoissonExpModel, Horizon, RiskModel,
};

use crate::commands::spaced;
use crate::config::model_hash;
use crate::error::CliError;
use crate::output::{num, Table};

pub const FIG1_ALPHAS: [f64; 4] = [0.001, 0.01, 0.1, 0.3];
pub const FIG2A_HORIZONS: [f64; 3] = [0.5, 1.0, 5.0];
pub const FIG2B_CAPITALS: [f64; 4] = [0.5, 1.0, 2.0, 5.0];

/// Grids shared by all panels: `α` and `T` are log-spaced (bounds are base-10 exponents), `u` is linear.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grids {
    pub alpha: (f64, f64, usize),
    pub u: (f64, f64, usize),
    pub t: (f64, f64, usize),
}

impl Default for Grids {
    fn default() -> Self {
        Grids {
            alpha: (-3.0, -0.3, 40),
            u: (0.1, 30.0, 60),
            t: (-2.0, 2.0, 60),
        }
    }
}

impl Grids {
    fn alphas(&self) -> Vec<f64> {
        spaced(self.alpha.0, self.alpha.1, self.alpha.2)
            .map(|e| 10f64.powf(e))
            .collect()
    }

    fn capitals(&self) -> Vec<f64> {
        spaced(self.u.0, self.u.1, self.u.2).collect()
    }

    fn horizons(&self) -> Vec<f64> {
        spaced(self.t.0, self.t.1, self.t.2)
            .map(|e| 10f64.powf(e))
            .collect()
    }
}

pub fn brownian(drift: [f64; 2]) -> RiskModel {
    RiskModel::Brownian(BrownianModel {
        drift: drift.to_vec(),
        cov: vec![vec![1.0, 0.5], vec![0.5, 1.0]],
    })
}

pub fn compound_poisson(premium: [f64; 2], intensity: [f64; 2]) -> RiskModel {
    RiskModel::CompoundPoissonExp(CompoundPoissonExpModel {
        premium: premium.to_vec(),
        intensity: intensity.to_vec(),
        claim_rate: 1.0,
    })
}

fn first(fractions: &[f64]) -> String {
    num(fractions[0])
}

fn table(header: Vec<String>, model: &RiskModel, columns: &str) -> Table {
    Table::new(header)
        .meta(
            "model",
            serde_json::to_string(model).expect("models always serialize"),
        )
        .meta("model_sha256", model_hash(model))
        .meta("seed", "none (closed form)")
        .meta("columns", columns)
}

/// First-component fractions `c_1`, `c̄_1` at the VaR against `T`, one pair per `α`.
pub fn fig1(g: &Grids) -> Result<Table, CliError> {
    let model = brownian([-2.0, -1.0]);
    let mut header = vec!["T".to_string()];
    for a in FIG1_ALPHAS {
        header.extend([
            format!("var_alpha_{a}"),
            format!("c1_alpha_{a}"),
            format!("cbar1_alpha_{a}"),
        ]);
    }
    let mut t = table(header, &model, "T horizon; var capital at level alpha; c1 time-of-ruin and cbar1 sup-location fractions of component 1");
    for h in g.horizons() {
        let horizon = Horizon::finite(h)?;
        let mut row = vec![num(h)];
        for a in FIG1_ALPHAS {
            let u = dynamic_var(&model, a, horizon)?;
            row.push(num(u));
            row.push(first(&allocate_time_of_ruin(&model, u, horizon)?.fractions));
            row.push(first(&allocate_sup_location(&model, u, horizon)?.fractions));
        }
        t.push(row);
    }
    Ok(t)
}

/// `c_1`, `c̄_1` against `u` for a few horizons.
pub fn fig2a(g: &Grids) -> Result<Table, CliError> {
    let model = brownian([-2.0, -1.0]);
    let mut header = vec!["u".to_string()];
    for h in FIG2A_HORIZONS {
        header.extend([format!("c1_T_{h}"), format!("cbar1_T_{h}")]);
    }
    let mut t = table(
        header,
        &model,
        "u capital; c1 time-of-ruin and cbar1 sup-location fractions of component 1 at horizon T",
    );
    for u in g.capitals() {
        let mut row = vec![num(u)];
        for h in FIG2A_HORIZONS {
            let horizon = Horizon::finite(h)?;
            row.push(first(&allocate_time_of_ruin(&model, u, horizon)?.fractions));
            row.push(first(&allocate_sup_location(&model, u, horizon)?.fractions));
        }
        t.push(row);
    }
    Ok(t)
}

/// Positive-drift model: `c_1`, `c̄_1` against `T` for a few capital levels.
pub fn fig2b(g: &Grids) -> Result<Table, CliError> {
    let model = brownian([2.0, 1.0]);
    let mut header = vec!["T".to_string()];
    for u in FIG2B_CAPITALS {
        header.extend([format!("c1_u_{u}"), format!("cbar1_u_{u}")]);
    }
    let mut t = table(
        header,
        &model,
        "T horizon; c1 time-of-ruin and cbar1 sup-location fractions of component 1 at capital u",
    );
    for h in g.horizons() {
        let horizon = Horizon::finite(h)?;
        let mut row = vec![num(h)];
        for u in FIG2B_CAPITALS {
            row.push(first(&allocate_time_of_ruin(&model, u, horizon)?.fractions));
            row.push(first(&allocate_sup_location(&model, u, horizon)?.fractions));
        }
        t.push(row);
    }
    Ok(t)
}

/// Gradient, supremum-location and time-of-ruin fractions at the infinite-horizon VaR against `α`.
pub fn alpha_panel(model: &RiskModel, g: &Grids) -> Result<Table, CliError> {
    let header = ["alpha", "var", "gvar1", "cbar1", "c1"]
        .map(String::from)
        .to_vec();
    let mut t = table(header, model, "alpha level; var infinite-horizon capital; gvar1 gradient, cbar1 sup-location and c1 time-of-ruin fractions of component 1");
    for a in g.alphas() {
        let u = dynamic_var(model, a, Horizon::Infinite)?;
        t.push(vec![
            num(a),
            num(u),
            first(&allocate_gradient(model, a, Horizon::Infinite)?.fractions),
            first(&allocate_sup_location(model, u, Horizon::Infinite)?.fractions),
            first(&allocate_time_of_ruin(model, u, Horizon::Infinite)?.fractions),
        ]);
    }
    Ok(t)
}

pub fn fig3b(g: &Grids) -> Result<Table, CliError> {
    let model = compound_poisson([1.0, 1.0], [0.85, 0.95]);
    let header = ["u", "c1", "cbar1"].map(String::from).to_vec();
    let mut t = table(header, &model, "u capital; c1 time-of-ruin and cbar1 sup-location fractions of component 1, infinite horizon");
    for u in g.capitals() {
        t.push(vec![
            num(u),
            first(&allocate_time_of_ruin(&model, u, Horizon::Infinite)?.fractions),
            first(&allocate_sup_location(&model, u, Horizon::Infinite)?.fractions),
        ]);
    }
    Ok(t)
}

/// Every panel as `(file name, table)`.
pub fn all(g: &Grids) -> Result<Vec<(&'static str, Table)>, CliError> {
    Ok(vec![
        ("fig1.csv", fig1(g)?),
        ("fig2a.csv", fig2a(g)?),
        ("fig2b.csv", fig2b(g)?),
        (
            "fig3a.csv",
            alpha_panel(&compound_poisson([1.0, 1.0], [0.85, 0.95]), g)?,
        ),
        ("fig3b.csv", fig3b(g)?),
        (
            "fig4a.csv",
            alpha_panel(&compound_poisson([1.5, 1.5], [0.85, 0.95]), g)?,
        ),
        (
            "fig4b.csv",
            alpha_panel(&compound_poisson([1.0, 1.0], [0.8, 1.0]), g)?,
        ),
    ])
}

pub fn write_all(dir: &Path, g: &Grids) -> Result<Vec<String>, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    all(g)?
        .into_iter()
        .map(|(name, t)| {
            t.write(Some(&dir.join(name)))?;
            Ok(name.to_string())
        })
        .collect()
}
