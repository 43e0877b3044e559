use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ecodyn_core::allen::{
    bergstrom_capital_solve, harrod_domar_trajectory, multiplier_trajectory, phillips_solve,
    phillips_system_residual, scale_invariance_check, AllenScaling, PhillipsParams, ScaleModel, Stiffness,
};
use ecodyn_core::dims::{check_relation, parse_bindings, parse_relation};
use ecodyn_core::fredholm::{
    char_numbers, nystrom_solve, ode_to_integral, param_singularity_sweep, solve_reduced, Boundary,
    BoundaryCondition, Endpoint, IntegralProblem, KernelSpec, NystromDiscretization, QuadratureRule,
};
use ecodyn_core::harrod::{
    adequacy_residual, classical_trajectory, corrected_trajectory, discrete_path, geometric_income_ratio, HarrodParams,
};
use ecodyn_core::leontief::{
    column_integrals, demand_scale, dynamic_solve, metzler_check, static_solve, taylor_reduce, volterra_solve,
    Demand, LeontiefModel, StaticMethod, TechMatrix,
};
use ecodyn_core::longwave::{estimate_period, lw_classify, lw_simulate, LongWaveParams};
use ecodyn_core::odelin::Root;
use ecodyn_core::{Complex, DVector, TimeGrid, Trajectory};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::catalogue::{self, KernelChoice};
use crate::emit::{Format, Output, Table};
use crate::ingest::{parse_list, read_demand_table, read_matrix};
use crate::CliError;

#[derive(Parser, Debug)]
#[command(name = "ecodyn", version, about = "Macroeconomic dynamics and integral-equation laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Where the result goes.
#[derive(Args, Debug, Clone, Default)]
pub struct Destination {
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format; inferred from the `--out` extension, CSV by default.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Classical growth Y = Y0 exp(mu t / nu).
    Harrod(HarrodArgs),
    /// Corrected growth Y = Y0 / (1 - sigma t)^2, sigma = mu / nu*.
    HarrodCorrected(HarrodCorrectedArgs),
    /// Year-by-year capital accumulation and its mismatch with exponential growth.
    HarrodDiscrete(HarrodDiscreteArgs),
    /// Harrod-Domar model on physical time with time scale t0.
    HarrodDomar(HarrodDomarArgs),
    /// Phillips multiplier-accelerator model.
    Phillips(PhillipsArgs),
    /// Capital equation of the stock-adjustment variant.
    Bergstrom(BergstromArgs),
    /// Pure multiplier decay.
    Multiplier(MultiplierArgs),
    /// Simplified long-wave cycle model.
    Longwave(LongwaveArgs),
    /// Static input-output balance X = A X + c.
    LeontiefStatic(LeontiefStaticArgs),
    /// Truncated-lag input-output dynamics by RK4.
    LeontiefDynamic(LeontiefDynamicArgs),
    /// Second-order input-output dynamics through the Volterra form.
    LeontiefVolterra(LeontiefVolterraArgs),
    /// Integral equation of the second kind by the Nyström method.
    FredholmSolve(FredholmSolveArgs),
    /// Characteristic numbers and eigenfunctions of a kernel.
    FredholmSpectrum(FredholmSpectrumArgs),
    /// Singularity sweep over mu for the kernel k0 + mu k1.
    FredholmSweep(FredholmSweepArgs),
    /// Dimensional consistency of a relation.
    DimCheck(DimCheckArgs),
    /// Whether a model's trajectory depends on the time scale t0.
    ScaleCheck(ScaleCheckArgs),
}

#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct HarrodArgs {
    #[arg(long)]
    mu: f64,
    /// Capital-output ratio.
    #[arg(long)]
    nu: f64,
    #[arg(long, default_value_t = 1.0)]
    y0: f64,
    #[arg(long)]
    t_end: f64,
    #[arg(long)]
    steps: Option<usize>,
    #[command(flatten)]
    #[serde(skip)]
    dest: Destination,
}

#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct HarrodCorrectedArgs {
    #[arg(long)]
    mu: f64,
    /// Capital-output ratio per year.
    #[arg(long)]
    nu_star: f64,
    #[arg(long, default_value_t = 1.0)]
    y0: f64,
    /// Length of a year in the time unit of the grid.
    #[arg(long, default_value_t = 1.0)]
    t_star: f64,
    #[arg(long)]
    t_end: f64,
    #[arg(long)]
    steps: Option<usize>,
    #[command(flatten)]
    #[serde(skip)]
    dest: Destination,
}

#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct HarrodDiscreteArgs {
    #[arg(long)]
    mu: f64,
    #[arg(long)]
    nu: f64,
    #[arg(long, default_value_t = 1.0)]
    k0: f64,
    #[arg(long)]
    years: usize,
    #[command(flatten)]
    #[serde(skip)]
    dest: Destination,
}

#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct HarrodDomarArgs {
    #[arg(long)]
    mu: f64,
    #[arg(long)]
    nu: f64,
    #[arg(long)]
    t0: f64,
    #[arg(long, default_value_t = 1.0)]
    t_star: f64,
    #[arg(long, default_value_t = 1.0)]
    y0: f64,
    #[arg(long)]
    t_end: f64,
    #[arg(long)]
    steps: Option<usize>,
    #[command(flatten)]
    #[serde(skip)]
    dest: Destination,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StiffnessArg {
    KappaNuLambda,
    KappaMuLambda,
}

impl From<StiffnessArg> for Stiffness {
    fn from(s: StiffnessArg) -> Self {
        match s {
            StiffnessArg::KappaNuLambda => Stiffness::KappaNuLambda,
            StiffnessArg::KappaMuLambda => Stiffness::KappaMuLambda,
        }
    }
}

#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct PhillipsArgs {
    #[arg(long)]
    kappa: f64,
    #[arg(long)]
    nu: f64,
    #[arg(long)]
    mu: f64,
    #[arg(long)]
    lambda: f64,
    /// Constant term of the income equation.
    #[arg(long, value_enum, default_value_t = StiffnessArg::KappaNuLambda)]
    stiffness: StiffnessArg,
    #[arg(long, default_value_t = 1.0)]
    t0: f64,
    #[arg(long, default_value_t = 1.0)]
    t_star: f64,
    #[arg(long, default_value_t = 1.0)]
    y0: f64,
    #[arg(long, default_value_t = 0.0)]
    ydot0: f64,
    #[arg(long)]
    t_end: f64,
    #[arg(long)]
    steps: Option<usize>,
    #[command(flatten)]
    #[serde(skip)]
    dest: Destination,
}

#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct BergstromArgs {
    #[arg(long)]
    mu: f64,
    #[arg(long)]
    nu: f64,
    #[arg(long)]
    gamma: f64,
    #[arg(long)]
    lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    k0: f64,
    #[arg(long, default_value_t = 0.0)]
    kdot0: f64,
    #[arg(long)]
    t_end: f64,
    #[arg(long)]
    steps: Option<usize>,
    #[command(flatten)]
    #[serde(skip)]
    dest: Destination,
}

#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct MultiplierArgs {
    #[arg(long)]
    mu: f64,
    #[arg(long)]
    lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    y0: f64,
    #[arg(long)]
    t_end: f64,
    #[arg(long)]
    steps: Option<usize>,
    #[command(flatten)]
    #[serde(skip)]
    dest: Destination,
}

#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct LongwaveArgs {
    #[arg(long)]
    p: f64,
    #[arg(long)]
    r: f64,
    #[arg(long, default_value_t = 1.0)]
    q: f64,
    #[arg(long, default_value_t = -2.0)]
    s: f64,
    #[arg(long, default_value_t = 1.0)]
    x0: f64,
    #[arg(long, default_value_t = 0.0)]
    y0: f64,
    #[arg(long)]
    t_end: f64,
    #[arg(long)]
    steps: Option<usize>,
    #[command(flatten)]
    #[serde(skip)]
    dest: Destination,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    Direct,
    Iterate,
}

#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct LeontiefStaticArgs {
    /// Technology matrix file: `n`, then n rows of n coefficients.
    #[arg(long)]
    matrix: PathBuf,
    /// Final demand, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    demand: String,
    #[arg(long, value_enum, default_value_t = MethodArg::Direct)]
    method: MethodArg,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,
    #[command(flatten)]
    #[serde(skip)]
    dest: Destination,
}

/// Inputs shared by the two dynamic input-output commands.
#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct LeontiefInputs {
    #[arg(long)]
    matrix: PathBuf,
    /// Constant final demand, comma separated.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "demand_file", required_unless_present = "demand_file")]
    demand: Option<String>,
    /// Per-node demand: one row of n values for every grid node.
    #[arg(long)]
    demand_file: Option<PathBuf>,
    /// Initial output; zeros by default.
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    /// Initial rate of change with respect to the rescaled time; zeros by default.
    #[arg(long, allow_hyphen_values = true)]
    xdot0: Option<String>,
    /// Horizon in physical time; the solution runs on t/t0 in [0, 1].
    #[arg(long, default_value_t = 1.0)]
    t0: f64,
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct LeontiefDynamicArgs {
    #[command(flatten)]
    #[serde(flatten)]
    inputs: LeontiefInputs,
    /// Truncation order, 1 or 2.
    #[arg(long, default_value_t = 2)]
    order: usize,
    /// Target integrals of output; when given, the demand factor alpha is fitted.
    #[arg(long, allow_hyphen_values = true)]
    x_star: Option<String>,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[command(flatten)]
    #[serde(skip)]
    dest: Destination,
}

#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct LeontiefVolterraArgs {
    #[command(flatten)]
    #[serde(flatten)]
    inputs: LeontiefInputs,
    #[command(flatten)]
    #[serde(skip)]
    dest: Destination,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleArg {
    Simpson,
    GaussLegendre,
    Trapezoid,
}

impl From<RuleArg> for QuadratureRule {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::Simpson => QuadratureRule::Simpson,
            RuleArg::GaussLegendre => QuadratureRule::GaussLegendre,
            RuleArg::Trapezoid => QuadratureRule::Trapezoid,
        }
    }
}

/// Kernel selection shared by the integral-equation commands.
#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct KernelInputs {
    /// Kernel from the catalogue.
    #[arg(long)]
    kernel: String,
    /// Parameter of the degenerate kernel.
    #[arg(long, default_value_t = 0.0)]
    mu: f64,
    #[arg(long, default_value_t = 201)]
    nodes: usize,
    #[arg(long, value_enum, default_value_t = RuleArg::Simpson)]
    rule: RuleArg,
    /// Initial values z(0), z'(0), ... for `ode-reduced` kernels.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "bc")]
    init: Option<String>,
    /// Two-point conditions `order@point=value`, comma separated, point 0 or 1.
    #[arg(long, allow_hyphen_values = true)]
    bc: Option<String>,
}

#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct FredholmSolveArgs {
    #[command(flatten)]
    #[serde(flatten)]
    kernel: KernelInputs,
    /// Multiplier of the integral term; fixed to 1 for `ode-reduced` kernels.
    #[arg(long)]
    lambda: Option<f64>,
    /// Free term as polynomial coefficients `a0,a1,...`.
    #[arg(long, allow_hyphen_values = true, default_value = "1")]
    q: String,
    /// Horizon of an `ode-reduced` problem with initial data.
    #[arg(long, default_value_t = 1.0)]
    t_end: f64,
    /// Intervals of an `ode-reduced` solve.
    #[arg(long)]
    steps: Option<usize>,
    #[command(flatten)]
    #[serde(skip)]
    dest: Destination,
}

#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct FredholmSpectrumArgs {
    #[command(flatten)]
    #[serde(flatten)]
    kernel: KernelInputs,
    #[arg(long, default_value_t = ecodyn_core::fredholm::DISCARD_THRESHOLD)]
    discard: f64,
    #[command(flatten)]
    #[serde(skip)]
    dest: Destination,
}

#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct FredholmSweepArgs {
    #[arg(long)]
    k0: String,
    #[arg(long)]
    k1: String,
    /// Explicit parameter values, comma separated.
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["mu_from", "mu_to", "mu_count"])]
    mu_grid: Option<String>,
    #[arg(long)]
    mu_from: Option<f64>,
    #[arg(long)]
    mu_to: Option<f64>,
    #[arg(long)]
    mu_count: Option<usize>,
    #[arg(long, default_value_t = 201)]
    nodes: usize,
    #[arg(long, value_enum, default_value_t = RuleArg::Simpson)]
    rule: RuleArg,
    #[command(flatten)]
    #[serde(skip)]
    dest: Destination,
}

#[derive(Args, Debug, Serialize)]
pub struct DimCheckArgs {
    /// Relation `lhs = rhs` using + - * /, int(...) and d(...).
    #[arg(long, allow_hyphen_values = true)]
    relation: String,
    /// Symbol dimensions, e.g. `K:$, Y:$/s, nu:1`.
    #[arg(long, allow_hyphen_values = true)]
    dims: String,
    #[command(flatten)]
    #[serde(skip)]
    dest: Destination,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelArg {
    HarrodDomar,
    Phillips,
    Multiplier,
    CorrectedHarrod,
}

#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct ScaleCheckArgs {
    #[arg(long, value_enum)]
    model: ModelArg,
    #[arg(long)]
    t0_a: f64,
    #[arg(long)]
    t0_b: f64,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    nu_star: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, value_enum, default_value_t = StiffnessArg::KappaNuLambda)]
    stiffness: StiffnessArg,
    #[arg(long, default_value_t = 1.0)]
    t_star: f64,
    #[arg(long, default_value_t = 1.0)]
    y0: f64,
    #[arg(long, default_value_t = 0.0)]
    ydot0: f64,
    #[arg(long)]
    t_end: f64,
    #[arg(long)]
    steps: Option<usize>,
    #[command(flatten)]
    #[serde(skip)]
    dest: Destination,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Harrod(_) => "harrod",
            Command::HarrodCorrected(_) => "harrod-corrected",
            Command::HarrodDiscrete(_) => "harrod-discrete",
            Command::HarrodDomar(_) => "harrod-domar",
            Command::Phillips(_) => "phillips",
            Command::Bergstrom(_) => "bergstrom",
            Command::Multiplier(_) => "multiplier",
            Command::Longwave(_) => "longwave",
            Command::LeontiefStatic(_) => "leontief-static",
            Command::LeontiefDynamic(_) => "leontief-dynamic",
            Command::LeontiefVolterra(_) => "leontief-volterra",
            Command::FredholmSolve(_) => "fredholm-solve",
            Command::FredholmSpectrum(_) => "fredholm-spectrum",
            Command::FredholmSweep(_) => "fredholm-sweep",
            Command::DimCheck(_) => "dim-check",
            Command::ScaleCheck(_) => "scale-check",
        }
    }

    pub fn destination(&self) -> &Destination {
        match self {
            Command::Harrod(a) => &a.dest,
            Command::HarrodCorrected(a) => &a.dest,
            Command::HarrodDiscrete(a) => &a.dest,
            Command::HarrodDomar(a) => &a.dest,
            Command::Phillips(a) => &a.dest,
            Command::Bergstrom(a) => &a.dest,
            Command::Multiplier(a) => &a.dest,
            Command::Longwave(a) => &a.dest,
            Command::LeontiefStatic(a) => &a.dest,
            Command::LeontiefDynamic(a) => &a.dest,
            Command::LeontiefVolterra(a) => &a.dest,
            Command::FredholmSolve(a) => &a.dest,
            Command::FredholmSpectrum(a) => &a.dest,
            Command::FredholmSweep(a) => &a.dest,
            Command::DimCheck(a) => &a.dest,
            Command::ScaleCheck(a) => &a.dest,
        }
    }

    fn params(&self) -> Value {
        let v = match self {
            Command::Harrod(a) => serde_json::to_value(a),
            Command::HarrodCorrected(a) => serde_json::to_value(a),
            Command::HarrodDiscrete(a) => serde_json::to_value(a),
            Command::HarrodDomar(a) => serde_json::to_value(a),
            Command::Phillips(a) => serde_json::to_value(a),
            Command::Bergstrom(a) => serde_json::to_value(a),
            Command::Multiplier(a) => serde_json::to_value(a),
            Command::Longwave(a) => serde_json::to_value(a),
            Command::LeontiefStatic(a) => serde_json::to_value(a),
            Command::LeontiefDynamic(a) => serde_json::to_value(a),
            Command::LeontiefVolterra(a) => serde_json::to_value(a),
            Command::FredholmSolve(a) => serde_json::to_value(a),
            Command::FredholmSpectrum(a) => serde_json::to_value(a),
            Command::FredholmSweep(a) => serde_json::to_value(a),
            Command::DimCheck(a) => serde_json::to_value(a),
            Command::ScaleCheck(a) => serde_json::to_value(a),
        };
        v.expect("argument structs serialize")
    }

    /// Runs the command; `default_steps` fills any omitted `steps`.
    pub fn execute(&self, default_steps: usize) -> Result<Output, CliError> {
        let mut params = self.params();
        if let Some(Value::Null) = params.get("steps") {
            params["steps"] = json!(default_steps);
        }
        let steps = |s: Option<usize>| s.unwrap_or(default_steps);
        let (table, report) = match self {
            Command::Harrod(a) => harrod(a, steps(a.steps))?,
            Command::HarrodCorrected(a) => harrod_corrected(a, steps(a.steps))?,
            Command::HarrodDiscrete(a) => harrod_discrete(a)?,
            Command::HarrodDomar(a) => harrod_domar(a, steps(a.steps))?,
            Command::Phillips(a) => phillips(a, steps(a.steps))?,
            Command::Bergstrom(a) => bergstrom(a, steps(a.steps))?,
            Command::Multiplier(a) => multiplier(a, steps(a.steps))?,
            Command::Longwave(a) => longwave(a, steps(a.steps))?,
            Command::LeontiefStatic(a) => leontief_static(a)?,
            Command::LeontiefDynamic(a) => leontief_dynamic(a, steps(a.inputs.steps))?,
            Command::LeontiefVolterra(a) => leontief_volterra(a, steps(a.inputs.steps))?,
            Command::FredholmSolve(a) => fredholm_solve(a, default_steps)?,
            Command::FredholmSpectrum(a) => fredholm_spectrum(a)?,
            Command::FredholmSweep(a) => fredholm_sweep(a)?,
            Command::DimCheck(a) => dim_check(a)?,
            Command::ScaleCheck(a) => scale_check(a, steps(a.steps))?,
        };
        Ok(Output { command: self.name().to_string(), params, table, report })
    }
}

type Produced = (Option<Table>, Map<String, Value>);

fn report(value: Value) -> Map<String, Value> {
    match value {
        Value::Object(m) => m,
        _ => unreachable!("reports are objects"),
    }
}

fn grid(t_start: f64, t_end: f64, steps: usize) -> Result<TimeGrid, CliError> {
    TimeGrid::new(t_start, t_end, steps).map_err(|e| CliError::Usage(format!("t-end/steps: {e}")))
}

fn complex(z: Complex<f64>) -> Value {
    json!([z.re, z.im])
}

fn roots(rs: &[Root]) -> Value {
    Value::Array(rs.iter().map(|r| json!({"re": r.value.re, "im": r.value.im, "multiplicity": r.multiplicity})).collect())
}

fn last(traj: &Trajectory, label: &str) -> f64 {
    *traj.column_by_label(label).and_then(|c| c.last().copied()).as_ref().unwrap_or(&f64::NAN)
}

fn harrod(a: &HarrodArgs, steps: usize) -> Result<Produced, CliError> {
    let params = HarrodParams { y0: a.y0, ..HarrodParams::new(a.mu, a.nu)? };
    let run = classical_trajectory(&params, a.nu, &grid(0.0, a.t_end, steps)?)?;
    let rep = json!({
        "growth_rate": a.mu / a.nu,
        "final_income": last(&run.trajectory, "Y"),
        "rk4_deviation": run.rk4_deviation,
    });
    Ok((Some(Table::from_trajectory(&run.trajectory)), report(rep)))
}

fn harrod_corrected(a: &HarrodCorrectedArgs, steps: usize) -> Result<Produced, CliError> {
    let params = HarrodParams { y0: a.y0, t_star: a.t_star, ..HarrodParams::new(a.mu, a.nu_star)? };
    params.validate()?;
    let run = corrected_trajectory(&params, &grid(0.0, a.t_end, steps)?)?;
    let rep = json!({
        "sigma": params.sigma(),
        "blowup_time": run.blowup_time,
        "forecast_horizon": run.forecast_horizon,
        "final_income": last(&run.run.trajectory, "Y"),
        "rk4_deviation": run.run.rk4_deviation,
    });
    Ok((Some(Table::from_trajectory(&run.run.trajectory)), report(rep)))
}

fn harrod_discrete(a: &HarrodDiscreteArgs) -> Result<Produced, CliError> {
    let params = HarrodParams { k0: a.k0, ..HarrodParams::new(a.mu, a.nu)? };
    params.validate()?;
    let path = discrete_path(&params, a.nu, a.years)?;
    let mut jumps = vec![0.0];
    jumps.extend(path.impulses.iter().map(|(_, w)| *w));
    let years: Vec<f64> = (0..=a.years).map(|y| y as f64).collect();
    let table = Table::from_columns(
        "year",
        years,
        vec![
            ("K".into(), path.capital.clone()),
            ("Y".into(), path.income.clone()),
            ("I".into(), path.investment.clone()),
            ("impulse".into(), jumps),
        ],
    );
    let mut rep = report(json!({
        "alpha": path.alpha,
        "income_ratio": geometric_income_ratio(path.alpha, a.years),
        "impulse_total": path.impulses.iter().map(|(_, w)| w).sum::<f64>(),
    }));
    if let Ok(r) = adequacy_residual(path.alpha, a.years) {
        rep.insert("exponential_growth".into(), json!(r.lhs_exp));
        rep.insert("geometric_growth".into(), json!(r.rhs_rational));
        rep.insert("mismatch_ratio".into(), json!(r.mismatch_ratio()));
        rep.insert("cumulative_residual".into(), json!(r.cumulative_residual));
        rep.insert("stepwise_residual".into(), json!(r.stepwise_residual));
    }
    Ok((Some(table), rep))
}

fn harrod_domar(a: &HarrodDomarArgs, steps: usize) -> Result<Produced, CliError> {
    let scaling = AllenScaling { y0: a.y0, ..AllenScaling::new(a.t0, a.t_star) };
    let run = harrod_domar_trajectory(&scaling, a.mu, a.nu, &grid(0.0, a.t_end, steps)?)?;
    let rep = json!({
        "growth_rate": a.mu / (a.nu * a.t0),
        "final_income": last(&run.trajectory, "Y"),
        "rk4_deviation": run.rk4_deviation,
    });
    Ok((Some(Table::from_trajectory(&run.trajectory)), report(rep)))
}

fn phillips(a: &PhillipsArgs, steps: usize) -> Result<Produced, CliError> {
    let params = PhillipsParams { stiffness: a.stiffness.into(), ..PhillipsParams::new(a.kappa, a.nu, a.mu, a.lambda) };
    let scaling = AllenScaling::new(a.t0, a.t_star);
    let sol = phillips_solve(&params, &scaling, a.y0, a.ydot0, &grid(0.0, a.t_end, steps)?)?;
    let residual = phillips_system_residual(&sol.trajectory, &params, &scaling);
    let rep = json!({
        "a1": params.a1(),
        "b1": params.b1(),
        "rho": scaling.rho(),
        "period": sol.period,
        "system_residual": residual,
        "roots": roots(&sol.roots),
    });
    Ok((Some(Table::from_trajectory(&sol.trajectory)), report(rep)))
}

fn bergstrom(a: &BergstromArgs, steps: usize) -> Result<Produced, CliError> {
    let sol = bergstrom_capital_solve(a.mu, a.nu, a.gamma, a.lambda, [a.k0, a.kdot0], &grid(0.0, a.t_end, steps)?)?;
    let rep = json!({
        "damping": sol.damping,
        "stiffness": sol.stiffness,
        "equivalent_kappa": sol.equivalent_kappa,
        "roots": roots(&sol.roots),
    });
    Ok((Some(Table::from_trajectory(&sol.trajectory)), report(rep)))
}

fn multiplier(a: &MultiplierArgs, steps: usize) -> Result<Produced, CliError> {
    let traj = multiplier_trajectory(a.mu, a.lambda, a.y0, &grid(0.0, a.t_end, steps)?)?;
    let rep = json!({ "decay_rate": a.lambda * a.mu, "final_income": last(&traj, "Y") });
    Ok((Some(Table::from_trajectory(&traj)), report(rep)))
}

fn longwave(a: &LongwaveArgs, steps: usize) -> Result<Produced, CliError> {
    let params = LongWaveParams { p: a.p, q: a.q, r: a.r, s: a.s };
    let traj = lw_simulate(&params, a.x0, a.y0, &grid(0.0, a.t_end, steps)?)?;
    let cycle = lw_classify(&params);
    let rep = json!({
        "regime": cycle.regime.as_str(),
        "period_years": cycle.period_years,
        "simulated_period": estimate_period(&traj.times(), &traj.column(0)),
        "eigenvalues": cycle.eigenvalues.iter().map(|z| complex(*z)).collect::<Vec<_>>(),
    });
    Ok((Some(Table::from_trajectory(&traj)), report(rep)))
}

fn sector_table(x: &DVector<f64>) -> Table {
    Table::from_columns("sector", (1..=x.len()).map(|i| i as f64).collect(), vec![("x".into(), x.iter().copied().collect())])
}

fn leontief_static(a: &LeontiefStaticArgs) -> Result<Produced, CliError> {
    let tech = read_matrix(&a.matrix)?;
    let c = DVector::from_vec(parse_list("demand", &a.demand)?);
    let method = match a.method {
        MethodArg::Direct => StaticMethod::Direct,
        MethodArg::Iterate => StaticMethod::Iterate { tol: a.tol, max_iter: a.max_iter },
    };
    let metzler = metzler_check(&tech);
    let sol = static_solve(&tech, &c, method)?;
    let rep = json!({
        "productive": metzler.holds,
        "residual": sol.residual,
        "iterations": sol.log.as_ref().map(|l| l.iterations),
        "row_sums": metzler.row_sums,
        "changes": sol.log.as_ref().map(|l| l.changes.clone()),
    });
    Ok((Some(sector_table(&sol.x)), report(rep)))
}

fn vector_or_zeros(key: &str, text: &Option<String>, n: usize) -> Result<DVector<f64>, CliError> {
    match text {
        None => Ok(DVector::zeros(n)),
        Some(t) => {
            let v = parse_list(key, t)?;
            if v.len() != n {
                return Err(CliError::Usage(format!("{key}: expected {n} values, got {}", v.len())));
            }
            Ok(DVector::from_vec(v))
        }
    }
}

fn leontief_model(i: &LeontiefInputs, steps: usize) -> Result<LeontiefModel, CliError> {
    let tech: TechMatrix = read_matrix(&i.matrix)?;
    let n = tech.dim();
    if !(i.t0.is_finite() && i.t0 > 0.0) {
        return Err(CliError::Usage(format!("t0: {} must be positive", i.t0)));
    }
    let demand = match (&i.demand, &i.demand_file) {
        (Some(d), _) => Demand::Constant(vector_or_zeros("demand", &Some(d.clone()), n)?),
        (None, Some(path)) => {
            let rows = read_demand_table(path, n, steps + 1)?;
            let t0 = i.t0;
            // linear interpolation between grid nodes of t/t0
            Demand::Varying(Arc::new(move |t| {
                let s = (t / t0).clamp(0.0, 1.0) * steps as f64;
                let k = (s.floor() as usize).min(steps.saturating_sub(1));
                let w = s - k as f64;
                DVector::from_fn(n, |j, _| (1.0 - w) * rows[k][j] + w * rows[(k + 1).min(steps)][j])
            }))
        }
        (None, None) => return Err(CliError::Usage("demand: provide --demand or --demand-file".into())),
    };
    let x0 = vector_or_zeros("x0", &i.x0, n)?;
    let xdot0 = vector_or_zeros("xdot0", &i.xdot0, n)?;
    Ok(LeontiefModel::new(tech, demand).with_initial(x0, xdot0).with_horizon(i.t0))
}

fn leontief_dynamic(a: &LeontiefDynamicArgs, steps: usize) -> Result<Produced, CliError> {
    let model = leontief_model(&a.inputs, steps)?.with_order(a.order);
    let reduction = taylor_reduce(&model.a, a.order)?;
    let traj = dynamic_solve(&model, steps)?;
    let mut rep = report(json!({
        "order": a.order,
        "derivative_weights": reduction.derivative_weights,
        "output_integrals": column_integrals(&traj).iter().copied().collect::<Vec<_>>(),
    }));
    if let Some(text) = &a.x_star {
        let target = vector_or_zeros("x-star", &Some(text.clone()), model.dim())?;
        let scale = demand_scale(&model, &target, steps, a.tol)?;
        rep.insert("alpha".into(), json!(scale.alpha));
        rep.insert("component_residuals".into(), json!(scale.component_residuals));
    }
    Ok((Some(Table::from_trajectory(&traj)), rep))
}

fn leontief_volterra(a: &LeontiefVolterraArgs, steps: usize) -> Result<Produced, CliError> {
    let model = leontief_model(&a.inputs, steps)?;
    let traj = volterra_solve(&model, steps)?;
    let rep = json!({ "output_integrals": column_integrals(&traj).iter().copied().collect::<Vec<_>>() });
    Ok((Some(Table::from_trajectory(&traj)), report(rep)))
}

fn parse_bc(text: &str) -> Result<Vec<BoundaryCondition>, CliError> {
    let bad = |item: &str| CliError::Usage(format!("bc: `{item}` is not of the form order@point=value with point 0 or 1"));
    text.split(',')
        .map(|item| {
            let (lhs, value) = item.split_once('=').ok_or_else(|| bad(item))?;
            let (order, point) = lhs.split_once('@').ok_or_else(|| bad(item))?;
            let order: usize = order.trim().parse().map_err(|_| bad(item))?;
            let at = match point.trim() {
                "0" => Endpoint::Start,
                "1" => Endpoint::End,
                _ => return Err(bad(item)),
            };
            let value = crate::ingest::parse_number("bc", value)?;
            Ok(BoundaryCondition { order, at, value })
        })
        .collect()
}

fn reduced_problem(k: &KernelInputs, spec: &ecodyn_core::odelin::OdeSpec) -> Result<IntegralProblem, CliError> {
    let boundary = match (&k.init, &k.bc) {
        (Some(init), None) => Boundary::Initial(parse_list("init", init)?),
        (None, Some(bc)) => Boundary::TwoPoint(parse_bc(bc)?),
        _ => return Err(CliError::Usage("init/bc: ode-reduced kernels need --init or --bc".into())),
    };
    Ok(ode_to_integral(spec, &boundary)?)
}

fn resolve_kernel(k: &KernelInputs) -> Result<(KernelSpec, Option<IntegralProblem>), CliError> {
    match catalogue::kernel("kernel", &k.kernel, k.mu)? {
        KernelChoice::Kernel(spec) => {
            if k.init.is_some() || k.bc.is_some() {
                return Err(CliError::Usage("init/bc: only ode-reduced kernels take boundary data".into()));
            }
            Ok((spec, None))
        }
        KernelChoice::Reduced(spec) => {
            let problem = reduced_problem(k, &spec)?;
            Ok((problem.kernel.clone(), Some(problem)))
        }
    }
}

/// Off-node points for the interpolant residual.
const PROBES: [f64; 3] = [0.1234, 0.5678, 0.9012];

fn fredholm_solve(a: &FredholmSolveArgs, default_steps: usize) -> Result<Produced, CliError> {
    let (spec, problem) = resolve_kernel(&a.kernel)?;
    if let Some(problem) = problem {
        if a.lambda.is_some() {
            return Err(CliError::Usage("lambda: fixed to 1 for ode-reduced kernels".into()));
        }
        let traj = solve_reduced(&problem, &grid(0.0, a.t_end, a.steps.unwrap_or(default_steps))?)?;
        let rep = json!({
            "kind": format!("{:?}", problem.kind).to_lowercase(),
            "order": problem.order(),
            "lambda": problem.lambda,
        });
        return Ok((Some(Table::from_trajectory(&traj)), report(rep)));
    }
    let lambda = a.lambda.ok_or_else(|| CliError::Usage("lambda: required for catalogue kernels".into()))?;
    let q = catalogue::polynomial(parse_list("q", &a.q)?);
    let disc = NystromDiscretization::new(spec, a.kernel.rule.into(), a.kernel.nodes)?;
    let sol = nystrom_solve(&disc, lambda, q)?;
    let residuals: Vec<f64> = PROBES.iter().map(|&t| sol.residual_at(t)).collect();
    let rep = json!({
        "kernel": disc.kernel().name(),
        "rule": disc.rule().as_str(),
        "nodes": disc.len(),
        "max_probe_residual": residuals.iter().fold(0.0f64, |m, r| m.max(r.abs())),
        "probes": PROBES,
        "probe_values": PROBES.iter().map(|&t| sol.eval(t)).collect::<Vec<_>>(),
        "probe_residuals": residuals,
    });
    let table = Table::from_columns("t", sol.nodes.clone(), vec![("phi".into(), sol.values.clone())]);
    Ok((Some(table), report(rep)))
}

fn fredholm_spectrum(a: &FredholmSpectrumArgs) -> Result<Produced, CliError> {
    let (spec, _) = resolve_kernel(&a.kernel)?;
    let disc = NystromDiscretization::new(spec, a.kernel.rule.into(), a.kernel.nodes)?;
    let r = char_numbers(&disc, a.discard);
    let mut columns = Vec::new();
    for (i, f) in r.eigenfunctions.iter().enumerate() {
        columns.push((format!("phi{}_re", i + 1), f.iter().map(|z| z.re).collect()));
        columns.push((format!("phi{}_im", i + 1), f.iter().map(|z| z.im).collect()));
    }
    let rep = json!({
        "kernel": disc.kernel().name(),
        "rule": disc.rule().as_str(),
        "nodes": disc.len(),
        "count": r.characteristic_numbers.len(),
        "discard_threshold": r.discard_threshold,
        "rejected": r.rejected,
        "characteristic_numbers": r.characteristic_numbers.iter().map(|z| complex(*z)).collect::<Vec<_>>(),
        "residuals": r.residuals,
    });
    Ok((Some(Table::from_columns("t", r.nodes.clone(), columns)), report(rep)))
}

fn fredholm_sweep(a: &FredholmSweepArgs) -> Result<Produced, CliError> {
    let plain = |key: &str, text: &str| match catalogue::kernel(key, text, 0.0)? {
        KernelChoice::Kernel(k) => Ok(k),
        KernelChoice::Reduced(_) => Err(CliError::Usage(format!("{key}: ode-reduced kernels cannot be swept"))),
    };
    let mu_grid = match (&a.mu_grid, a.mu_from, a.mu_to, a.mu_count) {
        (Some(list), ..) => parse_list("mu-grid", list)?,
        (None, Some(from), Some(to), Some(count)) if count >= 2 => {
            (0..count).map(|i| if i == count - 1 { to } else { from + (to - from) * i as f64 / (count - 1) as f64 }).collect()
        }
        _ => return Err(CliError::Usage("mu-grid: give --mu-grid or --mu-from, --mu-to and --mu-count ≥ 2".into())),
    };
    let rule: QuadratureRule = a.rule.into();
    let d0 = NystromDiscretization::new(plain("k0", &a.k0)?, rule, a.nodes)?;
    let d1 = NystromDiscretization::new(plain("k1", &a.k1)?, rule, a.nodes)?;
    let r = param_singularity_sweep(&d0, &d1, &mu_grid)?;
    let table = Table::from_columns(
        "mu",
        mu_grid,
        vec![
            ("sigma_min".into(), r.points.iter().map(|p| p.sigma_min).collect()),
            ("sigma_max".into(), r.points.iter().map(|p| p.sigma_max).collect()),
            ("flagged".into(), r.points.iter().map(|p| f64::from(u8::from(p.flagged))).collect()),
        ],
    );
    let rep = json!({
        "classification": r.classification.as_str(),
        "flagged_count": r.flagged().len(),
        "flagged": r.flagged(),
    });
    Ok((Some(table), report(rep)))
}

fn dim_check(a: &DimCheckArgs) -> Result<Produced, CliError> {
    let bindings = parse_bindings(&a.dims).map_err(|e| CliError::Usage(format!("dims: {e}")))?;
    let (lhs, rhs) = parse_relation(&a.relation, &bindings).map_err(|e| CliError::Usage(format!("relation: {e}")))?;
    let r = check_relation(&lhs, &rhs).map_err(|e| CliError::Usage(format!("relation: {e}")))?;
    let rep = json!({
        "verdict": if r.consistent { "consistent" } else { "inconsistent" },
        "lhs_dimension": r.lhs_dim.to_string(),
        "rhs_dimension": r.rhs_dim.to_string(),
        "violation_path": r.first_violation.as_ref().map(|v| v.path.clone()),
        "violation": r.first_violation.as_ref().map(|v| v.detail.clone()),
    });
    Ok((None, report(rep)))
}

fn required(key: &str, v: Option<f64>, model: &str) -> Result<f64, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("{key}: required for model {model}")))
}

fn scale_check(a: &ScaleCheckArgs, steps: usize) -> Result<Produced, CliError> {
    let model = match a.model {
        ModelArg::HarrodDomar => ScaleModel::HarrodDomar {
            scaling: AllenScaling { y0: a.y0, ..AllenScaling::new(a.t0_a, a.t_star) },
            mu: required("mu", a.mu, "harrod-domar")?,
            nu: required("nu", a.nu, "harrod-domar")?,
        },
        ModelArg::Phillips => ScaleModel::Phillips {
            params: PhillipsParams {
                stiffness: a.stiffness.into(),
                ..PhillipsParams::new(
                    required("kappa", a.kappa, "phillips")?,
                    required("nu", a.nu, "phillips")?,
                    required("mu", a.mu, "phillips")?,
                    required("lambda", a.lambda, "phillips")?,
                )
            },
            scaling: AllenScaling::new(a.t0_a, a.t_star),
            y0: a.y0,
            ydot0: a.ydot0,
        },
        ModelArg::Multiplier => ScaleModel::Multiplier {
            mu: required("mu", a.mu, "multiplier")?,
            lambda: required("lambda", a.lambda, "multiplier")?,
            y0: a.y0,
        },
        ModelArg::CorrectedHarrod => {
            let base = HarrodParams::new(required("mu", a.mu, "corrected-harrod")?, required("nu-star", a.nu_star, "corrected-harrod")?)?;
            let params = HarrodParams { y0: a.y0, t_star: a.t_star, ..base };
            params.validate()?;
            ScaleModel::CorrectedHarrod { params }
        }
    };
    let g = grid(0.0, a.t_end, steps)?;
    let r = scale_invariance_check(&model, a.t0_a, a.t0_b, &g)?;
    let table = Table::from_columns(
        "t",
        g.nodes().collect(),
        vec![("Y_a".into(), r.income_a.clone()), ("Y_b".into(), r.income_b.clone())],
    );
    let rep = json!({
        "model": r.model,
        "verdict": r.verdict.as_str(),
        "max_rel_deviation": r.max_rel_deviation,
        "trivially_invariant": r.trivially_invariant,
        "t0_a": r.t0_a,
        "t0_b": r.t0_b,
    });
    Ok((Some(table), report(rep)))
}
