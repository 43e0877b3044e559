//! Named functions and kernels accepted by the integral-equation commands.
//!
//! Functions: `one`, `zero`, `t`, `t-half` (`t - 1/2`), `exp`, `exp-neg`.
//!
//! Kernels: `t-plus-eta`, `exp-diff`, `zero`, `product(f,g)` for
//! `f(t) g(η)`, `degenerate(rho,sigma)` for `ρ(t)ρ(η) + μ σ(t)ρ(η)`, and
//! `ode-reduced(c_n;...;c_0)` for the kernel of a reduced linear ODE.

use std::sync::Arc;

use ecodyn_core::fredholm::KernelSpec;
use ecodyn_core::odelin::{OdeSpec, Sampler};

use crate::ingest::parse_number;
use crate::CliError;

pub fn function(name: &str) -> Result<Sampler, CliError> {
    let f: Sampler = match name.trim() {
        "one" => Arc::new(|_| 1.0),
        "zero" => Arc::new(|_| 0.0),
        "t" => Arc::new(|t| t),
        "t-half" => Arc::new(|t| t - 0.5),
        "exp" => Arc::new(f64::exp),
        "exp-neg" => Arc::new(|t: f64| (-t).exp()),
        other => {
            return Err(CliError::Usage(format!(
                "unknown function `{other}`; expected one of one, zero, t, t-half, exp, exp-neg"
            )))
        }
    };
    Ok(f)
}

/// Polynomial `a0 + a1 t + ...`.
pub fn polynomial(coeffs: Vec<f64>) -> Sampler {
    Arc::new(move |t| coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c))
}

pub enum KernelChoice {
    Kernel(KernelSpec),
    /// Coefficients of the ODE whose reduction defines the kernel.
    Reduced(OdeSpec),
}

fn call<'a>(text: &'a str, name: &str) -> Option<&'a str> {
    text.strip_prefix(name)?.trim_start().strip_prefix('(')?.strip_suffix(')')
}

fn pair<'a>(key: &str, args: &'a str) -> Result<(&'a str, &'a str), CliError> {
    let parts: Vec<&str> = args.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => Ok((a, b)),
        _ => Err(CliError::Usage(format!("{key}: expected two function names, got `{args}`"))),
    }
}

pub fn kernel(key: &str, text: &str, mu: f64) -> Result<KernelChoice, CliError> {
    let text = text.trim();
    let spec = match text {
        "t-plus-eta" => KernelSpec::t_plus_eta(),
        "exp-diff" => KernelSpec::exp_diff(),
        "zero" => KernelSpec::zero(),
        _ => {
            if let Some(args) = call(text, "product") {
                let (f, g) = pair(key, args)?;
                KernelSpec::product(format!("product({f},{g})"), function(f)?, function(g)?)
            } else if let Some(args) = call(text, "degenerate") {
                let (rho, sigma) = pair(key, args)?;
                KernelSpec::degenerate(function(rho)?, function(sigma)?, mu)
            } else if let Some(args) = call(text, "ode-reduced") {
                let coeffs = args.split(';').map(|c| parse_number(key, c)).collect::<Result<Vec<_>, _>>()?;
                let spec = OdeSpec::new(coeffs).map_err(|e| CliError::Usage(format!("{key}: {e}")))?;
                return Ok(KernelChoice::Reduced(spec));
            } else {
                return Err(CliError::Usage(format!(
                    "{key}: unknown kernel `{text}`; expected t-plus-eta, exp-diff, zero, product(f,g), degenerate(rho,sigma) or ode-reduced(c_n;...;c_0)"
                )));
            }
        }
    };
    Ok(KernelChoice::Kernel(spec))
}
