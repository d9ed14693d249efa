use std::fs;

use rni_coherence::channel::DEFAULT_FILE_TOL;
use rni_coherence::{KrausChannel, Result};

use crate::CliError;

pub const BUILTIN_PREFIX: &str = "builtin:";

pub const BUILTIN_NAMES: &[&str] = &[
    "appendix",
    "ad:<eta>",
    "dephasing[:dim]",
    "hadamard",
    "pauli-x",
    "pauli-y",
    "pauli-z",
    "identity[:dim]",
];

fn parse_dim(arg: Option<&str>, spec: &str) -> std::result::Result<usize, CliError> {
    match arg {
        None => Ok(2),
        Some(s) => s
            .parse::<usize>()
            .ok()
            .filter(|&d| d >= 1)
            .ok_or_else(|| CliError::input(format!("bad dimension in `{spec}`"))),
    }
}

pub fn builtin(spec: &str) -> std::result::Result<KrausChannel, CliError> {
    let body = spec.strip_prefix(BUILTIN_PREFIX).unwrap_or(spec);
    let mut parts = body.splitn(2, ':');
    let name = parts.next().unwrap_or_default();
    let arg = parts.next();
    let lift = |r: Result<KrausChannel>| r.map_err(CliError::from);
    match name {
        "appendix" => Ok(KrausChannel::appendix_example()),
        "ad" | "amplitude-damping" => {
            let eta: f64 = arg.and_then(|s| s.parse().ok()).ok_or_else(|| {
                CliError::input(format!(
                    "`{spec}` needs a damping parameter, e.g. builtin:ad:0.5"
                ))
            })?;
            lift(KrausChannel::amplitude_damping(eta))
        }
        "dephasing" => Ok(KrausChannel::dephasing(parse_dim(arg, spec)?)),
        "identity" => Ok(KrausChannel::identity(parse_dim(arg, spec)?)),
        "hadamard" => Ok(KrausChannel::hadamard()),
        "pauli-x" => Ok(KrausChannel::pauli_x()),
        "pauli-y" => Ok(KrausChannel::pauli_y()),
        "pauli-z" => Ok(KrausChannel::pauli_z()),
        _ => Err(CliError::input(format!(
            "unknown built-in channel `{spec}` (known: {})",
            BUILTIN_NAMES.join(", ")
        ))),
    }
}

/// A channel file path or a `builtin:` name.
pub fn load_channel(arg: &str, tol: Option<f64>) -> std::result::Result<KrausChannel, CliError> {
    if arg.starts_with(BUILTIN_PREFIX) {
        return builtin(arg);
    }
    let text =
        fs::read_to_string(arg).map_err(|e| CliError::input(format!("cannot read {arg}: {e}")))?;
    KrausChannel::from_json(&text, tol.unwrap_or(DEFAULT_FILE_TOL))
        .map_err(|e| CliError::input(format!("{arg}: {e}")))
}
