use std::net::SocketAddr;
use std::path::PathBuf;

use change_core::robust::RobustParams;

pub const DATA_DIR_VAR: &str = "CHANGE_DATA_DIR";
pub const BIND_VAR: &str = "CHANGE_BIND";
pub const EVAL_SAMPLES_VAR: &str = "CHANGE_EVAL_SAMPLES";
pub const SOLVER_ITERS_VAR: &str = "CHANGE_SOLVER_ITERS";
pub const SAMPLES_PER_ITER_VAR: &str = "CHANGE_SAMPLES_PER_ITER";
pub const CANDIDATE_SETS_VAR: &str = "CHANGE_CANDIDATE_SETS";

#[derive(Clone, Debug, PartialEq)]
pub struct Settings {
    pub data_dir: PathBuf,
    pub bind: SocketAddr,
    /// Monte Carlo budgets for sessions whose config omits them.
    pub budgets: RobustParams,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            data_dir: PathBuf::from("sessions"),
            bind: SocketAddr::from(([127, 0, 0, 1], 8080)),
            budgets: RobustParams::default(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{var}: cannot parse {value:?}")]
pub struct SettingsError {
    pub var: &'static str,
    pub value: String,
}

impl Settings {
    /// Defaults overridden by whichever variables `lookup` returns.
    pub fn from_lookup<F: Fn(&str) -> Option<String>>(lookup: F) -> Result<Self, SettingsError> {
        fn parse<T: std::str::FromStr>(var: &'static str, value: String) -> Result<T, SettingsError> {
            value.trim().parse().map_err(|_| SettingsError { var, value })
        }
        let mut s = Settings::default();
        if let Some(v) = lookup(DATA_DIR_VAR) {
            s.data_dir = PathBuf::from(v);
        }
        if let Some(v) = lookup(BIND_VAR) {
            s.bind = parse(BIND_VAR, v)?;
        }
        if let Some(v) = lookup(EVAL_SAMPLES_VAR) {
            s.budgets.eval_samples = parse(EVAL_SAMPLES_VAR, v)?;
        }
        if let Some(v) = lookup(SOLVER_ITERS_VAR) {
            s.budgets.solver.iters = parse(SOLVER_ITERS_VAR, v)?;
        }
        if let Some(v) = lookup(SAMPLES_PER_ITER_VAR) {
            s.budgets.solver.samples_per_iter = parse(SAMPLES_PER_ITER_VAR, v)?;
        }
        if let Some(v) = lookup(CANDIDATE_SETS_VAR) {
            s.budgets.num_candidate_sets = parse(CANDIDATE_SETS_VAR, v)?;
        }
        Ok(s)
    }

    pub fn from_env() -> Result<Self, SettingsError> {
        Settings::from_lookup(|k| std::env::var(k).ok())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides() {
        let s = Settings::from_lookup(|k| match k {
            BIND_VAR => Some("0.0.0.0:9000".into()),
            SOLVER_ITERS_VAR => Some("50".into()),
            _ => None,
        })
        .unwrap();
        assert_eq!(s.bind.port(), 9000);
        assert_eq!(s.budgets.solver.iters, 50);
        assert_eq!(s.budgets.eval_samples, 10_000);
        let err = Settings::from_lookup(|k| (k == EVAL_SAMPLES_VAR).then(|| "many".into())).unwrap_err();
        assert_eq!(err.var, EVAL_SAMPLES_VAR);
    }
}
