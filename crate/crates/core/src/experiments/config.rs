//! Flat `key = value` configuration with `[section]` headers.
//!
//! Keys are addressed as `section.key`. File values are applied first, then
//! command-line overrides; unknown keys are rejected.

use std::collections::BTreeMap;
use std::path::PathBuf;

use ini::Ini;
use thiserror::Error;

use super::{ScenarioConfig, ScenarioId};
use crate::model::ModePolicy;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("unknown key '{0}'")]
    UnknownKey(String),
    #[error("key '{key}': cannot parse '{value}': {reason}")]
    BadValue { key: String, value: String, reason: String },
    #[error("malformed config: {0}")]
    Syntax(String),
    #[error("override '{0}' is not of the form section.key=value")]
    BadOverride(String),
    #[error("key '{0}' is required for this mode policy")]
    Missing(String),
}

pub struct KeySpec {
    pub key: &'static str,
    pub unit: &'static str,
    pub help: &'static str,
}

const fn key(key: &'static str, unit: &'static str, help: &'static str) -> KeySpec {
    KeySpec { key, unit, help }
}

/// Every accepted key. Time is in cavity-crossing units `L/c`, positions in
/// units of `L`, frequencies in rad per `L/c`.
pub const CONFIG_KEYS: &[KeySpec] = &[
    key("scenario.id", "-", "fig1..fig6 or custom; selects the preset"),
    key("scenario.scale", "-", "shrinks preset mode counts and resonance index, in (0, 1]"),
    key("scenario.t_end", "L/c", "integration end time"),
    key("atoms.gamma1", "c/L", "decay rate of atom 1 (Omega_1^2)"),
    key("atoms.gamma2", "c/L", "decay rate of atom 2"),
    key("atoms.gamma3", "c/L", "decay rate of atom 3"),
    key("atoms.detuning", "rad c/L", "omega_1 - omega_2"),
    key("atoms.x1", "L", "position of atom 1"),
    key("atoms.x2", "L", "position of atom 2"),
    key("atoms.x3", "L", "position of atom 3"),
    key("atoms.resonance_index", "-", "omega_1 / pi (mode index at resonance)"),
    key("modes.policy", "-", "symmetric or asymmetric"),
    key("modes.center_index", "-", "symmetric: central mode index"),
    key("modes.half_count", "-", "symmetric: modes on each side of the center"),
    key("modes.lowest_index", "-", "asymmetric: lowest mode index"),
    key("modes.count", "-", "asymmetric: number of modes"),
    key("modes.sweep", "-", "comma-separated mode counts for a convergence sweep"),
    key("integrator.phase_per_step", "rad", "phase advance of the fastest frequency per step"),
    key("integrator.resolution_cap", "rad", "refuse runs whose phase per step exceeds this"),
    key("integrator.corrector_iterations", "-", "Adams-Moulton corrections per step (1 = PECE)"),
    key("integrator.sample_rows", "-", "approximate number of stored series rows"),
    key("observables.grid_points", "-", "field profile grid size over [0, L]"),
    key("observables.profile_times", "L/c", "comma-separated field snapshot times"),
    key("observables.t_causal", "L/c", "end of the pre-causal window for p3"),
    key("run.budget_seconds", "s", "refuse runs estimated to take longer"),
    key("run.output_dir", "path", "directory for CSV and metadata output"),
];

fn is_known(k: &str) -> bool {
    CONFIG_KEYS.iter().any(|s| s.key == k)
}

/// Resolved `section.key -> value` pairs.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigMap {
    values: BTreeMap<String, String>,
}

impl ConfigMap {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let ini = Ini::load_from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
        let mut map = Self::default();
        for (section, props) in ini.iter() {
            for (k, v) in props.iter() {
                let full = match section {
                    Some(s) => format!("{s}.{k}"),
                    None => k.to_string(),
                };
                map.set(&full, v)?;
            }
        }
        Ok(map)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        if !is_known(key) {
            return Err(ConfigError::UnknownKey(key.to_string()));
        }
        self.values.insert(key.to_string(), value.trim().to_string());
        Ok(())
    }

    /// Applies a `section.key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (k, v) = assignment.split_once('=').ok_or_else(|| ConfigError::BadOverride(assignment.to_string()))?;
        self.set(k.trim(), v)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.parse::<T>().map_err(|e| ConfigError::BadValue {
                    key: key.to_string(),
                    value: v.to_string(),
                    reason: e.to_string(),
                })
            })
            .transpose()
    }

    fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| {
                        s.parse::<T>().map_err(|e| ConfigError::BadValue {
                            key: key.to_string(),
                            value: v.to_string(),
                            reason: e.to_string(),
                        })
                    })
                    .collect()
            })
            .transpose()
    }

    /// Starts from the preset named by `scenario.id` (custom if absent) and
    /// applies every other key on top.
    pub fn to_scenario(&self) -> Result<ScenarioConfig, ConfigError> {
        let id: ScenarioId = self.parsed("scenario.id")?.unwrap_or(ScenarioId::Custom);
        let scale: f64 = self.parsed("scenario.scale")?.unwrap_or(1.0);
        let mut c = ScenarioConfig::preset(id, scale);

        macro_rules! take {
            ($key:literal, $field:expr) => {
                if let Some(v) = self.parsed($key)? {
                    $field = v;
                }
            };
        }
        take!("scenario.t_end", c.t_end);
        take!("atoms.gamma1", c.decay_rates[0]);
        take!("atoms.gamma2", c.decay_rates[1]);
        take!("atoms.gamma3", c.decay_rates[2]);
        take!("atoms.detuning", c.detuning);
        take!("atoms.x1", c.positions[0]);
        take!("atoms.x2", c.positions[1]);
        take!("atoms.x3", c.positions[2]);
        take!("atoms.resonance_index", c.resonance_index);
        take!("integrator.phase_per_step", c.phase_per_step);
        take!("integrator.resolution_cap", c.resolution_cap);
        take!("integrator.corrector_iterations", c.corrector_iterations);
        take!("integrator.sample_rows", c.sample_rows);
        take!("observables.grid_points", c.grid_points);
        take!("observables.t_causal", c.t_causal);
        take!("run.budget_seconds", c.budget_seconds);
        if let Some(dir) = self.get("run.output_dir") {
            c.output_dir = Some(PathBuf::from(dir));
        }
        if let Some(times) = self.list("observables.profile_times")? {
            c.profile_times = times;
        }
        if let Some(sweep) = self.list("modes.sweep")? {
            c.sweep = sweep;
        }
        c.modes = self.mode_policy(c.modes)?;
        Ok(c)
    }

    fn mode_policy(&self, current: ModePolicy) -> Result<ModePolicy, ConfigError> {
        let kind = match self.get("modes.policy") {
            None => match current {
                ModePolicy::Symmetric { .. } => "symmetric",
                ModePolicy::Asymmetric { .. } => "asymmetric",
            },
            Some(k @ ("symmetric" | "asymmetric")) => k,
            Some(other) => {
                return Err(ConfigError::BadValue {
                    key: "modes.policy".into(),
                    value: other.into(),
                    reason: "expected symmetric or asymmetric".into(),
                })
            }
        };
        let field = |key: &str, fallback: Option<u64>| -> Result<u64, ConfigError> {
            self.parsed::<u64>(key)?.or(fallback).ok_or_else(|| ConfigError::Missing(key.to_string()))
        };
        Ok(match (kind, current) {
            ("symmetric", cur) => {
                let (c0, h0) = match cur {
                    ModePolicy::Symmetric { center_index, half_count } => (Some(center_index), Some(half_count)),
                    _ => (None, None),
                };
                ModePolicy::Symmetric {
                    center_index: field("modes.center_index", c0)?,
                    half_count: field("modes.half_count", h0)?,
                }
            }
            (_, cur) => {
                let (l0, n0) = match cur {
                    ModePolicy::Asymmetric { lowest_index, count } => (Some(lowest_index), Some(count)),
                    _ => (None, None),
                };
                ModePolicy::Asymmetric {
                    lowest_index: field("modes.lowest_index", l0)?,
                    count: field("modes.count", n0)?,
                }
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_overrides() {
        let text = "[scenario]\nid = fig5\nscale = 0.1\n[atoms]\ngamma2 = 9\n";
        let mut map = ConfigMap::parse(text).unwrap();
        map.apply_override("observables.grid_points=101").unwrap();
        map.apply_override("atoms.gamma2 = 4").unwrap();
        let c = map.to_scenario().unwrap();
        assert_eq!(c.scenario, ScenarioId::Fig5);
        assert_eq!(c.sweep, vec![1001, 2001]);
        assert_eq!(c.decay_rates, [1.0, 4.0, 256.0]);
        assert_eq!(c.grid_points, 101);
    }

    #[test]
    fn unknown_keys_are_errors() {
        assert_eq!(
            ConfigMap::parse("[atoms]\ngamma4 = 1\n"),
            Err(ConfigError::UnknownKey("atoms.gamma4".into()))
        );
        assert_eq!(ConfigMap::parse("t_end = 1\n"), Err(ConfigError::UnknownKey("t_end".into())));
        let mut m = ConfigMap::default();
        assert!(matches!(m.apply_override("nonsense"), Err(ConfigError::BadOverride(_))));
    }

    #[test]
    fn policy_switch_requires_fields() {
        let map = ConfigMap::parse("[modes]\npolicy = asymmetric\n").unwrap();
        assert_eq!(map.to_scenario(), Err(ConfigError::Missing("modes.lowest_index".into())));
        let map = ConfigMap::parse("[modes]\npolicy = asymmetric\nlowest_index = 1\ncount = 1\n").unwrap();
        assert_eq!(map.to_scenario().unwrap().modes, ModePolicy::Asymmetric { lowest_index: 1, count: 1 });
        let map = ConfigMap::parse("[modes]\npolicy = helical\n").unwrap();
        assert!(matches!(map.to_scenario(), Err(ConfigError::BadValue { .. })));
    }

    #[test]
    fn bad_numbers() {
        let map = ConfigMap::parse("[scenario]\nt_end = soon\n").unwrap();
        assert!(matches!(map.to_scenario(), Err(ConfigError::BadValue { .. })));
    }
}
