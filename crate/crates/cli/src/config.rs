//! Dotted-key TOML configs.
//!
//! ```toml
//! experiment = "trace_distance"
//! model = "haar"
//! n_h.min = 1
//! n_h.max = 7
//! instances = 1000
//! distributions.params.kind = "uniform"
//! distributions.params.lo = 0.0
//! distributions.params.hi = 1.0
//! ```

use std::fmt;
use std::path::Path;

use plateaulab_core::ensembles::CoeffDistribution;
use plateaulab_core::experiments::{
    ConfigIssue, Distributions, ExperimentConfig, ExperimentKind, HiddenRange, ModelKind,
};
use toml::{Table, Value};

const TOP_KEYS: &[&str] = &[
    "experiment",
    "model",
    "n_v",
    "n_h",
    "instances",
    "seed",
    "bins",
    "h",
    "t",
    "distributions",
];
const DISTRIBUTION_SLOTS: &[&str] = &["onsite", "offsite", "params"];

/// Every problem found in a config file, each tagged with its key path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigReport {
    pub issues: Vec<ConfigIssue>,
}

impl ConfigReport {
    pub fn single(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            issues: vec![ConfigIssue::new(key, message)],
        }
    }

    /// True when some issue is reported under `key`.
    pub fn mentions(&self, key: &str) -> bool {
        self.issues.iter().any(|i| i.key == key)
    }
}

impl fmt::Display for ConfigReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, issue) in self.issues.iter().enumerate() {
            if n > 0 {
                writeln!(f)?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigReport {}

/// Reads and validates a config file, filling defaults for optional keys.
pub fn validate_config(path: &Path) -> Result<ExperimentConfig, ConfigReport> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        ConfigReport::single("<file>", format!("cannot read {}: {e}", path.display()))
    })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigReport> {
    let table: Table = toml::from_str(text)
        .map_err(|e| ConfigReport::single("<syntax>", e.message().trim().to_string()))?;
    let mut r = Reader::default();
    r.unknown_keys(&table, "", TOP_KEYS);

    let experiment = r
        .string(&table, "experiment", "experiment")
        .and_then(|s| r.tag::<ExperimentKind>("experiment", s));
    let model = r
        .string(&table, "model", "model")
        .and_then(|s| r.tag::<ModelKind>("model", s));
    let n_v = r.uint(&table, "n_v", "n_v", Some(1));
    let n_h = r.table(&table, "n_h", "n_h", true).and_then(|t| {
        r.unknown_keys(t, "n_h", &["min", "max"]);
        let min = r.uint(t, "min", "n_h.min", None);
        let max = r.uint(t, "max", "n_h.max", None);
        Some(HiddenRange {
            min: min?,
            max: max?,
        })
    });
    let instances = r.count(&table, "instances", "instances", None);
    let seed = r.seed(&table);
    let bins = r.count(
        &table,
        "bins",
        "bins",
        Some(plateaulab_core::experiments::DEFAULT_BINS),
    );
    let h = r.float(
        &table,
        "h",
        "h",
        Some(plateaulab_core::gradients::DEFAULT_STEP),
    );
    if let Some(step) = h.filter(|s| s.is_nan() || *s <= 0.0) {
        r.push("h", format!("must be positive, got {step}"));
    }
    let t = r.float(
        &table,
        "t",
        "t",
        Some(plateaulab_core::experiments::DEFAULT_EVOLUTION_TIME),
    );
    let distributions =
        r.distributions(&table, experiment.unwrap_or(ExperimentKind::TraceDistance));

    let cfg = match (
        experiment,
        model,
        n_v,
        n_h,
        instances,
        seed,
        bins,
        h,
        t,
        distributions,
    ) {
        (
            Some(experiment),
            Some(model),
            Some(n_v),
            Some(n_h),
            Some(instances),
            Some(seed),
            Some(bins),
            Some(h),
            Some(t),
            Some(distributions),
        ) => Some(ExperimentConfig {
            experiment,
            model,
            n_v,
            n_h,
            instances,
            seed,
            distributions,
            h,
            t,
            bins,
        }),
        _ => None,
    };
    if let Some(cfg) = &cfg {
        for issue in cfg.issues() {
            if !r.issues.iter().any(|i| i.key == issue.key) {
                r.issues.push(issue);
            }
        }
    }
    match cfg {
        Some(cfg) if r.issues.is_empty() => Ok(cfg),
        _ => Err(ConfigReport { issues: r.issues }),
    }
}

/// Renders a config back to the dotted-key form accepted by [`parse_config`].
pub fn render_config(cfg: &ExperimentConfig) -> String {
    let mut out = format!(
        "experiment = \"{}\"\nmodel = \"{}\"\nn_v = {}\nn_h.min = {}\nn_h.max = {}\ninstances = {}\nseed = {}\nbins = {}\nh = {:?}\nt = {:?}\n",
        cfg.experiment, cfg.model, cfg.n_v, cfg.n_h.min, cfg.n_h.max, cfg.instances, cfg.seed, cfg.bins, cfg.h, cfg.t
    );
    for (slot, d) in [
        ("onsite", cfg.distributions.onsite),
        ("offsite", cfg.distributions.offsite),
        ("params", cfg.distributions.params),
    ] {
        let p = format!("distributions.{slot}");
        match d {
            CoeffDistribution::Normal { mean, variance } => out.push_str(&format!(
                "{p}.kind = \"normal\"\n{p}.mean = {mean:?}\n{p}.variance = {variance:?}\n"
            )),
            CoeffDistribution::Uniform { lo, hi } => out.push_str(&format!(
                "{p}.kind = \"uniform\"\n{p}.lo = {lo:?}\n{p}.hi = {hi:?}\n"
            )),
            CoeffDistribution::Constant { value } => {
                out.push_str(&format!("{p}.kind = \"constant\"\n{p}.value = {value:?}\n"))
            }
        }
    }
    out
}

#[derive(Default)]
struct Reader {
    issues: Vec<ConfigIssue>,
}

impl Reader {
    fn push(&mut self, key: &str, message: impl Into<String>) {
        self.issues.push(ConfigIssue::new(key, message));
    }

    fn unknown_keys(&mut self, table: &Table, prefix: &str, allowed: &[&str]) {
        for key in table.keys() {
            if !allowed.contains(&key.as_str()) {
                let path = if prefix.is_empty() {
                    key.clone()
                } else {
                    format!("{prefix}.{key}")
                };
                self.push(&path, "unknown key");
            }
        }
    }

    fn missing(&mut self, path: &str) {
        self.push(path, "missing required key");
    }

    fn string<'t>(&mut self, table: &'t Table, key: &str, path: &str) -> Option<&'t str> {
        match table.get(key) {
            None => {
                self.missing(path);
                None
            }
            Some(Value::String(s)) => Some(s),
            Some(v) => {
                self.push(path, format!("expected a string, got {}", v.type_str()));
                None
            }
        }
    }

    fn tag<T: std::str::FromStr>(&mut self, path: &str, s: &str) -> Option<T>
    where
        T::Err: fmt::Display,
    {
        match s.parse() {
            Ok(v) => Some(v),
            Err(e) => {
                self.push(path, e.to_string());
                None
            }
        }
    }

    fn table<'t>(
        &mut self,
        table: &'t Table,
        key: &str,
        path: &str,
        required: bool,
    ) -> Option<&'t Table> {
        match table.get(key) {
            None => {
                if required {
                    self.missing(path);
                }
                None
            }
            Some(Value::Table(t)) => Some(t),
            Some(v) => {
                self.push(path, format!("expected a table, got {}", v.type_str()));
                None
            }
        }
    }

    fn integer(&mut self, table: &Table, key: &str, path: &str) -> Option<Option<i64>> {
        match table.get(key) {
            None => Some(None),
            Some(Value::Integer(i)) => Some(Some(*i)),
            Some(v) => {
                self.push(path, format!("expected an integer, got {}", v.type_str()));
                None
            }
        }
    }

    fn uint(&mut self, table: &Table, key: &str, path: &str, default: Option<u32>) -> Option<u32> {
        match self.integer(table, key, path)? {
            None => {
                if default.is_none() {
                    self.missing(path);
                }
                default
            }
            Some(i) => match u32::try_from(i) {
                Ok(v) => Some(v),
                Err(_) => {
                    self.push(
                        path,
                        format!("must be a non-negative integer below 2^32, got {i}"),
                    );
                    None
                }
            },
        }
    }

    fn count(
        &mut self,
        table: &Table,
        key: &str,
        path: &str,
        default: Option<usize>,
    ) -> Option<usize> {
        match self.integer(table, key, path)? {
            None => {
                if default.is_none() {
                    self.missing(path);
                }
                default
            }
            Some(i) if i < 1 => {
                self.push(path, format!("must be at least 1, got {i}"));
                None
            }
            Some(i) => usize::try_from(i).ok(),
        }
    }

    fn seed(&mut self, table: &Table) -> Option<u64> {
        match self.integer(table, "seed", "seed")? {
            None => Some(0),
            Some(i) => match u64::try_from(i) {
                Ok(v) => Some(v),
                Err(_) => {
                    self.push("seed", format!("must be non-negative, got {i}"));
                    None
                }
            },
        }
    }

    fn float(&mut self, table: &Table, key: &str, path: &str, default: Option<f64>) -> Option<f64> {
        match table.get(key) {
            None => {
                if default.is_none() {
                    self.missing(path);
                }
                default
            }
            Some(Value::Float(x)) => Some(*x),
            Some(Value::Integer(i)) => Some(*i as f64),
            Some(v) => {
                self.push(path, format!("expected a number, got {}", v.type_str()));
                None
            }
        }
    }

    fn distributions(&mut self, table: &Table, kind: ExperimentKind) -> Option<Distributions> {
        let mut out = Distributions::defaults_for(kind);
        if !table.contains_key("distributions") {
            return Some(out);
        }
        let t = self.table(table, "distributions", "distributions", false)?;
        self.unknown_keys(t, "distributions", DISTRIBUTION_SLOTS);
        let mut ok = true;
        for slot in DISTRIBUTION_SLOTS {
            let path = format!("distributions.{slot}");
            let Some(d) = self.table(t, slot, &path, false) else {
                ok &= !t.contains_key(*slot);
                continue;
            };
            match self.distribution(d, &path) {
                Some(parsed) => match *slot {
                    "onsite" => out.onsite = parsed,
                    "offsite" => out.offsite = parsed,
                    _ => out.params = parsed,
                },
                None => ok = false,
            }
        }
        ok.then_some(out)
    }

    fn distribution(&mut self, t: &Table, path: &str) -> Option<CoeffDistribution> {
        let kind_path = format!("{path}.kind");
        let kind = self.string(t, "kind", &kind_path)?;
        let field = |name: &str| format!("{path}.{name}");
        match kind {
            "normal" => {
                self.unknown_keys(t, path, &["kind", "mean", "variance"]);
                let mean = self.float(t, "mean", &field("mean"), Some(0.0));
                let variance = self.float(t, "variance", &field("variance"), None);
                Some(CoeffDistribution::Normal {
                    mean: mean?,
                    variance: variance?,
                })
            }
            "uniform" => {
                self.unknown_keys(t, path, &["kind", "lo", "hi"]);
                let lo = self.float(t, "lo", &field("lo"), None);
                let hi = self.float(t, "hi", &field("hi"), None);
                Some(CoeffDistribution::Uniform { lo: lo?, hi: hi? })
            }
            "constant" => {
                self.unknown_keys(t, path, &["kind", "value"]);
                let value = self.float(t, "value", &field("value"), None);
                Some(CoeffDistribution::Constant { value: value? })
            }
            other => {
                self.push(
                    &kind_path,
                    format!("unknown distribution kind {other:?} (expected normal, uniform or constant)"),
                );
                None
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
experiment = "trace_distance"
model = "haar"
n_h.min = 1
n_h.max = 3
instances = 10
"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.bins, 50);
        assert_eq!(cfg.h, 1e-4);
        assert_eq!(cfg.t, 10.0);
        assert_eq!(cfg.n_v, 1);
        assert_eq!(cfg.seed, 0);
        assert_eq!(
            cfg.distributions,
            Distributions::defaults_for(ExperimentKind::TraceDistance)
        );
    }

    #[test]
    fn zero_instances_names_the_key() {
        let err = parse_config(&MINIMAL.replace("instances = 10", "instances = 0")).unwrap_err();
        assert!(err.mentions("instances"), "{err}");
    }

    #[test]
    fn incompatible_model_is_reported() {
        let text = MINIMAL
            .replace("trace_distance", "grad_unitary")
            .replace("\"haar\"", "\"qbm_normalized\"");
        let err = parse_config(&text).unwrap_err();
        assert!(err.mentions("model"), "{err}");
    }

    #[test]
    fn all_problems_are_reported_together() {
        let text = r#"
experiment = "trace_distance"
model = "gue"
n_h.min = 1
instances = -3
h = -1.0
colour = "blue"
distributions.onsite.kind = "cauchy"
"#;
        let err = parse_config(text).unwrap_err();
        for key in [
            "model",
            "n_h.max",
            "instances",
            "h",
            "colour",
            "distributions.onsite.kind",
        ] {
            assert!(err.mentions(key), "missing {key} in\n{err}");
        }
    }

    #[test]
    fn distribution_overrides() {
        let text = format!(
            "{MINIMAL}\ndistributions.params.kind = \"constant\"\ndistributions.params.value = 0.25\ndistributions.offsite.kind = \"normal\"\ndistributions.offsite.variance = 2\n"
        );
        let cfg = parse_config(&text).unwrap();
        assert_eq!(
            cfg.distributions.params,
            CoeffDistribution::Constant { value: 0.25 }
        );
        assert_eq!(
            cfg.distributions.offsite,
            CoeffDistribution::normal(0.0, 2.0)
        );
    }

    #[test]
    fn negative_variance_is_rejected() {
        let text = format!("{MINIMAL}\ndistributions.onsite.kind = \"normal\"\ndistributions.onsite.variance = -1\n");
        assert!(parse_config(&text)
            .unwrap_err()
            .mentions("distributions.onsite"));
    }

    #[test]
    fn rendered_config_parses_back() {
        let mut cfg = parse_config(MINIMAL).unwrap();
        cfg.h = 0.1 + 0.2;
        cfg.seed = 77;
        assert_eq!(parse_config(&render_config(&cfg)).unwrap(), cfg);
    }

    #[test]
    fn syntax_errors_are_reported() {
        assert!(parse_config("experiment = ")
            .unwrap_err()
            .mentions("<syntax>"));
    }
}
