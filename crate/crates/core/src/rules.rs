//! Business rules (material costs, constraints, optical budget) and the rules
//! document that carries them together with the GA settings.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::ga::GaConfig;

/// How drop/distribution contact is classified by the intersection check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntersectionMode {
    /// Only proper interior crossings count.
    #[default]
    Proper,
    /// Any contact counts, except a lone shared endpoint.
    AnyContact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BusinessRules {
    pub cost_pdo: f64,
    pub cost_drop_per_m: f64,
    pub cost_dist_per_m: f64,
    pub port_limit: u32,
    /// Fraction of ports left open on every PDO.
    pub port_margin: f64,
    pub drop_limit_m: f64,
    /// Maximum OLT-to-client cable length.
    pub network_range_m: f64,
    /// Penalty per unserved client; defaults to `cost_pdo` when unset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub penalty_per_missing: Option<f64>,
    /// Multiplier on the drop cost of MDU links.
    pub mdu_drop_factor: f64,
    /// Multiplier on the distribution cost of buried edges.
    pub buried_cost_multiplier: f64,
    pub fiber_loss_db_per_km: f64,
    pub budget_db: f64,
    /// Split ratio (1:N) of the splitter serving every client.
    pub split_ratio: u32,
    #[serde(serialize_with = "ser_ratio_map", deserialize_with = "de_ratio_map")]
    pub splitter_loss_db: BTreeMap<u32, f64>,
    /// Fibre counts of the distribution cable catalogue.
    pub cable_capacities: Vec<u32>,
    pub intersection_mode: IntersectionMode,
    /// Count drop/distribution crossings against feasibility.
    pub intersections_hard: bool,
    /// Fitness penalty per crossing; 0 leaves crossings out of the fitness.
    pub intersection_penalty: f64,
}

impl Default for BusinessRules {
    fn default() -> Self {
        Self {
            cost_pdo: 300.0,
            cost_drop_per_m: 2.0,
            cost_dist_per_m: 5.0,
            port_limit: 12,
            port_margin: 0.10,
            drop_limit_m: 85.0,
            network_range_m: 20_000.0,
            penalty_per_missing: None,
            mdu_drop_factor: 10.0,
            buried_cost_multiplier: 2.0,
            fiber_loss_db_per_km: 0.35,
            budget_db: 28.0,
            split_ratio: 64,
            // Typical insertion losses for balanced PLC splitters; not measured values.
            splitter_loss_db: BTreeMap::from([(2, 3.7), (4, 7.3), (8, 10.5), (16, 13.7), (32, 17.1), (64, 20.5)]),
            cable_capacities: vec![16, 32],
            intersection_mode: IntersectionMode::Proper,
            intersections_hard: false,
            intersection_penalty: 0.0,
        }
    }
}

impl BusinessRules {
    pub fn penalty(&self) -> f64 {
        self.penalty_per_missing.unwrap_or(self.cost_pdo)
    }

    pub fn splitter_loss(&self) -> Result<f64> {
        self.splitter_loss_db
            .get(&self.split_ratio)
            .copied()
            .ok_or_else(|| Error::Config(format!("no splitter loss configured for ratio 1:{}", self.split_ratio)))
    }

    // Negated comparisons so that NaN fails every check.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        let costs = [
            ("cost_pdo", self.cost_pdo),
            ("cost_drop_per_m", self.cost_drop_per_m),
            ("cost_dist_per_m", self.cost_dist_per_m),
            ("penalty_per_missing", self.penalty()),
            ("intersection_penalty", self.intersection_penalty),
        ];
        for (name, v) in costs {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!("{name} must be a finite value >= 0, got {v}")));
            }
        }
        if !(0.0..1.0).contains(&self.port_margin) {
            return Err(Error::Config(format!("port_margin must be in [0, 1), got {}", self.port_margin)));
        }
        if !(self.drop_limit_m.is_finite() && self.drop_limit_m > 0.0) {
            return Err(Error::Config(format!("drop_limit_m must be > 0, got {}", self.drop_limit_m)));
        }
        if !(self.network_range_m > 0.0) {
            return Err(Error::Config("network_range_m must be > 0".into()));
        }
        if !(self.mdu_drop_factor >= 0.0) {
            return Err(Error::Config("mdu_drop_factor must be >= 0".into()));
        }
        if !(self.buried_cost_multiplier >= 1.0) {
            return Err(Error::Config(format!(
                "buried_cost_multiplier must be >= 1, got {}",
                self.buried_cost_multiplier
            )));
        }
        if self.split_ratio == 0 {
            return Err(Error::Config("split_ratio must be >= 1".into()));
        }
        if self.cable_capacities.is_empty() || self.cable_capacities.contains(&0) {
            return Err(Error::Config("cable_capacities must be non-empty and positive".into()));
        }
        self.splitter_loss()?;
        usable_ports(self)?;
        Ok(())
    }
}

/// Ports actually usable on one PDO once the open margin is reserved.
pub fn usable_ports(rules: &BusinessRules) -> Result<u32> {
    if rules.port_limit < 1 {
        return Err(Error::Config("port_limit must be >= 1".into()));
    }
    let reserved = (rules.port_limit as f64 * rules.port_margin).floor();
    let usable = rules.port_limit as f64 - reserved;
    if usable < 1.0 {
        return Err(Error::Config(format!(
            "port_limit {} with margin {} leaves no usable port",
            rules.port_limit, rules.port_margin
        )));
    }
    Ok(usable as u32)
}

/// Full rules document: business rules at top level, GA settings under `[ga]`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RulesDocument {
    #[serde(flatten)]
    pub rules: BusinessRules,
    #[serde(default)]
    pub ga: GaConfig,
}

impl RulesDocument {
    pub fn parse(text: &str) -> Result<Self> {
        let doc: RulesDocument = toml::from_str(text)
            .map_err(|e| Error::Parse(locate_rules_error(text).unwrap_or_else(|| e.to_string())))?;
        doc.rules.validate()?;
        doc.ga.validate_fixed()?;
        Ok(doc)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| match e {
            Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("rules document serializes")
    }
}

/// Flattening drops value spans, so type errors surface at line 1. Re-checks
/// each top-level key alone to name the offending key and its line.
fn locate_rules_error(text: &str) -> Option<String> {
    let table: BTreeMap<String, toml::Spanned<toml::Value>> = toml::from_str(text).ok()?;
    for (key, value) in &table {
        let err = if key == "ga" {
            GaConfig::deserialize(value.get_ref().clone()).err()
        } else {
            let single = toml::Table::from_iter([(key.clone(), value.get_ref().clone())]);
            RulesDocument::deserialize(toml::Value::Table(single)).err()
        };
        if let Some(err) = err {
            let line = text[..value.span().start].matches('\n').count() + 1;
            return Some(format!("line {line}, key `{key}`: {}", err.message()));
        }
    }
    None
}

fn ser_ratio_map<S: Serializer>(map: &BTreeMap<u32, f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    let as_strings: BTreeMap<String, f64> = map.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    as_strings.serialize(s)
}

fn de_ratio_map<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BTreeMap<u32, f64>, D::Error> {
    let raw = BTreeMap::<String, f64>::deserialize(d)?;
    raw.into_iter()
        .map(|(k, v)| {
            let ratio = k.trim_start_matches("1:").parse::<u32>().map_err(serde::de::Error::custom)?;
            Ok((ratio, v))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with(limit: u32, margin: f64) -> BusinessRules {
        BusinessRules { port_limit: limit, port_margin: margin, ..Default::default() }
    }

    #[test]
    fn usable_ports_anchor() {
        assert_eq!(usable_ports(&with(12, 0.10)).unwrap(), 11);
        assert_eq!(usable_ports(&with(12, 0.0)).unwrap(), 12);
        assert_eq!(usable_ports(&with(8, 0.25)).unwrap(), 6);
    }

    #[test]
    fn usable_ports_rejects_empty_pdo() {
        assert!(matches!(usable_ports(&with(1, 0.99)), Ok(1)));
        assert!(matches!(usable_ports(&with(0, 0.0)), Err(Error::Config(_))));
    }

    #[test]
    fn usable_ports_monotone_in_margin() {
        for limit in 1..=48u32 {
            let mut prev = u32::MAX;
            for step in 0..100 {
                let margin = step as f64 / 100.0;
                let u = usable_ports(&with(limit, margin)).unwrap_or(0);
                assert!(u <= prev, "limit {limit} margin {margin}");
                prev = u;
            }
        }
    }

    #[test]
    fn defaults_match_experiment_settings() {
        let r = BusinessRules::default();
        assert_eq!(r.cost_pdo, 300.0);
        assert_eq!(r.cost_drop_per_m, 2.0);
        assert_eq!(r.cost_dist_per_m, 5.0);
        assert_eq!(r.port_limit, 12);
        assert_eq!(r.drop_limit_m, 85.0);
        assert_eq!(r.network_range_m, 20_000.0);
        assert_eq!(r.penalty(), 300.0);
        assert_eq!(r.splitter_loss().unwrap(), 20.5);
        r.validate().unwrap();
    }

    #[test]
    fn empty_document_gives_defaults() {
        let doc = RulesDocument::parse("").unwrap();
        assert_eq!(doc.rules, BusinessRules::default());
        assert_eq!(doc.ga, GaConfig::default());
    }

    #[test]
    fn document_overrides_and_roundtrip() {
        let text = r#"
            cost_pdo = 250.0
            drop_limit_m = 60.0
            penalty_per_missing = 1000.0

            [splitter_loss_db]
            "1:32" = 17.0
            "64" = 21.0

            [ga]
            population_size = 40
            generations = 10
        "#;
        let doc = RulesDocument::parse(text).unwrap();
        assert_eq!(doc.rules.cost_pdo, 250.0);
        assert_eq!(doc.rules.drop_limit_m, 60.0);
        assert_eq!(doc.rules.penalty(), 1000.0);
        assert_eq!(doc.rules.splitter_loss_db.get(&32), Some(&17.0));
        assert_eq!(doc.rules.splitter_loss().unwrap(), 21.0);
        assert_eq!(doc.ga.population_size, 40);
        assert_eq!(doc.ga.generations, 10);
        assert_eq!(doc.ga.tournament_size, 5);
        let again = RulesDocument::parse(&doc.to_toml()).unwrap();
        assert_eq!(again, doc);
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(matches!(RulesDocument::parse("port_margin = 1.0"), Err(Error::Config(_))));
        assert!(matches!(RulesDocument::parse("cost_pdo = -1.0"), Err(Error::Config(_))));
        assert!(matches!(RulesDocument::parse("split_ratio = 128"), Err(Error::Config(_))));
        assert!(matches!(RulesDocument::parse("cost_pdo = \"x\""), Err(Error::Parse(_))));
    }

    #[test]
    fn type_errors_point_at_key_line() {
        let text = "cost_pdo = 300\n\nport_limit = \"twelve\"\n[ga]\ngenerations = 5\n";
        let Err(Error::Parse(msg)) = RulesDocument::parse(text) else { panic!("expected parse error") };
        assert!(msg.contains("line 3") && msg.contains("port_limit"), "{msg}");
        let text = "cost_pdo = 300\n[ga]\ngenerations = -5\n";
        let Err(Error::Parse(msg)) = RulesDocument::parse(text) else { panic!("expected parse error") };
        assert!(msg.contains("ga"), "{msg}");
    }
}
