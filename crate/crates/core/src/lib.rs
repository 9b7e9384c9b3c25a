//! Genetic-algorithm design of passive optical access networks.
//!
//! A [`model::NetworkMap`] describes streets, candidate PDO sites, clients and
//! the OLT. The GA chooses which candidates to equip; each choice is completed
//! by a greedy client allocation and priced by [`fitness`]. The
//! [`validator`] re-checks any design against the business rules and
//! [`bom`] derives splitters and cables.

pub mod allocation;
pub mod bench;
pub mod bom;
pub mod error;
pub mod fitness;
pub mod ga;
pub mod instance;
pub mod model;
pub mod paths;
pub mod report;
pub mod rules;
pub mod solution;
pub mod validator;

pub use error::{Error, Result};
pub use ga::{evolve, Evolution, GaConfig, Genotype, Individual};
pub use instance::Instance;
pub use model::{load_map, parse_map, preprocess, NetworkMap, NodeId};
pub use rules::{BusinessRules, RulesDocument};
pub use solution::{Solution, SolutionDocument};
