use crate::error::Result;
use crate::model::NetworkMap;
use crate::paths::{build_drop_table, DropTable, PathCache};
use crate::rules::{usable_ports, BusinessRules};

/// A preprocessed map bundled with its rules and the caches derived from them.
///
/// Immutable apart from the internally synchronized [`PathCache`], so one
/// instance can be shared by concurrent evaluators.
#[derive(Debug)]
pub struct Instance {
    pub map: NetworkMap,
    pub rules: BusinessRules,
    pub drops: DropTable,
    pub paths: PathCache,
    usable_ports: u32,
}

impl Instance {
    pub fn new(map: NetworkMap, rules: BusinessRules) -> Result<Self> {
        rules.validate()?;
        let usable_ports = usable_ports(&rules)?;
        let drops = build_drop_table(&map, &rules);
        Ok(Self { map, rules, drops, paths: PathCache::new(), usable_ports })
    }

    pub fn usable_ports(&self) -> u32 {
        self.usable_ports
    }

    pub fn demand(&self, client: usize) -> u32 {
        self.map.client(client).demand
    }
}
