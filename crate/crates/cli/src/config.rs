//! Simulation config files.

use eqvar::learning::SearchConfig;
use eqvar::simulation::{BlockRecipe, Regime, SimConfig};
use serde::Deserialize;

use crate::document::partition_from_names;
use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlocksSpec {
    TwoBlocks,
    #[serde(rename = "p_over_3_plus_1")]
    POver3Plus1,
    /// Blocks of node names `X1..Xp`.
    Custom(Vec<Vec<String>>),
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub p: usize,
    pub n: usize,
    pub regime: Regime,
    pub blocks: BlocksSpec,
    #[serde(default = "one")]
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub search: SearchConfig,
}

fn one() -> usize {
    1
}

/// Simulated variables are named `X1, ..., Xp`.
pub fn node_names(p: usize) -> Vec<String> {
    (1..=p).map(|i| format!("X{i}")).collect()
}

impl ConfigFile {
    pub fn resolve(&self) -> Result<SimConfig> {
        let blocks = match &self.blocks {
            BlocksSpec::TwoBlocks => BlockRecipe::TwoBlocks,
            BlocksSpec::POver3Plus1 => BlockRecipe::POver3Plus1,
            BlocksSpec::Custom(named) => {
                let pi = partition_from_names(&node_names(self.p), named)?;
                BlockRecipe::Custom(pi.blocks().to_vec())
            }
        };
        let cfg = SimConfig {
            p: self.p,
            n: self.n,
            regime: self.regime,
            blocks,
            replicates: self.replicates,
            seed: self.seed,
            search: self.search.clone(),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
