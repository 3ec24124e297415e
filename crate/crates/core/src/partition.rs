//! Static key placement: maps each key to its replica set.
//!
//! Placement is a pure function of (key, config), so every node and every
//! run with the same config agrees on where a key lives. The default
//! placement hashes the key onto a ring and takes `replication_degree`
//! consecutive nodes; directed tests can pin keys with explicit overrides.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::types::{Key, NodeId};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PlacementConfig {
    pub num_nodes: usize,
    pub num_keys: u32,
    pub replication_degree: usize,
    pub placement_seed: u64,
    /// Explicit placements for directed tests; keys not listed fall back to
    /// the hash placement.
    #[serde(default)]
    pub overrides: BTreeMap<u32, Vec<NodeId>>,
}

impl PlacementConfig {
    pub fn new(num_nodes: usize, num_keys: u32, replication_degree: usize, seed: u64) -> Self {
        assert!(num_nodes > 0, "cluster must have at least one node");
        assert!(
            replication_degree >= 1 && replication_degree <= num_nodes,
            "replication degree {replication_degree} out of range for {num_nodes} nodes"
        );
        PlacementConfig {
            num_nodes,
            num_keys,
            replication_degree,
            placement_seed: seed,
            overrides: BTreeMap::new(),
        }
    }

    pub fn with_override(mut self, key: Key, nodes: Vec<NodeId>) -> Self {
        assert_eq!(
            nodes.len(),
            self.replication_degree,
            "override for {key:?} must list exactly replication_degree nodes"
        );
        self.overrides.insert(key.0, nodes);
        self
    }

    /// The ordered replica set for `key`. Rejects out-of-range keys.
    pub fn replicas(&self, key: Key) -> Result<Vec<NodeId>, PlacementError> {
        if key.0 >= self.num_keys {
            return Err(PlacementError::KeyOutOfRange {
                key: key.0,
                num_keys: self.num_keys,
            });
        }
        if let Some(nodes) = self.overrides.get(&key.0) {
            return Ok(nodes.clone());
        }
        let start = (splitmix64(self.placement_seed ^ u64::from(key.0)) % self.num_nodes as u64)
            as usize;
        Ok((0..self.replication_degree)
            .map(|i| (start + i) % self.num_nodes)
            .collect())
    }

    /// True iff `node` stores a replica of `key`.
    pub fn is_replica(&self, key: Key, node: NodeId) -> bool {
        self.replicas(key).map(|r| r.contains(&node)).unwrap_or(false)
    }

    /// All keys with a replica on `node`.
    pub fn local_keys(&self, node: NodeId) -> Vec<Key> {
        (0..self.num_keys)
            .map(Key)
            .filter(|k| self.is_replica(*k, node))
            .collect()
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum PlacementError {
    #[error("key {key} out of range (num_keys = {num_keys})")]
    KeyOutOfRange { key: u32, num_keys: u32 },
}

/// SplitMix64 mixer; small, seedable, and stable across platforms.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}
