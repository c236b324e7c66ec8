use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use super::tsv;
use crate::entity::EntityId;
use crate::error::{EdlError, Result};

pub const DEFAULT_TOP_K: usize = 30;
pub const DEFAULT_MIN_COUNT: u64 = 10;

/// Limits enforced on the entity co-occurrence dictionary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CooccurLimits {
    pub top_k: usize,
    pub min_count: u64,
}

impl Default for CooccurLimits {
    fn default() -> Self {
        CooccurLimits {
            top_k: DEFAULT_TOP_K,
            min_count: DEFAULT_MIN_COUNT,
        }
    }
}

/// Language-independent entity co-occurrence counts. Each entity keeps at
/// most `top_k` neighbours, highest count first.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EntityCooccurDict {
    neighbors: HashMap<EntityId, Vec<(EntityId, u64)>>,
}

impl EntityCooccurDict {
    pub fn from_neighbors(
        neighbors: HashMap<EntityId, Vec<(EntityId, u64)>>,
        limits: CooccurLimits,
    ) -> Result<Self> {
        let mut neighbors = neighbors;
        for (entity, list) in neighbors.iter_mut() {
            if entity.is_sentinel() {
                return Err(EdlError::Invariant(format!("sentinel {entity} in co-occurrence dictionary")));
            }
            if list.len() > limits.top_k {
                return Err(EdlError::Invariant(format!(
                    "{entity} has {} co-occurring entities, limit is {}",
                    list.len(),
                    limits.top_k
                )));
            }
            for (other, count) in list.iter() {
                if other == entity {
                    return Err(EdlError::Invariant(format!("self pair for {entity}")));
                }
                if other.is_sentinel() {
                    return Err(EdlError::Invariant(format!("sentinel {other} listed as neighbour of {entity}")));
                }
                if *count < limits.min_count {
                    return Err(EdlError::Invariant(format!(
                        "{entity} -> {other} count {count} below minimum {}",
                        limits.min_count
                    )));
                }
            }
            list.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            if list.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(EdlError::Invariant(format!("duplicate neighbour for {entity}")));
            }
        }
        Ok(EntityCooccurDict { neighbors })
    }

    pub fn load(path: &Path, limits: CooccurLimits) -> Result<Self> {
        let text = tsv::read(path)?;
        let mut neighbors: HashMap<EntityId, Vec<(EntityId, u64)>> = HashMap::new();
        for rec in tsv::records(&text, path, 3..=3)? {
            let [a, b, count] = rec.fields[..] else { unreachable!() };
            let a = EntityId::parse(a.trim()).ok_or_else(|| EdlError::parse(path, rec.line, "empty entity id"))?;
            let b = EntityId::parse(b.trim()).ok_or_else(|| EdlError::parse(path, rec.line, "empty entity id"))?;
            let count = tsv::parse_u64(path, rec.line, count)?;
            neighbors.entry(a).or_default().push((b, count));
        }
        Self::from_neighbors(neighbors, limits)
    }

    /// Stored co-occurrence count of a pair. Pruning is per entity, so a
    /// pair may survive only in one direction; either direction counts.
    pub fn count(&self, a: &EntityId, b: &EntityId) -> u64 {
        let lookup = |x: &EntityId, y: &EntityId| {
            self.neighbors
                .get(x)
                .and_then(|list| list.iter().find(|(e, _)| e == y))
                .map(|&(_, c)| c)
        };
        lookup(a, b).or_else(|| lookup(b, a)).unwrap_or(0)
    }

    pub fn neighbors(&self, entity: &EntityId) -> &[(EntityId, u64)] {
        self.neighbors.get(entity).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn entity_count(&self) -> usize {
        self.neighbors.len()
    }

    pub fn pair_count(&self) -> usize {
        self.neighbors.values().map(Vec::len).sum()
    }

    pub fn to_tsv(&self) -> String {
        let sorted: BTreeMap<&EntityId, &Vec<(EntityId, u64)>> = self.neighbors.iter().collect();
        let mut out = String::from("# entity\tneighbor\tcount\n");
        for (entity, list) in sorted {
            for (other, count) in list {
                let _ = writeln!(out, "{entity}\t{other}\t{count}");
            }
        }
        out
    }
}
