//! Knowledge-base entity identifiers.
//!
//! Besides ordinary KB ids there are two sentinels: `NIL` (the mention does
//! not refer to any entity) and `MISC` (it refers to something outside the
//! selected KB). They are written as `__NIL__` / `__MISC__` in every file
//! format.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub const NIL_TOKEN: &str = "__NIL__";
pub const MISC_TOKEN: &str = "__MISC__";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EntityKind {
    Kb,
    Nil,
    Misc,
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum EntityId {
    Kb(Arc<str>),
    Nil,
    Misc,
}

impl EntityId {
    /// Parses the on-disk form. Empty strings are rejected.
    pub fn parse(s: &str) -> Option<EntityId> {
        match s {
            "" => None,
            NIL_TOKEN => Some(EntityId::Nil),
            MISC_TOKEN => Some(EntityId::Misc),
            other => Some(EntityId::Kb(Arc::from(other))),
        }
    }

    pub fn kb(id: &str) -> EntityId {
        assert!(!id.is_empty(), "KB identifiers must be non-empty");
        EntityId::parse(id).expect("non-empty")
    }

    pub fn kind(&self) -> EntityKind {
        match self {
            EntityId::Kb(_) => EntityKind::Kb,
            EntityId::Nil => EntityKind::Nil,
            EntityId::Misc => EntityKind::Misc,
        }
    }

    pub fn as_str(&self) -> &str {
        match self {
            EntityId::Kb(id) => id,
            EntityId::Nil => NIL_TOKEN,
            EntityId::Misc => MISC_TOKEN,
        }
    }

    /// True for NIL and MISC.
    pub fn is_sentinel(&self) -> bool {
        !matches!(self, EntityId::Kb(_))
    }
}

impl Ord for EntityId {
    fn cmp(&self, other: &Self) -> Ordering {
        self.as_str().cmp(other.as_str())
    }
}

impl PartialOrd for EntityId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.as_str())
    }
}

impl Serialize for EntityId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for EntityId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        EntityId::parse(&s).ok_or_else(|| serde::de::Error::custom("empty entity id"))
    }
}
