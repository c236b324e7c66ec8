use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::tsv;
use crate::entity::EntityId;
use crate::error::{EdlError, Result};
use crate::preprocess::{normalize, surface_key};

pub const PRIOR_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub entity: EntityId,
    pub prior: f64,
}

/// Descending prior, ties by entity id.
pub(crate) fn sort_candidates(list: &mut [Candidate]) {
    list.sort_by(|a, b| b.prior.total_cmp(&a.prior).then_with(|| a.entity.cmp(&b.entity)));
}

/// Lookup key for a surface form in `language`: the text is normalized the
/// same way documents are, then case-folded and whitespace-collapsed.
pub fn lookup_key(surface: &str, language: &str) -> String {
    surface_key(&normalize(surface, language).text)
}

/// Mention-entity prior probabilities, per language.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MentionEntityPriorDict {
    by_language: HashMap<String, HashMap<String, Arc<[Candidate]>>>,
}

impl MentionEntityPriorDict {
    /// Builds the dictionary from `(language, surface, entity, prior)`
    /// entries and checks every invariant. Candidate lists are stored
    /// sorted.
    pub fn from_entries<I>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, String, EntityId, f64)>,
    {
        let mut staging: HashMap<String, HashMap<String, Vec<Candidate>>> = HashMap::new();
        for (language, surface, entity, prior) in entries {
            if !(0.0..=1.0).contains(&prior) {
                return Err(EdlError::Invariant(format!(
                    "prior {prior} for {surface:?} -> {entity} outside [0,1]"
                )));
            }
            let key = lookup_key(&surface, &language);
            if key.is_empty() {
                return Err(EdlError::Invariant(format!("surface form {surface:?} has no word tokens")));
            }
            let list = staging.entry(language).or_default().entry(key).or_default();
            if list.iter().any(|c| c.entity == entity) {
                return Err(EdlError::Invariant(format!("duplicate candidate {entity} for {surface:?}")));
            }
            list.push(Candidate { entity, prior });
        }
        let mut by_language = HashMap::new();
        for (language, surfaces) in staging {
            let mut table = HashMap::with_capacity(surfaces.len());
            for (surface, mut list) in surfaces {
                let sum: f64 = list.iter().map(|c| c.prior).sum();
                if (sum - 1.0).abs() > PRIOR_SUM_TOLERANCE {
                    return Err(EdlError::PriorSum { language, surface, sum });
                }
                sort_candidates(&mut list);
                table.insert(surface, Arc::from(list));
            }
            by_language.insert(language, table);
        }
        Ok(MentionEntityPriorDict { by_language })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = tsv::read(path)?;
        let mut entries = Vec::new();
        let mut lines = HashMap::new();
        for rec in tsv::records(&text, path, 4..=4)? {
            let [language, surface, entity, prior] = rec.fields[..] else { unreachable!() };
            let entity = EntityId::parse(entity.trim())
                .ok_or_else(|| EdlError::parse(path, rec.line, "empty entity id"))?;
            let prior = tsv::parse_f64(path, rec.line, prior)?;
            lines.entry((language.to_string(), lookup_key(surface, language))).or_insert(rec.line);
            entries.push((language.to_string(), surface.to_string(), entity, prior));
        }
        Self::from_entries(entries).map_err(|e| match e {
            EdlError::PriorSum { language, surface, sum } => {
                let line = lines.get(&(language.clone(), surface.clone())).copied().unwrap_or(0);
                EdlError::parse(
                    path,
                    line,
                    format!("priors for surface form {surface:?} ({language}) sum to {sum}, expected 1.0"),
                )
            }
            other => other,
        })
    }

    /// Candidates for a surface form, highest prior first. Unknown surfaces
    /// and unknown languages give an empty slice.
    pub fn lookup_candidates(&self, surface: &str, language: &str) -> &[Candidate] {
        self.get(&lookup_key(surface, language), language)
            .map(|c| &c[..])
            .unwrap_or(&[])
    }

    /// Lookup by an already computed key.
    pub fn get(&self, key: &str, language: &str) -> Option<&Arc<[Candidate]>> {
        self.by_language.get(language)?.get(key)
    }

    pub fn has_language(&self, language: &str) -> bool {
        self.by_language.contains_key(language)
    }

    pub fn languages(&self) -> Vec<&str> {
        let mut langs: Vec<&str> = self.by_language.keys().map(String::as_str).collect();
        langs.sort();
        langs
    }

    pub fn surface_count(&self, language: &str) -> usize {
        self.by_language.get(language).map_or(0, HashMap::len)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, &[Candidate])> {
        self.by_language.iter().flat_map(|(lang, table)| {
            table.iter().map(move |(surface, c)| (lang.as_str(), surface.as_str(), &c[..]))
        })
    }

    /// Serializes in the priors file format, sorted for stable output.
    pub fn to_tsv(&self) -> String {
        let sorted: BTreeMap<(&str, &str), &[Candidate]> =
            self.iter().map(|(l, s, c)| ((l, s), c)).collect();
        let mut out = String::from("# language\tsurface\tentity\tprior\n");
        for ((lang, surface), cands) in sorted {
            for c in cands {
                let _ = writeln!(out, "{lang}\t{surface}\t{}\t{}", c.entity, c.prior);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(lang: &str, s: &str, e: &str, p: f64) -> (String, String, EntityId, f64) {
        (lang.into(), s.into(), EntityId::parse(e).unwrap(), p)
    }

    #[test]
    fn lookup_orders_by_prior_then_id() {
        let dict = MentionEntityPriorDict::from_entries(vec![
            entry("en", "Apple", "Apple_Records", 0.05),
            entry("en", "Apple", "__NIL__", 0.1),
            entry("en", "Apple", "Apple_(fruit)", 0.25),
            entry("en", "Apple", "Apple_Inc.", 0.6),
            entry("en", "tie", "b", 0.5),
            entry("en", "tie", "a", 0.5),
        ])
        .unwrap();
        let ids: Vec<_> = dict.lookup_candidates("APPLE", "en").iter().map(|c| c.entity.to_string()).collect();
        assert_eq!(ids, vec!["Apple_Inc.", "Apple_(fruit)", "__NIL__", "Apple_Records"]);
        let ids: Vec<_> = dict.lookup_candidates("tie", "en").iter().map(|c| c.entity.to_string()).collect();
        assert_eq!(ids, vec!["a", "b"]);
        assert!(dict.lookup_candidates("zqxwv", "en").is_empty());
        assert!(dict.lookup_candidates("apple", "fr").is_empty());
    }

    #[test]
    fn rejects_bad_sums_and_ranges() {
        let err = MentionEntityPriorDict::from_entries(vec![
            entry("en", "Paris", "Paris", 0.5),
            entry("en", "Paris", "__NIL__", 0.3),
        ])
        .unwrap_err();
        assert!(matches!(err, EdlError::PriorSum { ref surface, .. } if surface == "paris"));
        assert!(MentionEntityPriorDict::from_entries(vec![entry("en", "x", "X", 1.5)]).is_err());
        assert!(MentionEntityPriorDict::from_entries(vec![
            entry("en", "x", "X", 0.5),
            entry("en", "x", "X", 0.5)
        ])
        .is_err());
    }

    #[test]
    fn surfaces_fold_accents_for_english_keys() {
        let dict = MentionEntityPriorDict::from_entries(vec![entry("en", "Café", "Cafe", 1.0)]).unwrap();
        assert_eq!(dict.lookup_candidates("cafe", "en").len(), 1);
    }
}
