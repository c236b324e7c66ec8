//! Topic ontology: a DAG of topics with child -> parent edges, plus the
//! entity -> topics mapping. Distances are shortest paths over the parent
//! edges taken as undirected.

use std::collections::{HashMap, VecDeque};
use std::path::Path;

use super::tsv;
use crate::entity::EntityId;
use crate::error::{EdlError, Result};

pub type TopicIdx = u32;

pub const UNREACHABLE: u32 = u32::MAX;

#[derive(Debug, Clone, Default)]
pub struct TopicOntology {
    names: Vec<String>,
    index: HashMap<String, TopicIdx>,
    parents: Vec<Vec<TopicIdx>>,
    adjacency: Vec<Vec<TopicIdx>>,
    entity_topics: HashMap<EntityId, Vec<TopicIdx>>,
}

impl TopicOntology {
    pub fn builder() -> OntologyBuilder {
        OntologyBuilder::default()
    }

    pub fn load(parents_path: &Path, entity_topics_path: &Path) -> Result<Self> {
        let mut builder = OntologyBuilder::default();
        let text = tsv::read(parents_path)?;
        for rec in tsv::records(&text, parents_path, 1..=2)? {
            let child = rec.fields[0].trim();
            if child.is_empty() {
                return Err(EdlError::parse(parents_path, rec.line, "empty topic id"));
            }
            match rec.fields.get(1).map(|s| s.trim()) {
                Some("") => return Err(EdlError::parse(parents_path, rec.line, "empty parent topic id")),
                Some(parent) => {
                    builder.edge(child, parent);
                }
                None => {
                    builder.topic(child);
                }
            }
        }
        let text = tsv::read(entity_topics_path)?;
        for rec in tsv::records(&text, entity_topics_path, 2..=2)? {
            let entity = EntityId::parse(rec.fields[0].trim())
                .ok_or_else(|| EdlError::parse(entity_topics_path, rec.line, "empty entity id"))?;
            let topic = rec.fields[1].trim();
            if !builder.has_topic(topic) {
                return Err(EdlError::parse(
                    entity_topics_path,
                    rec.line,
                    format!("unknown topic {topic:?}"),
                ));
            }
            builder.entity_topic(entity, topic);
        }
        builder.build()
    }

    pub fn topic_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.parents.iter().map(Vec::len).sum()
    }

    pub fn topic_index(&self, topic: &str) -> Option<TopicIdx> {
        self.index.get(topic).copied()
    }

    pub fn topic_name(&self, idx: TopicIdx) -> &str {
        &self.names[idx as usize]
    }

    pub fn parents_of(&self, topic: &str) -> Option<Vec<&str>> {
        let idx = self.topic_index(topic)?;
        Some(self.parents[idx as usize].iter().map(|&p| self.topic_name(p)).collect())
    }

    pub fn topics_of(&self, entity: &EntityId) -> &[TopicIdx] {
        self.entity_topics.get(entity).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn mapped_entity_count(&self) -> usize {
        self.entity_topics.len()
    }

    /// Shortest undirected path length between two topics; `None` when no
    /// path exists.
    pub fn topic_distance(&self, a: &str, b: &str) -> Result<Option<u32>> {
        let ia = self.topic_index(a).ok_or_else(|| EdlError::UnknownTopic(a.to_string()))?;
        let ib = self.topic_index(b).ok_or_else(|| EdlError::UnknownTopic(b.to_string()))?;
        let dist = self.distances_from(&[ia]);
        Ok(Some(dist[ib as usize]).filter(|&d| d != UNREACHABLE))
    }

    /// Multi-source BFS. Unreachable nodes hold [`UNREACHABLE`].
    pub fn distances_from(&self, sources: &[TopicIdx]) -> Vec<u32> {
        let mut dist = vec![UNREACHABLE; self.names.len()];
        let mut queue = VecDeque::new();
        for &s in sources {
            if dist[s as usize] != 0 {
                dist[s as usize] = 0;
                queue.push_back(s);
            }
        }
        while let Some(node) = queue.pop_front() {
            let next = dist[node as usize] + 1;
            for &n in &self.adjacency[node as usize] {
                if dist[n as usize] == UNREACHABLE {
                    dist[n as usize] = next;
                    queue.push_back(n);
                }
            }
        }
        dist
    }

    /// Minimum topic distance between any topic of `a` and any topic of `b`.
    pub fn entity_distance(&self, a: &EntityId, b: &EntityId) -> Option<u32> {
        let ta = self.topics_of(a);
        let tb = self.topics_of(b);
        if ta.is_empty() || tb.is_empty() {
            return None;
        }
        let dist = self.distances_from(ta);
        min_over(&dist, tb)
    }
}

pub(crate) fn min_over(dist: &[u32], targets: &[TopicIdx]) -> Option<u32> {
    targets
        .iter()
        .map(|&t| dist[t as usize])
        .min()
        .filter(|&d| d != UNREACHABLE)
}

#[derive(Debug, Default)]
pub struct OntologyBuilder {
    names: Vec<String>,
    index: HashMap<String, TopicIdx>,
    parents: Vec<Vec<TopicIdx>>,
    entity_topics: HashMap<EntityId, Vec<TopicIdx>>,
}

impl OntologyBuilder {
    pub fn topic(&mut self, name: &str) -> TopicIdx {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.names.len() as TopicIdx;
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), i);
        self.parents.push(Vec::new());
        i
    }

    pub fn has_topic(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn edge(&mut self, child: &str, parent: &str) -> &mut Self {
        let c = self.topic(child);
        let p = self.topic(parent);
        if !self.parents[c as usize].contains(&p) {
            self.parents[c as usize].push(p);
        }
        self
    }

    pub fn entity_topic(&mut self, entity: EntityId, topic: &str) -> &mut Self {
        let t = self.topic(topic);
        let list = self.entity_topics.entry(entity).or_default();
        if !list.contains(&t) {
            list.push(t);
        }
        self
    }

    pub fn build(self) -> Result<TopicOntology> {
        if let Some(cycle) = find_cycle(&self.parents) {
            return Err(EdlError::OntologyCycle(
                cycle.into_iter().map(|i| self.names[i as usize].clone()).collect(),
            ));
        }
        let mut adjacency = vec![Vec::new(); self.names.len()];
        for (child, parents) in self.parents.iter().enumerate() {
            for &p in parents {
                adjacency[child].push(p);
                adjacency[p as usize].push(child as TopicIdx);
            }
        }
        Ok(TopicOntology {
            names: self.names,
            index: self.index,
            parents: self.parents,
            adjacency,
            entity_topics: self.entity_topics,
        })
    }
}

/// Finds a directed cycle in the parent graph, returned as a closed path
/// (first node repeated at the end).
fn find_cycle(parents: &[Vec<TopicIdx>]) -> Option<Vec<TopicIdx>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    let mut mark = vec![Mark::New; parents.len()];
    for root in 0..parents.len() {
        if mark[root] != Mark::New {
            continue;
        }
        // iterative DFS: (node, next edge index)
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        mark[root] = Mark::Active;
        while let Some(&mut (node, ref mut edge)) = stack.last_mut() {
            if let Some(&next) = parents[node].get(*edge) {
                *edge += 1;
                let next = next as usize;
                match mark[next] {
                    Mark::New => {
                        mark[next] = Mark::Active;
                        stack.push((next, 0));
                    }
                    Mark::Active => {
                        let from = stack.iter().position(|&(n, _)| n == next).expect("on stack");
                        let mut cycle: Vec<TopicIdx> = stack[from..].iter().map(|&(n, _)| n as TopicIdx).collect();
                        cycle.push(next as TopicIdx);
                        return Some(cycle);
                    }
                    Mark::Done => {}
                }
            } else {
                mark[node] = Mark::Done;
                stack.pop();
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> TopicOntology {
        let mut b = TopicOntology::builder();
        b.edge("Apple", "Consumer Electronics")
            .edge("Consumer Electronics", "Technology")
            .edge("Google", "Internet")
            .edge("Internet", "Technology")
            .edge("Technology", "Root")
            .edge("Food", "Food & Drink")
            .edge("Food & Drink", "Root");
        b.topic("Island");
        b.build().unwrap()
    }

    #[test]
    fn distances() {
        let o = chain();
        assert_eq!(o.topic_distance("Apple", "Google").unwrap(), Some(4));
        assert_eq!(o.topic_distance("Food", "Google").unwrap(), Some(5));
        assert_eq!(o.topic_distance("Food", "Food").unwrap(), Some(0));
        assert_eq!(o.topic_distance("Food", "Island").unwrap(), None);
        assert!(matches!(o.topic_distance("Food", "Nope"), Err(EdlError::UnknownTopic(_))));
    }

    #[test]
    fn cycle_is_reported() {
        let mut b = TopicOntology::builder();
        b.edge("X", "A").edge("A", "B").edge("B", "A");
        match b.build() {
            Err(EdlError::OntologyCycle(c)) => {
                assert_eq!(c.first(), c.last());
                assert!(c.contains(&"A".to_string()) && c.contains(&"B".to_string()));
                assert!(!c.contains(&"X".to_string()));
            }
            other => panic!("expected cycle, got {other:?}"),
        }
        let mut b = TopicOntology::builder();
        b.edge("S", "S");
        assert!(matches!(b.build(), Err(EdlError::OntologyCycle(_))));
    }

    #[test]
    fn diamond_is_not_a_cycle() {
        let mut b = TopicOntology::builder();
        b.edge("D", "B").edge("D", "C").edge("B", "A").edge("C", "A");
        let o = b.build().unwrap();
        assert_eq!(o.topic_distance("B", "C").unwrap(), Some(2));
        assert_eq!(o.parents_of("D").unwrap(), vec!["B", "C"]);
    }

    #[test]
    fn entity_distance_uses_closest_topic_pair() {
        let mut b = TopicOntology::builder();
        b.edge("a1", "r").edge("a2", "b1").edge("b1", "r");
        b.entity_topic(EntityId::kb("A"), "a1").entity_topic(EntityId::kb("A"), "a2");
        b.entity_topic(EntityId::kb("B"), "b1");
        let o = b.build().unwrap();
        assert_eq!(o.entity_distance(&EntityId::kb("A"), &EntityId::kb("B")), Some(1));
        assert_eq!(o.entity_distance(&EntityId::kb("A"), &EntityId::kb("Z")), None);
    }
}
