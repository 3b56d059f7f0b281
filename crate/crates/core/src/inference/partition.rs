use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntityKind {
    System,
    Host,
}

/// Disjoint sets over dense indices, union by rank with path compression.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}

/// Equivalence classes of entity ids. Every class is represented by its
/// lexicographically smallest member.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub kind: EntityKind,
    canonical: BTreeMap<String, String>,
}

impl Partition {
    /// Builds the partition over `ids` (plus every id mentioned in `pairs`)
    /// where each pair is an equivalence witness.
    pub fn build<I, P>(kind: EntityKind, ids: I, pairs: P) -> Self
    where
        I: IntoIterator<Item = String>,
        P: IntoIterator<Item = (String, String)>,
    {
        let mut index: BTreeMap<String, usize> = BTreeMap::new();
        let mut names: Vec<String> = Vec::new();
        let mut intern = |s: String, index: &mut BTreeMap<String, usize>| -> usize {
            *index.entry(s.clone()).or_insert_with(|| {
                names.push(s);
                names.len() - 1
            })
        };
        for id in ids {
            intern(id, &mut index);
        }
        let pairs: Vec<(usize, usize)> = pairs
            .into_iter()
            .map(|(a, b)| (intern(a, &mut index), intern(b, &mut index)))
            .collect();
        let mut uf = UnionFind::new(names.len());
        for (a, b) in pairs {
            uf.union(a, b);
        }
        // BTreeMap iteration is sorted, so the first member seen per root is
        // the smallest.
        let mut rep: BTreeMap<usize, String> = BTreeMap::new();
        let mut canonical = BTreeMap::new();
        for (name, &i) in &index {
            let root = uf.find(i);
            let r = rep.entry(root).or_insert_with(|| name.clone()).clone();
            canonical.insert(name.clone(), r);
        }
        Partition { kind, canonical }
    }

    /// Representative of `id`; unknown ids are their own singleton class.
    pub fn canon<'a>(&'a self, id: &'a str) -> &'a str {
        self.canonical.get(id).map_or(id, String::as_str)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.canonical.contains_key(id)
    }

    pub fn same(&self, a: &str, b: &str) -> bool {
        self.canon(a) == self.canon(b)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.canonical.keys().map(String::as_str)
    }

    /// Representative -> sorted members.
    pub fn classes(&self) -> BTreeMap<&str, Vec<&str>> {
        let mut out: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for (id, rep) in &self.canonical {
            out.entry(rep.as_str()).or_default().push(id.as_str());
        }
        out
    }

    pub fn class_count(&self) -> usize {
        self.classes().len()
    }

    pub fn len(&self) -> usize {
        self.canonical.len()
    }

    pub fn is_empty(&self) -> bool {
        self.canonical.is_empty()
    }
}
