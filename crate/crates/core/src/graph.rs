//! Follow graph with static, per-topic and distance-inferred trust.

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use crate::fixed::div_round_half_up;
use crate::trust::TrustScore;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("malformed user id `{0}`")]
    MalformedUserId(String),
    #[error("malformed topic `{0}`")]
    MalformedTopic(String),
    #[error("unknown user `{0}`")]
    UnknownUser(UserId),
    #[error("a user cannot follow themselves (`{0}`)")]
    SelfFollow(UserId),
    #[error("`{0}` does not follow `{1}`")]
    MissingEdge(UserId, UserId),
    #[error("inferred trust needs two distinct users (`{0}`)")]
    SameUser(UserId),
    #[error("line {line}: {message}")]
    Import { line: usize, message: String },
}

/// Case-sensitive user handle. Nonempty, no whitespace or control characters
/// so that it fits in the line-oriented graph export.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct UserId(String);

impl UserId {
    pub fn new(id: impl Into<String>) -> Result<Self, GraphError> {
        let id = id.into();
        if id.is_empty() || id.chars().any(|c| c.is_whitespace() || c.is_control()) {
            return Err(GraphError::MalformedUserId(id));
        }
        Ok(UserId(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for UserId {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        UserId::new(s)
    }
}

impl Borrow<str> for UserId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl<'de> Deserialize<'de> for UserId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        UserId::new(String::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// A topic name, lowercased. Normalization is idempotent.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Topic(String);

impl Topic {
    pub fn new(name: &str) -> Result<Self, GraphError> {
        let norm = name.trim().trim_start_matches('#').to_lowercase();
        if norm.is_empty() || norm.chars().any(|c| c.is_whitespace() || c.is_control()) {
            return Err(GraphError::MalformedTopic(name.to_string()));
        }
        Ok(Topic(norm))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Topic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for Topic {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Topic::new(s)
    }
}

impl<'de> Deserialize<'de> for Topic {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Topic::new(&String::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayMode {
    /// `k / x`
    Linear,
    /// `k / x²`
    InverseSquare,
}

impl FromStr for DecayMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear" => Ok(DecayMode::Linear),
            "inverse_square" | "inverse-square" => Ok(DecayMode::InverseSquare),
            other => Err(format!("unknown decay mode `{other}`")),
        }
    }
}

/// Applies a decay law to a first-hop trust `k` at hop distance `hops >= 1`.
pub fn decay(k: TrustScore, hops: u32, mode: DecayMode) -> TrustScore {
    if hops <= 1 {
        return k;
    }
    let divisor = match mode {
        DecayMode::Linear => u128::from(hops),
        DecayMode::InverseSquare => u128::from(hops) * u128::from(hops),
    };
    TrustScore::saturating_from_hundredths(div_round_half_up(u128::from(k.hundredths()), divisor))
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Edge {
    trust: TrustScore,
    topics: BTreeMap<Topic, TrustScore>,
}

impl Default for Edge {
    fn default() -> Self {
        Edge {
            trust: TrustScore::DEFAULT,
            topics: BTreeMap::new(),
        }
    }
}

/// Users and directed follow edges (follower → followee), each edge carrying
/// its static trust and optional per-topic trust.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SocialGraph {
    users: BTreeSet<UserId>,
    follows: BTreeMap<UserId, BTreeMap<UserId, Edge>>,
}

impl SocialGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_user(&mut self, id: UserId) -> bool {
        self.users.insert(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.users.contains(id)
    }

    pub fn users(&self) -> impl Iterator<Item = &UserId> {
        self.users.iter()
    }

    pub fn user_count(&self) -> usize {
        self.users.len()
    }

    fn require(&self, id: &UserId) -> Result<(), GraphError> {
        if self.users.contains(id) {
            Ok(())
        } else {
            Err(GraphError::UnknownUser(id.clone()))
        }
    }

    /// Creates `a → b` with the default trust. Following an already-followed
    /// contact keeps the existing trust values.
    pub fn follow(&mut self, a: &UserId, b: &UserId) -> Result<(), GraphError> {
        if a == b {
            return Err(GraphError::SelfFollow(a.clone()));
        }
        self.require(a)?;
        self.require(b)?;
        self.follows
            .entry(a.clone())
            .or_default()
            .entry(b.clone())
            .or_default();
        Ok(())
    }

    pub fn follow_count(&self) -> usize {
        self.follows.values().map(BTreeMap::len).sum()
    }

    pub fn follows(&self, a: &str, b: &str) -> bool {
        self.follows.get(a).is_some_and(|m| m.contains_key(b))
    }

    /// First-level contacts of `a`, in id order.
    pub fn contacts<'a>(&'a self, a: &str) -> impl Iterator<Item = &'a UserId> + 'a {
        self.follows.get(a).into_iter().flat_map(|m| m.keys())
    }

    fn edge(&self, a: &UserId, b: &UserId) -> Result<&Edge, GraphError> {
        self.follows
            .get(a)
            .and_then(|m| m.get(b))
            .ok_or_else(|| GraphError::MissingEdge(a.clone(), b.clone()))
    }

    fn edge_mut(&mut self, a: &UserId, b: &UserId) -> Result<&mut Edge, GraphError> {
        self.follows
            .get_mut(a)
            .and_then(|m| m.get_mut(b))
            .ok_or_else(|| GraphError::MissingEdge(a.clone(), b.clone()))
    }

    pub fn set_static_trust(
        &mut self,
        a: &UserId,
        b: &UserId,
        value: TrustScore,
    ) -> Result<(), GraphError> {
        self.edge_mut(a, b)?.trust = value;
        Ok(())
    }

    pub fn static_trust(&self, a: &UserId, b: &UserId) -> Result<TrustScore, GraphError> {
        Ok(self.edge(a, b)?.trust)
    }

    pub fn set_topic_trust(
        &mut self,
        a: &UserId,
        b: &UserId,
        topic: Topic,
        value: TrustScore,
    ) -> Result<(), GraphError> {
        self.edge_mut(a, b)?.topics.insert(topic, value);
        Ok(())
    }

    /// Topic trust of `a → b`, falling back to the static trust when unset.
    pub fn topic_trust(
        &self,
        a: &UserId,
        b: &UserId,
        topic: &Topic,
    ) -> Result<TrustScore, GraphError> {
        let edge = self.edge(a, b)?;
        Ok(edge.topics.get(topic).copied().unwrap_or(edge.trust))
    }

    /// Contacts of `a` whose effective trust on `topic` is at least `threshold`.
    pub fn experts(
        &self,
        a: &UserId,
        topic: &Topic,
        threshold: TrustScore,
    ) -> Result<BTreeSet<UserId>, GraphError> {
        self.require(a)?;
        Ok(self
            .follows
            .get(a)
            .into_iter()
            .flatten()
            .filter(|(_, e)| e.topics.get(topic).copied().unwrap_or(e.trust) >= threshold)
            .map(|(b, _)| b.clone())
            .collect())
    }

    /// Hop distances to `target` from every user that can reach it, found by
    /// a breadth-first walk over reversed edges.
    fn distances_to(&self, target: &UserId) -> HashMap<&UserId, u32> {
        let mut reverse: HashMap<&UserId, Vec<&UserId>> = HashMap::new();
        for (from, out) in &self.follows {
            for to in out.keys() {
                reverse.entry(to).or_default().push(from);
            }
        }
        let mut dist = HashMap::new();
        let mut queue = VecDeque::new();
        let Some(target) = self.users.get(target) else {
            return dist;
        };
        dist.insert(target, 0);
        queue.push_back(target);
        while let Some(node) = queue.pop_front() {
            let d = dist[node];
            for &prev in reverse.get(node).into_iter().flatten() {
                if !dist.contains_key(prev) {
                    dist.insert(prev, d + 1);
                    queue.push_back(prev);
                }
            }
        }
        dist
    }

    /// Length of the shortest directed path `a → … → b`, `None` when
    /// unreachable.
    pub fn distance(&self, a: &UserId, b: &UserId) -> Result<Option<u32>, GraphError> {
        self.require(a)?;
        self.require(b)?;
        if a == b {
            return Ok(Some(0));
        }
        let mut seen: BTreeSet<&UserId> = BTreeSet::from([a]);
        let mut frontier = vec![a];
        let mut hops = 0;
        while !frontier.is_empty() {
            hops += 1;
            let mut next = Vec::new();
            for node in frontier {
                for succ in self.contacts(node.as_str()) {
                    if succ == b {
                        return Ok(Some(hops));
                    }
                    if seen.insert(succ) {
                        next.push(succ);
                    }
                }
            }
            frontier = next;
        }
        Ok(None)
    }

    /// Trust of `a` in a possibly indirect contact `b`. `k` is the highest
    /// static trust `a` assigns to a first hop lying on some shortest path
    /// to `b`; the result is `k` at one hop and `k` decayed by `mode` beyond.
    pub fn inferred_trust(
        &self,
        a: &UserId,
        b: &UserId,
        mode: DecayMode,
    ) -> Result<Option<TrustScore>, GraphError> {
        self.require(a)?;
        self.require(b)?;
        if a == b {
            return Err(GraphError::SameUser(a.clone()));
        }
        let to_b = self.distances_to(b);
        let Some(&hops) = to_b.get(a) else {
            return Ok(None);
        };
        let k = self
            .follows
            .get(a)
            .into_iter()
            .flatten()
            .filter(|(h, _)| to_b.get(h) == Some(&(hops - 1)))
            .map(|(_, e)| e.trust)
            .max()
            .expect("a reachable target has a first hop on a shortest path");
        Ok(Some(decay(k, hops, mode)))
    }

    /// Line-oriented export: `user`, then `follow`, then `topic_trust`
    /// records, each group in id order.
    pub fn export_text(&self) -> String {
        let mut out = String::new();
        for u in &self.users {
            out.push_str(&format!("user {u}\n"));
        }
        for (a, out_edges) in &self.follows {
            for (b, e) in out_edges {
                out.push_str(&format!("follow {a} {b} {}\n", e.trust));
            }
        }
        for (a, out_edges) in &self.follows {
            for (b, e) in out_edges {
                for (t, v) in &e.topics {
                    out.push_str(&format!("topic_trust {a} {b} {t} {v}\n"));
                }
            }
        }
        out
    }

    /// Parses the export format. Blank lines are skipped; any malformed
    /// record aborts with its line number.
    pub fn import_text(text: &str) -> Result<Self, GraphError> {
        let mut g = SocialGraph::new();
        g.apply_text(text)?;
        Ok(g)
    }

    /// Applies records from the export format onto this graph.
    pub fn apply_text(&mut self, text: &str) -> Result<(), GraphError> {
        for (line, raw) in crate::ingest::numbered_lines(text) {
            self.apply_record(raw)
                .map_err(|e| GraphError::Import {
                    line,
                    message: e.to_string(),
                })?;
        }
        Ok(())
    }

    fn apply_record(&mut self, raw: &str) -> Result<(), GraphError> {
        let fields: Vec<&str> = raw.split_whitespace().collect();
        let bad = || GraphError::Import {
            line: 0,
            message: format!("malformed record `{raw}`"),
        };
        let trust = |s: &str| {
            s.parse::<TrustScore>().map_err(|e| GraphError::Import {
                line: 0,
                message: e.to_string(),
            })
        };
        match fields.as_slice() {
            ["user", id] => {
                self.add_user(UserId::new(*id)?);
            }
            ["follow", a, b, v] => {
                let (a, b) = (UserId::new(*a)?, UserId::new(*b)?);
                let v = trust(v)?;
                self.follow(&a, &b)?;
                self.set_static_trust(&a, &b, v)?;
            }
            ["topic_trust", a, b, t, v] => {
                let (a, b) = (UserId::new(*a)?, UserId::new(*b)?);
                let v = trust(v)?;
                self.set_topic_trust(&a, &b, Topic::new(t)?, v)?;
            }
            _ => return Err(bad()),
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uid(s: &str) -> UserId {
        UserId::new(s).unwrap()
    }

    fn graph(users: &[&str], edges: &[(&str, &str)]) -> SocialGraph {
        let mut g = SocialGraph::new();
        for u in users {
            g.add_user(uid(u));
        }
        for (a, b) in edges {
            g.follow(&uid(a), &uid(b)).unwrap();
        }
        g
    }

    #[test]
    fn add_user_is_idempotent_and_validates() {
        let mut g = SocialGraph::new();
        assert!(g.add_user(uid("alice")));
        assert!(!g.add_user(uid("alice")));
        assert_eq!(g.user_count(), 1);
        assert!(matches!(UserId::new(""), Err(GraphError::MalformedUserId(_))));
        assert!(UserId::new("two words").is_err());
        assert_ne!(uid("Alice"), uid("alice"));
    }

    #[test]
    fn follow_defaults_to_fifty() {
        let g = graph(&["alice", "bob"], &[("alice", "bob")]);
        assert_eq!(
            g.static_trust(&uid("alice"), &uid("bob")).unwrap().to_string(),
            "50.00"
        );
    }

    #[test]
    fn follow_errors() {
        let mut g = graph(&["alice"], &[]);
        assert_eq!(
            g.follow(&uid("alice"), &uid("alice")),
            Err(GraphError::SelfFollow(uid("alice")))
        );
        assert_eq!(
            g.follow(&uid("alice"), &uid("ghost")),
            Err(GraphError::UnknownUser(uid("ghost")))
        );
    }

    #[test]
    fn trust_is_asymmetric() {
        let mut g = graph(&["Alice", "Bob"], &[("Alice", "Bob"), ("Bob", "Alice")]);
        g.set_static_trust(&uid("Alice"), &uid("Bob"), TrustScore::percent(99))
            .unwrap();
        g.set_static_trust(&uid("Bob"), &uid("Alice"), TrustScore::percent(0))
            .unwrap();
        assert_eq!(g.static_trust(&uid("Alice"), &uid("Bob")).unwrap().to_string(), "99.00");
        assert_eq!(g.static_trust(&uid("Bob"), &uid("Alice")).unwrap().to_string(), "0.00");
    }

    #[test]
    fn static_trust_requires_edge() {
        let mut g = graph(&["a", "b"], &[]);
        assert!(matches!(
            g.static_trust(&uid("a"), &uid("b")),
            Err(GraphError::MissingEdge(..))
        ));
        assert!(g
            .set_static_trust(&uid("a"), &uid("b"), TrustScore::DEFAULT)
            .is_err());
        g.follow(&uid("a"), &uid("b")).unwrap();
        g.set_static_trust(&uid("a"), &uid("b"), "55".parse().unwrap())
            .unwrap();
        assert_eq!(g.static_trust(&uid("a"), &uid("b")).unwrap().to_string(), "55.00");
    }

    #[test]
    fn topic_trust_is_per_topic_with_static_fallback() {
        let mut g = graph(&["Bob", "Alice"], &[("Bob", "Alice")]);
        let (bob, alice) = (uid("Bob"), uid("Alice"));
        let football = Topic::new("Football").unwrap();
        let fashion = Topic::new("fashion").unwrap();
        g.set_topic_trust(&bob, &alice, football.clone(), TrustScore::percent(0))
            .unwrap();
        g.set_topic_trust(&bob, &alice, fashion.clone(), TrustScore::percent(99))
            .unwrap();
        assert_eq!(g.topic_trust(&bob, &alice, &football).unwrap(), TrustScore::percent(0));
        assert_eq!(g.topic_trust(&bob, &alice, &fashion).unwrap(), TrustScore::percent(99));
        let music = Topic::new("music").unwrap();
        assert_eq!(g.topic_trust(&bob, &alice, &music).unwrap(), TrustScore::DEFAULT);
        g.set_topic_trust(&bob, &alice, fashion.clone(), TrustScore::percent(10))
            .unwrap();
        assert_eq!(g.topic_trust(&bob, &alice, &fashion).unwrap(), TrustScore::percent(10));
        assert_eq!(g.static_trust(&bob, &alice).unwrap(), TrustScore::DEFAULT);
    }

    #[test]
    fn topic_normalization_is_idempotent() {
        let t = Topic::new("#FootBall").unwrap();
        assert_eq!(t.as_str(), "football");
        assert_eq!(Topic::new(t.as_str()).unwrap(), t);
        assert!(Topic::new("").is_err());
    }

    #[test]
    fn distances() {
        let g = graph(&["a", "b", "c", "d"], &[("a", "b"), ("b", "c")]);
        assert_eq!(g.distance(&uid("a"), &uid("a")).unwrap(), Some(0));
        assert_eq!(g.distance(&uid("a"), &uid("c")).unwrap(), Some(2));
        assert_eq!(g.distance(&uid("c"), &uid("a")).unwrap(), None);
        assert_eq!(g.distance(&uid("a"), &uid("d")).unwrap(), None);
        assert!(g.distance(&uid("a"), &uid("zz")).is_err());
    }

    fn chain(len: usize, k: u16) -> (SocialGraph, Vec<UserId>) {
        let ids: Vec<UserId> = (0..=len).map(|i| uid(&format!("u{i}"))).collect();
        let mut g = SocialGraph::new();
        for id in &ids {
            g.add_user(id.clone());
        }
        for w in ids.windows(2) {
            g.follow(&w[0], &w[1]).unwrap();
        }
        g.set_static_trust(&ids[0], &ids[1], TrustScore::percent(k))
            .unwrap();
        (g, ids)
    }

    #[test]
    fn inferred_trust_examples() {
        let (g, ids) = chain(3, 99);
        let lin = |x: usize| g.inferred_trust(&ids[0], &ids[x], DecayMode::Linear).unwrap();
        assert_eq!(lin(1).unwrap().to_string(), "99.00");
        assert_eq!(lin(3).unwrap().to_string(), "33.00");
        let sq = g
            .inferred_trust(&ids[0], &ids[2], DecayMode::InverseSquare)
            .unwrap();
        assert_eq!(sq.unwrap().to_string(), "24.75");
        assert_eq!(g.inferred_trust(&ids[3], &ids[0], DecayMode::Linear).unwrap(), None);
        assert!(matches!(
            g.inferred_trust(&ids[0], &ids[0], DecayMode::Linear),
            Err(GraphError::SameUser(_))
        ));
    }

    #[test]
    fn inferred_trust_takes_best_shortest_first_hop() {
        // a→b→d (b at 40), a→c→d (c at 80), a→e→f→d (e at 100, longer path)
        let mut g = graph(
            &["a", "b", "c", "d", "e", "f"],
            &[("a", "b"), ("b", "d"), ("a", "c"), ("c", "d"), ("a", "e"), ("e", "f"), ("f", "d")],
        );
        g.set_static_trust(&uid("a"), &uid("b"), TrustScore::percent(40)).unwrap();
        g.set_static_trust(&uid("a"), &uid("c"), TrustScore::percent(80)).unwrap();
        g.set_static_trust(&uid("a"), &uid("e"), TrustScore::percent(100)).unwrap();
        let v = g.inferred_trust(&uid("a"), &uid("d"), DecayMode::Linear).unwrap();
        assert_eq!(v.unwrap().to_string(), "40.00");
    }

    #[test]
    fn experts_projection() {
        let mut g = graph(
            &["Alice", "Bob", "Ken", "John", "Eve"],
            &[("Alice", "Bob"), ("Alice", "Ken"), ("Alice", "John"), ("Alice", "Eve")],
        );
        let football = Topic::new("football").unwrap();
        for c in ["Bob", "Ken", "John"] {
            g.set_topic_trust(&uid("Alice"), &uid(c), football.clone(), TrustScore::percent(99))
                .unwrap();
        }
        let got = g.experts(&uid("Alice"), &football, TrustScore::percent(80)).unwrap();
        let want: BTreeSet<_> = ["Bob", "Ken", "John"].into_iter().map(uid).collect();
        assert_eq!(got, want);
        assert!(g
            .experts(&uid("Alice"), &football, TrustScore::MAX)
            .unwrap()
            .is_empty());
        assert_eq!(
            g.experts(&uid("Alice"), &football, TrustScore::ZERO).unwrap().len(),
            4
        );
    }

    #[test]
    fn export_import_round_trip() {
        let mut g = graph(&["a", "b", "c"], &[("a", "b"), ("b", "c"), ("c", "a")]);
        g.set_static_trust(&uid("a"), &uid("b"), "55.5".parse().unwrap()).unwrap();
        g.set_topic_trust(&uid("b"), &uid("c"), Topic::new("apple").unwrap(), TrustScore::percent(7))
            .unwrap();
        let text = g.export_text();
        assert!(text.contains("follow a b 55.50\n"));
        assert!(text.contains("topic_trust b c apple 7.00\n"));
        let back = SocialGraph::import_text(&text).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.export_text(), text);
    }

    #[test]
    fn import_reports_line_numbers() {
        let err = SocialGraph::import_text("user a\n\nfollow a ghost 10\n").unwrap_err();
        assert!(matches!(err, GraphError::Import { line: 3, .. }), "{err:?}");
        let err = SocialGraph::import_text("user a\nuser b\nfollow a b 100.5\n").unwrap_err();
        assert!(matches!(err, GraphError::Import { line: 3, .. }));
        assert!(SocialGraph::import_text("frobnicate\n").is_err());
    }
}
