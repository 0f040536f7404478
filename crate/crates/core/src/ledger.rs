//! Append-only log of interactions between users and their contacts, with
//! counters over a trailing 365-day window.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use chrono::Duration;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{SocialGraph, UserId};
use crate::ingest::{numbered_lines, IngestReport, RejectedLine};
use crate::timestamp::{self, Timestamp};

/// Counters only see events newer than `as_of - WINDOW_DAYS`.
pub const WINDOW_DAYS: i64 = 365;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Favorite,
    Retweet,
    Mention,
    FridayFollow,
    Like,
    Dislike,
    Comment,
    Share,
    PrivateMessage,
}

impl EventKind {
    pub const ALL: [EventKind; 9] = [
        EventKind::Favorite,
        EventKind::Retweet,
        EventKind::Mention,
        EventKind::FridayFollow,
        EventKind::Like,
        EventKind::Dislike,
        EventKind::Comment,
        EventKind::Share,
        EventKind::PrivateMessage,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Favorite => "favorite",
            EventKind::Retweet => "retweet",
            EventKind::Mention => "mention",
            EventKind::FridayFollow => "friday_follow",
            EventKind::Like => "like",
            EventKind::Dislike => "dislike",
            EventKind::Comment => "comment",
            EventKind::Share => "share",
            EventKind::PrivateMessage => "private_message",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EventKind {
    type Err = LedgerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EventKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| LedgerError::UnknownKind(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LedgerError {
    #[error("unknown user `{0}`")]
    UnknownUser(UserId),
    #[error("actor and contact are the same user `{0}`")]
    SelfEvent(UserId),
    #[error("unknown event kind `{0}`")]
    UnknownKind(String),
    #[error("malformed event: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ActivityEvent {
    pub actor: UserId,
    pub contact: UserId,
    pub kind: EventKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub post_id: Option<String>,
    #[serde(with = "crate::timestamp::iso")]
    pub at: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CounterQuery {
    pub actor: UserId,
    pub contact: UserId,
    pub kind: EventKind,
    pub as_of: Timestamp,
}

impl CounterQuery {
    /// Half-open window `(as_of - 365d, as_of]`.
    pub fn contains(&self, at: Timestamp) -> bool {
        at > self.as_of - Duration::days(WINDOW_DAYS) && at <= self.as_of
    }
}

type SeriesKey = (UserId, UserId, EventKind);

#[derive(Debug, Clone, Default)]
pub struct ActivityLedger {
    events: Vec<ActivityEvent>,
    seen: HashSet<ActivityEvent>,
    /// Sorted unix seconds per (actor, contact, kind).
    series: HashMap<SeriesKey, Vec<i64>>,
}

impl ActivityLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Stores `e`. Returns `false` when an identical event was already
    /// recorded. Events may arrive in any timestamp order.
    pub fn record(&mut self, graph: &SocialGraph, e: ActivityEvent) -> Result<bool, LedgerError> {
        for u in [&e.actor, &e.contact] {
            if !graph.contains(u.as_str()) {
                return Err(LedgerError::UnknownUser(u.clone()));
            }
        }
        if e.actor == e.contact {
            return Err(LedgerError::SelfEvent(e.actor));
        }
        if self.seen.contains(&e) {
            return Ok(false);
        }
        let series = self
            .series
            .entry((e.actor.clone(), e.contact.clone(), e.kind))
            .or_default();
        let ts = e.at.timestamp();
        let pos = series.partition_point(|&t| t <= ts);
        series.insert(pos, ts);
        self.seen.insert(e.clone());
        self.events.push(e);
        Ok(true)
    }

    pub fn count(&self, q: &CounterQuery) -> u64 {
        let Some(series) = self.series.get(&(q.actor.clone(), q.contact.clone(), q.kind)) else {
            return 0;
        };
        let hi = q.as_of.timestamp();
        let lo = (q.as_of - Duration::days(WINDOW_DAYS)).timestamp();
        let upto_hi = series.partition_point(|&t| t <= hi);
        let upto_lo = series.partition_point(|&t| t <= lo);
        (upto_hi - upto_lo) as u64
    }

    pub fn count_kind(
        &self,
        actor: &UserId,
        contact: &UserId,
        kind: EventKind,
        as_of: Timestamp,
    ) -> u64 {
        self.count(&CounterQuery {
            actor: actor.clone(),
            contact: contact.clone(),
            kind,
            as_of,
        })
    }

    /// Likes over dislikes in the window; `None` when there are no dislikes.
    pub fn like_ratio(&self, a: &UserId, b: &UserId, as_of: Timestamp) -> Option<Ratio<u64>> {
        let likes = self.count_kind(a, b, EventKind::Like, as_of);
        let dislikes = self.count_kind(a, b, EventKind::Dislike, as_of);
        (dislikes > 0).then(|| Ratio::new(likes, dislikes))
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Events in arrival order.
    pub fn events(&self) -> &[ActivityEvent] {
        &self.events
    }

    /// Parses and records a JSON Lines body. Rejected lines are reported and
    /// skipped; `on_accept` sees every newly stored event.
    pub fn ingest_jsonl(
        &mut self,
        graph: &SocialGraph,
        body: &str,
        mut on_accept: impl FnMut(&ActivityEvent),
    ) -> IngestReport {
        let mut report = IngestReport::default();
        for (line, raw) in numbered_lines(body) {
            let outcome = parse_event_line(raw).and_then(|e| {
                let stored = self.record(graph, e.clone())?;
                Ok((stored, e))
            });
            match outcome {
                Ok((true, e)) => {
                    report.accepted += 1;
                    on_accept(&e);
                }
                Ok((false, _)) => report.duplicates += 1,
                Err(err) => report.rejected.push(RejectedLine {
                    line,
                    error: err.to_string(),
                }),
            }
        }
        report
    }

    pub fn export_jsonl(&self) -> String {
        self.events.iter().map(event_line).collect()
    }
}

/// One JSON Lines record, newline-terminated.
pub fn event_line(e: &ActivityEvent) -> String {
    let mut s = serde_json::to_string(e).expect("events serialize");
    s.push('\n');
    s
}

fn parse_event_line(raw: &str) -> Result<ActivityEvent, LedgerError> {
    #[derive(Deserialize)]
    struct Raw {
        actor: String,
        contact: String,
        kind: String,
        #[serde(default)]
        post_id: Option<String>,
        at: String,
    }
    let r: Raw = serde_json::from_str(raw).map_err(|e| LedgerError::Malformed(e.to_string()))?;
    let user = |s: String| UserId::new(s).map_err(|e| LedgerError::Malformed(e.to_string()));
    Ok(ActivityEvent {
        actor: user(r.actor)?,
        contact: user(r.contact)?,
        kind: r.kind.parse()?,
        post_id: r.post_id,
        at: timestamp::parse(&r.at).map_err(|e| LedgerError::Malformed(e.to_string()))?,
    })
}
