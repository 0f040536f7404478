//! Keyword index over posts with trust-ordered, paginated retrieval.
//!
//! Matching is whole-token and case-insensitive over the post text; hashtag
//! words are ordinary tokens once the `#` is stripped. A multi-word query
//! matches posts containing every word. Only posts written by the
//! searcher's first-level contacts are candidates, and each candidate is
//! tagged with its author's trust (static, or dynamic as of the query time)
//! computed once per author. Results are ordered by trust descending, then
//! newest first, then post id.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamic::{compute_dynamic_trust, ActivityCounts, CoefficientSet, DynamicTrustInput};
use crate::graph::{SocialGraph, UserId};
use crate::ingest::{numbered_lines, IngestReport, RejectedLine};
use crate::ledger::{ActivityLedger, EventKind};
use crate::text::{marked_words, tokenize};
use crate::timestamp::Timestamp;
use crate::trust::TrustScore;

pub const PAGE_SIZE: usize = 50;
pub const DEFAULT_MAX_LEN: usize = 140;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("post `{id}` is {len} characters, above the limit of {max}")]
    TooLong { id: String, len: usize, max: usize },
    #[error("unknown user `{0}`")]
    UnknownUser(UserId),
    #[error("duplicate post id `{0}`")]
    DuplicatePost(String),
    #[error("empty post id")]
    EmptyPostId,
    #[error("query has no searchable words")]
    EmptyQuery,
    #[error("page numbers start at 1")]
    BadPage,
    #[error("time range starts after it ends")]
    BadTimeRange,
    #[error("`{0}` is not a contact of the searcher")]
    NotAContact(UserId),
    #[error("malformed post: {0}")]
    Malformed(String),
}

/// A post as submitted for ingest. Hashtags and mentions are derived.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostInput {
    pub post_id: String,
    pub author: UserId,
    pub text: String,
    #[serde(with = "crate::timestamp::iso")]
    pub created_at: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Post {
    pub post_id: String,
    pub author: UserId,
    pub text: String,
    pub created_at: Timestamp,
    pub hashtags: BTreeSet<String>,
    pub mentions: BTreeSet<String>,
}

impl Post {
    fn from_input(input: PostInput) -> Self {
        Post {
            hashtags: marked_words(&input.text, '#'),
            mentions: marked_words(&input.text, '@'),
            post_id: input.post_id,
            author: input.author,
            text: input.text,
            created_at: input.created_at,
        }
    }

    pub fn to_input(&self) -> PostInput {
        PostInput {
            post_id: self.post_id.clone(),
            author: self.author.clone(),
            text: self.text.clone(),
            created_at: self.created_at,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrustMode {
    #[default]
    Static,
    Dynamic,
}

impl FromStr for TrustMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "static" => Ok(TrustMode::Static),
            "dynamic" => Ok(TrustMode::Dynamic),
            other => Err(format!("unknown trust mode `{other}`")),
        }
    }
}

impl fmt::Display for TrustMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrustMode::Static => "static",
            TrustMode::Dynamic => "dynamic",
        })
    }
}

/// Inclusive bounds; either side may be open.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TimeRange {
    pub from: Option<Timestamp>,
    pub to: Option<Timestamp>,
}

impl TimeRange {
    pub fn contains(&self, t: Timestamp) -> bool {
        self.from.is_none_or(|f| t >= f) && self.to.is_none_or(|to| t <= to)
    }

    fn is_valid(&self) -> bool {
        match (self.from, self.to) {
            (Some(f), Some(t)) => f <= t,
            _ => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchRequest {
    pub searcher: UserId,
    pub query: String,
    pub mode: TrustMode,
    pub time_range: TimeRange,
    pub friends: Option<BTreeSet<UserId>>,
    /// 1-based.
    pub page: usize,
    /// Reference time for the activity window in dynamic mode.
    pub as_of: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankedResult {
    pub post_id: String,
    pub author: UserId,
    pub text: String,
    #[serde(with = "crate::timestamp::iso")]
    pub created_at: Timestamp,
    pub trust: TrustScore,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchPage {
    pub total: usize,
    pub page: usize,
    pub results: Vec<RankedResult>,
}

/// Read-only view of the state a ranking needs.
#[derive(Clone, Copy)]
pub struct TrustContext<'a> {
    pub graph: &'a SocialGraph,
    pub ledger: &'a ActivityLedger,
    pub coefficients: CoefficientSet,
}

impl TrustContext<'_> {
    /// Trust of `searcher` in `contact` under `mode`. `results_count` only
    /// matters in dynamic mode.
    pub fn author_trust(
        &self,
        searcher: &UserId,
        contact: &UserId,
        mode: TrustMode,
        results_count: u64,
        as_of: Timestamp,
    ) -> Option<TrustScore> {
        let static_trust = self.graph.static_trust(searcher, contact).ok()?;
        Some(match mode {
            TrustMode::Static => static_trust,
            TrustMode::Dynamic => {
                let n = |kind| self.ledger.count_kind(searcher, contact, kind, as_of);
                compute_dynamic_trust(&DynamicTrustInput {
                    static_trust,
                    activity: ActivityCounts {
                        favorites: n(EventKind::Favorite),
                        retweets: n(EventKind::Retweet),
                        mentions: n(EventKind::Mention),
                        fridayfollows: n(EventKind::FridayFollow),
                    },
                    results_count,
                    coefficients: self.coefficients,
                })
            }
        })
    }
}

#[derive(Debug, Clone)]
pub struct SearchIndex {
    max_len: usize,
    posts: Vec<Post>,
    by_id: HashMap<String, usize>,
    /// token → ascending post positions
    postings: HashMap<String, Vec<usize>>,
}

impl Default for SearchIndex {
    fn default() -> Self {
        SearchIndex::new(DEFAULT_MAX_LEN)
    }
}

impl SearchIndex {
    pub fn new(max_len: usize) -> Self {
        SearchIndex {
            max_len,
            posts: Vec::new(),
            by_id: HashMap::new(),
            postings: HashMap::new(),
        }
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn len(&self) -> usize {
        self.posts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.posts.is_empty()
    }

    /// Posts in ingest order.
    pub fn posts(&self) -> &[Post] {
        &self.posts
    }

    pub fn get(&self, post_id: &str) -> Option<&Post> {
        self.by_id.get(post_id).map(|&i| &self.posts[i])
    }

    pub fn index_post(&mut self, graph: &SocialGraph, input: PostInput) -> Result<&Post, SearchError> {
        if input.post_id.is_empty() {
            return Err(SearchError::EmptyPostId);
        }
        if !graph.contains(input.author.as_str()) {
            return Err(SearchError::UnknownUser(input.author));
        }
        let len = input.text.chars().count();
        if len > self.max_len {
            return Err(SearchError::TooLong {
                id: input.post_id,
                len,
                max: self.max_len,
            });
        }
        if self.by_id.contains_key(&input.post_id) {
            return Err(SearchError::DuplicatePost(input.post_id));
        }
        let pos = self.posts.len();
        let tokens: BTreeSet<String> = tokenize(&input.text).into_iter().collect();
        for t in tokens {
            self.postings.entry(t).or_default().push(pos);
        }
        self.by_id.insert(input.post_id.clone(), pos);
        self.posts.push(Post::from_input(input));
        Ok(&self.posts[pos])
    }

    pub fn ingest_jsonl(
        &mut self,
        graph: &SocialGraph,
        body: &str,
        mut on_accept: impl FnMut(&Post),
    ) -> IngestReport {
        let mut report = IngestReport::default();
        for (line, raw) in numbered_lines(body) {
            let outcome = serde_json::from_str::<PostInput>(raw)
                .map_err(|e| SearchError::Malformed(e.to_string()))
                .and_then(|p| self.index_post(graph, p));
            match outcome {
                Ok(post) => {
                    report.accepted += 1;
                    on_accept(post);
                }
                Err(e) => report.rejected.push(RejectedLine {
                    line,
                    error: e.to_string(),
                }),
            }
        }
        report
    }

    pub fn export_jsonl(&self) -> String {
        self.posts.iter().map(|p| post_line(&p.to_input())).collect()
    }

    /// Positions of posts containing every query word, ascending.
    fn matching(&self, query: &str) -> Result<Vec<usize>, SearchError> {
        let words: BTreeSet<String> = tokenize(query).into_iter().collect();
        if words.is_empty() {
            return Err(SearchError::EmptyQuery);
        }
        let mut lists: Vec<&Vec<usize>> = Vec::with_capacity(words.len());
        for w in &words {
            match self.postings.get(w) {
                Some(l) => lists.push(l),
                None => return Ok(Vec::new()),
            }
        }
        lists.sort_by_key(|l| l.len());
        let mut acc = lists[0].clone();
        for other in &lists[1..] {
            acc.retain(|p| other.binary_search(p).is_ok());
        }
        Ok(acc)
    }

    /// Posts by `contact` matching `query`, ignoring time and friend filters.
    pub fn results_count(&self, contact: &UserId, query: &str) -> u64 {
        self.matching(query)
            .map(|m| m.iter().filter(|&&p| self.posts[p].author == *contact).count() as u64)
            .unwrap_or(0)
    }

    /// Posts containing `word`, oldest first (ties by post id).
    pub fn stream(&self, word: &str) -> Result<Vec<&Post>, SearchError> {
        let mut posts: Vec<&Post> = self.matching(word)?.into_iter().map(|p| &self.posts[p]).collect();
        posts.sort_by(|a, b| a.created_at.cmp(&b.created_at).then_with(|| a.post_id.cmp(&b.post_id)));
        Ok(posts)
    }

    pub fn search(&self, ctx: TrustContext<'_>, req: &SearchRequest) -> Result<SearchPage, SearchError> {
        if !ctx.graph.contains(req.searcher.as_str()) {
            return Err(SearchError::UnknownUser(req.searcher.clone()));
        }
        if req.page < 1 {
            return Err(SearchError::BadPage);
        }
        if !req.time_range.is_valid() {
            return Err(SearchError::BadTimeRange);
        }
        let contacts: BTreeSet<&UserId> = ctx.graph.contacts(req.searcher.as_str()).collect();
        if let Some(friends) = &req.friends {
            if let Some(stranger) = friends.iter().find(|f| !contacts.contains(f)) {
                return Err(SearchError::NotAContact(stranger.clone()));
            }
        }
        let matches = self.matching(&req.query)?;

        let mut per_author: BTreeMap<&UserId, u64> = BTreeMap::new();
        for &p in &matches {
            let author = &self.posts[p].author;
            if contacts.contains(author) {
                *per_author.entry(author).or_default() += 1;
            }
        }
        let trust: HashMap<&UserId, TrustScore> = per_author
            .iter()
            .filter_map(|(&author, &n)| {
                ctx.author_trust(&req.searcher, author, req.mode, n, req.as_of)
                    .map(|t| (author, t))
            })
            .collect();

        let mut hits: Vec<(TrustScore, &Post)> = matches
            .iter()
            .map(|&p| &self.posts[p])
            .filter(|post| req.time_range.contains(post.created_at))
            .filter(|post| req.friends.as_ref().is_none_or(|f| f.contains(&post.author)))
            .filter_map(|post| trust.get(&post.author).map(|&t| (t, post)))
            .collect();
        hits.sort_by(|(ta, a), (tb, b)| {
            tb.cmp(ta)
                .then_with(|| b.created_at.cmp(&a.created_at))
                .then_with(|| a.post_id.cmp(&b.post_id))
        });

        let total = hits.len();
        let start = (req.page - 1).saturating_mul(PAGE_SIZE);
        let results = hits
            .into_iter()
            .enumerate()
            .skip(start)
            .take(PAGE_SIZE)
            .map(|(i, (trust, post))| RankedResult {
                post_id: post.post_id.clone(),
                author: post.author.clone(),
                text: post.text.clone(),
                created_at: post.created_at,
                trust,
                rank: i + 1,
            })
            .collect();
        Ok(SearchPage {
            total,
            page: req.page,
            results,
        })
    }
}

pub fn post_line(p: &PostInput) -> String {
    let mut s = serde_json::to_string(p).expect("posts serialize");
    s.push('\n');
    s
}
