//! Brute-force reference implementations used by property and acceptance
//! tests. None of this goes through the production code paths it checks:
//! tokenization, window filtering, trust arithmetic, sorting and the
//! admission state machine are all re-derived here from their definitions.

#![allow(dead_code)]

use std::collections::BTreeMap;

use chrono::Duration;
use num_rational::Ratio;
use polidoxa_core::timestamp::Timestamp;
use polidoxa_core::{ActivityEvent, EventKind, PostInput};

/// Lowercased maximal runs of alphanumeric characters.
pub fn oracle_tokens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() {
            cur.extend(c.to_lowercase());
        } else if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// `value / divisor` in hundredths, half-up, via exact rationals.
pub fn oracle_round(value: Ratio<u128>) -> u128 {
    let floor = value.floor();
    let frac = value - floor;
    let bump = if frac >= Ratio::new(1, 2) { 1 } else { 0 };
    floor.to_integer() + bump
}

/// Decayed trust in hundredths: k/x or k/x².
pub fn oracle_decay(k_percent: u128, x: u128, squared: bool) -> u128 {
    let divisor = if squared { x * x } else { x };
    oracle_round(Ratio::new(k_percent * 100, divisor))
}

pub fn in_window(at: Timestamp, as_of: Timestamp) -> bool {
    let start = as_of - Duration::days(365);
    start < at && at <= as_of
}

/// Exact duplicates collapse to one event.
pub fn distinct_events(events: &[ActivityEvent]) -> Vec<ActivityEvent> {
    let mut distinct: Vec<ActivityEvent> = Vec::new();
    for e in events {
        if !distinct.contains(e) {
            distinct.push(e.clone());
        }
    }
    distinct
}

/// `events` must already be distinct.
pub fn oracle_count(events: &[ActivityEvent], actor: &str, contact: &str, kind: EventKind, as_of: Timestamp) -> u64 {
    events
        .iter()
        .filter(|e| e.actor.as_str() == actor && e.contact.as_str() == contact && e.kind == kind)
        .filter(|e| in_window(e.at, as_of))
        .count() as u64
}

/// Coefficients as exact rationals of percent.
#[derive(Clone, Copy, Debug)]
pub struct OracleCoefficients {
    pub favorites: Ratio<u128>,
    pub retweets: Ratio<u128>,
    pub mentions: Ratio<u128>,
    pub fridayfollows: Ratio<u128>,
    pub results: Ratio<u128>,
}

/// Dynamic trust in hundredths of a percent.
pub fn oracle_dynamic(static_hundredths: u128, counts: [u64; 4], results: u64, c: &OracleCoefficients) -> u128 {
    let mut percent = Ratio::new(static_hundredths, 100);
    percent += c.favorites * u128::from(counts[0]);
    percent += c.retweets * u128::from(counts[1]);
    percent += c.mentions * u128::from(counts[2]);
    percent += c.fridayfollows * u128::from(counts[3]);
    percent += c.results * u128::from(results);
    oracle_round(percent * 100).min(10_000)
}

pub struct OracleWorld<'a> {
    /// searcher's contacts with their static trust in hundredths
    pub contacts: BTreeMap<String, u128>,
    pub posts: &'a [PostInput],
    pub events: &'a [ActivityEvent],
    pub coefficients: OracleCoefficients,
}

pub struct OracleQuery<'a> {
    pub searcher: &'a str,
    pub query: &'a str,
    pub dynamic: bool,
    pub from: Option<Timestamp>,
    pub to: Option<Timestamp>,
    pub friends: Option<Vec<String>>,
    pub as_of: Timestamp,
}

/// Full ordered match list as (post_id, trust hundredths): filter, tag, sort.
pub fn oracle_search(world: &OracleWorld<'_>, q: &OracleQuery<'_>) -> Vec<(String, u128)> {
    let words = oracle_tokens(q.query);
    let events = distinct_events(world.events);
    let matches = |p: &PostInput| {
        let toks = oracle_tokens(&p.text);
        words.iter().all(|w| toks.contains(w))
    };
    let trust_of = |author: &str| -> u128 {
        let s = world.contacts[author];
        if !q.dynamic {
            return s;
        }
        let results = world
            .posts
            .iter()
            .filter(|p| p.author.as_str() == author && matches(p))
            .count() as u64;
        let n = |k| oracle_count(&events, q.searcher, author, k, q.as_of);
        let counts = [
            n(EventKind::Favorite),
            n(EventKind::Retweet),
            n(EventKind::Mention),
            n(EventKind::FridayFollow),
        ];
        oracle_dynamic(s, counts, results, &world.coefficients)
    };
    let mut hits: Vec<(u128, &PostInput)> = Vec::new();
    for p in world.posts {
        let author = p.author.as_str();
        if !world.contacts.contains_key(author) || !matches(p) {
            continue;
        }
        if q.from.is_some_and(|f| p.created_at < f) || q.to.is_some_and(|t| p.created_at > t) {
            continue;
        }
        if let Some(friends) = &q.friends {
            if !friends.iter().any(|f| f == author) {
                continue;
            }
        }
        hits.push((trust_of(author), p));
    }
    // bubble sort on the documented key, deliberately naive
    let before = |a: &(u128, &PostInput), b: &(u128, &PostInput)| -> bool {
        if a.0 != b.0 {
            return a.0 > b.0;
        }
        if a.1.created_at != b.1.created_at {
            return a.1.created_at > b.1.created_at;
        }
        a.1.post_id < b.1.post_id
    };
    for i in 0..hits.len() {
        for j in 0..hits.len() - 1 - i {
            if before(&hits[j + 1], &hits[j]) {
                hits.swap(j, j + 1);
            }
        }
    }
    hits.into_iter().map(|(t, p)| (p.post_id.clone(), t)).collect()
}

/// Token-count polarity: +1, -1 or 0 by comparing relative frequencies.
pub fn oracle_polarity(text: &str, positive: &[&str], negative: &[&str]) -> i8 {
    let toks = oracle_tokens(text);
    if toks.is_empty() {
        return 0;
    }
    let total = toks.len() as u64;
    let p = Ratio::new(toks.iter().filter(|t| positive.contains(&t.as_str())).count() as u64, total);
    let n = Ratio::new(toks.iter().filter(|t| negative.contains(&t.as_str())).count() as u64, total);
    match p.cmp(&n) {
        std::cmp::Ordering::Greater => 1,
        std::cmp::Ordering::Less => -1,
        std::cmp::Ordering::Equal => 0,
    }
}

/// (candidate, fingerprint, state, approvers, flaggers)
pub type RefRow = (String, String, &'static str, Vec<String>, Vec<String>);

/// Reference admission machine over plain vectors.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RefHolon {
    pub approval_quorum: usize,
    pub flag_quorum: usize,
    pub rows: Vec<RefRow>,
    pub banned_fps: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RefOutcome {
    Ok(&'static str),
    Notice,
    Err(&'static str),
}

impl RefHolon {
    pub fn new(approval_quorum: usize, flag_quorum: usize) -> Self {
        RefHolon {
            approval_quorum,
            flag_quorum,
            ..Default::default()
        }
    }

    fn row(&self, c: &str) -> Option<usize> {
        self.rows.iter().position(|r| r.0 == c)
    }

    fn member(&self, p: &str) -> bool {
        self.row(p).is_some_and(|i| self.rows[i].2 == "trusted")
    }

    fn new_row(&mut self, c: &str, fp: &str, state: &'static str) -> RefOutcome {
        if self.banned_fps.iter().any(|b| b == fp) {
            return RefOutcome::Err("immunized");
        }
        if let Some(i) = self.row(c) {
            return RefOutcome::Err(match self.rows[i].2 {
                "quarantined" => "duplicate_candidacy",
                "trusted" => "already_trusted",
                _ => "candidate_banned",
            });
        }
        self.rows.push((c.into(), fp.into(), state, vec![], vec![]));
        RefOutcome::Ok(state)
    }

    pub fn found(&mut self, m: &str, fp: &str) -> RefOutcome {
        self.new_row(m, fp, "trusted")
    }

    pub fn submit(&mut self, c: &str, fp: &str) -> RefOutcome {
        self.new_row(c, fp, "quarantined")
    }

    pub fn approve(&mut self, p: &str, c: &str) -> RefOutcome {
        let Some(i) = self.row(c) else { return RefOutcome::Err("unknown_candidate") };
        if !self.member(p) {
            return RefOutcome::Err("not_member");
        }
        if self.rows[i].2 != "quarantined" {
            return RefOutcome::Err("not_quarantined");
        }
        if self.rows[i].3.iter().chain(&self.rows[i].4).any(|x| x == p) {
            return RefOutcome::Err("duplicate_stance");
        }
        self.rows[i].3.push(p.into());
        if self.rows[i].3.len() >= self.approval_quorum {
            self.rows[i].2 = "trusted";
        }
        RefOutcome::Ok(self.rows[i].2)
    }

    pub fn flag(&mut self, p: &str, c: &str) -> RefOutcome {
        let Some(i) = self.row(c) else { return RefOutcome::Err("unknown_candidate") };
        if !self.member(p) {
            return RefOutcome::Err("not_member");
        }
        if self.rows[i].2 == "banned" {
            return RefOutcome::Notice;
        }
        if p == c {
            return RefOutcome::Err("self_stance");
        }
        if self.rows[i].3.iter().chain(&self.rows[i].4).any(|x| x == p) {
            return RefOutcome::Err("duplicate_stance");
        }
        self.rows[i].4.push(p.into());
        if self.rows[i].4.len() >= self.flag_quorum {
            self.rows[i].2 = "banned";
            let fp = self.rows[i].1.clone();
            if !self.banned_fps.contains(&fp) {
                self.banned_fps.push(fp);
            }
        }
        RefOutcome::Ok(self.rows[i].2)
    }
}

use polidoxa_core::search::TrustContext;
use polidoxa_core::{
    ActivityLedger, Coefficient, CoefficientSet, SearchIndex, SearchPage, SearchRequest,
    SocialGraph, TimeRange, TrustMode, TrustScore, UserId, PAGE_SIZE,
};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

pub const VOCAB: &[&str] = &[
    "apple", "#apple", "Apple", "pie", "phone", "news", "#news", "paris", "rennes", "stock",
    "good", "bad", "crème", "ÉTÉ", "tech!", "launch,",
];

pub struct Fixture {
    pub graph: SocialGraph,
    pub index: SearchIndex,
    pub ledger: ActivityLedger,
    pub posts: Vec<PostInput>,
    pub events: Vec<ActivityEvent>,
    pub coefficients: CoefficientSet,
    pub oracle_coefficients: OracleCoefficients,
    pub contacts: BTreeMap<String, u128>,
    pub base: Timestamp,
}

pub fn uid(s: &str) -> UserId {
    UserId::new(s).unwrap()
}

/// Searcher `me` follows `c0..c14`; `s0..s4` are strangers who also post.
pub fn random_fixture(rng: &mut impl Rng, n_posts: usize) -> Fixture {
    let base = polidoxa_core::timestamp::parse("2012-01-01T00:00:00Z").unwrap();
    let mut graph = SocialGraph::new();
    graph.add_user(uid("me"));
    let contacts: Vec<String> = (0..15).map(|i| format!("c{i}")).collect();
    let strangers: Vec<String> = (0..5).map(|i| format!("s{i}")).collect();
    let mut contact_trust = BTreeMap::new();
    for c in contacts.iter().chain(&strangers) {
        graph.add_user(uid(c));
    }
    let tie_values = [5_000u32, 5_500, 4_000, 10_000, 0];
    for c in &contacts {
        graph.follow(&uid("me"), &uid(c)).unwrap();
        let t = if rng.random_bool(0.5) {
            *tie_values.choose(rng).unwrap()
        } else {
            rng.random_range(0..=10_000)
        };
        graph
            .set_static_trust(&uid("me"), &uid(c), TrustScore::from_hundredths(t).unwrap())
            .unwrap();
        contact_trust.insert(c.clone(), u128::from(t));
    }
    // strangers follow each other so the graph is not trivially a star
    graph.follow(&uid("s0"), &uid("s1")).unwrap();

    let authors: Vec<&String> = contacts.iter().chain(&strangers).collect();
    let mut index = SearchIndex::default();
    let mut posts = Vec::new();
    for i in 0..n_posts {
        let words = rng.random_range(1..=8);
        let text: Vec<&str> = (0..words).map(|_| *VOCAB.choose(rng).unwrap()).collect();
        // coarse timestamps so equal created_at values occur
        let at = base + Duration::hours(rng.random_range(0..24 * 700) / 6 * 6);
        let p = PostInput {
            post_id: format!("p{:05}", (i * 7919) % 100_000),
            author: uid(authors.choose(rng).unwrap()),
            text: text.join(" "),
            created_at: at,
        };
        index.index_post(&graph, p.clone()).unwrap();
        posts.push(p);
    }

    let mut ledger = ActivityLedger::new();
    let mut events = Vec::new();
    let kinds = [
        EventKind::Favorite,
        EventKind::Retweet,
        EventKind::Mention,
        EventKind::FridayFollow,
        EventKind::Like,
        EventKind::Share,
    ];
    for _ in 0..400 {
        let e = ActivityEvent {
            actor: uid("me"),
            contact: uid(contacts.choose(rng).unwrap()),
            kind: *kinds.choose(rng).unwrap(),
            post_id: None,
            at: base + Duration::days(rng.random_range(0..1_100)),
        };
        ledger.record(&graph, e.clone()).unwrap();
        events.push(e);
    }

    let mut raw = [0u64; 5];
    for r in &mut raw {
        *r = if rng.random_bool(0.2) { 0 } else { rng.random_range(0..=20_000) };
    }
    let coefficients = CoefficientSet {
        c_favorites: Coefficient::from_ten_thousandths(raw[0]),
        c_retweets: Coefficient::from_ten_thousandths(raw[1]),
        c_mentions: Coefficient::from_ten_thousandths(raw[2]),
        c_fridayfollows: Coefficient::from_ten_thousandths(raw[3]),
        c_results: Coefficient::from_ten_thousandths(raw[4]),
    };
    let r = |v: u64| Ratio::new(u128::from(v), 10_000);
    let oracle_coefficients = OracleCoefficients {
        favorites: r(raw[0]),
        retweets: r(raw[1]),
        mentions: r(raw[2]),
        fridayfollows: r(raw[3]),
        results: r(raw[4]),
    };
    Fixture {
        graph,
        index,
        ledger,
        posts,
        events,
        coefficients,
        oracle_coefficients,
        contacts: contact_trust,
        base,
    }
}

pub fn random_query(rng: &mut impl Rng, fx: &Fixture) -> SearchRequest {
    let words = rng.random_range(1..=2);
    let query: Vec<&str> = (0..words).map(|_| *VOCAB.choose(rng).unwrap()).collect();
    let mut time_range = TimeRange::default();
    if rng.random_bool(0.3) {
        let a = fx.base + Duration::days(rng.random_range(0..700));
        let b = a + Duration::days(rng.random_range(0..400));
        time_range = TimeRange {
            from: rng.random_bool(0.8).then_some(a),
            to: rng.random_bool(0.8).then_some(b),
        };
    }
    let friends = rng.random_bool(0.25).then(|| {
        let mut names: Vec<&String> = fx.contacts.keys().collect();
        names.shuffle(rng);
        let k = rng.random_range(1..=5);
        names.into_iter().take(k).map(|n| uid(n)).collect()
    });
    SearchRequest {
        searcher: uid("me"),
        query: query.join(" "),
        mode: if rng.random_bool(0.5) { TrustMode::Dynamic } else { TrustMode::Static },
        time_range,
        friends,
        page: 1,
        as_of: fx.base + Duration::days(rng.random_range(0..1_200)),
    }
}

pub fn oracle_for(fx: &Fixture, req: &SearchRequest) -> Vec<(String, u128)> {
    let world = OracleWorld {
        contacts: fx.contacts.clone(),
        posts: &fx.posts,
        events: &fx.events,
        coefficients: fx.oracle_coefficients,
    };
    oracle_search(
        &world,
        &OracleQuery {
            searcher: req.searcher.as_str(),
            query: &req.query,
            dynamic: req.mode == TrustMode::Dynamic,
            from: req.time_range.from,
            to: req.time_range.to,
            friends: req.friends.as_ref().map(|f| f.iter().map(|u| u.to_string()).collect()),
            as_of: req.as_of,
        },
    )
}

/// Walks every page of `req`, checking page shape, and returns the
/// concatenated results plus the reported total. Errors describe the first
/// structural problem found.
pub fn collect_pages(fx: &Fixture, req: &SearchRequest) -> Result<(usize, Vec<(String, u128)>), String> {
    let ctx = TrustContext {
        graph: &fx.graph,
        ledger: &fx.ledger,
        coefficients: fx.coefficients,
    };
    let mut all = Vec::new();
    let mut page_no = 1;
    let mut total = None;
    loop {
        let mut r = req.clone();
        r.page = page_no;
        let page: SearchPage = fx.index.search(ctx, &r).map_err(|e| e.to_string())?;
        if *total.get_or_insert(page.total) != page.total {
            return Err(format!("total changed on page {page_no}"));
        }
        if page.page != page_no {
            return Err(format!("page echo {} != {page_no}", page.page));
        }
        for (i, res) in page.results.iter().enumerate() {
            if res.rank != (page_no - 1) * PAGE_SIZE + i + 1 {
                return Err(format!("bad rank {} on page {page_no}", res.rank));
            }
        }
        let n = page.results.len();
        all.extend(page.results.into_iter().map(|r| (r.post_id, u128::from(r.trust.hundredths()))));
        if n < PAGE_SIZE {
            break;
        }
        page_no += 1;
    }
    let total = total.unwrap_or(0);
    if all.len() != total {
        return Err(format!("pages hold {} results, total says {total}", all.len()));
    }
    Ok((total, all))
}
