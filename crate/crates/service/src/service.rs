use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::Path;
use std::sync::Arc;

use parking_lot::RwLock;
use polidoxa_core::quarantine::op_line;
use polidoxa_core::search::post_line;
use polidoxa_core::ledger::event_line;
use polidoxa_core::{
    timestamp, ActivityLedger, AdmissionState, CoefficientSet, CoefficientStore, DecayMode,
    Fingerprint, ForecastReport, Holon, IdentityAttributes, IngestReport, Lexicon, PheromoneTable,
    QuarantineRecord, Role, SearchIndex, SearchPage, SearchRequest, SocialGraph, StanceOutcome,
    TimeRange, Timestamp, Topic, TrustContext, TrustMode, TrustScore, UserId,
};

use crate::accounts::{random_token, Account, AccountBook, PendingRegistration, Session};
use crate::api::*;
use crate::clock::Clock;
use crate::config::ServiceConfig;
use crate::error::ApiError;
use crate::store::{self, DataDir};

/// The user an operation runs on behalf of.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Caller {
    pub user: UserId,
    pub role: Role,
}

#[derive(Debug, Default)]
struct State {
    graph: SocialGraph,
    ledger: ActivityLedger,
    index: SearchIndex,
    coefficients: CoefficientStore,
    holon: Holon,
    book: AccountBook,
    sessions: HashMap<String, Session>,
}

pub struct Service {
    config: ServiceConfig,
    lexicon: Lexicon,
    clock: Arc<dyn Clock>,
    dir: Option<DataDir>,
    state: RwLock<State>,
}

fn user_id(raw: &str) -> Result<UserId, ApiError> {
    UserId::new(raw.trim()).map_err(ApiError::from)
}

fn parse_time(field: &str, raw: &str) -> Result<Timestamp, ApiError> {
    timestamp::parse(raw).map_err(|e| ApiError::bad_request(format!("{field}: {e}")))
}

fn identity(handle: &UserId, contact_handle: Option<String>, email: String, external_id: String) -> Result<IdentityAttributes, ApiError> {
    let email = email.trim().to_string();
    if !email.is_empty() {
        let ok = email
            .split_once('@')
            .is_some_and(|(l, d)| !l.is_empty() && !d.is_empty() && !d.contains('@'));
        if !ok {
            return Err(ApiError::bad_request(format!("malformed email `{email}`")));
        }
    }
    Ok(IdentityAttributes {
        contact_handle: contact_handle.unwrap_or_else(|| handle.to_string()),
        email,
        external_id,
    })
}

fn corrupt(file: &str, message: impl std::fmt::Display) -> ApiError {
    ApiError::internal(format!("{file}: {message}"))
}

impl Service {
    /// Opens the service, replaying the data directory when one is
    /// configured.
    pub fn open(config: ServiceConfig, clock: Arc<dyn Clock>) -> Result<Self, ApiError> {
        PheromoneTable::new(config.rho, config.deposit)?;
        let lexicon = match &config.lexicon {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| ApiError::bad_request(format!("lexicon {}: {e}", path.display())))?;
                Lexicon::parse_tsv(&text)?
            }
            None => Lexicon::builtin(),
        };
        let dir = config.data_dir.as_ref().map(DataDir::open).transpose()?;
        let mut state = State {
            index: SearchIndex::new(config.max_len),
            holon: Holon::new(config.quarantine),
            ..State::default()
        };
        if let Some(dir) = &dir {
            load(dir, &mut state, &config)?;
        }
        let svc = Service {
            config,
            lexicon,
            clock,
            dir,
            state: RwLock::new(state),
        };
        svc.bootstrap()?;
        Ok(svc)
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    fn now(&self) -> Timestamp {
        self.clock.now()
    }

    fn bootstrap(&self) -> Result<(), ApiError> {
        let Some(admin) = &self.config.bootstrap_admin else {
            return Ok(());
        };
        let mut st = self.state.write();
        if !st.book.accounts.is_empty() {
            return Ok(());
        }
        let now = self.now();
        let handle = user_id(&admin.handle)?;
        let attrs = identity(&handle, None, String::new(), String::new())?;
        let fp = Fingerprint::of(&attrs);
        let mut account = Account::new(handle.clone(), Role::Admin, &admin.credential, attrs, now);
        account.active = true;
        st.book.accounts.insert(handle.clone(), account);
        st.graph.add_user(handle.clone());
        let before = st.holon.log().len();
        if st.holon.record(handle.as_str()).is_none() {
            st.holon.found(handle, fp, now)?;
        }
        self.save_accounts(&st)?;
        self.save_graph(&st)?;
        self.append_admission(&st, before)
    }

    fn save(&self, name: &str, contents: impl FnOnce() -> String) -> Result<(), ApiError> {
        if let Some(dir) = &self.dir {
            dir.replace(name, &contents())?;
        }
        Ok(())
    }

    fn append(&self, name: &str, lines: &str) -> Result<(), ApiError> {
        if let Some(dir) = &self.dir {
            dir.append(name, lines)?;
        }
        Ok(())
    }

    fn save_accounts(&self, st: &State) -> Result<(), ApiError> {
        self.save(store::ACCOUNTS, || st.book.to_json())
    }

    fn save_graph(&self, st: &State) -> Result<(), ApiError> {
        self.save(store::GRAPH, || st.graph.export_text())
    }

    fn append_admission(&self, st: &State, from: usize) -> Result<(), ApiError> {
        let lines: String = st.holon.log()[from..].iter().map(op_line).collect();
        self.append(store::ADMISSION, &lines)
    }

    fn require_admin(caller: &Caller) -> Result<(), ApiError> {
        if caller.role == Role::Admin {
            Ok(())
        } else {
            Err(ApiError::forbidden(format!("`{}` is not an administrator", caller.user)))
        }
    }

    // accounts and sessions

    pub fn register(&self, req: RegisterRequest) -> Result<PendingRegistration, ApiError> {
        let handle = user_id(&req.handle)?;
        if req.credential.is_empty() {
            return Err(ApiError::bad_request("credential must not be empty"));
        }
        let attrs = identity(&handle, req.contact_handle, req.email, req.external_id)?;
        let now = self.now();
        let mut st = self.state.write();
        if let Some(existing) = st.book.get(handle.as_str()) {
            let live = st.book.pending_for(&handle).is_some_and(|p| p.expires_at > now);
            if existing.active || live {
                return Err(ApiError::conflict(format!("`{handle}` is already registered")));
            }
        }
        let fp = Fingerprint::of(&attrs);
        if st.holon.immunized().contains_key(&fp) {
            return Err(ApiError::forbidden("this identity is immunized against re-entry"));
        }
        st.book.drop_pending_for(&handle);
        let pending = PendingRegistration {
            handle: handle.clone(),
            validation_token: random_token(),
            expires_at: now + self.config.registration_ttl,
        };
        st.book
            .accounts
            .insert(handle.clone(), Account::new(handle, Role::Normal, &req.credential, attrs, now));
        st.book.pending.insert(pending.validation_token.clone(), pending.clone());
        self.save_accounts(&st)?;
        Ok(pending)
    }

    /// Activates the account and opens its quarantine candidacy unless the
    /// handle already has an admission record.
    pub fn validate(&self, req: ValidateRequest) -> Result<AccountView, ApiError> {
        let now = self.now();
        let mut st = self.state.write();
        let Some(pending) = st.book.pending.remove(&req.token) else {
            return Err(ApiError::not_found("unknown validation token"));
        };
        if pending.expires_at <= now {
            self.save_accounts(&st)?;
            return Err(ApiError::bad_request("validation token expired"));
        }
        let handle = pending.handle;
        let fp = Fingerprint::of(&st.book.accounts[&handle].identity);
        let before = st.holon.log().len();
        if st.holon.record(handle.as_str()).is_none() {
            if let Err(e) = st.holon.submit_candidate(handle.clone(), fp, now) {
                self.save_accounts(&st)?;
                return Err(e.into());
            }
        }
        let account = st.book.accounts.get_mut(&handle).expect("pending accounts exist");
        account.active = true;
        let role = account.role;
        st.graph.add_user(handle.clone());
        self.save_accounts(&st)?;
        self.save_graph(&st)?;
        self.append_admission(&st, before)?;
        Ok(AccountView {
            admission: st.holon.record(handle.as_str()).map(|r| r.state),
            handle,
            role,
            active: true,
        })
    }

    pub fn login(&self, req: LoginRequest) -> Result<Session, ApiError> {
        let denied = || ApiError::unauthenticated("unknown handle or wrong credential");
        let mut st = self.state.write();
        let account = st.book.get(req.handle.trim()).ok_or_else(denied)?;
        if !account.check_credential(&req.credential) {
            return Err(denied());
        }
        if !account.active {
            return Err(ApiError::forbidden("account is not validated yet"));
        }
        let handle = account.handle.clone();
        let role = account.role;
        if st.holon.record(handle.as_str()).is_some_and(|r| r.state == AdmissionState::Banned) {
            return Err(ApiError::forbidden(format!("`{handle}` is banned")));
        }
        let session = Session {
            token: random_token(),
            user: handle,
            role,
            issued_at: self.now(),
        };
        st.sessions.insert(session.token.clone(), session.clone());
        Ok(session)
    }

    /// Resolves a bearer token.
    pub fn authenticate(&self, token: Option<&str>) -> Result<Caller, ApiError> {
        let token = token.ok_or_else(|| ApiError::unauthenticated("missing session token"))?;
        let st = self.state.read();
        let s = st
            .sessions
            .get(token)
            .ok_or_else(|| ApiError::unauthenticated("invalid session token"))?;
        Ok(Caller {
            user: s.user.clone(),
            role: s.role,
        })
    }

    /// Caller for in-process use. Any graph user may act; the role comes
    /// from their account when they have an active one.
    pub fn local_caller(&self, user: &str) -> Result<Caller, ApiError> {
        let user = user_id(user)?;
        let st = self.state.read();
        let account = st.book.get(user.as_str()).filter(|a| a.active);
        if account.is_none() && !st.graph.contains(user.as_str()) {
            return Err(ApiError::not_found(format!("unknown user `{user}`")));
        }
        if st.holon.record(user.as_str()).is_some_and(|r| r.state == AdmissionState::Banned) {
            return Err(ApiError::forbidden(format!("`{user}` is banned")));
        }
        Ok(Caller {
            role: account.map_or(Role::Normal, |a| a.role),
            user,
        })
    }

    // trust

    pub fn follow(&self, caller: &Caller, contact: &str) -> Result<TrustView, ApiError> {
        let contact = user_id(contact)?;
        let mut st = self.state.write();
        st.graph.follow(&caller.user, &contact)?;
        self.save_graph(&st)?;
        Ok(TrustView {
            value: Some(st.graph.static_trust(&caller.user, &contact)?),
            contact,
            hops: Some(1),
        })
    }

    pub fn put_trust(&self, caller: &Caller, contact: &str, body: TrustValue) -> Result<TrustView, ApiError> {
        let contact = user_id(contact)?;
        let mut st = self.state.write();
        st.graph.set_static_trust(&caller.user, &contact, body.value)?;
        self.save_graph(&st)?;
        Ok(TrustView {
            contact,
            value: Some(body.value),
            hops: Some(1),
        })
    }

    /// Static trust for a contact, decayed inferred trust beyond.
    pub fn get_trust(&self, caller: &Caller, contact: &str, query: TrustQuery) -> Result<TrustView, ApiError> {
        let contact = user_id(contact)?;
        let mode: DecayMode = match query.decay.as_deref() {
            None | Some("") => DecayMode::Linear,
            Some(raw) => raw.parse().map_err(|e: String| ApiError::bad_request(e))?,
        };
        let st = self.state.read();
        let value = st.graph.inferred_trust(&caller.user, &contact, mode)?;
        let hops = st.graph.distance(&caller.user, &contact)?;
        Ok(TrustView { contact, value, hops })
    }

    pub fn put_topic_trust(
        &self,
        caller: &Caller,
        contact: &str,
        topic: &str,
        body: TrustValue,
    ) -> Result<TopicTrustView, ApiError> {
        let contact = user_id(contact)?;
        let topic = Topic::new(topic)?;
        let mut st = self.state.write();
        st.graph.set_topic_trust(&caller.user, &contact, topic.clone(), body.value)?;
        self.save_graph(&st)?;
        Ok(TopicTrustView {
            contact,
            topic: topic.to_string(),
            value: body.value,
        })
    }

    pub fn get_topic_trust(&self, caller: &Caller, contact: &str, topic: &str) -> Result<TopicTrustView, ApiError> {
        let contact = user_id(contact)?;
        let topic = Topic::new(topic)?;
        let st = self.state.read();
        let value = st.graph.topic_trust(&caller.user, &contact, &topic)?;
        Ok(TopicTrustView {
            contact,
            topic: topic.to_string(),
            value,
        })
    }

    /// `threshold` defaults to 50.00.
    pub fn experts(&self, caller: &Caller, query: ExpertsQuery) -> Result<ExpertsView, ApiError> {
        let topic = query
            .topic
            .as_deref()
            .ok_or_else(|| ApiError::bad_request("missing topic"))?;
        let topic = Topic::new(topic)?;
        let threshold = match query.threshold.as_deref() {
            None | Some("") => TrustScore::DEFAULT,
            Some(raw) => raw.parse()?,
        };
        let st = self.state.read();
        let experts = st.graph.experts(&caller.user, &topic, threshold)?;
        Ok(ExpertsView {
            topic: topic.to_string(),
            threshold,
            experts: experts.into_iter().collect(),
        })
    }

    // ingest

    pub fn ingest_posts(&self, caller: &Caller, body: &str) -> Result<IngestReport, ApiError> {
        Self::require_admin(caller)?;
        let mut guard = self.state.write();
        let st = &mut *guard;
        let mut lines = String::new();
        let report = st
            .index
            .ingest_jsonl(&st.graph, body, |p| lines.push_str(&post_line(&p.to_input())));
        self.append(store::POSTS, &lines)?;
        Ok(report)
    }

    pub fn ingest_events(&self, caller: &Caller, body: &str) -> Result<IngestReport, ApiError> {
        Self::require_admin(caller)?;
        let mut guard = self.state.write();
        let st = &mut *guard;
        let mut lines = String::new();
        let report = st
            .ledger
            .ingest_jsonl(&st.graph, body, |e| lines.push_str(&event_line(e)));
        self.append(store::EVENTS, &lines)?;
        Ok(report)
    }

    /// Applies graph records all-or-nothing.
    pub fn ingest_graph(&self, caller: &Caller, body: &str) -> Result<GraphImportReport, ApiError> {
        Self::require_admin(caller)?;
        let mut st = self.state.write();
        let mut graph = st.graph.clone();
        graph.apply_text(body)?;
        st.graph = graph;
        self.save_graph(&st)?;
        Ok(GraphImportReport {
            users: st.graph.user_count(),
            follows: st.graph.follow_count(),
        })
    }

    // search

    pub fn search(&self, caller: &Caller, query: SearchQuery) -> Result<SearchPage, ApiError> {
        let text = query.q.filter(|q| !q.trim().is_empty()).ok_or_else(|| ApiError::bad_request("missing query"))?;
        let mode = match query.mode.as_deref() {
            None | Some("") => TrustMode::Static,
            Some(raw) => raw.parse().map_err(|e: String| ApiError::bad_request(e))?,
        };
        let bound = |field: &str, raw: Option<String>| {
            raw.filter(|s| !s.is_empty()).map(|s| parse_time(field, &s)).transpose()
        };
        let time_range = TimeRange {
            from: bound("from", query.from)?,
            to: bound("to", query.to)?,
        };
        let friends = match query.friends.as_deref().map(str::trim) {
            None | Some("") => None,
            Some(list) => Some(
                list.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(user_id)
                    .collect::<Result<BTreeSet<_>, _>>()?,
            ),
        };
        let page = match query.page.as_deref() {
            None | Some("") => 1,
            Some(raw) => raw
                .trim()
                .parse()
                .map_err(|_| ApiError::bad_request(format!("malformed page `{raw}`")))?,
        };
        let as_of = match bound("as_of", query.as_of)? {
            Some(t) => t,
            None => self.now(),
        };
        let req = SearchRequest {
            searcher: caller.user.clone(),
            query: text,
            mode,
            time_range,
            friends,
            page,
            as_of,
        };
        let st = self.state.read();
        let ctx = TrustContext {
            graph: &st.graph,
            ledger: &st.ledger,
            coefficients: st.coefficients.current(),
        };
        Ok(st.index.search(ctx, &req)?)
    }

    // coefficients

    pub fn get_coefficients(&self, caller: &Caller) -> Result<CoefficientSet, ApiError> {
        Self::require_admin(caller)?;
        Ok(self.state.read().coefficients.current())
    }

    /// Updates the named coefficients and leaves the rest unchanged.
    pub fn put_coefficients(&self, caller: &Caller, patch: CoefficientPatch) -> Result<CoefficientSet, ApiError> {
        Self::require_admin(caller)?;
        let mut st = self.state.write();
        let mut set = st.coefficients.current();
        for (name, value) in patch {
            let raw = match value {
                serde_json::Value::String(s) => s,
                serde_json::Value::Number(n) => n.to_string(),
                other => return Err(ApiError::bad_request(format!("`{name}`: expected a decimal, got {other}"))),
            };
            set.set(&name, raw.trim().parse()?)?;
        }
        st.coefficients.set(&caller.user, caller.role, set)?;
        self.save(store::COEFFICIENTS, || set.to_config())?;
        Ok(set)
    }

    // quarantine

    /// Seeds a founding member without a vote. Administrators only.
    pub fn quarantine_found(&self, caller: &Caller, req: CandidateRequest) -> Result<QuarantineRecord, ApiError> {
        Self::require_admin(caller)?;
        let member = user_id(&req.candidate)?;
        let fp = Fingerprint::of(&identity(&member, req.contact_handle, req.email, req.external_id)?);
        let now = self.now();
        let mut st = self.state.write();
        let before = st.holon.log().len();
        let record = st.holon.found(member.clone(), fp, now)?.clone();
        let added = st.graph.add_user(member);
        self.append_admission(&st, before)?;
        if added {
            self.save_graph(&st)?;
        }
        Ok(record)
    }

    /// A trusted member puts a candidate into quarantine.
    pub fn quarantine_submit(&self, caller: &Caller, req: CandidateRequest) -> Result<QuarantineRecord, ApiError> {
        let candidate = user_id(&req.candidate)?;
        let fp = Fingerprint::of(&identity(&candidate, req.contact_handle, req.email, req.external_id)?);
        let now = self.now();
        let mut st = self.state.write();
        if !st.holon.is_member(caller.user.as_str()) {
            return Err(ApiError::forbidden(format!("`{}` is not a trusted member", caller.user)));
        }
        let before = st.holon.log().len();
        let record = st.holon.submit_candidate(candidate, fp, now)?.clone();
        self.append_admission(&st, before)?;
        Ok(record)
    }

    pub fn quarantine_approve(&self, caller: &Caller, candidate: &str) -> Result<StanceOutcome, ApiError> {
        let candidate = user_id(candidate)?;
        let now = self.now();
        let mut st = self.state.write();
        let before = st.holon.log().len();
        let outcome = st.holon.approve(&caller.user, &candidate, now)?;
        self.append_admission(&st, before)?;
        Ok(outcome)
    }

    /// Reaching the flag quorum bans the candidate and ends their sessions.
    pub fn quarantine_flag(&self, caller: &Caller, candidate: &str) -> Result<StanceOutcome, ApiError> {
        let candidate = user_id(candidate)?;
        let now = self.now();
        let mut st = self.state.write();
        let before = st.holon.log().len();
        let outcome = st.holon.flag(&caller.user, &candidate, now)?;
        if outcome.state == AdmissionState::Banned {
            st.sessions.retain(|_, s| s.user != candidate);
        }
        self.append_admission(&st, before)?;
        Ok(outcome)
    }

    pub fn quarantine_list(&self, _caller: &Caller) -> Result<QuarantineView, ApiError> {
        let st = self.state.read();
        Ok(QuarantineView {
            records: st.holon.records().cloned().collect(),
            immunized: st
                .holon
                .immunized()
                .iter()
                .map(|(fingerprint, since)| ImmunizedEntry {
                    fingerprint: fingerprint.clone(),
                    since: *since,
                })
                .collect(),
        })
    }

    // opinion

    /// Runs the forecaster over every post containing `stream`, oldest
    /// first.
    pub fn forecast(&self, _caller: &Caller, stream: &str) -> Result<ForecastReport, ApiError> {
        let table = PheromoneTable::new(self.config.rho, self.config.deposit)?;
        let st = self.state.read();
        let posts = st.index.stream(stream)?;
        Ok(ForecastReport::run(
            stream,
            posts.iter().map(|p| p.text.as_str()),
            &self.lexicon,
            table,
        ))
    }

    // persistence

    /// Writes a full snapshot of every store into `dir`, in the data
    /// directory layout. Opening a service on `dir` restores this state.
    pub fn export_to(&self, dir: &Path) -> Result<ExportReport, ApiError> {
        let out = DataDir::open(dir)?;
        let st = self.state.read();
        out.replace(store::ACCOUNTS, &st.book.to_json())?;
        out.replace(store::GRAPH, &st.graph.export_text())?;
        out.replace(store::COEFFICIENTS, &st.coefficients.current().to_config())?;
        out.replace(store::POSTS, &st.index.export_jsonl())?;
        out.replace(store::EVENTS, &st.ledger.export_jsonl())?;
        out.replace(store::ADMISSION, &st.holon.export_log())?;
        Ok(ExportReport {
            dir: dir.display().to_string(),
            files: store::ALL_FILES.iter().map(|f| f.to_string()).collect(),
            users: st.graph.user_count(),
            posts: st.index.len(),
            events: st.ledger.len(),
            admission_ops: st.holon.log().len(),
        })
    }
}

fn load(dir: &DataDir, st: &mut State, config: &ServiceConfig) -> Result<(), ApiError> {
    if let Some(text) = dir.read(store::ACCOUNTS)? {
        st.book = serde_json::from_str(&text).map_err(|e| corrupt(store::ACCOUNTS, e))?;
    }
    if let Some(text) = dir.read(store::GRAPH)? {
        st.graph = SocialGraph::import_text(&text).map_err(|e| corrupt(store::GRAPH, e))?;
    }
    if let Some(text) = dir.read(store::COEFFICIENTS)? {
        let set = CoefficientSet::from_config(&text).map_err(|e| corrupt(store::COEFFICIENTS, e))?;
        st.coefficients = CoefficientStore::new(set);
    }
    if let Some(text) = dir.read(store::POSTS)? {
        let report = st.index.ingest_jsonl(&st.graph, &text, |_| {});
        if let Some(r) = report.rejected.first() {
            return Err(corrupt(store::POSTS, format!("line {}: {}", r.line, r.error)));
        }
    }
    if let Some(text) = dir.read(store::EVENTS)? {
        let report = st.ledger.ingest_jsonl(&st.graph, &text, |_| {});
        if let Some(r) = report.rejected.first() {
            return Err(corrupt(store::EVENTS, format!("line {}: {}", r.line, r.error)));
        }
    }
    if let Some(text) = dir.read(store::ADMISSION)? {
        st.holon = Holon::replay(config.quarantine, &text).map_err(|e| corrupt(store::ADMISSION, e))?;
    }
    Ok(())
}
