mod common;

use std::fs;
use std::path::Path;
use std::sync::Arc;
use std::thread;

use common::*;
use polidoxa_service::store::ALL_FILES;
use polidoxa_service::{CandidateRequest, ErrorKind, LoginRequest, RegisterRequest, SearchQuery, Service, TrustQuery, ValidateRequest};

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    ALL_FILES
        .iter()
        .map(|f| (f.to_string(), fs::read(dir.join(f)).unwrap()))
        .collect()
}

fn observations(svc: &Service) -> Vec<String> {
    let me = svc.local_caller("me").unwrap();
    let mut out = Vec::new();
    for mode in ["static", "dynamic"] {
        let q = SearchQuery {
            q: Some("apple".into()),
            mode: Some(mode.into()),
            as_of: Some(AS_OF.into()),
            ..SearchQuery::default()
        };
        out.push(serde_json::to_string(&svc.search(&me, q).unwrap()).unwrap());
    }
    for contact in ["ouest-france", "TechCrunch", "lemonde", "engadget"] {
        out.push(serde_json::to_string(&svc.get_trust(&me, contact, TrustQuery::default()).unwrap()).unwrap());
    }
    out
}

fn busy_service(dir: &Path) -> Arc<Service> {
    let svc = open(Some(dir), clock());
    load_inversion(&svc);
    let root = admin(&svc);
    for founder in ["bob", "carol"] {
        svc.quarantine_found(
            &root,
            CandidateRequest {
                candidate: founder.into(),
                ..CandidateRequest::default()
            },
        )
        .unwrap();
    }
    let pending = svc
        .register(RegisterRequest {
            handle: "alice".into(),
            credential: "pw".into(),
            email: "alice@x.org".into(),
            ..RegisterRequest::default()
        })
        .unwrap();
    svc.validate(ValidateRequest {
        token: pending.validation_token,
    })
    .unwrap();
    svc.register(RegisterRequest {
        handle: "zed".into(),
        credential: "pw".into(),
        ..RegisterRequest::default()
    })
    .unwrap();
    for peer in ["root", "bob"] {
        svc.quarantine_approve(&svc.local_caller(peer).unwrap(), "alice").unwrap();
    }
    svc.quarantine_flag(&svc.local_caller("carol").unwrap(), "alice").unwrap();
    svc
}

#[test]
fn restart_restores_every_store() {
    let data = tempfile::tempdir().unwrap();
    let out_a = tempfile::tempdir().unwrap();
    let before = {
        let svc = busy_service(data.path());
        svc.export_to(out_a.path()).unwrap();
        observations(&svc)
    };
    let exported_a = read_all(out_a.path());
    // the live data directory already holds exactly the export
    assert_eq!(read_all(data.path()), exported_a);

    let svc = open(Some(data.path()), clock());
    assert_eq!(observations(&svc), before);
    let out_b = tempfile::tempdir().unwrap();
    svc.export_to(out_b.path()).unwrap();
    assert_eq!(read_all(out_b.path()), exported_a);

    // an export is itself a data directory
    let from_export = open(Some(out_a.path()), clock());
    assert_eq!(observations(&from_export), before);

    // accounts survive, sessions do not
    let session = svc
        .login(LoginRequest {
            handle: "alice".into(),
            credential: "pw".into(),
        })
        .unwrap();
    assert_eq!(session.user.as_str(), "alice");
    let list = svc.quarantine_list(&svc.local_caller("bob").unwrap()).unwrap();
    let alice = list.records.iter().find(|r| r.candidate.as_str() == "alice").unwrap();
    assert_eq!((alice.approvals.len(), alice.flags.len()), (2, 1));
}

#[test]
fn fresh_directory_bootstraps_once() {
    let data = tempfile::tempdir().unwrap();
    {
        let svc = open(Some(data.path()), clock());
        assert_eq!(admin(&svc).role, polidoxa_core::Role::Admin);
    }
    let accounts = fs::read(data.path().join("accounts.json")).unwrap();
    let log = fs::read(data.path().join("admission.jsonl")).unwrap();
    open(Some(data.path()), clock());
    assert_eq!(fs::read(data.path().join("accounts.json")).unwrap(), accounts);
    assert_eq!(fs::read(data.path().join("admission.jsonl")).unwrap(), log);
}

#[test]
fn corrupt_files_refuse_to_open() {
    let data = tempfile::tempdir().unwrap();
    busy_service(data.path());
    let posts = data.path().join("posts.jsonl");
    let mut body = fs::read_to_string(&posts).unwrap();
    body.push_str("{broken\n");
    fs::write(&posts, body).unwrap();
    let err = Service::open(config(Some(data.path())), clock()).err().unwrap();
    assert_eq!(err.kind, ErrorKind::Internal);
    assert!(err.message.starts_with("posts.jsonl: line 10"), "{}", err.message);
}

#[test]
fn concurrent_readers_and_writers() {
    let svc = open(None, clock());
    load_inversion(&svc);
    let before = observations(&svc);
    let root = admin(&svc);
    let writers: Vec<_> = (0..4)
        .map(|w| {
            let svc = svc.clone();
            let root = root.clone();
            thread::spawn(move || {
                for i in 0..50 {
                    let line = format!(
                        "{{\"post_id\":\"w{w}-{i}\",\"author\":\"lemonde\",\"text\":\"banana {i}\",\"created_at\":\"2012-05-01T00:00:00Z\"}}\n"
                    );
                    let r = svc.ingest_posts(&root, &line).unwrap();
                    assert_eq!(r.accepted, 1);
                }
            })
        })
        .collect();
    let readers: Vec<_> = (0..4)
        .map(|_| {
            let svc = svc.clone();
            let before = before.clone();
            thread::spawn(move || {
                for _ in 0..50 {
                    // banana posts never match `apple`
                    assert_eq!(observations(&svc), before);
                }
            })
        })
        .collect();
    for t in writers.into_iter().chain(readers) {
        t.join().unwrap();
    }
    let me = svc.local_caller("me").unwrap();
    let page = svc
        .search(
            &me,
            SearchQuery {
                q: Some("banana".into()),
                ..SearchQuery::default()
            },
        )
        .unwrap();
    assert_eq!(page.total, 200);
}
