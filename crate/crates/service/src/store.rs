//! On-disk layout of a data directory.
//!
//! | file | contents | written |
//! |---|---|---|
//! | `accounts.json` | accounts and pending registrations | snapshot |
//! | `graph.txt` | users, follows, topic trust | snapshot |
//! | `coefficients.conf` | dynamic-trust coefficients | snapshot |
//! | `posts.jsonl` | indexed posts in ingest order | append |
//! | `events.jsonl` | activity ledger in ingest order | append |
//! | `admission.jsonl` | quarantine operations | append |
//!
//! Snapshots are replaced atomically through a temporary file and rename.

use std::fs::{self, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

pub const ACCOUNTS: &str = "accounts.json";
pub const GRAPH: &str = "graph.txt";
pub const COEFFICIENTS: &str = "coefficients.conf";
pub const POSTS: &str = "posts.jsonl";
pub const EVENTS: &str = "events.jsonl";
pub const ADMISSION: &str = "admission.jsonl";

pub const ALL_FILES: [&str; 6] = [ACCOUNTS, GRAPH, COEFFICIENTS, POSTS, EVENTS, ADMISSION];

#[derive(Debug, Clone)]
pub struct DataDir {
    root: PathBuf,
}

impl DataDir {
    pub fn open(root: impl Into<PathBuf>) -> io::Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        Ok(DataDir { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// File contents, or `None` when the file does not exist yet.
    pub fn read(&self, name: &str) -> io::Result<Option<String>> {
        match fs::read_to_string(self.path(name)) {
            Ok(s) => Ok(Some(s)),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e),
        }
    }

    pub fn replace(&self, name: &str, contents: &str) -> io::Result<()> {
        let tmp = self.path(&format!(".{name}.tmp"));
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(contents.as_bytes())?;
            f.sync_all()?;
        }
        fs::rename(&tmp, self.path(name))
    }

    pub fn append(&self, name: &str, lines: &str) -> io::Result<()> {
        if lines.is_empty() {
            return Ok(());
        }
        let mut f = OpenOptions::new().create(true).append(true).open(self.path(name))?;
        f.write_all(lines.as_bytes())?;
        f.sync_data()
    }
}
