//! The human in the loop: queries about candidate patterns, relations,
//! entities and conflicts, answered yes / no / don't know.
//!
//! Answers come from a terminal prompt, a scripted answer file, the HTTP
//! service (through [`OracleQueue`]), or nowhere at all.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::{Arc, Condvar, Mutex, MutexGuard};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Answer {
    Yes,
    No,
    DontKnow,
}

impl Answer {
    pub fn name(self) -> &'static str {
        match self {
            Answer::Yes => "yes",
            Answer::No => "no",
            Answer::DontKnow => "dont_know",
        }
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Answer {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().as_str() {
            "y" | "yes" => Ok(Answer::Yes),
            "n" | "no" => Ok(Answer::No),
            "d" | "?" | "dont_know" | "don't know" | "dk" => Ok(Answer::DontKnow),
            other => Err(format!("unrecognized answer {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryKind {
    Pattern,
    Relation,
    Entity,
    Conflict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryStatus {
    Pending,
    Answered,
    Expired,
}

/// A sentence shown with a query. `highlights` are byte ranges into `text`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextSentence {
    pub doc_id: String,
    pub sentence_index: usize,
    pub text: String,
    pub highlights: Vec<(usize, usize)>,
}

pub const MAX_CONTEXT: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleQuery {
    pub id: String,
    pub kind: QueryKind,
    pub relation_name: String,
    /// Stable key of the candidate, as used in answer files.
    pub candidate_key: String,
    pub payload: String,
    /// For conflicts, the two relation names in contention.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub competing: Vec<String>,
    pub context: Vec<ContextSentence>,
    /// Score before any override.
    pub score: f64,
    pub status: QueryStatus,
    pub answer: Option<Answer>,
    pub iteration: usize,
}

impl OracleQuery {
    pub fn new(
        id: impl Into<String>,
        kind: QueryKind,
        relation_name: impl Into<String>,
        candidate_key: impl Into<String>,
        payload: impl Into<String>,
        iteration: usize,
    ) -> Self {
        OracleQuery {
            id: id.into(),
            kind,
            relation_name: relation_name.into(),
            candidate_key: candidate_key.into(),
            payload: payload.into(),
            competing: Vec::new(),
            context: Vec::new(),
            score: 0.0,
            status: QueryStatus::Pending,
            answer: None,
            iteration,
        }
    }

    fn kind_label(&self) -> &'static str {
        match self.kind {
            QueryKind::Pattern => "pattern",
            QueryKind::Relation => "relation",
            QueryKind::Entity => "entity",
            QueryKind::Conflict => "conflict",
        }
    }
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("duplicate query id {0:?}")]
    DuplicateId(String),
    #[error("no query with id {0:?}")]
    UnknownId(String),
    #[error("query {0:?} is not pending")]
    NotPending(String),
    #[error("{path}: line {line}, column {column}: {message}")]
    MalformedAnswers { path: PathBuf, line: usize, column: usize, message: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("terminal: {0}")]
    Terminal(std::io::Error),
}

/// How a run gets its answers.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum OracleMode {
    #[default]
    Auto,
    Interactive,
    Scripted(PathBuf),
    Serve,
}

impl FromStr for OracleMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" | "auto_dont_know" => Ok(OracleMode::Auto),
            "interactive" => Ok(OracleMode::Interactive),
            "serve" | "service" => Ok(OracleMode::Serve),
            _ => match s.strip_prefix("scripted:") {
                Some(path) if !path.is_empty() => Ok(OracleMode::Scripted(PathBuf::from(path))),
                _ => Err(format!("unknown oracle mode {s:?}; expected auto, interactive, serve or scripted:PATH")),
            },
        }
    }
}

impl fmt::Display for OracleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleMode::Auto => f.write_str("auto"),
            OracleMode::Interactive => f.write_str("interactive"),
            OracleMode::Scripted(p) => write!(f, "scripted:{}", p.display()),
            OracleMode::Serve => f.write_str("serve"),
        }
    }
}

/// Candidate key to answer. The key `*` supplies a default for every
/// candidate not listed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AnswerBook {
    pub answers: BTreeMap<String, Answer>,
}

pub const DEFAULT_ANSWER_KEY: &str = "*";

impl AnswerBook {
    pub fn parse(path: &Path, content: &str) -> Result<Self, OracleError> {
        serde_json::from_str(content).map_err(|e| OracleError::MalformedAnswers {
            path: path.to_path_buf(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, OracleError> {
        let content =
            std::fs::read_to_string(path).map_err(|source| OracleError::Io { path: path.to_path_buf(), source })?;
        Self::parse(path, &content)
    }

    pub fn get(&self, key: &str) -> Option<Answer> {
        self.answers.get(key).or_else(|| self.answers.get(DEFAULT_ANSWER_KEY)).copied()
    }
}

/// Progress of one relation type, as published to the service.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RelationProgress {
    pub iteration: usize,
    pub known_relations: usize,
    pub known_patterns: usize,
    pub accepted_relations: Vec<String>,
    pub accepted_patterns: Vec<String>,
    pub queried: Vec<String>,
    /// Latest scores of the current candidates, after overrides.
    pub scores: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunSnapshot {
    pub current_relation: Option<String>,
    pub finished: bool,
    pub relations: BTreeMap<String, RelationProgress>,
}

/// A source of answers.
pub trait Oracle {
    /// Answers a batch of queries, keyed by query id. Queries left out are
    /// treated as don't know.
    fn resolve(&mut self, queries: &[OracleQuery]) -> Result<BTreeMap<String, Answer>, OracleError>;

    /// An answer known without asking, e.g. from an answer file.
    fn prior(&self, _candidate_key: &str) -> Option<Answer> {
        None
    }

    /// Progress report; ignored by default.
    fn publish(&mut self, _snapshot: &RunSnapshot) {}
}

/// Answers nothing, so every score stays as computed.
#[derive(Debug, Clone, Copy, Default)]
pub struct AutoDontKnow;

impl Oracle for AutoDontKnow {
    fn resolve(&mut self, _queries: &[OracleQuery]) -> Result<BTreeMap<String, Answer>, OracleError> {
        Ok(BTreeMap::new())
    }
}

#[derive(Debug, Clone, Default)]
pub struct Scripted {
    pub book: AnswerBook,
}

impl Scripted {
    pub fn new(book: AnswerBook) -> Self {
        Scripted { book }
    }
}

impl Oracle for Scripted {
    fn resolve(&mut self, queries: &[OracleQuery]) -> Result<BTreeMap<String, Answer>, OracleError> {
        Ok(queries.iter().filter_map(|q| Some((q.id.clone(), self.book.get(&q.candidate_key)?))).collect())
    }

    fn prior(&self, candidate_key: &str) -> Option<Answer> {
        self.book.get(candidate_key)
    }
}

/// Prompts for each query on a terminal-like pair of streams. End of input
/// answers don't know for the remaining queries.
pub struct Interactive<R, W> {
    input: R,
    output: W,
}

impl<R: BufRead, W: Write> Interactive<R, W> {
    pub fn new(input: R, output: W) -> Self {
        Interactive { input, output }
    }

    fn ask(&mut self, q: &OracleQuery) -> std::io::Result<Option<Answer>> {
        let out = &mut self.output;
        writeln!(out, "[{} {} / iteration {}] {}", q.kind_label(), q.relation_name, q.iteration, q.payload)?;
        if !q.competing.is_empty() {
            writeln!(out, "  choices: {}", q.competing.join(" vs "))?;
        }
        for c in &q.context {
            writeln!(out, "  > {}", render_highlighted(&c.text, &c.highlights))?;
        }
        loop {
            write!(out, "  correct? [y]es / [n]o / [d]on't know: ")?;
            out.flush()?;
            let mut line = String::new();
            if self.input.read_line(&mut line)? == 0 {
                writeln!(out)?;
                return Ok(None);
            }
            match line.parse::<Answer>() {
                Ok(a) => return Ok(Some(a)),
                Err(e) => writeln!(out, "  {e}")?,
            }
        }
    }
}

/// Wraps highlighted byte ranges in `[[` `]]`.
pub fn render_highlighted(text: &str, highlights: &[(usize, usize)]) -> String {
    let mut spans: Vec<(usize, usize)> =
        highlights.iter().copied().filter(|&(a, b)| a < b && b <= text.len() && text.is_char_boundary(a) && text.is_char_boundary(b)).collect();
    spans.sort();
    let mut out = String::with_capacity(text.len() + 8 * spans.len());
    let mut at = 0;
    for (a, b) in spans {
        if a < at {
            continue;
        }
        out.push_str(&text[at..a]);
        out.push_str("[[");
        out.push_str(&text[a..b]);
        out.push_str("]]");
        at = b;
    }
    out.push_str(&text[at..]);
    out
}

impl<R: BufRead, W: Write> Oracle for Interactive<R, W> {
    fn resolve(&mut self, queries: &[OracleQuery]) -> Result<BTreeMap<String, Answer>, OracleError> {
        let mut answers = BTreeMap::new();
        for q in queries {
            match self.ask(q).map_err(OracleError::Terminal)? {
                Some(a) => {
                    answers.insert(q.id.clone(), a);
                }
                None => break,
            }
        }
        Ok(answers)
    }
}

#[derive(Debug, Default)]
struct QueueInner {
    queries: Vec<OracleQuery>,
    by_id: HashMap<String, usize>,
    snapshot: RunSnapshot,
}

/// The handoff point between the engine and the HTTP service. Cloning
/// shares the queue.
#[derive(Debug, Clone, Default)]
pub struct OracleQueue {
    inner: Arc<(Mutex<QueueInner>, Condvar)>,
}

impl OracleQueue {
    pub fn new() -> Self {
        Self::default()
    }

    fn lock(&self) -> MutexGuard<'_, QueueInner> {
        self.inner.0.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// Adds queries in order. Nothing is added if any id is already taken.
    pub fn enqueue(&self, queries: Vec<OracleQuery>) -> Result<Vec<String>, OracleError> {
        let mut inner = self.lock();
        let mut fresh = std::collections::HashSet::new();
        for q in &queries {
            if inner.by_id.contains_key(&q.id) || !fresh.insert(q.id.as_str()) {
                return Err(OracleError::DuplicateId(q.id.clone()));
            }
        }
        let mut ids = Vec::with_capacity(queries.len());
        for mut q in queries {
            q.status = QueryStatus::Pending;
            q.answer = None;
            let at = inner.queries.len();
            inner.by_id.insert(q.id.clone(), at);
            ids.push(q.id.clone());
            inner.queries.push(q);
        }
        Ok(ids)
    }

    /// Pending queries in the order they were enqueued.
    pub fn pending(&self) -> Vec<OracleQuery> {
        self.lock().queries.iter().filter(|q| q.status == QueryStatus::Pending).cloned().collect()
    }

    pub fn pending_count(&self) -> usize {
        self.lock().queries.iter().filter(|q| q.status == QueryStatus::Pending).count()
    }

    pub fn get(&self, id: &str) -> Option<OracleQuery> {
        let inner = self.lock();
        inner.by_id.get(id).map(|&i| inner.queries[i].clone())
    }

    pub fn answer(&self, id: &str, answer: Answer) -> Result<(), OracleError> {
        let mut inner = self.lock();
        let &i = inner.by_id.get(id).ok_or_else(|| OracleError::UnknownId(id.to_string()))?;
        let q = &mut inner.queries[i];
        if q.status != QueryStatus::Pending {
            return Err(OracleError::NotPending(id.to_string()));
        }
        q.status = QueryStatus::Answered;
        q.answer = Some(answer);
        drop(inner);
        self.inner.1.notify_all();
        Ok(())
    }

    /// Blocks until every listed query is answered or `timeout` passes
    /// (`None` waits indefinitely). Queries still pending are expired.
    /// Returns the answers that arrived.
    pub fn wait(&self, ids: &[String], timeout: Option<Duration>) -> BTreeMap<String, Answer> {
        let deadline = timeout.map(|t| Instant::now() + t);
        let mut inner = self.lock();
        loop {
            let done = ids.iter().all(|id| {
                inner.by_id.get(id).is_none_or(|&i| inner.queries[i].status != QueryStatus::Pending)
            });
            if done {
                break;
            }
            match deadline {
                None => inner = self.inner.1.wait(inner).unwrap_or_else(|e| e.into_inner()),
                Some(d) => {
                    let now = Instant::now();
                    if now >= d {
                        break;
                    }
                    inner = self.inner.1.wait_timeout(inner, d - now).unwrap_or_else(|e| e.into_inner()).0;
                }
            }
        }
        let mut answers = BTreeMap::new();
        for id in ids {
            if let Some(&i) = inner.by_id.get(id) {
                let q = &mut inner.queries[i];
                match (q.status, q.answer) {
                    (QueryStatus::Answered, Some(a)) => {
                        answers.insert(id.clone(), a);
                    }
                    (QueryStatus::Pending, _) => q.status = QueryStatus::Expired,
                    _ => {}
                }
            }
        }
        answers
    }

    pub fn snapshot(&self) -> RunSnapshot {
        self.lock().snapshot.clone()
    }

    pub fn set_snapshot(&self, snapshot: RunSnapshot) {
        self.lock().snapshot = snapshot;
    }
}

/// Answers through an [`OracleQueue`] served to the review UI.
#[derive(Debug, Clone)]
pub struct Service {
    pub queue: OracleQueue,
    pub timeout: Option<Duration>,
}

impl Service {
    pub fn new(queue: OracleQueue, timeout: Option<Duration>) -> Self {
        Service { queue, timeout }
    }
}

impl Oracle for Service {
    fn resolve(&mut self, queries: &[OracleQuery]) -> Result<BTreeMap<String, Answer>, OracleError> {
        if queries.is_empty() {
            return Ok(BTreeMap::new());
        }
        let ids = self.queue.enqueue(queries.to_vec())?;
        Ok(self.queue.wait(&ids, self.timeout))
    }

    fn publish(&mut self, snapshot: &RunSnapshot) {
        self.queue.set_snapshot(snapshot.clone());
    }
}

impl<O: Oracle + ?Sized> Oracle for Box<O> {
    fn resolve(&mut self, queries: &[OracleQuery]) -> Result<BTreeMap<String, Answer>, OracleError> {
        (**self).resolve(queries)
    }

    fn prior(&self, candidate_key: &str) -> Option<Answer> {
        (**self).prior(candidate_key)
    }

    fn publish(&mut self, snapshot: &RunSnapshot) {
        (**self).publish(snapshot)
    }
}
