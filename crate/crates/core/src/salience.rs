//! Related-word selection: TF-IDF ranking of document words filtered by
//! the aspect's Wikipedia page extract.

use std::borrow::Borrow;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Condvar, Mutex, OnceLock, RwLock};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::corpus_io::{tokenize, DocumentRecord};
use crate::error::{Error, Result};

const STOPWORDS_EN: &str = include_str!("../data/stopwords_en.txt");

fn stopwords() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| {
        STOPWORDS_EN
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect()
    })
}

/// Membership in the built-in English stopword list (expects a normalized
/// token; typographic apostrophes are folded).
pub fn is_stopword(word: &str) -> bool {
    if word.contains('’') {
        stopwords().contains(word.replace('’', "'").as_str())
    } else {
        stopwords().contains(word)
    }
}

/// Corpus document-frequency statistics.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TfIdfModel {
    doc_count: u64,
    doc_freq: HashMap<String, u64>,
}

impl TfIdfModel {
    pub fn doc_count(&self) -> u64 {
        self.doc_count
    }

    /// Stored document frequency, `None` for out-of-vocabulary words.
    pub fn doc_freq(&self, word: &str) -> Option<u64> {
        self.doc_freq.get(word).copied()
    }

    pub fn vocab_len(&self) -> usize {
        self.doc_freq.len()
    }

    /// Frequencies in ascending word order.
    pub fn sorted_doc_freq(&self) -> BTreeMap<&str, u64> {
        self.doc_freq.iter().map(|(w, &n)| (w.as_str(), n)).collect()
    }

    /// Folds one more document's words into the statistics.
    pub fn add_document(&mut self, text: &str) {
        self.doc_count += 1;
        let mut seen = HashSet::new();
        for token in tokenize(text) {
            if is_stopword(&token) || !seen.insert(token.as_str().to_owned()) {
                continue;
            }
            *self.doc_freq.entry(token.into_string()).or_insert(0) += 1;
        }
    }

    /// `tf(w,d) * ln(N / df(w))` for each distinct non-stopword token, with
    /// raw counts for tf and df defaulting to 1 for unseen words. Sorted by
    /// score descending, then first occurrence, then word.
    pub fn score_document(&self, document: &str) -> Vec<(String, f64)> {
        let n = self.doc_count.max(1) as f64;
        let mut stats: HashMap<String, (u64, usize)> = HashMap::new();
        for (pos, token) in tokenize(document).into_iter().enumerate() {
            if is_stopword(&token) {
                continue;
            }
            stats.entry(token.into_string()).or_insert((0, pos)).0 += 1;
        }
        let mut scored: Vec<(String, f64, usize)> = stats
            .into_iter()
            .map(|(w, (tf, first))| {
                let df = self.doc_freq.get(&w).copied().unwrap_or(1).max(1) as f64;
                let score = tf as f64 * (n / df).ln();
                (w, score, first)
            })
            .collect();
        scored.sort_by(|a, b| {
            b.1.total_cmp(&a.1)
                .then_with(|| a.2.cmp(&b.2))
                .then_with(|| a.0.cmp(&b.0))
        });
        scored.into_iter().map(|(w, s, _)| (w, s)).collect()
    }
}

/// Fits document frequencies over a nonempty corpus.
pub fn fit_tfidf<I>(corpus: I) -> Result<TfIdfModel>
where
    I: IntoIterator,
    I::Item: Borrow<DocumentRecord>,
{
    let mut model = TfIdfModel::default();
    for record in corpus {
        model.add_document(&record.borrow().document);
    }
    if model.doc_count == 0 {
        return Err(Error::EmptyCorpus);
    }
    Ok(model)
}

/// A Wikipedia page extract with its normalized token set.
#[derive(Debug, Clone, PartialEq)]
pub struct WikiExtract {
    pub title: String,
    pub text: String,
    token_set: HashSet<String>,
}

impl WikiExtract {
    pub fn new(title: impl Into<String>, text: impl Into<String>) -> Self {
        let text = text.into();
        let token_set = tokenize(&text).into_iter().map(|t| t.into_string()).collect();
        WikiExtract {
            title: title.into(),
            text,
            token_set,
        }
    }

    pub fn contains(&self, word: &str) -> bool {
        self.token_set.contains(word)
    }

    pub fn token_set(&self) -> &HashSet<String> {
        &self.token_set
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct StoreLine {
    title: String,
    text: String,
}

/// Case-insensitive title key.
pub fn title_key(title: &str) -> String {
    title
        .replace('_', " ")
        .split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

pub trait WikiSource: Send + Sync {
    /// `Ok(None)` means no page exists; `Err` means the source could not
    /// answer.
    fn lookup(&self, aspect: &str) -> Result<Option<Arc<WikiExtract>>>;
}

/// Offline extract store loaded from JSONL `{"title": str, "text": str}`.
#[derive(Debug, Default, Clone)]
pub struct OfflineStore {
    pages: HashMap<String, Arc<WikiExtract>>,
}

impl OfflineStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn read_from<R: BufRead>(reader: R) -> Result<OfflineStore> {
        let mut store = OfflineStore::new();
        for (i, line) in reader.lines().enumerate() {
            let bad = |message: String| Error::MalformedLine { line: i + 1, message };
            let line = line.map_err(|e| bad(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let page: StoreLine = serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
            store.insert(WikiExtract::new(page.title, page.text));
        }
        Ok(store)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<OfflineStore> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(BufReader::new(file))
    }

    /// First page stored under a title wins.
    pub fn insert(&mut self, page: WikiExtract) {
        self.pages.entry(title_key(&page.title)).or_insert_with(|| Arc::new(page));
    }

    /// Exact title first, then with one trailing `s` removed.
    pub fn get(&self, aspect: &str) -> Option<Arc<WikiExtract>> {
        let key = title_key(aspect);
        self.pages
            .get(&key)
            .or_else(|| {
                key.strip_suffix('s')
                    .filter(|k| !k.is_empty())
                    .and_then(|k| self.pages.get(k))
            })
            .cloned()
    }

    pub fn len(&self) -> usize {
        self.pages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pages.is_empty()
    }
}

impl WikiSource for OfflineStore {
    fn lookup(&self, aspect: &str) -> Result<Option<Arc<WikiExtract>>> {
        Ok(self.get(aspect))
    }
}

pub const DEFAULT_WIKI_BASE_URL: &str = "https://en.wikipedia.org/w/api.php";
pub const WIKI_BASE_URL_ENV: &str = "ASPECTFORGE_WIKI_BASE_URL";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiveConfig {
    pub base_url: String,
    pub user_agent: String,
    /// Attempts per title, including the first.
    pub max_attempts: u32,
    pub timeout: Duration,
    pub max_in_flight: usize,
    /// Initial retry delay; doubled after each failure.
    pub backoff: Duration,
}

impl Default for LiveConfig {
    fn default() -> Self {
        LiveConfig {
            base_url: DEFAULT_WIKI_BASE_URL.into(),
            user_agent: concat!("aspectforge/", env!("CARGO_PKG_VERSION")).into(),
            max_attempts: 3,
            timeout: Duration::from_secs(20),
            max_in_flight: 4,
            backoff: Duration::from_millis(500),
        }
    }
}

impl LiveConfig {
    /// Applies the `ASPECTFORGE_WIKI_BASE_URL` override when set.
    pub fn with_env(mut self) -> Self {
        if let Ok(url) = std::env::var(WIKI_BASE_URL_ENV) {
            if !url.trim().is_empty() {
                self.base_url = url.trim().to_string();
            }
        }
        self
    }
}

struct Semaphore {
    free: Mutex<usize>,
    cond: Condvar,
}

impl Semaphore {
    fn new(n: usize) -> Self {
        Semaphore {
            free: Mutex::new(n.max(1)),
            cond: Condvar::new(),
        }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut free = self.free.lock().unwrap();
        while *free == 0 {
            free = self.cond.wait(free).unwrap();
        }
        *free -= 1;
        Permit(self)
    }
}

struct Permit<'a>(&'a Semaphore);

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap() += 1;
        self.0.cond.notify_one();
    }
}

#[derive(Deserialize)]
struct ApiResponse {
    query: Option<ApiQuery>,
}

#[derive(Deserialize)]
struct ApiQuery {
    #[serde(default)]
    pages: Vec<ApiPage>,
}

#[derive(Deserialize)]
struct ApiPage {
    title: Option<String>,
    extract: Option<String>,
    #[serde(default)]
    missing: bool,
    #[serde(default)]
    invalid: bool,
}

enum Fetch {
    Page(WikiExtract),
    Missing,
}

/// MediaWiki extracts client that writes every fetched page through to an
/// offline store file, so later runs can replay offline.
pub struct LiveClient {
    config: LiveConfig,
    agent: ureq::Agent,
    store: RwLock<OfflineStore>,
    misses: RwLock<HashSet<String>>,
    cache: Option<Mutex<BufWriter<File>>>,
    cache_path: Option<PathBuf>,
    in_flight: Semaphore,
}

impl LiveClient {
    /// `cache` is the write-through store file; existing pages in it are
    /// served without a request.
    pub fn new(config: LiveConfig, cache: Option<&Path>) -> Result<LiveClient> {
        let store = match cache {
            Some(p) if p.exists() => OfflineStore::load(p)?,
            _ => OfflineStore::new(),
        };
        let writer = match cache {
            Some(p) => {
                let file = OpenOptions::new()
                    .create(true)
                    .append(true)
                    .open(p)
                    .map_err(|e| Error::io(p, e))?;
                Some(Mutex::new(BufWriter::new(file)))
            }
            None => None,
        };
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .user_agent(config.user_agent.as_str())
            .http_status_as_error(false)
            .build()
            .into();
        Ok(LiveClient {
            in_flight: Semaphore::new(config.max_in_flight),
            config,
            agent,
            store: RwLock::new(store),
            misses: RwLock::new(HashSet::new()),
            cache: writer,
            cache_path: cache.map(Path::to_path_buf),
        })
    }

    fn fetch_once(&self, title: &str) -> std::result::Result<Fetch, String> {
        let _permit = self.in_flight.acquire();
        let mut response = self
            .agent
            .get(&self.config.base_url)
            .query("action", "query")
            .query("prop", "extracts")
            .query("explaintext", "1")
            .query("redirects", "1")
            .query("format", "json")
            .query("formatversion", "2")
            .query("titles", title)
            .call()
            .map_err(|e| e.to_string())?;
        let status = response.status();
        if !status.is_success() {
            return Err(format!("HTTP {status}"));
        }
        let body = response.body_mut().read_to_string().map_err(|e| e.to_string())?;
        let parsed: ApiResponse = serde_json::from_str(&body).map_err(|e| format!("bad response: {e}"))?;
        let page = parsed.query.and_then(|q| q.pages.into_iter().next());
        match page {
            Some(p) if !p.missing && !p.invalid => match (p.title, p.extract) {
                (Some(t), Some(x)) if !x.trim().is_empty() => Ok(Fetch::Page(WikiExtract::new(t, x))),
                _ => Ok(Fetch::Missing),
            },
            _ => Ok(Fetch::Missing),
        }
    }

    fn fetch(&self, title: &str) -> Result<Fetch> {
        let mut delay = self.config.backoff;
        let attempts = self.config.max_attempts.max(1);
        let mut last = String::new();
        for attempt in 1..=attempts {
            match self.fetch_once(title) {
                Ok(f) => return Ok(f),
                Err(e) => {
                    log::warn!("wikipedia {title:?}: attempt {attempt}/{attempts} failed: {e}");
                    last = e;
                }
            }
            if attempt < attempts {
                thread::sleep(delay);
                delay *= 2;
            }
        }
        Err(Error::WikiUnavailable {
            title: title.to_string(),
            attempts,
            message: last,
        })
    }

    fn write_through(&self, query: &str, page: &WikiExtract) -> Result<()> {
        let Some(cache) = &self.cache else {
            return Ok(());
        };
        let path = self.cache_path.clone().unwrap_or_default();
        let mut out = cache.lock().unwrap();
        let mut titles = vec![page.title.as_str()];
        if title_key(query) != title_key(&page.title) {
            titles.push(query);
        }
        for title in titles {
            let line = StoreLine {
                title: title.to_string(),
                text: page.text.clone(),
            };
            serde_json::to_writer(&mut *out, &line).map_err(|e| Error::io(&path, e.into()))?;
            out.write_all(b"\n").map_err(|e| Error::io(&path, e))?;
        }
        out.flush().map_err(|e| Error::io(&path, e))
    }
}

impl WikiSource for LiveClient {
    fn lookup(&self, aspect: &str) -> Result<Option<Arc<WikiExtract>>> {
        let key = title_key(aspect);
        if key.is_empty() {
            return Ok(None);
        }
        if let Some(hit) = self.store.read().unwrap().get(&key) {
            return Ok(Some(hit));
        }
        if self.misses.read().unwrap().contains(&key) {
            return Ok(None);
        }
        match self.fetch(aspect)? {
            Fetch::Missing => {
                self.misses.write().unwrap().insert(key);
                Ok(None)
            }
            Fetch::Page(page) => {
                let mut store = self.store.write().unwrap();
                if let Some(hit) = store.get(&key) {
                    return Ok(Some(hit));
                }
                self.write_through(aspect, &page)?;
                let canonical = page.title.clone();
                store.insert(page);
                let arc = store.get(&canonical).expect("just inserted");
                store.pages.entry(key).or_insert_with(|| arc.clone());
                Ok(Some(arc))
            }
        }
    }
}

/// At most `limit` normalized words, in ranking order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RelatedWords(pub Vec<String>);

impl RelatedWords {
    pub fn words(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<String> {
        self.0
    }
}

/// Walks the ranking top-down and keeps words present in the extract until
/// `limit` are collected (filter first, then truncate).
pub fn related_words(ranking: &[(String, f64)], extract: Option<&WikiExtract>, limit: usize) -> RelatedWords {
    let Some(extract) = extract else {
        return RelatedWords::default();
    };
    RelatedWords(
        ranking
            .iter()
            .filter(|(w, _)| extract.contains(w))
            .take(limit)
            .map(|(w, _)| w.clone())
            .collect(),
    )
}
