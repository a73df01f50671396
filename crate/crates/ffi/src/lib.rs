//! C ABI over the `aspectforge` library.
//!
//! Every fallible call returns an [`AfStatus`]. On failure the message is
//! available from [`af_last_error`] on the same thread. Structured results
//! are returned as NUL-terminated JSON strings that the caller releases with
//! [`af_string_free`]. Handles are opaque and released with their `_free`
//! function; passing NULL to a `_free` function is a no-op.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use aspectforge::aspect_seed::extract_entities;
use aspectforge::concept_graph::{ConceptIndex, IndexConfig};
use aspectforge::corpus_io::{segment_sentences, tokenize_words, DocumentRecord};
use aspectforge::model_input::{parse_input, serialize_input, ModelInput};
use aspectforge::rouge::score_pair;
use aspectforge::salience::{related_words, TfIdfModel, WikiExtract};
use aspectforge::weak_supervision::{build_weak_examples, WeakExampleLine, WeakSupConfig};
use aspectforge::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Config = 3,
    Data = 4,
    Format = 5,
    Io = 6,
    Panic = 7,
}

/// Weighted neighbor index built from a ConceptNet dump.
pub struct AfConceptIndex(ConceptIndex);

/// Document-frequency statistics for TF-IDF scoring.
pub struct AfTfIdf(TfIdfModel);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(err: &Error) -> AfStatus {
    match err {
        Error::Config(_) => AfStatus::Config,
        Error::Format(_) => AfStatus::Format,
        Error::Io { .. } => AfStatus::Io,
        Error::Stage { source, .. } => status_of(source),
        _ => AfStatus::Data,
    }
}

struct Fail(AfStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

type FfiResult<T> = std::result::Result<T, Fail>;

fn guard(f: impl FnOnce() -> FfiResult<()>) -> AfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AfStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside aspectforge");
            AfStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(Fail(AfStatus::NullPointer, format!("{name} is NULL")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Fail(AfStatus::InvalidUtf8, format!("{name}: {e}")))
}

unsafe fn opt_str_arg<'a>(p: *const c_char, name: &str) -> FfiResult<Option<&'a str>> {
    if p.is_null() {
        Ok(None)
    } else {
        str_arg(p, name).map(Some)
    }
}

unsafe fn handle<'a, T>(p: *const T, name: &str) -> FfiResult<&'a T> {
    p.as_ref()
        .ok_or_else(|| Fail(AfStatus::NullPointer, format!("{name} is NULL")))
}

fn check_out<T>(out: *mut T) -> FfiResult<()> {
    if out.is_null() {
        Err(Fail(AfStatus::NullPointer, "output pointer is NULL".into()))
    } else {
        Ok(())
    }
}

fn json_arg<T: serde::de::DeserializeOwned>(s: &str, name: &str) -> FfiResult<T> {
    serde_json::from_str(s).map_err(|e| Fail(AfStatus::Format, format!("{name}: {e}")))
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> FfiResult<()> {
    let c = CString::new(s).map_err(|_| Fail(AfStatus::Data, "result contains a NUL byte".into()))?;
    *out = c.into_raw();
    Ok(())
}

unsafe fn put_json<T: serde::Serialize>(out: *mut *mut c_char, value: &T) -> FfiResult<()> {
    put_string(out, serde_json::to_string(value).expect("value serializes"))
}

/// Message of the last failed call on this thread, or NULL. Owned by the
/// library and valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn af_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn af_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be NULL or a string produced by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn af_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a ConceptNet assertions TSV. `config_json` may be NULL or an
/// object with any of `relations`, `min_weight`, `language`. The parse
/// report is written to `report_json` when it is not NULL.
///
/// # Safety
/// Pointer arguments must be NULL or valid for the documented use.
#[no_mangle]
pub unsafe extern "C" fn af_concept_index_from_dump(
    path: *const c_char,
    config_json: *const c_char,
    out: *mut *mut AfConceptIndex,
    report_json: *mut *mut c_char,
) -> AfStatus {
    guard(|| {
        check_out(out)?;
        let path = str_arg(path, "path")?;
        let config: IndexConfig = match opt_str_arg(config_json, "config_json")? {
            Some(s) => json_arg(s, "config_json")?,
            None => IndexConfig::default(),
        };
        let (index, report) = ConceptIndex::from_dump(path, config)?;
        if !report_json.is_null() {
            put_json(report_json, &report)?;
        }
        *out = Box::into_raw(Box::new(AfConceptIndex(index)));
        Ok(())
    })
}

/// Loads a persisted index.
///
/// # Safety
/// `path` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn af_concept_index_load(path: *const c_char, out: *mut *mut AfConceptIndex) -> AfStatus {
    guard(|| {
        check_out(out)?;
        let index = ConceptIndex::load(str_arg(path, "path")?)?;
        *out = Box::into_raw(Box::new(AfConceptIndex(index)));
        Ok(())
    })
}

/// # Safety
/// `index` must come from this library; `path` must be a valid C string.
#[no_mangle]
pub unsafe extern "C" fn af_concept_index_save(index: *const AfConceptIndex, path: *const c_char) -> AfStatus {
    guard(|| {
        let index = handle(index, "index")?;
        index.0.save(str_arg(path, "path")?)?;
        Ok(())
    })
}

/// # Safety
/// `index` must be NULL or come from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn af_concept_index_free(index: *mut AfConceptIndex) {
    if !index.is_null() {
        drop(Box::from_raw(index));
    }
}

/// Number of nodes; 0 for NULL.
///
/// # Safety
/// `index` must be NULL or come from this library.
#[no_mangle]
pub unsafe extern "C" fn af_concept_index_node_count(index: *const AfConceptIndex) -> usize {
    index.as_ref().map_or(0, |i| i.0.node_count())
}

/// Top-`k` neighbors as `[[term, weight], ...]`.
///
/// # Safety
/// `index` must come from this library; `term` must be a valid C string.
#[no_mangle]
pub unsafe extern "C" fn af_concept_index_neighbors(
    index: *const AfConceptIndex,
    term: *const c_char,
    k: usize,
    out_json: *mut *mut c_char,
) -> AfStatus {
    guard(|| {
        check_out(out_json)?;
        let index = handle(index, "index")?;
        let neighbors: Vec<(String, f64)> = index
            .0
            .neighbors(str_arg(term, "term")?, k)
            .into_iter()
            .map(|(t, w)| (t.into_string(), w))
            .collect();
        put_json(out_json, &neighbors)
    })
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn af_tfidf_new(out: *mut *mut AfTfIdf) -> AfStatus {
    guard(|| {
        check_out(out)?;
        *out = Box::into_raw(Box::new(AfTfIdf(TfIdfModel::default())));
        Ok(())
    })
}

/// # Safety
/// `model` must come from this library; `text` must be a valid C string.
#[no_mangle]
pub unsafe extern "C" fn af_tfidf_add_document(model: *mut AfTfIdf, text: *const c_char) -> AfStatus {
    guard(|| {
        let model = model
            .as_mut()
            .ok_or_else(|| Fail(AfStatus::NullPointer, "model is NULL".into()))?;
        model.0.add_document(str_arg(text, "text")?);
        Ok(())
    })
}

/// # Safety
/// `model` must be NULL or come from this library.
#[no_mangle]
pub unsafe extern "C" fn af_tfidf_doc_count(model: *const AfTfIdf) -> u64 {
    model.as_ref().map_or(0, |m| m.0.doc_count())
}

/// Document words ranked by TF-IDF as `[[word, score], ...]`.
///
/// # Safety
/// `model` must come from this library; `document` must be a valid C string.
#[no_mangle]
pub unsafe extern "C" fn af_tfidf_score(
    model: *const AfTfIdf,
    document: *const c_char,
    out_json: *mut *mut c_char,
) -> AfStatus {
    guard(|| {
        check_out(out_json)?;
        let model = handle(model, "model")?;
        put_json(out_json, &model.0.score_document(str_arg(document, "document")?))
    })
}

/// Related words of `document` for an aspect page, as a JSON array. A NULL
/// `extract_text` means the aspect has no page.
///
/// # Safety
/// `model` must come from this library; strings must be valid or NULL
/// where allowed.
#[no_mangle]
pub unsafe extern "C" fn af_related_words(
    model: *const AfTfIdf,
    document: *const c_char,
    extract_text: *const c_char,
    limit: usize,
    out_json: *mut *mut c_char,
) -> AfStatus {
    guard(|| {
        check_out(out_json)?;
        let model = handle(model, "model")?;
        let ranking = model.0.score_document(str_arg(document, "document")?);
        let page = opt_str_arg(extract_text, "extract_text")?.map(|t| WikiExtract::new("", t));
        put_json(out_json, &related_words(&ranking, page.as_ref(), limit).into_vec())
    })
}

/// # Safety
/// `tfidf` must be NULL or come from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn af_tfidf_free(model: *mut AfTfIdf) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Normalized tokens as a JSON array of strings.
///
/// # Safety
/// `text` must be a valid C string; `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn af_tokenize(text: *const c_char, out_json: *mut *mut c_char) -> AfStatus {
    guard(|| {
        check_out(out_json)?;
        put_json(out_json, &tokenize_words(str_arg(text, "text")?))
    })
}

/// Sentences as a JSON array of strings.
///
/// # Safety
/// `text` must be a valid C string; `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn af_segment_sentences(text: *const c_char, out_json: *mut *mut c_char) -> AfStatus {
    guard(|| {
        check_out(out_json)?;
        let sentences: Vec<String> = segment_sentences(str_arg(text, "text")?)
            .into_iter()
            .map(|s| s.text)
            .collect();
        put_json(out_json, &sentences)
    })
}

/// Entity mentions as `[{"text", "start", "end"}, ...]` (character offsets).
///
/// # Safety
/// `text` must be a valid C string; `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn af_extract_entities(text: *const c_char, out_json: *mut *mut c_char) -> AfStatus {
    guard(|| {
        check_out(out_json)?;
        put_json(out_json, &extract_entities(str_arg(text, "text")?))
    })
}

/// Weak-supervision examples for one record given as JSON
/// `{"id", "document", "summary"}`. Output lines follow the
/// `weak_examples.jsonl` schema.
///
/// # Safety
/// `index` must come from this library; strings must be valid C strings.
#[no_mangle]
pub unsafe extern "C" fn af_build_weak_examples(
    index: *const AfConceptIndex,
    record_json: *const c_char,
    neighbor_k: usize,
    max_aspects_per_doc: usize,
    out_json: *mut *mut c_char,
) -> AfStatus {
    guard(|| {
        check_out(out_json)?;
        let index = handle(index, "index")?;
        let record: DocumentRecord = json_arg(str_arg(record_json, "record_json")?, "record_json")?;
        record.validate().map_err(|m| Fail(AfStatus::Data, m))?;
        let config = WeakSupConfig {
            neighbor_k,
            max_aspects_per_doc,
        };
        let (examples, _) = build_weak_examples(&record, &index.0, &config);
        let lines: Vec<WeakExampleLine> = examples.iter().map(WeakExampleLine::from).collect();
        put_json(out_json, &lines)
    })
}

/// Serializes `aspect:related words<s>document`; `related_json` is a JSON
/// array of strings.
///
/// # Safety
/// Strings must be valid C strings; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn af_serialize_input(
    aspect: *const c_char,
    related_json: *const c_char,
    document: *const c_char,
    out: *mut *mut c_char,
) -> AfStatus {
    guard(|| {
        check_out(out)?;
        let related: Vec<String> = json_arg(str_arg(related_json, "related_json")?, "related_json")?;
        let input = ModelInput::new(str_arg(aspect, "aspect")?, related, str_arg(document, "document")?);
        put_string(out, serialize_input(&input)?)
    })
}

/// Parses a model input into `{"aspect", "related", "document"}`.
///
/// # Safety
/// `input` must be a valid C string; `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn af_parse_input(input: *const c_char, out_json: *mut *mut c_char) -> AfStatus {
    guard(|| {
        check_out(out_json)?;
        put_json(out_json, &parse_input(str_arg(input, "input")?)?)
    })
}

/// ROUGE-1/2/L for one pair as
/// `{"rouge1": {"p","r","f"}, "rouge2": {..}, "rougeL": {..}}`.
///
/// # Safety
/// Strings must be valid C strings; `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn af_rouge(
    candidate: *const c_char,
    reference: *const c_char,
    out_json: *mut *mut c_char,
) -> AfStatus {
    guard(|| {
        check_out(out_json)?;
        put_json(
            out_json,
            &score_pair(str_arg(candidate, "candidate")?, str_arg(reference, "reference")?),
        )
    })
}
