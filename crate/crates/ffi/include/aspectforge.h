/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef ASPECTFORGE_H
#define ASPECTFORGE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AfStatus {
  AF_STATUS_OK = 0,
  AF_STATUS_NULL_POINTER = 1,
  AF_STATUS_INVALID_UTF8 = 2,
  AF_STATUS_CONFIG = 3,
  AF_STATUS_DATA = 4,
  AF_STATUS_FORMAT = 5,
  AF_STATUS_IO = 6,
  AF_STATUS_PANIC = 7,
} AfStatus;

/**
 * Weighted neighbor index built from a ConceptNet dump.
 */
typedef struct AfConceptIndex AfConceptIndex;

/**
 * Document-frequency statistics for TF-IDF scoring.
 */
typedef struct AfTfIdf AfTfIdf;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Owned by the
 * library and valid until the next failing call on the same thread.
 */
const char *af_last_error(void);

/**
 * Library version as a static string.
 */
const char *af_version(void);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must be NULL or a string produced by this library, freed once.
 */
void af_string_free(char *s);

/**
 * Parses a ConceptNet assertions TSV. `config_json` may be NULL or an
 * object with any of `relations`, `min_weight`, `language`. The parse
 * report is written to `report_json` when it is not NULL.
 *
 * # Safety
 * Pointer arguments must be NULL or valid for the documented use.
 */
enum AfStatus af_concept_index_from_dump(const char *path,
                                         const char *config_json,
                                         struct AfConceptIndex **out,
                                         char **report_json);

/**
 * Loads a persisted index.
 *
 * # Safety
 * `path` must be a valid C string and `out` a valid pointer.
 */
enum AfStatus af_concept_index_load(const char *path, struct AfConceptIndex **out);

/**
 * # Safety
 * `index` must come from this library; `path` must be a valid C string.
 */
enum AfStatus af_concept_index_save(const struct AfConceptIndex *index, const char *path);

/**
 * # Safety
 * `index` must be NULL or come from this library, freed once.
 */
void af_concept_index_free(struct AfConceptIndex *index);

/**
 * Number of nodes; 0 for NULL.
 *
 * # Safety
 * `index` must be NULL or come from this library.
 */
size_t af_concept_index_node_count(const struct AfConceptIndex *index);

/**
 * Top-`k` neighbors as `[[term, weight], ...]`.
 *
 * # Safety
 * `index` must come from this library; `term` must be a valid C string.
 */
enum AfStatus af_concept_index_neighbors(const struct AfConceptIndex *index,
                                         const char *term,
                                         size_t k,
                                         char **out_json);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
enum AfStatus af_tfidf_new(struct AfTfIdf **out);

/**
 * # Safety
 * `model` must come from this library; `text` must be a valid C string.
 */
enum AfStatus af_tfidf_add_document(struct AfTfIdf *model, const char *text);

/**
 * # Safety
 * `model` must be NULL or come from this library.
 */
uint64_t af_tfidf_doc_count(const struct AfTfIdf *model);

/**
 * Document words ranked by TF-IDF as `[[word, score], ...]`.
 *
 * # Safety
 * `model` must come from this library; `document` must be a valid C string.
 */
enum AfStatus af_tfidf_score(const struct AfTfIdf *model, const char *document, char **out_json);

/**
 * Related words of `document` for an aspect page, as a JSON array. A NULL
 * `extract_text` means the aspect has no page.
 *
 * # Safety
 * `model` must come from this library; strings must be valid or NULL
 * where allowed.
 */
enum AfStatus af_related_words(const struct AfTfIdf *model,
                               const char *document,
                               const char *extract_text,
                               size_t limit,
                               char **out_json);

/**
 * # Safety
 * `tfidf` must be NULL or come from this library, freed once.
 */
void af_tfidf_free(struct AfTfIdf *model);

/**
 * Normalized tokens as a JSON array of strings.
 *
 * # Safety
 * `text` must be a valid C string; `out_json` a valid pointer.
 */
enum AfStatus af_tokenize(const char *text, char **out_json);

/**
 * Sentences as a JSON array of strings.
 *
 * # Safety
 * `text` must be a valid C string; `out_json` a valid pointer.
 */
enum AfStatus af_segment_sentences(const char *text, char **out_json);

/**
 * Entity mentions as `[{"text", "start", "end"}, ...]` (character offsets).
 *
 * # Safety
 * `text` must be a valid C string; `out_json` a valid pointer.
 */
enum AfStatus af_extract_entities(const char *text, char **out_json);

/**
 * Weak-supervision examples for one record given as JSON
 * `{"id", "document", "summary"}`. Output lines follow the
 * `weak_examples.jsonl` schema.
 *
 * # Safety
 * `index` must come from this library; strings must be valid C strings.
 */
enum AfStatus af_build_weak_examples(const struct AfConceptIndex *index,
                                     const char *record_json,
                                     size_t neighbor_k,
                                     size_t max_aspects_per_doc,
                                     char **out_json);

/**
 * Serializes `aspect:related words<s>document`; `related_json` is a JSON
 * array of strings.
 *
 * # Safety
 * Strings must be valid C strings; `out` a valid pointer.
 */
enum AfStatus af_serialize_input(const char *aspect,
                                 const char *related_json,
                                 const char *document,
                                 char **out);

/**
 * Parses a model input into `{"aspect", "related", "document"}`.
 *
 * # Safety
 * `input` must be a valid C string; `out_json` a valid pointer.
 */
enum AfStatus af_parse_input(const char *input, char **out_json);

/**
 * ROUGE-1/2/L for one pair as
 * `{"rouge1": {"p","r","f"}, "rouge2": {..}, "rougeL": {..}}`.
 *
 * # Safety
 * Strings must be valid C strings; `out_json` a valid pointer.
 */
enum AfStatus af_rouge(const char *candidate, const char *reference, char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ASPECTFORGE_H */
