/*
 * situ3d — 3D situated-reasoning toolkit.
 *
 * C API over the core library: scene loading, spatial-relation queries,
 * sandboxed program execution, agent episodes, and dataset construction.
 *
 * Conventions:
 *  - Functions return s3d_status (0 on success). On failure the thread-local
 *    message from s3d_last_error() describes what went wrong.
 *  - Output strings (char** out params) are allocated by the library and
 *    must be released with s3d_string_free().
 *  - Handles are opaque; destroy them with the matching *_free function.
 *    A handle may be used from multiple threads only where noted.
 */
#ifndef SITU3D_H
#define SITU3D_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum s3d_status {
    S3D_OK = 0,
    S3D_ERROR = 1,          /* unexpected failure */
    S3D_ERR_VALIDATION = 2, /* bad arguments, malformed input, syntax errors */
    S3D_ERR_PROGRAM = 3,    /* program executed but hit a runtime error */
    S3D_ERR_INFRA = 4       /* transport/LLM failure after retries */
} s3d_status;

typedef struct s3d_config s3d_config;
typedef struct s3d_scene s3d_scene;
typedef struct s3d_client s3d_client;

const char* s3d_version(void);

/* Thread-local message for the most recent failure on this thread. */
const char* s3d_last_error(void);

void s3d_string_free(char* s);

/* ---- configuration ----------------------------------------------------- */

/* Built-in defaults. */
s3d_status s3d_config_create(s3d_config** out);
/* Loads a JSON config file and applies SITU3D_ENDPOINT / SITU3D_API_KEY /
 * SITU3D_MODEL environment overrides. */
s3d_status s3d_config_load(const char* path, s3d_config** out);
s3d_status s3d_config_parse(const char* json_text, s3d_config** out);
s3d_status s3d_config_dump(const s3d_config* config, char** json_out);
void s3d_config_free(s3d_config* config);

/* ---- scenes ------------------------------------------------------------ */

s3d_status s3d_scene_load(const char* path, s3d_scene** out);
s3d_status s3d_scene_parse(const char* json_text, s3d_scene** out);
int s3d_scene_object_count(const s3d_scene* scene);
/* Deterministic canonical dump (ascending object ids, sorted keys). */
s3d_status s3d_scene_canonical_json(const s3d_scene* scene, char** json_out);
void s3d_scene_free(s3d_scene* scene);

/* ---- relations ----------------------------------------------------------- */

/* Full pairwise relation table plus agent-relative labels, as JSON. */
s3d_status s3d_relation_table(const s3d_scene* scene, const s3d_config* config,
                              char** json_out);

/* ---- program execution --------------------------------------------------- */

/* Parses and runs one sandboxed program against the scene. feedback_out is
 * always set (on S3D_OK, S3D_ERR_VALIDATION and S3D_ERR_PROGRAM) to the
 * "Observation: ..." text fed back to the model. Returns S3D_ERR_VALIDATION
 * for syntax errors and S3D_ERR_PROGRAM for runtime errors. */
s3d_status s3d_program_run(const s3d_scene* scene, const s3d_config* config,
                           const char* source, char** feedback_out);

/* ---- LLM clients ---------------------------------------------------------- */

/* HTTP chat-completion client from config.llm; safe for concurrent use. */
s3d_status s3d_client_http(const s3d_config* config, s3d_client** out);
/* Replay client over a fixed response list (single consumer). */
s3d_status s3d_client_scripted(const char* const* responses, size_t count,
                               s3d_client** out);
/* Scripted file: JSON array of strings, or object {question_id: [responses]}. */
s3d_status s3d_client_scripted_file(const char* path, s3d_client** out);

/* Completion callback: messages_json is a JSON array of {role, content};
 * write a malloc'd response into *response_out and return 0. A non-zero
 * return is treated as an infrastructure failure. */
typedef int (*s3d_complete_fn)(void* user_data, const char* messages_json,
                               char** response_out);
s3d_status s3d_client_callback(s3d_complete_fn fn, void* user_data, s3d_client** out);

void s3d_client_free(s3d_client* client);

/* ---- episodes -------------------------------------------------------------- */

/* Runs one two-layer reasoning episode. question_json follows the question
 * record schema: {"question_id", "scene_id", "situation", "question",
 * "answer"?, "position"?: {"xyz": [..], "quat": [..]}}. train_mode enables
 * the ground-truth outer loop. result_json_out receives the result row;
 * transcript_jsonl_out (optional) receives one JSON line per turn. */
s3d_status s3d_episode_run(const s3d_scene* scene, const s3d_config* config,
                           s3d_client* client, const char* question_json,
                           int train_mode, char** result_json_out,
                           char** transcript_jsonl_out);

/* ---- batch pipelines -------------------------------------------------------- */

/* Train-mode episodes over a question JSONL file; writes transcripts.jsonl
 * and results.jsonl under out_dir. summary_json_out is optional. */
s3d_status s3d_collect_run(const s3d_config* config, s3d_client* client,
                           const char* questions_path, const char* scene_dir,
                           const char* out_dir, int jobs, char** summary_json_out);

/* Eval-mode episodes; also writes metrics.json. strict counts questions whose
 * scene failed to load as incorrect instead of dropping them. */
s3d_status s3d_eval_run(const s3d_config* config, s3d_client* client,
                        const char* questions_path, const char* scene_dir,
                        const char* out_dir, int jobs, int strict,
                        char** summary_json_out);

/* Dataset extraction from collected transcripts + results. With verify != 0,
 * every sample is re-executed against its scene; scene_dir (and
 * questions_path, for DPO ground truths) must then be given. */
s3d_status s3d_build_sft(const s3d_config* config, const char* transcripts_path,
                         const char* results_path, const char* out_path, int verify,
                         const char* scene_dir, const char* questions_path,
                         char** summary_json_out);
s3d_status s3d_build_dpo(const s3d_config* config, const char* transcripts_path,
                         const char* results_path, const char* out_path, int verify,
                         const char* scene_dir, const char* questions_path,
                         char** summary_json_out);

/* Question augmentation over a question JSONL file. With verify != 0 each
 * generated question must pass a train-mode episode (scene_dir required).
 * provenance_path may be NULL to skip the provenance report. */
s3d_status s3d_augment_run(const s3d_config* config, s3d_client* client,
                           const char* questions_path, const char* out_path,
                           const char* provenance_path, int jobs, int verify,
                           const char* scene_dir, char** summary_json_out);

/* ---- metrics and loss references --------------------------------------------- */

/* {"accuracy": ..., "round_distribution": {...}} from results JSONL text. */
s3d_status s3d_metrics_report(const char* results_jsonl, int strict, char** json_out);

/* Mean negative log-likelihood of one token sequence. */
s3d_status s3d_sft_loss(const double* logps, size_t count, double* out);

/* Preference loss from per-token log-probabilities under the trained and
 * reference policies. Paired arrays must have equal lengths. */
s3d_status s3d_dpo_loss(const double* chosen_policy, const double* chosen_ref,
                        size_t chosen_len, const double* rejected_policy,
                        const double* rejected_ref, size_t rejected_len, double beta,
                        double* out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* SITU3D_H */
