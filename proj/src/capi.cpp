#include "situ3d/situ3d.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

#include "agent_loop.hpp"
#include "batch.hpp"
#include "config.hpp"
#include "dataset.hpp"
#include "errors.hpp"
#include "interp/interpreter.hpp"
#include "ioutil.hpp"
#include "llm_client.hpp"
#include "relations.hpp"
#include "scene.hpp"

using namespace situ3d;

struct s3d_config {
    GlobalConfig config;
};
struct s3d_scene {
    Scene scene;
};
struct s3d_client {
    std::unique_ptr<ClientSource> source;
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& message) {
    g_last_error = message;
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

s3d_status status_of(const std::exception& e) {
    if (dynamic_cast<const InfraError*>(&e)) return S3D_ERR_INFRA;
    if (dynamic_cast<const LoadError*>(&e) || dynamic_cast<const ConfigError*>(&e) ||
        dynamic_cast<const ApiError*>(&e) || dynamic_cast<const GeometryError*>(&e)) {
        return S3D_ERR_VALIDATION;
    }
    return S3D_ERROR;
}

// Runs `fn`, translating exceptions into status codes + the thread-local
// error message.
template <typename Fn>
s3d_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const std::exception& e) {
        set_error(e.what());
        return status_of(e);
    } catch (...) {
        set_error("unknown error");
        return S3D_ERROR;
    }
}

s3d_status require(bool condition, const char* message) {
    if (condition) return S3D_OK;
    set_error(message);
    return S3D_ERR_VALIDATION;
}

}  // namespace

extern "C" {

const char* s3d_version(void) {
    return "0.1.0";
}

const char* s3d_last_error(void) {
    return g_last_error.c_str();
}

void s3d_string_free(char* s) {
    std::free(s);
}

/* ---- configuration ---- */

s3d_status s3d_config_create(s3d_config** out) {
    if (s3d_status s = require(out != nullptr, "out must not be NULL")) return s;
    return guarded([&]() {
        *out = new s3d_config{GlobalConfig::defaults()};
        return S3D_OK;
    });
}

s3d_status s3d_config_load(const char* path, s3d_config** out) {
    if (s3d_status s = require(path && out, "path and out must not be NULL")) return s;
    return guarded([&]() {
        *out = new s3d_config{GlobalConfig::load_file(path)};
        return S3D_OK;
    });
}

s3d_status s3d_config_parse(const char* json_text, s3d_config** out) {
    if (s3d_status s = require(json_text && out, "json_text and out must not be NULL")) {
        return s;
    }
    return guarded([&]() {
        nlohmann::json doc = nlohmann::json::parse(json_text, nullptr, false);
        if (doc.is_discarded()) throw ConfigError("config text is not valid JSON");
        *out = new s3d_config{GlobalConfig::from_json(doc)};
        return S3D_OK;
    });
}

s3d_status s3d_config_dump(const s3d_config* config, char** json_out) {
    if (s3d_status s = require(config && json_out, "config and json_out must not be NULL")) {
        return s;
    }
    return guarded([&]() {
        *json_out = dup_string(config->config.to_json().dump(2));
        return S3D_OK;
    });
}

void s3d_config_free(s3d_config* config) {
    delete config;
}

/* ---- scenes ---- */

s3d_status s3d_scene_load(const char* path, s3d_scene** out) {
    if (s3d_status s = require(path && out, "path and out must not be NULL")) return s;
    return guarded([&]() {
        *out = new s3d_scene{load_scene_file(path)};
        return S3D_OK;
    });
}

s3d_status s3d_scene_parse(const char* json_text, s3d_scene** out) {
    if (s3d_status s = require(json_text && out, "json_text and out must not be NULL")) {
        return s;
    }
    return guarded([&]() {
        *out = new s3d_scene{load_scene(json_text)};
        return S3D_OK;
    });
}

int s3d_scene_object_count(const s3d_scene* scene) {
    if (!scene) return -1;
    return static_cast<int>(scene->scene.objects().size());
}

s3d_status s3d_scene_canonical_json(const s3d_scene* scene, char** json_out) {
    if (s3d_status s = require(scene && json_out, "scene and json_out must not be NULL")) {
        return s;
    }
    return guarded([&]() {
        *json_out = dup_string(scene->scene.canonical_json().dump());
        return S3D_OK;
    });
}

void s3d_scene_free(s3d_scene* scene) {
    delete scene;
}

/* ---- relations ---- */

s3d_status s3d_relation_table(const s3d_scene* scene, const s3d_config* config,
                              char** json_out) {
    if (s3d_status s = require(scene && config && json_out,
                               "scene, config and json_out must not be NULL")) {
        return s;
    }
    return guarded([&]() {
        *json_out =
            dup_string(relation_table(scene->scene, config->config.relations).dump());
        return S3D_OK;
    });
}

/* ---- program execution ---- */

s3d_status s3d_program_run(const s3d_scene* scene, const s3d_config* config,
                           const char* source, char** feedback_out) {
    if (s3d_status s = require(scene && config && source && feedback_out,
                               "scene, config, source and feedback_out must not be NULL")) {
        return s;
    }
    return guarded([&]() {
        ToolApi api(scene->scene, config->config.relations, config->config.api);
        interp::ExecResult result =
            interp::run_program(source, api, config->config.limits);
        *feedback_out = dup_string(interp::format_feedback(result));
        if (const auto* err = std::get_if<interp::RuntimeErrorReport>(&result)) {
            set_error(err->message);
            return err->kind == interp::ErrorKind::syntax ? S3D_ERR_VALIDATION
                                                          : S3D_ERR_PROGRAM;
        }
        return S3D_OK;
    });
}

/* ---- clients ---- */

s3d_status s3d_client_http(const s3d_config* config, s3d_client** out) {
    if (s3d_status s = require(config && out, "config and out must not be NULL")) return s;
    return guarded([&]() {
        auto client = std::make_shared<HttpClient>(config->config.llm);
        *out = new s3d_client{std::make_unique<SingleClientSource>(std::move(client))};
        return S3D_OK;
    });
}

s3d_status s3d_client_scripted(const char* const* responses, size_t count,
                               s3d_client** out) {
    if (s3d_status s = require(out && (count == 0 || responses != nullptr),
                               "responses must not be NULL when count > 0")) {
        return s;
    }
    return guarded([&]() {
        std::vector<std::string> list;
        list.reserve(count);
        for (size_t i = 0; i < count; ++i) list.emplace_back(responses[i]);
        auto client = std::make_shared<ScriptedClient>(std::move(list));
        *out = new s3d_client{std::make_unique<SingleClientSource>(std::move(client))};
        return S3D_OK;
    });
}

s3d_status s3d_client_scripted_file(const char* path, s3d_client** out) {
    if (s3d_status s = require(path && out, "path and out must not be NULL")) return s;
    return guarded([&]() {
        *out = new s3d_client{scripted_source_from_file(path)};
        return S3D_OK;
    });
}

s3d_status s3d_client_callback(s3d_complete_fn fn, void* user_data, s3d_client** out) {
    if (s3d_status s = require(fn && out, "fn and out must not be NULL")) return s;
    return guarded([&]() {
        auto client = std::make_shared<CallbackClient>(
            [fn, user_data](const std::vector<ChatMessage>& messages) -> std::string {
                std::string payload = messages_to_json(messages).dump();
                char* response = nullptr;
                int rc = fn(user_data, payload.c_str(), &response);
                if (rc != 0 || !response) {
                    std::free(response);
                    throw InfraError("completion callback failed with code " +
                                     std::to_string(rc));
                }
                std::string text(response);
                std::free(response);
                return text;
            });
        *out = new s3d_client{std::make_unique<SingleClientSource>(std::move(client))};
        return S3D_OK;
    });
}

void s3d_client_free(s3d_client* client) {
    delete client;
}

/* ---- episodes ---- */

s3d_status s3d_episode_run(const s3d_scene* scene, const s3d_config* config,
                           s3d_client* client, const char* question_json,
                           int train_mode, char** result_json_out,
                           char** transcript_jsonl_out) {
    if (s3d_status s =
            require(scene && config && client && question_json && result_json_out,
                    "scene, config, client, question_json and result_json_out must "
                    "not be NULL")) {
        return s;
    }
    return guarded([&]() {
        nlohmann::json doc = nlohmann::json::parse(question_json, nullptr, false);
        if (doc.is_discarded()) throw LoadError("question_json is not valid JSON");
        QuestionRecord question = QuestionRecord::from_json(doc);

        GlobalConfig episode_config = config->config;
        episode_config.loop.mode = train_mode ? LoopMode::train : LoopMode::eval;

        LlmClient& llm = client->source->client_for(question.question_id);
        EpisodeResult result =
            run_episode(question, scene->scene, llm, episode_config);

        ResultRow row;
        row.question_id = result.question_id;
        row.scene_id = question.scene_id;
        row.final_answer = result.final_answer;
        row.correct = result.correct;
        row.rounds_used = result.rounds_used;
        row.terminated_by = terminated_name(result.terminated_by);
        *result_json_out = dup_string(row.to_json().dump());
        if (transcript_jsonl_out) {
            *transcript_jsonl_out = dup_string(result.transcript.to_jsonl());
        }
        if (result.terminated_by == Terminated::infra_error) {
            set_error("episode terminated by infrastructure error");
            return S3D_ERR_INFRA;
        }
        return S3D_OK;
    });
}

/* ---- batch pipelines ---- */

s3d_status s3d_collect_run(const s3d_config* config, s3d_client* client,
                           const char* questions_path, const char* scene_dir,
                           const char* out_dir, int jobs, char** summary_json_out) {
    if (s3d_status s = require(config && client && questions_path && scene_dir && out_dir,
                               "config, client, questions_path, scene_dir and out_dir "
                               "must not be NULL")) {
        return s;
    }
    return guarded([&]() {
        nlohmann::json summary = collect_run(questions_path, scene_dir, config->config,
                                             *client->source, jobs, out_dir);
        if (summary_json_out) *summary_json_out = dup_string(summary.dump(2));
        return S3D_OK;
    });
}

s3d_status s3d_eval_run(const s3d_config* config, s3d_client* client,
                        const char* questions_path, const char* scene_dir,
                        const char* out_dir, int jobs, int strict,
                        char** summary_json_out) {
    if (s3d_status s = require(config && client && questions_path && scene_dir && out_dir,
                               "config, client, questions_path, scene_dir and out_dir "
                               "must not be NULL")) {
        return s;
    }
    return guarded([&]() {
        nlohmann::json summary = eval_run(questions_path, scene_dir, config->config,
                                          *client->source, jobs, strict != 0, out_dir);
        if (summary_json_out) *summary_json_out = dup_string(summary.dump(2));
        return S3D_OK;
    });
}

s3d_status s3d_build_sft(const s3d_config* config, const char* transcripts_path,
                         const char* results_path, const char* out_path, int verify,
                         const char* scene_dir, const char* questions_path,
                         char** summary_json_out) {
    if (s3d_status s = require(config && transcripts_path && results_path && out_path,
                               "config, transcripts_path, results_path and out_path "
                               "must not be NULL")) {
        return s;
    }
    if (s3d_status s = require(!verify || scene_dir, "verify requires scene_dir")) return s;
    return guarded([&]() {
        nlohmann::json summary = build_sft_run(
            transcripts_path, results_path, out_path, verify != 0, config->config,
            scene_dir ? scene_dir : "", questions_path ? questions_path : "");
        if (summary_json_out) *summary_json_out = dup_string(summary.dump(2));
        return S3D_OK;
    });
}

s3d_status s3d_build_dpo(const s3d_config* config, const char* transcripts_path,
                         const char* results_path, const char* out_path, int verify,
                         const char* scene_dir, const char* questions_path,
                         char** summary_json_out) {
    if (s3d_status s = require(config && transcripts_path && results_path && out_path,
                               "config, transcripts_path, results_path and out_path "
                               "must not be NULL")) {
        return s;
    }
    if (s3d_status s = require(!verify || scene_dir, "verify requires scene_dir")) return s;
    return guarded([&]() {
        nlohmann::json summary = build_dpo_run(
            transcripts_path, results_path, out_path, verify != 0, config->config,
            scene_dir ? scene_dir : "", questions_path ? questions_path : "");
        if (summary_json_out) *summary_json_out = dup_string(summary.dump(2));
        return S3D_OK;
    });
}

s3d_status s3d_augment_run(const s3d_config* config, s3d_client* client,
                           const char* questions_path, const char* out_path,
                           const char* provenance_path, int jobs, int verify,
                           const char* scene_dir, char** summary_json_out) {
    if (s3d_status s = require(config && client && questions_path && out_path,
                               "config, client, questions_path and out_path must not "
                               "be NULL")) {
        return s;
    }
    if (s3d_status s = require(!verify || scene_dir, "verify requires scene_dir")) return s;
    return guarded([&]() {
        nlohmann::json summary = augment_run(
            questions_path, config->config, *client->source, jobs, verify != 0,
            scene_dir ? scene_dir : "", out_path,
            provenance_path ? provenance_path : "");
        if (summary_json_out) *summary_json_out = dup_string(summary.dump(2));
        return S3D_OK;
    });
}

/* ---- metrics and losses ---- */

s3d_status s3d_metrics_report(const char* results_jsonl, int strict, char** json_out) {
    if (s3d_status s = require(results_jsonl && json_out,
                               "results_jsonl and json_out must not be NULL")) {
        return s;
    }
    return guarded([&]() {
        *json_out = dup_string(metrics_from_results_text(results_jsonl, strict != 0).dump(2));
        return S3D_OK;
    });
}

s3d_status s3d_sft_loss(const double* logps, size_t count, double* out) {
    if (s3d_status s = require(logps && out && count > 0,
                               "logps and out must not be NULL and count must be > 0")) {
        return s;
    }
    return guarded([&]() {
        *out = sft_loss_reference(std::vector<double>(logps, logps + count));
        return S3D_OK;
    });
}

s3d_status s3d_dpo_loss(const double* chosen_policy, const double* chosen_ref,
                        size_t chosen_len, const double* rejected_policy,
                        const double* rejected_ref, size_t rejected_len, double beta,
                        double* out) {
    if (s3d_status s =
            require(chosen_policy && chosen_ref && rejected_policy && rejected_ref && out,
                    "log-probability arrays and out must not be NULL")) {
        return s;
    }
    return guarded([&]() {
        LossInputs inputs;
        inputs.chosen_logps_policy.assign(chosen_policy, chosen_policy + chosen_len);
        inputs.chosen_logps_ref.assign(chosen_ref, chosen_ref + chosen_len);
        inputs.rejected_logps_policy.assign(rejected_policy,
                                            rejected_policy + rejected_len);
        inputs.rejected_logps_ref.assign(rejected_ref, rejected_ref + rejected_len);
        inputs.beta = beta;
        *out = dpo_loss_reference(inputs);
        return S3D_OK;
    });
}

} /* extern "C" */
