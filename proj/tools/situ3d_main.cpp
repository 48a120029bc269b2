// situ3d command-line interface. Talks to the core exclusively through the
// C API in situ3d/situ3d.h; exit codes mirror s3d_status (0 ok, 2 validation,
// 3 program runtime error, 4 infrastructure).

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "situ3d/situ3d.h"

namespace {

struct ConfigHandle {
    s3d_config* ptr = nullptr;
    ~ConfigHandle() { s3d_config_free(ptr); }
};
struct SceneHandle {
    s3d_scene* ptr = nullptr;
    ~SceneHandle() { s3d_scene_free(ptr); }
};
struct ClientHandle {
    s3d_client* ptr = nullptr;
    ~ClientHandle() { s3d_client_free(ptr); }
};

std::string take_string(char* s) {
    if (!s) return "";
    std::string out(s);
    s3d_string_free(s);
    return out;
}

int fail(s3d_status status, const std::string& context) {
    std::cerr << "error: " << context << ": " << s3d_last_error() << "\n";
    return static_cast<int>(status);
}

int load_config(const std::string& path, ConfigHandle& config) {
    s3d_status status;
    if (path.empty()) {
        const char* env = std::getenv("SITU3D_CONFIG");
        if (env && *env) {
            status = s3d_config_load(env, &config.ptr);
        } else {
            status = s3d_config_create(&config.ptr);
        }
    } else {
        status = s3d_config_load(path.c_str(), &config.ptr);
    }
    if (status != S3D_OK) return fail(status, "loading config");
    return 0;
}

int make_client(const std::string& spec, const ConfigHandle& config,
                ClientHandle& client) {
    s3d_status status;
    if (spec.empty() || spec == "http") {
        status = s3d_client_http(config.ptr, &client.ptr);
    } else if (spec.rfind("scripted:", 0) == 0) {
        status = s3d_client_scripted_file(spec.substr(9).c_str(), &client.ptr);
    } else {
        std::cerr << "error: unknown client spec '" << spec
                  << "' (expected 'http' or 'scripted:<file>')\n";
        return static_cast<int>(S3D_ERR_VALIDATION);
    }
    if (status != S3D_OK) return fail(status, "creating client");
    return 0;
}

std::string output_dir_of(const ConfigHandle& config, const std::string& override_dir) {
    if (!override_dir.empty()) return override_dir;
    char* dump = nullptr;
    if (s3d_config_dump(config.ptr, &dump) != S3D_OK) return "out";
    nlohmann::json doc = nlohmann::json::parse(take_string(dump), nullptr, false);
    if (doc.is_discarded()) return "out";
    return doc.value("paths", nlohmann::json::object()).value("output_dir", "out");
}

std::string read_file_or_exit(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        std::cerr << "error: cannot open " << path << "\n";
        std::exit(static_cast<int>(S3D_ERR_VALIDATION));
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_or_exit(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        std::cerr << "error: cannot write " << path << "\n";
        std::exit(static_cast<int>(S3D_ERROR));
    }
    out << content;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"situ3d — scene-query programs, agent episodes and dataset building "
                 "for 3D situated reasoning"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path,
                   "JSON config file (also honored via SITU3D_CONFIG)");

    // ask
    auto* ask = app.add_subcommand("ask", "Answer one question about a scene");
    std::string ask_scene, ask_situation, ask_question, ask_mode = "eval";
    std::string ask_answer, ask_client, ask_out;
    ask->add_option("--scene", ask_scene, "scene JSON file")->required();
    ask->add_option("--situation", ask_situation, "situation text");
    ask->add_option("--question", ask_question, "question text")->required();
    ask->add_option("--mode", ask_mode, "eval or train")
        ->check(CLI::IsMember({"eval", "train"}));
    ask->add_option("--answer", ask_answer, "ground-truth answer (train mode)");
    ask->add_option("--client", ask_client, "http (default) or scripted:<file>");
    ask->add_option("--out", ask_out, "output directory for the transcript");

    // eval
    auto* eval = app.add_subcommand("eval", "Score a question file (eval mode)");
    std::string eval_questions, eval_scene_dir, eval_client, eval_out;
    int eval_jobs = 1;
    bool eval_strict = false;
    eval->add_option("--questions", eval_questions, "question JSONL file")->required();
    eval->add_option("--scene-dir", eval_scene_dir, "directory of scene files")
        ->required();
    eval->add_option("--jobs", eval_jobs, "parallel episodes");
    eval->add_flag("--strict", eval_strict, "count scene failures as incorrect");
    eval->add_option("--client", eval_client, "http (default) or scripted:<file>");
    eval->add_option("--out", eval_out, "output directory");

    // collect
    auto* collect = app.add_subcommand("collect", "Collect train-mode trajectories");
    std::string collect_questions, collect_scene_dir, collect_client, collect_out;
    int collect_jobs = 1;
    collect->add_option("--questions", collect_questions, "question JSONL file")
        ->required();
    collect->add_option("--scene-dir", collect_scene_dir, "directory of scene files")
        ->required();
    collect->add_option("--jobs", collect_jobs, "parallel episodes");
    collect->add_option("--client", collect_client, "http (default) or scripted:<file>");
    collect->add_option("--out", collect_out, "output directory");

    // build-sft / build-dpo
    auto* build_sft = app.add_subcommand("build-sft", "Extract SFT samples");
    auto* build_dpo = app.add_subcommand("build-dpo", "Extract DPO pairs");
    std::string bs_transcripts, bs_results, bs_out, bs_scene_dir, bs_questions;
    bool bs_verify = false;
    std::string bd_transcripts, bd_results, bd_out, bd_scene_dir, bd_questions;
    bool bd_verify = false;
    build_sft->add_option("--transcripts", bs_transcripts, "transcripts JSONL")
        ->required();
    build_sft->add_option("--results", bs_results, "results JSONL")->required();
    build_sft->add_option("--out", bs_out, "output JSONL path");
    build_sft->add_flag("--verify", bs_verify, "re-execute every sample");
    build_sft->add_option("--scene-dir", bs_scene_dir, "scene directory (for --verify)");
    build_sft->add_option("--questions", bs_questions, "question JSONL (for --verify)");
    build_dpo->add_option("--transcripts", bd_transcripts, "transcripts JSONL")
        ->required();
    build_dpo->add_option("--results", bd_results, "results JSONL")->required();
    build_dpo->add_option("--out", bd_out, "output JSONL path");
    build_dpo->add_flag("--verify", bd_verify, "re-execute every sample");
    build_dpo->add_option("--scene-dir", bd_scene_dir, "scene directory (for --verify)");
    build_dpo->add_option("--questions", bd_questions, "question JSONL (for --verify)");

    // augment
    auto* augment = app.add_subcommand("augment", "Generate harder questions per pose");
    std::string aug_questions, aug_client, aug_out, aug_provenance, aug_scene_dir;
    int aug_jobs = 1;
    bool aug_verify = false;
    augment->add_option("--questions", aug_questions, "question JSONL file")->required();
    augment->add_option("--client", aug_client, "http (default) or scripted:<file>");
    augment->add_option("--jobs", aug_jobs, "parallel groups");
    augment->add_option("--out", aug_out, "output question JSONL path");
    augment->add_option("--provenance", aug_provenance, "provenance report path");
    augment->add_flag("--verify", aug_verify, "keep only answerable questions");
    augment->add_option("--scene-dir", aug_scene_dir, "scene directory (for --verify)");

    // relations
    auto* relations = app.add_subcommand("relations", "Dump the pairwise relation table");
    std::string rel_scene, rel_out;
    relations->add_option("--scene", rel_scene, "scene JSON file")->required();
    relations->add_option("--out", rel_out, "write the table here instead of stdout");

    // exec
    auto* exec = app.add_subcommand("exec", "Run a program file against a scene");
    std::string exec_scene, exec_program;
    exec->add_option("--scene", exec_scene, "scene JSON file")->required();
    exec->add_option("--program", exec_program, "program source file")->required();

    CLI11_PARSE(app, argc, argv);

    ConfigHandle config;
    if (int rc = load_config(config_path, config)) return rc;

    if (ask->parsed()) {
        SceneHandle scene;
        if (s3d_status s = s3d_scene_load(ask_scene.c_str(), &scene.ptr)) {
            return fail(s, "loading scene");
        }
        ClientHandle client;
        if (int rc = make_client(ask_client, config, client)) return rc;

        nlohmann::json question{{"question_id", "ask"},
                                {"scene_id", ""},
                                {"situation", ask_situation},
                                {"question", ask_question}};
        if (!ask_answer.empty()) question["answer"] = ask_answer;
        bool train = ask_mode == "train";

        char* result_json = nullptr;
        char* transcript = nullptr;
        s3d_status status =
            s3d_episode_run(scene.ptr, config.ptr, client.ptr, question.dump().c_str(),
                            train ? 1 : 0, &result_json, &transcript);
        if (status != S3D_OK && status != S3D_ERR_INFRA) {
            return fail(status, "running episode");
        }
        nlohmann::json result =
            nlohmann::json::parse(take_string(result_json), nullptr, false);
        std::string out_dir = output_dir_of(config, ask_out);
        std::string transcript_path = out_dir + "/transcript_ask.jsonl";
        std::error_code ignored;
        std::filesystem::create_directories(out_dir, ignored);
        write_file_or_exit(transcript_path, take_string(transcript));

        std::cout << "answer: " << result.value("final_answer", "") << "\n"
                  << "rounds_used: " << result.value("rounds_used", 0) << "\n"
                  << "transcript: " << transcript_path << "\n";
        if (result.contains("correct")) {
            std::cout << "correct: " << (result["correct"].get<bool>() ? "true" : "false")
                      << "\n";
        }
        return static_cast<int>(status);
    }

    if (eval->parsed()) {
        ClientHandle client;
        if (int rc = make_client(eval_client, config, client)) return rc;
        std::string out_dir = output_dir_of(config, eval_out);
        char* summary = nullptr;
        s3d_status status = s3d_eval_run(config.ptr, client.ptr, eval_questions.c_str(),
                                         eval_scene_dir.c_str(), out_dir.c_str(),
                                         eval_jobs, eval_strict ? 1 : 0, &summary);
        if (status != S3D_OK) return fail(status, "eval");
        std::cout << take_string(summary) << "\n";
        return 0;
    }

    if (collect->parsed()) {
        ClientHandle client;
        if (int rc = make_client(collect_client, config, client)) return rc;
        std::string out_dir = output_dir_of(config, collect_out);
        char* summary = nullptr;
        s3d_status status =
            s3d_collect_run(config.ptr, client.ptr, collect_questions.c_str(),
                            collect_scene_dir.c_str(), out_dir.c_str(), collect_jobs,
                            &summary);
        if (status != S3D_OK) return fail(status, "collect");
        std::cout << take_string(summary) << "\n";
        return 0;
    }

    if (build_sft->parsed() || build_dpo->parsed()) {
        bool dpo = build_dpo->parsed();
        const std::string& transcripts = dpo ? bd_transcripts : bs_transcripts;
        const std::string& results = dpo ? bd_results : bs_results;
        std::string out = dpo ? bd_out : bs_out;
        if (out.empty()) out = dpo ? "dpo.jsonl" : "sft.jsonl";
        bool verify = dpo ? bd_verify : bs_verify;
        const std::string& scene_dir = dpo ? bd_scene_dir : bs_scene_dir;
        const std::string& questions = dpo ? bd_questions : bs_questions;

        char* summary = nullptr;
        s3d_status status;
        if (dpo) {
            status = s3d_build_dpo(config.ptr, transcripts.c_str(), results.c_str(),
                                   out.c_str(), verify ? 1 : 0,
                                   scene_dir.empty() ? nullptr : scene_dir.c_str(),
                                   questions.empty() ? nullptr : questions.c_str(),
                                   &summary);
        } else {
            status = s3d_build_sft(config.ptr, transcripts.c_str(), results.c_str(),
                                   out.c_str(), verify ? 1 : 0,
                                   scene_dir.empty() ? nullptr : scene_dir.c_str(),
                                   questions.empty() ? nullptr : questions.c_str(),
                                   &summary);
        }
        if (status != S3D_OK) return fail(status, dpo ? "build-dpo" : "build-sft");
        std::cout << take_string(summary) << "\n";
        return 0;
    }

    if (augment->parsed()) {
        ClientHandle client;
        if (int rc = make_client(aug_client, config, client)) return rc;
        std::string out = aug_out.empty() ? "augmented.jsonl" : aug_out;
        char* summary = nullptr;
        s3d_status status = s3d_augment_run(
            config.ptr, client.ptr, aug_questions.c_str(), out.c_str(),
            aug_provenance.empty() ? nullptr : aug_provenance.c_str(), aug_jobs,
            aug_verify ? 1 : 0, aug_scene_dir.empty() ? nullptr : aug_scene_dir.c_str(),
            &summary);
        if (status != S3D_OK) return fail(status, "augment");
        std::cout << take_string(summary) << "\n";
        return 0;
    }

    if (relations->parsed()) {
        SceneHandle scene;
        if (s3d_status s = s3d_scene_load(rel_scene.c_str(), &scene.ptr)) {
            return fail(s, "loading scene");
        }
        char* table = nullptr;
        if (s3d_status s = s3d_relation_table(scene.ptr, config.ptr, &table)) {
            return fail(s, "relation table");
        }
        std::string text = take_string(table);
        if (rel_out.empty()) {
            std::cout << text << "\n";
        } else {
            write_file_or_exit(rel_out, text + "\n");
        }
        return 0;
    }

    if (exec->parsed()) {
        SceneHandle scene;
        if (s3d_status s = s3d_scene_load(exec_scene.c_str(), &scene.ptr)) {
            return fail(s, "loading scene");
        }
        std::string source = read_file_or_exit(exec_program);
        char* feedback = nullptr;
        s3d_status status =
            s3d_program_run(scene.ptr, config.ptr, source.c_str(), &feedback);
        std::cout << take_string(feedback) << "\n";
        return static_cast<int>(status);
    }

    return 0;
}
