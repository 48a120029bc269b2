#include "batch.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <map>
#include <mutex>
#include <thread>

#include "ioutil.hpp"
#include "scene.hpp"

namespace situ3d {

namespace {

std::string scene_path(const std::string& scene_dir, const std::string& scene_id) {
    return (std::filesystem::path(scene_dir) / (scene_id + ".json")).string();
}

// Scenes are immutable; one load per scene id is shared by every episode.
class SceneCache {
  public:
    explicit SceneCache(std::string dir) : dir_(std::move(dir)) {}

    const Scene* get(const std::string& scene_id, std::string* error) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = scenes_.find(scene_id);
        if (it != scenes_.end()) return it->second.scene.get();
        Entry entry;
        try {
            entry.scene = std::make_unique<Scene>(load_scene_file(scene_path(dir_, scene_id)));
        } catch (const Error& e) {
            entry.error = e.what();
        }
        auto [pos, inserted] = scenes_.emplace(scene_id, std::move(entry));
        (void)inserted;
        if (!pos->second.scene && error) *error = pos->second.error;
        return pos->second.scene.get();
    }

  private:
    struct Entry {
        std::unique_ptr<Scene> scene;
        std::string error;
    };
    std::string dir_;
    std::map<std::string, Entry> scenes_;
    std::mutex mutex_;
};

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory '" + dir + "': " + ec.message());
}

std::vector<ResultRow> rows_for_metrics(const std::vector<ResultRow>& rows, bool strict) {
    std::vector<ResultRow> out;
    for (const ResultRow& row : rows) {
        if (row.errored) {
            if (strict) {
                ResultRow copy = row;
                copy.correct = false;
                out.push_back(std::move(copy));
            }
            continue;
        }
        out.push_back(row);
    }
    return out;
}

std::string rows_to_jsonl(const std::vector<ResultRow>& rows) {
    std::string out;
    for (const ResultRow& row : rows) {
        out += row.to_json().dump();
        out += '\n';
    }
    return out;
}

std::map<std::string, ResultRow> load_results(const std::string& path) {
    std::map<std::string, ResultRow> out;
    for (const std::string& line : nonempty_lines(read_file(path))) {
        nlohmann::json doc = nlohmann::json::parse(line, nullptr, false);
        if (doc.is_discarded()) throw LoadError("results file has an invalid JSON line");
        ResultRow row = ResultRow::from_json(doc);
        out[row.question_id] = row;
    }
    return out;
}

}  // namespace

std::vector<QuestionRecord> load_questions(const std::string& path) {
    std::vector<QuestionRecord> out;
    std::vector<std::string> lines = nonempty_lines(read_file(path));
    int line_no = 0;
    for (const std::string& line : lines) {
        ++line_no;
        nlohmann::json doc = nlohmann::json::parse(line, nullptr, false);
        if (doc.is_discarded()) {
            throw LoadError(path + ": line " + std::to_string(line_no) +
                            " is not valid JSON");
        }
        try {
            out.push_back(QuestionRecord::from_json(doc));
        } catch (const nlohmann::json::exception& e) {
            throw LoadError(path + ": line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (out.empty()) throw ConfigError(path + ": question file is empty");
    return out;
}

BatchOutcome run_batch(const std::vector<QuestionRecord>& questions,
                       const std::string& scene_dir, const GlobalConfig& config,
                       ClientSource& clients, LoopMode mode, int jobs) {
    if (mode == LoopMode::eval) {
        for (const QuestionRecord& q : questions) {
            if (!q.answer) {
                throw ConfigError("eval requires an answer for every question; '" +
                                  q.question_id + "' has none");
            }
        }
    }

    GlobalConfig episode_config = config;
    episode_config.loop.mode = mode;

    SceneCache scenes(scene_dir);
    struct Slot {
        ResultRow row;
        std::string transcript;
    };
    std::vector<Slot> slots(questions.size());

    auto run_one = [&](size_t idx) {
        const QuestionRecord& q = questions[idx];
        Slot& slot = slots[idx];
        slot.row.question_id = q.question_id;
        slot.row.scene_id = q.scene_id;
        std::string scene_error;
        const Scene* scene = scenes.get(q.scene_id, &scene_error);
        if (!scene) {
            slot.row.errored = true;
            slot.row.error = scene_error;
            slot.row.terminated_by = "infra_error";
            return;
        }
        LlmClient& client = clients.client_for(q.question_id);
        EpisodeResult result = run_episode(q, *scene, client, episode_config);
        slot.row.final_answer = result.final_answer;
        slot.row.correct = result.correct;
        slot.row.rounds_used = result.rounds_used;
        slot.row.terminated_by = terminated_name(result.terminated_by);
        slot.transcript = result.transcript.to_jsonl();
    };

    int workers = clients.sequential_only() ? 1 : std::max(1, jobs);
    if (workers <= 1 || questions.size() <= 1) {
        for (size_t i = 0; i < questions.size(); ++i) run_one(i);
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> threads;
        size_t count = std::min<size_t>(static_cast<size_t>(workers), questions.size());
        for (size_t i = 0; i < count; ++i) {
            threads.emplace_back([&]() {
                while (true) {
                    size_t idx = next.fetch_add(1);
                    if (idx >= questions.size()) return;
                    run_one(idx);
                }
            });
        }
        for (std::thread& t : threads) t.join();
    }

    BatchOutcome outcome;
    int correct = 0, errored = 0, infra = 0;
    for (Slot& slot : slots) {
        if (slot.row.errored) ++errored;
        if (slot.row.terminated_by == "infra_error" && !slot.row.errored) ++infra;
        if (slot.row.correct && *slot.row.correct) ++correct;
        outcome.transcripts_jsonl += slot.transcript;
        outcome.rows.push_back(std::move(slot.row));
    }
    outcome.summary = {{"questions", static_cast<int>(questions.size())},
                       {"correct", correct},
                       {"errored", errored},
                       {"infra_errors", infra}};
    return outcome;
}

nlohmann::json collect_run(const std::string& questions_path,
                           const std::string& scene_dir, const GlobalConfig& config,
                           ClientSource& clients, int jobs, const std::string& out_dir) {
    std::vector<QuestionRecord> questions = load_questions(questions_path);
    BatchOutcome outcome =
        run_batch(questions, scene_dir, config, clients, LoopMode::train, jobs);
    ensure_dir(out_dir);
    std::filesystem::path base(out_dir);
    write_file((base / "transcripts.jsonl").string(), outcome.transcripts_jsonl);
    write_file((base / "results.jsonl").string(), rows_to_jsonl(outcome.rows));
    nlohmann::json summary = outcome.summary;
    summary["transcripts"] = (base / "transcripts.jsonl").string();
    summary["results"] = (base / "results.jsonl").string();
    return summary;
}

nlohmann::json eval_run(const std::string& questions_path, const std::string& scene_dir,
                        const GlobalConfig& config, ClientSource& clients, int jobs,
                        bool strict, const std::string& out_dir) {
    std::vector<QuestionRecord> questions = load_questions(questions_path);
    BatchOutcome outcome =
        run_batch(questions, scene_dir, config, clients, LoopMode::eval, jobs);
    ensure_dir(out_dir);
    std::filesystem::path base(out_dir);
    write_file((base / "transcripts.jsonl").string(), outcome.transcripts_jsonl);
    write_file((base / "results.jsonl").string(), rows_to_jsonl(outcome.rows));

    std::vector<ResultRow> scored = rows_for_metrics(outcome.rows, strict);
    nlohmann::json metrics = metrics_report(scored);
    write_file((base / "metrics.json").string(), metrics.dump(2) + "\n");

    nlohmann::json summary = outcome.summary;
    summary["accuracy"] = metrics["accuracy"];
    summary["round_distribution"] = metrics["round_distribution"];
    summary["results"] = (base / "results.jsonl").string();
    summary["metrics"] = (base / "metrics.json").string();
    return summary;
}

namespace {

nlohmann::json build_dataset_run(bool dpo, const std::string& transcripts_path,
                                 const std::string& results_path,
                                 const std::string& out_path, bool verify,
                                 const GlobalConfig& config, const std::string& scene_dir,
                                 const std::string& questions_path) {
    std::vector<Transcript> transcripts =
        Transcript::parse_jsonl(read_file(transcripts_path));
    std::map<std::string, ResultRow> results = load_results(results_path);

    std::map<std::string, QuestionRecord> questions;
    if (!questions_path.empty()) {
        for (QuestionRecord& q : load_questions(questions_path)) {
            questions[q.question_id] = std::move(q);
        }
    }

    SceneCache scenes(scene_dir);
    int verified = 0, failed = 0;
    nlohmann::json failures = nlohmann::json::array();
    std::string payload;
    int count = 0;

    auto scene_for = [&](const std::string& question_id) -> const Scene* {
        auto it = results.find(question_id);
        if (it == results.end() || it->second.scene_id.empty()) return nullptr;
        std::string error;
        return scenes.get(it->second.scene_id, &error);
    };

    std::vector<Transcript> sorted = transcripts;
    std::sort(sorted.begin(), sorted.end(),
              [](const Transcript& a, const Transcript& b) {
                  return a.episode_id < b.episode_id;
              });
    for (const Transcript& t : sorted) {
        auto rit = results.find(t.episode_id);
        if (rit == results.end() || rit->second.errored || !rit->second.correct ||
            !*rit->second.correct) {
            continue;
        }
        auto note_verify = [&](bool ok, const Scene* scene) {
            if (ok) {
                ++verified;
                return;
            }
            ++failed;
            failures.push_back(
                {{"episode", t.episode_id},
                 {"kind", dpo ? "dpo" : "sft"},
                 {"reason", scene ? "verification failed" : "scene unavailable"}});
        };
        if (dpo) {
            for (const DpoSample& sample : extract_dpo(t, true)) {
                payload += sample.to_json().dump();
                payload += '\n';
                ++count;
                if (verify) {
                    const Scene* scene = scene_for(t.episode_id);
                    std::optional<std::string> gt;
                    auto qit = questions.find(t.episode_id);
                    if (qit != questions.end()) gt = qit->second.answer;
                    note_verify(scene && verify_dpo_sample(sample, *scene, config, gt),
                                scene);
                }
            }
        } else {
            for (const SftSample& sample : extract_sft(t, true)) {
                payload += sample.to_json().dump();
                payload += '\n';
                ++count;
                if (verify) {
                    const Scene* scene = scene_for(t.episode_id);
                    note_verify(scene && verify_sft_sample(sample, *scene, config), scene);
                }
            }
        }
    }

    write_file(out_path, payload);
    nlohmann::json summary{{"samples", count}, {"output", out_path}};
    if (verify) {
        summary["verified"] = verified;
        summary["failed_verification"] = failed;
        summary["failures"] = failures;
    }
    return summary;
}

}  // namespace

nlohmann::json build_sft_run(const std::string& transcripts_path,
                             const std::string& results_path,
                             const std::string& out_path, bool verify,
                             const GlobalConfig& config, const std::string& scene_dir,
                             const std::string& questions_path) {
    return build_dataset_run(false, transcripts_path, results_path, out_path, verify,
                             config, scene_dir, questions_path);
}

nlohmann::json build_dpo_run(const std::string& transcripts_path,
                             const std::string& results_path,
                             const std::string& out_path, bool verify,
                             const GlobalConfig& config, const std::string& scene_dir,
                             const std::string& questions_path) {
    return build_dataset_run(true, transcripts_path, results_path, out_path, verify,
                             config, scene_dir, questions_path);
}

nlohmann::json augment_run(const std::string& questions_path, const GlobalConfig& config,
                           ClientSource& clients, int jobs, bool verify,
                           const std::string& scene_dir, const std::string& out_path,
                           const std::string& provenance_path) {
    std::vector<QuestionRecord> questions = load_questions(questions_path);
    LlmClient& client = clients.client_for("augment");
    AugmentOutput output = augment_dataset(questions, client, config, jobs);

    int dropped_unanswerable = 0;
    std::vector<QuestionRecord> kept;
    if (verify) {
        SceneCache scenes(scene_dir);
        GlobalConfig train_config = config;
        train_config.loop.mode = LoopMode::train;
        for (const QuestionRecord& record : output.records) {
            std::string error;
            const Scene* scene = scenes.get(record.scene_id, &error);
            bool answerable = false;
            if (scene) {
                LlmClient& verify_client = clients.client_for(record.question_id);
                EpisodeResult result =
                    run_episode(record, *scene, verify_client, train_config);
                answerable = result.correct && *result.correct;
            }
            if (answerable) {
                kept.push_back(record);
            } else {
                ++dropped_unanswerable;
            }
        }
    } else {
        kept = output.records;
    }

    std::string payload;
    for (const QuestionRecord& record : kept) {
        payload += record.to_json().dump();
        payload += '\n';
    }
    write_file(out_path, payload);
    if (!provenance_path.empty()) {
        write_file(provenance_path, output.provenance.dump(2) + "\n");
    }

    nlohmann::json summary = output.report;
    summary["kept"] = static_cast<int>(kept.size());
    summary["dropped_unanswerable"] = dropped_unanswerable;
    summary["output"] = out_path;
    return summary;
}

nlohmann::json metrics_from_results_text(const std::string& results_jsonl, bool strict) {
    std::vector<ResultRow> rows;
    for (const std::string& line : nonempty_lines(results_jsonl)) {
        nlohmann::json doc = nlohmann::json::parse(line, nullptr, false);
        if (doc.is_discarded()) throw LoadError("results text has an invalid JSON line");
        rows.push_back(ResultRow::from_json(doc));
    }
    return metrics_report(rows_for_metrics(rows, strict));
}

}  // namespace situ3d
