#include "augment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

#include "errors.hpp"
#include "prompts.hpp"

namespace situ3d {

namespace {

std::string fixed4(std::int64_t units) {
    double v = static_cast<double>(units) / 10000.0;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

std::string trim(const std::string& s) {
    size_t begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    size_t end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

// Pulls the payload out of a fenced ``` block when one is present.
std::string strip_fences(const std::string& text) {
    std::string t = trim(text);
    size_t fence = t.find("```");
    if (fence == std::string::npos) return t;
    size_t body_start = t.find('\n', fence);
    if (body_start == std::string::npos) return t;
    ++body_start;
    size_t fence_end = t.find("```", body_start);
    if (fence_end == std::string::npos) return trim(t.substr(body_start));
    return trim(t.substr(body_start, fence_end - body_start));
}

int normalized_word_count(const std::string& answer) {
    std::istringstream ss(normalize_answer(answer));
    std::string word;
    int count = 0;
    while (ss >> word) ++count;
    return count;
}

}  // namespace

std::string PositionKey::to_string() const {
    std::ostringstream out;
    out << scene_id << "@" << fixed4(xyz[0]) << "," << fixed4(xyz[1]) << ","
        << fixed4(xyz[2]) << "|" << fixed4(quat[0]) << "," << fixed4(quat[1]) << ","
        << fixed4(quat[2]) << "," << fixed4(quat[3]);
    return out.str();
}

PositionKey PositionKey::from(const std::string& scene_id, const Vec3& position,
                              const Quaternion& rotation) {
    Quaternion q = rotation.canonical();
    auto round4 = [](double v) { return std::llround(v * 10000.0); };
    PositionKey key;
    key.scene_id = scene_id;
    key.xyz = {round4(position.x), round4(position.y), round4(position.z)};
    key.quat = {round4(q.x), round4(q.y), round4(q.z), round4(q.w)};
    return key;
}

int augment_question_count(std::size_t pair_count) {
    if (pair_count <= 1) return 1;
    return static_cast<int>((pair_count + 1) / 2);
}

std::map<PositionKey, std::vector<QuestionRecord>> group_by_position(
    const std::vector<QuestionRecord>& records, std::vector<std::string>* skipped) {
    std::map<PositionKey, std::vector<QuestionRecord>> groups;
    for (const QuestionRecord& record : records) {
        if (!record.position) {
            if (skipped) skipped->push_back(record.question_id + ": missing pose");
            continue;
        }
        PositionKey key = PositionKey::from(record.scene_id, record.position->position,
                                            record.position->rotation);
        groups[key].push_back(record);
    }
    for (auto& [key, members] : groups) {
        std::sort(members.begin(), members.end(),
                  [](const QuestionRecord& a, const QuestionRecord& b) {
                      return a.question_id < b.question_id;
                  });
    }
    return groups;
}

std::string build_augment_prompt(const AugmentRequest& request) {
    std::string previous;
    for (size_t i = 0; i < request.pairs.size(); ++i) {
        if (i) previous += '\n';
        previous += "Q: " + request.pairs[i].first + " A: " + request.pairs[i].second;
    }
    return prompts::augment_prompt(request.situation, previous, request.num_questions);
}

GeneratedParse parse_generated(const std::string& text) {
    GeneratedParse out;
    std::string payload = strip_fences(text);
    nlohmann::json doc = nlohmann::json::parse(payload, nullptr, false);
    if (doc.is_discarded()) {
        out.whole_response_rejected = true;
        out.rejection_reason = "response is not valid JSON";
        return out;
    }
    if (!doc.is_array()) {
        out.whole_response_rejected = true;
        out.rejection_reason = "top-level JSON value is not an array";
        return out;
    }
    int index = 0;
    for (const nlohmann::json& entry : doc) {
        std::string where = "entry " + std::to_string(index++);
        if (!entry.is_object()) {
            out.rejections.push_back(where + ": not an object");
            continue;
        }
        if (!entry.contains("question") || !entry.contains("answer")) {
            out.rejections.push_back(where + ": missing question/answer key");
            continue;
        }
        if (entry.size() != 2) {
            out.rejections.push_back(where + ": unexpected extra keys");
            continue;
        }
        if (!entry["question"].is_string() || !entry["answer"].is_string()) {
            out.rejections.push_back(where + ": question/answer must be strings");
            continue;
        }
        std::string question = entry["question"].get<std::string>();
        std::string answer = entry["answer"].get<std::string>();
        if (trim(question).empty() || trim(answer).empty()) {
            out.rejections.push_back(where + ": empty question or answer");
            continue;
        }
        if (normalized_word_count(answer) > 3) {
            out.rejections.push_back(where + ": answer longer than 3 words");
            continue;
        }
        out.accepted.emplace_back(question, answer);
    }
    return out;
}

AugmentOutput augment_dataset(const std::vector<QuestionRecord>& records,
                              LlmClient& client, const GlobalConfig& config, int jobs) {
    (void)config;
    std::vector<std::string> skipped;
    std::map<PositionKey, std::vector<QuestionRecord>> groups =
        group_by_position(records, &skipped);

    struct GroupWork {
        PositionKey key;
        const std::vector<QuestionRecord>* members;
        std::string prompt;
        GeneratedParse parsed;
        bool infra_failed = false;
        std::string failure;
        bool skipped_empty = false;
    };
    std::vector<GroupWork> work;
    for (const auto& [key, members] : groups) {
        GroupWork item;
        item.key = key;
        item.members = &members;
        AugmentRequest request;
        request.situation = members.front().situation;
        for (const QuestionRecord& record : members) {
            if (record.answer) request.pairs.emplace_back(record.question, *record.answer);
        }
        if (request.pairs.empty()) {
            item.skipped_empty = true;
        } else {
            request.num_questions = augment_question_count(request.pairs.size());
            item.prompt = build_augment_prompt(request);
        }
        work.push_back(std::move(item));
    }

    auto run_one = [&](GroupWork& item) {
        if (item.skipped_empty) return;
        try {
            std::string response =
                client.complete({ChatMessage{"user", item.prompt}});
            item.parsed = parse_generated(response);
        } catch (const Error& e) {
            item.infra_failed = true;
            item.failure = e.what();
        }
    };

    int workers = client.thread_safe() ? std::max(1, jobs) : 1;
    if (workers <= 1 || work.size() <= 1) {
        for (GroupWork& item : work) run_one(item);
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> threads;
        size_t count = std::min<size_t>(static_cast<size_t>(workers), work.size());
        threads.reserve(count);
        for (size_t i = 0; i < count; ++i) {
            threads.emplace_back([&]() {
                while (true) {
                    size_t idx = next.fetch_add(1);
                    if (idx >= work.size()) return;
                    run_one(work[idx]);
                }
            });
        }
        for (std::thread& t : threads) t.join();
    }

    AugmentOutput out;
    out.provenance = nlohmann::json::object();
    int counter = 0;
    int rejected_entries = 0;
    int rejected_responses = 0;
    int failed_groups = 0;
    int empty_groups = 0;
    nlohmann::json failures = nlohmann::json::array();

    for (const GroupWork& item : work) {
        if (item.skipped_empty) {
            ++empty_groups;
            continue;
        }
        if (item.infra_failed) {
            ++failed_groups;
            failures.push_back(
                {{"group", item.key.to_string()}, {"error", item.failure}});
            continue;
        }
        if (item.parsed.whole_response_rejected) {
            ++rejected_responses;
            failures.push_back({{"group", item.key.to_string()},
                                {"error", item.parsed.rejection_reason}});
            continue;
        }
        rejected_entries += static_cast<int>(item.parsed.rejections.size());

        nlohmann::json source_ids = nlohmann::json::array();
        for (const QuestionRecord& record : *item.members) {
            source_ids.push_back(record.question_id);
        }
        for (const auto& [question, answer] : item.parsed.accepted) {
            char id[32];
            std::snprintf(id, sizeof id, "aug:%06d", ++counter);
            QuestionRecord record;
            record.question_id = id;
            record.scene_id = item.members->front().scene_id;
            record.situation = item.members->front().situation;
            record.question = question;
            record.answer = answer;
            record.position = item.members->front().position;
            out.records.push_back(std::move(record));
            out.provenance[id] = {{"source_group", item.key.to_string()},
                                  {"source_questions", source_ids}};
        }
    }

    out.report = {{"groups", static_cast<int>(groups.size())},
                  {"generated", static_cast<int>(out.records.size())},
                  {"rejected_entries", rejected_entries},
                  {"rejected_responses", rejected_responses},
                  {"failed_groups", failed_groups},
                  {"empty_groups", empty_groups},
                  {"skipped_records", skipped},
                  {"failures", failures}};
    return out;
}

}  // namespace situ3d
