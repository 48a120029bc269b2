// Exercises the shared library strictly through the public C header.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <string>

#include <json.hpp>

#include "situ3d/situ3d.h"

#ifndef SITU3D_FIXTURES
#define SITU3D_FIXTURES "fixtures"
#endif

namespace {

std::string fixture(const std::string& rel) {
    return std::string(SITU3D_FIXTURES) + "/" + rel;
}

std::string take(char* s) {
    std::string out = s ? s : "";
    s3d_string_free(s);
    return out;
}

struct Handles {
    s3d_config* config = nullptr;
    s3d_scene* scene = nullptr;
    ~Handles() {
        s3d_config_free(config);
        s3d_scene_free(scene);
    }
};

}  // namespace

TEST_CASE("version and null-argument validation") {
    CHECK(std::string(s3d_version()) == "0.1.0");
    CHECK(s3d_config_create(nullptr) == S3D_ERR_VALIDATION);
    CHECK(std::string(s3d_last_error()).find("NULL") != std::string::npos);
    s3d_scene* scene = nullptr;
    CHECK(s3d_scene_load(nullptr, &scene) == S3D_ERR_VALIDATION);
    CHECK(s3d_scene_object_count(nullptr) == -1);
}

TEST_CASE("config create, parse, dump") {
    Handles h;
    REQUIRE(s3d_config_create(&h.config) == S3D_OK);
    char* dump = nullptr;
    REQUIRE(s3d_config_dump(h.config, &dump) == S3D_OK);
    nlohmann::json doc = nlohmann::json::parse(take(dump));
    CHECK(doc["relations"]["epsilon_m"] == 0.05);
    CHECK(doc["loop"]["max_program_rounds"] == 6);
    CHECK(doc["limits"]["max_steps"] == 100000);

    s3d_config* parsed = nullptr;
    CHECK(s3d_config_parse("{\"relations\": {\"wr_dist_m\": 1.25}}", &parsed) == S3D_OK);
    char* dump2 = nullptr;
    s3d_config_dump(parsed, &dump2);
    CHECK(nlohmann::json::parse(take(dump2))["relations"]["wr_dist_m"] == 1.25);
    s3d_config_free(parsed);

    s3d_config* bad = nullptr;
    CHECK(s3d_config_parse("{\"relations\": {\"min_iou\": 7}}", &bad) ==
          S3D_ERR_VALIDATION);
    CHECK(bad == nullptr);
    CHECK(std::string(s3d_last_error()).find("min_iou") != std::string::npos);
}

TEST_CASE("scene loading and canonical dump through the C API") {
    Handles h;
    REQUIRE(s3d_config_create(&h.config) == S3D_OK);
    std::string path = fixture("scenes/scene_basic.json");
    REQUIRE(s3d_scene_load(path.c_str(), &h.scene) == S3D_OK);
    CHECK(s3d_scene_object_count(h.scene) == 9);

    char* dump = nullptr;
    REQUIRE(s3d_scene_canonical_json(h.scene, &dump) == S3D_OK);
    std::string first = take(dump);
    char* dump2 = nullptr;
    s3d_scene_canonical_json(h.scene, &dump2);
    CHECK(first == take(dump2));

    s3d_scene* missing = nullptr;
    CHECK(s3d_scene_load("/nonexistent.json", &missing) == S3D_ERR_VALIDATION);
    s3d_scene* bad = nullptr;
    CHECK(s3d_scene_parse("{\"scene_id\": 1}", &bad) == S3D_ERR_VALIDATION);
}

TEST_CASE("relation table and program execution") {
    Handles h;
    REQUIRE(s3d_config_create(&h.config) == S3D_OK);
    REQUIRE(s3d_scene_load(fixture("scenes/scene_basic.json").c_str(), &h.scene) == S3D_OK);

    char* table = nullptr;
    REQUIRE(s3d_relation_table(h.scene, h.config, &table) == S3D_OK);
    nlohmann::json doc = nlohmann::json::parse(take(table));
    CHECK(doc["scene_id"] == "scene_basic");
    CHECK(doc["object_relations"].size() == 9 * 8);

    char* feedback = nullptr;
    CHECK(s3d_program_run(h.scene, h.config, "print(len(scene()))", &feedback) == S3D_OK);
    CHECK(take(feedback) == "Observation: 9");

    feedback = nullptr;
    CHECK(s3d_program_run(h.scene, h.config, "print(nope)", &feedback) == S3D_ERR_PROGRAM);
    CHECK(take(feedback) ==
          "Observation: NameError-style: name 'nope' is not defined (line 1)");

    feedback = nullptr;
    CHECK(s3d_program_run(h.scene, h.config, "import os", &feedback) ==
          S3D_ERR_VALIDATION);
    CHECK(take(feedback).find("SyntaxError-style") != std::string::npos);
}

TEST_CASE("scripted client drives an episode through the C API") {
    Handles h;
    REQUIRE(s3d_config_create(&h.config) == S3D_OK);
    REQUIRE(s3d_scene_load(fixture("scenes/scene_basic.json").c_str(), &h.scene) == S3D_OK);

    const char* responses[] = {
        "Thought: count\nAction: Program\nAction Input:\n```python\nobject_set = "
        "scene()\nprint(len(filter(object_set=object_set, category=\"table\")))\n```",
        "Thought: two\nAction: Final Answer\nAction Input: 2",
    };
    s3d_client* client = nullptr;
    REQUIRE(s3d_client_scripted(responses, 2, &client) == S3D_OK);

    nlohmann::json question{{"question_id", "q1"},
                            {"scene_id", "scene_basic"},
                            {"situation", "standing"},
                            {"question", "How many tables?"},
                            {"answer", "two"}};
    char* result_json = nullptr;
    char* transcript = nullptr;
    REQUIRE(s3d_episode_run(h.scene, h.config, client, question.dump().c_str(), 1,
                            &result_json, &transcript) == S3D_OK);
    nlohmann::json result = nlohmann::json::parse(take(result_json));
    CHECK(result["final_answer"] == "2");
    CHECK(result["correct"] == true);
    CHECK(result["rounds_used"] == 2);
    CHECK(result["terminated_by"] == "answer");
    std::string transcript_text = take(transcript);
    CHECK(transcript_text.find("\"role\":\"system\"") != std::string::npos);
    s3d_client_free(client);
}

TEST_CASE("callback client plugs an external completion source") {
    Handles h;
    REQUIRE(s3d_config_create(&h.config) == S3D_OK);
    REQUIRE(s3d_scene_load(fixture("scenes/scene_basic.json").c_str(), &h.scene) == S3D_OK);

    auto complete = [](void*, const char* messages_json, char** response_out) -> int {
        // the payload must be a JSON array of {role, content}
        nlohmann::json messages = nlohmann::json::parse(messages_json, nullptr, false);
        if (messages.is_discarded() || !messages.is_array() || messages.empty()) return 1;
        const char* reply = "Thought: direct\nAction: Final Answer\nAction Input: brown";
        *response_out = strdup(reply);
        return 0;
    };
    s3d_client* client = nullptr;
    REQUIRE(s3d_client_callback(complete, nullptr, &client) == S3D_OK);

    nlohmann::json question{{"question_id", "q"},
                            {"scene_id", "scene_basic"},
                            {"situation", ""},
                            {"question", "What color is the desk?"},
                            {"answer", "brown"}};
    char* result_json = nullptr;
    REQUIRE(s3d_episode_run(h.scene, h.config, client, question.dump().c_str(), 0,
                            &result_json, nullptr) == S3D_OK);
    nlohmann::json result = nlohmann::json::parse(take(result_json));
    CHECK(result["final_answer"] == "brown");
    CHECK(result["correct"] == true);
    s3d_client_free(client);
}

TEST_CASE("exhausted scripted client surfaces an infra error") {
    Handles h;
    REQUIRE(s3d_config_create(&h.config) == S3D_OK);
    REQUIRE(s3d_scene_load(fixture("scenes/scene_basic.json").c_str(), &h.scene) == S3D_OK);
    s3d_client* client = nullptr;
    REQUIRE(s3d_client_scripted(nullptr, 0, &client) == S3D_OK);
    nlohmann::json question{{"question_id", "q"},
                            {"scene_id", "scene_basic"},
                            {"situation", ""},
                            {"question", "anything"}};
    char* result_json = nullptr;
    CHECK(s3d_episode_run(h.scene, h.config, client, question.dump().c_str(), 0,
                          &result_json, nullptr) == S3D_ERR_INFRA);
    nlohmann::json result = nlohmann::json::parse(take(result_json));
    CHECK(result["terminated_by"] == "infra_error");
    s3d_client_free(client);
}

TEST_CASE("loss references through the C API") {
    double out = 0.0;
    double logps[] = {-0.5};
    REQUIRE(s3d_sft_loss(logps, 1, &out) == S3D_OK);
    CHECK(out == doctest::Approx(0.5));
    CHECK(s3d_sft_loss(nullptr, 0, &out) == S3D_ERR_VALIDATION);

    double chosen[] = {-1.0, -2.0};
    double rejected[] = {-3.0};
    REQUIRE(s3d_dpo_loss(chosen, chosen, 2, rejected, rejected, 1, 0.1, &out) == S3D_OK);
    CHECK(out == doctest::Approx(std::log(2.0)));
}

TEST_CASE("metrics report through the C API") {
    std::string rows =
        R"({"question_id":"a","correct":true,"rounds_used":1,"terminated_by":"answer"})"
        "\n"
        R"({"question_id":"b","correct":false,"rounds_used":2,"terminated_by":"answer"})"
        "\n";
    char* report = nullptr;
    REQUIRE(s3d_metrics_report(rows.c_str(), 0, &report) == S3D_OK);
    nlohmann::json doc = nlohmann::json::parse(take(report));
    CHECK(doc["accuracy"] == 0.5);
    CHECK(doc["round_distribution"]["1"] == 1.0);
}
