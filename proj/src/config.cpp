#include "config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "errors.hpp"
#include "prompts.hpp"

namespace situ3d {

void LoopConfig::validate() const {
    if (max_program_rounds < 1) throw ConfigError("loop.max_program_rounds must be >= 1");
    if (max_outer_rounds < 1) throw ConfigError("loop.max_outer_rounds must be >= 1");
}

LoopConfig LoopConfig::from_json(const nlohmann::json& block) {
    LoopConfig cfg;
    if (!block.is_object()) throw ConfigError("loop block must be an object");
    if (block.contains("max_program_rounds")) {
        cfg.max_program_rounds = block["max_program_rounds"].get<int>();
    }
    if (block.contains("max_outer_rounds")) {
        cfg.max_outer_rounds = block["max_outer_rounds"].get<int>();
    }
    if (block.contains("mode")) {
        std::string mode = block["mode"].get<std::string>();
        if (mode == "train") {
            cfg.mode = LoopMode::train;
        } else if (mode == "eval") {
            cfg.mode = LoopMode::eval;
        } else {
            throw ConfigError("loop.mode must be 'train' or 'eval'");
        }
    }
    if (block.contains("retry_message")) {
        cfg.retry_message = block["retry_message"].get<std::string>();
    }
    cfg.validate();
    return cfg;
}

nlohmann::json LoopConfig::to_json() const {
    return {{"max_program_rounds", max_program_rounds},
            {"max_outer_rounds", max_outer_rounds},
            {"mode", mode == LoopMode::train ? "train" : "eval"},
            {"retry_message", retry_message}};
}

GlobalConfig GlobalConfig::defaults() {
    return GlobalConfig{};
}

GlobalConfig GlobalConfig::from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ConfigError("config: top level must be an object");
    GlobalConfig cfg;
    if (doc.contains("relations")) {
        cfg.relations = RelationConfig::from_json(doc["relations"]);
    }
    if (doc.contains("loop")) cfg.loop = LoopConfig::from_json(doc["loop"]);
    if (doc.contains("llm")) cfg.llm = ClientConfig::from_json(doc["llm"]);
    if (doc.contains("limits")) cfg.limits = interp::EvalLimits::from_json(doc["limits"]);
    if (doc.contains("api")) {
        const nlohmann::json& block = doc["api"];
        if (!block.is_object()) throw ConfigError("api block must be an object");
        if (block.contains("synonyms_enabled")) {
            cfg.api.synonyms_enabled = block["synonyms_enabled"].get<bool>();
        }
        if (block.contains("synonyms")) {
            for (auto it = block["synonyms"].begin(); it != block["synonyms"].end(); ++it) {
                std::vector<std::string> values;
                for (const nlohmann::json& v : it.value()) {
                    values.push_back(v.get<std::string>());
                }
                cfg.api.synonyms[it.key()] = std::move(values);
            }
        }
    }
    if (doc.contains("paths")) {
        const nlohmann::json& block = doc["paths"];
        if (block.contains("scene_dir")) {
            cfg.paths.scene_dir = block["scene_dir"].get<std::string>();
        }
        if (block.contains("output_dir")) {
            cfg.paths.output_dir = block["output_dir"].get<std::string>();
        }
    }
    return cfg;
}

GlobalConfig GlobalConfig::load_file(const std::string& path) {
    GlobalConfig cfg;
    if (!path.empty()) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw ConfigError("cannot open config file: " + path);
        std::ostringstream ss;
        ss << in.rdbuf();
        nlohmann::json doc = nlohmann::json::parse(ss.str(), nullptr, false);
        if (doc.is_discarded()) throw ConfigError("config file is not valid JSON: " + path);
        cfg = from_json(doc);
    }
    if (const char* endpoint = std::getenv("SITU3D_ENDPOINT")) {
        cfg.llm.endpoint = endpoint;
    }
    if (const char* key = std::getenv("SITU3D_API_KEY")) {
        cfg.llm.api_key = key;
    }
    if (const char* model = std::getenv("SITU3D_MODEL")) {
        cfg.llm.model = model;
    }
    return cfg;
}

nlohmann::json GlobalConfig::to_json() const {
    nlohmann::json synonyms = nlohmann::json::object();
    for (const auto& [key, values] : api.synonyms) synonyms[key] = values;
    return {{"relations", relations.to_json()},
            {"loop", loop.to_json()},
            {"llm", llm.to_json()},
            {"limits", limits.to_json()},
            {"api", {{"synonyms_enabled", api.synonyms_enabled}, {"synonyms", synonyms}}},
            {"paths", {{"scene_dir", paths.scene_dir}, {"output_dir", paths.output_dir}}}};
}

std::string GlobalConfig::retry_message_text() const {
    return loop.retry_message.empty() ? prompts::default_retry_message()
                                      : loop.retry_message;
}

}  // namespace situ3d
