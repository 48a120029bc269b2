#include "llm_client.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "errors.hpp"

namespace situ3d {

namespace {

struct ParsedUrl {
    std::string host_port;  // scheme://host:port for httplib
    std::string path;
};

ParsedUrl split_url(const std::string& url) {
    size_t scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw ConfigError("llm.endpoint must be a full URL, got '" + url + "'");
    }
    size_t path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

void ClientConfig::validate() const {
    if (max_retries < 0) throw ConfigError("llm.max_retries must be >= 0");
    if (!(timeout_s > 0.0)) throw ConfigError("llm.timeout_s must be > 0");
    if (backoff_base_s < 0.0) throw ConfigError("llm.backoff_base_s must be >= 0");
}

ClientConfig ClientConfig::from_json(const nlohmann::json& block) {
    ClientConfig cfg;
    if (!block.is_object()) throw ConfigError("llm block must be an object");
    if (block.contains("endpoint")) cfg.endpoint = block["endpoint"].get<std::string>();
    if (block.contains("model")) cfg.model = block["model"].get<std::string>();
    if (block.contains("temperature")) cfg.temperature = block["temperature"].get<double>();
    if (block.contains("timeout_s")) cfg.timeout_s = block["timeout_s"].get<double>();
    if (block.contains("max_retries")) cfg.max_retries = block["max_retries"].get<int>();
    if (block.contains("backoff_base_s")) {
        cfg.backoff_base_s = block["backoff_base_s"].get<double>();
    }
    if (block.contains("debug_log")) cfg.debug_log = block["debug_log"].get<bool>();
    cfg.validate();
    return cfg;
}

nlohmann::json ClientConfig::to_json() const {
    return {{"endpoint", endpoint},       {"model", model},
            {"temperature", temperature}, {"timeout_s", timeout_s},
            {"max_retries", max_retries}, {"backoff_base_s", backoff_base_s},
            {"debug_log", debug_log}};
}

std::string ScriptedClient::complete(const std::vector<ChatMessage>& messages) {
    prompts_seen_.push_back(messages);
    if (next_ >= responses_.size()) {
        throw InfraError("scripted client exhausted after " +
                         std::to_string(responses_.size()) + " responses");
    }
    return responses_[next_++];
}

HttpClient::HttpClient(ClientConfig config, SleepFn sleep)
    : config_(std::move(config)), sleep_(std::move(sleep)) {
    config_.validate();
    if (!sleep_) {
        sleep_ = [](double seconds) {
            std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
        };
    }
}

std::string HttpClient::complete(const std::vector<ChatMessage>& messages) {
    ParsedUrl url = split_url(config_.endpoint);
    nlohmann::json body{{"model", config_.model},
                        {"messages", messages_to_json(messages)},
                        {"temperature", config_.temperature}};
    std::string payload = body.dump();

    if (config_.debug_log) {
        std::fprintf(stderr, "[llm] POST %s auth=%s body=%s\n", config_.endpoint.c_str(),
                     config_.api_key.empty() ? "none" : "Bearer <redacted>",
                     payload.c_str());
    }

    std::string last_failure = "no attempt made";
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            sleep_(config_.backoff_base_s * static_cast<double>(1 << (attempt - 1)));
        }
        httplib::Client http(url.host_port);
        http.set_connection_timeout(std::chrono::duration<double>(config_.timeout_s));
        http.set_read_timeout(std::chrono::duration<double>(config_.timeout_s));
        httplib::Headers headers;
        if (!config_.api_key.empty()) {
            headers.emplace("Authorization", "Bearer " + config_.api_key);
        }
        requests_made_.fetch_add(1);
        httplib::Result res = http.Post(url.path, headers, payload, "application/json");

        if (!res) {
            last_failure = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 500) {
            last_failure = "server returned status " + std::to_string(res->status);
            continue;
        }
        if (res->status >= 400) {
            throw ConfigError("llm endpoint rejected the request with status " +
                              std::to_string(res->status) + ": " + res->body);
        }
        nlohmann::json doc = nlohmann::json::parse(res->body, nullptr, false);
        if (doc.is_discarded() || !doc.contains("choices") || !doc["choices"].is_array() ||
            doc["choices"].empty() || !doc["choices"][0].contains("message") ||
            !doc["choices"][0]["message"].contains("content")) {
            throw InfraError("malformed completion response: " + res->body);
        }
        std::string content = doc["choices"][0]["message"]["content"].get<std::string>();
        if (config_.debug_log) {
            std::fprintf(stderr, "[llm] response: %s\n", content.c_str());
        }
        return content;
    }
    throw InfraError("llm request failed after " + std::to_string(config_.max_retries + 1) +
                     " attempts; last failure: " + last_failure);
}

LlmClient& MapScriptedSource::client_for(const std::string& question_id) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = clients_.find(question_id);
    if (it != clients_.end()) return *it->second;
    std::vector<std::string> responses;
    auto rit = responses_.find(question_id);
    if (rit != responses_.end()) responses = rit->second;
    auto client = std::make_unique<ScriptedClient>(std::move(responses));
    ScriptedClient& ref = *client;
    clients_[question_id] = std::move(client);
    return ref;
}

std::unique_ptr<ClientSource> scripted_source_from_json(const nlohmann::json& doc) {
    if (doc.is_array()) {
        std::vector<std::string> responses;
        for (const nlohmann::json& item : doc) {
            if (!item.is_string()) {
                throw ConfigError("scripted responses array must contain only strings");
            }
            responses.push_back(item.get<std::string>());
        }
        return std::make_unique<SingleClientSource>(
            std::make_shared<ScriptedClient>(std::move(responses)));
    }
    if (doc.is_object()) {
        std::map<std::string, std::vector<std::string>> by_question;
        for (auto it = doc.begin(); it != doc.end(); ++it) {
            if (!it.value().is_array()) {
                throw ConfigError("scripted responses for '" + it.key() +
                                  "' must be an array of strings");
            }
            std::vector<std::string> responses;
            for (const nlohmann::json& item : it.value()) {
                if (!item.is_string()) {
                    throw ConfigError("scripted responses for '" + it.key() +
                                      "' must be an array of strings");
                }
                responses.push_back(item.get<std::string>());
            }
            by_question[it.key()] = std::move(responses);
        }
        return std::make_unique<MapScriptedSource>(std::move(by_question));
    }
    throw ConfigError("scripted responses file must hold a JSON array or object");
}

std::unique_ptr<ClientSource> scripted_source_from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open scripted responses file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    nlohmann::json doc = nlohmann::json::parse(ss.str(), nullptr, false);
    if (doc.is_discarded()) {
        throw ConfigError("scripted responses file is not valid JSON: " + path);
    }
    return scripted_source_from_json(doc);
}

nlohmann::json messages_to_json(const std::vector<ChatMessage>& messages) {
    nlohmann::json out = nlohmann::json::array();
    for (const ChatMessage& m : messages) {
        out.push_back({{"role", m.role}, {"content", m.content}});
    }
    return out;
}

std::vector<ChatMessage> messages_from_json(const nlohmann::json& doc) {
    std::vector<ChatMessage> out;
    for (const nlohmann::json& m : doc) {
        out.push_back({m.at("role").get<std::string>(), m.at("content").get<std::string>()});
    }
    return out;
}

}  // namespace situ3d
