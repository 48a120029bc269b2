#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

namespace situ3d {

struct ChatMessage {
    std::string role;  // system | user | assistant
    std::string content;
};

struct ClientConfig {
    std::string endpoint = "http://127.0.0.1:8080/v1/chat/completions";
    std::string model = "default";
    std::string api_key;  // populated from the environment, never from the file
    double temperature = 0.0;
    double timeout_s = 60.0;
    int max_retries = 2;
    double backoff_base_s = 0.5;
    bool debug_log = false;

    void validate() const;
    static ClientConfig from_json(const nlohmann::json& block);
    nlohmann::json to_json() const;  // api_key redacted
};

/// Chat-completion interface. Throws InfraError when transport fails after
/// retries, ConfigError for unusable requests (4xx).
class LlmClient {
  public:
    virtual ~LlmClient() = default;
    virtual std::string complete(const std::vector<ChatMessage>& messages) = 0;
    virtual bool thread_safe() const { return false; }
};

/// Deterministic replay client: returns canned responses in order and records
/// every prompt it was given. Single consumer.
class ScriptedClient : public LlmClient {
  public:
    explicit ScriptedClient(std::vector<std::string> responses)
        : responses_(std::move(responses)) {}

    std::string complete(const std::vector<ChatMessage>& messages) override;

    const std::vector<std::vector<ChatMessage>>& prompts_seen() const {
        return prompts_seen_;
    }
    size_t remaining() const { return responses_.size() - next_; }

  private:
    std::vector<std::string> responses_;
    size_t next_ = 0;
    std::vector<std::vector<ChatMessage>> prompts_seen_;
};

/// POSTs OpenAI-style chat-completion requests. Transient transport failures
/// and 5xx responses retry with exponential backoff; 4xx fails immediately.
class HttpClient : public LlmClient {
  public:
    using SleepFn = std::function<void(double seconds)>;

    explicit HttpClient(ClientConfig config, SleepFn sleep = nullptr);

    std::string complete(const std::vector<ChatMessage>& messages) override;
    bool thread_safe() const override { return true; }

    int requests_made() const { return requests_made_.load(); }

  private:
    ClientConfig config_;
    SleepFn sleep_;
    std::atomic<int> requests_made_{0};
};

/// Adapts an arbitrary completion function (used by the C API callback client).
class CallbackClient : public LlmClient {
  public:
    using CompleteFn = std::function<std::string(const std::vector<ChatMessage>&)>;
    explicit CallbackClient(CompleteFn fn) : fn_(std::move(fn)) {}
    std::string complete(const std::vector<ChatMessage>& messages) override {
        return fn_(messages);
    }

  private:
    CompleteFn fn_;
};

/// Hands out the client an episode should talk to. Batch runners ask per
/// question id so scripted replays can be keyed per question.
class ClientSource {
  public:
    virtual ~ClientSource() = default;
    virtual LlmClient& client_for(const std::string& question_id) = 0;
    /// True when episodes must run one at a time (shared scripted queue).
    virtual bool sequential_only() const { return false; }
};

class SingleClientSource : public ClientSource {
  public:
    explicit SingleClientSource(std::shared_ptr<LlmClient> client)
        : client_(std::move(client)) {}
    LlmClient& client_for(const std::string&) override { return *client_; }
    bool sequential_only() const override { return !client_->thread_safe(); }

  private:
    std::shared_ptr<LlmClient> client_;
};

/// Scripted responses keyed by question id; parallel-safe. Questions without
/// an entry get an empty queue, so their episodes end as infra errors.
class MapScriptedSource : public ClientSource {
  public:
    explicit MapScriptedSource(std::map<std::string, std::vector<std::string>> responses)
        : responses_(std::move(responses)) {}
    LlmClient& client_for(const std::string& question_id) override;

  private:
    std::map<std::string, std::vector<std::string>> responses_;
    std::map<std::string, std::unique_ptr<ScriptedClient>> clients_;
    std::mutex mutex_;
};

/// Parses a scripted-responses file: a JSON array of strings (one shared
/// queue) or an object mapping question ids to arrays of strings.
std::unique_ptr<ClientSource> scripted_source_from_json(const nlohmann::json& doc);
std::unique_ptr<ClientSource> scripted_source_from_file(const std::string& path);

nlohmann::json messages_to_json(const std::vector<ChatMessage>& messages);
std::vector<ChatMessage> messages_from_json(const nlohmann::json& doc);

}  // namespace situ3d
