#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>

#include "errors.hpp"
#include "llm_client.hpp"

using namespace situ3d;

namespace {

// Minimal chat-completion stub. Behavior per request index is scripted:
// 'f' = fail with 500, 'b' = bad request 400, 'o' = 200 with fixed content.
class StubServer {
  public:
    explicit StubServer(std::string script) : script_(std::move(script)) {
        server_.Post("/v1/chat/completions",
                     [this](const httplib::Request& req, httplib::Response& res) {
                         int index = hits_.fetch_add(1);
                         {
                             std::lock_guard<std::mutex> lock(mutex_);
                             last_body_ = req.body;
                         }
                         char action = index < static_cast<int>(script_.size())
                                           ? script_[static_cast<size_t>(index)]
                                           : 'o';
                         if (action == 'f') {
                             res.status = 500;
                             res.set_content("boom", "text/plain");
                             return;
                         }
                         if (action == 'b') {
                             res.status = 400;
                             res.set_content("bad request", "text/plain");
                             return;
                         }
                         nlohmann::json body{
                             {"choices",
                              {{{"message",
                                 {{"role", "assistant"}, {"content", "stub says hi"}}}}}}};
                         res.set_content(body.dump(), "application/json");
                     });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this]() { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~StubServer() {
        server_.stop();
        thread_.join();
    }

    int port() const { return port_; }
    int hits() const { return hits_.load(); }
    std::string last_body() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return last_body_;
    }

  private:
    httplib::Server server_;
    std::thread thread_;
    std::string script_;
    std::atomic<int> hits_{0};
    int port_ = 0;
    mutable std::mutex mutex_;
    std::string last_body_;
};

ClientConfig config_for(const StubServer& server) {
    ClientConfig cfg;
    cfg.endpoint =
        "http://127.0.0.1:" + std::to_string(server.port()) + "/v1/chat/completions";
    cfg.model = "test-model";
    cfg.max_retries = 2;
    cfg.backoff_base_s = 0.01;
    cfg.timeout_s = 5.0;
    return cfg;
}

const std::vector<ChatMessage> kMessages{{"system", "sys"}, {"user", "hello"}};

}  // namespace

TEST_CASE("scripted client replays responses and records prompts") {
    ScriptedClient client({"A", "B"});
    CHECK(client.complete(kMessages) == "A");
    CHECK(client.complete({{"user", "again"}}) == "B");
    REQUIRE(client.prompts_seen().size() == 2);
    CHECK(client.prompts_seen()[0][1].content == "hello");
    CHECK(client.prompts_seen()[1][0].content == "again");
    CHECK_THROWS_AS(client.complete(kMessages), InfraError);
    CHECK(client.prompts_seen().size() == 3);  // the failing call is still logged
}

TEST_CASE("http client returns stub content and logs one request") {
    StubServer server("o");
    HttpClient client(config_for(server));
    CHECK(client.complete(kMessages) == "stub says hi");
    CHECK(client.requests_made() == 1);
    CHECK(server.hits() == 1);

    // request body carries model, messages and temperature
    nlohmann::json body = nlohmann::json::parse(server.last_body());
    CHECK(body["model"] == "test-model");
    CHECK(body["temperature"] == 0.0);
    CHECK(body["messages"][1]["content"] == "hello");
}

TEST_CASE("5xx retries with monotonically non-decreasing backoff") {
    StubServer server("ffo");
    std::vector<double> sleeps;
    HttpClient client(config_for(server), [&](double s) { sleeps.push_back(s); });
    CHECK(client.complete(kMessages) == "stub says hi");
    CHECK(server.hits() == 3);
    REQUIRE(sleeps.size() == 2);
    CHECK(sleeps[0] <= sleeps[1]);
}

TEST_CASE("retries are exhausted into an infra error") {
    StubServer server("fffff");
    std::vector<double> sleeps;
    HttpClient client(config_for(server), [&](double s) { sleeps.push_back(s); });
    CHECK_THROWS_AS(client.complete(kMessages), InfraError);
    CHECK(server.hits() == 3);  // initial + max_retries
    CHECK(sleeps.size() == 2);  // never more than max_retries sleeps
}

TEST_CASE("4xx fails immediately as a config error") {
    StubServer server("b");
    HttpClient client(config_for(server));
    CHECK_THROWS_AS(client.complete(kMessages), ConfigError);
    CHECK(server.hits() == 1);
}

TEST_CASE("unreachable endpoint raises infra error after retries") {
    ClientConfig cfg;
    cfg.endpoint = "http://127.0.0.1:9/v1/chat/completions";  // discard port
    cfg.max_retries = 1;
    cfg.backoff_base_s = 0.0;
    cfg.timeout_s = 0.2;
    HttpClient client(cfg, [](double) {});
    CHECK_THROWS_AS(client.complete(kMessages), InfraError);
}

TEST_CASE("scripted source file: array form is a single shared queue") {
    nlohmann::json doc = nlohmann::json::array({"one", "two"});
    std::unique_ptr<ClientSource> source = scripted_source_from_json(doc);
    CHECK(source->sequential_only());
    CHECK(source->client_for("a").complete(kMessages) == "one");
    CHECK(source->client_for("b").complete(kMessages) == "two");
}

TEST_CASE("scripted source file: object form keys by question id") {
    nlohmann::json doc{{"q1", {"r1", "r2"}}, {"q2", {"s1"}}};
    std::unique_ptr<ClientSource> source = scripted_source_from_json(doc);
    CHECK_FALSE(source->sequential_only());
    CHECK(source->client_for("q2").complete(kMessages) == "s1");
    CHECK(source->client_for("q1").complete(kMessages) == "r1");
    CHECK(source->client_for("q1").complete(kMessages) == "r2");
    // unknown ids get an empty queue -> infra error on first call
    CHECK_THROWS_AS(source->client_for("zz").complete(kMessages), InfraError);
}

TEST_CASE("client config validation and env-free json round trip") {
    nlohmann::json block{{"endpoint", "http://x/v1"}, {"temperature", 0.7},
                         {"max_retries", 5}};
    ClientConfig cfg = ClientConfig::from_json(block);
    CHECK(cfg.endpoint == "http://x/v1");
    CHECK(cfg.temperature == 0.7);
    CHECK(cfg.max_retries == 5);
    CHECK(cfg.to_json().contains("endpoint"));
    CHECK_FALSE(cfg.to_json().contains("api_key"));  // never serialized

    nlohmann::json bad{{"max_retries", -1}};
    CHECK_THROWS_AS(ClientConfig::from_json(bad), ConfigError);
}
