#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "weaver/llm.hpp"

#include "weaver/error.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>
#include <thread>

namespace weaver {

void validate(const LlmConfig& config) {
    if (!(config.timeout_s > 0)) throw ConfigError("llm.timeout_s must be positive");
    if (config.token_budget < 0) throw ConfigError("llm.token_budget must not be negative");
    if (config.max_retries < 0) throw ConfigError("llm.max_retries must not be negative");
    if (config.max_tokens <= 0) throw ConfigError("llm.max_tokens must be positive");
    if (config.max_inflight <= 0) throw ConfigError("llm.max_inflight must be positive");
    if (config.price_in_per_1k < 0 || config.price_out_per_1k < 0) throw ConfigError("llm prices must not be negative");
}

double cost(std::int64_t tokens_in, std::int64_t tokens_out, const LlmConfig& config) {
    return static_cast<double>(tokens_in) / 1000.0 * config.price_in_per_1k +
           static_cast<double>(tokens_out) / 1000.0 * config.price_out_per_1k;
}

std::int64_t estimate_tokens(const std::string& text) {
    return static_cast<std::int64_t>((text.size() + 3) / 4);
}

std::int64_t estimate_tokens(const Messages& messages) {
    std::int64_t total = 0;
    for (const auto& m : messages) total += estimate_tokens(m.content);
    return total;
}

LlmClient::LlmClient(LlmConfig config) : config_(std::move(config)), budget_(config_.token_budget) {
    validate(config_);
}

Completion LlmClient::complete(const Messages& messages) {
    if (budget_.exhausted()) {
        throw BudgetExhausted("token budget of " + std::to_string(budget_.limit()) + " exhausted");
    }
    {
        std::unique_lock lock(gate_mutex_);
        gate_cv_.wait(lock, [&] { return inflight_ < config_.max_inflight; });
        ++inflight_;
    }
    struct Release {
        LlmClient& self;
        ~Release() {
            {
                std::lock_guard lock(self.gate_mutex_);
                --self.inflight_;
            }
            self.gate_cv_.notify_one();
        }
    } release{*this};
    Completion c = send(messages);
    budget_.charge(c.tokens_in + c.tokens_out);
    calls_.fetch_add(1);
    return c;
}

namespace {

struct Endpoint {
    std::string origin;  // scheme://host[:port]
    std::string path;    // request path
};

Endpoint parse_base_url(const std::string& url) {
    static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(url, m, re)) throw ConfigError("invalid llm.base_url: " + url);
    std::string prefix = m[2].str();
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return Endpoint{m[1].str(), prefix + "/chat/completions"};
}

}  // namespace

HttpLlmClient::HttpLlmClient(LlmConfig config) : LlmClient(std::move(config)) { parse_base_url(this->config().base_url); }

Completion HttpLlmClient::send(const Messages& messages) {
    const auto& cfg = config();
    auto endpoint = parse_base_url(cfg.base_url);

    nlohmann::json body{{"model", cfg.model},
                        {"temperature", cfg.temperature},
                        {"max_tokens", cfg.max_tokens},
                        {"messages", nlohmann::json::array()}};
    for (const auto& m : messages) body["messages"].push_back({{"role", m.role}, {"content", m.content}});
    const std::string payload = body.dump();

    httplib::Headers headers;
    if (const char* key = std::getenv("WEAVER_API_KEY"); key != nullptr && *key != '\0') {
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    httplib::Client client(endpoint.origin);
    auto timeout = std::chrono::duration<double>(cfg.timeout_s);
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));

    std::string last_error;
    double backoff = cfg.retry_backoff_s;
    for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
            backoff *= 2;
        }
        auto res = client.Post(endpoint.path, headers, payload, "application/json");
        if (!res) {
            last_error = httplib::to_string(res.error());
            continue;
        }
        if (res->status < 200 || res->status >= 300) throw EndpointError(res->status, res->body);
        try {
            auto reply = nlohmann::json::parse(res->body);
            Completion c;
            c.text = reply.at("choices").at(0).at("message").at("content").get<std::string>();
            if (reply.contains("usage") && reply["usage"].is_object()) {
                c.tokens_in = reply["usage"].value("prompt_tokens", std::int64_t{0});
                c.tokens_out = reply["usage"].value("completion_tokens", std::int64_t{0});
            } else {
                c.tokens_in = estimate_tokens(messages);
                c.tokens_out = estimate_tokens(c.text);
            }
            return c;
        } catch (const nlohmann::json::exception& e) {
            throw EndpointError(res->status, std::string("malformed reply: ") + e.what());
        }
    }
    throw TransportError("request to " + endpoint.origin + endpoint.path + " failed after " +
                         std::to_string(cfg.max_retries + 1) + " attempts: " + last_error);
}

ScriptedLlmClient::ScriptedLlmClient(LlmConfig config, std::vector<std::string> responses, std::size_t start)
    : LlmClient(std::move(config)), responses_(std::move(responses)), next_(start) {}

std::vector<std::string> ScriptedLlmClient::load_transcript(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read transcript " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        auto doc = nlohmann::json::parse(ss.str());
        return doc.get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("transcript " + path.string() + " is not an array of strings: " + e.what());
    }
}

std::size_t ScriptedLlmClient::position() const {
    std::lock_guard lock(mutex_);
    return next_;
}

std::vector<Messages> ScriptedLlmClient::requests() const {
    std::lock_guard lock(mutex_);
    return requests_;
}

Completion ScriptedLlmClient::send(const Messages& messages) {
    std::lock_guard lock(mutex_);
    requests_.push_back(messages);
    if (next_ >= responses_.size()) {
        throw EndpointError(410, "transcript exhausted after " + std::to_string(responses_.size()) + " responses");
    }
    Completion c;
    c.text = responses_[next_++];
    c.tokens_in = estimate_tokens(messages);
    c.tokens_out = estimate_tokens(c.text);
    return c;
}

}  // namespace weaver
