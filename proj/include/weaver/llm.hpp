#pragma once

#include "weaver/message.hpp"

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <mutex>
#include <string>
#include <vector>

namespace weaver {

struct LlmConfig {
    std::string base_url = "http://localhost:8000/v1";  // the chat-completions path is appended
    std::string model = "deepseek-chat";
    double temperature = 0.0;
    int max_tokens = 2048;
    double timeout_s = 120.0;
    int max_retries = 3;          // transport retries after the first attempt
    double retry_backoff_s = 1.0; // first backoff; doubles per retry
    std::int64_t token_budget = 5'000'000;
    double price_in_per_1k = 0.0;
    double price_out_per_1k = 0.0;
    int max_inflight = 4;
};

/// Throws ConfigError when an invariant does not hold.
void validate(const LlmConfig& config);

struct Completion {
    std::string text;
    std::int64_t tokens_in = 0;
    std::int64_t tokens_out = 0;
};

/// Linear pricing per 1K tokens.
double cost(std::int64_t tokens_in, std::int64_t tokens_out, const LlmConfig& config);

/// Token estimate used when an endpoint reports no usage: one token per four
/// bytes, rounded up.
std::int64_t estimate_tokens(const std::string& text);
std::int64_t estimate_tokens(const Messages& messages);

/// Run-wide token accounting shared by concurrent callers.
class TokenBudget {
public:
    explicit TokenBudget(std::int64_t limit) : limit_(limit) {}
    bool exhausted() const { return used_.load() >= limit_; }
    void charge(std::int64_t tokens) { used_.fetch_add(tokens); }
    std::int64_t used() const { return used_.load(); }
    std::int64_t limit() const { return limit_; }

private:
    std::int64_t limit_;
    std::atomic<std::int64_t> used_{0};
};

class LlmClient {
public:
    explicit LlmClient(LlmConfig config);
    virtual ~LlmClient() = default;

    /// Sends one conversation and returns the reply with its token usage.
    /// Throws BudgetExhausted before any request once the run's token
    /// budget is spent, TransportError when the endpoint stays unreachable
    /// and EndpointError for an error reply.
    Completion complete(const Messages& messages);

    const LlmConfig& config() const { return config_; }
    const TokenBudget& budget() const { return budget_; }
    /// Calls that returned a completion.
    int calls() const { return calls_.load(); }

protected:
    virtual Completion send(const Messages& messages) = 0;

private:
    LlmConfig config_;
    TokenBudget budget_;
    std::atomic<int> calls_{0};
    std::mutex gate_mutex_;
    std::condition_variable gate_cv_;
    int inflight_ = 0;
};

/// Client for an OpenAI-style chat-completions endpoint. The API key is
/// read from WEAVER_API_KEY.
class HttpLlmClient : public LlmClient {
public:
    explicit HttpLlmClient(LlmConfig config);

protected:
    Completion send(const Messages& messages) override;
};

/// Replays a transcript: the n-th call returns the n-th response.
class ScriptedLlmClient : public LlmClient {
public:
    ScriptedLlmClient(LlmConfig config, std::vector<std::string> responses, std::size_t start = 0);

    /// Reads a JSON array of response strings. Throws IoError or ConfigError.
    static std::vector<std::string> load_transcript(const std::filesystem::path& path);

    std::size_t position() const;
    /// Conversations received so far, in order.
    std::vector<Messages> requests() const;

protected:
    Completion send(const Messages& messages) override;

private:
    std::vector<std::string> responses_;
    mutable std::mutex mutex_;
    std::size_t next_;
    std::vector<Messages> requests_;
};

}  // namespace weaver
