#pragma once

#include "datagen/manifest.hpp"
#include "datagen/matrix.hpp"

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <semaphore>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace datagen {

struct Message {
    std::string role;
    std::string content;
};

struct ChatRequest {
    std::string model;
    std::vector<Message> messages;
    double temperature = 1.0;
    int max_tokens = 1000;
    double top_p = 1.0;
    /// Sampling seed forwarded to providers that support one.
    std::optional<std::uint64_t> seed;

    /// Throws Error if messages is empty or temperature is negative.
    void validate() const;

    /// Role-tagged concatenation of all messages.
    std::string prompt_text() const;

    /// Content hash over model, sampling parameters and messages.
    std::string hash() const;
};

struct TokenUsage {
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
};

struct ChatResponse {
    std::string text;
    TokenUsage usage;
    double latency_ms = 0;
};

struct EmbeddingResponse {
    std::vector<std::vector<double>> rows;
    TokenUsage usage;
    double latency_ms = 0;
};

class ChatProvider {
  public:
    virtual ~ChatProvider() = default;
    virtual ChatResponse complete(const ChatRequest &request) = 0;
};

class EmbeddingProvider {
  public:
    virtual ~EmbeddingProvider() = default;
    virtual EmbeddingResponse embed(const std::string &model, std::span<const std::string> texts) = 0;
};

/// Rough tokenizer-free estimate: one token per four UTF-8 bytes, rounded up.
std::int64_t estimate_tokens(std::string_view text);

struct GatewayOptions {
    int max_concurrency = 2;
    int max_retries = 3;
    std::chrono::milliseconds backoff_base{500};
    std::chrono::milliseconds backoff_cap{8000};
    std::int64_t context_window = 128000;
    RateCard rates = RateCard::builtin();
    /// On-disk embedding cache; empty keeps the cache in memory only.
    std::filesystem::path cache_dir;
};

/// Shared front door to the providers. Enforces the token budget, retries transport
/// failures with capped exponential backoff, limits in-flight requests, caches
/// embeddings by (model, text) and records every provider call in the caller's manifest.
class Gateway {
  public:
    Gateway(std::shared_ptr<ChatProvider> chat, std::shared_ptr<EmbeddingProvider> embedder,
            GatewayOptions options = {});

    ChatResponse chat(const ChatRequest &request, Stage stage, RunManifest &log);

    /// Row i corresponds to texts[i]. Only cache misses reach the provider, in one batch.
    EmbeddingMatrix embed(std::span<const std::string> texts, const std::string &model, RunManifest &log);

    const RateCard &rates() const { return options_.rates; }
    const GatewayOptions &options() const { return options_; }

    std::int64_t embedding_provider_calls() const { return embedding_calls_.load(); }
    std::int64_t chat_provider_calls() const { return chat_calls_.load(); }

  private:
    template <typename Fn> auto with_retries(Fn &&fn) -> decltype(fn());

    std::optional<std::vector<double>> cache_lookup(const std::string &key);
    void cache_store(const std::string &key, const std::vector<double> &row);

    std::shared_ptr<ChatProvider> chat_;
    std::shared_ptr<EmbeddingProvider> embedder_;
    GatewayOptions options_;
    std::counting_semaphore<1024> slots_;
    std::shared_mutex cache_mutex_;
    std::unordered_map<std::string, std::vector<double>> cache_;
    std::atomic<std::int64_t> embedding_calls_{0};
    std::atomic<std::int64_t> chat_calls_{0};
};

} // namespace datagen
