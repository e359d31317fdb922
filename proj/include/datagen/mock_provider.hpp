#pragma once

#include "datagen/gateway.hpp"

#include <atomic>
#include <functional>
#include <map>
#include <mutex>

namespace datagen {

/// Deterministic test double. Completions come from a table keyed by ChatRequest::hash(),
/// falling back to a responder function. With neither, the call is refused.
class MockChatProvider : public ChatProvider {
  public:
    using Responder = std::function<std::string(const ChatRequest &)>;

    MockChatProvider() = default;
    explicit MockChatProvider(Responder responder) : responder_(std::move(responder)) {}

    void add_canned(const std::string &request_hash, std::string completion);

    ChatResponse complete(const ChatRequest &request) override;

    std::int64_t calls() const { return calls_.load(); }
    std::vector<ChatRequest> requests() const;

  private:
    Responder responder_;
    mutable std::mutex mutex_;
    std::map<std::string, std::string> canned_;
    std::vector<ChatRequest> requests_;
    std::atomic<std::int64_t> calls_{0};
};

/// Maps each text to a seeded pseudo-random unit vector built by summing one Gaussian
/// vector per token (feature hashing). Identical texts get identical rows, texts that
/// share vocabulary land close together, and results are stable across runs.
class HashingEmbedder : public EmbeddingProvider {
  public:
    explicit HashingEmbedder(std::size_t dim = 64, std::uint64_t seed = 0) : dim_(dim), seed_(seed) {}

    EmbeddingResponse embed(const std::string &model, std::span<const std::string> texts) override;

    std::vector<double> vector_for(std::string_view text) const;
    std::int64_t calls() const { return calls_.load(); }

  private:
    std::size_t dim_;
    std::uint64_t seed_;
    std::atomic<std::int64_t> calls_{0};
};

} // namespace datagen
