#pragma once

#include "datagen/gateway.hpp"

#include <chrono>
#include <map>
#include <string>

namespace datagen {

struct HttpOptions {
    /// Scheme, host and optional port, e.g. "https://api.openai.com". A trailing "/v1" is tolerated.
    std::string base_url;
    std::string api_key;
    std::chrono::seconds timeout{120};
};

/// OpenAI-compatible /v1/chat/completions client.
///   connection failure, 429, 5xx          -> TransportError (retried by the gateway)
///   400 mentioning the context length     -> TokenLimitError
///   any other non-2xx                      -> ProviderRefusal
class OpenAiChatProvider : public ChatProvider {
  public:
    explicit OpenAiChatProvider(HttpOptions options) : options_(std::move(options)) {}
    ChatResponse complete(const ChatRequest &request) override;

  private:
    HttpOptions options_;
};

/// OpenAI-compatible /v1/embeddings client with the same error mapping.
class OpenAiEmbeddingProvider : public EmbeddingProvider {
  public:
    explicit OpenAiEmbeddingProvider(HttpOptions options) : options_(std::move(options)) {}
    EmbeddingResponse embed(const std::string &model, std::span<const std::string> texts) override;

  private:
    HttpOptions options_;
};

struct HttpResponse {
    int status = 0;
    std::string body;
};

/// Plain GET used by the Wikipedia retriever. Throws TransportError when no response arrives.
HttpResponse http_get(const std::string &url, const std::map<std::string, std::string> &headers = {},
                      std::chrono::seconds timeout = std::chrono::seconds(30));

/// Percent-encodes everything outside the unreserved set.
std::string url_encode(std::string_view s);

} // namespace datagen
