#include "datagen/mock_provider.hpp"

#include "datagen/errors.hpp"
#include "datagen/tokenize.hpp"
#include "datagen/util.hpp"

#include <cmath>

namespace datagen {

void MockChatProvider::add_canned(const std::string &request_hash, std::string completion) {
    std::lock_guard lock(mutex_);
    canned_[request_hash] = std::move(completion);
}

ChatResponse MockChatProvider::complete(const ChatRequest &request) {
    ++calls_;
    std::optional<std::string> text;
    {
        std::lock_guard lock(mutex_);
        requests_.push_back(request);
        if (auto it = canned_.find(request.hash()); it != canned_.end())
            text = it->second;
    }
    if (!text) {
        if (!responder_)
            throw ProviderRefusal("mock provider has no completion for request " + request.hash());
        text = responder_(request);
    }
    ChatResponse r;
    r.usage.prompt_tokens = estimate_tokens(request.prompt_text());
    r.usage.completion_tokens = estimate_tokens(*text);
    r.text = std::move(*text);
    return r;
}

std::vector<ChatRequest> MockChatProvider::requests() const {
    std::lock_guard lock(mutex_);
    return requests_;
}

std::vector<double> HashingEmbedder::vector_for(std::string_view text) const {
    std::vector<double> v(dim_, 0.0);
    auto tokens = tokenize(text);
    if (tokens.empty())
        tokens.push_back(std::string(text));
    for (const auto &tok : tokens) {
        Rng rng(derive_seed(seed_, fnv1a64(tok)));
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (auto &x : v)
            x += gauss(rng);
    }
    double norm = 0;
    for (double x : v)
        norm += x * x;
    norm = std::sqrt(norm);
    if (norm > 0) {
        for (auto &x : v)
            x /= norm;
    } else {
        v[0] = 1.0;
    }
    return v;
}

EmbeddingResponse HashingEmbedder::embed(const std::string &, std::span<const std::string> texts) {
    ++calls_;
    EmbeddingResponse r;
    r.rows.reserve(texts.size());
    for (const auto &t : texts) {
        r.rows.push_back(vector_for(t));
        r.usage.prompt_tokens += estimate_tokens(t);
    }
    return r;
}

} // namespace datagen
