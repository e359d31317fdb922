#include "datagen/gateway.hpp"

#include "datagen/errors.hpp"
#include "datagen/util.hpp"

#include <cmath>
#include <mutex>
#include <thread>

namespace datagen {

EmbeddingMatrix EmbeddingMatrix::from_rows(const std::vector<std::vector<double>> &rows) {
    EmbeddingMatrix m;
    for (const auto &r : rows)
        m.append_row(r);
    return m;
}

void EmbeddingMatrix::append_row(std::span<const double> values) {
    if (rows_ == 0 && cols_ == 0)
        cols_ = values.size();
    if (values.size() != cols_)
        throw Error("embedding length mismatch: expected " + std::to_string(cols_) + ", got " +
                    std::to_string(values.size()));
    for (double v : values) {
        if (!std::isfinite(v))
            throw Error("embedding contains a non-finite value");
    }
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw Error("vector length mismatch");
    double sum = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        double d = a[k] - b[k];
        sum += d * d;
    }
    return sum;
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
    return std::sqrt(squared_distance(a, b));
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw Error("vector length mismatch");
    double dot = 0, na = 0, nb = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        dot += a[k] * b[k];
        na += a[k] * a[k];
        nb += b[k] * b[k];
    }
    if (na == 0 || nb == 0)
        throw Error("cosine similarity is undefined for a zero vector");
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

void ChatRequest::validate() const {
    if (messages.empty())
        throw Error("chat request has no messages");
    if (!(temperature >= 0))
        throw Error("chat request temperature must be >= 0");
    if (max_tokens <= 0)
        throw Error("chat request max_tokens must be positive");
}

std::string ChatRequest::prompt_text() const {
    std::string out;
    for (const auto &m : messages) {
        out += "<";
        out += m.role;
        out += ">\n";
        out += m.content;
        out += "\n";
    }
    return out;
}

std::string ChatRequest::hash() const {
    Json j;
    j["model"] = model;
    j["temperature"] = temperature;
    j["top_p"] = top_p;
    j["max_tokens"] = max_tokens;
    if (seed)
        j["seed"] = *seed;
    Json msgs = Json::array();
    for (const auto &m : messages)
        msgs.push_back({{"role", m.role}, {"content", m.content}});
    j["messages"] = std::move(msgs);
    return hash_hex(j.dump());
}

std::int64_t estimate_tokens(std::string_view text) { return static_cast<std::int64_t>((text.size() + 3) / 4); }

Gateway::Gateway(std::shared_ptr<ChatProvider> chat, std::shared_ptr<EmbeddingProvider> embedder,
                 GatewayOptions options)
    : chat_(std::move(chat)), embedder_(std::move(embedder)), options_(std::move(options)),
      slots_(std::clamp(options_.max_concurrency, 1, 1024)) {
    if (!options_.cache_dir.empty())
        std::filesystem::create_directories(options_.cache_dir);
}

template <typename Fn> auto Gateway::with_retries(Fn &&fn) -> decltype(fn()) {
    auto delay = options_.backoff_base;
    for (int attempt = 0;; ++attempt) {
        try {
            slots_.acquire();
            struct Release {
                std::counting_semaphore<1024> &s;
                ~Release() { s.release(); }
            } release{slots_};
            return fn();
        } catch (const TransportError &) {
            if (attempt >= options_.max_retries)
                throw;
        }
        if (delay.count() > 0)
            std::this_thread::sleep_for(delay);
        delay = std::min(options_.backoff_cap, delay * 2);
    }
}

ChatResponse Gateway::chat(const ChatRequest &request, Stage stage, RunManifest &log) {
    if (!chat_)
        throw ProviderError("no chat provider configured");
    request.validate();
    auto prompt_tokens = estimate_tokens(request.prompt_text());
    if (prompt_tokens + request.max_tokens > options_.context_window)
        throw TokenLimitError("prompt of ~" + std::to_string(prompt_tokens) + " tokens plus max_tokens " +
                              std::to_string(request.max_tokens) + " exceeds the context window of " +
                              std::to_string(options_.context_window));
    auto response = with_retries([&] {
        ++chat_calls_;
        return chat_->complete(request);
    });
    log.record_call(stage, request.model, request.hash(), response.usage.prompt_tokens,
                    response.usage.completion_tokens, response.latency_ms, options_.rates);
    return response;
}

std::optional<std::vector<double>> Gateway::cache_lookup(const std::string &key) {
    {
        std::shared_lock lock(cache_mutex_);
        if (auto it = cache_.find(key); it != cache_.end())
            return it->second;
    }
    if (options_.cache_dir.empty())
        return std::nullopt;
    auto path = options_.cache_dir / (hash_hex(key) + ".json");
    if (!std::filesystem::exists(path))
        return std::nullopt;
    auto j = Json::parse(read_file(path), nullptr, false);
    if (j.is_discarded() || !j.contains("key") || j.at("key") != key)
        return std::nullopt;
    auto row = j.at("vector").get<std::vector<double>>();
    std::unique_lock lock(cache_mutex_);
    cache_.emplace(key, row);
    return row;
}

void Gateway::cache_store(const std::string &key, const std::vector<double> &row) {
    std::unique_lock lock(cache_mutex_);
    cache_[key] = row;
    if (!options_.cache_dir.empty()) {
        Json j{{"key", key}, {"vector", row}};
        write_file_atomic(options_.cache_dir / (hash_hex(key) + ".json"), j.dump());
    }
}

EmbeddingMatrix Gateway::embed(std::span<const std::string> texts, const std::string &model, RunManifest &log) {
    if (texts.empty())
        throw Error("embed requires at least one text");
    if (!embedder_)
        throw ProviderError("no embedding provider configured");

    std::vector<std::optional<std::vector<double>>> rows(texts.size());
    std::vector<std::string> missing;
    std::vector<std::string> missing_keys;
    std::unordered_map<std::string, std::size_t> pending;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        std::string key = model + '\x1f' + texts[i];
        rows[i] = cache_lookup(key);
        if (!rows[i] && !pending.contains(key)) {
            pending.emplace(key, missing.size());
            missing.push_back(texts[i]);
            missing_keys.push_back(key);
        }
    }

    if (!missing.empty()) {
        auto response = with_retries([&] {
            ++embedding_calls_;
            return embedder_->embed(model, missing);
        });
        if (response.rows.size() != missing.size())
            throw ProviderError("embedding provider returned " + std::to_string(response.rows.size()) +
                                " rows for " + std::to_string(missing.size()) + " texts");
        for (std::size_t k = 0; k < missing.size(); ++k)
            cache_store(missing_keys[k], response.rows[k]);
        std::string joined;
        for (const auto &t : missing)
            joined += t + '\x1e';
        log.record_call(Stage::embedding, model, hash_hex(joined), response.usage.prompt_tokens, 0,
                        response.latency_ms, options_.rates);
        for (std::size_t i = 0; i < texts.size(); ++i) {
            if (!rows[i])
                rows[i] = response.rows[pending.at(model + '\x1f' + texts[i])];
        }
    }

    EmbeddingMatrix m;
    m.model = model;
    for (const auto &r : rows)
        m.append_row(*r);
    return m;
}

} // namespace datagen
