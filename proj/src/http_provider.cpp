#include "datagen/http_provider.hpp"

#include "datagen/errors.hpp"
#include "datagen/util.hpp"

#include <httplib.h>

#include <chrono>

namespace datagen {
namespace {

struct Endpoint {
    std::string origin;
    std::string prefix;
};

Endpoint split_base(std::string base) {
    while (!base.empty() && base.back() == '/')
        base.pop_back();
    auto scheme = base.find("://");
    auto path_start = base.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    Endpoint e;
    if (path_start == std::string::npos) {
        e.origin = base;
    } else {
        e.origin = base.substr(0, path_start);
        e.prefix = base.substr(path_start);
    }
    if (e.prefix.size() < 3 || e.prefix.compare(e.prefix.size() - 3, 3, "/v1") != 0)
        e.prefix += "/v1";
    return e;
}

std::string error_message(const std::string &body) {
    auto j = Json::parse(body, nullptr, false);
    if (!j.is_discarded() && j.is_object() && j.contains("error")) {
        const auto &e = j["error"];
        if (e.is_object() && e.contains("message") && e["message"].is_string())
            return e["message"].get<std::string>();
        if (e.is_string())
            return e.get<std::string>();
    }
    return body.substr(0, 500);
}

[[noreturn]] void raise_for_status(int status, const std::string &body, const std::string &what) {
    auto msg = what + " failed with HTTP " + std::to_string(status) + ": " + error_message(body);
    if (status == 429 || status >= 500)
        throw TransportError(msg);
    if (status == 400) {
        auto lower = to_lower_ascii(body);
        if (lower.find("context_length") != std::string::npos || lower.find("context length") != std::string::npos ||
            lower.find("maximum context") != std::string::npos)
            throw TokenLimitError(msg);
    }
    throw ProviderRefusal(msg);
}

Json post_json(const HttpOptions &options, const std::string &path, const Json &payload, double &latency_ms) {
    auto ep = split_base(options.base_url);
    httplib::Client client(ep.origin);
    client.set_connection_timeout(options.timeout);
    client.set_read_timeout(options.timeout);
    client.set_write_timeout(options.timeout);
    httplib::Headers headers;
    if (!options.api_key.empty())
        headers.emplace("Authorization", "Bearer " + options.api_key);
    auto start = std::chrono::steady_clock::now();
    auto res = client.Post(ep.prefix + path, headers, payload.dump(), "application/json");
    latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    if (!res)
        throw TransportError(path + ": " + httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300)
        raise_for_status(res->status, res->body, path);
    auto j = Json::parse(res->body, nullptr, false);
    if (j.is_discarded())
        throw ProviderRefusal(path + ": response is not JSON");
    return j;
}

} // namespace

std::string url_encode(std::string_view s) {
    static constexpr char hex[] = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : s) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
            out.push_back(static_cast<char>(c));
        } else {
            out.push_back('%');
            out.push_back(hex[c >> 4]);
            out.push_back(hex[c & 15]);
        }
    }
    return out;
}

ChatResponse OpenAiChatProvider::complete(const ChatRequest &request) {
    Json payload;
    payload["model"] = request.model;
    payload["temperature"] = request.temperature;
    payload["top_p"] = request.top_p;
    payload["max_tokens"] = request.max_tokens;
    if (request.seed)
        payload["seed"] = *request.seed;
    payload["messages"] = Json::array();
    for (const auto &m : request.messages)
        payload["messages"].push_back({{"role", m.role}, {"content", m.content}});

    ChatResponse r;
    auto j = post_json(options_, "/chat/completions", payload, r.latency_ms);
    try {
        const auto &choice = j.at("choices").at(0);
        const auto &content = choice.at("message").at("content");
        r.text = content.is_string() ? content.get<std::string>() : std::string();
        if (choice.contains("finish_reason") && choice["finish_reason"] == "content_filter")
            throw ProviderRefusal("completion blocked by the provider's content filter");
        if (j.contains("usage")) {
            r.usage.prompt_tokens = j["usage"].value("prompt_tokens", std::int64_t{0});
            r.usage.completion_tokens = j["usage"].value("completion_tokens", std::int64_t{0});
        } else {
            r.usage.prompt_tokens = estimate_tokens(request.prompt_text());
            r.usage.completion_tokens = estimate_tokens(r.text);
        }
    } catch (const Json::exception &e) {
        throw ProviderRefusal(std::string("unexpected chat response shape: ") + e.what());
    }
    return r;
}

EmbeddingResponse OpenAiEmbeddingProvider::embed(const std::string &model, std::span<const std::string> texts) {
    Json payload{{"model", model}, {"input", std::vector<std::string>(texts.begin(), texts.end())}};
    EmbeddingResponse r;
    auto j = post_json(options_, "/embeddings", payload, r.latency_ms);
    try {
        const auto &data = j.at("data");
        r.rows.resize(data.size());
        for (std::size_t k = 0; k < data.size(); ++k) {
            auto index = data[k].value("index", k);
            if (index >= r.rows.size())
                throw ProviderRefusal("embedding index out of range");
            r.rows[index] = data[k].at("embedding").get<std::vector<double>>();
        }
        if (j.contains("usage"))
            r.usage.prompt_tokens = j["usage"].value("prompt_tokens", std::int64_t{0});
    } catch (const Json::exception &e) {
        throw ProviderRefusal(std::string("unexpected embedding response shape: ") + e.what());
    }
    return r;
}

HttpResponse http_get(const std::string &url, const std::map<std::string, std::string> &headers,
                      std::chrono::seconds timeout) {
    auto scheme = url.find("://");
    auto path_start = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    std::string origin = path_start == std::string::npos ? url : url.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);
    httplib::Client client(origin);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_follow_location(true);
    httplib::Headers h(headers.begin(), headers.end());
    auto res = client.Get(path, h);
    if (!res)
        throw TransportError("GET " + url + ": " + httplib::to_string(res.error()));
    return HttpResponse{res->status, res->body};
}

} // namespace datagen
