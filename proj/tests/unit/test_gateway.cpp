#include "datagen/errors.hpp"
#include "datagen/fact_validator.hpp"
#include "datagen/gateway.hpp"
#include "datagen/http_provider.hpp"
#include "datagen/mock_provider.hpp"
#include "test_util.hpp"

#include <httplib.h>

#include <doctest.h>

#include <thread>

using namespace datagen;

namespace {

ChatRequest simple_request(std::string text = "hello") {
    ChatRequest r;
    r.model = "gpt-4-turbo";
    r.messages = {{"user", std::move(text)}};
    return r;
}

GatewayOptions fast_options() {
    GatewayOptions o;
    o.backoff_base = std::chrono::milliseconds(0);
    o.backoff_cap = std::chrono::milliseconds(0);
    return o;
}

class FlakyProvider : public ChatProvider {
  public:
    explicit FlakyProvider(int failures) : failures_(failures) {}
    ChatResponse complete(const ChatRequest &) override {
        if (++calls_ <= failures_)
            throw TransportError("connection reset");
        return ChatResponse{"ok", {3, 1}, 0};
    }
    int calls() const { return calls_; }

  private:
    int failures_;
    std::atomic<int> calls_{0};
};

class RefusingProvider : public ChatProvider {
  public:
    ChatResponse complete(const ChatRequest &) override {
        ++calls;
        throw ProviderRefusal("no");
    }
    std::atomic<int> calls{0};
};

/// httplib server on an ephemeral port, stopped on destruction.
class LocalServer {
  public:
    LocalServer() {
        port_ = server.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~LocalServer() {
        server.stop();
        thread_.join();
    }
    std::string base() const { return "http://127.0.0.1:" + std::to_string(port_); }

    httplib::Server server;

  private:
    int port_ = 0;
    std::thread thread_;
};

} // namespace

TEST_SUITE("gateway") {

TEST_CASE("request hash covers model, sampling parameters, seed and messages") {
    auto a = simple_request();
    auto b = a;
    CHECK(a.hash() == b.hash());
    b.temperature = 0.5;
    CHECK(a.hash() != b.hash());
    b = a;
    b.seed = 4;
    CHECK(a.hash() != b.hash());
    b = a;
    b.messages[0].content = "hello!";
    CHECK(a.hash() != b.hash());
    ChatRequest empty;
    CHECK_THROWS_AS(empty.validate(), Error);
}

TEST_CASE("calls are recorded in the manifest") {
    auto mock = std::make_shared<MockChatProvider>([](const ChatRequest &) { return std::string("reply text"); });
    Gateway gw(mock, nullptr, fast_options());
    RunManifest log("t", {});
    auto r = gw.chat(simple_request(), Stage::reflection, log);
    CHECK(r.text == "reply text");
    REQUIRE(log.call_count() == 1);
    auto call = log.calls()[0];
    CHECK(call.stage == Stage::reflection);
    CHECK(call.prompt_hash == simple_request().hash());
    CHECK(call.latency_ms == 0);
    CHECK(call.cost == RateCard::builtin().cost("gpt-4-turbo", call.prompt_tokens, call.completion_tokens));
}

TEST_CASE("canned completions take precedence") {
    auto mock = std::make_shared<MockChatProvider>();
    mock->add_canned(simple_request().hash(), "canned");
    Gateway gw(mock, nullptr, fast_options());
    RunManifest log;
    CHECK(gw.chat(simple_request(), Stage::generation, log).text == "canned");
    CHECK_THROWS_AS(gw.chat(simple_request("other"), Stage::generation, log), ProviderRefusal);
}

TEST_CASE("transport errors are retried up to the limit") {
    auto flaky = std::make_shared<FlakyProvider>(2);
    Gateway gw(flaky, nullptr, fast_options());
    RunManifest log;
    CHECK(gw.chat(simple_request(), Stage::generation, log).text == "ok");
    CHECK(flaky->calls() == 3);
    CHECK(log.call_count() == 1);

    auto hopeless = std::make_shared<FlakyProvider>(100);
    auto opts = fast_options();
    opts.max_retries = 2;
    Gateway gw2(hopeless, nullptr, opts);
    CHECK_THROWS_AS(gw2.chat(simple_request(), Stage::generation, log), TransportError);
    CHECK(hopeless->calls() == 3);
}

TEST_CASE("refusals are not retried") {
    auto refusing = std::make_shared<RefusingProvider>();
    Gateway gw(refusing, nullptr, fast_options());
    RunManifest log;
    CHECK_THROWS_AS(gw.chat(simple_request(), Stage::generation, log), ProviderRefusal);
    CHECK(refusing->calls == 1);
    CHECK(log.call_count() == 0);
}

TEST_CASE("token budget is checked before the call") {
    auto mock = std::make_shared<MockChatProvider>([](const ChatRequest &) { return std::string("x"); });
    auto opts = fast_options();
    opts.context_window = 1100;
    Gateway gw(mock, nullptr, opts);
    RunManifest log;
    auto req = simple_request(std::string(800, 'a'));
    CHECK_THROWS_AS(gw.chat(req, Stage::generation, log), TokenLimitError);
    CHECK(mock->calls() == 0);
}

TEST_CASE("embedding cache sends only misses") {
    auto embedder = std::make_shared<HashingEmbedder>(16, 1);
    Gateway gw(nullptr, embedder, fast_options());
    RunManifest log;
    std::vector<std::string> first{"alpha beta", "gamma"};
    auto m1 = gw.embed(first, "text-embedding-ada-002", log);
    CHECK(m1.rows() == 2);
    CHECK(m1.cols() == 16);
    std::vector<std::string> second{"gamma", "delta", "alpha beta"};
    auto m2 = gw.embed(second, "text-embedding-ada-002", log);
    CHECK(gw.embedding_provider_calls() == 2);
    CHECK(embedder->calls() == 2);
    for (std::size_t k = 0; k < 16; ++k) {
        CHECK(m2.row(0)[k] == m1.row(1)[k]);
        CHECK(m2.row(2)[k] == m1.row(0)[k]);
    }
    gw.embed(second, "text-embedding-ada-002", log);
    CHECK(embedder->calls() == 2);
}

TEST_CASE("disk embedding cache survives a new gateway") {
    testing_util::TempDir dir;
    auto opts = fast_options();
    opts.cache_dir = dir.path();
    std::vector<std::string> texts{"one", "two"};
    RunManifest log;
    {
        Gateway gw(nullptr, std::make_shared<HashingEmbedder>(8, 2), opts);
        gw.embed(texts, "m", log);
    }
    auto embedder = std::make_shared<HashingEmbedder>(8, 2);
    Gateway gw(nullptr, embedder, opts);
    gw.embed(texts, "m", log);
    CHECK(embedder->calls() == 0);
}

TEST_CASE("hashing embedder is deterministic and unit length") {
    HashingEmbedder e(32, 9);
    auto a = e.vector_for("the cat sat");
    auto b = e.vector_for("the cat sat");
    CHECK(a == b);
    double norm = 0;
    for (double v : a)
        norm += v * v;
    CHECK(norm == doctest::Approx(1.0));
    auto near = e.vector_for("the cat sat down");
    auto far = e.vector_for("quantum chromodynamics lattice");
    CHECK(euclidean_distance(a, near) < euclidean_distance(a, far));
}

TEST_CASE("OpenAI-compatible client maps responses and errors") {
    LocalServer srv;
    std::string seen_auth;
    Json seen_body;
    srv.server.Post("/v1/chat/completions", [&](const httplib::Request &req, httplib::Response &res) {
        seen_auth = req.get_header_value("Authorization");
        seen_body = Json::parse(req.body);
        auto content = seen_body["messages"][0]["content"].get<std::string>();
        if (content == "limit") {
            res.status = 400;
            res.set_content(R"({"error": {"message": "This model's maximum context length is 10 tokens"}})",
                            "application/json");
        } else if (content == "busy") {
            res.status = 429;
            res.set_content(R"({"error": "slow down"})", "application/json");
        } else if (content == "bad") {
            res.status = 401;
            res.set_content(R"({"error": {"message": "invalid key"}})", "application/json");
        } else {
            res.set_content(
                R"({"choices": [{"message": {"content": "pong"}, "finish_reason": "stop"}], "usage": {"prompt_tokens": 5, "completion_tokens": 1}})",
                "application/json");
        }
    });
    srv.server.Post("/v1/embeddings", [&](const httplib::Request &req, httplib::Response &res) {
        auto body = Json::parse(req.body);
        Json data = Json::array();
        for (std::size_t i = body["input"].size(); i-- > 0;)
            data.push_back({{"index", i}, {"embedding", {double(i), 1.0}}});
        res.set_content(Json{{"data", data}, {"usage", {{"prompt_tokens", 4}}}}.dump(), "application/json");
    });

    OpenAiChatProvider chat({srv.base(), "test-key", std::chrono::seconds(5)});
    auto req = simple_request("ping");
    req.seed = 11;
    auto r = chat.complete(req);
    CHECK(r.text == "pong");
    CHECK(r.usage.prompt_tokens == 5);
    CHECK(seen_auth == "Bearer test-key");
    CHECK(seen_body["seed"] == 11);
    CHECK(seen_body["model"] == "gpt-4-turbo");

    CHECK_THROWS_AS(chat.complete(simple_request("limit")), TokenLimitError);
    CHECK_THROWS_AS(chat.complete(simple_request("busy")), TransportError);
    CHECK_THROWS_AS(chat.complete(simple_request("bad")), ProviderRefusal);

    OpenAiChatProvider with_v1({srv.base() + "/v1/", "k", std::chrono::seconds(5)});
    CHECK(with_v1.complete(simple_request("ping")).text == "pong");

    OpenAiEmbeddingProvider emb({srv.base(), "k", std::chrono::seconds(5)});
    std::vector<std::string> texts{"a", "b", "c"};
    auto e = emb.embed("m", texts);
    REQUIRE(e.rows.size() == 3);
    CHECK(e.rows[2][0] == 2.0);

    OpenAiChatProvider nowhere({"http://127.0.0.1:1", "k", std::chrono::seconds(1)});
    CHECK_THROWS_AS(nowhere.complete(simple_request()), TransportError);
}

TEST_CASE("Wikipedia retriever reads summaries and treats failures as misses") {
    LocalServer srv;
    std::atomic<int> flaky_calls{0};
    std::string agent;
    srv.server.Get(R"(/api/rest_v1/page/summary/(.+))", [&](const httplib::Request &req, httplib::Response &res) {
        agent = req.get_header_value("User-Agent");
        auto title = req.matches[1].str();
        if (title == "Blood_is_thicker_than_water") {
            res.set_content(R"({"title": "Blood is thicker than water", "extract": "A proverb about family.",
                                "content_urls": {"desktop": {"page": "https://example/wiki"}}})",
                            "application/json");
        } else if (title == "Flaky") {
            res.status = ++flaky_calls < 2 ? 503 : 200;
            res.set_content(R"({"title": "Flaky", "extract": "second time lucky"})", "application/json");
        } else {
            res.status = 404;
        }
    });
    WikipediaRetriever wiki(srv.base(), 1000.0, 2);
    auto hit = wiki.lookup("Blood is thicker than water");
    REQUIRE(hit.has_value());
    CHECK(hit->text == "A proverb about family.");
    CHECK(hit->source == "https://example/wiki");
    CHECK_FALSE(agent.empty());
    CHECK_FALSE(wiki.lookup("Nothing here").has_value());
    auto flaky = wiki.lookup("Flaky");
    REQUIRE(flaky.has_value());
    CHECK(flaky_calls == 2);
    CHECK(url_encode("a b/é") == "a%20b%2F%C3%A9");
}

}
