#include "datagen/mock_provider.hpp"
#include "datagen/quality.hpp"
#include "datagen/scripted_provider.hpp"
#include "test_util.hpp"

#include <doctest.h>

using namespace datagen;

namespace {

DatasetDescriptor mc_descriptor() {
    return DatasetDescriptor{"tqa", "Multiple choice questions.", true, AnswerFormat::multiple_choice};
}

GenerationConfig gen_config() {
    GenerationConfig g;
    g.model = "gpt-4-turbo";
    g.max_worker = 3;
    return g;
}

} // namespace

TEST_SUITE("quality") {

TEST_CASE("isgood parsing is strict") {
    CHECK(parse_isgood(Json("yes")) == true);
    CHECK(parse_isgood(Json("NO")) == false);
    CHECK_FALSE(parse_isgood(Json("probably")).has_value());
    CHECK_FALSE(parse_isgood(Json(true)).has_value());

    auto r = parse_reflection(R"({"reflection": "fine", "isgood": "Yes"})", "x", 1);
    CHECK(r.isgood);
    CHECK(r.reflection == "fine");
    CHECK(r.epoch == 1);
    auto bad = parse_reflection("not json at all", "x", 0);
    CHECK(bad.format_error);
    CHECK_FALSE(bad.isgood);
}

TEST_CASE("shape comparison") {
    auto a = testing_util::mc_item("1", "q", "B");
    auto b = a;
    b.text = "changed";
    CHECK(same_shape(a, b));
    b.choices->pop_back();
    CHECK_FALSE(same_shape(a, b));
    b = a;
    b.label = "Z";
    CHECK_FALSE(same_shape(a, b));
    b = a;
    b.choices.reset();
    CHECK_FALSE(same_shape(a, b));
    auto n = testing_util::numeric_item("n", "q", "3");
    auto m = n;
    m.label.reset();
    CHECK_FALSE(same_shape(n, m));
}

TEST_CASE("rewritten item parsing keeps id and meta") {
    auto orig = testing_util::mc_item("keep-me", "q");
    orig.meta["stages"] = "generation";
    auto wrapped = parse_rewritten_item(
        R"({"improved_example": {"text": "better q", "choices": [{"key": "A", "body": "x"}, {"key": "B", "body": "y"}, {"key": "C", "body": "z"}], "label": "C"}})",
        orig);
    REQUIRE(wrapped.has_value());
    CHECK(wrapped->id == "keep-me");
    CHECK(wrapped->text == "better q");
    CHECK(wrapped->label == "C");
    CHECK(wrapped->meta.at("stages") == "generation");

    auto arr = parse_rewritten_item(R"([{"text": "t2", "label": "5"}])", testing_util::numeric_item("n", "t", "4"));
    REQUIRE(arr.has_value());
    CHECK(arr->label == "5");
    CHECK_FALSE(parse_rewritten_item("nothing", orig).has_value());
}

TEST_CASE("all-good reflections leave items untouched") {
    auto mock = std::make_shared<MockChatProvider>(
        [](const ChatRequest &) { return std::string(R"({"reflection": "ok", "isgood": "yes"})"); });
    Gateway gw(mock, nullptr);
    auto ctx = make_stage_context(gw, testing_util::templates(), gen_config());
    RunManifest log;
    std::vector<DatasetItem> items{testing_util::mc_item("a", "q1"), testing_util::mc_item("b", "q2")};
    auto res = quality_pass(ctx, items, mc_descriptor(), 3, log);
    CHECK(res.items == items);
    CHECK(res.histogram.at(0) == 2);
    CHECK(mock->calls() == 2);
}

TEST_CASE("never-good items stop at the cap") {
    auto mock = std::make_shared<MockChatProvider>([](const ChatRequest &req) {
        if (req.prompt_text().find("`isgood' field") != std::string::npos)
            return std::string(R"({"reflection": "too easy", "isgood": "no"})");
        return std::string(
            R"({"text": "harder q", "choices": [{"key": "A", "body": "x"}, {"key": "B", "body": "y"}, {"key": "C", "body": "z"}], "label": "A"})");
    });
    Gateway gw(mock, nullptr);
    auto ctx = make_stage_context(gw, testing_util::templates(), gen_config());
    RunManifest log;
    std::vector<DatasetItem> items{testing_util::mc_item("a", "q1")};
    auto res = quality_pass(ctx, items, mc_descriptor(), 2, log);
    CHECK(res.exhausted == 1);
    CHECK(res.epochs[0] == 2);
    CHECK(res.items[0].text == "harder q");
    CHECK(res.items[0].meta.at("quality_status") == "exhausted");
    // 3 reflections + 2 enhancements
    CHECK(mock->calls() == 5);
}

TEST_CASE("shape-changing rewrites are rejected") {
    auto mock = std::make_shared<MockChatProvider>([](const ChatRequest &req) {
        if (req.prompt_text().find("`isgood' field") != std::string::npos)
            return std::string(R"({"reflection": "meh", "isgood": "no"})");
        return std::string(R"({"text": "no more choices", "label": "A"})");
    });
    Gateway gw(mock, nullptr);
    auto ctx = make_stage_context(gw, testing_util::templates(), gen_config());
    RunManifest log;
    std::vector<DatasetItem> items{testing_util::mc_item("a", "q1")};
    auto res = quality_pass(ctx, items, mc_descriptor(), 1, log);
    CHECK(res.rejected_rewrites == 1);
    CHECK(res.items[0].text == "q1");
    CHECK(res.items[0].choices.has_value());
}

TEST_CASE("property: histogram sums to the item count under the scripted model") {
    auto seed = load_dataset(testing_util::fixture("seeds/hellaswag.json"));
    for (std::uint64_t s = 0; s < 5; ++s) {
        auto provider = std::make_shared<ScriptedProvider>(ScriptedOptions{.reject_rate = 0.5, .seed = s});
        Gateway gw(provider, nullptr);
        auto ctx = make_stage_context(gw, testing_util::templates(), gen_config());
        RunManifest log;
        auto res = quality_pass(ctx, seed.items, mc_descriptor(), 3, log);
        int sum = 0;
        for (const auto &[epochs, n] : res.histogram) {
            CHECK(epochs >= 0);
            CHECK(epochs <= 3);
            sum += n;
        }
        CHECK(sum == static_cast<int>(seed.items.size()));
        for (std::size_t i = 0; i < res.items.size(); ++i) {
            CHECK(same_shape(seed.items[i], res.items[i]));
            CHECK(res.items[i].id == seed.items[i].id);
        }
    }
}

}
