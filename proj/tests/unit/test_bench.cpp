#include "datagen/bench.hpp"
#include "datagen/errors.hpp"
#include "datagen/mock_provider.hpp"
#include "datagen/scripted_provider.hpp"
#include "test_util.hpp"

#include <doctest.h>

using namespace datagen;

namespace {

struct Judge {
    Gateway gateway;
    StageContext ctx;
    explicit Judge(std::shared_ptr<ChatProvider> p)
        : gateway(std::move(p), nullptr), ctx(make_stage_context(gateway, testing_util::templates(), config())) {}
    static GenerationConfig config() {
        GenerationConfig g;
        g.model = "gpt-4-turbo";
        g.temperature = 0;
        return g;
    }
};

std::vector<DatasetItem> word_problems(std::size_t n) {
    std::vector<DatasetItem> out;
    for (std::size_t i = 0; i < n; ++i) {
        auto p = make_word_problem(i + 100);
        out.push_back(testing_util::numeric_item("wp" + std::to_string(i), p.text, std::to_string(p.answer)));
    }
    return out;
}

} // namespace

TEST_SUITE("bench") {

TEST_CASE("judge verdict parsing") {
    auto v = parse_judge_verdict(R"({"Model Final Answer": "90", "Groundtruth Answer": "90", "is_same": true})");
    REQUIRE(v.has_value());
    CHECK(v->is_same);
    CHECK(v->model_final_answer == "90");
    CHECK_FALSE(parse_judge_verdict(R"({"is_same": "yes"})").has_value());
    CHECK_FALSE(parse_judge_verdict("The answers match.").has_value());
}

TEST_CASE("question rendering") {
    auto item = testing_util::mc_item("m", "Pick.", "B");
    CHECK(render_question(item) == "Pick.\nA. first option\nB. second option\nC. third option");
    CHECK(groundtruth_of(item) == "B");
}

TEST_CASE("evaluation accuracy follows the candidate") {
    auto items = word_problems(12);
    for (double err : {0.0, 1.0}) {
        Judge cand(std::make_shared<ScriptedProvider>(ScriptedOptions{.candidate_error_rate = err}));
        Judge judge(std::make_shared<ScriptedProvider>());
        RunManifest log;
        auto r = evaluate_model(cand.ctx, judge.ctx, items, AnswerFormat::numeric, log);
        CHECK(r.scored == 12);
        CHECK(r.accuracy == doctest::Approx(1.0 - err));
        CHECK(r.to_jsonl().size() > 0);
        std::size_t lines = 0;
        for (char c : r.to_jsonl())
            lines += c == '\n';
        CHECK(lines == 12);
        auto calls = log.calls();
        CHECK(calls.size() == 24);
        for (const auto &c : calls)
            CHECK(category_of(c.stage) == CostCategory::bench);
    }
}

TEST_CASE("unparseable judge replies leave items unscored") {
    auto items = word_problems(3);
    Judge cand(std::make_shared<ScriptedProvider>());
    Judge judge(std::make_shared<MockChatProvider>([](const ChatRequest &) { return std::string("They match!"); }));
    RunManifest log;
    auto r = evaluate_model(cand.ctx, judge.ctx, items, AnswerFormat::numeric, log);
    CHECK(r.scored == 0);
    CHECK(r.unscored == 3);
    CHECK(r.accuracy == 0.0);

    items[1].label.reset();
    CHECK_THROWS_AS(evaluate_model(cand.ctx, judge.ctx, items, AnswerFormat::numeric, log), SchemaError);
}

TEST_CASE("bench table") {
    std::vector<BenchRow> rows{{"gpt-4", 0.8, 0.6}, {"llama", std::nullopt, 0.5}};
    auto t = bench_table(rows);
    CHECK(t.find("| Model | ori. | gen. | diff. |") != std::string::npos);
    CHECK(t.find("gpt-4") != std::string::npos);
}

TEST_CASE("yes/no parsing") {
    CHECK(parse_yes_no("YES"));
    CHECK(parse_yes_no(" yes. "));
    CHECK(parse_yes_no("\"Yes\""));
    CHECK_FALSE(parse_yes_no("NO"));
    CHECK_FALSE(parse_yes_no("Yes, mostly"));
    CHECK_FALSE(parse_yes_no(""));
}

TEST_CASE("topic compliance via the judge") {
    std::vector<DatasetItem> items{testing_util::numeric_item("1", "Which sport uses a shuttlecock?", "badminton"),
                                   testing_util::numeric_item("2", "Who won the football final?", "x"),
                                   testing_util::numeric_item("3", "What is the boiling point of water?", "100")};
    Judge judge(std::make_shared<ScriptedProvider>());
    RunManifest log;
    auto r = check_compliance(judge.ctx, items, "sports", log);
    CHECK(r.checked == 3);
    CHECK(r.yes == 1);
    CHECK(r.failing_ids == std::vector<std::string>{"2", "3"});
    for (const auto &c : log.calls())
        CHECK(c.stage == Stage::compliance_judge);
    CHECK_THROWS_AS(check_compliance(judge.ctx, std::span<const DatasetItem>{}, "x", log), Error);
}

TEST_CASE("combined compliance is the AND of the verdicts") {
    auto mock = std::make_shared<MockChatProvider>([](const ChatRequest &req) {
        auto p = req.prompt_text();
        bool first = p.find("related to alpha") != std::string::npos;
        bool item_a = p.find("item-a") != std::string::npos;
        return std::string(first || item_a ? "YES" : "NO");
    });
    Judge judge(mock);
    std::vector<DatasetItem> items{testing_util::numeric_item("a", "item-a text", "1"),
                                   testing_util::numeric_item("b", "item-b text", "1")};
    RunManifest log;
    std::vector<std::string> constraints{"alpha", "beta"};
    auto r = check_combined(judge.ctx, items, constraints, log);
    CHECK(r.constraint == "alpha AND beta");
    CHECK(r.yes == 1);
    CHECK(r.failing_ids == std::vector<std::string>{"b"});
}

TEST_CASE("mechanical constraint parsing") {
    auto a = parse_mechanical_constraint("Each question should be shorter than 20 words.");
    REQUIRE(a.has_value());
    CHECK(a->kind == MechanicalKind::word_length);
    CHECK(a->comparison == Comparison::less);
    CHECK(a->value == 20);
    CHECK(a->target == LengthTarget::question);

    auto b = parse_mechanical_constraint("Every option must be at most ten words");
    REQUIRE(b.has_value());
    CHECK(b->target == LengthTarget::each_option);
    CHECK(b->comparison == Comparison::at_most);
    CHECK(b->value == 10);

    auto c = parse_mechanical_constraint("Each question should have five options.");
    REQUIRE(c.has_value());
    CHECK(c->kind == MechanicalKind::option_count);
    CHECK(c->value == 5);
    CHECK(c->comparison == Comparison::equal);

    auto d = parse_mechanical_constraint("The questions must be written in Chinese.");
    REQUIRE(d.has_value());
    CHECK(d->kind == MechanicalKind::script);
    CHECK(d->script == Script::han);

    CHECK_FALSE(parse_mechanical_constraint("Questions should be about sports.").has_value());
}

TEST_CASE("script share") {
    CHECK(script_share("今天天气很好", Script::han) == 1.0);
    CHECK(script_share("abc 今天", Script::han) == doctest::Approx(0.4));
    CHECK(script_share("ひらがなと漢字", Script::kana, true) == 1.0);
    CHECK(script_share("123 !!", Script::latin) == 0.0);
}

TEST_CASE("local checks count by hand") {
    std::vector<DatasetItem> items{testing_util::mc_item("1", "one two three"),
                                   testing_util::mc_item("2", "one two three four five six")};
    items[1].choices->push_back({"D", "fourth option"});
    auto len = *parse_mechanical_constraint("shorter than 5 words");
    auto r = check_local(items, "len", len);
    CHECK(r.yes == 1);
    CHECK(r.rate == 0.5);
    CHECK(r.method == "local");
    auto four = *parse_mechanical_constraint("exactly 4 options");
    CHECK(check_local(items, "count", four).failing_ids == std::vector<std::string>{"1"});
}

}
