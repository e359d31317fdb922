#include "datagen/errors.hpp"
#include "datagen/manifest.hpp"
#include "datagen/report.hpp"
#include "datagen/util.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <thread>

using namespace datagen;

namespace {

constexpr Stage kStages[] = {Stage::generation,        Stage::attribute_extraction, Stage::reflection,
                             Stage::enhancement,       Stage::math_solver,          Stage::math_compare,
                             Stage::entity_extraction, Stage::fact_refine,          Stage::difficulty,
                             Stage::embedding,         Stage::human_feedback,       Stage::bench_candidate,
                             Stage::bench_judge,       Stage::compliance_judge};

RunManifest random_manifest(std::uint64_t seed, const RateCard &rates) {
    RunManifest m("run-" + std::to_string(seed), Json::object());
    auto rng = make_rng(seed);
    const char *models[] = {"gpt-4-turbo", "text-embedding-ada-002", "unknown-model", "gpt-3.5-turbo"};
    int n = std::uniform_int_distribution<int>(0, 300)(rng);
    for (int i = 0; i < n; ++i) {
        auto stage = kStages[rng() % std::size(kStages)];
        record_call(m, stage, models[rng() % 4], static_cast<std::int64_t>(rng() % 20000),
                    static_cast<std::int64_t>(rng() % 4000), rates);
    }
    return m;
}

} // namespace

TEST_SUITE("manifest") {

TEST_CASE("rate lookup falls back to default then zero") {
    RateCard card;
    card.set("a", {1.0, 2.0});
    CHECK(card.rate_for("a").output_per_million == 2.0);
    CHECK(card.rate_for("b").input_per_million == 0.0);
    card.set("default", {3.0, 4.0});
    CHECK(card.rate_for("b").input_per_million == 3.0);
    // 1000 prompt tokens at $1/M plus 500 completion tokens at $2/M = $0.002
    CHECK(card.cost("a", 1000, 500) == 2'000'000'000);
}

TEST_CASE("rate card files need both prices") {
    CHECK_NOTHROW(RateCard::load(testing_util::fixture("rates.json")));
    CHECK_THROWS_AS(RateCard::from_json(Json{{"m", {{"input_per_million", 1.0}}}}), ConfigError);
}

TEST_CASE("stage categories") {
    CHECK(category_of(Stage::generation) == CostCategory::base);
    CHECK(category_of(Stage::reflection) == CostCategory::base);
    CHECK(category_of(Stage::embedding) == CostCategory::base);
    CHECK(category_of(Stage::math_solver) == CostCategory::code);
    CHECK(category_of(Stage::math_compare) == CostCategory::code);
    CHECK(category_of(Stage::entity_extraction) == CostCategory::rag);
    CHECK(category_of(Stage::fact_refine) == CostCategory::rag);
    CHECK(category_of(Stage::bench_judge) == CostCategory::bench);
    for (auto s : kStages)
        CHECK(stage_from_string(to_string(s)) == s);
}

TEST_CASE("property: recomputed cost equals stored total and categories partition it") {
    auto rates = RateCard::load(testing_util::fixture("rates.json"));
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        auto m = random_manifest(seed, rates);
        CHECK(m.recompute_cost() == m.total_cost());
        Picodollars by_hand = 0;
        for (const auto &c : m.calls()) {
            auto r = rates.rate_for(c.model);
            by_hand += c.prompt_tokens * std::llround(r.input_per_million * 1e6) +
                       c.completion_tokens * std::llround(r.output_per_million * 1e6);
        }
        CHECK(by_hand == m.total_cost());
        Picodollars cats = 0;
        for (const auto &[cat, cost] : m.cost_by_category())
            cats += cost;
        CHECK(cats == m.total_cost());
        Picodollars stages = 0;
        for (const auto &[stage, cost] : m.cost_by_stage())
            stages += cost;
        CHECK(stages == m.total_cost());
    }
}

TEST_CASE("json round trip keeps every record") {
    auto m = random_manifest(3, RateCard::builtin());
    m.add_correction("math_verify", 2);
    m.add_event({{"type", "x"}});
    m.set_section("dedupe", {{"kept", 3}});
    auto back = RunManifest::from_json(m.to_json());
    CHECK(back.calls() == m.calls());
    CHECK(back.corrections() == m.corrections());
    CHECK(back.section("dedupe") == m.section("dedupe"));
    CHECK(back.to_json() == m.to_json());
}

TEST_CASE("tampered totals are detected") {
    auto m = random_manifest(5, RateCard::builtin());
    auto j = m.to_json();
    j["totals"]["cost_picodollars"] = m.total_cost() + 1;
    CHECK_THROWS_AS(RunManifest::from_json(j), SchemaError);
}

TEST_CASE("absorb appends in order and renumbers") {
    RunManifest a("a", {}), b("b", {});
    auto rates = RateCard::builtin();
    record_call(a, Stage::generation, "gpt-4-turbo", 10, 1, rates, "h1");
    record_call(b, Stage::reflection, "gpt-4-turbo", 20, 2, rates, "h2");
    record_call(b, Stage::enhancement, "gpt-4-turbo", 30, 3, rates, "h3");
    b.add_correction("rag");
    a.absorb(b);
    auto calls = a.calls();
    REQUIRE(calls.size() == 3);
    CHECK(calls[1].prompt_hash == "h2");
    CHECK(calls[2].seq == 2);
    CHECK(a.corrections().at("rag") == 1);
    CHECK(a.total_prompt_tokens() == 60);
}

TEST_CASE("concurrent appends are all recorded") {
    RunManifest m("c", {});
    auto rates = RateCard::builtin();
    {
        std::vector<std::jthread> threads;
        for (int t = 0; t < 4; ++t)
            threads.emplace_back([&] {
                for (int i = 0; i < 250; ++i)
                    record_call(m, Stage::generation, "gpt-4-turbo", 7, 3, rates);
            });
    }
    CHECK(m.call_count() == 1000);
    CHECK(m.recompute_cost() == m.total_cost());
}

TEST_CASE("report exposes the partition and per-item costs") {
    auto rates = RateCard::builtin();
    RunManifest m("r", {});
    record_call(m, Stage::generation, "gpt-4-turbo", 1000, 1000, rates);
    record_call(m, Stage::math_solver, "gpt-4-turbo", 1000, 0, rates);
    record_call(m, Stage::fact_refine, "gpt-4-turbo", 0, 1000, rates);
    m.set_section("generation", {{"accepted", 4}});
    auto r = build_report(m);
    CHECK(r["totals"]["recomputed_matches"] == true);
    CHECK(r["totals"]["categories_partition_total"] == true);
    CHECK(r["per_item_cost_usd"]["base"].get<double>() == doctest::Approx(0.04 / 4));
    CHECK(r["per_item_cost_usd"]["base_plus_code"].get<double>() == doctest::Approx(0.05 / 4));
    CHECK(r["per_item_cost_usd"]["base_plus_rag"].get<double>() == doctest::Approx(0.07 / 4));
    CHECK(r["quality"] == "disabled");
    auto md = report_markdown(r);
    CHECK(md.find("| base + RAG |") != std::string::npos);
}

}
