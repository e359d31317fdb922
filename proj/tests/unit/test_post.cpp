#include "datagen/errors.hpp"
#include "datagen/mock_provider.hpp"
#include "datagen/post_processor.hpp"
#include "datagen/scripted_provider.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <set>

using namespace datagen;

namespace {

DatasetDescriptor mc_descriptor() {
    return DatasetDescriptor{"tqa", "Multiple choice questions.", true, AnswerFormat::multiple_choice};
}

std::vector<DatasetItem> items_for(std::size_t n) {
    std::vector<DatasetItem> out;
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(DatasetItem{"i" + std::to_string(i), "item " + std::to_string(i), std::nullopt, std::nullopt, {}});
    return out;
}

std::vector<std::string> ids_of(const std::vector<DatasetItem> &items) {
    std::vector<std::string> ids;
    for (const auto &it : items)
        ids.push_back(it.id);
    return ids;
}

} // namespace

TEST_SUITE("post") {

TEST_CASE("policy names and applicability") {
    for (auto p : kAllPolicies)
        CHECK(difficulty_policy_from_string(to_string(p)) == p);
    CHECK_THROWS_AS(difficulty_policy_from_string("harder"), ConfigError);
    auto num = testing_util::numeric_item("n", "q", "3");
    CHECK(policy_applicable(DifficultyPolicy::add_context, num));
    CHECK_FALSE(policy_applicable(DifficultyPolicy::paraphrase_choices, num));
    auto mc = testing_util::mc_item("m", "q");
    CHECK(policy_applicable(DifficultyPolicy::add_choice, mc));
    mc.label.reset();
    CHECK_FALSE(policy_applicable(DifficultyPolicy::add_choice, mc));
}

TEST_CASE("guards catch each kind of violation") {
    auto orig = testing_util::mc_item("m", "q", "B");
    auto r = orig;
    r.text = "a harder q";
    CHECK(difficulty_guard(DifficultyPolicy::paraphrase_question, orig, r).empty());
    r.label = "A";
    CHECK_FALSE(difficulty_guard(DifficultyPolicy::paraphrase_question, orig, r).empty());

    r = orig;
    (*r.choices)[0].body = "reworded";
    CHECK_FALSE(difficulty_guard(DifficultyPolicy::add_context, orig, r).empty());
    CHECK(difficulty_guard(DifficultyPolicy::paraphrase_choices, orig, r).empty());
    r.choices->pop_back();
    CHECK_FALSE(difficulty_guard(DifficultyPolicy::paraphrase_choices, orig, r).empty());

    r = orig;
    r.choices->insert(r.choices->begin(), Choice{"A", "new distractor"});
    (*r.choices)[1].key = "B";
    (*r.choices)[2].key = "C";
    (*r.choices)[3].key = "D";
    r.label = "C";
    CHECK(difficulty_guard(DifficultyPolicy::add_choice, orig, r).empty());
    r.label = "B";
    CHECK_FALSE(difficulty_guard(DifficultyPolicy::add_choice, orig, r).empty());
    r.label = "C";
    (*r.choices)[0].body = "second option";
    CHECK_FALSE(difficulty_guard(DifficultyPolicy::add_choice, orig, r).empty());
}

TEST_CASE("property: accepted rewrites satisfy the independent rules") {
    auto seed = load_dataset(testing_util::fixture("seeds/truthfulqa.json")).items;
    auto provider = std::make_shared<ScriptedProvider>(ScriptedOptions{.difficulty_fault_rate = 0.4, .seed = 2});
    Gateway gw(provider, nullptr);
    GenerationConfig g;
    g.model = "gpt-4-turbo";
    auto ctx = make_stage_context(gw, testing_util::templates(), g);
    for (std::size_t pi = 0; pi < kAllPolicies.size(); ++pi) {
        RunManifest log;
        auto report = enhance_dataset(ctx, seed, mc_descriptor(), kAllPolicies[pi], 9, log);
        auto name = std::string(to_string(kAllPolicies[pi]));
        CHECK(report.attempted[name] == seed.size());
        CHECK(report.accepted[name] + report.rejected[name] == seed.size());
        for (std::size_t i = 0; i < seed.size(); ++i) {
            const auto &out = report.items[i];
            if (out.meta.count("difficulty_policy"))
                CHECK(oracle::difficulty_ok(static_cast<int>(pi), seed[i], out));
            else
                CHECK(out == seed[i]);
        }
    }
}

TEST_CASE("random policy mode is reproducible") {
    auto seed = load_dataset(testing_util::fixture("seeds/truthfulqa.json")).items;
    auto run = [&] {
        Gateway gw(std::make_shared<ScriptedProvider>(ScriptedOptions{.seed = 4}), nullptr);
        GenerationConfig g;
        g.model = "gpt-4-turbo";
        auto ctx = make_stage_context(gw, testing_util::templates(), g);
        RunManifest log;
        return enhance_dataset(ctx, seed, mc_descriptor(), std::nullopt, 5, log).items;
    };
    CHECK(run() == run());
}

TEST_CASE("similarity matrix matches a double loop") {
    for (std::uint64_t s = 0; s < 10; ++s) {
        auto rows = oracle::random_rows(37 + s * 5, 6, s);
        auto m = build_similarity_matrix(EmbeddingMatrix::from_rows(rows), ids_of(items_for(rows.size())), 3);
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (std::size_t j = 0; j < rows.size(); ++j)
                CHECK(std::fabs(m.at(i, j) - oracle::euclid(rows[i], rows[j])) < 1e-12);
    }
    CHECK_THROWS_AS(build_similarity_matrix(EmbeddingMatrix{}, {}), Error);
    auto rows = oracle::random_rows(3, 2, 1);
    CHECK_THROWS_AS(build_similarity_matrix(EmbeddingMatrix::from_rows(rows), {"a", "b"}), Error);
}

TEST_CASE("percentiles interpolate between order statistics") {
    // points on a line: pair distances 1, 1, 2
    auto rows = std::vector<std::vector<double>>{{0.0}, {1.0}, {2.0}};
    auto m = build_similarity_matrix(EmbeddingMatrix::from_rows(rows), {"a", "b", "c"});
    CHECK(m.pair_distances() == std::vector<double>{1.0, 1.0, 2.0});
    CHECK(percentile_distance(m, 0) == 1.0);
    CHECK(percentile_distance(m, 100) == 2.0);
    CHECK(percentile_distance(m, 75) == doctest::Approx(1.5));
    CHECK(default_theta(m) == doctest::Approx(1.0));

    auto same = std::vector<std::vector<double>>{{1.0}, {1.0}, {1.0}, {3.0}};
    auto ms = build_similarity_matrix(EmbeddingMatrix::from_rows(same), {"a", "b", "c", "d"});
    CHECK(default_theta(ms) == 2.0);
    auto all_same = build_similarity_matrix(EmbeddingMatrix::from_rows({{1.0}, {1.0}}), {"a", "b"});
    CHECK(default_theta(all_same) == 1e-12);
}

TEST_CASE("group check removes exact duplicates") {
    auto items = items_for(4);
    auto rows = std::vector<std::vector<double>>{{0.0, 0.0}, {5.0, 0.0}, {0.0, 0.0}, {0.0, 9.0}};
    auto m = build_similarity_matrix(EmbeddingMatrix::from_rows(rows), ids_of(items));
    auto res = group_check(items, m, 0.5, 1);
    CHECK(res.items.size() == 3);
    REQUIRE(res.removals.size() == 1);
    std::set<std::string> pair{res.removals[0].removed_id, res.removals[0].kept_id};
    CHECK(pair == std::set<std::string>{"i0", "i2"});
    CHECK_THROWS_AS(group_check(items, m, 0.0, 1), ConfigError);
}

TEST_CASE("property: no surviving pair is closer than theta, and removals are justified") {
    for (std::uint64_t s = 0; s < 20; ++s) {
        auto rows = oracle::random_rows(60, 3, s + 77);
        auto items = items_for(rows.size());
        auto m = build_similarity_matrix(EmbeddingMatrix::from_rows(rows), ids_of(items));
        double theta = percentile_distance(m, 1.0 + static_cast<double>(s % 5));
        auto res = group_check(items, m, theta, s);
        CHECK(oracle::violating_pairs(rows, res.kept_indices, theta) == 0);
        CHECK(res.kept_indices.size() + res.removals.size() == items.size());
        std::set<std::string> kept;
        for (auto k : res.kept_indices)
            kept.insert(items[k].id);
        for (const auto &r : res.removals) {
            CHECK(r.distance < theta);
            CHECK_FALSE(kept.count(r.removed_id));
        }
        auto again = group_check(items, m, theta, s);
        CHECK(again.kept_indices == res.kept_indices);
    }
}

TEST_CASE("group check is a no-op when nothing is close") {
    auto rows = oracle::random_rows(20, 4, 3, 10.0);
    auto items = items_for(20);
    auto m = build_similarity_matrix(EmbeddingMatrix::from_rows(rows), ids_of(items));
    auto res = group_check(items, m, 1e-9, 0);
    CHECK(res.items == items);
    CHECK(res.removals.empty());
}

}
