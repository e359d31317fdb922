// One PASS/FAIL line per acceptance criterion; exit status 1 if any criterion fails.

#include "datagen/bench.hpp"
#include "datagen/commands.hpp"
#include "datagen/fact_validator.hpp"
#include "datagen/math_verifier.hpp"
#include "datagen/metrics.hpp"
#include "datagen/mock_provider.hpp"
#include "datagen/post_processor.hpp"
#include "datagen/report.hpp"
#include "datagen/sandbox.hpp"
#include "datagen/scripted_provider.hpp"
#include "datagen/selector.hpp"
#include "datagen/tokenize.hpp"
#include "datagen/util.hpp"
#include "corpus.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>

using namespace datagen;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(const char *f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

StageContext context(Gateway &gw, double temperature = 1.0) {
    GenerationConfig g;
    g.model = "gpt-4-turbo";
    g.temperature = temperature;
    g.max_worker = 2;
    return make_stage_context(gw, testing_util::templates(), g);
}

std::vector<std::string> ids_of(std::size_t n) {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i)
        ids.push_back("i" + std::to_string(i));
    return ids;
}

std::vector<DatasetItem> items_of(std::size_t n) {
    std::vector<DatasetItem> out;
    for (const auto &id : ids_of(n))
        out.push_back(DatasetItem{id, "item " + id, std::nullopt, std::nullopt, {}});
    return out;
}

bool cost_invariants(const RunManifest &m, const RateCard &rates, std::string &why) {
    if (m.recompute_cost() != m.total_cost()) {
        why = "recomputed total differs";
        return false;
    }
    Picodollars by_hand = 0;
    for (const auto &c : m.calls()) {
        auto r = rates.rate_for(c.model);
        by_hand += c.prompt_tokens * std::llround(r.input_per_million * 1e6) +
                   c.completion_tokens * std::llround(r.output_per_million * 1e6);
    }
    if (by_hand != m.total_cost()) {
        why = "per-call re-pricing differs";
        return false;
    }
    auto cats = m.cost_by_category();
    Picodollars sum = 0;
    for (const auto &[cat, cost] : cats)
        sum += cost;
    if (sum != m.total_cost()) {
        why = "categories do not partition the total";
        return false;
    }
    return true;
}

// 1 ------------------------------------------------------------------------------------------

Outcome deterministic_end_to_end(std::vector<RunManifest> &manifests) {
    testing_util::TempDir dir("datagen-accept");
    CommonOptions opts;
    opts.config = testing_util::fixture("configs/gsm8k_mock.json");
    opts.offline = true;
    opts.overrides = {"generation_number=200", "batch_size=10", "enable_rag=true",
                      "corpus_dir=" + testing_util::fixture("corpus").string(), "enable_difficulty=true"};
    double first_secs = 0;
    std::vector<std::string> dataset, manifest;
    for (int run = 0; run < 2; ++run) {
        opts.out = dir / ("run" + std::to_string(run));
        auto start = Clock::now();
        auto path = cmd_generate(opts);
        if (run == 0)
            first_secs = seconds_since(start);
        dataset.push_back(read_file(path / "dataset.json"));
        manifest.push_back(read_file(path / "manifest.json"));
        manifests.push_back(RunManifest::load(path / "manifest.json"));
    }
    auto generated = manifests[0].section("generation").value("accepted", 0);
    bool same = dataset[0] == dataset[1] && manifest[0] == manifest[1];
    return {same && first_secs < 30.0 && generated == 200,
            std::string(same ? "byte-identical" : "outputs differ") + ", generated " + std::to_string(generated) +
                " items in " + fmt("%.2f s", first_secs)};
}

// 2 ------------------------------------------------------------------------------------------

Outcome dedupe_correctness() {
    auto start = Clock::now();
    std::size_t violations = 0, removed = 0;
    for (std::uint64_t inst = 0; inst < 50; ++inst) {
        auto rng = make_rng(inst, 0xacce);
        auto rows = oracle::random_rows(200, 8, inst * 7919 + 1);
        auto m = build_similarity_matrix(EmbeddingMatrix::from_rows(rows), ids_of(rows.size()), 2);
        double lo = percentile_distance(m, 0.5), hi = percentile_distance(m, 5.0);
        double theta = std::uniform_real_distribution<double>(lo, hi)(rng);
        auto res = group_check(items_of(rows.size()), m, theta, inst);
        violations += oracle::violating_pairs(rows, res.kept_indices, theta);
        removed += res.removals.size();
    }
    double secs = seconds_since(start);
    return {violations == 0 && secs < 5.0, std::to_string(violations) + " surviving pairs below theta over 50 instances (" +
                                               std::to_string(removed) + " removals), " + fmt("%.2f s", secs)};
}

// 3 ------------------------------------------------------------------------------------------

Outcome similarity_oracle() {
    double worst = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        auto rng = make_rng(s, 0x51);
        std::size_t n = std::uniform_int_distribution<std::size_t>(2, 90)(rng);
        std::size_t dim = std::uniform_int_distribution<std::size_t>(1, 40)(rng);
        double scale = std::pow(10.0, std::uniform_real_distribution<double>(-2, 1)(rng));
        auto rows = oracle::random_rows(n, dim, s + 500, scale);
        auto m = build_similarity_matrix(EmbeddingMatrix::from_rows(rows), ids_of(n), 1 + static_cast<int>(s % 3));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                worst = std::max(worst, std::fabs(m.at(i, j) - oracle::euclid(rows[i], rows[j])));
    }
    return {worst < 1e-12, "max abs error " + fmt("%.3g", worst) + " over 100 matrices"};
}

// 4 ------------------------------------------------------------------------------------------

Outcome selector_property() {
    int diverse = 0, random = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        auto pts = testing_util::two_blobs(10, 8, seed + 31);
        auto split = [](const std::vector<std::size_t> &p) { return (p[0] < 10) != (p[1] < 10); };
        DiverseSelector sel(pts, 2, seed);
        diverse += split(sel.draw(seed)) ? 1 : 0;
        random += split(select_random_indices(20, 2, seed)) ? 1 : 0;
    }
    return {diverse >= 99, "cluster-diverse split the blobs in " + std::to_string(diverse) +
                               "/100 seeds, random in " + std::to_string(random) + "/100"};
}

// 5 ------------------------------------------------------------------------------------------

Outcome metric_oracles() {
    std::vector<std::vector<std::string>> toks;
    for (const auto &s : testing_util::twenty_items())
        toks.push_back(tokenize(s));
    auto got = self_bleu(toks).scores;
    auto want = oracle::self_bleu(toks);
    double bleu_err = 0;
    for (std::size_t i = 0; i < want.size(); ++i)
        bleu_err = std::max(bleu_err, std::fabs(got[i] - want[i]));

    std::vector<EmbeddingMatrix> fixtures;
    HashingEmbedder e(32, 3);
    std::vector<std::vector<double>> rows;
    for (const auto &s : testing_util::twenty_items())
        rows.push_back(e.vector_for(s));
    fixtures.push_back(EmbeddingMatrix::from_rows(rows));
    for (std::uint64_t s = 0; s < 10; ++s) {
        fixtures.push_back(testing_util::two_blobs(8, 6, s));
        fixtures.push_back(EmbeddingMatrix::from_rows(oracle::random_rows(12, 5, s)));
    }
    double clique_err = 0;
    for (const auto &m : fixtures)
        clique_err = std::max(clique_err, std::fabs(remote_clique(m) - (1.0 - aps(m))));
    return {bleu_err < 1e-9 && clique_err < 1e-12,
            "self-BLEU max error " + fmt("%.3g", bleu_err) + " on 20 items; |remote_clique - (1 - aps)| max " +
                fmt("%.3g", clique_err) + " on " + std::to_string(fixtures.size()) + " embedding fixtures"};
}

// 6 ------------------------------------------------------------------------------------------

Outcome math_verifier() {
    auto seed = load_dataset(testing_util::fixture("seeds/gsm8k.json")).items;
    std::vector<DatasetItem> items{seed[0]};
    for (std::uint64_t i = 1; i < 25; ++i) {
        auto p = make_word_problem(i * 977);
        items.push_back(testing_util::numeric_item("wp-" + std::to_string(i), p.text, std::to_string(p.answer)));
    }
    std::set<std::string> corrupted;
    for (std::size_t i = 0; i < 25 && corrupted.size() < 11; i += 2) {
        long long v = std::stoll(*items[i].label);
        items[i].label = std::to_string(v + 3 + static_cast<long long>(i));
        corrupted.insert(items[i].id);
    }
    Gateway gw(std::make_shared<ScriptedProvider>(), nullptr);
    auto ctx = context(gw);
    RunManifest log;
    auto report = verify_math(ctx, items, SandboxOptions{}, log);
    std::size_t agree = 0;
    for (const auto &it : report.items) {
        auto cand = it.meta.count("code_candidate") ? it.meta.at("code_candidate") : "";
        if (it.label && local_equal(*it.label, cand) == true)
            ++agree;
    }
    std::set<std::string> ledger;
    for (const auto &e : log.events())
        if (e.value("type", "") == "correction")
            ledger.insert(e.value("id", ""));
    std::set<std::string> corrected(report.corrected_ids.begin(), report.corrected_ids.end());
    bool lucy = report.items[0].label == "90";

    SandboxOptions so;
    so.timeout = std::chrono::seconds(10);
    auto start = Clock::now();
    auto slow = execute_sandboxed("import time\ntime.sleep(120)\n", so);
    double killed_after = seconds_since(start);

    bool pass = agree == 25 && ledger == corrupted && corrected == corrupted && lucy && slow.timed_out &&
                killed_after < 11.0;
    return {pass, std::to_string(agree) + "/25 labels equal the sandbox candidates; ledger lists " +
                      std::to_string(ledger.size()) + " ids (" + (ledger == corrupted ? "exactly" : "NOT") +
                      " the 11 corrupted); Lucy label " + report.items[0].label.value_or("?") +
                      "; sleep program killed after " + fmt("%.2f s", killed_after)};
}

// 7 ------------------------------------------------------------------------------------------

Outcome template_phrases() {
    const auto &lib = testing_util::templates();
    struct Spot {
        const char *tmpl;
        const char *phrase;
    };
    std::vector<Spot> spots{{"self-reflection", "isgood"},
                            {"math-eval", "key `Code' for the executable code"},
                            {"evaluation-constraint", "Only reply YES or NO"},
                            {"wiki-keyword-extract", "At most 3"},
                            {"math-eval-compare", "semantically equivalent"}};
    std::vector<std::string> missing;
    for (const auto &s : spots) {
        const auto &t = lib.get(s.tmpl);
        Bindings b;
        for (const auto &p : t.placeholders())
            b[p] = "<" + p + ">";
        if (t.render(b).find(s.phrase) == std::string::npos)
            missing.push_back(s.tmpl);
    }
    std::size_t rendered = 0;
    for (const auto &name : lib.names()) {
        const auto &t = lib.get(name);
        Bindings b;
        for (const auto &p : t.placeholders())
            b[p] = "x";
        t.render(b);
        ++rendered;
    }
    return {missing.empty(), std::to_string(spots.size() - missing.size()) + "/" + std::to_string(spots.size()) +
                                 " spot phrases present; " + std::to_string(rendered) + " templates render"};
}

// 8 ------------------------------------------------------------------------------------------

Outcome rag_offline() {
    auto items = load_dataset(testing_util::fixture("seeds/proverb_generated.json")).items;
    std::vector<std::string> labels;
    std::vector<std::string> manifests;
    for (int run = 0; run < 2; ++run) {
        Gateway gw(std::make_shared<ScriptedProvider>(), nullptr);
        auto ctx = context(gw);
        LocalCorpusRetriever corpus(testing_util::fixture("corpus"));
        RunManifest log("rag", {});
        auto report = validate_facts(ctx, items, corpus, 4000, log);
        labels.push_back(report.items[0].label.value_or(""));
        manifests.push_back(log.to_json().dump());
    }
    bool pass = items[0].label == "B" && labels[0] == "A" && labels == std::vector<std::string>{"A", "A"} &&
                manifests[0] == manifests[1];
    return {pass, "label " + *items[0].label + " -> " + labels[0] +
                      (manifests[0] == manifests[1] ? ", identical manifests across runs" : ", manifests differ")};
}

// 9 ------------------------------------------------------------------------------------------

std::vector<DatasetItem> mc_population(std::size_t n) {
    static const char *nouns[] = {"river", "engine", "poem", "market", "volcano", "glacier", "violin", "satellite"};
    std::vector<DatasetItem> out;
    for (std::size_t i = 0; i < n; ++i) {
        auto rng = make_rng(i, 0x9);
        DatasetItem it;
        it.id = "mc-" + std::to_string(i);
        it.text = "Which statement about the " + std::string(nouns[i % 8]) + " number " + std::to_string(i) +
                  " is accurate?";
        std::size_t k = 3 + rng() % 3;
        std::vector<Choice> cs;
        for (std::size_t c = 0; c < k; ++c)
            cs.push_back({std::string(1, char('A' + c)),
                          "Statement " + std::to_string(c + 1) + " about the " + nouns[(i + c) % 8]});
        it.choices = cs;
        it.label = std::string(1, char('A' + rng() % k));
        out.push_back(std::move(it));
    }
    return out;
}

Outcome difficulty_guards() {
    auto items = mc_population(200);
    DatasetDescriptor d{"mc", "Multiple choice questions.", true, AnswerFormat::multiple_choice};
    std::string summary;
    std::size_t escaped = 0, total_rejected = 0;
    for (std::size_t pi = 0; pi < kAllPolicies.size(); ++pi) {
        Gateway gw(std::make_shared<ScriptedProvider>(ScriptedOptions{.difficulty_fault_rate = 0.3, .seed = pi}),
                   nullptr);
        auto ctx = context(gw);
        RunManifest log;
        auto report = enhance_dataset(ctx, items, d, kAllPolicies[pi], 17, log);
        auto name = std::string(to_string(kAllPolicies[pi]));
        for (std::size_t i = 0; i < items.size(); ++i) {
            const auto &out = report.items[i];
            bool accepted = out.meta.count("difficulty_policy") > 0;
            if (accepted ? !oracle::difficulty_ok(static_cast<int>(pi), items[i], out) : !(out == items[i]))
                ++escaped;
        }
        total_rejected += report.rejected[name];
        summary += name + " " + std::to_string(report.accepted[name]) + "/" + std::to_string(report.rejected[name]) +
                   " ";
    }
    return {escaped == 0 && total_rejected > 0, std::to_string(escaped) +
                                                    " violations escaped; accepted/rejected per policy: " + summary};
}

// 10 -----------------------------------------------------------------------------------------

Outcome cost_accounting(const std::vector<RunManifest> &runs) {
    auto file_rates = RateCard::load(testing_util::fixture("rates.json"));
    std::string why;
    std::size_t checked = 0;
    for (const auto &m : runs) {
        if (!cost_invariants(m, file_rates, why))
            return {false, "pipeline manifest: " + why};
        ++checked;
    }
    auto builtin = RateCard::builtin();
    const Stage stages[] = {Stage::generation,  Stage::reflection,   Stage::math_solver, Stage::math_compare,
                            Stage::fact_refine, Stage::bench_judge,  Stage::embedding,   Stage::difficulty};
    const char *models[] = {"gpt-4-turbo", "text-embedding-ada-002", "unpriced"};
    for (std::uint64_t s = 0; s < 200; ++s) {
        auto rng = make_rng(s, 0xc057);
        RunManifest m("m", {});
        int calls = static_cast<int>(rng() % 500);
        for (int i = 0; i < calls; ++i)
            record_call(m, stages[rng() % 8], models[rng() % 3], static_cast<std::int64_t>(rng() % 100000),
                        static_cast<std::int64_t>(rng() % 10000), builtin);
        auto reloaded = RunManifest::from_json(m.to_json());
        if (!cost_invariants(m, builtin, why) || !cost_invariants(reloaded, builtin, why))
            return {false, "random manifest " + std::to_string(s) + ": " + why};
        ++checked;
    }
    auto r = build_report(runs.front());
    auto p = r["per_item_cost_usd"];
    bool staged = p["base"].get<double>() <= p["base_plus_code"].get<double>() &&
                  p["base"].get<double>() <= p["base_plus_rag"].get<double>();
    return {staged, std::to_string(checked) + " manifests: stored total == recomputed == re-priced, "
                                              "base/code/rag/bench partition the total"};
}

// 11 -----------------------------------------------------------------------------------------

Outcome compliance_checkers() {
    using testing_util::numeric_item;
    std::vector<std::string> report;
    bool pass = true;
    auto expect = [&](const std::string &what, std::size_t got, std::size_t want) {
        report.push_back(what + " " + std::to_string(got) + "/" + std::to_string(want));
        pass = pass && got == want;
    };

    std::vector<DatasetItem> lengths{numeric_item("l1", "one two three four five", "x"),
                                     numeric_item("l2", "one two three four five six seven eight nine ten", "x"),
                                     numeric_item("l3", "short question?", "x"),
                                     numeric_item("l4", "a b c d e f g h i j k l", "x")};
    auto rule = parse_mechanical_constraint("Each question must be shorter than 10 words.");
    expect("length", rule ? check_local(lengths, "len", *rule).yes : 99, 2);

    auto mc = [](const std::string &id, std::size_t k) {
        DatasetItem it{id, "q", std::vector<Choice>{}, "A", {}};
        for (std::size_t c = 0; c < k; ++c)
            it.choices->push_back({std::string(1, char('A' + c)), "option body"});
        return it;
    };
    std::vector<DatasetItem> counts{mc("c1", 5), mc("c2", 4), mc("c3", 5), mc("c4", 3), mc("c5", 5)};
    auto five = parse_mechanical_constraint("Each question should have five options.");
    expect("option-count", five ? check_local(counts, "count", *five).yes : 99, 3);

    std::vector<DatasetItem> topics{numeric_item("t1", "Which team won the basketball championship?", "x"),
                                    numeric_item("t2", "How fast can a cheetah run?", "x"),
                                    numeric_item("t3", "Who holds the record in the sprint at the athletics world cup?", "x"),
                                    numeric_item("t4", "What is the capital of Peru?", "x")};
    Gateway gw(std::make_shared<ScriptedProvider>(), nullptr);
    auto judge = context(gw, 0.0);
    RunManifest log;
    std::size_t topic_yes = 0;
    {
        // hand count: t1 (basketball) and t3 (athletics) are about sports
        auto r = check_compliance(judge, topics, "sports, basketball or athletics", log);
        topic_yes = r.yes;
        pass = pass && r.failing_ids == std::vector<std::string>{"t2", "t4"};
    }
    expect("topic (judge)", topic_yes, 2);

    std::vector<DatasetItem> scripts{numeric_item("s1", "北京是中国的首都吗？", "x"),
                                     numeric_item("s2", "Is Beijing the capital of China?", "x"),
                                     numeric_item("s3", "上海有多少人口？", "x"),
                                     numeric_item("s4", "Сколько лет Москве?", "x")};
    auto chinese = parse_mechanical_constraint("The question must be written in Chinese.");
    expect("script", chinese ? check_local(scripts, "script", *chinese).yes : 99, 2);

    std::string detail;
    for (const auto &r : report)
        detail += (detail.empty() ? "" : ", ") + r;
    return {pass, "yes counts vs hand counts: " + detail};
}

} // namespace

int main() {
    std::vector<RunManifest> runs;
    std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"deterministic end-to-end run", [&] { return deterministic_end_to_end(runs); }},
        {"dedupe leaves no pair below theta", dedupe_correctness},
        {"similarity matrix matches the double-loop oracle", similarity_oracle},
        {"cluster-diverse selector splits two blobs", selector_property},
        {"self-BLEU oracle and remote-clique = 1 - APS", metric_oracles},
        {"code-based label verification and sandbox timeout", math_verifier},
        {"prompt templates keep their verbatim phrases", template_phrases},
        {"offline RAG refines the proverb item", rag_offline},
        {"difficulty guards let no violation through", difficulty_guards},
        {"cost accounting is exact and partitioned", [&] { return cost_accounting(runs); }},
        {"mechanical compliance checkers match hand counts", compliance_checkers},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception &e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::printf("%s [%zu] %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
