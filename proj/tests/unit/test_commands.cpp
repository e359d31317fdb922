#include "datagen/commands.hpp"
#include "datagen/engine.hpp"
#include "datagen/errors.hpp"
#include "datagen/feedback.hpp"
#include "datagen/scripted_provider.hpp"
#include "datagen/util.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <sstream>

using namespace datagen;
namespace fs = std::filesystem;

namespace {

struct CliResult {
    int code = -1;
    std::string output;
};

CliResult cli(const std::string &args, const std::string &env = {}) {
    testing_util::TempDir tmp("datagen-cli");
    auto out_file = tmp / "out.txt";
    std::string cmd = env + (env.empty() ? "" : " ") + "'" + std::string(DATAGEN_CLI_PATH) + "' " + args + " > '" +
                      out_file.string() + "' 2>&1";
    int status = std::system(cmd.c_str());
    CliResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.output = fs::exists(out_file) ? read_file(out_file) : "";
    return r;
}

std::string q(const fs::path &p) { return "'" + p.string() + "'"; }

} // namespace

TEST_SUITE("commands") {

TEST_CASE("offline generate writes a complete run directory") {
    testing_util::TempDir dir;
    CommonOptions opts;
    opts.config = testing_util::fixture("configs/gsm8k_mock.json");
    opts.out = dir / "run";
    opts.offline = true;
    auto run = cmd_generate(opts);
    for (const char *f : {"config.json", "dataset.json", "manifest.json", "report.json", "report.md", "stages.log"})
        CHECK(fs::exists(run / f));
    auto data = load_dataset(run / "dataset.json");
    CHECK_FALSE(data.items.empty());
    CHECK(data.items.size() <= 40);
    auto report = Json::parse(read_file(run / "report.json"));
    CHECK(report["totals"]["recomputed_matches"] == true);
    CHECK(report["math_verify"].is_object());
    CHECK(report["dedupe"].is_object());
    auto stages = read_file(run / "stages.log");
    CHECK(stages.find("generation\tdone") != std::string::npos);
    CHECK(stages.find("rag\tdisabled") != std::string::npos);

    auto again = cmd_report(run);
    CHECK(again["totals"] == report["totals"]);
}

TEST_CASE("dataset commands resolve their targets") {
    testing_util::TempDir dir;
    CommonOptions opts;
    CHECK_THROWS_AS(resolve_target(testing_util::fixture("seeds/gsm8k.json"), opts), ConfigError);
    opts.out = dir / "o";
    auto t = resolve_target(testing_util::fixture("seeds/gsm8k.json"), opts);
    CHECK(t.dataset == testing_util::fixture("seeds/gsm8k.json"));
    CHECK(t.out_dir == dir / "o");
    CHECK_THROWS_AS(resolve_target(dir / "missing", CommonOptions{}), ConfigError);
}

TEST_CASE("verify refuses non-numeric data and validate needs a retriever") {
    testing_util::TempDir dir;
    CommonOptions opts;
    opts.offline = true;
    opts.out = dir.path();
    opts.overrides = {"dataset_description=Some questions."};
    CHECK_THROWS_AS(cmd_verify(opts, testing_util::fixture("seeds/truthfulqa.json")), ConfigError);
    CHECK_THROWS_AS(cmd_validate(opts, testing_util::fixture("seeds/truthfulqa.json")), ConfigError);
    opts.overrides.push_back("corpus_dir=" + testing_util::fixture("corpus").string());
    auto path = cmd_validate(opts, testing_util::fixture("seeds/proverb_generated.json"));
    auto items = load_dataset(path).items;
    CHECK(items[0].label == "A");
}

TEST_CASE("feedback sessions resume from saved progress") {
    testing_util::TempDir dir;
    auto seed = load_dataset(testing_util::fixture("seeds/gsm8k.json")).items;
    seed.resize(3);
    save_dataset(seed, dir / "dataset.json");
    CommonOptions opts;
    opts.offline = true;
    opts.overrides = {"dataset_description=Math problems."};

    std::istringstream first("Use smaller numbers\n:q\n");
    std::ostringstream sink;
    CHECK_FALSE(cmd_feedback(opts, dir.path(), first, sink));
    CHECK(fs::exists(dir / "feedback_progress.json"));
    auto progress = FeedbackProgress::from_json(Json::parse(read_file(dir / "feedback_progress.json")));
    CHECK(progress.next_index == 1);
    CHECK(progress.items[0].text.find("(Revised: Use smaller numbers)") != std::string::npos);

    std::istringstream second("\n\n");
    CHECK(cmd_feedback(opts, dir.path(), second, sink));
    CHECK_FALSE(fs::exists(dir / "feedback_progress.json"));
    auto done = load_dataset(dir / "dataset.json").items;
    CHECK(done[0].meta.at("human_feedback") == "Use smaller numbers");
    CHECK(done[1] == seed[1]);
}

TEST_CASE("metrics and bench commands write their reports") {
    testing_util::TempDir dir;
    CommonOptions opts;
    opts.offline = true;
    opts.out = dir.path();
    opts.overrides = {"dataset_description=Questions."};
    MetricsOptions m{testing_util::fixture("seeds/hellaswag.json"), testing_util::fixture("seeds/truthfulqa.json")};
    auto metrics = cmd_metrics(opts, m);
    CHECK(metrics.contains("entity_overlap"));
    CHECK(fs::exists(dir / "metrics.md"));
    CHECK(read_file(dir / "metrics.md").find("| Remote-Clique |") != std::string::npos);

    BenchOptions b;
    b.dataset = testing_util::fixture("seeds/gsm8k.json");
    b.constraints = {"money", "shorter than 60 words"};
    b.combined = true;
    auto bench = cmd_bench(opts, b);
    CHECK(bench["generated"]["scored"].get<int>() > 0);
    CHECK(bench["compliance"].size() == 4);
    CHECK(fs::exists(dir / "verdicts.jsonl"));
}

TEST_CASE("CLI exit codes") {
    testing_util::TempDir dir;
    auto live = testing_util::fixture("configs/gsm8k_live.json");
    // unreachable endpoint: a call attempt would surface as a provider failure (3), not 1
    auto missing_key = cli("--config " + q(live) + " --set base_url=http://127.0.0.1:1 --out " + q(dir / "live") +
                               " generate",
                           "env -u DATAGEN_API_KEY");
    CHECK(missing_key.code == 1);
    CHECK(missing_key.output.find("DATAGEN_API_KEY") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "live" / "manifest.json"));

    auto unreachable = cli("--config " + q(live) + " --set base_url=http://127.0.0.1:1 max_retries=0 --out " +
                               q(dir / "live2") + " generate",
                           "DATAGEN_API_KEY=test-key");
    CHECK(unreachable.code == 3);

    auto partial = cli("--offline --config " + q(testing_util::fixture("configs/hellaswag_mock.json")) +
                       " --set generation_number=10 batch_size=5 attribute_guided=false enable_difficulty=false " +
                       "'label_ratio={\"Z\": 1.0}' --out " + q(dir / "partial") + " generate");
    CHECK(partial.code == 2);
    CHECK(fs::exists(dir / "partial" / "manifest.json"));

    CHECK(cli("--help").code == 0);
    CHECK(cli("no-such-command").code == 1);
    CHECK(cli("--set api_key=sk-abc --offline --config " +
              q(testing_util::fixture("configs/gsm8k_mock.json")) + " generate")
              .code == 1);

    auto ok = cli("--offline --config " + q(testing_util::fixture("configs/gsm8k_mock.json")) +
                  " --set generation_number=10 --out " + q(dir / "ok") + " generate");
    CHECK(ok.code == 0);
    CHECK(cli("report " + q(dir / "ok")).code == 0);
    CHECK(cli("--out " + q(dir / "cha") + " --offline --set 'dataset_description=Math.' enhance --policy add_context " +
              q(testing_util::fixture("seeds/gsm8k.json")))
              .code == 0);
    CHECK(fs::exists(dir / "cha" / "dataset-cha.json"));
    CHECK(cli("feedback " + q(dir / "ok") + " < /dev/null").code == 1);
}

}
