#include "datagen/commands.hpp"
#include "datagen/engine.hpp"
#include "datagen/errors.hpp"

#include <CLI11.hpp>

#include <unistd.h>

#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace datagen;

namespace {

int run(CLI::App &app, int argc, char **argv) {
    CommonOptions common;
    std::string config_path, out_path;
    std::uint64_t seed = 0;

    app.fallthrough();
    app.require_subcommand(1);
    app.add_option("--config", config_path, "Run configuration (JSON)");
    app.add_option("--set", common.overrides, "Override a config key: key=value")->take_all();
    app.add_option("--out", out_path, "Output directory");
    app.add_flag("--offline", common.offline, "Use the scripted model, hashing embedder and local corpus");
    auto *seed_opt = app.add_option("--seed", seed, "Run seed");

    auto *generate = app.add_subcommand("generate", "Run the full pipeline into a run directory");

    EnhanceOptions enhance;
    std::string policy;
    auto *enh = app.add_subcommand("enhance", "Difficulty enhancement (or the quality loop with --quality)");
    enh->add_option("input", enhance.input, "Run directory or dataset file")->required();
    enh->add_flag("--quality", enhance.quality, "Run self-reflection and self-enhancement instead");
    enh->add_option("--policy", policy, "random, paraphrase_question, add_context, paraphrase_choices, add_choice");

    fs::path verify_input, validate_input, dedupe_input;
    auto *verify = app.add_subcommand("verify", "Code-based label verification for numeric datasets");
    verify->add_option("input", verify_input, "Run directory or dataset file")->required();
    auto *validate = app.add_subcommand("validate", "Retrieval-backed fact validation");
    validate->add_option("input", validate_input, "Run directory or dataset file")->required();
    double theta = 0;
    auto *dedupe = app.add_subcommand("dedupe", "Group checking over embedding distances");
    dedupe->add_option("input", dedupe_input, "Run directory or dataset file")->required();
    auto *theta_opt = dedupe->add_option("--theta", theta, "Distance threshold (default: 1st percentile)");

    MetricsOptions metrics;
    std::string original_path;
    auto *met = app.add_subcommand("metrics", "Diversity metrics, optionally against the original data");
    met->add_option("generated", metrics.generated, "Generated dataset")->required();
    met->add_option("--original", original_path, "Original dataset");

    BenchOptions bench;
    std::string bench_original, candidate, judge;
    auto *ben = app.add_subcommand("bench", "LLM-as-judge evaluation and constraint compliance");
    ben->add_option("dataset", bench.dataset, "Dataset to evaluate on")->required();
    ben->add_option("--original", bench_original, "Original dataset for the ori. column");
    ben->add_option("--candidate-model", candidate, "Model that answers");
    ben->add_option("--judge-model", judge, "Model that judges");
    ben->add_option("--constraint", bench.constraints, "Constraint to audit (repeatable)");
    ben->add_flag("--combined", bench.combined, "Also audit all constraints together");
    ben->add_flag("--compliance-only", bench.skip_evaluation, "Skip the accuracy evaluation");

    fs::path feedback_dir;
    std::string feedback_input;
    auto *fb = app.add_subcommand("feedback", "Interactive human review of a run's dataset");
    fb->add_option("run_dir", feedback_dir, "Run directory")->required();
    fb->add_option("--input", feedback_input, "Read feedback lines from a file instead of the terminal");

    fs::path report_dir;
    auto *rep = app.add_subcommand("report", "Consolidated cost and quality report of a run");
    rep->add_option("run_dir", report_dir, "Run directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    if (!config_path.empty())
        common.config = config_path;
    if (!out_path.empty())
        common.out = out_path;
    if (*seed_opt)
        common.seed = seed;

    if (generate->parsed()) {
        std::cout << cmd_generate(common).string() << "\n";
    } else if (enh->parsed()) {
        if (!policy.empty())
            enhance.policy = policy;
        std::cout << cmd_enhance(common, enhance).string() << "\n";
    } else if (verify->parsed()) {
        std::cout << cmd_verify(common, verify_input).string() << "\n";
    } else if (validate->parsed()) {
        std::cout << cmd_validate(common, validate_input).string() << "\n";
    } else if (dedupe->parsed()) {
        std::optional<double> t;
        if (*theta_opt)
            t = theta;
        std::cout << cmd_dedupe(common, dedupe_input, t).string() << "\n";
    } else if (met->parsed()) {
        if (!original_path.empty())
            metrics.original = original_path;
        std::cout << cmd_metrics(common, metrics).dump(2) << "\n";
    } else if (ben->parsed()) {
        if (!bench_original.empty())
            bench.original = bench_original;
        if (!candidate.empty())
            bench.candidate_model = candidate;
        if (!judge.empty())
            bench.judge_model = judge;
        std::cout << cmd_bench(common, bench).dump(2) << "\n";
    } else if (fb->parsed()) {
        bool done;
        if (!feedback_input.empty()) {
            std::ifstream in(feedback_input);
            if (!in)
                throw ConfigError("cannot read " + feedback_input);
            done = cmd_feedback(common, feedback_dir, in, std::cout);
        } else {
            if (!::isatty(STDIN_FILENO))
                throw ConfigError("feedback is interactive; run it in a terminal or pass --input");
            done = cmd_feedback(common, feedback_dir, std::cin, std::cout);
        }
        std::cout << (done ? "\nall items reviewed\n" : "\nprogress saved; run again to resume\n");
    } else if (rep->parsed()) {
        std::cout << cmd_report(report_dir).dump(2) << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Synthetic dataset generation toolkit", "datagen"};
    try {
        return run(app, argc, argv);
    } catch (const PartialResultError &e) {
        std::cerr << "partial result: " << e.what() << "\n";
        return 2;
    } catch (const ProviderError &e) {
        std::cerr << "provider failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
