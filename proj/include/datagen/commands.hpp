#pragma once

#include "datagen/config.hpp"
#include "datagen/fact_validator.hpp"
#include "datagen/gateway.hpp"
#include "datagen/templates.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace datagen {

/// Flags shared by every subcommand.
struct CommonOptions {
    std::optional<std::filesystem::path> config;
    std::vector<std::string> overrides;
    std::optional<std::filesystem::path> out;
    bool offline = false;
    std::optional<std::uint64_t> seed;
};

/// Config file (or defaults, or `fallback_dir`/config.json), then --set overrides, then --seed.
/// --offline forces the mock provider.
RunConfig resolve_config(const CommonOptions &options, const std::filesystem::path &fallback_dir = {});

/// Stable id of a run: hash of the resolved config.
std::string run_id_for(const RunConfig &config);

struct Services {
    std::shared_ptr<ChatProvider> chat;
    std::shared_ptr<EmbeddingProvider> embedder;
    std::unique_ptr<Gateway> gateway;
    TemplateLibrary templates;
    std::unique_ptr<Retriever> retriever;
};

/// Mock provider: scripted chat model and hashing embedder. Live provider: the API key is read
/// from the environment variable named by api_key_env; a missing key is a ConfigError raised
/// before anything is sent.
std::unique_ptr<Services> make_services(const RunConfig &config, bool offline);

/// Fresh manifest for `config`, or the one already stored in `dir`.
RunManifest open_manifest(const RunConfig &config, const std::filesystem::path &dir);

/// Writes manifest.json, report.json, report.md and stages.log into `dir`.
void write_run_outputs(const RunManifest &manifest, const std::filesystem::path &dir);

/// Full pipeline into a run directory (default runs/<run id>). A PartialResultError is rethrown
/// after the partial dataset and manifest have been written.
std::filesystem::path cmd_generate(const CommonOptions &options);

/// Where a dataset command reads from and writes to. `input` is a run directory or a dataset
/// file; output defaults to the run directory and is required for a plain file.
struct DatasetTarget {
    std::filesystem::path dataset;
    std::filesystem::path out_dir;
    std::filesystem::path run_dir;
};
DatasetTarget resolve_target(const std::filesystem::path &input, const CommonOptions &options);

struct EnhanceOptions {
    std::filesystem::path input;
    bool quality = false;
    std::optional<std::string> policy;
};
/// Difficulty enhancement into dataset-cha.json, or the quality loop into dataset.json.
std::filesystem::path cmd_enhance(const CommonOptions &options, const EnhanceOptions &enhance);

std::filesystem::path cmd_verify(const CommonOptions &options, const std::filesystem::path &input);
std::filesystem::path cmd_validate(const CommonOptions &options, const std::filesystem::path &input);
std::filesystem::path cmd_dedupe(const CommonOptions &options, const std::filesystem::path &input,
                                 std::optional<double> theta);

struct MetricsOptions {
    std::filesystem::path generated;
    std::optional<std::filesystem::path> original;
};
/// Writes metrics.json and metrics.md into the output directory and returns the JSON.
Json cmd_metrics(const CommonOptions &options, const MetricsOptions &metrics);

struct BenchOptions {
    std::filesystem::path dataset;
    std::optional<std::filesystem::path> original;
    std::optional<std::string> candidate_model;
    std::optional<std::string> judge_model;
    std::vector<std::string> constraints;
    bool combined = false;
    bool skip_evaluation = false;
};
/// Writes verdicts.jsonl, bench.json and bench.md and returns the JSON summary.
Json cmd_bench(const CommonOptions &options, const BenchOptions &bench);

/// Interactive review of a run's dataset; progress is kept in feedback_progress.json.
/// Returns true when every item has been reviewed.
bool cmd_feedback(const CommonOptions &options, const std::filesystem::path &run_dir, std::istream &in,
                  std::ostream &out);

Json cmd_report(const std::filesystem::path &run_dir);

} // namespace datagen
