#pragma once

#include "datagen/core.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace datagen {

/// Run parameters of the generator. Defaults mirror the reference constructor:
/// temperature 1, five few-shot examples, 1000 max tokens, labelled output, two workers,
/// text-embedding-ada-002.
struct GenerationConfig {
    std::string model;
    int generation_number = 0;
    int batch_size = 0;
    double temperature = 1.0;
    double top_p = 1.0;
    int few_shot_num = 5;
    int max_tokens = 1000;
    bool with_label = true;
    int max_worker = 2;
    std::string embedding_model = "text-embedding-ada-002";
    std::optional<std::map<std::string, double>> label_ratio;
    std::optional<double> dedupe_theta;
    int reflection_max_epochs = 3;
    std::uint64_t seed = 0;

    /// ceil(generation_number / batch_size)
    int iterations() const;

    /// Throws ConfigError on any violated invariant.
    void validate() const;
};

enum class SelectorStrategy { random, cluster_diverse };

struct StageToggles {
    bool quality = false;
    bool math_verify = false;
    bool rag = false;
    bool difficulty = false;
    bool dedupe = false;
};

/// Everything a `generate` run needs besides the seed data itself.
struct RunConfig {
    GenerationConfig generation;

    std::string dataset_name;
    std::string dataset_description;
    std::vector<std::string> constraints;
    std::filesystem::path seed_dataset;
    std::optional<AnswerFormat> answer_format;

    SelectorStrategy selector = SelectorStrategy::random;
    int kmeans_max_iters = 100;
    int kmeans_restarts = 4;

    bool attribute_guided = false;
    std::vector<std::string> attributes;

    std::vector<std::string> generation_feedback;

    StageToggles stages;
    std::string difficulty_policy = "random";

    // provider
    std::string provider = "mock";
    std::string base_url = "https://api.openai.com";
    std::string api_key_env = "DATAGEN_API_KEY";
    std::int64_t context_window = 128000;
    int max_retries = 3;
    std::filesystem::path rate_card;
    std::filesystem::path template_dir;
    std::filesystem::path cache_dir;
    double mock_label_error_rate = 0.2;
    double mock_reject_rate = 0.3;

    // math verification
    std::vector<std::string> interpreter = {"python3"};
    double sandbox_timeout_s = 10.0;

    // fact validation
    std::filesystem::path corpus_dir;
    std::string wiki_base_url = "https://en.wikipedia.org";
    std::size_t evidence_chars = 4000;
    double wiki_requests_per_second = 2.0;

    void validate() const;
};

Json to_json(const GenerationConfig &config);
GenerationConfig generation_config_from_json(const Json &j);

Json to_json(const RunConfig &config);

/// Unknown keys are rejected so typos surface as ConfigError. Relative paths are resolved
/// against `base_dir`.
RunConfig run_config_from_json(const Json &j, const std::filesystem::path &base_dir = {});
RunConfig load_run_config(const std::filesystem::path &path);

/// Applies a `--set key=value` override. Values are parsed as JSON when possible
/// and as plain strings otherwise.
void apply_override(RunConfig &config, const std::string &assignment);

/// All keys accepted in config files and overrides.
const std::vector<std::string> &documented_config_keys();

DatasetDescriptor make_descriptor(const RunConfig &config, const SeedDataset &seed);

std::string_view to_string(SelectorStrategy strategy);

} // namespace datagen
