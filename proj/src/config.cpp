#include "datagen/config.hpp"

#include "datagen/errors.hpp"
#include "datagen/util.hpp"

#include <cmath>

namespace datagen {

int GenerationConfig::iterations() const {
    if (batch_size <= 0)
        return 0;
    return (generation_number + batch_size - 1) / batch_size;
}

void GenerationConfig::validate() const {
    if (model.empty())
        throw ConfigError("model must be set");
    if (generation_number <= 0)
        throw ConfigError("generation_number must be positive");
    if (batch_size <= 0)
        throw ConfigError("batch_size must be positive");
    if (batch_size > generation_number)
        throw ConfigError("batch_size must not exceed generation_number");
    if (!(temperature >= 0.0) || !std::isfinite(temperature))
        throw ConfigError("temperature must be >= 0");
    if (!(top_p > 0.0 && top_p <= 1.0))
        throw ConfigError("top_p must be in (0, 1]");
    if (few_shot_num <= 0)
        throw ConfigError("few_shot_num must be positive");
    if (max_tokens <= 0)
        throw ConfigError("max_tokens must be positive");
    if (max_worker <= 0)
        throw ConfigError("max_worker must be positive");
    if (reflection_max_epochs <= 0)
        throw ConfigError("reflection_max_epochs must be positive");
    if (dedupe_theta && !(*dedupe_theta > 0.0))
        throw ConfigError("dedupe_theta must be > 0");
    if (label_ratio) {
        double total = 0;
        for (const auto &[label, fraction] : *label_ratio) {
            if (!(fraction >= 0.0 && fraction <= 1.0))
                throw ConfigError("label_ratio fraction for '" + label + "' must be in [0, 1]");
            total += fraction;
        }
        if (total > 1.0 + 1e-9)
            throw ConfigError("label_ratio fractions sum to more than 1");
    }
}

void RunConfig::validate() const {
    generation.validate();
    if (dataset_description.empty())
        throw ConfigError("dataset_description must be nonempty");
    if (kmeans_max_iters <= 0 || kmeans_restarts <= 0)
        throw ConfigError("kmeans_max_iters and kmeans_restarts must be positive");
    if (provider != "mock" && provider != "openai")
        throw ConfigError("provider must be \"mock\" or \"openai\"");
    if (interpreter.empty())
        throw ConfigError("interpreter must be a nonempty command list");
    if (!(sandbox_timeout_s > 0))
        throw ConfigError("sandbox_timeout_s must be positive");
    if (evidence_chars == 0)
        throw ConfigError("evidence_chars must be positive");
    if (difficulty_policy != "random" && difficulty_policy != "paraphrase_question" &&
        difficulty_policy != "add_context" && difficulty_policy != "paraphrase_choices" &&
        difficulty_policy != "add_choice")
        throw ConfigError("unknown difficulty_policy: " + difficulty_policy);
}

std::string_view to_string(SelectorStrategy strategy) {
    return strategy == SelectorStrategy::random ? "random" : "cluster_diverse";
}

Json to_json(const GenerationConfig &c) {
    Json j;
    j["model"] = c.model;
    j["generation_number"] = c.generation_number;
    j["batch_size"] = c.batch_size;
    j["temperature"] = c.temperature;
    j["top_p"] = c.top_p;
    j["few_shot_num"] = c.few_shot_num;
    j["max_tokens"] = c.max_tokens;
    j["with_label"] = c.with_label;
    j["max_worker"] = c.max_worker;
    j["embedding_model"] = c.embedding_model;
    j["label_ratio"] = c.label_ratio ? Json(*c.label_ratio) : Json(nullptr);
    j["dedupe_theta"] = c.dedupe_theta ? Json(*c.dedupe_theta) : Json(nullptr);
    j["reflection_max_epochs"] = c.reflection_max_epochs;
    j["seed"] = c.seed;
    return j;
}

namespace {

template <typename T> T get_as(const Json &v, const std::string &key) {
    try {
        return v.get<T>();
    } catch (const nlohmann::json::exception &) {
        throw ConfigError("config key '" + key + "' has the wrong type: " + v.dump());
    }
}

std::filesystem::path resolve(const Json &v, const std::string &key, const std::filesystem::path &base) {
    std::filesystem::path p = get_as<std::string>(v, key);
    if (p.empty() || p.is_absolute() || base.empty())
        return p;
    return base / p;
}

bool assign_generation(GenerationConfig &c, const std::string &key, const Json &v) {
    if (key == "model")
        c.model = get_as<std::string>(v, key);
    else if (key == "generation_number")
        c.generation_number = get_as<int>(v, key);
    else if (key == "batch_size")
        c.batch_size = get_as<int>(v, key);
    else if (key == "temperature")
        c.temperature = get_as<double>(v, key);
    else if (key == "top_p")
        c.top_p = get_as<double>(v, key);
    else if (key == "few_shot_num" || key == "few_show_num")
        c.few_shot_num = get_as<int>(v, key);
    else if (key == "max_tokens")
        c.max_tokens = get_as<int>(v, key);
    else if (key == "with_label")
        c.with_label = get_as<bool>(v, key);
    else if (key == "max_worker")
        c.max_worker = get_as<int>(v, key);
    else if (key == "embedding_model")
        c.embedding_model = get_as<std::string>(v, key);
    else if (key == "label_ratio")
        c.label_ratio = v.is_null() ? std::nullopt
                                    : std::optional(get_as<std::map<std::string, double>>(v, key));
    else if (key == "dedupe_theta")
        c.dedupe_theta = v.is_null() ? std::nullopt : std::optional(get_as<double>(v, key));
    else if (key == "reflection_max_epochs")
        c.reflection_max_epochs = get_as<int>(v, key);
    else if (key == "seed")
        c.seed = get_as<std::uint64_t>(v, key);
    else
        return false;
    return true;
}

void assign(RunConfig &c, const std::string &key, const Json &v, const std::filesystem::path &base) {
    if (assign_generation(c.generation, key, v))
        return;
    if (key == "dataset_name")
        c.dataset_name = get_as<std::string>(v, key);
    else if (key == "dataset_description")
        c.dataset_description = get_as<std::string>(v, key);
    else if (key == "dataset_constraint" || key == "constraints") {
        if (v.is_string()) {
            c.constraints.clear();
            for (auto &line : split_lines(v.get<std::string>())) {
                auto t = trim(line);
                if (!t.empty())
                    c.constraints.push_back(t);
            }
        } else {
            c.constraints = get_as<std::vector<std::string>>(v, key);
        }
    } else if (key == "seed_dataset")
        c.seed_dataset = resolve(v, key, base);
    else if (key == "answer_format")
        c.answer_format = v.is_null() ? std::nullopt
                                      : std::optional(answer_format_from_string(get_as<std::string>(v, key)));
    else if (key == "selector") {
        auto s = get_as<std::string>(v, key);
        if (s == "random")
            c.selector = SelectorStrategy::random;
        else if (s == "cluster_diverse")
            c.selector = SelectorStrategy::cluster_diverse;
        else
            throw ConfigError("selector must be \"random\" or \"cluster_diverse\"");
    } else if (key == "kmeans_max_iters")
        c.kmeans_max_iters = get_as<int>(v, key);
    else if (key == "kmeans_restarts")
        c.kmeans_restarts = get_as<int>(v, key);
    else if (key == "attribute_guided")
        c.attribute_guided = get_as<bool>(v, key);
    else if (key == "attributes")
        c.attributes = get_as<std::vector<std::string>>(v, key);
    else if (key == "generation_feedback")
        c.generation_feedback = get_as<std::vector<std::string>>(v, key);
    else if (key == "enable_quality")
        c.stages.quality = get_as<bool>(v, key);
    else if (key == "enable_math_verify")
        c.stages.math_verify = get_as<bool>(v, key);
    else if (key == "enable_rag")
        c.stages.rag = get_as<bool>(v, key);
    else if (key == "enable_difficulty")
        c.stages.difficulty = get_as<bool>(v, key);
    else if (key == "enable_dedupe")
        c.stages.dedupe = get_as<bool>(v, key);
    else if (key == "difficulty_policy")
        c.difficulty_policy = get_as<std::string>(v, key);
    else if (key == "provider")
        c.provider = get_as<std::string>(v, key);
    else if (key == "base_url")
        c.base_url = get_as<std::string>(v, key);
    else if (key == "api_key_env")
        c.api_key_env = get_as<std::string>(v, key);
    else if (key == "context_window")
        c.context_window = get_as<std::int64_t>(v, key);
    else if (key == "max_retries")
        c.max_retries = get_as<int>(v, key);
    else if (key == "rate_card")
        c.rate_card = resolve(v, key, base);
    else if (key == "template_dir")
        c.template_dir = resolve(v, key, base);
    else if (key == "cache_dir")
        c.cache_dir = resolve(v, key, base);
    else if (key == "mock_label_error_rate")
        c.mock_label_error_rate = get_as<double>(v, key);
    else if (key == "mock_reject_rate")
        c.mock_reject_rate = get_as<double>(v, key);
    else if (key == "interpreter") {
        if (v.is_string())
            c.interpreter = {v.get<std::string>()};
        else
            c.interpreter = get_as<std::vector<std::string>>(v, key);
    } else if (key == "sandbox_timeout_s")
        c.sandbox_timeout_s = get_as<double>(v, key);
    else if (key == "corpus_dir")
        c.corpus_dir = resolve(v, key, base);
    else if (key == "wiki_base_url")
        c.wiki_base_url = get_as<std::string>(v, key);
    else if (key == "evidence_chars")
        c.evidence_chars = get_as<std::size_t>(v, key);
    else if (key == "wiki_requests_per_second")
        c.wiki_requests_per_second = get_as<double>(v, key);
    else if (key == "api_key" || key == "openai_api")
        throw ConfigError("provider credentials must come from the environment variable named by api_key_env, "
                          "not from config files");
    else
        throw ConfigError("unknown config key: " + key);
}

} // namespace

const std::vector<std::string> &documented_config_keys() {
    static const std::vector<std::string> keys = {
        "model",           "generation_number", "batch_size",        "temperature",
        "top_p",           "few_shot_num",      "max_tokens",        "with_label",
        "max_worker",      "embedding_model",   "label_ratio",       "dedupe_theta",
        "reflection_max_epochs", "seed",        "dataset_name",      "dataset_description",
        "dataset_constraint", "seed_dataset",   "answer_format",     "selector",
        "kmeans_max_iters", "kmeans_restarts",  "attribute_guided",  "attributes",
        "generation_feedback", "enable_quality", "enable_math_verify", "enable_rag",
        "enable_difficulty", "enable_dedupe",   "difficulty_policy", "provider",
        "base_url",        "api_key_env",       "context_window",    "max_retries",
        "rate_card",       "template_dir",      "cache_dir",         "mock_label_error_rate",
        "mock_reject_rate", "interpreter",      "sandbox_timeout_s", "corpus_dir",
        "wiki_base_url",   "evidence_chars",    "wiki_requests_per_second",
    };
    return keys;
}

Json to_json(const RunConfig &c) {
    Json j = to_json(c.generation);
    j["dataset_name"] = c.dataset_name;
    j["dataset_description"] = c.dataset_description;
    j["dataset_constraint"] = c.constraints;
    j["seed_dataset"] = c.seed_dataset.string();
    j["answer_format"] = c.answer_format ? Json(std::string(to_string(*c.answer_format))) : Json(nullptr);
    j["selector"] = std::string(to_string(c.selector));
    j["kmeans_max_iters"] = c.kmeans_max_iters;
    j["kmeans_restarts"] = c.kmeans_restarts;
    j["attribute_guided"] = c.attribute_guided;
    j["attributes"] = c.attributes;
    j["generation_feedback"] = c.generation_feedback;
    j["enable_quality"] = c.stages.quality;
    j["enable_math_verify"] = c.stages.math_verify;
    j["enable_rag"] = c.stages.rag;
    j["enable_difficulty"] = c.stages.difficulty;
    j["enable_dedupe"] = c.stages.dedupe;
    j["difficulty_policy"] = c.difficulty_policy;
    j["provider"] = c.provider;
    j["base_url"] = c.base_url;
    j["api_key_env"] = c.api_key_env;
    j["context_window"] = c.context_window;
    j["max_retries"] = c.max_retries;
    j["rate_card"] = c.rate_card.string();
    j["template_dir"] = c.template_dir.string();
    j["cache_dir"] = c.cache_dir.string();
    j["mock_label_error_rate"] = c.mock_label_error_rate;
    j["mock_reject_rate"] = c.mock_reject_rate;
    j["interpreter"] = c.interpreter;
    j["sandbox_timeout_s"] = c.sandbox_timeout_s;
    j["corpus_dir"] = c.corpus_dir.string();
    j["wiki_base_url"] = c.wiki_base_url;
    j["evidence_chars"] = c.evidence_chars;
    j["wiki_requests_per_second"] = c.wiki_requests_per_second;
    return j;
}

GenerationConfig generation_config_from_json(const Json &j) {
    if (!j.is_object())
        throw ConfigError("config must be a JSON object");
    GenerationConfig c;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!assign_generation(c, it.key(), it.value()))
            throw ConfigError("unknown generation config key: " + it.key());
    }
    return c;
}

RunConfig run_config_from_json(const Json &j, const std::filesystem::path &base_dir) {
    if (!j.is_object())
        throw ConfigError("config must be a JSON object");
    RunConfig c;
    for (auto it = j.begin(); it != j.end(); ++it)
        assign(c, it.key(), it.value(), base_dir);
    return c;
}

RunConfig load_run_config(const std::filesystem::path &path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const Error &e) {
        throw ConfigError(e.what());
    }
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::parse_error &e) {
        throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return run_config_from_json(j, path.parent_path());
}

void apply_override(RunConfig &config, const std::string &assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("override must look like key=value: " + assignment);
    auto key = trim(assignment.substr(0, eq));
    auto raw = assignment.substr(eq + 1);
    const auto &keys = documented_config_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
        throw ConfigError("unknown config key in override: " + key);
    Json value;
    try {
        value = Json::parse(raw);
    } catch (const nlohmann::json::parse_error &) {
        value = raw;
    }
    assign(config, key, value, {});
}

DatasetDescriptor make_descriptor(const RunConfig &config, const SeedDataset &seed) {
    DatasetDescriptor d;
    d.name = config.dataset_name;
    d.description = config.dataset_description;
    d.with_label = config.generation.with_label;
    d.answer_format = config.answer_format.value_or(seed.answer_format);
    if (!seed.items.empty() && config.answer_format && *config.answer_format != seed.answer_format) {
        // a declared format must agree with the seed data
        for (const auto &item : seed.items) {
            auto f = item_answer_format(item);
            if (f && *f != *config.answer_format &&
                !(*config.answer_format == AnswerFormat::free_text && *f != AnswerFormat::multiple_choice))
                throw SchemaError("answer_format '" + std::string(to_string(*config.answer_format)) +
                                  "' is inconsistent with seed item '" + item.id + "'");
        }
    }
    if (d.description.empty())
        throw ConfigError("dataset_description must be nonempty");
    return d;
}

} // namespace datagen
