#include "datagen/commands.hpp"

#include "datagen/bench.hpp"
#include "datagen/context.hpp"
#include "datagen/engine.hpp"
#include "datagen/errors.hpp"
#include "datagen/feedback.hpp"
#include "datagen/http_provider.hpp"
#include "datagen/math_verifier.hpp"
#include "datagen/metrics.hpp"
#include "datagen/mock_provider.hpp"
#include "datagen/pipeline.hpp"
#include "datagen/post_processor.hpp"
#include "datagen/quality.hpp"
#include "datagen/report.hpp"
#include "datagen/scripted_provider.hpp"
#include "datagen/util.hpp"

#include <cstdlib>

namespace datagen {

namespace fs = std::filesystem;

RunConfig resolve_config(const CommonOptions &options, const fs::path &fallback_dir) {
    RunConfig config;
    if (options.config) {
        config = load_run_config(*options.config);
    } else if (!fallback_dir.empty() && fs::exists(fallback_dir / "config.json")) {
        config = load_run_config(fallback_dir / "config.json");
    }
    for (const auto &assignment : options.overrides)
        apply_override(config, assignment);
    if (options.seed)
        config.generation.seed = *options.seed;
    if (options.offline)
        config.provider = "mock";
    return config;
}

std::string run_id_for(const RunConfig &config) { return hash_hex(to_json(config).dump()); }

std::unique_ptr<Services> make_services(const RunConfig &config, bool offline) {
    auto s = std::make_unique<Services>();
    bool mock = offline || config.provider == "mock";
    if (mock) {
        ScriptedOptions so;
        so.label_error_rate = config.mock_label_error_rate;
        so.reject_rate = config.mock_reject_rate;
        so.seed = config.generation.seed;
        s->chat = std::make_shared<ScriptedProvider>(so);
        s->embedder = std::make_shared<HashingEmbedder>(64, config.generation.seed);
    } else {
        const char *key = std::getenv(config.api_key_env.c_str());
        if (!key || !*key)
            throw ConfigError("environment variable " + config.api_key_env + " is not set");
        HttpOptions http;
        http.base_url = config.base_url;
        http.api_key = key;
        s->chat = std::make_shared<OpenAiChatProvider>(http);
        s->embedder = std::make_shared<OpenAiEmbeddingProvider>(http);
    }
    GatewayOptions g;
    g.max_concurrency = config.generation.max_worker;
    g.max_retries = config.max_retries;
    g.context_window = config.context_window;
    g.cache_dir = config.cache_dir;
    if (!config.rate_card.empty())
        g.rates = RateCard::load(config.rate_card);
    s->gateway = std::make_unique<Gateway>(s->chat, s->embedder, g);
    s->templates = config.template_dir.empty() ? TemplateLibrary::defaults() : TemplateLibrary::load(config.template_dir);
    if (!config.corpus_dir.empty())
        s->retriever = std::make_unique<LocalCorpusRetriever>(config.corpus_dir);
    else if (!mock)
        s->retriever = std::make_unique<WikipediaRetriever>(config.wiki_base_url, config.wiki_requests_per_second);
    return s;
}

RunManifest open_manifest(const RunConfig &config, const fs::path &dir) {
    if (!dir.empty() && fs::exists(dir / "manifest.json"))
        return RunManifest::load(dir / "manifest.json");
    return RunManifest(run_id_for(config), to_json(config));
}

void write_run_outputs(const RunManifest &manifest, const fs::path &dir) {
    fs::create_directories(dir);
    manifest.save(dir / "manifest.json");
    auto report = build_report(manifest);
    write_file_atomic(dir / "report.json", report.dump(2) + "\n");
    write_file_atomic(dir / "report.md", report_markdown(report));
    std::string stages;
    for (const auto &e : manifest.events()) {
        if (e.value("type", "") == "stage")
            stages += e.value("stage", "") + "\t" + e.value("status", "") + "\t" +
                      std::to_string(e.value("items", 0)) + "\n";
    }
    write_file_atomic(dir / "stages.log", stages);
}

fs::path cmd_generate(const CommonOptions &options) {
    auto config = resolve_config(options);
    config.validate();
    if (config.seed_dataset.empty())
        throw ConfigError("seed_dataset is not set");
    auto seed = load_dataset(config.seed_dataset);
    auto services = make_services(config, options.offline);
    auto run_id = run_id_for(config);
    fs::path dir = options.out ? *options.out : fs::path("runs") / run_id;
    fs::create_directories(dir);
    write_file_atomic(dir / "config.json", to_json(config).dump(2) + "\n");

    RunManifest manifest(run_id, to_json(config));
    PipelineServices ps{*services->gateway, services->templates, services->retriever.get(), sandbox_options(config)};
    try {
        auto result = run_pipeline(config, seed, ps, manifest);
        save_dataset(result.items, dir / "dataset.json");
        if (result.challenged)
            save_dataset(*result.challenged, dir / "dataset-cha.json");
    } catch (const PartialResultError &e) {
        save_dataset(e.items(), dir / "dataset.json");
        manifest.add_event({{"type", "partial_result"}, {"items", e.items().size()}, {"reason", e.what()}});
        write_run_outputs(manifest, dir);
        throw;
    }
    write_run_outputs(manifest, dir);
    return dir;
}

DatasetTarget resolve_target(const fs::path &input, const CommonOptions &options) {
    DatasetTarget t;
    if (fs::is_directory(input)) {
        t.run_dir = input;
        t.dataset = input / "dataset.json";
        t.out_dir = options.out ? *options.out : input;
    } else {
        if (!options.out)
            throw ConfigError("--out is required when the input is a dataset file");
        t.dataset = input;
        t.out_dir = *options.out;
    }
    if (!fs::exists(t.dataset))
        throw ConfigError("dataset not found: " + t.dataset.string());
    fs::create_directories(t.out_dir);
    return t;
}

namespace {

struct Session {
    DatasetTarget target;
    RunConfig config;
    std::unique_ptr<Services> services;
    SeedDataset data;
    DatasetDescriptor descriptor;
    RunManifest manifest;

    StageContext context() const {
        return make_stage_context(*services->gateway, services->templates, config.generation);
    }
    void finish(std::span<const DatasetItem> items, const char *file) {
        save_dataset(items, target.out_dir / file);
        if (!fs::exists(target.out_dir / "config.json"))
            write_file_atomic(target.out_dir / "config.json", to_json(config).dump(2) + "\n");
        write_run_outputs(manifest, target.out_dir);
    }
};

Session open_session(const CommonOptions &options, const fs::path &input) {
    Session s;
    s.target = resolve_target(input, options);
    s.config = resolve_config(options, s.target.run_dir);
    s.services = make_services(s.config, options.offline);
    s.data = load_dataset(s.target.dataset);
    s.descriptor = make_descriptor(s.config, s.data);
    s.manifest = open_manifest(s.config, s.target.run_dir);
    return s;
}

void stage_done(RunManifest &log, const std::string &stage, std::size_t items) {
    log.add_event({{"type", "stage"}, {"stage", stage}, {"status", "done"}, {"items", items}});
}

} // namespace

fs::path cmd_enhance(const CommonOptions &options, const EnhanceOptions &enhance) {
    auto s = open_session(options, enhance.input);
    auto ctx = s.context();
    if (enhance.quality) {
        auto r = quality_pass(ctx, s.data.items, s.descriptor, s.config.generation.reflection_max_epochs, s.manifest);
        stage_done(s.manifest, "quality", r.items.size());
        s.finish(r.items, "dataset.json");
        return s.target.out_dir / "dataset.json";
    }
    std::optional<DifficultyPolicy> policy;
    auto name = enhance.policy.value_or(s.config.difficulty_policy);
    if (name != "random")
        policy = difficulty_policy_from_string(name);
    auto r = enhance_dataset(ctx, s.data.items, s.descriptor, policy,
                             derive_seed(s.config.generation.seed, fnv1a64("difficulty")), s.manifest);
    stage_done(s.manifest, "difficulty", r.items.size());
    s.finish(r.items, "dataset-cha.json");
    return s.target.out_dir / "dataset-cha.json";
}

fs::path cmd_verify(const CommonOptions &options, const fs::path &input) {
    auto s = open_session(options, input);
    if (s.descriptor.answer_format != AnswerFormat::numeric)
        throw ConfigError("code-based verification applies to numeric-answer datasets only");
    auto r = verify_math(s.context(), s.data.items, sandbox_options(s.config), s.manifest);
    stage_done(s.manifest, "math_verify", r.items.size());
    s.finish(r.items, "dataset.json");
    return s.target.out_dir / "dataset.json";
}

fs::path cmd_validate(const CommonOptions &options, const fs::path &input) {
    auto s = open_session(options, input);
    if (!s.services->retriever)
        throw ConfigError("validation needs corpus_dir (offline) or the live provider");
    auto r = validate_facts(s.context(), s.data.items, *s.services->retriever, s.config.evidence_chars, s.manifest);
    stage_done(s.manifest, "rag", r.items.size());
    s.finish(r.items, "dataset.json");
    return s.target.out_dir / "dataset.json";
}

fs::path cmd_dedupe(const CommonOptions &options, const fs::path &input, std::optional<double> theta) {
    auto s = open_session(options, input);
    auto r = dedupe_items(*s.services->gateway, s.config.generation.embedding_model, s.data.items,
                          theta ? theta : s.config.generation.dedupe_theta, s.config.generation.seed,
                          s.config.generation.max_worker, s.manifest);
    stage_done(s.manifest, "dedupe", r.items.size());
    s.finish(r.items, "dataset.json");
    return s.target.out_dir / "dataset.json";
}

Json cmd_metrics(const CommonOptions &options, const MetricsOptions &metrics) {
    auto config = resolve_config(options);
    auto services = make_services(config, options.offline);
    RunManifest log(run_id_for(config), to_json(config));
    auto report_for = [&](const fs::path &path) {
        auto data = load_dataset(path);
        std::vector<std::string> texts;
        for (const auto &item : data.items)
            texts.push_back(embedding_text(item));
        auto embeddings = services->gateway->embed(texts, config.generation.embedding_model, log);
        return std::make_pair(diversity_report(data.items, embeddings), data.items);
    };
    auto [generated, gen_items] = report_for(metrics.generated);
    Json out{{"generated", generated.to_json()}};
    std::string md;
    if (metrics.original) {
        auto [original, orig_items] = report_for(*metrics.original);
        auto overlap = entity_overlap(orig_items, gen_items);
        out["original"] = original.to_json();
        out["entity_overlap"] = overlap.to_json();
        md = comparison_table(original, generated, overlap);
    } else {
        md = generated.to_json().dump(2) + "\n";
    }
    out["cost"] = {{"calls", log.call_count()}, {"cost_usd", to_dollars(log.total_cost())}};
    fs::path dir = options.out ? *options.out : metrics.generated.parent_path();
    if (!dir.empty())
        fs::create_directories(dir);
    write_file_atomic(dir / "metrics.json", out.dump(2) + "\n");
    write_file_atomic(dir / "metrics.md", md);
    return out;
}

Json cmd_bench(const CommonOptions &options, const BenchOptions &bench) {
    auto config = resolve_config(options);
    auto services = make_services(config, options.offline);
    RunManifest log(run_id_for(config), to_json(config));
    auto candidate = make_stage_context(*services->gateway, services->templates, config.generation);
    auto judge = candidate;
    if (bench.candidate_model)
        candidate.model = *bench.candidate_model;
    if (bench.judge_model)
        judge.model = *bench.judge_model;
    judge.temperature = 0;

    auto data = load_dataset(bench.dataset);
    Json out{{"dataset", bench.dataset.string()}};
    std::string md;
    std::string jsonl;
    if (!bench.skip_evaluation) {
        BenchRow row{candidate.model, std::nullopt, std::nullopt};
        auto gen = evaluate_model(candidate, judge, data.items, data.answer_format, log);
        row.generated = gen.accuracy;
        out["generated"] = gen.summary_json();
        jsonl += gen.to_jsonl();
        if (bench.original) {
            auto orig_data = load_dataset(*bench.original);
            auto orig = evaluate_model(candidate, judge, orig_data.items, orig_data.answer_format, log);
            row.original = orig.accuracy;
            out["original"] = orig.summary_json();
            jsonl += orig.to_jsonl();
        }
        md += bench_table(std::span<const BenchRow>(&row, 1));
    }
    if (!bench.constraints.empty()) {
        Json compliance = Json::array();
        md += "\n| Constraint | Method | Checked | Yes | Rate |\n|---|---|---|---|---|\n";
        auto add = [&](const ComplianceResult &r) {
            compliance.push_back(r.to_json());
            char rate[16];
            std::snprintf(rate, sizeof rate, "%.2f%%", r.rate * 100.0);
            md += "| " + r.constraint + " | " + r.method + " | " + std::to_string(r.checked) + " | " +
                  std::to_string(r.yes) + " | " + rate + " |\n";
        };
        for (const auto &c : bench.constraints) {
            add(check_compliance(judge, data.items, c, log));
            if (auto rule = parse_mechanical_constraint(c))
                add(check_local(data.items, c, *rule));
        }
        if (bench.combined && bench.constraints.size() > 1)
            add(check_combined(judge, data.items, bench.constraints, log));
        out["compliance"] = compliance;
    }
    out["cost"] = {{"calls", log.call_count()}, {"cost_usd", to_dollars(log.total_cost())}};
    fs::path dir = options.out ? *options.out : bench.dataset.parent_path();
    if (!dir.empty())
        fs::create_directories(dir);
    write_file_atomic(dir / "verdicts.jsonl", jsonl);
    write_file_atomic(dir / "bench.json", out.dump(2) + "\n");
    write_file_atomic(dir / "bench.md", md);
    return out;
}

bool cmd_feedback(const CommonOptions &options, const fs::path &run_dir, std::istream &in, std::ostream &out) {
    auto dataset = run_dir / "dataset.json";
    if (!fs::exists(dataset))
        throw ConfigError("no dataset.json in " + run_dir.string());
    auto config = resolve_config(options, run_dir);
    auto services = make_services(config, options.offline);
    auto manifest = open_manifest(config, run_dir);
    auto ctx = make_stage_context(*services->gateway, services->templates, config.generation);
    auto data = load_dataset(dataset);
    auto result = run_feedback(ctx, std::move(data.items), in, out, run_dir / "feedback_progress.json", manifest);
    if (result.quit) {
        manifest.save(run_dir / "manifest.json");
        return false;
    }
    save_dataset(result.items, dataset);
    manifest.add_event({{"type", "stage"}, {"stage", "human_feedback"}, {"status", "done"},
                        {"items", result.items.size()}});
    write_run_outputs(manifest, run_dir);
    return true;
}

Json cmd_report(const fs::path &run_dir) {
    auto path = run_dir / "manifest.json";
    if (!fs::exists(path))
        throw ConfigError("no manifest.json in " + run_dir.string());
    auto manifest = RunManifest::load(path);
    auto report = build_report(manifest);
    write_file_atomic(run_dir / "report.json", report.dump(2) + "\n");
    write_file_atomic(run_dir / "report.md", report_markdown(report));
    return report;
}

} // namespace datagen
