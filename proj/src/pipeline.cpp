#include "datagen/pipeline.hpp"

#include "datagen/context.hpp"
#include "datagen/engine.hpp"
#include "datagen/errors.hpp"
#include "datagen/math_verifier.hpp"
#include "datagen/quality.hpp"
#include "datagen/util.hpp"

namespace datagen {
namespace {

void stage_event(RunManifest &log, std::string_view stage, std::string_view status, std::size_t items) {
    log.add_event({{"type", "stage"}, {"stage", stage}, {"status", status}, {"items", items}});
}

} // namespace

SandboxOptions sandbox_options(const RunConfig &config) {
    SandboxOptions s;
    s.interpreter = config.interpreter;
    s.timeout = std::chrono::milliseconds(static_cast<std::int64_t>(config.sandbox_timeout_s * 1000.0));
    return s;
}

DedupeResult dedupe_items(Gateway &gateway, const std::string &embedding_model, std::span<const DatasetItem> items,
                          std::optional<double> theta, std::uint64_t seed, int workers, RunManifest &log) {
    if (items.size() < 2) {
        DedupeResult r;
        r.items.assign(items.begin(), items.end());
        for (std::size_t i = 0; i < items.size(); ++i)
            r.kept_indices.push_back(i);
        r.theta = theta.value_or(0.0);
        log.set_section("dedupe", r.to_json());
        return r;
    }
    std::vector<std::string> texts, ids;
    for (const auto &item : items) {
        texts.push_back(embedding_text(item));
        ids.push_back(item.id);
    }
    auto embeddings = gateway.embed(texts, embedding_model, log);
    auto matrix = build_similarity_matrix(embeddings, ids, workers);
    double t = theta ? *theta : default_theta(matrix);
    auto result = group_check(items, matrix, t, derive_seed(seed, fnv1a64("dedupe")));
    auto section = result.to_json();
    section["theta_source"] = theta ? "configured" : "first percentile";
    log.set_section("dedupe", section);
    return result;
}

PipelineResult run_pipeline(const RunConfig &config, const SeedDataset &seed, PipelineServices services,
                            RunManifest &log) {
    config.validate();
    auto descriptor = make_descriptor(config, seed);
    auto ctx = make_stage_context(services.gateway, services.templates, config.generation);
    const auto &toggles = config.stages;

    PipelineResult out;
    out.items = run_generation(ctx, config, seed, descriptor, log).items;
    stage_event(log, "generation", "done", out.items.size());

    if (toggles.quality) {
        out.items = quality_pass(ctx, out.items, descriptor, config.generation.reflection_max_epochs, log).items;
        stage_event(log, "quality", "done", out.items.size());
    } else {
        stage_event(log, "quality", "disabled", out.items.size());
    }

    if (toggles.math_verify && descriptor.answer_format == AnswerFormat::numeric) {
        out.items = verify_math(ctx, out.items, services.sandbox, log).items;
        stage_event(log, "math_verify", "done", out.items.size());
    } else {
        stage_event(log, "math_verify", toggles.math_verify ? "not numeric" : "disabled", out.items.size());
    }

    if (toggles.rag) {
        if (!services.retriever)
            throw ConfigError("the rag stage needs a corpus directory or a live retriever");
        out.items = validate_facts(ctx, out.items, *services.retriever, config.evidence_chars, log).items;
        stage_event(log, "rag", "done", out.items.size());
    } else {
        stage_event(log, "rag", "disabled", out.items.size());
    }

    if (toggles.dedupe) {
        out.items = dedupe_items(services.gateway, config.generation.embedding_model, out.items,
                                 config.generation.dedupe_theta, config.generation.seed,
                                 config.generation.max_worker, log)
                        .items;
        stage_event(log, "dedupe", "done", out.items.size());
    } else {
        stage_event(log, "dedupe", "disabled", out.items.size());
    }

    if (toggles.difficulty) {
        std::optional<DifficultyPolicy> policy;
        if (config.difficulty_policy != "random")
            policy = difficulty_policy_from_string(config.difficulty_policy);
        out.challenged = enhance_dataset(ctx, out.items, descriptor, policy,
                                         derive_seed(config.generation.seed, fnv1a64("difficulty")), log)
                             .items;
        stage_event(log, "difficulty", "done", out.challenged->size());
    } else {
        stage_event(log, "difficulty", "disabled", out.items.size());
    }
    return out;
}

} // namespace datagen
