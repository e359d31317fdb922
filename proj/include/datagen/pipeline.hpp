#pragma once

#include "datagen/config.hpp"
#include "datagen/core.hpp"
#include "datagen/fact_validator.hpp"
#include "datagen/gateway.hpp"
#include "datagen/post_processor.hpp"
#include "datagen/sandbox.hpp"
#include "datagen/templates.hpp"

#include <optional>
#include <vector>

namespace datagen {

struct PipelineServices {
    Gateway &gateway;
    const TemplateLibrary &templates;
    /// Required only when the rag stage is enabled.
    Retriever *retriever = nullptr;
    SandboxOptions sandbox;
};

struct PipelineResult {
    std::vector<DatasetItem> items;
    /// Difficulty-enhanced copy, when that stage ran.
    std::optional<std::vector<DatasetItem>> challenged;
};

SandboxOptions sandbox_options(const RunConfig &config);

/// Embeds the items, builds the distance matrix and runs group_check with the configured
/// (or per-run default) theta. Writes the "dedupe" section.
DedupeResult dedupe_items(Gateway &gateway, const std::string &embedding_model, std::span<const DatasetItem> items,
                          std::optional<double> theta, std::uint64_t seed, int workers, RunManifest &log);

/// generation -> quality -> code verification (numeric datasets) -> RAG -> dedupe ->
/// difficulty, each stage gated by its toggle. Stage boundaries are logged as events.
PipelineResult run_pipeline(const RunConfig &config, const SeedDataset &seed, PipelineServices services,
                            RunManifest &log);

} // namespace datagen
