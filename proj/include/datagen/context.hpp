#pragma once

#include "datagen/config.hpp"
#include "datagen/gateway.hpp"
#include "datagen/templates.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace datagen {

/// What an LLM-backed stage needs: the gateway, the template set and the sampling
/// parameters of the run.
struct StageContext {
    Gateway &gateway;
    const TemplateLibrary &templates;
    std::string model;
    double temperature = 1.0;
    double top_p = 1.0;
    int max_tokens = 1000;
    int max_worker = 2;
    std::uint64_t seed = 0;

    ChatRequest request(std::string user, std::uint64_t stream, std::optional<std::string> system = {}) const;

    /// Sends one user message and returns the completion text.
    std::string ask(std::string user, Stage stage, RunManifest &log, std::uint64_t stream) const;
};

StageContext make_stage_context(Gateway &gateway, const TemplateLibrary &templates, const GenerationConfig &config);

} // namespace datagen
