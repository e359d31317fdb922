#pragma once

#include "datagen/core.hpp"
#include "datagen/manifest.hpp"

#include <string>

namespace datagen {

/// Consolidated view of a manifest: totals, cost by stage and category, per-item cost of the
/// base / +code / +RAG configurations, the epoch histogram, dedupe statistics and correction
/// fractions. Stages that did not run are reported as "disabled".
Json build_report(const RunManifest &manifest);

std::string report_markdown(const Json &report);

} // namespace datagen
