#pragma once

#include "datagen/config.hpp"
#include "datagen/context.hpp"
#include "datagen/core.hpp"
#include "datagen/errors.hpp"
#include "datagen/manifest.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace datagen {

struct AttributePool {
    enum class Source { user_supplied, llm_extracted };

    std::vector<std::string> attributes;
    Source source = Source::user_supplied;
};

/// Drops empty entries and case-insensitive duplicates, keeping the first spelling.
std::vector<std::string> dedupe_attributes(std::span<const std::string> attributes);

/// User-supplied attributes are used verbatim (deduplicated) without calling the LLM.
AttributePool user_attribute_pool(std::span<const std::string> attributes);

/// Asks the LLM for "category" keywords of the examples. A format error is retried once;
/// a second failure yields an empty pool and a warning event in `log`.
AttributePool extract_attributes(const StageContext &ctx, const DatasetDescriptor &descriptor,
                                 std::span<const DatasetItem> examples, RunManifest &log);

struct PromptBundle {
    std::string system;
    std::string user;
    int batch_size = 0;
};

/// The {data_format} block for a descriptor, loaded from the format-<answer_format> template.
std::string format_spec_for(const TemplateLibrary &templates, const DatasetDescriptor &descriptor);

/// System message: description template. User message: initial template (batch size,
/// few-shot block, constraint block when constraints exist), optional feedback block,
/// optional attribute directive, then the return-format block.
PromptBundle assemble_prompt(const TemplateLibrary &templates, const DatasetDescriptor &descriptor,
                             const ConstraintSet &constraints, std::span<const DatasetItem> few_shot,
                             const std::optional<std::string> &attribute, int batch_size,
                             const std::string &format_spec, std::span<const std::string> feedback = {});

struct GenerationOutcome {
    int iteration = 0;
    int requested = 0;
    std::vector<DatasetItem> items;
    int format_errors = 0;
    std::string completion_hash;
};

/// Maps parsed records onto items and drops those that do not fit the descriptor
/// (missing text, missing label when labels are expected, label outside the choices, ...).
/// Each dropped record counts as one format error; a completion without JSON counts as one.
GenerationOutcome parse_generation(std::string_view completion, const DatasetDescriptor &descriptor, int iteration,
                                   int requested);

GenerationOutcome generate_batch(const StageContext &ctx, const PromptBundle &bundle,
                                 const DatasetDescriptor &descriptor, int iteration, RunManifest &log);

/// Target label distribution. Quotas are the largest-remainder rounding of fraction * total;
/// labels outside the map get no quota.
class LabelQuota {
  public:
    LabelQuota(const std::map<std::string, double> &ratio, int total);

    /// True (and the slot is taken) when the item's label still has room.
    bool admit(const DatasetItem &item);

    const std::map<std::string, int> &quotas() const { return quota_; }

  private:
    std::map<std::string, int> quota_;
    std::map<std::string, int> used_;
};

struct GenerationRun {
    std::vector<DatasetItem> items;
    int iterations = 0;
    int format_errors = 0;
    int rejected_by_label_ratio = 0;
};

/// Raised when the iteration budget (3 x planned iterations) runs out before the target count.
class PartialResultError : public Error {
  public:
    PartialResultError(const std::string &what, std::vector<DatasetItem> items)
        : Error(what), items_(std::move(items)) {}

    const std::vector<DatasetItem> &items() const { return items_; }

  private:
    std::vector<DatasetItem> items_;
};

/// The generation loop only: selection, prompting, parsing and merging by iteration index.
/// Throws PartialResultError when the budget is exhausted.
GenerationRun run_generation(const StageContext &ctx, const RunConfig &config, const SeedDataset &seed,
                             const DatasetDescriptor &descriptor, RunManifest &log);

} // namespace datagen
