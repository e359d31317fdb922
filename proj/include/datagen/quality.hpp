#pragma once

#include "datagen/context.hpp"
#include "datagen/core.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace datagen {

struct Reflection {
    std::string item_id;
    bool isgood = false;
    std::string reflection;
    int epoch = 0;
    /// Set when the judgment could not be parsed (isgood is then false).
    bool format_error = false;
};

/// Strict verdict parsing: "yes"/"no" in any case, nothing else.
std::optional<bool> parse_isgood(const Json &value);

Reflection parse_reflection(std::string_view completion, const std::string &item_id, int epoch);

Reflection reflect(const StageContext &ctx, const DatasetItem &item, const DatasetDescriptor &descriptor, int epoch,
                   RunManifest &log);

/// True when `candidate` has the same structure as `original`: same optional fields present,
/// same number of choices, and a label that is still one of the choice keys.
bool same_shape(const DatasetItem &original, const DatasetItem &candidate);

/// Reads an item out of a rewrite completion (a bare object, a one-element array, or an object
/// wrapping the item under a single key). nullopt when no item can be read.
std::optional<DatasetItem> parse_rewritten_item(std::string_view completion, const DatasetItem &original);

struct EnhanceOutcome {
    DatasetItem item;
    bool accepted = false;
    std::string rejection;
};

/// On acceptance the rewrite keeps the original id and meta and gains meta enhanced_epoch.
EnhanceOutcome enhance(const StageContext &ctx, const DatasetItem &item, const Reflection &reflection,
                       const DatasetDescriptor &descriptor, int epoch, RunManifest &log);

struct QualityResult {
    std::vector<DatasetItem> items;
    /// Enhancement epochs used per item, aligned with items.
    std::vector<int> epochs;
    /// epochs used -> item count; sums to the item count.
    std::map<int, int> histogram;
    std::size_t exhausted = 0;
    std::size_t rejected_rewrites = 0;
};

/// reflect -> (good? stop) -> enhance, at most max_epochs enhancements per item. Items still
/// judged not good after the cap are kept with meta quality_status=exhausted.
QualityResult quality_pass(const StageContext &ctx, std::span<const DatasetItem> items,
                           const DatasetDescriptor &descriptor, int max_epochs, RunManifest &log);

} // namespace datagen
