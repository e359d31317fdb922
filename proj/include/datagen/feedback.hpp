#pragma once

#include "datagen/context.hpp"
#include "datagen/core.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace datagen {

/// Applies one piece of human feedback. nullopt when the reply is unusable or changes the item's shape.
std::optional<DatasetItem> apply_feedback(const StageContext &ctx, const DatasetItem &item,
                                          const std::string &feedback, RunManifest &log);

struct FeedbackProgress {
    std::vector<DatasetItem> items;
    std::size_t next_index = 0;

    Json to_json() const;
    static FeedbackProgress from_json(const Json &j);
};

struct FeedbackResult {
    std::vector<DatasetItem> items;
    std::size_t revised = 0;
    std::size_t rejected = 0;
    /// True when the session ended early; the progress file then holds the state to resume from.
    bool quit = false;
    std::size_t next_index = 0;
};

/// Shows each item on `out` and reads one line of feedback from `in`: an empty line accepts the
/// item, ":q" (or end of input) stops and saves progress. An existing progress file is resumed.
/// The progress file is removed once every item has been reviewed.
FeedbackResult run_feedback(const StageContext &ctx, std::vector<DatasetItem> items, std::istream &in,
                            std::ostream &out, const std::filesystem::path &progress_file, RunManifest &log);

} // namespace datagen
