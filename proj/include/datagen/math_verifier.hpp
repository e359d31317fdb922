#pragma once

#include "datagen/context.hpp"
#include "datagen/core.hpp"
#include "datagen/sandbox.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace datagen {

struct SolverProgram {
    std::string source;
    std::string analysis;
    std::string origin_id;
};

/// Reads the {"Code", "Analysis"} payload. nullopt when there is no usable Code.
std::optional<SolverProgram> parse_solver(std::string_view completion, const std::string &origin_id);

/// Asks the LLM for a solver program. A format error is logged and yields nullopt.
std::optional<SolverProgram> synthesize_solver(const StageContext &ctx, const DatasetItem &item, RunManifest &log);

enum class Equivalence { equal, unequal, inconclusive };

/// Trimmed case-insensitive match, or numeric match with relative tolerance 1e-9.
/// nullopt when the strings are neither both numeric nor identical.
std::optional<bool> local_equal(std::string_view a, std::string_view b);

/// Strict "True"/"False" reply of the compare prompt; nullopt otherwise.
std::optional<bool> parse_compare_reply(std::string_view reply);

/// Local check first; the LLM judge only when that is inconclusive and ctx is given.
Equivalence semantically_equal(std::string_view a, std::string_view b, const StageContext *ctx, RunManifest *log);

struct ReconcileOutcome {
    DatasetItem item;
    bool corrected = false;
    bool review = false;
};

/// Marks the item code_verified. On `unequal` the label becomes the candidate and the old label
/// is kept in meta; on `inconclusive` the label stays and meta code_review is set.
ReconcileOutcome reconcile(const DatasetItem &item, const std::string &candidate, Equivalence equivalence);

struct VerificationReport {
    std::vector<DatasetItem> items;
    std::size_t checked = 0;
    std::size_t agree_before = 0;
    std::size_t agree_after = 0;
    std::vector<std::string> corrected_ids;
    std::vector<std::string> review_ids;
    std::vector<std::string> skipped_ids;
    std::vector<std::string> failed_ids;

    Json to_json() const;
};

/// synthesize -> execute -> compare -> reconcile for each labelled item, in parallel.
/// Corrections are written to the manifest ledger.
VerificationReport verify_math(const StageContext &ctx, std::span<const DatasetItem> items,
                               const SandboxOptions &sandbox, RunManifest &log);

} // namespace datagen
