#pragma once

#include "datagen/context.hpp"
#include "datagen/core.hpp"
#include "datagen/tokenize.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace datagen {

struct JudgeVerdict {
    std::string model_final_answer;
    std::string groundtruth_answer;
    bool is_same = false;
};

/// Requires an object with a boolean "is_same"; the two answer fields default to "".
std::optional<JudgeVerdict> parse_judge_verdict(std::string_view completion);

/// Question as shown to a candidate: the text, then one "A. body" line per choice.
std::string render_question(const DatasetItem &item);

/// Ground truth passed to the judge: the label as stored.
std::string groundtruth_of(const DatasetItem &item);

struct ItemVerdict {
    std::string id;
    std::string candidate_answer;
    std::string groundtruth;
    std::optional<JudgeVerdict> verdict;

    bool scored() const { return verdict.has_value(); }
    Json to_json() const;
};

struct EvaluationResult {
    std::string candidate_model;
    std::string judge_model;
    std::vector<ItemVerdict> verdicts;
    std::size_t scored = 0;
    std::size_t unscored = 0;
    std::size_t correct = 0;
    /// correct / scored; 0 when nothing was scored.
    double accuracy = 0;

    std::string to_jsonl() const;
    Json summary_json() const;
};

/// Candidate answers each item with the answer-<format> prompt, then the judge compares.
/// A judge reply that cannot be parsed leaves the item unscored. Throws SchemaError on unlabelled items.
EvaluationResult evaluate_model(const StageContext &candidate, const StageContext &judge,
                                std::span<const DatasetItem> items, AnswerFormat format, RunManifest &log);

struct BenchRow {
    std::string model;
    std::optional<double> original;
    std::optional<double> generated;
};

/// Markdown table with ori./gen. columns (and their difference when both are present).
std::string bench_table(std::span<const BenchRow> rows);

// Compliance auditing.

struct ComplianceResult {
    std::string constraint;
    std::string method;
    std::size_t checked = 0;
    std::size_t yes = 0;
    double rate = 0;
    std::vector<std::string> failing_ids;

    Json to_json() const;
};

/// "YES" (any case, trailing punctuation ignored) is yes; every other reply is no.
bool parse_yes_no(std::string_view reply);

/// Judge verdict per item and constraint.
ComplianceResult check_compliance(const StageContext &judge, std::span<const DatasetItem> items,
                                  const std::string &constraint, RunManifest &log);

/// An item complies when the judge says YES to every constraint.
ComplianceResult check_combined(const StageContext &judge, std::span<const DatasetItem> items,
                                std::span<const std::string> constraints, RunManifest &log);

enum class MechanicalKind { word_length, option_count, script };
enum class Comparison { less, at_most, equal, at_least, greater };
enum class LengthTarget { question, each_option, whole_item };

/// A constraint simple enough to check without a model.
struct MechanicalConstraint {
    MechanicalKind kind = MechanicalKind::word_length;
    Comparison comparison = Comparison::equal;
    std::size_t value = 0;
    LengthTarget target = LengthTarget::question;
    Script script = Script::latin;
    /// Japanese text mixes kana and han; both count toward it.
    bool japanese = false;

    bool holds(const DatasetItem &item) const;
};

/// Recognises phrasings such as "shorter than 20 words", "at most 30 words per option",
/// "five options", "exactly 4 choices", "written in Chinese". nullopt otherwise.
std::optional<MechanicalConstraint> parse_mechanical_constraint(std::string_view text);

/// Share of the item's script-bearing code points that belong to `script` (0 when there are none).
double script_share(std::string_view text, Script script, bool japanese = false);

ComplianceResult check_local(std::span<const DatasetItem> items, const std::string &constraint,
                             const MechanicalConstraint &rule);

} // namespace datagen
