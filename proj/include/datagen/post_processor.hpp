#pragma once

#include "datagen/context.hpp"
#include "datagen/core.hpp"
#include "datagen/matrix.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace datagen {

enum class DifficultyPolicy { paraphrase_question, add_context, paraphrase_choices, add_choice };

inline constexpr std::array<DifficultyPolicy, 4> kAllPolicies{
    DifficultyPolicy::paraphrase_question, DifficultyPolicy::add_context, DifficultyPolicy::paraphrase_choices,
    DifficultyPolicy::add_choice};

std::string_view to_string(DifficultyPolicy policy);
/// Throws ConfigError on an unknown name.
DifficultyPolicy difficulty_policy_from_string(std::string_view name);

/// Choice policies need choices; add_choice also needs a label naming one of them.
bool policy_applicable(DifficultyPolicy policy, const DatasetItem &item);

/// Empty string when `rewrite` is an acceptable result of `policy` on `original`,
/// otherwise a short description of the violated guard.
std::string difficulty_guard(DifficultyPolicy policy, const DatasetItem &original, const DatasetItem &rewrite);

struct DifficultyOutcome {
    DatasetItem item;
    DifficultyPolicy policy = DifficultyPolicy::paraphrase_question;
    bool accepted = false;
    std::string violation;
};

/// One rewrite. A guard violation, an unparseable reply or an inapplicable policy keeps the original.
DifficultyOutcome enhance_difficulty(const StageContext &ctx, const DatasetItem &item, DifficultyPolicy policy,
                                     const DatasetDescriptor &descriptor, RunManifest &log);

struct DifficultyReport {
    std::vector<DatasetItem> items;
    std::map<std::string, std::size_t> attempted;
    std::map<std::string, std::size_t> accepted;
    std::map<std::string, std::size_t> rejected;
    std::size_t not_applicable = 0;

    Json to_json() const;
};

/// `policy` nullopt picks uniformly among the policies applicable to each item, seeded per item.
DifficultyReport enhance_dataset(const StageContext &ctx, std::span<const DatasetItem> items,
                                 const DatasetDescriptor &descriptor, std::optional<DifficultyPolicy> policy,
                                 std::uint64_t seed, RunManifest &log);

/// Pairwise Euclidean distances, stored densely.
class SimilarityMatrix {
  public:
    SimilarityMatrix() = default;
    SimilarityMatrix(std::vector<std::string> ids, std::vector<double> distances);

    std::size_t size() const { return ids_.size(); }
    const std::vector<std::string> &ids() const { return ids_; }
    double at(std::size_t i, std::size_t j) const { return d_[i * ids_.size() + j]; }

    /// Distances of all unordered pairs, ascending.
    std::vector<double> pair_distances() const;

  private:
    std::vector<std::string> ids_;
    std::vector<double> d_;
};

/// Throws Error when ids and rows disagree or there are no rows. Rows are filled in parallel blocks.
SimilarityMatrix build_similarity_matrix(const EmbeddingMatrix &embeddings, std::vector<std::string> ids,
                                         int workers = 1);

/// Linear interpolation between order statistics of the pair distances; p in [0, 100].
double percentile_distance(const SimilarityMatrix &matrix, double p);

/// 1st percentile of the pair distances. When that is 0, the smallest positive distance;
/// when every distance is 0 (or there are no pairs), 1e-12.
double default_theta(const SimilarityMatrix &matrix);

struct Removal {
    std::string removed_id;
    std::string kept_id;
    double distance = 0;
};

struct DedupeResult {
    std::vector<DatasetItem> items;
    std::vector<std::size_t> kept_indices;
    std::vector<Removal> removals;
    double theta = 0;

    Json to_json() const;
};

/// Visits pairs with distance < theta from most to least similar (seeded tie-break) and removes
/// one member of every pair whose members both survive, chosen by a seeded coin.
DedupeResult group_check(std::span<const DatasetItem> items, const SimilarityMatrix &matrix, double theta,
                         std::uint64_t seed);

} // namespace datagen
