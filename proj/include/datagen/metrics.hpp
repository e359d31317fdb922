#pragma once

#include "datagen/core.hpp"
#include "datagen/matrix.hpp"

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace datagen {

struct SelfBleuReport {
    std::vector<double> scores;
    double mean = 0;
};

/// BLEU of `hypothesis` against `references`:
///  - modified n-gram precision, clipped by the maximum count in any single reference,
///  - uniform weights over orders 1..min(max_n, |hypothesis|),
///  - an order with zero matches uses (0 + 1) / (total + 1),
///  - brevity penalty against the reference length closest to |hypothesis| (shorter wins ties).
/// An empty hypothesis scores 0.
double sentence_bleu(std::span<const std::string> hypothesis, std::span<const std::vector<std::string>> references,
                     int max_n = 4);

/// Per-item BLEU against all other items. Throws Error for fewer than two items.
SelfBleuReport self_bleu(std::span<const std::vector<std::string>> token_lists, int max_n = 4);
SelfBleuReport self_bleu(std::span<const DatasetItem> items, int max_n = 4);

/// Mean cosine distance (1 - cosine similarity) over unordered pairs of rows.
double remote_clique(const EmbeddingMatrix &embeddings);

/// Mean cosine similarity over unordered pairs of rows.
double aps(const EmbeddingMatrix &embeddings);

/// Sum over items of the number of that item's distinct n-grams (n in [n_min, n_max]) that
/// also occur in some other item, divided by the item count. Higher means more shared phrasing.
double ingf(std::span<const std::vector<std::string>> token_lists, int n_min = 2, int n_max = 4);
double ingf(std::span<const DatasetItem> items, int n_min = 2, int n_max = 4);

/// Offline entity extractor: runs of capitalised words, ignoring a lone capitalised word
/// that merely starts a sentence. Returned in order of first appearance, deduplicated.
std::vector<std::string> heuristic_entities(std::string_view text);

using EntityExtractor = std::function<std::vector<std::string>(const DatasetItem &)>;

struct OverlapReport {
    std::size_t original_entities = 0;
    std::size_t generated_entities = 0;
    std::size_t shared = 0;
    double rate = 0;
    /// Set when the generated side has no entities (rate is then reported as 0).
    bool empty_generated = false;

    Json to_json() const;
};

/// |E_gen ∩ E_orig| / |E_gen|, comparing entities case-insensitively.
OverlapReport entity_overlap(std::span<const DatasetItem> original, std::span<const DatasetItem> generated,
                             const EntityExtractor &extract = {});

struct LengthHistogram {
    int bin_width = 10;
    /// bin start (in words) -> item count
    std::map<int, int> bins;
    double mean = 0;

    Json to_json() const;
};

LengthHistogram length_histogram(std::span<const DatasetItem> items, int bin_width = 10);

struct DiversityReport {
    std::size_t item_count = 0;
    double remote_clique = 0;
    double aps = 0;
    double ingf = 0;
    SelfBleuReport self_bleu;
    LengthHistogram lengths;

    Json to_json() const;
};

/// Embeddings must be row-aligned with items.
DiversityReport diversity_report(std::span<const DatasetItem> items, const EmbeddingMatrix &embeddings);

/// Markdown table with one row per metric and one column per report.
std::string comparison_table(const DiversityReport &original, const DiversityReport &generated,
                             const std::optional<OverlapReport> &overlap = std::nullopt);

} // namespace datagen
