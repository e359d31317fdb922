#pragma once

#include "datagen/config.hpp"
#include "datagen/core.hpp"
#include "datagen/matrix.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace datagen {

struct SelectorConfig {
    SelectorStrategy strategy = SelectorStrategy::random;
    int n = 5;
    std::uint64_t seed = 0;
    int kmeans_max_iters = 100;
    int kmeans_restarts = 4;
};

/// n distinct indices drawn uniformly without replacement from [0, population).
/// Throws SelectionError when n > population.
std::vector<std::size_t> select_random_indices(std::size_t population, std::size_t n, std::uint64_t seed);

std::vector<DatasetItem> select_random(std::span<const DatasetItem> items, std::size_t n, std::uint64_t seed);

struct KMeansResult {
    /// cluster index per row
    std::vector<std::size_t> assignment;
    std::vector<std::vector<double>> centroids;
    double sse = 0;
    /// Within-cluster SSE after every Lloyd iteration of the winning restart.
    std::vector<double> sse_trace;
    int iterations = 0;
    /// Number of empty-cluster repairs performed in the winning restart.
    int repairs = 0;
};

/// Lloyd's algorithm with k-means++ seeding; keeps the restart with the lowest SSE.
/// Every cluster of the result is nonempty. Requires k <= number of distinct rows.
KMeansResult kmeans(const EmbeddingMatrix &points, std::size_t k, std::uint64_t seed, int max_iters = 100,
                    int restarts = 4);

/// Partition computed once; draw() picks one member per cluster uniformly.
/// When the data has fewer than n distinct rows, the missing picks are filled by random
/// sampling among the remaining items and `warning()` says so.
class DiverseSelector {
  public:
    DiverseSelector(const EmbeddingMatrix &embeddings, std::size_t n, std::uint64_t seed, int max_iters = 100,
                    int restarts = 4);

    std::vector<std::size_t> draw(std::uint64_t seed) const;

    const KMeansResult &clustering() const { return result_; }
    const std::string &warning() const { return warning_; }
    std::size_t size() const { return n_; }

  private:
    std::size_t n_;
    std::size_t population_;
    KMeansResult result_;
    std::vector<std::vector<std::size_t>> members_;
    std::string warning_;
};

std::vector<DatasetItem> select_diverse(std::span<const DatasetItem> items, const EmbeddingMatrix &embeddings,
                                        std::size_t n, std::uint64_t seed, int max_iters = 100, int restarts = 4);

} // namespace datagen
