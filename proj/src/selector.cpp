#include "datagen/selector.hpp"

#include "datagen/errors.hpp"
#include "datagen/util.hpp"

#include <limits>
#include <map>
#include <numeric>

namespace datagen {
namespace {

std::size_t nearest(std::span<const double> x, const std::vector<std::vector<double>> &centroids) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.size(); ++c) {
        double d = squared_distance(x, centroids[c]);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

/// Groups rows with bit-identical values; groups are ordered by their first row.
std::vector<std::vector<std::size_t>> identical_groups(const EmbeddingMatrix &m) {
    std::map<std::vector<double>, std::size_t> index;
    std::vector<std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        auto row = m.row(i);
        std::vector<double> key(row.begin(), row.end());
        auto [it, inserted] = index.emplace(std::move(key), groups.size());
        if (inserted)
            groups.emplace_back();
        groups[it->second].push_back(i);
    }
    return groups;
}

std::vector<std::vector<double>> seed_plus_plus(const EmbeddingMatrix &m, std::size_t k, Rng &rng) {
    std::vector<std::vector<double>> centroids;
    auto first = std::uniform_int_distribution<std::size_t>(0, m.rows() - 1)(rng);
    centroids.emplace_back(m.row(first).begin(), m.row(first).end());
    std::vector<double> d2(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        d2[i] = squared_distance(m.row(i), centroids[0]);
    while (centroids.size() < k) {
        double total = std::accumulate(d2.begin(), d2.end(), 0.0);
        if (!(total > 0))
            throw SelectionError("k-means++ seeding ran out of distinct points");
        double u = std::uniform_real_distribution<double>(0.0, total)(rng);
        std::size_t pick = m.rows() - 1;
        double acc = 0;
        for (std::size_t i = 0; i < m.rows(); ++i) {
            acc += d2[i];
            if (u < acc && d2[i] > 0) {
                pick = i;
                break;
            }
        }
        while (d2[pick] == 0 && pick > 0)
            --pick;
        centroids.emplace_back(m.row(pick).begin(), m.row(pick).end());
        for (std::size_t i = 0; i < m.rows(); ++i)
            d2[i] = std::min(d2[i], squared_distance(m.row(i), centroids.back()));
    }
    return centroids;
}

KMeansResult lloyd(const EmbeddingMatrix &m, std::size_t k, Rng &rng, int max_iters) {
    KMeansResult r;
    r.centroids = seed_plus_plus(m, k, rng);
    const std::size_t n = m.rows(), dim = m.cols();
    r.assignment.assign(n, k);
    for (int iter = 0; iter < max_iters; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            auto c = nearest(m.row(i), r.centroids);
            changed |= c != r.assignment[i];
            r.assignment[i] = c;
        }

        std::vector<std::size_t> sizes(k, 0);
        for (auto c : r.assignment)
            ++sizes[c];
        for (std::size_t e = 0; e < k; ++e) {
            if (sizes[e] != 0)
                continue;
            std::size_t far = n;
            double far_d = -1;
            for (std::size_t i = 0; i < n; ++i) {
                if (sizes[r.assignment[i]] < 2)
                    continue;
                double d = squared_distance(m.row(i), r.centroids[r.assignment[i]]);
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            if (far == n || !(far_d > 0))
                throw SelectionError("cannot repair an empty cluster");
            --sizes[r.assignment[far]];
            r.assignment[far] = e;
            sizes[e] = 1;
            r.centroids[e].assign(m.row(far).begin(), m.row(far).end());
            ++r.repairs;
            changed = true;
        }

        std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
        for (std::size_t i = 0; i < n; ++i) {
            auto row = m.row(i);
            for (std::size_t d = 0; d < dim; ++d)
                sums[r.assignment[i]][d] += row[d];
        }
        for (std::size_t c = 0; c < k; ++c) {
            for (std::size_t d = 0; d < dim; ++d)
                r.centroids[c][d] = sums[c][d] / static_cast<double>(sizes[c]);
        }

        double sse = 0;
        for (std::size_t i = 0; i < n; ++i)
            sse += squared_distance(m.row(i), r.centroids[r.assignment[i]]);
        r.sse_trace.push_back(sse);
        r.sse = sse;
        r.iterations = iter + 1;
        if (!changed)
            break;
    }
    return r;
}

} // namespace

std::vector<std::size_t> select_random_indices(std::size_t population, std::size_t n, std::uint64_t seed) {
    if (n > population)
        throw SelectionError("cannot select " + std::to_string(n) + " items from " + std::to_string(population));
    std::vector<std::size_t> idx(population);
    std::iota(idx.begin(), idx.end(), 0);
    auto rng = make_rng(seed, 0x5e1ec7);
    for (std::size_t i = 0; i < n; ++i) {
        auto j = std::uniform_int_distribution<std::size_t>(i, population - 1)(rng);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(n);
    return idx;
}

std::vector<DatasetItem> select_random(std::span<const DatasetItem> items, std::size_t n, std::uint64_t seed) {
    std::vector<DatasetItem> out;
    for (auto i : select_random_indices(items.size(), n, seed))
        out.push_back(items[i]);
    return out;
}

KMeansResult kmeans(const EmbeddingMatrix &points, std::size_t k, std::uint64_t seed, int max_iters, int restarts) {
    if (k == 0)
        throw SelectionError("k-means needs k >= 1");
    if (points.rows() < k)
        throw SelectionError("k-means needs at least k rows");
    if (identical_groups(points).size() < k)
        throw SelectionError("k-means needs at least k distinct rows");
    if (max_iters <= 0 || restarts <= 0)
        throw SelectionError("k-means iterations and restarts must be positive");
    KMeansResult best;
    bool have = false;
    for (int r = 0; r < restarts; ++r) {
        auto rng = make_rng(seed, 0xc1u + static_cast<std::uint64_t>(r));
        auto result = lloyd(points, k, rng, max_iters);
        if (!have || result.sse < best.sse) {
            best = std::move(result);
            have = true;
        }
    }
    return best;
}

DiverseSelector::DiverseSelector(const EmbeddingMatrix &embeddings, std::size_t n, std::uint64_t seed, int max_iters,
                                 int restarts)
    : n_(n), population_(embeddings.rows()) {
    if (n == 0)
        throw SelectionError("few-shot count must be positive");
    if (n > population_)
        throw SelectionError("cannot select " + std::to_string(n) + " items from " + std::to_string(population_));
    auto groups = identical_groups(embeddings);
    if (groups.size() >= n) {
        result_ = kmeans(embeddings, n, seed, max_iters, restarts);
        members_.assign(n, {});
        for (std::size_t i = 0; i < result_.assignment.size(); ++i)
            members_[result_.assignment[i]].push_back(i);
    } else {
        members_ = std::move(groups);
        result_.assignment.assign(population_, 0);
        for (std::size_t c = 0; c < members_.size(); ++c) {
            for (auto i : members_[c])
                result_.assignment[i] = c;
        }
        warning_ = "only " + std::to_string(members_.size()) + " distinct embeddings for " + std::to_string(n) +
                   " few-shot slots; " + std::to_string(n - members_.size()) + " picks fall back to random sampling";
    }
}

std::vector<std::size_t> DiverseSelector::draw(std::uint64_t seed) const {
    auto rng = make_rng(seed, 0xd1ce);
    std::vector<std::size_t> picks;
    std::vector<bool> taken(population_, false);
    for (const auto &cluster : members_) {
        auto i = cluster[std::uniform_int_distribution<std::size_t>(0, cluster.size() - 1)(rng)];
        picks.push_back(i);
        taken[i] = true;
    }
    if (picks.size() < n_) {
        std::vector<std::size_t> rest;
        for (std::size_t i = 0; i < population_; ++i) {
            if (!taken[i])
                rest.push_back(i);
        }
        for (auto j : select_random_indices(rest.size(), n_ - picks.size(), rng()))
            picks.push_back(rest[j]);
    }
    return picks;
}

std::vector<DatasetItem> select_diverse(std::span<const DatasetItem> items, const EmbeddingMatrix &embeddings,
                                        std::size_t n, std::uint64_t seed, int max_iters, int restarts) {
    if (embeddings.rows() != items.size())
        throw SelectionError("embeddings are not aligned with items");
    DiverseSelector selector(embeddings, n, seed, max_iters, restarts);
    std::vector<DatasetItem> out;
    for (auto i : selector.draw(seed))
        out.push_back(items[i]);
    return out;
}

} // namespace datagen
