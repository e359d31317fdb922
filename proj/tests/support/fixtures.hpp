#pragma once

#include "datagen/matrix.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace testing_util {

/// Two Gaussian blobs in `dim` dimensions. Intra-blob spread is ~1, the centres are
/// 10x that apart. Rows [0, per_blob) belong to the first blob.
inline datagen::EmbeddingMatrix two_blobs(std::size_t per_blob, std::size_t dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0 / std::sqrt(static_cast<double>(dim)));
    std::vector<std::vector<double>> rows;
    for (int blob = 0; blob < 2; ++blob) {
        for (std::size_t i = 0; i < per_blob; ++i) {
            std::vector<double> r(dim);
            for (auto &v : r)
                v = g(rng);
            r[0] += blob * 10.0;
            rows.push_back(std::move(r));
        }
    }
    return datagen::EmbeddingMatrix::from_rows(rows);
}

} // namespace testing_util
