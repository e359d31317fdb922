#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace datagen {

/// Row-major dense matrix of item embeddings; row i belongs to item i.
class EmbeddingMatrix {
  public:
    EmbeddingMatrix() = default;
    EmbeddingMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    /// Throws Error when rows have different lengths or contain non-finite values.
    static EmbeddingMatrix from_rows(const std::vector<std::vector<double>> &rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0; }

    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }

    const std::vector<double> &data() const { return data_; }

    void append_row(std::span<const double> values);

    std::string model;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

double squared_distance(std::span<const double> a, std::span<const double> b);
double euclidean_distance(std::span<const double> a, std::span<const double> b);

/// Cosine similarity; throws Error if either vector has zero norm.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

} // namespace datagen
