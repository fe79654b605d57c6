#include "popgraph/sparse.hpp"

#include <algorithm>
#include <string>

#include "popgraph/errors.hpp"

namespace popgraph {

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols,
                           std::vector<std::size_t> row_offsets,
                           std::vector<std::size_t> col_indices,
                           std::vector<double> values)
    : rows_(rows), cols_(cols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)) {
    validate();
}

void SparseMatrix::validate() const {
    if (row_offsets_.size() != rows_ + 1)
        throw ValidationError("sparse: row_offsets must have rows+1 entries");
    if (row_offsets_.front() != 0)
        throw ValidationError("sparse: row_offsets[0] must be 0");
    if (row_offsets_.back() != col_indices_.size())
        throw ValidationError("sparse: row_offsets must end at nnz");
    if (values_.size() != col_indices_.size())
        throw ValidationError("sparse: values/col_indices length mismatch");
    for (std::size_t r = 0; r < rows_; ++r) {
        if (row_offsets_[r] > row_offsets_[r + 1])
            throw ValidationError("sparse: row_offsets must be nondecreasing");
        for (std::size_t e = row_offsets_[r]; e < row_offsets_[r + 1]; ++e) {
            if (col_indices_[e] >= cols_)
                throw ValidationError("sparse: column index " + std::to_string(col_indices_[e]) +
                                      " out of range for " + std::to_string(cols_) + " columns");
            if (e > row_offsets_[r] && col_indices_[e] <= col_indices_[e - 1])
                throw ValidationError("sparse: column indices must be strictly increasing in row " +
                                      std::to_string(r));
        }
    }
}

SparseMatrix SparseMatrix::from_triplets(
    std::size_t rows, std::size_t cols,
    std::vector<std::tuple<std::size_t, std::size_t, double>> triplets) {
    std::sort(triplets.begin(), triplets.end(), [](const auto& a, const auto& b) {
        if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) < std::get<0>(b);
        return std::get<1>(a) < std::get<1>(b);
    });
    std::vector<std::size_t> offsets(rows + 1, 0);
    std::vector<std::size_t> cols_idx;
    std::vector<double> vals;
    cols_idx.reserve(triplets.size());
    vals.reserve(triplets.size());
    for (std::size_t t = 0; t < triplets.size(); ++t) {
        const auto [r, c, v] = triplets[t];
        if (r >= rows || c >= cols)
            throw ValidationError("sparse: triplet (" + std::to_string(r) + "," + std::to_string(c) +
                                  ") out of range");
        if (t > 0 && r == std::get<0>(triplets[t - 1]) && c == std::get<1>(triplets[t - 1]))
            throw ValidationError("sparse: duplicate entry at (" + std::to_string(r) + "," +
                                  std::to_string(c) + ")");
        offsets[r + 1]++;
        cols_idx.push_back(c);
        vals.push_back(v);
    }
    for (std::size_t r = 0; r < rows; ++r) offsets[r + 1] += offsets[r];
    return SparseMatrix(rows, cols, std::move(offsets), std::move(cols_idx), std::move(vals));
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
    std::vector<std::size_t> offsets(n + 1);
    std::vector<std::size_t> cols_idx(n);
    for (std::size_t i = 0; i <= n; ++i) offsets[i] = i;
    for (std::size_t i = 0; i < n; ++i) cols_idx[i] = i;
    return SparseMatrix(n, n, std::move(offsets), std::move(cols_idx),
                        std::vector<double>(n, 1.0));
}

std::vector<double> SparseMatrix::dense() const {
    std::vector<double> out(rows_ * cols_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t e = row_offsets_[r]; e < row_offsets_[r + 1]; ++e)
            out[r * cols_ + col_indices_[e]] = values_[e];
    return out;
}

} // namespace popgraph
