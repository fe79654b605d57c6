#pragma once

#include <cstddef>
#include <tuple>
#include <vector>

namespace popgraph {

// Compressed sparse row matrix. Column indices are strictly increasing within
// each row, so there are no duplicate entries.
class SparseMatrix {
public:
    SparseMatrix() = default;
    SparseMatrix(std::size_t rows, std::size_t cols,
                 std::vector<std::size_t> row_offsets,
                 std::vector<std::size_t> col_indices,
                 std::vector<double> values);

    // Builds from (row, col, value) triplets; sorts them, rejects duplicates.
    static SparseMatrix from_triplets(std::size_t rows, std::size_t cols,
                                      std::vector<std::tuple<std::size_t, std::size_t, double>> triplets);

    static SparseMatrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t nnz() const { return col_indices_.size(); }

    const std::vector<std::size_t>& row_offsets() const { return row_offsets_; }
    const std::vector<std::size_t>& col_indices() const { return col_indices_; }
    const std::vector<double>& values() const { return values_; }

    // Row-major dense copy; oracle/debug use.
    std::vector<double> dense() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::size_t> row_offsets_{0};
    std::vector<std::size_t> col_indices_;
    std::vector<double> values_;

    void validate() const;
};

} // namespace popgraph
