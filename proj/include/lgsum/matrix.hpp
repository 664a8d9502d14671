#pragma once

#include <cstddef>
#include <vector>

namespace lgsum::numerics {

// Row-major dense matrix, 64-bit precision throughout. Sequences of
// model-width vectors are stored as (seq_len x width) matrices.
struct DenseMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    DenseMatrix() = default;
    DenseMatrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}
    DenseMatrix(int r, int c, std::vector<double> d);

    double& at(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
    double at(int i, int j) const { return data[static_cast<std::size_t>(i) * cols + j]; }
    double* row(int i) { return data.data() + static_cast<std::size_t>(i) * cols; }
    const double* row(int i) const { return data.data() + static_cast<std::size_t>(i) * cols; }
    std::size_t size() const { return data.size(); }
    bool same_shape(const DenseMatrix& o) const { return rows == o.rows && cols == o.cols; }
    bool all_finite() const;

    static DenseMatrix filled(int r, int c, double v);
    static DenseMatrix identity(int n);
};

bool operator==(const DenseMatrix& a, const DenseMatrix& b);

// max |a-b| over entries; shapes must match
double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);

} // namespace lgsum::numerics
