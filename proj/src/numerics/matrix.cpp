#include "lgsum/matrix.hpp"

#include <cmath>
#include <stdexcept>

namespace lgsum::numerics {

DenseMatrix::DenseMatrix(int r, int c, std::vector<double> d) : rows(r), cols(c), data(std::move(d)) {
    if (data.size() != static_cast<std::size_t>(r) * c)
        throw std::invalid_argument("matrix data length does not match shape");
}

bool DenseMatrix::all_finite() const {
    for (double v : data)
        if (!std::isfinite(v)) return false;
    return true;
}

DenseMatrix DenseMatrix::filled(int r, int c, double v) {
    DenseMatrix m(r, c);
    for (double& x : m.data) x = v;
    return m;
}

DenseMatrix DenseMatrix::identity(int n) {
    DenseMatrix m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
}

bool operator==(const DenseMatrix& a, const DenseMatrix& b) {
    return a.rows == b.rows && a.cols == b.cols && a.data == b.data;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("shape mismatch in max_abs_diff");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        worst = std::max(worst, std::fabs(a.data[i] - b.data[i]));
    return worst;
}

} // namespace lgsum::numerics
