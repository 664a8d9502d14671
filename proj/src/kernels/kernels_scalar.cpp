#include "lgsum/kernels.hpp"

#include <cmath>

// Reference lane. Plain loops, fixed accumulation order (k innermost-to-outer
// identical to the vector lanes), no FMA contraction.

namespace lgsum::kernels {
namespace {

void s_matmul_nn(double* c, const double* a, const double* b, int m, int k, int n) {
    for (int i = 0; i < m; ++i) {
        double* crow = c + static_cast<std::size_t>(i) * n;
        for (int j = 0; j < n; ++j) crow[j] = 0.0;
        const double* arow = a + static_cast<std::size_t>(i) * k;
        for (int p = 0; p < k; ++p) {
            const double av = arow[p];
            const double* brow = b + static_cast<std::size_t>(p) * n;
            for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

void s_matmul_nt(double* c, const double* a, const double* b, int m, int k, int n) {
    for (int i = 0; i < m; ++i) {
        const double* arow = a + static_cast<std::size_t>(i) * k;
        double* crow = c + static_cast<std::size_t>(i) * n;
        for (int j = 0; j < n; ++j) {
            const double* brow = b + static_cast<std::size_t>(j) * k;
            double acc = 0.0;
            for (int p = 0; p < k; ++p) acc += arow[p] * brow[p];
            crow[j] = acc;
        }
    }
}

void s_matmul_tn(double* c, const double* a, const double* b, int m, int k, int n) {
    for (std::size_t i = 0, total = static_cast<std::size_t>(m) * n; i < total; ++i) c[i] = 0.0;
    for (int p = 0; p < k; ++p) {
        const double* arow = a + static_cast<std::size_t>(p) * m;
        const double* brow = b + static_cast<std::size_t>(p) * n;
        for (int i = 0; i < m; ++i) {
            const double av = arow[i];
            double* crow = c + static_cast<std::size_t>(i) * n;
            for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

void s_add(double* dst, const double* a, const double* b, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] + b[i];
}

void s_sub(double* dst, const double* a, const double* b, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] - b[i];
}

void s_hadamard(double* dst, const double* a, const double* b, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] * b[i];
}

void s_scale(double* dst, const double* a, double alpha, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] * alpha;
}

void s_axpy(double* y, double alpha, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double s_dot(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double s_sum(const double* a, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i];
    return acc;
}

double s_max(const double* a, std::size_t n) {
    double best = a[0];
    for (std::size_t i = 1; i < n; ++i)
        if (a[i] > best) best = a[i];
    return best;
}

void s_relu(double* dst, const double* a, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] > 0.0 ? a[i] : 0.0;
}

void s_relu_mask(double* dst, const double* g, const double* pre, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = pre[i] > 0.0 ? g[i] : 0.0;
}

void s_adam_update(double* p, double* m, double* v, const double* g, std::size_t n,
                   double lr, double b1, double b2, double eps, double bc1, double bc2) {
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = b1 * m[i] + (1.0 - b1) * g[i];
        v[i] = b2 * v[i] + (1.0 - b2) * (g[i] * g[i]);
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        p[i] -= lr * (mhat / (std::sqrt(vhat) + eps));
    }
}

const KernelTable kScalar = {
    s_matmul_nn, s_matmul_nt, s_matmul_tn,
    s_add, s_sub, s_hadamard, s_scale, s_axpy,
    s_dot, s_sum, s_max, s_relu, s_relu_mask, s_adam_update,
};

} // namespace

const KernelTable& scalar_table() { return kScalar; }

} // namespace lgsum::kernels
