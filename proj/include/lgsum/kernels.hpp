#pragma once

// Double-precision array kernels behind a runtime-dispatched table.
// The scalar lane is the reference; the AVX2 lane must agree with it
// elementwise exactly for non-reducing ops and within a tight relative
// tolerance for reductions/matmul (FMA + lane reassociation).

#include <cstddef>
#include <string>

namespace lgsum::kernels {

enum class Lane { Scalar, Avx2 };

struct KernelTable {
    // C (m x n) = A (m x k) * B (k x n), all row-major
    void (*matmul_nn)(double* c, const double* a, const double* b, int m, int k, int n);
    // C (m x n) = A (m x k) * B^T, B stored (n x k)
    void (*matmul_nt)(double* c, const double* a, const double* b, int m, int k, int n);
    // C (m x n) = A^T * B, A stored (k x m), B stored (k x n)
    void (*matmul_tn)(double* c, const double* a, const double* b, int m, int k, int n);

    void (*add)(double* dst, const double* a, const double* b, std::size_t n);
    void (*sub)(double* dst, const double* a, const double* b, std::size_t n);
    void (*hadamard)(double* dst, const double* a, const double* b, std::size_t n);
    void (*scale)(double* dst, const double* a, double alpha, std::size_t n);
    void (*axpy)(double* y, double alpha, const double* x, std::size_t n); // y += alpha*x
    double (*dot)(const double* a, const double* b, std::size_t n);
    double (*sum)(const double* a, std::size_t n);
    double (*max)(const double* a, std::size_t n); // n >= 1
    void (*relu)(double* dst, const double* a, std::size_t n);
    // dst = g where pre > 0, else 0
    void (*relu_mask)(double* dst, const double* g, const double* pre, std::size_t n);
    // bias-corrected Adam update, elementwise:
    //   m = b1*m + (1-b1)*g;  v = b2*v + (1-b2)*g^2
    //   p -= lr * (m/bc1) / (sqrt(v/bc2) + eps)
    void (*adam_update)(double* p, double* m, double* v, const double* g, std::size_t n,
                        double lr, double b1, double b2, double eps, double bc1, double bc2);
};

// Active table; initialized on first use from CPU detection, overridable
// by the LGSUM_KERNELS env var ("scalar" / "avx2").
const KernelTable& active();
Lane active_lane();
void set_lane(Lane lane); // throws std::runtime_error if unsupported on this CPU
bool avx2_supported();
std::string lane_name(Lane lane);

const KernelTable& scalar_table();
const KernelTable* avx2_table(); // nullptr when not built for x86 or CPU lacks AVX2+FMA

// Convenience forwarders through the active table.
inline void matmul_nn(double* c, const double* a, const double* b, int m, int k, int n) {
    active().matmul_nn(c, a, b, m, k, n);
}
inline void matmul_nt(double* c, const double* a, const double* b, int m, int k, int n) {
    active().matmul_nt(c, a, b, m, k, n);
}
inline void matmul_tn(double* c, const double* a, const double* b, int m, int k, int n) {
    active().matmul_tn(c, a, b, m, k, n);
}
inline void add(double* dst, const double* a, const double* b, std::size_t n) { active().add(dst, a, b, n); }
inline void sub(double* dst, const double* a, const double* b, std::size_t n) { active().sub(dst, a, b, n); }
inline void hadamard(double* dst, const double* a, const double* b, std::size_t n) { active().hadamard(dst, a, b, n); }
inline void scale(double* dst, const double* a, double alpha, std::size_t n) { active().scale(dst, a, alpha, n); }
inline void axpy(double* y, double alpha, const double* x, std::size_t n) { active().axpy(y, alpha, x, n); }
inline double dot(const double* a, const double* b, std::size_t n) { return active().dot(a, b, n); }
inline double sum(const double* a, std::size_t n) { return active().sum(a, n); }
inline double max(const double* a, std::size_t n) { return active().max(a, n); }
inline void relu(double* dst, const double* a, std::size_t n) { active().relu(dst, a, n); }
inline void relu_mask(double* dst, const double* g, const double* pre, std::size_t n) {
    active().relu_mask(dst, g, pre, n);
}
inline void adam_update(double* p, double* m, double* v, const double* g, std::size_t n,
                        double lr, double b1, double b2, double eps, double bc1, double bc2) {
    active().adam_update(p, m, v, g, n, lr, b1, b2, eps, bc1, bc2);
}

} // namespace lgsum::kernels
