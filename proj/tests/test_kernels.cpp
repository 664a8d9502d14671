#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "lgsum/kernels.hpp"

using namespace lgsum;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n, double lo = -2.0, double hi = 2.0) {
    std::uniform_real_distribution<double> d(lo, hi);
    std::vector<double> v(n);
    for (double& x : v) x = d(rng);
    return v;
}

double rel_diff(double a, double b) {
    return std::fabs(a - b) / std::max({1.0, std::fabs(a), std::fabs(b)});
}

} // namespace

TEST_CASE("scalar matmul_nn against hand results") {
    // [1 2; 3 4] * [5 6; 7 8] = [19 22; 43 50]
    std::vector<double> a = {1, 2, 3, 4}, b = {5, 6, 7, 8}, c(4);
    kernels::scalar_table().matmul_nn(c.data(), a.data(), b.data(), 2, 2, 2);
    CHECK(c == std::vector<double>{19, 22, 43, 50});
}

TEST_CASE("scalar matmul transpose variants agree with explicit transposition") {
    std::mt19937_64 rng(7);
    const int m = 5, k = 3, n = 4;
    auto a = random_vec(rng, m * k);
    auto b = random_vec(rng, k * n);
    std::vector<double> c_ref(m * n);
    kernels::scalar_table().matmul_nn(c_ref.data(), a.data(), b.data(), m, k, n);

    // nt: pass B^T stored (n x k)
    std::vector<double> bt(n * k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < n; ++j) bt[j * k + i] = b[i * n + j];
    std::vector<double> c_nt(m * n);
    kernels::scalar_table().matmul_nt(c_nt.data(), a.data(), bt.data(), m, k, n);
    for (int i = 0; i < m * n; ++i) CHECK(rel_diff(c_nt[i], c_ref[i]) < 1e-15);

    // tn: pass A^T stored (k x m)
    std::vector<double> at(k * m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < k; ++j) at[j * m + i] = a[i * k + j];
    std::vector<double> c_tn(m * n);
    kernels::scalar_table().matmul_tn(c_tn.data(), at.data(), b.data(), m, k, n);
    for (int i = 0; i < m * n; ++i) CHECK(rel_diff(c_tn[i], c_ref[i]) < 1e-15);
}

TEST_CASE("avx2 lane matches scalar reference") {
    const kernels::KernelTable* avx2 = kernels::avx2_table();
    if (!avx2) return; // nothing to compare on this CPU
    const kernels::KernelTable& ref = kernels::scalar_table();
    std::mt19937_64 rng(42);

    SUBCASE("matmul variants within rounding") {
        for (int trial = 0; trial < 50; ++trial) {
            std::uniform_int_distribution<int> dim(1, 33);
            const int m = dim(rng), k = dim(rng), n = dim(rng);
            auto a = random_vec(rng, static_cast<std::size_t>(m) * k);
            auto b = random_vec(rng, static_cast<std::size_t>(k) * n);
            auto bt = random_vec(rng, static_cast<std::size_t>(n) * k);
            auto at = random_vec(rng, static_cast<std::size_t>(k) * m);
            std::vector<double> r(static_cast<std::size_t>(m) * n), s(r.size());

            ref.matmul_nn(r.data(), a.data(), b.data(), m, k, n);
            avx2->matmul_nn(s.data(), a.data(), b.data(), m, k, n);
            for (std::size_t i = 0; i < r.size(); ++i) CHECK(rel_diff(r[i], s[i]) < 1e-13);

            ref.matmul_nt(r.data(), a.data(), bt.data(), m, k, n);
            avx2->matmul_nt(s.data(), a.data(), bt.data(), m, k, n);
            for (std::size_t i = 0; i < r.size(); ++i) CHECK(rel_diff(r[i], s[i]) < 1e-13);

            ref.matmul_tn(r.data(), at.data(), b.data(), m, k, n);
            avx2->matmul_tn(s.data(), at.data(), b.data(), m, k, n);
            for (std::size_t i = 0; i < r.size(); ++i) CHECK(rel_diff(r[i], s[i]) < 1e-13);
        }
    }

    SUBCASE("elementwise kernels bit-identical") {
        for (std::size_t n : {1u, 3u, 4u, 7u, 16u, 65u, 1000u}) {
            auto a = random_vec(rng, n);
            auto b = random_vec(rng, n);
            std::vector<double> r(n), s(n);

            ref.add(r.data(), a.data(), b.data(), n);
            avx2->add(s.data(), a.data(), b.data(), n);
            CHECK(r == s);
            ref.sub(r.data(), a.data(), b.data(), n);
            avx2->sub(s.data(), a.data(), b.data(), n);
            CHECK(r == s);
            ref.hadamard(r.data(), a.data(), b.data(), n);
            avx2->hadamard(s.data(), a.data(), b.data(), n);
            CHECK(r == s);
            ref.scale(r.data(), a.data(), 1.7, n);
            avx2->scale(s.data(), a.data(), 1.7, n);
            CHECK(r == s);
            ref.relu(r.data(), a.data(), n);
            avx2->relu(s.data(), a.data(), n);
            CHECK(r == s);
            ref.relu_mask(r.data(), a.data(), b.data(), n);
            avx2->relu_mask(s.data(), a.data(), b.data(), n);
            CHECK(r == s);

            std::vector<double> y1 = b, y2 = b;
            ref.axpy(y1.data(), -0.3, a.data(), n);
            avx2->axpy(y2.data(), -0.3, a.data(), n);
            CHECK(y1 == y2);

            CHECK(ref.max(a.data(), n) == avx2->max(a.data(), n));
            CHECK(rel_diff(ref.sum(a.data(), n), avx2->sum(a.data(), n)) < 1e-13);
            CHECK(rel_diff(ref.dot(a.data(), b.data(), n), avx2->dot(a.data(), b.data(), n)) < 1e-13);
        }
    }

    SUBCASE("adam update bit-identical") {
        for (std::size_t n : {1u, 5u, 8u, 129u}) {
            auto g = random_vec(rng, n);
            auto p1 = random_vec(rng, n);
            auto p2 = p1;
            auto m1 = random_vec(rng, n, 0.0, 0.1), m2 = m1;
            auto v1 = random_vec(rng, n, 0.0, 0.1), v2 = v1;
            ref.adam_update(p1.data(), m1.data(), v1.data(), g.data(), n, 1e-3, 0.9, 0.998, 1e-8, 0.1, 0.002);
            avx2->adam_update(p2.data(), m2.data(), v2.data(), g.data(), n, 1e-3, 0.9, 0.998, 1e-8, 0.1, 0.002);
            CHECK(p1 == p2);
            CHECK(m1 == m2);
            CHECK(v1 == v2);
        }
    }
}

TEST_CASE("lane selection") {
    const kernels::Lane before = kernels::active_lane();
    kernels::set_lane(kernels::Lane::Scalar);
    CHECK(kernels::active_lane() == kernels::Lane::Scalar);
    if (kernels::avx2_supported()) {
        kernels::set_lane(kernels::Lane::Avx2);
        CHECK(kernels::active_lane() == kernels::Lane::Avx2);
    } else {
        CHECK_THROWS(kernels::set_lane(kernels::Lane::Avx2));
    }
    kernels::set_lane(before);
}
