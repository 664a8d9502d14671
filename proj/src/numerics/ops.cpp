#include "lgsum/ops.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "lgsum/kernels.hpp"

namespace lgsum::numerics {

namespace {

void check_same_shape(const DenseMatrix& a, const DenseMatrix& b, const char* what) {
    if (!a.same_shape(b)) throw std::invalid_argument(std::string(what) + ": shape mismatch");
}

// Shared softmax core. Writes probabilities into out (same shape as in).
void softmax_rows_into(const DenseMatrix& in, const std::uint8_t* mask, DenseMatrix& out) {
    out = DenseMatrix(in.rows, in.cols);
    for (int i = 0; i < in.rows; ++i) {
        const double* src = in.row(i);
        const std::uint8_t* mrow = mask ? mask + static_cast<std::size_t>(i) * in.cols : nullptr;
        double best = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < in.cols; ++j)
            if ((!mrow || mrow[j]) && src[j] > best) best = src[j];
        if (best == -std::numeric_limits<double>::infinity())
            throw std::runtime_error("degenerate attention row");
        double z = 0.0;
        double* dst = out.row(i);
        for (int j = 0; j < in.cols; ++j) {
            if (mrow && !mrow[j]) {
                dst[j] = 0.0;
            } else {
                dst[j] = std::exp(src[j] - best);
                z += dst[j];
            }
        }
        const double inv = 1.0 / z;
        for (int j = 0; j < in.cols; ++j) dst[j] *= inv;
    }
}

} // namespace

DenseMatrix softmax_rows(const DenseMatrix& m, const std::uint8_t* mask) {
    DenseMatrix out;
    softmax_rows_into(m, mask, out);
    return out;
}

std::vector<double> layer_norm(const std::vector<double>& x, const std::vector<double>& gain,
                               const std::vector<double>& bias, double eps) {
    if (x.size() != gain.size() || x.size() != bias.size())
        throw std::invalid_argument("layer_norm: length mismatch");
    if (eps <= 0.0) throw std::invalid_argument("layer_norm: eps must be positive");
    const std::size_t n = x.size();
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    const double inv = 1.0 / std::sqrt(var + eps);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = gain[i] * ((x[i] - mean) * inv) + bias[i];
    return out;
}

std::vector<double> ffn_forward(const std::vector<double>& x, const DenseMatrix& w1,
                                const std::vector<double>& b1, const DenseMatrix& w2,
                                const std::vector<double>& b2) {
    if (w1.cols != static_cast<int>(x.size()) || w1.rows != static_cast<int>(b1.size()) ||
        w2.cols != w1.rows || w2.rows != static_cast<int>(b2.size()))
        throw std::invalid_argument("ffn_forward: dimension mismatch");
    std::vector<double> h(w1.rows);
    for (int i = 0; i < w1.rows; ++i) {
        double acc = kernels::dot(w1.row(i), x.data(), x.size()) + b1[i];
        h[i] = acc > 0.0 ? acc : 0.0;
    }
    std::vector<double> y(w2.rows);
    for (int i = 0; i < w2.rows; ++i)
        y[i] = kernels::dot(w2.row(i), h.data(), h.size()) + b2[i];
    return y;
}

double cross_entropy(const DenseMatrix& logits, const std::vector<int>& targets, int pad_index) {
    if (static_cast<int>(targets.size()) != logits.rows)
        throw std::invalid_argument("cross_entropy: one target per logit row required");
    double total = 0.0;
    int count = 0;
    for (int i = 0; i < logits.rows; ++i) {
        const int y = targets[i];
        if (y == pad_index) continue;
        if (y < 0 || y >= logits.cols) throw std::invalid_argument("cross_entropy: target out of range");
        const double* row = logits.row(i);
        const double m = kernels::max(row, logits.cols);
        double z = 0.0;
        for (int j = 0; j < logits.cols; ++j) z += std::exp(row[j] - m);
        total += (m + std::log(z)) - row[y];
        ++count;
    }
    if (count == 0) throw std::runtime_error("cross_entropy: all positions padded");
    return total / count;
}

// ---- tape operations -------------------------------------------------------

int op_matmul(Tape& t, int a, int b) {
    const DenseMatrix& av = t.value(a);
    const DenseMatrix& bv = t.value(b);
    if (av.cols != bv.rows) throw std::invalid_argument("matmul: inner dimension mismatch");
    DenseMatrix out(av.rows, bv.cols);
    kernels::matmul_nn(out.data.data(), av.data.data(), bv.data.data(), av.rows, av.cols, bv.cols);
    return t.make_node(std::move(out), {a, b}, [a, b](Tape& tp, int self) {
        const DenseMatrix& g = tp.grad(self);
        const DenseMatrix& av2 = tp.value(a);
        const DenseMatrix& bv2 = tp.value(b);
        if (tp.requires_grad(a)) {
            DenseMatrix da(av2.rows, av2.cols); // dA = dC * B^T
            kernels::matmul_nt(da.data.data(), g.data.data(), bv2.data.data(), g.rows, g.cols, bv2.rows);
            tp.add_grad(a, da);
        }
        if (tp.requires_grad(b)) {
            DenseMatrix db(bv2.rows, bv2.cols); // dB = A^T * dC
            kernels::matmul_tn(db.data.data(), av2.data.data(), g.data.data(), av2.cols, av2.rows, g.cols);
            tp.add_grad(b, db);
        }
    });
}

int op_matmul_nt(Tape& t, int a, int b) {
    const DenseMatrix& av = t.value(a);
    const DenseMatrix& bv = t.value(b);
    if (av.cols != bv.cols) throw std::invalid_argument("matmul_nt: inner dimension mismatch");
    DenseMatrix out(av.rows, bv.rows);
    kernels::matmul_nt(out.data.data(), av.data.data(), bv.data.data(), av.rows, av.cols, bv.rows);
    return t.make_node(std::move(out), {a, b}, [a, b](Tape& tp, int self) {
        const DenseMatrix& g = tp.grad(self); // (rows_a x rows_b)
        const DenseMatrix& av2 = tp.value(a);
        const DenseMatrix& bv2 = tp.value(b);
        if (tp.requires_grad(a)) {
            DenseMatrix da(av2.rows, av2.cols); // dA = dC * B
            kernels::matmul_nn(da.data.data(), g.data.data(), bv2.data.data(), g.rows, g.cols, bv2.cols);
            tp.add_grad(a, da);
        }
        if (tp.requires_grad(b)) {
            DenseMatrix db(bv2.rows, bv2.cols); // dB = dC^T * A
            kernels::matmul_tn(db.data.data(), g.data.data(), av2.data.data(), g.cols, g.rows, av2.cols);
            tp.add_grad(b, db);
        }
    });
}

int op_add(Tape& t, int a, int b) {
    const DenseMatrix& av = t.value(a);
    const DenseMatrix& bv = t.value(b);
    check_same_shape(av, bv, "add");
    DenseMatrix out(av.rows, av.cols);
    kernels::add(out.data.data(), av.data.data(), bv.data.data(), out.size());
    return t.make_node(std::move(out), {a, b}, [a, b](Tape& tp, int self) {
        tp.add_grad(a, tp.grad(self));
        tp.add_grad(b, tp.grad(self));
    });
}

int op_sub(Tape& t, int a, int b) {
    const DenseMatrix& av = t.value(a);
    const DenseMatrix& bv = t.value(b);
    check_same_shape(av, bv, "sub");
    DenseMatrix out(av.rows, av.cols);
    kernels::sub(out.data.data(), av.data.data(), bv.data.data(), out.size());
    return t.make_node(std::move(out), {a, b}, [a, b](Tape& tp, int self) {
        const DenseMatrix& g = tp.grad(self);
        tp.add_grad(a, g);
        if (tp.requires_grad(b)) {
            DenseMatrix neg(g.rows, g.cols);
            kernels::scale(neg.data.data(), g.data.data(), -1.0, g.size());
            tp.add_grad(b, neg);
        }
    });
}

int op_hadamard(Tape& t, int a, int b) {
    const DenseMatrix& av = t.value(a);
    const DenseMatrix& bv = t.value(b);
    check_same_shape(av, bv, "hadamard");
    DenseMatrix out(av.rows, av.cols);
    kernels::hadamard(out.data.data(), av.data.data(), bv.data.data(), out.size());
    return t.make_node(std::move(out), {a, b}, [a, b](Tape& tp, int self) {
        const DenseMatrix& g = tp.grad(self);
        if (tp.requires_grad(a)) {
            DenseMatrix da(g.rows, g.cols);
            kernels::hadamard(da.data.data(), g.data.data(), tp.value(b).data.data(), g.size());
            tp.add_grad(a, da);
        }
        if (tp.requires_grad(b)) {
            DenseMatrix db(g.rows, g.cols);
            kernels::hadamard(db.data.data(), g.data.data(), tp.value(a).data.data(), g.size());
            tp.add_grad(b, db);
        }
    });
}

int op_scale(Tape& t, int a, double alpha) {
    const DenseMatrix& av = t.value(a);
    DenseMatrix out(av.rows, av.cols);
    kernels::scale(out.data.data(), av.data.data(), alpha, out.size());
    return t.make_node(std::move(out), {a}, [a, alpha](Tape& tp, int self) {
        const DenseMatrix& g = tp.grad(self);
        DenseMatrix da(g.rows, g.cols);
        kernels::scale(da.data.data(), g.data.data(), alpha, g.size());
        tp.add_grad(a, da);
    });
}

int op_add_rowvec(Tape& t, int a, int bias) {
    const DenseMatrix& av = t.value(a);
    const DenseMatrix& bv = t.value(bias);
    if (bv.rows != 1 || bv.cols != av.cols)
        throw std::invalid_argument("add_rowvec: bias must be 1 x cols");
    DenseMatrix out(av.rows, av.cols);
    for (int i = 0; i < av.rows; ++i)
        kernels::add(out.row(i), av.row(i), bv.row(0), static_cast<std::size_t>(av.cols));
    return t.make_node(std::move(out), {a, bias}, [a, bias](Tape& tp, int self) {
        const DenseMatrix& g = tp.grad(self);
        tp.add_grad(a, g);
        if (tp.requires_grad(bias)) {
            DenseMatrix db(1, g.cols);
            for (int i = 0; i < g.rows; ++i)
                kernels::add(db.row(0), db.row(0), g.row(i), static_cast<std::size_t>(g.cols));
            tp.add_grad(bias, db);
        }
    });
}

int op_relu(Tape& t, int a) {
    const DenseMatrix& av = t.value(a);
    DenseMatrix out(av.rows, av.cols);
    kernels::relu(out.data.data(), av.data.data(), out.size());
    return t.make_node(std::move(out), {a}, [a](Tape& tp, int self) {
        const DenseMatrix& g = tp.grad(self);
        DenseMatrix da(g.rows, g.cols);
        kernels::relu_mask(da.data.data(), g.data.data(), tp.value(a).data.data(), g.size());
        tp.add_grad(a, da);
    });
}

int op_softmax_rows(Tape& t, int a, std::shared_ptr<const std::vector<std::uint8_t>> mask) {
    const DenseMatrix& av = t.value(a);
    if (mask && mask->size() != av.size())
        throw std::invalid_argument("softmax_rows: mask shape mismatch");
    DenseMatrix out;
    softmax_rows_into(av, mask ? mask->data() : nullptr, out);
    return t.make_node(std::move(out), {a}, [a](Tape& tp, int self) {
        const DenseMatrix& y = tp.value(self);
        const DenseMatrix& g = tp.grad(self);
        DenseMatrix da(y.rows, y.cols);
        for (int i = 0; i < y.rows; ++i) {
            const double* yr = y.row(i);
            const double* gr = g.row(i);
            const double s = kernels::dot(gr, yr, static_cast<std::size_t>(y.cols));
            double* dr = da.row(i);
            for (int j = 0; j < y.cols; ++j) dr[j] = yr[j] * (gr[j] - s);
        }
        tp.add_grad(a, da);
    });
}

int op_layer_norm_rows(Tape& t, int x, int gain, int bias, double eps) {
    const DenseMatrix& xv = t.value(x);
    const DenseMatrix& gv = t.value(gain);
    const DenseMatrix& bv = t.value(bias);
    if (gv.rows != 1 || bv.rows != 1 || gv.cols != xv.cols || bv.cols != xv.cols)
        throw std::invalid_argument("layer_norm_rows: gain/bias must be 1 x cols");
    const int n = xv.cols;
    auto xhat = std::make_shared<DenseMatrix>(xv.rows, n);
    auto inv_std = std::make_shared<std::vector<double>>(static_cast<std::size_t>(xv.rows));
    DenseMatrix out(xv.rows, n);
    for (int i = 0; i < xv.rows; ++i) {
        const double* xr = xv.row(i);
        const double mean = kernels::sum(xr, static_cast<std::size_t>(n)) / n;
        double var = 0.0;
        for (int j = 0; j < n; ++j) var += (xr[j] - mean) * (xr[j] - mean);
        var /= n;
        const double inv = 1.0 / std::sqrt(var + eps);
        (*inv_std)[i] = inv;
        double* hr = xhat->row(i);
        double* orow = out.row(i);
        for (int j = 0; j < n; ++j) {
            hr[j] = (xr[j] - mean) * inv;
            orow[j] = gv.at(0, j) * hr[j] + bv.at(0, j);
        }
    }
    return t.make_node(std::move(out), {x, gain, bias},
                       [x, gain, bias, xhat, inv_std](Tape& tp, int self) {
        const DenseMatrix& g = tp.grad(self);
        const DenseMatrix& gv2 = tp.value(gain);
        const int n = g.cols;
        if (tp.requires_grad(gain)) {
            DenseMatrix dg(1, n);
            for (int i = 0; i < g.rows; ++i)
                for (int j = 0; j < n; ++j) dg.at(0, j) += g.at(i, j) * xhat->at(i, j);
            tp.add_grad(gain, dg);
        }
        if (tp.requires_grad(bias)) {
            DenseMatrix db(1, n);
            for (int i = 0; i < g.rows; ++i)
                kernels::add(db.row(0), db.row(0), g.row(i), static_cast<std::size_t>(n));
            tp.add_grad(bias, db);
        }
        if (tp.requires_grad(x)) {
            DenseMatrix dx(g.rows, n);
            std::vector<double> dxhat(static_cast<std::size_t>(n));
            for (int i = 0; i < g.rows; ++i) {
                const double* gr = g.row(i);
                const double* hr = xhat->row(i);
                for (int j = 0; j < n; ++j) dxhat[j] = gr[j] * gv2.at(0, j);
                double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
                for (int j = 0; j < n; ++j) {
                    mean_dxhat += dxhat[j];
                    mean_dxhat_xhat += dxhat[j] * hr[j];
                }
                mean_dxhat /= n;
                mean_dxhat_xhat /= n;
                double* dr = dx.row(i);
                const double inv = (*inv_std)[i];
                for (int j = 0; j < n; ++j)
                    dr[j] = inv * (dxhat[j] - mean_dxhat - hr[j] * mean_dxhat_xhat);
            }
            tp.add_grad(x, dx);
        }
    });
}

int op_concat_cols(Tape& t, const std::vector<int>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat_cols: no parts");
    const int rows = t.value(parts[0]).rows;
    int total = 0;
    for (int p : parts) {
        if (t.value(p).rows != rows) throw std::invalid_argument("concat_cols: row mismatch");
        total += t.value(p).cols;
    }
    DenseMatrix out(rows, total);
    int off = 0;
    for (int p : parts) {
        const DenseMatrix& pv = t.value(p);
        for (int i = 0; i < rows; ++i)
            std::copy(pv.row(i), pv.row(i) + pv.cols, out.row(i) + off);
        off += pv.cols;
    }
    return t.make_node(std::move(out), parts, [parts](Tape& tp, int self) {
        const DenseMatrix& g = tp.grad(self);
        int off = 0;
        for (int p : parts) {
            const DenseMatrix& pv = tp.value(p);
            if (tp.requires_grad(p)) {
                DenseMatrix dp(pv.rows, pv.cols);
                for (int i = 0; i < pv.rows; ++i)
                    std::copy(g.row(i) + off, g.row(i) + off + pv.cols, dp.row(i));
                tp.add_grad(p, dp);
            }
            off += pv.cols;
        }
    });
}

int op_slice_rows(Tape& t, int a, int row_begin, int row_end) {
    const DenseMatrix& av = t.value(a);
    if (row_begin < 0 || row_end > av.rows || row_begin >= row_end)
        throw std::invalid_argument("slice_rows: bad range");
    DenseMatrix out(row_end - row_begin, av.cols);
    for (int i = row_begin; i < row_end; ++i)
        std::copy(av.row(i), av.row(i) + av.cols, out.row(i - row_begin));
    return t.make_node(std::move(out), {a}, [a, row_begin](Tape& tp, int self) {
        const DenseMatrix& g = tp.grad(self);
        const DenseMatrix& av2 = tp.value(a);
        DenseMatrix da(av2.rows, av2.cols);
        for (int i = 0; i < g.rows; ++i)
            std::copy(g.row(i), g.row(i) + g.cols, da.row(i + row_begin));
        tp.add_grad(a, da);
    });
}

int op_dropout(Tape& t, int a, double rate) {
    if (!t.training || rate == 0.0) return a; // exact identity in evaluation mode
    if (rate < 0.0 || rate >= 1.0) throw std::invalid_argument("dropout: rate must be in [0, 1)");
    if (!t.rng) throw std::runtime_error("dropout: training tape has no RNG");
    const DenseMatrix& av = t.value(a);
    auto factors = std::make_shared<DenseMatrix>(av.rows, av.cols);
    const double keep_scale = 1.0 / (1.0 - rate);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (double& f : factors->data) f = unit(*t.rng) < rate ? 0.0 : keep_scale;
    DenseMatrix out(av.rows, av.cols);
    kernels::hadamard(out.data.data(), av.data.data(), factors->data.data(), out.size());
    return t.make_node(std::move(out), {a}, [a, factors](Tape& tp, int self) {
        const DenseMatrix& g = tp.grad(self);
        DenseMatrix da(g.rows, g.cols);
        kernels::hadamard(da.data.data(), g.data.data(), factors->data.data(), g.size());
        tp.add_grad(a, da);
    });
}

int op_embedding_rows(Tape& t, int table, std::vector<int> indices) {
    const DenseMatrix& tv = t.value(table);
    DenseMatrix out(static_cast<int>(indices.size()), tv.cols);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const int idx = indices[i];
        if (idx < 0 || idx >= tv.rows) throw std::invalid_argument("embedding: index out of range");
        std::copy(tv.row(idx), tv.row(idx) + tv.cols, out.row(static_cast<int>(i)));
    }
    return t.make_node(std::move(out), {table},
                       [table, idx = std::move(indices)](Tape& tp, int self) {
        const DenseMatrix& g = tp.grad(self);
        const DenseMatrix& tv2 = tp.value(table);
        DenseMatrix dt(tv2.rows, tv2.cols);
        for (std::size_t i = 0; i < idx.size(); ++i)
            kernels::add(dt.row(idx[i]), dt.row(idx[i]), g.row(static_cast<int>(i)),
                         static_cast<std::size_t>(g.cols));
        tp.add_grad(table, dt);
    });
}

int op_cross_entropy_sum(Tape& t, int logits, std::vector<int> targets, int pad_index,
                         double label_smoothing, int* non_pad_count) {
    const DenseMatrix& lv = t.value(logits);
    if (static_cast<int>(targets.size()) != lv.rows)
        throw std::invalid_argument("cross_entropy: one target per logit row required");
    const int vocab = lv.cols;
    auto probs = std::make_shared<DenseMatrix>(lv.rows, vocab);
    double total = 0.0;
    int count = 0;
    for (int i = 0; i < lv.rows; ++i) {
        const int y = targets[i];
        if (y == pad_index) continue;
        if (y < 0 || y >= vocab) throw std::invalid_argument("cross_entropy: target out of range");
        const double* row = lv.row(i);
        const double m = kernels::max(row, static_cast<std::size_t>(vocab));
        double z = 0.0;
        double rowsum = 0.0;
        double* pr = probs->row(i);
        for (int j = 0; j < vocab; ++j) {
            pr[j] = std::exp(row[j] - m);
            z += pr[j];
            rowsum += row[j];
        }
        const double logz = m + std::log(z);
        for (int j = 0; j < vocab; ++j) pr[j] /= z;
        if (label_smoothing == 0.0) {
            total += logz - row[y];
        } else {
            total += logz - ((1.0 - label_smoothing) * row[y] + label_smoothing * rowsum / vocab);
        }
        ++count;
    }
    if (count == 0) throw std::runtime_error("cross_entropy: all positions padded");
    if (non_pad_count) *non_pad_count = count;
    DenseMatrix out(1, 1);
    out.at(0, 0) = total;
    return t.make_node(std::move(out), {logits},
                       [logits, probs, tg = std::move(targets), pad_index,
                        label_smoothing](Tape& tp, int self) {
        const double gscale = tp.grad(self).at(0, 0);
        const DenseMatrix& lv2 = tp.value(logits);
        const int vocab = lv2.cols;
        DenseMatrix dl(lv2.rows, vocab);
        for (int i = 0; i < lv2.rows; ++i) {
            const int y = tg[i];
            if (y == pad_index) continue;
            const double* pr = probs->row(i);
            double* dr = dl.row(i);
            const double uniform = label_smoothing / vocab;
            for (int j = 0; j < vocab; ++j) dr[j] = gscale * (pr[j] - uniform);
            dr[y] -= gscale * (1.0 - label_smoothing);
        }
        tp.add_grad(logits, dl);
    });
}

} // namespace lgsum::numerics
