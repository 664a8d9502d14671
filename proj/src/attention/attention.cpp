#include "lgsum/attention.hpp"

#include <cmath>
#include <stdexcept>

#include "lgsum/kernels.hpp"

namespace lgsum::attention {

void FusionSpec::validate() const {
    switch (mode) {
        case FusionMode::None:
            return;
        case FusionMode::Soft:
            if (weight < 0.0) throw std::invalid_argument("soft fusion weight must be >= 0");
            return;
        case FusionMode::Direct:
        case FusionMode::Gaussian:
            if (weight <= 0.0)
                throw std::invalid_argument("direct/gaussian fusion weight must be > 0");
            return;
    }
}

const char* fusion_mode_name(FusionMode mode) {
    switch (mode) {
        case FusionMode::None: return "none";
        case FusionMode::Soft: return "soft";
        case FusionMode::Direct: return "direct";
        case FusionMode::Gaussian: return "gaussian";
    }
    return "?";
}

FusionMode fusion_mode_from_name(const std::string& name) {
    if (name == "none") return FusionMode::None;
    if (name == "soft") return FusionMode::Soft;
    if (name == "direct") return FusionMode::Direct;
    if (name == "gaussian") return FusionMode::Gaussian;
    throw std::invalid_argument("unknown fusion mode: " + name);
}

ProjectedQkv project_qkv(const DenseMatrix& x, const AttentionHeads& heads) {
    if (x.rows == 0) throw std::invalid_argument("project_qkv: empty sequence");
    if (x.cols != heads.width()) throw std::invalid_argument("project_qkv: width mismatch");
    if (static_cast<int>(heads.wq.size()) != heads.z || static_cast<int>(heads.wk.size()) != heads.z ||
        static_cast<int>(heads.wv.size()) != heads.z)
        throw std::invalid_argument("project_qkv: head count mismatch");
    ProjectedQkv out;
    auto project = [&](const DenseMatrix& w) {
        if (w.rows != x.cols || w.cols != heads.d_head)
            throw std::invalid_argument("project_qkv: projection shape mismatch");
        DenseMatrix r(x.rows, heads.d_head);
        kernels::matmul_nn(r.data.data(), x.data.data(), w.data.data(), x.rows, x.cols, w.cols);
        return r;
    };
    for (int h = 0; h < heads.z; ++h) {
        out.q.push_back(project(heads.wq[h]));
        out.k.push_back(project(heads.wk[h]));
        out.v.push_back(project(heads.wv[h]));
    }
    return out;
}

std::vector<DenseMatrix> base_attention(const std::vector<DenseMatrix>& q,
                                        const std::vector<DenseMatrix>& k, int d_head,
                                        const std::vector<std::uint8_t>* key_valid) {
    if (q.size() != k.size()) throw std::invalid_argument("base_attention: head count mismatch");
    std::vector<DenseMatrix> att;
    const double inv_scale = 1.0 / std::sqrt(static_cast<double>(d_head));
    for (std::size_t h = 0; h < q.size(); ++h) {
        if (q[h].cols != k[h].cols) throw std::invalid_argument("base_attention: width mismatch");
        DenseMatrix scores(q[h].rows, k[h].rows);
        kernels::matmul_nt(scores.data.data(), q[h].data.data(), k[h].data.data(), q[h].rows,
                           q[h].cols, k[h].rows);
        kernels::scale(scores.data.data(), scores.data.data(), inv_scale, scores.size());
        if (key_valid) {
            if (static_cast<int>(key_valid->size()) != k[h].rows)
                throw std::invalid_argument("base_attention: pad mask length mismatch");
            std::vector<std::uint8_t> mask(scores.size());
            for (int i = 0; i < scores.rows; ++i)
                for (int j = 0; j < scores.cols; ++j)
                    mask[static_cast<std::size_t>(i) * scores.cols + j] = (*key_valid)[j];
            att.push_back(numerics::softmax_rows(scores, mask.data()));
        } else {
            att.push_back(numerics::softmax_rows(scores));
        }
    }
    return att;
}

namespace {

void renormalize_rows(DenseMatrix& m) {
    for (int i = 0; i < m.rows; ++i) {
        const double s = kernels::sum(m.row(i), static_cast<std::size_t>(m.cols));
        if (s == 0.0) throw std::runtime_error("fusion renormalize: zero row sum");
        const double inv = 1.0 / s;
        kernels::scale(m.row(i), m.row(i), inv, static_cast<std::size_t>(m.cols));
    }
}

void fuse_forward(const DenseMatrix& att, const depmatrix::DepMatrix& p, const FusionSpec& spec,
                  const std::uint8_t* valid, DenseMatrix& out) {
    if (p.n != att.rows || p.n != att.cols)
        throw std::invalid_argument("apply_fusion: dependency matrix side does not match attention");
    out = DenseMatrix(att.rows, att.cols);
    const double w = spec.weight;
    for (int i = 0; i < att.rows; ++i) {
        const double* a = att.row(i);
        double* o = out.row(i);
        const std::uint8_t* vrow = valid ? valid + static_cast<std::size_t>(i) * att.cols : nullptr;
        for (int j = 0; j < att.cols; ++j) {
            if (vrow && !vrow[j]) {
                o[j] = 0.0;
                continue;
            }
            const double pij = p.at(i, j);
            switch (spec.mode) {
                case FusionMode::None:
                    o[j] = a[j];
                    break;
                case FusionMode::Soft: {
                    const double base = spec.identity_literal ? (i == j ? 1.0 : 0.0) : 1.0;
                    o[j] = (w * pij + base) * a[j];
                    break;
                }
                case FusionMode::Direct:
                    o[j] = w * pij + a[j];
                    break;
                case FusionMode::Gaussian: {
                    const double d = 1.0 - a[j] * pij;
                    o[j] = d * d / w + a[j];
                    break;
                }
            }
        }
    }
    if (spec.renormalize) renormalize_rows(out);
}

} // namespace

DenseMatrix apply_fusion(const DenseMatrix& att, const depmatrix::DepMatrix& p,
                         const FusionSpec& spec, const std::uint8_t* valid) {
    spec.validate();
    DenseMatrix out;
    fuse_forward(att, p, spec, valid, out);
    return out;
}

std::vector<DenseMatrix> apply_fusion(const std::vector<DenseMatrix>& att,
                                      const depmatrix::DepMatrix& p, const FusionSpec& spec,
                                      const std::uint8_t* valid) {
    std::vector<DenseMatrix> out;
    out.reserve(att.size());
    for (const auto& a : att) out.push_back(apply_fusion(a, p, spec, valid));
    return out;
}

DenseMatrix fused_context(const std::vector<DenseMatrix>& lgatt,
                          const std::vector<DenseMatrix>& v, const AttentionHeads& heads) {
    if (lgatt.size() != v.size() || static_cast<int>(lgatt.size()) != heads.z)
        throw std::invalid_argument("fused_context: head count mismatch");
    const int t = lgatt.empty() ? 0 : lgatt[0].rows;
    DenseMatrix concat(t, heads.width());
    for (int h = 0; h < heads.z; ++h) {
        DenseMatrix ctx(t, heads.d_head);
        kernels::matmul_nn(ctx.data.data(), lgatt[h].data.data(), v[h].data.data(), t,
                           lgatt[h].cols, v[h].cols);
        for (int i = 0; i < t; ++i)
            std::copy(ctx.row(i), ctx.row(i) + heads.d_head, concat.row(i) + h * heads.d_head);
    }
    DenseMatrix out(t, heads.width());
    kernels::matmul_nn(out.data.data(), concat.data.data(), heads.wo.data.data(), t, concat.cols,
                       heads.wo.cols);
    return out;
}

int op_fuse(Tape& t, int att, std::shared_ptr<const depmatrix::DepMatrix> p, FusionSpec spec,
            std::shared_ptr<const std::vector<std::uint8_t>> valid) {
    spec.validate();
    // bit-exact passthrough: nothing to record
    if (spec.mode == FusionMode::None && !spec.renormalize) return att;

    const DenseMatrix& av = t.value(att);
    if (valid && valid->size() != av.size())
        throw std::invalid_argument("op_fuse: mask shape mismatch");
    DenseMatrix pre;
    fuse_forward(av, *p, {spec.mode, spec.weight, spec.identity_literal, false},
                 valid ? valid->data() : nullptr, pre);

    auto backward = [att, p, spec, valid](Tape& tp, int self) {
        const DenseMatrix& g = tp.grad(self);
        const DenseMatrix& av2 = tp.value(att);
        DenseMatrix da(g.rows, g.cols);
        for (int i = 0; i < g.rows; ++i) {
            const std::uint8_t* vrow =
                valid ? valid->data() + static_cast<std::size_t>(i) * g.cols : nullptr;
            for (int j = 0; j < g.cols; ++j) {
                if (vrow && !vrow[j]) continue;
                const double pij = p->at(i, j);
                double factor = 1.0;
                switch (spec.mode) {
                    case FusionMode::None:
                        factor = 1.0;
                        break;
                    case FusionMode::Soft: {
                        const double base = spec.identity_literal ? (i == j ? 1.0 : 0.0) : 1.0;
                        factor = spec.weight * pij + base;
                        break;
                    }
                    case FusionMode::Direct:
                        factor = 1.0;
                        break;
                    case FusionMode::Gaussian:
                        factor = 1.0 - 2.0 * pij * (1.0 - av2.at(i, j) * pij) / spec.weight;
                        break;
                }
                da.at(i, j) = g.at(i, j) * factor;
            }
        }
        tp.add_grad(att, da);
    };

    const int fused = t.make_node(std::move(pre), {att}, backward);
    if (!spec.renormalize) return fused;

    // row renormalization with quotient-rule backward
    const DenseMatrix& fv = t.value(fused);
    DenseMatrix normed = fv;
    renormalize_rows(normed);
    auto sums = std::make_shared<std::vector<double>>(static_cast<std::size_t>(fv.rows));
    for (int i = 0; i < fv.rows; ++i)
        (*sums)[i] = kernels::sum(fv.row(i), static_cast<std::size_t>(fv.cols));
    return t.make_node(std::move(normed), {fused}, [fused, sums](Tape& tp, int self) {
        const DenseMatrix& g = tp.grad(self);
        const DenseMatrix& y = tp.value(self);
        DenseMatrix df(g.rows, g.cols);
        for (int i = 0; i < g.rows; ++i) {
            const double dot = kernels::dot(g.row(i), y.row(i), static_cast<std::size_t>(g.cols));
            const double inv = 1.0 / (*sums)[i];
            for (int j = 0; j < g.cols; ++j) df.at(i, j) = (g.at(i, j) - dot) * inv;
        }
        tp.add_grad(fused, df);
    });
}

std::shared_ptr<std::vector<std::uint8_t>> make_attention_mask(int tq, int tk, int valid_k,
                                                               bool causal) {
    if (causal && tq != tk)
        throw std::invalid_argument("causal mask requires a square attention matrix");
    auto mask = std::make_shared<std::vector<std::uint8_t>>(
        static_cast<std::size_t>(tq) * tk, std::uint8_t{0});
    for (int i = 0; i < tq; ++i)
        for (int j = 0; j < tk; ++j) {
            const bool ok = j < valid_k && (!causal || j <= i);
            (*mask)[static_cast<std::size_t>(i) * tk + j] = ok ? 1 : 0;
        }
    return mask;
}

int attention_block(Tape& t, int x_q, int x_kv, const HeadParams& params,
                    std::shared_ptr<const depmatrix::DepMatrix> p, const FusionSpec& spec,
                    std::shared_ptr<const std::vector<std::uint8_t>> mask, double dropout_rate,
                    AttnCapture* capture) {
    const int width = params.z * params.d_head;
    if (t.value(x_q).cols != width || t.value(x_kv).cols != width)
        throw std::invalid_argument("attention_block: width mismatch");
    if (p && (p->n != t.value(x_kv).rows || t.value(x_q).rows != t.value(x_kv).rows))
        throw std::invalid_argument("attention_block: dependency matrix side mismatch");
    const double inv_scale = 1.0 / std::sqrt(static_cast<double>(params.d_head));

    std::vector<int> contexts;
    for (int h = 0; h < params.z; ++h) {
        const int q = numerics::op_matmul(t, x_q, t.param(*params.wq[h]));
        const int k = numerics::op_matmul(t, x_kv, t.param(*params.wk[h]));
        const int v = numerics::op_matmul(t, x_kv, t.param(*params.wv[h]));
        const int scores = numerics::op_scale(t, numerics::op_matmul_nt(t, q, k), inv_scale);
        const int att = numerics::op_softmax_rows(t, scores, mask);
        const int att_d = numerics::op_dropout(t, att, dropout_rate);
        if (capture) capture->base.push_back(t.value(att_d));
        const int fused = p ? op_fuse(t, att_d, p, spec, mask) : att_d;
        if (capture) capture->fused.push_back(t.value(fused));
        contexts.push_back(numerics::op_matmul(t, fused, v));
    }
    const int concat = numerics::op_concat_cols(t, contexts);
    return numerics::op_matmul(t, concat, t.param(*params.wo));
}

} // namespace lgsum::attention
