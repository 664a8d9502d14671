#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "lgsum/depmatrix.hpp"
#include "lgsum/matrix.hpp"
#include "lgsum/ops.hpp"
#include "lgsum/tape.hpp"

namespace lgsum::attention {

using numerics::DenseMatrix;
using numerics::Parameter;
using numerics::Tape;

enum class FusionMode { None, Soft, Direct, Gaussian };

// How the dependency matrix perturbs the attention weights:
//   none:      out = att
//   soft:      out = (weight*P + 1) .* att        (ones term; see identity_literal)
//   direct:    out = weight*P + att
//   gaussian:  out = (1 - att.*P)^2 / weight + att
//
// identity_literal swaps the soft mode's all-ones term for diagonal ones,
// which breaks the weight=0 baseline equivalence; kept for fidelity
// experiments. renormalize rescales rows to sum 1 after fusion (off by
// default; the additive modes are meant to disturb the attention scale).
// Note the gaussian form adds 1/weight even where P = 0.
struct FusionSpec {
    FusionMode mode = FusionMode::None;
    double weight = 0.0;
    bool identity_literal = false;
    bool renormalize = false;

    void validate() const; // weight > 0 for direct/gaussian, >= 0 for soft

    static FusionSpec none() { return {}; }
    static FusionSpec soft(double alpha) { return {FusionMode::Soft, alpha, false, false}; }
    static FusionSpec direct(double w = 0.25) { return {FusionMode::Direct, w, false, false}; }
    static FusionSpec gaussian(double w) { return {FusionMode::Gaussian, w, false, false}; }
};

const char* fusion_mode_name(FusionMode mode);
FusionMode fusion_mode_from_name(const std::string& name);

// Per-head projection weights for plain (non-tape) forward passes.
struct AttentionHeads {
    int z = 0;      // head count
    int d_head = 0; // per-head width; z * d_head = model width
    std::vector<DenseMatrix> wq, wk, wv; // each width x d_head
    DenseMatrix wo;                      // width x width
    int width() const { return z * d_head; }
};

struct ProjectedQkv {
    std::vector<DenseMatrix> q, k, v; // per head, each T x d_head
};

// q/k/v per head for an input sequence x (T x width).
ProjectedQkv project_qkv(const DenseMatrix& x, const AttentionHeads& heads);

// att_h = softmax(q_h k_h^T / sqrt(d_head)) with padded keys masked to
// probability 0. key_valid (optional) has one 0/1 flag per key position.
std::vector<DenseMatrix> base_attention(const std::vector<DenseMatrix>& q,
                                        const std::vector<DenseMatrix>& k, int d_head,
                                        const std::vector<std::uint8_t>* key_valid = nullptr);

// One head's fusion. valid (optional, T x T row-major) forces entries at
// masked positions to exactly 0 in every mode, so padding never interacts
// with P (the gaussian form would otherwise leak 1/weight into padding).
DenseMatrix apply_fusion(const DenseMatrix& att, const depmatrix::DepMatrix& p,
                         const FusionSpec& spec, const std::uint8_t* valid = nullptr);
std::vector<DenseMatrix> apply_fusion(const std::vector<DenseMatrix>& att,
                                      const depmatrix::DepMatrix& p, const FusionSpec& spec,
                                      const std::uint8_t* valid = nullptr);

// Context_i = sum_j LGAtt_ij v_j per head, heads concatenated, then the
// output projection.
DenseMatrix fused_context(const std::vector<DenseMatrix>& lgatt,
                          const std::vector<DenseMatrix>& v, const AttentionHeads& heads);

// ---- tape path -------------------------------------------------------------

// Fusion as a differentiable tape op; p is shared across heads.
int op_fuse(Tape& t, int att, std::shared_ptr<const depmatrix::DepMatrix> p, FusionSpec spec,
            std::shared_ptr<const std::vector<std::uint8_t>> valid = nullptr);

// Parameter handles for one attention block inside a model.
struct HeadParams {
    int z = 0;
    int d_head = 0;
    std::vector<Parameter*> wq, wk, wv;
    Parameter* wo = nullptr;
};

// Captured attention maps (per head) of one block's forward pass.
struct AttnCapture {
    std::vector<DenseMatrix> base;  // post-softmax
    std::vector<DenseMatrix> fused; // post-fusion
};

// Full multi-head block: project, score, softmax (with optional mask),
// dropout, fusion against p (when given), context, concat, output projection.
// x_q is (Tq x width), x_kv is (Tk x width); mask (optional) is Tq x Tk.
int attention_block(Tape& t, int x_q, int x_kv, const HeadParams& params,
                    std::shared_ptr<const depmatrix::DepMatrix> p, const FusionSpec& spec,
                    std::shared_ptr<const std::vector<std::uint8_t>> mask, double dropout_rate,
                    AttnCapture* capture = nullptr);

// Tq x Tk mask keeping only valid key columns; with causal=true additionally
// restricts row i to keys j <= i (requires Tq == Tk).
std::shared_ptr<std::vector<std::uint8_t>> make_attention_mask(int tq, int tk, int valid_k,
                                                               bool causal);

} // namespace lgsum::attention
