#include "lgsum/model.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "lgsum/ops.hpp"

namespace lgsum::model {

using attention::attention_block;
using attention::make_attention_mask;
using numerics::op_add;
using numerics::op_add_rowvec;
using numerics::op_cross_entropy_sum;
using numerics::op_embedding_rows;
using numerics::op_layer_norm_rows;
using numerics::op_matmul;
using numerics::op_relu;
using numerics::op_scale;
using numerics::op_slice_rows;

void ModelConfig::validate() const {
    if (vocab_size <= Vocabulary::kReservedCount)
        throw std::invalid_argument("config: vocabulary too small");
    if (width <= 0 || heads <= 0 || width % heads != 0)
        throw std::invalid_argument("config: width must be a positive multiple of heads");
    if (enc_layers < 1 || dec_layers < 1)
        throw std::invalid_argument("config: layer counts must be >= 1");
    if (ffn_width < 1) throw std::invalid_argument("config: ffn width must be >= 1");
    if (dropout < 0.0 || dropout >= 1.0) throw std::invalid_argument("config: dropout out of range");
    if (max_src_tokens < 1 || max_tgt_tokens < 1)
        throw std::invalid_argument("config: truncation limits must be >= 1");
    if (min_gen < 1 || max_gen < min_gen)
        throw std::invalid_argument("config: need 1 <= min_gen <= max_gen");
    if (label_smoothing < 0.0 || label_smoothing >= 1.0)
        throw std::invalid_argument("config: label smoothing out of range");
    fusion.validate();
}

DenseMatrix sinusoid_encoding(int positions, int width) {
    DenseMatrix pe(positions, width);
    for (int pos = 0; pos < positions; ++pos) {
        for (int i = 0; 2 * i < width; ++i) {
            const double rate = std::pow(10000.0, -2.0 * i / width);
            pe.at(pos, 2 * i) = std::sin(pos * rate);
            if (2 * i + 1 < width) pe.at(pos, 2 * i + 1) = std::cos(pos * rate);
        }
    }
    return pe;
}

namespace {

DenseMatrix xavier_uniform(std::mt19937_64& rng, int rows, int cols) {
    const double limit = std::sqrt(6.0 / (rows + cols));
    std::uniform_real_distribution<double> d(-limit, limit);
    DenseMatrix m(rows, cols);
    for (double& v : m.data) v = d(rng);
    return m;
}

attention::HeadParams make_heads(ParameterStore& store, std::mt19937_64& rng,
                                 const std::string& prefix, int z, int d_head) {
    attention::HeadParams hp;
    hp.z = z;
    hp.d_head = d_head;
    const int width = z * d_head;
    for (int h = 0; h < z; ++h) {
        const std::string tag = prefix + ".h" + std::to_string(h);
        hp.wq.push_back(&store.create(tag + ".wq", width, d_head));
        hp.wk.push_back(&store.create(tag + ".wk", width, d_head));
        hp.wv.push_back(&store.create(tag + ".wv", width, d_head));
        hp.wq.back()->value = xavier_uniform(rng, width, d_head);
        hp.wk.back()->value = xavier_uniform(rng, width, d_head);
        hp.wv.back()->value = xavier_uniform(rng, width, d_head);
    }
    hp.wo = &store.create(prefix + ".wo", width, width);
    hp.wo->value = xavier_uniform(rng, width, width);
    return hp;
}

Parameter* make_ln_gain(ParameterStore& store, const std::string& name, int width) {
    Parameter* p = &store.create(name, 1, width);
    for (double& v : p->value.data) v = 1.0;
    return p;
}

} // namespace

Transformer::Transformer(ModelConfig config, Vocabulary vocab, std::uint64_t init_seed)
    : config_(std::move(config)), vocab_(std::move(vocab)) {
    if (config_.vocab_size == 0) config_.vocab_size = vocab_.size();
    if (config_.vocab_size != vocab_.size())
        throw std::invalid_argument("config vocab_size disagrees with the vocabulary");
    config_.validate();
    build_parameters(init_seed);
}

void Transformer::build_parameters(std::uint64_t init_seed) {
    params_ = std::make_unique<ParameterStore>();
    std::mt19937_64 rng(init_seed);
    ParameterStore& store = *params_;
    const int width = config_.width;
    const int v = config_.vocab_size;

    src_embed_ = &store.create("src_embed", v, width);
    src_embed_->value = xavier_uniform(rng, v, width);
    tgt_embed_ = &store.create("tgt_embed", v, width);
    tgt_embed_->value = xavier_uniform(rng, v, width);

    for (int l = 0; l < config_.enc_layers; ++l) {
        const std::string prefix = "enc.l" + std::to_string(l);
        EncoderLayerParams layer;
        layer.att = make_heads(store, rng, prefix + ".att", config_.heads, config_.d_head());
        layer.ln1_gain = make_ln_gain(store, prefix + ".ln1.gain", width);
        layer.ln1_bias = &store.create(prefix + ".ln1.bias", 1, width);
        layer.ffn_w1 = &store.create(prefix + ".ffn.w1", width, config_.ffn_width);
        layer.ffn_w1->value = xavier_uniform(rng, width, config_.ffn_width);
        layer.ffn_b1 = &store.create(prefix + ".ffn.b1", 1, config_.ffn_width);
        layer.ffn_w2 = &store.create(prefix + ".ffn.w2", config_.ffn_width, width);
        layer.ffn_w2->value = xavier_uniform(rng, config_.ffn_width, width);
        layer.ffn_b2 = &store.create(prefix + ".ffn.b2", 1, width);
        layer.ln2_gain = make_ln_gain(store, prefix + ".ln2.gain", width);
        layer.ln2_bias = &store.create(prefix + ".ln2.bias", 1, width);
        enc_layers_.push_back(layer);
    }

    for (int l = 0; l < config_.dec_layers; ++l) {
        const std::string prefix = "dec.l" + std::to_string(l);
        DecoderLayerParams layer;
        layer.self_att = make_heads(store, rng, prefix + ".self", config_.heads, config_.d_head());
        layer.ln1_gain = make_ln_gain(store, prefix + ".ln1.gain", width);
        layer.ln1_bias = &store.create(prefix + ".ln1.bias", 1, width);
        layer.cross_att = make_heads(store, rng, prefix + ".cross", config_.heads, config_.d_head());
        layer.ln2_gain = make_ln_gain(store, prefix + ".ln2.gain", width);
        layer.ln2_bias = &store.create(prefix + ".ln2.bias", 1, width);
        layer.ffn_w1 = &store.create(prefix + ".ffn.w1", width, config_.ffn_width);
        layer.ffn_w1->value = xavier_uniform(rng, width, config_.ffn_width);
        layer.ffn_b1 = &store.create(prefix + ".ffn.b1", 1, config_.ffn_width);
        layer.ffn_w2 = &store.create(prefix + ".ffn.w2", config_.ffn_width, width);
        layer.ffn_w2->value = xavier_uniform(rng, config_.ffn_width, width);
        layer.ffn_b2 = &store.create(prefix + ".ffn.b2", 1, width);
        layer.ln3_gain = make_ln_gain(store, prefix + ".ln3.gain", width);
        layer.ln3_bias = &store.create(prefix + ".ln3.bias", 1, width);
        dec_layers_.push_back(layer);
    }

    out_proj_ = &store.create("out_proj", width, v);
    out_proj_->value = xavier_uniform(rng, width, v);
    out_bias_ = &store.create("out_bias", 1, v);
}

DenseMatrix Transformer::embed(const std::vector<int>& tokens, bool target_side) const {
    const Parameter& table = target_side ? *tgt_embed_ : *src_embed_;
    const int t = static_cast<int>(tokens.size());
    DenseMatrix out(t, config_.width);
    const double scale = std::sqrt(static_cast<double>(config_.width));
    const DenseMatrix pe = sinusoid_encoding(t, config_.width);
    for (int i = 0; i < t; ++i) {
        const int idx = tokens[i];
        if (idx < 0 || idx >= config_.vocab_size)
            throw std::invalid_argument("embed: token index out of range");
        for (int j = 0; j < config_.width; ++j)
            out.at(i, j) = table.value.at(idx, j) * scale + pe.at(i, j);
    }
    return out;
}

int Transformer::embed_t(Tape& t, const std::vector<int>& tokens, bool target_side) const {
    Parameter& table = target_side ? *tgt_embed_ : *src_embed_;
    const int rows = op_embedding_rows(t, t.param(table), tokens);
    const int scaled = op_scale(t, rows, std::sqrt(static_cast<double>(config_.width)));
    return op_add(t, scaled, t.constant(sinusoid_encoding(static_cast<int>(tokens.size()),
                                                          config_.width)));
}

int encoder_layer_t(Tape& t, int x, const EncoderLayerParams& layer,
                    std::shared_ptr<const depmatrix::DepMatrix> p, const FusionSpec& fusion,
                    std::shared_ptr<const std::vector<std::uint8_t>> mask, double dropout,
                    AttnCapture* capture) {
    const int ctx = attention_block(t, x, x, layer.att, p, fusion, mask, dropout, capture);
    const int k = op_layer_norm_rows(t, op_add(t, x, ctx), t.param(*layer.ln1_gain),
                                     t.param(*layer.ln1_bias), Transformer::kLnEps);
    const int h = op_relu(t, op_add_rowvec(t, op_matmul(t, k, t.param(*layer.ffn_w1)),
                                           t.param(*layer.ffn_b1)));
    const int f = op_add_rowvec(t, op_matmul(t, h, t.param(*layer.ffn_w2)),
                                t.param(*layer.ffn_b2));
    return op_layer_norm_rows(t, op_add(t, k, f), t.param(*layer.ln2_gain),
                              t.param(*layer.ln2_bias), Transformer::kLnEps);
}

int Transformer::encode_t(Tape& t, const std::vector<int>& tokens,
                          std::shared_ptr<const depmatrix::DepMatrix> p, int valid_len,
                          std::vector<AttnCapture>* captures) const {
    const int n = static_cast<int>(tokens.size());
    if (n == 0) throw std::invalid_argument("encode: empty token sequence");
    if (n > config_.max_src_tokens) throw std::invalid_argument("encode: sequence exceeds max_src_tokens");
    if (p && p->n != n) throw std::invalid_argument("encode: dependency matrix side mismatch");
    if (valid_len < 1 || valid_len > n) throw std::invalid_argument("encode: bad valid length");

    std::shared_ptr<const std::vector<std::uint8_t>> mask;
    if (valid_len < n) mask = make_attention_mask(n, n, valid_len, false);

    int x = embed_t(t, tokens, false);
    for (const auto& layer : enc_layers_) {
        AttnCapture cap;
        x = encoder_layer_t(t, x, layer, p, config_.fusion, mask, config_.dropout,
                            captures ? &cap : nullptr);
        if (captures) captures->push_back(std::move(cap));
    }
    return x;
}

namespace {

int decoder_layer_t(Tape& t, int x, const DecoderLayerParams& layer, int memory,
                    std::shared_ptr<const std::vector<std::uint8_t>> self_mask,
                    std::shared_ptr<const std::vector<std::uint8_t>> cross_mask, double dropout) {
    const int sa = attention_block(t, x, x, layer.self_att, nullptr, FusionSpec::none(),
                                   self_mask, dropout);
    const int h1 = op_layer_norm_rows(t, op_add(t, x, sa), t.param(*layer.ln1_gain),
                                      t.param(*layer.ln1_bias), Transformer::kLnEps);
    const int ca = attention_block(t, h1, memory, layer.cross_att, nullptr, FusionSpec::none(),
                                   cross_mask, dropout);
    const int h2 = op_layer_norm_rows(t, op_add(t, h1, ca), t.param(*layer.ln2_gain),
                                      t.param(*layer.ln2_bias), Transformer::kLnEps);
    const int h = op_relu(t, op_add_rowvec(t, op_matmul(t, h2, t.param(*layer.ffn_w1)),
                                           t.param(*layer.ffn_b1)));
    const int f = op_add_rowvec(t, op_matmul(t, h, t.param(*layer.ffn_w2)),
                                t.param(*layer.ffn_b2));
    return op_layer_norm_rows(t, op_add(t, h2, f), t.param(*layer.ln3_gain),
                              t.param(*layer.ln3_bias), Transformer::kLnEps);
}

} // namespace

int Transformer::decode_t(Tape& t, const std::vector<int>& inputs, int memory, int memory_valid,
                          int valid_len) const {
    const int n = static_cast<int>(inputs.size());
    if (n == 0) throw std::invalid_argument("decode: empty input sequence");
    if (valid_len < 1 || valid_len > n) throw std::invalid_argument("decode: bad valid length");
    const int mem_len = t.value(memory).rows;
    if (memory_valid < 1 || memory_valid > mem_len)
        throw std::invalid_argument("decode: bad memory valid length");

    // causal mask always applies; it also hides padded query tail columns
    auto self_mask = make_attention_mask(n, n, valid_len, true);
    std::shared_ptr<const std::vector<std::uint8_t>> cross_mask;
    if (memory_valid < mem_len) cross_mask = make_attention_mask(n, mem_len, memory_valid, false);

    int x = embed_t(t, inputs, true);
    for (const auto& layer : dec_layers_)
        x = decoder_layer_t(t, x, layer, memory, self_mask, cross_mask, config_.dropout);
    return x;
}

int Transformer::logits_t(Tape& t, int decoder_out) const {
    return op_add_rowvec(t, op_matmul(t, decoder_out, t.param(*out_proj_)), t.param(*out_bias_));
}

int Transformer::loss_sum_t(Tape& t, const std::vector<int>& src,
                            std::shared_ptr<const depmatrix::DepMatrix> p, int src_valid,
                            const std::vector<int>& tgt, int tgt_valid, int* token_count) const {
    if (tgt.size() < 2 || tgt_valid < 2)
        throw std::invalid_argument("loss: target needs begin and end tokens");
    if (tgt[0] != Vocabulary::kBegin) throw std::invalid_argument("loss: target must start with begin");
    const int memory = encode_t(t, src, p, src_valid);
    std::vector<int> inputs(tgt.begin(), tgt.end() - 1);
    std::vector<int> labels(tgt.begin() + 1, tgt.end());
    // label positions at or beyond the valid target length are padding
    for (std::size_t i = static_cast<std::size_t>(tgt_valid) - 1; i < labels.size(); ++i)
        labels[i] = Vocabulary::kPad;
    const int dec = decode_t(t, inputs, memory, src_valid, std::max(1, tgt_valid - 1));
    const int logits = logits_t(t, dec);
    return op_cross_entropy_sum(t, logits, labels, Vocabulary::kPad, config_.label_smoothing,
                                token_count);
}

DenseMatrix Transformer::encode(const std::vector<int>& tokens,
                                std::shared_ptr<const depmatrix::DepMatrix> p,
                                std::vector<AttnCapture>* captures) const {
    Tape t;
    const int node = encode_t(t, tokens, p, static_cast<int>(tokens.size()), captures);
    return t.value(node);
}

std::vector<double> Transformer::decode_step(const std::vector<int>& prefix,
                                             const DenseMatrix& memory, int memory_valid) const {
    if (prefix.empty() || prefix[0] != Vocabulary::kBegin)
        throw std::invalid_argument("decode_step: prefix must start with the begin token");
    if (static_cast<int>(prefix.size()) > config_.max_gen)
        throw std::invalid_argument("decode_step: prefix longer than max_gen");
    Tape t;
    const int mem = t.constant(memory);
    const int dec = decode_t(t, prefix, mem, memory_valid, static_cast<int>(prefix.size()));
    const int logits = logits_t(t, dec);
    const int last = op_slice_rows(t, logits, static_cast<int>(prefix.size()) - 1,
                                   static_cast<int>(prefix.size()));
    return t.value(last).data;
}

namespace {

std::vector<double> log_softmax(const std::vector<double>& logits) {
    double best = logits[0];
    for (double v : logits) best = std::max(best, v);
    double z = 0.0;
    for (double v : logits) z += std::exp(v - best);
    const double logz = best + std::log(z);
    std::vector<double> out(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - logz;
    return out;
}

struct Hypothesis {
    std::vector<int> tokens; // starts with kBegin, excludes kEnd
    double logprob = 0.0;
    bool finished = false;
    double score(int emitted) const {
        return logprob / std::max(1, emitted); // length-normalized
    }
};

} // namespace

std::vector<int> Transformer::generate(const std::vector<int>& src,
                                       std::shared_ptr<const depmatrix::DepMatrix> p,
                                       int beam) const {
    if (beam < 1) throw std::invalid_argument("generate: beam must be >= 1");
    const DenseMatrix memory = encode(src, p);
    const int mem_valid = memory.rows;

    std::vector<Hypothesis> live = {{{Vocabulary::kBegin}, 0.0, false}};
    std::vector<Hypothesis> finished;

    for (int step = 0; step < config_.max_gen; ++step) {
        struct Candidate {
            std::size_t hyp;
            int token;
            double logprob;
        };
        std::vector<Candidate> candidates;
        for (std::size_t hi = 0; hi < live.size(); ++hi) {
            const Hypothesis& hyp = live[hi];
            const int emitted = static_cast<int>(hyp.tokens.size()) - 1;
            auto logits = decode_step(hyp.tokens, memory, mem_valid);
            // never emit padding or a second begin; hold back end until min_gen
            logits[Vocabulary::kPad] = -std::numeric_limits<double>::infinity();
            logits[Vocabulary::kBegin] = -std::numeric_limits<double>::infinity();
            if (emitted < config_.min_gen)
                logits[Vocabulary::kEnd] = -std::numeric_limits<double>::infinity();
            const auto lsm = log_softmax(logits);
            // keep only the beam best expansions of this hypothesis
            std::vector<int> order(lsm.size());
            for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
            const std::size_t keep = std::min<std::size_t>(beam, order.size());
            std::partial_sort(order.begin(), order.begin() + keep, order.end(),
                              [&](int a, int b) { return lsm[a] > lsm[b] || (lsm[a] == lsm[b] && a < b); });
            for (std::size_t r = 0; r < keep; ++r)
                candidates.push_back({hi, order[r], hyp.logprob + lsm[order[r]]});
        }
        std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
            if (a.logprob != b.logprob) return a.logprob > b.logprob;
            if (a.hyp != b.hyp) return a.hyp < b.hyp;
            return a.token < b.token;
        });

        std::vector<Hypothesis> next;
        for (const Candidate& c : candidates) {
            if (static_cast<int>(next.size()) >= beam && static_cast<int>(finished.size()) >= beam)
                break;
            Hypothesis h = live[c.hyp];
            h.logprob = c.logprob;
            if (c.token == Vocabulary::kEnd) {
                h.finished = true;
                if (static_cast<int>(finished.size()) < beam) finished.push_back(h);
            } else if (static_cast<int>(next.size()) < beam) {
                h.tokens.push_back(c.token);
                next.push_back(h);
            }
        }
        live = std::move(next);
        if (live.empty()) break;
    }
    // anything still alive is force-stopped at max_gen
    for (auto& h : live) finished.push_back(h);

    const Hypothesis* best = nullptr;
    double best_score = -std::numeric_limits<double>::infinity();
    for (const auto& h : finished) {
        const int emitted = static_cast<int>(h.tokens.size()) - 1;
        const double s = h.score(emitted);
        if (!best || s > best_score) {
            best = &h;
            best_score = s;
        }
    }
    if (!best) throw std::runtime_error("generate: no hypothesis produced");
    return {best->tokens.begin() + 1, best->tokens.end()};
}

} // namespace lgsum::model
