#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "lgsum/attention.hpp"
#include "lgsum/depmatrix.hpp"
#include "lgsum/tape.hpp"

namespace lgsum::model {

using attention::AttnCapture;
using attention::FusionSpec;
using numerics::DenseMatrix;
using numerics::Parameter;
using numerics::ParameterStore;
using numerics::Tape;

// Token <-> index bijection with fixed reserved slots at the front.
class Vocabulary {
public:
    static constexpr int kPad = 0;
    static constexpr int kUnk = 1;
    static constexpr int kBegin = 2;
    static constexpr int kEnd = 3;
    static constexpr int kSentDelim = 4;
    static constexpr int kDocSep = 5;
    static constexpr int kReservedCount = 6;

    Vocabulary() = default;

    // Frequency-sorted vocabulary over the given token streams; ties break
    // lexicographically so builds are deterministic. The sentence-delimiter
    // and document-separator surfaces are configurable.
    static Vocabulary build(const std::vector<std::vector<std::string>>& token_streams,
                            int min_freq = 1, const std::string& sent_delim = "<sent>",
                            const std::string& doc_sep = "|||||");

    // Rebuilds a vocabulary from its exact index-ordered token list
    // (reserved tokens first), as stored in vocab files and checkpoints.
    static Vocabulary from_tokens(const std::vector<std::string>& tokens);

    int size() const { return static_cast<int>(tokens_.size()); }
    int lookup(const std::string& token) const; // kUnk when absent
    const std::string& surface(int index) const;
    bool is_reserved(int index) const { return index >= 0 && index < kReservedCount; }
    std::vector<int> encode(const std::vector<std::string>& tokens) const;

    std::uint64_t content_hash() const;
    void save(const std::string& path) const;
    static Vocabulary load(const std::string& path);
    const std::vector<std::string>& all_tokens() const { return tokens_; }

private:
    void add(const std::string& token);
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int> index_;
};

struct ModelConfig {
    int vocab_size = 0; // filled in from the vocabulary
    int width = 64;
    int heads = 8;
    int enc_layers = 4;
    int dec_layers = 4;
    int ffn_width = 256;
    double dropout = 0.1;
    FusionSpec fusion;
    int max_src_tokens = 400;
    int max_tgt_tokens = 400;
    int min_gen = 20;
    int max_gen = 250;
    double label_smoothing = 0.0;

    int d_head() const { return width / heads; }
    void validate() const;
};

// Interleaved sin/cos positional codes; row 0 is [0, 1, 0, 1, ...].
DenseMatrix sinusoid_encoding(int positions, int width);

struct EncoderLayerParams {
    attention::HeadParams att;
    Parameter *ln1_gain, *ln1_bias;
    Parameter *ffn_w1, *ffn_b1, *ffn_w2, *ffn_b2;
    Parameter *ln2_gain, *ln2_bias;
};

struct DecoderLayerParams {
    attention::HeadParams self_att;
    Parameter *ln1_gain, *ln1_bias;
    attention::HeadParams cross_att;
    Parameter *ln2_gain, *ln2_bias;
    Parameter *ffn_w1, *ffn_b1, *ffn_w2, *ffn_b2;
    Parameter *ln3_gain, *ln3_bias;
};

// One guided encoder layer, post-norm residual order:
//   k = LayerNorm(x + Context);  out = LayerNorm(k + FFN(k))
int encoder_layer_t(Tape& t, int x, const EncoderLayerParams& layer,
                    std::shared_ptr<const depmatrix::DepMatrix> p, const FusionSpec& fusion,
                    std::shared_ptr<const std::vector<std::uint8_t>> mask, double dropout,
                    AttnCapture* capture = nullptr);

// Flat encoder-decoder. The dependency matrix steers encoder self-attention
// only; the decoder is a plain masked-self + cross-attention stack.
class Transformer {
public:
    Transformer(ModelConfig config, Vocabulary vocab, std::uint64_t init_seed);
    Transformer(Transformer&&) = default;
    Transformer& operator=(Transformer&&) = default;

    const ModelConfig& config() const { return config_; }
    const Vocabulary& vocab() const { return vocab_; }
    ParameterStore& params() { return *params_; }
    const ParameterStore& params() const { return *params_; }
    static constexpr double kLnEps = 1e-5;

    // learned embedding * sqrt(width) + positional code (plain, eval path)
    DenseMatrix embed(const std::vector<int>& tokens, bool target_side = false) const;

    // ---- tape forwards (training path) ----
    int embed_t(Tape& t, const std::vector<int>& tokens, bool target_side) const;
    int encode_t(Tape& t, const std::vector<int>& tokens,
                 std::shared_ptr<const depmatrix::DepMatrix> p, int valid_len,
                 std::vector<AttnCapture>* captures = nullptr) const;
    int decode_t(Tape& t, const std::vector<int>& inputs, int memory, int memory_valid,
                 int valid_len) const;
    int logits_t(Tape& t, int decoder_out) const;

    // Sum of non-pad target token losses for one (src, tgt) pair; tgt must
    // start with kBegin and end with kEnd. token_count receives the number
    // of scored positions.
    int loss_sum_t(Tape& t, const std::vector<int>& src,
                   std::shared_ptr<const depmatrix::DepMatrix> p, int src_valid,
                   const std::vector<int>& tgt, int tgt_valid, int* token_count) const;

    // ---- evaluation-mode forwards ----
    DenseMatrix encode(const std::vector<int>& tokens,
                       std::shared_ptr<const depmatrix::DepMatrix> p,
                       std::vector<AttnCapture>* captures = nullptr) const;

    // Next-token logits after the given prefix (which must start with kBegin).
    std::vector<double> decode_step(const std::vector<int>& prefix, const DenseMatrix& memory,
                                    int memory_valid) const;

    // Constrained generation: the end token is masked out until min_gen
    // tokens are emitted; generation is cut at max_gen; beam = 1 is greedy
    // argmax. Returned tokens exclude begin/end.
    std::vector<int> generate(const std::vector<int>& src,
                              std::shared_ptr<const depmatrix::DepMatrix> p, int beam) const;

    const std::vector<EncoderLayerParams>& encoder_layers() const { return enc_layers_; }

    // Training-mode RNG hookup: loss_sum_t on a tape with training=true uses
    // the tape's rng for dropout.

private:
    ModelConfig config_;
    Vocabulary vocab_;
    std::unique_ptr<ParameterStore> params_;
    Parameter* src_embed_ = nullptr;
    Parameter* tgt_embed_ = nullptr;
    std::vector<EncoderLayerParams> enc_layers_;
    std::vector<DecoderLayerParams> dec_layers_;
    Parameter* out_proj_ = nullptr;
    Parameter* out_bias_ = nullptr;

    void build_parameters(std::uint64_t init_seed);
};

// Versioned checkpoint: text header (config + vocabulary + FNV-1a hash),
// then named parameter arrays as explicit little-endian 64-bit floats.
void save_checkpoint(const Transformer& model, const std::string& path);
Transformer load_checkpoint(const std::string& path);

std::uint64_t fnv1a64(const std::string& bytes);

} // namespace lgsum::model
