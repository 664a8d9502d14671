#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <tuple>
#include <vector>

#include "lgsum/conllu.hpp"
#include "lgsum/depmatrix.hpp"
#include "lgsum/model.hpp"
#include "lgsum/optim.hpp"
#include "lgsum/rouge.hpp"

namespace lgsum::pipeline {

// One multi-document example: raw texts, a reference summary, and the
// pre-parsed trees aligned one-to-one with the documents.
struct CorpusExample {
    std::vector<std::string> documents;
    std::string summary;
    std::vector<conllu::ParsedDocument> parses;
};

// Data format: one record per line, documents joined by the document
// separator, then a tab and the summary. Parses come from a CoNLL-U file
// whose '# newdoc' sections line up with the documents in record order.
// Token alignment against the parses is checked on lowercased forms.
std::vector<CorpusExample> load_corpus(const std::string& data_path,
                                       const std::string& parse_path,
                                       const std::string& doc_sep = "|||||");

struct TrainConfig {
    int batch_tokens = 2000; // desk-scale default; use ~13000 for full-size corpora
    int accum_steps = 4;
    long max_steps = 300;
    std::uint64_t seed = 1;
    numerics::LrSchedule schedule;
    long checkpoint_interval = 0; // optimizer steps between checkpoints, 0 = final only
    int vocab_min_freq = 1;
    int beam = 1;
};

struct Preprocessed {
    std::vector<int> src; // documents joined with the separator token
    std::vector<int> tgt; // begin + delimiter-wrapped sentences + end
    std::shared_ptr<depmatrix::DepMatrix> dep;
};

std::string lowercase_ascii(const std::string& s);
std::vector<std::string> whitespace_tokens(const std::string& s);

// Lowercases, concatenates documents with separator tokens, truncates the
// source (and the dependency matrix with it), wraps each target sentence in
// delimiters, truncates the target.
Preprocessed preprocess(const CorpusExample& example, const model::Vocabulary& vocab,
                        const model::ModelConfig& config);

struct Batch {
    std::vector<int> example_ids;
    std::vector<std::vector<int>> src, tgt; // padded to batch-max lengths
    std::vector<int> src_valid, tgt_valid;
    std::vector<std::shared_ptr<depmatrix::DepMatrix>> dep; // zero-padded
};

// Seeded shuffle, then greedy packing with sum(src+tgt) <= batch_tokens.
std::vector<Batch> make_batches(const std::vector<Preprocessed>& examples, int batch_tokens,
                                std::uint64_t seed);

struct StepMetric {
    long step;
    double lr;
    double loss; // window token losses / window tokens
};

struct TrainResult {
    model::Transformer model;
    std::vector<StepMetric> metrics;
};

// Full training loop: per-microbatch backward accumulation, one optimizer
// step every accum_steps microbatches, token-normalized loss. Deterministic
// for a fixed config and seed. If out_dir is non-empty, writes metrics.tsv,
// checkpoint.bin and interval checkpoints there.
TrainResult train(const std::vector<CorpusExample>& corpus, model::ModelConfig mc,
                  const TrainConfig& tc, const std::string& out_dir = "",
                  const model::Vocabulary* vocab = nullptr);

model::Vocabulary build_corpus_vocabulary(const std::vector<CorpusExample>& corpus,
                                          int min_freq = 1);

void write_metrics(const std::string& path, const std::vector<StepMetric>& metrics);

struct EvalRow {
    int example_id;
    rouge::CorpusRouge scores;
    std::vector<std::string> generated; // scoring tokens of the generated summary
};

struct EvalResult {
    std::vector<EvalRow> rows;
    rouge::CorpusRouge mean;
};

EvalResult evaluate(const model::Transformer& model, const std::vector<CorpusExample>& corpus,
                    int beam);
void write_eval_csv(const std::string& path, const EvalResult& result);

struct SweepRow {
    std::string label;
    double weight;
    rouge::CorpusRouge mean;
};

// One trained model per alpha, identical seed and data order; weight 0 is the
// plain-attention baseline.
std::vector<SweepRow> alpha_sweep(const std::vector<CorpusExample>& corpus,
                                  const model::ModelConfig& mc, const TrainConfig& tc,
                                  const std::vector<double>& alphas,
                                  const std::string& out_dir = "");

// One row per fusion configuration, trained identically.
std::vector<SweepRow> fusion_compare(const std::vector<CorpusExample>& corpus,
                                     const model::ModelConfig& mc, const TrainConfig& tc,
                                     const std::vector<attention::FusionSpec>& specs,
                                     const std::string& out_dir = "");

// direct 0.25, gaussian 0.25, gaussian 8, soft 3
std::vector<attention::FusionSpec> default_fusion_grid();

void write_sweep_csv(const std::string& path, const std::string& key_column,
                     const std::vector<SweepRow>& rows);

// Attention-map export: writes <out_prefix>.att.csv (the selected matrix),
// <out_prefix>.att.pgm (min-max grayscale), <out_prefix>.dep.csv (P).
// head = -1 selects the mean over heads; stage is "base" or "fused".
void export_attention_map(const model::Transformer& model, const CorpusExample& example,
                          int layer, int head, const std::string& stage,
                          const std::string& out_prefix);

void write_matrix_csv(const std::string& path, const numerics::DenseMatrix& m);
numerics::DenseMatrix read_matrix_csv(const std::string& path);
void write_pgm(const std::string& path, const numerics::DenseMatrix& m);

// ---- key=value run configuration ----

struct RunConfig {
    model::ModelConfig model;
    TrainConfig train;
};

// Lines of "key = value"; '#' starts a comment. Unknown keys are errors.
RunConfig load_config_file(const std::string& path, RunConfig base);
void apply_config_entry(RunConfig& rc, const std::string& key, const std::string& value);

} // namespace lgsum::pipeline
