#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <stdexcept>

#include "lgsum/pipeline.hpp"

namespace lgsum::pipeline {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t x = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
}

std::string join_ids(const std::vector<int>& ids) {
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(ids[i]);
    }
    return out;
}

} // namespace

TrainResult train(const std::vector<CorpusExample>& corpus, model::ModelConfig mc,
                  const TrainConfig& tc, const std::string& out_dir,
                  const model::Vocabulary* vocab_in) {
    if (corpus.empty()) throw std::invalid_argument("train: empty corpus");
    if (tc.accum_steps < 1) throw std::invalid_argument("train: accum_steps must be >= 1");

    model::Vocabulary vocab =
        vocab_in ? *vocab_in : build_corpus_vocabulary(corpus, tc.vocab_min_freq);
    mc.vocab_size = vocab.size();
    model::Transformer net(mc, vocab, tc.seed);

    std::vector<Preprocessed> prepared;
    for (const auto& ex : corpus) prepared.push_back(preprocess(ex, net.vocab(), net.config()));

    numerics::AdamState adam;
    adam.beta1 = 0.9;
    adam.beta2 = 0.998;
    std::mt19937_64 dropout_rng(mix_seed(tc.seed, 0x0d0d));

    std::vector<StepMetric> metrics;
    net.params().zero_grads();
    long step = 0;
    int micro = 0;
    double window_loss = 0.0;
    long window_tokens = 0;
    std::vector<int> window_batch_ids;

    auto interval_path = [&](long s) {
        return out_dir + "/checkpoint_step" + std::to_string(s) + ".bin";
    };

    for (long epoch = 0; step < tc.max_steps; ++epoch) {
        const auto batches = make_batches(prepared, tc.batch_tokens, mix_seed(tc.seed, epoch));
        for (const auto& batch : batches) {
            try {
                for (std::size_t e = 0; e < batch.example_ids.size(); ++e) {
                    numerics::Tape tape;
                    tape.training = true;
                    tape.rng = &dropout_rng;
                    int tokens = 0;
                    const int loss = net.loss_sum_t(tape, batch.src[e], batch.dep[e],
                                                    batch.src_valid[e], batch.tgt[e],
                                                    batch.tgt_valid[e], &tokens);
                    const double value = tape.value(loss).at(0, 0);
                    if (!std::isfinite(value)) throw std::runtime_error("non-finite loss");
                    window_loss += value;
                    window_tokens += tokens;
                    tape.backward(loss);
                }
            } catch (const std::exception& e) {
                throw std::runtime_error("training aborted at step " + std::to_string(step + 1) +
                                         " (examples " + join_ids(batch.example_ids) +
                                         "): " + e.what());
            }
            window_batch_ids.insert(window_batch_ids.end(), batch.example_ids.begin(),
                                    batch.example_ids.end());
            ++micro;
            if (micro < tc.accum_steps) continue;

            const double mean_loss = window_loss / static_cast<double>(window_tokens);
            if (!std::isfinite(mean_loss))
                throw std::runtime_error("non-finite loss at step " + std::to_string(step + 1) +
                                         " (examples " + join_ids(window_batch_ids) + ")");
            net.params().scale_grads(1.0 / static_cast<double>(window_tokens));
            const double lr = numerics::lr_at_step(tc.schedule, step + 1);
            numerics::adam_step(net.params(), adam, lr);
            ++step;
            metrics.push_back({step, lr, mean_loss});
            net.params().zero_grads();
            micro = 0;
            window_loss = 0.0;
            window_tokens = 0;
            window_batch_ids.clear();
            if (!out_dir.empty() && tc.checkpoint_interval > 0 && step % tc.checkpoint_interval == 0)
                model::save_checkpoint(net, interval_path(step));
            if (step >= tc.max_steps) break;
        }
    }

    if (!out_dir.empty()) {
        model::save_checkpoint(net, out_dir + "/checkpoint.bin");
        write_metrics(out_dir + "/metrics.tsv", metrics);
    }
    return {std::move(net), std::move(metrics)};
}

void write_metrics(const std::string& path, const std::vector<StepMetric>& metrics) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write metrics file: " + path);
    char buf[96];
    for (const auto& m : metrics) {
        std::snprintf(buf, sizeof buf, "%ld\t%.17g\t%.17g\n", m.step, m.lr, m.loss);
        out << buf;
    }
}

EvalResult evaluate(const model::Transformer& net, const std::vector<CorpusExample>& corpus,
                    int beam) {
    if (corpus.empty()) throw std::invalid_argument("evaluate: empty corpus");
    EvalResult result;
    std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> pairs;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto pre = preprocess(corpus[i], net.vocab(), net.config());
        const auto generated = net.generate(pre.src, pre.dep, beam);
        std::string text;
        for (int tok : generated) {
            if (net.vocab().is_reserved(tok)) continue; // delimiters are framing, not content
            if (!text.empty()) text += ' ';
            text += net.vocab().surface(tok);
        }
        EvalRow row;
        row.example_id = static_cast<int>(i);
        row.generated = rouge::tokenize_for_scoring(text);
        const auto reference = rouge::tokenize_for_scoring(corpus[i].summary);
        row.scores = rouge::score_pair(row.generated, reference);
        pairs.push_back({row.generated, reference});
        result.rows.push_back(std::move(row));
    }
    result.mean = rouge::corpus_rouge(pairs);
    return result;
}

namespace {

void write_score_cells(std::ofstream& out, const rouge::CorpusRouge& s) {
    char buf[200];
    std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f",
                  s.rouge1.precision, s.rouge1.recall, s.rouge1.f1, s.rouge2.precision,
                  s.rouge2.recall, s.rouge2.f1, s.rougeL.precision, s.rougeL.recall, s.rougeL.f1);
    out << buf;
}

} // namespace

void write_eval_csv(const std::string& path, const EvalResult& result) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write evaluation csv: " + path);
    out << "example,rouge1_p,rouge1_r,rouge1_f,rouge2_p,rouge2_r,rouge2_f,"
           "rougeL_p,rougeL_r,rougeL_f\n";
    for (const auto& row : result.rows) {
        out << row.example_id << ',';
        write_score_cells(out, row.scores);
        out << '\n';
    }
    out << "mean,";
    write_score_cells(out, result.mean);
    out << '\n';
}

std::vector<SweepRow> alpha_sweep(const std::vector<CorpusExample>& corpus,
                                  const model::ModelConfig& mc, const TrainConfig& tc,
                                  const std::vector<double>& alphas, const std::string& out_dir) {
    if (alphas.empty()) throw std::invalid_argument("alpha_sweep: no alphas given");
    std::vector<SweepRow> rows;
    for (double alpha : alphas) {
        model::ModelConfig cfg = mc;
        cfg.fusion = attention::FusionSpec::soft(alpha);
        const auto trained = train(corpus, cfg, tc);
        const auto eval = evaluate(trained.model, corpus, tc.beam);
        char label[40];
        std::snprintf(label, sizeof label, "%g", alpha);
        rows.push_back({label, alpha, eval.mean});
    }
    if (!out_dir.empty()) write_sweep_csv(out_dir + "/alpha_sweep.csv", "alpha", rows);
    return rows;
}

std::vector<attention::FusionSpec> default_fusion_grid() {
    return {attention::FusionSpec::direct(0.25), attention::FusionSpec::gaussian(0.25),
            attention::FusionSpec::gaussian(8.0), attention::FusionSpec::soft(3.0)};
}

std::vector<SweepRow> fusion_compare(const std::vector<CorpusExample>& corpus,
                                     const model::ModelConfig& mc, const TrainConfig& tc,
                                     const std::vector<attention::FusionSpec>& specs,
                                     const std::string& out_dir) {
    if (specs.empty()) throw std::invalid_argument("fusion_compare: no configurations given");
    std::vector<SweepRow> rows;
    for (const auto& spec : specs) {
        model::ModelConfig cfg = mc;
        cfg.fusion = spec;
        const auto trained = train(corpus, cfg, tc);
        const auto eval = evaluate(trained.model, corpus, tc.beam);
        char label[64];
        std::snprintf(label, sizeof label, "%s-%g", attention::fusion_mode_name(spec.mode),
                      spec.weight);
        rows.push_back({label, spec.weight, eval.mean});
    }
    if (!out_dir.empty()) write_sweep_csv(out_dir + "/fusion_compare.csv", "fusion", rows);
    return rows;
}

void write_sweep_csv(const std::string& path, const std::string& key_column,
                     const std::vector<SweepRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write sweep csv: " + path);
    out << key_column << ",rouge1_f,rouge2_f,rougeL_f\n";
    char buf[120];
    for (const auto& row : rows) {
        std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f,%.6f\n", row.label.c_str(), row.mean.rouge1.f1,
                      row.mean.rouge2.f1, row.mean.rougeL.f1);
        out << buf;
    }
}

} // namespace lgsum::pipeline
