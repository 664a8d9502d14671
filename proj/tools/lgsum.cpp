// Command-line front end: training, generation, evaluation, the fusion
// experiment drivers, and attention/dependency-matrix export.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "lgsum/pipeline.hpp"

namespace {

using namespace lgsum;

struct SharedArgs {
    std::string data, parses, out, config_path, vocab_path;
    std::uint64_t seed = 1;
    std::string fusion_mode;
    double alpha = -1.0;
    double fusion_weight = -1.0;
    bool renormalize = false;
    bool identity_literal = false;
    int beam = 0;
    int min_gen = 0;
    int max_gen = 0;
};

void add_shared(CLI::App* cmd, SharedArgs& a, bool needs_parses = true) {
    cmd->add_option("--data", a.data, "corpus file (documents ||||| -separated, tab, summary)");
    if (needs_parses) cmd->add_option("--parses", a.parses, "CoNLL-U parse file aligned with --data");
    cmd->add_option("--out", a.out, "output path or directory");
    cmd->add_option("--seed", a.seed, "RNG seed");
    cmd->add_option("--config", a.config_path, "key = value configuration file");
    cmd->add_option("--vocab", a.vocab_path, "vocabulary file (otherwise built from --data)");
    cmd->add_option("--fusion-mode", a.fusion_mode, "none|soft|direct|gaussian");
    cmd->add_option("--alpha", a.alpha, "soft fusion trade-off weight");
    cmd->add_option("--fusion-weight", a.fusion_weight, "direct/gaussian fusion weight");
    cmd->add_flag("--renormalize", a.renormalize, "rescale attention rows to sum 1 after fusion");
    cmd->add_flag("--identity-literal", a.identity_literal,
                  "use diagonal ones instead of the all-ones soft term");
    cmd->add_option("--beam", a.beam, "beam width (1 = greedy)");
    cmd->add_option("--min-gen", a.min_gen, "minimum generated tokens");
    cmd->add_option("--max-gen", a.max_gen, "maximum generated tokens");
}

pipeline::RunConfig resolve_config(const SharedArgs& a) {
    pipeline::RunConfig rc;
    if (!a.config_path.empty()) rc = pipeline::load_config_file(a.config_path, rc);
    rc.train.seed = a.seed;
    if (!a.fusion_mode.empty())
        rc.model.fusion.mode = attention::fusion_mode_from_name(a.fusion_mode);
    if (a.alpha >= 0.0) {
        if (a.fusion_mode.empty()) rc.model.fusion.mode = attention::FusionMode::Soft;
        rc.model.fusion.weight = a.alpha;
    }
    if (a.fusion_weight >= 0.0) rc.model.fusion.weight = a.fusion_weight;
    if (a.renormalize) rc.model.fusion.renormalize = true;
    if (a.identity_literal) rc.model.fusion.identity_literal = true;
    if (a.beam > 0) rc.train.beam = a.beam;
    if (a.min_gen > 0) rc.model.min_gen = a.min_gen;
    if (a.max_gen > 0) rc.model.max_gen = a.max_gen;
    return rc;
}

std::vector<pipeline::CorpusExample> load_examples(const SharedArgs& a) {
    if (a.data.empty()) throw std::runtime_error("--data is required");
    if (a.parses.empty()) throw std::runtime_error("--parses is required");
    return pipeline::load_corpus(a.data, a.parses);
}

void require_out(const SharedArgs& a) {
    if (a.out.empty()) throw std::runtime_error("--out is required");
}

std::vector<double> parse_alpha_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dependency-guided abstractive multi-document summarizer"};
    app.require_subcommand(1);

    SharedArgs a;
    int min_freq = 1;
    std::string ckpt, alphas_csv = "0,1,2,3", stage = "fused", head_arg = "mean";
    int example_id = 0, layer = 0;

    auto* build_vocab = app.add_subcommand("build-vocab", "build a vocabulary from the corpus");
    add_shared(build_vocab, a);
    build_vocab->add_option("--min-freq", min_freq, "frequency cutoff");

    auto* build_depmat =
        app.add_subcommand("build-depmat", "assemble a dependency matrix from a CoNLL-U file");
    add_shared(build_depmat, a);

    auto* train = app.add_subcommand("train", "train a model");
    add_shared(train, a);

    auto* generate = app.add_subcommand("generate", "generate summaries with a checkpoint");
    add_shared(generate, a);
    generate->add_option("--ckpt", ckpt, "checkpoint file")->required();

    auto* evaluate = app.add_subcommand("evaluate", "generate and score with a checkpoint");
    add_shared(evaluate, a);
    evaluate->add_option("--ckpt", ckpt, "checkpoint file")->required();

    auto* alpha_sweep = app.add_subcommand("alpha-sweep", "train and score one model per alpha");
    add_shared(alpha_sweep, a);
    alpha_sweep->add_option("--alphas", alphas_csv, "comma-separated alpha values");

    auto* fusion_compare =
        app.add_subcommand("fusion-compare", "train and score the fusion-method grid");
    add_shared(fusion_compare, a);

    auto* export_attn = app.add_subcommand("export-attn", "export attention maps and P");
    add_shared(export_attn, a);
    export_attn->add_option("--ckpt", ckpt, "checkpoint file")->required();
    export_attn->add_option("--example", example_id, "corpus example index");
    export_attn->add_option("--layer", layer, "encoder layer index");
    export_attn->add_option("--head", head_arg, "head index or 'mean'");
    export_attn->add_option("--stage", stage, "base or fused");

    CLI11_PARSE(app, argc, argv);

    try {
        if (build_vocab->parsed()) {
            require_out(a);
            const auto corpus = load_examples(a);
            pipeline::build_corpus_vocabulary(corpus, min_freq).save(a.out);
            std::cout << "vocabulary written to " << a.out << "\n";
        } else if (build_depmat->parsed()) {
            require_out(a);
            if (a.parses.empty()) throw std::runtime_error("--parses is required");
            const auto parsed = conllu::parse_conllu_file(a.parses);
            std::vector<conllu::DependencyTree> trees;
            std::vector<int> bounds;
            for (const auto& doc : parsed.documents) {
                bounds.push_back(static_cast<int>(trees.size()));
                for (const auto& sent : doc.sentences) trees.push_back(sent);
            }
            depmatrix::save_matrix(depmatrix::assemble_sequence_matrix(trees, bounds), a.out);
            std::cout << "dependency matrix written to " << a.out << "\n";
        } else if (train->parsed()) {
            require_out(a);
            const auto corpus = load_examples(a);
            auto rc = resolve_config(a);
            std::filesystem::create_directories(a.out);
            std::unique_ptr<model::Vocabulary> vocab;
            if (!a.vocab_path.empty())
                vocab = std::make_unique<model::Vocabulary>(model::Vocabulary::load(a.vocab_path));
            const auto result =
                pipeline::train(corpus, rc.model, rc.train, a.out, vocab.get());
            std::cout << "trained " << result.metrics.size() << " steps; final loss "
                      << (result.metrics.empty() ? 0.0 : result.metrics.back().loss) << "\n";
        } else if (generate->parsed()) {
            require_out(a);
            const auto corpus = load_examples(a);
            auto rc = resolve_config(a);
            auto net = model::load_checkpoint(ckpt);
            std::ofstream out(a.out);
            if (!out) throw std::runtime_error("cannot write " + a.out);
            for (const auto& ex : corpus) {
                const auto pre = pipeline::preprocess(ex, net.vocab(), net.config());
                const auto tokens = net.generate(pre.src, pre.dep, std::max(1, rc.train.beam));
                std::string text;
                for (int tok : tokens) {
                    if (net.vocab().is_reserved(tok)) continue;
                    if (!text.empty()) text += ' ';
                    text += net.vocab().surface(tok);
                }
                out << text << "\n";
            }
            std::cout << "summaries written to " << a.out << "\n";
        } else if (evaluate->parsed()) {
            require_out(a);
            const auto corpus = load_examples(a);
            auto rc = resolve_config(a);
            auto net = model::load_checkpoint(ckpt);
            const auto result = pipeline::evaluate(net, corpus, std::max(1, rc.train.beam));
            pipeline::write_eval_csv(a.out, result);
            std::cout << "rouge1_f " << result.mean.rouge1.f1 << " rouge2_f "
                      << result.mean.rouge2.f1 << " rougeL_f " << result.mean.rougeL.f1 << "\n";
        } else if (alpha_sweep->parsed()) {
            require_out(a);
            const auto corpus = load_examples(a);
            auto rc = resolve_config(a);
            const auto rows =
                pipeline::alpha_sweep(corpus, rc.model, rc.train, parse_alpha_list(alphas_csv));
            pipeline::write_sweep_csv(a.out, "alpha", rows);
            std::cout << "sweep table written to " << a.out << "\n";
        } else if (fusion_compare->parsed()) {
            require_out(a);
            const auto corpus = load_examples(a);
            auto rc = resolve_config(a);
            const auto rows = pipeline::fusion_compare(corpus, rc.model, rc.train,
                                                       pipeline::default_fusion_grid());
            pipeline::write_sweep_csv(a.out, "fusion", rows);
            std::cout << "comparison table written to " << a.out << "\n";
        } else if (export_attn->parsed()) {
            require_out(a);
            const auto corpus = load_examples(a);
            if (example_id < 0 || example_id >= static_cast<int>(corpus.size()))
                throw std::runtime_error("--example out of range");
            auto net = model::load_checkpoint(ckpt);
            const int head = head_arg == "mean" ? -1 : std::stoi(head_arg);
            pipeline::export_attention_map(net, corpus[static_cast<std::size_t>(example_id)],
                                           layer, head, stage, a.out);
            std::cout << "attention export written to " << a.out << ".att.csv/.att.pgm/.dep.csv\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
