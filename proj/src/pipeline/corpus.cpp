#include <algorithm>
#include <cctype>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "lgsum/pipeline.hpp"

namespace lgsum::pipeline {

std::string lowercase_ascii(const std::string& s) {
    std::string out = s;
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

std::vector<std::string> whitespace_tokens(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (unsigned char c : s) {
        if (std::isspace(c)) {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += static_cast<char>(c);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

namespace {

std::vector<std::string> split_on(const std::string& s, const std::string& sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t hit = s.find(sep, start);
        if (hit == std::string::npos) {
            parts.push_back(s.substr(start));
            return parts;
        }
        parts.push_back(s.substr(start, hit - start));
        start = hit + sep.size();
    }
}

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

// parse tokens, flattened across sentences, lowercased
std::vector<std::string> parse_forms(const conllu::ParsedDocument& doc) {
    std::vector<std::string> out;
    for (const auto& sent : doc.sentences)
        for (const auto& tok : sent.tokens) out.push_back(lowercase_ascii(tok.surface));
    return out;
}

} // namespace

std::vector<CorpusExample> load_corpus(const std::string& data_path, const std::string& parse_path,
                                       const std::string& doc_sep) {
    std::ifstream data(data_path);
    if (!data) throw std::runtime_error("cannot open corpus file: " + data_path);
    auto parsed = conllu::parse_conllu_file(parse_path);

    std::vector<CorpusExample> examples;
    std::string line;
    int line_no = 0;
    std::size_t next_doc = 0;
    while (std::getline(data, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const std::size_t tab = line.find('\t');
        if (tab == std::string::npos)
            throw std::runtime_error("corpus record " + std::to_string(line_no) +
                                     ": missing tab-separated summary");
        CorpusExample ex;
        for (const auto& doc : split_on(line.substr(0, tab), doc_sep)) {
            const std::string text = trim(doc);
            if (!text.empty()) ex.documents.push_back(text);
        }
        ex.summary = trim(line.substr(tab + 1));
        if (ex.documents.empty())
            throw std::runtime_error("corpus record " + std::to_string(line_no) + ": no documents");

        for (std::size_t d = 0; d < ex.documents.size(); ++d) {
            if (next_doc >= parsed.documents.size())
                throw std::runtime_error("parse file has fewer documents than the corpus (record " +
                                         std::to_string(line_no) + ")");
            ex.parses.push_back(parsed.documents[next_doc++]);
        }

        // alignment on lowercased forms, first divergence reported
        for (std::size_t d = 0; d < ex.documents.size(); ++d) {
            const auto doc_tokens = whitespace_tokens(lowercase_ascii(ex.documents[d]));
            const auto forms = parse_forms(ex.parses[d]);
            const std::size_t upto = std::min(doc_tokens.size(), forms.size());
            for (std::size_t i = 0; i < upto; ++i)
                if (doc_tokens[i] != forms[i])
                    throw std::runtime_error(
                        "corpus record " + std::to_string(line_no) + ", document " +
                        std::to_string(d + 1) + ": token " + std::to_string(i + 1) +
                        " diverges from its parse ('" + doc_tokens[i] + "' vs '" + forms[i] + "')");
            if (doc_tokens.size() != forms.size())
                throw std::runtime_error("corpus record " + std::to_string(line_no) + ", document " +
                                         std::to_string(d + 1) + ": token " +
                                         std::to_string(upto + 1) + " diverges from its parse (" +
                                         std::to_string(doc_tokens.size()) + " corpus tokens vs " +
                                         std::to_string(forms.size()) + " parsed)");
        }
        examples.push_back(std::move(ex));
    }
    if (next_doc != parsed.documents.size())
        throw std::runtime_error("parse file has " + std::to_string(parsed.documents.size()) +
                                 " documents but the corpus consumed " + std::to_string(next_doc));
    return examples;
}

model::Vocabulary build_corpus_vocabulary(const std::vector<CorpusExample>& corpus, int min_freq) {
    std::vector<std::vector<std::string>> streams;
    for (const auto& ex : corpus) {
        for (const auto& doc : ex.documents)
            streams.push_back(whitespace_tokens(lowercase_ascii(doc)));
        streams.push_back(whitespace_tokens(lowercase_ascii(ex.summary)));
    }
    return model::Vocabulary::build(streams, min_freq);
}

Preprocessed preprocess(const CorpusExample& example, const model::Vocabulary& vocab,
                        const model::ModelConfig& config) {
    Preprocessed out;
    const std::string sep_surface = vocab.surface(model::Vocabulary::kDocSep);

    // source: documents joined by the separator token; a separator occupies a
    // sequence position with no parse, modeled as a one-token edge-free tree
    std::vector<std::string> src_tokens;
    std::vector<conllu::DependencyTree> trees;
    std::vector<int> doc_boundaries;
    for (std::size_t d = 0; d < example.documents.size(); ++d) {
        doc_boundaries.push_back(static_cast<int>(trees.size()));
        if (d > 0) {
            src_tokens.push_back(sep_surface);
            conllu::DependencyTree sep;
            sep.tokens.push_back({sep_surface, 0, "sep"});
            trees.push_back(sep);
        }
        const auto doc_tokens = whitespace_tokens(lowercase_ascii(example.documents[d]));
        src_tokens.insert(src_tokens.end(), doc_tokens.begin(), doc_tokens.end());
        if (d < example.parses.size())
            for (const auto& sent : example.parses[d].sentences) trees.push_back(sent);
    }
    if (src_tokens.empty()) throw std::runtime_error("preprocess: empty source");

    auto full = depmatrix::assemble_sequence_matrix(trees, doc_boundaries);
    if (full.n != static_cast<int>(src_tokens.size()))
        throw std::runtime_error("preprocess: parse token count disagrees with the source");

    const int keep = std::min<int>(static_cast<int>(src_tokens.size()), config.max_src_tokens);
    if (keep == 0) throw std::runtime_error("preprocess: empty source after truncation");
    src_tokens.resize(static_cast<std::size_t>(keep));

    auto dep = std::make_shared<depmatrix::DepMatrix>(keep);
    for (int i = 0; i < keep; ++i)
        for (int j = 0; j < keep; ++j) dep->set(i, j, full.at(i, j)); // leading block
    for (auto span : full.sentence_spans) {
        if (span.first >= keep) continue; // dangling sentence block dropped
        dep->sentence_spans.push_back({span.first, std::min(span.second, keep)});
    }
    for (auto span : full.doc_spans) {
        if (span.first >= keep) continue;
        dep->doc_spans.push_back({span.first, std::min(span.second, keep)});
    }
    out.dep = std::move(dep);
    out.src = vocab.encode(src_tokens);

    // target: delimiter before and after each sentence, then begin/end framing
    const auto summary_tokens = whitespace_tokens(lowercase_ascii(example.summary));
    std::vector<std::vector<std::string>> sentences;
    std::vector<std::string> current;
    for (const auto& tok : summary_tokens) {
        current.push_back(tok);
        if (tok == "." || tok == "!" || tok == "?") {
            sentences.push_back(current);
            current.clear();
        }
    }
    if (!current.empty()) sentences.push_back(current);

    std::vector<int> wrapped;
    for (const auto& sent : sentences) {
        wrapped.push_back(model::Vocabulary::kSentDelim);
        for (const auto& tok : sent) wrapped.push_back(vocab.lookup(tok));
        wrapped.push_back(model::Vocabulary::kSentDelim);
    }
    if (static_cast<int>(wrapped.size()) > config.max_tgt_tokens)
        wrapped.resize(static_cast<std::size_t>(config.max_tgt_tokens));
    out.tgt.push_back(model::Vocabulary::kBegin);
    out.tgt.insert(out.tgt.end(), wrapped.begin(), wrapped.end());
    out.tgt.push_back(model::Vocabulary::kEnd);
    return out;
}

std::vector<Batch> make_batches(const std::vector<Preprocessed>& examples, int batch_tokens,
                                std::uint64_t seed) {
    for (std::size_t i = 0; i < examples.size(); ++i) {
        const int cost = static_cast<int>(examples[i].src.size() + examples[i].tgt.size());
        if (cost > batch_tokens)
            throw std::runtime_error("example " + std::to_string(i) + " needs " +
                                     std::to_string(cost) + " tokens, over the batch budget of " +
                                     std::to_string(batch_tokens));
    }
    std::vector<int> order(examples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<Batch> batches;
    std::size_t at = 0;
    while (at < order.size()) {
        Batch b;
        int budget = 0;
        std::size_t take = at;
        while (take < order.size()) {
            const auto& ex = examples[order[take]];
            const int cost = static_cast<int>(ex.src.size() + ex.tgt.size());
            if (budget + cost > batch_tokens) break;
            budget += cost;
            b.example_ids.push_back(order[take]);
            ++take;
        }
        at = take;

        int max_src = 0, max_tgt = 0;
        for (int id : b.example_ids) {
            max_src = std::max(max_src, static_cast<int>(examples[id].src.size()));
            max_tgt = std::max(max_tgt, static_cast<int>(examples[id].tgt.size()));
        }
        for (int id : b.example_ids) {
            const auto& ex = examples[id];
            std::vector<int> src = ex.src;
            std::vector<int> tgt = ex.tgt;
            b.src_valid.push_back(static_cast<int>(src.size()));
            b.tgt_valid.push_back(static_cast<int>(tgt.size()));
            src.resize(static_cast<std::size_t>(max_src), model::Vocabulary::kPad);
            tgt.resize(static_cast<std::size_t>(max_tgt), model::Vocabulary::kPad);
            b.src.push_back(std::move(src));
            b.tgt.push_back(std::move(tgt));
            if (ex.dep->n == max_src) {
                b.dep.push_back(ex.dep);
            } else {
                auto padded = std::make_shared<depmatrix::DepMatrix>(max_src);
                for (int i = 0; i < ex.dep->n; ++i)
                    for (int j = 0; j < ex.dep->n; ++j) padded->set(i, j, ex.dep->at(i, j));
                padded->sentence_spans = ex.dep->sentence_spans;
                padded->doc_spans = ex.dep->doc_spans;
                b.dep.push_back(std::move(padded));
            }
        }
        batches.push_back(std::move(b));
    }
    return batches;
}

} // namespace lgsum::pipeline
