#include "lgsum/conllu.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace lgsum::conllu {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> cols;
    std::size_t start = 0;
    while (true) {
        const std::size_t tab = line.find('\t', start);
        if (tab == std::string::npos) {
            cols.push_back(line.substr(start));
            break;
        }
        cols.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
    return cols;
}

bool is_integer(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (c < '0' || c > '9') return false;
    return true;
}

[[noreturn]] void fail(int line_no, const std::string& msg) {
    throw std::runtime_error("conllu line " + std::to_string(line_no) + ": " + msg);
}

} // namespace

std::string validate_tree(const DependencyTree& tree) {
    const int n = tree.size();
    for (int i = 0; i < n; ++i) {
        const int head = tree.tokens[i].head;
        if (head < 0 || head > n) return "head out of range";
    }
    // every token must reach the root within n hops; a token that is its own
    // head is the degenerate 1-cycle
    for (int i = 0; i < n; ++i) {
        int cur = i + 1;
        int hops = 0;
        while (cur != 0) {
            cur = tree.tokens[cur - 1].head;
            if (++hops > n) return "cycle at token " + std::to_string(i + 1);
        }
    }
    // cycle-free walks all end at the root pseudo-node, so at least one root
    // exists here; reject extras
    int roots = 0;
    for (int i = 0; i < n; ++i)
        if (tree.tokens[i].head == 0) ++roots;
    if (roots > 1) return "multiple roots";
    return "";
}

ParseResult parse_conllu(std::istream& in, const ParseOptions& opts) {
    ParseResult result;
    std::vector<ParsedDocument>& docs = result.documents;

    DependencyTree current;
    std::set<long> seen_ids;
    int sentence_start_line = 0;

    auto ensure_doc = [&]() -> ParsedDocument& {
        if (docs.empty()) docs.push_back({"doc1", {}});
        return docs.back();
    };

    auto flush_sentence = [&](int line_no) {
        if (current.tokens.empty()) return;
        const std::string diag = validate_tree(current);
        if (!diag.empty()) {
            if (opts.permissive) {
                ++result.skipped_sentences;
            } else {
                fail(sentence_start_line > 0 ? sentence_start_line : line_no,
                     "invalid dependency tree: " + diag);
            }
        } else {
            ensure_doc().sentences.push_back(current);
        }
        current = DependencyTree{};
        seen_ids.clear();
        sentence_start_line = 0;
    };

    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            flush_sentence(line_no);
            continue;
        }
        if (line[0] == '#') {
            if (line.rfind("# newdoc", 0) == 0) {
                flush_sentence(line_no);
                std::string id = "doc" + std::to_string(docs.size() + 1);
                const std::size_t eq = line.find("id =");
                if (eq != std::string::npos) {
                    std::string rest = line.substr(eq + 4);
                    std::size_t b = rest.find_first_not_of(" \t");
                    if (b != std::string::npos) id = rest.substr(b);
                }
                docs.push_back({id, {}});
            } else if (line.rfind("# sent_id", 0) == 0) {
                const std::size_t eq = line.find("=");
                if (eq != std::string::npos) {
                    std::string rest = line.substr(eq + 1);
                    std::size_t b = rest.find_first_not_of(" \t");
                    current.sentence_id = b == std::string::npos ? "" : rest.substr(b);
                }
            }
            continue;
        }
        const auto cols = split_tabs(line);
        if (cols.size() != 10) fail(line_no, "expected 10 tab-separated columns, got " +
                                             std::to_string(cols.size()));
        const std::string& id = cols[0];
        if (id.find('-') != std::string::npos) continue; // multiword token range
        if (id.find('.') != std::string::npos) continue; // empty node
        if (!is_integer(id)) fail(line_no, "non-integer token ID '" + id + "'");
        const long id_val = std::stol(id);
        if (sentence_start_line == 0) sentence_start_line = line_no;
        if (!seen_ids.insert(id_val).second)
            fail(line_no, "duplicate ID " + id + " within sentence");
        if (id_val != static_cast<long>(current.tokens.size()) + 1)
            fail(line_no, "non-contiguous token ID " + id);
        if (!is_integer(cols[6])) fail(line_no, "non-integer HEAD '" + cols[6] + "'");
        Token tok;
        tok.surface = cols[1];
        tok.head = static_cast<int>(std::stol(cols[6]));
        tok.deprel = cols[7];
        current.tokens.push_back(std::move(tok));
    }
    flush_sentence(line_no);

    // drop a trailing '# newdoc' with no sentences only if it never held tokens
    while (!docs.empty() && docs.size() > 1 && docs.back().sentences.empty()) docs.pop_back();
    if (docs.size() == 1 && docs[0].sentences.empty()) docs.clear();
    return result;
}

ParseResult parse_conllu_file(const std::string& path, const ParseOptions& opts) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open conllu file: " + path);
    return parse_conllu(in, opts);
}

std::string serialize(const std::vector<ParsedDocument>& docs) {
    std::ostringstream out;
    for (const auto& doc : docs) {
        out << "# newdoc id = " << doc.doc_id << "\n";
        for (const auto& sent : doc.sentences) {
            if (!sent.sentence_id.empty()) out << "# sent_id = " << sent.sentence_id << "\n";
            for (int i = 0; i < sent.size(); ++i) {
                const Token& t = sent.tokens[i];
                out << (i + 1) << '\t' << t.surface << "\t_\t_\t_\t_\t" << t.head << '\t'
                    << t.deprel << "\t_\t_\n";
            }
            out << "\n";
        }
    }
    return out.str();
}

} // namespace lgsum::conllu
