#include "lgsum/depmatrix.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lgsum::depmatrix {

int DepMatrix::edge_count() const {
    int count = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) count += at(i, j);
    return count;
}

bool operator==(const DepMatrix& a, const DepMatrix& b) {
    return a.n == b.n && a.bits == b.bits && a.sentence_spans == b.sentence_spans &&
           a.doc_spans == b.doc_spans;
}

int PieceAlignment::piece_total() const {
    int total = 0;
    for (int c : counts) total += c;
    return total;
}

DepMatrix build_sentence_matrix(const conllu::DependencyTree& tree) {
    const std::string diag = conllu::validate_tree(tree);
    if (!diag.empty()) throw std::invalid_argument("invalid dependency tree: " + diag);
    const int n = tree.size();
    DepMatrix m(n);
    for (int i = 0; i < n; ++i) {
        const int head = tree.tokens[i].head;
        if (head == 0) continue; // the root pseudo-node is not a sequence position
        m.set(i, head - 1, 1);
        m.set(head - 1, i, 1);
    }
    m.sentence_spans = {{0, n}};
    m.doc_spans = {{0, n}};
    return m;
}

DepMatrix assemble_sequence_matrix(const std::vector<conllu::DependencyTree>& trees,
                                   const std::vector<int>& doc_boundaries) {
    if (trees.empty()) throw std::invalid_argument("assemble_sequence_matrix: no trees");
    std::vector<int> bounds = doc_boundaries.empty() ? std::vector<int>{0} : doc_boundaries;
    if (bounds.front() != 0)
        throw std::invalid_argument("assemble_sequence_matrix: first boundary must be 0");
    for (std::size_t i = 1; i < bounds.size(); ++i)
        if (bounds[i] < bounds[i - 1] || bounds[i] > static_cast<int>(trees.size()))
            throw std::invalid_argument("assemble_sequence_matrix: boundaries not monotone");

    int total = 0;
    for (const auto& t : trees) total += t.size();
    DepMatrix m(total);

    std::vector<int> sentence_start(trees.size() + 1, 0);
    int offset = 0;
    for (std::size_t s = 0; s < trees.size(); ++s) {
        sentence_start[s] = offset;
        const DepMatrix block = build_sentence_matrix(trees[s]);
        const int k = block.n;
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j)
                if (block.at(i, j)) m.set(offset + i, offset + j, 1);
        m.sentence_spans.push_back({offset, offset + k});
        offset += k;
    }
    sentence_start[trees.size()] = offset;

    for (std::size_t d = 0; d < bounds.size(); ++d) {
        const int first = bounds[d];
        const int last = d + 1 < bounds.size() ? bounds[d + 1] : static_cast<int>(trees.size());
        m.doc_spans.push_back({sentence_start[first], sentence_start[last]});
    }
    return m;
}

DepMatrix expand_to_pieces(const DepMatrix& m, const PieceAlignment& align) {
    if (static_cast<int>(align.counts.size()) != m.n)
        throw std::invalid_argument("expand_to_pieces: alignment length mismatch");
    for (int c : align.counts)
        if (c < 1) throw std::invalid_argument("expand_to_pieces: piece counts must be >= 1");

    const int words = m.n;
    std::vector<int> word_start(words + 1, 0);
    for (int w = 0; w < words; ++w) word_start[w + 1] = word_start[w] + align.counts[w];
    const int pieces = word_start[words];

    DepMatrix out(pieces);
    auto map_span = [&](std::pair<int, int> s) {
        return std::pair<int, int>{word_start[s.first], word_start[s.second]};
    };
    for (auto s : m.sentence_spans) out.sentence_spans.push_back(map_span(s));
    for (auto s : m.doc_spans) out.doc_spans.push_back(map_span(s));

    for (int wa = 0; wa < words; ++wa) {
        for (int a = word_start[wa]; a < word_start[wa + 1]; ++a) {
            // pieces of one word are maximally bound
            for (int b = word_start[wa]; b < word_start[wa + 1]; ++b)
                if (a != b) out.set(a, b, 1);
            for (int wb = 0; wb < words; ++wb) {
                if (!m.at(wa, wb)) continue;
                for (int b = word_start[wb]; b < word_start[wb + 1]; ++b) {
                    if (a == b) continue;
                    out.set(a, b, 1);
                    out.set(b, a, 1);
                }
            }
        }
    }
    return out;
}

namespace {

void write_spans(std::ostream& out, const std::vector<std::pair<int, int>>& spans) {
    for (std::size_t i = 0; i < spans.size(); ++i) {
        if (i) out << ' ';
        out << spans[i].first << ':' << spans[i].second;
    }
    out << '\n';
}

std::vector<std::pair<int, int>> read_spans(const std::string& line, std::size_t expect) {
    std::vector<std::pair<int, int>> spans;
    std::istringstream in(line);
    std::string item;
    while (in >> item) {
        const std::size_t colon = item.find(':');
        if (colon == std::string::npos)
            throw std::runtime_error("malformed span '" + item + "' in matrix file");
        spans.push_back({std::stoi(item.substr(0, colon)), std::stoi(item.substr(colon + 1))});
    }
    if (spans.size() != expect)
        throw std::runtime_error("span count does not match matrix header");
    return spans;
}

} // namespace

void write_matrix(const DepMatrix& m, std::ostream& out) {
    out << "DEPMAT v1 n=" << m.n << " sents=" << m.sentence_spans.size()
        << " docs=" << m.doc_spans.size() << '\n';
    write_spans(out, m.sentence_spans);
    write_spans(out, m.doc_spans);
    for (int i = 0; i < m.n; ++i) {
        for (int j = 0; j < m.n; ++j) {
            if (j) out << ' ';
            out << static_cast<int>(m.at(i, j));
        }
        out << '\n';
    }
}

DepMatrix read_matrix(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("empty matrix file");
    int n = -1;
    std::size_t sents = 0, docs = 0;
    {
        std::istringstream hs(header);
        std::string magic, version, field;
        hs >> magic >> version;
        if (magic != "DEPMAT" || version != "v1")
            throw std::runtime_error("malformed matrix header: " + header);
        while (hs >> field) {
            if (field.rfind("n=", 0) == 0) n = std::stoi(field.substr(2));
            else if (field.rfind("sents=", 0) == 0) sents = std::stoul(field.substr(6));
            else if (field.rfind("docs=", 0) == 0) docs = std::stoul(field.substr(5));
            else throw std::runtime_error("malformed matrix header field: " + field);
        }
        if (n < 0) throw std::runtime_error("matrix header missing n=");
    }
    DepMatrix m(n);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("unexpected end of matrix data");
    m.sentence_spans = read_spans(line, sents);
    if (!std::getline(in, line)) throw std::runtime_error("unexpected end of matrix data");
    m.doc_spans = read_spans(line, docs);
    for (int i = 0; i < n; ++i) {
        if (!std::getline(in, line)) throw std::runtime_error("unexpected end of matrix data");
        std::istringstream row(line);
        for (int j = 0; j < n; ++j) {
            int v;
            if (!(row >> v)) throw std::runtime_error("unexpected end of matrix data");
            if (v != 0 && v != 1) throw std::runtime_error("matrix entries must be 0 or 1");
            m.set(i, j, static_cast<std::uint8_t>(v));
        }
    }
    return m;
}

void save_matrix(const DepMatrix& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write matrix file: " + path);
    write_matrix(m, out);
    if (!out) throw std::runtime_error("write failed: " + path);
}

DepMatrix load_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open matrix file: " + path);
    return read_matrix(in);
}

} // namespace lgsum::depmatrix
