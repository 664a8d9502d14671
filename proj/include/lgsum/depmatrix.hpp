#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "lgsum/conllu.hpp"

namespace lgsum::depmatrix {

// Binary symmetric word-pair matrix over a token sequence: 1 where a
// dependency edge connects the two positions, 0 elsewhere. Direction and
// relation labels are discarded; the diagonal is 0 (self-relation is the
// fusion term's job, not the edge set's); entries across sentence or
// document boundaries are 0.
struct DepMatrix {
    int n = 0;
    std::vector<std::uint8_t> bits; // n*n, row-major
    std::vector<std::pair<int, int>> sentence_spans; // [start, end) position ranges
    std::vector<std::pair<int, int>> doc_spans;

    DepMatrix() = default;
    explicit DepMatrix(int size) : n(size), bits(static_cast<std::size_t>(size) * size, 0) {}
    std::uint8_t at(int i, int j) const { return bits[static_cast<std::size_t>(i) * n + j]; }
    void set(int i, int j, std::uint8_t v) { bits[static_cast<std::size_t>(i) * n + j] = v; }
    int edge_count() const; // ones strictly above the diagonal
};

bool operator==(const DepMatrix& a, const DepMatrix& b);

// Word -> subword piece expansion: counts[i] pieces for word i, all >= 1.
struct PieceAlignment {
    std::vector<int> counts;
    int piece_total() const;
};

// Edge-set matrix of one sentence: bits[i][j] = 1 iff head(i) = j or
// head(j) = i. Root attachment (head 0) creates no edge. Throws on an
// invalid tree.
DepMatrix build_sentence_matrix(const conllu::DependencyTree& tree);

// Block-diagonal placement of per-sentence matrices along the concatenated
// token sequence. doc_boundaries lists, per document, the index of its first
// sentence in `trees` (so {0} means one document; {0, 2} splits trees into
// [0,2) and [2,end)). Cross-sentence and cross-document entries stay 0.
DepMatrix assemble_sequence_matrix(const std::vector<conllu::DependencyTree>& trees,
                                   const std::vector<int>& doc_boundaries = {0});

// Piece-level matrix: pieces of connected words are connected; distinct
// pieces of one word are connected; the diagonal stays 0.
DepMatrix expand_to_pieces(const DepMatrix& m, const PieceAlignment& align);

// "DEPMAT v1" text format; round trip is bit-exact.
void save_matrix(const DepMatrix& m, const std::string& path);
DepMatrix load_matrix(const std::string& path);
void write_matrix(const DepMatrix& m, std::ostream& out);
DepMatrix read_matrix(std::istream& in);

} // namespace lgsum::depmatrix
