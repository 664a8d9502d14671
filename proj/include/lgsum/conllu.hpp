#pragma once

#include <istream>
#include <string>
#include <vector>

namespace lgsum::conllu {

struct Token {
    std::string surface; // FORM, kept verbatim; lowercasing happens downstream
    int head = 0;        // 1-based index of the governing token, 0 = root
    std::string deprel;
};

// One parsed sentence. Valid trees have exactly one root, in-range heads and
// no cycles; parse_conllu only returns trees that pass validate_tree.
struct DependencyTree {
    std::string sentence_id;
    std::vector<Token> tokens;
    int size() const { return static_cast<int>(tokens.size()); }
};

struct ParsedDocument {
    std::string doc_id;
    std::vector<DependencyTree> sentences;
};

struct ParseOptions {
    // With permissive=true invalid sentences are skipped (counted in
    // skipped_sentences) instead of aborting the file.
    bool permissive = false;
};

struct ParseResult {
    std::vector<ParsedDocument> documents;
    int skipped_sentences = 0;
};

// Reads 10-column tab-separated CoNLL-U. '#' comment lines are honored
// ('# newdoc' opens a document), multiword ranges ("3-4") and empty nodes
// ("5.1") are skipped, blank lines end a sentence. Only ID/FORM/HEAD/DEPREL
// are consumed. Malformed input throws std::runtime_error naming the line.
ParseResult parse_conllu(std::istream& in, const ParseOptions& opts = {});
ParseResult parse_conllu_file(const std::string& path, const ParseOptions& opts = {});

// Empty string when the tree is valid, otherwise one of:
// "multiple roots" / "no root" / "head out of range" / "cycle at token i" /
// "token is its own head".
std::string validate_tree(const DependencyTree& tree);

// Re-emits the consumed fields (ID, FORM, HEAD, DEPREL; other columns as "_")
// in CoNLL-U layout. parse(serialize(x)) == x on the consumed fields.
std::string serialize(const std::vector<ParsedDocument>& docs);

} // namespace lgsum::conllu
