#pragma once

#include <string>
#include <vector>

namespace lgsum::rouge {

struct RougeScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

RougeScore make_score(double precision, double recall); // f1 = 2pr/(p+r), 0 when p+r = 0

// Scoring tokenization: lowercase, punctuation split off as its own tokens,
// whitespace split. No stemming or stopword removal, so scores are
// self-consistent within this toolkit rather than comparable to any
// particular external ROUGE configuration.
std::vector<std::string> tokenize_for_scoring(const std::string& text);

// Clipped n-gram overlap, n in {1, 2}.
RougeScore rouge_n(const std::vector<std::string>& candidate,
                   const std::vector<std::string>& reference, int n);

// Longest common subsequence over the whole token sequences.
RougeScore rouge_l(const std::vector<std::string>& candidate,
                   const std::vector<std::string>& reference);

int lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b);

struct CorpusRouge {
    RougeScore rouge1, rouge2, rougeL;
};

// Arithmetic mean of per-example scores; throws on an empty list.
CorpusRouge corpus_rouge(const std::vector<std::pair<std::vector<std::string>,
                                                     std::vector<std::string>>>& pairs);
CorpusRouge score_pair(const std::vector<std::string>& candidate,
                       const std::vector<std::string>& reference);

} // namespace lgsum::rouge
