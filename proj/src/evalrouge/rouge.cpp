#include "lgsum/rouge.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <stdexcept>

namespace lgsum::rouge {

RougeScore make_score(double precision, double recall) {
    RougeScore s;
    s.precision = precision;
    s.recall = recall;
    s.f1 = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    return s;
}

std::vector<std::string> tokenize_for_scoring(const std::string& text) {
    std::vector<std::string> out;
    std::string current;
    auto flush = [&]() {
        if (!current.empty()) {
            out.push_back(current);
            current.clear();
        }
    };
    for (unsigned char c : text) {
        if (std::isspace(c)) {
            flush();
        } else if (std::ispunct(c)) {
            flush();
            out.push_back(std::string(1, static_cast<char>(c)));
        } else {
            current += static_cast<char>(std::tolower(c));
        }
    }
    flush();
    return out;
}

namespace {

std::map<std::vector<std::string>, int> ngram_counts(const std::vector<std::string>& tokens, int n) {
    std::map<std::vector<std::string>, int> counts;
    if (static_cast<int>(tokens.size()) < n) return counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i)
        ++counts[std::vector<std::string>(tokens.begin() + i, tokens.begin() + i + n)];
    return counts;
}

} // namespace

RougeScore rouge_n(const std::vector<std::string>& candidate,
                   const std::vector<std::string>& reference, int n) {
    if (n != 1 && n != 2) throw std::invalid_argument("rouge_n: n must be 1 or 2");
    const auto cand = ngram_counts(candidate, n);
    const auto ref = ngram_counts(reference, n);
    long cand_total = 0, ref_total = 0, overlap = 0;
    for (const auto& [g, c] : cand) cand_total += c;
    for (const auto& [g, c] : ref) ref_total += c;
    for (const auto& [g, c] : cand) {
        auto it = ref.find(g);
        if (it != ref.end()) overlap += std::min(c, it->second); // clipped
    }
    if (cand_total == 0 || ref_total == 0) return {};
    return make_score(static_cast<double>(overlap) / cand_total,
                      static_cast<double>(overlap) / ref_total);
}

int lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    const std::size_t n = a.size(), m = b.size();
    std::vector<int> prev(m + 1, 0), cur(m + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= m; ++j) {
            if (a[i - 1] == b[j - 1])
                cur[j] = prev[j - 1] + 1;
            else
                cur[j] = std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

RougeScore rouge_l(const std::vector<std::string>& candidate,
                   const std::vector<std::string>& reference) {
    if (candidate.empty() || reference.empty()) return {};
    const int l = lcs_length(candidate, reference);
    return make_score(static_cast<double>(l) / candidate.size(),
                      static_cast<double>(l) / reference.size());
}

CorpusRouge score_pair(const std::vector<std::string>& candidate,
                       const std::vector<std::string>& reference) {
    CorpusRouge s;
    s.rouge1 = rouge_n(candidate, reference, 1);
    s.rouge2 = rouge_n(candidate, reference, 2);
    s.rougeL = rouge_l(candidate, reference);
    return s;
}

CorpusRouge corpus_rouge(const std::vector<std::pair<std::vector<std::string>,
                                                     std::vector<std::string>>>& pairs) {
    if (pairs.empty()) throw std::invalid_argument("corpus_rouge: empty pair list");
    CorpusRouge mean;
    auto acc = [](RougeScore& into, const RougeScore& s) {
        into.precision += s.precision;
        into.recall += s.recall;
        into.f1 += s.f1;
    };
    for (const auto& [cand, ref] : pairs) {
        const CorpusRouge s = score_pair(cand, ref);
        acc(mean.rouge1, s.rouge1);
        acc(mean.rouge2, s.rouge2);
        acc(mean.rougeL, s.rougeL);
    }
    const double inv = 1.0 / static_cast<double>(pairs.size());
    for (RougeScore* s : {&mean.rouge1, &mean.rouge2, &mean.rougeL}) {
        s->precision *= inv;
        s->recall *= inv;
        s->f1 *= inv;
    }
    return mean;
}

} // namespace lgsum::rouge
