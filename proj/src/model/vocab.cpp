#include "lgsum/model.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <stdexcept>

namespace lgsum::model {

void Vocabulary::add(const std::string& token) {
    if (index_.count(token)) throw std::invalid_argument("duplicate vocabulary token: " + token);
    index_[token] = static_cast<int>(tokens_.size());
    tokens_.push_back(token);
}

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& token_streams,
                             int min_freq, const std::string& sent_delim,
                             const std::string& doc_sep) {
    Vocabulary v;
    v.add("<pad>");
    v.add("<unk>");
    v.add("<s>");
    v.add("</s>");
    v.add(sent_delim);
    v.add(doc_sep);

    std::map<std::string, long> freq; // ordered map keeps ties lexicographic
    for (const auto& stream : token_streams)
        for (const auto& tok : stream)
            if (!v.index_.count(tok)) ++freq[tok];

    std::vector<std::pair<std::string, long>> entries(freq.begin(), freq.end());
    std::stable_sort(entries.begin(), entries.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    for (const auto& [tok, count] : entries)
        if (count >= min_freq) v.add(tok);
    return v;
}

Vocabulary Vocabulary::from_tokens(const std::vector<std::string>& tokens) {
    if (static_cast<int>(tokens.size()) < kReservedCount)
        throw std::runtime_error("vocabulary listing too short to hold reserved tokens");
    Vocabulary v;
    for (const auto& t : tokens) v.add(t);
    return v;
}

int Vocabulary::lookup(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::surface(int index) const {
    if (index < 0 || index >= size()) throw std::out_of_range("vocabulary index out of range");
    return tokens_[static_cast<std::size_t>(index)];
}

std::vector<int> Vocabulary::encode(const std::vector<std::string>& tokens) const {
    std::vector<int> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(lookup(t));
    return out;
}

std::uint64_t Vocabulary::content_hash() const {
    std::string joined;
    for (const auto& t : tokens_) {
        joined += t;
        joined += '\n';
    }
    return fnv1a64(joined);
}

void Vocabulary::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write vocabulary file: " + path);
    for (const auto& t : tokens_) out << t << '\n';
}

Vocabulary Vocabulary::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open vocabulary file: " + path);
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        tokens.push_back(line);
    }
    return from_tokens(tokens);
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

} // namespace lgsum::model
