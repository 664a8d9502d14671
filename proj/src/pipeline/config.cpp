#include <fstream>
#include <sstream>
#include <stdexcept>

#include "lgsum/pipeline.hpp"

namespace lgsum::pipeline {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

bool parse_bool(const std::string& v) {
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw std::invalid_argument("not a boolean: " + v);
}

// "100:0.5,200:0.25"
std::vector<std::pair<long, double>> parse_milestones(const std::string& v) {
    std::vector<std::pair<long, double>> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        const std::size_t colon = item.find(':');
        if (colon == std::string::npos)
            throw std::invalid_argument("milestone must look like step:factor, got " + item);
        out.push_back({std::stol(item.substr(0, colon)), std::stod(item.substr(colon + 1))});
    }
    return out;
}

} // namespace

void apply_config_entry(RunConfig& rc, const std::string& key, const std::string& value) {
    auto& m = rc.model;
    auto& t = rc.train;
    if (key == "width") m.width = std::stoi(value);
    else if (key == "heads") m.heads = std::stoi(value);
    else if (key == "enc_layers") m.enc_layers = std::stoi(value);
    else if (key == "dec_layers") m.dec_layers = std::stoi(value);
    else if (key == "ffn_width") m.ffn_width = std::stoi(value);
    else if (key == "dropout") m.dropout = std::stod(value);
    else if (key == "max_src_tokens") m.max_src_tokens = std::stoi(value);
    else if (key == "max_tgt_tokens") m.max_tgt_tokens = std::stoi(value);
    else if (key == "min_gen") m.min_gen = std::stoi(value);
    else if (key == "max_gen") m.max_gen = std::stoi(value);
    else if (key == "label_smoothing") m.label_smoothing = std::stod(value);
    else if (key == "fusion_mode") m.fusion.mode = attention::fusion_mode_from_name(value);
    else if (key == "fusion_weight" || key == "alpha") m.fusion.weight = std::stod(value);
    else if (key == "identity_literal") m.fusion.identity_literal = parse_bool(value);
    else if (key == "renormalize") m.fusion.renormalize = parse_bool(value);
    else if (key == "batch_tokens") t.batch_tokens = std::stoi(value);
    else if (key == "accum_steps") t.accum_steps = std::stoi(value);
    else if (key == "max_steps") t.max_steps = std::stol(value);
    else if (key == "seed") t.seed = std::stoull(value);
    else if (key == "base_lr") t.schedule.base_lr = std::stod(value);
    else if (key == "warmup_steps") t.schedule.warmup_steps = std::stol(value);
    else if (key == "milestones") t.schedule.decay_milestones = parse_milestones(value);
    else if (key == "checkpoint_interval") t.checkpoint_interval = std::stol(value);
    else if (key == "vocab_min_freq") t.vocab_min_freq = std::stoi(value);
    else if (key == "beam") t.beam = std::stoi(value);
    else throw std::invalid_argument("unknown config key: " + key);
}

RunConfig load_config_file(const std::string& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected key = value");
        try {
            apply_config_entry(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return base;
}

} // namespace lgsum::pipeline
