#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "lgsum/model.hpp"

namespace lgsum::model {

namespace {

constexpr const char* kMagic = "LGSUMCKPT v1";

void write_u32le(std::ostream& out, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32le(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw std::runtime_error("checkpoint: unexpected end of parameter data");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

void write_f64le(std::ostream& out, double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(b), 8);
}

double read_f64le(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) throw std::runtime_error("checkpoint: unexpected end of parameter data");
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    double d;
    std::memcpy(&d, &bits, 8);
    return d;
}

std::string header_text(const ModelConfig& c, const Vocabulary& vocab) {
    std::ostringstream out;
    out << kMagic << '\n';
    out.precision(17);
    out << "width = " << c.width << '\n';
    out << "heads = " << c.heads << '\n';
    out << "enc_layers = " << c.enc_layers << '\n';
    out << "dec_layers = " << c.dec_layers << '\n';
    out << "ffn_width = " << c.ffn_width << '\n';
    out << "dropout = " << c.dropout << '\n';
    out << "fusion_mode = " << attention::fusion_mode_name(c.fusion.mode) << '\n';
    out << "fusion_weight = " << c.fusion.weight << '\n';
    out << "identity_literal = " << (c.fusion.identity_literal ? 1 : 0) << '\n';
    out << "renormalize = " << (c.fusion.renormalize ? 1 : 0) << '\n';
    out << "max_src_tokens = " << c.max_src_tokens << '\n';
    out << "max_tgt_tokens = " << c.max_tgt_tokens << '\n';
    out << "min_gen = " << c.min_gen << '\n';
    out << "max_gen = " << c.max_gen << '\n';
    out << "label_smoothing = " << c.label_smoothing << '\n';
    out << "vocab = " << vocab.size() << '\n';
    for (const auto& tok : vocab.all_tokens()) out << tok << '\n';
    return out.str();
}

std::pair<std::string, std::string> split_kv(const std::string& line) {
    const std::size_t eq = line.find(" = ");
    if (eq == std::string::npos) throw std::runtime_error("checkpoint: malformed header line: " + line);
    return {line.substr(0, eq), line.substr(eq + 3)};
}

} // namespace

void save_checkpoint(const Transformer& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    const std::string header = header_text(model.config(), model.vocab());
    out << header;
    out << "hash = " << std::hex << fnv1a64(header) << std::dec << '\n';
    const auto& params = model.params().all();
    out << "params = " << params.size() << '\n';
    for (const auto& p : params) {
        write_u32le(out, static_cast<std::uint32_t>(p->name.size()));
        out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
        write_u32le(out, static_cast<std::uint32_t>(p->value.rows));
        write_u32le(out, static_cast<std::uint32_t>(p->value.cols));
        for (double v : p->value.data) write_f64le(out, v);
    }
    if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

Transformer load_checkpoint_stream(std::istream& in, const std::string& what) {
    std::string line;
    if (!std::getline(in, line) || line != kMagic)
        throw std::runtime_error(what + ": not a checkpoint file");

    ModelConfig config;
    std::vector<std::string> vocab_tokens;
    std::ostringstream header;
    header << kMagic << '\n';

    int vocab_count = -1;
    while (std::getline(in, line)) {
        if (line.rfind("hash = ", 0) == 0) break;
        header << line << '\n';
        if (vocab_count > 0) {
            vocab_tokens.push_back(line);
            --vocab_count;
            continue;
        }
        const auto [key, value] = split_kv(line);
        if (key == "width") config.width = std::stoi(value);
        else if (key == "heads") config.heads = std::stoi(value);
        else if (key == "enc_layers") config.enc_layers = std::stoi(value);
        else if (key == "dec_layers") config.dec_layers = std::stoi(value);
        else if (key == "ffn_width") config.ffn_width = std::stoi(value);
        else if (key == "dropout") config.dropout = std::stod(value);
        else if (key == "fusion_mode") config.fusion.mode = attention::fusion_mode_from_name(value);
        else if (key == "fusion_weight") config.fusion.weight = std::stod(value);
        else if (key == "identity_literal") config.fusion.identity_literal = value == "1";
        else if (key == "renormalize") config.fusion.renormalize = value == "1";
        else if (key == "max_src_tokens") config.max_src_tokens = std::stoi(value);
        else if (key == "max_tgt_tokens") config.max_tgt_tokens = std::stoi(value);
        else if (key == "min_gen") config.min_gen = std::stoi(value);
        else if (key == "max_gen") config.max_gen = std::stoi(value);
        else if (key == "label_smoothing") config.label_smoothing = std::stod(value);
        else if (key == "vocab") vocab_count = std::stoi(value);
        else throw std::runtime_error(what + ": unknown checkpoint field: " + key);
    }
    if (line.rfind("hash = ", 0) != 0) throw std::runtime_error(what + ": checkpoint hash missing");
    if (vocab_count != 0) throw std::runtime_error(what + ": truncated vocabulary listing");
    Vocabulary vocab = Vocabulary::from_tokens(vocab_tokens);

    const std::uint64_t expect = std::stoull(line.substr(7), nullptr, 16);
    if (fnv1a64(header.str()) != expect)
        throw std::runtime_error(what + ": checkpoint hash mismatch");

    if (!std::getline(in, line) || line.rfind("params = ", 0) != 0)
        throw std::runtime_error(what + ": parameter count missing");
    const std::size_t param_count = std::stoul(line.substr(9));

    config.vocab_size = vocab.size();
    Transformer model(std::move(config), std::move(vocab), 0);
    const auto& params = model.params().all();
    if (params.size() != param_count)
        throw std::runtime_error(what + ": parameter count disagrees with configuration");
    for (const auto& p : params) {
        const std::uint32_t name_len = read_u32le(in);
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        if (!in || name != p->name)
            throw std::runtime_error(what + ": parameter order mismatch at " + p->name);
        const std::uint32_t rows = read_u32le(in);
        const std::uint32_t cols = read_u32le(in);
        if (static_cast<int>(rows) != p->value.rows || static_cast<int>(cols) != p->value.cols)
            throw std::runtime_error(what + ": parameter shape mismatch at " + p->name);
        for (double& v : p->value.data) v = read_f64le(in);
    }
    return model;
}

Transformer load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    return load_checkpoint_stream(in, path);
}

} // namespace lgsum::model
