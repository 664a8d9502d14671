#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "lgsum/pipeline.hpp"

namespace lgsum::pipeline {

void write_matrix_csv(const std::string& path, const numerics::DenseMatrix& m) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write csv: " + path);
    char buf[40];
    for (int i = 0; i < m.rows; ++i) {
        for (int j = 0; j < m.cols; ++j) {
            if (j) out << ',';
            std::snprintf(buf, sizeof buf, "%.17g", m.at(i, j)); // exact double round trip
            out << buf;
        }
        out << '\n';
    }
}

numerics::DenseMatrix read_matrix_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open csv: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (!rows.empty() && rows[0].size() != row.size())
            throw std::runtime_error("ragged csv: " + path);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) return {};
    numerics::DenseMatrix m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) m.at(i, j) = rows[i][j];
    return m;
}

void write_pgm(const std::string& path, const numerics::DenseMatrix& m) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write pgm: " + path);
    double lo = m.data.empty() ? 0.0 : m.data[0];
    double hi = lo;
    for (double v : m.data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double span = hi - lo;
    out << "P2\n" << m.cols << ' ' << m.rows << "\n255\n";
    for (int i = 0; i < m.rows; ++i) {
        for (int j = 0; j < m.cols; ++j) {
            const int gray =
                span > 0.0 ? static_cast<int>(std::lround((m.at(i, j) - lo) / span * 255.0)) : 0;
            if (j) out << ' ';
            out << gray;
        }
        out << '\n';
    }
}

void export_attention_map(const model::Transformer& net, const CorpusExample& example, int layer,
                          int head, const std::string& stage, const std::string& out_prefix) {
    if (stage != "base" && stage != "fused")
        throw std::invalid_argument("export stage must be 'base' or 'fused'");
    if (layer < 0 || layer >= net.config().enc_layers)
        throw std::invalid_argument("export layer out of range");
    if (head < -1 || head >= net.config().heads)
        throw std::invalid_argument("export head out of range");

    const auto pre = preprocess(example, net.vocab(), net.config());
    std::vector<model::AttnCapture> captures;
    (void)net.encode(pre.src, pre.dep, &captures);

    const auto& maps =
        stage == "base" ? captures[static_cast<std::size_t>(layer)].base
                        : captures[static_cast<std::size_t>(layer)].fused;
    numerics::DenseMatrix selected;
    if (head >= 0) {
        selected = maps[static_cast<std::size_t>(head)];
    } else {
        selected = numerics::DenseMatrix(maps[0].rows, maps[0].cols);
        for (const auto& m : maps)
            for (std::size_t i = 0; i < m.data.size(); ++i) selected.data[i] += m.data[i];
        const double inv = 1.0 / static_cast<double>(maps.size());
        for (double& v : selected.data) v *= inv;
    }

    write_matrix_csv(out_prefix + ".att.csv", selected);
    write_pgm(out_prefix + ".att.pgm", selected);

    numerics::DenseMatrix p(pre.dep->n, pre.dep->n);
    for (int i = 0; i < p.rows; ++i)
        for (int j = 0; j < p.cols; ++j) p.at(i, j) = pre.dep->at(i, j);
    write_matrix_csv(out_prefix + ".dep.csv", p);
}

} // namespace lgsum::pipeline
