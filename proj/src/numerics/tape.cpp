#include "lgsum/tape.hpp"

#include <cmath>
#include <stdexcept>

#include "lgsum/kernels.hpp"

namespace lgsum::numerics {

Parameter& ParameterStore::create(const std::string& name, int rows, int cols) {
    if (find(name)) throw std::invalid_argument("duplicate parameter name: " + name);
    params_.push_back(std::make_unique<Parameter>(name, rows, cols));
    return *params_.back();
}

Parameter* ParameterStore::find(const std::string& name) {
    for (auto& p : params_)
        if (p->name == name) return p.get();
    return nullptr;
}

const Parameter* ParameterStore::find(const std::string& name) const {
    for (auto& p : params_)
        if (p->name == name) return p.get();
    return nullptr;
}

std::size_t ParameterStore::scalar_count() const {
    std::size_t n = 0;
    for (auto& p : params_) n += p->value.size();
    return n;
}

void ParameterStore::zero_grads() {
    for (auto& p : params_)
        std::fill(p->grad.data.begin(), p->grad.data.end(), 0.0);
}

void ParameterStore::scale_grads(double s) {
    for (auto& p : params_)
        kernels::scale(p->grad.data.data(), p->grad.data.data(), s, p->grad.size());
}

bool ParameterStore::grads_finite() const {
    for (auto& p : params_)
        if (!p->grad.all_finite()) return false;
    return true;
}

int Tape::constant(DenseMatrix value) {
    Node n;
    n.value = std::move(value);
    n.requires_grad = false;
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
}

int Tape::param(Parameter& p) {
    Node n;
    n.value = p.value; // snapshot; parameters are read-only during a forward pass
    n.bound = &p;
    n.requires_grad = true;
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
}

int Tape::make_node(DenseMatrix value, std::vector<int> inputs, BackwardFn backward) {
    Node n;
    n.value = std::move(value);
    n.inputs = std::move(inputs);
    for (int in : n.inputs) {
        if (in < 0 || in >= static_cast<int>(nodes_.size()))
            throw std::invalid_argument("tape node input out of range");
        if (nodes_[in].requires_grad) n.requires_grad = true;
    }
    if (n.requires_grad) n.backward = std::move(backward);
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
}

DenseMatrix& Tape::grad(int id) {
    Node& n = nodes_[id];
    if (n.grad.data.empty()) n.grad = DenseMatrix(n.value.rows, n.value.cols);
    return n.grad;
}

void Tape::add_grad(int id, const DenseMatrix& g) {
    Node& n = nodes_[id];
    if (!n.requires_grad) return;
    if (g.rows != n.value.rows || g.cols != n.value.cols)
        throw std::invalid_argument("gradient shape mismatch on tape node");
    DenseMatrix& acc = grad(id);
    kernels::add(acc.data.data(), acc.data.data(), g.data.data(), g.size());
}

void Tape::backward(int loss) {
    if (loss < 0 || loss >= static_cast<int>(nodes_.size()))
        throw std::invalid_argument("backward: unknown node");
    const Node& ln = nodes_[loss];
    if (ln.value.rows != 1 || ln.value.cols != 1)
        throw std::invalid_argument("backward: loss node must be 1x1");
    grad(loss).at(0, 0) += 1.0;
    for (int id = loss; id >= 0; --id) {
        Node& n = nodes_[id];
        if (n.grad.data.empty() || !n.requires_grad) continue;
        if (n.backward) n.backward(*this, id);
        if (n.bound)
            kernels::add(n.bound->grad.data.data(), n.bound->grad.data.data(),
                         n.grad.data.data(), n.grad.size());
    }
}

} // namespace lgsum::numerics
