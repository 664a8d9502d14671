#pragma once

#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "lgsum/matrix.hpp"

namespace lgsum::numerics {

// A learned weight array. `grad` is the persistent accumulator the training
// loop owns (zeroed per accumulation window, scaled before the optimizer step).
struct Parameter {
    std::string name;
    DenseMatrix value;
    DenseMatrix grad;

    Parameter(std::string n, int rows, int cols)
        : name(std::move(n)), value(rows, cols), grad(rows, cols) {}
};

class ParameterStore {
public:
    Parameter& create(const std::string& name, int rows, int cols);
    Parameter* find(const std::string& name);
    const Parameter* find(const std::string& name) const;
    const std::vector<std::unique_ptr<Parameter>>& all() const { return params_; }
    std::size_t count() const { return params_.size(); }
    std::size_t scalar_count() const;
    void zero_grads();
    void scale_grads(double s);
    bool grads_finite() const;

private:
    std::vector<std::unique_ptr<Parameter>> params_; // creation order = checkpoint order
};

// Reverse-mode tape over matrix primitives. Nodes are appended in forward
// order; each records the saved state its vector-Jacobian product needs.
// backward() walks the tape once and accumulates into Parameter::grad.
class Tape {
public:
    using BackwardFn = std::function<void(Tape&, int self)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    int constant(DenseMatrix value);           // no gradient flows into it
    int param(Parameter& p);                   // leaf bound to a parameter
    int make_node(DenseMatrix value, std::vector<int> inputs, BackwardFn backward);

    const DenseMatrix& value(int id) const { return nodes_[id].value; }
    bool requires_grad(int id) const { return nodes_[id].requires_grad; }
    bool has_grad(int id) const { return !nodes_[id].grad.data.empty(); }
    DenseMatrix& grad(int id);                 // allocated as zeros on demand
    void add_grad(int id, const DenseMatrix& g);
    void backward(int loss);                   // loss must be a 1x1 node
    std::size_t node_count() const { return nodes_.size(); }

    // Consulted by the dropout op; evaluation tapes leave training=false so
    // dropout is the identity, matching the scale-at-train convention.
    bool training = false;
    std::mt19937_64* rng = nullptr;

private:
    struct Node {
        DenseMatrix value;
        DenseMatrix grad; // empty until touched
        std::vector<int> inputs;
        BackwardFn backward;
        Parameter* bound = nullptr;
        bool requires_grad = false;
    };
    std::vector<Node> nodes_;
};

} // namespace lgsum::numerics
