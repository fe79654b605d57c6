#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <string>
#include <vector>

#include "popgraph/sparse.hpp"

namespace popgraph {

// A named parameter array living outside any trace. Models own these; traces
// bind them as leaves each forward pass.
struct Param {
    std::string name;
    std::vector<std::size_t> shape;
    std::vector<double> value;

    std::size_t size() const { return value.size(); }
};

class Trace;

// Handle into a Trace. Cheap to copy; invalid once the trace is destroyed.
class Tensor {
public:
    Tensor() = default;

    bool valid() const { return trace_ != nullptr; }
    std::size_t id() const { return id_; }

    const std::vector<std::size_t>& shape() const;
    const std::vector<double>& values() const;
    // Gradient of the last backward pass; throws if not populated.
    const std::vector<double>& grad() const;
    std::size_t size() const;
    std::size_t rows() const;
    std::size_t cols() const;

private:
    friend class Trace;
    Tensor(Trace* trace, std::size_t id) : trace_(trace), id_(id) {}

    Trace* trace_ = nullptr;
    std::size_t id_ = 0;
};

// Reverse-mode tape. Every operation appends a record holding its operand
// ids and a backward rule; records are topological by construction, so
// backward() is a single reverse sweep. One trace per forward/backward pass;
// not shareable across threads.
class Trace {
public:
    Trace() = default;
    Trace(const Trace&) = delete;
    Trace& operator=(const Trace&) = delete;
    Trace(Trace&&) = delete;
    Trace& operator=(Trace&&) = delete;

    // Leaves.
    Tensor tensor(std::vector<std::size_t> shape, std::vector<double> values);
    Tensor scalar(double v);
    Tensor zeros(std::vector<std::size_t> shape);
    Tensor param(const Param& p);

    // Linear algebra.
    Tensor matmul(Tensor a, Tensor b);
    Tensor spmm(const SparseMatrix& s, Tensor d);
    // Sparse-times-dense where the nonzero values are themselves a traced
    // tensor (length nnz, aligned with the pattern's CSR order). Gradients
    // flow into both the values and the dense operand.
    Tensor spmm_weighted(const SparseMatrix& pattern, Tensor edge_values, Tensor d);

    // Elementwise and shape ops.
    Tensor relu(Tensor x);
    Tensor leaky_relu(Tensor x, double slope);
    Tensor add(Tensor a, Tensor b);
    Tensor sub(Tensor a, Tensor b);
    Tensor mul(Tensor a, Tensor b);
    Tensor scale(Tensor x, double c);
    Tensor add_rowvec(Tensor x, Tensor row); // (n x f) + (1 x f), broadcast over rows
    Tensor concat_columns(Tensor a, Tensor b);
    Tensor row_mean(Tensor x); // (n x f) -> (n x 1)
    Tensor gather_rows(Tensor x, std::vector<std::size_t> indices);

    // Softmax over groups of entries sharing a target id; max-subtracted.
    Tensor segment_softmax(Tensor scores, std::vector<std::size_t> targets);

    // Reductions / losses.
    Tensor sum(Tensor x);
    Tensor mse_loss(Tensor pred, Tensor target);
    Tensor mae_loss(Tensor pred, Tensor target);

    // Reverse sweep from a scalar loss. Populates grads of every tensor the
    // loss depends on.
    void backward(Tensor loss);

    std::size_t node_count() const { return nodes_.size(); }

    const std::vector<std::size_t>& shape_of(std::size_t id) const;
    const std::vector<double>& values_of(std::size_t id) const;
    const std::vector<double>& grad_of(std::size_t id) const;

private:
    struct Node {
        std::vector<std::size_t> shape;
        std::vector<double> values;
        std::vector<double> grad; // empty until backward reaches it
    };
    struct Record {
        std::vector<std::size_t> inputs;
        std::size_t output;
        std::function<void(Trace&)> pull; // accumulate output grad into inputs
    };

    std::deque<Node> nodes_;
    std::vector<Record> records_;

    Node& node(std::size_t id) { return nodes_[id]; }
    const Node& node(std::size_t id) const { return nodes_[id]; }
    std::vector<double>& ensure_grad(std::size_t id);
    Tensor make_node(std::vector<std::size_t> shape, std::vector<double> values);
    void push_record(std::vector<std::size_t> inputs, std::size_t output,
                     std::function<void(Trace&)> pull);

    static void check_same_shape(const char* op, const Tensor& a, const Tensor& b);
};

std::string shape_str(const std::vector<std::size_t>& shape);

// Max over coordinates of |fd - ad| / max(1, |fd|, |ad|), comparing the
// trace gradient against central finite differences of f. f must be a pure
// function of its input tensor.
using ScalarFn = std::function<Tensor(Trace&, Tensor)>;
double grad_check(const ScalarFn& f, const std::vector<std::size_t>& shape,
                  const std::vector<double>& point, double step = 1e-5);

} // namespace popgraph
