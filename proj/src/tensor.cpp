#include "popgraph/tensor.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <utility>

#include "popgraph/errors.hpp"

namespace popgraph {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

std::size_t product(const std::vector<std::size_t>& shape) {
    std::size_t p = 1;
    for (const std::size_t d : shape) p *= d;
    return p;
}

std::size_t dim_rows(const std::vector<std::size_t>& shape) {
    return shape.empty() ? 1 : shape[0];
}

std::size_t dim_cols(const std::vector<std::size_t>& shape) {
    if (shape.size() <= 1) return 1;
    std::size_t c = 1;
    for (std::size_t d = 1; d < shape.size(); ++d) c *= shape[d];
    return c;
}

} // namespace

std::string shape_str(const std::vector<std::size_t>& shape) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << " x ";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

// ----- Tensor accessors -----------------------------------------------------

const std::vector<std::size_t>& Tensor::shape() const { return trace_->shape_of(id_); }
const std::vector<double>& Tensor::values() const { return trace_->values_of(id_); }
const std::vector<double>& Tensor::grad() const { return trace_->grad_of(id_); }
std::size_t Tensor::size() const { return values().size(); }
std::size_t Tensor::rows() const { return dim_rows(shape()); }
std::size_t Tensor::cols() const { return dim_cols(shape()); }

// ----- Trace plumbing --------------------------------------------------------

const std::vector<std::size_t>& Trace::shape_of(std::size_t id) const { return node(id).shape; }
const std::vector<double>& Trace::values_of(std::size_t id) const { return node(id).values; }

const std::vector<double>& Trace::grad_of(std::size_t id) const {
    const Node& n = node(id);
    if (n.grad.empty() && !n.values.empty())
        throw Error("tensor gradient not populated; run backward() over a loss that reaches it");
    return n.grad;
}

std::vector<double>& Trace::ensure_grad(std::size_t id) {
    Node& n = node(id);
    if (n.grad.empty()) n.grad.assign(n.values.size(), 0.0);
    return n.grad;
}

Tensor Trace::make_node(std::vector<std::size_t> shape, std::vector<double> values) {
    if (product(shape) != values.size())
        throw ShapeError("tensor: values length " + std::to_string(values.size()) +
                         " does not match shape " + shape_str(shape));
    nodes_.push_back(Node{std::move(shape), std::move(values), {}});
    return Tensor(this, nodes_.size() - 1);
}

void Trace::push_record(std::vector<std::size_t> inputs, std::size_t output,
                        std::function<void(Trace&)> pull) {
    records_.push_back(Record{std::move(inputs), output, std::move(pull)});
}

void Trace::check_same_shape(const char* op, const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape())
        throw ShapeError(std::string(op) + ": shape mismatch: " + shape_str(a.shape()) +
                         " vs " + shape_str(b.shape()));
}

// ----- Leaves ----------------------------------------------------------------

Tensor Trace::tensor(std::vector<std::size_t> shape, std::vector<double> values) {
    return make_node(std::move(shape), std::move(values));
}

Tensor Trace::scalar(double v) { return make_node({1}, {v}); }

Tensor Trace::zeros(std::vector<std::size_t> shape) {
    const std::size_t n = product(shape);
    return make_node(std::move(shape), std::vector<double>(n, 0.0));
}

Tensor Trace::param(const Param& p) { return make_node(p.shape, p.value); }

// ----- Linear algebra --------------------------------------------------------

Tensor Trace::matmul(Tensor a, Tensor b) {
    const std::size_t m = a.rows(), k = a.cols();
    const std::size_t k2 = b.rows(), n = b.cols();
    if (k != k2)
        throw ShapeError("matmul: inner dimensions disagree: " + shape_str(a.shape()) +
                         " vs " + shape_str(b.shape()));
    std::vector<double> out(m * n, 0.0);
    {
        ConstMap am(a.values().data(), m, k);
        ConstMap bm(b.values().data(), k, n);
        MutMap om(out.data(), m, n);
        om.noalias() = am * bm;
    }
    Tensor c = make_node({m, n}, std::move(out));
    const std::size_t ai = a.id(), bi = b.id(), ci = c.id();
    push_record({ai, bi}, ci, [ai, bi, ci, m, k, n](Trace& tr) {
        ConstMap g(tr.node(ci).grad.data(), m, n);
        ConstMap am(tr.node(ai).values.data(), m, k);
        ConstMap bm(tr.node(bi).values.data(), k, n);
        MutMap ga(tr.ensure_grad(ai).data(), m, k);
        MutMap gb(tr.ensure_grad(bi).data(), k, n);
        ga.noalias() += g * bm.transpose();
        gb.noalias() += am.transpose() * g;
    });
    return c;
}

Tensor Trace::spmm(const SparseMatrix& s, Tensor d) {
    const std::size_t k = d.rows(), n = d.cols();
    if (s.cols() != k)
        throw ShapeError("spmm: sparse is " + std::to_string(s.rows()) + "x" +
                         std::to_string(s.cols()) + " but dense is " + shape_str(d.shape()));
    const std::size_t m = s.rows();
    std::vector<double> out(m * n, 0.0);
    const auto& off = s.row_offsets();
    const auto& col = s.col_indices();
    const auto& val = s.values();
    const double* dv = d.values().data();
    for (std::size_t r = 0; r < m; ++r) {
        double* orow = out.data() + r * n;
        for (std::size_t e = off[r]; e < off[r + 1]; ++e) {
            const double v = val[e];
            const double* drow = dv + col[e] * n;
            for (std::size_t c = 0; c < n; ++c) orow[c] += v * drow[c];
        }
    }
    Tensor c = make_node({m, n}, std::move(out));
    const std::size_t di = d.id(), ci = c.id();
    // Gradients flow through the dense operand only; the matrix is constant.
    push_record({di}, ci, [&s, di, ci, m, n](Trace& tr) {
        const auto& off2 = s.row_offsets();
        const auto& col2 = s.col_indices();
        const auto& val2 = s.values();
        const double* g = tr.node(ci).grad.data();
        double* gd = tr.ensure_grad(di).data();
        for (std::size_t r = 0; r < m; ++r) {
            const double* grow = g + r * n;
            for (std::size_t e = off2[r]; e < off2[r + 1]; ++e) {
                const double v = val2[e];
                double* gdrow = gd + col2[e] * n;
                for (std::size_t c = 0; c < n; ++c) gdrow[c] += v * grow[c];
            }
        }
    });
    return c;
}

Tensor Trace::spmm_weighted(const SparseMatrix& pattern, Tensor edge_values, Tensor d) {
    const std::size_t k = d.rows(), n = d.cols();
    if (pattern.cols() != k)
        throw ShapeError("spmm_weighted: pattern is " + std::to_string(pattern.rows()) + "x" +
                         std::to_string(pattern.cols()) + " but dense is " + shape_str(d.shape()));
    if (edge_values.size() != pattern.nnz())
        throw ShapeError("spmm_weighted: " + std::to_string(edge_values.size()) +
                         " edge values for " + std::to_string(pattern.nnz()) + " pattern entries");
    const std::size_t m = pattern.rows();
    std::vector<double> out(m * n, 0.0);
    const auto& off = pattern.row_offsets();
    const auto& col = pattern.col_indices();
    const double* ev = edge_values.values().data();
    const double* dv = d.values().data();
    for (std::size_t r = 0; r < m; ++r) {
        double* orow = out.data() + r * n;
        for (std::size_t e = off[r]; e < off[r + 1]; ++e) {
            const double v = ev[e];
            const double* drow = dv + col[e] * n;
            for (std::size_t c = 0; c < n; ++c) orow[c] += v * drow[c];
        }
    }
    Tensor c = make_node({m, n}, std::move(out));
    const std::size_t vi = edge_values.id(), di = d.id(), ci = c.id();
    push_record({vi, di}, ci, [&pattern, vi, di, ci, m, n](Trace& tr) {
        const auto& off2 = pattern.row_offsets();
        const auto& col2 = pattern.col_indices();
        const double* g = tr.node(ci).grad.data();
        const double* ev2 = tr.node(vi).values.data();
        const double* dv2 = tr.node(di).values.data();
        double* gv = tr.ensure_grad(vi).data();
        double* gd = tr.ensure_grad(di).data();
        for (std::size_t r = 0; r < m; ++r) {
            const double* grow = g + r * n;
            for (std::size_t e = off2[r]; e < off2[r + 1]; ++e) {
                const double* drow = dv2 + col2[e] * n;
                double* gdrow = gd + col2[e] * n;
                double dot = 0.0;
                const double v = ev2[e];
                for (std::size_t c = 0; c < n; ++c) {
                    dot += grow[c] * drow[c];
                    gdrow[c] += v * grow[c];
                }
                gv[e] += dot;
            }
        }
    });
    return c;
}

// ----- Elementwise -----------------------------------------------------------

Tensor Trace::relu(Tensor x) { return leaky_relu(x, 0.0); }

Tensor Trace::leaky_relu(Tensor x, double slope) {
    std::vector<double> out(x.size());
    const auto& v = x.values();
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] > 0.0 ? v[i] : slope * v[i];
    Tensor c = make_node(x.shape(), std::move(out));
    const std::size_t xi = x.id(), ci = c.id();
    // Subgradient at exactly 0 is 0.
    push_record({xi}, ci, [xi, ci, slope](Trace& tr) {
        const auto& xv = tr.node(xi).values;
        const auto& g = tr.node(ci).grad;
        auto& gx = tr.ensure_grad(xi);
        for (std::size_t i = 0; i < xv.size(); ++i) {
            if (xv[i] > 0.0)
                gx[i] += g[i];
            else if (xv[i] < 0.0)
                gx[i] += slope * g[i];
        }
    });
    return c;
}

Tensor Trace::add(Tensor a, Tensor b) {
    check_same_shape("add", a, b);
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] + b.values()[i];
    Tensor c = make_node(a.shape(), std::move(out));
    const std::size_t ai = a.id(), bi = b.id(), ci = c.id();
    push_record({ai, bi}, ci, [ai, bi, ci](Trace& tr) {
        const auto& g = tr.node(ci).grad;
        auto& ga = tr.ensure_grad(ai);
        auto& gb = tr.ensure_grad(bi);
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga[i] += g[i];
            gb[i] += g[i];
        }
    });
    return c;
}

Tensor Trace::sub(Tensor a, Tensor b) {
    check_same_shape("sub", a, b);
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] - b.values()[i];
    Tensor c = make_node(a.shape(), std::move(out));
    const std::size_t ai = a.id(), bi = b.id(), ci = c.id();
    push_record({ai, bi}, ci, [ai, bi, ci](Trace& tr) {
        const auto& g = tr.node(ci).grad;
        auto& ga = tr.ensure_grad(ai);
        auto& gb = tr.ensure_grad(bi);
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga[i] += g[i];
            gb[i] -= g[i];
        }
    });
    return c;
}

Tensor Trace::mul(Tensor a, Tensor b) {
    check_same_shape("mul", a, b);
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] * b.values()[i];
    Tensor c = make_node(a.shape(), std::move(out));
    const std::size_t ai = a.id(), bi = b.id(), ci = c.id();
    push_record({ai, bi}, ci, [ai, bi, ci](Trace& tr) {
        const auto& g = tr.node(ci).grad;
        const auto& av = tr.node(ai).values;
        const auto& bv = tr.node(bi).values;
        auto& ga = tr.ensure_grad(ai);
        auto& gb = tr.ensure_grad(bi);
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga[i] += g[i] * bv[i];
            gb[i] += g[i] * av[i];
        }
    });
    return c;
}

Tensor Trace::scale(Tensor x, double cfac) {
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = cfac * x.values()[i];
    Tensor c = make_node(x.shape(), std::move(out));
    const std::size_t xi = x.id(), ci = c.id();
    push_record({xi}, ci, [xi, ci, cfac](Trace& tr) {
        const auto& g = tr.node(ci).grad;
        auto& gx = tr.ensure_grad(xi);
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += cfac * g[i];
    });
    return c;
}

Tensor Trace::add_rowvec(Tensor x, Tensor row) {
    const std::size_t n = x.rows(), f = x.cols();
    if (row.size() != f)
        throw ShapeError("add_rowvec: row vector " + shape_str(row.shape()) +
                         " does not match matrix " + shape_str(x.shape()));
    std::vector<double> out(x.size());
    const auto& xv = x.values();
    const auto& rv = row.values();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < f; ++j) out[i * f + j] = xv[i * f + j] + rv[j];
    Tensor c = make_node(x.shape(), std::move(out));
    const std::size_t xi = x.id(), ri = row.id(), ci = c.id();
    push_record({xi, ri}, ci, [xi, ri, ci, n, f](Trace& tr) {
        const auto& g = tr.node(ci).grad;
        auto& gx = tr.ensure_grad(xi);
        auto& gr = tr.ensure_grad(ri);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < f; ++j) {
                gx[i * f + j] += g[i * f + j];
                gr[j] += g[i * f + j];
            }
    });
    return c;
}

Tensor Trace::concat_columns(Tensor a, Tensor b) {
    const std::size_t n = a.rows(), fa = a.cols(), fb = b.cols();
    if (b.rows() != n)
        throw ShapeError("concat_columns: row counts disagree: " + shape_str(a.shape()) +
                         " vs " + shape_str(b.shape()));
    std::vector<double> out(n * (fa + fb));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < fa; ++j) out[i * (fa + fb) + j] = a.values()[i * fa + j];
        for (std::size_t j = 0; j < fb; ++j) out[i * (fa + fb) + fa + j] = b.values()[i * fb + j];
    }
    Tensor c = make_node({n, fa + fb}, std::move(out));
    const std::size_t ai = a.id(), bi = b.id(), ci = c.id();
    push_record({ai, bi}, ci, [ai, bi, ci, n, fa, fb](Trace& tr) {
        const auto& g = tr.node(ci).grad;
        auto& ga = tr.ensure_grad(ai);
        auto& gb = tr.ensure_grad(bi);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < fa; ++j) ga[i * fa + j] += g[i * (fa + fb) + j];
            for (std::size_t j = 0; j < fb; ++j) gb[i * fb + j] += g[i * (fa + fb) + fa + j];
        }
    });
    return c;
}

Tensor Trace::row_mean(Tensor x) {
    const std::size_t n = x.rows(), f = x.cols();
    if (f == 0) throw ShapeError("row_mean: zero-width tensor " + shape_str(x.shape()));
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < f; ++j) s += x.values()[i * f + j];
        out[i] = s / static_cast<double>(f);
    }
    Tensor c = make_node({n, 1}, std::move(out));
    const std::size_t xi = x.id(), ci = c.id();
    push_record({xi}, ci, [xi, ci, n, f](Trace& tr) {
        const auto& g = tr.node(ci).grad;
        auto& gx = tr.ensure_grad(xi);
        const double inv = 1.0 / static_cast<double>(f);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < f; ++j) gx[i * f + j] += g[i] * inv;
    });
    return c;
}

Tensor Trace::gather_rows(Tensor x, std::vector<std::size_t> indices) {
    const std::size_t n = x.rows(), f = x.cols();
    for (const std::size_t i : indices)
        if (i >= n)
            throw ValidationError("gather_rows: index " + std::to_string(i) + " out of range for " +
                                  std::to_string(n) + " rows");
    std::vector<double> out(indices.size() * f);
    for (std::size_t r = 0; r < indices.size(); ++r)
        for (std::size_t j = 0; j < f; ++j) out[r * f + j] = x.values()[indices[r] * f + j];
    Tensor c = make_node({indices.size(), f}, std::move(out));
    const std::size_t xi = x.id(), ci = c.id();
    push_record({xi}, ci, [xi, ci, f, idx = std::move(indices)](Trace& tr) {
        const auto& g = tr.node(ci).grad;
        auto& gx = tr.ensure_grad(xi);
        for (std::size_t r = 0; r < idx.size(); ++r)
            for (std::size_t j = 0; j < f; ++j) gx[idx[r] * f + j] += g[r * f + j];
    });
    return c;
}

Tensor Trace::segment_softmax(Tensor scores, std::vector<std::size_t> targets) {
    if (scores.size() != targets.size())
        throw ShapeError("segment_softmax: " + std::to_string(scores.size()) + " scores for " +
                         std::to_string(targets.size()) + " targets");
    const std::size_t nnz = targets.size();
    std::size_t groups = 0;
    for (const std::size_t t : targets) groups = std::max(groups, t + 1);
    std::vector<double> gmax(groups, -std::numeric_limits<double>::infinity());
    const auto& sv = scores.values();
    for (std::size_t e = 0; e < nnz; ++e) gmax[targets[e]] = std::max(gmax[targets[e]], sv[e]);
    std::vector<double> gsum(groups, 0.0);
    std::vector<double> out(nnz);
    for (std::size_t e = 0; e < nnz; ++e) {
        out[e] = std::exp(sv[e] - gmax[targets[e]]);
        gsum[targets[e]] += out[e];
    }
    for (std::size_t e = 0; e < nnz; ++e) out[e] /= gsum[targets[e]];
    Tensor c = make_node(scores.shape(), std::move(out));
    const std::size_t si = scores.id(), ci = c.id();
    push_record({si}, ci, [si, ci, groups, tg = std::move(targets)](Trace& tr) {
        const auto& alpha = tr.node(ci).values;
        const auto& g = tr.node(ci).grad;
        auto& gs = tr.ensure_grad(si);
        std::vector<double> gdot(groups, 0.0);
        for (std::size_t e = 0; e < tg.size(); ++e) gdot[tg[e]] += g[e] * alpha[e];
        for (std::size_t e = 0; e < tg.size(); ++e) gs[e] += alpha[e] * (g[e] - gdot[tg[e]]);
    });
    return c;
}

// ----- Reductions and losses -------------------------------------------------

Tensor Trace::sum(Tensor x) {
    const double s = std::accumulate(x.values().begin(), x.values().end(), 0.0);
    Tensor c = make_node({1}, {s});
    const std::size_t xi = x.id(), ci = c.id();
    push_record({xi}, ci, [xi, ci](Trace& tr) {
        const double g = tr.node(ci).grad[0];
        auto& gx = tr.ensure_grad(xi);
        for (double& v : gx) v += g;
    });
    return c;
}

Tensor Trace::mse_loss(Tensor pred, Tensor target) {
    if (pred.size() != target.size())
        throw ShapeError("mse_loss: length mismatch: " + std::to_string(pred.size()) + " vs " +
                         std::to_string(target.size()));
    const std::size_t n = pred.size();
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = pred.values()[i] - target.values()[i];
        s += d * d;
    }
    Tensor c = make_node({1}, {s / static_cast<double>(n)});
    const std::size_t pi = pred.id(), ti = target.id(), ci = c.id();
    push_record({pi, ti}, ci, [pi, ti, ci, n](Trace& tr) {
        const double g = tr.node(ci).grad[0];
        const auto& pv = tr.node(pi).values;
        const auto& tv = tr.node(ti).values;
        auto& gp = tr.ensure_grad(pi);
        auto& gt = tr.ensure_grad(ti);
        const double c2 = 2.0 / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double d = c2 * (pv[i] - tv[i]) * g;
            gp[i] += d;
            gt[i] -= d;
        }
    });
    return c;
}

Tensor Trace::mae_loss(Tensor pred, Tensor target) {
    if (pred.size() != target.size())
        throw ShapeError("mae_loss: length mismatch: " + std::to_string(pred.size()) + " vs " +
                         std::to_string(target.size()));
    const std::size_t n = pred.size();
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::abs(pred.values()[i] - target.values()[i]);
    Tensor c = make_node({1}, {s / static_cast<double>(n)});
    const std::size_t pi = pred.id(), ti = target.id(), ci = c.id();
    push_record({pi, ti}, ci, [pi, ti, ci, n](Trace& tr) {
        const double g = tr.node(ci).grad[0];
        const auto& pv = tr.node(pi).values;
        const auto& tv = tr.node(ti).values;
        auto& gp = tr.ensure_grad(pi);
        auto& gt = tr.ensure_grad(ti);
        const double inv = g / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double d = pv[i] - tv[i];
            const double sgn = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
            gp[i] += sgn * inv;
            gt[i] -= sgn * inv;
        }
    });
    return c;
}

// ----- Backward ---------------------------------------------------------------

void Trace::backward(Tensor loss) {
    if (loss.size() != 1)
        throw Error("backward: loss must be scalar, got shape " + shape_str(loss.shape()));
    for (Node& n : nodes_) n.grad.clear();
    std::vector<char> reachable(nodes_.size(), 0);
    reachable[loss.id()] = 1;
    ensure_grad(loss.id())[0] = 1.0;
    for (auto it = records_.rbegin(); it != records_.rend(); ++it) {
        if (!reachable[it->output]) continue;
        for (const std::size_t in : it->inputs) {
            reachable[in] = 1;
            ensure_grad(in);
        }
        it->pull(*this);
    }
}

// ----- Finite-difference check -------------------------------------------------

double grad_check(const ScalarFn& f, const std::vector<std::size_t>& shape,
                  const std::vector<double>& point, double step) {
    std::vector<double> ad;
    {
        Trace tr;
        Tensor x = tr.tensor(shape, point);
        Tensor loss = f(tr, x);
        if (loss.size() != 1) throw Error("grad_check: function must be scalar-valued");
        tr.backward(loss);
        ad = x.grad();
    }
    auto eval = [&](const std::vector<double>& p) {
        Trace tr;
        Tensor x = tr.tensor(shape, p);
        return f(tr, x).values()[0];
    };
    double worst = 0.0;
    std::vector<double> p = point;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double keep = p[i];
        p[i] = keep + step;
        const double hi = eval(p);
        p[i] = keep - step;
        const double lo = eval(p);
        p[i] = keep;
        const double fd = (hi - lo) / (2.0 * step);
        const double err = std::abs(fd - ad[i]) / std::max({1.0, std::abs(fd), std::abs(ad[i])});
        worst = std::max(worst, err);
    }
    return worst;
}

} // namespace popgraph
