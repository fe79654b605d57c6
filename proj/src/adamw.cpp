#include "popgraph/adamw.hpp"

#include <cmath>
#include <string>

#include "popgraph/errors.hpp"

namespace popgraph {

AdamW::AdamW(AdamWConfig config) : config_(config) {
    if (config_.learning_rate <= 0.0) throw ValidationError("adamw: learning_rate must be positive");
    if (config_.beta1 < 0.0 || config_.beta1 >= 1.0 || config_.beta2 < 0.0 || config_.beta2 >= 1.0)
        throw ValidationError("adamw: betas must lie in [0, 1)");
    if (config_.epsilon <= 0.0) throw ValidationError("adamw: epsilon must be positive");
    if (config_.weight_decay < 0.0) throw ValidationError("adamw: weight_decay must be nonnegative");
}

void AdamW::step(const std::vector<Param*>& params,
                 const std::vector<const std::vector<double>*>& grads) {
    if (params.size() != grads.size())
        throw ValidationError("adamw: " + std::to_string(params.size()) + " params but " +
                              std::to_string(grads.size()) + " gradients");
    if (m_.empty()) {
        m_.resize(params.size());
        v_.resize(params.size());
        for (std::size_t p = 0; p < params.size(); ++p) {
            m_[p].assign(params[p]->size(), 0.0);
            v_[p].assign(params[p]->size(), 0.0);
        }
    }
    if (m_.size() != params.size())
        throw ValidationError("adamw: parameter count changed between steps");
    // Reject the whole step before touching any state.
    for (std::size_t p = 0; p < params.size(); ++p) {
        if (m_[p].size() != params[p]->size())
            throw ValidationError("adamw: parameter " + params[p]->name +
                                  " changed size between steps");
        if (grads[p]->size() != params[p]->size())
            throw ValidationError("adamw: gradient size mismatch for parameter " + params[p]->name);
        for (const double g : *grads[p])
            if (!std::isfinite(g))
                throw NumericError("adamw: non-finite gradient for parameter " + params[p]->name +
                                   " at step " + std::to_string(t_ + 1) + "; step rejected");
    }
    t_ += 1;
    const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    for (std::size_t p = 0; p < params.size(); ++p) {
        auto& theta = params[p]->value;
        const auto& g = *grads[p];
        auto& m = m_[p];
        auto& v = v_[p];
        for (std::size_t i = 0; i < theta.size(); ++i) {
            m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g[i];
            v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            theta[i] -= config_.learning_rate *
                        (mhat / (std::sqrt(vhat) + config_.epsilon) + config_.weight_decay * theta[i]);
        }
    }
}

} // namespace popgraph
