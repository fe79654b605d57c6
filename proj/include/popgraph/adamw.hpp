#pragma once

#include <cstdint>
#include <vector>

#include "popgraph/tensor.hpp"

namespace popgraph {

struct AdamWConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 0.01;
};

// Adam with decoupled weight decay:
//   m <- b1*m + (1-b1)*g,  v <- b2*v + (1-b2)*g^2
//   theta <- theta - lr * (mhat / (sqrt(vhat) + eps) + wd * theta)
// A non-finite gradient rejects the whole step before any state changes.
class AdamW {
public:
    explicit AdamW(AdamWConfig config = {});

    void step(const std::vector<Param*>& params,
              const std::vector<const std::vector<double>*>& grads);

    std::int64_t step_count() const { return t_; }
    const AdamWConfig& config() const { return config_; }

private:
    AdamWConfig config_;
    std::int64_t t_ = 0;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
};

} // namespace popgraph
