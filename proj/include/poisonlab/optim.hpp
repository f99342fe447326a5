#pragma once

#include <cstddef>
#include <vector>

#include "poisonlab/matrix.hpp"

namespace poisonlab {

// Bias-corrected moment optimizer (Adam). One instance per trained model;
// moment shapes are fixed on the first step.
class Adam {
public:
    struct Config {
        double learning_rate = 1e-3;
        double beta1 = 0.9;
        double beta2 = 0.999;
        double epsilon = 1e-8;
    };

    explicit Adam(Config cfg = {}) : cfg_(cfg) {}

    void step(const std::vector<Matrix*>& params, const std::vector<Matrix>& grads);

    std::size_t steps_taken() const { return t_; }
    const Config& config() const { return cfg_; }

private:
    Config cfg_;
    std::vector<Matrix> m_;
    std::vector<Matrix> v_;
    std::size_t t_ = 0;
};

} // namespace poisonlab
