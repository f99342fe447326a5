#include "poisonlab/optim.hpp"

#include <cmath>

namespace poisonlab {

void Adam::step(const std::vector<Matrix*>& params, const std::vector<Matrix>& grads) {
    require(params.size() == grads.size(), "optimizer step: param/grad count mismatch");
    if (m_.empty()) {
        for (const Matrix* p : params) {
            m_.emplace_back(p->rows(), p->cols(), 0.0);
            v_.emplace_back(p->rows(), p->cols(), 0.0);
        }
    }
    require(params.size() == m_.size(), "optimizer step: param count changed");
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        Matrix& p = *params[i];
        const Matrix& g = grads[i];
        require(p.same_shape(g) && p.same_shape(m_[i]),
                "optimizer step: shape mismatch");
        for (std::size_t e = 0; e < p.size(); ++e) {
            const double gv = g.values()[e];
            double& m = m_[i].values()[e];
            double& v = v_[i].values()[e];
            m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * gv;
            v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * gv * gv;
            const double mhat = m / bc1;
            const double vhat = v / bc2;
            p.values()[e] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.epsilon);
        }
        check_finite(p, "optimizer step");
    }
}

} // namespace poisonlab
