#ifndef CFB_ADAM_HPP
#define CFB_ADAM_HPP

#include <cmath>
#include <stdexcept>

#include "cfb/matrix.hpp"

namespace cfb {

struct AdamState {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long step = 0;
    Vec m;  // first moments
    Vec v;  // second moments

    void init(std::size_t d) {
        m.assign(d, 0.0);
        v.assign(d, 0.0);
        step = 0;
    }

    // One Adam step over [begin, end) only; coordinates outside the range are
    // untouched (their moments too), which keeps inactive heads bit-identical.
    void update_range(Vec& params, const Vec& grad, std::size_t begin, std::size_t end) {
        if (m.size() != params.size() || grad.size() != params.size())
            throw std::invalid_argument("AdamState: dimension mismatch");
        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step + 1));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step + 1));
        for (std::size_t j = begin; j < end; ++j) {
            m[j] = beta1 * m[j] + (1.0 - beta1) * grad[j];
            v[j] = beta2 * v[j] + (1.0 - beta2) * grad[j] * grad[j];
            const double mhat = m[j] / bc1;
            const double vhat = v[j] / bc2;
            params[j] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
    }

    void finish_step() { ++step; }

    void update(Vec& params, const Vec& grad) {
        update_range(params, grad, 0, params.size());
        finish_step();
    }
};

}  // namespace cfb

#endif
