#include "cfb/ewc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "cfb/rng.hpp"

namespace cfb {

void EwcState::validate() const {
    if (weights.size() != fisher_diag.size())
        throw std::invalid_argument("EwcState: weights/fisher size mismatch");
    for (double f : fisher_diag)
        if (!(f >= 0.0)) throw std::invalid_argument("EwcState: negative fisher entry");
    if (!(lambda_ewc >= 0.0)) throw std::invalid_argument("EwcState: negative lambda_ewc");
    if (!(sigma2 > 0.0)) throw std::invalid_argument("EwcState: sigma2 must be > 0");
}

EwcState ewc_init(const MlpArchitecture& arch, double lambda_ewc, double sigma2,
                  std::uint64_t seed) {
    EwcState s;
    s.weights = init_params(arch, seed);
    s.fisher_diag.assign(s.weights.size(), 0.0);
    s.lambda_ewc = lambda_ewc;
    s.sigma2 = sigma2;
    s.validate();
    return s;
}

EwcState ewc_train_task(const EwcState& state, const MlpArchitecture& arch,
                        const TaskDataset& data, std::size_t task, const EwcTrainConfig& cfg,
                        std::uint64_t seed) {
    state.validate();
    if (state.weights.size() != arch.param_count())
        throw std::invalid_argument("ewc_train_task: dimension mismatch");
    if (data.size() == 0) throw std::invalid_argument("empty-dataset");

    const std::size_t trunk = arch.trunk_param_count();
    const auto [hb, he] = arch.head_range(task);
    const Vec& anchor = state.weights;

    Vec w = state.weights;
    AdamState adam = cfg.adam;
    adam.init(w.size());

    Matrix batch_x;
    std::vector<int> batch_y;
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    RngStream shuffle_rng = derive_stream(seed, 0xe6c, task);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[shuffle_rng.below(i)]);
        for (std::size_t start = 0; start < data.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(start + static_cast<std::size_t>(cfg.batch_size),
                                              data.size());
            const std::size_t bs = stop - start;
            batch_x = Matrix(bs, arch.input_dim);
            batch_y.resize(bs);
            for (std::size_t r = 0; r < bs; ++r) {
                const std::size_t src = order[start + r];
                std::copy(data.features.row(src).begin(), data.features.row(src).end(),
                          batch_x.row(r).begin());
                batch_y[r] = data.labels[src];
            }

            BackwardResult back = mlp_backward(w, arch, task, batch_x, batch_y);
            if (!std::isfinite(back.loss)) throw std::runtime_error("diverged");
            auto add_penalty = [&](std::size_t lo, std::size_t hi) {
                for (std::size_t j = lo; j < hi; ++j)
                    back.grad[j] += state.lambda_ewc * state.fisher_diag[j] * (w[j] - anchor[j]);
            };
            add_penalty(0, trunk);
            add_penalty(hb, he);

            adam.update_range(w, back.grad, 0, trunk);
            adam.update_range(w, back.grad, hb, he);
            adam.finish_step();
        }
    }

    EwcState out = state;
    const int n_fisher = std::min<int>(cfg.fisher_samples, static_cast<int>(data.size()));
    const Vec fisher = fisher_diagonal(w, arch, task, data, n_fisher, seed ^ 0xf15eULL);
    for (std::size_t j = 0; j < out.fisher_diag.size(); ++j) out.fisher_diag[j] += fisher[j];
    out.weights = std::move(w);
    return out;
}

GaussianMeanField ewc_posterior(const EwcState& state) {
    state.validate();
    return GaussianMeanField::isotropic(state.weights, state.sigma2);
}

}  // namespace cfb
