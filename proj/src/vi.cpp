#include "cfb/vi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace cfb {

namespace {

// Deterministic Fisher-Yates with our stream.
void shuffle_indices(std::vector<std::size_t>& idx, RngStream& rng) {
    for (std::size_t i = idx.size(); i > 1; --i)
        std::swap(idx[i - 1], idx[rng.below(i)]);
}

}  // namespace

GaussianMeanField vi_train_task(const GaussianMeanField& prior, const MlpArchitecture& arch,
                                const TaskDataset& data, std::size_t task,
                                const ViTrainConfig& cfg, std::uint64_t seed) {
    prior.validate();
    if (prior.dim() != arch.param_count())
        throw std::invalid_argument("vi_train_task: prior dimension mismatch");
    if (!(cfg.lambda > 0.0)) throw std::invalid_argument("vi_train_task: lambda must be > 0");
    if (cfg.n_mc_train < 1) throw std::invalid_argument("vi_train_task: n_mc_train must be >= 1");
    if (data.size() == 0) throw std::invalid_argument("empty-dataset");

    const std::size_t d = arch.param_count();
    const std::size_t trunk = arch.trunk_param_count();
    const auto [hb, he] = arch.head_range(task);
    const double kl_weight = 1.0 / cfg.lambda;

    GaussianMeanField q = prior;
    // optimizer works on the stacked vector [mean; log_std]
    Vec theta(2 * d);
    std::copy(q.mean.begin(), q.mean.end(), theta.begin());
    std::copy(q.log_std.begin(), q.log_std.end(), theta.begin() + d);

    AdamState adam = cfg.adam;
    adam.init(2 * d);

    Vec grad(2 * d, 0.0);
    Vec w = q.mean;  // sampled weights; inactive heads keep the mean value
    Vec eps(d, 0.0);
    Matrix batch_x;
    std::vector<int> batch_y;
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);

    RngStream shuffle_rng = derive_stream(seed, 0x51f, task);
    RngStream sample_rng = derive_stream(seed, 0x5a2, task);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle_indices(order, shuffle_rng);
        for (std::size_t start = 0; start < data.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(start + cfg.batch_size, data.size());
            const std::size_t bs = stop - start;
            batch_x = Matrix(bs, arch.input_dim);
            batch_y.resize(bs);
            for (std::size_t r = 0; r < bs; ++r) {
                const std::size_t src = order[start + r];
                std::copy(data.features.row(src).begin(), data.features.row(src).end(),
                          batch_x.row(r).begin());
                batch_y[r] = data.labels[src];
            }

            std::fill(grad.begin(), grad.end(), 0.0);
            for (std::size_t j = 0; j < d; ++j) q.mean[j] = theta[j];
            for (std::size_t j = 0; j < d; ++j) q.log_std[j] = theta[d + j];

            double loss_acc = 0.0;
            for (int s = 0; s < cfg.n_mc_train; ++s) {
                reparam_sample_range(q, 0, trunk, sample_rng, w, eps);
                reparam_sample_range(q, hb, he, sample_rng, w, eps);
                const BackwardResult back = mlp_backward(w, arch, task, batch_x, batch_y);
                loss_acc += back.loss;
                const double mc_scale = 1.0 / cfg.n_mc_train;
                auto accumulate = [&](std::size_t lo, std::size_t hi) {
                    for (std::size_t j = lo; j < hi; ++j) {
                        grad[j] += mc_scale * back.grad[j];
                        grad[d + j] += mc_scale * back.grad[j] * eps[j] * std::exp(q.log_std[j]);
                    }
                };
                accumulate(0, trunk);
                accumulate(hb, he);
            }
            if (!std::isfinite(loss_acc)) throw std::runtime_error("diverged");

            // closed-form KL gradient, weight 1/lambda
            auto add_kl = [&](std::size_t lo, std::size_t hi) {
                for (std::size_t j = lo; j < hi; ++j) {
                    const double inv_var_p = std::exp(-2.0 * prior.log_std[j]);
                    grad[j] += kl_weight * (q.mean[j] - prior.mean[j]) * inv_var_p;
                    const double var_ratio = std::exp(2.0 * (q.log_std[j] - prior.log_std[j]));
                    grad[d + j] += kl_weight * (var_ratio - 1.0);
                }
            };
            add_kl(0, trunk);
            add_kl(hb, he);

            adam.update_range(theta, grad, 0, trunk);
            adam.update_range(theta, grad, hb, he);
            adam.update_range(theta, grad, d, d + trunk);
            adam.update_range(theta, grad, d + hb, d + he);
            adam.finish_step();
        }
    }

    for (std::size_t j = 0; j < d; ++j) q.mean[j] = theta[j];
    for (std::size_t j = 0; j < d; ++j) q.log_std[j] = theta[d + j];
    return q;
}

double evaluate_posterior(const GaussianMeanField& q, const MlpArchitecture& arch,
                          std::size_t task, const TaskDataset& data, const LossFunction& loss,
                          int n_mc, std::uint64_t seed) {
    bool point = true;
    for (double s : q.log_std) point = point && s == -std::numeric_limits<double>::infinity();
    HypothesisSource source;
    source.is_point = point;
    source.mean_loss = [&](RngStream& rng) {
        const Vec w = reparam_sample(q, rng);
        return evaluate_point(w, arch, task, data, loss);
    };
    return empirical_loss(source, data, loss, n_mc, seed);
}

GaussianMeanField vi_init_prior(const MlpArchitecture& arch, double init_std,
                                std::uint64_t seed) {
    if (!(init_std > 0.0)) throw std::invalid_argument("vi_init_prior: init_std must be > 0");
    GaussianMeanField q;
    q.mean = init_params(arch, seed);
    q.log_std.assign(arch.param_count(), std::log(init_std));
    return q;
}

}  // namespace cfb
