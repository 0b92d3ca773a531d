#ifndef CFB_VI_HPP
#define CFB_VI_HPP

#include <cstdint>

#include "cfb/adam.hpp"
#include "cfb/gaussian.hpp"
#include "cfb/metrics.hpp"
#include "cfb/mlp.hpp"

namespace cfb {

struct ViTrainConfig {
    double lambda = 250.0;  // Gibbs temperature; KL weight in the objective is 1/lambda
    int epochs = 1;
    int batch_size = 16;
    int n_mc_train = 1;
    AdamState adam;  // template; moments are re-initialized per task
};

// Approximate minimizer of empirical loss + (1/lambda) KL(Q || prior) over
// diagonal Gaussians, via pathwise gradients. The prior is never mutated; the
// result becomes the next task's prior.
GaussianMeanField vi_train_task(const GaussianMeanField& prior, const MlpArchitecture& arch,
                                const TaskDataset& data, std::size_t task,
                                const ViTrainConfig& cfg, std::uint64_t seed);

// Monte-Carlo posterior loss on a dataset; delegates to empirical_loss with
// reparameterized sampling.
double evaluate_posterior(const GaussianMeanField& q, const MlpArchitecture& arch,
                          std::size_t task, const TaskDataset& data, const LossFunction& loss,
                          int n_mc, std::uint64_t seed);

// Fresh VI prior: fan-in initialized means, log_std = ln(init_std) everywhere.
GaussianMeanField vi_init_prior(const MlpArchitecture& arch, double init_std, std::uint64_t seed);

}  // namespace cfb

#endif
