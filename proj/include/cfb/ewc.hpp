#ifndef CFB_EWC_HPP
#define CFB_EWC_HPP

#include <cstdint>

#include "cfb/adam.hpp"
#include "cfb/gaussian.hpp"
#include "cfb/mlp.hpp"

namespace cfb {

struct EwcState {
    Vec weights;
    Vec fisher_diag;      // accumulated additively over seen tasks
    double lambda_ewc = 40.0;
    double sigma2 = 1e-2;  // noise variance for posterior construction

    void validate() const;
};

struct EwcTrainConfig {
    int epochs = 1;
    int batch_size = 16;
    int fisher_samples = 200;
    AdamState adam;
};

EwcState ewc_init(const MlpArchitecture& arch, double lambda_ewc, double sigma2,
                  std::uint64_t seed);

// Minimizes cross-entropy + (lambda_ewc/2) sum_j F_j (w_j - w_prev_j)^2, then
// accumulates the new task's Fisher diagonal and re-anchors at the trained
// weights.
EwcState ewc_train_task(const EwcState& state, const MlpArchitecture& arch,
                        const TaskDataset& data, std::size_t task, const EwcTrainConfig& cfg,
                        std::uint64_t seed);

// N(weights, sigma^2 I) as a mean-field Gaussian. The KL between successive
// EWC posteriors equals kl_isotropic_shift exactly.
GaussianMeanField ewc_posterior(const EwcState& state);

}  // namespace cfb

#endif
