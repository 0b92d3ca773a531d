#ifndef CFB_BOUNDS_HPP
#define CFB_BOUNDS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "cfb/gaussian.hpp"
#include "cfb/metrics.hpp"
#include "cfb/mlp.hpp"

namespace cfb {

struct BoundConfig {
    // near the structural-terms optimum sqrt(8 m ln(1/delta)) for m = 3000
    double lambda = 250.0;
    double delta = 0.05;
    double K = 1.0;
    int n_mc_prior = 30;  // hypothesis draws for the disagreement term
    int n_mc_loss = 30;   // hypothesis draws for posterior loss estimates
    double gamma = 0.95;  // discount for the discounted metrics

    void validate() const;
};

// Itemized terms of the forgetting bound. The totals satisfy
//   total_forgetting_bound = empirical - past_loss + kl + hoeffding
//                            + confidence + disagreement
//   total_bwt_bound        = total_forgetting_bound + past_loss_term.
struct BoundReport {
    double empirical_term = 0.0;
    double past_loss_term = 0.0;
    double kl_term = 0.0;
    double hoeffding_term = 0.0;
    double confidence_term = 0.0;
    double disagreement_term = 0.0;
    double total_forgetting_bound = 0.0;
    double total_bwt_bound = 0.0;
    // MC diagnostics (0 where exact)
    double empirical_stderr = 0.0;
    double disagreement_stderr = 0.0;

    std::string to_json_text() const;
};

// hoeffding = lambda K^2 / (8 m); confidence = ln(1/delta) / lambda.
std::pair<double, double> structural_terms(double lambda, double K, int m, double delta);

struct DisagreementResult {
    double value = 0.0;
    double stderr_ = 0.0;  // jackknife over the hypothesis draws
};

// (1/((T-1) lambda)) sum_t ln (1/n) sum_h exp(lambda (L(h, test_t) - L(h, S_T))),
// with n = n_mc_prior hypotheses drawn once from the previous posterior and
// reused across all past tasks. past_tests[t] is evaluated with head t; the
// current training set with head past_tests.size().
DisagreementResult disagreement_mc(const GaussianMeanField& prior_posterior,
                                   const MlpArchitecture& arch,
                                   const std::vector<const TaskDataset*>& past_tests,
                                   const TaskDataset& current_train, const LossFunction& loss,
                                   double lambda, int n_mc_prior, std::uint64_t seed);

BoundReport forgetting_bound_assemble(const GaussianMeanField& current_posterior,
                                      const GaussianMeanField& previous_posterior,
                                      const MlpArchitecture& arch,
                                      const TaskDataset& current_train,
                                      const std::vector<const TaskDataset*>& past_tests,
                                      const Vec& past_after_training_losses,
                                      const BoundConfig& cfg, std::uint64_t seed);

}  // namespace cfb

#endif
