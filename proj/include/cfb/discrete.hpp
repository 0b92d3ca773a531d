#ifndef CFB_DISCRETE_HPP
#define CFB_DISCRETE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "cfb/matrix.hpp"
#include "cfb/rng.hpp"

// Exact computation on finite hypothesis spaces: Gibbs chains, the
// change-of-measure inequality, loss/task covariances, and brute-force
// verification of the oracle forgetting bounds.
namespace cfb::discrete {

struct DiscreteDistribution {
    Vec weights;

    static DiscreteDistribution uniform(std::size_t n);
    static DiscreteDistribution point_mass(std::size_t n, std::size_t at);
    // Nonnegative weights summing to 1 within 1e-12.
    void validate() const;
};

// One task's loss model over the hypothesis grid. Empirical losses are
// resampled as means of m i.i.d. per-datum losses, K * Bernoulli(mean/K) per
// hypothesis, so E[resampled loss] equals the stored expected loss.
struct TaskLossModel {
    int m = 1;
    Vec loss_means;
};

struct DiscreteHypothesisSpace {
    double K = 1.0;
    std::size_t n_hyp = 0;
    std::vector<TaskLossModel> tasks;
    DiscreteDistribution prior;

    void validate() const;
    Vec resample_empirical(std::size_t task, RngStream& rng) const;

    static DiscreteHypothesisSpace from_json_text(const std::string& text);
    static DiscreteHypothesisSpace load(const std::string& path);
    std::string to_json_text() const;
};

struct BoundCheckResult {
    std::string mode;
    double lhs = 0.0;
    double rhs = 0.0;
    double gap = 0.0;        // rhs - lhs
    double mc_stderr = 0.0;  // 0 for exact computations
    bool holds = false;      // gap >= -3 * mc_stderr
    int violations = 0;      // precondition violations across resamples
    bool precondition_violated = false;

    std::string to_json_text() const;
};

// weights[h] proportional to prior[h] * exp(-lambda * losses[h]).
// lambda == 0 returns the prior exactly.
DiscreteDistribution gibbs_posterior(const DiscreteDistribution& prior, const Vec& losses,
                                     double lambda);

// sum q ln(q/p), with 0 ln 0 = 0. Throws "not-absolutely-continuous".
double kl_discrete(const DiscreteDistribution& q, const DiscreteDistribution& p);

// Donsker-Varadhan: lambda (E_rho f - E_pi f) <= KL(rho||pi) + ln E_pi e^{lambda (f - E_pi f)}.
BoundCheckResult change_of_measure_check(const DiscreteDistribution& rho,
                                         const DiscreteDistribution& pi, const Vec& f,
                                         double lambda);

// Exact one-step transfer bound on a finite space:
//   E_rho L_s <= E_rho Lhat_t + KL(rho||pi)/lambda
//               + (1/lambda) ln E_pi e^{lambda (L_s - Lhat_t)}.
// All terms computed exactly; mc_stderr is 0.
BoundCheckResult thm31_exact_check(const DiscreteDistribution& rho,
                                   const DiscreteDistribution& pi, const Vec& L_s,
                                   const Vec& Lhat_t, double lambda);

// E_rho losses + KL(rho||prior)/lambda; the Gibbs posterior minimizes this.
double gibbs_objective(const DiscreteDistribution& prior, const Vec& losses, double lambda,
                       const DiscreteDistribution& rho);

// (1/lambda) ln E_prior exp(lambda (L_s - Lhat_t)); the log-MGF disagreement term.
double disagreement_exact(const DiscreteDistribution& prior, const Vec& L_s, const Vec& Lhat_t,
                          double lambda);

// cov_{h~prior}(exp(-lambda Lhat_s), exp(-lambda Lhat_t)), exact two-pass.
double loss_covariance(const DiscreteDistribution& prior, const Vec& Lhat_s, const Vec& Lhat_t,
                       double lambda);

// cov_{h~prior}(exp(-lambda_T Lhat_i), exp(-sum_{j!=i} lambda_j Lhat_j)).
// `task` is a zero-based index into `tables`; lambdas has one entry per task.
double task_covariance(const DiscreteDistribution& prior, const std::vector<Vec>& tables,
                       std::size_t task, const Vec& lambdas);

// Iterates Q_{1:i} proportional to Q_{1:i-1} exp(-lambda_i Lhat_i); equals the
// pooled Gibbs posterior by the unraveling argument.
DiscreteDistribution sequential_gibbs(const DiscreteDistribution& prior,
                                      const std::vector<Vec>& tables, const Vec& lambdas);

enum class OracleMode { cor42, thm47, highcov, gibbs_ratio };

const char* oracle_mode_name(OracleMode mode);
OracleMode oracle_mode_from_name(const std::string& name);

struct OracleConfig {
    Vec lambdas;          // per task
    std::size_t task = 0; // task i under study (thm47/highcov/gibbs_ratio)
    std::size_t source_task = 0;  // cor42
    std::size_t target_task = 1;  // cor42
    double c = 0.1;               // highcov slack
};

// Estimates the bound's LHS expectation by resampling training sets and
// computes the RHS exactly per mode. Covariance preconditions are checked on
// every resample; violations are counted, never dropped.
BoundCheckResult oracle_bound_check(const DiscreteHypothesisSpace& space, OracleMode mode,
                                    const OracleConfig& cfg, int n_resample, std::uint64_t seed);

// Frequency check of the Hoeffding log-MGF concentration bound:
// Pr[ln E_prior e^{t (Lhat - L)} < t^2 K^2 / (8m) + ln(1/delta)] >= 1 - delta.
// lhs = observed violation rate, rhs = delta.
BoundCheckResult hoeffding_mgf_check(const DiscreteHypothesisSpace& space, std::size_t task,
                                     double t, int n_resample, std::uint64_t seed, double delta);

}  // namespace cfb::discrete

#endif
