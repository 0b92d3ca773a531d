#include "cfb/bounds.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "cfb/logsumexp.hpp"
#include "cfb/rng.hpp"

namespace cfb {

using nlohmann::json;

void BoundConfig::validate() const {
    if (!(lambda > 0.0)) throw std::invalid_argument("BoundConfig: lambda must be > 0");
    if (!(delta > 0.0) || delta >= 1.0) throw std::invalid_argument("BoundConfig: delta in (0,1)");
    if (!(K >= 0.0)) throw std::invalid_argument("BoundConfig: K must be >= 0");
    if (n_mc_prior < 1 || n_mc_loss < 1) throw std::invalid_argument("BoundConfig: n_mc >= 1");
    if (!(gamma > 0.0) || gamma > 1.0) throw std::invalid_argument("BoundConfig: gamma in (0,1]");
}

std::string BoundReport::to_json_text() const {
    json j;
    j["empirical_term"] = empirical_term;
    j["past_loss_term"] = past_loss_term;
    j["kl_term"] = kl_term;
    j["hoeffding_term"] = hoeffding_term;
    j["confidence_term"] = confidence_term;
    j["disagreement_term"] = disagreement_term;
    j["total_forgetting_bound"] = total_forgetting_bound;
    j["total_bwt_bound"] = total_bwt_bound;
    j["empirical_stderr"] = empirical_stderr;
    j["disagreement_stderr"] = disagreement_stderr;
    return j.dump(2);
}

std::pair<double, double> structural_terms(double lambda, double K, int m, double delta) {
    if (!(lambda > 0.0) || m < 1 || !(delta > 0.0) || delta > 1.0)
        throw std::invalid_argument("structural_terms: domain violation");
    return {lambda * K * K / (8.0 * m), std::log(1.0 / delta) / lambda};
}

DisagreementResult disagreement_mc(const GaussianMeanField& prior_posterior,
                                   const MlpArchitecture& arch,
                                   const std::vector<const TaskDataset*>& past_tests,
                                   const TaskDataset& current_train, const LossFunction& loss,
                                   double lambda, int n_mc_prior, std::uint64_t seed) {
    if (past_tests.empty()) throw std::invalid_argument("no-previous-tasks");
    if (n_mc_prior < 1) throw std::invalid_argument("disagreement_mc: n_mc_prior >= 1");
    if (!(lambda > 0.0)) throw std::invalid_argument("disagreement_mc: lambda must be > 0");

    const std::size_t n_past = past_tests.size();
    const std::size_t current_task = n_past;
    const int n = n_mc_prior;

    // delta_losses[t][k] = lambda * (L(h_k, test_t) - L(h_k, S_T))
    std::vector<Vec> exponents(n_past, Vec(n, 0.0));
    RngStream rng = derive_stream(seed, 0xd15a);
    for (int k = 0; k < n; ++k) {
        const Vec w = reparam_sample(prior_posterior, rng);
        const double cur = evaluate_point(w, arch, current_task, current_train, loss);
        for (std::size_t t = 0; t < n_past; ++t) {
            const double past = evaluate_point(w, arch, t, *past_tests[t], loss);
            exponents[t][k] = lambda * (past - cur);
        }
    }

    const double log_n = std::log(static_cast<double>(n));
    auto total_excluding = [&](int skip) {
        // skip < 0 means use all draws
        const double log_count = skip < 0 ? log_n : std::log(static_cast<double>(n - 1));
        double acc = 0.0;
        for (std::size_t t = 0; t < n_past; ++t) {
            Vec kept;
            kept.reserve(n);
            for (int k = 0; k < n; ++k)
                if (k != skip) kept.push_back(exponents[t][k]);
            acc += log_sum_exp(kept) - log_count;
        }
        return acc / (static_cast<double>(n_past) * lambda);
    };

    DisagreementResult res;
    res.value = total_excluding(-1);
    if (n > 1) {
        // jackknife over hypothesis draws
        double mean_loo = 0.0;
        Vec loo(n);
        for (int k = 0; k < n; ++k) {
            loo[k] = total_excluding(k);
            mean_loo += loo[k];
        }
        mean_loo /= n;
        double var = 0.0;
        for (int k = 0; k < n; ++k) var += (loo[k] - mean_loo) * (loo[k] - mean_loo);
        res.stderr_ = std::sqrt(var * (n - 1.0) / n);
    }
    return res;
}

BoundReport forgetting_bound_assemble(const GaussianMeanField& current_posterior,
                                      const GaussianMeanField& previous_posterior,
                                      const MlpArchitecture& arch,
                                      const TaskDataset& current_train,
                                      const std::vector<const TaskDataset*>& past_tests,
                                      const Vec& past_after_training_losses,
                                      const BoundConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    if (current_posterior.dim() != previous_posterior.dim())
        throw std::invalid_argument("forgetting_bound_assemble: dimension mismatch");
    if (past_tests.empty()) throw std::invalid_argument("no-previous-tasks");
    if (past_after_training_losses.size() != past_tests.size())
        throw std::invalid_argument("vector-length");

    const std::size_t current_task = past_tests.size();
    const LossFunction loss{LossFunction::Kind::zero_one, cfg.K};

    BoundReport rep;

    {
        // empirical loss of the current posterior on S_T, with a per-draw
        // spread for the MC diagnostic
        RngStream rng = derive_stream(seed, 0xe3b);
        Vec draws(cfg.n_mc_loss);
        for (int k = 0; k < cfg.n_mc_loss; ++k) {
            const Vec w = reparam_sample(current_posterior, rng);
            draws[k] = evaluate_point(w, arch, current_task, current_train, loss);
        }
        double mean = 0.0;
        for (double v : draws) mean += v;
        mean /= cfg.n_mc_loss;
        double var = 0.0;
        for (double v : draws) var += (v - mean) * (v - mean);
        rep.empirical_term = mean;
        if (cfg.n_mc_loss > 1)
            rep.empirical_stderr = std::sqrt(var / (cfg.n_mc_loss - 1.0) / cfg.n_mc_loss);
    }

    double past_sum = 0.0;
    for (double v : past_after_training_losses) past_sum += v;
    rep.past_loss_term = past_sum / static_cast<double>(past_after_training_losses.size());

    rep.kl_term = kl_gaussian_diag(current_posterior, previous_posterior) / cfg.lambda;

    const auto [hoeffding, confidence] = structural_terms(
        cfg.lambda, cfg.K, static_cast<int>(current_train.size()), cfg.delta);
    rep.hoeffding_term = hoeffding;
    rep.confidence_term = confidence;

    const DisagreementResult dis = disagreement_mc(previous_posterior, arch, past_tests,
                                                   current_train, loss, cfg.lambda,
                                                   cfg.n_mc_prior, seed ^ 0x9127ULL);
    rep.disagreement_term = dis.value;
    rep.disagreement_stderr = dis.stderr_;

    rep.total_forgetting_bound = rep.empirical_term - rep.past_loss_term + rep.kl_term +
                                 rep.hoeffding_term + rep.confidence_term +
                                 rep.disagreement_term;
    rep.total_bwt_bound = rep.total_forgetting_bound + rep.past_loss_term;
    return rep;
}

}  // namespace cfb
