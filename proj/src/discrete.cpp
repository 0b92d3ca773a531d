#include "cfb/discrete.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "cfb/kernels.hpp"
#include "cfb/logsumexp.hpp"

namespace cfb::discrete {

using nlohmann::json;

DiscreteDistribution DiscreteDistribution::uniform(std::size_t n) {
    if (n == 0) throw std::invalid_argument("uniform: empty space");
    return {Vec(n, 1.0 / static_cast<double>(n))};
}

DiscreteDistribution DiscreteDistribution::point_mass(std::size_t n, std::size_t at) {
    if (at >= n) throw std::invalid_argument("point_mass: index out of range");
    DiscreteDistribution d{Vec(n, 0.0)};
    d.weights[at] = 1.0;
    return d;
}

void DiscreteDistribution::validate() const {
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw std::invalid_argument("DiscreteDistribution: negative weight");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("DiscreteDistribution: weights must sum to 1");
}

void DiscreteHypothesisSpace::validate() const {
    if (n_hyp == 0) throw std::invalid_argument("DiscreteHypothesisSpace: empty");
    if (K < 0.0) throw std::invalid_argument("DiscreteHypothesisSpace: negative K");
    if (prior.weights.size() != n_hyp)
        throw std::invalid_argument("DiscreteHypothesisSpace: prior size mismatch");
    prior.validate();
    for (const TaskLossModel& t : tasks) {
        if (t.m < 1) throw std::invalid_argument("DiscreteHypothesisSpace: m must be >= 1");
        if (t.loss_means.size() != n_hyp)
            throw std::invalid_argument("DiscreteHypothesisSpace: loss table size mismatch");
        for (double v : t.loss_means)
            if (!(v >= 0.0) || v > K)
                throw std::invalid_argument("DiscreteHypothesisSpace: loss outside [0,K]");
    }
}

Vec DiscreteHypothesisSpace::resample_empirical(std::size_t task, RngStream& rng) const {
    if (task >= tasks.size()) throw std::out_of_range("resample_empirical: task index");
    const TaskLossModel& t = tasks[task];
    Vec out(n_hyp, 0.0);
    if (K == 0.0) return out;
    for (std::size_t h = 0; h < n_hyp; ++h) {
        const double p = t.loss_means[h] / K;
        int hits = 0;
        for (int j = 0; j < t.m; ++j)
            if (rng.uniform() < p) ++hits;
        out[h] = K * static_cast<double>(hits) / static_cast<double>(t.m);
    }
    return out;
}

DiscreteHypothesisSpace DiscreteHypothesisSpace::from_json_text(const std::string& text) {
    const json j = json::parse(text);
    DiscreteHypothesisSpace s;
    s.K = j.at("K").get<double>();
    s.n_hyp = j.at("n_hyp").get<std::size_t>();
    s.prior.weights = j.at("prior").get<Vec>();
    for (const json& t : j.at("tasks")) {
        TaskLossModel m;
        m.m = t.at("m").get<int>();
        m.loss_means = t.at("loss_means").get<Vec>();
        s.tasks.push_back(std::move(m));
    }
    s.validate();
    return s;
}

DiscreteHypothesisSpace DiscreteHypothesisSpace::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return from_json_text(ss.str());
}

std::string DiscreteHypothesisSpace::to_json_text() const {
    json j;
    j["K"] = K;
    j["n_hyp"] = n_hyp;
    j["prior"] = prior.weights;
    j["tasks"] = json::array();
    for (const TaskLossModel& t : tasks) j["tasks"].push_back({{"m", t.m}, {"loss_means", t.loss_means}});
    return j.dump(2);
}

std::string BoundCheckResult::to_json_text() const {
    json j;
    j["mode"] = mode;
    j["lhs"] = lhs;
    j["rhs"] = rhs;
    j["gap"] = gap;
    j["mc_stderr"] = mc_stderr;
    j["holds"] = holds;
    j["violations"] = violations;
    return j.dump(2);
}

namespace {

double expectation(const DiscreteDistribution& d, const Vec& f) {
    if (d.weights.size() != f.size()) throw std::invalid_argument("expectation: size mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) acc += d.weights[i] * f[i];
    return acc;
}

// cov under d of precomputed values x, y; two-pass for accuracy.
double covariance(const DiscreteDistribution& d, const Vec& x, const Vec& y) {
    const double ex = expectation(d, x);
    const double ey = expectation(d, y);
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        acc += d.weights[i] * (x[i] - ex) * (y[i] - ey);
    return acc;
}

BoundCheckResult finish(BoundCheckResult r) {
    r.gap = r.rhs - r.lhs;
    r.holds = r.gap >= -3.0 * r.mc_stderr;
    return r;
}

struct MeanStderr {
    double mean = 0.0;
    double stderr_ = 0.0;
};

MeanStderr mean_stderr(const Vec& xs) {
    const double n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    if (xs.size() < 2) return {mean, 0.0};
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= (n - 1.0);
    return {mean, std::sqrt(var / n)};
}

}  // namespace

DiscreteDistribution gibbs_posterior(const DiscreteDistribution& prior, const Vec& losses,
                                     double lambda) {
    if (prior.weights.size() != losses.size())
        throw std::invalid_argument("gibbs_posterior: size mismatch");
    if (!(lambda >= 0.0)) throw std::invalid_argument("gibbs_posterior: lambda must be >= 0");
    for (double l : losses)
        if (!std::isfinite(l)) throw std::invalid_argument("gibbs_posterior: non-finite loss");
    bool any_support = false;
    for (double w : prior.weights) any_support = any_support || w > 0.0;
    if (!any_support) throw std::invalid_argument("degenerate-prior");
    if (lambda == 0.0) return prior;

    const std::size_t n = losses.size();
    Vec exponents(n);
    for (std::size_t h = 0; h < n; ++h) exponents[h] = -lambda * losses[h];
    const double log_z = log_sum_exp_weighted(prior.weights, exponents);
    DiscreteDistribution out{Vec(n, 0.0)};
    for (std::size_t h = 0; h < n; ++h)
        if (prior.weights[h] > 0.0)
            out.weights[h] = std::exp(std::log(prior.weights[h]) + exponents[h] - log_z);
    // renormalize the rounding residue
    const double total = kernels::sum(out.weights);
    for (double& w : out.weights) w /= total;
    return out;
}

double kl_discrete(const DiscreteDistribution& q, const DiscreteDistribution& p) {
    if (q.weights.size() != p.weights.size()) throw std::invalid_argument("kl_discrete: size mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < q.weights.size(); ++i) {
        if (q.weights[i] == 0.0) continue;
        if (p.weights[i] <= 0.0) throw std::invalid_argument("not-absolutely-continuous");
        acc += q.weights[i] * std::log(q.weights[i] / p.weights[i]);
    }
    return std::max(acc, 0.0);
}

BoundCheckResult change_of_measure_check(const DiscreteDistribution& rho,
                                         const DiscreteDistribution& pi, const Vec& f,
                                         double lambda) {
    for (double v : f)
        if (!std::isfinite(v)) throw std::invalid_argument("change_of_measure_check: non-finite f");
    const double mean_pi = expectation(pi, f);
    Vec centered(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) centered[i] = lambda * (f[i] - mean_pi);
    BoundCheckResult r;
    r.mode = "change-of-measure";
    r.lhs = lambda * (expectation(rho, f) - mean_pi);
    r.rhs = kl_discrete(rho, pi) + log_sum_exp_weighted(pi.weights, centered);
    return finish(r);
}

BoundCheckResult thm31_exact_check(const DiscreteDistribution& rho,
                                   const DiscreteDistribution& pi, const Vec& L_s,
                                   const Vec& Lhat_t, double lambda) {
    BoundCheckResult r;
    r.mode = "thm31";
    r.lhs = expectation(rho, L_s);
    r.rhs = expectation(rho, Lhat_t) + kl_discrete(rho, pi) / lambda +
            disagreement_exact(pi, L_s, Lhat_t, lambda);
    return finish(r);
}

double gibbs_objective(const DiscreteDistribution& prior, const Vec& losses, double lambda,
                       const DiscreteDistribution& rho) {
    if (!(lambda > 0.0)) throw std::invalid_argument("gibbs_objective: lambda must be > 0");
    return expectation(rho, losses) + kl_discrete(rho, prior) / lambda;
}

double disagreement_exact(const DiscreteDistribution& prior, const Vec& L_s, const Vec& Lhat_t,
                          double lambda) {
    if (L_s.size() != prior.weights.size() || Lhat_t.size() != prior.weights.size())
        throw std::invalid_argument("disagreement_exact: size mismatch");
    if (!(lambda > 0.0)) throw std::invalid_argument("disagreement_exact: lambda must be > 0");
    Vec exponents(L_s.size());
    for (std::size_t h = 0; h < L_s.size(); ++h) exponents[h] = lambda * (L_s[h] - Lhat_t[h]);
    return log_sum_exp_weighted(prior.weights, exponents) / lambda;
}

double loss_covariance(const DiscreteDistribution& prior, const Vec& Lhat_s, const Vec& Lhat_t,
                       double lambda) {
    if (Lhat_s.size() != prior.weights.size() || Lhat_t.size() != prior.weights.size())
        throw std::invalid_argument("loss_covariance: size mismatch");
    const std::size_t n = Lhat_s.size();
    Vec x(n), y(n);
    for (std::size_t h = 0; h < n; ++h) {
        x[h] = std::exp(-lambda * Lhat_s[h]);
        y[h] = std::exp(-lambda * Lhat_t[h]);
    }
    return covariance(prior, x, y);
}

double task_covariance(const DiscreteDistribution& prior, const std::vector<Vec>& tables,
                       std::size_t task, const Vec& lambdas) {
    const std::size_t T = tables.size();
    if (task >= T) throw std::out_of_range("task_covariance: task index");
    if (lambdas.size() != T) throw std::invalid_argument("task_covariance: lambda count");
    const std::size_t n = prior.weights.size();
    const double lambda_T = lambdas.back();
    Vec x(n), y(n);
    for (std::size_t h = 0; h < n; ++h) {
        x[h] = std::exp(-lambda_T * tables[task][h]);
        double rest = 0.0;
        for (std::size_t j = 0; j < T; ++j)
            if (j != task) rest += lambdas[j] * tables[j][h];
        y[h] = std::exp(-rest);
    }
    return covariance(prior, x, y);
}

DiscreteDistribution sequential_gibbs(const DiscreteDistribution& prior,
                                      const std::vector<Vec>& tables, const Vec& lambdas) {
    if (tables.size() != lambdas.size())
        throw std::invalid_argument("sequential_gibbs: lambda count");
    DiscreteDistribution q = prior;
    for (std::size_t i = 0; i < tables.size(); ++i) q = gibbs_posterior(q, tables[i], lambdas[i]);
    return q;
}

const char* oracle_mode_name(OracleMode mode) {
    switch (mode) {
        case OracleMode::cor42: return "cor42";
        case OracleMode::thm47: return "thm47";
        case OracleMode::highcov: return "highcov";
        case OracleMode::gibbs_ratio: return "gibbs_ratio";
    }
    return "?";
}

OracleMode oracle_mode_from_name(const std::string& name) {
    if (name == "cor42") return OracleMode::cor42;
    if (name == "thm47") return OracleMode::thm47;
    if (name == "highcov") return OracleMode::highcov;
    if (name == "gibbs_ratio") return OracleMode::gibbs_ratio;
    throw std::invalid_argument("unknown oracle mode: " + name);
}

namespace {

// ln E_prior exp(-sum_j lambda_j Lhat_j), optionally skipping one task.
double log_partition(const DiscreteDistribution& prior, const std::vector<Vec>& tables,
                     const Vec& lambdas, std::ptrdiff_t skip) {
    const std::size_t n = prior.weights.size();
    Vec exponents(n, 0.0);
    for (std::size_t j = 0; j < tables.size(); ++j) {
        if (static_cast<std::ptrdiff_t>(j) == skip) continue;
        for (std::size_t h = 0; h < n; ++h) exponents[h] -= lambdas[j] * tables[j][h];
    }
    return log_sum_exp_weighted(prior.weights, exponents);
}

BoundCheckResult oracle_cor42(const DiscreteHypothesisSpace& space, const OracleConfig& cfg,
                              int n_resample, std::uint64_t seed) {
    const std::size_t s = cfg.source_task, t = cfg.target_task;
    if (s >= space.tasks.size() || t >= space.tasks.size())
        throw std::out_of_range("oracle_bound_check: task index");
    const double lambda_s = cfg.lambdas.at(s);
    const double lambda_t = cfg.lambdas.at(t);
    const Vec& L_s = space.tasks[s].loss_means;
    const Vec& L_t = space.tasks[t].loss_means;

    RngStream src_rng = derive_stream(seed, 0xc042, s);
    const Vec Lhat_s = space.resample_empirical(s, src_rng);
    const DiscreteDistribution q_s = gibbs_posterior(space.prior, Lhat_s, lambda_s);

    Vec lhs_samples;
    lhs_samples.reserve(n_resample);
    RngStream rng = derive_stream(seed, 0xc042, 1000 + t);
    for (int r = 0; r < n_resample; ++r) {
        const Vec Lhat_t = space.resample_empirical(t, rng);
        const DiscreteDistribution q_st = gibbs_posterior(q_s, Lhat_t, lambda_t);
        lhs_samples.push_back(expectation(q_st, L_s));
    }
    const MeanStderr lhs = mean_stderr(lhs_samples);

    // The infimum over posteriors of L(Q, D_t) + KL(Q||Q_s)/lambda is attained
    // at the Gibbs tilt of Q_s by the expected loss.
    const DiscreteDistribution q_star = gibbs_posterior(q_s, L_t, lambda_t);
    const double inf_term = expectation(q_star, L_t) + kl_discrete(q_star, q_s) / lambda_t;

    BoundCheckResult res;
    res.mode = oracle_mode_name(OracleMode::cor42);
    res.lhs = lhs.mean;
    res.mc_stderr = lhs.stderr_;
    res.rhs = inf_term + lambda_t * space.K * space.K / (8.0 * space.tasks[t].m) +
              disagreement_exact(q_s, L_s, L_t, lambda_t);
    return finish(res);
}

BoundCheckResult oracle_multi(const DiscreteHypothesisSpace& space, OracleMode mode,
                              const OracleConfig& cfg, int n_resample, std::uint64_t seed) {
    const std::size_t T = space.tasks.size();
    const std::size_t i = cfg.task;
    if (i >= T) throw std::out_of_range("oracle_bound_check: task index");
    if (cfg.lambdas.size() != T) throw std::invalid_argument("oracle_bound_check: lambda count");
    const double lambda_T = cfg.lambdas.back();
    const Vec& L_i = space.tasks[i].loss_means;

    // The theorems hold for any fixed sample of the other tasks; only S_i is
    // resampled for the expectation on the left.
    std::vector<Vec> tables(T);
    for (std::size_t j = 0; j < T; ++j) {
        if (j == i) continue;
        RngStream rng = derive_stream(seed, 0x0f1, j);
        tables[j] = space.resample_empirical(j, rng);
    }
    const double log_z_rest = log_partition(space.prior, tables, cfg.lambdas,
                                            static_cast<std::ptrdiff_t>(i));

    Vec lhs_samples, gap_samples;
    lhs_samples.reserve(n_resample);
    int violations = 0;
    RngStream rng = derive_stream(seed, 0x0f2, i);
    double rhs_fixed = lambda_T * space.K * space.K / (8.0 * space.tasks[i].m);
    if (mode == OracleMode::thm47) rhs_fixed += expectation(space.prior, L_i);
    if (mode == OracleMode::highcov) rhs_fixed += cfg.c / lambda_T;

    double rhs_mc_sum = 0.0;
    for (int r = 0; r < n_resample; ++r) {
        tables[i] = space.resample_empirical(i, rng);

        if (mode == OracleMode::thm47 || mode == OracleMode::highcov) {
            const double cov = task_covariance(space.prior, tables, i, cfg.lambdas);
            double threshold = 0.0;
            if (mode == OracleMode::highcov) {
                Vec exponents(space.n_hyp);
                for (std::size_t h = 0; h < space.n_hyp; ++h)
                    exponents[h] = std::exp(-lambda_T * tables[i][h]);
                threshold = std::exp(-cfg.c) - expectation(space.prior, exponents);
            }
            if (cov < threshold) ++violations;
        }

        const DiscreteDistribution q = sequential_gibbs(space.prior, tables, cfg.lambdas);
        const double lhs_r = expectation(q, L_i);
        lhs_samples.push_back(lhs_r);

        if (mode == OracleMode::gibbs_ratio) {
            const double log_z_full =
                log_partition(space.prior, tables, cfg.lambdas, -1);
            const double rhs_r = rhs_fixed + (log_z_rest - log_z_full) / lambda_T;
            rhs_mc_sum += rhs_r;
            gap_samples.push_back(rhs_r - lhs_r);
        }
    }

    BoundCheckResult res;
    res.mode = oracle_mode_name(mode);
    res.violations = violations;
    res.precondition_violated = violations > 0;
    if (mode == OracleMode::gibbs_ratio) {
        const MeanStderr gap = mean_stderr(gap_samples);
        res.lhs = mean_stderr(lhs_samples).mean;
        res.rhs = rhs_mc_sum / n_resample;
        res.mc_stderr = gap.stderr_;
    } else {
        const MeanStderr lhs = mean_stderr(lhs_samples);
        res.lhs = lhs.mean;
        res.rhs = rhs_fixed;
        res.mc_stderr = lhs.stderr_;
    }
    return finish(res);
}

}  // namespace

BoundCheckResult oracle_bound_check(const DiscreteHypothesisSpace& space, OracleMode mode,
                                    const OracleConfig& cfg, int n_resample, std::uint64_t seed) {
    space.validate();
    if (n_resample < 1) throw std::invalid_argument("oracle_bound_check: n_resample");
    if (mode == OracleMode::cor42) return oracle_cor42(space, cfg, n_resample, seed);
    return oracle_multi(space, mode, cfg, n_resample, seed);
}

BoundCheckResult hoeffding_mgf_check(const DiscreteHypothesisSpace& space, std::size_t task,
                                     double t, int n_resample, std::uint64_t seed, double delta) {
    space.validate();
    if (task >= space.tasks.size()) throw std::out_of_range("hoeffding_mgf_check: task index");
    if (!(delta > 0.0) || delta > 1.0)
        throw std::invalid_argument("hoeffding_mgf_check: delta must be in (0,1]");
    const Vec& L = space.tasks[task].loss_means;
    const int m = space.tasks[task].m;
    const double threshold =
        t * t * space.K * space.K / (8.0 * m) + std::log(1.0 / delta);

    int violation_count = 0;
    RngStream rng = derive_stream(seed, 0x40ef, task);
    Vec exponents(space.n_hyp);
    for (int r = 0; r < n_resample; ++r) {
        const Vec Lhat = space.resample_empirical(task, rng);
        for (std::size_t h = 0; h < space.n_hyp; ++h) exponents[h] = t * (Lhat[h] - L[h]);
        const double log_mgf = log_sum_exp_weighted(space.prior.weights, exponents);
        if (!(log_mgf < threshold)) ++violation_count;
    }

    BoundCheckResult res;
    res.mode = "hoeffding_mgf";
    res.lhs = static_cast<double>(violation_count) / n_resample;
    res.rhs = delta;
    res.mc_stderr = std::sqrt(delta * (1.0 - delta) / n_resample);
    res.violations = violation_count;
    return finish(res);
}

}  // namespace cfb::discrete
