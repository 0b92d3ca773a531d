#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "cfb/discrete.hpp"

using namespace cfb;
using namespace cfb::discrete;

namespace {

DiscreteDistribution random_dist(RngStream& rng, std::size_t n) {
    Vec w(n);
    double total = 0.0;
    for (double& v : w) {
        v = -std::log(1.0 - rng.uniform());
        total += v;
    }
    for (double& v : w) v /= total;
    double s = 0.0;
    for (double v : w) s += v;
    for (double& v : w) v /= s;
    return {w};
}

Vec random_losses(RngStream& rng, std::size_t n) {
    Vec v(n);
    for (double& x : v) x = rng.uniform();
    return v;
}

}  // namespace

TEST_CASE("gibbs posterior basics") {
    const DiscreteDistribution prior = DiscreteDistribution::uniform(3);
    const Vec losses{0.1, 0.5, 0.9};

    // lambda = 0 returns the prior bit-for-bit
    const DiscreteDistribution q0 = gibbs_posterior(prior, losses, 0.0);
    CHECK(q0.weights == prior.weights);

    // hand-computed two-hypothesis tilt
    const DiscreteDistribution p2 = DiscreteDistribution::uniform(2);
    const DiscreteDistribution q2 = gibbs_posterior(p2, {0.0, 1.0}, 2.0);
    const double z = 1.0 + std::exp(-2.0);
    CHECK(q2.weights[0] == doctest::Approx(1.0 / z).epsilon(1e-14));
    CHECK(q2.weights[1] == doctest::Approx(std::exp(-2.0) / z).epsilon(1e-14));
    q2.validate();

    CHECK_THROWS_WITH(gibbs_posterior({Vec{0.0, 0.0}}, {0.1, 0.2}, 1.0), "degenerate-prior");
}

TEST_CASE("kl_discrete") {
    const DiscreteDistribution p = DiscreteDistribution::uniform(4);
    CHECK(kl_discrete(p, p) == 0.0);
    const DiscreteDistribution q{{0.7, 0.3, 0.0, 0.0}};
    CHECK(kl_discrete(q, p) > 0.0);
    CHECK_THROWS_WITH(kl_discrete(p, q), "not-absolutely-continuous");
    // point mass against itself
    const DiscreteDistribution pm = DiscreteDistribution::point_mass(4, 2);
    CHECK(kl_discrete(pm, pm) == 0.0);
}

TEST_CASE("change of measure holds on random instances with equality at the tilt") {
    RngStream rng(11);
    for (int i = 0; i < 300; ++i) {
        const std::size_t n = 2 + rng.below(10);
        const DiscreteDistribution pi = random_dist(rng, n);
        const DiscreteDistribution rho = random_dist(rng, n);
        Vec f(n);
        for (double& x : f) x = rng.uniform(-2.0, 2.0);
        const double lambda = rng.uniform(0.1, 5.0);

        const BoundCheckResult r = change_of_measure_check(rho, pi, f, lambda);
        CHECK(r.gap >= -1e-12);
        CHECK(r.mc_stderr == 0.0);

        Vec neg_f(n);
        for (std::size_t h = 0; h < n; ++h) neg_f[h] = -f[h];
        const DiscreteDistribution tilt = gibbs_posterior(pi, neg_f, lambda);
        CHECK(std::abs(change_of_measure_check(tilt, pi, f, lambda).gap) < 1e-10);
    }
}

TEST_CASE("thm 3.1 exact form holds on random instances") {
    RngStream rng(13);
    for (int i = 0; i < 300; ++i) {
        const std::size_t n = 2 + rng.below(10);
        const DiscreteDistribution pi = random_dist(rng, n);
        const DiscreteDistribution rho = gibbs_posterior(pi, random_losses(rng, n), 2.0);
        const BoundCheckResult r = thm31_exact_check(rho, pi, random_losses(rng, n),
                                                     random_losses(rng, n), rng.uniform(0.1, 5.0));
        CHECK(r.gap >= -1e-10);
        CHECK(r.holds);
    }
}

TEST_CASE("gibbs posterior minimizes the free-energy objective") {
    RngStream rng(17);
    const DiscreteDistribution prior = random_dist(rng, 6);
    const Vec losses = random_losses(rng, 6);
    const double lambda = 1.7;
    const DiscreteDistribution gibbs = gibbs_posterior(prior, losses, lambda);
    const double j_star = gibbs_objective(prior, losses, lambda, gibbs);
    for (int i = 0; i < 100; ++i) {
        const DiscreteDistribution other = random_dist(rng, 6);
        CHECK(j_star <= gibbs_objective(prior, losses, lambda, other) + 1e-12);
    }
}

TEST_CASE("sequential gibbs equals pooled gibbs") {
    RngStream rng(19);
    for (int i = 0; i < 50; ++i) {
        const std::size_t n = 2 + rng.below(8);
        const std::size_t T = 1 + rng.below(10);
        const DiscreteDistribution prior = random_dist(rng, n);
        std::vector<Vec> tables;
        Vec lambdas, pooled(n, 0.0);
        for (std::size_t t = 0; t < T; ++t) {
            tables.push_back(random_losses(rng, n));
            lambdas.push_back(rng.uniform(0.1, 3.0));
            for (std::size_t h = 0; h < n; ++h) pooled[h] += lambdas[t] * tables[t][h];
        }
        const DiscreteDistribution seq = sequential_gibbs(prior, tables, lambdas);
        const DiscreteDistribution one = gibbs_posterior(prior, pooled, 1.0);
        for (std::size_t h = 0; h < n; ++h)
            CHECK(seq.weights[h] == doctest::Approx(one.weights[h]).epsilon(1e-12));
    }
}

TEST_CASE("covariances") {
    const DiscreteDistribution prior = DiscreteDistribution::uniform(4);
    const Vec L{0.1, 0.4, 0.6, 0.9};
    // identical tables are positively associated
    CHECK(loss_covariance(prior, L, L, 1.0) > 0.0);
    // independent-of-h constant table has zero covariance
    CHECK(loss_covariance(prior, L, {0.5, 0.5, 0.5, 0.5}, 1.0) == doctest::Approx(0.0));

    const std::vector<Vec> tables{L, L, L};
    CHECK(task_covariance(prior, tables, 1, {1.0, 1.0, 1.0}) > 0.0);
}

TEST_CASE("resampled empirical losses are unbiased in expectation") {
    DiscreteHypothesisSpace space;
    space.K = 1.0;
    space.n_hyp = 3;
    space.prior = DiscreteDistribution::uniform(3);
    space.tasks.push_back({40, {0.2, 0.5, 0.8}});
    space.validate();

    RngStream rng(23);
    Vec mean(3, 0.0);
    const int n = 4000;
    for (int r = 0; r < n; ++r) {
        const Vec sample = space.resample_empirical(0, rng);
        for (std::size_t h = 0; h < 3; ++h) {
            CHECK(sample[h] >= 0.0);
            CHECK(sample[h] <= 1.0);
            mean[h] += sample[h];
        }
    }
    for (std::size_t h = 0; h < 3; ++h) {
        mean[h] /= n;
        const double se = std::sqrt(0.25 / (40.0 * n));
        CHECK(std::abs(mean[h] - space.tasks[0].loss_means[h]) < 4.0 * se);
    }
}

TEST_CASE("hypothesis space JSON round trip") {
    DiscreteHypothesisSpace space;
    space.K = 2.0;
    space.n_hyp = 2;
    space.prior = {{0.25, 0.75}};
    space.tasks.push_back({10, {0.5, 1.5}});
    space.tasks.push_back({20, {1.0, 0.0}});

    const DiscreteHypothesisSpace back = DiscreteHypothesisSpace::from_json_text(space.to_json_text());
    CHECK(back.K == space.K);
    CHECK(back.n_hyp == space.n_hyp);
    CHECK(back.prior.weights == space.prior.weights);
    CHECK(back.tasks.size() == 2);
    CHECK(back.tasks[1].m == 20);
    CHECK(back.tasks[1].loss_means == space.tasks[1].loss_means);

    CHECK_THROWS(DiscreteHypothesisSpace::from_json_text("{\"K\": 1.0}"));
}

TEST_CASE("oracle bound checks hold on small spaces") {
    RngStream rng(29);
    DiscreteHypothesisSpace space;
    space.K = 1.0;
    space.n_hyp = 6;
    space.prior = DiscreteDistribution::uniform(6);
    const Vec table = random_losses(rng, 6);
    for (int t = 0; t < 3; ++t) space.tasks.push_back({30, table});

    OracleConfig cfg;
    cfg.lambdas = Vec(3, 1.0);
    cfg.task = 1;
    cfg.source_task = 0;
    cfg.target_task = 1;

    const BoundCheckResult thm47 =
        oracle_bound_check(space, OracleMode::thm47, cfg, 500, 5);
    CHECK(thm47.holds);
    CHECK(thm47.violations == 0);
    CHECK(thm47.mode == "thm47");

    const BoundCheckResult cor42 =
        oracle_bound_check(space, OracleMode::cor42, cfg, 500, 5);
    CHECK(cor42.holds);

    const BoundCheckResult ratio =
        oracle_bound_check(space, OracleMode::gibbs_ratio, cfg, 500, 5);
    CHECK(ratio.holds);

    // result JSON carries the required fields
    const std::string j = thm47.to_json_text();
    for (const char* key : {"mode", "lhs", "rhs", "gap", "mc_stderr", "holds", "violations"})
        CHECK(j.find(key) != std::string::npos);
}

TEST_CASE("hoeffding mgf frequency check") {
    DiscreteHypothesisSpace space;
    space.K = 1.0;
    space.n_hyp = 5;
    space.prior = DiscreteDistribution::uniform(5);
    space.tasks.push_back({50, {0.1, 0.3, 0.5, 0.7, 0.9}});
    const BoundCheckResult r = hoeffding_mgf_check(space, 0, 1.0, 2000, 31, 0.05);
    CHECK(r.holds);
    CHECK(r.lhs <= 0.05 + 3.0 * r.mc_stderr);
    CHECK(r.rhs == 0.05);
}
