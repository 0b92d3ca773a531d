#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cfb/bounds.hpp"
#include "cfb/tasks.hpp"

using namespace cfb;

namespace {

MlpArchitecture tiny_arch(std::size_t n_tasks) {
    MlpArchitecture arch;
    arch.input_dim = tasks::kInputDim;
    arch.hidden_dims = {6};
    arch.n_tasks = n_tasks;
    arch.classes_per_task = 2;
    return arch;
}

TaskDataset make_data(double angle, int m, std::uint64_t seed) {
    tasks::TaskSpec spec;
    spec.angle = angle;
    spec.m_train = m;
    spec.m_test = 1;
    spec.seed = seed;
    return tasks::sample_task(spec).first;
}

}  // namespace

TEST_CASE("structural terms") {
    const auto [hoeffding, confidence] = structural_terms(2.0, 1.0, 100, 0.05);
    CHECK(hoeffding == doctest::Approx(2.0 / 800.0).epsilon(1e-14));
    CHECK(confidence == doctest::Approx(std::log(20.0) / 2.0).epsilon(1e-14));
    CHECK_THROWS(structural_terms(0.0, 1.0, 100, 0.05));
    CHECK_THROWS(structural_terms(1.0, 1.0, 0, 0.05));
}

TEST_CASE("bound assembly satisfies the sum identity") {
    const MlpArchitecture arch = tiny_arch(3);
    const TaskDataset train = make_data(0.1, 60, 1);
    const TaskDataset test0 = make_data(0.0, 40, 2);
    const TaskDataset test1 = make_data(0.2, 40, 3);

    GaussianMeanField prev;
    prev.mean = Vec(arch.param_count(), 0.0);
    prev.log_std = Vec(arch.param_count(), std::log(0.05));
    GaussianMeanField cur = prev;
    for (double& m : cur.mean) m += 0.01;

    BoundConfig cfg;
    cfg.lambda = 100.0;
    cfg.n_mc_prior = 8;
    cfg.n_mc_loss = 8;
    const std::vector<const TaskDataset*> past{&test0, &test1};
    const BoundReport rep =
        forgetting_bound_assemble(cur, prev, arch, train, past, {0.3, 0.4}, cfg, 5);

    const double forget_sum = rep.empirical_term - rep.past_loss_term + rep.kl_term +
                              rep.hoeffding_term + rep.confidence_term + rep.disagreement_term;
    CHECK(std::abs(rep.total_forgetting_bound - forget_sum) < 1e-12);
    CHECK(std::abs(rep.total_bwt_bound - (rep.total_forgetting_bound + rep.past_loss_term)) <
          1e-12);
    CHECK(rep.past_loss_term == doctest::Approx(0.35).epsilon(1e-14));
    CHECK(rep.kl_term > 0.0);
    CHECK(rep.empirical_stderr >= 0.0);

    // serialization carries every term
    const std::string j = rep.to_json_text();
    for (const char* key :
         {"empirical_term", "past_loss_term", "kl_term", "hoeffding_term", "confidence_term",
          "disagreement_term", "total_forgetting_bound", "total_bwt_bound"})
        CHECK(j.find(key) != std::string::npos);
}

TEST_CASE("point-mass disagreement matches the direct discrete computation") {
    const MlpArchitecture arch = tiny_arch(3);
    const TaskDataset train = make_data(0.1, 50, 7);
    const TaskDataset test0 = make_data(0.0, 30, 8);
    const TaskDataset test1 = make_data(0.2, 30, 9);
    const Vec w = init_params(arch, 11);
    const GaussianMeanField pm = GaussianMeanField::point_mass(w);
    const LossFunction loss = LossFunction::zero_one();
    const double lambda = 3.0;

    const DisagreementResult res =
        disagreement_mc(pm, arch, {&test0, &test1}, train, loss, lambda, 6, 13);
    // every draw is the same hypothesis, so the log-MGF collapses to the
    // plain loss differences
    const double cur = evaluate_point(w, arch, 2, train, loss);
    const double expect = ((evaluate_point(w, arch, 0, test0, loss) - cur) +
                           (evaluate_point(w, arch, 1, test1, loss) - cur)) /
                          2.0;
    CHECK(res.value == doctest::Approx(expect).epsilon(1e-12));
    CHECK(res.stderr_ == doctest::Approx(0.0));
}

TEST_CASE("disagreement is invariant under joint permutation of past tasks") {
    const MlpArchitecture arch = tiny_arch(3);
    const TaskDataset train = make_data(0.1, 50, 17);
    const TaskDataset test0 = make_data(0.0, 30, 18);
    const TaskDataset test1 = make_data(0.4, 30, 19);

    // heads must follow their datasets under the permutation, so use a
    // head-symmetric point mass: copy head 0's slice into head 1 and kill the
    // sampling noise (distinct heads would otherwise draw distinct noise)
    GaussianMeanField prev = GaussianMeanField::point_mass(init_params(arch, 21));
    const auto [b0, e0] = arch.head_range(0);
    const auto [b1, e1] = arch.head_range(1);
    for (std::size_t j = 0; j < e0 - b0; ++j) prev.mean[b1 + j] = prev.mean[b0 + j];

    const LossFunction loss = LossFunction::zero_one();
    const DisagreementResult a =
        disagreement_mc(prev, arch, {&test0, &test1}, train, loss, 5.0, 10, 23);
    const DisagreementResult b =
        disagreement_mc(prev, arch, {&test1, &test0}, train, loss, 5.0, 10, 23);
    CHECK(a.value == doctest::Approx(b.value).epsilon(1e-12));
}

TEST_CASE("assembly rejects malformed inputs") {
    const MlpArchitecture arch = tiny_arch(2);
    const TaskDataset train = make_data(0.0, 20, 25);
    GaussianMeanField q;
    q.mean = Vec(arch.param_count(), 0.0);
    q.log_std = Vec(arch.param_count(), std::log(0.05));
    BoundConfig cfg;
    cfg.n_mc_prior = 2;
    cfg.n_mc_loss = 2;

    CHECK_THROWS_WITH(forgetting_bound_assemble(q, q, arch, train, {}, {}, cfg, 1),
                      "no-previous-tasks");
    const TaskDataset test0 = make_data(0.0, 20, 26);
    const std::vector<const TaskDataset*> past{&test0};
    CHECK_THROWS_WITH(forgetting_bound_assemble(q, q, arch, train, past, {0.1, 0.2}, cfg, 1),
                      "vector-length");
    BoundConfig bad = cfg;
    bad.lambda = 0.0;
    CHECK_THROWS(forgetting_bound_assemble(q, q, arch, train, past, {0.1}, bad, 1));
}

TEST_CASE("identical posteriors zero the KL term") {
    const MlpArchitecture arch = tiny_arch(2);
    const TaskDataset train = make_data(0.1, 30, 27);
    const TaskDataset test0 = make_data(0.0, 30, 28);
    GaussianMeanField q;
    q.mean = init_params(arch, 29);
    q.log_std = Vec(arch.param_count(), std::log(0.05));
    BoundConfig cfg;
    cfg.n_mc_prior = 4;
    cfg.n_mc_loss = 4;
    const BoundReport rep =
        forgetting_bound_assemble(q, q, arch, train, {&test0}, {0.2}, cfg, 31);
    CHECK(rep.kl_term == 0.0);
}
