#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "cfb/metrics.hpp"

using namespace cfb;

TEST_CASE("zero-one loss with deterministic tie-break") {
    const LossFunction l = LossFunction::zero_one();
    const Vec logits{0.2, 0.9, 0.1};
    CHECK(example_loss(l, logits, 1) == 0.0);
    CHECK(example_loss(l, logits, 0) == 1.0);
    // tie resolves to the lowest index
    const Vec tie{0.5, 0.5};
    CHECK(example_loss(l, tie, 0) == 0.0);
    CHECK(example_loss(l, tie, 1) == 1.0);
    CHECK_THROWS_AS(example_loss(l, logits, 3), std::invalid_argument);
}

TEST_CASE("clamped cross entropy") {
    const LossFunction l = LossFunction::clamped_cross_entropy(2.0);
    const Vec logits{1.0, -1.0};
    const double lse = std::log(std::exp(1.0) + std::exp(-1.0));
    CHECK(example_loss(l, logits, 0) == doctest::Approx(lse - 1.0));
    // badly wrong prediction hits the clamp
    const Vec confident{10.0, -10.0};
    CHECK(example_loss(l, confident, 1) == 2.0);
}

TEST_CASE("empirical loss of a point hypothesis") {
    TaskDataset data;
    data.features = Matrix(4, 1);
    data.labels = {0, 1, 0, 1};
    HypothesisSource src;
    src.is_point = true;
    src.mean_loss = [](RngStream&) { return 0.25; };
    CHECK(empirical_loss(src, data, LossFunction::zero_one(), 10, 7) == 0.25);

    TaskDataset empty;
    CHECK_THROWS_WITH(empirical_loss(src, empty, LossFunction::zero_one(), 10, 7),
                      "empty-dataset");
}

TEST_CASE("empirical loss averages hypothesis draws deterministically") {
    TaskDataset data;
    data.features = Matrix(2, 1);
    data.labels = {0, 1};
    HypothesisSource src;
    src.mean_loss = [](RngStream& rng) { return rng.uniform(); };
    const double a = empirical_loss(src, data, LossFunction::zero_one(), 50, 3);
    const double b = empirical_loss(src, data, LossFunction::zero_one(), 50, 3);
    CHECK(a == b);
    CHECK(a > 0.0);
    CHECK(a < 1.0);
}

TEST_CASE("bwt and forgetting: plain means, discounted sums") {
    const Vec current{0.5, 0.3};
    const Vec after{0.2, 0.4};
    const double gamma = 0.9;
    const TransferMetrics m = bwt_and_forgetting(current, after, gamma);
    CHECK(m.bwt == doctest::Approx(0.4));
    CHECK(m.forgetting == doctest::Approx(((0.5 - 0.2) + (0.3 - 0.4)) / 2.0));
    CHECK(m.bwt_discounted == doctest::Approx(0.9 * 0.5 + 0.3));
    CHECK(m.forgetting_discounted == doctest::Approx(0.9 * 0.3 + (-0.1)));

    CHECK_THROWS_WITH(bwt_and_forgetting({}, {}, gamma), "no-previous-tasks");
    CHECK_THROWS_WITH(bwt_and_forgetting(current, {0.2}, gamma), "vector-length");
}

TEST_CASE("metrics CSV format") {
    MetricsLog log;
    MetricsRow r;
    r.checkpoint = 1;
    r.task_id = 4;
    r.bwt = 0.125;
    log.rows.push_back(r);
    const std::string csv = log.to_csv();
    CHECK(csv.substr(0, csv.find('\n')) ==
          "checkpoint,task_id,bwt,forgetting,fwd_loss,bwt_disc,forget_disc,bwt_bound,forget_bound");
    CHECK(csv.find("1,4,0.125,") != std::string::npos);
}

TEST_CASE("format_double round-trips") {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-17, 1234.5678}) {
        CHECK(std::stod(format_double(v)) == v);
    }
}
