#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cfb/tasks.hpp"

using namespace cfb;
using namespace cfb::tasks;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("true label basics") {
    const Vec e1{1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
    CHECK(true_label(0.0, e1) == 1);
    // only the first two coordinates matter
    Vec x{0.3, -0.7, 9.0, -9.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
    const int base = true_label(0.4, x);
    for (std::size_t c = 2; c < 10; ++c) {
        x[c] = -x[c] * 3.0 + 1.0;
        CHECK(true_label(0.4, x) == base);
    }
    // ties labeled positive
    CHECK(true_label(0.0, Vec{0.0, 5.0}) == 1);
}

TEST_CASE("antipodal angle flips every non-tie label") {
    TaskSpec spec;
    spec.angle = 0.7;
    spec.m_train = 500;
    spec.m_test = 100;
    spec.seed = 3;
    const auto [train_a, test_a] = sample_task(spec);
    spec.angle = 0.7 + kPi;
    const auto [train_b, test_b] = sample_task(spec);

    CHECK(train_a.features.data == train_b.features.data);  // same draws, same seed
    for (std::size_t i = 0; i < train_a.size(); ++i) {
        const double margin = std::cos(0.7) * train_a.features(i, 0) +
                              std::sin(0.7) * train_a.features(i, 1);
        if (margin != 0.0) CHECK(train_a.labels[i] == 1 - train_b.labels[i]);
    }
}

TEST_CASE("labels are balanced") {
    TaskSpec spec;
    spec.angle = 1.1;
    spec.m_train = 100000;
    spec.m_test = 1;
    spec.seed = 5;
    const auto [train, test] = sample_task(spec);
    double positive = 0.0;
    for (int y : train.labels) positive += y;
    positive /= static_cast<double>(train.size());
    CHECK(std::abs(positive - 0.5) < 0.005);
}

TEST_CASE("ground-truth disagreement between angles is phi/pi") {
    const double theta = 0.3;
    const double phi = 0.6;
    RngStream rng(7);
    const int m = 20000;
    int disagree = 0;
    for (int i = 0; i < m; ++i) {
        const Vec x{rng.normal(), rng.normal()};
        if (true_label(theta, x) != true_label(theta + phi, x)) ++disagree;
    }
    const double rate = static_cast<double>(disagree) / m;
    const double expect = phi / kPi;
    const double se = std::sqrt(expect * (1.0 - expect) / m);
    CHECK(std::abs(rate - expect) < 3.0 * se);
}

TEST_CASE("train and test are disjoint draws, deterministic per seed") {
    TaskSpec spec;
    spec.m_train = 50;
    spec.m_test = 50;
    spec.seed = 11;
    const auto [train, test] = sample_task(spec);
    CHECK(train.features.data != test.features.data);
    const auto [train2, test2] = sample_task(spec);
    CHECK(train.features.data == train2.features.data);
    CHECK(train.labels == train2.labels);
    spec.seed = 12;
    const auto [train3, test3] = sample_task(spec);
    CHECK(train.features.data != train3.features.data);
}

TEST_CASE("angle schedules") {
    EnvironmentConfig cfg;
    cfg.n_tasks = 40;
    cfg.reference_angle = 0.2;
    cfg.max_dev = 10.0 * kPi / 180.0;
    cfg.seed = 13;

    cfg.kind = EnvironmentKind::similar;
    for (double a : make_angle_schedule(cfg))
        CHECK(std::abs(a - cfg.reference_angle) <= cfg.max_dev);

    cfg.kind = EnvironmentKind::gradual;
    const auto grad = make_angle_schedule(cfg);
    CHECK(grad[0] == cfg.reference_angle);
    for (std::size_t t = 1; t < grad.size(); ++t) {
        CHECK(grad[t] >= grad[t - 1]);  // drift direction fixed positive
        CHECK(grad[t] - grad[t - 1] <= cfg.max_dev);
    }

    cfg.kind = EnvironmentKind::orthogonal;
    const auto orth = make_angle_schedule(cfg);
    for (int t = 0; t < 20; ++t) CHECK(std::abs(orth[t] - cfg.reference_angle) <= cfg.max_dev);
    for (int t = 20; t < 40; ++t)
        CHECK(std::abs(orth[t] - cfg.reference_angle - kPi / 2.0) <= cfg.max_dev);
}

TEST_CASE("environment kind names round-trip") {
    for (auto kind : {EnvironmentKind::similar, EnvironmentKind::gradual,
                      EnvironmentKind::orthogonal})
        CHECK(environment_kind_from_name(environment_kind_name(kind)) == kind);
    CHECK_THROWS(environment_kind_from_name("spiral"));
}
