#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "cfb/harness.hpp"

using namespace cfb;
using namespace cfb::harness;

namespace {

ExperimentConfig tiny_config() {
    ExperimentConfig cfg;
    cfg.environment.n_tasks = 3;
    cfg.environment.seed = 1;
    cfg.hidden_dims = {8};
    cfg.m_train = 64;
    cfg.m_test = 40;
    cfg.bound.n_mc_prior = 4;
    cfg.bound.n_mc_loss = 4;
    cfg.checkpoint_stride = 1;
    cfg.seeds = {0};
    return cfg;
}

}  // namespace

TEST_CASE("config parsing: defaults, unknown keys, bad types") {
    const ExperimentConfig cfg = ExperimentConfig::from_json_text("{}");
    CHECK(cfg.environment.n_tasks == 100);
    CHECK(cfg.m_train == 3000);
    CHECK(cfg.lambda == 250.0);
    CHECK(cfg.lambda_ewc == 40.0);
    CHECK(cfg.sigma2 == 1e-2);
    CHECK(cfg.epochs == 1);
    CHECK(cfg.batch_size == 16);
    CHECK(cfg.bound.delta == 0.05);
    CHECK(cfg.bound.gamma == 0.95);
    CHECK(cfg.seeds == std::vector<std::uint64_t>{0, 1, 2, 3, 4});
    CHECK(cfg.checkpoint_stride == 4);

    CHECK_THROWS_AS(ExperimentConfig::from_json_text("{\"lr\": 0.1}"), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_json_text("{\"lambda\": \"big\"}"), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_json_text("not json"), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_json_text("{\"m_train\": 0}"), ConfigError);
    CHECK_THROWS_AS(
        ExperimentConfig::from_json_text("{\"environment\": {\"angle\": 3}}"), ConfigError);

    // echo round-trips through the parser
    const ExperimentConfig back = ExperimentConfig::from_json_text(cfg.to_json_text());
    CHECK(back.to_json_text() == cfg.to_json_text());
}

TEST_CASE("run_seed on a tiny sequence") {
    const ExperimentConfig cfg = tiny_config();
    const SeedResult res = run_seed(cfg, 0);
    CHECK_FALSE(res.diverged);
    CHECK(res.after_training_losses.size() == 3);
    CHECK(res.checkpoints.size() == 3);

    // first checkpoint has no previous tasks: NaN-marked transfer columns
    CHECK(std::isnan(res.checkpoints[0].metrics.bwt));
    CHECK(std::isnan(res.checkpoints[0].bound.total_forgetting_bound));
    CHECK(res.checkpoints[0].fwd_loss >= 0.0);

    for (std::size_t i = 1; i < 3; ++i) {
        const CheckpointRecord& c = res.checkpoints[i];
        CHECK(c.tasks_seen == static_cast<int>(i + 1));
        CHECK(std::isfinite(c.metrics.bwt));
        CHECK(std::isfinite(c.metrics.forgetting));
        const BoundReport& b = c.bound;
        const double sum = b.empirical_term - b.past_loss_term + b.kl_term + b.hoeffding_term +
                           b.confidence_term + b.disagreement_term;
        CHECK(std::abs(b.total_forgetting_bound - sum) < 1e-12);
    }
    CHECK(res.final_posterior.dim() == cfg.arch().param_count());
}

TEST_CASE("run_seed is deterministic") {
    const ExperimentConfig cfg = tiny_config();
    const SeedResult a = run_seed(cfg, 1);
    const SeedResult b = run_seed(cfg, 1);
    CHECK(a.to_log().to_csv() == b.to_log().to_csv());
    CHECK(a.final_posterior.mean == b.final_posterior.mean);
    const SeedResult c = run_seed(cfg, 2);
    CHECK(a.to_log().to_csv() != c.to_log().to_csv());
}

TEST_CASE("T = 1 yields forward loss only") {
    ExperimentConfig cfg = tiny_config();
    cfg.environment.n_tasks = 1;
    const SeedResult res = run_seed(cfg, 0);
    CHECK(res.checkpoints.size() == 1);
    CHECK(std::isfinite(res.checkpoints[0].fwd_loss));
    CHECK(std::isnan(res.checkpoints[0].metrics.bwt));
    CHECK(std::isnan(res.checkpoints[0].metrics.forgetting));
}

TEST_CASE("run_experiment writes artifacts and report summarizes them") {
    namespace fs = std::filesystem;
    ExperimentConfig cfg = tiny_config();
    cfg.seeds = {0, 1};
    cfg.output_dir = "test_artifacts_harness";
    fs::remove_all(cfg.output_dir);

    const RunArtifacts art = run_experiment(cfg);
    CHECK_FALSE(art.partial);
    CHECK(fs::exists(art.config_echo_path));
    CHECK(art.metrics_csv_paths.size() == 2);
    for (const auto& p : art.metrics_csv_paths) CHECK(fs::exists(p));
    for (const auto& p : art.bound_json_paths) CHECK(fs::exists(p));
    for (const auto& p : art.posterior_paths) CHECK(fs::exists(p));
    CHECK(fs::exists(art.summary_csv_path));

    const std::string text = render_report(cfg.output_dir);
    CHECK(text.find("forgetting") != std::string::npos);
    CHECK(text.find("bwt_bound") != std::string::npos);

    // byte-identical rerun
    std::ifstream f1(art.metrics_csv_paths[0], std::ios::binary);
    std::string first((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    run_experiment(cfg);
    std::ifstream f2(art.metrics_csv_paths[0], std::ios::binary);
    std::string second((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(first == second);
    fs::remove_all(cfg.output_dir);

    CHECK_THROWS_AS(render_report("no_such_dir_anywhere"), std::exception);
}

TEST_CASE("verify scopes") {
    CHECK_THROWS_AS(verify_scope_from_name("everything"), ConfigError);
    const VerifyReport grad = verify_suite(VerifyScope::gradients, 0);
    CHECK(grad.items.size() == 1);
    CHECK(grad.items[0].pass);
    CHECK(grad.to_text().find("PASS gradient-fd") != std::string::npos);
}
