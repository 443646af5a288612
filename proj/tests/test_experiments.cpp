#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "acd/exp/plan.hpp"
#include "acd/exp/report.hpp"
#include "acd/exp/runner.hpp"

using namespace acd;
using namespace acd::exp;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& tag) {
    fs::path p = fs::temp_directory_path() / ("acd_exp_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

// Smallest legal plan that still exercises training, eval and aggregation.
ExperimentPlan tiny_plan(PlanKind kind, const fs::path& out) {
    ExperimentPlan p;
    p.kind = kind;
    p.seed = 11;
    p.n_runs = 2;
    p.eval_episodes = 4;
    p.base_hparams.n_steps = 256;
    p.base_hparams.batch_size = 64;
    p.base_hparams.epochs = 2;
    p.base_hparams.total_timesteps = 512;
    p.train_options.eval_every = 512;
    p.train_options.eval_episodes = 4;
    p.out_dir = out.string();
    return p;
}

}  // namespace

TEST_CASE("plan kinds round-trip through their names") {
    for (PlanKind k : {PlanKind::TurnOrderMatrix, PlanKind::AdversaryMatrix,
                       PlanKind::HparamAblation, PlanKind::RandomBaseline})
        CHECK(plan_kind_from_name(plan_kind_name(k)) == k);
    CHECK(plan_kind_name(PlanKind::TurnOrderMatrix) == "turn_order");
    CHECK(plan_kind_name(PlanKind::HparamAblation) == "hparam");
    CHECK_THROWS_AS(plan_kind_from_name("matrix_of_doom"), env::ConfigError);
}

TEST_CASE("plan json is strict, defaulted, and round-trips") {
    ExperimentPlan def = plan_from_json(nlohmann::json::object());
    CHECK(def.n_runs == 20);
    CHECK(def.eval_episodes == 100);
    CHECK(def.kind == PlanKind::TurnOrderMatrix);

    ExperimentPlan p;
    p.kind = PlanKind::AdversaryMatrix;
    p.seed = 99;
    p.n_runs = 3;
    p.eval_episodes = 7;
    p.base_hparams.learning_rate = 1e-3;
    p.alt.gamma = 0.5;
    p.out_dir = "somewhere";
    ExperimentPlan back = plan_from_json(plan_to_json(p));
    CHECK(plan_to_json(back) == plan_to_json(p));

    CHECK_THROWS_AS(plan_from_json({{"n_run", 3}}), env::ConfigError);
    CHECK_THROWS_AS(plan_from_json({{"alt", {{"lr", 0.1}}}}), env::ConfigError);

    ExperimentPlan solo;
    solo.n_runs = 1;  // too few for a confidence interval
    CHECK_THROWS_AS(validate(solo), env::ConfigError);
}

TEST_CASE("presets pin the two supported scales") {
    ExperimentPlan p;
    apply_preset(p, "desk");
    CHECK(p.n_runs == 5);
    CHECK(p.base_hparams.total_timesteps == 500'000);
    apply_preset(p, "full");
    CHECK(p.n_runs == 20);
    CHECK(p.base_hparams.total_timesteps == 2'500'000);
    CHECK_THROWS_AS(apply_preset(p, "galactic"), env::ConfigError);
}

TEST_CASE("variant grids carry the right labels and overrides") {
    ExperimentPlan p;

    p.kind = PlanKind::TurnOrderMatrix;
    auto rows = plan_rows(p);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].label == "RedThenBlue");
    CHECK(rows[1].label == "BlueThenRed");
    CHECK(rows[2].label == "MixedPerStep");
    CHECK(rows[1].env.turn_order == env::TurnOrder::BlueThenRed);
    auto cols = plan_cols(p);
    REQUIRE(cols.size() == 3);
    CHECK(cols[2].label == "MixedPerStep");

    p.kind = PlanKind::AdversaryMatrix;
    rows = plan_rows(p);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].label == "BLine");
    CHECK(rows[1].label == "Meander");
    CHECK(rows[2].label == "MixedPerEpisode");
    for (const auto& r : rows) {
        CHECK(r.env.turn_order == env::TurnOrder::BlueThenRed);  // fixed for this grid
    }
    CHECK(plan_cols(p)[1].env.red_policy_name == env::RedPolicyName::Meander);

    p.kind = PlanKind::HparamAblation;
    p.alt.learning_rate = 1e-5;
    p.alt.gamma = 0.8;
    p.alt.clip_range = 0.01;
    rows = plan_rows(p);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].label == "Default");
    CHECK(rows[0].hparams == p.base_hparams);
    CHECK(rows[1].label == "AltLR");
    CHECK(rows[1].hparams.learning_rate == 1e-5);
    CHECK(rows[1].hparams.gamma == p.base_hparams.gamma);
    CHECK(rows[2].label == "AltGamma");
    CHECK(rows[2].hparams.gamma == 0.8);
    CHECK(rows[3].label == "AltClip");
    CHECK(rows[3].hparams.clip_range == 0.01);
    CHECK(plan_cols(p).empty());

    p.kind = PlanKind::RandomBaseline;
    CHECK(plan_rows(p).empty());
    REQUIRE(plan_cols(p).size() == 1);
    CHECK(plan_cols(p)[0].label == "Default");
}

TEST_CASE("a random defender scores exactly zero against a sleeping attacker") {
    env::EnvConfig cfg;
    cfg.red_policy_name = env::RedPolicyName::Sleep;
    auto returns = random_episode_returns(cfg, 5, 20);
    REQUIRE(returns.size() == 20);
    for (double r : returns) CHECK(r == 0.0);
    stats::EvalStats s = run_random_baseline(cfg, 3, 10, 5);
    CHECK(s.mean == 0.0);
    CHECK(s.n_runs == 3);
}

TEST_CASE("random baseline against a live attacker is strictly negative") {
    env::EnvConfig cfg;  // b-line red
    auto returns = random_episode_returns(cfg, 5, 10);
    for (double r : returns) CHECK(r < 0.0);
}

TEST_CASE("turn-order matrix: complete grid, resumable, render-ready") {
    fs::path out = scratch_dir("matrix");
    ExperimentPlan p = tiny_plan(PlanKind::TurnOrderMatrix, out);
    MatrixResult m = run_turn_order_matrix(p);

    REQUIRE(m.row_labels.size() == 3);
    REQUIRE(m.col_labels.size() == 3);
    REQUIRE(m.cells.size() == 3);
    for (const auto& row : m.cells) {
        REQUIRE(row.size() == 3);
        for (const auto& cell : row) {
            CHECK_FALSE(cell.failed);
            CHECK(cell.per_run_means.size() == 2);
            CHECK(cell.stats.n_runs == 2);
            for (double v : cell.per_run_means) CHECK(v <= 0.0);
        }
    }
    REQUIRE(m.random_baseline.size() == 3);
    for (const auto& cell : m.random_baseline) {
        CHECK_FALSE(cell.failed);
        CHECK(cell.stats.mean <= 0.0);
    }
    CHECK(m.metadata.at("ci_over") == "per_run_mean_returns");
    CHECK(fs::exists(out / "plan.json"));
    CHECK(fs::exists(out / "cells" / "RedThenBlue" / "train" / "0" / "run_record.json"));
    CHECK(fs::exists(out / "cells" / "RedThenBlue" / "BlueThenRed" / "1" / "run_record.json"));
    nlohmann::json evrec = nlohmann::json::parse(
        std::ifstream((out / "cells" / "RedThenBlue" / "BlueThenRed" / "1" / "run_record.json").string()));
    CHECK(evrec.at("kind") == "eval");
    CHECK(evrec.at("episode_returns").size() == 4);

    // Re-running reuses every artifact and reproduces the result exactly.
    MatrixResult again = run_turn_order_matrix(p);
    CHECK(matrix_result_to_json(again) == matrix_result_to_json(m));
    // So does collecting from disk without running anything.
    ExperimentPlan fromdisk = load_plan((out / "plan.json").string());
    fromdisk.out_dir = out.string();
    MatrixResult collected = collect_matrix(fromdisk);
    CHECK(matrix_result_to_json(collected) == matrix_result_to_json(m));

    // Serialization round trip.
    MatrixResult back = matrix_result_from_json(matrix_result_to_json(m));
    CHECK(matrix_result_to_json(back) == matrix_result_to_json(m));

    // All four render formats produce plausible artifacts.
    std::string csv = render_matrix(m, "csv");
    CHECK(csv.rfind("train_variant,RedThenBlue,BlueThenRed,MixedPerStep\n", 0) == 0);
    CHECK(csv.find("\nRandom,") != std::string::npos);
    std::string txt = render_matrix(m, "txt");
    CHECK(txt.find("MixedPerStep") != std::string::npos);
    CHECK(txt.find("*") != std::string::npos);  // best-in-row marker
    std::string svg = render_matrix(m, "svg");
    CHECK(svg.rfind("<svg", 0) == 0);
    nlohmann::json rj = nlohmann::json::parse(render_matrix(m, "json"));
    CHECK(rj == matrix_result_to_json(m));
    CHECK_THROWS_AS(render_matrix(m, "pdf"), env::ConfigError);

    emit_matrix_report(m, (out / "report").string());
    for (const char* f : {"report.json", "report.csv", "report.txt", "report.svg"})
        CHECK(fs::exists(out / "report" / f));

    // Kind checking: this plan cannot drive the adversary grid.
    CHECK_THROWS_AS(run_adversary_matrix(p), env::ConfigError);
}

TEST_CASE("hparam ablation: four labeled curves with cross-run bands") {
    fs::path out = scratch_dir("ablate");
    ExperimentPlan p = tiny_plan(PlanKind::HparamAblation, out);
    p.alt.learning_rate = 1e-5;
    AblationResult a = run_hparam_ablation(p);

    REQUIRE(a.variants.size() == 4);
    CHECK(a.variants[0].label == "Default");
    CHECK(a.variants[1].label == "AltLR");
    CHECK(a.variants[2].label == "AltGamma");
    CHECK(a.variants[3].label == "AltClip");
    for (const auto& v : a.variants) {
        CHECK_FALSE(v.failed);
        REQUIRE(v.timesteps.size() == 2);  // evals at 0 and 512
        CHECK(v.timesteps[0] == 0);
        CHECK(v.timesteps[1] == 512);
        CHECK(v.mean.size() == 2);
        CHECK(v.ci_low.size() == 2);
        CHECK(v.ci_high.size() == 2);
        REQUIRE(v.run_values.size() == 2);
        for (const auto& rv : v.run_values) CHECK(rv.size() == 2);
        CHECK(v.final_stats.stats.n_runs == 2);
        for (size_t i = 0; i < 2; ++i) {
            CHECK(v.ci_low[i] <= v.mean[i]);
            CHECK(v.mean[i] <= v.ci_high[i]);
        }
    }
    CHECK_FALSE(a.random_baseline.failed);

    // The alternate learning rate actually reached the stored run records.
    auto rec = ppo::load_run_record((out / "cells" / "AltLR" / "train" / "0").string(),
                                    /*load_params=*/false);
    CHECK(rec.hparams.learning_rate == 1e-5);
    auto def = ppo::load_run_record((out / "cells" / "Default" / "train" / "0").string(),
                                    /*load_params=*/false);
    CHECK(def.hparams.learning_rate == p.base_hparams.learning_rate);

    // Idempotent re-run and disk re-collection agree with the first pass.
    AblationResult again = run_hparam_ablation(p);
    CHECK(ablation_result_to_json(again) == ablation_result_to_json(a));
    AblationResult collected = collect_ablation(p);
    CHECK(ablation_result_to_json(collected) == ablation_result_to_json(a));

    std::string csv = render_ablation(a, "csv");
    CHECK(csv.find("AltGamma") != std::string::npos);
    std::string txt = render_ablation(a, "txt");
    CHECK(txt.find("AltClip") != std::string::npos);
    std::string svg = render_ablation(a, "svg");
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("polyline") != std::string::npos);  // curves, not just text
    CHECK_THROWS_AS(render_ablation(a, "doc"), env::ConfigError);
    emit_ablation_report(a, (out / "report").string());
    CHECK(fs::exists(out / "report" / "report.svg"));
}

TEST_CASE("interrupted matrix artifacts are rebuilt, finished ones reused") {
    fs::path out = scratch_dir("resume");
    ExperimentPlan p = tiny_plan(PlanKind::TurnOrderMatrix, out);
    MatrixResult m = run_turn_order_matrix(p);

    // Wreck one evaluation artifact; the next run must regenerate only it.
    fs::path victim = out / "cells" / "MixedPerStep" / "RedThenBlue" / "0" / "run_record.json";
    REQUIRE(fs::exists(victim));
    std::ofstream(victim.string()) << "{ not json";
    auto train_stamp =
        fs::last_write_time(out / "cells" / "RedThenBlue" / "train" / "0" / "weights.bin");

    MatrixResult again = run_turn_order_matrix(p);
    CHECK(matrix_result_to_json(again) == matrix_result_to_json(m));
    CHECK(fs::last_write_time(out / "cells" / "RedThenBlue" / "train" / "0" / "weights.bin") ==
          train_stamp);  // trainings untouched
    nlohmann::json fixed = nlohmann::json::parse(std::ifstream(victim.string()));
    CHECK(fixed.at("kind") == "eval");
}
