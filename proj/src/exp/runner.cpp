#include "acd/exp/runner.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <thread>

#include "acd/agents/blue.hpp"
#include "acd/env/environment.hpp"

namespace acd::exp {

namespace fs = std::filesystem;

namespace {

// Seed-space row/col tags that can never collide with real matrix indices.
enum : uint64_t { kTrainTag = 0xFFFF, kRandomTag = 0xFFFE };

std::string cell_dir(const ExperimentPlan& p, const std::string& row, const std::string& col,
                     int run) {
    return p.out_dir + "/cells/" + row + "/" + col + "/" + std::to_string(run);
}

bool file_exists(const std::string& path) { return fs::exists(path); }

nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    return nlohmann::json::parse(in);
}

void write_json(const std::string& path, const nlohmann::json& j) {
    fs::create_directories(fs::path(path).parent_path());
    std::ofstream out(path);
    out << j.dump(2) << "\n";
}

// A completed artifact that parses is reused as-is (cell-level idempotence).
bool valid_training_record(const std::string& dir) {
    if (!file_exists(dir + "/run_record.json") || !file_exists(dir + "/weights.bin")) return false;
    try {
        ppo::load_run_record(dir, false);
        return true;
    } catch (...) {
        return false;
    }
}

bool valid_eval_record(const std::string& path) {
    if (!file_exists(path)) return false;
    try {
        nlohmann::json j = read_json(path);
        return j.contains("mean_return") && j.contains("episode_returns");
    } catch (...) {
        return false;
    }
}

void run_jobs(std::vector<std::function<void()>>& jobs, int parallelism) {
    if (parallelism <= 1) {
        for (auto& job : jobs) job();
        return;
    }
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            jobs[i]();
        }
    };
    std::vector<std::thread> pool;
    const int n = std::min<int>(parallelism, static_cast<int>(jobs.size()));
    pool.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
}

struct EvalRecord {
    std::vector<double> episode_returns;
    double mean_return = 0.0;
    uint64_t seed = 0;
};

void write_eval_record(const std::string& dir, const std::string& row, const std::string& col,
                       int run, uint64_t seed, const std::vector<double>& returns) {
    double mean = 0.0;
    for (double r : returns) mean += r;
    mean /= static_cast<double>(returns.size());
    write_json(dir + "/run_record.json",
               nlohmann::json{{"kind", "eval"},
                              {"row", row},
                              {"col", col},
                              {"run", run},
                              {"seed", seed},
                              {"episodes", returns.size()},
                              {"episode_returns", returns},
                              {"mean_return", mean}});
}

CellStats aggregate_cell(const ExperimentPlan& p, const std::string& row, const std::string& col,
                         bool any_failed) {
    CellStats cell;
    cell.failed = any_failed;
    for (int run = 0; run < p.n_runs; ++run) {
        const std::string path = cell_dir(p, row, col, run) + "/run_record.json";
        if (!valid_eval_record(path)) {
            cell.failed = true;
            continue;
        }
        cell.per_run_means.push_back(read_json(path).at("mean_return").get<double>());
    }
    if (cell.per_run_means.size() >= 2)
        cell.stats = stats::summarize(cell.per_run_means);
    else
        cell.failed = true;
    return cell;
}

nlohmann::json plan_metadata(const ExperimentPlan& p) {
    return nlohmann::json{{"ci_over", "per_run_mean_returns"},
                          {"final_policy", "last checkpoint, not best"},
                          {"plan", plan_to_json(p)}};
}

// Trains every (row, run) policy that is not already on disk.
void ensure_trainings(const ExperimentPlan& p, const std::vector<Variant>& rows, int jobs,
                      std::vector<std::vector<bool>>& train_failed) {
    std::vector<std::function<void()>> work;
    std::mutex failures_mutex;
    train_failed.assign(rows.size(), std::vector<bool>(static_cast<size_t>(p.n_runs), false));
    for (size_t r = 0; r < rows.size(); ++r) {
        for (int run = 0; run < p.n_runs; ++run) {
            const std::string dir = cell_dir(p, rows[r].label, "train", run);
            work.push_back([&, r, run, dir] {
                bool failed = false;
                if (!valid_training_record(dir)) {
                    const uint64_t seed = derive_seed(p.seed, r, kTrainTag, static_cast<uint64_t>(run));
                    ppo::RunRecord rec =
                        ppo::train(rows[r].env, rows[r].hparams, seed, p.train_options);
                    ppo::save_run_record(dir, rec);
                    failed = rec.aborted;
                } else {
                    failed = read_json(dir + "/run_record.json").at("aborted").get<bool>();
                }
                if (failed) {
                    std::lock_guard<std::mutex> lock(failures_mutex);
                    train_failed[r][static_cast<size_t>(run)] = true;
                }
            });
        }
    }
    run_jobs(work, jobs);
}

MatrixResult run_matrix(const ExperimentPlan& p, int jobs) {
    const std::vector<Variant> rows = plan_rows(p);
    const std::vector<Variant> cols = plan_cols(p);
    fs::create_directories(p.out_dir);
    write_json(p.out_dir + "/plan.json", plan_to_json(p));

    std::vector<std::vector<bool>> train_failed;
    ensure_trainings(p, rows, jobs, train_failed);

    // Evaluation pass: each trained policy against every column condition,
    // plus the uniform-random defender per column.
    std::vector<std::function<void()>> work;
    for (size_t r = 0; r < rows.size(); ++r) {
        for (size_t c = 0; c < cols.size(); ++c) {
            for (int run = 0; run < p.n_runs; ++run) {
                const std::string dir = cell_dir(p, rows[r].label, cols[c].label, run);
                work.push_back([&, r, c, run, dir] {
                    if (valid_eval_record(dir + "/run_record.json")) return;
                    if (train_failed[r][static_cast<size_t>(run)]) return;
                    ppo::RunRecord rec =
                        ppo::load_run_record(cell_dir(p, rows[r].label, "train", run));
                    const uint64_t seed = derive_seed(p.seed, r, c, static_cast<uint64_t>(run));
                    std::vector<double> returns = ppo::evaluate_episode_returns(
                        rec.final_params, cols[c].env, seed, p.eval_episodes);
                    write_eval_record(dir, rows[r].label, cols[c].label, run, seed, returns);
                });
            }
        }
    }
    for (size_t c = 0; c < cols.size(); ++c) {
        for (int run = 0; run < p.n_runs; ++run) {
            const std::string dir = cell_dir(p, "random", cols[c].label, run);
            work.push_back([&, c, run, dir] {
                if (valid_eval_record(dir + "/run_record.json")) return;
                const uint64_t seed = derive_seed(p.seed, kRandomTag, c, static_cast<uint64_t>(run));
                std::vector<double> returns =
                    random_episode_returns(cols[c].env, seed, p.eval_episodes);
                write_eval_record(dir, "random", cols[c].label, run, seed, returns);
            });
        }
    }
    run_jobs(work, jobs);

    MatrixResult result;
    result.name = plan_kind_name(p.kind);
    result.metadata = plan_metadata(p);
    for (const auto& row : rows) result.row_labels.push_back(row.label);
    for (const auto& col : cols) result.col_labels.push_back(col.label);
    for (size_t r = 0; r < rows.size(); ++r) {
        bool row_train_failed = false;
        for (bool f : train_failed[r]) row_train_failed |= f;
        std::vector<CellStats> row_cells;
        for (const auto& col : cols)
            row_cells.push_back(aggregate_cell(p, rows[r].label, col.label, row_train_failed));
        result.cells.push_back(std::move(row_cells));
    }
    for (const auto& col : cols)
        result.random_baseline.push_back(aggregate_cell(p, "random", col.label, false));
    return result;
}

}  // namespace

std::vector<double> random_episode_returns(const env::EnvConfig& cfg, uint64_t seed,
                                           int episodes) {
    env::Environment environment(cfg);
    agents::RandomBlue blue(derive_seed(seed, 0xB1));
    std::vector<double> returns;
    returns.reserve(static_cast<size_t>(episodes));
    for (int e = 0; e < episodes; ++e) {
        environment.reset(derive_seed(seed, 0xE5, static_cast<uint64_t>(e)));
        double total = 0.0;
        while (!environment.done()) total += environment.step(blue.next()).reward.total;
        returns.push_back(total);
    }
    return returns;
}

stats::EvalStats run_random_baseline(const env::EnvConfig& cfg, int n_runs, int eval_episodes,
                                     uint64_t seed) {
    std::vector<double> per_run_means;
    for (int run = 0; run < n_runs; ++run) {
        std::vector<double> returns = random_episode_returns(
            cfg, derive_seed(seed, kRandomTag, 0, static_cast<uint64_t>(run)), eval_episodes);
        double mean = 0.0;
        for (double r : returns) mean += r;
        per_run_means.push_back(mean / static_cast<double>(returns.size()));
    }
    return stats::summarize(per_run_means);
}

MatrixResult run_turn_order_matrix(const ExperimentPlan& plan, int jobs) {
    if (plan.kind != PlanKind::TurnOrderMatrix)
        throw env::ConfigError("plan is not a turn_order plan");
    return run_matrix(plan, jobs);
}

MatrixResult run_adversary_matrix(const ExperimentPlan& plan, int jobs) {
    if (plan.kind != PlanKind::AdversaryMatrix)
        throw env::ConfigError("plan is not an adversary plan");
    return run_matrix(plan, jobs);
}

AblationResult run_hparam_ablation(const ExperimentPlan& plan, int jobs) {
    if (plan.kind != PlanKind::HparamAblation)
        throw env::ConfigError("plan is not an hparam plan");
    const std::vector<Variant> variants = plan_rows(plan);
    fs::create_directories(plan.out_dir);
    write_json(plan.out_dir + "/plan.json", plan_to_json(plan));

    std::vector<std::vector<bool>> train_failed;
    ensure_trainings(plan, variants, jobs, train_failed);

    // The baseline shares the evaluation budget of one training cell.
    std::vector<std::function<void()>> work;
    for (int run = 0; run < plan.n_runs; ++run) {
        const std::string dir = cell_dir(plan, "random", "Default", run);
        work.push_back([&, run, dir] {
            if (valid_eval_record(dir + "/run_record.json")) return;
            const uint64_t seed =
                derive_seed(plan.seed, kRandomTag, 0, static_cast<uint64_t>(run));
            std::vector<double> returns =
                random_episode_returns(plan.base_env, seed, plan.eval_episodes);
            write_eval_record(dir, "random", "Default", run, seed, returns);
        });
    }
    run_jobs(work, jobs);
    return collect_ablation(plan);
}

MatrixResult collect_matrix(const ExperimentPlan& plan) {
    MatrixResult result;
    result.name = plan_kind_name(plan.kind);
    result.metadata = plan_metadata(plan);
    const std::vector<Variant> rows = plan_rows(plan);
    const std::vector<Variant> cols = plan_cols(plan);
    for (const auto& row : rows) result.row_labels.push_back(row.label);
    for (const auto& col : cols) result.col_labels.push_back(col.label);
    for (const auto& row : rows) {
        std::vector<CellStats> row_cells;
        for (const auto& col : cols)
            row_cells.push_back(aggregate_cell(plan, row.label, col.label, false));
        result.cells.push_back(std::move(row_cells));
    }
    for (const auto& col : cols)
        result.random_baseline.push_back(aggregate_cell(plan, "random", col.label, false));
    return result;
}

AblationResult collect_ablation(const ExperimentPlan& plan) {
    AblationResult result;
    result.name = plan_kind_name(plan.kind);
    result.metadata = plan_metadata(plan);
    for (const auto& variant : plan_rows(plan)) {
        CurveSet set;
        set.label = variant.label;
        std::vector<double> finals;
        for (int run = 0; run < plan.n_runs; ++run) {
            const std::string dir = cell_dir(plan, variant.label, "train", run);
            if (!valid_training_record(dir)) {
                set.failed = true;
                continue;
            }
            ppo::RunRecord rec = ppo::load_run_record(dir, false);
            if (rec.aborted) set.failed = true;
            std::vector<double> values;
            std::vector<int64_t> steps;
            for (const auto& pt : rec.eval_curve) {
                steps.push_back(pt.timestep);
                values.push_back(pt.mean_return);
            }
            if (set.timesteps.empty()) set.timesteps = steps;
            if (steps == set.timesteps) {
                set.run_values.push_back(values);
                finals.push_back(rec.final_return());
            } else {
                set.failed = true;  // misaligned checkpoints: config drifted between runs
            }
        }
        const size_t n_curves = set.run_values.size();
        if (n_curves >= 2) {
            for (size_t k = 0; k < set.timesteps.size(); ++k) {
                std::vector<double> column;
                for (const auto& rv : set.run_values) column.push_back(rv[k]);
                stats::Interval ci = stats::mean_ci(column);
                set.mean.push_back(ci.mean);
                set.ci_low.push_back(ci.ci_low);
                set.ci_high.push_back(ci.ci_high);
            }
            set.final_stats.per_run_means = finals;
            set.final_stats.stats = stats::summarize(finals);
            set.final_stats.failed = set.failed;
        } else {
            set.failed = true;
            set.final_stats.failed = true;
        }
        result.variants.push_back(std::move(set));
    }
    result.random_baseline = aggregate_cell(plan, "random", "Default", false);
    return result;
}

}  // namespace acd::exp
