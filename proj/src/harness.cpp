#include "batchrl/harness.hpp"

#include "batchrl/hard_instances.hpp"
#include "batchrl/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace batchrl {

namespace {

std::vector<std::int64_t> parse_numbers(const std::string& text, std::size_t expected,
                                        const std::string& spec) {
    std::vector<std::int64_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        long long v = 0;
        try {
            v = std::stoll(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size() || item.empty())
            throw std::invalid_argument("bad number '" + item + "' in instance spec " + spec);
        out.push_back(v);
    }
    if (out.size() != expected)
        throw std::invalid_argument("instance spec " + spec + " needs " + std::to_string(expected) +
                                    " comma-separated numbers");
    return out;
}

std::string format_double(prec_t x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

struct Moments {
    prec_t mean = 0.0;
    prec_t std = 0.0;
};

Moments moments(const std::vector<prec_t>& xs) {
    Moments m;
    if (xs.empty()) return m;
    for (prec_t x : xs) m.mean += x;
    m.mean /= prec_t(xs.size());
    if (xs.size() > 1) {
        prec_t ss = 0.0;
        for (prec_t x : xs) ss += (x - m.mean) * (x - m.mean);
        m.std = std::sqrt(ss / prec_t(xs.size() - 1));
    }
    return m;
}

json aggregate(const std::vector<RunLog>& logs, const std::vector<std::int64_t>& marks) {
    json means = json::array();
    json stds = json::array();
    for (std::int64_t c : marks) {
        std::vector<prec_t> xs;
        for (const RunLog& log : logs)
            if (std::int64_t(log.cum_regret.size()) >= c) xs.push_back(log.cum_regret[std::size_t(c - 1)]);
        if (xs.size() != logs.size()) {
            means.push_back(nullptr);
            stds.push_back(nullptr);
            continue;
        }
        const Moments m = moments(xs);
        means.push_back(m.mean);
        stds.push_back(m.std);
    }
    return {{"mean_cum_regret", means}, {"std_cum_regret", stds}};
}

json schedule_json(const BatchSchedule& s) {
    return {{"K", s.K},
            {"iota", s.iota},
            {"k1", s.k1},
            {"k2", s.k2},
            {"M", s.M},
            {"K_m", s.elimination},
            {"executed_elimination", s.executed_elimination()},
            {"total_batches", s.total_batches()}};
}

} // namespace

TabularMDP make_instance(const std::string& spec) {
    if (spec.rfind("random:", 0) == 0) {
        const auto v = parse_numbers(spec.substr(7), 4, spec);
        if (v[0] < 1 || v[1] < 1 || v[2] < 1) throw std::invalid_argument("random instance needs S, A, H >= 1");
        return random_mdp(v[0], v[1], v[2], std::uint64_t(v[3]));
    }
    if (spec.rfind("hard:", 0) == 0) {
        const auto v = parse_numbers(spec.substr(5), 4, spec);
        const HardInstanceParams p = HardInstanceParams::make(v[0], v[1], v[2]);
        EpisodeRng rng = episode_stream(std::uint64_t(v[3]), 0);
        ActionCode code;
        for (Index i = 0; i < p.blocks * p.depth; ++i)
            code.push_back(Index(rng() % std::uint64_t(p.actions)) + 1);
        return concatenated_hard_mdp(p.actions, p.horizon, p.K, code);
    }
    return load_mdp(spec);
}

void ExperimentConfig::validate() const {
    if (K < 4) throw std::invalid_argument("K must be at least 4");
    if (!(learner.delta > 0.0 && learner.delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
    if (reps < 1) throw std::invalid_argument("reps must be at least 1");
    if (baseline != "none" && baseline != "uniform")
        throw std::invalid_argument("baseline must be 'none' or 'uniform'");
    if (!(learner.C1 > 0.0)) throw std::invalid_argument("C1 must be positive");
    if (learner.n_design < 0) throw std::invalid_argument("n_design must be nonnegative");
}

std::vector<std::int64_t> checkpoints(std::int64_t K) {
    std::vector<std::int64_t> out;
    for (std::int64_t c = 1; c < K; c *= 2) out.push_back(c);
    out.push_back(K);
    return out;
}

void write_run_csv(const std::filesystem::path& path, const RunLog& log) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "episode,batch,reward,cum_regret\n";
    const std::vector<Index> batch = log.batch_index();
    for (std::size_t i = 0; i < log.rewards.size(); ++i) {
        out << i + 1 << ',' << batch[i] << ',' << format_double(log.rewards[i]) << ','
            << (i < log.cum_regret.size() ? format_double(log.cum_regret[i]) : std::string("nan")) << '\n';
    }
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    ExperimentResult result;
    try {
        cfg.validate();
        const TabularMDP env = make_instance(cfg.instance);
        std::filesystem::path dir = cfg.out;
        if (dir.empty()) {
            const char* from_env = std::getenv(kOutputDirEnv);
            dir = from_env && *from_env ? from_env : "batchrl_out";
        }
        std::filesystem::create_directories(dir);

        std::vector<RunLog> runs;
        std::vector<RunLog> baselines;
        json per_seed = json::array();
        Index failures = 0;
        for (Index r = 0; r < cfg.reps; ++r) {
            const std::uint64_t seed = cfg.seed + std::uint64_t(r);
            RunLog log = run_main(env, cfg.K, cfg.learner, seed);
            attach_regret(log, env);
            const auto file = dir / ("run_" + std::to_string(seed) + ".csv");
            write_run_csv(file, log);
            result.run_files.push_back(file);
            Index non_survivors = 0;
            for (const auto& b : log.batches) non_survivors += b.non_survivors;
            failures += !log.abort_reason.empty();
            per_seed.push_back({{"seed", seed},
                                {"batches", log.batches.size()},
                                {"episodes", log.episodes()},
                                {"truncated", log.truncated},
                                {"abort_reason", log.abort_reason},
                                {"known_set_size", log.known_set_size},
                                {"non_survivors", non_survivors},
                                {"final_cum_regret", log.cum_regret.empty() ? 0.0 : log.cum_regret.back()},
                                {"wall_seconds", log.wall_seconds}});
            runs.push_back(std::move(log));
            if (cfg.baseline == "uniform") {
                RunLog base = run_baseline_uniform(env, cfg.K, seed);
                attach_regret(base, env);
                const auto bfile = dir / ("baseline_" + std::to_string(seed) + ".csv");
                write_run_csv(bfile, base);
                result.run_files.push_back(bfile);
                baselines.push_back(std::move(base));
            }
        }

        const auto marks = checkpoints(cfg.K);
        json summary;
        summary["instance"] = cfg.instance;
        summary["S"] = env.num_states();
        summary["A"] = env.num_actions();
        summary["H"] = env.horizon();
        summary["K"] = cfg.K;
        summary["delta"] = cfg.learner.delta;
        summary["seed"] = cfg.seed;
        summary["reps"] = cfg.reps;
        summary["constants"] = {{"c1_scale", cfg.learner.c1_scale},
                                {"c2_scale", cfg.learner.c2_scale},
                                {"C1", cfg.learner.C1},
                                {"n_design", cfg.learner.n_design},
                                {"epsilon", cfg.learner.epsilon}};
        summary["optimal_value"] = runs.front().optimal_value;
        summary["schedule"] = schedule_json(runs.front().schedule);
        summary["checkpoints"] = marks;
        summary["algorithm"] = aggregate(runs, marks);
        if (!baselines.empty()) summary["baseline"] = aggregate(baselines, marks);
        summary["runs"] = std::move(per_seed);
        summary["failures"] = failures;

        result.summary = dir / "summary.json";
        std::ofstream out(result.summary);
        if (!out) throw std::runtime_error("cannot write " + result.summary.string());
        out << summary.dump(2) << '\n';
        if (failures > 0) {
            result.exit_status = 3;
            result.message = std::to_string(failures) + " run(s) aborted; see summary.json";
        }
    } catch (const BudgetInfeasible& e) {
        result.exit_status = 2;
        result.message = e.what();
    } catch (const std::exception& e) {
        result.exit_status = 1;
        result.message = e.what();
    }
    return result;
}

CoverageReport coverage_test(const TabularMDP& env, const CoverageConfig& cfg) {
    if (cfg.seeds < 1) throw std::invalid_argument("coverage_test needs at least one seed");
    const Index S = env.num_states(), A = env.num_actions(), H = env.horizon();
    const prec_t iota = iota_of(cfg.delta);
    LearnerConfig lcfg;
    lcfg.delta = cfg.delta;
    lcfg.C1 = cfg.C1;

    std::vector<Vector> v(std::size_t(H + 1), Vector::Zero(S + 1));
    const OptimalValues opt = exact_optimal_value(env);
    for (Index h = 0; h <= H; ++h) v[h].head(S) = opt.V[h];

    CoverageReport report;
    report.seeds = cfg.seeds;
    Index box_hits = 0;
    Index bernstein_hits = 0;
    for (Index i = 0; i < cfg.seeds; ++i) {
        RunLog log;
        log.schedule.K = std::max<std::int64_t>(4, cfg.batch_length * (H + 1));
        log.schedule.horizon = H;
        log.schedule.iota = iota;
        Environment world(env, cfg.first_seed + std::uint64_t(i));
        TransitionCounts counts = raw_exploration(RewardFunction::zeros(S, A, H), TransitionCounts(S, A, H),
                                                  cfg.batch_length, world, lcfg, 1, log);
        const KnownSet known(counts, cfg.C1, iota);
        const TransitionModel truth = clip(env.model(), known);
        box_hits += contains(build_cr(counts, cfg.C1, iota, env.initial_state()), truth);

        TransitionCounts fresh(S, A, H);
        for (const Trajectory& t : world.run_batch(MarkovPolicy::uniform(S, A, H), cfg.batch_length))
            fresh.add(t);
        TransitionCounts cumulative = counts;
        cumulative.add(fresh);
        bernstein_hits += contains(
            build_cr_star(cumulative, fresh, known, v, iota, env.initial_state()), truth);
    }
    report.box_frequency = prec_t(box_hits) / prec_t(cfg.seeds);
    report.bernstein_frequency = prec_t(bernstein_hits) / prec_t(cfg.seeds);
    const prec_t need = 1.0 - cfg.delta - 0.05;
    report.pass = report.box_frequency >= need && report.bernstein_frequency >= need;
    return report;
}

} // namespace batchrl
