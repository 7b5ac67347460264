#pragma once

#include "batchrl/learner.hpp"

#include <filesystem>
#include <string>

namespace batchrl {

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "BATCHRL_OUT";

/**
 * Builds an instance from a spec string:
 *   <path to MDP json> | random:S,A,H,seed | hard:A,H,K,seed
 * A hard instance gets a code drawn uniformly from `seed`.
 */
TabularMDP make_instance(const std::string& spec);

struct ExperimentConfig {
    std::string instance = "random:2,2,3,0";
    std::int64_t K = 100000;
    std::uint64_t seed = 0;
    Index reps = 1;
    LearnerConfig learner = LearnerConfig::paper();
    std::string baseline = "none"; ///< none | uniform
    std::filesystem::path out;     ///< empty selects $BATCHRL_OUT, then ./batchrl_out

    /// Throws std::invalid_argument on K < 4, delta outside (0,1), reps < 1 or an unknown baseline.
    void validate() const;
};

struct ExperimentResult {
    int exit_status = 0;
    std::string message;
    std::filesystem::path summary;
    std::vector<std::filesystem::path> run_files;
};

/**
 * Runs `reps` seeds (seed, seed + 1, ...) and writes one CSV per seed
 * (episode,batch,reward,cum_regret), baseline CSVs when requested and
 * summary.json with mean and standard deviation of cumulative regret at
 * checkpoint episodes (powers of two and K).
 */
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Writes the per-episode CSV of a log with regret attached.
void write_run_csv(const std::filesystem::path& path, const RunLog& log);

/// Powers of two up to K, then K.
std::vector<std::int64_t> checkpoints(std::int64_t K);

struct CoverageConfig {
    prec_t delta = 0.1;
    Index seeds = 200;
    std::int64_t batch_length = 200; ///< episodes per raw-exploration batch
    prec_t C1 = 1.0;
    std::uint64_t first_seed = 0;
};

struct CoverageReport {
    Index seeds = 0;
    prec_t box_frequency = 0.0;       ///< clipped true model inside build_cr
    prec_t bernstein_frequency = 0.0; ///< clipped true model meets the Bernstein pairs
    bool pass = false;                ///< both frequencies >= 1 - delta - 0.05
};

/**
 * Per seed: one raw-exploration stage (u = 0) gives D and the known set;
 * checks that clip(P) lies in build_cr(D). A further uniform batch D' is
 * then checked against the Bernstein pairs built with v fixed beforehand
 * (optimal values of the environment, 0 at z).
 */
CoverageReport coverage_test(const TabularMDP& env, const CoverageConfig& cfg);

} // namespace batchrl
