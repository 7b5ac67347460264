#include "batchrl/harness.hpp"
#include "batchrl/io.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace batchrl;

int main(int argc, char** argv) {
    CLI::App app{"Batched episodic RL experiments"};
    app.require_subcommand(1);

    // run
    ExperimentConfig cfg;
    std::string preset = "paper";
    prec_t delta = 0.1, c1_scale = 0.0, c2_scale = 0.0, C1 = 0.0, epsilon = 0.0;
    Index n_design = 0;
    std::string out;
    auto* run = app.add_subcommand("run", "run the learner (and optionally a baseline) over seeds");
    run->add_option("--instance", cfg.instance, "path | random:S,A,H,seed | hard:A,H,K,seed")
        ->capture_default_str();
    run->add_option("--K", cfg.K, "episodes per run")->capture_default_str();
    run->add_option("--delta", delta, "failure probability")->capture_default_str();
    run->add_option("--seed", cfg.seed, "first seed")->capture_default_str();
    run->add_option("--reps", cfg.reps, "number of seeds")->capture_default_str();
    auto* o_c1 = run->add_option("--c1-scale", c1_scale, "stage-1 length scale");
    auto* o_c2 = run->add_option("--c2-scale", c2_scale, "stage-2 length scale");
    auto* o_C1 = run->add_option("--C1", C1, "known-set constant");
    run->add_option("--n-design", n_design, "design iterations (0 = default)");
    run->add_option("--epsilon", epsilon, "policy search threshold (0 = default)");
    run->add_option("--baseline", cfg.baseline, "none | uniform")
        ->check(CLI::IsMember({"none", "uniform"}))
        ->capture_default_str();
    run->add_option("--out", out, std::string("output directory (default $") + kOutputDirEnv + ")");
    run->add_option("--preset", preset, "paper | desk")
        ->check(CLI::IsMember({"paper", "desk"}))
        ->capture_default_str();

    // coverage
    std::string cov_instance = "random:2,2,3,0";
    CoverageConfig cov;
    auto* coverage = app.add_subcommand("coverage", "statistical coverage of the confidence regions");
    coverage->add_option("--instance", cov_instance, "instance spec")->capture_default_str();
    coverage->add_option("--delta", cov.delta)->capture_default_str();
    coverage->add_option("--seeds", cov.seeds)->capture_default_str();
    coverage->add_option("--batch-length", cov.batch_length)->capture_default_str();
    coverage->add_option("--C1", cov.C1)->capture_default_str();
    coverage->add_option("--seed", cov.first_seed)->capture_default_str();

    // instance
    std::string inst_spec;
    std::string inst_out;
    auto* instance = app.add_subcommand("instance", "write an instance as MDP json");
    instance->add_option("--instance", inst_spec, "instance spec")->required();
    instance->add_option("--out", inst_out, "output file (stdout when omitted)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            cfg.learner = preset == "paper" ? LearnerConfig::paper() : LearnerConfig::desk();
            cfg.learner.delta = delta;
            if (o_c1->count()) cfg.learner.c1_scale = c1_scale;
            if (o_c2->count()) cfg.learner.c2_scale = c2_scale;
            if (o_C1->count()) cfg.learner.C1 = C1;
            cfg.learner.n_design = n_design;
            cfg.learner.epsilon = epsilon;
            cfg.out = out;
            const ExperimentResult res = run_experiment(cfg);
            if (res.exit_status != 0) std::cerr << "error: " << res.message << '\n';
            if (!res.summary.empty()) std::cout << res.summary.string() << '\n';
            return res.exit_status;
        }
        if (*coverage) {
            const CoverageReport rep = coverage_test(make_instance(cov_instance), cov);
            json doc = {{"seeds", rep.seeds},
                        {"box_frequency", rep.box_frequency},
                        {"bernstein_frequency", rep.bernstein_frequency},
                        {"pass", rep.pass}};
            std::cout << doc.dump(2) << '\n';
            return rep.pass ? 0 : 4;
        }
        if (*instance) {
            const TabularMDP mdp = make_instance(inst_spec);
            if (inst_out.empty()) {
                std::cout << mdp_to_json(mdp).dump(1) << '\n';
            } else {
                save_mdp(inst_out, mdp);
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
