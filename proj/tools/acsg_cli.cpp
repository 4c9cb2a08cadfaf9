// acsg command line: gen | run | eval | export-dot | replay
// exit codes: 0 ok, 1 replay divergence, 2 validation/usage, 3 remote failure, 4 step limit hit

#include "acsg/harness/harness.hpp"
#include "acsg/metrics/metrics.hpp"
#include "acsg/worldsim/generator.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace acsg;
namespace fs = std::filesystem;

namespace {

constexpr int kExitDiverged = 1;
constexpr int kExitValidation = 2;
constexpr int kExitRemote = 3;
constexpr int kExitStepLimit = 4;

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void print_aggregate(const Aggregate& agg) {
    std::printf("%-12s %-15s %8s %8s %8s %8s %8s %8s\n", "family", "policy", "success", "objrec", "staterec", "unexpl",
                "ged", "actions");
    for (const auto& [key, m] : agg) {
        auto mean = [&](const char* k) { return m.contains(k) ? m.at(k).mean : std::nan(""); };
        std::printf("%-12s %-15s %8.3f %8.3f %8.3f %8.3f %8.2f %8.2f\n", key.first.c_str(), key.second.c_str(),
                    mean("success"), mean("object_recovery"), mean("state_recovery"), mean("unexplored_space"),
                    mean("ged"), mean("action_count"));
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Action-conditioned scene graph exploration benchmark"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate scenario suites");
    std::string gen_family = "all", gen_out = "suite";
    int gen_count = 10;
    std::uint64_t gen_seed = 7;
    gen->add_option("--family", gen_family, "DrawerOnly|DoorOnly|DrawerDoor|Recursive|Occlusion|all");
    gen->add_option("--count", gen_count, "variants per family")->check(CLI::PositiveNumber);
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_option("--out", gen_out, "output directory");

    // run
    auto* run = app.add_subcommand("run", "explore scenarios with one or more policies");
    std::vector<std::string> run_suites, run_scenarios, run_policies;
    std::string run_config, run_out = "out";
    std::optional<std::uint64_t> run_seed;
    std::optional<int> run_threads;
    std::optional<double> label_flip, miss, erosion, sigma, lambda, fail_prob;
    std::optional<int> max_steps;
    run->add_option("--suite", run_suites, "suite manifest.json (repeatable)");
    run->add_option("--scenario", run_scenarios, "scenario file (repeatable)");
    run->add_option("--policy", run_policies, "random|heuristic-open|heuristic-full|rule|oracle|remote (repeatable)");
    run->add_option("--config", run_config, "run config JSON");
    run->add_option("--seed", run_seed);
    run->add_option("--threads", run_threads);
    run->add_option("--label-flip", label_flip);
    run->add_option("--miss", miss);
    run->add_option("--erosion", erosion);
    run->add_option("--feature-sigma", sigma);
    run->add_option("--lambda", lambda);
    run->add_option("--max-steps", max_steps);
    run->add_option("--action-failure", fail_prob);
    run->add_option("--out", run_out, "output directory");

    // eval
    auto* eval = app.add_subcommand("eval", "score a graph (and optionally its trace) against a scenario");
    std::string eval_scenario, eval_graph, eval_trace;
    eval->add_option("--scenario", eval_scenario)->required();
    eval->add_option("--graph", eval_graph)->required();
    eval->add_option("--trace", eval_trace);

    // export-dot
    auto* dot = app.add_subcommand("export-dot", "write a graph as Graphviz DOT");
    std::string dot_graph, dot_scenario, dot_out;
    dot->add_option("--graph", dot_graph, "graph JSON");
    dot->add_option("--scenario", dot_scenario, "scenario file; exports its ground-truth graph");
    dot->add_option("--out", dot_out, "file (default stdout)");

    // replay
    auto* rep = app.add_subcommand("replay", "re-execute a trace and report divergences");
    std::string rep_trace, rep_scenario;
    std::optional<std::uint64_t> rep_noise_seed;
    rep->add_option("--trace", rep_trace)->required();
    rep->add_option("--scenario", rep_scenario)->required();
    rep->add_option("--noise-seed", rep_noise_seed, "replay detections under another noise seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitValidation;
    }

    try {
        if (*gen) {
            std::vector<Family> fams;
            if (gen_family == "all") fams.assign(kGeneratedFamilies.begin(), kGeneratedFamilies.end());
            else fams.push_back(family_from_string(gen_family));
            for (Family f : fams) {
                const fs::path dir = fams.size() == 1 ? fs::path(gen_out) : fs::path(gen_out) / std::string(to_string(f));
                const auto m = generate_suite(f, gen_count, gen_seed, dir.string());
                std::cout << (dir / "manifest.json").string() << " (" << m.scenarios.size() << " scenarios)\n";
            }
            return 0;
        }

        if (*run) {
            RunConfig cfg;
            if (!run_config.empty()) cfg = RunConfig::from_json(nlohmann::json::parse(slurp(run_config)));
            if (run_seed) cfg.seed = *run_seed;
            if (run_threads) cfg.threads = *run_threads;
            if (label_flip) cfg.explorer.noise.label_flip_prob = *label_flip;
            if (miss) cfg.explorer.noise.miss_prob = *miss;
            if (erosion) cfg.explorer.noise.mask_erosion_frac = *erosion;
            if (sigma) cfg.explorer.noise.feature_sigma = *sigma;
            if (lambda) cfg.explorer.lambda = *lambda;
            if (max_steps) cfg.explorer.max_steps = *max_steps;
            if (fail_prob) cfg.explorer.action_failure_prob = *fail_prob;
            if (const auto errs = cfg.check(); !errs.empty()) {
                for (const auto& e : errs) std::cerr << "config: " << e << "\n";
                return kExitValidation;
            }
            std::vector<ScenarioSpec> specs;
            for (const auto& m : run_suites)
                for (auto& s : load_suite(m)) specs.push_back(std::move(s));
            for (const auto& s : run_scenarios) specs.push_back(load_scenario_file(s));
            if (specs.empty()) {
                std::cerr << "run: give --suite or --scenario\n";
                return kExitValidation;
            }
            std::vector<PolicyKind> policies;
            if (run_policies.empty())
                policies = {PolicyKind::Random, PolicyKind::HeuristicOpen, PolicyKind::HeuristicFull, PolicyKind::Rule,
                            PolicyKind::Oracle};
            for (const auto& p : run_policies) policies.push_back(policy_kind_from_string(p));

            const SuiteResult res = run_suite(specs, policies, cfg, run_out);
            print_aggregate(res.aggregate);
            std::cout << "wrote " << res.rows.size() << " runs to " << run_out << "\n";
            if (!res.aborted_policies.empty()) {
                for (const auto& p : res.aborted_policies) std::cerr << "policy " << p << " aborted: remote backend failed\n";
                return kExitRemote;
            }
            return res.any_step_limit ? kExitStepLimit : 0;
        }

        if (*eval) {
            const ScenarioSpec spec = load_scenario_file(eval_scenario);
            const SceneGraph g = SceneGraph::from_json(slurp(eval_graph));
            nlohmann::json out = {{"scenario", spec.name},
                                  {"success", success(g, spec.gt_graph)},
                                  {"object_recovery", object_recovery(g, spec.gt_graph)},
                                  {"ged", ged(g, spec.gt_graph)}};
            if (!eval_trace.empty()) {
                std::vector<nlohmann::json> trace;
                std::istringstream in(slurp(eval_trace));
                std::string line;
                while (std::getline(in, line))
                    if (!line.empty()) trace.push_back(nlohmann::json::parse(line));
                if (!spec.need_to_explore.empty()) out["unexplored_space"] = unexplored_space(trace, spec);
            }
            std::cout << out.dump(2) << "\n";
            return 0;
        }

        if (*dot) {
            if (dot_graph.empty() == dot_scenario.empty()) {
                std::cerr << "export-dot: give exactly one of --graph / --scenario\n";
                return kExitValidation;
            }
            const std::string text = dot_graph.empty() ? load_scenario_file(dot_scenario).gt_graph.to_dot()
                                                       : SceneGraph::from_json(slurp(dot_graph)).to_dot();
            if (dot_out.empty()) {
                std::cout << text;
            } else {
                std::ofstream(dot_out) << text;
            }
            return 0;
        }

        if (*rep) {
            const ScenarioSpec spec = load_scenario_file(rep_scenario);
            const std::string text = slurp(rep_trace);
            std::optional<NoiseConfig> noise;
            if (rep_noise_seed) {
                const auto header = nlohmann::json::parse(text.substr(0, text.find('\n')));
                noise = noise_from_json(header.at("noise"));
                noise->rng_seed = *rep_noise_seed;
            }
            const ReplayReport r = replay(text, spec, noise);
            nlohmann::json out = {{"divergences", nlohmann::json::array()},
                                  {"world_divergence", r.world_divergence},
                                  {"perception_divergence", r.perception_divergence},
                                  {"ledger_checked", r.ledger_checked}};
            if (r.first_divergent_step) out["first_divergent_step"] = *r.first_divergent_step;
            for (const auto& d : r.divergences)
                out["divergences"].push_back({{"step", d.step}, {"kind", d.kind}, {"detail", d.detail}});
            std::cout << out.dump(2) << "\n";
            return r.divergences.empty() ? 0 : kExitDiverged;
        }
    } catch (const PolicyError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.code() == PolicyErrorCode::RemoteUnavailable || e.code() == PolicyErrorCode::RemoteUnparseable
                   ? kExitRemote
                   : kExitValidation;
    } catch (const WorldError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const GraphError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const ReplayError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return 0;
}
