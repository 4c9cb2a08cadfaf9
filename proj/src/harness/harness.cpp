#include "acsg/harness/harness.hpp"

#include "acsg/core/hash.hpp"
#include "acsg/worldsim/generator.hpp"
#include "acsg/worldsim/world.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;

namespace acsg {

namespace {

void write_file(const fs::path& p, const std::string& bytes) {
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << bytes;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> known, const std::string& where) {
    for (const auto& [k, _] : j.items())
        if (std::find_if(known.begin(), known.end(), [&](const char* x) { return k == x; }) == known.end())
            throw std::invalid_argument("unknown key '" + k + "' in " + where);
}

}  // namespace

nlohmann::json to_json(const NoiseConfig& n) {
    return {{"label_flip_prob", n.label_flip_prob}, {"miss_prob", n.miss_prob},
            {"mask_erosion_frac", n.mask_erosion_frac}, {"feature_sigma", n.feature_sigma},
            {"confidence_base", n.confidence_base}, {"confidence_jitter", n.confidence_jitter},
            {"rng_seed", n.rng_seed}, {"feature_dim", n.feature_dim}};
}

NoiseConfig noise_from_json(const nlohmann::json& j) {
    reject_unknown(j, {"label_flip_prob", "miss_prob", "mask_erosion_frac", "feature_sigma", "confidence_base",
                       "confidence_jitter", "rng_seed", "feature_dim"},
                   "noise");
    NoiseConfig n;
    n.label_flip_prob = j.value("label_flip_prob", n.label_flip_prob);
    n.miss_prob = j.value("miss_prob", n.miss_prob);
    n.mask_erosion_frac = j.value("mask_erosion_frac", n.mask_erosion_frac);
    n.feature_sigma = j.value("feature_sigma", n.feature_sigma);
    n.confidence_base = j.value("confidence_base", n.confidence_base);
    n.confidence_jitter = j.value("confidence_jitter", n.confidence_jitter);
    n.rng_seed = j.value("rng_seed", n.rng_seed);
    n.feature_dim = j.value("feature_dim", n.feature_dim);
    return n;
}

namespace {

nlohmann::json explorer_json(const ExplorerConfig& e) {
    return {{"lambda", e.lambda}, {"max_steps", e.max_steps}, {"recover_state", e.recover_state},
            {"action_failure_prob", e.action_failure_prob}, {"initial_views", e.initial_views}};
}

ExplorerConfig explorer_from_json(const nlohmann::json& j, ExplorerConfig e) {
    reject_unknown(j, {"lambda", "max_steps", "recover_state", "action_failure_prob", "initial_views"}, "explorer");
    e.lambda = j.value("lambda", e.lambda);
    e.max_steps = j.value("max_steps", e.max_steps);
    e.recover_state = j.value("recover_state", e.recover_state);
    e.action_failure_prob = j.value("action_failure_prob", e.action_failure_prob);
    e.initial_views = j.value("initial_views", e.initial_views);
    return e;
}

}  // namespace

std::vector<std::string> RunConfig::check() const {
    auto out = explorer.check();
    if (threads < 0) out.push_back("threads must be >= 0");
    return out;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    reject_unknown(j, {"seed", "threads", "rule_table", "prompt_dir", "attribute_errors", "explorer", "noise"}, "run config");
    RunConfig c;
    try {
        c.seed = j.value("seed", c.seed);
        c.threads = j.value("threads", c.threads);
        c.rule_table = j.value("rule_table", c.rule_table);
        c.prompt_dir = j.value("prompt_dir", c.prompt_dir);
        c.attribute_errors = j.value("attribute_errors", c.attribute_errors);
        if (j.contains("explorer")) c.explorer = explorer_from_json(j.at("explorer"), c.explorer);
        if (j.contains("noise")) c.explorer.noise = noise_from_json(j.at("noise"));
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("run config: ") + e.what());
    }
    return c;
}

nlohmann::json RunConfig::to_json() const {
    return {{"seed", seed}, {"threads", threads}, {"rule_table", rule_table}, {"prompt_dir", prompt_dir},
            {"attribute_errors", attribute_errors}, {"explorer", explorer_json(explorer)},
            {"noise", acsg::to_json(explorer.noise)}};
}

nlohmann::json SuiteManifest::to_json() const {
    return {{"family", to_string(family)}, {"seed", seed}, {"scenarios", scenarios}};
}

SuiteManifest SuiteManifest::from_json(const nlohmann::json& j) {
    SuiteManifest m;
    try {
        m.family = family_from_string(j.at("family").get<std::string>());
        m.seed = j.at("seed").get<std::uint64_t>();
        m.scenarios = j.at("scenarios").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw WorldError(WorldErrorCode::ParseError, std::string("manifest: ") + e.what());
    }
    return m;
}

SuiteManifest generate_suite(Family family, int count, std::uint64_t seed, const std::string& out_dir) {
    SuiteManifest m;
    m.family = family;
    m.seed = seed;
    for (int i = 0; i < count; ++i) {
        const ScenarioSpec s = generate_scenario(family, seed, i);
        const std::string file = s.name + ".json";
        write_file(fs::path(out_dir) / file, scenario_to_json(s));
        m.scenarios.push_back(file);
    }
    write_file(fs::path(out_dir) / "manifest.json", m.to_json().dump(2) + "\n");
    return m;
}

SuiteManifest load_manifest(const std::string& path) {
    try {
        return SuiteManifest::from_json(nlohmann::json::parse(read_file(path)));
    } catch (const nlohmann::json::parse_error& e) {
        throw WorldError(WorldErrorCode::ParseError, std::string("manifest: ") + e.what());
    }
}

std::vector<ScenarioSpec> load_suite(const std::string& manifest_path) {
    const SuiteManifest m = load_manifest(manifest_path);
    const fs::path dir = fs::path(manifest_path).parent_path();
    std::vector<ScenarioSpec> out;
    for (const auto& s : m.scenarios) out.push_back(load_scenario_file((dir / s).string()));
    return out;
}

std::uint64_t run_noise_seed(const RunConfig& cfg, const ScenarioSpec& spec) {
    return hash_values({cfg.seed, fnv1a(spec.name), spec.seed});
}

nlohmann::json trace_header(const ScenarioSpec& spec, PolicyKind policy, const RunConfig& cfg) {
    NoiseConfig n = cfg.explorer.noise;
    n.rng_seed = run_noise_seed(cfg, spec);
    return {{"format", "acsg-trace"}, {"version", kTraceVersion}, {"scenario", spec.name},
            {"family", to_string(spec.family)}, {"policy", to_string(policy)}, {"seed", cfg.seed},
            {"rule_table", cfg.rule_table}, {"prompt_dir", cfg.prompt_dir}, {"noise", to_json(n)},
            {"explorer", explorer_json(cfg.explorer)}};
}

namespace {

PolicyOptions policy_options(const ScenarioSpec& spec, const RunConfig& cfg) {
    PolicyOptions o;
    o.seed = hash_values({cfg.seed, fnv1a(spec.name)});
    o.ground_truth = &spec.gt_graph;
    o.remote = cfg.remote;
    o.rule_table = cfg.rule_table;
    o.prompt_dir = cfg.prompt_dir;
    return o;
}

}  // namespace

RunArtifacts run_one(const ScenarioSpec& spec, PolicyKind kind, const RunConfig& cfg) {
    const PolicyOptions opts = policy_options(spec, cfg);
    ExplorerConfig ec = cfg.explorer;
    ec.noise.rng_seed = run_noise_seed(cfg, spec);
    auto policy = make_policy(kind, opts);

    RunArtifacts a;
    a.result = run_exploration(spec, *policy, ec);
    const ExplorationResult& r = a.result;

    EvalRow& row = a.row;
    row.scenario = spec.name;
    row.family = std::string(to_string(spec.family));
    row.policy = std::string(to_string(kind));
    row.seed = cfg.seed;
    row.success = success(r.graph, spec.gt_graph);
    row.object_recovery = object_recovery(r.graph, spec.gt_graph);
    row.state_recovery = state_recovery(r.final_state, r.initial_state);
    row.unexplored_space = spec.need_to_explore.empty() ? std::nan("") : unexplored_space(r.trace, spec);
    const GedResult g = ged_detailed(r.graph, spec.gt_graph);
    row.ged = g.value;
    row.ged_exact = g.exact;
    row.action_count = r.action_count;
    row.steps = r.steps;
    row.step_limit = r.step_limit_exceeded;

    bool clean_success = false;
    if (!row.success && cfg.attribute_errors && !ec.noise.noiseless()) {
        ExplorerConfig clean = ec;
        NoiseConfig n;
        n.feature_dim = ec.noise.feature_dim;
        n.confidence_base = ec.noise.confidence_base;
        n.rng_seed = ec.noise.rng_seed;
        clean.noise = n;
        auto p2 = make_policy(kind, opts);
        clean_success = success(run_exploration(spec, *p2, clean).graph, spec.gt_graph) == 1;
    }
    row.error = classify_error(r.trace, row.success, clean_success);

    a.trace_jsonl = trace_to_jsonl(trace_header(spec, kind, cfg), r.trace);
    a.graph_json = r.graph.to_json();
    return a;
}

SuiteResult run_suite(const std::vector<ScenarioSpec>& scenarios, const std::vector<PolicyKind>& policies,
                      const RunConfig& cfg, const std::string& out_dir) {
    struct Job {
        std::size_t scenario;
        std::size_t policy;
    };
    std::vector<Job> jobs;
    for (std::size_t s = 0; s < scenarios.size(); ++s)
        for (std::size_t p = 0; p < policies.size(); ++p) jobs.push_back({s, p});

    std::vector<std::optional<RunArtifacts>> done(jobs.size());
    std::vector<std::atomic<bool>> aborted(policies.size());
    for (auto& a : aborted) a = false;
    std::atomic<std::size_t> next{0};
    std::mutex err_mu;
    std::exception_ptr fatal;

    auto worker = [&] {
        while (true) {
            const std::size_t i = next++;
            if (i >= jobs.size()) return;
            const Job& j = jobs[i];
            if (aborted[j.policy]) continue;
            try {
                done[i] = run_one(scenarios[j.scenario], policies[j.policy], cfg);
            } catch (const PolicyError& e) {
                if (e.code() == PolicyErrorCode::RemoteUnavailable || e.code() == PolicyErrorCode::RemoteUnparseable) {
                    aborted[j.policy] = true;
                } else {
                    std::lock_guard lock(err_mu);
                    if (!fatal) fatal = std::current_exception();
                }
            } catch (...) {
                std::lock_guard lock(err_mu);
                if (!fatal) fatal = std::current_exception();
            }
        }
    };
    unsigned n = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads) : std::max(1u, std::thread::hardware_concurrency());
    n = std::min<unsigned>(n, static_cast<unsigned>(std::max<std::size_t>(1, jobs.size())));
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (fatal) std::rethrow_exception(fatal);

    SuiteResult out;
    for (std::size_t p = 0; p < policies.size(); ++p)
        if (aborted[p]) out.aborted_policies.push_back(std::string(to_string(policies[p])));
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        if (aborted[jobs[i].policy] || !done[i]) continue;
        const RunArtifacts& a = *done[i];
        out.rows.push_back(a.row);
        out.any_step_limit |= a.row.step_limit;
        if (!out_dir.empty()) {
            const std::string stem = a.row.scenario + "__" + a.row.policy;
            write_file(fs::path(out_dir) / "traces" / (stem + ".jsonl"), a.trace_jsonl);
            write_file(fs::path(out_dir) / "graphs" / (stem + ".json"), a.graph_json);
        }
    }
    out.aggregate = aggregate(out.rows);
    if (!out_dir.empty()) {
        write_file(fs::path(out_dir) / "report.csv", report_csv(out.rows));
        nlohmann::json agg = {{"groups", aggregate_json(out.aggregate)}, {"aborted_policies", out.aborted_policies}};
        write_file(fs::path(out_dir) / "aggregate.json", agg.dump(2) + "\n");
    }
    return out;
}

// ---- replay ----

ReplayReport replay(const std::string& trace_jsonl, const ScenarioSpec& spec,
                    const std::optional<NoiseConfig>& noise_override) {
    std::vector<nlohmann::json> lines;
    {
        std::istringstream in(trace_jsonl);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            try {
                lines.push_back(nlohmann::json::parse(line));
            } catch (const nlohmann::json::parse_error& e) {
                throw ReplayError(std::string("bad trace line: ") + e.what());
            }
        }
    }
    if (lines.empty() || lines.front().value("format", "") != "acsg-trace")
        throw ReplayError("trace has no header");
    const nlohmann::json& header = lines.front();
    if (header.value("version", -1) != kTraceVersion)
        throw ReplayError("trace version " + std::to_string(header.value("version", -1)) + " but this build reads " +
                          std::to_string(kTraceVersion));

    ReplayReport rep;
    auto diverge = [&](int step, const std::string& kind, const std::string& detail) {
        rep.divergences.push_back({step, kind, detail});
        if (!rep.first_divergent_step) rep.first_divergent_step = step;
        if (kind == "world" || kind == "outcome") rep.world_divergence = true;
        if (kind == "perception") rep.perception_divergence = true;
    };

    const NoiseConfig noise = noise_override ? *noise_override : noise_from_json(header.at("noise"));
    World w(spec);
    std::vector<InterventionEvent> events = spec.events;
    std::stable_sort(events.begin(), events.end(),
                     [](const auto& a, const auto& b) { return a.trigger_step < b.trigger_step; });
    std::size_t next_event = 0;

    auto check_views = [&](const nlohmann::json& holder, int step) {
        if (!holder.contains("observations")) return;
        for (const auto& o : holder.at("observations")) {
            const auto obs = w.render_observation(o.at("viewpoint").get<std::string>());
            if (obs.observed_regions != o.value("regions", std::vector<std::string>{}))
                diverge(step, "world", "regions seen from " + o.at("viewpoint").get<std::string>());
            const auto dets = detect(obs, w, noise);
            if (to_hex(detections_digest(dets)) != o.value("detections", ""))
                diverge(step, "perception", "detections from " + o.at("viewpoint").get<std::string>());
        }
    };

    for (std::size_t i = 1; i < lines.size(); ++i) {
        const nlohmann::json& rec = lines[i];
        const int step = rec.value("step", 0);
        w.set_step(step);
        if (rec.contains("interventions")) {
            for (const auto& iv : rec.at("interventions")) {
                if (next_event >= events.size()) {
                    diverge(step, "world", "trace has more interventions than the scenario");
                    break;
                }
                bool rejected = false;
                try {
                    w.apply_event(events[next_event]);
                } catch (const WorldError&) {
                    rejected = true;
                }
                ++next_event;
                if (rejected != iv.contains("rejected")) diverge(step, "world", "intervention acceptance differs");
                if (iv.contains("world") && iv.at("world") != to_hex(w.digest()))
                    diverge(step, "world", "state after intervention");
                check_views(iv, step);
            }
        }
        if (rec.contains("object") && rec.contains("world")) {
            const ActionType t = action_type_from_string(rec.at("action").get<std::string>());
            const ActionOutcome out = w.apply_action(t, rec.at("object").get<ObjectId>());
            if (to_string(out.status) != rec.value("outcome", ""))
                diverge(step, "outcome",
                        std::string(to_string(t)) + " gave " + std::string(to_string(out.status)) + ", trace says " +
                            rec.value("outcome", ""));
            if (to_hex(w.digest()) != rec.at("world")) diverge(step, "world", "state after " + std::string(to_string(t)));
        }
        check_views(rec, step);
    }

    // ledger: only meaningful when the run can be repeated exactly
    const PolicyKind kind = policy_kind_from_string(header.at("policy").get<std::string>());
    if (!noise_override && kind != PolicyKind::Remote) {
        RunConfig cfg;
        cfg.seed = header.at("seed").get<std::uint64_t>();
        cfg.rule_table = header.value("rule_table", "");
        cfg.prompt_dir = header.value("prompt_dir", "");
        cfg.explorer = explorer_from_json(header.at("explorer"), cfg.explorer);
        cfg.explorer.noise = noise_from_json(header.at("noise"));
        auto policy = make_policy(kind, policy_options(spec, cfg));
        ExplorerConfig ec = cfg.explorer;
        const auto again = run_exploration(spec, *policy, ec);
        rep.ledger_checked = true;
        if (again.trace.size() != lines.size() - 1)
            diverge(static_cast<int>(again.trace.size()), "ledger", "trace length differs");
        for (std::size_t i = 0; i + 1 < lines.size() && i < again.trace.size(); ++i) {
            const auto& a = lines[i + 1];
            const auto& b = again.trace[i];
            if (a.value("rewards", nlohmann::json()) != b.value("rewards", nlohmann::json())) {
                diverge(a.value("step", 0), "ledger", "rewards differ");
                break;
            }
        }
    }
    std::stable_sort(rep.divergences.begin(), rep.divergences.end(),
                     [](const auto& a, const auto& b) { return a.step < b.step; });
    if (!rep.divergences.empty()) rep.first_divergent_step = rep.divergences.front().step;
    return rep;
}

}  // namespace acsg
