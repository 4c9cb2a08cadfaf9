#include "acsg/metrics/metrics.hpp"

#include "acsg/metrics/canonical.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <sstream>

namespace acsg {

std::string_view to_string(ErrorClass c) {
    switch (c) {
        case ErrorClass::None: return "none";
        case ErrorClass::Perception: return "perception";
        case ErrorClass::Decision: return "decision";
        case ErrorClass::Action: return "action";
    }
    return "?";
}

namespace {

std::multiset<std::string> node_keys(const std::map<NodeId, std::string>& keys) {
    std::multiset<std::string> out;
    for (const auto& [_, k] : keys) out.insert(k);
    return out;
}

std::multiset<std::string> edge_keys(const SceneGraph& g, const std::map<NodeId, std::string>& keys) {
    std::multiset<std::string> out;
    for (const auto& e : g.edges()) out.insert(edge_key(keys, e));
    return out;
}

// "label@path#d" -> d; keys without a depth suffix count as 0
int key_depth(const std::string& k) {
    const auto at = k.find('@');
    const auto hash = k.rfind('#');
    if (hash == std::string::npos || (at != std::string::npos && hash < at)) return 0;
    return std::atoi(k.c_str() + hash + 1);
}

std::string strip_depth(const std::string& k) {
    const auto hash = k.rfind('#');
    return hash == std::string::npos ? k : k.substr(0, hash);
}

}  // namespace

int success(const SceneGraph& out, const SceneGraph& gt) {
    const auto ko = canonical_keys(out);
    const auto kg = canonical_keys(gt);
    return node_keys(ko) == node_keys(kg) && edge_keys(out, ko) == edge_keys(gt, kg) ? 1 : 0;
}

double object_recovery(const SceneGraph& out, const SceneGraph& gt) {
    const auto kg = canonical_keys(gt);
    std::multiset<std::string> hidden;
    for (const auto& [id, k] : kg)
        if (id != kRootId && gt.is_object(id) && key_depth(k) > 0) hidden.insert(strip_depth(k));
    if (hidden.empty()) return 1.0;
    std::multiset<std::string> found;
    for (const auto& [id, k] : canonical_keys(out))
        if (id != kRootId && out.is_object(id)) found.insert(strip_depth(k));
    std::size_t hit = 0;
    for (auto it = hidden.begin(); it != hidden.end();) {
        const auto n = std::min(hidden.count(*it), found.count(*it));
        hit += n;
        it = hidden.upper_bound(*it);
    }
    return static_cast<double>(hit) / static_cast<double>(hidden.size());
}

int state_recovery(const WorldState& final_state, const WorldState& initial_state) {
    return final_state.same_configuration(initial_state) ? 1 : 0;
}

std::set<std::string> observed_regions_from_trace(const std::vector<nlohmann::json>& trace) {
    std::set<std::string> out;
    for (const auto& rec : trace) {
        if (!rec.contains("observations")) continue;
        for (const auto& o : rec.at("observations"))
            for (const auto& r : o.value("regions", nlohmann::json::array())) out.insert(r.get<std::string>());
    }
    return out;
}

double unexplored_space(const std::set<std::string>& observed, const ScenarioSpec& spec) {
    if (spec.need_to_explore.empty())
        throw MetricsError("scenario " + spec.name + " has no need-to-explore annotations");
    std::size_t missed = 0;
    for (const auto& r : spec.need_to_explore) missed += observed.count(r) ? 0 : 1;
    return static_cast<double>(missed) / static_cast<double>(spec.need_to_explore.size());
}

double unexplored_space(const std::vector<nlohmann::json>& trace, const ScenarioSpec& spec) {
    return unexplored_space(observed_regions_from_trace(trace), spec);
}

// ---- graph edit distance ----

namespace {

struct GedGraph {
    std::vector<int> label;               // per node index
    std::vector<std::vector<int>> adj;    // adj[i][j] = edge label or -1
    std::vector<std::pair<int, int>> edges;
};

class GedSearch {
public:
    GedSearch(GedGraph a, GedGraph b, int n_node_labels, int n_edge_labels, std::uint64_t budget)
        : a_(std::move(a)), b_(std::move(b)), nl_(n_node_labels), el_(n_edge_labels), budget_(budget) {
        const int na = static_cast<int>(a_.label.size());
        const int nb = static_cast<int>(b_.label.size());
        order_ = bfs_order();
        img_.assign(na, -2);
        used_.assign(nb, false);
        rem_a_.assign(nl_, 0);
        rem_b_.assign(nl_, 0);
        for (int x : a_.label) ++rem_a_[x];
        for (int x : b_.label) ++rem_b_[x];
        erem_a_.assign(el_, 0);
        erem_b_.assign(el_, 0);
        for (auto [i, j] : a_.edges) ++erem_a_[a_.adj[i][j]];
        for (auto [i, j] : b_.edges) ++erem_b_[b_.adj[i][j]];
        left_a_ = na;
        left_b_ = nb;
        best_ = na + nb + static_cast<int>(a_.edges.size() + b_.edges.size());
    }

    GedResult run() {
        dfs(0, 0);
        return {best_, !out_of_budget_, expansions_};
    }

private:
    std::vector<int> bfs_order() const {
        const int n = static_cast<int>(a_.label.size());
        std::vector<int> out;
        std::vector<bool> seen(n, false);
        for (int s = 0; s < n; ++s) {
            if (seen[s]) continue;
            std::deque<int> q{s};
            seen[s] = true;
            while (!q.empty()) {
                int u = q.front();
                q.pop_front();
                out.push_back(u);
                for (int v = 0; v < n; ++v)
                    if (!seen[v] && (a_.adj[u][v] >= 0 || a_.adj[v][u] >= 0)) {
                        seen[v] = true;
                        q.push_back(v);
                    }
            }
        }
        return out;
    }

    static int multiset_bound(const std::vector<int>& x, const std::vector<int>& y, int nx, int ny) {
        int common = 0;
        for (std::size_t i = 0; i < x.size(); ++i) common += std::min(x[i], y[i]);
        return std::max(nx, ny) - common;
    }

    int lower_bound() const {
        int ea = 0, eb = 0;
        for (int c : erem_a_) ea += c;
        for (int c : erem_b_) eb += c;
        return multiset_bound(rem_a_, rem_b_, left_a_, left_b_) + multiset_bound(erem_a_, erem_b_, ea, eb);
    }

    // cost of mapping order_[k] -> v (v == -1: delete) against the already mapped prefix
    int step_cost(int u, int v) const {
        int c = (v < 0 || a_.label[u] != b_.label[v]) ? 1 : 0;
        for (int t = 0; t < pos_k_; ++t) {
            const int w = order_[t];
            const int mw = img_[w];
            for (int dir = 0; dir < 2; ++dir) {
                const int la = dir == 0 ? a_.adj[u][w] : a_.adj[w][u];
                int lb = -1;
                if (v >= 0 && mw >= 0) lb = dir == 0 ? b_.adj[v][mw] : b_.adj[mw][v];
                if (la >= 0 && lb >= 0) c += la != lb;
                else if (la >= 0 || lb >= 0) c += 1;
            }
        }
        return c;
    }

    void dfs(int k, int cost) {
        if (out_of_budget_) return;
        if (++expansions_ > budget_) {
            out_of_budget_ = true;
            return;
        }
        const int na = static_cast<int>(order_.size());
        if (k == na) {
            // leftover target nodes and every target edge touching them are insertions
            int extra = left_b_;
            for (int c : erem_b_) extra += c;
            best_ = std::min(best_, cost + extra);
            return;
        }
        if (cost + lower_bound() >= best_) return;

        const int u = order_[k];
        pos_k_ = k;
        struct Cand { int cost; int same; int v; };
        std::vector<Cand> cands;
        const int nb = static_cast<int>(b_.label.size());
        for (int v = 0; v < nb; ++v)
            if (!used_[v]) cands.push_back({step_cost(u, v), b_.label[v] == a_.label[u] ? 0 : 1, v});
        cands.push_back({step_cost(u, -1), 2, -1});
        std::sort(cands.begin(), cands.end(),
                  [](const Cand& x, const Cand& y) { return std::tie(x.cost, x.same, x.v) < std::tie(y.cost, y.same, y.v); });

        for (const auto& c : cands) {
            if (cost + c.cost >= best_) break;  // sorted by cost
            assign(k, u, c.v, +1);
            dfs(k + 1, cost + c.cost);
            assign(k, u, c.v, -1);
            pos_k_ = k;
            if (out_of_budget_) return;
        }
    }

    // sign=+1 applies, -1 undoes the bookkeeping for u -> v
    void assign(int k, int u, int v, int sign) {
        if (sign > 0) img_[u] = v;
        rem_a_[a_.label[u]] -= sign;
        left_a_ -= sign;
        // source edges between u and the prefix become settled
        for (int t = 0; t < k; ++t) {
            const int w = order_[t];
            if (a_.adj[u][w] >= 0) erem_a_[a_.adj[u][w]] -= sign;
            if (a_.adj[w][u] >= 0) erem_a_[a_.adj[w][u]] -= sign;
        }
        if (v >= 0) {
            used_[v] = sign > 0;
            rem_b_[b_.label[v]] -= sign;
            left_b_ -= sign;
            for (int t = 0; t < k; ++t) {
                const int mw = img_[order_[t]];
                if (mw < 0) continue;
                if (b_.adj[v][mw] >= 0) erem_b_[b_.adj[v][mw]] -= sign;
                if (b_.adj[mw][v] >= 0) erem_b_[b_.adj[mw][v]] -= sign;
            }
        }
        if (sign < 0) img_[u] = -2;
    }

    GedGraph a_, b_;
    int nl_, el_;
    std::uint64_t budget_;
    std::vector<int> order_, img_;
    std::vector<bool> used_;
    std::vector<int> rem_a_, rem_b_, erem_a_, erem_b_;
    int left_a_ = 0, left_b_ = 0;
    int pos_k_ = 0;
    int best_ = 0;
    std::uint64_t expansions_ = 0;
    bool out_of_budget_ = false;
};

std::string node_label(const SceneGraph& g, NodeId id) {
    if (g.is_object(id)) return "obj:" + g.object(id).label;
    return "act:" + std::string(to_string(g.action(id).action_type));
}

std::string edge_label(const Edge& e) {
    std::string s(to_string(e.kind));
    if (e.relation) s += ":" + std::string(to_string(*e.relation));
    return s;
}

GedGraph encode(const SceneGraph& g, std::map<std::string, int>& nl, std::map<std::string, int>& el) {
    GedGraph out;
    std::map<NodeId, int> index;
    for (const auto& [id, _] : g.nodes()) {
        index[id] = static_cast<int>(out.label.size());
        auto [it, _2] = nl.emplace(node_label(g, id), static_cast<int>(nl.size()));
        out.label.push_back(it->second);
    }
    const std::size_t n = out.label.size();
    out.adj.assign(n, std::vector<int>(n, -1));
    for (const auto& e : g.edges()) {
        auto [it, _] = el.emplace(edge_label(e), static_cast<int>(el.size()));
        const int i = index.at(e.src), j = index.at(e.dst);
        out.adj[i][j] = it->second;
        out.edges.emplace_back(i, j);
    }
    return out;
}

}  // namespace

GedResult ged_detailed(const SceneGraph& a, const SceneGraph& b, std::uint64_t budget) {
    std::map<std::string, int> nl, el;
    auto ga = encode(a, nl, el);
    auto gb = encode(b, nl, el);
    GedSearch s(std::move(ga), std::move(gb), static_cast<int>(nl.size()), static_cast<int>(el.size()), budget);
    return s.run();
}

int ged(const SceneGraph& a, const SceneGraph& b) { return ged_detailed(a, b).value; }

ErrorClass classify_error(const std::vector<nlohmann::json>& trace, int succ, bool noiseless_replay_success) {
    if (succ) return ErrorClass::None;
    for (const auto& rec : trace)
        if (rec.value("injected_failure", false)) return ErrorClass::Action;
    return noiseless_replay_success ? ErrorClass::Perception : ErrorClass::Decision;
}

// ---- aggregation ----

MeanSem proportion_stats(const std::vector<double>& xs) {
    MeanSem m;
    m.n = xs.size();
    if (xs.empty()) return m;
    for (double x : xs) m.mean += x;
    m.mean /= static_cast<double>(m.n);
    m.sem = std::sqrt(m.mean * (1.0 - m.mean) / static_cast<double>(m.n));
    return m;
}

MeanSem sample_stats(const std::vector<double>& xs) {
    MeanSem m;
    m.n = xs.size();
    if (xs.empty()) return m;
    for (double x : xs) m.mean += x;
    m.mean /= static_cast<double>(m.n);
    if (m.n < 2) return m;
    double ss = 0;
    for (double x : xs) ss += (x - m.mean) * (x - m.mean);
    m.sem = std::sqrt(ss / static_cast<double>(m.n - 1)) / std::sqrt(static_cast<double>(m.n));
    return m;
}

Aggregate aggregate(const std::vector<EvalRow>& rows) {
    std::map<std::pair<std::string, std::string>, std::vector<const EvalRow*>> groups;
    for (const auto& r : rows) groups[{r.family, r.policy}].push_back(&r);
    Aggregate out;
    for (const auto& [key, rs] : groups) {
        std::map<std::string, std::vector<double>> prop, samp;
        for (const EvalRow* r : rs) {
            prop["success"].push_back(r->success);
            prop["state_recovery"].push_back(r->state_recovery);
            for (ErrorClass c : {ErrorClass::Perception, ErrorClass::Decision, ErrorClass::Action})
                prop["error_" + std::string(to_string(c))].push_back(r->error == c ? 1.0 : 0.0);
            samp["object_recovery"].push_back(r->object_recovery);
            if (!std::isnan(r->unexplored_space)) samp["unexplored_space"].push_back(r->unexplored_space);
            samp["ged"].push_back(r->ged);
            samp["action_count"].push_back(r->action_count);
        }
        auto& dst = out[key];
        for (const auto& [m, xs] : prop) dst[m] = proportion_stats(xs);
        for (const auto& [m, xs] : samp) dst[m] = sample_stats(xs);
    }
    return out;
}

namespace {

std::string fmt(double x) {
    if (std::isnan(x)) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

}  // namespace

std::string report_csv(const std::vector<EvalRow>& rows) {
    std::ostringstream os;
    os << "scenario,family,policy,seed,success,object_recovery,state_recovery,unexplored_space,ged,ged_exact,"
          "action_count,steps,step_limit,error_class\n";
    for (const auto& r : rows)
        os << r.scenario << ',' << r.family << ',' << r.policy << ',' << r.seed << ',' << r.success << ','
           << fmt(r.object_recovery) << ',' << r.state_recovery << ',' << fmt(r.unexplored_space) << ',' << r.ged << ','
           << (r.ged_exact ? 1 : 0) << ',' << r.action_count << ',' << r.steps << ',' << (r.step_limit ? 1 : 0) << ','
           << to_string(r.error) << '\n';
    return os.str();
}

nlohmann::json aggregate_json(const Aggregate& agg) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& [key, metrics] : agg) {
        nlohmann::json m = nlohmann::json::object();
        for (const auto& [name, s] : metrics) m[name] = {{"mean", s.mean}, {"sem", s.sem}, {"n", s.n}};
        out.push_back({{"family", key.first}, {"policy", key.second}, {"metrics", m}});
    }
    return out;
}

}  // namespace acsg
