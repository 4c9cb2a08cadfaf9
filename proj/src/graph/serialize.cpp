#include "acsg/graph/scene_graph.hpp"

#include <json.hpp>

#include <sstream>

namespace acsg {

using nlohmann::json;

namespace {

json point_json(const GridPoint& p) { return json::array({p.x, p.y, p.z}); }
GridPoint point_from(const json& j) { return {j.at(0).get<int>(), j.at(1).get<int>(), j.at(2).get<int>()}; }
json vec_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }
Vec3 vec_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

json node_json(const Node& n) {
    json j;
    if (const auto* o = std::get_if<ObjectNode>(&n)) {
        j["id"] = o->id;
        j["kind"] = "object";
        j["label"] = o->label;
        j["feature"] = o->feature;
        j["geometry"] = o->geometry;
        j["physical_state"] = to_string(o->physical_state);
        j["explored"] = o->explored;
        j["discovered_at"] = o->discovered_at;
        return j;
    }
    const auto& a = std::get<ActionNode>(n);
    j["id"] = a.id;
    j["kind"] = "action";
    j["action_type"] = to_string(a.action_type);
    j["target"] = a.target;
    json p;
    p["grasp"] = point_json(a.params.grasp);
    p["approach"] = vec_json(a.params.approach);
    if (a.params.joint) {
        p["joint"] = {{"type", to_string(a.params.joint->joint)},
                      {"axis", vec_json(a.params.joint->axis)},
                      {"origin", point_json(a.params.joint->origin)}};
    }
    j["primitive_params"] = p;
    j["executed"] = a.executed;
    j["abandoned"] = a.abandoned;
    j["discovered_at"] = a.discovered_at;
    return j;
}

Node node_from(const json& j) {
    const std::string kind = j.at("kind");
    if (kind == "object") {
        ObjectNode o;
        o.id = j.at("id");
        o.label = j.at("label");
        o.feature = j.at("feature").get<std::vector<double>>();
        o.geometry = j.at("geometry");
        o.physical_state = physical_state_from_string(j.at("physical_state").get<std::string>());
        o.explored = j.at("explored");
        o.discovered_at = j.at("discovered_at");
        return o;
    }
    if (kind != "action") throw std::invalid_argument("unknown node kind " + kind);
    ActionNode a;
    a.id = j.at("id");
    a.action_type = action_type_from_string(j.at("action_type").get<std::string>());
    a.target = j.at("target");
    const auto& p = j.at("primitive_params");
    a.params.grasp = point_from(p.at("grasp"));
    a.params.approach = vec_from(p.at("approach"));
    if (p.contains("joint")) {
        const auto& jp = p.at("joint");
        a.params.joint = JointParams{joint_type_from_string(jp.at("type").get<std::string>()), vec_from(jp.at("axis")),
                                     point_from(jp.at("origin"))};
    }
    a.executed = j.at("executed");
    a.abandoned = j.value("abandoned", false);
    a.discovered_at = j.at("discovered_at");
    return a;
}

std::string dot_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

}  // namespace

std::string SceneGraph::to_json() const {
    json j;
    j["root"] = kRootId;
    j["feature_dim"] = feature_dim_;
    j["next_id"] = next_id_;
    j["nodes"] = json::array();
    for (const auto& [id, n] : nodes_) j["nodes"].push_back(node_json(n));
    j["edges"] = json::array();
    for (const auto& e : edges_) {
        json ej{{"src", e.src}, {"dst", e.dst}, {"kind", to_string(e.kind)}};
        if (e.relation) ej["relation"] = to_string(*e.relation);
        j["edges"].push_back(ej);
    }
    return j.dump();
}

SceneGraph SceneGraph::from_json(const std::string& text) {
    try {
        const json j = json::parse(text);
        SceneGraph g(j.at("feature_dim").get<std::size_t>());
        g.nodes_.clear();
        for (const auto& nj : j.at("nodes")) {
            Node n = node_from(nj);
            g.nodes_.emplace(node_id(n), std::move(n));
        }
        if (!g.is_object(kRootId)) throw std::invalid_argument("root node missing");
        g.next_id_ = j.at("next_id");
        for (const auto& ej : j.at("edges")) {
            std::optional<Relation> rel;
            if (ej.contains("relation")) rel = relation_from_string(ej.at("relation").get<std::string>());
            g.add_edge(ej.at("src"), ej.at("dst"), edge_kind_from_string(ej.at("kind").get<std::string>()), rel);
        }
        return g;
    } catch (const GraphError& e) {
        throw GraphError(GraphErrorCode::ParseError, std::string("invalid graph: ") + e.what());
    } catch (const std::exception& e) {
        throw GraphError(GraphErrorCode::ParseError, std::string("invalid graph json: ") + e.what());
    }
}

std::string SceneGraph::to_dot() const {
    std::ostringstream os;
    os << "digraph acsg {\n  rankdir=TB;\n";
    for (const auto& [id, n] : nodes_) {
        if (const auto* o = std::get_if<ObjectNode>(&n)) {
            os << "  n" << id << " [shape=box, label=\"" << dot_escape(o->label) << " #" << id << "\"];\n";
        } else {
            const auto& a = std::get<ActionNode>(n);
            os << "  n" << id << " [shape=ellipse, label=\"" << to_string(a.action_type) << " #" << id << "\"";
            if (!a.executed) os << ", color=gray";
            os << "];\n";
        }
    }
    for (const auto& e : edges_) {
        os << "  n" << e.src << " -> n" << e.dst;
        if (e.kind == EdgeKind::ActAct)
            os << " [style=dashed]";
        else if (e.relation)
            os << " [label=\"" << to_string(*e.relation) << "\"]";
        os << ";\n";
    }
    os << "}\n";
    return os.str();
}

std::string serialize(const SceneGraph& g, SerialFormat format) {
    return format == SerialFormat::Json ? g.to_json() : g.to_dot();
}

}  // namespace acsg
