#include "acsg/geometry/geometry.hpp"
#include "acsg/worldsim/generator.hpp"

#include <functional>

namespace acsg {

namespace {

bool movable(const GroundObject& o) { return o.kind == ObjectKind::Rigid || o.kind == ObjectKind::Cover; }

}  // namespace

SceneGraph build_gt_graph(const std::map<ObjectId, GroundObject>& objects) {
    SceneGraph g;
    std::map<ObjectId, NodeId> node;
    for (const auto& [id, o] : objects) {
        const PhysicalState st = o.kind == ObjectKind::Container ? PhysicalState::Closed : PhysicalState::AtOrigin;
        node[id] = g.add_object_node(o.label, {}, id, st);
        g.mark_explored(node[id]);
    }

    for (const auto& [id, o] : objects) {
        if (o.handle_of) {
            g.add_edge(node.at(o.handle_of->container), node[id], EdgeKind::ObjObj, Relation::BelongsTo);
        } else if (!o.parent) {
            g.add_edge(kRootId, node[id], EdgeKind::ObjObj, Relation::On);
        } else {
            Relation rel = Relation::On;
            switch (o.parent->kind) {
                case ParentRef::Kind::Inside: rel = Relation::Inside; break;
                case ParentRef::Kind::CoveredBy:
                case ParentRef::Kind::NestedIn: rel = Relation::Covers; break;
                case ParentRef::Kind::On: rel = Relation::On; break;
            }
            g.add_edge(node.at(o.parent->object), node[id], EdgeKind::ObjObj, rel);
        }
    }

    auto add_action = [&](ActionType t, ObjectId target, std::optional<JointParams> joint) {
        PrimitiveParams p;
        p.grasp = geometry::pickup_point(objects.at(target).voxels);
        p.joint = joint;
        if (joint) p.approach = {0.0, 1.0, 0.0};
        NodeId a = g.add_action_node(t, node.at(target), p);
        g.mark_explored(a);
        g.add_edge(node.at(target), a, EdgeKind::ObjAct);
        return a;
    };

    std::map<ObjectId, NodeId> picks;
    auto pick_of = [&](ObjectId id) {
        auto it = picks.find(id);
        if (it != picks.end()) return it->second;
        return picks[id] = add_action(ActionType::PickToIdle, id, std::nullopt);
    };

    for (const auto& [id, o] : objects) {
        if (!o.handle_of || !o.articulation) continue;
        const bool revolute = o.articulation->joint.joint == JointType::Revolute;
        const NodeId open = add_action(revolute ? ActionType::OpenDoor : ActionType::OpenDrawer, id, o.articulation->joint);
        for (const auto& [cid, c] : objects)
            if (c.parent && c.parent->kind == ParentRef::Kind::Inside && c.parent->object == o.handle_of->container &&
                c.parent->compartment == o.handle_of->compartment)
                g.add_edge(open, node[cid], EdgeKind::ActObj);
        if (o.blocking_region)
            for (const auto& [bid, b] : objects)
                if (movable(b) && b.voxels.intersects(*o.blocking_region))
                    g.add_edge(pick_of(bid), open, EdgeKind::ActAct);
    }

    for (const auto& [id, o] : objects) {
        if (!o.parent) continue;
        if (o.parent->kind != ParentRef::Kind::CoveredBy && o.parent->kind != ParentRef::Kind::NestedIn) continue;
        g.add_edge(pick_of(o.parent->object), node[id], EdgeKind::ActObj);
    }
    return g;
}

int gt_action_count(const SceneGraph& gt) {
    int n = 0;
    for (const auto& [id, node] : gt.nodes())
        if (const auto* a = std::get_if<ActionNode>(&node); a && a->action_type != ActionType::MoveCamera) n += 2;
    return n;
}

int gt_action_depth(const SceneGraph& gt) {
    std::map<NodeId, int> memo;
    std::function<int(NodeId)> depth = [&](NodeId n) -> int {
        if (auto it = memo.find(n); it != memo.end()) return it->second;
        int best = 0;
        for (const auto& e : gt.in_edges(n)) best = std::max(best, depth(e.src));
        return memo[n] = best + (gt.is_action(n) ? 1 : 0);
    };
    int best = 0;
    for (const auto& [id, node] : gt.nodes()) best = std::max(best, depth(id));
    return best;
}

}  // namespace acsg
