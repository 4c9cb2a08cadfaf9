#include "acsg/policy/policy.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace acsg {

namespace {

std::string load_template(PromptRole role, const std::string& dir) {
    const std::string name = role == PromptRole::Proposer ? "proposer.txt" : "verifier.txt";
    const std::string path = (dir.empty() ? data_path("prompts") : dir) + "/" + name;
    std::ifstream in(path);
    if (!in) throw PolicyError(PolicyErrorCode::TemplateMissing, "prompt template missing: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string fill(std::string text, const std::map<std::string, std::string>& values) {
    for (const auto& [k, v] : values) {
        const std::string tag = "{{" + k + "}}";
        for (auto pos = text.find(tag); pos != std::string::npos; pos = text.find(tag, pos + v.size()))
            text.replace(pos, tag.size(), v);
    }
    return text;
}

std::string box_text(const Box& b) {
    std::ostringstream ss;
    ss << "x " << b.lo.x << ".." << b.hi.x << ", y " << b.lo.y << ".." << b.hi.y << ", z " << b.lo.z << ".." << b.hi.z;
    return ss.str();
}

std::string dims(const GridPoint& p) {
    return std::to_string(p.x) + " x " + std::to_string(p.y) + " x " + std::to_string(p.z);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

// Text after the last "[final answer]:" marker, lowercased and trimmed of spaces and trailing punctuation.
std::string final_answer(const std::string& text) {
    const std::string low = lower(text);
    const std::string marker = "[final answer]";
    const auto pos = low.rfind(marker);
    if (pos == std::string::npos) throw PolicyError(PolicyErrorCode::RemoteUnparseable, "no final answer line");
    std::string rest = low.substr(pos + marker.size());
    if (const auto nl = rest.find('\n'); nl != std::string::npos) rest.resize(nl);
    auto strip = [](unsigned char c) { return std::isspace(c) || c == ':' || c == '.' || c == '!' || c == '"' || c == '*'; };
    while (!rest.empty() && strip(rest.front())) rest.erase(rest.begin());
    while (!rest.empty() && strip(rest.back())) rest.pop_back();
    return rest;
}

}  // namespace

std::string render_prompt(PromptRole role, const ProposerQuery& q, const std::string& dir) {
    if (role != PromptRole::Proposer) throw PolicyError(PolicyErrorCode::TemplateMissing, "proposer query needs the proposer template");
    std::string rel;
    for (const auto& r : q.object.relations) rel += (rel.empty() ? "" : "; ") + r;
    return fill(load_template(role, dir), {{"label", q.object.label},
                                           {"physical_state", q.object.physical_state},
                                           {"has_handle", q.object.has_handle ? "yes" : "no"},
                                           {"footprint", dims(q.object.footprint)},
                                           {"relations", rel.empty() ? "none" : rel},
                                           {"explored", std::to_string(q.explored)},
                                           {"unexplored", std::to_string(q.unexplored)}});
}

std::string render_prompt(PromptRole role, const VerifierQuery& q, const std::string& dir) {
    if (role != PromptRole::Verifier) throw PolicyError(PolicyErrorCode::TemplateMissing, "verifier query needs the verifier template");
    std::string cands;
    for (const auto& c : q.candidates)
        cands += "  - object " + std::to_string(c.node) + ": " + c.label + ", occupying " + box_text(c.footprint) + "\n";
    if (cands.empty()) cands = "  none\n";
    cands.pop_back();
    return fill(load_template(role, dir), {{"action", std::string(to_string(q.action))},
                                           {"target", q.target.label + " (object " + std::to_string(q.target.node) + ")"},
                                           {"sweep", box_text(q.sweep)},
                                           {"candidates", cands}});
}

Decision parse_proposer_answer(const std::string& text) {
    const std::string a = final_answer(text);
    if (a == "open the doors or drawers") return Decision::OpenDoorsOrDrawers;
    if (a == "pick it up") return Decision::PickUpToReveal;
    if (a == "no action") return Decision::NoAction;
    throw PolicyError(PolicyErrorCode::RemoteUnparseable, "unrecognised proposer answer: " + a);
}

VerifierAnswer parse_verifier_answer(const std::string& text, const VerifierQuery& q) {
    const std::string a = final_answer(text);
    if (a == "feasible") return VerifierAnswer::ok();
    const std::string prefix = "blocked by";
    if (a.rfind(prefix, 0) == 0) {
        std::string id = a.substr(prefix.size());
        id.erase(0, id.find_first_not_of(" "));
        if (id.rfind("object ", 0) == 0) id = id.substr(7);
        try {
            std::size_t used = 0;
            const long n = std::stol(id, &used);
            if (used == id.size())
                for (const auto& c : q.candidates)
                    if (static_cast<long>(c.node) == n) return VerifierAnswer::blocked_by(c.node);
        } catch (const std::exception&) {
        }
    }
    throw PolicyError(PolicyErrorCode::RemoteUnparseable, "unrecognised verifier answer: " + a);
}

}  // namespace acsg
