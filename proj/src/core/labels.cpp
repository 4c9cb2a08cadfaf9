#include "acsg/core/labels.hpp"

#include "acsg/core/types.hpp"

#include <json.hpp>

#include <fstream>
#include <stdexcept>

namespace acsg {

std::string_view to_string(LabelCategory c) {
    switch (c) {
        case LabelCategory::Rigid: return "rigid";
        case LabelCategory::Container: return "container";
        case LabelCategory::Cover: return "cover";
        case LabelCategory::Handle: return "handle";
    }
    return "rigid";
}

LabelCategory label_category_from_string(std::string_view s) {
    if (s == "rigid") return LabelCategory::Rigid;
    if (s == "container") return LabelCategory::Container;
    if (s == "cover") return LabelCategory::Cover;
    if (s == "handle") return LabelCategory::Handle;
    throw std::invalid_argument("unknown label category: " + std::string(s));
}

LabelTaxonomy LabelTaxonomy::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open label taxonomy: " + path);
    const auto j = nlohmann::json::parse(in);
    std::map<std::string, LabelCategory> table;
    for (const auto& [cat, labels] : j.at("categories").items())
        for (const auto& l : labels) table[l.get<std::string>()] = label_category_from_string(cat);
    return LabelTaxonomy(std::move(table));
}

const LabelTaxonomy& LabelTaxonomy::standard() {
    static const LabelTaxonomy t = load(data_path("labels.json"));
    return t;
}

LabelCategory LabelTaxonomy::category(std::string_view label) const {
    auto it = table_.find(label);
    return it == table_.end() ? LabelCategory::Rigid : it->second;
}

std::vector<std::string> LabelTaxonomy::labels_in(LabelCategory c) const {
    std::vector<std::string> out;
    for (const auto& [l, cat] : table_)
        if (cat == c) out.push_back(l);
    return out;
}

LabelTaxonomy::LabelTaxonomy(std::map<std::string, LabelCategory> table)
    : table_(table.begin(), table.end()) {}

}  // namespace acsg
