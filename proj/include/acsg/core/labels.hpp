#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace acsg {

enum class LabelCategory { Rigid, Container, Cover, Handle };

std::string_view to_string(LabelCategory c);
LabelCategory label_category_from_string(std::string_view s);

// Semantic class -> coarse category table, shipped as data/labels.json.
// Unknown labels are Rigid.
class LabelTaxonomy {
public:
    LabelTaxonomy() = default;
    explicit LabelTaxonomy(std::map<std::string, LabelCategory> table);

    static LabelTaxonomy load(const std::string& path);
    // Loaded once from the shipped asset.
    static const LabelTaxonomy& standard();

    LabelCategory category(std::string_view label) const;
    bool is_container(std::string_view l) const { return category(l) == LabelCategory::Container; }
    bool is_cover(std::string_view l) const { return category(l) == LabelCategory::Cover; }
    bool is_handle(std::string_view l) const { return category(l) == LabelCategory::Handle; }

    std::vector<std::string> labels_in(LabelCategory c) const;

private:
    std::map<std::string, LabelCategory, std::less<>> table_;
};

}  // namespace acsg
