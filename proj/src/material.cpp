#include "mutomo/material.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace mutomo {

double material_lambda(const Material& m) {
    if (m.empty()) return 0.0;
    if (m.radiation_length <= 0.0)
        throw std::invalid_argument("invalid material '" + m.name +
                                    "': radiation length must be positive");
    return 1.0 / m.radiation_length;
}

Material make_material(std::string name, double radiation_length) {
    if (radiation_length <= 0.0)
        throw std::invalid_argument("invalid material '" + name +
                                    "': radiation length must be positive");
    return Material{std::move(name), radiation_length, 1.0 / radiation_length};
}

Material make_empty_material() { return Material{"empty", 0.0, 0.0}; }

MaterialLibrary::MaterialLibrary() : MaterialLibrary(default_library().solids()) {}

MaterialLibrary::MaterialLibrary(const std::vector<Material>& solids) {
    materials_.push_back(make_empty_material());
    for (const auto& m : solids) {
        if (m.empty())
            continue;  // a single distinguished empty member is kept at index 0
        materials_.push_back(make_material(m.name, m.radiation_length));
    }
    validate();
}

void MaterialLibrary::validate() const {
    if (solids().empty())
        throw std::invalid_argument("material library needs at least one solid material");
    std::set<std::string> names;
    for (const auto& m : materials_)
        if (!names.insert(m.name).second)
            throw std::invalid_argument("duplicate material name '" + m.name + "'");
}

std::vector<Material> MaterialLibrary::solids() const {
    std::vector<Material> out;
    for (const auto& m : materials_)
        if (!m.empty()) out.push_back(m);
    return out;
}

double MaterialLibrary::lambda_max() const {
    double best = 0.0;
    for (const auto& m : materials_) best = std::max(best, m.lambda);
    return best;
}

MaterialLibrary default_library() {
    return MaterialLibrary({
        make_material("water", 36.08),
        make_material("concrete", 11.55),
        make_material("aluminum", 8.897),
        make_material("iron", 1.757),
        make_material("lead", 0.5612),
        make_material("uranium", 0.3166),
    });
}

}  // namespace mutomo
