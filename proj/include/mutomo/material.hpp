#pragma once

#include <string>
#include <vector>

namespace mutomo {

// A material is defined by its radiation length X0 (cm). The reconstructed
// quantity is the scattering density lambda = 1/X0 (cm^-1); the "empty"
// material has lambda = 0.
struct Material {
    std::string name;
    double radiation_length = 0.0;  // cm; <= 0 only for "empty"
    double lambda = 0.0;            // cm^-1

    bool empty() const { return lambda == 0.0; }
};

double material_lambda(const Material& m);

Material make_material(std::string name, double radiation_length);
Material make_empty_material();

class MaterialLibrary {
public:
    // Always contains the distinguished "empty" member at index 0.
    MaterialLibrary();
    explicit MaterialLibrary(const std::vector<Material>& solids);

    const std::vector<Material>& materials() const { return materials_; }
    const Material& at(std::size_t i) const { return materials_.at(i); }
    std::size_t size() const { return materials_.size(); }

    // Members with lambda > 0, i.e. everything except "empty".
    std::vector<Material> solids() const;
    double lambda_max() const;

private:
    void validate() const;
    std::vector<Material> materials_;
};

// Water / concrete / aluminum / iron / lead / uranium, spanning low-Z to
// high-Z radiation lengths.
MaterialLibrary default_library();

}  // namespace mutomo
