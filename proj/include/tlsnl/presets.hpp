#pragma once

#include <string>
#include <vector>

#include "tlsnl/steady_solver.hpp"

namespace tlsnl {

struct Preset {
    std::string name;
    std::string description;
    ModelParams model;
};

Preset preset_fig2();
Preset preset_fig3();
Preset preset_s4();
Preset preset_s2();
std::vector<Preset> all_presets();
// throws ValidationError for unknown names
Preset preset_by_name(const std::string& name);

}  // namespace tlsnl
