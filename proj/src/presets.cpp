#include "ctrcac/scenario.hpp"

namespace ctrcac {

namespace {

struct PresetEntry {
    const char* name;
    const char* summary;
    const char* text;
};

// Table of bundled experiment setups. Hyperparameters of the four
// double-integrator entries are the tuner outputs each architecture was
// benchmarked with; the bicopter entries apply the matching loop structure to
// all three loops (the PID entry with a filter pole retuned for trajectory
// tracking); the attitude entries use the hand-tuned stabilization settings.
constexpr PresetEntry kPresets[] = {
    {"double-integrator-tf2",
     "second-order transfer-function servo on a unit step",
     R"json({
  "plant": {"kind": "double_integrator"},
  "architecture": {"kind": "servo"},
  "parameterization": {"kind": "tf", "order": 2},
  "hyperparameters": {"log10_P0": 0.6, "p_f": 8.15},
  "reference": {"kind": "step"},
  "sim": {"horizon": 50.0}
})json"},
    {"double-integrator-pid",
     "adaptive PID servo on a unit step",
     R"json({
  "plant": {"kind": "double_integrator"},
  "architecture": {"kind": "servo"},
  "parameterization": {"kind": "pid"},
  "hyperparameters": {"log10_P0": -1.02, "p_f": 0.6508},
  "reference": {"kind": "step"},
  "sim": {"horizon": 50.0}
})json"},
    {"double-integrator-ppi",
     "cascaded PPI with a unity outer gain on a unit step",
     R"json({
  "plant": {"kind": "double_integrator"},
  "architecture": {"kind": "ppi"},
  "parameterization": {"kind": "pi"},
  "hyperparameters": {"log10_P0": -3.376, "p_f": 4.455},
  "reference": {"kind": "step"},
  "sim": {"horizon": 50.0}
})json"},
    {"double-integrator-fsfi",
     "state feedback with integral action on a unit step",
     R"json({
  "plant": {"kind": "double_integrator"},
  "architecture": {"kind": "fsfi"},
  "parameterization": {"kind": "fsfi"},
  "hyperparameters": {"log10_P0": -1.278, "p_f": 3.314},
  "reference": {"kind": "step"},
  "sim": {"horizon": 50.0}
})json"},
    {"bicopter-pid",
     "bicopter autopilot, PID in all three loops, elliptical track",
     R"json({
  "plant": {"kind": "bicopter"},
  "architecture": {"kind": "bicopter"},
  "parameterization": {"kind": "pid"},
  "hyperparameters": {"log10_P0": -1.02, "p_f": 1.5},
  "reference": {"kind": "elliptical"},
  "sim": {"horizon": 62.83}
})json"},
    {"bicopter-ppi",
     "bicopter autopilot, cascaded PPI loops, elliptical track",
     R"json({
  "plant": {"kind": "bicopter"},
  "architecture": {"kind": "bicopter"},
  "parameterization": {"kind": "pi"},
  "hyperparameters": {"log10_P0": -3.376, "p_f": 4.455},
  "reference": {"kind": "elliptical"},
  "sim": {"horizon": 62.83}
})json"},
    {"attitude-fsfi",
     "three-axis FSFI attitude stabilization under disturbance torques",
     R"json({
  "plant": {"kind": "rigid_body", "initial_attitude": [0.2, -0.15, 0.1]},
  "architecture": {"kind": "attitude"},
  "parameterization": {"kind": "fsfi"},
  "hyperparameters": {"P0": 1e4, "p_f": 2.0, "R_z": 1e4},
  "reference": {"kind": "constant_attitude"},
  "sim": {"horizon": 60.0}
})json"},
    {"attitude-ppi",
     "three-axis cascaded-PPI attitude stabilization under disturbance torques",
     R"json({
  "plant": {"kind": "rigid_body", "initial_attitude": [0.2, -0.15, 0.1]},
  "architecture": {"kind": "attitude"},
  "parameterization": {"kind": "pi"},
  "hyperparameters": {"P0": 1e4, "p_f": 2.0, "R_z": 1e4},
  "reference": {"kind": "constant_attitude"},
  "sim": {"horizon": 60.0}
})json"},
};

} // namespace

std::vector<std::string> preset_names() {
    std::vector<std::string> names;
    for (const auto& p : kPresets) names.emplace_back(p.name);
    return names;
}

bool is_preset(const std::string& name) {
    for (const auto& p : kPresets) {
        if (name == p.name) return true;
    }
    return false;
}

std::string preset_summary(const std::string& name) {
    for (const auto& p : kPresets) {
        if (name == p.name) return p.summary;
    }
    throw ParseError("no such preset: " + name);
}

json preset_document(const std::string& name) {
    for (const auto& p : kPresets) {
        if (name == p.name) return json::parse(p.text);
    }
    throw ParseError("no such preset: " + name);
}

} // namespace ctrcac
