#include "ctrcac/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace ctrcac {

namespace {

void check_keys(const json& obj, const std::string& ctx,
                std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ParseError(ctx + " must be an object");
    for (const auto& item : obj.items()) {
        bool ok = false;
        for (const char* k : allowed) {
            if (item.key() == k) {
                ok = true;
                break;
            }
        }
        if (!ok) throw ParseError("unknown key \"" + item.key() + "\" in " + ctx);
    }
}

const json* find(const json& obj, const char* key) {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

double require_number(const json& obj, const std::string& ctx, const char* key) {
    const json* v = find(obj, key);
    if (!v) throw ParseError(ctx + " is missing required field \"" + key + "\"");
    if (!v->is_number()) throw ParseError(ctx + "." + key + " must be a number");
    return v->get<double>();
}

double number_or(const json& obj, const std::string& ctx, const char* key, double def) {
    const json* v = find(obj, key);
    if (!v) return def;
    if (!v->is_number()) throw ParseError(ctx + "." + key + " must be a number");
    return v->get<double>();
}

int int_or(const json& obj, const std::string& ctx, const char* key, int def) {
    const json* v = find(obj, key);
    if (!v) return def;
    if (!v->is_number_integer()) throw ParseError(ctx + "." + key + " must be an integer");
    return v->get<int>();
}

bool bool_or(const json& obj, const std::string& ctx, const char* key, bool def) {
    const json* v = find(obj, key);
    if (!v) return def;
    if (!v->is_boolean()) throw ParseError(ctx + "." + key + " must be a boolean");
    return v->get<bool>();
}

std::string require_string(const json& obj, const std::string& ctx, const char* key) {
    const json* v = find(obj, key);
    if (!v) throw ParseError(ctx + " is missing required field \"" + key + "\"");
    if (!v->is_string()) throw ParseError(ctx + "." + key + " must be a string");
    return v->get<std::string>();
}

VectorXd vector_or(const json& obj, const std::string& ctx, const char* key,
                   const VectorXd& def) {
    const json* v = find(obj, key);
    if (!v) return def;
    if (!v->is_array()) throw ParseError(ctx + "." + key + " must be an array of numbers");
    VectorXd out(v->size());
    for (size_t i = 0; i < v->size(); ++i) {
        if (!(*v)[i].is_number()) throw ParseError(ctx + "." + key + " must contain numbers");
        out(static_cast<long>(i)) = (*v)[i].get<double>();
    }
    if (out.size() != def.size()) {
        throw ParseError(ctx + "." + key + " must have " + std::to_string(def.size()) +
                         " entries");
    }
    return out;
}

/// A 1-D array is read as a diagonal; a 2-D array as a full matrix.
MatrixXd matrix_field(const json& v, const std::string& where) {
    if (!v.is_array() || v.empty()) throw ParseError(where + " must be a non-empty array");
    if (v[0].is_number()) {
        VectorXd d(v.size());
        for (size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) throw ParseError(where + " must contain numbers");
            d(static_cast<long>(i)) = v[i].get<double>();
        }
        return MatrixXd(d.asDiagonal());
    }
    const size_t rows = v.size();
    MatrixXd m(rows, rows);
    for (size_t i = 0; i < rows; ++i) {
        if (!v[i].is_array() || v[i].size() != rows) {
            throw ParseError(where + " must be a square 2-D array");
        }
        for (size_t j = 0; j < rows; ++j) {
            if (!v[i][j].is_number()) throw ParseError(where + " must contain numbers");
            m(static_cast<long>(i), static_cast<long>(j)) = v[i][j].get<double>();
        }
    }
    return m;
}

/// Rectangular 2-D array, used for the filter realization whose B and C
/// blocks are not square.
MatrixXd rect_matrix_field(const json& v, const std::string& where) {
    if (!v.is_array() || v.empty() || !v[0].is_array() || v[0].empty()) {
        throw ParseError(where + " must be a non-empty 2-D array");
    }
    const size_t rows = v.size();
    const size_t cols = v[0].size();
    MatrixXd m(rows, cols);
    for (size_t i = 0; i < rows; ++i) {
        if (!v[i].is_array() || v[i].size() != cols) {
            throw ParseError(where + " must have rows of equal length");
        }
        for (size_t j = 0; j < cols; ++j) {
            if (!v[i][j].is_number()) throw ParseError(where + " must contain numbers");
            m(static_cast<long>(i), static_cast<long>(j)) = v[i][j].get<double>();
        }
    }
    return m;
}

json vector_to_json(const VectorXd& v) {
    json a = json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

json matrix_to_json(const MatrixXd& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

void parse_plant(const json& sec, Scenario& s, json& echo) {
    const std::string kind = require_string(sec, "plant", "kind");
    const std::string meas = [&] {
        const json* v = find(sec, "measurements");
        if (!v) return std::string("full_state");
        if (!v->is_string()) throw ParseError("plant.measurements must be a string");
        return v->get<std::string>();
    }();
    if (meas != "full_state" && meas != "outputs_only") {
        throw ParseError("plant.measurements must be \"full_state\" or \"outputs_only\"");
    }
    s.full_state_measurements = meas == "full_state";
    echo["kind"] = kind;
    echo["measurements"] = meas;

    if (kind == "double_integrator") {
        check_keys(sec, "plant", {"kind", "measurements", "initial_state"});
        DoubleIntegrator p;
        p.initial = vector_or(sec, "plant", "initial_state", VectorXd::Zero(2));
        echo["initial_state"] = vector_to_json(p.initial);
        s.plant = p;
    } else if (kind == "bicopter") {
        check_keys(sec, "plant",
                   {"kind", "measurements", "mass", "inertia", "gravity", "initial_state",
                    "force_limit", "moment_limit"});
        Bicopter p;
        p.mass = number_or(sec, "plant", "mass", 1.5);
        p.inertia = number_or(sec, "plant", "inertia", 0.03);
        p.gravity = number_or(sec, "plant", "gravity", 9.81);
        p.initial = vector_or(sec, "plant", "initial_state", VectorXd::Zero(6));
        if (const json* v = find(sec, "force_limit")) {
            if (!v->is_number()) throw ParseError("plant.force_limit must be a number");
            p.force_limit = v->get<double>();
            echo["force_limit"] = *p.force_limit;
        }
        if (const json* v = find(sec, "moment_limit")) {
            if (!v->is_number()) throw ParseError("plant.moment_limit must be a number");
            p.moment_limit = v->get<double>();
            echo["moment_limit"] = *p.moment_limit;
        }
        echo["mass"] = p.mass;
        echo["inertia"] = p.inertia;
        echo["gravity"] = p.gravity;
        echo["initial_state"] = vector_to_json(p.initial);
        s.plant = p;
    } else if (kind == "rigid_body") {
        check_keys(sec, "plant",
                   {"kind", "measurements", "inertia", "disturbance_torque", "torque_limit",
                    "initial_attitude", "initial_rate"});
        RigidBody p;
        if (const json* v = find(sec, "inertia")) {
            const MatrixXd j = matrix_field(*v, "plant.inertia");
            if (j.rows() != 3) throw ParseError("plant.inertia must be 3x3 or a 3-vector");
            p.inertia = j;
        }
        p.disturbance = vector_or(sec, "plant", "disturbance_torque", Vector3d(0.05, 0.05, 0.0));
        p.torque_limit = number_or(sec, "plant", "torque_limit", 0.2);
        const Vector3d att0 = vector_or(sec, "plant", "initial_attitude", Vector3d::Zero());
        const Vector3d rate0 = vector_or(sec, "plant", "initial_rate", Vector3d::Zero());
        p.initial << att0, rate0;
        echo["inertia"] = matrix_to_json(p.inertia);
        echo["disturbance_torque"] = vector_to_json(p.disturbance);
        echo["torque_limit"] = p.torque_limit;
        echo["initial_attitude"] = vector_to_json(att0);
        echo["initial_rate"] = vector_to_json(rate0);
        s.plant = p;
    } else {
        throw ParseError("unknown plant kind \"" + kind + "\"");
    }
}

void parse_architecture(const json& sec, Scenario& s, json& echo) {
    const std::string kind = require_string(sec, "architecture", "kind");
    echo["kind"] = kind;
    if (kind == "servo") {
        check_keys(sec, "architecture", {"kind"});
        s.architecture = ArchitectureKind::servo;
    } else if (kind == "ppi") {
        check_keys(sec, "architecture", {"kind", "outer_gain"});
        s.architecture = ArchitectureKind::ppi;
        s.outer_gain = number_or(sec, "architecture", "outer_gain", 1.0);
        echo["outer_gain"] = s.outer_gain;
    } else if (kind == "fsfi") {
        check_keys(sec, "architecture", {"kind"});
        s.architecture = ArchitectureKind::fsfi;
    } else if (kind == "bicopter") {
        check_keys(sec, "architecture", {"kind", "gravity_feedforward", "outer_gain"});
        s.architecture = ArchitectureKind::bicopter;
        s.gravity_feedforward = bool_or(sec, "architecture", "gravity_feedforward", true);
        s.outer_gain = number_or(sec, "architecture", "outer_gain", 1.0);
        echo["gravity_feedforward"] = s.gravity_feedforward;
        echo["outer_gain"] = s.outer_gain;
    } else if (kind == "attitude") {
        check_keys(sec, "architecture", {"kind", "outer_gain"});
        s.architecture = ArchitectureKind::attitude;
        s.outer_gain = number_or(sec, "architecture", "outer_gain", 1.0);
        echo["outer_gain"] = s.outer_gain;
    } else {
        throw ParseError("unknown architecture kind \"" + kind + "\"");
    }
}

void parse_parameterization(const json& sec, Scenario& s, json& echo) {
    const std::string kind = require_string(sec, "parameterization", "kind");
    echo["kind"] = kind;
    if (kind == "tf") {
        check_keys(sec, "parameterization", {"kind", "order"});
        s.param_kind = ParamKind::tf;
        s.tf_order = int_or(sec, "parameterization", "order", 2);
        echo["order"] = s.tf_order;
    } else if (kind == "pid") {
        check_keys(sec, "parameterization", {"kind", "derivative_mode", "filter_epsilon"});
        s.param_kind = ParamKind::pid;
        const json* v = find(sec, "derivative_mode");
        if (v && !v->is_string()) {
            throw ParseError("parameterization.derivative_mode must be a string");
        }
        std::string mode = v ? v->get<std::string>() : "measured_rate";
        if (mode == "measured_rate") {
            s.pid_rate_source = PidParameterization::RateSource::measured_rate;
        } else if (mode == "filtered_derivative") {
            s.pid_rate_source = PidParameterization::RateSource::filtered_derivative;
        } else {
            throw ParseError("parameterization.derivative_mode must be \"measured_rate\" or "
                             "\"filtered_derivative\"");
        }
        s.pid_filter_epsilon = number_or(sec, "parameterization", "filter_epsilon", 0.01);
        echo["derivative_mode"] = mode;
        echo["filter_epsilon"] = s.pid_filter_epsilon;
    } else if (kind == "pi") {
        check_keys(sec, "parameterization", {"kind"});
        s.param_kind = ParamKind::pi;
    } else if (kind == "fsfi") {
        check_keys(sec, "parameterization", {"kind"});
        s.param_kind = ParamKind::fsfi;
    } else {
        throw ParseError("unknown parameterization kind \"" + kind + "\"");
    }
}

void parse_hyperparameters(const json& sec, Scenario& s, json& echo) {
    check_keys(sec, "hyperparameters", {"P0", "log10_P0", "R_theta", "p_f", "filter", "R_z", "R_u"});

    int init_forms = 0;
    if (const json* v = find(sec, "P0")) {
        if (!v->is_number()) throw ParseError("hyperparameters.P0 must be a number");
        s.p0 = v->get<double>();
        echo["P0"] = *s.p0;
        ++init_forms;
    }
    if (const json* v = find(sec, "log10_P0")) {
        if (!v->is_number()) throw ParseError("hyperparameters.log10_P0 must be a number");
        s.p0 = std::pow(10.0, v->get<double>());
        echo["log10_P0"] = v->get<double>();
        ++init_forms;
    }
    if (const json* v = find(sec, "R_theta")) {
        s.rtheta = matrix_field(*v, "hyperparameters.R_theta");
        echo["R_theta"] = matrix_to_json(*s.rtheta);
        ++init_forms;
    }
    if (init_forms != 1) {
        throw ParseError("hyperparameters must give exactly one of P0, log10_P0, R_theta");
    }

    int filter_forms = 0;
    if (const json* v = find(sec, "p_f")) {
        if (!v->is_number()) throw ParseError("hyperparameters.p_f must be a number");
        s.filter_pole = v->get<double>();
        echo["p_f"] = *s.filter_pole;
        ++filter_forms;
    }
    if (const json* v = find(sec, "filter")) {
        check_keys(*v, "hyperparameters.filter", {"A", "B", "C", "D"});
        FilterRealization f;
        for (const char* k : {"A", "B", "C", "D"}) {
            if (!find(*v, k)) {
                throw ParseError(std::string("hyperparameters.filter needs matrix ") + k);
            }
        }
        f.A = rect_matrix_field((*v)["A"], "hyperparameters.filter.A");
        f.B = rect_matrix_field((*v)["B"], "hyperparameters.filter.B");
        f.C = rect_matrix_field((*v)["C"], "hyperparameters.filter.C");
        f.D = rect_matrix_field((*v)["D"], "hyperparameters.filter.D");
        s.filter = f;
        json fe;
        fe["A"] = matrix_to_json(f.A);
        fe["B"] = matrix_to_json(f.B);
        fe["C"] = matrix_to_json(f.C);
        fe["D"] = matrix_to_json(f.D);
        echo["filter"] = fe;
        ++filter_forms;
    }
    if (filter_forms != 1) {
        throw ParseError("hyperparameters must give exactly one of p_f, filter");
    }

    s.rz = number_or(sec, "hyperparameters", "R_z", 1.0);
    s.ru = number_or(sec, "hyperparameters", "R_u", 0.0);
    echo["R_z"] = s.rz;
    echo["R_u"] = s.ru;
}

void parse_reference(const json& sec, Scenario& s, json& echo) {
    const std::string kind = require_string(sec, "reference", "kind");
    echo["kind"] = kind;
    if (kind == "step") {
        check_keys(sec, "reference", {"kind", "amplitude"});
        StepReference r;
        r.amplitude = number_or(sec, "reference", "amplitude", 1.0);
        echo["amplitude"] = r.amplitude;
        s.reference = r;
    } else if (kind == "elliptical") {
        check_keys(sec, "reference",
                   {"kind", "semi_major", "semi_minor", "incline_deg", "omega"});
        EllipseReference r;
        r.semi_major = number_or(sec, "reference", "semi_major", 5.0);
        r.semi_minor = number_or(sec, "reference", "semi_minor", 3.0);
        const double incline_deg = number_or(sec, "reference", "incline_deg", 45.0);
        r.incline = incline_deg * M_PI / 180.0;
        r.omega = number_or(sec, "reference", "omega", 0.1);
        echo["semi_major"] = r.semi_major;
        echo["semi_minor"] = r.semi_minor;
        echo["incline_deg"] = incline_deg;
        echo["omega"] = r.omega;
        s.reference = r;
    } else if (kind == "constant_attitude") {
        check_keys(sec, "reference", {"kind", "attitude"});
        AttitudeReference r;
        r.angles = vector_or(sec, "reference", "attitude", Vector3d::Zero());
        echo["attitude"] = vector_to_json(r.angles);
        s.reference = r;
    } else {
        throw ParseError("unknown reference kind \"" + kind + "\"");
    }
}

void parse_sim(const json& sec, Scenario& s, json& echo) {
    check_keys(sec, "sim",
               {"dt", "horizon", "integrator", "log_decimation", "record_oracle", "seed"});
    s.sim.dt = number_or(sec, "sim", "dt", 1e-3);
    s.sim.horizon = require_number(sec, "sim", "horizon");
    const json* v = find(sec, "integrator");
    if (v && !v->is_string()) throw ParseError("sim.integrator must be a string");
    std::string integ = v ? v->get<std::string>() : "rk4";
    if (integ == "rk4") {
        s.sim.integrator = IntegratorKind::rk4;
    } else if (integ == "euler") {
        s.sim.integrator = IntegratorKind::euler;
    } else {
        throw ParseError("sim.integrator must be \"rk4\" or \"euler\"");
    }
    s.sim.log_decimation = int_or(sec, "sim", "log_decimation", 10);
    s.sim.record_oracle = bool_or(sec, "sim", "record_oracle", true);
    const json* sv = find(sec, "seed");
    if (sv) {
        if (!sv->is_number_integer()) throw ParseError("sim.seed must be an integer");
        s.seed = sv->get<std::uint64_t>();
    }
    echo["dt"] = s.sim.dt;
    echo["horizon"] = s.sim.horizon;
    echo["integrator"] = integ;
    echo["log_decimation"] = s.sim.log_decimation;
    echo["record_oracle"] = s.sim.record_oracle;
    echo["seed"] = s.seed;
}

void validate_semantics(const Scenario& s) {
    const bool di = std::holds_alternative<DoubleIntegrator>(s.plant);
    const bool bc = std::holds_alternative<Bicopter>(s.plant);
    const bool rb = std::holds_alternative<RigidBody>(s.plant);

    auto arch_name = [&] {
        switch (s.architecture) {
        case ArchitectureKind::servo: return "servo";
        case ArchitectureKind::ppi: return "ppi";
        case ArchitectureKind::fsfi: return "fsfi";
        case ArchitectureKind::bicopter: return "bicopter";
        case ArchitectureKind::attitude: return "attitude";
        }
        return "";
    };

    switch (s.architecture) {
    case ArchitectureKind::servo:
    case ArchitectureKind::ppi:
    case ArchitectureKind::fsfi:
        if (!di) throw ConfigError(std::string(arch_name()) + " architecture needs the double-integrator plant");
        if (!std::holds_alternative<StepReference>(s.reference)) {
            throw ConfigError(std::string(arch_name()) + " architecture takes a step reference");
        }
        break;
    case ArchitectureKind::bicopter:
        if (!bc) throw ConfigError("bicopter architecture needs the bicopter plant");
        if (!std::holds_alternative<EllipseReference>(s.reference)) {
            throw ConfigError("bicopter architecture takes an elliptical reference");
        }
        break;
    case ArchitectureKind::attitude:
        if (!rb) throw ConfigError("attitude architecture needs the rigid-body plant");
        if (!std::holds_alternative<AttitudeReference>(s.reference)) {
            throw ConfigError("attitude architecture takes a constant-attitude reference");
        }
        break;
    }

    auto param_ok = [&] {
        switch (s.architecture) {
        case ArchitectureKind::servo:
            return s.param_kind == ParamKind::tf || s.param_kind == ParamKind::pid;
        case ArchitectureKind::ppi: return s.param_kind == ParamKind::pi;
        case ArchitectureKind::fsfi: return s.param_kind == ParamKind::fsfi;
        case ArchitectureKind::bicopter:
            return s.param_kind == ParamKind::pid || s.param_kind == ParamKind::pi;
        case ArchitectureKind::attitude:
            return s.param_kind == ParamKind::fsfi || s.param_kind == ParamKind::pi;
        }
        return false;
    }();
    if (!param_ok) {
        throw ConfigError(std::string("architecture ") + arch_name() +
                          " does not support the requested parameterization");
    }

    if (s.param_kind == ParamKind::tf && s.tf_order < 1) {
        throw ConfigError("transfer-function order must be at least 1");
    }
    if (!s.full_state_measurements) {
        if (s.param_kind == ParamKind::fsfi) {
            throw ConfigError("plant does not expose the full state required by fsfi");
        }
        if (s.param_kind == ParamKind::pi) {
            throw ConfigError("the cascaded architecture needs a rate measurement");
        }
        if (s.param_kind == ParamKind::pid &&
            s.pid_rate_source == PidParameterization::RateSource::measured_rate) {
            throw ConfigError(
                "pid in measured_rate mode needs a rate measurement; use filtered_derivative");
        }
    }
    if (s.p0 && !(*s.p0 > 0.0)) throw ConfigError("P0 must be positive");
    if (s.filter_pole && !(*s.filter_pole > 0.0)) throw ConfigError("p_f must be positive");
    if (!(s.rz > 0.0)) throw ConfigError("R_z must be positive");
    if (s.ru < 0.0) throw ConfigError("R_u must be nonnegative");
    s.sim.validate();
}

} // namespace

namespace {

Scenario parse_scenario_impl(const json& doc, const std::string& name) {
    check_keys(doc, "scenario",
               {"name", "plant", "architecture", "parameterization", "hyperparameters",
                "reference", "sim", "outputs"});

    Scenario s;
    if (doc.contains("name")) {
        if (!doc["name"].is_string()) throw ParseError("scenario.name must be a string");
        s.name = doc["name"].get<std::string>();
    } else {
        s.name = name;
    }

    json echo;
    echo["name"] = s.name;
    for (const char* sec : {"plant", "architecture", "parameterization", "hyperparameters",
                            "reference", "sim"}) {
        if (!doc.contains(sec)) {
            throw ParseError(std::string("scenario is missing required section \"") + sec + "\"");
        }
    }

    json plant_echo, arch_echo, param_echo, hyper_echo, ref_echo, sim_echo;
    parse_plant(doc["plant"], s, plant_echo);
    parse_architecture(doc["architecture"], s, arch_echo);
    parse_parameterization(doc["parameterization"], s, param_echo);
    parse_hyperparameters(doc["hyperparameters"], s, hyper_echo);
    parse_reference(doc["reference"], s, ref_echo);
    parse_sim(doc["sim"], s, sim_echo);

    echo["plant"] = plant_echo;
    echo["architecture"] = arch_echo;
    echo["parameterization"] = param_echo;
    echo["hyperparameters"] = hyper_echo;
    echo["reference"] = ref_echo;
    echo["sim"] = sim_echo;

    if (const json* out = find(doc, "outputs")) {
        check_keys(*out, "outputs", {"directory"});
        if (const json* dir = find(*out, "directory")) {
            if (!dir->is_string()) throw ParseError("outputs.directory must be a string");
            s.output_dir = dir->get<std::string>();
            echo["outputs"] = json{{"directory", *s.output_dir}};
        }
    }

    s.resolved = echo;
    validate_semantics(s);
    return s;
}

} // namespace

Scenario parse_scenario(const json& doc, const std::string& name) {
    try {
        return parse_scenario_impl(doc, name);
    } catch (const json::exception& e) {
        // any stray type mismatch surfaces as a schema violation
        throw ParseError(std::string("invalid scenario document: ") + e.what());
    }
}

Scenario load_scenario(const std::string& path_or_preset) {
    namespace fs = std::filesystem;
    if (fs::exists(path_or_preset)) {
        std::ifstream in(path_or_preset);
        if (!in) throw IoError("cannot open " + path_or_preset);
        json doc;
        try {
            doc = json::parse(in);
        } catch (const json::parse_error& e) {
            throw ParseError(path_or_preset + ": " + e.what());
        }
        return parse_scenario(doc, fs::path(path_or_preset).stem().string());
    }
    if (is_preset(path_or_preset)) {
        return parse_scenario(preset_document(path_or_preset), path_or_preset);
    }
    throw ParseError("no such scenario file or preset: " + path_or_preset);
}

namespace {

Parameterization make_param(const Scenario& s) {
    switch (s.param_kind) {
    case ParamKind::tf: return TfParameterization(s.tf_order);
    case ParamKind::pid: return PidParameterization(s.pid_rate_source, s.pid_filter_epsilon);
    case ParamKind::pi: return PiParameterization{};
    case ParamKind::fsfi: return FsfiParameterization(2); // per-loop (position, rate) pair
    }
    throw ConfigError("unreachable parameterization kind");
}

LoopOptions make_loop(const Scenario& s) {
    Parameterization param = make_param(s);
    const int gains = gain_count(param);
    Hyperparameters hp;
    if (s.p0) {
        hp = Hyperparameters::scalar(*s.p0, Dimensions{1, 1, gains}, s.rz, s.ru);
    } else {
        hp.Rz = s.rz * MatrixXd::Identity(1, 1);
        hp.Ru = s.ru * MatrixXd::Identity(1, 1);
        hp.Rtheta = *s.rtheta;
    }
    FilterRealization filt = s.filter
                                 ? *s.filter
                                 : FilterRealization::first_order(*s.filter_pole,
                                                                  Dimensions{1, 1, 1});
    return LoopOptions{std::move(hp), std::move(filt), std::move(param), s.sim.record_oracle};
}

} // namespace

std::unique_ptr<System> build_system(const Scenario& s) {
    switch (s.architecture) {
    case ArchitectureKind::servo:
        return std::make_unique<ServoSystem>(std::get<DoubleIntegrator>(s.plant),
                                             std::get<StepReference>(s.reference), make_loop(s));
    case ArchitectureKind::ppi:
        return std::make_unique<PpiSystem>(std::get<DoubleIntegrator>(s.plant),
                                           std::get<StepReference>(s.reference), make_loop(s),
                                           s.outer_gain);
    case ArchitectureKind::fsfi:
        return std::make_unique<FsfiSystem>(std::get<DoubleIntegrator>(s.plant),
                                            std::get<StepReference>(s.reference), make_loop(s));
    case ArchitectureKind::bicopter: {
        const CascadeKind kind =
            s.param_kind == ParamKind::pid ? CascadeKind::pid : CascadeKind::ppi;
        BicopterSystem::Options opts;
        opts.gravity_feedforward = s.gravity_feedforward;
        opts.outer_gain = s.outer_gain;
        return std::make_unique<BicopterSystem>(std::get<Bicopter>(s.plant),
                                                std::get<EllipseReference>(s.reference), kind,
                                                make_loop(s), make_loop(s), make_loop(s), opts);
    }
    case ArchitectureKind::attitude: {
        const AttitudeKind kind =
            s.param_kind == ParamKind::fsfi ? AttitudeKind::fsfi : AttitudeKind::ppi;
        return std::make_unique<AttitudeSystem>(
            std::get<RigidBody>(s.plant), std::get<AttitudeReference>(s.reference), kind,
            std::array<LoopOptions, 3>{make_loop(s), make_loop(s), make_loop(s)}, s.outer_gain);
    }
    }
    throw ConfigError("unreachable architecture kind");
}

RunResult run_scenario(const Scenario& s) {
    auto system = build_system(s);
    RunResult r;
    r.log = integrate(*system, system->initial_state(), s.sim);
    r.metrics = compute_metrics(r.log);
    return r;
}

Scenario with_hyperparameters(const Scenario& s, double log10_p0, double filter_pole) {
    Scenario out = s;
    out.p0 = std::pow(10.0, log10_p0);
    out.rtheta.reset();
    out.filter_pole = filter_pole;
    out.filter.reset();
    json hyper;
    hyper["log10_P0"] = log10_p0;
    hyper["p_f"] = filter_pole;
    hyper["R_z"] = s.rz;
    hyper["R_u"] = s.ru;
    out.resolved["hyperparameters"] = hyper;
    return out;
}

double score_scenario(const Scenario& s, const Vector2d& point) {
    Scenario candidate = with_hyperparameters(s, point(0), point(1));
    candidate.sim.capture_states = false;
    const RunResult r = run_scenario(candidate);
    if (r.metrics.diverged) {
        return 1e9 + (s.sim.horizon - r.metrics.diverged_at);
    }
    return r.metrics.iae;
}

namespace {
void format_double(std::string& line, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    line += buf;
}
} // namespace

void write_csv(const std::string& path, const TimeSeriesLog& log) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    std::string line = "t";
    for (const auto& c : log.schema.columns) {
        line += ',';
        line += c;
    }
    line += '\n';
    out << line;
    for (size_t i = 0; i < log.t.size(); ++i) {
        line.clear();
        format_double(line, log.t[i]);
        for (int j = 0; j < log.rows.cols(); ++j) {
            line += ',';
            format_double(line, log.rows(static_cast<long>(i), j));
        }
        line += '\n';
        out << line;
    }
    if (!out) throw IoError("failed writing " + path);
}

void write_pso_history_csv(const std::string& path, const PsoResult& result) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << "iteration,particle,log10_P0,p_f,score,best_score\n";
    for (const auto& h : result.history) {
        std::string line;
        line += std::to_string(h.iteration);
        line += ',';
        line += std::to_string(h.particle);
        line += ',';
        format_double(line, h.position(0));
        line += ',';
        format_double(line, h.position(1));
        line += ',';
        format_double(line, h.score);
        line += ',';
        format_double(line, h.best_score);
        line += '\n';
        out << line;
    }
    if (!out) throw IoError("failed writing " + path);
}

void write_gnuplot_script(const std::string& path, const TimeSeriesLog& log,
                          const std::string& csv_name) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);

    const auto& cols = log.schema.columns;
    auto idx = [&](const std::string& name) {
        for (size_t i = 0; i < cols.size(); ++i) {
            if (cols[i] == name) return static_cast<int>(i) + 2; // gnuplot is 1-based, t first
        }
        return -1;
    };

    std::vector<std::pair<int, std::string>> outputs; // column, with reference column name
    std::vector<std::string> controls, gains;
    for (const auto& c : cols) {
        if (c.size() > 4 && c.substr(c.size() - 4) == "_ref") {
            outputs.emplace_back(idx(c.substr(0, c.size() - 4)), c);
        }
        if (c == "u" || c == "force" || c == "moment" || c.rfind("tau_", 0) == 0) {
            controls.push_back(c);
        }
        if (c.rfind("theta_", 0) == 0) gains.push_back(c);
    }
    if (idx("r") > 0 && idx("y") > 0) outputs.emplace_back(idx("y"), "r");

    out << "set datafile separator ','\n"
        << "set key autotitle columnhead outside\n"
        << "set multiplot layout 4,1\n";

    out << "set logscale y\nset ylabel 'error magnitude'\nplot";
    bool first = true;
    for (int c : log.schema.performance) {
        out << (first ? " " : ", ") << "'" << csv_name << "' using 1:(abs(column(" << c + 2
            << "))) with lines title '" << cols[static_cast<size_t>(c)] << "'";
        first = false;
    }
    out << "\nunset logscale y\n";

    out << "set ylabel 'output vs reference'\nplot";
    first = true;
    for (const auto& [yc, ref] : outputs) {
        out << (first ? " " : ", ") << "'" << csv_name << "' using 1:" << yc
            << " with lines, '" << csv_name << "' using 1:" << idx(ref)
            << " with lines dt 2";
        first = false;
    }
    out << "\n";

    out << "set ylabel 'control'\nplot";
    first = true;
    for (const auto& c : controls) {
        out << (first ? " " : ", ") << "'" << csv_name << "' using 1:" << idx(c)
            << " with lines";
        first = false;
    }
    out << "\n";

    out << "set ylabel 'gains'\nset xlabel 'time (s)'\nplot";
    first = true;
    for (const auto& c : gains) {
        out << (first ? " " : ", ") << "'" << csv_name << "' using 1:" << idx(c)
            << " with lines";
        first = false;
    }
    out << "\nunset multiplot\n";
    if (!out) throw IoError("failed writing " + path);
}

json metrics_to_json(const Metrics& m) {
    json j;
    j["iae"] = m.iae;
    j["ise"] = m.ise;
    j["final_error"] = m.final_error;
    j["diverged"] = m.diverged;
    if (m.diverged) {
        j["diverged_at"] = m.diverged_at;
    } else {
        j["diverged_at"] = nullptr;
    }
    return j;
}

} // namespace ctrcac
