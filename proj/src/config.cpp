#include "dqvi/config.hpp"

#include "dqvi/builtin.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace dqvi {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& msg) {
    throw ParseError("config: " + where + ": " + msg);
}

/// Rejects keys outside the allowed set; typos in tolerance names would
/// silently invalidate studies otherwise.
void check_keys(const json& obj, const std::string& where,
                const std::set<std::string>& allowed) {
    for (const auto& [key, value] : obj.items())
        if (!allowed.count(key)) fail(where, "unknown key '" + key + "'");
}

double get_num(const json& obj, const std::string& where, const std::string& key,
               double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) fail(where, "'" + key + "' must be a number");
    return obj[key].get<double>();
}

int get_int(const json& obj, const std::string& where, const std::string& key,
            int fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number_integer()) fail(where, "'" + key + "' must be an integer");
    return obj[key].get<int>();
}

bool get_bool(const json& obj, const std::string& where, const std::string& key,
              bool fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_boolean()) fail(where, "'" + key + "' must be a boolean");
    return obj[key].get<bool>();
}

std::array<double, 2> get_vec2(const json& obj, const std::string& where,
                               const std::string& key, std::array<double, 2> fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj[key];
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        fail(where, "'" + key + "' must be an array of two numbers");
    return {v[0].get<double>(), v[1].get<double>()};
}

contact2d::ContactModel parse_contact(const json& c, const std::string& base_dir) {
    contact2d::ContactModel model;
    check_keys(c, "problem.contact",
               {"mesh", "mesh_rect", "material", "contact", "damage", "loads", "initial"});

    const bool has_file = c.contains("mesh");
    const bool has_rect = c.contains("mesh_rect");
    if (has_file == has_rect)
        fail("problem.contact", "exactly one of 'mesh' or 'mesh_rect' is required");
    if (has_file) {
        if (!c["mesh"].is_string()) fail("problem.contact", "'mesh' must be a path string");
        std::filesystem::path p = c["mesh"].get<std::string>();
        if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
        model.mesh = load_mesh(p.string());
    } else {
        const json& r = c["mesh_rect"];
        check_keys(r, "problem.contact.mesh_rect", {"nx", "ny", "lx", "ly"});
        model.mesh = make_rect_mesh(get_int(r, "mesh_rect", "nx", 4),
                                    get_int(r, "mesh_rect", "ny", 2),
                                    get_num(r, "mesh_rect", "lx", 1.0),
                                    get_num(r, "mesh_rect", "ly", 0.5));
    }

    if (c.contains("material")) {
        const json& m = c["material"];
        check_keys(m, "material",
                   {"lambda", "mu", "viscosity_scale", "relax_time", "relax_strain_coeff",
                    "relax_damage_coeff"});
        model.material.lame_lambda = get_num(m, "material", "lambda", 1.0);
        model.material.lame_mu = get_num(m, "material", "mu", 1.0);
        model.material.viscosity_scale = get_num(m, "material", "viscosity_scale", 1.0);
        model.material.relax_time = get_num(m, "material", "relax_time", 1.0);
        model.material.relax_strain_coeff = get_num(m, "material", "relax_strain_coeff", 0.0);
        model.material.relax_damage_coeff = get_num(m, "material", "relax_damage_coeff", 0.0);
    }
    if (c.contains("contact")) {
        const json& k = c["contact"];
        check_keys(k, "contact",
                   {"k_n", "p_max", "a_w", "gap", "friction_mu", "wear_k", "v_star",
                    "wear_difference_form"});
        model.contact.k_n = get_num(k, "contact", "k_n", 1.0);
        model.contact.p_max = get_num(k, "contact", "p_max", 10.0);
        model.contact.a_w = get_num(k, "contact", "a_w", 0.0);
        model.contact.gap = get_num(k, "contact", "gap", 0.0);
        model.contact.friction_mu = get_num(k, "contact", "friction_mu", 0.0);
        model.contact.wear_k = get_num(k, "contact", "wear_k", 0.0);
        model.contact.v_star = get_vec2(k, "contact", "v_star", {1.0, 0.0});
        model.contact.wear_difference_form =
            get_bool(k, "contact", "wear_difference_form", false);
    }
    if (c.contains("damage")) {
        const json& d = c["damage"];
        check_keys(d, "damage", {"kappa", "lambda_D", "lambda_E", "lambda_w", "zeta_floor"});
        model.damage.kappa = get_num(d, "damage", "kappa", 1.0);
        model.damage.lambda_D = get_num(d, "damage", "lambda_D", 1.0);
        model.damage.lambda_E = get_num(d, "damage", "lambda_E", 1.0);
        model.damage.lambda_w = get_num(d, "damage", "lambda_w", 1.0);
        model.damage.zeta_floor = get_num(d, "damage", "zeta_floor", 0.01);
    }
    if (c.contains("loads")) {
        const json& l = c["loads"];
        check_keys(l, "loads", {"body_force", "traction", "ramp_time"});
        model.loads.body_force = get_vec2(l, "loads", "body_force", {0.0, 0.0});
        model.loads.traction = get_vec2(l, "loads", "traction", {0.0, 0.0});
        model.loads.ramp_time = get_num(l, "loads", "ramp_time", 0.0);
    }
    if (c.contains("initial")) {
        const json& i = c["initial"];
        check_keys(i, "initial", {"u0", "zeta0"});
        model.u0 = get_vec2(i, "initial", "u0", {0.0, 0.0});
        model.zeta0 = get_num(i, "initial", "zeta0", 0.9);
    }
    return model;
}

} // namespace

RunConfig parse_config_text(const std::string& text, const std::string& base_dir) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        // Convert the byte offset into line/column diagnostics.
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ParseError("config: line " + std::to_string(line) + ", column " +
                         std::to_string(col) + ": " + e.what());
    }
    if (!root.is_object()) throw ParseError("config: top level must be an object");
    check_keys(root, "top level",
               {"problem", "grid", "stepper", "output", "seed", "verbosity"});

    RunConfig cfg;
    if (!root.contains("problem")) fail("top level", "'problem' is required");
    const json& prob = root["problem"];
    if (!prob.is_object()) fail("problem", "must be an object");
    check_keys(prob, "problem", {"builtin", "contact"});
    if (prob.contains("builtin") == prob.contains("contact"))
        fail("problem", "exactly one of 'builtin' or 'contact' is required");
    if (prob.contains("builtin")) {
        if (!prob["builtin"].is_string()) fail("problem", "'builtin' must be a string");
        cfg.source = prob["builtin"].get<std::string>();
    } else {
        cfg.source = "contact";
        cfg.is_contact = true;
        cfg.contact = parse_contact(prob["contact"], base_dir);
    }

    if (root.contains("grid")) {
        const json& g = root["grid"];
        check_keys(g, "grid", {"T", "N"});
        const double T = get_num(g, "grid", "T", 1.0);
        const int N = get_int(g, "grid", "N", 16);
        if (!(T > 0.0)) fail("grid", "'T' must be positive");
        if (N < 1) fail("grid", "'N' must be >= 1");
        cfg.grid = TimeGrid(T, N);
    }

    if (root.contains("stepper")) {
        const json& s = root["stepper"];
        check_keys(s, "stepper",
                   {"tol_outer", "tol_velocity", "tol_damage", "tol_inner", "max_picard",
                    "wear_scheme", "damage_coupling", "override_margin"});
        cfg.stepper.tol_outer = get_num(s, "stepper", "tol_outer", cfg.stepper.tol_outer);
        cfg.stepper.tol_velocity =
            get_num(s, "stepper", "tol_velocity", cfg.stepper.tol_velocity);
        cfg.stepper.tol_damage = get_num(s, "stepper", "tol_damage", cfg.stepper.tol_damage);
        cfg.stepper.tol_inner = get_num(s, "stepper", "tol_inner", cfg.stepper.tol_inner);
        cfg.stepper.max_picard = get_int(s, "stepper", "max_picard", cfg.stepper.max_picard);
        if (!(cfg.stepper.tol_outer > 0.0 && cfg.stepper.tol_velocity > 0.0 &&
              cfg.stepper.tol_damage > 0.0 && cfg.stepper.tol_inner > 0.0))
            fail("stepper", "tolerances must be positive");
        if (s.contains("wear_scheme")) {
            const std::string v = s["wear_scheme"].is_string()
                                      ? s["wear_scheme"].get<std::string>()
                                      : std::string();
            if (v == "explicit_euler")
                cfg.stepper.wear_scheme = WearScheme::explicit_euler;
            else if (v == "backward_euler")
                cfg.stepper.wear_scheme = WearScheme::backward_euler;
            else
                fail("stepper", "'wear_scheme' must be explicit_euler or backward_euler");
        }
        if (s.contains("damage_coupling")) {
            const std::string v = s["damage_coupling"].is_string()
                                      ? s["damage_coupling"].get<std::string>()
                                      : std::string();
            if (v == "semi_implicit")
                cfg.stepper.damage_source_coupling = DamageCoupling::semi_implicit;
            else if (v == "picard")
                cfg.stepper.damage_source_coupling = DamageCoupling::picard;
            else
                fail("stepper", "'damage_coupling' must be semi_implicit or picard");
        }
        cfg.stepper.override_margin =
            get_bool(s, "stepper", "override_margin", cfg.stepper.override_margin);
    }

    if (root.contains("output")) {
        const json& o = root["output"];
        check_keys(o, "output", {"directory"});
        if (o.contains("directory")) {
            if (!o["directory"].is_string()) fail("output", "'directory' must be a string");
            cfg.output_dir = o["directory"].get<std::string>();
        }
    }
    if (root.contains("seed")) {
        if (!root["seed"].is_number_integer()) fail("top level", "'seed' must be an integer");
        cfg.seed = root["seed"].get<unsigned long long>();
    }
    cfg.verbosity = get_int(root, "top level", "verbosity", 0);

    if (!cfg.is_contact) make_builtin_problem(cfg.source); // name check
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("config file not readable: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(),
                             std::filesystem::path(path).parent_path().string());
}

} // namespace dqvi
