#include "lchomog/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "lchomog/errors.hpp"

namespace lchomog {

namespace {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

std::string escape_key(const std::string& key) {
    std::string out;
    for (char c : key) {
        if (c == '~') out += "~0";
        else if (c == '/') out += "~1";
        else out += c;
    }
    return out;
}

double as_number(const json& j, const std::string& ptr) {
    if (!j.is_number()) throw ConfigError(ptr, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ConfigError(ptr, "must be finite");
    return v;
}

int as_integer(const json& j, const std::string& ptr) {
    if (j.is_number_integer()) {
        const auto v = j.get<long long>();
        if (v < -1000000000LL || v > 1000000000LL) throw ConfigError(ptr, "integer out of range");
        return static_cast<int>(v);
    }
    if (j.is_number_float()) {
        const double v = j.get<double>();
        if (std::isfinite(v) && v == std::floor(v) && std::abs(v) <= 1e9) return static_cast<int>(v);
    }
    throw ConfigError(ptr, "expected an integer");
}

Expr as_expr(const json& j, const std::string& ptr) {
    if (!j.is_string()) throw ConfigError(ptr, "expected an expression string");
    try {
        return Expr::parse(j.get<std::string>());
    } catch (const Error& e) {
        throw ConfigError(ptr, e.what());
    }
}

VectorExpr as_vector_expr(const json& j, const std::string& ptr) {
    if (!j.is_array() || j.size() != 2) throw ConfigError(ptr, "expected an array of two expression strings");
    return {as_expr(j[0], ptr + "/0"), as_expr(j[1], ptr + "/1")};
}

std::vector<double> as_numbers(const json& j, const std::string& ptr) {
    if (!j.is_array()) throw ConfigError(ptr, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t k = 0; k < j.size(); ++k) out.push_back(as_number(j[k], ptr + "/" + std::to_string(k)));
    return out;
}

/// An object whose keys are consumed one at a time; finish() rejects the rest.
class Fields {
public:
    Fields(const json& j, std::string ptr) : j_(j), ptr_(std::move(ptr)) {
        if (!j.is_object()) throw ConfigError(ptr_, "expected an object");
    }

    const json* take(const std::string& key) {
        used_.insert(key);
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }
    std::string at(const std::string& key) const { return ptr_ + "/" + escape_key(key); }

    void number(const std::string& key, double& out) {
        if (const json* v = take(key)) out = as_number(*v, at(key));
    }
    void integer(const std::string& key, int& out) {
        if (const json* v = take(key)) out = as_integer(*v, at(key));
    }
    void boolean(const std::string& key, bool& out) {
        if (const json* v = take(key)) {
            if (!v->is_boolean()) throw ConfigError(at(key), "expected true or false");
            out = v->get<bool>();
        }
    }
    void vector_expr(const std::string& key, VectorExpr& out) {
        if (const json* v = take(key)) out = as_vector_expr(*v, at(key));
    }
    void numbers(const std::string& key, std::vector<double>& out) {
        if (const json* v = take(key)) out = as_numbers(*v, at(key));
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!used_.count(it.key())) throw ConfigError(at(it.key()), "unknown key");
    }

private:
    const json& j_;
    std::string ptr_;
    std::set<std::string> used_;
};

ObstacleShape parse_shape(const json& j, const std::string& ptr) {
    Fields f(j, ptr);
    const json* kind = f.take("shape");
    if (!kind || !kind->is_string()) throw ConfigError(f.at("shape"), "expected \"none\", \"disk\" or \"superellipse\"");
    const std::string name = kind->get<std::string>();
    auto extent = [&](const std::string& key, double v) {
        if (!(v > 0.0 && v <= kMaxObstacleExtent)) throw ConfigError(f.at(key), "must lie in (0, 0.45]");
    };
    ObstacleShape shape;
    if (name == "none") {
        shape = NoObstacle{};
    } else if (name == "disk") {
        Disk d;
        f.number("radius", d.radius);
        extent("radius", d.radius);
        shape = d;
    } else if (name == "superellipse") {
        Superellipse s;
        f.number("rx", s.rx);
        f.number("ry", s.ry);
        f.number("p", s.exponent);
        extent("rx", s.rx);
        extent("ry", s.ry);
        if (!(s.exponent >= 2.0 && s.exponent <= 20.0)) throw ConfigError(f.at("p"), "must lie in [2, 20]");
        shape = s;
    } else {
        throw ConfigError(f.at("shape"), "unknown shape '" + name + "'");
    }
    f.finish();
    try {
        validate_shape(shape);
    } catch (const InvalidShape& e) {
        throw ConfigError(ptr, e.what());
    }
    return shape;
}

SolveConfig parse_solver(const json& j, const std::string& ptr) {
    Fields f(j, ptr);
    SolveConfig s;
    f.number("rel_tol", s.rel_tol);
    f.integer("max_iter", s.max_iter);
    f.finish();
    if (!(s.rel_tol > 0.0 && s.rel_tol <= 1e-2)) throw ConfigError(f.at("rel_tol"), "must lie in (0, 1e-2]");
    if (s.max_iter < 0) throw ConfigError(f.at("max_iter"), "must be >= 0");
    return s;
}

void shape_field(Fields& f, ObstacleShape& out) {
    if (const json* v = f.take("shape")) out = parse_shape(*v, f.at("shape"));
}
void solver_field(Fields& f, SolveConfig& out) {
    if (const json* v = f.take("solver")) out = parse_solver(*v, f.at("solver"));
}

void check_resolution(int n, const std::string& ptr) {
    if (n < 8 || n % 2 != 0) throw ConfigError(ptr, "must be an even integer >= 8");
}

TensorsConfig parse_tensors(const json& j) {
    Fields f(j, "");
    TensorsConfig c;
    shape_field(f, c.shape);
    f.integer("n", c.n);
    solver_field(f, c.solver);
    f.boolean("write_fields", c.write_fields);
    f.finish();
    check_resolution(c.n, "/n");
    return c;
}

SimConfig parse_simulate(const json& j) {
    Fields f(j, "");
    SimConfig c;
    f.integer("m", c.grid.m);
    f.integer("n", c.grid.n);
    shape_field(f, c.grid.shape);
    f.number("t_end", c.t_end);
    f.number("dt", c.dt);
    f.vector_expr("forcing_f", c.forcing_f);
    f.vector_expr("forcing_h", c.forcing_h);
    f.vector_expr("d_init", c.d_init);
    solver_field(f, c.solver);
    f.numbers("snapshot_times", c.snapshot_times);
    f.finish();
    if (c.grid.m < 1 || c.grid.m > 4096) throw ConfigError("/m", "must be an integer >= 1");
    check_resolution(c.grid.n, "/n");
    c.validate();
    return c;
}

LimitConfig parse_limit(const json& j) {
    Fields f(j, "");
    LimitConfig c;
    shape_field(f, c.shape);
    f.integer("n_per_cell", c.n_per_cell);
    f.integer("grid_n", c.grid_n);
    f.number("t_end", c.t_end);
    f.number("dt", c.dt);
    f.vector_expr("forcing_f", c.forcing_f);
    f.vector_expr("forcing_h", c.forcing_h);
    f.vector_expr("d_init", c.d_init);
    f.numbers("snapshot_times", c.snapshot_times);
    solver_field(f, c.solver);
    f.finish();
    c.validate();
    return c;
}

SweepConfig parse_sweep(const json& j) {
    Fields f(j, "");
    SweepConfig c;
    f.numbers("eps_list", c.eps_list);
    f.integer("n_per_cell", c.n_per_cell);
    shape_field(f, c.shape);
    f.number("t_end", c.t_end);
    f.integer("snapshots", c.snapshots);
    f.vector_expr("forcing_f", c.forcing_f);
    f.vector_expr("forcing_h", c.forcing_h);
    f.vector_expr("d_init", c.d_init);
    f.integer("reference_grid_n", c.reference_grid_n);
    if (const json* v = f.take("test_functions")) {
        const std::string ptr = f.at("test_functions");
        if (!v->is_array()) throw ConfigError(ptr, "expected an array of expression pairs");
        c.test_functions.clear();
        for (std::size_t k = 0; k < v->size(); ++k) {
            const std::string p = ptr + "/" + std::to_string(k);
            const VectorExpr e = as_vector_expr((*v)[k], p);
            c.test_functions.emplace_back(e.first.source(), e.second.source());
        }
    }
    solver_field(f, c.solver);
    f.integer("threads", c.threads);
    f.finish();
    c.validate();
    return c;
}

ordered shape_json(const ObstacleShape& shape) {
    ordered j;
    if (const auto* d = std::get_if<Disk>(&shape)) {
        j["shape"] = "disk";
        j["radius"] = d->radius;
    } else if (const auto* s = std::get_if<Superellipse>(&shape)) {
        j["shape"] = "superellipse";
        j["rx"] = s->rx;
        j["ry"] = s->ry;
        j["p"] = s->exponent;
    } else {
        j["shape"] = "none";
    }
    return j;
}

ordered solver_json(const SolveConfig& s) {
    ordered j;
    j["rel_tol"] = s.rel_tol;
    j["max_iter"] = s.max_iter;
    return j;
}

ordered expr_json(const VectorExpr& e) { return ordered::array({e.first.source(), e.second.source()}); }

ordered to_json(const TensorsConfig& c) {
    ordered j;
    j["shape"] = shape_json(c.shape);
    j["n"] = c.n;
    j["solver"] = solver_json(c.solver);
    j["write_fields"] = c.write_fields;
    return j;
}

ordered to_json(const SimConfig& c) {
    ordered j;
    j["m"] = c.grid.m;
    j["n"] = c.grid.n;
    j["shape"] = shape_json(c.grid.shape);
    j["t_end"] = c.t_end;
    j["dt"] = c.dt;
    j["forcing_f"] = expr_json(c.forcing_f);
    j["forcing_h"] = expr_json(c.forcing_h);
    j["d_init"] = expr_json(c.d_init);
    j["solver"] = solver_json(c.solver);
    j["snapshot_times"] = c.snapshot_times;
    return j;
}

ordered to_json(const LimitConfig& c) {
    ordered j;
    j["shape"] = shape_json(c.shape);
    j["n_per_cell"] = c.n_per_cell;
    j["grid_n"] = c.grid_n;
    j["t_end"] = c.t_end;
    j["dt"] = c.dt;
    j["forcing_f"] = expr_json(c.forcing_f);
    j["forcing_h"] = expr_json(c.forcing_h);
    j["d_init"] = expr_json(c.d_init);
    j["snapshot_times"] = c.snapshot_times;
    j["solver"] = solver_json(c.solver);
    return j;
}

ordered to_json(const SweepConfig& c) {
    ordered j;
    j["eps_list"] = c.eps_list;
    j["n_per_cell"] = c.n_per_cell;
    j["shape"] = shape_json(c.shape);
    j["t_end"] = c.t_end;
    j["snapshots"] = c.snapshots;
    j["forcing_f"] = expr_json(c.forcing_f);
    j["forcing_h"] = expr_json(c.forcing_h);
    j["d_init"] = expr_json(c.d_init);
    j["reference_grid_n"] = c.reference_grid_n;
    ordered tf = ordered::array();
    for (const auto& [a, b] : c.test_functions) tf.push_back(ordered::array({a, b}));
    j["test_functions"] = tf;
    j["solver"] = solver_json(c.solver);
    j["threads"] = c.threads;
    return j;
}

}  // namespace

std::string to_string(Command c) {
    switch (c) {
    case Command::tensors: return "tensors";
    case Command::simulate: return "simulate";
    case Command::limit: return "limit";
    case Command::sweep: return "sweep";
    }
    return "?";
}

void LimitConfig::validate() const {
    check_resolution(n_per_cell, "/n_per_cell");
    if (grid_n < 8 || grid_n > 4096) throw ConfigError("/grid_n", "must lie in [8, 4096]");
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ConfigError("/t_end", "must be positive");
    if (!(dt >= 0.0) || !std::isfinite(dt)) throw ConfigError("/dt", "must be >= 0");
    for (std::size_t k = 0; k < snapshot_times.size(); ++k) {
        const std::string ptr = "/snapshot_times/" + std::to_string(k);
        if (!(snapshot_times[k] >= 0.0 && snapshot_times[k] <= t_end)) throw ConfigError(ptr, "must lie in [0, t_end]");
        if (k > 0 && !(snapshot_times[k] > snapshot_times[k - 1]))
            throw ConfigError(ptr, "times must be strictly increasing");
    }
    solver.validate();
}

AnyConfig parse_config(Command command, std::string_view json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("invalid JSON: ") + e.what());
    }
    switch (command) {
    case Command::tensors: return parse_tensors(j);
    case Command::simulate: return parse_simulate(j);
    case Command::limit: return parse_limit(j);
    case Command::sweep: return parse_sweep(j);
    }
    throw ConfigError("", "unknown command");
}

AnyConfig load_config(Command command, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(command, ss.str());
}

std::string echo_config(const AnyConfig& config) {
    return std::visit([](const auto& c) { return to_json(c).dump(2); }, config) + "\n";
}

Command command_of(const AnyConfig& config) {
    switch (config.index()) {
    case 0: return Command::tensors;
    case 1: return Command::simulate;
    case 2: return Command::limit;
    default: return Command::sweep;
    }
}

}  // namespace lchomog
