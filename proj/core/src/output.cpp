#include "lchomog/output.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "lchomog/config.hpp"
#include "lchomog/errors.hpp"

namespace lchomog {

namespace {

using ordered = nlohmann::ordered_json;

ordered tensor_json(const Tensor2& t) { return ordered::array({{t[0][0], t[0][1]}, {t[1][0], t[1][1]}}); }

Tensor2 tensor_from(const nlohmann::json& j) {
    return {{{j.at(0).at(0).get<double>(), j.at(0).at(1).get<double>()},
             {j.at(1).at(0).get<double>(), j.at(1).at(1).get<double>()}}};
}

ordered tensors_ordered(const EffectiveTensors& t) {
    ordered j;
    j["theta"] = t.theta;
    j["theta_discrete"] = t.theta_discrete;
    j["A"] = tensor_json(t.a);
    j["B"] = t.b ? tensor_json(*t.b) : ordered();
    j["B_alt"] = t.b_alt ? tensor_json(*t.b_alt) : ordered();
    j["omega_mean"] = t.omega_mean ? tensor_json(*t.omega_mean) : ordered();
    j["a_asymmetry"] = t.a_asymmetry;
    j["b_asymmetry"] = t.b_asymmetry;
    j["n"] = t.n;
    TensorsConfig shape_only;
    shape_only.shape = t.shape;
    j["shape"] = ordered::parse(echo_config(shape_only))["shape"];
    return j;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* kCsvColumns[] = {"eps",           "norm_u_tilde",     "norm_u_tilde_over_eps",
                             "err_u_avg",     "err_d_avg",        "norm_epsP_Lp",
                             "poincare_ratio_u", "mean_diff_ratio_d", "energy_min_slack"};

}  // namespace

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    out.close();
    if (!out) throw IoError("write failed for " + path.string());
}

CellScalar fluid_mask(const PerforatedGrid& grid) {
    CellScalar m(grid.size(), Domain::full);
    for (std::size_t k = 0; k < grid.mask().size(); ++k) m[k] = grid.mask()[k] == CellKind::fluid ? 1.0 : 0.0;
    return m;
}

void write_vtk(const VtkData& data, const std::filesystem::path& path) {
    const int N = data.cells;
    for (const auto& f : data.fields) {
        const int n = std::visit([](const auto& v) { return v.size(); }, f.values);
        if (n != N) throw IoError("field '" + f.name + "' does not match the lattice size");
        if (f.name.empty() || f.name.find_first_of(" \t\n") != std::string::npos)
            throw IoError("VTK field names must be single words");
    }
    std::string title = data.title.empty() ? "lc-homog" : data.title;
    for (char& c : title)
        if (c == '\n') c = ' ';
    std::ostringstream os;
    os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET STRUCTURED_POINTS\n";
    os << "DIMENSIONS " << N + 1 << ' ' << N + 1 << " 1\n";
    os << "ORIGIN 0 0 0\n";
    const std::string h = format_number(1.0 / N);
    os << "SPACING " << h << ' ' << h << " 1\n";
    os << "CELL_DATA " << static_cast<long long>(N) * N << '\n';
    for (const auto& f : data.fields) {
        if (const auto* s = std::get_if<CellScalar>(&f.values)) {
            os << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
            for (double v : s->values()) os << format_number(v) << '\n';
        } else {
            os << "VECTORS " << f.name << " double\n";
            for (const Vec2& v : std::get<CellVector>(f.values).values())
                os << format_number(v.x) << ' ' << format_number(v.y) << " 0\n";
        }
    }
    write_text(path, os.str());
}

VtkData read_vtk(const std::filesystem::path& path) {
    std::istringstream in(read_text(path));
    std::string line;
    VtkData data;
    auto fail = [&](const std::string& why) { return IoError(path.string() + ": " + why); };
    if (!std::getline(in, line) || line.rfind("# vtk DataFile", 0) != 0) throw fail("not a legacy VTK file");
    std::getline(in, data.title);
    std::string word;
    in >> word;
    if (word != "ASCII") throw fail("only ASCII files are supported");
    in >> word >> word;
    if (word != "STRUCTURED_POINTS") throw fail("expected STRUCTURED_POINTS");
    long long nx = 0, ny = 0, nz = 0, count = 0;
    while (in >> word) {
        if (word == "DIMENSIONS") {
            in >> nx >> ny >> nz;
        } else if (word == "ORIGIN" || word == "SPACING") {
            double a, b, c;
            in >> a >> b >> c;
        } else if (word == "CELL_DATA") {
            in >> count;
            break;
        } else {
            throw fail("unexpected keyword " + word);
        }
    }
    if (nx < 2 || nx != ny || nz != 1 || count != (nx - 1) * (ny - 1)) throw fail("inconsistent dimensions");
    data.cells = static_cast<int>(nx - 1);
    const int N = data.cells;
    std::string name, type;
    while (in >> word) {
        if (word == "SCALARS") {
            int comps = 1;
            in >> name >> type;
            if (in.peek() == ' ') in >> comps;
            in >> word >> word;  // LOOKUP_TABLE default
            CellScalar s(N, Domain::full);
            for (double& v : s.values())
                if (!(in >> v)) throw fail("truncated scalar data");
            data.fields.push_back({name, std::move(s)});
        } else if (word == "VECTORS") {
            in >> name >> type;
            CellVector v(N, Domain::full);
            double z = 0.0;
            for (Vec2& e : v.values())
                if (!(in >> e.x >> e.y >> z)) throw fail("truncated vector data");
            data.fields.push_back({name, std::move(v)});
        } else {
            throw fail("unexpected keyword " + word);
        }
    }
    return data;
}

std::string tensors_json(const EffectiveTensors& t) { return tensors_ordered(t).dump(2) + "\n"; }

void write_tensors(const EffectiveTensors& t, const std::filesystem::path& path) { write_text(path, tensors_json(t)); }

std::string report_json(const SweepReport& r) {
    ordered j;
    j["incomplete"] = r.incomplete;
    j["error"] = r.error;
    j["error_kind"] = r.error_kind;
    j["runtime_s"] = r.runtime_s;
    j["config"] = ordered::parse(echo_config(r.config));
    j["tensors"] = r.tensors ? tensors_ordered(*r.tensors) : ordered();
    j["limit_u_norm"] = r.limit_u_norm;
    ordered recs = ordered::array();
    for (const auto& x : r.records) {
        ordered e;
        e["eps"] = x.eps;
        e["m"] = x.m;
        e["norm_u_tilde"] = x.norm_u_tilde;
        e["norm_u_tilde_over_eps"] = x.norm_u_tilde_over_eps;
        e["err_u_avg"] = x.err_u_avg;
        e["err_d_avg"] = x.err_d_avg;
        e["pairing_errors"] = x.pairing_errors;
        e["norm_epsP_Lp"] = x.norm_epsP_Lp;
        e["poincare_ratio_u"] = x.poincare_ratio_u;
        e["mean_diff_ratio_d"] = x.mean_diff_ratio_d;
        e["energy_min_slack"] = x.energy_min_slack;
        e["max_abs_d"] = x.max_abs_d;
        e["steps"] = x.steps;
        e["runtime_s"] = x.runtime_s;
        recs.push_back(e);
    }
    j["records"] = recs;
    ordered v;
    v["err_u_decreasing"] = r.verdicts.err_u_decreasing;
    v["err_d_decreasing"] = r.verdicts.err_d_decreasing;
    v["velocity_bounded"] = r.verdicts.velocity_bounded;
    v["pressure_bounded"] = r.verdicts.pressure_bounded;
    v["all"] = r.verdicts.all();
    j["verdicts"] = v;
    ordered d;
    d["pairing_decreasing"] = r.diagnostics.pairing_decreasing;
    d["poincare_bounded"] = r.diagnostics.poincare_bounded;
    d["mean_diff_bounded"] = r.diagnostics.mean_diff_bounded;
    j["diagnostics"] = d;
    return j.dump(2) + "\n";
}

std::string report_csv(const SweepReport& r) {
    std::ostringstream os;
    for (std::size_t c = 0; c < std::size(kCsvColumns); ++c) os << (c ? "," : "") << kCsvColumns[c];
    os << '\n';
    for (const auto& x : r.records) {
        const double row[] = {x.eps,          x.norm_u_tilde,     x.norm_u_tilde_over_eps,
                              x.err_u_avg,    x.err_d_avg,        x.norm_epsP_Lp,
                              x.poincare_ratio_u, x.mean_diff_ratio_d, x.energy_min_slack};
        for (std::size_t c = 0; c < std::size(row); ++c) os << (c ? "," : "") << format_number(row[c]);
        os << '\n';
    }
    return os.str();
}

void write_report(const SweepReport& report, const std::filesystem::path& dir) {
    write_text(dir / "report.json", report_json(report));
    write_text(dir / "report.csv", report_csv(report));
}

SweepReport read_report(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError(path.string() + ": " + e.what());
    }
    SweepReport r;
    try {
        r.config = std::get<SweepConfig>(parse_config(Command::sweep, j.at("config").dump()));
        r.incomplete = j.at("incomplete").get<bool>();
        r.error = j.at("error").get<std::string>();
        r.error_kind = j.at("error_kind").get<std::string>();
        r.runtime_s = j.at("runtime_s").get<double>();
        r.limit_u_norm = j.at("limit_u_norm").get<double>();
        if (const auto& t = j.at("tensors"); !t.is_null()) {
            EffectiveTensors e;
            e.theta = t.at("theta").get<double>();
            e.theta_discrete = t.at("theta_discrete").get<double>();
            e.a = tensor_from(t.at("A"));
            if (!t.at("B").is_null()) e.b = tensor_from(t.at("B"));
            if (!t.at("B_alt").is_null()) e.b_alt = tensor_from(t.at("B_alt"));
            if (!t.at("omega_mean").is_null()) e.omega_mean = tensor_from(t.at("omega_mean"));
            e.a_asymmetry = t.at("a_asymmetry").get<double>();
            e.b_asymmetry = t.at("b_asymmetry").get<double>();
            e.n = t.at("n").get<int>();
            e.shape = r.config.shape;
            r.tensors = e;
        }
        for (const auto& e : j.at("records")) {
            SweepRecord x;
            x.eps = e.at("eps").get<double>();
            x.m = e.at("m").get<int>();
            x.norm_u_tilde = e.at("norm_u_tilde").get<double>();
            x.norm_u_tilde_over_eps = e.at("norm_u_tilde_over_eps").get<double>();
            x.err_u_avg = e.at("err_u_avg").get<double>();
            x.err_d_avg = e.at("err_d_avg").get<double>();
            x.pairing_errors = e.at("pairing_errors").get<std::vector<double>>();
            x.norm_epsP_Lp = e.at("norm_epsP_Lp").get<double>();
            x.poincare_ratio_u = e.at("poincare_ratio_u").get<double>();
            x.mean_diff_ratio_d = e.at("mean_diff_ratio_d").get<double>();
            x.energy_min_slack = e.at("energy_min_slack").get<double>();
            x.max_abs_d = e.at("max_abs_d").get<double>();
            x.steps = e.at("steps").get<int>();
            x.runtime_s = e.at("runtime_s").get<double>();
            r.records.push_back(std::move(x));
        }
        const auto& v = j.at("verdicts");
        r.verdicts.err_u_decreasing = v.at("err_u_decreasing").get<bool>();
        r.verdicts.err_d_decreasing = v.at("err_d_decreasing").get<bool>();
        r.verdicts.velocity_bounded = v.at("velocity_bounded").get<bool>();
        r.verdicts.pressure_bounded = v.at("pressure_bounded").get<bool>();
        const auto& d = j.at("diagnostics");
        r.diagnostics.pairing_decreasing = d.at("pairing_decreasing").get<std::vector<bool>>();
        r.diagnostics.poincare_bounded = d.at("poincare_bounded").get<bool>();
        r.diagnostics.mean_diff_bounded = d.at("mean_diff_bounded").get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path.string() + ": malformed report: " + e.what());
    }
    return r;
}

void write_energy_csv(const std::vector<LedgerSample>& history, const std::filesystem::path& path) {
    std::ostringstream os;
    os << "t,e_current,dissipation_accum,work_accum,slack,max_abs_d,norm_u\n";
    for (const auto& s : history)
        os << format_number(s.t) << ',' << format_number(s.e_current) << ',' << format_number(s.dissipation_accum) << ','
           << format_number(s.work_accum) << ',' << format_number(s.slack) << ',' << format_number(s.max_abs_d) << ','
           << format_number(s.norm_u) << '\n';
    write_text(path, os.str());
}

}  // namespace lchomog
