#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "lchomog/cell_problems.hpp"
#include "lchomog/fields.hpp"
#include "lchomog/geometry.hpp"
#include "lchomog/homogenization.hpp"
#include "lchomog/perforated_sim.hpp"

namespace lchomog {

struct VtkField {
    std::string name;
    std::variant<CellScalar, CellVector> values;
};

struct VtkData {
    std::string title;
    int cells = 0;  ///< per axis
    std::vector<VtkField> fields;
};

/// Legacy ASCII STRUCTURED_POINTS over [0,1]^2 with cell data, every number
/// printed with 17 significant digits. All fields must share the lattice size.
/// Throws IoError.
void write_vtk(const VtkData& data, const std::filesystem::path& path);

/// Reads files produced by write_vtk. Throws IoError.
VtkData read_vtk(const std::filesystem::path& path);

/// 1 on fluid cells, 0 on obstacle cells.
CellScalar fluid_mask(const PerforatedGrid& grid);

/// printf("%.17g"); reads back to the same double.
std::string format_number(double v);

/// tensors.json: theta, theta_discrete, A, B, B_alt, omega_mean, n, shape.
std::string tensors_json(const EffectiveTensors& t);
void write_tensors(const EffectiveTensors& t, const std::filesystem::path& path);

/// report.json (everything) and report.csv (one row per eps). Throws IoError.
void write_report(const SweepReport& report, const std::filesystem::path& dir);
std::string report_json(const SweepReport& report);
std::string report_csv(const SweepReport& report);

/// Reads report.json back (records, verdicts, diagnostics, flags; the
/// config is reparsed). Throws IoError or ConfigError.
SweepReport read_report(const std::filesystem::path& path);

/// energy.csv: t, e_current, dissipation_accum, work_accum, slack, max_abs_d, norm_u.
void write_energy_csv(const std::vector<LedgerSample>& history, const std::filesystem::path& path);

/// Writes `text` to `path`, creating parent directories. Throws IoError.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace lchomog
