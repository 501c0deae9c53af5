#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lchomog/geometry.hpp"
#include "lchomog/homogenization.hpp"
#include "lchomog/perforated_sim.hpp"
#include "lchomog/sparse.hpp"

namespace lchomog {

enum class Command { tensors, simulate, limit, sweep };

std::string to_string(Command c);

struct TensorsConfig {
    ObstacleShape shape = Disk{0.25};
    int n = 64;
    SolveConfig solver;
    /// Also write the corrector fields of the unit cell as VTK.
    bool write_fields = true;

    friend bool operator==(const TensorsConfig&, const TensorsConfig&) = default;
};

/// Limit problems only: tensors, Darcy flow and effective director flow on
/// an unperforated grid.
struct LimitConfig {
    ObstacleShape shape = Disk{0.25};
    int n_per_cell = 16;   ///< unit-cell resolution for the tensors
    int grid_n = 256;      ///< cells per axis of the limit grid
    double t_end = 0.1;
    double dt = 0.0;
    VectorExpr forcing_f = VectorExpr::parse("sin(2*pi*y)", "0");
    VectorExpr forcing_h;
    VectorExpr d_init = VectorExpr::parse("cos(pi*x)", "sin(pi*x)");
    std::vector<double> snapshot_times;
    SolveConfig solver;

    void validate() const;
    friend bool operator==(const LimitConfig&, const LimitConfig&) = default;
};

using AnyConfig = std::variant<TensorsConfig, SimConfig, LimitConfig, SweepConfig>;

/// Parses and validates a JSON configuration for `command`. Unknown keys are
/// rejected, missing keys take their defaults and every expression is parsed.
/// Throws ConfigError carrying the JSON pointer of the offending key.
AnyConfig parse_config(Command command, std::string_view json_text);

/// parse_config on a file; unreadable files give ConfigError at "".
AnyConfig load_config(Command command, const std::filesystem::path& path);

/// Complete JSON text (every key spelled out) that parses back to `config`.
std::string echo_config(const AnyConfig& config);

Command command_of(const AnyConfig& config);

}  // namespace lchomog
