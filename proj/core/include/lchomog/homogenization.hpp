#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lchomog/cell_problems.hpp"
#include "lchomog/expr.hpp"
#include "lchomog/fields.hpp"
#include "lchomog/geometry.hpp"
#include "lchomog/sparse.hpp"

namespace lchomog {

/// Per unit cell, the arithmetic mean over its fluid cells, broadcast to
/// every cell of the unit cell (obstacle included).
CellScalar cell_average(const PerforatedGrid& grid, const CellScalar& f);
CellVector cell_average(const PerforatedGrid& grid, const CellVector& f);

/// Per unit cell, the mean over all of its cells (used for zero-extended
/// fields), broadcast.
CellScalar full_cell_average(const PerforatedGrid& grid, const CellScalar& f);
CellVector full_cell_average(const PerforatedGrid& grid, const CellVector& f);

/// Fluid values kept, obstacle cells set to 0; tagged as a full-domain field.
CellScalar zero_extend(const PerforatedGrid& grid, const CellScalar& f);
CellVector zero_extend(const PerforatedGrid& grid, const CellVector& f);

/// Velocity at cell centres (mean of the two faces per axis).
CellVector face_to_cell(const FaceField& u);

/// Trapezoid in time, midpoint in space: sum_k w_k h^2 sum_c phi(x_c, t_k) . f_k(c).
/// `fields[k]` is sampled at `times[k]`.
double pairing(const std::vector<CellVector>& fields, const std::vector<double>& times, const VectorExpr& phi);

/// Trapezoid weights for the given sample times.
std::vector<double> trapezoid_weights(const std::vector<double>& times);

/// |f|_q / (eps |grad f|_q) for a field vanishing on obstacles and on the
/// boundary. The gradient is taken across every pair of neighbouring lattice
/// locations; a wall half a cell away counts as a zero value at distance h/2.
double poincare_ratio(const PerforatedGrid& grid, const CellScalar& f, double q);
double poincare_ratio(const PerforatedGrid& grid, const FaceField& u, double q);

/// max over neighbouring unit-cell pairs of
/// |mean_k f - mean_j f| / (eps^{1 - 2/s} |grad f|_{L^s(fluid of k and j)}),
/// with cell-centre gradients. s in {1, 2, 4}. Throws NoValidPairs.
double contiguous_mean_ratio(const PerforatedGrid& grid, const CellScalar& f, double s);
double contiguous_mean_ratio(const PerforatedGrid& grid, const CellVector& f, double s);

/// Bilinear interpolation of a cell-centred field on the square at (x, y);
/// clamped to the outermost cell centres.
Vec2 sample_bilinear(const CellVector& f, double x, double y);

struct SweepConfig {
    std::vector<double> eps_list{0.25, 0.125, 0.0625};
    int n_per_cell = 16;
    ObstacleShape shape = Disk{0.25};
    double t_end = 0.1;
    int snapshots = 11;  ///< equally spaced including 0 and t_end
    VectorExpr forcing_f = VectorExpr::parse("sin(2*pi*y)", "0");
    VectorExpr forcing_h = VectorExpr::parse("0", "0");
    VectorExpr d_init = VectorExpr::parse("cos(pi*x)", "sin(pi*x)");
    int reference_grid_n = 256;
    std::vector<std::pair<std::string, std::string>> test_functions{
        {"1", "1"}, {"sin(pi*x)*sin(pi*y)", "sin(pi*x)*sin(pi*y)"}, {"x*y", "x*y"}};
    SolveConfig solver;
    int threads = 1;

    /// Throws ConfigError.
    void validate() const;
    std::vector<double> snapshot_times() const;

    friend bool operator==(const SweepConfig&, const SweepConfig&) = default;
};

struct SweepRecord {
    double eps = 0.0;
    int m = 0;
    double norm_u_tilde = 0.0;
    double norm_u_tilde_over_eps = 0.0;
    double err_u_avg = 0.0;
    double err_d_avg = 0.0;
    std::vector<double> pairing_errors;
    double norm_epsP_Lp = 0.0;
    double poincare_ratio_u = 0.0;
    double mean_diff_ratio_d = 0.0;
    double energy_min_slack = 0.0;
    double max_abs_d = 0.0;
    int steps = 0;
    double runtime_s = 0.0;
};

struct SweepVerdicts {
    bool err_u_decreasing = false;
    bool err_d_decreasing = false;
    bool velocity_bounded = false;  ///< |u~|/eps within a factor 3
    bool pressure_bounded = false;  ///< eps |P|_{L^2 L^1.5} within a factor 3
    /// The exit-code verdicts: monotone errors and both bounded norms.
    bool all() const { return err_u_decreasing && err_d_decreasing && velocity_bounded && pressure_bounded; }
};

struct SweepDiagnostics {
    std::vector<bool> pairing_decreasing;  ///< one per test function
    bool poincare_bounded = false;
    bool mean_diff_bounded = false;
};

struct SweepReport {
    SweepConfig config;
    std::optional<EffectiveTensors> tensors;
    std::vector<SweepRecord> records;
    SweepVerdicts verdicts;
    SweepDiagnostics diagnostics;
    double limit_u_norm = 0.0;  ///< L2(0,T; L2) of the Darcy velocity
    double runtime_s = 0.0;
    bool incomplete = false;
    std::string error;
    /// Which failure stopped the sweep: "config", "solver" or empty.
    std::string error_kind;
};

/// Largest / smallest of positive values (infinity if any is not positive).
double spread(const std::vector<double>& values);
bool strictly_decreasing(const std::vector<double>& values);

/// Tensors, limit problems, one perforated run per eps, metrics, verdicts.
/// Failures after validation are caught and flagged in the report.
/// `progress` (optional) receives one line per completed stage.
SweepReport run_sweep(const SweepConfig& cfg, const std::function<void(const std::string&)>& progress = {});

}  // namespace lchomog
