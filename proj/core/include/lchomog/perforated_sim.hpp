#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "lchomog/expr.hpp"
#include "lchomog/fields.hpp"
#include "lchomog/geometry.hpp"
#include "lchomog/mac.hpp"
#include "lchomog/sparse.hpp"
#include "lchomog/stokes.hpp"

namespace lchomog {

struct SimConfig {
    GridSpec grid{4, 16, Disk{0.25}};
    double t_end = 0.1;
    double dt = 0.0;  ///< 0 selects the automatic step
    VectorExpr forcing_f;  ///< profile F, applied as F / eps
    VectorExpr forcing_h;  ///< profile H, applied as eps H on fluid-fluid faces
    VectorExpr d_init = VectorExpr::parse("1", "0");
    SolveConfig solver;
    /// Times at which states are recorded; empty records t_end only.
    std::vector<double> snapshot_times;

    /// Throws ConfigError for bad times or an initial director leaving the unit ball.
    void validate() const;

    friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

struct SimState {
    double t = 0.0;
    FaceField u;
    CellScalar p;  ///< mean-free over fluid cells
    CellVector d;
};

struct EnergyLedger {
    double e_initial = 0.0;
    double e_current = 0.0;
    double dissipation_accum = 0.0;
    double work_accum = 0.0;
    double slack = 0.0;  ///< e_initial + work - e_current - dissipation
};

/// One row of energy.csv.
struct LedgerSample {
    double t;
    double e_current;
    double dissipation_accum;
    double work_accum;
    double slack;
    double max_abs_d;
    double norm_u;
};

struct PressureExtensionField {
    CellScalar values;  ///< defined on every cell of the square, mean zero
    std::string rule_tag = "cell-average fill";
};

struct SimResult {
    std::vector<SimState> snapshots;
    std::vector<PressureExtensionField> extensions;  ///< one per snapshot
    EnergyLedger ledger;
    std::vector<LedgerSample> history;  ///< initial state, then one row per step
    int steps = 0;
    double max_abs_d = 0.0;
    double max_cell_divergence = 0.0;  ///< largest |div u| over cells and steps
    double min_slack = 0.0;  ///< smallest slack after any step (0 when no step was taken)
};

/// Elastic plus bulk energy: (1/2) |grad d|^2 + (|d|^2 - 1)^2 / 4 integrated
/// over the fluid cells, gradients taken across fluid-fluid faces.
double director_energy(const PerforatedGrid& grid, const CellVector& d);

/// Largest |d| over the fluid cells.
double max_abs_director(const PerforatedGrid& grid, const CellVector& d);

/// L2 norm of a face field: sqrt(h^2 sum u^2).
double face_l2_norm(const PerforatedGrid& grid, const FaceField& u);

/// Evaluates `scale * f(x, y, t)` at the centres of the velocity unknowns;
/// every other face is 0.
FaceField face_forcing(const MacSystem& mac, const VectorExpr& f, double t, double scale);

/// Right side of the momentum equation on the velocity unknowns:
///
///     -(grad d)^T Delta d  +  f_eps  -  Delta h_eps
///
/// The stress is formed at cell centres from the masked Laplacian and the
/// cell gradients, then averaged onto the faces. `h_eps` lives on faces
/// (x-component on x-faces) and -Delta is the velocity Laplacian.
FaceField stokes_rhs(const MacSystem& mac, const CellVector& d, const FaceField& f_eps, const FaceField& h_eps);

struct FlowField {
    FaceField u;
    CellScalar p;
};

/// No-slip Stokes solve on the perforated lattice.
FlowField stokes_solve_perforated(const MacSystem& mac, const FaceField& rhs, const SolveConfig& cfg);

/// Largest stable step for the explicit advection and reaction terms given
/// the velocity.
double auto_time_step(const MacSystem& mac, const FaceField& u);

/// One IMEX step of the transported director flow: upwind advection and the
/// cubic reaction explicit, the masked diffusion implicit (solved by cg_solve).
class DirectorStepper {
public:
    explicit DirectorStepper(const MacSystem& mac, SolveConfig cfg = {});
    CellVector step(const CellVector& d, double dt, const FaceField& u) const;

private:
    const MacSystem* mac_;
    SparseOperator graph_;
    SolveConfig cfg_;
};

CellVector director_step(const MacSystem& mac, const CellVector& d, double dt, const FaceField& u,
                         const SolveConfig& cfg = {});

/// Fills every obstacle cell with the fluid average of p over its own unit
/// cell, then removes the mean over the square.
PressureExtensionField extend_pressure(const PerforatedGrid& grid, const CellScalar& p);

/// p~ = p - |grad d|^2 / 2 + fluid-mean(|grad d|^2 / 2).
CellScalar pressure_forms(const PerforatedGrid& grid, const CellScalar& p, const CellVector& d);
/// Inverse of pressure_forms.
CellScalar pressure_from_form(const PerforatedGrid& grid, const CellScalar& p_tilde, const CellVector& d);

/// Adds one step's dissipation and work and refreshes e_current and slack.
/// The dissipation uses Delta d_new - (|d_old|^2 - 1) d_old, the residual of
/// the implicit-explicit scheme.
void energy_ledger_update(EnergyLedger& ledger, const MacSystem& mac, const CellVector& d_old,
                          const CellVector& d_new, const FaceField& u, double dt, const FaceField& f_eps,
                          const FaceField& h_eps);

/// Called after every recorded snapshot (used for progress reporting).
using SimObserver = std::function<void(const SimState&)>;

/// Quasi-static loop: Stokes solve from the current director, snapshot when
/// due, director step, ledger update, maximum-principle check.
SimResult run_simulation(const SimConfig& cfg, const SimObserver& observer = {});

}  // namespace lchomog
