#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "threshold_lab/characteristics.hpp"
#include "threshold_lab/closure.hpp"
#include "threshold_lab/profile.hpp"

namespace thlab {

enum class Boundary { Periodic, OutflowExtrapolate };

struct GridState {
    double t = 0.0;
    double x_lo = 0.0;
    double x_hi = 1.0;
    int n_cells = 0;
    Boundary boundary = Boundary::Periodic;
    std::vector<double> rho;
    std::vector<double> u;

    double dx() const { return (x_hi - x_lo) / n_cells; }
    double x_center(int i) const { return x_lo + (i + 0.5) * dx(); }

    /// e = u_x + rho with central differences (one-sided at outflow edges,
    /// wrapped under periodic boundaries).
    std::vector<double> e_field() const;
    std::vector<double> dx_field(const std::vector<double>& z) const;
    double mass() const;  // sum rho * dx
};

struct AugGridState {
    double t = 0.0;
    double x_lo = 0.0;
    double x_hi = 1.0;
    int n_cells = 0;
    Boundary boundary = Boundary::Periodic;
    std::vector<double> n;
    std::vector<double> v;
    std::vector<double> q;

    double dx() const { return (x_hi - x_lo) / n_cells; }
    double x_center(int i) const { return x_lo + (i + 0.5) * dx(); }
};

/// sup over interior cells of |q - n - D_x v|, central-difference D_x.
double q_consistency(const AugGridState& state);

struct MonitorSample {
    double t = 0.0;
    double min_e = 0.0;
    double max_e = 0.0;
    double max_rho = 0.0;
    double min_u = 0.0;
    double max_u = 0.0;
    double sup_abs_dx_rho = 0.0;
    double min_dx_rho = 0.0;
    double max_dx_rho = 0.0;
    double min_dx_e = 0.0;
    double max_dx_e = 0.0;
    double max_abs_dx_u = 0.0;
    std::optional<double> min_R;
    std::optional<double> max_R;
    std::optional<double> min_signed_g;  // min over x of sign0 * (f(u)-u)
    std::optional<double> q_defect;      // augmented runs
};

enum class Termination { ReachedT, BlowupGuard, CflCollapse };

struct RunResult {
    std::vector<GridState> snapshots;        // at requested output times
    std::vector<AugGridState> aug_snapshots; // augmented runs only
    std::vector<MonitorSample> monitors;     // one per accepted step
    Termination termination = Termination::ReachedT;
    double t_final = 0.0;
    double guard_time = 0.0;    // when BlowupGuard fired
    double guard_x = 0.0;       // cell center that tripped the guard
    long clip_incidents = 0;    // rho clipped below -1e-12
    // Full step history for FieldProvider-based verification.
    std::vector<GridState> history;
};

enum class RunMode { Primitive, Augmented };
enum class QSeeding { DiscreteDx, Analytic };

struct Guards {
    double e_min = 1e4;     // stop when min e < -e_min
    double dxu_max = 1e4;   // stop when max |D_x u| > dxu_max
};

struct RunConfig {
    ClosureSpec spec;
    ProfileSpec rho0;
    ProfileSpec u0;
    double x_lo = -10.0;
    double x_hi = 10.0;
    int n_cells = 400;
    Boundary boundary = Boundary::Periodic;
    double cfl = 0.5;
    double t_end = 10.0;
    std::vector<double> output_times;
    RunMode mode = RunMode::Primitive;
    QSeeding q_seeding = QSeeding::Analytic;
    Guards guards;
    bool keep_history = false;
    double dt_max = 1e300;
    // Optional Riemann monitor R(rho, u); only meaningful for strictly
    // hyperbolic data. sign0 enables the sign-invariance monitor.
    std::function<double(double, double)> r_eval;
    int sign0 = 0;
};

double cfl_dt(const GridState& state, const ClosureSpec& spec, double cfl);
double cfl_dt(const AugGridState& state, const ClosureSpec& spec, double cfl);

GridState step_primitive(const GridState& state, const ClosureSpec& spec,
                         double dt, long* clip_incidents = nullptr);
AugGridState step_augmented(const AugGridState& state, const ClosureSpec& spec,
                            double dt);

RunResult run(const RunConfig& config);

/// Bilinear (time x space) interpolation over stored grid snapshots.
class GridFieldProvider : public FieldProvider {
public:
    explicit GridFieldProvider(std::vector<GridState> states);
    std::optional<FieldSample> query(double t, double x) const override;
    double t_max() const override;

private:
    std::vector<GridState> states_;
    std::vector<std::vector<double>> e_;  // per snapshot
};

} // namespace thlab
