#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "homlag/lagrangian.hpp"
#include "homlag/quadrature.hpp"

namespace homlag {

// ---------------------------------------------------------------------------
// Parametrization gauges

/// Augment the degenerate Euler-Lagrange system with dL/dtau = 0.
struct GaugeLagrangianConst {};

/// Integrate the un-rooted monomial of the order-n term (S_n = const gauge).
struct GaugeTermConst {
    int order = 2;
};

/// Enforce sqrt(g v v) = 1 via the multiplier-equivalent quadratic Lagrangian
/// (order-2 term becomes half-weight monomial, all other terms unchanged).
struct GaugeProperTime {};

/// Augment with dG/dtau = 0 for a user scalar G(x, v).
struct GaugeAugmented {
    PhaseScalar g;
};

using GaugeChoice =
    std::variant<GaugeLagrangianConst, GaugeTermConst, GaugeProperTime, GaugeAugmented>;

/// The Lagrangian actually integrated under the gauge (L* in the equations
/// of motion). Throws GaugeInvalid when the gauge does not apply to L.
PhaseScalar gauge_scalar(const Lagrangian& L, const GaugeChoice& gauge);

/// The scalar held constant by the gauge (G).
PhaseScalar gauge_function(const Lagrangian& L, const GaugeChoice& gauge);

/// Homogeneity degree of G in v, used by the renormalizing drift policy;
/// 0 means unknown (Augmented).
int gauge_homogeneity(const GaugeChoice& gauge);

// ---------------------------------------------------------------------------
// States and trajectories

struct State {
    double tau = 0.0;
    std::vector<double> x;
    std::vector<double> v;
};

struct MonitorSample {
    double lagrangian = 0.0;
    double hamiltonian = 0.0;
    double gvv = 0.0;  // meaningful only when has_gvv
    bool has_gvv = false;
    double gauge_value = 0.0;
    double drift = 0.0;  // gauge_value - gauge_value(tau0)
};

enum class TrajectoryStatus { ok, singular_system, non_finite };

struct Trajectory {
    std::vector<State> samples;
    std::vector<MonitorSample> monitors;
    std::vector<std::vector<double>> accel;  // dv/dtau recorded per sample
    TrajectoryStatus status = TrajectoryStatus::ok;
    std::string note;
};

// ---------------------------------------------------------------------------
// Equations of motion

struct EomReport {
    std::vector<double> accel;
    double residual = 0.0;       // unscaled ||A a - b|| of the assembled system
    double cond_estimate = 0.0;  // pivot-ratio based
    int rank = 0;
    double gauge_value = 0.0;
    bool ok = false;
};

/// Assembles and solves M a = b with M = d2L*/dvdv,
/// b_a = dL*/dx^a - (d2L*/dv^a dx^b) v^b. TermConst and ProperTime solve the
/// square system; LagrangianConst and Augmented stack the extra row
/// (dG/dv) . a = -(dG/dx) . v and solve in least squares.
EomReport assemble_eom_report(const Lagrangian& L, const GaugeChoice& gauge, const State& s);

/// Same, but throws Error{SingularSystem} if the system is rank-deficient or
/// the condition estimate exceeds 1e8.
std::vector<double> assemble_eom(const Lagrangian& L, const GaugeChoice& gauge, const State& s);

enum class DriftPolicy { off, renormalize };

/// Classic fixed-step RK4 on (x, v). A mid-flight singular system or
/// non-finite state truncates the trajectory and records the error instead
/// of throwing.
Trajectory integrate(const Lagrangian& L, const GaugeChoice& gauge, const State& s0, double step,
                     int n_steps, DriftPolicy drift = DriftPolicy::off);

// ---------------------------------------------------------------------------
// Paths, actions, reparametrizations

/// Continuously differentiable map tau -> chart point on [a, b]; velocities
/// come from jet evaluation.
class PathCurve {
public:
    PathCurve() = default;

    template <class F>
    PathCurve(int dim, double a, double b, F f) : dim_(dim), a_(a), b_(b), f_d_(f), f_j_(f) {}

    int dim() const { return dim_; }
    double lo() const { return a_; }
    double hi() const { return b_; }

    std::vector<double> point(double t) const { return f_d_(t); }
    std::vector<Jet2> point_jet(const Jet2& t) const { return f_j_(t); }

    /// Position and dx/dtau at t.
    std::pair<std::vector<double>, std::vector<double>> point_and_velocity(double t) const;

private:
    int dim_ = 0;
    double a_ = 0.0, b_ = 1.0;
    std::function<std::vector<double>(double)> f_d_;
    std::function<std::vector<Jet2>(Jet2)> f_j_;
};

/// Strictly increasing differentiable scalar map, evaluable with jets.
class MonotoneMap {
public:
    template <class F>
    MonotoneMap(F f) : f_d_(f), f_j_(f) {}  // NOLINT: implicit by design

    double eval(double s) const { return f_d_(s); }
    Jet2 eval(const Jet2& s) const { return f_j_(s); }

private:
    std::function<double(double)> f_d_;
    std::function<Jet2(Jet2)> f_j_;
};

/// Adaptive composite Gauss-Legendre estimate of the action integral
/// of L along the path.
double action_of_path(const Lagrangian& L, const PathCurve& path, const QuadratureSpec& spec);

/// path o f on [c, d]; f'(s) <= 0 at any evaluated node raises NonMonotone.
PathCurve reparametrize_path(const PathCurve& path, const MonotoneMap& f, double c, double d);

/// Resamples both trajectories by normalized arc length (arc measured with
/// arc_field if given, chart-Euclidean otherwise) and returns the maximum
/// pointwise chart distance: a parametrization-free path comparison.
double match_paths(const Trajectory& t1, const Trajectory& t2,
                   const std::optional<TensorField>& arc_field);

// ---------------------------------------------------------------------------
// Geodesic diagnostics

struct Christoffel {
    int dim = 0;
    std::vector<double> coef;  // [a][b][c], symmetric in (b, c)

    double at(int a, int b, int c) const {
        return coef[(static_cast<size_t>(a) * dim + b) * dim + c];
    }
    double& at(int a, int b, int c) {
        return coef[(static_cast<size_t>(a) * dim + b) * dim + c];
    }
};

/// Levi-Civita connection coefficients of g at x (standard convention
/// Gamma^a_bc = g^{ar} (g_{rb,c} + g_{rc,b} - g_{bc,r}) / 2).
Christoffel christoffel(const TensorField& g, std::span<const double> x);

/// Per-sample ||dv/dtau + Gamma(v, v)|| / (||Gamma(v, v)|| + 1), using the
/// accelerations recorded during integration.
std::vector<double> geodesic_residual(const Trajectory& traj, const TensorField& g);

// ---------------------------------------------------------------------------
// Gauge-insensitivity scan

struct ScanResult {
    double slope = 0.0;
    bool degenerate = false;  // all differences at rounding level
    std::vector<double> v_mag;
    std::vector<double> accel_diff;
};

/// Assembles accelerations under LagrangianConst and ProperTime for each
/// state and fits log ||a1 - a2|| against log |3-velocity|, over the spatial
/// acceleration components (the gauges' clock rates differ at O(v), which
/// would otherwise dominate the comparison through the time component).
ScanResult gauge_insensitivity_scan(const Lagrangian& L, std::span<const State> states);

}  // namespace homlag
