#include "homlag/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "homlag/linalg.hpp"

namespace homlag {

namespace {

constexpr double kCondLimit = 1e8;

void check_state(const Lagrangian& L, const State& s) {
    if (static_cast<int>(s.x.size()) != L.dim() || static_cast<int>(s.v.size()) != L.dim())
        throw Error(ErrorCode::DimMismatch, "state dimension != Lagrangian dimension");
}

const CanonicalTerm& required_term(const Lagrangian& L, int order, const char* gauge_name) {
    const CanonicalTerm* t = L.term_of_order(order);
    if (!t)
        throw Error(ErrorCode::GaugeInvalid, std::string(gauge_name) +
                                                 " gauge needs a term of order " +
                                                 std::to_string(order));
    return *t;
}

PhaseScalar rescaled_monomial_sum(const Lagrangian& L, int order, double factor) {
    return PhaseScalar(L.dim(), [L, order, factor]<class T>(std::span<const T> x,
                                                            std::span<const T> v) {
        T s{};
        for (const auto& t : L.terms()) {
            if (t.order == order)
                s += detail::eval_monomial_impl(t, x, v) * factor;
            else
                s += detail::eval_term_impl(t, x, v);
        }
        if (L.gauge_term()) s += gauge_term_rate(*L.gauge_term(), x, v);
        return s;
    });
}

}  // namespace

PhaseScalar gauge_scalar(const Lagrangian& L, const GaugeChoice& gauge) {
    if (std::holds_alternative<GaugeLagrangianConst>(gauge) ||
        std::holds_alternative<GaugeAugmented>(gauge))
        return PhaseScalar(L);
    if (const auto* tc = std::get_if<GaugeTermConst>(&gauge)) {
        required_term(L, tc->order, "TermConst");
        return rescaled_monomial_sum(L, tc->order, 1.0);
    }
    required_term(L, 2, "ProperTime");
    return rescaled_monomial_sum(L, 2, 0.5);
}

PhaseScalar gauge_function(const Lagrangian& L, const GaugeChoice& gauge) {
    if (std::holds_alternative<GaugeLagrangianConst>(gauge)) return PhaseScalar(L);
    if (const auto* aug = std::get_if<GaugeAugmented>(&gauge)) return aug->g;
    if (const auto* tc = std::get_if<GaugeTermConst>(&gauge)) {
        const CanonicalTerm t = required_term(L, tc->order, "TermConst");
        return monomial_scalar(t);
    }
    CanonicalTerm t = required_term(L, 2, "ProperTime");
    t.weight = 1.0;  // the gauge holds g v v itself constant
    return monomial_scalar(t);
}

int gauge_homogeneity(const GaugeChoice& gauge) {
    if (std::holds_alternative<GaugeLagrangianConst>(gauge)) return 1;
    if (const auto* tc = std::get_if<GaugeTermConst>(&gauge)) return tc->order;
    if (std::holds_alternative<GaugeProperTime>(gauge)) return 2;
    return 0;
}

EomReport assemble_eom_report(const Lagrangian& L, const GaugeChoice& gauge, const State& s) {
    check_state(L, s);
    const int m = L.dim();
    const bool square = std::holds_alternative<GaugeTermConst>(gauge) ||
                        std::holds_alternative<GaugeProperTime>(gauge);

    const PhaseScalar Ls = gauge_scalar(L, gauge);
    const PhaseDerivs d = phase_derivs(Ls, s.x, s.v);

    std::vector<double> b(static_cast<size_t>(m), 0.0);
    for (int a = 0; a < m; ++a) {
        double acc = d.dx[static_cast<size_t>(a)];
        for (int c = 0; c < m; ++c) acc -= d.d2_vx(a, c) * s.v[static_cast<size_t>(c)];
        b[static_cast<size_t>(a)] = acc;
    }

    EomReport rep;
    if (square) {
        SolveResult sol = solve_square(d.d2_vv, b);
        rep.accel = std::move(sol.x);
        rep.residual = sol.residual;
        rep.cond_estimate = sol.cond_estimate;
        rep.rank = sol.rank;
        rep.ok = sol.ok && sol.cond_estimate <= kCondLimit;
        const PhaseScalar G = gauge_function(L, gauge);
        rep.gauge_value = G.eval(std::span<const double>(s.x), std::span<const double>(s.v));
        return rep;
    }

    // Stacked system [M; dG/dv] a = [b; -(dG/dx) . v]
    Mat A(m + 1, m);
    std::vector<double> rhs(static_cast<size_t>(m) + 1, 0.0);
    for (int i = 0; i < m; ++i) {
        rhs[static_cast<size_t>(i)] = b[static_cast<size_t>(i)];
        for (int j = 0; j < m; ++j) A(i, j) = d.d2_vv(i, j);
    }
    double gdotxv = 0.0;
    if (std::holds_alternative<GaugeLagrangianConst>(gauge)) {
        for (int j = 0; j < m; ++j) A(m, j) = d.dv[static_cast<size_t>(j)];
        for (int j = 0; j < m; ++j) gdotxv += d.dx[static_cast<size_t>(j)] * s.v[static_cast<size_t>(j)];
        rep.gauge_value = d.value;
    } else {
        const PhaseScalar G = gauge_function(L, gauge);
        const PhaseDerivs dg = phase_derivs(G, s.x, s.v);
        for (int j = 0; j < m; ++j) A(m, j) = dg.dv[static_cast<size_t>(j)];
        for (int j = 0; j < m; ++j) gdotxv += dg.dx[static_cast<size_t>(j)] * s.v[static_cast<size_t>(j)];
        rep.gauge_value = dg.value;
    }
    rhs[static_cast<size_t>(m)] = -gdotxv;

    SolveResult sol = solve_least_squares(A, rhs);
    rep.accel = std::move(sol.x);
    rep.residual = sol.residual;
    rep.cond_estimate = sol.cond_estimate;
    rep.rank = sol.rank;
    rep.ok = sol.ok && sol.cond_estimate <= kCondLimit;
    return rep;
}

std::vector<double> assemble_eom(const Lagrangian& L, const GaugeChoice& gauge, const State& s) {
    EomReport rep = assemble_eom_report(L, gauge, s);
    if (!rep.ok)
        throw Error(ErrorCode::SingularSystem,
                    "equation-of-motion system singular or ill-conditioned (cond est " +
                        std::to_string(rep.cond_estimate) + ", rank " + std::to_string(rep.rank) +
                        ")");
    return rep.accel;
}

namespace {

MonitorSample make_monitor(const Lagrangian& L, const PhaseScalar& G, const State& s,
                           double gauge0, bool have_gauge0) {
    MonitorSample mon;
    try {
        const PhaseDerivs d = phase_derivs(PhaseScalar(L), s.x, s.v);
        mon.lagrangian = d.value;
        double h = -d.value;
        for (size_t a = 0; a < d.dv.size(); ++a) h += s.v[a] * d.dv[a];
        mon.hamiltonian = h;
    } catch (const Error&) {
        mon.lagrangian = std::numeric_limits<double>::quiet_NaN();
        mon.hamiltonian = std::numeric_limits<double>::quiet_NaN();
    }
    if (const CanonicalTerm* g2 = L.term_of_order(2)) {
        const SymTensor<double> g = g2->field.eval(std::span<const double>(s.x));
        mon.gvv = contract_full(g, std::span<const double>(s.v));
        mon.has_gvv = true;
    }
    mon.gauge_value = G.eval(std::span<const double>(s.x), std::span<const double>(s.v));
    mon.drift = have_gauge0 ? mon.gauge_value - gauge0 : 0.0;
    return mon;
}

bool all_finite(std::span<const double> v) {
    for (double c : v)
        if (!std::isfinite(c)) return false;
    return true;
}

}  // namespace

Trajectory integrate(const Lagrangian& L, const GaugeChoice& gauge, const State& s0, double step,
                     int n_steps, DriftPolicy drift) {
    check_state(L, s0);
    const int m = L.dim();
    const PhaseScalar G = gauge_function(L, gauge);

    Trajectory traj;
    traj.samples.reserve(static_cast<size_t>(n_steps) + 1);

    State s = s0;
    double gauge0 = 0.0;
    bool have_gauge0 = false;
    const int deg = gauge_homogeneity(gauge);
    if (drift == DriftPolicy::renormalize && deg == 0)
        throw Error(ErrorCode::GaugeInvalid,
                    "renormalize drift policy needs a gauge of known homogeneity");

    auto accel_of = [&](const State& st) {
        EomReport rep = assemble_eom_report(L, gauge, st);
        if (!rep.ok)
            throw Error(ErrorCode::SingularSystem,
                        "singular equation-of-motion system at tau = " + std::to_string(st.tau));
        return std::move(rep.accel);
    };

    for (int k = 0; k <= n_steps; ++k) {
        std::vector<double> a0;
        try {
            a0 = accel_of(s);
        } catch (const Error& e) {
            traj.status = e.code() == ErrorCode::SingularSystem ? TrajectoryStatus::singular_system
                                                                : TrajectoryStatus::non_finite;
            traj.note = e.what();
            break;
        }
        MonitorSample mon = make_monitor(L, G, s, gauge0, have_gauge0);
        if (!have_gauge0) {
            gauge0 = mon.gauge_value;
            have_gauge0 = true;
        }
        traj.samples.push_back(s);
        traj.monitors.push_back(mon);
        traj.accel.push_back(a0);
        if (k == n_steps) break;

        // classic RK4 on y = (x, v)
        try {
            const double h = step;
            std::vector<double> x1 = s.x, v1 = s.v;
            auto axpy = [m](std::vector<double>& dst, double c, std::span<const double> src) {
                for (int i = 0; i < m; ++i) dst[static_cast<size_t>(i)] += c * src[static_cast<size_t>(i)];
            };

            const std::vector<double>& k1x = s.v;
            const std::vector<double>& k1v = a0;

            State s2{s.tau + 0.5 * h, s.x, s.v};
            axpy(s2.x, 0.5 * h, k1x);
            axpy(s2.v, 0.5 * h, k1v);
            const std::vector<double> k2x = s2.v;
            const std::vector<double> k2v = accel_of(s2);

            State s3{s.tau + 0.5 * h, s.x, s.v};
            axpy(s3.x, 0.5 * h, k2x);
            axpy(s3.v, 0.5 * h, k2v);
            const std::vector<double> k3x = s3.v;
            const std::vector<double> k3v = accel_of(s3);

            State s4{s.tau + h, s.x, s.v};
            axpy(s4.x, h, k3x);
            axpy(s4.v, h, k3v);
            const std::vector<double> k4x = s4.v;
            const std::vector<double> k4v = accel_of(s4);

            axpy(x1, h / 6.0, k1x);
            axpy(x1, h / 3.0, k2x);
            axpy(x1, h / 3.0, k3x);
            axpy(x1, h / 6.0, k4x);
            axpy(v1, h / 6.0, k1v);
            axpy(v1, h / 3.0, k2v);
            axpy(v1, h / 3.0, k3v);
            axpy(v1, h / 6.0, k4v);

            s.tau += h;
            s.x = std::move(x1);
            s.v = std::move(v1);
        } catch (const Error& e) {
            traj.status = e.code() == ErrorCode::SingularSystem ? TrajectoryStatus::singular_system
                                                                : TrajectoryStatus::non_finite;
            traj.note = e.what();
            break;
        }

        if (!all_finite(s.x) || !all_finite(s.v)) {
            traj.status = TrajectoryStatus::non_finite;
            traj.note = "non-finite state at tau = " + std::to_string(s.tau);
            break;
        }

        if (drift == DriftPolicy::renormalize) {
            const double g = G.eval(std::span<const double>(s.x), std::span<const double>(s.v));
            if (std::isfinite(g) && g != 0.0 && gauge0 != 0.0 && (g > 0) == (gauge0 > 0)) {
                const double lambda = std::pow(gauge0 / g, 1.0 / deg);
                for (double& c : s.v) c *= lambda;
            }
        }
    }
    return traj;
}

std::pair<std::vector<double>, std::vector<double>> PathCurve::point_and_velocity(double t) const {
    const std::vector<Jet2> pj = point_jet(Jet2::variable(t, 0, 1));
    std::vector<double> x, v;
    x.reserve(pj.size());
    v.reserve(pj.size());
    for (const Jet2& c : pj) {
        x.push_back(c.value());
        v.push_back(c.d(0));
    }
    return {std::move(x), std::move(v)};
}

double action_of_path(const Lagrangian& L, const PathCurve& path, const QuadratureSpec& spec) {
    if (path.dim() != L.dim())
        throw Error(ErrorCode::DimMismatch, "path dimension != Lagrangian dimension");
    auto integrand = [&](double t) {
        const auto [x, v] = path.point_and_velocity(t);
        return L.eval(std::span<const double>(x), std::span<const double>(v));
    };
    return integrate_adaptive(integrand, path.lo(), path.hi(), spec);
}

PathCurve reparametrize_path(const PathCurve& path, const MonotoneMap& f, double c, double d) {
    if (!(d > c)) throw Error(ErrorCode::NonMonotone, "empty reparametrized interval");
    const int dim = path.dim();
    return PathCurve(dim, c, d, [path, f]<class T>(T s) {
        if constexpr (std::same_as<T, Jet2>) {
            const Jet2 t = f.eval(s);
            if (t.d(0) <= 0.0)
                throw Error(ErrorCode::NonMonotone, "reparametrization has f' <= 0 at a node");
            return path.point_jet(t);
        } else {
            return path.point(f.eval(s));
        }
    });
}

namespace {

double segment_arc(const std::optional<TensorField>& field, std::span<const double> xa,
                   std::span<const double> xb) {
    const size_t m = xa.size();
    std::vector<double> mid(m), dx(m);
    for (size_t i = 0; i < m; ++i) {
        mid[i] = 0.5 * (xa[i] + xb[i]);
        dx[i] = xb[i] - xa[i];
    }
    if (!field) return norm2(dx);
    const SymTensor<double> g = field->eval(std::span<const double>(mid));
    double q = 0.0;
    for (size_t a = 0; a < m; ++a)
        for (size_t b = 0; b < m; ++b)
            q += g.at({static_cast<int>(a), static_cast<int>(b)}) * dx[a] * dx[b];
    return std::sqrt(std::abs(q));
}

// positions resampled at the given arc fractions via linear interpolation
std::vector<std::vector<double>> resample(const Trajectory& t,
                                          const std::optional<TensorField>& field,
                                          std::span<const double> fractions) {
    const size_t n = t.samples.size();
    std::vector<double> s(n, 0.0);
    for (size_t i = 1; i < n; ++i)
        s[i] = s[i - 1] + segment_arc(field, t.samples[i - 1].x, t.samples[i].x);
    const double total = s[n - 1];
    if (total < 1e-10) throw Error(ErrorCode::DegeneratePath, "trajectory arc length below threshold");

    std::vector<std::vector<double>> out;
    out.reserve(fractions.size());
    size_t j = 1;
    for (double f : fractions) {
        const double target = f * total;
        while (j < n - 1 && s[j] < target) ++j;
        const double seg = s[j] - s[j - 1];
        const double w = seg > 0.0 ? (target - s[j - 1]) / seg : 0.0;
        std::vector<double> x(t.samples[j].x.size());
        for (size_t c = 0; c < x.size(); ++c)
            x[c] = (1.0 - w) * t.samples[j - 1].x[c] + w * t.samples[j].x[c];
        out.push_back(std::move(x));
    }
    return out;
}

}  // namespace

double match_paths(const Trajectory& t1, const Trajectory& t2,
                   const std::optional<TensorField>& arc_field) {
    if (t1.samples.size() < 2 || t2.samples.size() < 2)
        throw Error(ErrorCode::DegeneratePath, "trajectories too short to compare");
    constexpr int kPoints = 257;
    std::vector<double> fr(kPoints);
    for (int i = 0; i < kPoints; ++i) fr[static_cast<size_t>(i)] = static_cast<double>(i) / (kPoints - 1);
    const auto p1 = resample(t1, arc_field, fr);
    const auto p2 = resample(t2, arc_field, fr);
    double worst = 0.0;
    for (int i = 0; i < kPoints; ++i) {
        double d2 = 0.0;
        for (size_t c = 0; c < p1[static_cast<size_t>(i)].size(); ++c) {
            const double d = p1[static_cast<size_t>(i)][c] - p2[static_cast<size_t>(i)][c];
            d2 += d * d;
        }
        worst = std::max(worst, std::sqrt(d2));
    }
    return worst;
}

Christoffel christoffel(const TensorField& g, std::span<const double> x) {
    const int m = g.dim();
    std::vector<Jet2> xj;
    xj.reserve(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) xj.push_back(Jet2::variable(x[static_cast<size_t>(i)], i, m));
    const SymTensor<Jet2> gj = g.eval(std::span<const Jet2>(xj));

    Mat gm(m, m);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) gm(a, b) = gj.at({a, b}).value();
    Mat ginv = invert(gm);

    Christoffel out;
    out.dim = m;
    out.coef.assign(static_cast<size_t>(m) * m * m, 0.0);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            for (int c = b; c < m; ++c) {
                double acc = 0.0;
                for (int r = 0; r < m; ++r) {
                    const double term = gj.at({r, b}).d(c) + gj.at({r, c}).d(b) - gj.at({b, c}).d(r);
                    acc += 0.5 * ginv(a, r) * term;
                }
                out.at(a, b, c) = acc;
                out.at(a, c, b) = acc;
            }
    return out;
}

std::vector<double> geodesic_residual(const Trajectory& traj, const TensorField& g) {
    std::vector<double> out;
    out.reserve(traj.samples.size());
    for (size_t i = 0; i < traj.samples.size(); ++i) {
        const State& s = traj.samples[i];
        const Christoffel gam = christoffel(g, s.x);
        const int m = gam.dim;
        std::vector<double> gvv(static_cast<size_t>(m), 0.0), resid(static_cast<size_t>(m), 0.0);
        for (int a = 0; a < m; ++a) {
            double acc = 0.0;
            for (int b = 0; b < m; ++b)
                for (int c = 0; c < m; ++c)
                    acc += gam.at(a, b, c) * s.v[static_cast<size_t>(b)] * s.v[static_cast<size_t>(c)];
            gvv[static_cast<size_t>(a)] = acc;
            resid[static_cast<size_t>(a)] = traj.accel[i][static_cast<size_t>(a)] + acc;
        }
        out.push_back(norm2(resid) / (norm2(gvv) + 1.0));
    }
    return out;
}

ScanResult gauge_insensitivity_scan(const Lagrangian& L, std::span<const State> states) {
    ScanResult out;
    double max_accel = 0.0;
    for (const State& s : states) {
        const EomReport r1 = assemble_eom_report(L, GaugeLagrangianConst{}, s);
        const EomReport r2 = assemble_eom_report(L, GaugeProperTime{}, s);
        if (!r1.ok || !r2.ok)
            throw Error(ErrorCode::SingularSystem, "gauge scan: singular system at a state");
        // Spatial components only: the two gauges tick at clock rates that
        // differ at O(v), so the time component of the acceleration carries an
        // O(v) bookkeeping mismatch; the physical statement lives in dv/dtau.
        std::vector<double> diff;
        for (size_t i = 1; i < r1.accel.size(); ++i) diff.push_back(r1.accel[i] - r2.accel[i]);
        double vmag = 0.0;
        for (size_t i = 1; i < s.v.size(); ++i) vmag += s.v[i] * s.v[i];
        out.v_mag.push_back(std::sqrt(vmag));
        out.accel_diff.push_back(norm2(diff));
        max_accel = std::max({max_accel, norm2(r1.accel), norm2(r2.accel)});
    }
    double max_diff = 0.0;
    for (double d : out.accel_diff) max_diff = std::max(max_diff, d);
    if (max_diff <= 1e-12 * (1.0 + max_accel)) {
        out.degenerate = true;
        out.slope = std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    std::vector<double> lx, ly;
    for (size_t i = 0; i < out.v_mag.size(); ++i) {
        if (out.v_mag[i] <= 0.0 || out.accel_diff[i] <= 0.0) continue;
        lx.push_back(std::log(out.v_mag[i]));
        ly.push_back(std::log(out.accel_diff[i]));
    }
    if (lx.size() < 2) {
        out.degenerate = true;
        out.slope = std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    out.slope = fit_slope(lx, ly);
    return out;
}

}  // namespace homlag
