#include "homlag/backgrounds.hpp"

#include <cmath>

namespace homlag {

namespace {

double require_param(const PresetSpec& spec, const std::string& key) {
    auto it = spec.params.find(key);
    if (it == spec.params.end())
        throw Error(ErrorCode::MissingParam, "preset '" + spec.name + "' needs parameter '" + key + "'");
    return it->second;
}

double param_or(const PresetSpec& spec, const std::string& key, double fallback) {
    auto it = spec.params.find(key);
    return it == spec.params.end() ? fallback : it->second;
}

AnsatzProfiles profiles_of(const PresetSpec& spec) {
    AnsatzProfiles p;
    if (auto it = spec.profiles.find("psi"); it != spec.profiles.end()) p.psi = it->second;
    if (auto it = spec.profiles.find("phi"); it != spec.profiles.end()) p.phi = it->second;
    if (p.psi.empty() || p.phi.empty())
        throw Error(ErrorCode::MissingParam, "ansatz profiles psi/phi must be non-empty");
    return p;
}

TensorField schwarzschild_metric(double M) {
    return TensorField(2, 4, [M]<class T>(std::span<const T> x) {
        using std::sin;
        const T r = x[1];
        if (value_of(r) <= 2.1 * M)
            throw Error(ErrorCode::SignDomain, "schwarzschild chart guard: r <= 2.1 M");
        const T f = 1.0 - (2.0 * M) / r;
        const T st = sin(x[2]);
        SymTensor<T> g(2, 4);
        g.at({0, 0}) = f;
        g.at({1, 1}) = -1.0 / f;
        g.at({2, 2}) = -(r * r);
        g.at({3, 3}) = -(r * r) * (st * st);
        return g;
    });
}

}  // namespace

TensorField minkowski_metric(int dim) {
    std::vector<double> d(static_cast<size_t>(dim), -1.0);
    d[0] = 1.0;
    return TensorField::constant(SymTensor<double>::diag(2, dim, std::span<const double>(d)));
}

TensorField ansatz_field(int n, const AnsatzProfiles& profiles) {
    return TensorField(n, 2, [n, profiles]<class T>(std::span<const T> x) {
        const T r = x[1];
        SymTensor<T> S(n, 2);
        std::vector<int> idx(static_cast<size_t>(n), 0);
        S.at(std::span<const int>(idx)) = poly_eval(std::span<const double>(profiles.psi), r);
        std::fill(idx.begin(), idx.end(), 1);
        S.at(std::span<const int>(idx)) = poly_eval(std::span<const double>(profiles.phi), r);
        return S;
    });
}

Preset make_preset(const PresetSpec& spec) {
    Preset out;
    if (spec.name == "minkowski") {
        const double mass = param_or(spec, "mass", 1.0);
        out.dim = 4;
        out.metric = minkowski_metric(4);
        out.lagrangian = Lagrangian(4, {CanonicalTerm{2, mass, *out.metric}});
    } else if (spec.name == "schwarzschild") {
        const double M = require_param(spec, "M");
        const double mass = param_or(spec, "mass", 1.0);
        out.dim = 4;
        out.metric = schwarzschild_metric(M);
        out.lagrangian = Lagrangian(4, {CanonicalTerm{2, mass, *out.metric}});
    } else if (spec.name == "uniform_em") {
        const double B = require_param(spec, "B");
        const double q = param_or(spec, "q", 1.0);
        const double mass = param_or(spec, "mass", 1.0);
        out.dim = 4;
        out.metric = minkowski_metric(4);
        out.one_form = TensorField(1, 4, [B]<class T>(std::span<const T> x) {
            SymTensor<T> A(1, 4);
            A.at({2}) = x[1] * B;
            return A;
        });
        out.lagrangian = Lagrangian(4, {CanonicalTerm{1, q, *out.one_form},
                                        CanonicalTerm{2, mass, *out.metric}});
    } else if (spec.name == "coulomb_em") {
        const double Z = require_param(spec, "Z");
        const double q = param_or(spec, "q", 1.0);
        const double mass = param_or(spec, "mass", 1.0);
        out.dim = 4;
        out.metric = minkowski_metric(4);
        out.one_form = TensorField(1, 4, [Z]<class T>(std::span<const T> x) {
            using std::sqrt;
            const T r2 = x[1] * x[1] + x[2] * x[2] + x[3] * x[3];
            SymTensor<T> A(1, 4);
            A.at({0}) = Z / sqrt(r2);
            return A;
        });
        out.lagrangian = Lagrangian(4, {CanonicalTerm{1, q, *out.one_form},
                                        CanonicalTerm{2, mass, *out.metric}});
    } else if (spec.name == "sn_ansatz") {
        const int n = static_cast<int>(require_param(spec, "n"));
        const double delta = param_or(spec, "delta", 1.0);
        if (n < 2) throw Error(ErrorCode::MissingParam, "sn_ansatz needs n >= 2");
        out.dim = 2;
        out.sn_order = n;
        out.sn_field = ansatz_field(n, profiles_of(spec));
        out.lagrangian = Lagrangian(2, {CanonicalTerm{n, delta, *out.sn_field}});
    } else if (spec.name == "minkowski_plus_sn") {
        const int n = static_cast<int>(require_param(spec, "n"));
        const double delta = require_param(spec, "delta");
        const double mass = param_or(spec, "mass", 1.0);
        if (n < 2) throw Error(ErrorCode::MissingParam, "minkowski_plus_sn needs n >= 2");
        out.dim = 2;
        out.sn_order = n;
        out.metric = minkowski_metric(2);
        out.sn_field = ansatz_field(n, profiles_of(spec));
        out.lagrangian = Lagrangian(2, {CanonicalTerm{2, mass, *out.metric},
                                        CanonicalTerm{n, delta, *out.sn_field}});
    } else {
        throw Error(ErrorCode::UnknownPreset, "unknown preset '" + spec.name + "'");
    }
    return out;
}

Mat faraday(const TensorField& A, std::span<const double> x) {
    const int m = A.dim();
    std::vector<Jet2> xj;
    xj.reserve(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) xj.push_back(Jet2::variable(x[static_cast<size_t>(i)], i, m));
    const SymTensor<Jet2> Aj = A.eval(std::span<const Jet2>(xj));
    Mat F(m, m);
    for (int mu = 0; mu < m; ++mu)
        for (int nu = 0; nu < m; ++nu)
            F(mu, nu) = Aj.at({nu}).d(mu) - Aj.at({mu}).d(nu);
    return F;
}

TensorField gauge_transform(const TensorField& A, const ScalarField& f) {
    const int m = A.dim();
    if (f.dim() != m) throw Error(ErrorCode::DimMismatch, "gauge scalar dimension != field dimension");
    return TensorField(1, m, [A, f, m]<class T>(std::span<const T> x) {
        SymTensor<T> out = A.eval(x);
        std::vector<Jet2> inner;
        inner.reserve(static_cast<size_t>(m));
        for (int i = 0; i < m; ++i)
            inner.push_back(Jet2::variable(value_of(x[static_cast<size_t>(i)]), i, m));
        const Jet2 fj = f.eval(std::span<const Jet2>(inner));
        if constexpr (std::same_as<T, double>) {
            for (int mu = 0; mu < m; ++mu) out.at({mu}) += fj.d(mu);
        } else {
            for (int mu = 0; mu < m; ++mu) {
                // linearized d_mu f: exact value and first derivatives
                T corr = T{} + fj.d(mu);
                for (int nu = 0; nu < m; ++nu)
                    corr += (x[static_cast<size_t>(nu)] - value_of(x[static_cast<size_t>(nu)])) * fj.dd(mu, nu);
                out.at({mu}) += corr;
            }
        }
        return out;
    });
}

std::pair<double, double> ansatz_accel(int n, const AnsatzProfiles& profiles, double w, double v,
                                       double r) {
    if (std::abs(v) < 1e-12)
        throw Error(ErrorCode::ZeroVelocity, "ansatz acceleration diverges as v -> 0");
    const double psi = poly_eval(std::span<const double>(profiles.psi), r);
    const double phi = poly_eval(std::span<const double>(profiles.phi), r);
    if (std::abs(psi) < 1e-14 || std::abs(phi) < 1e-14)
        throw Error(ErrorCode::ZeroProfile, "ansatz profile vanishes at r");
    const double dpsi = poly_deriv(std::span<const double>(profiles.psi), r);
    const double dphi = poly_deriv(std::span<const double>(profiles.phi), r);
    const double dv = -v * v * dphi / (n * phi) +
                      std::pow(w, n) * dpsi / (static_cast<double>(n) * (n - 1) * phi * std::pow(v, n - 2));
    const double dw = -w * v * dpsi / ((n - 1) * psi);
    return {dv, dw};
}

}  // namespace homlag
