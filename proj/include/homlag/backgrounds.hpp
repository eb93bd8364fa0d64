#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "homlag/lagrangian.hpp"

namespace homlag {

/// Named field configuration with scalar parameters and, for the S_n
/// profiles, polynomial coefficient lists in r (ascending powers).
struct PresetSpec {
    std::string name;
    std::map<std::string, double> params;
    std::map<std::string, std::vector<double>> profiles;
};

struct AnsatzProfiles {
    std::vector<double> psi{1.0};
    std::vector<double> phi{1.0};
};

template <class T>
T poly_eval(std::span<const double> coeffs, const T& r) {
    T acc{};
    for (size_t i = coeffs.size(); i-- > 0;) acc = acc * r + coeffs[i];
    return acc;
}

inline double poly_deriv(std::span<const double> coeffs, double r) {
    double acc = 0.0;
    for (size_t i = coeffs.size(); i-- > 1;) acc = acc * r + static_cast<double>(i) * coeffs[i];
    return acc;
}

struct Preset {
    int dim = 4;
    Lagrangian lagrangian;
    std::optional<TensorField> metric;
    std::optional<TensorField> one_form;
    std::optional<TensorField> sn_field;
    int sn_order = 0;
};

/// Builds the tensor fields plus a Lagrangian wiring them with the preset's
/// weights (q, mass, delta). Names: minkowski, schwarzschild, uniform_em,
/// coulomb_em, sn_ansatz, minkowski_plus_sn.
Preset make_preset(const PresetSpec& spec);

/// F_mn = d_m A_n - d_n A_m at x (antisymmetric m x m array).
Mat faraday(const TensorField& A, std::span<const double> x);

/// A' = A + df. Pointwise faraday(A') == faraday(A). Jet evaluation of the
/// returned field linearizes df around the jet's value point; the dropped
/// third derivatives of f only ever feed the (x,x) Hessian block, which no
/// consumer reads.
TensorField gauge_transform(const TensorField& A, const ScalarField& f);

/// Closed-form equations of motion of the monomial S_n = psi(r) w^n + phi(r) v^n
/// on the static rotationally symmetric 2d chart. Returns (dv_dtau, dw_dtau).
std::pair<double, double> ansatz_accel(int n, const AnsatzProfiles& profiles, double w, double v,
                                       double r);

TensorField minkowski_metric(int dim);

/// Diagonal S_n field on the (t, r) chart: S_t..t = psi(r), S_r..r = phi(r).
TensorField ansatz_field(int n, const AnsatzProfiles& profiles);

}  // namespace homlag
