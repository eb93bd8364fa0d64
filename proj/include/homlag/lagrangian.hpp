#pragma once

#include <concepts>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "homlag/fields.hpp"
#include "homlag/linalg.hpp"

namespace homlag {

/// One canonical term c_n * (S_n(v,...,v))^(1/n). Order 1 is the linear
/// coupling c_1 * A_a v^a; orders >= 2 require a strictly positive radicand.
struct CanonicalTerm {
    int order = 2;
    double weight = 1.0;
    TensorField field;
};

namespace detail {

template <class T>
T eval_term_impl(const CanonicalTerm& t, std::span<const T> x, std::span<const T> v) {
    using std::pow;
    using std::sqrt;
    if (t.field.dim() != static_cast<int>(v.size()) || t.field.rank() != t.order)
        throw Error(ErrorCode::DimMismatch, "term/field/velocity dimensions disagree");
    const SymTensor<T> S = t.field.eval(x);
    T radicand = contract_full(S, v);
    if (t.order == 1) return radicand * t.weight;
    if (value_of(radicand) <= 0.0)
        throw Error(ErrorCode::SignDomain,
                    "non-positive radicand for order-" + std::to_string(t.order) + " term");
    if (t.order == 2) return sqrt(radicand) * t.weight;
    return pow(radicand, 1.0 / t.order) * t.weight;
}

template <class T>
T eval_monomial_impl(const CanonicalTerm& t, std::span<const T> x, std::span<const T> v) {
    if (t.field.dim() != static_cast<int>(v.size()) || t.field.rank() != t.order)
        throw Error(ErrorCode::DimMismatch, "term/field/velocity dimensions disagree");
    return contract_full(t.field.eval(x), v) * t.weight;
}

}  // namespace detail

/// Composable first-order homogeneous Lagrangian: a weighted sum of canonical
/// terms plus an optional total-derivative gauge term dLambda/dtau with
/// Lambda = Lambda(x).
class Lagrangian {
public:
    Lagrangian() = default;
    Lagrangian(int dim, std::vector<CanonicalTerm> terms,
               std::optional<ScalarField> gauge_term = std::nullopt)
        : dim_(dim), terms_(std::move(terms)), gauge_term_(std::move(gauge_term)) {
        for (const auto& t : terms_)
            if (t.field.dim() != dim_)
                throw Error(ErrorCode::DimMismatch, "term dimension != Lagrangian dimension");
        if (gauge_term_ && gauge_term_->dim() != dim_)
            throw Error(ErrorCode::DimMismatch, "gauge term dimension != Lagrangian dimension");
    }

    int dim() const { return dim_; }
    const std::vector<CanonicalTerm>& terms() const { return terms_; }
    const std::optional<ScalarField>& gauge_term() const { return gauge_term_; }

    const CanonicalTerm* term_of_order(int n) const {
        for (const auto& t : terms_)
            if (t.order == n) return &t;
        return nullptr;
    }

    Lagrangian with_gauge_term(ScalarField lambda) const {
        return Lagrangian(dim_, terms_, std::move(lambda));
    }

    double eval(std::span<const double> x, std::span<const double> v) const;
    Jet2 eval(std::span<const Jet2> x, std::span<const Jet2> v) const;

private:
    int dim_ = 0;
    std::vector<CanonicalTerm> terms_;
    std::optional<ScalarField> gauge_term_;
};

inline double eval_term(const CanonicalTerm& t, std::span<const double> x,
                        std::span<const double> v) {
    return detail::eval_term_impl(t, x, v);
}
inline Jet2 eval_term(const CanonicalTerm& t, std::span<const Jet2> x, std::span<const Jet2> v) {
    return detail::eval_term_impl(t, x, v);
}

/// c_n * S_n(v,...,v) without the n-th root; sign-unrestricted. This is the
/// fixed-gauge form the dynamics integrates under TermConst.
inline double eval_monomial(const CanonicalTerm& t, std::span<const double> x,
                            std::span<const double> v) {
    return detail::eval_monomial_impl(t, x, v);
}
inline Jet2 eval_monomial(const CanonicalTerm& t, std::span<const Jet2> x,
                          std::span<const Jet2> v) {
    return detail::eval_monomial_impl(t, x, v);
}

/// Type-erased scalar function on (x, v), evaluable with plain values or with
/// jets. Lagrangians, gauge-transformed Lagrangians and user gauge functions
/// all travel through this one shape.
class PhaseScalar {
public:
    PhaseScalar() = default;

    template <class F>
    PhaseScalar(int dim, F f) : dim_(dim), f_d_(f), f_j_(f) {}

    PhaseScalar(const Lagrangian& L)  // NOLINT: implicit by design
        : dim_(L.dim()),
          f_d_([L](std::span<const double> x, std::span<const double> v) { return L.eval(x, v); }),
          f_j_([L](std::span<const Jet2> x, std::span<const Jet2> v) { return L.eval(x, v); }) {}

    int dim() const { return dim_; }
    bool valid() const { return static_cast<bool>(f_d_); }

    double eval(std::span<const double> x, std::span<const double> v) const { return f_d_(x, v); }
    Jet2 eval(std::span<const Jet2> x, std::span<const Jet2> v) const { return f_j_(x, v); }

private:
    int dim_ = 0;
    std::function<double(std::span<const double>, std::span<const double>)> f_d_;
    std::function<Jet2(std::span<const Jet2>, std::span<const Jet2>)> f_j_;
};

/// Wraps the un-rooted monomial of a single term as a PhaseScalar.
PhaseScalar monomial_scalar(const CanonicalTerm& term);

/// dLambda/dtau = v^a d_a Lambda. The jet overload leaves the (x,x) Hessian
/// block at zero (it would need third derivatives of Lambda); no derived
/// quantity in this library reads that block.
double gauge_term_rate(const ScalarField& lambda, std::span<const double> x,
                       std::span<const double> v);
Jet2 gauge_term_rate(const ScalarField& lambda, std::span<const Jet2> x,
                     std::span<const Jet2> v);

/// First and second derivatives of a phase scalar from one evaluation with
/// 2m active jet variables (x first, then v).
struct PhaseDerivs {
    double value = 0.0;
    std::vector<double> dx;  // dL/dx^a
    std::vector<double> dv;  // dL/dv^a
    Mat d2_vv;               // d2L/dv^a dv^b
    Mat d2_vx;               // d2L/dv^a dx^b
};

PhaseDerivs phase_derivs(const PhaseScalar& f, std::span<const double> x,
                         std::span<const double> v);

std::vector<double> conjugate_momentum(const PhaseScalar& f, std::span<const double> x,
                                       std::span<const double> v);

/// h = v . dL/dv - L; identically zero for first-order homogeneous L.
double hamiltonian(const PhaseScalar& f, std::span<const double> x, std::span<const double> v);

/// (v . dL/dv) / L; throws ZeroLagrangian when |L| < 1e-12 * (1 + |v|).
double homogeneity_degree(const PhaseScalar& f, std::span<const double> x,
                          std::span<const double> v);

struct SingularityReport {
    double det_estimate = 0.0;
    int rank_estimate = 0;
    double mv_residual = 0.0;  // ||M v|| / (||M|| ||v||)
    double frob = 0.0;
};

std::pair<SymTensor<double>, SingularityReport> v_hessian(const PhaseScalar& f,
                                                          std::span<const double> x,
                                                          std::span<const double> v);

/// Matter-source monomial of a canonical term: components
/// (1/n) (S_n(v,..,v))^((1-n)/n) v^{a1}..v^{an}; for n = 1 just v^a.
SymTensor<double> source_tensor(const CanonicalTerm& t, std::span<const double> x,
                                std::span<const double> v);

/// d(eval_term)/d(packed field component), by seeding jets on the packed
/// components. Oracle counterpart of source_tensor: entry c equals
/// weight * multiplicity(c) * source_tensor[c].
std::vector<double> term_source_jet(const CanonicalTerm& t, std::span<const double> x,
                                    std::span<const double> v);

/// g_ab(x, v) = dA_a/dv^b + dA_b/dv^a for a velocity-dependent potential.
SymTensor<double> velocity_metric(const VelocityPotential& A, std::span<const double> x,
                                  std::span<const double> v);

}  // namespace homlag
