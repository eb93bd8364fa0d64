#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "homlag/fields.hpp"
#include "homlag/linalg.hpp"
#include "homlag/symtensor.hpp"

namespace homlag {

/// Smooth map from the parameter box [0,1]^D into an m-dimensional chart,
/// jet-evaluable in all D parameters.
class Embedding {
public:
    Embedding() = default;

    template <class F>
    Embedding(int D, int m, F f) : D_(D), m_(m), f_d_(f), f_j_(f) {}

    int brane_dim() const { return D_; }
    int target_dim() const { return m_; }

    std::vector<double> eval(std::span<const double> z) const { return f_d_(z); }
    std::vector<Jet2> eval(std::span<const Jet2> z) const { return f_j_(z); }

    /// m x D Jacobian at z from one jet evaluation.
    Mat jacobian(std::span<const double> z) const;

private:
    int D_ = 1;
    int m_ = 2;
    std::function<std::vector<double>(std::span<const double>)> f_d_;
    std::function<std::vector<Jet2>(std::span<const Jet2>)> f_j_;
};

/// Smooth map of the parameter box onto itself (reparametrization).
class BoxMap {
public:
    template <class F>
    BoxMap(int D, F f) : D_(D), f_d_(f), f_j_(f) {}

    int dim() const { return D_; }
    std::vector<double> eval(std::span<const double> z) const { return f_d_(z); }
    std::vector<Jet2> eval(std::span<const Jet2> z) const { return f_j_(z); }

private:
    int D_ = 1;
    std::function<std::vector<double>(std::span<const double>)> f_d_;
    std::function<std::vector<Jet2>(std::span<const Jet2>)> f_j_;
};

/// Sorted strictly-increasing index tuples (a1 < ... < aD) in lex order;
/// there are C(m, D) of them.
std::vector<std::vector<int>> index_combinations(int m, int D);

enum class DngNormalization { paper, cauchy_binet };

/// Canonical brane Lagrangian: optional 1-form coefficients A_Gamma over the
/// generalized velocities, optional Dirac-Nambu-Goto term built from a target
/// metric, plus structurally supported higher canonical terms over the
/// C(m,D)-dimensional omega space.
struct BraneLagrangian {
    std::function<std::vector<double>(std::span<const double>)> one_form;  // point -> A_Gamma
    std::optional<TensorField> metric;
    DngNormalization normalization = DngNormalization::cauchy_binet;

    struct OmegaTerm {
        int order = 2;
        double weight = 1.0;
        std::function<SymTensor<double>(std::span<const double>)> field;  // point -> S_n over omega
    };
    std::vector<OmegaTerm> omega_terms;
};

/// Determinant of the D x D submatrix of J selecting the given rows, in the
/// given row order (sign flips under row swaps).
double minor_det(const Mat& J, std::span<const int> rows);

struct MinorsResult {
    std::vector<double> values;  // indexed like index_combinations(m, D)
    bool degenerate = false;     // Jacobian rank < D at this point
};

/// Generalized velocities: all C(m, D) Jacobian minors at z. For D = 1 this
/// is the plain velocity vector.
MinorsResult jacobian_minors(const Embedding& e, std::span<const double> z);

struct InducedMetric {
    Mat h;
    double det = 0.0;
};

/// Pull-back metric h_ab = g_ab(phi) d_a phi d_b phi and its determinant.
InducedMetric induced_metric(const Embedding& e, const TensorField& g, std::span<const double> z);

struct DngValue {
    double value = 0.0;
    int radicand_sign = 0;
};

/// sqrt(|Y . Y|) with index-wise g-lowering; cauchy_binet normalization
/// divides the ordered-tuple contraction by D! so the value equals
/// sqrt(|det h|) and the D = 1 case reduces to the particle metric term.
DngValue dng_lagrangian(const Embedding& e, const TensorField& g, std::span<const double> z,
                        DngNormalization normalization);

/// Tensor-product Gauss-Legendre quadrature of the brane Lagrangian over the
/// parameter box.
double brane_action(const Embedding& e, const BraneLagrangian& bl, int grid, int order);

struct DiffeoResult {
    double action_original = 0.0;
    double action_pulled = 0.0;
    double rel_diff = 0.0;
};

/// Evaluates the action on e and on e o zeta at grid * 2^refine panels per
/// axis. A non-positive Jacobian determinant of zeta raises NonOrientation.
DiffeoResult diffeo_test(const Embedding& e, const BraneLagrangian& bl, const BoxMap& zeta,
                         int grid, int order, int refine = 0);

/// phi*(Omega) / dz = Omega_Gamma omega^Gamma: the coefficient of the pulled
/// back D-form relative to the parameter volume form.
double pullback_volume_check(const Embedding& e, std::span<const double> omega_coeffs,
                             std::span<const double> z);

}  // namespace homlag
