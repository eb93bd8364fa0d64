#pragma once

#include <functional>
#include <span>
#include <utility>

#include "homlag/jet.hpp"
#include "homlag/symtensor.hpp"

namespace homlag {

/// Position-dependent symmetric tensor, evaluable at plain or Jet2-valued
/// chart points so spatial derivatives come out exact. Both paths run the
/// same generic callable, so the value parts agree bit for bit.
class TensorField {
public:
    TensorField() = default;

    template <class F>
    TensorField(int rank, int dim, F f)
        : rank_(rank), dim_(dim), eval_d_(f), eval_j_(f) {}

    int rank() const { return rank_; }
    int dim() const { return dim_; }
    bool valid() const { return static_cast<bool>(eval_d_); }

    SymTensor<double> eval(std::span<const double> x) const { return eval_d_(x); }
    SymTensor<Jet2> eval(std::span<const Jet2> x) const { return eval_j_(x); }

    /// Constant-in-x field.
    static TensorField constant(SymTensor<double> value) {
        const int r = value.rank(), d = value.dim();
        return TensorField(r, d, [value]<class T>(std::span<const T> x) {
            SymTensor<T> out(value.rank(), value.dim());
            for (std::size_t i = 0; i < value.size(); ++i)
                out[i] = T{} + value[i];
            (void)x;
            return out;
        });
    }

private:
    int rank_ = 0;
    int dim_ = 0;
    std::function<SymTensor<double>(std::span<const double>)> eval_d_;
    std::function<SymTensor<Jet2>(std::span<const Jet2>)> eval_j_;
};

/// Scalar function of the chart point (gauge functions, EM gauge scalars).
class ScalarField {
public:
    ScalarField() = default;

    template <class F>
    ScalarField(int dim, F f) : dim_(dim), eval_d_(f), eval_j_(f) {}

    int dim() const { return dim_; }
    bool valid() const { return static_cast<bool>(eval_d_); }

    double eval(std::span<const double> x) const { return eval_d_(x); }
    Jet2 eval(std::span<const Jet2> x) const { return eval_j_(x); }

private:
    int dim_ = 0;
    std::function<double(std::span<const double>)> eval_d_;
    std::function<Jet2(std::span<const Jet2>)> eval_j_;
};

/// Covector potential A_mu(x, v) with possible velocity dependence; the
/// velocity slots accept jets so v-derivatives are exact.
class VelocityPotential {
public:
    VelocityPotential() = default;

    template <class F>
    VelocityPotential(int dim, F f) : dim_(dim), eval_d_(f), eval_j_(f) {}

    int dim() const { return dim_; }

    std::vector<double> eval(std::span<const double> x, std::span<const double> v) const {
        return eval_d_(x, v);
    }
    std::vector<Jet2> eval(std::span<const double> x, std::span<const Jet2> v) const {
        return eval_j_(x, v);
    }

private:
    int dim_ = 0;
    std::function<std::vector<double>(std::span<const double>, std::span<const double>)> eval_d_;
    std::function<std::vector<Jet2>(std::span<const double>, std::span<const Jet2>)> eval_j_;
};

}  // namespace homlag
