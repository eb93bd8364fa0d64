#include <doctest.h>

#include <cmath>
#include <numbers>

#include "homlag/backgrounds.hpp"
#include "homlag/brane.hpp"
#include "homlag/dynamics.hpp"
#include "homlag/rng.hpp"

using namespace homlag;

namespace {

constexpr double kPi = std::numbers::pi;

Embedding flat_sheet() {
    return Embedding(2, 4, []<class T>(std::span<const T> z) {
        std::vector<T> x(4);
        x[0] = z[0];
        x[1] = z[1];
        x[2] = T{};
        x[3] = T{};
        return x;
    });
}

Embedding cylinder_patch(double rho) {
    return Embedding(2, 4, [rho]<class T>(std::span<const T> z) {
        using std::cos;
        using std::sin;
        std::vector<T> x(4);
        x[0] = z[0];
        x[1] = cos(z[1] * (2.0 * kPi)) * rho;
        x[2] = sin(z[1] * (2.0 * kPi)) * rho;
        x[3] = T{};
        return x;
    });
}

// affine + mild quadratic embedding with a rank-D bias on the diagonal
Embedding random_embedding(int D, int m, Rng& rng) {
    std::vector<double> c(static_cast<size_t>(m)), A(static_cast<size_t>(m) * D),
        Q(static_cast<size_t>(m) * D * D);
    for (auto& v : c) v = rng.uniform(-0.5, 0.5);
    for (auto& v : A) v = rng.uniform(-0.6, 0.6);
    for (auto& v : Q) v = rng.uniform(-0.15, 0.15);
    for (int i = 0; i < D; ++i) A[static_cast<size_t>(i) * D + i] += 1.5;
    return Embedding(D, m, [c, A, Q, D, m]<class T>(std::span<const T> z) {
        std::vector<T> x(static_cast<size_t>(m));
        for (int a = 0; a < m; ++a) {
            T acc = T{} + c[static_cast<size_t>(a)];
            for (int i = 0; i < D; ++i) {
                acc += z[static_cast<size_t>(i)] * A[static_cast<size_t>(a) * D + i];
                for (int j = 0; j < D; ++j)
                    acc += z[static_cast<size_t>(i)] * z[static_cast<size_t>(j)] *
                           Q[(static_cast<size_t>(a) * D + i) * D + j];
            }
            x[static_cast<size_t>(a)] = acc;
        }
        return x;
    });
}

size_t combo_offset(int m, int D, const std::vector<int>& want) {
    const auto combos = index_combinations(m, D);
    for (size_t i = 0; i < combos.size(); ++i)
        if (combos[i] == want) return i;
    throw std::logic_error("combo not found");
}

}  // namespace

TEST_CASE("index combinations count C(m, D)") {
    CHECK(index_combinations(4, 2).size() == 6);
    CHECK(index_combinations(5, 3).size() == 10);
    CHECK(index_combinations(4, 1).size() == 4);
}

TEST_CASE("jacobian minors of the flat sheet") {
    const Embedding e = flat_sheet();
    std::vector<double> z{0.3, 0.7};
    const MinorsResult mr = jacobian_minors(e, z);
    REQUIRE(mr.values.size() == 6);
    CHECK_FALSE(mr.degenerate);
    const size_t i01 = combo_offset(4, 2, {0, 1});
    for (size_t i = 0; i < mr.values.size(); ++i)
        CHECK(mr.values[i] == doctest::Approx(i == i01 ? 1.0 : 0.0));
}

TEST_CASE("D = 1 minors are the velocity vector") {
    Embedding line(1, 4, []<class T>(std::span<const T> z) {
        std::vector<T> x(4);
        x[0] = z[0] * 1.3;
        x[1] = z[0] * 0.2;
        x[2] = z[0] * z[0] * 0.4;
        x[3] = T{} + 0.9;
        return x;
    });
    std::vector<double> z{0.5};
    const MinorsResult mr = jacobian_minors(line, z);
    REQUIRE(mr.values.size() == 4);
    CHECK(mr.values[0] == doctest::Approx(1.3));
    CHECK(mr.values[1] == doctest::Approx(0.2));
    CHECK(mr.values[2] == doctest::Approx(0.4));
    CHECK(mr.values[3] == doctest::Approx(0.0));
}

TEST_CASE("string minors match the explicit 2x2 determinants") {
    Rng rng(307);
    const Embedding e = random_embedding(2, 4, rng);
    std::vector<double> z{0.4, 0.6};
    const Mat J = e.jacobian(z);
    const MinorsResult mr = jacobian_minors(e, z);
    const auto combos = index_combinations(4, 2);
    for (size_t i = 0; i < combos.size(); ++i) {
        const int a = combos[i][0], b = combos[i][1];
        const double direct = J(a, 0) * J(b, 1) - J(a, 1) * J(b, 0);
        CHECK(mr.values[i] == doctest::Approx(direct).epsilon(1e-12));
    }
}

TEST_CASE("raw minor determinant is antisymmetric under row swaps") {
    Rng rng(311);
    const Embedding e = random_embedding(2, 4, rng);
    const Mat J = e.jacobian(std::vector<double>{0.2, 0.8});
    std::vector<int> rows{1, 3};
    std::vector<int> swapped{3, 1};
    CHECK(minor_det(J, rows) == doctest::Approx(-minor_det(J, swapped)).epsilon(1e-13));
}

TEST_CASE("induced metric of the flat sheet is diag(1, -1)") {
    const Embedding e = flat_sheet();
    const TensorField eta = minkowski_metric(4);
    const InducedMetric im = induced_metric(e, eta, std::vector<double>{0.5, 0.5});
    CHECK(im.h(0, 0) == doctest::Approx(1.0));
    CHECK(im.h(1, 1) == doctest::Approx(-1.0));
    CHECK(im.h(0, 1) == doctest::Approx(0.0));
    CHECK(im.det == doctest::Approx(-1.0));
}

TEST_CASE("Cauchy-Binet: ordered contraction / D! equals det of the induced metric") {
    Rng rng(313);
    const TensorField eta4 = minkowski_metric(4);
    const TensorField eta5 = minkowski_metric(5);
    int checked = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const bool d3 = trial % 2 == 1;
        const Embedding e = d3 ? random_embedding(3, 5, rng) : random_embedding(2, 4, rng);
        const TensorField& g = d3 ? eta5 : eta4;
        std::vector<double> z(static_cast<size_t>(e.brane_dim()));
        for (auto& c : z) c = rng.uniform(0.1, 0.9);
        const InducedMetric im = induced_metric(e, g, z);
        const DngValue dng = dng_lagrangian(e, g, z, DngNormalization::cauchy_binet);
        const double lhs = dng.value * dng.value * dng.radicand_sign;
        CHECK(std::abs(lhs - im.det) <= 1e-8 * std::max(1.0, std::abs(im.det)));
        ++checked;
    }
    CHECK(checked == 100);
}

TEST_CASE("DNG value on the flat sheet under both normalizations") {
    const Embedding e = flat_sheet();
    const TensorField eta = minkowski_metric(4);
    std::vector<double> z{0.3, 0.3};
    const DngValue cb = dng_lagrangian(e, eta, z, DngNormalization::cauchy_binet);
    CHECK(cb.value == doctest::Approx(1.0));
    CHECK(cb.radicand_sign == -1);
    const DngValue paper = dng_lagrangian(e, eta, z, DngNormalization::paper);
    CHECK(paper.value == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("D = 1 DNG reduces to the particle metric term sqrt(g v v)") {
    Embedding line(1, 4, []<class T>(std::span<const T> z) {
        using std::sin;
        std::vector<T> x(4);
        x[0] = z[0] * 1.4;
        x[1] = sin(z[0]) * 0.3;
        x[2] = z[0] * 0.1;
        x[3] = T{};
        return x;
    });
    const TensorField eta = minkowski_metric(4);
    std::vector<double> z{0.6};
    const DngValue d = dng_lagrangian(line, eta, z, DngNormalization::cauchy_binet);
    const double c = std::cos(0.6) * 0.3;
    const double gvv = 1.4 * 1.4 - c * c - 0.01;
    CHECK(d.value == doctest::Approx(std::sqrt(gvv)).epsilon(1e-12));
    CHECK(d.radicand_sign == 1);
}

TEST_CASE("brane action of the flat sheet") {
    const Embedding e = flat_sheet();
    BraneLagrangian bl;
    bl.metric = minkowski_metric(4);
    SUBCASE("DNG only, cauchy_binet: the parameter-domain area") {
        const double S = brane_action(e, bl, 4, 8);
        CHECK(std::abs(S - 1.0) <= 1e-10);
    }
    SUBCASE("paper normalization: sqrt(2)") {
        bl.normalization = DngNormalization::paper;
        const double S = brane_action(e, bl, 4, 8);
        CHECK(std::abs(S - std::sqrt(2.0)) <= 1e-10);
    }
    SUBCASE("constant 1-form coefficient picks up the projected area") {
        BraneLagrangian wz;
        const size_t i01 = combo_offset(4, 2, {0, 1});
        wz.one_form = [i01](std::span<const double>) {
            std::vector<double> A(6, 0.0);
            A[i01] = 0.25;
            return A;
        };
        const double S = brane_action(e, wz, 3, 6);
        CHECK(S == doctest::Approx(0.25).epsilon(1e-12));
    }
    SUBCASE("structural higher canonical term over the omega space") {
        BraneLagrangian hi;
        const size_t i01 = combo_offset(4, 2, {0, 1});
        hi.omega_terms.push_back({2, 1.0, [i01](std::span<const double>) {
                                      SymTensor<double> S(2, 6);
                                      S.at({static_cast<int>(i01), static_cast<int>(i01)}) = 4.0;
                                      return S;
                                  }});
        const double S = brane_action(e, hi, 2, 4);
        CHECK(S == doctest::Approx(2.0).epsilon(1e-12));  // sqrt(4 * 1 * 1)
    }
}

TEST_CASE("cylinder patch area is 2 pi rho") {
    const double rho = 0.5;
    const Embedding e = cylinder_patch(rho);
    BraneLagrangian bl;
    bl.metric = minkowski_metric(4);
    const double S = brane_action(e, bl, 4, 10);
    CHECK(S == doctest::Approx(2.0 * kPi * rho).epsilon(1e-9));
}

TEST_CASE("diffeomorphism invariance of the brane action") {
    const Embedding e = cylinder_patch(0.4);
    BraneLagrangian bl;
    bl.metric = minkowski_metric(4);

    SUBCASE("identity map changes nothing") {
        BoxMap ident(2, []<class T>(std::span<const T> z) {
            return std::vector<T>(z.begin(), z.end());
        });
        const DiffeoResult r = diffeo_test(e, bl, ident, 3, 8, 0);
        CHECK(r.rel_diff <= 1e-12);
    }
    SUBCASE("quadratic-in-tau bijection at refinement 3") {
        BoxMap zeta(2, []<class T>(std::span<const T> z) {
            std::vector<T> u(2);
            u[0] = z[0] * 0.3 + z[0] * z[0] * 0.7;
            u[1] = z[1];
            return u;
        });
        const DiffeoResult r = diffeo_test(e, bl, zeta, 3, 8, 3);
        CHECK(r.rel_diff <= 1e-6);
    }
    SUBCASE("five random positive-Jacobian reparametrizations") {
        Rng rng(331);
        for (int trial = 0; trial < 5; ++trial) {
            const double e1 = rng.uniform(-0.15, 0.15);
            const double e2 = rng.uniform(-0.15, 0.15);
            const double cp = rng.uniform(-0.05, 0.05);
            BoxMap zeta(2, [=]<class T>(std::span<const T> z) {
                using std::sin;
                std::vector<T> u(2);
                u[0] = z[0] + sin(z[0] * kPi) * (e1 / kPi) +
                       z[0] * (1.0 - z[0]) * (z[1] - 0.5) * cp;
                u[1] = z[1] + sin(z[1] * (2.0 * kPi)) * (e2 / (2.0 * kPi));
                return u;
            });
            const DiffeoResult r = diffeo_test(e, bl, zeta, 3, 8, 3);
            CHECK(r.rel_diff <= 1e-6);
        }
    }
    SUBCASE("orientation-reversing map raises NonOrientation") {
        BoxMap flip(2, []<class T>(std::span<const T> z) {
            std::vector<T> u(2);
            u[0] = 1.0 - z[0];
            u[1] = z[1];
            return u;
        });
        CHECK_THROWS_AS((void)diffeo_test(e, bl, flip, 2, 4, 0), Error);
    }
}

TEST_CASE("D = 1 diffeo test agrees with path-action reparametrization invariance") {
    Embedding line(1, 4, []<class T>(std::span<const T> z) {
        using std::sin;
        std::vector<T> x(4);
        x[0] = z[0] * 1.5;
        x[1] = sin(z[0] * 2.0) * 0.2;
        x[2] = z[0] * z[0] * 0.1;
        x[3] = T{};
        return x;
    });
    BraneLagrangian bl;
    bl.metric = minkowski_metric(4);
    BoxMap cubic(1, []<class T>(std::span<const T> z) {
        std::vector<T> u(1);
        u[0] = z[0] * 0.4 + z[0] * z[0] * z[0] * 0.6;
        return u;
    });
    const DiffeoResult r = diffeo_test(line, bl, cubic, 2, 10, 3);
    CHECK(r.rel_diff <= 1e-8);

    // same numbers as the particle-side action machinery
    const Preset mink = make_preset({"minkowski", {}, {}});
    PathCurve path(4, 0.0, 1.0, []<class T>(T t) {
        using std::sin;
        std::vector<T> x(4);
        x[0] = t * 1.5;
        x[1] = sin(t * 2.0) * 0.2;
        x[2] = t * t * 0.1;
        x[3] = T{};
        return x;
    });
    const double S_path = action_of_path(mink.lagrangian, path, {10, 14, 1e-12});
    CHECK(r.action_original == doctest::Approx(S_path).epsilon(1e-9));
}

TEST_CASE("pull-back of a D-form is proportional to the parameter volume form") {
    SUBCASE("dx0 ^ dx1 on the flat sheet") {
        const Embedding e = flat_sheet();
        std::vector<double> omega(6, 0.0);
        omega[combo_offset(4, 2, {0, 1})] = 1.0;
        CHECK(pullback_volume_check(e, omega, std::vector<double>{0.2, 0.9}) ==
              doctest::Approx(1.0));
    }
    SUBCASE("random form on a random affine embedding matches the wedge expansion") {
        Rng rng(337);
        const Embedding e = random_embedding(2, 4, rng);
        std::vector<double> omega(6);
        for (auto& c : omega) c = rng.uniform(-1, 1);
        std::vector<double> z{0.35, 0.55};
        const double got = pullback_volume_check(e, omega, z);

        // brute-force wedge: sum over combos of Omega_G * sum_{perm} sgn * J
        const Mat J = e.jacobian(z);
        const auto combos = index_combinations(4, 2);
        double expect = 0.0;
        for (size_t i = 0; i < combos.size(); ++i) {
            const int a = combos[i][0], b = combos[i][1];
            expect += omega[i] * (J(a, 0) * J(b, 1) - J(b, 0) * J(a, 1));
        }
        CHECK(got == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("degenerate embedding is reported") {
    Embedding pinch(2, 4, []<class T>(std::span<const T> z) {
        std::vector<T> x(4);
        x[0] = z[0];
        x[1] = z[0];  // rank 1 everywhere
        x[2] = T{};
        x[3] = T{};
        (void)z;
        return x;
    });
    const MinorsResult mr = jacobian_minors(pinch, std::vector<double>{0.5, 0.5});
    CHECK(mr.degenerate);
    const TensorField eta = minkowski_metric(4);
    CHECK_THROWS_AS((void)induced_metric(pinch, eta, std::vector<double>{0.5, 0.5}), Error);
}
