#include <doctest.h>

#include <cmath>

#include "homlag/backgrounds.hpp"
#include "homlag/brane.hpp"
#include "homlag/dynamics.hpp"
#include "homlag/quadrature.hpp"
#include "homlag/scene.hpp"

using namespace homlag;

TEST_CASE("gauges reject Lagrangians they do not apply to") {
    const Preset p = make_preset({"sn_ansatz",
                                  {{"n", 4.0}, {"delta", 1.0}},
                                  {{"psi", {1.0, 0.1}}, {"phi", {1.0}}}});
    State s{0.0, {0.0, 2.0}, {1.0, 0.3}};
    // no order-2 term: ProperTime and TermConst(2) are invalid
    CHECK_THROWS_AS((void)assemble_eom(p.lagrangian, GaugeProperTime{}, s), Error);
    CHECK_THROWS_AS((void)assemble_eom(p.lagrangian, GaugeTermConst{2}, s), Error);
    try {
        (void)assemble_eom(p.lagrangian, GaugeProperTime{}, s);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::GaugeInvalid);
    }
}

TEST_CASE("renormalize policy refuses gauges of unknown homogeneity") {
    const Preset p = make_preset({"uniform_em", {{"B", 0.1}}, {}});
    PhaseScalar G(4, []<class T>(std::span<const T> x, std::span<const T> v) {
        return x[0] + v[0];
    });
    State s{0.0, {0, 0, 0, 0}, {1.1, 0.2, 0, 0}};
    CHECK_THROWS_AS(
        (void)integrate(p.lagrangian, GaugeAugmented{G}, s, 0.01, 5, DriftPolicy::renormalize),
        Error);
}

TEST_CASE("adaptive quadrature reports non-convergence") {
    QuadratureSpec impossible{2, 1, 0.0};
    CHECK_THROWS_AS(
        (void)integrate_adaptive([](double t) { return std::sin(17.0 * t) / (1.1 + t); }, 0.0,
                                 3.0, impossible),
        Error);
}

TEST_CASE("match_paths rejects degenerate trajectories") {
    Trajectory frozen;
    for (int i = 0; i < 3; ++i) {
        frozen.samples.push_back(State{0.1 * i, {1.0, 2.0}, {0.0, 0.0}});
        frozen.monitors.push_back({});
        frozen.accel.push_back({0.0, 0.0});
    }
    CHECK_THROWS_AS((void)match_paths(frozen, frozen, std::nullopt), Error);
}

TEST_CASE("lightlike worldsheet raises NullWorldvolume") {
    Embedding null_sheet(2, 4, []<class T>(std::span<const T> z) {
        std::vector<T> x(4);
        x[0] = z[0];
        x[1] = z[0];  // lightlike direction
        x[2] = z[1];
        x[3] = T{};
        return x;
    });
    std::vector<double> z{0.5, 0.5};
    CHECK_THROWS_AS(
        (void)dng_lagrangian(null_sheet, minkowski_metric(4), z, DngNormalization::cauchy_binet),
        Error);
    try {
        (void)dng_lagrangian(null_sheet, minkowski_metric(4), z, DngNormalization::cauchy_binet);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NullWorldvolume);
    }
}

TEST_CASE("field evaluation at plain and jet points agrees bit for bit") {
    const Preset p = make_preset({"schwarzschild", {{"M", 1.0}}, {}});
    std::vector<double> x{0.4, 8.3, 1.1, 2.2};
    const auto plain = p.metric->eval(std::span<const double>(x));
    std::vector<Jet2> xj;
    for (int i = 0; i < 4; ++i) xj.push_back(Jet2::variable(x[static_cast<size_t>(i)], i, 4));
    const auto jets = p.metric->eval(std::span<const Jet2>(xj));
    for (size_t c = 0; c < plain.size(); ++c)
        CHECK(plain[c] == jets[c].value());  // exact equality, same arithmetic path
}

TEST_CASE("trajectory bookkeeping: taus increase, monitors align") {
    const Preset p = make_preset({"minkowski", {}, {}});
    const Trajectory t = integrate(p.lagrangian, GaugeProperTime{},
                                   State{0.0, {0, 0, 0, 0}, {1.2, 0.3, 0, 0}}, 0.05, 40);
    REQUIRE(t.samples.size() == t.monitors.size());
    REQUIRE(t.samples.size() == t.accel.size());
    for (size_t i = 1; i < t.samples.size(); ++i)
        CHECK(t.samples[i].tau > t.samples[i - 1].tau);
}

TEST_CASE("scene term wiring overrides the preset Lagrangian") {
    // keep only the metric term of an EM preset: plain free motion
    const std::string scene =
        "[target]\n"
        "preset = uniform_em\n"
        "B = 5.0\n"
        "q = 2.0\n"
        "[lagrangian]\n"
        "terms = 2:1.0\n"
        "[gauge]\n"
        "type = proper_time\n"
        "[initial]\n"
        "x0 = 0, 0, 0, 0\n"
        "v0 = 1.2, 0.3, 0, 0\n"
        "[integrate]\n"
        "step = 0.1\n"
        "n_steps = 10\n";
    CliOptions opts;
    const RunResult r = run_simulate(scene, opts);
    CHECK(r.exit_code == 0);
    // with the B = 5 coupling dropped the velocity never changes; the last
    // record still carries the initial v bit for bit
    const std::string expected = "\"v\":[1.2,0.29999999999999999,0,0]";
    const size_t last = r.payload.rfind("\"v\":[");
    REQUIRE(last != std::string::npos);
    CHECK(r.payload.substr(last, expected.size()) == expected);
}

TEST_CASE("mid-flight domain exit truncates the run: partial records, exit 2") {
    // radial plunge into the horizon guard
    const std::string scene =
        "[target]\n"
        "preset = schwarzschild\n"
        "M = 1.0\n"
        "[gauge]\n"
        "type = term_const\n"
        "order = 2\n"
        "[initial]\n"
        "x0 = 0, 10, 1.5707963267948966, 0\n"
        "v0 = 1.2809219940213806, -0.5, 0, 0\n"
        "[integrate]\n"
        "step = 0.02\n"
        "n_steps = 2000\n";
    CliOptions opts;
    const RunResult r = run_simulate(scene, opts);
    CHECK(r.exit_code == 2);
    int lines = 0;
    for (char c : r.payload)
        if (c == '\n') ++lines;
    CHECK(lines > 10);     // partial trajectory was written
    CHECK(lines < 2001);   // but it did not finish
    CHECK(r.human.find("truncated") != std::string::npos);
}

TEST_CASE("scene gauge-term coefficients are accepted and inert in the flow") {
    const std::string base =
        "[target]\n"
        "preset = uniform_em\n"
        "B = 0.3\n"
        "[gauge]\n"
        "type = proper_time\n"
        "[initial]\n"
        "x0 = 0, 0.4, 0, 0\n"
        "v0 = 1.0440306508910551, 0.3, 0, 0\n"
        "[integrate]\n"
        "step = 0.05\n"
        "n_steps = 20\n"
        "[output]\n"
        "emit_monitors = false\n";
    const std::string with_lambda =
        base + "[lagrangian]\nlambda_lin = 0.4, 0.1, 0, 0.2\nlambda_quad = 0, 0.3, 0, 0\n";
    CliOptions opts;
    const RunResult r0 = run_simulate(base, opts);
    const RunResult r1 = run_simulate(with_lambda, opts);
    CHECK(r0.exit_code == 0);
    CHECK(r1.exit_code == 0);
    CHECK(r0.payload == r1.payload);  // positions and velocities untouched
}
