#include "nonherm/model.hpp"
#include "nonherm/spectral.hpp"
#include "oracles.hpp"

#include <catch_amalgamated.hpp>

#include <random>

using namespace nonherm;
using Catch::Approx;

TEST_CASE("hamiltonian_at layout") {
    CHECK(hamiltonian_at({0.0, 0.0}).norm() == 0.0);
    const Mat2 h = hamiltonian_at({1.0, cplx{0.5, -0.025}});
    CHECK(h(0, 0) == cplx{0.0});
    CHECK(h(0, 1) == cplx{1.0});
    CHECK(h(1, 0) == cplx{1.0});
    CHECK(std::abs(h(1, 1) - cplx{1.0, -0.05}) < 1e-15);
}

TEST_CASE("ep loop Hamiltonian has H22 = 2 Delta - i Gamma/2") {
    const ParameterPath path = ep_loop_path(0.5, 0.3, 100.0);
    for (double s : {0.0, 0.1, 0.37, 0.8}) {
        const ComplexPair p = path.at(s);
        const Mat2 h = hamiltonian_at(p);
        CHECK(std::abs(h(1, 1) - cplx{2.0 * p.z.real(), -0.25}) < 1e-15);
        CHECK(std::abs(h(0, 1) - std::conj(h(1, 0))) < 1e-15);
    }
}

TEST_CASE("eigenvalues agree with characteristic polynomial roots") {
    const cplx w = 1.0, z{0.5, -0.025};
    const auto roots = oracle::characteristic_roots(w, z);
    const EigenFrame f = eigenframe({w, z}, {w, z});
    for (const cplx& e : f.energy) {
        const double d = std::min(std::abs(e - roots[0]), std::abs(e - roots[1]));
        CHECK(d < 1e-14);
    }
}

TEST_CASE("complex symmetric iff Im(w) = 0, Hermitian for real w and z") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int i = 0; i < 500; ++i) {
        const bool real_w = i % 2 == 0;
        const ComplexPair p{cplx{u(rng), real_w ? 0.0 : u(rng)}, cplx{u(rng), u(rng)}};
        const Mat2 h = hamiltonian_at(p);
        const bool symmetric = (h - h.transpose()).norm() == 0.0;
        CHECK(symmetric == real_w);
        const ComplexPair q{cplx{u(rng), 0.0}, cplx{u(rng), 0.0}};
        const Mat2 hq = hamiltonian_at(q);
        CHECK((hq - hq.adjoint()).norm() == 0.0);
    }
}

TEST_CASE("gaussian pulse endpoints") {
    const ParameterPath path = gaussian_pulse_path(1.0, 0.5, 0.1, 0.16, 100.0);
    CHECK(path.at(0.0).w == cplx{1.0});
    CHECK(std::abs(path.at(0.0).z - cplx{0.5, -0.025}) < 1e-16);
    CHECK(std::abs(path.at(1.0).w) == Approx(std::exp(-1.0 / (2.0 * 0.16 * 0.16))).epsilon(1e-12));
    CHECK(std::abs(path.at(1.0).w) == Approx(3.2937e-9).epsilon(1e-4));
    CHECK(path.at(1.0).z.real() == Approx(0.5 * std::cos(0.4 * pi)));
    CHECK_FALSE(path.closed);
    CHECK(path.duration_T == 100.0);
}

TEST_CASE("gaussian pulse with infinite width is constant") {
    const ParameterPath path = gaussian_pulse_path(0.7, 0.5, 0.1, std::numeric_limits<double>::infinity(), 10.0);
    for (double s : {0.0, 0.3, 1.0}) {
        CHECK(path.at(s).w == cplx{0.7});
        CHECK(path.derivative_at(s).w == cplx{0.0});
    }
}

TEST_CASE("path derivatives match finite differences") {
    for (const ParameterPath& path : {gaussian_pulse_path(1.0, 0.5, 0.1, 0.16, 100.0),
                                      ep_loop_path(0.5, pi / 4, 100.0)}) {
        for (double s : {0.1, 0.45, 0.9}) {
            const double h = 1e-6;
            const cplx dw = (path.at(s + h).w - path.at(s - h).w) / (2 * h);
            const cplx dz = (path.at(s + h).z - path.at(s - h).z) / (2 * h);
            CHECK(std::abs(dw - path.derivative_at(s).w) < 1e-7);
            CHECK(std::abs(dz - path.derivative_at(s).z) < 1e-7);
        }
    }
}

TEST_CASE("ep loop start point and closure") {
    const ParameterPath path = ep_loop_path(0.5, 0.0, 100.0);
    CHECK(std::abs(path.at(0.0).w - cplx{0.245}) < 1e-15);
    CHECK(std::abs(path.at(0.0).z - cplx{0.0, -0.125}) < 1e-15);
    CHECK(path.closed);
    CHECK(std::abs(path.at(1.0).w - path.at(0.0).w) < closure_tolerance);
    CHECK(std::abs(path.at(1.0).z - path.at(0.0).z) < closure_tolerance);
    const ParameterPath rotated = ep_loop_path(0.5, pi / 4, 100.0);
    for (double s : {0.0, 0.2, 0.6}) {
        CHECK(std::abs(rotated.at(s).w - path.at(s).w * std::polar(1.0, pi / 4)) < 1e-15);
        CHECK(rotated.at(s).z == path.at(s).z);
    }
}

TEST_CASE("ep loop encloses exactly the exceptional point at +Gamma/4") {
    const ParameterPath path = ep_loop_path(0.5, 0.0, 100.0);
    auto curve = [&](double s) -> std::array<double, 2> {
        const ComplexPair p = path.at(s);
        return {std::abs(p.w), p.z.real()};
    };
    CHECK(oracle::winding_number(curve, 0.125, 0.0) != 0);
    CHECK(std::abs(oracle::winding_number(curve, 0.125, 0.0)) == 1);
    CHECK(oracle::winding_number(curve, -0.125, 0.0) == 0);
    double lo = 1e9, hi = -1e9;
    for (int k = 0; k <= 10000; ++k) {
        const double om = std::abs(path.at(k / 10000.0).w);
        lo = std::min(lo, om);
        hi = std::max(hi, om);
    }
    CHECK(lo == Approx(0.005).margin(1e-9));
    CHECK(hi == Approx(0.245).margin(1e-9));
}

TEST_CASE("path validation") {
    CHECK_THROWS_AS(gaussian_pulse_path(1.0, 0.5, 0.1, -1.0, 100.0), Error);
    CHECK_THROWS_AS(gaussian_pulse_path(1.0, 0.5, 0.1, 0.16, 0.0), Error);
    CHECK_THROWS_AS(ep_loop_path(0.0, 0.0, 100.0), Error);
}

TEST_CASE("tabulated path interpolates and detects closure") {
    std::vector<TableRow> rows{{0.0, 1.0, {0.5, -0.1}}, {0.5, 2.0, {0.0, -0.1}}, {1.0, 1.0, {0.5, -0.1}}};
    const ParameterPath path = tabulated_path(rows, 10.0);
    CHECK(path.closed);
    CHECK(std::abs(path.at(0.25).w - cplx{1.5}) < 1e-15);
    CHECK(std::abs(path.derivative_at(0.25).w - cplx{2.0}) < 1e-15);
    CHECK(std::abs(path.derivative_at(0.5).w) < 1e-15);  // averaged slope at the apex
    rows.back().w = 3.0;
    CHECK_FALSE(tabulated_path(rows, 10.0).closed);
    std::vector<TableRow> bad{{0.0, 1.0, 0.0}, {0.0, 1.0, 0.0}, {1.0, 1.0, 0.0}};
    CHECK_THROWS_AS(tabulated_path(bad, 1.0), Error);
}
