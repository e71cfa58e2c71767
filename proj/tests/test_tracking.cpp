#include "nonherm/checks.hpp"
#include "nonherm/tracking.hpp"
#include "oracles.hpp"

#include <catch_amalgamated.hpp>

#include <random>

using namespace nonherm;

namespace {

struct Fixture {
    ParameterPath path;
    PhaseTrajectory t;
    std::vector<WaveState> states;
    std::vector<PopulationRecord> records;
};

Fixture run(const ParameterPath& path, std::size_t branch, std::size_t steps = 10000) {
    Fixture f{path, accumulate_phases(path, steps), {}, {}};
    f.states = propagate(path, f.t.track.node(0).frame.right[branch], steps);
    for (std::size_t k = 0; k < f.states.size(); ++k) {
        f.records.push_back(make_record(f.states[k], f.t.track.node(k), f.t.node(k), nullptr));
    }
    return f;
}

// Same run with unit-norm eigenvectors along the path.
Fixture run_unit(const ParameterPath& path, std::size_t branch, std::size_t steps = 10000) {
    Fixture f{path, {}, {}, {}};
    f.t.track = apply_gauge(build_basis_track(path, steps), normalization_gauge());
    f.t.acc = integrate_phases(f.t.track);
    f.states = propagate(path, f.t.track.node(0).frame.right[branch].normalized(), steps);
    for (std::size_t k = 0; k < f.states.size(); ++k) {
        f.records.push_back(make_record(f.states[k], f.t.track.node(k), f.t.node(k), nullptr));
    }
    return f;
}

}  // namespace

TEST_CASE("c coefficients of eigenvectors and their sum") {
    const ComplexPair p{cplx{0.7, 0.2}, cplx{0.3, -0.1}};
    const EigenFrame f = eigenframe(p, p);
    auto c = decompose_c(f.right[0], f);
    CHECK(std::abs(c[0] - 1.0) < 1e-14);
    CHECK(std::abs(c[1]) < 1e-14);
    c = decompose_c(f.right[0] + f.right[1], f);
    CHECK(std::abs(c[0] - 1.0) < 1e-14);
    CHECK(std::abs(c[1] - 1.0) < 1e-14);
}

TEST_CASE("reconstruction from c on random states matches the linear-solve oracle") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int i = 0; i < 500; ++i) {
        const ComplexPair p{cplx{u(rng), u(rng)}, cplx{u(rng), u(rng)}};
        const EigenFrame f = eigenframe(p, p);
        const Vec2 psi(cplx{u(rng), u(rng)}, cplx{u(rng), u(rng)});
        const auto c = decompose_c(psi, f);
        const auto ref = oracle::expand(psi, f.right[0], f.right[1]);
        CHECK((psi - c[0] * f.right[0] - c[1] * f.right[1]).norm() < 1e-10 * std::max(1.0, psi.norm()));
        CHECK(std::abs(c[0] - ref[0]) < 1e-9 * std::max(1.0, std::abs(ref[0])));
    }
}

TEST_CASE("d at s = 0 equals c") {
    const Fixture f = run(gaussian_pulse_path(1.0, 0.5, 0.1, 0.16, 100.0), 0, 1000);
    CHECK(std::abs(f.records.front().d[0] - 1.0) < 1e-14);
    CHECK(std::abs(f.records.front().d[1]) < 1e-14);
}

TEST_CASE("constant H: |d_a| decays with Im(E_a)") {
    const ComplexPair p{0.6, cplx{0.2, -0.05}};
    const ParameterPath path = constant_path(p, 50.0);
    const PhaseTrajectory t = accumulate_phases(path, 10000);
    const Vec2 psi0 = (t.track.node(0).frame.right[0] + t.track.node(0).frame.right[1]).normalized();
    const auto states = propagate(path, psi0, 10000);
    const auto d0 = decompose_d(psi0, t.track.node(0).frame, t.node(0));
    const auto roots = oracle::characteristic_roots(p.w, p.z);
    const EigenFrame& f = t.track.node(0).frame;
    for (std::size_t k = 0; k < states.size(); k += 500) {
        const auto d = decompose_d(states[k].psi, t.track.node(k).frame, t.node(k));
        for (std::size_t a = 0; a < 2; ++a) {
            const cplx e = std::abs(roots[0] - f.energy[a]) < std::abs(roots[1] - f.energy[a]) ? roots[0] : roots[1];
            const double expected = std::exp(e.imag() * 50.0 * states[k].s) * std::abs(d0[a]);
            CHECK(std::abs(std::abs(d[a]) - expected) < 1e-9);
        }
    }
}

TEST_CASE("overflow guard") {
    const EigenFrame f = eigenframe({1.0, 0.5}, {1.0, 0.5});
    PhaseAccumulator acc;
    acc.integral = {cplx{701.0, 0.0}, cplx{}};
    CHECK_THROWS_MATCHES(decompose_d(f.right[0], f, acc), Error,
                         Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("OVERFLOW_GUARD")));
}

TEST_CASE("false inversion on the gaussian pulse with Gamma = 0.1") {
    const Fixture f = run(gaussian_pulse_path(1.0, 0.5, 0.1, 0.16, 100.0), 0);
    double late_c = 0.0, max_d = 0.0, max_c1 = 0.0, max_c2 = 0.0;
    for (const auto& r : f.records) {
        if (r.s > 0.8) late_c = std::max(late_c, ratio(r.c[1], r.c[0]));
        max_d = std::max(max_d, ratio(r.d[1], r.d[0]));
        max_c1 = std::max(max_c1, std::abs(r.c[0]));
        max_c2 = std::max(max_c2, std::abs(r.c[1]));
    }
    CHECK(late_c > 1.0);
    CHECK(max_d < 0.1);
    CHECK(max_c1 > 1.0);
    CHECK(max_c2 > 1.0);
    // values from an independent scipy prototype of the same experiment
    CHECK(late_c == Catch::Approx(102.7).epsilon(0.01));
    CHECK(max_d == Catch::Approx(0.0194).epsilon(0.02));
    const ArtifactReport rep = false_artifact_report(f.records);
    CHECK(rep.initial_branch == 0);
    CHECK(rep.false_inversion);
    CHECK_FALSE(rep.false_adiabaticity);
}

TEST_CASE("false adiabaticity on the gaussian pulse with Gamma = 0.2") {
    const Fixture f = run(gaussian_pulse_path(1.0, 0.5, 0.2, 0.16, 100.0), 1);
    const ArtifactReport rep = false_artifact_report(f.records);
    CHECK(rep.initial_branch == 1);
    CHECK(rep.max_ratio_c12 < 0.01);
    CHECK(rep.max_ratio_c12 == Catch::Approx(0.009568).epsilon(0.01));
    CHECK(rep.final_ratio_d12 == Catch::Approx(1.10).epsilon(0.02));
    CHECK(rep.false_adiabaticity);
    // the adiabatic criterion is not small along this path
    double crit = 0.0;
    for (std::size_t k = 0; k < f.records.size(); ++k) {
        crit = std::max(crit, adiabatic_criterion(f.t.track.node(k), f.t.node(k)).crit_21);
    }
    CHECK(crit > 0.01);
}

TEST_CASE("Hermitian path raises neither artifact flag") {
    const Fixture f = run_unit(gaussian_pulse_path(1.0, 0.5, 0.0, 0.16, 100.0), 0);
    const ArtifactReport rep = false_artifact_report(f.records);
    CHECK_FALSE(rep.false_inversion);
    CHECK_FALSE(rep.false_adiabaticity);
    const Fixture g = run_unit(gaussian_pulse_path(1.0, 0.5, 0.0, 0.16, 100.0), 1);
    CHECK_FALSE(false_artifact_report(g.records).false_adiabaticity);
}

TEST_CASE("consistent populations add up to the norm") {
    const Fixture f = run(gaussian_pulse_path(1.0, 0.5, 0.1, 0.16, 100.0), 0);
    for (const auto& r : f.records) {
        const auto p = consistent_population(r);
        REQUIRE(std::abs(p[0] + p[1] - r.norm_sq) < 1e-10);
        REQUIRE(r.alpha > 0.0);
        REQUIRE(r.alpha <= 2.0);
        REQUIRE(std::abs(r.norm_sq - f.states[static_cast<std::size_t>(std::lround(r.s * 10000))].psi.squaredNorm()) < 1e-15);
    }
    CHECK(eta_population_error(f.records) < 1e-8);
    CHECK(1.0 - d_squared_sum(f.records.back().d) >= -1e-8);
}

TEST_CASE("Hermitian populations") {
    const HermitianReport h = hermitian_report(gaussian_pulse_path(1.0, 0.5, 0.0, 0.16, 100.0), 10000);
    CHECK(h.norm_deviation < 1e-8);
    CHECK(h.cd_deviation < 1e-9);
    CHECK(h.re_generator < 1e-9);
}

TEST_CASE("zero state") {
    PopulationRecord r;
    r.d = {cplx{}, cplx{}};
    CHECK_THROWS_MATCHES(consistent_population(r), Error,
                         Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("ZERO_STATE")));
}

TEST_CASE("d equals the projection on parallel-transported frames") {
    const Fixture f = run(gaussian_pulse_path(1.0, 0.5, 0.1, 0.16, 100.0), 0, 2000);
    const BasisTrack pt = parallel_transport_frames(f.t.track, f.t.acc);
    for (std::size_t k = 0; k < f.states.size(); k += 50) {
        const auto hat = decompose_c(f.states[k].psi, pt.node(k).frame);
        for (std::size_t a = 0; a < 2; ++a) {
            CHECK(std::abs(hat[a] - f.records[k].d[a]) < 1e-8 * std::max(1.0, std::abs(f.records[k].d[a])));
        }
    }
}

TEST_CASE("c-product coefficients") {
    SECTION("symmetric loop: |e| = |d|") {
        const Fixture f = run(ep_loop_path(0.5, 0.0, 100.0), 0);
        CProductNormalizer n(f.t.track.node(0).frame);
        double worst = 0.0;
        for (std::size_t k = 0; k < f.states.size(); ++k) {
            const auto e = decompose_e(f.states[k].psi, f.t.track.node(k).frame, n);
            if (k == 0) {
                CHECK(std::abs(e[0] - 1.0) < 1e-12);
                CHECK(std::abs(e[1]) < 1e-12);
            }
            for (std::size_t a = 0; a < 2; ++a) {
                worst = std::max(worst, std::abs(std::abs(e[a]) - std::abs(f.records[k].d[a])));
            }
        }
        CHECK(worst < 1e-6);
    }
    SECTION("matches expansion in the c-normalized basis up to the initial rescaling") {
        const ComplexPair p{0.8, cplx{0.3, -0.2}};
        const EigenFrame f = eigenframe(p, p);
        CProductNormalizer n(f);
        const Vec2 psi(cplx{0.3, 0.1}, cplx{-0.5, 0.4});
        const auto e = n.coefficients(psi, f);
        const Vec2 b1 = f.right[0] / std::sqrt(bilinear(f.right[0], f.right[0]));
        const Vec2 b2 = f.right[1] / std::sqrt(bilinear(f.right[1], f.right[1]));
        const auto ref = oracle::expand(psi, b1, b2);
        // e_a = (coefficient on b_a) / sigma_a(0), with sigma_a(0) = sqrt(r_a^T r_a) at the same point
        CHECK(std::abs(std::abs(e[0]) - std::abs(ref[0] / std::sqrt(bilinear(f.right[0], f.right[0])))) < 1e-12);
        CHECK(std::abs(std::abs(e[1]) - std::abs(ref[1] / std::sqrt(bilinear(f.right[1], f.right[1])))) < 1e-12);
    }
    SECTION("Hermitian symmetric case: |e| = |c|") {
        const ComplexPair p{0.8, 0.3};
        const EigenFrame f = eigenframe(p, p);
        CProductNormalizer n(f);
        const Vec2 psi = Vec2(cplx{0.3, 0.1}, cplx{-0.5, 0.4});
        const auto e = n.coefficients(psi, f);
        const auto c = decompose_c(psi, f);
        CHECK(std::abs(std::abs(e[0]) - std::abs(c[0])) < 1e-12);
        CHECK(std::abs(std::abs(e[1]) - std::abs(c[1])) < 1e-12);
    }
    SECTION("non-symmetric coupling is refused") {
        const ComplexPair p{std::polar(0.245, pi / 4), cplx{0.0, -0.125}};
        CHECK_THROWS_MATCHES(CProductNormalizer(eigenframe(p, p)), Error,
                             Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("NOT_SYMMETRIC")));
    }
    SECTION("self-orthogonal eigenvector is refused") {
        // For symmetric H, r^T r = 0 only at the EP, which frames already
        // exclude; the guard is exercised on a hand-made frame.
        EigenFrame f = eigenframe({1.0, 0.3}, {1.0, 0.3});
        f.right[0] << 1.0, I_unit;
        CHECK_THROWS_MATCHES(CProductNormalizer(f), Error,
                             Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("SELF_ORTHOGONAL")));
    }
}

TEST_CASE("adiabatic criterion") {
    SECTION("constant H gives zero") {
        const PhaseTrajectory t = accumulate_phases(constant_path({0.5, cplx{0.1, -0.05}}, 10.0), 200);
        const auto c = adiabatic_criterion(t.track.node(50), t.node(50));
        CHECK(c.crit_12 == 0.0);
        CHECK(c.crit_21 == 0.0);
    }
    SECTION("derivative and dH/ds forms agree on smooth paths") {
        for (const ParameterPath& path : {gaussian_pulse_path(1.0, 0.5, 0.1, 0.16, 100.0),
                                          ep_loop_path(0.5, pi / 4, 100.0)}) {
            const PhaseTrajectory t = accumulate_phases(path, 2000);
            for (std::size_t k = 1; k < t.track.node_count(); k += 37) {
                const auto c = adiabatic_criterion(t.track.node(k), t.node(k));
                CHECK(std::abs(c.crit_12 - c.crit_12_dh) < 1e-6 * std::max(1.0, c.crit_12));
                CHECK(std::abs(c.crit_21 - c.crit_21_dh) < 1e-6 * std::max(1.0, c.crit_21));
            }
        }
    }
    SECTION("gap collapse") {
        BasisSample b;
        b.frame.energy = {cplx{0.5}, cplx{0.5 + 1e-12}};
        CHECK_THROWS_MATCHES(adiabatic_criterion(b, PhaseAccumulator{}), Error,
                             Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("GAP_COLLAPSE")));
    }
}
