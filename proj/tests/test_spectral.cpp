#include "nonherm/spectral.hpp"
#include "oracles.hpp"

#include <catch_amalgamated.hpp>

#include <random>

using namespace nonherm;

namespace {

double residual(const EigenFrame& f, std::size_t a) {
    const Mat2 h = hamiltonian_at(f.p);
    return (h * f.right[a] - f.energy[a] * f.right[a]).norm() / (h.norm() * f.right[a].norm());
}

}  // namespace

TEST_CASE("sheet_sqrt follows sqrt(z^2) = z") {
    CHECK(sheet_sqrt(0.0, cplx{0.3, -0.1}) == cplx{0.3, -0.1});
    CHECK(sheet_sqrt(0.0, cplx{-0.3, 0.1}) == cplx{-0.3, 0.1});  // not the principal root
    CHECK(sheet_sqrt(cplx{0.0, 2.0}, 0.0) == cplx{2.0});
    const cplx w = 1.0, z{0.5, -0.025};
    const cplx v = sheet_sqrt(w, z);
    CHECK(std::abs(v * v - (1.0 + z * z)) < 1e-15);
    CHECK(std::abs(v - oracle::continued_root(w, z)) < 1e-12);
}

TEST_CASE("sheet_sqrt matches continuation from w = 0 on random points") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    int compared = 0;
    for (int i = 0; i < 2000; ++i) {
        const cplx w{u(rng), u(rng)}, z{u(rng), u(rng)};
        // the continuation is unambiguous when tau^2 |w|^2 + z^2 avoids zero
        bool clear = true;
        for (int k = 0; k <= 200 && clear; ++k) {
            const double t = k / 200.0;
            clear = std::abs(t * t * std::norm(w) + z * z) > 0.05;
        }
        if (!clear) continue;
        ++compared;
        CHECK(std::abs(sheet_sqrt(w, z) - oracle::continued_root(w, z)) < 1e-9);
    }
    CHECK(compared > 500);
}

TEST_CASE("exceptional points are rejected") {
    for (double g : {0.1, 0.5, 2.0}) {
        CHECK_THROWS_MATCHES(sheet_sqrt(0.25 * g, cplx{0.0, -0.25 * g}), Error,
                             Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("EP_DEGENERATE")));
    }
    const ComplexPair near{0.125, cplx{0.0, -0.125 + 1e-9}};
    CHECK_THROWS_AS(eigenframe(near, {0.2, 0.1}), Error);
}

TEST_CASE("eigenframe at s = 0 of the gaussian pulse") {
    const ComplexPair p{1.0, cplx{0.5, -0.025}};
    const EigenFrame f = eigenframe(p, p);
    for (std::size_t a = 0; a < 2; ++a) {
        CHECK(residual(f, a) < 1e-12);
        CHECK(std::abs(f.right[a].norm() - 1.0) < 1e-12);
    }
    CHECK((f.energy[1] - f.energy[0]).imag() <= 0.0);
}

TEST_CASE("eigenframe for w = 1, z = 0") {
    const EigenFrame f = eigenframe({1.0, 0.0}, {1.0, 0.0});
    CHECK(std::abs(f.v - 1.0) < 1e-15);
    CHECK(std::abs(f.energy[0] + 1.0) < 1e-15);
    CHECK(std::abs(f.energy[1] - 1.0) < 1e-15);
    const Vec2 r1 = Vec2(1.0, -1.0) / std::sqrt(2.0);
    const Vec2 r2 = Vec2(-1.0, -1.0) / std::sqrt(2.0);
    CHECK((f.right[0] - r1).norm() < 1e-15);
    CHECK((f.right[1] - r2).norm() < 1e-15);
}

TEST_CASE("small coupling limit") {
    const double z = 0.4;
    const EigenFrame f = eigenframe({1e-9, z}, {1.0, z});
    CHECK(std::abs(f.energy[0]) < 1e-15);
    CHECK(std::abs(f.energy[1] - 2.0 * z) < 1e-15);
    CHECK(std::abs(f.right[0](1)) / std::abs(f.right[0](0)) < 1e-8);
    CHECK(std::abs(f.v_minus_z - 1e-18 / (2 * z)) < 1e-25);  // no cancellation
}

TEST_CASE("frame invariants over random parameters") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    int tested = 0;
    for (int i = 0; i < 10000; ++i) {
        const ComplexPair p{cplx{u(rng), u(rng)}, cplx{u(rng), u(rng)}};
        if (std::abs(std::norm(p.w) + p.z * p.z) < 1e-6) continue;
        const EigenFrame f = eigenframe(p, p);
        ++tested;
        Mat2 completeness = Mat2::Zero();
        for (std::size_t a = 0; a < 2; ++a) {
            REQUIRE(residual(f, a) < 1e-12);
            for (std::size_t b = 0; b < 2; ++b) {
                REQUIRE(std::abs(inner(f.left[a], f.right[b]) - (a == b ? 1.0 : 0.0)) < 1e-10);
            }
            completeness += f.right[a] * f.left[a].adjoint();
        }
        REQUIRE((completeness - Mat2::Identity()).norm() < 1e-10);
    }
    CHECK(tested > 9990);
}

TEST_CASE("symmetric case: left vectors are conjugates of right vectors up to scale") {
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int i = 0; i < 200; ++i) {
        const ComplexPair p{u(rng), cplx{u(rng), u(rng)}};
        const EigenFrame f = eigenframe(p, p);
        for (std::size_t a = 0; a < 2; ++a) {
            const Vec2 rc = f.right[a].conjugate();
            const cplx k = inner(rc, f.left[a]) / rc.squaredNorm();
            CHECK((f.left[a] - k * rc).norm() < 1e-10 * f.left[a].norm());
        }
    }
}

TEST_CASE("gamma stays frozen at the initial point") {
    const ParameterPath path = gaussian_pulse_path(1.0, 0.5, 0.1, 0.16, 100.0);
    const auto frames = frames_along(path, uniform_grid(1000));
    CHECK(frames.front().gamma == frames.back().gamma);
    CHECK(std::abs(frames.front().right[0].norm() - 1.0) < 1e-12);
    CHECK(std::abs(frames.back().right[0].norm() - 1.0) > 0.1);
}

TEST_CASE("constant path needs no relabeling") {
    const ComplexPair p{0.7, cplx{0.2, -0.1}};
    std::vector<EigenFrame> frames;
    for (int k = 0; k <= 20; ++k) frames.push_back(eigenframe(p, p, k / 20.0));
    const auto tracked = track_branches(frames);
    CHECK(tracked.swaps.empty());
    CHECK(tracked.frames.back().v == frames.back().v);
}

TEST_CASE("tracker repairs an injected label swap") {
    const ComplexPair p{0.3, cplx{1.0, -0.05}};
    std::vector<EigenFrame> frames;
    for (int k = 0; k <= 10; ++k) frames.push_back(eigenframe(p, p, k / 10.0));
    const Normalization norm = frames.front().normalization();
    frames[6] = frame_for_branch(0.6, p, -frames[6].v, norm);  // labels exchanged
    const auto tracked = track_branches(frames);
    REQUIRE(tracked.swaps.size() == 1);
    CHECK(tracked.swaps.front() == 6);
    CHECK(std::abs(tracked.frames[6].energy[0] - frames[5].energy[0]) < 1e-14);
}

TEST_CASE("tracker refuses ambiguous matches") {
    // E = (-1, 1) followed by E ~ (0.005i, 1.995i): both assignments cost the
    // same and the eigenvector overlaps do not separate them either.
    BranchTracker tracker(eigenframe({1.0, 0.0}, {1.0, 0.0}));
    CHECK_THROWS_MATCHES(tracker.advance(0.5, {0.1, cplx{0.0, 1.0}}), Error,
                         Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("AMBIGUOUS_BRANCH")));
}

TEST_CASE("ep loop exchanges the branches after one traversal") {
    const ParameterPath path = ep_loop_path(0.5, 0.0, 100.0);
    const auto frames = frames_along(path, uniform_grid(10000));
    const EigenFrame& first = frames.front();
    const EigenFrame& last = frames.back();
    CHECK(std::abs(last.v + first.v) < 1e-9);
    const double overlap = std::abs(inner(first.right[1], last.right[0])) /
                           (first.right[1].norm() * last.right[0].norm());
    CHECK(overlap > 0.999999);
    // continuity along the way
    double max_jump = 0.0;
    for (std::size_t k = 1; k < frames.size(); ++k) max_jump = std::max(max_jump, std::abs(frames[k].v - frames[k - 1].v));
    CHECK(max_jump < 1e-3);
}

TEST_CASE("ep_distance") {
    CHECK(ep_distance({0.125, 0.0}, 0.5) == 0.0);
    CHECK(ep_distance({0.0, 0.0}, 0.5) == Catch::Approx(0.125));
    const ParameterPath path = ep_loop_path(0.5, 0.0, 100.0);
    double scan = 1e9;
    for (int k = 0; k <= 100000; ++k) scan = std::min(scan, ep_distance(path.at(k / 100000.0), 0.5));
    CHECK(scan == Catch::Approx(0.12).epsilon(1e-6));  // circle of radius 0.24 Gamma
}
