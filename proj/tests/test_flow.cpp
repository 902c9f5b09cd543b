// SPDX-License-Identifier: MIT
#include "generators.hpp"

#include "kal/flow.hpp"

#include <doctest.h>

using namespace kal;
using namespace kal::testgen;

namespace {

DiscreteImmersion jitter(DiscreteImmersion d, std::mt19937_64& rng, double amp)
{
    for (Eigen::Index i = 0; i < d.positions.size(); ++i) d.positions.data()[i] += uniform(rng, -amp, amp);
    return d;
}

FlowTrace synthetic_trace(double min_cos, double max_cos)
{
    FlowTrace t;
    FlowRow r;
    r.min_cos = min_cos;
    r.max_cos = max_cos;
    r.mean_cos = 0.5 * (min_cos + max_cos);
    t.rows.push_back(r);
    t.status = FlowStatus::Converged;
    return t;
}

}  // namespace

TEST_CASE("flat Lagrangian torus has volume (2 pi)^2")
{
    for (int grid : {8, 32}) {
        const DiscreteImmersion d = discretize(*make_immersion("torus-graph?eps=0&n=1"), grid);
        const VolumeGradient vg = volume_and_gradient(d);
        CHECK(std::abs(vg.volume - 4.0 * M_PI * M_PI) < 1e-10);
        CHECK(vg.gradient.cwiseAbs().maxCoeff() < 1e-12);
        CHECK(std::abs(class_integral(d)) < 1e-12);
    }
}

TEST_CASE("discrete volume gradient matches central differences")
{
    std::mt19937_64 rng(61);
    const DiscreteImmersion d = jitter(discretize(*make_immersion("torus-graph?eps=0.2&n=1"), 8), rng, 0.05);
    const VolumeGradient vg = volume_and_gradient(d);
    const double h = 1e-5;
    for (int trial = 0; trial < 20; ++trial) {
        const int row = static_cast<int>(rng() % d.positions.rows());
        const int col = static_cast<int>(rng() % d.positions.cols());
        DiscreteImmersion a = d, b = d;
        a.positions(row, col) += h;
        b.positions(row, col) -= h;
        const double fd = (volume_and_gradient(a).volume - volume_and_gradient(b).volume) / (2 * h);
        CHECK(std::abs(fd - vg.gradient(row, col)) < 1e-8);
    }
}

TEST_CASE("first-order volume expansion leaves an O(delta^2) remainder")
{
    std::mt19937_64 rng(62);
    const DiscreteImmersion d = discretize(*make_immersion("torus-graph?eps=0.2&n=1"), 8);
    const VolumeGradient vg = volume_and_gradient(d);
    const int col = 13;
    const Vec dir = random_matrix(rng, d.positions.rows(), 1).col(0).normalized();
    auto remainder = [&](double delta) {
        DiscreteImmersion e = d;
        e.positions.col(col) += delta * dir;
        return std::abs(volume_and_gradient(e).volume - vg.volume - delta * vg.gradient.col(col).dot(dir));
    };
    const double r1 = remainder(1e-2), r2 = remainder(5e-3);
    CHECK(r1 > 0.0);
    CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("discrete area bounds the symplectic class integral")
{
    // Wirtinger: |Pf(A^T J^T A)| <= sqrt det(A^T A) cell by cell.
    std::mt19937_64 rng(63);
    for (const std::string id : {"holo-torus", "tilted-torus", "torus-graph?eps=0.3&n=1"}) {
        for (int trial = 0; trial < 5; ++trial) {
            const DiscreteImmersion d = jitter(discretize(*make_immersion(id), 12), rng, 0.1);
            CHECK(volume_and_gradient(d).volume >= std::abs(class_integral(d)) - 1e-12);
        }
    }
    // Equality on a complex torus.
    const DiscreteImmersion holo = discretize(*make_immersion("holo-torus?eps=0"), 12);
    CHECK(volume_and_gradient(holo).volume == doctest::Approx(std::abs(class_integral(holo))).epsilon(1e-12));
}

TEST_CASE("class integral is invariant under vertex perturbations")
{
    std::mt19937_64 rng(64);
    for (const std::string id : {"holo-torus", "tilted-torus", "torus-graph?eps=0.1&n=1"}) {
        const DiscreteImmersion d = discretize(*make_immersion(id), 10);
        const double c0 = class_integral(d);
        for (int trial = 0; trial < 5; ++trial) CHECK(std::abs(class_integral(jitter(d, rng, 0.2)) - c0) < 1e-11);
    }
}

TEST_CASE("discrete volume converges under refinement")
{
    const ImmersionPtr f = make_immersion("torus-graph?eps=0.1&n=1");
    const double v16 = volume_and_gradient(discretize(*f, 16)).volume;
    const double v32 = volume_and_gradient(discretize(*f, 32)).volume;
    const double v64 = volume_and_gradient(discretize(*f, 64)).volume;
    // Second order: each halving shrinks the increment about fourfold.
    const double ratio = std::abs(v16 - v32) / std::abs(v32 - v64);
    CHECK(ratio > 3.5);
    CHECK(ratio < 4.5);
}

TEST_CASE("discretization needs a periodic chart into a flat torus")
{
    CHECK_THROWS_AS(discretize(*make_immersion("conj-curve"), 8), GeometryError);
    CHECK_THROWS_AS(discretize(*make_immersion("clifford-cp2"), 8), GeometryError);
}

TEST_CASE("flow lowers the volume monotonically and keeps the class")
{
    const DiscreteImmersion d = discretize(*make_immersion("torus-graph?eps=0.1&n=1"), 12);
    FlowParams params;
    params.max_steps = 200;
    const FlowTrace t = run_flow(d, params);
    REQUIRE(t.rows.size() > 2);
    CHECK(t.status != FlowStatus::Diverged);
    for (size_t k = 1; k < t.rows.size(); ++k) {
        CHECK(t.rows[k].volume <= t.rows[k - 1].volume);
        CHECK(std::abs(t.rows[k].class_integral - t.rows[0].class_integral) < 1e-10);
    }
    CHECK(t.rows.back().max_cos < t.rows.front().max_cos);
}

TEST_CASE("dichotomy classes from final angle statistics")
{
    CHECK(dichotomy_report(synthetic_trace(0.0, 5e-5)).limit_class == LimitClass::Lagrangian);
    CHECK(dichotomy_report(synthetic_trace(1.0 - 1e-6, 1.0)).limit_class == LimitClass::Complex);
    const DichotomyReport c = dichotomy_report(synthetic_trace(0.5, 0.5 + 1e-6));
    CHECK(c.limit_class == LimitClass::ConstantAngle);
    REQUIRE(c.angle);
    CHECK(*c.angle == doctest::Approx(std::acos(0.5 + 5e-7)));
    CHECK(dichotomy_report(synthetic_trace(0.2, 0.6)).limit_class == LimitClass::Undetermined);
    FlowTrace bad = synthetic_trace(0.0, 0.0);
    bad.status = FlowStatus::Diverged;
    CHECK(dichotomy_report(bad).limit_class == LimitClass::Undetermined);
    CHECK(dichotomy_report(bad).label == "empirical probe");
}
