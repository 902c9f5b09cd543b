// SPDX-License-Identifier: MIT
#include "generators.hpp"

#include "kal/identities.hpp"

#include <doctest.h>

#include <set>

using namespace kal;
using namespace kal::testgen;

namespace {

// Constant sectional curvature c: R(X,Y,Z,W) = c (g(X,Z) g(Y,W) - g(X,W) g(Y,Z)).
Tensor4 space_form(const Mat& g, double c)
{
    const int d = static_cast<int>(g.rows());
    Tensor4 r(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l) r(i, j, k, l) = c * (g(i, k) * g(j, l) - g(i, l) * g(j, k));
    return r;
}

IdentityReport run_with_step(const std::string& check, const std::string& example, const Vec& p, double h, int order)
{
    ImmersionChart f = *make_immersion(example);
    f.fd.step = h;
    f.fd.order = order;
    return run_check(check, f, p);
}

Vec point_on(const std::string& example, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    return make_immersion(example)->sampler(rng);
}

}  // namespace

TEST_CASE("registry ids are unique and every check is documented")
{
    std::set<std::string> ids;
    for (const CheckSpec& s : check_registry()) {
        CHECK(ids.insert(s.id).second);
        CHECK(!s.statement.empty());
        CHECK(!s.lhs_route.empty());
        CHECK(!s.rhs_route.empty());
        CHECK(s.tolerance > 0.0);
        CHECK(s.term_count >= 1);
    }
    CHECK_THROWS_AS(find_check("no-such-check"), std::invalid_argument);
}

TEST_CASE("glob matching")
{
    CHECK(glob_match("*", "anything"));
    CHECK(glob_match("delta-kappa-*", "delta-kappa-equal"));
    CHECK(glob_match("s-term-?quality", "s-term-equality"));
    CHECK_FALSE(glob_match("delta-kappa-*", "cos2-chain"));
    CHECK_FALSE(glob_match("?", ""));
    CHECK(glob_match("*a*b*", "xxaxxbxx"));
    CHECK_FALSE(glob_match("*a*b", "xxaxxbxx"));
    CHECK(match_checks("delta-kappa-*").size() == 4);
    CHECK(match_checks("*").size() == check_registry().size());
    CHECK(match_checks("zzz*").empty());
    // Registry order is preserved.
    const auto all = match_checks("*");
    for (size_t i = 0; i < all.size(); ++i) CHECK(all[i] == check_registry()[i].id);
}

TEST_CASE("curvature term on a space form is 4(n-1)c |P|^2")
{
    std::mt19937_64 rng(51);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 1 + trial % 3;
        const int d = 2 * n;
        const Mat g = random_spd(rng, d);
        const double c = uniform(rng, -2.0, 2.0);
        const Mat b = random_matrix(rng, d, d);
        const Mat form = b - b.transpose();
        const double lhs = curvature_term(space_form(g, c), form, g);
        const double rhs = 4.0 * (n - 1) * c * form_norm2(form, g.inverse());
        CHECK(std::abs(lhs - rhs) < 1e-10 * (1.0 + std::abs(rhs)));
    }
}

TEST_CASE("evaluated term counts match the registry")
{
    // Checksum: every non-skipped report must have evaluated as many summands as the identity has.
    const std::vector<std::pair<std::string, std::string>> runs = {
        {"conj-curve?k=2", "*"}, {"product-conj", "*"}, {"clifford-cp2?K=4", "ricci-reconstruction"},
        {"hk-complex-plane", "*"}, {"tilted-plane?alpha=1&n=2", "*"}};
    for (const auto& [example, pattern] : runs) {
        const ImmersionPtr f = make_immersion(example);
        std::mt19937_64 rng(52);
        const Vec p = f->sampler(rng);
        for (const std::string& id : match_checks(pattern)) {
            const CheckSpec& s = find_check(id);
            if (s.group == CheckGroup::Quadrature) continue;
            const IdentityReport r = run_check(id, *f, p);
            if (r.verdict == Verdict::Skipped) continue;
            CAPTURE(example);
            CAPTURE(id);
            REQUIRE(r.oracle.count("terms_evaluated") == 1);
            CHECK(r.oracle.at("terms_evaluated") == s.term_count);
        }
    }
}

TEST_CASE("every pointwise check passes or skips with a reason on the catalog")
{
    const std::vector<std::string> examples = {"conj-curve?k=3", "product-conj", "clifford-cp2?K=4",
                                               "tilted-plane?alpha=1&n=2", "hk-complex-plane",
                                               "lagrangian-graph?f=mixed&eps=0.2&n=1", "inversion-graph"};
    for (const std::string& example : examples) {
        const ImmersionPtr f = make_immersion(example);
        std::mt19937_64 rng(53);
        const Vec p = f->sampler(rng);
        for (const CheckSpec& s : check_registry()) {
            if (s.group == CheckGroup::Quadrature) continue;
            const IdentityReport r = run_check(s.id, *f, p);
            CAPTURE(example);
            CAPTURE(s.id);
            CAPTURE(r.reason);
            CHECK(r.verdict != Verdict::Fail);
            if (r.verdict == Verdict::Skipped) CHECK(!r.reason.empty());
            if (r.verdict == Verdict::Pass) CHECK(r.residual_abs <= r.tolerance);
        }
    }
}

TEST_CASE("gated checks skip outside their hypotheses")
{
    const Vec p = Vec::Zero(2);
    const IdentityReport complex = run_check("delta-kappa-general", *make_immersion("tilted-plane?alpha=0"), p);
    CHECK(complex.verdict == Verdict::Skipped);
    CHECK(complex.reason.find("complex") != std::string::npos);
    // A non-minimal surface fails the minimality gate of the Wolfson check.
    const ImmersionPtr bumpy = make_immersion("torus-graph?eps=0.3&n=1");
    const IdentityReport nonmin = run_check("delta-kappa-wolfson", *bumpy, Vec::Constant(2, 0.4));
    CHECK(nonmin.verdict == Verdict::Skipped);
    CHECK(!nonmin.reason.empty());
}

TEST_CASE("shape operators anticommute with the pullback operator at constant angle")
{
    for (const std::string id : {"hk-complex-plane", "tilted-plane?alpha=0.7&n=2", "tilted-torus?eps=0"}) {
        const ImmersionPtr f = make_immersion(id);
        std::mt19937_64 rng(54);
        const Vec p = f->sampler(rng);
        const PointGeometry pg = first_fundamental(*f, p);
        const SecondFundamental sf = second_fundamental(*f, pg);
        const AngleData ad = angle_data(*f, p);
        const Mat& a = ad.pullback_operator.a;
        Eigen::SelfAdjointEigenSolver<Mat> es(pg.normal_projector.transpose() * pg.g_n * pg.normal_projector);
        for (int k = 0; k < es.eigenvalues().size(); ++k) {
            if (es.eigenvalues()[k] < 0.5) continue;
            const Mat s = shape_operator(sf, pg, es.eigenvectors().col(k));
            CAPTURE(id);
            CHECK(max_abs(a * s + s * a) < 1e-8);
        }
    }
}

TEST_CASE("frame connection and triple symmetry at constant angle")
{
    for (const std::string id : {"tilted-plane?alpha=0.7&n=2", "tilted-plane?alpha=1.1&n=3"}) {
        const ImmersionPtr f = make_immersion(id);
        std::mt19937_64 rng(55);
        const Vec p = f->sampler(rng);
        const FrameCalculus fc = frame_calculus(*f, p);
        const int n = fc.n;
        double conn = 0.0, asym = 0.0;
        for (int b = 0; b < n; ++b)
            for (int m = 0; m < n; ++m)
                for (int c = 0; c < n; ++c) conn = std::max(conn, std::abs(fc.conn(FrameCalculus::bar(b, n), m, c)));
        const int idx[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
        for (int a = 0; a < 2 * n; ++a)
            for (int b = 0; b < 2 * n; ++b)
                for (int c = 0; c < 2 * n; ++c) {
                    const bool same = (a < n) == (b < n) && (b < n) == (c < n);
                    if (same) continue;
                    const int t[3] = {a, b, c};
                    for (const auto& perm : idx)
                        asym = std::max(asym, std::abs(fc.g3(a, b, c) - fc.g3(t[perm[0]], t[perm[1]], t[perm[2]])));
                }
        CHECK(conn < 1e-7);
        CHECK(asym < 1e-7);
    }
}

TEST_CASE("halving the step shrinks finite-difference residuals")
{
    // At steps where truncation dominates rounding, a fourth order stencil gains at least 4x per halving.
    const std::string conj = "conj-curve?k=3";
    const Vec p = point_on(conj, 56);
    const IdentityReport a = run_with_step("delta-kappa-wolfson", conj, p, 4e-2, 4);
    const IdentityReport b = run_with_step("delta-kappa-wolfson", conj, p, 2e-2, 4);
    CHECK(a.residual_abs > 0.0);
    CHECK(a.residual_abs >= 4.0 * b.residual_abs);
    const IdentityReport c = run_with_step("weitzenbock", conj, p, 4e-2, 4);
    const IdentityReport d = run_with_step("weitzenbock", conj, p, 2e-2, 4);
    CHECK(c.residual_abs >= 4.0 * d.residual_abs);
}

TEST_CASE("general Laplacian of kappa on a rotated holomorphic fourfold")
{
    // Generic angles and every line of the frame expression contributes.
    const std::string id = "rotated-holomorphic?n=2&seed=11";
    const ImmersionPtr f = make_immersion(id);
    std::mt19937_64 rng(57);
    int passed = 0;
    for (int k = 0; k < 3; ++k) {
        const IdentityReport r = run_check("delta-kappa-general", *f, f->sampler(rng));
        CAPTURE(r.reason);
        CHECK(r.verdict == Verdict::Pass);
        passed += r.verdict == Verdict::Pass;
        CHECK(std::abs(r.lhs) > 1e-3);
    }
    CHECK(passed == 3);
}

TEST_CASE("quadrature identities on constant-angle planes")
{
    CheckOptions opt;
    opt.grid = 16;
    const Vec p;
    const IdentityReport n2 = run_check("integral-n2", *make_immersion("tilted-plane?alpha=1&n=2"), p, opt);
    CHECK(n2.verdict == Verdict::Pass);
    const IdentityReport wrong_n = run_check("integral-n2", *make_immersion("conj-curve"), p, opt);
    CHECK(wrong_n.verdict == Verdict::Skipped);
    CHECK(quadrature_points_per_dim(64, 2) == 64);
    CHECK(quadrature_points_per_dim(64, 4) < 64);
}

TEST_CASE("codifferential of the pullback form vanishes for n = 2 with equal angles")
{
    const ImmersionPtr f = make_immersion("inversion-graph");
    std::mt19937_64 rng(58);
    for (int k = 0; k < 4; ++k) {
        const IdentityReport r = run_check("codifferential", *f, f->sampler(rng));
        CHECK(r.verdict == Verdict::Pass);
        CHECK(r.components.at("codiff_pullback_norm") < 1e-7);
        // J_omega is not coclosed since the angle varies.
        CHECK(r.components.at("codiff_jomega_norm") > 1e-2);
    }
}
