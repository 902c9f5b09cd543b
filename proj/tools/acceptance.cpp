// SPDX-License-Identifier: MIT
// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.
#include "kal/angles.hpp"
#include "kal/cli.hpp"
#include "kal/flow.hpp"
#include "kal/identities.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace kal;

namespace {

// Pinned tolerances and budgets.
constexpr double kTiltedCosTol = 1e-12;
constexpr double kConjCosTol = 1e-10;
constexpr double kKappaDetTol = 1e-9;
constexpr double kDetPathRelTol = 1e-7;
constexpr double kWolfsonTol = 1e-5;
constexpr double kCancellationTol = 1e-4;
constexpr double kDistinctGap = 1e-2;   // keeps the stencil clear of angle crossings
constexpr double kWeitzenbockTol = 1e-5;
constexpr double kSTermTol = 1e-6;
constexpr double kRicciTol = 1e-6;
constexpr double kHkCosTol = 1e-10;
constexpr double kAnticommuteTol = 1e-12;
constexpr double kCodiffTol = 1e-7;
constexpr double kFlowVolumeRelTol = 1e-6;
constexpr double kFlowCosTol = 1e-4;
constexpr double kFlowDriftTol = 1e-6;   // per 1000 steps
constexpr int kFlowGrid = 32;
constexpr int kFlowSteps = 3000;

struct Outcome {
    bool pass = true;
    std::string detail;
};

struct Criterion {
    int number;
    std::string name;
    double budget_s;
    std::function<Outcome()> run;
};

std::string sci(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", x);
    return buf;
}

std::string id_with(const std::string& base, const std::string& key, double v)
{
    std::ostringstream os;
    os.precision(17);
    os << base << (base.find('?') == std::string::npos ? "?" : "&") << key << "=" << v;
    return os.str();
}

Outcome angle_extraction()
{
    const ImmersionPtr tilted = make_immersion(id_with("tilted-plane?n=1", "alpha", M_PI / 3.0));
    const double c1 = angle_data(*tilted, Vec::Zero(2)).cos_spectrum[0];
    Vec p(2);
    p << 0.3, 0.0;
    const double c2 = angle_data(*make_immersion("conj-curve?k=2"), p).cos_spectrum[0];
    // (1 - 4r^2) / (1 + 4r^2) at r = 0.3
    const double e1 = std::abs(c1 - 0.5), e2 = std::abs(c2 - 8.0 / 17.0);
    return {e1 < kTiltedCosTol && e2 < kConjCosTol, "tilted err " + sci(e1) + ", conj err " + sci(e2)};
}

Outcome kappa_determinant()
{
    std::mt19937_64 rng(2);
    const std::vector<std::string> ids = {"conj-curve?k=2", "conj-curve?k=3", "product-conj", "clifford-cp2?K=4",
                                          "torus-graph?eps=0.2&n=2", "rotated-holomorphic?n=2&seed=11",
                                          "tilted-plane?alpha=0.8&n=3", "tilted-torus"};
    int used = 0;
    double worst = 0.0;
    for (int k = 0; used < 25 && k < 1000; ++k) {
        const ImmersionPtr f = make_immersion(ids[k % ids.size()]);
        const AngleData ad = angle_data(*f, f->sampler(rng));
        if (!ad.kappa_finite()) continue;
        worst = std::max(worst, std::abs(ad.kappa - ad.kappa_det));
        ++used;
    }
    return {used == 25 && worst < kKappaDetTol, std::to_string(used) + " points, max err " + sci(worst)};
}

Outcome det_path()
{
    std::mt19937_64 rng(3);
    auto u = [&](double lo, double hi) { return lo + (hi - lo) * uniform01(rng); };
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const int m = 4, r = 3;
        CMat d = CMat::Zero(m, m);
        for (int j = 0; j < m; ++j) d(j, j) = cplx(u(0.5, 1.5), u(-0.5, 0.5));
        std::vector<CMat> b(r), c(r);
        for (int a = 0; a < r; ++a) {
            b[a] = CMat(m, m);
            c[a] = CMat(m, m);
            for (int i = 0; i < m * m; ++i) {
                b[a].data()[i] = cplx(u(-1, 1), u(-1, 1));
                c[a].data()[i] = cplx(u(-0.5, 0.5), u(-0.5, 0.5));
            }
        }
        MatrixPath path;
        path.evaluator = [=](const Vec& x) {
            CMat out = d;
            for (int a = 0; a < r; ++a) out += std::sin(x[a]) * b[a] + (x[a] * x[(a + 1) % r]) * c[a];
            return out;
        };
        path.base_point = Vec::Zero(r);
        Vec z(r), w(r);
        for (int a = 0; a < r; ++a) {
            z[a] = u(-1, 1);
            w[a] = u(-1, 1);
        }
        const DetDerivatives dd = det_path_derivatives(path, z, w);
        // Scalar oracle: fourth-order central differences of det along the directions.
        const double h = 1e-3;
        const double wt[4] = {-1, 8, -8, 1}, off[4] = {2, 1, -1, -2};
        auto det = [&](const Vec& x) { return path.evaluator(x).determinant(); };
        cplx first = 0.0, second = 0.0;
        for (int i = 0; i < 4; ++i) {
            first += wt[i] * det(off[i] * h * z);
            for (int j = 0; j < 4; ++j) second += wt[i] * wt[j] * det(off[i] * h * z + off[j] * h * w);
        }
        first /= 12.0 * h;
        second /= 144.0 * h * h;
        worst = std::max({worst, std::abs(dd.first - first) / std::abs(first),
                          std::abs(dd.second - second) / std::abs(second)});
    }
    return {worst < kDetPathRelTol, "20 paths, max rel err " + sci(worst)};
}

ImmersionChart chart_with_fd(const std::string& id, double h, int order)
{
    ImmersionChart f = *make_immersion(id);
    f.fd.step = h;
    f.fd.order = order;
    return f;
}

Outcome wolfson()
{
    const ImmersionChart f = chart_with_fd("conj-curve?k=2", 1e-3, 4);
    std::mt19937_64 rng(4);
    double worst = 0.0;
    bool all = f.mode == JetMode::Analytic;
    for (int k = 0; k < 10; ++k) {
        const IdentityReport r = run_check("delta-kappa-wolfson", f, f.sampler(rng));
        all = all && r.verdict == Verdict::Pass;
        worst = std::max(worst, std::abs(r.lhs));
    }
    return {all && worst < kWolfsonTol, "10 points, max |lap kappa| " + sci(worst)};
}

Outcome frame_expression_cancellation()
{
    const ImmersionPtr f = make_immersion("product-conj");
    std::mt19937_64 rng(5);
    double worst_rhs = 0.0, worst_lhs = 0.0;
    int used = 0;
    bool all = true;
    for (int k = 0; used < 5 && k < 200; ++k) {
        const Vec p = f->sampler(rng);
        const std::vector<double> c = angle_data(*f, p).cos_spectrum;
        if (c[0] - c[1] < kDistinctGap) continue;
        const IdentityReport r = run_check("delta-kappa-general", *f, p);
        all = all && r.verdict == Verdict::Pass;
        worst_rhs = std::max(worst_rhs, std::abs(r.rhs));
        worst_lhs = std::max(worst_lhs, std::abs(r.lhs));
        ++used;
    }
    return {used == 5 && all && worst_rhs < kCancellationTol,
            "5 points, max |rhs| " + sci(worst_rhs) + ", max |lhs| " + sci(worst_lhs)};
}

Outcome weitzenbock()
{
    std::mt19937_64 rng(6);
    const ImmersionPtr conj = make_immersion("conj-curve?k=2");
    const ImmersionPtr prod = make_immersion("product-conj");
    double w = 0.0, s = 0.0;
    bool all = true;
    for (int k = 0; k < 5; ++k) {
        const IdentityReport a = run_check("weitzenbock", *conj, conj->sampler(rng));
        const IdentityReport b = run_check("s-term-equality", *prod, prod->sampler(rng));
        all = all && a.verdict != Verdict::Skipped && b.verdict != Verdict::Skipped;
        w = std::max(w, a.residual_abs);
        s = std::max(s, b.residual_abs);
    }
    return {all && w < kWeitzenbockTol && s < kSTermTol, "balance " + sci(w) + ", curvature term " + sci(s)};
}

Outcome ricci()
{
    const ImmersionPtr f = make_immersion("clifford-cp2?K=4");
    std::mt19937_64 rng(7);
    double worst = 0.0;
    bool all = f->target->einstein_constant && *f->target->einstein_constant == 6.0;
    for (int k = 0; k < 5; ++k) {
        const IdentityReport r = run_check("ricci-reconstruction", *f, f->sampler(rng));
        all = all && r.verdict != Verdict::Skipped;
        worst = std::max(worst, r.residual_abs);
    }
    return {all && worst < kRicciTol, "5 points, max residual " + sci(worst)};
}

Outcome hyperkahler()
{
    std::mt19937_64 rng(8);
    auto u = [&](double lo, double hi) { return lo + (hi - lo) * uniform01(rng); };
    double cos_err = 0.0, orth_worst = 0.0, skew_best = 1e300;
    for (int k = 0; k < 10; ++k) {
        const double nu = u(0.05, M_PI - 0.05), phi = u(0.0, 2.0 * M_PI);
        const ImmersionPtr f = make_immersion(id_with(id_with("hk-complex-plane", "nu", nu), "phi", phi));
        for (double c : angle_data(*f, Vec::Zero(f->domain_dim)).cos_spectrum)
            cos_err = std::max(cos_err, std::abs(c - std::abs(std::cos(nu))));
    }
    const auto [t, hk] = make_hyperkahler_flat(4);
    for (int k = 0; k < 10; ++k) {
        const SpherePoint a{u(0, M_PI), u(0, 2 * M_PI)};
        const Eigen::Vector3d va = a.unit_vector();
        // A second axis orthogonal to the first, and one that is not.
        Eigen::Vector3d vb = va.unitOrthogonal();
        const double rot = u(0, 2 * M_PI);
        vb = std::cos(rot) * vb + std::sin(rot) * va.cross(vb);
        const Eigen::Vector3d vc = (vb + u(0.1, 1.0) * va).normalized();
        auto j_of = [&](const Eigen::Vector3d& v) { return Mat(v[0] * hk.i + v[1] * hk.j + v[2] * hk.k); };
        const Mat ja = j_from_sphere(hk, a), jb = j_of(vb), jc = j_of(vc);
        orth_worst = std::max(orth_worst, max_abs(ja * jb + jb * ja));
        skew_best = std::min(skew_best, max_abs(ja * jc + jc * ja));
    }
    const bool pass = cos_err < kHkCosTol && orth_worst < kAnticommuteTol && skew_best > kAnticommuteTol;
    return {pass, "cos err " + sci(cos_err) + ", orthogonal anticommutator " + sci(orth_worst) +
                      ", non-orthogonal min " + sci(skew_best)};
}

Outcome codifferential_table()
{
    std::mt19937_64 rng(9);
    double n1 = 0.0, n2 = 0.0, n3 = 0.0, jo2 = 0.0;
    bool ok = true;
    const ImmersionPtr curve = make_immersion("conj-curve?k=2");
    // Equal but non-constant angles, so delta J_omega stays away from zero.
    const ImmersionPtr equal4 = make_immersion("inversion-graph");
    const ImmersionPtr plane3 = make_immersion("tilted-plane?alpha=0.9&n=3");
    for (int k = 0; k < 5; ++k) {
        const AngleFieldDerivatives a = angle_field_derivatives(*curve, curve->sampler(rng));
        ok = ok && a.codiff_jomega.size() == 2;
        if (a.codiff_jomega.size()) n1 = std::max(n1, a.codiff_jomega.norm());
        const AngleFieldDerivatives b = angle_field_derivatives(*equal4, equal4->sampler(rng));
        n2 = std::max(n2, b.codiff_pullback.norm());
        jo2 = std::max(jo2, b.codiff_jomega.norm());
        // Constant angle, n = 3: both sides of the equivalence vanish.
        const AngleFieldDerivatives c = angle_field_derivatives(*plane3, plane3->sampler(rng));
        double g = 0.0;
        for (const Vec& v : c.grad_cos) g = std::max(g, v.norm());
        n3 = std::max({n3, c.codiff_pullback.norm(), g});
    }
    return {ok && n1 < kCodiffTol && n2 < kCodiffTol && n3 < kCodiffTol && jo2 > 1e-2,
            "n=1 " + sci(n1) + ", n=2 " + sci(n2) + " (delta J_omega " + sci(jo2) + "), n=3 constant " + sci(n3)};
}

Outcome flow_probe()
{
    const DiscreteImmersion d = discretize(*make_immersion("torus-graph?eps=0.1&n=1"), kFlowGrid);
    FlowParams params;
    params.max_steps = kFlowSteps;
    const FlowTrace t = run_flow(d, params);
    bool monotone = true;
    double drift = 0.0;
    const size_t window = 1000;
    for (size_t k = 1; k < t.rows.size(); ++k) {
        monotone = monotone && t.rows[k].volume <= t.rows[k - 1].volume;
        const size_t j = k > window ? k - window : 0;
        drift = std::max(drift, std::abs(t.rows[k].class_integral - t.rows[j].class_integral));
    }
    const double flat = 4.0 * M_PI * M_PI;
    const double rel = std::abs(t.rows.back().volume - flat) / flat;
    const double cmax = t.rows.back().max_cos;
    const bool pass = t.status != FlowStatus::Diverged && monotone && rel < kFlowVolumeRelTol && cmax < kFlowCosTol &&
                      drift < kFlowDriftTol;
    return {pass, std::string(flow_status_name(t.status)) + " after " + std::to_string(t.rows.back().step) +
                      " steps, monotone " + (monotone ? "yes" : "no") + ", volume rel " + sci(rel) + ", max cos " +
                      sci(cmax) + ", class drift " + sci(drift)};
}

Outcome determinism()
{
    const char* argv[] = {"kahlerlab", "verify", "--checks", "*", "--example", "conj-curve?k=2", "--points", "3"};
    std::ostringstream a, b, ea, eb;
    const int ca = run_cli(8, argv, a, ea), cb = run_cli(8, argv, b, eb);
    const bool same = ca == cb && a.str() == b.str() && !a.str().empty();
    return {same, std::to_string(a.str().size()) + " bytes, exit " + std::to_string(ca)};
}

}  // namespace

int main()
{
    const std::vector<Criterion> criteria = {
        {1, "angle extraction", 1, angle_extraction},
        {2, "kappa determinant form", 5, kappa_determinant},
        {3, "det path derivatives", 5, det_path},
        {4, "Wolfson Laplacian", 10, wolfson},
        {5, "general Laplacian cancellation", 60, frame_expression_cancellation},
        {6, "Weitzenbock balance", 30, weitzenbock},
        {7, "Ricci reconstruction", 10, ricci},
        {8, "hyper-Kahler probe", 5, hyperkahler},
        {9, "codifferential table", 60, codifferential_table},
        {10, "flow probe", 120, flow_probe},
        {11, "determinism", 60, determinism},
    };
    int failed = 0;
    for (const Criterion& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_budget = secs < c.budget_s;
        const bool pass = o.pass && in_budget;
        failed += !pass;
        std::printf("%s criterion %2d  %-32s %s  [%.2fs / %.0fs]\n", pass ? "PASS" : "FAIL", c.number, c.name.c_str(),
                    o.detail.c_str(), secs, c.budget_s);
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed ? 1 : 0;
}
