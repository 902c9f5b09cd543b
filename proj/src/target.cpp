// SPDX-License-Identifier: MIT
#include "kal/target.hpp"

#include <regex>
#include <sstream>

namespace kal {

namespace {

Mat standard_j(int real_dim)
{
    Mat j = Mat::Zero(real_dim, real_dim);
    for (int a = 0; a < real_dim / 2; ++a) {
        j(2 * a + 1, 2 * a) = 1.0;   // J e_x = e_y
        j(2 * a, 2 * a + 1) = -1.0;  // J e_y = -e_x
    }
    return j;
}

template <class T>
void identity_metric(int d, T* g)
{
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) g[a * d + b] = T(a == b ? 1.0 : 0.0);
}

// Fubini–Study in the affine chart: g = (4/K) Re h with
// h(u, v) = [(1+|z|^2) <u, v> - (zbar.u)(z.vbar)] / (1+|z|^2)^2.
template <class T>
void fubini_study_metric(int m, double k, const T* p, T* g)
{
    const int d = 2 * m;
    T s(1.0);
    for (int i = 0; i < d; ++i) s = s + p[i] * p[i];
    std::vector<T> qre(d), qim(d);
    for (int a = 0; a < m; ++a) {
        const T& x = p[2 * a];
        const T& y = p[2 * a + 1];
        qre[2 * a] = x;       // zbar_a * 1
        qim[2 * a] = -y;
        qre[2 * a + 1] = y;   // zbar_a * i
        qim[2 * a + 1] = x;
    }
    T inv = 1.0 / (s * s);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) {
            T val = -(qre[r] * qre[c] + qim[r] * qim[c]);
            if (r == c) val = val + s;
            g[r * d + c] = (4.0 / k) * val * inv;
        }
}

template <class T>
MetricFn<T> flat_fn(int d)
{
    return [d](const T*, T* g) { identity_metric(d, g); };
}

template <class T>
MetricFn<T> fs_fn(int m, double k)
{
    return [m, k](const T* p, T* g) { fubini_study_metric(m, k, p, g); };
}

}  // namespace

void TargetGeometry::require_chart(const Vec& p) const
{
    if (p.size() != real_dim()) throw GeometryError("target point has wrong dimension");
    if (!in_chart(p)) {
        std::ostringstream os;
        os << "point outside chart domain of " << id << " (|p| = " << p.norm() << ", guard " << chart_radius << ")";
        throw GeometryError(os.str());
    }
}

Mat TargetGeometry::metric(const Vec& p) const
{
    const int d = real_dim();
    if (is_flat) return Mat::Identity(d, d);
    require_chart(p);
    Mat g(d, d);
    std::vector<double> out(static_cast<size_t>(d) * d);
    metric0(p.data(), out.data());
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) g(a, b) = out[a * d + b];
    return g;
}

MetricJet TargetGeometry::metric_jet(const Vec& p, int order) const
{
    const int d = real_dim();
    MetricJet jet;
    jet.g = metric(p);
    if (order >= 1) jet.dg.assign(d, Mat::Zero(d, d));
    if (order >= 2) jet.d2g.assign(static_cast<size_t>(d) * d, Mat::Zero(d, d));
    if (is_flat || order == 0) return jet;

    std::vector<D1> x1(d), g1(static_cast<size_t>(d) * d);
    if (order == 1) {
        for (int k = 0; k < d; ++k) {
            for (int i = 0; i < d; ++i) x1[i] = D1(p[i], i == k ? 1.0 : 0.0);
            metric1(x1.data(), g1.data());
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b) jet.dg[k](a, b) = g1[a * d + b].d;
        }
        return jet;
    }
    std::vector<D2> x2(d), g2(static_cast<size_t>(d) * d);
    for (int k = 0; k < d; ++k)
        for (int l = k; l < d; ++l) {
            for (int i = 0; i < d; ++i)
                x2[i] = D2(D1(p[i], i == k ? 1.0 : 0.0), D1(i == l ? 1.0 : 0.0, 0.0));
            metric2(x2.data(), g2.data());
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b) {
                    const D2& v = g2[a * d + b];
                    jet.d2g[k * d + l](a, b) = v.d.d;
                    jet.d2g[l * d + k](a, b) = v.d.d;
                    if (l == k) jet.dg[k](a, b) = v.v.d;
                }
        }
    return jet;
}

Tensor3 TargetGeometry::christoffel_from(const MetricJet& jet) const
{
    const int d = static_cast<int>(jet.g.rows());
    Tensor3 gam(d, d, d);
    if (jet.dg.empty()) return gam;
    const Mat ginv = jet.g.inverse();
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            for (int c = 0; c < d; ++c) {
                double s = 0.0;
                for (int e = 0; e < d; ++e)
                    s += ginv(a, e) * (jet.dg[b](e, c) + jet.dg[c](b, e) - jet.dg[e](b, c));
                gam(a, b, c) = 0.5 * s;
            }
    return gam;
}

Tensor3 TargetGeometry::christoffel(const Vec& p) const
{
    const int d = real_dim();
    if (is_flat) return Tensor3(d, d, d);
    return christoffel_from(metric_jet(p, 1));
}

Tensor4 curvature_from_metric_jet(const MetricJet& jet)
{
    const int d = static_cast<int>(jet.g.rows());
    Tensor4 r(d);
    if (jet.d2g.empty()) return r;
    const Mat ginv = jet.g.inverse();
    Tensor3 gam(d, d, d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            for (int c = 0; c < d; ++c) {
                double s = 0.0;
                for (int e = 0; e < d; ++e)
                    s += ginv(a, e) * (jet.dg[b](e, c) + jet.dg[c](b, e) - jet.dg[e](b, c));
                gam(a, b, c) = 0.5 * s;
            }
    auto h = [&](int k, int l, int i, int m) { return jet.d2g[static_cast<size_t>(k) * d + l](i, m); };
    // R(d_i, d_k, d_l, d_m) with R(X, Y, X, Y) the sectional curvature.
    for (int i = 0; i < d; ++i)
        for (int k = 0; k < d; ++k)
            for (int l = 0; l < d; ++l)
                for (int m = 0; m < d; ++m) {
                    double v = 0.5 * (h(k, l, i, m) + h(i, m, k, l) - h(k, m, i, l) - h(i, l, k, m));
                    for (int n = 0; n < d; ++n)
                        for (int q = 0; q < d; ++q)
                            v += jet.g(n, q) * (gam(n, k, l) * gam(q, i, m) - gam(n, k, m) * gam(q, i, l));
                    r(i, k, l, m) = v;
                }
    return r;
}

Tensor4 TargetGeometry::curvature(const Vec& p) const
{
    const int d = real_dim();
    Tensor4 r(d);
    if (model == CurvatureModel::Flat) return r;
    const Mat g = metric(p);
    const Mat w = j.transpose() * g;  // w(a, b) = g(J d_a, d_b)
    const double c = -holomorphic_curvature / 4.0;
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            for (int e = 0; e < d; ++e)
                for (int f = 0; f < d; ++f)
                    r(a, b, e, f) = c * (g(b, e) * g(a, f) - g(a, e) * g(b, f) + w(b, e) * w(a, f) -
                                         w(a, e) * w(b, f) - 2.0 * w(a, b) * w(e, f));
    return r;
}

Tensor4 TargetGeometry::curvature_from_jets(const Vec& p) const
{
    if (is_flat) return Tensor4(real_dim());
    return curvature_from_metric_jet(metric_jet(p, 2));
}

Mat ricci_contraction(const Tensor4& r, const Mat& ginv)
{
    const int d = r.d;
    Mat out = Mat::Zero(d, d);
    for (int u = 0; u < d; ++u)
        for (int v = 0; v < d; ++v) {
            double s = 0.0;
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) s += ginv(i, j) * r(i, u, j, v);
            out(u, v) = s;
        }
    return out;
}

Mat TargetGeometry::ricci(const Vec& p) const
{
    const int d = real_dim();
    if (model == CurvatureModel::Flat) return Mat::Zero(d, d);
    return ricci_contraction(curvature(p), metric(p).inverse());
}

TargetPtr make_flat_kahler(int m, std::optional<Mat> lattice)
{
    if (m < 1) throw std::invalid_argument("complex dimension must be >= 1");
    auto t = std::make_shared<TargetGeometry>();
    const int d = 2 * m;
    t->complex_dim = m;
    t->j = standard_j(d);
    t->model = CurvatureModel::Flat;
    t->holomorphic_curvature = 0.0;
    t->einstein_constant = 0.0;
    t->is_flat = true;
    if (lattice) {
        if (lattice->rows() != d || lattice->cols() != d)
            throw std::invalid_argument("lattice must be 2m x 2m");
        Eigen::FullPivLU<Mat> lu(*lattice);
        if (lu.rank() < d) throw std::invalid_argument("degenerate lattice (rank < 2m)");
        t->lattice = lattice;
        t->id = "torus-c" + std::to_string(m);
    } else {
        t->id = "flat-c" + std::to_string(m);
    }
    t->metric0 = flat_fn<double>(d);
    t->metric1 = flat_fn<D1>(d);
    t->metric2 = flat_fn<D2>(d);
    return t;
}

TargetPtr make_fubini_study(int m, double k)
{
    if (m < 1) throw std::invalid_argument("complex dimension must be >= 1");
    if (!(k > 0.0)) throw std::invalid_argument("holomorphic sectional curvature must be positive");
    auto t = std::make_shared<TargetGeometry>();
    const int d = 2 * m;
    t->complex_dim = m;
    t->j = standard_j(d);
    t->model = CurvatureModel::ConstantHolomorphic;
    t->holomorphic_curvature = k;
    t->einstein_constant = (m + 1) * k / 2.0;
    t->is_flat = false;
    t->chart_radius = 0.9;
    std::ostringstream os;
    os << "cp" << m << "-K" << k;
    t->id = os.str();
    t->metric0 = fs_fn<double>(m, k);
    t->metric1 = fs_fn<D1>(m, k);
    t->metric2 = fs_fn<D2>(m, k);
    return t;
}

std::pair<TargetPtr, HyperKahlerTriple> make_hyperkahler_flat(int real_dim)
{
    if (real_dim != 4 && real_dim != 8) throw std::invalid_argument("hyper-Kähler flat model needs real dimension 4 or 8");
    // Left multiplication by i, j, k on one quaternion slot with basis (1, i, j, k).
    Mat li = Mat::Zero(4, 4), lj = Mat::Zero(4, 4);
    li(1, 0) = 1; li(0, 1) = -1; li(3, 2) = 1; li(2, 3) = -1;
    lj(2, 0) = 1; lj(3, 1) = -1; lj(0, 2) = -1; lj(1, 3) = 1;
    HyperKahlerTriple tr;
    const int slots = real_dim / 4;
    tr.i = Mat::Zero(real_dim, real_dim);
    tr.j = Mat::Zero(real_dim, real_dim);
    for (int s = 0; s < slots; ++s) {
        tr.i.block(4 * s, 4 * s, 4, 4) = li;
        tr.j.block(4 * s, 4 * s, 4, 4) = lj;
    }
    tr.k = tr.i * tr.j;
    auto base = make_flat_kahler(real_dim / 2);
    auto t = std::make_shared<TargetGeometry>(*base);
    t->j = tr.i;
    t->id = "hk-r" + std::to_string(real_dim);
    return {t, tr};
}

Mat j_from_sphere(const HyperKahlerTriple& triple, const SpherePoint& s)
{
    Eigen::Vector3d u = s.unit_vector();
    return u[0] * triple.i + u[1] * triple.j + u[2] * triple.k;
}

TargetPtr with_complex_structure(const TargetGeometry& t, const Mat& j, const std::string& id)
{
    if (!t.is_flat) throw std::invalid_argument("complex structure swap is only supported on flat targets");
    auto out = std::make_shared<TargetGeometry>(t);
    out->j = j;
    out->id = id;
    return out;
}

TargetPtr make_target(const std::string& id)
{
    std::smatch m;
    static const std::regex flat(R"(flat-c(\d+))"), torus(R"(torus-c(\d+))"), cp(R"(cp(\d+)-K([0-9.eE+-]+))");
    if (std::regex_match(id, m, flat)) return make_flat_kahler(std::stoi(m[1]));
    if (std::regex_match(id, m, torus)) {
        int mm = std::stoi(m[1]);
        return make_flat_kahler(mm, Mat(2.0 * M_PI * Mat::Identity(2 * mm, 2 * mm)));
    }
    if (std::regex_match(id, m, cp)) return make_fubini_study(std::stoi(m[1]), std::stod(m[2]));
    if (id == "hk-r4") return make_hyperkahler_flat(4).first;
    if (id == "hk-r8") return make_hyperkahler_flat(8).first;
    throw std::invalid_argument("unknown target id: " + id);
}

std::vector<std::string> target_catalog() { return {"flat-c{m}", "torus-c{m}", "cp{m}-K{value}", "hk-r4", "hk-r8"}; }

namespace {
double l1(const Mat& m) { return m.cwiseAbs().sum(); }
}  // namespace

IdentityReport target_audit(const TargetGeometry& t, const std::vector<Vec>& points, double tol)
{
    IdentityReport rep;
    rep.check_id = "target-audit";
    rep.example = t.id;
    rep.points = points;
    rep.tolerance = tol;
    const int d = t.real_dim();
    double r_jsq = 0, r_metric = 0, r_nabla_j = 0, r_einstein = 0, r_bianchi = 0, r_curv = 0, r_jet = 0;
    for (const Vec& p : points) {
        t.require_chart(p);
        const Mat g = t.metric(p);
        r_jsq = std::max(r_jsq, l1(t.j * t.j + Mat::Identity(d, d)));
        r_metric = std::max(r_metric, l1(t.j.transpose() * g * t.j - g));

        const Tensor3 gam = t.christoffel(p);
        double nj = 0.0;
        for (int k = 0; k < d; ++k)
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b) {
                    double s = 0.0;
                    for (int c = 0; c < d; ++c) s += gam(a, k, c) * t.j(c, b) - gam(c, k, b) * t.j(a, c);
                    nj += std::abs(s);
                }
        r_nabla_j = std::max(r_nabla_j, nj);

        const Tensor4 r = t.curvature(p);
        if (t.einstein_constant) {
            const Mat ric = ricci_contraction(r, g.inverse());
            r_einstein = std::max(r_einstein, l1(ric - *t.einstein_constant * g));
        }
        double bi = 0.0;
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b)
                for (int c = 0; c < d; ++c)
                    for (int e = 0; e < d; ++e) bi += std::abs(r(a, b, c, e) + r(b, c, a, e) + r(c, a, b, e));
        r_bianchi = std::max(r_bianchi, bi);

        if (!t.is_flat) {
            const Tensor4 rj = t.curvature_from_jets(p);
            double cd = 0.0;
            for (size_t i = 0; i < r.a.size(); ++i) cd = std::max(cd, std::abs(r.a[i] - rj.a[i]));
            r_curv = std::max(r_curv, cd);
            // Analytic first derivatives of g against order-4 central differences.
            const MetricJet jet = t.metric_jet(p, 1);
            FdParams fd;
            auto fdg = fd_partials<Mat>([&](const Vec& q) { return t.metric(q); }, p, fd);
            for (int k = 0; k < d; ++k) r_jet = std::max(r_jet, max_abs(jet.dg[k] - fdg[k]));
        }
    }
    rep.components = {{"j_squared", r_jsq}, {"metric_compatibility", r_metric}, {"nabla_j", r_nabla_j},
                      {"einstein", r_einstein}, {"bianchi", r_bianchi}, {"curvature_closed_vs_jets", r_curv},
                      {"metric_jet_vs_fd", r_jet}};
    double worst = 0.0;
    for (auto& [k, v] : rep.components) worst = std::max(worst, v);
    rep.lhs = worst;
    rep.rhs = 0.0;
    rep.residual_abs = worst;
    rep.finish();
    return rep;
}

}  // namespace kal
