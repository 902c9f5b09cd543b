// SPDX-License-Identifier: MIT
#include "kal/immersion.hpp"

#include <cmath>
#include <sstream>

namespace kal {

Vec ImmersionChart::eval(const Vec& p) const
{
    if (p.size() != domain_dim) throw GeometryError("domain point has wrong dimension for " + id);
    Vec y(target->real_dim());
    f0(p.data(), y.data());
    target->require_chart(y);
    return y;
}

namespace {

void require_immersion(const ImmersionChart& f, const Mat& dF, const Vec& p)
{
    Eigen::JacobiSVD<Mat> svd(dF);
    const auto& s = svd.singularValues();
    if (s.size() < f.domain_dim || s[s.size() - 1] <= 1e-9 * (1.0 + s[0])) {
        std::ostringstream os;
        os << "immersion-violation: dF is rank deficient for " << f.id << " at (" << p.transpose() << ")";
        throw GeometryError(os.str());
    }
}

Jets analytic_jets(const ImmersionChart& f, const Vec& p, int order)
{
    const int d = f.domain_dim;
    const int t = f.target->real_dim();
    Jets j;
    j.order = order;
    j.value = f.eval(p);
    j.first = Mat::Zero(t, d);
    if (order >= 2) j.second = Tensor3(t, d, d);
    if (order >= 3) j.third.assign(static_cast<size_t>(t) * d * d * d, 0.0);

    if (order <= 1) {
        std::vector<D1> x(d), y(t);
        for (int k = 0; k < d && order >= 1; ++k) {
            for (int i = 0; i < d; ++i) x[i] = D1(p[i], i == k ? 1.0 : 0.0);
            f.f1(x.data(), y.data());
            for (int a = 0; a < t; ++a) j.first(a, k) = y[a].d;
        }
        return j;
    }
    if (order == 2) {
        std::vector<D2> x(d), y(t);
        for (int k = 0; k < d; ++k)
            for (int l = k; l < d; ++l) {
                for (int i = 0; i < d; ++i) x[i] = D2(D1(p[i], i == k ? 1.0 : 0.0), D1(i == l ? 1.0 : 0.0, 0.0));
                f.f2(x.data(), y.data());
                for (int a = 0; a < t; ++a) {
                    j.second(a, k, l) = j.second(a, l, k) = y[a].d.d;
                    if (k == l) j.first(a, k) = y[a].v.d;
                }
            }
        return j;
    }
    std::vector<D3> x(d), y(t);
    for (int k = 0; k < d; ++k)
        for (int l = k; l < d; ++l)
            for (int m = l; m < d; ++m) {
                for (int i = 0; i < d; ++i) {
                    D2 lower(D1(p[i], i == k ? 1.0 : 0.0), D1(i == l ? 1.0 : 0.0, 0.0));
                    D2 upper(D1(i == m ? 1.0 : 0.0, 0.0), D1(0.0, 0.0));
                    x[i] = D3(lower, upper);
                }
                f.f3(x.data(), y.data());
                for (int a = 0; a < t; ++a) {
                    const double v3 = y[a].d.d.d;
                    const int idx[3] = {k, l, m};
                    // all permutations of (k, l, m)
                    static const int perm[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
                    for (const auto& pr : perm)
                        j.third[((static_cast<size_t>(a) * d + idx[pr[0]]) * d + idx[pr[1]]) * d + idx[pr[2]]] = v3;
                    if (m == l) j.second(a, k, l) = j.second(a, l, k) = y[a].v.d.d;
                    if (m == l && l == k) j.first(a, k) = y[a].v.v.d;
                }
            }
    return j;
}

Jets fd_jets(const ImmersionChart& f, const Vec& p, int order)
{
    const int d = f.domain_dim;
    const int t = f.target->real_dim();
    Jets j;
    j.order = order;
    j.value = f.eval(p);
    j.first = Mat::Zero(t, d);
    auto val = [&](const Vec& q) {
        Vec y(t);
        f.f0(q.data(), y.data());
        return y;
    };
    if (order >= 1) {
        auto parts = fd_partials<Vec>(val, p, f.fd);
        for (int k = 0; k < d; ++k) j.first.col(k) = parts[k];
    }
    if (order >= 2) {
        j.second = Tensor3(t, d, d);
        auto h = fd_hessian<Vec>(val, p, f.fd);
        for (int k = 0; k < d; ++k)
            for (int l = 0; l < d; ++l)
                for (int a = 0; a < t; ++a) j.second(a, k, l) = h[static_cast<size_t>(k) * d + l][a];
    }
    if (order >= 3) {
        // Outer difference of the Hessian field; a tenfold outer step keeps roundoff
        // of the nested quotient below the truncation error.
        j.third.assign(static_cast<size_t>(t) * d * d * d, 0.0);
        FdParams outer = f.fd;
        outer.step *= 10.0;
        auto hess_flat = [&](const Vec& q) {
            auto h = fd_hessian<Vec>(val, q, f.fd);
            Vec out(static_cast<Eigen::Index>(t) * d * d);
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l) out.segment((static_cast<Eigen::Index>(k) * d + l) * t, t) = h[k * d + l];
            return out;
        };
        auto dh = fd_partials<Vec>(hess_flat, p, outer);
        for (int m = 0; m < d; ++m)
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l)
                    for (int a = 0; a < t; ++a)
                        j.third[((static_cast<size_t>(a) * d + k) * d + l) * d + m] =
                            dh[m][(static_cast<Eigen::Index>(k) * d + l) * t + a];
        // Symmetrize over the three slots.
        std::vector<double> sym(j.third.size());
        for (int a = 0; a < t; ++a)
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l)
                    for (int m = 0; m < d; ++m) {
                        auto at = [&](int x, int y, int z) { return j.third_at(a, x, y, z, d); };
                        sym[((static_cast<size_t>(a) * d + k) * d + l) * d + m] =
                            (at(k, l, m) + at(k, m, l) + at(l, k, m) + at(l, m, k) + at(m, k, l) + at(m, l, k)) / 6.0;
                    }
        j.third.swap(sym);
    }
    return j;
}

}  // namespace

Jets evaluate_jets(const ImmersionChart& f, const Vec& p, int order)
{
    if (order < 0 || order > 3) throw std::invalid_argument("jet order must be 0..3");
    Jets j = f.mode == JetMode::Analytic ? analytic_jets(f, p, order) : fd_jets(f, p, order);
    if (order >= 1) require_immersion(f, j.first, p);
    return j;
}

Mat induced_metric(const ImmersionChart& f, const Vec& p)
{
    const Jets j = evaluate_jets(f, p, 1);
    return j.first.transpose() * f.target->metric(j.value) * j.first;
}

Tensor3 domain_christoffel(const ImmersionChart& f, const Vec& p, const FdParams& fd)
{
    const int d = f.domain_dim;
    const auto dg = fd_partials<Mat>([&](const Vec& q) { return induced_metric(f, q); }, p, fd);
    const Mat ginv = induced_metric(f, p).inverse();
    Tensor3 gam(d, d, d);
    for (int k = 0; k < d; ++k)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                double s = 0.0;
                for (int l = 0; l < d; ++l) s += ginv(k, l) * (dg[i](l, j) + dg[j](i, l) - dg[l](i, j));
                gam(k, i, j) = 0.5 * s;
            }
    return gam;
}

PointGeometry first_fundamental(const ImmersionChart& f, const Vec& p)
{
    const Jets j = evaluate_jets(f, p, 1);
    PointGeometry pg;
    pg.p = p;
    pg.fp = j.value;
    pg.dF = j.first;
    pg.g_n = f.target->metric(j.value);
    pg.g_m = MetricTensor(j.first.transpose() * pg.g_n * j.first);
    const int t = f.target->real_dim();
    pg.normal_projector = Mat::Identity(t, t) - pg.dF * pg.g_m.inverse() * pg.dF.transpose() * pg.g_n;
    FdParams fd = f.fd;
    pg.domain_christoffel = domain_christoffel(f, p, fd);
    pg.target_christoffel = f.target->christoffel(j.value);
    return pg;
}

SecondFundamental second_fundamental(const ImmersionChart& f, const PointGeometry& pg)
{
    const int d = f.domain_dim;
    const int t = f.target->real_dim();
    const Jets j = evaluate_jets(f, pg.p, 2);
    SecondFundamental sf;
    sf.nabla_dF.assign(static_cast<size_t>(d) * d, Vec::Zero(t));
    for (int a = 0; a < d; ++a)
        for (int b = a; b < d; ++b) {
            Vec v(t);
            for (int c = 0; c < t; ++c) {
                double s = j.second(c, a, b);
                for (int e = 0; e < t; ++e)
                    for (int h = 0; h < t; ++h) s += pg.target_christoffel(c, e, h) * pg.dF(e, a) * pg.dF(h, b);
                v[c] = s;
            }
            for (int k = 0; k < d; ++k) v -= pg.domain_christoffel(k, a, b) * pg.dF.col(k);
            v = pg.normal_projector * v;
            sf.nabla_dF[static_cast<size_t>(a) * d + b] = v;
            sf.nabla_dF[static_cast<size_t>(b) * d + a] = v;
        }
    sf.mean_curvature = Vec::Zero(t);
    const Mat& gi = pg.g_m.inverse();
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) sf.mean_curvature += gi(a, b) * sf.at(a, b, d);
    sf.mean_curvature /= static_cast<double>(d);
    return sf;
}

Mat shape_operator(const SecondFundamental& sf, const PointGeometry& pg, const Vec& u)
{
    const double scale = 1.0 + u.norm();
    if ((pg.normal_projector * u - u).norm() > 1e-8 * scale) throw GeometryError("shape operator needs a normal vector");
    const int d = pg.g_m.dim();
    Mat s(d, d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) s(a, b) = sf.at(a, b, d).dot(pg.g_n * u);
    return pg.g_m.inverse() * s;
}

Tensor4 pullback_curvature(const Tensor4& rn, const Mat& dF)
{
    const int t = rn.d;
    const int d = static_cast<int>(dF.cols());
    // Contract one slot at a time: cost O(t^4 d + ... ) instead of O(t^4 d^4).
    std::vector<double> s1(static_cast<size_t>(d) * t * t * t, 0.0);
    for (int i = 0; i < d; ++i)
        for (int a = 0; a < t; ++a) {
            const double w = dF(a, i);
            if (w == 0.0) continue;
            for (int b = 0; b < t; ++b)
                for (int c = 0; c < t; ++c)
                    for (int e = 0; e < t; ++e) s1[((static_cast<size_t>(i) * t + b) * t + c) * t + e] += w * rn(a, b, c, e);
        }
    std::vector<double> s2(static_cast<size_t>(d) * d * t * t, 0.0);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int b = 0; b < t; ++b) {
                const double w = dF(b, j);
                if (w == 0.0) continue;
                for (int c = 0; c < t; ++c)
                    for (int e = 0; e < t; ++e)
                        s2[((static_cast<size_t>(i) * d + j) * t + c) * t + e] += w * s1[((static_cast<size_t>(i) * t + b) * t + c) * t + e];
            }
    Tensor4 out(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l) {
                    double s = 0.0;
                    for (int c = 0; c < t; ++c)
                        for (int e = 0; e < t; ++e)
                            s += dF(c, k) * dF(e, l) * s2[((static_cast<size_t>(i) * d + j) * t + c) * t + e];
                    out(i, j, k, l) = s;
                }
    return out;
}

Tensor4 gauss_curvature(const Tensor4& rn_pullback, const SecondFundamental& sf, const Mat& g_n, int d)
{
    Tensor4 out = rn_pullback;
    auto ip = [&](int a, int b, int c, int e) { return sf.at(a, b, d).dot(g_n * sf.at(c, e, d)); };
    for (int x = 0; x < d; ++x)
        for (int y = 0; y < d; ++y)
            for (int z = 0; z < d; ++z)
                for (int w = 0; w < d; ++w) out(x, y, z, w) += -ip(x, w, y, z) + ip(x, z, y, w);
    return out;
}

CurvatureData domain_curvature(const ImmersionChart& f, const Vec& p)
{
    const PointGeometry pg = first_fundamental(f, p);
    const SecondFundamental sf = second_fundamental(f, pg);
    const int d = f.domain_dim;
    FdParams fd = f.fd;
    MetricJet jet;
    jet.g = pg.g_m.components();
    auto gfield = [&](const Vec& q) { return induced_metric(f, q); };
    jet.dg = fd_partials<Mat>(gfield, p, fd);
    jet.d2g = fd_hessian<Mat>(gfield, p, fd);
    CurvatureData cd;
    cd.rm_fd = curvature_from_metric_jet(jet);
    const Tensor4 rn = f.target->curvature(pg.fp);
    cd.rn_pullback = pullback_curvature(rn, pg.dF);
    cd.rm_gauss = gauss_curvature(cd.rn_pullback, sf, pg.g_n, d);
    cd.ricci_n = f.target->ricci(pg.fp);
    return cd;
}

// ---------------------------------------------------------------------------
// Catalog

namespace {

struct ParsedId {
    std::string name;
    std::map<std::string, std::string> kv;
};

ParsedId parse_id(const std::string& id)
{
    ParsedId out;
    const auto q = id.find('?');
    out.name = id.substr(0, q);
    if (q == std::string::npos) return out;
    std::stringstream ss(id.substr(q + 1));
    std::string item;
    while (std::getline(ss, item, '&')) {
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("malformed parameter '" + item + "' in " + id);
        out.kv[item.substr(0, eq)] = item.substr(eq + 1);
    }
    return out;
}

double get_num(ParsedId& pid, const std::string& key, double def)
{
    auto it = pid.kv.find(key);
    if (it == pid.kv.end() || it->second.empty()) return def;
    size_t pos = 0;
    double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("bad numeric value for " + key + ": " + it->second);
    pid.kv.erase(it);
    return v;
}

std::string get_str(ParsedId& pid, const std::string& key, const std::string& def)
{
    auto it = pid.kv.find(key);
    if (it == pid.kv.end() || it->second.empty()) return def;
    std::string v = it->second;
    pid.kv.erase(it);
    return v;
}

void reject_leftovers(const ParsedId& pid)
{
    if (!pid.kv.empty()) throw std::invalid_argument("unknown parameter '" + pid.kv.begin()->first + "' for " + pid.name);
}

int get_int(ParsedId& pid, const std::string& key, int def, int lo, int hi)
{
    double v = get_num(pid, key, def);
    if (v != std::floor(v) || v < lo || v > hi)
        throw std::invalid_argument(key + " must be an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return static_cast<int>(v);
}

// Registers f at all four scalar levels from one generic lambda.
template <class G>
void set_maps(ImmersionChart& c, G g)
{
    c.f0 = [g](const double* x, double* y) { g(x, y); };
    c.f1 = [g](const D1* x, D1* y) { g(x, y); };
    c.f2 = [g](const D2* x, D2* y) { g(x, y); };
    c.f3 = [g](const D3* x, D3* y) { g(x, y); };
}

Vec box_sample(std::mt19937_64& rng, int d, double lo, double hi)
{
    Vec p(d);
    for (int i = 0; i < d; ++i) p[i] = lo + (hi - lo) * uniform01(rng);
    return p;
}

// Linear or lattice-periodic charts: translations from a unit-period shift.
Periodicity make_periodicity(const ImmersionChart& c, double period, bool lattice_units)
{
    const int d = c.domain_dim;
    const int t = c.target->real_dim();
    Periodicity per;
    per.periods = Vec::Constant(d, period);
    per.translations = Mat(t, d);
    Vec zero = Vec::Zero(d);
    Vec f0(t), f1(t);
    c.f0(zero.data(), f0.data());
    for (int k = 0; k < d; ++k) {
        Vec q = zero;
        q[k] = period;
        c.f0(q.data(), f1.data());
        per.translations.col(k) = f1 - f0;
    }
    if (lattice_units && c.target->lattice) {
        Mat w = c.target->lattice->fullPivLu().solve(per.translations);
        per.winding = w.array().round().cast<int>().matrix();
        if (max_abs(w - per.winding.cast<double>()) > 1e-9)
            throw GeometryError("declared periods are not lattice translations for " + c.id);
    }
    return per;
}

template <class T>
Cx<T> cpow(const Cx<T>& z, int k)
{
    Cx<T> r{T(1.0), T(0.0)};
    for (int i = 0; i < k; ++i) r = r * z;
    return r;
}

// Annulus sample; radii stay away from the Lagrangian circle of z -> conj(z)^k.
Vec annulus_sample(std::mt19937_64& rng, double rmin, double rmax)
{
    const double r = rmin + (rmax - rmin) * uniform01(rng);
    const double a = 2.0 * M_PI * uniform01(rng);
    Vec p(2);
    p << r * std::cos(a), r * std::sin(a);
    return p;
}

double lagrangian_radius(int k) { return std::pow(static_cast<double>(k), -1.0 / (k - 1)); }

ImmersionPtr make_tilted_plane(ParsedId pid)
{
    const double alpha = get_num(pid, "alpha", M_PI / 3.0);
    const int n = get_int(pid, "n", 1, 1, 4);
    reject_leftovers(pid);
    auto c = std::make_shared<ImmersionChart>();
    std::ostringstream os;
    os.precision(17);
    os << "tilted-plane?alpha=" << alpha << "&n=" << n;
    c->id = os.str();
    c->domain_dim = 2 * n;
    c->target = make_flat_kahler(2 * n);
    c->params = {{"alpha", alpha}, {"n", n}};
    const double ca = std::cos(alpha), sa = std::sin(alpha);
    // X_a -> Re z_a;  Y_a -> cos(alpha) Im z_a + sin(alpha) Re z_{n+a}
    set_maps(*c, [n, ca, sa](const auto* x, auto* y) {
        using T = std::decay_t<decltype(x[0])>;
        for (int b = 0; b < 4 * n; ++b) y[b] = T(0.0);
        for (int a = 0; a < n; ++a) {
            y[2 * a] = x[2 * a];
            y[2 * a + 1] = ca * x[2 * a + 1];
            y[2 * (n + a)] = sa * x[2 * a + 1];
        }
    });
    c->sampler = [n](std::mt19937_64& rng) { return box_sample(rng, 2 * n, -1.0, 1.0); };
    c->periodic = make_periodicity(*c, 2.0 * M_PI, false);
    return c;
}

ImmersionPtr make_conj_curve(ParsedId pid)
{
    const int k = get_int(pid, "k", 2, 2, 6);
    reject_leftovers(pid);
    auto c = std::make_shared<ImmersionChart>();
    c->id = "conj-curve?k=" + std::to_string(k);
    c->domain_dim = 2;
    c->target = make_flat_kahler(2);
    c->params = {{"k", k}};
    set_maps(*c, [k](const auto* x, auto* y) {
        using T = std::decay_t<decltype(x[0])>;
        Cx<T> zb{x[0], -x[1]};
        Cx<T> w = cpow(zb, k);
        y[0] = x[0];
        y[1] = x[1];
        y[2] = w.re;
        y[3] = w.im;
    });
    const double rl = lagrangian_radius(k);
    c->sampler = [rl](std::mt19937_64& rng) { return annulus_sample(rng, 0.3 * rl, 0.84 * rl); };
    return c;
}

ImmersionPtr make_product_conj(ParsedId pid)
{
    reject_leftovers(pid);
    auto c = std::make_shared<ImmersionChart>();
    c->id = "product-conj";
    c->domain_dim = 4;
    c->target = make_flat_kahler(4);
    set_maps(*c, [](const auto* x, auto* y) {
        using T = std::decay_t<decltype(x[0])>;
        for (int f = 0; f < 2; ++f) {
            const T& u = x[2 * f];
            const T& v = x[2 * f + 1];
            y[4 * f] = u;
            y[4 * f + 1] = v;
            y[4 * f + 2] = u * u - v * v;    // Re conj(z)^2
            y[4 * f + 3] = -2.0 * u * v;     // Im conj(z)^2
        }
    });
    c->sampler = [](std::mt19937_64& rng) {
        Vec a = annulus_sample(rng, 0.15, 0.42);
        Vec b = annulus_sample(rng, 0.15, 0.42);
        Vec p(4);
        p << a, b;
        return p;
    };
    return c;
}

ImmersionPtr make_clifford(ParsedId pid)
{
    const double kk = get_num(pid, "K", 4.0);
    reject_leftovers(pid);
    auto c = std::make_shared<ImmersionChart>();
    std::ostringstream os;
    os.precision(17);
    os << "clifford-cp2?K=" << kk;
    c->id = os.str();
    c->domain_dim = 2;
    c->target = make_fubini_study(2, kk);
    c->params = {{"K", kk}};
    // v = U (1, e^{i t1}, e^{i t2}) / sqrt 3 with U the unitary DFT, so t = 0 maps
    // to [1:0:0]; the chart point is (v1/v0, v2/v0).
    set_maps(*c, [](const auto* x, auto* y) {
        using T = std::decay_t<decltype(x[0])>;
        Cx<T> w[3] = {{T(1.0), T(0.0)}, expi(x[0]), expi(x[1])};
        Cx<T> v[3];
        for (int r = 0; r < 3; ++r) {
            v[r] = {T(0.0), T(0.0)};
            for (int s = 0; s < 3; ++s) {
                const double ang = 2.0 * M_PI * r * s / 3.0;
                Cx<T> root{T(std::cos(ang)), T(std::sin(ang))};
                v[r] = v[r] + root * w[s];
            }
        }
        Cx<T> z1 = v[1] / v[0], z2 = v[2] / v[0];
        y[0] = z1.re;
        y[1] = z1.im;
        y[2] = z2.re;
        y[3] = z2.im;
    });
    c->sampler = [](std::mt19937_64& rng) { return box_sample(rng, 2, -0.3, 0.3); };
    return c;
}

template <class T>
void lagrangian_potential_gradient(const std::string& kind, double eps, int d, const T* x, T* grad)
{
    using std::cos;
    for (int b = 0; b < d; ++b) grad[b] = T(0.0);
    if (kind == "sin") {
        // f = eps * sum_b sin(x_b)
        for (int b = 0; b < d; ++b) grad[b] = eps * cos(x[b]);
        return;
    }
    // f = eps * sum_b sin(x_b + x_{b+1}), cyclic
    for (int b = 0; b < d; ++b) {
        const int nb = (b + 1) % d;
        T cb = eps * cos(x[b] + x[nb]);
        grad[b] = grad[b] + cb;
        grad[nb] = grad[nb] + cb;
    }
}

ImmersionPtr make_lagrangian_graph(ParsedId pid)
{
    const std::string kind = get_str(pid, "f", "mixed");
    const double eps = get_num(pid, "eps", 0.1);
    const int n = get_int(pid, "n", 1, 1, 3);
    reject_leftovers(pid);
    if (kind != "sin" && kind != "mixed") throw std::invalid_argument("lagrangian-graph f must be sin or mixed");
    auto c = std::make_shared<ImmersionChart>();
    std::ostringstream os;
    os.precision(17);
    os << "lagrangian-graph?f=" << kind << "&eps=" << eps << "&n=" << n;
    c->id = os.str();
    const int d = 2 * n;
    c->domain_dim = d;
    c->target = make_target("torus-c" + std::to_string(d));
    c->params = {{"eps", eps}, {"n", n}};
    // x -> x + i grad f
    set_maps(*c, [kind, eps, d](const auto* x, auto* y) {
        using T = std::decay_t<decltype(x[0])>;
        std::vector<T> g(d);
        lagrangian_potential_gradient<T>(kind, eps, d, x, g.data());
        for (int b = 0; b < d; ++b) {
            y[2 * b] = x[b];
            y[2 * b + 1] = g[b];
        }
    });
    c->sampler = [d](std::mt19937_64& rng) { return box_sample(rng, d, 0.0, 2.0 * M_PI); };
    c->periodic = make_periodicity(*c, 2.0 * M_PI, true);
    return c;
}

ImmersionPtr make_hk_complex_plane(ParsedId pid)
{
    const double nu = get_num(pid, "nu", M_PI / 5.0);
    const double phi = get_num(pid, "phi", 0.7);
    reject_leftovers(pid);
    auto c = std::make_shared<ImmersionChart>();
    std::ostringstream os;
    os.precision(17);
    os << "hk-complex-plane?nu=" << nu << "&phi=" << phi;
    c->id = os.str();
    c->domain_dim = 4;
    auto [target, triple] = make_hyperkahler_flat(8);
    c->target = target;
    c->params = {{"nu", nu}, {"phi", phi}};
    const Mat jnp = j_from_sphere(triple, SpherePoint{nu, phi});
    Mat cols(8, 4);
    const Vec x = Vec::Unit(8, 0), yv = Vec::Unit(8, 4);
    cols.col(0) = x;
    cols.col(1) = jnp * x;
    cols.col(2) = yv;
    cols.col(3) = jnp * yv;
    set_maps(*c, [cols](const auto* x, auto* y) {
        using T = std::decay_t<decltype(x[0])>;
        for (int a = 0; a < 8; ++a) {
            T s(0.0);
            for (int k = 0; k < 4; ++k)
                if (cols(a, k) != 0.0) s = s + cols(a, k) * x[k];
            y[a] = s;
        }
    });
    c->sampler = [](std::mt19937_64& rng) { return box_sample(rng, 4, -1.0, 1.0); };
    c->periodic = make_periodicity(*c, 2.0 * M_PI, false);
    return c;
}

ImmersionPtr make_torus_graph(ParsedId pid)
{
    const double eps = get_num(pid, "eps", 0.1);
    const int n = get_int(pid, "n", 1, 1, 3);
    reject_leftovers(pid);
    auto c = std::make_shared<ImmersionChart>();
    std::ostringstream os;
    os.precision(17);
    os << "torus-graph?eps=" << eps << "&n=" << n;
    c->id = os.str();
    const int d = 2 * n;
    c->domain_dim = d;
    c->target = make_target("torus-c" + std::to_string(d));
    c->params = {{"eps", eps}, {"n", n}};
    // z_b = x_b + i eps sin(x_{partner(b)}), partners (0,1), (2,3), ...
    set_maps(*c, [eps, d](const auto* x, auto* y) {
        using std::sin;
        for (int b = 0; b < d; ++b) {
            y[2 * b] = x[b];
            y[2 * b + 1] = eps * sin(x[b ^ 1]);
        }
    });
    c->sampler = [d](std::mt19937_64& rng) { return box_sample(rng, d, 0.0, 2.0 * M_PI); };
    c->periodic = make_periodicity(*c, 2.0 * M_PI, true);
    return c;
}

ImmersionPtr make_holo_torus(ParsedId pid)
{
    const double eps = get_num(pid, "eps", 0.05);
    reject_leftovers(pid);
    auto c = std::make_shared<ImmersionChart>();
    std::ostringstream os;
    os.precision(17);
    os << "holo-torus?eps=" << eps;
    c->id = os.str();
    c->domain_dim = 2;
    c->target = make_target("torus-c2");
    c->params = {{"eps", eps}};
    // Perturbation of the diagonal z -> (z, z).
    set_maps(*c, [eps](const auto* x, auto* y) {
        using std::sin;
        y[0] = x[0] + eps * sin(x[1]);
        y[1] = x[1];
        y[2] = x[0];
        y[3] = x[1] + eps * sin(x[0]);
    });
    c->sampler = [](std::mt19937_64& rng) { return box_sample(rng, 2, 0.0, 2.0 * M_PI); };
    c->periodic = make_periodicity(*c, 2.0 * M_PI, true);
    return c;
}

ImmersionPtr make_tilted_torus(ParsedId pid)
{
    const double eps = get_num(pid, "eps", 0.05);
    reject_leftovers(pid);
    auto c = std::make_shared<ImmersionChart>();
    std::ostringstream os;
    os.precision(17);
    os << "tilted-torus?eps=" << eps;
    c->id = os.str();
    c->domain_dim = 2;
    c->target = make_target("torus-c2");
    c->params = {{"eps", eps}};
    // Winding e_x -> (1,0,0,0), e_y -> (0,1,1,0); the flat representative has cos = 1/sqrt 2.
    set_maps(*c, [eps](const auto* x, auto* y) {
        using std::sin;
        y[0] = x[0];
        y[1] = x[1] + eps * sin(x[0]);
        y[2] = x[1];
        y[3] = eps * sin(x[1]);
    });
    c->sampler = [](std::mt19937_64& rng) { return box_sample(rng, 2, 0.0, 2.0 * M_PI); };
    c->periodic = make_periodicity(*c, 2.0 * M_PI, true);
    return c;
}

ImmersionPtr make_rotated_holomorphic(ParsedId pid)
{
    const int n = get_int(pid, "n", 2, 1, 2);
    const double seed = get_num(pid, "seed", 11.0);
    reject_leftovers(pid);
    auto c = std::make_shared<ImmersionChart>();
    std::ostringstream os;
    os.precision(17);
    os << "rotated-holomorphic?n=" << n << "&seed=" << seed;
    c->id = os.str();
    c->domain_dim = 2 * n;
    const int t = 4 * n;
    c->target = make_flat_kahler(2 * n);
    c->params = {{"n", n}, {"seed", seed}};
    // Orthogonal rotation from the Q factor of a seeded matrix. A complex
    // submanifold for the rotated structure is minimal, with generic angles
    // for the standard one.
    std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
    Mat m(t, t);
    for (int i = 0; i < t; ++i)
        for (int j = 0; j < t; ++j) m(i, j) = uniform01(rng) - 0.5;
    const Mat q = Eigen::HouseholderQR<Mat>(m).householderQ();
    std::vector<double> rot(q.data(), q.data() + t * t);
    // w = (z1, z2, 0.3 z1^2, 0.2 z1 z2) for n = 2 and (z, 0.3 z^2) for n = 1.
    set_maps(*c, [n, t, rot](const auto* x, auto* y) {
        using T = std::decay_t<decltype(x[0])>;
        std::vector<T> w(t);
        if (n == 1) {
            w[0] = x[0];
            w[1] = x[1];
            w[2] = 0.3 * (x[0] * x[0] - x[1] * x[1]);
            w[3] = 0.6 * x[0] * x[1];
        } else {
            for (int i = 0; i < 4; ++i) w[i] = x[i];
            w[4] = 0.3 * (x[0] * x[0] - x[1] * x[1]);
            w[5] = 0.6 * x[0] * x[1];
            w[6] = 0.2 * (x[0] * x[2] - x[1] * x[3]);
            w[7] = 0.2 * (x[0] * x[3] + x[1] * x[2]);
        }
        for (int i = 0; i < t; ++i) {
            y[i] = T(0.0);
            for (int j = 0; j < t; ++j) y[i] = y[i] + rot[i + t * j] * w[j];
        }
    });
    c->sampler = [n](std::mt19937_64& rng) { return box_sample(rng, 2 * n, -0.5, 0.5); };
    return c;
}

}  // namespace

ImmersionPtr make_inversion_graph(ParsedId pid)
{
    reject_leftovers(pid);
    auto c = std::make_shared<ImmersionChart>();
    c->id = "inversion-graph";
    c->domain_dim = 4;
    c->target = make_flat_kahler(4);
    // Graph of x -> A x / |x|^2 with A = diag(1, 1, 1, -1). The differential is
    // |x|^-2 times an orthogonal map Q with Q^T J Q in the family of J, so the
    // two angles agree at every point while the common angle varies.
    set_maps(*c, [](const auto* x, auto* y) {
        using T = std::decay_t<decltype(x[0])>;
        const T r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3];
        for (int b = 0; b < 4; ++b) y[b] = x[b];
        y[4] = x[0] / r2;
        y[5] = x[1] / r2;
        y[6] = x[2] / r2;
        y[7] = -x[3] / r2;
    });
    c->sampler = [](std::mt19937_64& rng) { return box_sample(rng, 4, 0.3, 0.9); };
    return c;
}

ImmersionPtr make_immersion(const std::string& id)
{
    ParsedId pid = parse_id(id);
    if (pid.name == "tilted-plane") return make_tilted_plane(pid);
    if (pid.name == "conj-curve") return make_conj_curve(pid);
    if (pid.name == "product-conj") return make_product_conj(pid);
    if (pid.name == "clifford-cp2") return make_clifford(pid);
    if (pid.name == "lagrangian-graph") return make_lagrangian_graph(pid);
    if (pid.name == "hk-complex-plane") return make_hk_complex_plane(pid);
    if (pid.name == "torus-graph") return make_torus_graph(pid);
    if (pid.name == "holo-torus") return make_holo_torus(pid);
    if (pid.name == "tilted-torus") return make_tilted_torus(pid);
    if (pid.name == "rotated-holomorphic") return make_rotated_holomorphic(pid);
    if (pid.name == "inversion-graph") return make_inversion_graph(pid);
    throw std::invalid_argument("unknown example id: " + id);
}

std::vector<std::string> immersion_catalog()
{
    return {"tilted-plane?alpha=&n=", "conj-curve?k=",        "product-conj",     "clifford-cp2?K=",
            "lagrangian-graph?f=&eps=&n=", "hk-complex-plane?nu=&phi=", "torus-graph?eps=&n=", "holo-torus?eps=",
            "tilted-torus?eps=", "rotated-holomorphic?n=&seed=", "inversion-graph"};
}

ImmersionPtr with_fd_jets(const ImmersionChart& f, const FdParams& fd)
{
    validate(fd);
    auto c = std::make_shared<ImmersionChart>(f);
    c->mode = JetMode::FiniteDifference;
    c->fd = fd;
    return c;
}

}  // namespace kal
