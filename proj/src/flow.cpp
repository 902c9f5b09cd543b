// SPDX-License-Identifier: MIT
#include "kal/flow.hpp"

#include "kal/angles.hpp"
#include "kal/parallel.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace kal {

namespace {

// Multi-index of a flat vertex or cell number, first coordinate fastest.
std::vector<int> unflatten(int idx, const std::vector<int>& shape)
{
    std::vector<int> out(shape.size());
    for (size_t k = 0; k < shape.size(); ++k) {
        out[k] = idx % shape[k];
        idx /= shape[k];
    }
    return out;
}

int flatten_wrapped(const std::vector<int>& index, const std::vector<int>& shape)
{
    int idx = 0, stride = 1;
    for (size_t k = 0; k < shape.size(); ++k) {
        const int n = shape[k];
        idx += (((index[k] % n) + n) % n) * stride;
        stride *= n;
    }
    return idx;
}

// Tangents of one cell averaged over the 2^(d-1) parallel edges, plus the
// corner positions they were built from.
struct Cell {
    std::vector<int> corners;   // vertex numbers, corner bit k = offset in direction k
    Mat tangents;               // t x d
};

Cell cell_at(const DiscreteImmersion& d, int cell)
{
    const int dim = d.dim();
    const int ncorner = 1 << dim;
    const std::vector<int> base = unflatten(cell, d.shape);
    std::vector<Vec> pos(ncorner);
    Cell c;
    c.corners.resize(ncorner);
    for (int o = 0; o < ncorner; ++o) {
        std::vector<int> idx = base;
        for (int k = 0; k < dim; ++k) idx[k] += (o >> k) & 1;
        pos[o] = d.position(idx);
        c.corners[o] = flatten_wrapped(idx, d.shape);
    }
    const double edges = static_cast<double>(ncorner / 2);
    c.tangents = Mat::Zero(d.positions.rows(), dim);
    for (int k = 0; k < dim; ++k)
        for (int o = 0; o < ncorner; ++o)
            if (!((o >> k) & 1)) c.tangents.col(k) += (pos[o | (1 << k)] - pos[o]) / (edges * d.spacing[k]);
    return c;
}

double pfaffian(const Mat& p)
{
    if (p.rows() == 2) return p(0, 1);
    if (p.rows() == 4) return p(0, 1) * p(2, 3) - p(0, 2) * p(1, 3) + p(0, 3) * p(1, 2);
    // Expansion along the first row.
    double s = 0.0;
    const int m = static_cast<int>(p.rows());
    for (int j = 1; j < m; ++j) {
        std::vector<int> keep;
        for (int i = 1; i < m; ++i)
            if (i != j) keep.push_back(i);
        Mat minor(m - 2, m - 2);
        for (int a = 0; a < m - 2; ++a)
            for (int b = 0; b < m - 2; ++b) minor(a, b) = p(keep[a], keep[b]);
        s += ((j % 2) ? 1.0 : -1.0) * p(0, j) * pfaffian(minor);
    }
    return s;
}

int cell_count(const DiscreteImmersion& d) { return d.vertex_count(); }

}  // namespace

int DiscreteImmersion::vertex_count() const
{
    int n = 1;
    for (int s : shape) n *= s;
    return n;
}

double DiscreteImmersion::cell_measure() const { return spacing.prod(); }

Vec DiscreteImmersion::position(const std::vector<int>& index) const
{
    Vec shift = Vec::Zero(positions.rows());
    for (int k = 0; k < dim(); ++k) {
        const int n = shape[k];
        const int wraps = (index[k] >= 0) ? index[k] / n : -((n - 1 - index[k]) / n);
        shift += wraps * translations.col(k);
    }
    return positions.col(flatten_wrapped(index, shape)) + shift;
}

DiscreteImmersion discretize(const ImmersionChart& f, int per_dim)
{
    if (!f.periodic) throw GeometryError("discretize needs a periodic chart: " + f.id);
    if (!f.target->is_flat) throw GeometryError("discrete flow supports flat targets only");
    if (per_dim < 2) throw GeometryError("grid needs at least 2 points per direction");
    DiscreteImmersion d;
    d.target = f.target;
    d.shape.assign(f.domain_dim, per_dim);
    d.spacing = f.periodic->periods / per_dim;
    d.translations = f.periodic->translations;
    d.winding = f.periodic->winding;
    const int t = f.target->real_dim();
    d.positions.resize(t, d.vertex_count());
    for (int v = 0; v < d.vertex_count(); ++v) {
        const std::vector<int> idx = unflatten(v, d.shape);
        Vec x(f.domain_dim);
        for (int k = 0; k < f.domain_dim; ++k) x[k] = idx[k] * d.spacing[k];
        d.positions.col(v) = f.eval(x);
    }
    return d;
}

VolumeGradient volume_and_gradient(const DiscreteImmersion& d)
{
    const int ncell = cell_count(d);
    const int dim = d.dim();
    const double measure = d.cell_measure();
    std::vector<double> vol(ncell);
    std::vector<Mat> dv_da(ncell);
    std::vector<std::vector<int>> corners(ncell);
    parallel_for(ncell, [&](int c) {
        Cell cell = cell_at(d, c);
        const Mat gram = cell.tangents.transpose() * cell.tangents;
        const double det = gram.determinant();
        if (!(det > 0.0)) throw GeometryError("degenerate cell in discrete immersion");
        vol[c] = std::sqrt(det) * measure;
        dv_da[c] = vol[c] * cell.tangents * gram.inverse();
        corners[c] = std::move(cell.corners);
    });
    VolumeGradient out;
    out.gradient = Mat::Zero(d.positions.rows(), d.vertex_count());
    const double edges = static_cast<double>(1 << (dim - 1));
    // Sequential scatter keeps the summation order fixed.
    for (int c = 0; c < ncell; ++c) {
        out.volume += vol[c];
        for (size_t o = 0; o < corners[c].size(); ++o)
            for (int k = 0; k < dim; ++k) {
                const double sign = ((o >> k) & 1) ? 1.0 : -1.0;
                out.gradient.col(corners[c][o]) += sign / (edges * d.spacing[k]) * dv_da[c].col(k);
            }
    }
    return out;
}

double class_integral(const DiscreteImmersion& d)
{
    const int ncell = cell_count(d);
    std::vector<double> part(ncell);
    const Mat& j = d.target->j;
    parallel_for(ncell, [&](int c) {
        const Mat a = cell_at(d, c).tangents;
        part[c] = pfaffian((j * a).transpose() * a);
    });
    double s = 0.0;
    for (double v : part) s += v;
    return s * d.cell_measure();
}

VertexStats vertex_stats(const DiscreteImmersion& d, const Mat& gradient)
{
    const int nv = d.vertex_count();
    const int dim = d.dim();
    const int t = static_cast<int>(d.positions.rows());
    const Mat g_n = Mat::Identity(t, t);
    std::vector<double> lo(nv), hi(nv), mean(nv), kap(nv), curv(nv);
    parallel_for(nv, [&](int v) {
        const std::vector<int> idx = unflatten(v, d.shape);
        Mat df(t, dim);
        for (int k = 0; k < dim; ++k) {
            std::vector<int> up = idx, down = idx;
            ++up[k];
            --down[k];
            df.col(k) = (d.position(up) - d.position(down)) / (2.0 * d.spacing[k]);
        }
        const AngleData ad = angle_data_from(df, g_n, d.target->j);
        const auto& c = ad.cos_spectrum;
        hi[v] = c.front();
        lo[v] = c.back();
        double s = 0.0;
        for (double x : c) s += x;
        mean[v] = s / c.size();
        const double dens = std::sqrt((df.transpose() * df).determinant()) * d.cell_measure();
        kap[v] = ad.kappa * dens;
        curv[v] = gradient.col(v).norm() / dens;
    });
    VertexStats st;
    st.min_cos = std::numeric_limits<double>::infinity();
    st.max_cos = -st.min_cos;
    double sum = 0.0;
    for (int v = 0; v < nv; ++v) {
        st.min_cos = std::min(st.min_cos, lo[v]);
        st.max_cos = std::max(st.max_cos, hi[v]);
        sum += mean[v];
        st.kappa_integral += kap[v];
        st.max_mean_curvature = std::max(st.max_mean_curvature, curv[v]);
    }
    st.mean_cos = sum / nv;
    return st;
}

const char* flow_status_name(FlowStatus s)
{
    switch (s) {
    case FlowStatus::Converged: return "converged";
    case FlowStatus::MaxSteps: return "max-steps";
    default: return "diverged";
    }
}

namespace {

FlowRow make_row(const DiscreteImmersion& d, const VolumeGradient& vg, int step, double tau)
{
    const VertexStats st = vertex_stats(d, vg.gradient);
    FlowRow r;
    r.step = step;
    r.volume = vg.volume;
    r.grad_norm = vg.gradient.norm();
    r.max_mean_curvature = st.max_mean_curvature;
    r.min_cos = st.min_cos;
    r.mean_cos = st.mean_cos;
    r.max_cos = st.max_cos;
    r.kappa_integral = st.kappa_integral;
    r.class_integral = class_integral(d);
    r.step_size = tau;
    return r;
}

}  // namespace

FlowTrace run_flow(DiscreteImmersion d, const FlowParams& params)
{
    double tau = params.step_size.value_or(0.1 * d.spacing.minCoeff() * d.spacing.minCoeff());
    if (!(tau > 0.0)) throw GeometryError("flow step size must be positive");
    FlowTrace trace;
    VolumeGradient vg = volume_and_gradient(d);
    trace.rows.push_back(make_row(d, vg, 0, tau));
    // Rounding-level rises near a minimum are not treated as divergence.
    const double rise_slack = 1e-13;
    for (int step = 1;; ++step) {
        if (trace.rows.back().max_mean_curvature < params.stop_grad_norm) {
            trace.status = FlowStatus::Converged;
            break;
        }
        if (step > params.max_steps) {
            trace.status = FlowStatus::MaxSteps;
            break;
        }
        DiscreteImmersion next = d;
        VolumeGradient next_vg;
        bool accepted = false;
        bool stationary = false;
        for (int attempt = 0; attempt < 2 && !accepted && !stationary; ++attempt) {
            next.positions = d.positions - (tau / d.cell_measure()) * vg.gradient;
            next_vg = volume_and_gradient(next);
            if (next_vg.volume <= vg.volume) accepted = true;
            else if (next_vg.volume <= vg.volume * (1.0 + rise_slack)) stationary = true;
            else tau *= 0.5;
        }
        if (stationary) {
            trace.status = FlowStatus::Converged;
            trace.message = "volume stationary at rounding level";
            break;
        }
        if (!accepted) {
            std::ostringstream os;
            os << "volume rose on two consecutive attempts at step " << step << " (step size now " << tau << ")";
            trace.status = FlowStatus::Diverged;
            trace.message = os.str();
            break;
        }
        d = std::move(next);
        vg = std::move(next_vg);
        trace.rows.push_back(make_row(d, vg, step, tau));
    }
    trace.final_state = std::move(d);
    return trace;
}

const char* limit_class_name(LimitClass c)
{
    switch (c) {
    case LimitClass::Lagrangian: return "Lagrangian";
    case LimitClass::Complex: return "Complex";
    case LimitClass::ConstantAngle: return "ConstantAngle";
    default: return "Undetermined";
    }
}

DichotomyReport dichotomy_report(const FlowTrace& trace, double threshold)
{
    DichotomyReport rep;
    if (trace.rows.empty()) return rep;
    const FlowRow& last = trace.rows.back();
    rep.evidence["final_min_cos"] = last.min_cos;
    rep.evidence["final_max_cos"] = last.max_cos;
    rep.evidence["final_spread"] = last.max_cos - last.min_cos;
    rep.evidence["final_max_mean_curvature"] = last.max_mean_curvature;
    rep.evidence["steps"] = last.step;
    if (trace.status == FlowStatus::Diverged) return rep;
    if (last.max_cos < threshold) {
        rep.limit_class = LimitClass::Lagrangian;
    } else if (last.min_cos > 1.0 - threshold) {
        rep.limit_class = LimitClass::Complex;
    } else if (last.max_cos - last.min_cos < threshold) {
        rep.limit_class = LimitClass::ConstantAngle;
        rep.angle = std::acos(last.mean_cos);
    }
    return rep;
}

}  // namespace kal
