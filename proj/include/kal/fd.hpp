// SPDX-License-Identifier: MIT
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace kal {

struct FdParams {
    double step = 1e-3;     // base step, scaled by (1 + |x_k|)
    int order = 4;          // 2 or 4
    int richardson = 1;     // extrapolation levels for second derivatives
};

inline double fd_step(const FdParams& fd, double x) { return fd.step * (1.0 + std::abs(x)); }

inline void validate(const FdParams& fd)
{
    if (fd.order != 2 && fd.order != 4) throw std::invalid_argument("fd order must be 2 or 4");
    if (!(fd.step > 1e-12) || !std::isfinite(fd.step)) throw std::invalid_argument("fd step underflow");
    if (fd.richardson < 0 || fd.richardson > 2) throw std::invalid_argument("richardson levels must be 0..2");
}

namespace detail {

// Central first-derivative stencils: offsets (in units of h) and weights.
inline const std::vector<std::pair<int, double>>& first_stencil(int order)
{
    static const std::vector<std::pair<int, double>> o2 = {{1, 0.5}, {-1, -0.5}};
    static const std::vector<std::pair<int, double>> o4 = {
        {2, -1.0 / 12.0}, {1, 8.0 / 12.0}, {-1, -8.0 / 12.0}, {-2, 1.0 / 12.0}};
    return order == 2 ? o2 : o4;
}

inline const std::vector<std::pair<int, double>>& second_stencil(int order)
{
    static const std::vector<std::pair<int, double>> o2 = {{1, 1.0}, {0, -2.0}, {-1, 1.0}};
    static const std::vector<std::pair<int, double>> o4 = {
        {2, -1.0 / 12.0}, {1, 16.0 / 12.0}, {0, -30.0 / 12.0}, {-1, 16.0 / 12.0}, {-2, -1.0 / 12.0}};
    return order == 2 ? o2 : o4;
}

}  // namespace detail

// Partial derivatives d/dx_k of a field f: R^d -> T, T any type with
// addition and scalar multiplication (double, Eigen vectors and matrices).
template <class T, class Fn>
std::vector<T> fd_partials(Fn&& f, const Eigen::VectorXd& p, const FdParams& fd)
{
    validate(fd);
    const int d = static_cast<int>(p.size());
    std::vector<T> out;
    out.reserve(d);
    for (int k = 0; k < d; ++k) {
        const double h = fd_step(fd, p[k]);
        T acc{};
        bool first = true;
        for (auto [off, w] : detail::first_stencil(fd.order)) {
            Eigen::VectorXd q = p;
            q[k] += off * h;
            T v = f(q);
            if (first) { acc = (w / h) * v; first = false; }
            else acc = acc + (w / h) * v;
        }
        out.push_back(acc);
    }
    return out;
}

namespace detail {

template <class T, class Fn>
T second_partial_once(Fn&& f, const Eigen::VectorXd& p, int i, int j, double hi, double hj, int order,
                      const T& f0)
{
    T acc{};
    bool first = true;
    auto add = [&](double w, const T& v) {
        if (first) { acc = w * v; first = false; }
        else acc = acc + w * v;
    };
    if (i == j) {
        for (auto [off, w] : second_stencil(order)) {
            if (off == 0) { add(w / (hi * hi), f0); continue; }
            Eigen::VectorXd q = p;
            q[i] += off * hi;
            add(w / (hi * hi), f(q));
        }
    } else {
        for (auto [oa, wa] : first_stencil(order))
            for (auto [ob, wb] : first_stencil(order)) {
                Eigen::VectorXd q = p;
                q[i] += oa * hi;
                q[j] += ob * hj;
                add(wa * wb / (hi * hj), f(q));
            }
    }
    return acc;
}

}  // namespace detail

// Full matrix of second partials, entry (i, j) stored at i*d + j. Richardson
// extrapolation combines steps h and h/2 per level.
template <class T, class Fn>
std::vector<T> fd_hessian(Fn&& f, const Eigen::VectorXd& p, const FdParams& fd)
{
    validate(fd);
    const int d = static_cast<int>(p.size());
    const T f0 = f(p);
    std::vector<T> out(static_cast<size_t>(d) * d);
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
            double hi = fd_step(fd, p[i]);
            double hj = fd_step(fd, p[j]);
            std::vector<T> levels;
            for (int r = 0; r <= fd.richardson; ++r) {
                levels.push_back(detail::second_partial_once<T>(f, p, i, j, hi, hj, fd.order, f0));
                hi *= 0.5;
                hj *= 0.5;
            }
            // Neville-style elimination of the leading h^order, h^(order+2) terms.
            double factor = std::pow(2.0, fd.order);
            while (levels.size() > 1) {
                std::vector<T> next;
                for (size_t r = 0; r + 1 < levels.size(); ++r)
                    next.push_back((factor / (factor - 1.0)) * levels[r + 1] + (-1.0 / (factor - 1.0)) * levels[r]);
                levels.swap(next);
                factor *= 4.0;
            }
            out[static_cast<size_t>(i) * d + j] = levels[0];
            out[static_cast<size_t>(j) * d + i] = levels[0];
        }
    return out;
}

}  // namespace kal
