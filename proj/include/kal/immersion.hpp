// SPDX-License-Identifier: MIT
#pragma once

#include "kal/arrays.hpp"
#include "kal/dual.hpp"
#include "kal/target.hpp"
#include "kal/tensor_core.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace kal {

template <class T>
using MapFn = std::function<void(const T* x, T* y)>;

enum class JetMode { Analytic, FiniteDifference };

struct Periodicity {
    Vec periods;        // fundamental domain [0, periods_k) per coordinate
    Mat translations;   // column k: F(x + periods_k e_k) = F(x) + translations.col(k)
    Eigen::MatrixXi winding;  // translations in units of the target lattice
};

// Uniform double in [0, 1) from the top 53 bits; portable across standard libraries.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

struct ImmersionChart {
    std::string id;
    int domain_dim = 0;
    TargetPtr target;
    JetMode mode = JetMode::Analytic;
    FdParams fd;
    MapFn<double> f0;
    MapFn<D1> f1;
    MapFn<D2> f2;
    MapFn<D3> f3;
    std::optional<Periodicity> periodic;
    std::function<Vec(std::mt19937_64&)> sampler;
    std::map<std::string, double> params;

    int n() const { return domain_dim / 2; }
    Vec eval(const Vec& p) const;
};

using ImmersionPtr = std::shared_ptr<const ImmersionChart>;

struct Jets {
    int order = 0;
    Vec value;
    Mat first;                 // (2m) x d
    Tensor3 second;            // (a, i, j)
    std::vector<double> third; // ((a*d + i)*d + j)*d + k
    double third_at(int a, int i, int j, int k, int d) const
    {
        return third[((static_cast<size_t>(a) * d + i) * d + j) * d + k];
    }
};

struct PointGeometry {
    Vec p;
    Vec fp;
    Mat dF;
    Mat g_n;
    MetricTensor g_m;
    Mat normal_projector;
    Tensor3 domain_christoffel;   // (k, i, j) = Gamma^k_ij
    Tensor3 target_christoffel;
};

struct SecondFundamental {
    std::vector<Vec> nabla_dF;  // index i*d + j
    Vec mean_curvature;
    const Vec& at(int i, int j, int d) const { return nabla_dF[static_cast<size_t>(i) * d + j]; }
};

struct CurvatureData {
    Tensor4 rm_fd;
    Tensor4 rm_gauss;
    Tensor4 rn_pullback;
    Mat ricci_n;
};

Jets evaluate_jets(const ImmersionChart& f, const Vec& p, int order);
// Induced metric from first jets only.
Mat induced_metric(const ImmersionChart& f, const Vec& p);
// Domain Christoffels by central differences of the induced metric field.
Tensor3 domain_christoffel(const ImmersionChart& f, const Vec& p, const FdParams& fd);
PointGeometry first_fundamental(const ImmersionChart& f, const Vec& p);
SecondFundamental second_fundamental(const ImmersionChart& f, const PointGeometry& pg);
Mat shape_operator(const SecondFundamental& sf, const PointGeometry& pg, const Vec& u);
CurvatureData domain_curvature(const ImmersionChart& f, const Vec& p);
// Gauss equation with R(X,Y,X,Y) = sectional curvature.
Tensor4 gauss_curvature(const Tensor4& rn_pullback, const SecondFundamental& sf, const Mat& g_n, int d);
Tensor4 pullback_curvature(const Tensor4& rn, const Mat& dF);

// Catalog ids like "conj-curve?k=2". Parameters absent from the id take defaults.
ImmersionPtr make_immersion(const std::string& id);
std::vector<std::string> immersion_catalog();
// Same chart with jets computed by finite differences of the value map.
ImmersionPtr with_fd_jets(const ImmersionChart& f, const FdParams& fd);

}  // namespace kal
