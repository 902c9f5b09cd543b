// SPDX-License-Identifier: MIT
#pragma once

#include "kal/angles.hpp"
#include "kal/identity_report.hpp"
#include "kal/immersion.hpp"

#include <optional>
#include <string>
#include <vector>

namespace kal {

enum class CheckGroup { FirstOrder, Weitzenbock, DeltaKappa, HyperKahler, Quadrature };
const char* check_group_name(CheckGroup g);

struct CheckSpec {
    std::string id;
    CheckGroup group;
    std::string statement;   // the identity in words
    std::string lhs_route;
    std::string rhs_route;
    double tolerance = 0.0;
    int term_count = 0;      // summands of the identity as printed; checked against evaluated terms
    // Point sampling avoids these loci for the check.
    bool excludes_complex = false;
    bool excludes_lagrangian = false;
};

struct CheckOptions {
    std::optional<double> tolerance;
    double minimality_tol = 1e-7;
    int grid = 64;           // quadrature points per direction on 2-dimensional domains
};

const std::vector<CheckSpec>& check_registry();
// Throws std::invalid_argument for an unknown id.
const CheckSpec& find_check(const std::string& id);
// Registry order; '*' and '?' wildcards.
std::vector<std::string> match_checks(const std::string& pattern);
bool glob_match(const std::string& pattern, const std::string& text);

// Pointwise checks use p; quadrature checks ignore it and integrate over the
// fundamental domain. Gate failures and angle crossings give Skipped.
IdentityReport run_check(const std::string& id, const ImmersionChart& f, const Vec& p, const CheckOptions& opt = {});

// Largest |H| over p and its order-4 stencil.
double stencil_mean_curvature(const ImmersionChart& f, const Vec& p);

// Quadrature grid per direction for a domain of dimension d.
int quadrature_points_per_dim(int grid, int d);

}  // namespace kal
