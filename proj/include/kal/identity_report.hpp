// SPDX-License-Identifier: MIT
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace kal {

enum class Verdict { Pass, Fail, Skipped };

inline const char* verdict_name(Verdict v)
{
    switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    default: return "skipped";
    }
}

struct IdentityReport {
    std::string check_id;
    std::string example;
    std::vector<Eigen::VectorXd> points;
    double lhs = 0.0;
    double rhs = 0.0;
    double residual_abs = 0.0;
    double residual_rel = 0.0;
    double tolerance = 0.0;
    Verdict verdict = Verdict::Skipped;
    std::string reason;
    std::map<std::string, double> oracle;       // FD steps, orders, term counts
    std::map<std::string, double> components;   // named sub-residuals

    // Fills residual_rel and the verdict from residual_abs and tolerance.
    void finish()
    {
        residual_rel = residual_abs / (std::abs(lhs) + std::abs(rhs) + 1.0);
        verdict = (std::isfinite(residual_abs) && residual_abs <= tolerance) ? Verdict::Pass : Verdict::Fail;
    }

    void skip(std::string why)
    {
        verdict = Verdict::Skipped;
        reason = std::move(why);
        lhs = rhs = residual_abs = residual_rel = 0.0;
    }
};

}  // namespace kal
