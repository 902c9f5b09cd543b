// SPDX-License-Identifier: MIT
#include "kal/report.hpp"

#include "kal/angles.hpp"
#include "kal/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

namespace kal {

using json = nlohmann::json;

std::string format_double(double x)
{
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12e", x);
    return buf;
}

namespace {

// Pretty printer with fixed float formatting. Object keys are already sorted
// by nlohmann::json's std::map storage.
void dump(const json& j, std::string& out, int depth)
{
    const std::string pad(2 * (depth + 1), ' ');
    const std::string close(2 * depth, ' ');
    switch (j.type()) {
    case json::value_t::object: {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first) out += ",\n";
            first = false;
            out += pad + json(it.key()).dump() + ": ";
            dump(it.value(), out, depth + 1);
        }
        out += "\n" + close + "}";
        return;
    }
    case json::value_t::array: {
        if (j.empty()) {
            out += "[]";
            return;
        }
        out += "[\n";
        for (size_t i = 0; i < j.size(); ++i) {
            if (i) out += ",\n";
            out += pad;
            dump(j[i], out, depth + 1);
        }
        out += "\n" + close + "]";
        return;
    }
    case json::value_t::number_float: {
        const double x = j.get<double>();
        out += std::isfinite(x) ? format_double(x) : "\"" + format_double(x) + "\"";
        return;
    }
    default:
        out += j.dump();
    }
}

std::string dump_json(const json& j)
{
    std::string out;
    dump(j, out, 0);
    out += "\n";
    return out;
}

std::uint64_t fnv1a(const std::string& s)
{
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) h = (h ^ c) * 1099511628211ULL;
    return h;
}

bool on_excluded_locus(const CheckSpec& spec, const ImmersionChart& f, const Vec& p)
{
    if (!spec.excludes_complex && !spec.excludes_lagrangian) return false;
    const Classification c = classify_point(f, p);
    return (spec.excludes_complex && c.complex_direction) || (spec.excludes_lagrangian && c.lagrangian_direction);
}

std::string csv_quote(const std::string& s)
{
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string join_point(const Vec& p, char sep)
{
    std::string s;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (i) s += sep;
        s += format_double(p[i]);
    }
    return s;
}

const char* verdict_label(Verdict v)
{
    switch (v) {
    case Verdict::Pass: return "PASS";
    case Verdict::Fail: return "FAIL";
    default: return "SKIP";
    }
}

}  // namespace

RunReport run_catalog(const RunConfig& config)
{
    const std::vector<std::string> ids = match_checks(config.checks);
    if (ids.empty()) throw ConfigError("no check matches '" + config.checks + "'");
    if (config.example.empty()) throw ConfigError("an example id is required");
    if (config.points < 1) throw ConfigError("--points must be at least 1");
    if (config.fd_order != 2 && config.fd_order != 4) throw ConfigError("--fd-order must be 2 or 4");
    if (config.fd_step && !(*config.fd_step > 0.0)) throw ConfigError("--fd-step must be positive");
    if (config.tolerance && !(*config.tolerance > 0.0)) throw ConfigError("--tol must be positive");
    if (config.grid < 2) throw ConfigError("--grid must be at least 2");
    ImmersionPtr base;
    try {
        base = make_immersion(config.example);
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    auto chart = std::make_shared<ImmersionChart>(*base);
    if (config.fd_step) chart->fd.step = *config.fd_step;
    chart->fd.order = config.fd_order;

    RunReport rep;
    rep.config = config;
    rep.fd = chart->fd;
    for (const std::string& id : ids) rep.tolerances[id] = config.tolerance.value_or(find_check(id).tolerance);

    std::mt19937_64 rng(config.seed);
    std::vector<Vec> points;
    for (int k = 0; k < config.points; ++k) points.push_back(chart->sampler(rng));

    struct Task {
        std::string id;
        int point;
    };
    std::vector<Task> tasks;
    for (const std::string& id : ids) {
        if (find_check(id).group == CheckGroup::Quadrature) tasks.push_back({id, 0});
        else
            for (int k = 0; k < config.points; ++k) tasks.push_back({id, k});
    }

    CheckOptions opt;
    opt.tolerance = config.tolerance;
    opt.grid = config.grid;
    rep.results.resize(tasks.size());
    parallel_for(static_cast<int>(tasks.size()), [&](int t) {
        const Task& task = tasks[t];
        const CheckSpec& spec = find_check(task.id);
        Vec p = points[task.point];
        bool found = spec.group == CheckGroup::Quadrature || !on_excluded_locus(spec, *chart, p);
        if (!found) {
            std::mt19937_64 local(config.seed ^ fnv1a(spec.id) ^ (0x9E3779B97F4A7C15ULL * (task.point + 1)));
            for (int tries = 0; tries < 100 && !found; ++tries) {
                Vec q = chart->sampler(local);
                if (!on_excluded_locus(spec, *chart, q)) {
                    p = q;
                    found = true;
                }
            }
        }
        // Without a clean sample the check's own gate reports the locus as Skipped.
        IdentityReport r;
        try {
            r = run_check(spec.id, *chart, p, opt);
        } catch (const std::exception& e) {
            r.check_id = spec.id;
            r.example = chart->id;
            r.points = {p};
            r.tolerance = rep.tolerances.at(spec.id);
            r.verdict = Verdict::Fail;
            r.reason = e.what();
        }
        rep.results[t] = std::move(r);
    });
    for (const IdentityReport& r : rep.results) {
        if (r.verdict == Verdict::Pass) ++rep.pass;
        else if (r.verdict == Verdict::Fail) ++rep.fail;
        else ++rep.skipped;
    }
    return rep;
}

std::string render_json(const RunReport& report)
{
    json meta;
    meta["seed"] = report.config.seed;
    meta["fd"] = {{"step", report.fd.step}, {"order", report.fd.order}, {"richardson", report.fd.richardson}};
    meta["tolerances"] = json::object();
    for (const auto& [id, tol] : report.tolerances) meta["tolerances"][id] = tol;
    meta["version"] = kVersion;
    meta["example"] = report.config.example;
    meta["checks"] = report.config.checks;
    meta["points"] = report.config.points;
    meta["grid"] = report.config.grid;

    json results = json::array();
    for (const IdentityReport& r : report.results) {
        json pts = json::array();
        for (const Vec& p : r.points) pts.push_back(std::vector<double>(p.data(), p.data() + p.size()));
        json o;
        o["check_id"] = r.check_id;
        o["example"] = r.example;
        o["points"] = pts;
        o["lhs"] = r.lhs;
        o["rhs"] = r.rhs;
        o["residual_abs"] = r.residual_abs;
        o["residual_rel"] = r.residual_rel;
        o["tolerance"] = r.tolerance;
        o["verdict"] = verdict_name(r.verdict);
        o["reason"] = r.reason;
        o["oracle"] = json::object();
        for (const auto& [k, v] : r.oracle) o["oracle"][k] = v;
        o["components"] = json::object();
        for (const auto& [k, v] : r.components) o["components"][k] = v;
        results.push_back(o);
    }
    json root;
    root["meta"] = meta;
    root["results"] = results;
    root["summary"] = {{"pass", report.pass}, {"fail", report.fail}, {"skipped", report.skipped}};
    return dump_json(root);
}

std::string render_csv(const RunReport& report)
{
    std::string out = "check_id,example,point,verdict,lhs,rhs,residual_abs,residual_rel,tolerance,reason\n";
    for (const IdentityReport& r : report.results) {
        const std::string tail = "," + std::string(verdict_name(r.verdict)) + "," + format_double(r.lhs) + "," +
                                 format_double(r.rhs) + "," + format_double(r.residual_abs) + "," +
                                 format_double(r.residual_rel) + "," + format_double(r.tolerance) + "," +
                                 csv_quote(r.reason) + "\n";
        const std::string head = r.check_id + "," + csv_quote(r.example) + ",";
        if (r.points.empty()) out += head + tail;
        for (const Vec& p : r.points) out += head + csv_quote(join_point(p, ';')) + tail;
    }
    return out;
}

std::string render_table(const RunReport& report)
{
    std::ostringstream os;
    char line[512];
    std::snprintf(line, sizeof line, "%-26s %-7s %-20s %-20s %s\n", "CHECK", "VERDICT", "RESIDUAL", "TOLERANCE",
                  "REASON");
    os << line;
    for (const IdentityReport& r : report.results) {
        std::snprintf(line, sizeof line, "%-26s %-7s %-20s %-20s %s\n", r.check_id.c_str(), verdict_label(r.verdict),
                      format_double(r.residual_abs).c_str(), format_double(r.tolerance).c_str(), r.reason.c_str());
        os << line;
    }
    os << "example " << report.config.example << ": pass " << report.pass << ", fail " << report.fail << ", skipped "
       << report.skipped << "\n";
    return os.str();
}

std::string render_flow_json(const std::string& example, int grid, const FlowTrace& trace,
                             const DichotomyReport& verdict)
{
    json rows = json::array();
    for (const FlowRow& r : trace.rows) {
        rows.push_back({{"step", r.step},
                        {"volume", r.volume},
                        {"grad_norm", r.grad_norm},
                        {"max_mean_curvature", r.max_mean_curvature},
                        {"min_cos", r.min_cos},
                        {"mean_cos", r.mean_cos},
                        {"max_cos", r.max_cos},
                        {"kappa_integral", r.kappa_integral},
                        {"class_integral", r.class_integral},
                        {"step_size", r.step_size}});
    }
    json dich;
    dich["limit_class"] = limit_class_name(verdict.limit_class);
    dich["label"] = verdict.label;
    dich["angle"] = verdict.angle ? json(*verdict.angle) : json(nullptr);
    dich["evidence"] = json::object();
    for (const auto& [k, v] : verdict.evidence) dich["evidence"][k] = v;
    json root;
    root["meta"] = {{"example", example}, {"grid", grid}, {"version", kVersion}};
    root["status"] = flow_status_name(trace.status);
    root["message"] = trace.message;
    root["trace"] = rows;
    root["dichotomy"] = dich;
    return dump_json(root);
}

std::string render_flow_csv(const FlowTrace& trace)
{
    std::string out = "step,volume,grad_norm,max_mean_curvature,min_cos,mean_cos,max_cos,kappa_integral,class_integral\n";
    for (const FlowRow& r : trace.rows) {
        out += std::to_string(r.step);
        for (double v : {r.volume, r.grad_norm, r.max_mean_curvature, r.min_cos, r.mean_cos, r.max_cos,
                         r.kappa_integral, r.class_integral})
            out += "," + format_double(v);
        out += "\n";
    }
    return out;
}

std::string render_angles_json(const std::string& example, const Vec& p, const AngleData& ad)
{
    std::vector<double> theta;
    for (double c : ad.cos_spectrum) theta.push_back(std::acos(std::clamp(c, -1.0, 1.0)));
    json root;
    root["example"] = example;
    root["point"] = std::vector<double>(p.data(), p.data() + p.size());
    root["cos"] = ad.cos_spectrum;
    root["theta"] = theta;
    root["kappa"] = ad.kappa;
    root["kappa_det"] = ad.kappa_det;
    root["class"] = point_class_name(ad.classification.kind);
    return dump_json(root);
}

}  // namespace kal
