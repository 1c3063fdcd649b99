#include "stochper/report_json.hpp"

#include <cmath>

namespace stochper {
namespace {

using nlohmann::json;

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json vec(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(num(v(i)));
  return out;
}

json vec(const std::vector<double>& v) {
  json out = json::array();
  for (double x : v) out.push_back(num(x));
  return out;
}

json mat(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(vec(Eigen::VectorXd(m.row(r).transpose())));
  return out;
}

}  // namespace

json to_json(const VerificationReport& report) {
  json grid = {{"radii", vec(report.grid.radii)},
               {"sphere_res", report.grid.sphere_res},
               {"t_samples", report.grid.t_samples},
               {"y_box", num(report.grid.y_box)},
               {"y_res", report.grid.y_res}};
  json entries = json::array();
  for (const auto& e : report.entries) {
    json item = {{"condition", e.condition},
                 {"pass", e.pass},
                 {"margin", num(e.margin)},
                 {"witness", {{"x", vec(e.witness_x)}, {"y", vec(e.witness_y)}, {"t", num(e.witness_t)}}},
                 {"grid", grid}};
    if (!e.shell_values.empty()) item["shell_values"] = vec(e.shell_values);
    if (!e.note.empty()) item["note"] = e.note;
    entries.push_back(std::move(item));
  }
  json constants = json::object();
  for (const auto& [k, v] : report.constants) constants[k] = num(v);
  return {{"entries", entries}, {"constants", constants}, {"all_pass", report.all_pass()}};
}

json to_json(const PeriodicityReport& report) {
  json distances = json::array();
  for (const auto& d : report.distances) {
    distances.push_back({{"k", d.k}, {"t", num(d.t)}, {"value", num(d.value)}, {"raw", num(d.raw)}, {"p", num(d.p)}});
  }
  json out = {{"distances", distances},
              {"verdict", report.verdict},
              {"consistent", report.consistent},
              {"trend_p", num(report.trend_p)},
              {"threshold", num(report.threshold)},
              {"statistic", to_string(report.statistic)},
              {"standardization",
               {{"mean", vec(report.standardization.mean)}, {"std", vec(report.standardization.std)}}}};
  if (report.profile) {
    json rows = json::array();
    for (const auto& r : report.profile->rows) {
      rows.push_back({{"s", num(r.s)},
                      {"mean_first", vec(r.mean_first)},
                      {"mean_second", vec(r.mean_second)},
                      {"diff", vec(r.diff)},
                      {"std_error", vec(r.std_error)},
                      {"cov_first", mat(r.cov_first)},
                      {"cov_second", mat(r.cov_second)},
                      {"max_abs_z", num(r.max_abs_z)}});
    }
    out["profile"] = {{"rows", rows}, {"max_abs_z", num(report.profile->max_abs_z)}};
  }
  return out;
}

json to_json(const Uf1Constants& c) {
  return {{"p", c.p},
          {"q", c.q},
          {"m", c.m},
          {"lambda", num(c.lambda)},
          {"nu", num(c.nu)},
          {"a", num(c.a)},
          {"c_max", num(c.c_max)},
          {"c_max_formula", num(c.c_max_formula)},
          {"inner_leading_min", num(c.inner_leading_min)},
          {"literal_norm_power", c.literal_norm_power},
          {"a_reductions", c.a_reductions}};
}

json to_json(const Certificate& cert) {
  if (const auto* u = std::get_if<UfCertificate>(&cert)) {
    return {{"kind", "uf"}, {"a", num(u->a)},   {"D", num(u->D)},   {"b", num(u->b)},
            {"m", num(u->m)}, {"M", num(u->M)}, {"e", num(u->e)},   {"c1", num(u->c1)},
            {"M1", num(u->M1)}, {"c2", num(u->c2)}, {"M2", num(u->M2)}};
  }
  const auto& g = std::get<Uf2Certificate>(cert);
  return {{"kind", "uf2"}, {"alpha", num(g.alpha)}, {"beta", num(g.beta)}, {"b", num(g.b)},
          {"eps", num(g.eps)}, {"M", num(g.M)},       {"c", num(g.c)},       {"M1", num(g.M1)}};
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

}  // namespace stochper
