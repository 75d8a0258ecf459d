// JSON bindings for the domain types (nlohmann::json).
#pragma once

#include <json.hpp>

#include "steering/quantum.hpp"
#include "steering/simulate.hpp"
#include "steering/witness.hpp"

namespace steering {

inline void to_json(nlohmann::json& j, const ComplexMatrix& m) {
  j["dim"] = m.dim();
  auto& e = j["entries"] = nlohmann::json::array();
  for (int r = 0; r < m.dim(); ++r)
    for (int c = 0; c < m.dim(); ++c) e.push_back({m(r, c).real(), m(r, c).imag()});
}

inline void from_json(const nlohmann::json& j, ComplexMatrix& m) {
  const int d = j.at("dim").get<int>();
  m = ComplexMatrix(d);
  const auto& e = j.at("entries");
  if (static_cast<int>(e.size()) != d * d) throw std::invalid_argument("ComplexMatrix: entry count mismatch");
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) {
      const auto& v = e[static_cast<size_t>(r * d + c)];
      m(r, c) = cplx{v.at(0).get<double>(), v.at(1).get<double>()};
    }
}

inline void to_json(nlohmann::json& j, const SchmidtState& s) {
  j = {{"coeffs", s.coeffs}, {"dim_A", s.dim_A}, {"dim_B", s.dim_B}};
}

inline void from_json(const nlohmann::json& j, SchmidtState& s) {
  s = SchmidtState{};
  j.at("coeffs").get_to(s.coeffs);
  j.at("dim_A").get_to(s.dim_A);
  j.at("dim_B").get_to(s.dim_B);
  s.validate();
}

inline void to_json(nlohmann::json& j, const Assemblage& a) {
  j = {{"X", a.X}, {"dim_B", a.dim_B}, {"click", a.click}, {"null", a.null}};
}

inline void from_json(const nlohmann::json& j, Assemblage& a) {
  a = Assemblage{};
  j.at("X").get_to(a.X);
  j.at("dim_B").get_to(a.dim_B);
  j.at("click").get_to(a.click);
  j.at("null").get_to(a.null);
  a.validate();
}

inline void to_json(nlohmann::json& j, const Witness& w) {
  j = {{"F_click_0", w.F_click_0},
       {"F_click_1", w.F_click_1},
       {"F_null_0", w.F_null_0},
       {"F_null_1", w.F_null_1},
       {"gamma", w.gamma}};
}

inline void from_json(const nlohmann::json& j, Witness& w) {
  j.at("F_click_0").get_to(w.F_click_0);
  j.at("F_click_1").get_to(w.F_click_1);
  j.at("F_null_0").get_to(w.F_null_0);
  j.at("F_null_1").get_to(w.F_null_1);
  j.at("gamma").get_to(w.gamma);
}

inline void to_json(nlohmann::json& j, const CountData& c) {
  j = {{"X", c.X},
       {"n_heralds", c.n_heralds},
       {"seed", c.seed},
       {"coincidences", c.coincidences},
       {"singles", c.singles}};
}

inline void from_json(const nlohmann::json& j, CountData& c) {
  c = CountData{};
  j.at("X").get_to(c.X);
  j.at("n_heralds").get_to(c.n_heralds);
  j.at("seed").get_to(c.seed);
  j.at("coincidences").get_to(c.coincidences);
  j.at("singles").get_to(c.singles);
  c.validate();
}

inline void to_json(nlohmann::json& j, const PipelineConfig& c) {
  j = {{"alpha", c.alpha},      {"epsilon", c.epsilon},         {"deltas", c.deltas}, {"n_heralds", c.n_heralds},
       {"repetitions", c.repetitions}, {"seed", c.seed},        {"eps_B", c.eps_B}};
}

inline void from_json(const nlohmann::json& j, PipelineConfig& c) {
  c = PipelineConfig{};
  j.at("alpha").get_to(c.alpha);
  j.at("epsilon").get_to(c.epsilon);
  j.at("deltas").get_to(c.deltas);
  if (j.contains("n_heralds")) j.at("n_heralds").get_to(c.n_heralds);
  if (j.contains("repetitions")) j.at("repetitions").get_to(c.repetitions);
  if (j.contains("seed")) j.at("seed").get_to(c.seed);
  if (j.contains("eps_B")) j.at("eps_B").get_to(c.eps_B);
}

inline void to_json(nlohmann::json& j, const PipelinePoint& p) {
  j = {{"delta", p.delta},
       {"overlap", p.overlap},
       {"mean_parameter", p.mean_parameter},
       {"stderr", p.stderr_parameter},
       {"epsilon_estimate", p.epsilon_estimate},
       {"stderr_epsilon", p.stderr_epsilon},
       {"parameters", p.parameters}};
}

inline void to_json(nlohmann::json& j, const PipelineReport& r) {
  j = {{"config", r.config}, {"points", r.points}};
}

}  // namespace steering
