#pragma once

// Scenario <-> JSON. Powers are stored in dBm on disk and linear in memory.

#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hetnet/assignment.hpp"
#include "hetnet/model.hpp"
#include "json.hpp"

namespace hetnet {

inline nlohmann::json scenario_to_json(const Scenario& s) {
  nlohmann::json j;
  auto& bss = j["base_stations"] = nlohmann::json::array();
  for (const auto& bs : s.base_stations) {
    nlohmann::json b{{"id", bs.id},
                     {"kind", to_string(bs.kind)},
                     {"x", bs.position.x},
                     {"y", bs.position.y},
                     {"antennas", bs.antennas},
                     {"load", bs.load_capacity},
                     {"power_dbm", linear_to_dbm(bs.tx_power)},
                     {"rate_bias", bs.rate_bias}};
    if (bs.path_loss_exponent != default_path_loss_exponent(bs.kind)) b["path_loss_exponent"] = bs.path_loss_exponent;
    bss.push_back(std::move(b));
  }
  auto& users = j["users"] = nlohmann::json::array();
  for (const auto& u : s.users)
    users.push_back({{"id", u.id}, {"x", u.position.x}, {"y", u.position.y}, {"weight", u.weight}});
  j["area"] = {{"w", s.area.width}, {"h", s.area.height}};
  j["coverage_radius"] = s.coverage_radius;
  j["seed"] = s.seed;
  if (!s.macro_interference_includes_picos) j["macro_interference_includes_picos"] = false;
  return j;
}

inline Scenario scenario_from_json(const nlohmann::json& j) {
  Scenario s;
  for (const auto& b : j.at("base_stations")) {
    BaseStation bs;
    bs.id = b.at("id").get<std::size_t>();
    bs.kind = bs_kind_from_string(b.at("kind").get<std::string>());
    bs.position = {b.at("x").get<double>(), b.at("y").get<double>()};
    bs.antennas = b.at("antennas").get<int>();
    bs.load_capacity = b.at("load").get<int>();
    bs.tx_power = dbm_to_linear(b.at("power_dbm").get<double>());
    bs.rate_bias = b.value("rate_bias", 1.0);
    bs.path_loss_exponent = b.value("path_loss_exponent", default_path_loss_exponent(bs.kind));
    s.base_stations.push_back(bs);
  }
  for (const auto& u : j.at("users")) {
    UserTerminal ut;
    ut.id = u.at("id").get<std::size_t>();
    ut.position = {u.at("x").get<double>(), u.at("y").get<double>()};
    ut.weight = u.value("weight", 1.0);
    s.users.push_back(ut);
  }
  s.area = {j.at("area").at("w").get<double>(), j.at("area").at("h").get<double>()};
  s.coverage_radius = j.value("coverage_radius", 300.0);
  s.seed = j.value("seed", std::uint64_t{0});
  s.macro_interference_includes_picos = j.value("macro_interference_includes_picos", true);
  validate(s);
  return s;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file: " + path);
  return scenario_from_json(nlohmann::json::parse(in));
}

/// Dense array-of-arrays; `null` entries stand for -inf (forbidden pairs).
inline WeightMatrix weight_matrix_from_json(const nlohmann::json& rows, std::vector<int> capacities) {
  if (!rows.is_array()) throw std::invalid_argument("weight matrix: expected an array of rows");
  const std::size_t K = rows.size();
  const std::size_t J = K == 0 ? capacities.size() : rows.front().size();
  Matrix<double> w(K, J, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    if (!rows[k].is_array() || rows[k].size() != J) throw std::invalid_argument("weight matrix: ragged rows");
    for (std::size_t j = 0; j < J; ++j)
      w(k, j) = rows[k][j].is_null() ? -std::numeric_limits<double>::infinity() : rows[k][j].get<double>();
  }
  return WeightMatrix::dense(std::move(w), std::move(capacities));
}

}  // namespace hetnet
