#pragma once

// Private helpers shared by the JSON writers/readers; not installed.

#include <json.hpp>

#include <cmath>

#include "noisecal/metrics.hpp"

namespace noisecal::detail {

using ordered_json = nlohmann::ordered_json;

inline ordered_json number_or_null(double value) {
  return std::isfinite(value) ? ordered_json(value) : ordered_json(nullptr);
}

inline ordered_json number_or_inf(double value) {
  if (std::isfinite(value)) return value;
  return value > 0 ? "inf" : "-inf";
}

inline double inf_or_number(const ordered_json& value) {
  if (value.is_string()) {
    const auto text = value.get<std::string>();
    if (text == "inf") return INFINITY;
    if (text == "-inf") return -INFINITY;
  }
  return value.get<double>();
}

inline ordered_json to_json(const SsimParams& params) {
  return ordered_json{{"k1", params.k1},
                      {"k2", params.k2},
                      {"data_range", params.data_range},
                      {"window_side", params.window_side},
                      {"window_sigma", params.window_sigma}};
}

inline SsimParams ssim_params_from_json(const ordered_json& j) {
  SsimParams params;
  params.k1 = j.at("k1").get<double>();
  params.k2 = j.at("k2").get<double>();
  params.data_range = j.at("data_range").get<double>();
  params.window_side = j.at("window_side").get<std::size_t>();
  params.window_sigma = j.at("window_sigma").get<double>();
  return params;
}

}  // namespace noisecal::detail
