#include "noisecal/serialization.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>
#include <system_error>

#include "json_support.hpp"
#include "noisecal/error.hpp"

namespace noisecal {

using detail::ordered_json;

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

std::string sweep_to_csv(std::span<const SweepResult> sweeps) {
  std::string out = "kind,magnitude,mssim\n";
  for (const auto& sweep : sweeps) {
    for (const auto& sample : sweep.samples) {
      out += std::string(to_string(sweep.kind)) + ',' + format_number(sample.magnitude) + ',' +
             format_number(sample.mssim) + '\n';
    }
  }
  return out;
}

namespace {

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(text);
  std::string quoted = "\"";
  for (char c : text) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + '"';
}

}  // namespace

std::string distribution_to_csv(const MetricDistribution& dist,
                                std::span<const std::string> paths) {
  if (paths.size() != dist.count()) {
    throw Error(ErrorCode::kShapeMismatch, "path list does not match distribution size");
  }
  std::string out = "index,path,psnr_db,ssim\n";
  for (std::size_t i = 0; i < dist.count(); ++i) {
    out += std::to_string(i) + ',' + csv_field(paths[i]) + ',' + format_number(dist.psnr_db[i]) +
           ',' + format_number(dist.ssim[i]) + '\n';
  }
  return out;
}

std::string distribution_summary_json(const MetricDistribution& dist, const NoiseSpec& spec,
                                      Seed seed, const SsimParams& params) {
  auto optional_number = [](const std::optional<double>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
  };
  ordered_json doc{
      {"count", dist.count()},
      {"kurtosis_psnr", optional_number(dist.kurtosis_psnr)},
      {"kurtosis_ssim", optional_number(dist.kurtosis_ssim)},
      {"mean_psnr", optional_number(dist.mean_psnr)},
      {"mean_ssim", dist.mean_ssim},
      {"excluded_infinite_psnr", dist.excluded_infinite_psnr},
      {"kurtosis_psnr_defined", dist.kurtosis_psnr.has_value()},
      {"kurtosis_ssim_defined", dist.kurtosis_ssim.has_value()},
  };
  if (!dist.kurtosis_psnr) doc["kurtosis_psnr_reason"] = dist.kurtosis_psnr_reason;
  if (!dist.kurtosis_ssim) doc["kurtosis_ssim_reason"] = dist.kurtosis_ssim_reason;
  doc["noise"] = {{"kind", to_string(spec.kind)}, {"magnitude", spec.magnitude}};
  doc["seed"] = seed.value;
  doc["ssim_params"] = detail::to_json(params);
  return doc.dump(2) + "\n";
}

std::string quality_report_json(const QualityReport& report) {
  ordered_json doc{{"mse", report.mse},
                   {"psnr_db", detail::number_or_inf(report.psnr_db)},
                   {"ssim", report.ssim}};
  return doc.dump() + "\n";
}

std::string lookup_to_json(const LookupTable& table) {
  ordered_json entries = ordered_json::object();
  ordered_json achieved = ordered_json::object();
  ordered_json reasons = ordered_json::object();
  for (NoiseKind kind : table.kinds) {
    const std::string key(to_string(kind));
    ordered_json row = ordered_json::array();
    ordered_json achieved_row = ordered_json::array();
    const auto& cells = table.entries.at(kind);
    const auto achieved_it = table.achieved.find(kind);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      row.push_back(cells[i] ? ordered_json(*cells[i]) : ordered_json(nullptr));
      const bool has_achieved = achieved_it != table.achieved.end() && achieved_it->second[i];
      achieved_row.push_back(has_achieved ? ordered_json(*achieved_it->second[i])
                                          : ordered_json(nullptr));
    }
    entries[key] = std::move(row);
    achieved[key] = std::move(achieved_row);
    const auto reason_it = table.reasons.find(kind);
    if (reason_it != table.reasons.end() && !reason_it->second.empty()) {
      ordered_json kind_reasons = ordered_json::object();
      for (const auto& [index, reason] : reason_it->second) {
        kind_reasons[format_number(table.targets.at(index))] = reason;
      }
      reasons[key] = std::move(kind_reasons);
    }
  }
  ordered_json doc{
      {"ssim_params", detail::to_json(table.ssim_params)},
      {"corpus", {{"id", table.corpus_id}, {"size", table.corpus_size}, {"seed", table.seed.value}}},
      {"targets", table.targets},
      {"entries", std::move(entries)},
      {"reasons", std::move(reasons)},
      {"achieved_mssim", std::move(achieved)},
      {"method", to_string(table.method)},
      {"tol", table.tol},
  };
  return doc.dump(2) + "\n";
}

LookupTable lookup_from_json(std::string_view text) {
  try {
    const auto doc = ordered_json::parse(text);
    LookupTable table;
    table.ssim_params = detail::ssim_params_from_json(doc.at("ssim_params"));
    const auto& corpus = doc.at("corpus");
    table.corpus_id = corpus.at("id").get<std::string>();
    table.corpus_size = corpus.at("size").get<std::size_t>();
    table.seed = Seed{corpus.at("seed").get<std::uint64_t>()};
    table.targets = doc.at("targets").get<std::vector<double>>();
    const auto method = doc.at("method").get<std::string>();
    if (method == "fit") {
      table.method = CalibrationMethod::kFit;
    } else if (method == "bisect") {
      table.method = CalibrationMethod::kBisect;
    } else {
      throw Error(ErrorCode::kCorruptData, "unknown calibration method '" + method + "'");
    }
    if (doc.contains("tol")) table.tol = doc.at("tol").get<double>();

    auto read_row = [&](const ordered_json& row) {
      if (!row.is_array() || row.size() != table.targets.size()) {
        throw Error(ErrorCode::kCorruptData, "lookup row length does not match targets");
      }
      std::vector<std::optional<double>> cells;
      for (const auto& cell : row) {
        cells.push_back(cell.is_null() ? std::nullopt : std::optional<double>(cell.get<double>()));
      }
      return cells;
    };
    for (const auto& [key, row] : doc.at("entries").items()) {
      const auto kind = parse_noise_kind(key);
      if (!kind) throw Error(ErrorCode::kCorruptData, "unknown noise kind '" + key + "'");
      table.kinds.push_back(*kind);
      table.entries[*kind] = read_row(row);
    }
    if (doc.contains("achieved_mssim")) {
      for (const auto& [key, row] : doc.at("achieved_mssim").items()) {
        if (const auto kind = parse_noise_kind(key)) table.achieved[*kind] = read_row(row);
      }
    }
    if (doc.contains("reasons")) {
      for (const auto& [key, reasons] : doc.at("reasons").items()) {
        const auto kind = parse_noise_kind(key);
        if (!kind) continue;
        for (const auto& [target, reason] : reasons.items()) {
          const double t = std::stod(target);
          for (std::size_t i = 0; i < table.targets.size(); ++i) {
            if (std::abs(table.targets[i] - t) < 1e-12) {
              table.reasons[*kind][i] = reason.get<std::string>();
            }
          }
        }
      }
    }
    return table;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kCorruptData, std::string("malformed lookup table: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw Error(ErrorCode::kCorruptData, "malformed target key in lookup reasons");
  }
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCode::kIo, "write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot move " + tmp.string() + " into place: " + ec.message());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace noisecal
