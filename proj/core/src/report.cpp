// Copyright 2026 The REED Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "reed/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "reed/checkpoint.hpp"

namespace reed {
namespace {

using nlohmann::ordered_json;

const char* kCsvHeader = "variant,checkpoint,metric,mean,std";

// Six significant digits; non-finite values become null.
ordered_json num(double v) {
  if (!std::isfinite(v)) return nullptr;
  return std::stod(format_sig6(v));
}

double from_num(const nlohmann::json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void csv_rows(std::string& out, const std::string& variant, const MetricReport& r) {
  for (const auto& row : r.rows)
    for (Metric m : kAllMetrics)
      out += csv_field(variant) + "," + std::to_string(row.checkpoint) + "," + to_string(m) + "," +
             format_sig6(row[m].mean) + "," + format_sig6(row[m].std) + "\n";
}

ordered_json report_json(const MetricReport& r) {
  ordered_json j;
  j["model"] = r.model;
  j["latent_mode"] = r.latent_mode;
  j["smoothing"] = r.smoothing;
  j["notes"] = r.notes;
  j["image_count"] = r.image_count;
  j["rows"] = ordered_json::array();
  for (const auto& row : r.rows) {
    ordered_json jr;
    jr["checkpoint"] = row.checkpoint;
    for (Metric m : kAllMetrics) {
      const auto& s = row[m];
      jr["metrics"][to_string(m)] = {{"mean", num(s.mean)}, {"std", num(s.std)}, {"min", num(s.min)},
                                     {"max", num(s.max)}};
    }
    j["rows"].push_back(jr);
  }
  return j;
}

MetricReport report_from_json(const nlohmann::json& j) {
  MetricReport r;
  r.model = j.at("model").get<std::string>();
  r.latent_mode = j.at("latent_mode").get<std::string>();
  r.smoothing = j.at("smoothing").get<std::string>();
  r.notes = j.at("notes").get<std::string>();
  r.image_count = j.at("image_count").get<int>();
  for (const auto& jr : j.at("rows")) {
    CheckpointMetrics row;
    row.checkpoint = jr.at("checkpoint").get<int>();
    for (Metric m : kAllMetrics) {
      const auto& s = jr.at("metrics").at(to_string(m));
      row[m] = {from_num(s.at("mean")), from_num(s.at("std")), from_num(s.at("min")), from_num(s.at("max"))};
    }
    r.rows.push_back(row);
  }
  return r;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  try {
    atomic_write(path, text);
  } catch (const IoError&) {
    throw IoError("cannot write report " + path.string());
  }
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read report " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ReportError("malformed report " + path.string() + ": " + e.what());
  }
}

}  // namespace

std::string format_sig6(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

ReportFormat parse_report_format(const std::string& text) {
  if (text == "csv") return ReportFormat::kCsv;
  if (text == "json") return ReportFormat::kJson;
  throw ConfigError("unknown report format '" + text + "' (expected csv or json)");
}

void write_report(const MetricReport& report, const std::filesystem::path& path, ReportFormat format) {
  if (format == ReportFormat::kJson) return write_text(path, report_json(report).dump(2) + "\n");
  std::string out = std::string(kCsvHeader) + "\n";
  csv_rows(out, report.model, report);
  write_text(path, out);
}

void write_report(const AblationReport& report, const std::filesystem::path& path, ReportFormat format) {
  if (format == ReportFormat::kJson) {
    ordered_json j;
    j["checkpoints"] = report.eval.checkpoints;
    j["latent_mode"] = report.eval.latent_mode.str();
    j["smoothing"] = report.eval.smoothing_label();
    j["variants"] = ordered_json::array();
    for (const auto& v : report.variants) {
      ordered_json jv;
      jv["name"] = v.name;
      jv["ok"] = v.ok;
      jv["error"] = v.error;
      jv["init_checksum"] = hex64(v.init_checksum);
      if (v.ok) {
        jv["epochs"] = v.log.epochs.size();
        jv["final_k"] = v.log.epochs.empty() ? 0 : v.log.epochs.back().k;
        jv["report"] = report_json(v.report);
      }
      j["variants"].push_back(jv);
    }
    return write_text(path, j.dump(2) + "\n");
  }
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& v : report.variants)
    if (v.ok) csv_rows(out, v.name, v.report);
  write_text(path, out);
}

void write_report(const ComparisonTable& t, const std::filesystem::path& path, ReportFormat format) {
  if (format == ReportFormat::kJson) {
    ordered_json j;
    j["models"] = t.models;
    j["checkpoints"] = t.checkpoints;
    j["cells"] = ordered_json::array();
    for (Metric m : kAllMetrics)
      for (std::size_t c = 0; c < t.checkpoints.size(); ++c)
        for (std::size_t i = 0; i < t.models.size(); ++i) {
          const auto& cell = t.cell(m, c, i);
          j["cells"].push_back({{"variant", t.models[i]},
                                {"checkpoint", t.checkpoints[c]},
                                {"metric", to_string(m)},
                                {"value", num(cell.value)},
                                {"ratio", num(cell.ratio)},
                                {"best", cell.best},
                                {"tie", cell.tie}});
        }
    return write_text(path, j.dump(2) + "\n");
  }
  std::string out = std::string(kCsvHeader) + ",ratio,best,tie\n";
  for (std::size_t i = 0; i < t.models.size(); ++i)
    for (std::size_t c = 0; c < t.checkpoints.size(); ++c)
      for (Metric m : kAllMetrics) {
        const auto& cell = t.cell(m, c, i);
        out += csv_field(t.models[i]) + "," + std::to_string(t.checkpoints[c]) + "," + to_string(m) + "," +
               format_sig6(cell.value) + ",," + format_sig6(cell.ratio) + "," + (cell.best ? "1" : "0") + "," +
               (cell.tie ? "1" : "0") + "\n";
      }
  write_text(path, out);
}

MetricReport read_metric_report_json(const std::filesystem::path& path) {
  const auto j = read_json(path);
  try {
    return report_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw ReportError("malformed report " + path.string() + ": " + e.what());
  }
}

AblationReport read_ablation_report_json(const std::filesystem::path& path) {
  const auto j = read_json(path);
  AblationReport out;
  try {
    out.eval.checkpoints = j.at("checkpoints").get<std::vector<int>>();
    for (const auto& jv : j.at("variants")) {
      VariantResult v;
      v.name = jv.at("name").get<std::string>();
      v.ok = jv.at("ok").get<bool>();
      v.error = jv.at("error").get<std::string>();
      v.init_checksum = std::stoull(jv.at("init_checksum").get<std::string>(), nullptr, 16);
      if (v.ok) v.report = report_from_json(jv.at("report"));
      out.variants.push_back(std::move(v));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ReportError("malformed ablation report " + path.string() + ": " + e.what());
  }
  return out;
}

}  // namespace reed
