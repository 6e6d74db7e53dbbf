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

#pragma once

#include <filesystem>
#include <string>

#include "reed/eval.hpp"

namespace reed {

enum class ReportFormat { kCsv, kJson };

ReportFormat parse_report_format(const std::string& text);

// CSV columns: variant, checkpoint, metric, mean, std. Numbers carry six
// significant digits in both formats. Comparison tables add ratio, best
// and tie columns.
void write_report(const MetricReport& report, const std::filesystem::path& path, ReportFormat format);
void write_report(const AblationReport& report, const std::filesystem::path& path, ReportFormat format);
void write_report(const ComparisonTable& table, const std::filesystem::path& path, ReportFormat format);

MetricReport read_metric_report_json(const std::filesystem::path& path);
// Variants keep name, ok, error and report; logs and models are not stored.
AblationReport read_ablation_report_json(const std::filesystem::path& path);

std::string format_sig6(double v);

}  // namespace reed
