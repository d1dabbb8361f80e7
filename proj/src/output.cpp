#include "rimlab/output.hpp"

#include <cstdio>

#include "rimlab/rng.hpp"
#include "rimlab/version.hpp"

namespace rimlab {

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv_preamble(std::ostream& os, const RunMeta& meta) {
  os << "# format=1\n";
  os << "# tool=" << kToolName << " " << kVersion << "\n";
  os << "# command=" << meta.command << "\n";
  for (const auto& [k, v] : meta.params) os << "# " << k << "=" << v << "\n";
  if (meta.has_seed) os << "# seed=" << meta.seed << " rng=" << kRngAlgorithm << "\n";
  os << "# threads=" << meta.threads << "\n";
  os << "# runtime_seconds=" << format_full(meta.runtime_seconds) << "\n";
}

namespace {

void write_header(std::ostream& os, const std::vector<std::string>& columns) {
  for (std::size_t c = 0; c < columns.size(); ++c)
    os << columns[c] << (c + 1 < columns.size() ? "," : "\n");
}

}  // namespace

void write_csv(std::ostream& os, const RunMeta& meta,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows) {
  write_csv_preamble(os, meta);
  write_header(os, columns);
  for (const auto& row : rows)
    for (std::size_t c = 0; c < row.size(); ++c)
      os << format_full(row[c]) << (c + 1 < row.size() ? "," : "\n");
}

void write_csv(std::ostream& os, const RunMeta& meta,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<std::string>>& rows) {
  write_csv_preamble(os, meta);
  write_header(os, columns);
  for (const auto& row : rows)
    for (std::size_t c = 0; c < row.size(); ++c)
      os << row[c] << (c + 1 < row.size() ? "," : "\n");
}

nlohmann::json meta_json(const RunMeta& meta) {
  nlohmann::json j;
  j["format"] = 1;
  j["tool"] = kToolName;
  j["version"] = kVersion;
  j["command"] = meta.command;
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [k, v] : meta.params) params[k] = v;
  j["params"] = params;
  if (meta.has_seed) {
    j["seed"] = meta.seed;
    j["rng"] = kRngAlgorithm;
  }
  j["threads"] = meta.threads;
  j["runtime_seconds"] = meta.runtime_seconds;
  return j;
}

}  // namespace rimlab
