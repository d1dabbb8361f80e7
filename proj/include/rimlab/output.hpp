#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace rimlab {

// Provenance block embedded in every artifact a command writes: tool version,
// full parameter set, seed and generator when randomness was used, and the
// wall-clock runtime of the computation.
struct RunMeta {
  std::string command;
  std::vector<std::pair<std::string, std::string>> params;
  bool has_seed = false;
  std::uint64_t seed = 0;
  int threads = 1;
  double runtime_seconds = 0.0;
};

// Shortest representation that round-trips a double (17 significant digits).
std::string format_full(double v);

// CSV layout: a "# format=1" line, then "# key=value" metadata comments, then
// the header row and the data rows.
void write_csv_preamble(std::ostream& os, const RunMeta& meta);
void write_csv(std::ostream& os, const RunMeta& meta,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows);
// Variant for tables with non-numeric cells; the caller formats every cell.
void write_csv(std::ostream& os, const RunMeta& meta,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<std::string>>& rows);

// The same capsule as a JSON object, for summary files; callers attach their
// payload next to the "meta" entry.
nlohmann::json meta_json(const RunMeta& meta);

}  // namespace rimlab
