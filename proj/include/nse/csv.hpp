#pragma once

#include <map>
#include <string>
#include <vector>

#include "nse/errors.hpp"

namespace nse {

// Scientific notation with 17 significant digits (lossless double round-trip).
std::string format_float(double v);

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& cells);
  void close();
  ~CsvWriter();

 private:
  struct Impl;
  Impl* impl_;
};

// FNV-1a over the canonical config text.
std::string config_hash(const std::string& canonical);

// Sibling .meta.json next to a CSV: version, config hash, tolerances, free-form
// method metadata. Deterministic key order.
void write_meta(const std::string& csv_path, const std::string& canonical_config,
                const std::map<std::string, std::string>& entries);

}  // namespace nse
