#include "nse/csv.hpp"

#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

namespace nse {

std::string format_float(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.16e", v);
  return buf;
}

struct CsvWriter::Impl {
  std::ofstream out;
  std::size_t columns = 0;
  std::string path;
};

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : impl_(new Impl) {
  impl_->path = path;
  impl_->out.open(path);
  if (!impl_->out) {
    delete impl_;
    throw IoError("cannot open for writing: " + path);
  }
  impl_->columns = header.size();
  for (std::size_t i = 0; i < header.size(); ++i)
    impl_->out << header[i] << (i + 1 < header.size() ? "," : "\n");
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != impl_->columns)
    throw ValidationError("CsvWriter: column count mismatch");
  for (std::size_t i = 0; i < cells.size(); ++i)
    impl_->out << cells[i] << (i + 1 < cells.size() ? "," : "\n");
}

void CsvWriter::close() {
  if (impl_ && impl_->out.is_open()) {
    impl_->out.flush();
    if (!impl_->out) throw IoError("write failed: " + impl_->path);
    impl_->out.close();
  }
}

CsvWriter::~CsvWriter() {
  if (impl_) {
    if (impl_->out.is_open()) impl_->out.close();
    delete impl_;
  }
}

std::string config_hash(const std::string& canonical) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_meta(const std::string& csv_path, const std::string& canonical_config,
                const std::map<std::string, std::string>& entries) {
  nlohmann::ordered_json j;
  j["version"] = "1.0.0";
  j["config_hash"] = config_hash(canonical_config);
  for (const auto& [k, v] : entries) j[k] = v;
  std::string path = csv_path + ".meta.json";
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace nse
