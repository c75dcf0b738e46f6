#pragma once

// Plain-text run reports and full-precision CSV output.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "nonholo/errors.hpp"
#include "nonholo/system.hpp"

namespace nonholo {
namespace detail {

/// Shortest round-trippable decimal form (17 significant digits).
inline std::string fmt_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// Sectioned key = value text report.  Every numeric line is written at full
/// precision so reports can be diffed across runs.
class ReportWriter {
 public:
  explicit ReportWriter(const std::string& title) {
    out_ << "# " << title << "\n";
  }

  void section(const std::string& name) { out_ << "\n[" << name << "]\n"; }

  void kv(const std::string& key, const std::string& value) {
    out_ << key << " = " << value << "\n";
  }
  void kv(const std::string& key, const char* value) {
    kv(key, std::string(value));
  }
  void kv(const std::string& key, double value) {
    kv(key, detail::fmt_full(value));
  }
  void kv(const std::string& key, std::int64_t value) {
    kv(key, std::to_string(value));
  }
  void kv(const std::string& key, int value) { kv(key, std::int64_t(value)); }
  void kv(const std::string& key, std::uint64_t value) {
    kv(key, std::to_string(value));
  }
  void status(const std::string& key, bool pass) {
    kv(key, pass ? "pass" : "fail");
  }

  std::string str() const { return out_.str(); }

  void write(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot open report file '" + path + "'");
    f << out_.str();
    if (!f.good()) throw ConfigError("failed writing report file '" + path + "'");
  }

 private:
  std::ostringstream out_;
};

/// Streaming CSV writer: one header, then full-precision rows.  Kept flushed
/// so a mid-run failure still leaves the completed samples on disk.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& columns)
      : f_(path) {
    if (!f_) throw ConfigError("cannot open csv file '" + path + "'");
    for (std::size_t i = 0; i < columns.size(); ++i)
      f_ << (i ? "," : "") << columns[i];
    f_ << "\n";
  }

  void row(double t, const Vec& y, const std::vector<double>& obs) {
    f_ << detail::fmt_full(t);
    for (int i = 0; i < y.size(); ++i) f_ << "," << detail::fmt_full(y[i]);
    for (double v : obs) f_ << "," << detail::fmt_full(v);
    f_ << "\n";
    f_.flush();
    if (!f_.good()) throw ConfigError("failed writing csv row");
  }

 private:
  std::ofstream f_;
};

}  // namespace nonholo
