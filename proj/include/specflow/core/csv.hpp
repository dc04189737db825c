#pragma once

#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include "specflow/core/error.hpp"

namespace specflow {

/// Round-trip text form of a double: 17 significant digits.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, std::initializer_list<const char*> header) : out_(path) {
    if (!out_) throw Error(ErrorCode::Io, "cannot write " + path);
    bool first = true;
    for (const char* h : header) {
      if (!first) out_ << ',';
      out_ << h;
      first = false;
    }
    out_ << '\n';
  }

  void row(std::initializer_list<double> values) {
    bool first = true;
    for (double v : values) {
      if (!first) out_ << ',';
      out_ << format_double(v);
      first = false;
    }
    out_ << '\n';
  }

  // Integer-valued leading column (step/index), then doubles.
  void row(long long lead, std::initializer_list<double> values) {
    out_ << lead;
    for (double v : values) out_ << ',' << format_double(v);
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

}  // namespace specflow
