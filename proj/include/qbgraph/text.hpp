#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

namespace qbg {

/// Shortest "%.{p}g" rendering that parses back to the same double.
inline std::string fmt_num(double x) {
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

/// Fixed 12 significant digits; used for CSV payload columns.
inline std::string fmt_val(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

template <class T, class F>
std::string join(const std::vector<T>& xs, const std::string& sep, F&& f) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += sep;
    out += f(xs[i]);
  }
  return out;
}

}  // namespace qbg
