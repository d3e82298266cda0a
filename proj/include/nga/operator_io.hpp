#pragma once

// Text format for Fourier operators:
//
//   <m> <D> <basis_tag>
//   <sigma_1>,...,<sigma_D> : <coefficient>
//   ...
//
// Blank lines and lines starting with '#' are ignored. Coefficients are
// written with 17 significant digits so a write/read cycle is lossless.

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "nga/error.hpp"
#include "nga/fourier.hpp"

namespace nga {

namespace io_detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline bool skippable(const std::string& line) {
  const std::string t = trim(line);
  return t.empty() || t[0] == '#';
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& token, int line_no) {
  const std::string t = trim(token);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (t.empty() || used != t.size()) {
    throw error(errc::parse_error, "line " + std::to_string(line_no) + ": bad number '" + t + "'");
  }
  return v;
}

template <class Int>
inline Int parse_int(const std::string& token, int line_no) {
  const std::string t = trim(token);
  Int v{};
  const auto* first = t.data();
  const auto* last = t.data() + t.size();
  if (!t.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (t.empty() || ec != std::errc() || ptr != last) {
    throw error(errc::parse_error, "line " + std::to_string(line_no) + ": bad integer '" + t + "'");
  }
  return v;
}

inline std::vector<int> parse_sigma(const std::string& token, int line_no) {
  std::vector<int> out;
  std::stringstream ss(trim(token));
  std::string part;
  while (std::getline(ss, part, ',')) out.push_back(parse_int<int>(part, line_no));
  return out;
}

inline std::string format_sigma(const MultiIndex& sigma) {
  std::string out;
  for (int i = 0; i < sigma.registers(); ++i) {
    if (i) out += ',';
    out += std::to_string(sigma[static_cast<std::size_t>(i)]);
  }
  return out;
}

}  // namespace io_detail

inline void write_operator(std::ostream& os, const FourierOperator& op) {
  os << op.m() << ' ' << op.registers() << ' ' << op.basis_tag() << '\n';
  for (const auto& [key, v] : op.coefficients()) {
    os << io_detail::format_sigma(op.codec().unpack(key)) << " : " << io_detail::format_double(v)
       << '\n';
  }
}

inline FourierOperator read_operator(std::istream& is) {
  std::string line;
  int line_no = 0;
  bool have_header = false;
  FourierOperator op;
  while (std::getline(is, line)) {
    ++line_no;
    if (io_detail::skippable(line)) continue;
    if (!have_header) {
      std::istringstream hs(line);
      int m = 0, d = 0;
      std::string tag, extra;
      if (!(hs >> m >> d >> tag) || (hs >> extra)) {
        throw error(errc::parse_error, "line " + std::to_string(line_no) +
                                           ": header must be '<m> <D> <basis_tag>'");
      }
      try {
        op = FourierOperator(m, d, tag);
      } catch (const error& e) {
        throw error(errc::parse_error, "line " + std::to_string(line_no) + ": " + e.what());
      }
      have_header = true;
      continue;
    }
    const auto colon = line.find(':');
    if (colon == std::string::npos) {
      throw error(errc::parse_error,
                  "line " + std::to_string(line_no) + ": expected '<sigma> : <coefficient>'");
    }
    const std::vector<int> sigma = io_detail::parse_sigma(line.substr(0, colon), line_no);
    const double v = io_detail::parse_double(line.substr(colon + 1), line_no);
    try {
      const std::uint64_t key = op.codec().pack(MultiIndex(sigma));
      if (op.coefficients().count(key)) {
        throw error(errc::parse_error, "duplicate multi-index");
      }
      op.set(key, v);
    } catch (const error& e) {
      throw error(errc::parse_error, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!have_header) throw error(errc::parse_error, "missing operator header");
  return op;
}

}  // namespace nga
