#pragma once

// Text output with locale-independent, round-trippable numbers.

#include <array>
#include <charconv>
#include <cmath>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace dpower {

using Json = nlohmann::ordered_json;

/// Shortest "%.17g"-style rendering; '.' separator regardless of locale.
inline std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x,
                                 std::chars_format::general, 17);
  return std::string(buf.data(), res.ptr);
}

inline const char* format_bool(bool b) { return b ? "true" : "false"; }

namespace detail {

inline void emit_json(const Json& j, std::ostream& os, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
  const char* nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << '{' << nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ',' << nl;
        first = false;
        os << pad << Json(it.key()).dump() << (indent > 0 ? ": " : ":");
        emit_json(it.value(), os, indent, depth + 1);
      }
      os << nl << close_pad << '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      bool flat = true;
      for (const auto& v : j) flat = flat && !v.is_structured();
      os << '[';
      bool first = true;
      for (const auto& v : j) {
        if (!first) os << ',';
        if (!flat) os << nl << pad;
        first = false;
        emit_json(v, os, flat ? 0 : indent, depth + 1);
      }
      if (!flat) os << nl << close_pad;
      os << ']';
      return;
    }
    case Json::value_t::number_float: {
      const double x = j.get<double>();
      if (std::isfinite(x)) {
        std::string s = format_real(x);
        // Keep floats distinguishable from integers after a re-parse.
        if (s.find_first_of(".eE") == std::string::npos) s += ".0";
        os << s;
      } else {
        os << "null";
      }
      return;
    }
    default:
      os << j.dump();
  }
}

}  // namespace detail

/// Serializes with 17-significant-digit floats. Parsing the output and
/// serializing again reproduces it byte for byte.
inline std::string to_json_text(const Json& j, int indent = 2) {
  std::ostringstream os;
  detail::emit_json(j, os, indent, 0);
  return os.str();
}

}  // namespace dpower
