#pragma once

#include <charconv>
#include <cstdint>
#include <functional>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fgpc/errors.hpp"

namespace fgpc::cli {

// Exit contract: 0 success, 2 usage/data error, 3 numerical error.
constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

inline int run_guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

/// Shortest decimal that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::vector<long> parse_int_list(const std::string& text,
                                        const std::string& flag) {
  std::vector<long> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t pos = text.find(',', start);
    const std::string item =
        text.substr(start, pos == std::string::npos ? pos : pos - start);
    long value = 0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), value);
    if (res.ec != std::errc() || res.ptr != item.data() + item.size()) {
      throw std::invalid_argument(flag + ": cannot parse integer '" + item + "'");
    }
    out.push_back(value);
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  if (out.empty()) {
    throw std::invalid_argument(flag + ": empty list");
  }
  return out;
}

}  // namespace fgpc::cli
