#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tabfuse {

/// Raised on malformed inputs: bad files, duplicate ids, schema violations.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Raised on invalid run configurations (missing paths, incompatible resolvers, ...).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Raised when the oracle transport or contract handling fails.
class OracleError : public std::runtime_error {
 public:
  explicit OracleError(const std::string& msg, std::string raw = {})
      : std::runtime_error(msg), raw_reply(std::move(raw)) {}
  std::string raw_reply;
};

/// Raised when the configured currency budget would be exceeded.
class BudgetExhausted : public OracleError {
 public:
  explicit BudgetExhausted(const std::string& msg) : OracleError(msg) {}
};

inline constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

inline std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = kFnvOffset) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

/// 128-bit stable content digest rendered as 32 hex chars. Not cryptographic;
/// used for cache keys and deterministic mock behaviour, stable across
/// platforms and process restarts.
std::string stable_digest(std::string_view data);

}  // namespace tabfuse
