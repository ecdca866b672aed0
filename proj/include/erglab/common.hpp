#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace erglab {

using u64 = std::uint64_t;
using i128 = __int128;

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// Exact-rational denominators outgrew the configured bit cap.
struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An excursion did not return within the configured step cap.
struct EscapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnsupportedError : std::logic_error {
  using std::logic_error::logic_error;
};

struct InconclusiveError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string to_string(i128 v);

}  // namespace erglab
