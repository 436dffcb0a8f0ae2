#pragma once

#include <stdexcept>
#include <string>

namespace gifs {

// Error classes map one-to-one onto CLI exit statuses (see tools/).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DisconnectionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InternalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace gifs
