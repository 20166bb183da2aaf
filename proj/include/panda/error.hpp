#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace panda {

enum class Errc {
  address,
  protection,
  configuration,
  shape,
  state,
  placement,
  size,
  capacity,
  range,
  non_eulerian,
  disconnected,
  consistency,
  parse,
};

constexpr std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::address: return "address error";
    case Errc::protection: return "protection error";
    case Errc::configuration: return "configuration error";
    case Errc::shape: return "shape error";
    case Errc::state: return "state error";
    case Errc::placement: return "placement error";
    case Errc::size: return "size error";
    case Errc::capacity: return "capacity error";
    case Errc::range: return "range error";
    case Errc::non_eulerian: return "non-Eulerian graph";
    case Errc::disconnected: return "disconnected graph";
    case Errc::consistency: return "consistency error";
    case Errc::parse: return "parse error";
  }
  return "unknown error";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) { throw Error(code, message); }

}  // namespace panda
