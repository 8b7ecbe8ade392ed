#pragma once

#include <stdexcept>
#include <string>

namespace ata {

enum class Errc {
  shape_mismatch,
  unsplittable,
  workspace_undersized,
  unsupported_size,
  unknown_process,
  too_many_workers,
  protocol_error,
  invalid_measurement,
  io_error,
  invalid_argument,
};

constexpr const char* to_string(Errc code) {
  switch (code) {
    case Errc::shape_mismatch: return "shape mismatch";
    case Errc::unsplittable: return "unsplittable";
    case Errc::workspace_undersized: return "workspace undersized";
    case Errc::unsupported_size: return "unsupported size";
    case Errc::unknown_process: return "unknown process";
    case Errc::too_many_workers: return "too many workers";
    case Errc::protocol_error: return "protocol error";
    case Errc::invalid_measurement: return "invalid measurement";
    case Errc::io_error: return "io error";
    case Errc::invalid_argument: return "invalid argument";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace ata
