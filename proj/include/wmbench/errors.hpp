#pragma once

#include <stdexcept>
#include <string>

namespace wmb {

// Machine-readable failure categories; the CLI maps each to a distinct
// nonzero exit code.
enum class ErrorCategory {
    Config,    // bad or unknown config key, invalid parameter value
    Io,        // unreadable/unwritable file, bad image payload
    Geometry,  // dimension/channel mismatch between operands
    Capacity,  // watermark payload does not fit the carrier
    Numeric,   // ill-conditioned request (e.g. division blow-up)
    Internal,
};

inline const char* to_string(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::Config: return "config";
        case ErrorCategory::Io: return "io";
        case ErrorCategory::Geometry: return "geometry";
        case ErrorCategory::Capacity: return "capacity";
        case ErrorCategory::Numeric: return "numeric";
        case ErrorCategory::Internal: return "internal";
    }
    return "internal";
}

class Error : public std::runtime_error {
  public:
    Error(ErrorCategory category, const std::string& message)
        : std::runtime_error(message), category_(category) {}

    ErrorCategory category() const { return category_; }

  private:
    ErrorCategory category_;
};

[[noreturn]] inline void fail(ErrorCategory c, const std::string& msg) {
    throw Error(c, msg);
}

}  // namespace wmb
