#include "wbnd/error.hpp"

namespace wbnd {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid argument";
    case Errc::dimension_mismatch: return "dimension mismatch";
    case Errc::image_too_small: return "image too small";
    case Errc::empty_input: return "empty input";
    case Errc::missing_file: return "missing file";
    case Errc::unsupported_format: return "unsupported format";
    case Errc::corrupt_header: return "corrupt header";
    case Errc::corrupt_data: return "corrupt data";
    case Errc::io_failure: return "i/o failure";
  }
  return "unknown error";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace wbnd
