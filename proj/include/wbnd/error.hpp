#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wbnd {

enum class Errc {
  invalid_argument,
  dimension_mismatch,
  image_too_small,
  empty_input,
  missing_file,
  unsupported_format,
  corrupt_header,
  corrupt_data,
  io_failure,
};

std::string_view to_string(Errc code) noexcept;

/// Single exception type for the library; `code()` tells failure classes apart.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace wbnd
