#pragma once

#include <stdexcept>
#include <string>

namespace nga {

enum class errc {
  invalid_dimension,
  invalid_index,
  invalid_parameter,
  invalid_input,
  invalid_state,
  size_limit,
  basis_mismatch,
  shape_mismatch,
  not_noisy,
  unsupported_degree,
  field_size,
  enumeration_limit,
  normalization,
  degenerate_degree,
  parse_error,
};

inline const char* errc_name(errc code) noexcept {
  switch (code) {
    case errc::invalid_dimension: return "invalid-dimension";
    case errc::invalid_index: return "invalid-index";
    case errc::invalid_parameter: return "invalid-parameter";
    case errc::invalid_input: return "invalid-input";
    case errc::invalid_state: return "invalid-state";
    case errc::size_limit: return "size-limit";
    case errc::basis_mismatch: return "basis-mismatch";
    case errc::shape_mismatch: return "mismatch";
    case errc::not_noisy: return "not-noisy";
    case errc::unsupported_degree: return "unsupported-degree";
    case errc::field_size: return "field-size";
    case errc::enumeration_limit: return "enumeration-limit";
    case errc::normalization: return "normalization";
    case errc::degenerate_degree: return "degenerate-degree";
    case errc::parse_error: return "parse-error";
  }
  return "unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map them to exit statuses.
class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

}  // namespace nga
