#pragma once

#include <stdexcept>
#include <string>

namespace cospect {

enum class errc {
  index_out_of_range,
  word_too_long,
  unsupported_kind,
  not_symmetric,
  not_lazy,
  not_a_permutation,
  not_a_subrelation,
  not_in_full_group,
  not_saturated,
  empty_set,
  ball_too_large,
  support_mismatch,
  window_too_short,
  zero_probability_in_window,
  r_too_small,
  not_unitary,
  not_lambda_fixed,
  unsorted_levels,
  invalid_argument,
  config_error,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::index_out_of_range: return "IndexOutOfRange";
    case errc::word_too_long: return "WordTooLong";
    case errc::unsupported_kind: return "UnsupportedKind";
    case errc::not_symmetric: return "NotSymmetric";
    case errc::not_lazy: return "NotLazy";
    case errc::not_a_permutation: return "NotAPermutation";
    case errc::not_a_subrelation: return "NotASubrelation";
    case errc::not_in_full_group: return "NotInFullGroup";
    case errc::not_saturated: return "NotSaturated";
    case errc::empty_set: return "EmptySet";
    case errc::ball_too_large: return "BallTooLarge";
    case errc::support_mismatch: return "SupportMismatch";
    case errc::window_too_short: return "WindowTooShort";
    case errc::zero_probability_in_window: return "ZeroProbabilityInWindow";
    case errc::r_too_small: return "RTooSmall";
    case errc::not_unitary: return "NotUnitary";
    case errc::not_lambda_fixed: return "NotLambdaFixed";
    case errc::unsorted_levels: return "UnsortedLevels";
    case errc::invalid_argument: return "InvalidArgument";
    case errc::config_error: return "ConfigError";
  }
  return "UnknownError";
}

class error : public std::runtime_error {
public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  errc code() const { return code_; }

private:
  errc code_;
};

[[noreturn]] inline void raise(errc code, const std::string& what) { throw error(code, what); }

inline void require(bool cond, errc code, const std::string& what) {
  if (!cond) raise(code, what);
}

}  // namespace cospect
