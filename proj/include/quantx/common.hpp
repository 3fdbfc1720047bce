#ifndef QUANTX_COMMON_HPP
#define QUANTX_COMMON_HPP

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace quantx {

// Every failure the library reports, tagged so callers (and the C API) can
// map it to a coarse category without string matching.
enum class Errc {
  // value / argument problems
  negative_entry,
  zero_mass,
  sum_out_of_tolerance,
  empty_input,
  length_mismatch,
  non_positive_epsilon,
  not_a_density,
  bad_spec,
  bad_config,
  // dataset problems
  missing_class,
  empty_source,
  empty_dataset,
  empty_bag,
  degenerate_data,
  degenerate_labels,
  too_few_instances,
  class_absent,
  not_binary,
  dimension_mismatch,
  zero_train_prior,
  // io problems
  missing_file,
  malformed_row,
  prevalence_off_simplex,
  io_error,
  // runtime problems
  non_finite_loss,
  internal,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

// Process exit categories, also used as C API status codes.
enum ExitCode : int { exit_ok = 0, exit_config = 1, exit_data = 2, exit_runtime = 3 };

int exit_code_for(Errc code) noexcept;

// All stochastic components take an explicit engine so callers control
// determinism; independent streams are derived by reseeding with offsets.
using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  // splitmix64 scramble keeps nearby (seed, stream) pairs decorrelated
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return Rng(z ^ (z >> 31));
}

}  // namespace quantx

#endif
