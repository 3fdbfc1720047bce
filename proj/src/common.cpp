#include "quantx/common.hpp"

namespace quantx {

int exit_code_for(Errc code) noexcept {
  switch (code) {
    case Errc::negative_entry:
    case Errc::zero_mass:
    case Errc::sum_out_of_tolerance:
    case Errc::empty_input:
    case Errc::length_mismatch:
    case Errc::non_positive_epsilon:
    case Errc::not_a_density:
    case Errc::bad_spec:
    case Errc::bad_config:
      return exit_config;
    case Errc::missing_class:
    case Errc::empty_source:
    case Errc::empty_dataset:
    case Errc::empty_bag:
    case Errc::degenerate_data:
    case Errc::degenerate_labels:
    case Errc::too_few_instances:
    case Errc::class_absent:
    case Errc::not_binary:
    case Errc::dimension_mismatch:
    case Errc::zero_train_prior:
    case Errc::missing_file:
    case Errc::malformed_row:
    case Errc::prevalence_off_simplex:
    case Errc::io_error:
      return exit_data;
    case Errc::non_finite_loss:
    case Errc::internal:
      return exit_runtime;
  }
  return exit_runtime;
}

}  // namespace quantx
