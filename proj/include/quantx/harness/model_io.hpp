#ifndef QUANTX_HARNESS_MODEL_IO_HPP
#define QUANTX_HARNESS_MODEL_IO_HPP

#include <filesystem>
#include <memory>

#include "quantx/aggregative.hpp"
#include "quantx/neural/network.hpp"

namespace quantx {

/// A trained quantifier of any family, tagged by its method name
/// (cc, pcc, acc, pacc, emq, emq-bcts, hdy, histnet-*, deepsets-*).
struct QuantModel {
  std::string kind;
  int n_classes = 0;
  std::unique_ptr<AggregativeQuantifier> aggregative;
  std::unique_ptr<QuantNetwork> network;

  Prevalence quantify(const Bag& bag) const;
};

/// One JSON document per model, schema-versioned, floats at round-trip
/// precision. The layout is documented in docs/model-schema.md.
void save_model(const QuantModel& model, const std::filesystem::path& path);
QuantModel load_model(const std::filesystem::path& path);

}  // namespace quantx

#endif
