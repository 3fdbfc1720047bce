#ifndef QUANTX_HARNESS_LEQUA_HPP
#define QUANTX_HARNESS_LEQUA_HPP

#include <filesystem>
#include <optional>

#include "quantx/dataset.hpp"
#include "quantx/sampling.hpp"

namespace quantx {

/// Competition-style directory layout:
///   training_data.csv            rows: label,f_0,...,f_{d-1}
///   dev_samples/<id>.csv         one bag per file, rows: f_0,...,f_{d-1}
///   dev_prevalences.csv          rows: id,p_0,...,p_{l-1}
///   test_samples/<id>.csv
///   test_prevalences.csv         optional
/// An optional manifest.json in the directory remaps any of these roles to
/// other relative paths ("training_data", "dev_samples", "dev_prevalences",
/// "test_samples", "test_prevalences").
struct LequaData {
  LabeledDataset train;
  BagDataset dev;
  std::vector<Bag> test_bags;
  std::vector<Prevalence> test_prevalences;  // empty when the file is absent
};

LequaData load_lequa(const std::filesystem::path& dir);

/// Writes one labeled dataset in the training_data.csv layout.
void save_labeled_csv(const LabeledDataset& data, const std::filesystem::path& path);

/// Reads a labeled dataset back; the class count is one past the top label
/// unless a larger count is forced.
LabeledDataset load_labeled_csv(const std::filesystem::path& path, int n_classes = 0);

/// Reads one bag file (feature rows only).
Bag load_bag_csv(const std::filesystem::path& path);

/// Writes bags + prevalences under `dir` as `<role>_samples/<id>.csv` and
/// `<role>_prevalences.csv`, byte-deterministic for identical input.
void save_bagset(const BagDataset& bags, const std::filesystem::path& dir,
                 const std::string& role);

/// Loads `<role>_samples` + `<role>_prevalences.csv` back into a bag dataset.
BagDataset load_bagset(const std::filesystem::path& dir, const std::string& role);

}  // namespace quantx

#endif
