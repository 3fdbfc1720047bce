#include "quantx/harness/lequa.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "json.hpp"
#include "quantx/harness/csv.hpp"

namespace quantx {

namespace fs = std::filesystem;

namespace {

struct Roles {
  fs::path training_data;
  fs::path dev_samples;
  fs::path dev_prevalences;
  fs::path test_samples;
  fs::path test_prevalences;
};

Roles resolve_roles(const fs::path& dir) {
  Roles roles{dir / "training_data.csv", dir / "dev_samples", dir / "dev_prevalences.csv",
              dir / "test_samples", dir / "test_prevalences.csv"};
  const fs::path manifest = dir / "manifest.json";
  if (fs::exists(manifest)) {
    std::ifstream in(manifest);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const std::exception& e) {
      fail(Errc::bad_config, manifest.string() + ": " + e.what());
    }
    auto remap = [&](const char* key, fs::path& slot) {
      if (j.contains(key)) slot = dir / j.at(key).get<std::string>();
    };
    remap("training_data", roles.training_data);
    remap("dev_samples", roles.dev_samples);
    remap("dev_prevalences", roles.dev_prevalences);
    remap("test_samples", roles.test_samples);
    remap("test_prevalences", roles.test_prevalences);
  }
  return roles;
}

// sample files are named <id>.csv; ids must be dense 0..n-1 after sorting
std::vector<fs::path> sample_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) fail(Errc::missing_file, dir.string() + " is not a directory");
  std::vector<std::pair<long, fs::path>> found;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
    const std::string stem = entry.path().stem().string();
    char* tail = nullptr;
    const long id = std::strtol(stem.c_str(), &tail, 10);
    if (tail == stem.c_str() || *tail != '\0')
      fail(Errc::malformed_row, entry.path().string() + ": sample file name is not an integer id");
    found.emplace_back(id, entry.path());
  }
  if (found.empty()) fail(Errc::missing_file, dir.string() + " holds no sample files");
  std::sort(found.begin(), found.end());
  std::vector<fs::path> out;
  for (std::size_t i = 0; i < found.size(); ++i) {
    if (found[i].first != static_cast<long>(i))
      fail(Errc::malformed_row, dir.string() + ": sample ids are not dense from 0");
    out.push_back(found[i].second);
  }
  return out;
}

Prevalence prevalence_from_row(const std::vector<double>& row, std::size_t offset,
                               const fs::path& file, std::size_t line_no) {
  std::vector<double> values(row.begin() + static_cast<std::ptrdiff_t>(offset), row.end());
  try {
    return make_prevalence(values);
  } catch (const Error&) {
    fail(Errc::prevalence_off_simplex,
         file.string() + ":" + std::to_string(line_no) + ": prevalence row is not on the simplex");
  }
}

std::vector<Prevalence> load_prevalence_file(const fs::path& path, std::size_t expected_rows) {
  auto rows = read_numeric_csv(path);
  if (rows.size() != expected_rows)
    fail(Errc::malformed_row, path.string() + ": expected " + std::to_string(expected_rows) +
                                  " prevalence rows, found " + std::to_string(rows.size()));
  std::vector<Prevalence> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() < 2)
      fail(Errc::malformed_row, path.string() + ": prevalence rows need id plus class columns");
    if (std::llround(rows[i][0]) != static_cast<long long>(i))
      fail(Errc::malformed_row, path.string() + ": prevalence ids must be dense from 0");
    out.push_back(prevalence_from_row(rows[i], 1, path, i + 1));
  }
  return out;
}

}  // namespace

LabeledDataset load_labeled_csv(const fs::path& path, int n_classes) {
  auto rows = read_numeric_csv(path);
  if (rows.empty()) fail(Errc::empty_dataset, path.string() + " holds no instances");
  const std::size_t width = rows.front().size();
  if (width < 2) fail(Errc::malformed_row, path.string() + ": rows need a label and features");
  Matrix x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width - 1));
  std::vector<int> y(rows.size());
  int top = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double label = rows[i][0];
    if (label < 0 || label != std::floor(label))
      fail(Errc::malformed_row,
           path.string() + ":" + std::to_string(i + 1) + ": label must be a non-negative integer");
    y[i] = static_cast<int>(label);
    top = std::max(top, y[i]);
    for (std::size_t j = 1; j < width; ++j)
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j - 1)) = rows[i][j];
  }
  return LabeledDataset(std::move(x), std::move(y), std::max(n_classes, top + 1));
}

void save_labeled_csv(const LabeledDataset& data, const fs::path& path) {
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(data.size()));
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    auto& row = rows[static_cast<std::size_t>(i)];
    row.push_back(static_cast<double>(data.labels()[static_cast<std::size_t>(i)]));
    for (Eigen::Index j = 0; j < data.dim(); ++j) row.push_back(data.instances()(i, j));
  }
  std::string header = "label";
  for (Eigen::Index j = 0; j < data.dim(); ++j) header += ",f_" + std::to_string(j);
  write_numeric_csv(path, header, rows);
}

Bag load_bag_csv(const fs::path& path) {
  auto rows = read_numeric_csv(path);
  if (rows.empty()) fail(Errc::empty_bag, path.string() + " holds no instances");
  Matrix x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return Bag(std::move(x));
}

LequaData load_lequa(const fs::path& dir) {
  if (!fs::is_directory(dir)) fail(Errc::missing_file, dir.string() + " is not a directory");
  const Roles roles = resolve_roles(dir);
  if (!fs::exists(roles.training_data))
    fail(Errc::missing_file, roles.training_data.string() + " is missing");

  LabeledDataset train = load_labeled_csv(roles.training_data);

  auto dev_files = sample_files(roles.dev_samples);
  std::vector<Bag> dev_bags;
  dev_bags.reserve(dev_files.size());
  for (const auto& f : dev_files) dev_bags.push_back(load_bag_csv(f));
  if (!fs::exists(roles.dev_prevalences))
    fail(Errc::missing_file, roles.dev_prevalences.string() + " is missing");
  std::vector<Prevalence> dev_prevs = load_prevalence_file(roles.dev_prevalences, dev_bags.size());
  const int l = static_cast<int>(dev_prevs.front().size());
  if (train.n_classes() > l)
    fail(Errc::malformed_row, "training labels exceed the prevalence class count");
  LabeledDataset train_fixed(train.instances(), train.labels(), l);

  auto test_files = sample_files(roles.test_samples);
  std::vector<Bag> test_bags;
  test_bags.reserve(test_files.size());
  for (const auto& f : test_files) test_bags.push_back(load_bag_csv(f));
  std::vector<Prevalence> test_prevs;
  if (fs::exists(roles.test_prevalences))
    test_prevs = load_prevalence_file(roles.test_prevalences, test_bags.size());

  return LequaData{std::move(train_fixed),
                   BagDataset(std::move(dev_bags), std::move(dev_prevs), l),
                   std::move(test_bags), std::move(test_prevs)};
}

void save_bagset(const BagDataset& bags, const fs::path& dir, const std::string& role) {
  std::error_code ec;
  fs::create_directories(dir / (role + "_samples"), ec);
  if (ec) fail(Errc::io_error, "cannot create " + (dir / (role + "_samples")).string());

  const Eigen::Index d = bags.size() ? bags.bag(0).dim() : 0;
  std::string feature_header;
  for (Eigen::Index j = 0; j < d; ++j)
    feature_header += (j ? ",f_" : "f_") + std::to_string(j);

  std::vector<std::vector<double>> prev_rows;
  for (std::size_t i = 0; i < bags.size(); ++i) {
    const Bag& bag = bags.bag(i);
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(bag.size()));
    for (Eigen::Index r = 0; r < bag.size(); ++r) {
      rows[static_cast<std::size_t>(r)].resize(static_cast<std::size_t>(bag.dim()));
      for (Eigen::Index c = 0; c < bag.dim(); ++c)
        rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = bag.instances()(r, c);
    }
    write_numeric_csv(dir / (role + "_samples") / (std::to_string(i) + ".csv"), feature_header,
                      rows);
    std::vector<double> prow{static_cast<double>(i)};
    for (std::size_t c = 0; c < bags.prevalence(i).size(); ++c)
      prow.push_back(bags.prevalence(i)[c]);
    prev_rows.push_back(std::move(prow));
  }
  std::string prev_header = "id";
  for (int c = 0; c < bags.n_classes(); ++c) prev_header += ",p_" + std::to_string(c);
  write_numeric_csv(dir / (role + "_prevalences.csv"), prev_header, prev_rows);
}

BagDataset load_bagset(const fs::path& dir, const std::string& role) {
  auto files = sample_files(dir / (role + "_samples"));
  std::vector<Bag> bags;
  bags.reserve(files.size());
  for (const auto& f : files) bags.push_back(load_bag_csv(f));
  auto prevs = load_prevalence_file(dir / (role + "_prevalences.csv"), bags.size());
  const int l = static_cast<int>(prevs.front().size());
  return BagDataset(std::move(bags), std::move(prevs), l);
}

}  // namespace quantx
