#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ahead/errors.hpp"
#include "ahead/random.hpp"

namespace ahead {

enum class SampleRole { kTrain, kVal };

enum class PartitionMode { kRoundRobin, kAssignmentColumn };

/// Labeled samples plus a node/role partition. Labels live in {-1, +1};
/// {0, 1} labels are remapped on ingestion.
struct Dataset {
  Eigen::MatrixXd features;        // one row per sample
  std::vector<int> labels;         // -1 or +1
  std::vector<int> node;           // owning node, 0-based
  std::vector<SampleRole> role;
  int num_nodes = 0;

  int num_samples() const { return static_cast<int>(features.rows()); }
  int feature_dim() const { return static_cast<int>(features.cols()); }

  void validate() const {
    const auto s = static_cast<std::size_t>(num_samples());
    if (labels.size() != s || node.size() != s || role.size() != s)
      throw DataError("dataset partition arrays must match the sample count");
    if (num_nodes <= 0) throw DataError("dataset has no nodes");
    std::vector<int> train_count(num_nodes, 0), val_count(num_nodes, 0);
    for (std::size_t i = 0; i < s; ++i) {
      if (labels[i] != -1 && labels[i] != 1)
        throw DataError("label outside {-1,+1} at sample " +
                        std::to_string(i));
      if (node[i] < 0 || node[i] >= num_nodes)
        throw DataError("node index out of range at sample " +
                        std::to_string(i));
      (role[i] == SampleRole::kTrain ? train_count : val_count)[node[i]]++;
    }
    for (int i = 0; i < num_nodes; ++i)
      if (train_count[i] == 0 || val_count[i] == 0)
        throw ConfigError("node " + std::to_string(i + 1) +
                          " has an empty train or validation subset");
  }

  std::vector<int> indices(int node_id, SampleRole r) const {
    std::vector<int> out;
    for (int i = 0; i < num_samples(); ++i)
      if (node[i] == node_id && role[i] == r) out.push_back(i);
    return out;
  }
};

namespace detail {

inline int remap_label(double raw, const std::string& context) {
  if (raw == 1.0) return 1;
  if (raw == -1.0) return -1;
  if (raw == 0.0) return -1;  // {0,1} convention remapped on ingestion
  throw DataError("label outside {-1,+1} (or {0,1}) " + context);
}

inline std::vector<double> split_fields(const std::string& line) {
  std::string normalized = line;
  for (char& ch : normalized)
    if (ch == ',' || ch == ';' || ch == '\t') ch = ' ';
  std::istringstream ss(normalized);
  std::vector<double> out;
  double v;
  while (ss >> v) out.push_back(v);
  if (!ss.eof()) throw DataError("non-numeric field in line: " + line);
  return out;
}

}  // namespace detail

/// Reads a delimiter-separated text file, one sample per line.
///   round-robin mode:  label f1 ... fn   (sample j goes to node j mod m;
///                      roles alternate train/val within each node)
///   column mode:       label assign f1 ... fn   (assign = signed 1-based
///                      node index, +i train at node i, -i validation)
inline Dataset load_dataset(const std::string& path, int m,
                            PartitionMode mode = PartitionMode::kRoundRobin) {
  if (m <= 0) throw ConfigError("node count must be positive");
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset: " + path);

  std::vector<std::vector<double>> rows;
  std::vector<int> labels, nodes;
  std::vector<SampleRole> roles;
  std::vector<int> arrivals(m, 0);

  std::string line;
  int lineno = 0;
  std::size_t dim = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto fields = detail::split_fields(line);
    const std::size_t meta = mode == PartitionMode::kAssignmentColumn ? 2 : 1;
    if (fields.size() <= meta)
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": sample has no features");
    labels.push_back(detail::remap_label(
        fields[0], "at " + path + ":" + std::to_string(lineno)));
    int node_id;
    SampleRole role;
    if (mode == PartitionMode::kAssignmentColumn) {
      double a = fields[1];
      int signed_node = static_cast<int>(a);
      if (static_cast<double>(signed_node) != a || signed_node == 0 ||
          std::abs(signed_node) > m)
        throw DataError(path + ":" + std::to_string(lineno) +
                        ": assignment column must be a signed 1-based node "
                        "index within " +
                        std::to_string(m) + " nodes");
      node_id = std::abs(signed_node) - 1;
      role = signed_node > 0 ? SampleRole::kTrain : SampleRole::kVal;
    } else {
      const int sample_index = static_cast<int>(rows.size());
      node_id = sample_index % m;
      role = (arrivals[node_id]++ % 2 == 0) ? SampleRole::kTrain
                                            : SampleRole::kVal;
    }
    nodes.push_back(node_id);
    roles.push_back(role);
    rows.emplace_back(fields.begin() + static_cast<long>(meta), fields.end());
    if (dim == 0) dim = rows.back().size();
    if (rows.back().size() != dim)
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": inconsistent feature dimension");
  }
  if (rows.empty()) throw DataError("dataset is empty: " + path);

  Dataset ds;
  ds.num_nodes = m;
  ds.features.resize(static_cast<Eigen::Index>(rows.size()),
                     static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < dim; ++j)
      ds.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j];
  ds.labels = std::move(labels);
  ds.node = std::move(nodes);
  ds.role = std::move(roles);
  ds.validate();
  return ds;
}

/// Writes the assignment-column format accepted by load_dataset.
inline void save_dataset(const std::string& path, const Dataset& ds) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.precision(17);
  for (int i = 0; i < ds.num_samples(); ++i) {
    int assign = ds.node[i] + 1;
    if (ds.role[i] == SampleRole::kVal) assign = -assign;
    out << ds.labels[i] << " " << assign;
    for (int j = 0; j < ds.feature_dim(); ++j) out << " " << ds.features(i, j);
    out << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

/// Two Gaussian clusters centered at +/- separation * u for a seeded random
/// unit direction u; labels +/-1, balanced per node, alternating train/val
/// within each node.
inline Dataset generate_two_clusters(int n_features, int samples_per_node,
                                     int m, double separation,
                                     std::uint64_t seed) {
  if (n_features <= 0 || samples_per_node <= 0 || m <= 0)
    throw ConfigError("n_features, samples_per_node, and m must be positive");
  if (samples_per_node < 2)
    throw ConfigError("need at least 2 samples per node for train+val");
  if (separation < 0.0) throw ConfigError("separation must be nonnegative");

  std::mt19937_64 gen(seed);
  Eigen::VectorXd u(n_features);
  for (int j = 0; j < n_features; ++j) u(j) = gaussian(gen);
  double norm = u.norm();
  if (norm == 0.0) u(0) = 1.0;
  else u /= norm;

  Dataset ds;
  ds.num_nodes = m;
  const int total = m * samples_per_node;
  ds.features.resize(total, n_features);
  ds.labels.resize(total);
  ds.node.resize(total);
  ds.role.resize(total);
  int row = 0;
  for (int i = 0; i < m; ++i) {
    for (int s = 0; s < samples_per_node; ++s, ++row) {
      const int label = ((s / 2) % 2 == 0) ? 1 : -1;  // balanced per role
      for (int j = 0; j < n_features; ++j)
        ds.features(row, j) = label * separation * u(j) + gaussian(gen);
      ds.labels[row] = label;
      ds.node[row] = i;
      // alternate train/val so both roles are nonempty on every node
      ds.role[row] = (s % 2 == 0) ? SampleRole::kTrain : SampleRole::kVal;
    }
  }
  ds.validate();
  return ds;
}

}  // namespace ahead
