#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ahead/errors.hpp"
#include "ahead/random.hpp"

namespace ahead {

/// Undirected simple graph. Nodes are 0-based internally; the edge-list file
/// format is 1-based. Self-communication is implicit (not stored as edges).
struct Graph {
  int m = 0;
  std::vector<std::pair<int, int>> edges;  // i < j, unique

  std::vector<int> degrees() const {
    std::vector<int> deg(m, 0);
    for (const auto& [i, j] : edges) {
      ++deg[i];
      ++deg[j];
    }
    return deg;
  }

  bool connected() const {
    if (m <= 0) return false;
    std::vector<std::vector<int>> adj(m);
    for (const auto& [i, j] : edges) {
      adj[i].push_back(j);
      adj[j].push_back(i);
    }
    std::vector<char> seen(m, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int v : adj[u]) {
        if (!seen[v]) {
          seen[v] = 1;
          ++count;
          stack.push_back(v);
        }
      }
    }
    return count == m;
  }

  void validate() const {
    if (m <= 0) throw ConfigError("graph must have at least one node");
    std::set<std::pair<int, int>> seen;
    for (const auto& [i, j] : edges) {
      if (i < 0 || j < 0 || i >= m || j >= m)
        throw ConfigError("edge endpoint out of range [0," +
                          std::to_string(m - 1) + "]");
      if (i == j) throw ConfigError("self-loops are not stored as edges");
      auto key = std::minmax(i, j);
      if (!seen.insert(key).second) throw ConfigError("duplicate edge");
    }
  }

  static Graph complete(int m) {
    if (m < 1) throw ConfigError("complete graph needs m >= 1");
    Graph g;
    g.m = m;
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j) g.edges.emplace_back(i, j);
    return g;
  }

  static Graph ring(int m) {
    if (m < 2) throw ConfigError("ring graph needs m >= 2");
    Graph g;
    g.m = m;
    for (int i = 0; i + 1 < m; ++i) g.edges.emplace_back(i, i + 1);
    if (m > 2) g.edges.emplace_back(0, m - 1);
    return g;
  }
};

/// Doubly stochastic mixing matrix with rho = ||W - 11^T/m||^2.
struct MixingMatrix {
  Eigen::MatrixXd W;
  double rho = 0.0;

  int size() const { return static_cast<int>(W.rows()); }
};

/// Squared spectral norm of W - (1/m)11^T. Input must be symmetric and
/// doubly stochastic within 1e-10; violations are reported with the
/// offending row/column sums.
inline double spectral_rho(const Eigen::MatrixXd& W) {
  const auto m = W.rows();
  if (m == 0 || W.cols() != m)
    throw ValidationError("mixing matrix must be square and nonempty");
  constexpr double kTol = 1e-10;
  std::ostringstream bad;
  for (Eigen::Index i = 0; i < m; ++i) {
    double rs = W.row(i).sum();
    double cs = W.col(i).sum();
    if (std::abs(rs - 1.0) > kTol) bad << " row " << i << " sums to " << rs;
    if (std::abs(cs - 1.0) > kTol) bad << " col " << i << " sums to " << cs;
  }
  if ((W - W.transpose()).cwiseAbs().maxCoeff() > kTol)
    bad << " matrix is not symmetric";
  if (bad.tellp() > 0)
    throw ValidationError("not doubly stochastic:" + bad.str());

  Eigen::MatrixXd diff =
      W - Eigen::MatrixXd::Constant(m, m, 1.0 / static_cast<double>(m));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(diff,
                                                    Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw NumericalError("eigen decomposition failed for mixing matrix");
  double largest = es.eigenvalues().cwiseAbs().maxCoeff();
  return largest * largest;
}

/// Metropolis weights: W_ij = 1/(1 + max(deg_i, deg_j)) on edges, diagonal
/// fills the row to one. Satisfies symmetry, double stochasticity, and
/// positivity exactly on the edge pattern.
inline MixingMatrix metropolis_weights(const Graph& g) {
  g.validate();
  if (!g.connected())
    throw NotConnectedError(
        "graph is disconnected; rho would equal 1, violating the mixing "
        "assumption");
  const auto deg = g.degrees();
  MixingMatrix mix;
  mix.W = Eigen::MatrixXd::Zero(g.m, g.m);
  for (const auto& [i, j] : g.edges) {
    double w = 1.0 / (1.0 + static_cast<double>(std::max(deg[i], deg[j])));
    mix.W(i, j) = w;
    mix.W(j, i) = w;
  }
  for (int i = 0; i < g.m; ++i) mix.W(i, i) = 1.0 - mix.W.row(i).sum();
  mix.rho = spectral_rho(mix.W);
  return mix;
}

/// Seeded Erdos-Renyi G(m, p). Each unordered pair is an edge with
/// probability p; on a disconnected draw the seed is incremented and the
/// draw repeated, up to max_attempts.
inline Graph erdos_renyi(int m, double p, std::uint64_t seed,
                         int max_attempts = 64) {
  if (m < 2) throw ConfigError("erdos_renyi needs m >= 2");
  if (!(p > 0.0 && p <= 1.0))
    throw ConfigError("edge probability must lie in (0, 1]");
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    std::mt19937_64 gen(seed + static_cast<std::uint64_t>(attempt));
    Graph g;
    g.m = m;
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j)
        if (uniform01(gen) < p) g.edges.emplace_back(i, j);
    if (g.connected()) return g;
  }
  throw GenerationError("no connected Erdos-Renyi graph within " +
                        std::to_string(max_attempts) + " attempts (m=" +
                        std::to_string(m) + ", p=" + std::to_string(p) + ")");
}

/// Edge-list serialization, one "i j" pair per line, 1-based.
inline void save_edge_list(const std::string& path, const Graph& g) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "# nodes " << g.m << "\n";
  for (const auto& [i, j] : g.edges) out << i + 1 << " " << j + 1 << "\n";
  if (!out) throw IoError("write failed: " + path);
}

inline Graph load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path);
  Graph g;
  std::string line;
  int max_node = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string word;
      if (hs >> word >> g.m && word == "nodes") continue;
      continue;
    }
    std::istringstream ls(line);
    int i = 0, j = 0;
    if (!(ls >> i >> j)) throw DataError("bad edge line in " + path + ": " + line);
    g.edges.emplace_back(std::min(i, j) - 1, std::max(i, j) - 1);
    max_node = std::max({max_node, i, j});
  }
  if (g.m == 0) g.m = max_node;
  g.validate();
  return g;
}

/// Mixing-matrix export as comma-separated numeric rows, for inspection.
inline void save_matrix_csv(const std::string& path,
                            const Eigen::MatrixXd& M) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.precision(17);
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      if (j) out << ",";
      out << M(i, j);
    }
    out << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace ahead
