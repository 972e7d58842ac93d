// Copyright 2026 The fairrobust Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fairrobust/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <limits>
#include <random>

namespace fairrobust {

namespace {

bool edge_less(const Edge& a, const Edge& b) {
  return a.user != b.user ? a.user < b.user : a.item < b.item;
}

}  // namespace

AdjacencyMatrix::AdjacencyMatrix(std::size_t num_users, std::size_t num_items,
                                 std::vector<Edge> entries)
    : num_users_(num_users), num_items_(num_items) {
  for (const auto& e : entries) {
    if (e.user >= num_users || e.item >= num_items) {
      throw DataError("adjacency entry (" + std::to_string(e.user) + ", " +
                      std::to_string(e.item) + ") out of range");
    }
    if (!std::isfinite(e.value)) throw NumericError("non-finite adjacency entry");
  }
  std::erase_if(entries, [](const Edge& e) { return e.value == 0.0; });
  std::sort(entries.begin(), entries.end(), edge_less);
  const auto dup = std::adjacent_find(entries.begin(), entries.end(),
                                      [](const Edge& a, const Edge& b) {
                                        return a.user == b.user && a.item == b.item;
                                      });
  if (dup != entries.end()) {
    throw DataError("duplicate adjacency entry (" + std::to_string(dup->user) +
                    ", " + std::to_string(dup->item) + ")");
  }
  entries_ = std::move(entries);
}

std::optional<std::size_t> AdjacencyMatrix::find(Index user, Index item) const {
  const Edge key{user, item, 0.0};
  const auto it = std::lower_bound(entries_.begin(), entries_.end(), key, edge_less);
  if (it == entries_.end() || it->user != user || it->item != item) {
    return std::nullopt;
  }
  return static_cast<std::size_t>(it - entries_.begin());
}

double AdjacencyMatrix::value(Index user, Index item) const {
  const auto pos = find(user, item);
  return pos ? entries_[*pos].value : 0.0;
}

std::vector<double> AdjacencyMatrix::degrees() const {
  std::vector<double> deg(num_nodes(), 0.0);
  for (const auto& e : entries_) {
    deg[e.user] += e.value;
    deg[num_users_ + e.item] += e.value;
  }
  return deg;
}

Eigen::MatrixXd AdjacencyMatrix::to_dense() const {
  const auto n = static_cast<Eigen::Index>(num_nodes());
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : entries_) {
    const auto r = static_cast<Eigen::Index>(e.user);
    const auto c = static_cast<Eigen::Index>(num_users_ + e.item);
    dense(r, c) = e.value;
    dense(c, r) = e.value;
  }
  return dense;
}

void AdjacencyMatrix::write_coo(std::ostream& out) const {
  struct Coo {
    std::size_t row, col;
    double value;
  };
  std::vector<Coo> coo;
  coo.reserve(2 * entries_.size());
  for (const auto& e : entries_) {
    coo.push_back({e.user, num_users_ + e.item, e.value});
    coo.push_back({num_users_ + e.item, e.user, e.value});
  }
  std::sort(coo.begin(), coo.end(), [](const Coo& a, const Coo& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  char buf[64];
  for (const auto& c : coo) {
    std::snprintf(buf, sizeof(buf), "%.17g", c.value);
    out << c.row << ' ' << c.col << ' ' << buf << '\n';
  }
}

AdjacencyMatrix build_adjacency(const std::vector<Interaction>& train,
                                std::size_t num_users, std::size_t num_items) {
  std::vector<Edge> entries;
  entries.reserve(train.size());
  for (const auto& x : train) entries.push_back({x.user, x.item, 1.0});
  std::sort(entries.begin(), entries.end(), edge_less);
  entries.erase(std::unique(entries.begin(), entries.end(),
                            [](const Edge& a, const Edge& b) {
                              return a.user == b.user && a.item == b.item;
                            }),
                entries.end());
  return AdjacencyMatrix(num_users, num_items, std::move(entries));
}

AdjacencyMatrix normalize_adjacency(const AdjacencyMatrix& adjacency) {
  const auto deg = adjacency.degrees();
  const std::size_t nu = adjacency.num_users();
  std::vector<Edge> out;
  out.reserve(adjacency.num_entries());
  for (const auto& e : adjacency.entries()) {
    const double du = deg[e.user];
    const double di = deg[nu + e.item];
    const double v = (du > 0.0 && di > 0.0) ? e.value / std::sqrt(du * di) : 0.0;
    out.push_back({e.user, e.item, v});
  }
  return AdjacencyMatrix(nu, adjacency.num_items(), std::move(out));
}

const char* to_string(PerturbationKind kind) {
  return kind == PerturbationKind::deletion ? "del" : "add";
}

PerturbationKind perturbation_kind_from_string(const std::string& name) {
  if (name == "del" || name == "deletion") return PerturbationKind::deletion;
  if (name == "add" || name == "addition") return PerturbationKind::addition;
  throw ConfigError("unknown perturbation kind '" + name + "' (expected add|del)");
}

CandidateEdgeSet::CandidateEdgeSet(PerturbationKind kind,
                                   std::vector<std::pair<Index, Index>> edges)
    : kind_(kind), edges_(std::move(edges)), order_(edges_.size()) {
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  std::sort(order_.begin(), order_.end(),
            [&](std::size_t a, std::size_t b) { return edges_[a] < edges_[b]; });
  for (std::size_t k = 1; k < order_.size(); ++k) {
    if (edges_[order_[k]] == edges_[order_[k - 1]]) {
      throw DataError("duplicate candidate edge");
    }
  }
}

std::optional<std::size_t> CandidateEdgeSet::position(Index user, Index item) const {
  const std::pair<Index, Index> key{user, item};
  const auto it = std::lower_bound(
      order_.begin(), order_.end(), key,
      [&](std::size_t pos, const std::pair<Index, Index>& k) { return edges_[pos] < k; });
  if (it == order_.end() || edges_[*it] != key) return std::nullopt;
  return *it;
}

CandidateEdgeSet candidate_edges(const AdjacencyMatrix& train,
                                 PerturbationKind kind,
                                 std::optional<std::size_t> cap,
                                 std::uint64_t seed) {
  if (cap && *cap == 0) throw ConfigError("candidate cap must be >= 1");
  std::vector<std::pair<Index, Index>> edges;
  if (kind == PerturbationKind::deletion) {
    for (const auto& e : train.entries()) edges.emplace_back(e.user, e.item);
  } else {
    const auto entries = train.entries();
    std::size_t k = 0;
    for (Index u = 0; u < train.num_users(); ++u) {
      for (Index i = 0; i < train.num_items(); ++i) {
        while (k < entries.size() &&
               (entries[k].user < u || (entries[k].user == u && entries[k].item < i))) {
          ++k;
        }
        if (k < entries.size() && entries[k].user == u && entries[k].item == i) continue;
        edges.emplace_back(u, i);
      }
    }
    if (cap && edges.size() > *cap) {
      // Partial Fisher-Yates on positions, then restore (user, item) order.
      std::mt19937_64 rng(seed);
      std::vector<std::size_t> pos(edges.size());
      std::iota(pos.begin(), pos.end(), std::size_t{0});
      for (std::size_t j = 0; j < *cap; ++j) {
        const std::size_t remaining = pos.size() - j;
        const std::size_t pick =
            j + static_cast<std::size_t>(
                    static_cast<double>(rng() >> 11) * 0x1.0p-53 *
                    static_cast<double>(remaining)) % remaining;
        std::swap(pos[j], pos[pick]);
      }
      pos.resize(*cap);
      std::sort(pos.begin(), pos.end());
      std::vector<std::pair<Index, Index>> kept;
      kept.reserve(*cap);
      for (std::size_t p : pos) kept.push_back(edges[p]);
      edges = std::move(kept);
    }
  }
  if (edges.empty()) throw DataError("empty candidate edge set");
  return CandidateEdgeSet(kind, std::move(edges));
}

CandidateEdgeSet candidate_edges(const SplitDataset& split, PerturbationKind kind,
                                 std::optional<std::size_t> cap,
                                 std::uint64_t seed) {
  return candidate_edges(build_adjacency(split.train, split.num_users, split.num_items),
                         kind, cap, seed);
}

PerturbationVector init_perturbation(const CandidateEdgeSet& candidates,
                                     double magnitude) {
  const double w = candidates.kind() == PerturbationKind::deletion ? std::abs(magnitude)
                                                                   : -std::abs(magnitude);
  // -0.0 would still binarize to 1; addition with zero magnitude needs a
  // strictly negative weight to leave the graph untouched.
  const double init = (w == 0.0 && candidates.kind() == PerturbationKind::addition)
                          ? -std::numeric_limits<double>::min()
                          : w;
  return {candidates.kind(), std::vector<double>(candidates.size(), init)};
}

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::vector<std::uint8_t> binarize(const PerturbationVector& p) {
  std::vector<std::uint8_t> out(p.weights.size());
  for (std::size_t j = 0; j < p.weights.size(); ++j) {
    if (!std::isfinite(p.weights[j])) {
      throw NumericError("non-finite perturbation weight at position " +
                         std::to_string(j));
    }
    // sigmoid(w) >= 0.5 exactly when w >= 0; testing w avoids rounding of
    // sigmoid near zero.
    out[j] = p.weights[j] >= 0.0 ? 1 : 0;
  }
  return out;
}

std::vector<std::uint8_t> binarize(const PerturbationVector& p, std::size_t budget) {
  std::vector<std::uint8_t> out = binarize(p);
  const std::uint8_t original = p.kind == PerturbationKind::deletion ? 1 : 0;
  std::vector<std::size_t> flipped;
  for (std::size_t j = 0; j < out.size(); ++j) {
    if (out[j] != original) flipped.push_back(j);
  }
  if (flipped.size() <= budget) return out;
  // Distance past the threshold in the flipping direction.
  auto depth = [&](std::size_t j) {
    return p.kind == PerturbationKind::deletion ? -p.weights[j] : p.weights[j];
  };
  std::stable_sort(flipped.begin(), flipped.end(),
                   [&](std::size_t a, std::size_t b) { return depth(a) > depth(b); });
  for (std::size_t r = budget; r < flipped.size(); ++r) out[flipped[r]] = original;
  return out;
}

std::vector<double> relax(const PerturbationVector& p) {
  std::vector<double> out(p.weights.size());
  std::transform(p.weights.begin(), p.weights.end(), out.begin(), sigmoid);
  return out;
}

AdjacencyMatrix apply_perturbation(const AdjacencyMatrix& adjacency,
                                   const CandidateEdgeSet& candidates,
                                   std::span<const double> values) {
  if (values.size() != candidates.size()) {
    throw DataError("perturbation has " + std::to_string(values.size()) +
                    " entries, candidate set has " +
                    std::to_string(candidates.size()));
  }
  std::vector<Edge> entries(adjacency.entries().begin(), adjacency.entries().end());
  std::vector<Edge> added;
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    const auto [u, i] = candidates[j];
    const auto pos = adjacency.find(u, i);
    if (pos) {
      entries[*pos].value = values[j];
    } else {
      added.push_back({u, i, values[j]});
    }
  }
  entries.insert(entries.end(), added.begin(), added.end());
  return AdjacencyMatrix(adjacency.num_users(), adjacency.num_items(),
                         std::move(entries));
}

AdjacencyMatrix apply_perturbation(const AdjacencyMatrix& adjacency,
                                   const CandidateEdgeSet& candidates,
                                   std::span<const std::uint8_t> mask) {
  std::vector<double> values(mask.begin(), mask.end());
  return apply_perturbation(adjacency, candidates, values);
}

std::size_t count_perturbed(const CandidateEdgeSet& candidates,
                            std::span<const std::uint8_t> mask) {
  const std::uint8_t original = candidates.kind() == PerturbationKind::deletion ? 1 : 0;
  return static_cast<std::size_t>(
      std::count_if(mask.begin(), mask.end(),
                    [original](std::uint8_t b) { return b != original; }));
}

double perturbation_distance(const AdjacencyMatrix& adjacency,
                             const CandidateEdgeSet& candidates,
                             std::span<const double> values) {
  if (values.size() != candidates.size()) {
    throw DataError("perturbation size does not match candidate set");
  }
  double total = 0.0;
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    const auto [u, i] = candidates[j];
    total += std::abs(values[j] - adjacency.value(u, i));
  }
  return total;
}

Distance perturbation_distance(const AdjacencyMatrix& adjacency,
                               const CandidateEdgeSet& candidates,
                               const PerturbationVector& p) {
  if (p.weights.size() != candidates.size()) {
    throw DataError("perturbation size does not match candidate set");
  }
  Distance d;
  d.gradient.resize(p.weights.size());
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    const auto [u, i] = candidates[j];
    const double s = sigmoid(p.weights[j]);
    const double diff = s - adjacency.value(u, i);
    d.value += std::abs(diff);
    // sigmoid lies in (0, 1) and A in {0, 1}: the sign of diff is fixed.
    const double sign = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
    d.gradient[j] = sign * s * (1.0 - s);
  }
  return d;
}

}  // namespace fairrobust
