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

#ifndef FAIRROBUST_GRAPH_HPP_
#define FAIRROBUST_GRAPH_HPP_

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fairrobust/dataset.hpp"

namespace fairrobust {

// A weighted user-item entry of the bipartite adjacency matrix. The matrix is
// symmetric: the entry stands for both A[user, n_users + item] and its mirror.
struct Edge {
  Index user = 0;
  Index item = 0;
  double value = 0.0;

  bool operator==(const Edge&) const = default;
};

// Sparse symmetric n x n adjacency matrix of the user-item graph, n = |U|+|I|.
// Users occupy node indices [0, |U|), items [|U|, |U|+|I|). Only user-item
// blocks are stored; entries are kept sorted by (user, item) and zero-valued
// entries are never stored.
class AdjacencyMatrix {
 public:
  AdjacencyMatrix() = default;
  AdjacencyMatrix(std::size_t num_users, std::size_t num_items,
                  std::vector<Edge> entries);

  std::size_t num_users() const { return num_users_; }
  std::size_t num_items() const { return num_items_; }
  std::size_t num_nodes() const { return num_users_ + num_items_; }
  std::size_t num_entries() const { return entries_.size(); }

  std::span<const Edge> entries() const { return entries_; }
  std::optional<std::size_t> find(Index user, Index item) const;
  double value(Index user, Index item) const;

  // Weighted degree of every node, users first.
  std::vector<double> degrees() const;

  Eigen::MatrixXd to_dense() const;

  // Coordinate list "row col value" over the full symmetric matrix, sorted by
  // (row, col), values printed with round-trip precision.
  void write_coo(std::ostream& out) const;

  bool operator==(const AdjacencyMatrix&) const = default;

 private:
  std::size_t num_users_ = 0;
  std::size_t num_items_ = 0;
  std::vector<Edge> entries_;
};

AdjacencyMatrix build_adjacency(const std::vector<Interaction>& train,
                                std::size_t num_users, std::size_t num_items);

// D^{-1/2} A D^{-1/2} with degrees taken from the current entry values.
// Entries touching a zero-degree node become zero.
AdjacencyMatrix normalize_adjacency(const AdjacencyMatrix& adjacency);

enum class PerturbationKind { deletion, addition };

const char* to_string(PerturbationKind kind);
PerturbationKind perturbation_kind_from_string(const std::string& name);

class CandidateEdgeSet {
 public:
  CandidateEdgeSet() = default;
  CandidateEdgeSet(PerturbationKind kind,
                   std::vector<std::pair<Index, Index>> edges);

  PerturbationKind kind() const { return kind_; }
  std::size_t size() const { return edges_.size(); }
  const std::vector<std::pair<Index, Index>>& edges() const { return edges_; }
  const std::pair<Index, Index>& operator[](std::size_t j) const {
    return edges_[j];
  }
  std::optional<std::size_t> position(Index user, Index item) const;

 private:
  PerturbationKind kind_ = PerturbationKind::deletion;
  std::vector<std::pair<Index, Index>> edges_;
  // Edge positions ordered by (user, item) for lookup.
  std::vector<std::size_t> order_;
};

// Deletion: every edge of `train`. Addition: every user-item non-edge, or a
// uniform subsample of `cap` of them drawn with `seed` (kept in (user, item)
// order).
CandidateEdgeSet candidate_edges(const AdjacencyMatrix& train,
                                 PerturbationKind kind,
                                 std::optional<std::size_t> cap = std::nullopt,
                                 std::uint64_t seed = 0);
CandidateEdgeSet candidate_edges(const SplitDataset& split,
                                 PerturbationKind kind,
                                 std::optional<std::size_t> cap = std::nullopt,
                                 std::uint64_t seed = 0);

struct PerturbationVector {
  PerturbationKind kind = PerturbationKind::deletion;
  std::vector<double> weights;
};

inline constexpr double kDefaultInitMagnitude = 0.1;

// Weights start at +magnitude for deletion and -magnitude for addition, so
// the binarized perturbation leaves the graph untouched.
PerturbationVector init_perturbation(const CandidateEdgeSet& candidates,
                                     double magnitude = kDefaultInitMagnitude);

double sigmoid(double x);

// p_j = 1 iff sigmoid(w_j) >= 0.5. Throws NumericError on non-finite weights.
std::vector<std::uint8_t> binarize(const PerturbationVector& p);

// Same, but flips at most `budget` candidates: those whose weights lie
// farthest past zero, ties to the lower position.
std::vector<std::uint8_t> binarize(const PerturbationVector& p, std::size_t budget);

// sigmoid of every weight.
std::vector<double> relax(const PerturbationVector& p);

// Replaces the candidate entries of A with `values` (binary or relaxed).
AdjacencyMatrix apply_perturbation(const AdjacencyMatrix& adjacency,
                                   const CandidateEdgeSet& candidates,
                                   std::span<const double> values);
AdjacencyMatrix apply_perturbation(const AdjacencyMatrix& adjacency,
                                   const CandidateEdgeSet& candidates,
                                   std::span<const std::uint8_t> mask);

// Number of candidates whose binarized value differs from A.
std::size_t count_perturbed(const CandidateEdgeSet& candidates,
                            std::span<const std::uint8_t> mask);

struct Distance {
  double value = 0.0;
  // d value / d weight_j; empty when computed from explicit values.
  std::vector<double> gradient;
};

// Sum over candidates of |value_j - A[u_j, i_j]|.
double perturbation_distance(const AdjacencyMatrix& adjacency,
                             const CandidateEdgeSet& candidates,
                             std::span<const double> values);
// Same on the relaxed view sigmoid(w), with its gradient w.r.t. w.
Distance perturbation_distance(const AdjacencyMatrix& adjacency,
                               const CandidateEdgeSet& candidates,
                               const PerturbationVector& p);

}  // namespace fairrobust

#endif  // FAIRROBUST_GRAPH_HPP_
