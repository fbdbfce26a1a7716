// Graph and matrix representations shared by every module.
//
// Half-vectors store the strict upper triangle of a symmetric hollow matrix in
// row-major order: (0,1), (0,2), ..., (0,n-1), (1,2), ..., (n-2,n-1). The
// diagonal is never stored.
#ifndef LGGM_GRAPH_HPP
#define LGGM_GRAPH_HPP

#include "lggm/common.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <iosfwd>
#include <span>
#include <vector>

namespace lggm {

/// Unordered node pair, always stored with i < j.
struct Pair {
  Index i = 0;
  Index j = 0;
  friend bool operator==(const Pair&, const Pair&) = default;
};

constexpr Index half_dim(Index n) { return n * (n - 1) / 2; }

/// Inverse of half_dim; throws if `dim` is not a triangular number.
Index nodes_from_half_dim(Index dim);

/// Position of pair (i, j), i < j, inside a half-vector of an n-node graph.
constexpr Index pair_index(Index n, Index i, Index j) {
  return i * n - i * (i + 1) / 2 + (j - i - 1);
}

/// Pair stored at position `idx` of a half-vector of an n-node graph.
Pair pair_at(Index n, Index idx);

template <typename Derived>
bool is_symmetric_hollow(const Eigen::MatrixBase<Derived>& a) {
  if (a.rows() != a.cols()) return false;
  for (Index i = 0; i < a.rows(); ++i) {
    if (a(i, i) != typename Derived::Scalar(0)) return false;
    for (Index j = i + 1; j < a.cols(); ++j)
      if (a(i, j) != a(j, i)) return false;
  }
  return true;
}

/// Half-vectorization of a symmetric hollow matrix.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> vech(
    const Eigen::MatrixBase<Derived>& a) {
  if (!is_symmetric_hollow(a))
    throw InvalidArgument("vech: matrix must be square, symmetric and hollow");
  const Index n = a.rows();
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> v(half_dim(n));
  Index p = 0;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) v(p++) = a(i, j);
  return v;
}

/// Inverse of vech: symmetric hollow matrix from its half-vector.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> unvech(
    const Eigen::MatrixBase<Derived>& v) {
  const Index n = nodes_from_half_dim(v.size());
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> a =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(n, n);
  Index p = 0;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      a(i, j) = v(p);
      a(j, i) = v(p);
      ++p;
    }
  return a;
}

/// Symmetric, hollow, binary adjacency matrix of an undirected simple graph.
class AdjacencyMatrix {
 public:
  AdjacencyMatrix() = default;
  /// Empty graph on n nodes.
  explicit AdjacencyMatrix(Index n);
  /// Validates that `entries` is symmetric, hollow and 0/1 valued.
  explicit AdjacencyMatrix(Eigen::MatrixXd entries);

  static AdjacencyMatrix from_half(const Eigen::VectorXd& half);
  static AdjacencyMatrix from_edges(Index n, std::span<const Pair> edges);

  Index nodes() const { return m_.rows(); }
  const Eigen::MatrixXd& matrix() const { return m_; }
  Eigen::VectorXd half() const { return vech(m_); }

  bool has_edge(Index i, Index j) const { return m_(i, j) != 0.0; }
  void set_edge(Index i, Index j, bool present);

  Index edge_count() const;
  std::vector<Pair> edges() const;
  Eigen::VectorXi degrees() const;

  friend bool operator==(const AdjacencyMatrix& a, const AdjacencyMatrix& b) {
    return a.m_.rows() == b.m_.rows() && a.m_ == b.m_;
  }

 private:
  Eigen::MatrixXd m_;
};

/// Continuous counterpart of an adjacency matrix: symmetric, hollow, finite.
class RelaxedAdjacency {
 public:
  RelaxedAdjacency() = default;
  explicit RelaxedAdjacency(Index n) : m_(Eigen::MatrixXd::Zero(n, n)) {}
  explicit RelaxedAdjacency(Eigen::MatrixXd entries);
  explicit RelaxedAdjacency(const AdjacencyMatrix& a) : m_(a.matrix()) {}

  static RelaxedAdjacency from_half(const Eigen::VectorXd& half);

  Index nodes() const { return m_.rows(); }
  const Eigen::MatrixXd& matrix() const { return m_; }
  Eigen::VectorXd half() const { return vech(m_); }

  double operator()(Index i, Index j) const { return m_(i, j); }
  /// Sets both (i, j) and (j, i); i != j.
  void set(Index i, Index j, double value);

 private:
  Eigen::MatrixXd m_;
};

/// Partition of the strict upper triangle into observed and unknown pairs.
/// Pairs are referred to by their half-vector position.
class MaskPartition {
 public:
  MaskPartition() = default;
  /// `observed[p]` tells whether half-vector position p is observed.
  MaskPartition(Index n, std::vector<bool> observed);

  static MaskPartition all_observed(Index n);
  static MaskPartition all_unknown(Index n);
  static MaskPartition from_unknown(Index n, std::span<const Pair> unknown);

  Index nodes() const { return n_; }
  Index dim() const { return half_dim(n_); }
  bool is_observed(Index p) const { return flags_[static_cast<std::size_t>(p)]; }
  bool is_observed(Index i, Index j) const;

  const std::vector<Index>& observed() const { return observed_; }
  const std::vector<Index>& unknown() const { return unknown_; }
  std::vector<Pair> unknown_pairs() const;
  std::vector<Pair> observed_pairs() const;

 private:
  Index n_ = 0;
  std::vector<bool> flags_;
  std::vector<Index> observed_;
  std::vector<Index> unknown_;
};

/// Copies `source` into `target` at observed pairs; unknown pairs keep target's values.
RelaxedAdjacency apply_mask(const RelaxedAdjacency& target, const AdjacencyMatrix& source,
                            const MaskPartition& mask);

/// Entry-wise indicator of (entry >= 0.5).
AdjacencyMatrix project_binary(const RelaxedAdjacency& a);

/// Gathers the half-vector entries listed in `positions`.
Eigen::VectorXd gather(const Eigen::VectorXd& half, std::span<const Index> positions);

// Edge-list text format: "n <count>" followed by one "i j" line per edge
// (0-based, i < j).
void write_edge_list(std::ostream& out, const AdjacencyMatrix& a);
AdjacencyMatrix read_edge_list(std::istream& in);

}  // namespace lggm

#endif  // LGGM_GRAPH_HPP
