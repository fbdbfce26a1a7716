#include "lggm/graph.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace lggm {

Index nodes_from_half_dim(Index dim) {
  if (dim < 0) throw InvalidArgument("half-vector dimension must be non-negative");
  const auto n = static_cast<Index>(std::llround((1.0 + std::sqrt(1.0 + 8.0 * double(dim))) / 2.0));
  if (half_dim(n) != dim)
    throw InvalidArgument("half-vector dimension " + std::to_string(dim) +
                          " is not n(n-1)/2 for any n");
  return n;
}

Pair pair_at(Index n, Index idx) {
  if (idx < 0 || idx >= half_dim(n)) throw InvalidArgument("pair_at: index out of range");
  Index i = 0;
  Index row_len = n - 1;
  while (idx >= row_len) {
    idx -= row_len;
    ++i;
    --row_len;
  }
  return {i, i + 1 + idx};
}

// --- AdjacencyMatrix --------------------------------------------------------

AdjacencyMatrix::AdjacencyMatrix(Index n) {
  if (n < 1) throw InvalidArgument("adjacency matrix needs at least one node");
  m_ = Eigen::MatrixXd::Zero(n, n);
}

AdjacencyMatrix::AdjacencyMatrix(Eigen::MatrixXd entries) : m_(std::move(entries)) {
  if (m_.rows() < 1 || !is_symmetric_hollow(m_))
    throw InvalidArgument("adjacency matrix must be non-empty, symmetric and hollow");
  if (!((m_.array() == 0.0) || (m_.array() == 1.0)).all())
    throw InvalidArgument("adjacency matrix entries must be 0 or 1");
}

AdjacencyMatrix AdjacencyMatrix::from_half(const Eigen::VectorXd& half) {
  return AdjacencyMatrix(unvech(half));
}

AdjacencyMatrix AdjacencyMatrix::from_edges(Index n, std::span<const Pair> edges) {
  AdjacencyMatrix a(n);
  for (const Pair& e : edges) a.set_edge(e.i, e.j, true);
  return a;
}

void AdjacencyMatrix::set_edge(Index i, Index j, bool present) {
  if (i == j || i < 0 || j < 0 || i >= nodes() || j >= nodes())
    throw InvalidArgument("set_edge: invalid node pair");
  m_(i, j) = m_(j, i) = present ? 1.0 : 0.0;
}

Index AdjacencyMatrix::edge_count() const {
  return static_cast<Index>(std::llround(m_.sum() / 2.0));
}

std::vector<Pair> AdjacencyMatrix::edges() const {
  std::vector<Pair> out;
  for (Index i = 0; i < nodes(); ++i)
    for (Index j = i + 1; j < nodes(); ++j)
      if (m_(i, j) != 0.0) out.push_back({i, j});
  return out;
}

Eigen::VectorXi AdjacencyMatrix::degrees() const {
  return m_.rowwise().sum().cast<int>();
}

// --- RelaxedAdjacency -------------------------------------------------------

RelaxedAdjacency::RelaxedAdjacency(Eigen::MatrixXd entries) : m_(std::move(entries)) {
  if (!is_symmetric_hollow(m_))
    throw InvalidArgument("relaxed adjacency must be square, symmetric and hollow");
  if (!m_.allFinite()) throw InvalidArgument("relaxed adjacency entries must be finite");
}

RelaxedAdjacency RelaxedAdjacency::from_half(const Eigen::VectorXd& half) {
  return RelaxedAdjacency(unvech(half));
}

void RelaxedAdjacency::set(Index i, Index j, double value) {
  if (i == j) throw InvalidArgument("relaxed adjacency diagonal is fixed at zero");
  if (!std::isfinite(value)) throw InvalidArgument("relaxed adjacency entries must be finite");
  m_(i, j) = m_(j, i) = value;
}

// --- MaskPartition ----------------------------------------------------------

MaskPartition::MaskPartition(Index n, std::vector<bool> observed)
    : n_(n), flags_(std::move(observed)) {
  if (n < 1) throw InvalidArgument("mask needs at least one node");
  if (static_cast<Index>(flags_.size()) != half_dim(n))
    throw InvalidArgument("mask flag count must equal n(n-1)/2");
  for (Index p = 0; p < half_dim(n); ++p)
    (flags_[static_cast<std::size_t>(p)] ? observed_ : unknown_).push_back(p);
}

MaskPartition MaskPartition::all_observed(Index n) {
  return MaskPartition(n, std::vector<bool>(static_cast<std::size_t>(half_dim(n)), true));
}

MaskPartition MaskPartition::all_unknown(Index n) {
  return MaskPartition(n, std::vector<bool>(static_cast<std::size_t>(half_dim(n)), false));
}

MaskPartition MaskPartition::from_unknown(Index n, std::span<const Pair> unknown) {
  std::vector<bool> flags(static_cast<std::size_t>(half_dim(n)), true);
  for (const Pair& p : unknown) {
    if (p.i >= p.j || p.i < 0 || p.j >= n) throw InvalidArgument("mask pair must satisfy i < j < n");
    flags[static_cast<std::size_t>(pair_index(n, p.i, p.j))] = false;
  }
  return MaskPartition(n, std::move(flags));
}

bool MaskPartition::is_observed(Index i, Index j) const {
  if (i > j) std::swap(i, j);
  return is_observed(pair_index(n_, i, j));
}

std::vector<Pair> MaskPartition::unknown_pairs() const {
  std::vector<Pair> out;
  out.reserve(unknown_.size());
  for (Index p : unknown_) out.push_back(pair_at(n_, p));
  return out;
}

std::vector<Pair> MaskPartition::observed_pairs() const {
  std::vector<Pair> out;
  out.reserve(observed_.size());
  for (Index p : observed_) out.push_back(pair_at(n_, p));
  return out;
}

// --- free functions ---------------------------------------------------------

RelaxedAdjacency apply_mask(const RelaxedAdjacency& target, const AdjacencyMatrix& source,
                            const MaskPartition& mask) {
  if (target.nodes() != source.nodes() || target.nodes() != mask.nodes())
    throw InvalidArgument("apply_mask: dimension mismatch");
  RelaxedAdjacency out = target;
  const Index n = mask.nodes();
  for (Index p : mask.observed()) {
    const Pair e = pair_at(n, p);
    out.set(e.i, e.j, source.matrix()(e.i, e.j));
  }
  return out;
}

AdjacencyMatrix project_binary(const RelaxedAdjacency& a) {
  Eigen::MatrixXd b = (a.matrix().array() >= 0.5).cast<double>();
  b.diagonal().setZero();
  return AdjacencyMatrix(std::move(b));
}

Eigen::VectorXd gather(const Eigen::VectorXd& half, std::span<const Index> positions) {
  Eigen::VectorXd out(static_cast<Index>(positions.size()));
  for (std::size_t q = 0; q < positions.size(); ++q) out(static_cast<Index>(q)) = half(positions[q]);
  return out;
}

void write_edge_list(std::ostream& out, const AdjacencyMatrix& a) {
  out << "n " << a.nodes() << '\n';
  for (const Pair& e : a.edges()) out << e.i << ' ' << e.j << '\n';
}

AdjacencyMatrix read_edge_list(std::istream& in) {
  std::string line;
  Index n = -1;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream head(line);
    std::string tag;
    if (!(head >> tag >> n) || tag != "n" || n < 1)
      throw InvalidArgument("edge list must start with 'n <count>'");
    break;
  }
  if (n < 1) throw InvalidArgument("edge list is empty");
  AdjacencyMatrix a(n);
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    Index i = 0, j = 0;
    if (!(row >> i >> j)) throw InvalidArgument("malformed edge line: '" + line + "'");
    if (!(0 <= i && i < j && j < n))
      throw InvalidArgument("edge must satisfy 0 <= i < j < n: '" + line + "'");
    a.set_edge(i, j, true);
  }
  return a;
}

}  // namespace lggm
