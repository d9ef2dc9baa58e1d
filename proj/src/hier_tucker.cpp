#include "hpds/hier_tucker.hpp"

#include <algorithm>
#include <functional>
#include <string>

namespace hpds {

DimensionTree::DimensionTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw ArgumentError("DimensionTree: empty");
  const int k = static_cast<int>(nodes_.front().modes.size());
  ModeSet all(static_cast<std::size_t>(k));
  for (int m = 0; m < k; ++m) all[m] = m + 1;
  if (nodes_.front().modes != all)
    throw ArgumentError("DimensionTree: root must hold modes 1..k");
  int leaves = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& q = nodes_[i];
    if (q.is_leaf()) {
      if (q.right >= 0 || q.modes.size() != 1)
        throw ArgumentError("DimensionTree: leaves must be singletons");
      ++leaves;
      continue;
    }
    if (q.right < 0 || q.left >= size() || q.right >= size())
      throw ArgumentError("DimensionTree: internal node needs two children");
    const Node& l = nodes_[static_cast<std::size_t>(q.left)];
    const Node& r = nodes_[static_cast<std::size_t>(q.right)];
    if (l.parent != static_cast<int>(i) || r.parent != static_cast<int>(i))
      throw ArgumentError("DimensionTree: inconsistent parent links");
    if (l.modes.empty() || r.modes.empty() || l.modes.back() >= r.modes.front())
      throw ArgumentError(
          "DimensionTree: left child modes must precede right child modes");
    ModeSet merged = l.modes;
    merged.insert(merged.end(), r.modes.begin(), r.modes.end());
    if (merged != q.modes)
      throw ArgumentError("DimensionTree: parent is not the union of its children");
  }
  if (leaves != k) throw ArgumentError("DimensionTree: wrong number of leaves");
}

int DimensionTree::order() const {
  return nodes_.empty() ? 0 : static_cast<int>(nodes_.front().modes.size());
}

int DimensionTree::level(int i) const {
  int l = 0;
  while (node(i).parent >= 0) {
    i = node(i).parent;
    ++l;
  }
  return l;
}

int DimensionTree::depth() const {
  int d = 0;
  for (int i = 0; i < size(); ++i) d = std::max(d, level(i));
  return d;
}

std::vector<int> DimensionTree::postorder() const {
  std::vector<int> out;
  std::function<void(int)> visit = [&](int i) {
    if (!node(i).is_leaf()) {
      visit(node(i).left);
      visit(node(i).right);
    }
    out.push_back(i);
  };
  visit(0);
  return out;
}

int DimensionTree::leaf_of(int mode) const {
  for (int i = 0; i < size(); ++i)
    if (node(i).is_leaf() && node(i).modes.front() == mode) return i;
  throw ArgumentError("DimensionTree: no leaf for mode " + std::to_string(mode));
}

DimensionTree build_tree(int k) {
  if (k < 2) throw ArgumentError("build_tree: order must be >= 2");
  std::vector<DimensionTree::Node> nodes;
  std::function<int(ModeSet, int)> grow = [&](ModeSet modes, int parent) {
    const int id = static_cast<int>(nodes.size());
    nodes.push_back({modes, -1, -1, parent});
    if (modes.size() > 1) {
      const auto split = static_cast<std::ptrdiff_t>((modes.size() + 1) / 2);
      const int l = grow(ModeSet(modes.begin(), modes.begin() + split), id);
      const int r = grow(ModeSet(modes.begin() + split, modes.end()), id);
      nodes[static_cast<std::size_t>(id)].left = l;
      nodes[static_cast<std::size_t>(id)].right = r;
    }
    return id;
  };
  ModeSet all(static_cast<std::size_t>(k));
  for (int m = 0; m < k; ++m) all[m] = m + 1;
  grow(all, -1);
  return DimensionTree(std::move(nodes));
}

HTucker::HTucker(DimensionTree tree, std::vector<Matrix> frames)
    : tree_(std::move(tree)), frames_(std::move(frames)) {
  if (static_cast<int>(frames_.size()) != tree_.size())
    throw ShapeError("HTucker: one frame per tree node is required");
  for (int i = 0; i < tree_.size(); ++i) {
    const auto& q = tree_.node(i);
    if (q.is_leaf()) continue;
    const Index expected = rank(q.left) * rank(q.right);
    if (frame(i).rows() != expected)
      throw ShapeError("HTucker: transfer matrix at node " + std::to_string(i) +
                       " has " + std::to_string(frame(i).rows()) +
                       " rows, expected " + std::to_string(expected));
  }
  if (rank(0) != 1) throw ShapeError("HTucker: root rank must be 1");
}

Dims HTucker::dims() const {
  Dims d(static_cast<std::size_t>(order()));
  for (int m = 1; m <= order(); ++m) d[m - 1] = leaf_factor(m).rows();
  return d;
}

std::vector<Index> HTucker::ranks() const {
  std::vector<Index> r;
  for (int i = 0; i < tree_.size(); ++i) r.push_back(rank(i));
  return r;
}

namespace {

// (right (x) left) * g, computed column-wise as vec(left * G_q * right^T).
Matrix combine(const Matrix& left, const Matrix& right, const Matrix& g) {
  const Index rl = left.cols(), rr = right.cols();
  Matrix out(left.rows() * right.rows(), g.cols());
  for (Index q = 0; q < g.cols(); ++q) {
    Eigen::Map<const Matrix> gq(g.col(q).data(), rl, rr);
    Matrix block = left * gq * right.transpose();
    out.col(q) = block.reshaped();
  }
  return out;
}

// Evaluates every node bottom-up given the (possibly substituted) leaf
// matrices; returns the root matrix.
Matrix propagate(const HTucker& h, const std::vector<Matrix>& leaves, int upto) {
  const auto& tree = h.tree();
  std::vector<Matrix> value(static_cast<std::size_t>(tree.size()));
  for (int i : tree.postorder()) {
    const auto& q = tree.node(i);
    if (q.is_leaf()) {
      value[i] = leaves[static_cast<std::size_t>(q.modes.front() - 1)];
    } else {
      value[i] = combine(value[q.left], value[q.right], h.frame(i));
      value[q.left].resize(0, 0);
      value[q.right].resize(0, 0);
    }
    if (i == upto) return value[i];
  }
  return value[0];
}

Matrix unit_basis(Index rows) {
  Matrix e = Matrix::Zero(rows, 1);
  e(0, 0) = 1.0;
  return e;
}

Matrix projection_transfer(const Matrix& left, const Matrix& right,
                           const Matrix& basis) {
  Matrix g(left.cols() * right.cols(), basis.cols());
  for (Index q = 0; q < basis.cols(); ++q) {
    Eigen::Map<const Matrix> bq(basis.col(q).data(), left.rows(), right.rows());
    Matrix block = left.transpose() * bq * right;
    g.col(q) = block.reshaped();
  }
  return g;
}

}  // namespace

HTucker htd_decompose(const Tensor& t, const DimensionTree& tree,
                      const RankTolerance& tol) {
  return htd_decompose(t, tree, tol, {});
}

HTucker htd_decompose(const Tensor& t, const DimensionTree& tree,
                      const RankTolerance& tol, std::span<const Matrix> leaf_bases) {
  if (tree.order() != t.order())
    throw ShapeError("htd_decompose: tree order " + std::to_string(tree.order()) +
                     " does not match tensor order " + std::to_string(t.order()));
  std::vector<Matrix> basis(static_cast<std::size_t>(tree.size()));
  std::vector<Matrix> frames(static_cast<std::size_t>(tree.size()));
  for (int i : tree.postorder()) {
    const auto& q = tree.node(i);
    if (i == 0) {
      basis[0] = t.values();
    } else if (q.is_leaf() && !leaf_bases.empty() &&
               leaf_bases[static_cast<std::size_t>(q.modes.front() - 1)].size() > 0) {
      basis[i] = leaf_bases[static_cast<std::size_t>(q.modes.front() - 1)];
    } else {
      Matrix u = orthonormal_basis(unfold(t, q.modes), tol);
      basis[i] = u.cols() > 0 ? u : unit_basis(u.rows());
    }
    if (q.is_leaf()) {
      frames[i] = basis[i];
    } else {
      frames[i] = projection_transfer(basis[q.left], basis[q.right], basis[i]);
      basis[q.left].resize(0, 0);
      basis[q.right].resize(0, 0);
    }
  }
  return HTucker(tree, std::move(frames));
}

Tensor htd_reconstruct(const HTucker& h) {
  std::vector<Matrix> leaves;
  for (int m = 1; m <= h.order(); ++m) leaves.push_back(h.leaf_factor(m));
  return Tensor(h.dims(), propagate(h, leaves, 0).col(0));
}

Matrix htd_node_basis(const HTucker& h, int node) {
  std::vector<Matrix> leaves;
  for (int m = 1; m <= h.order(); ++m) leaves.push_back(h.leaf_factor(m));
  return propagate(h, leaves, node);
}

Vector htd_eval_hpds(const HTucker& h, const Vector& x) {
  const Dims dims = h.dims();
  for (Index d : dims)
    if (d != dims.front()) throw ShapeError("htd_eval_hpds: tensor is not cubical");
  if (x.size() != dims.front())
    throw ShapeError("htd_eval_hpds: state length " + std::to_string(x.size()) +
                     " does not match n = " + std::to_string(dims.front()));
  std::vector<Matrix> args(static_cast<std::size_t>(h.order() - 1), x);
  return htd_contract(h, args).col(0);
}

Matrix htd_contract(const HTucker& h, std::span<const Matrix> args) {
  const int k = h.order();
  if (static_cast<int>(args.size()) != k - 1)
    throw ArgumentError("htd_contract: expected " + std::to_string(k - 1) +
                        " arguments, got " + std::to_string(args.size()));
  std::vector<Matrix> leaves;
  Index wide = 1;
  int wide_count = 0;
  for (int p = 1; p < k; ++p) {
    const Matrix& u = h.leaf_factor(p);
    const Matrix& z = args[static_cast<std::size_t>(p - 1)];
    if (z.rows() != u.rows())
      throw ShapeError("htd_contract: argument " + std::to_string(p) + " has " +
                       std::to_string(z.rows()) + " rows, mode size is " +
                       std::to_string(u.rows()));
    if (z.cols() > 1) {
      ++wide_count;
      wide = z.cols();
    }
    leaves.push_back(z.transpose() * u);
  }
  if (wide_count > 1)
    throw UnsupportedError("htd_contract: at most one matrix argument is supported");
  leaves.push_back(h.leaf_factor(k));
  const Matrix root = propagate(h, leaves, 0);
  // Root vector is psi-ordered over (wide mode, mode k): wide index fastest.
  const Index n = h.leaf_factor(k).rows();
  Eigen::Map<const Matrix> folded(root.data(), wide, n);
  return folded.transpose();
}

Index htd_param_count(const HTucker& h) {
  Index total = 0;
  for (int i = 0; i < h.tree().size(); ++i) total += h.frame(i).size();
  return total;
}

}  // namespace hpds
