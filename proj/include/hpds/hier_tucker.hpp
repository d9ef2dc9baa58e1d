#pragma once

#include <span>
#include <vector>

#include "hpds/matrix_kernels.hpp"
#include "hpds/tensor.hpp"

namespace hpds {

// Binary dimension tree over modes 1..k. Node 0 is the root.
class DimensionTree {
 public:
  struct Node {
    ModeSet modes;
    int left = -1;
    int right = -1;
    int parent = -1;
    bool is_leaf() const { return left < 0; }
  };

  DimensionTree() = default;
  // Validates root = {1..k}, singleton leaves, parents = disjoint union of
  // children, and every left child's modes preceding its sibling's.
  explicit DimensionTree(std::vector<Node> nodes);

  int order() const;
  int size() const { return static_cast<int>(nodes_.size()); }
  const Node& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
  const std::vector<Node>& nodes() const { return nodes_; }
  // Number of edges from the root to node i.
  int level(int i) const;
  // Maximum level over all nodes.
  int depth() const;
  // Children before parents.
  std::vector<int> postorder() const;
  // Node index of the leaf holding `mode` (1-based).
  int leaf_of(int mode) const;

 private:
  std::vector<Node> nodes_;
};

// Canonical balanced tree: a node with s modes splits into the first
// ceil(s/2) modes (left) and the remainder (right).
DimensionTree build_tree(int k);

// Leaf factors U_p (n_p x r_p) and transfer matrices G_Q (r_l r_r x r_Q) with
//   U_Q = (U_right (x) U_left) G_Q,
// which keeps the left child's (lower) modes fastest in psi-order.
class HTucker {
 public:
  HTucker() = default;
  // frames[i] is the leaf factor (leaf i) or transfer matrix (internal i).
  HTucker(DimensionTree tree, std::vector<Matrix> frames);

  const DimensionTree& tree() const { return tree_; }
  int order() const { return tree_.order(); }
  Dims dims() const;
  Index rank(int node) const { return frame(node).cols(); }
  std::vector<Index> ranks() const;
  const Matrix& frame(int node) const { return frames_[static_cast<std::size_t>(node)]; }
  const Matrix& leaf_factor(int mode) const { return frame(tree_.leaf_of(mode)); }

 private:
  DimensionTree tree_;
  std::vector<Matrix> frames_;
};

// Per-node left singular vectors of the node unfolding, transfer matrices by
// projection onto the children's Kronecker basis.
HTucker htd_decompose(const Tensor& t, const DimensionTree& tree,
                      const RankTolerance& tol = {});
// As above, but leaf_bases[p-1] (when non-empty) is used as U_p verbatim.
HTucker htd_decompose(const Tensor& t, const DimensionTree& tree,
                      const RankTolerance& tol, std::span<const Matrix> leaf_bases);

Tensor htd_reconstruct(const HTucker& h);

// Full basis U_Q of a node (prod of mode sizes x r_Q).
Matrix htd_node_basis(const HTucker& h, int node);

Vector htd_eval_hpds(const HTucker& h, const Vector& x);

// Substitutes leaf p by args[p-1]^T U_p for p = 1..k-1 and propagates to the
// root. At most one argument may have more than one column. Returns
// n_k x prod(c_p).
Matrix htd_contract(const HTucker& h, std::span<const Matrix> args);

// sum_leaf n_p r_p + sum_internal r_l r_r r_Q.
Index htd_param_count(const HTucker& h);

}  // namespace hpds
