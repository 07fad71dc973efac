#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tenkit/dense_tensor.hpp"
#include "tenkit/matrix.hpp"
#include "tenkit/mttkrp.hpp"

namespace tenkit {

/// Binary tree over contiguous mode ranges used to schedule MTTKRP work.
///
/// The root covers all modes and is split so the products of the two sides'
/// extents are as balanced as possible (ties break toward the smaller split
/// point). Below the root each internal node peels off its lowest mode as a
/// leaf, giving a left-leaning chain. Root children are produced by a single
/// matrix product against the split matricization (a partial MTTKRP); every
/// other edge is a multi-TTV. A root child that is already a singleton is a
/// leaf computed directly by the matrix product.
class DimensionTree {
 public:
  struct Node {
    std::size_t lo = 0, hi = 0;  // 1-based contiguous mode range [lo, hi]
    int parent = -1;
    int left = -1, right = -1;   // -1 on leaves
    bool is_leaf() const { return left < 0; }
  };

  DimensionTree(std::span<const std::uint64_t> dims, std::size_t rank);

  std::size_t order() const { return dims_.size(); }
  std::size_t rank() const { return rank_; }
  std::size_t root_split() const { return split_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  int root() const { return 0; }
  int leaf_of(std::size_t mode1) const { return leaf_of_[mode1 - 1]; }
  std::span<const std::uint64_t> dims() const { return dims_; }

 private:
  int add_chain(std::size_t lo, std::size_t hi, int parent);

  std::vector<std::uint64_t> dims_;
  std::size_t rank_;
  std::size_t split_;
  std::vector<Node> nodes_;
  std::vector<int> leaf_of_;
};

/// Serves all N MTTKRP results per outer iteration from one dimension tree,
/// reusing temporaries across modes. A node's payload depends on every
/// factor outside its mode range, so invalidate(m) marks exactly the nodes
/// that do not contain m; payloads are recomputed lazily on the next request
/// that needs them. Driving modes 1..N in order therefore recomputes each
/// root temporary once per sweep, with factor values as of the moment the
/// temporary is first needed.
class TreeMttkrp {
 public:
  struct TempAlloc {
    std::string what;
    std::uint64_t words;
  };

  TreeMttkrp(const DenseTensor& tensor, std::size_t rank);

  /// M(n) for 1-based mode n with the current factor values. `factors` has
  /// one slot per mode; the slot for the requested mode itself is unused.
  const Matrix& compute(std::size_t mode1, std::span<const Matrix* const> factors,
                        FlopLedger* ledger = nullptr, MttkrpTimers* timers = nullptr);

  /// Marks every payload that depends on mode m's factor as stale.
  void invalidate(std::size_t mode1);
  void invalidate_all();

  /// Visits modes 1..N in order; after each visit the mode's factor is
  /// assumed updated and dependent temporaries are invalidated.
  void sweep(std::span<const Matrix* const> factors,
             const std::function<void(std::size_t, const Matrix&)>& visit,
             FlopLedger* ledger = nullptr, MttkrpTimers* timers = nullptr);

  const DimensionTree& tree() const { return tree_; }

  /// Retained temporary buffers (payloads and Khatri-Rao scratch), for
  /// memory accounting. Every entry is a product of a mode-subset's extents
  /// times the rank.
  const std::vector<TempAlloc>& allocations() const { return allocs_; }
  std::uint64_t temp_words() const;

 private:
  void ensure_node(int idx, std::span<const Matrix* const> factors, FlopLedger* ledger,
                   MttkrpTimers* timers);
  const Matrix& node_krp(int idx, std::size_t lo, std::size_t hi,
                         std::span<const Matrix* const> factors, FlopLedger* ledger,
                         MttkrpTimers* timers);
  void note_alloc(const std::string& what, std::uint64_t words);

  const DenseTensor* tensor_;
  DimensionTree tree_;
  std::vector<Matrix> payload_;      // per node; leaves hold In x R results
  std::vector<Matrix> krp_scratch_;  // per node; contraction operand reused across sweeps
  std::vector<bool> valid_;
  std::vector<bool> alloc_noted_;
  std::vector<TempAlloc> allocs_;
};

}  // namespace tenkit
