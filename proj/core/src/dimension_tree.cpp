#include "tenkit/dimension_tree.hpp"

#include <chrono>
#include <stdexcept>

namespace tenkit {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::uint64_t range_product(std::span<const std::uint64_t> dims, std::size_t lo, std::size_t hi) {
  std::uint64_t p = 1;
  for (std::size_t n = lo; n <= hi; ++n) p *= dims[n - 1];
  return p;
}

}  // namespace

DimensionTree::DimensionTree(std::span<const std::uint64_t> dims, std::size_t rank)
    : dims_(dims.begin(), dims.end()), rank_(rank) {
  const std::size_t n = dims_.size();
  if (n < 2) throw std::invalid_argument("dimension tree needs at least two modes");
  if (rank_ == 0) throw std::invalid_argument("dimension tree rank must be positive");

  // Balance the products of the two sides; ties go to the smaller split.
  split_ = 1;
  double best = -1.0;
  for (std::size_t s = 1; s < n; ++s) {
    const double lhs = static_cast<double>(range_product(dims_, 1, s));
    const double rhs = static_cast<double>(range_product(dims_, s + 1, n));
    const double gap = lhs > rhs ? lhs - rhs : rhs - lhs;
    if (best < 0.0 || gap < best) {
      best = gap;
      split_ = s;
    }
  }

  leaf_of_.assign(n, -1);
  nodes_.push_back(Node{1, n, -1, -1, -1});
  nodes_[0].left = add_chain(1, split_, 0);
  nodes_[0].right = add_chain(split_ + 1, n, 0);
}

int DimensionTree::add_chain(std::size_t lo, std::size_t hi, int parent) {
  const int idx = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{lo, hi, parent, -1, -1});
  if (lo == hi) {
    leaf_of_[lo - 1] = idx;
    return idx;
  }
  nodes_[idx].left = add_chain(lo, lo, idx);
  nodes_[idx].right = add_chain(lo + 1, hi, idx);
  return idx;
}

TreeMttkrp::TreeMttkrp(const DenseTensor& tensor, std::size_t rank)
    : tensor_(&tensor), tree_(tensor.dims(), rank) {
  const std::size_t n = tree_.nodes().size();
  payload_.resize(n);
  krp_scratch_.resize(n);
  valid_.assign(n, false);
  alloc_noted_.assign(2 * n, false);
}

void TreeMttkrp::note_alloc(const std::string& what, std::uint64_t words) {
  allocs_.push_back(TempAlloc{what, words});
}

std::uint64_t TreeMttkrp::temp_words() const {
  std::uint64_t w = 0;
  for (const auto& a : allocs_) w += a.words;
  return w;
}

const Matrix& TreeMttkrp::node_krp(int idx, std::size_t lo, std::size_t hi,
                                   std::span<const Matrix* const> factors, FlopLedger* ledger,
                                   MttkrpTimers* timers) {
  if (lo == hi) return *factors[lo - 1];
  auto t0 = Clock::now();
  Matrix& scratch = krp_scratch_[idx];
  krp_of_modes_into(factors, lo, hi, scratch, ledger);
  if (timers) timers->krp += seconds_since(t0);
  if (!alloc_noted_[2 * idx + 1]) {
    alloc_noted_[2 * idx + 1] = true;
    note_alloc("krp[" + std::to_string(lo) + ".." + std::to_string(hi) + "]",
               scratch.rows() * scratch.cols());
  }
  return scratch;
}

void TreeMttkrp::ensure_node(int idx, std::span<const Matrix* const> factors, FlopLedger* ledger,
                             MttkrpTimers* timers) {
  if (valid_[idx]) return;
  const auto& nodes = tree_.nodes();
  const DimensionTree::Node& node = nodes[idx];
  const DimensionTree::Node& parent = nodes[node.parent];

  if (node.parent == tree_.root()) {
    // Root edge: one matrix product against the split matricization.
    const bool left_side = node.lo == 1;
    const std::size_t clo = left_side ? tree_.root_split() + 1 : 1;
    const std::size_t chi = left_side ? tree_.order() : tree_.root_split();
    const Matrix& krp = node_krp(idx, clo, chi, factors, ledger, timers);
    auto t0 = Clock::now();
    partial_mttkrp_into(*tensor_, krp, tree_.root_split(),
                        left_side ? KeepSide::left : KeepSide::right, payload_[idx], ledger);
    if (timers) timers->pm += seconds_since(t0);
  } else {
    ensure_node(node.parent, factors, ledger, timers);
    std::vector<std::uint64_t> parent_dims;
    for (std::size_t m = parent.lo; m <= parent.hi; ++m)
      parent_dims.push_back(tensor_->dims()[m - 1]);
    if (node.lo == node.hi && node.lo == parent.lo) {
      // Leaf peeled off the front: contract all trailing modes at once.
      const Matrix& krp = node_krp(idx, parent.lo + 1, parent.hi, factors, ledger, timers);
      auto t0 = Clock::now();
      multi_ttv_into(payload_[node.parent], parent_dims, krp, MttvTarget::keep_lead_mode,
                     payload_[idx], ledger);
      if (timers) timers->mttv += seconds_since(t0);
    } else {
      // Remaining chain: contract the parent's leading mode.
      auto t0 = Clock::now();
      multi_ttv_into(payload_[node.parent], parent_dims, *factors[parent.lo - 1],
                     MttvTarget::drop_lead_mode, payload_[idx], ledger);
      if (timers) timers->mttv += seconds_since(t0);
    }
  }
  if (!alloc_noted_[2 * idx]) {
    alloc_noted_[2 * idx] = true;
    note_alloc("node[" + std::to_string(node.lo) + ".." + std::to_string(node.hi) + "]",
               payload_[idx].rows() * payload_[idx].cols());
  }
  valid_[idx] = true;
}

const Matrix& TreeMttkrp::compute(std::size_t mode1, std::span<const Matrix* const> factors,
                                  FlopLedger* ledger, MttkrpTimers* timers) {
  if (mode1 < 1 || mode1 > tree_.order()) throw std::invalid_argument("mode out of range");
  if (factors.size() != tree_.order())
    throw std::invalid_argument("one factor slot per mode required");
  const int leaf = tree_.leaf_of(mode1);
  ensure_node(leaf, factors, ledger, timers);
  return payload_[leaf];
}

void TreeMttkrp::invalidate(std::size_t mode1) {
  const auto& nodes = tree_.nodes();
  for (std::size_t i = 1; i < nodes.size(); ++i)
    if (mode1 < nodes[i].lo || mode1 > nodes[i].hi) valid_[i] = false;
}

void TreeMttkrp::invalidate_all() { valid_.assign(valid_.size(), false); }

void TreeMttkrp::sweep(std::span<const Matrix* const> factors,
                       const std::function<void(std::size_t, const Matrix&)>& visit,
                       FlopLedger* ledger, MttkrpTimers* timers) {
  for (std::size_t n = 1; n <= tree_.order(); ++n) {
    const Matrix& m = compute(n, factors, ledger, timers);
    visit(n, m);
    invalidate(n);
  }
}

}  // namespace tenkit
