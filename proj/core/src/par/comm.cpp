#include "tenkit/par/comm.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <set>
#include <thread>

namespace tenkit::par {

const char* kind_name(CollectiveKind k) {
  switch (k) {
    case CollectiveKind::all_reduce: return "AR";
    case CollectiveKind::reduce_scatter: return "RS";
    case CollectiveKind::all_gather: return "AG";
  }
  return "?";
}

int ceil_log2(int n) {
  int bits = 0;
  while ((1 << bits) < n) ++bits;
  return bits;
}

double CostModel::cost(CollectiveKind kind, int group_size, double words) const {
  const double lat = static_cast<double>(ceil_log2(group_size));
  const double bw = words * static_cast<double>(group_size - 1) / static_cast<double>(group_size);
  if (kind == CollectiveKind::all_reduce) return 2.0 * alpha * lat + 2.0 * beta * bw;
  return alpha * lat + beta * bw;
}

double moved_words(const CommRecord& r) {
  const double frac =
      static_cast<double>(r.group_size - 1) / static_cast<double>(r.group_size);
  const double w = static_cast<double>(r.words) * frac;
  return r.kind == CollectiveKind::all_reduce ? 2.0 * w : w;
}

double predicted_seconds(std::span<const CommRecord> records, const CostModel& model) {
  double total = 0.0;
  for (const auto& r : records)
    total += model.cost(r.kind, r.group_size, static_cast<double>(r.words));
  return total;
}

void CommLedger::record(CommRecord r) {
  std::lock_guard lk(mu_);
  records_.push_back(std::move(r));
}

std::vector<CommRecord> CommLedger::snapshot() const {
  std::lock_guard lk(mu_);
  return records_;
}

std::vector<CommRecord> CommLedger::sorted() const {
  auto out = snapshot();
  std::stable_sort(out.begin(), out.end(), [](const CommRecord& a, const CommRecord& b) {
    if (a.iter != b.iter) return a.iter < b.iter;
    if (a.subgroup != b.subgroup) return a.subgroup < b.subgroup;
    return a.seq < b.seq;
  });
  return out;
}

void write_ledger_csv(std::ostream& os, std::span<const CommRecord> records) {
  os << "iter,collective,group_size,words,subgroup\n";
  for (const auto& r : records)
    os << r.iter << ',' << kind_name(r.kind) << ',' << r.group_size << ',' << r.words << ','
       << r.subgroup << '\n';
}

Fabric::Fabric(const ProcessGrid& grid, ExecutionMode mode, CommLedger* ledger)
    : mode_(mode), world_size_(grid.size()), ledger_(ledger) {
  auto make_group = [this](std::vector<int> members, std::string label) {
    auto g = std::make_unique<Group>();
    g->members = std::move(members);
    g->label = std::move(label);
    g->member_index.assign(world_size_, -1);
    for (std::size_t i = 0; i < g->members.size(); ++i)
      g->member_index[g->members[i]] = static_cast<int>(i);
    g->posts.resize(g->members.size());
    groups_.push_back(std::move(g));
    return static_cast<int>(groups_.size() - 1);
  };

  make_group(grid.all_ranks(), "all");
  slice_gid_.resize(grid.order());
  for (std::size_t m = 1; m <= grid.order(); ++m) {
    slice_gid_[m - 1].resize(grid.dim(m));
    for (std::uint64_t c = 0; c < grid.dim(m); ++c) {
      slice_gid_[m - 1][c] = make_group(
          grid.slice_ranks(m, c),
          "slice[" + std::to_string(m) + ":" + std::to_string(c) + "]");
    }
  }
}

int Fabric::slice_group(std::size_t mode1, std::uint64_t coord_value) const {
  if (mode1 < 1 || mode1 > slice_gid_.size()) throw std::invalid_argument("slice mode out of range");
  if (coord_value >= slice_gid_[mode1 - 1].size())
    throw std::out_of_range("slice coordinate out of range");
  return slice_gid_[mode1 - 1][coord_value];
}

int Fabric::slice_group_of(std::size_t mode1, int rank) const {
  for (int gid : slice_gid_[mode1 - 1]) {
    if (groups_[gid]->member_index[rank] >= 0) return gid;
  }
  throw std::invalid_argument("rank not on the grid");
}

const std::vector<int>& Fabric::group_members(int gid) const { return groups_[gid]->members; }
const std::string& Fabric::group_label(int gid) const { return groups_[gid]->label; }

Collective Fabric::all_reduce(int rank, int gid, std::span<double> buf, std::uint64_t iter,
                              std::string_view tag, bool record) {
  detail::Request req;
  req.rank = rank;
  req.gid = gid;
  req.kind = CollectiveKind::all_reduce;
  req.inout = buf;
  req.iter = iter;
  req.tag = tag;
  req.record = record;
  return Collective(this, req);
}

Collective Fabric::reduce_scatter(int rank, int gid, std::span<const double> in,
                                  std::span<double> out, std::span<const std::uint64_t> partition,
                                  std::uint64_t iter, std::string_view tag, bool record) {
  detail::Request req;
  req.rank = rank;
  req.gid = gid;
  req.kind = CollectiveKind::reduce_scatter;
  req.in = in;
  req.out = out;
  req.partition = partition;
  req.iter = iter;
  req.tag = tag;
  req.record = record;
  return Collective(this, req);
}

Collective Fabric::all_gather(int rank, int gid, std::span<const double> in, std::span<double> out,
                              std::uint64_t iter, std::string_view tag, bool record) {
  detail::Request req;
  req.rank = rank;
  req.gid = gid;
  req.kind = CollectiveKind::all_gather;
  req.in = in;
  req.out = out;
  req.iter = iter;
  req.tag = tag;
  req.record = record;
  return Collective(this, req);
}

bool Collective::await_ready() { return fab_->post(req_); }

namespace {

/// Pairwise binomial combination over member buffers laid out as rows of
/// `scratch`; the sum lands in row 0. Summation order depends only on the
/// member count, never on arrival order.
void binomial_sum(std::vector<double>& scratch, std::size_t n, std::size_t w) {
  for (std::size_t step = 1; step < n; step *= 2) {
    for (std::size_t i = 0; i + step < n; i += 2 * step) {
      double* dst = scratch.data() + i * w;
      const double* src = scratch.data() + (i + step) * w;
      for (std::size_t j = 0; j < w; ++j) dst[j] += src[j];
    }
  }
}

}  // namespace

void Fabric::execute(Group& g) {
  const std::size_t n = g.members.size();
  const CollectiveKind kind = g.posts[0].req.kind;
  const std::uint64_t iter = g.posts[0].req.iter;
  for (const auto& p : g.posts) {
    if (p.req.kind != kind)
      throw std::logic_error("collective kind mismatch within group " + g.label);
  }

  std::uint64_t words = 0;
  switch (kind) {
    case CollectiveKind::all_reduce: {
      const std::size_t w = g.posts[0].req.inout.size();
      for (const auto& p : g.posts)
        if (p.req.inout.size() != w)
          throw std::invalid_argument("all_reduce: buffer lengths differ within group " + g.label);
      g.scratch.resize(n * w);
      for (std::size_t i = 0; i < n; ++i)
        std::copy(g.posts[i].req.inout.begin(), g.posts[i].req.inout.end(),
                  g.scratch.begin() + static_cast<std::ptrdiff_t>(i * w));
      binomial_sum(g.scratch, n, w);
      for (std::size_t i = 0; i < n; ++i)
        std::copy_n(g.scratch.begin(), w, g.posts[i].req.inout.begin());
      words = w;
      break;
    }
    case CollectiveKind::reduce_scatter: {
      const std::size_t w = g.posts[0].req.in.size();
      for (const auto& p : g.posts)
        if (p.req.in.size() != w)
          throw std::invalid_argument("reduce_scatter: buffer lengths differ within group " +
                                      g.label);
      std::vector<std::uint64_t> lens;
      if (g.posts[0].req.partition.empty()) {
        if (w % n != 0)
          throw std::invalid_argument(
              "reduce_scatter: buffer length not divisible by group size and no partition given");
        lens.assign(n, w / n);
      } else {
        lens.assign(g.posts[0].req.partition.begin(), g.posts[0].req.partition.end());
      }
      if (lens.size() != n)
        throw std::invalid_argument("reduce_scatter: partition must have one slice per member");
      std::uint64_t covered = 0;
      for (std::uint64_t l : lens) covered += l;
      if (covered != w)
        throw std::invalid_argument("reduce_scatter: partition does not cover the buffer");
      for (const auto& p : g.posts) {
        if (!p.req.partition.empty() &&
            !std::equal(p.req.partition.begin(), p.req.partition.end(), lens.begin(), lens.end()))
          throw std::invalid_argument("reduce_scatter: partitions differ within group " + g.label);
      }
      g.scratch.resize(n * w);
      for (std::size_t i = 0; i < n; ++i)
        std::copy(g.posts[i].req.in.begin(), g.posts[i].req.in.end(),
                  g.scratch.begin() + static_cast<std::ptrdiff_t>(i * w));
      binomial_sum(g.scratch, n, w);
      std::uint64_t off = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (g.posts[i].req.out.size() != lens[i])
          throw std::invalid_argument("reduce_scatter: output slice size mismatch");
        std::copy_n(g.scratch.begin() + static_cast<std::ptrdiff_t>(off), lens[i],
                    g.posts[i].req.out.begin());
        off += lens[i];
      }
      words = w;
      break;
    }
    case CollectiveKind::all_gather: {
      std::uint64_t total = 0;
      for (const auto& p : g.posts) total += p.req.in.size();
      for (const auto& p : g.posts)
        if (p.req.out.size() != total)
          throw std::invalid_argument("all_gather: output must hold the full gathered buffer");
      std::uint64_t off = 0;
      for (std::size_t i = 0; i < n; ++i) {
        std::copy(g.posts[i].req.in.begin(), g.posts[i].req.in.end(),
                  g.posts[0].req.out.begin() + static_cast<std::ptrdiff_t>(off));
        off += g.posts[i].req.in.size();
      }
      for (std::size_t i = 1; i < n; ++i)
        std::copy(g.posts[0].req.out.begin(), g.posts[0].req.out.end(), g.posts[i].req.out.begin());
      words = total;
      break;
    }
  }

  if (ledger_ != nullptr && g.posts[0].req.record) {
    CommRecord rec;
    rec.iter = iter;
    rec.kind = kind;
    rec.group_size = static_cast<int>(n);
    rec.words = words;
    rec.subgroup = g.label;
    rec.seq = g.seq;
    rec.tag = std::string(g.posts[0].req.tag);
    ledger_->record(std::move(rec));
  }
  ++g.seq;
}

bool Fabric::post(const detail::Request& req) {
  if (req.gid < 0 || req.gid >= static_cast<int>(groups_.size()))
    throw std::invalid_argument("unknown communicator group");
  Group& g = *groups_[req.gid];
  std::unique_lock lk(g.mu);
  if (poisoned_.load()) throw WorkerAborted();
  const int mi = g.member_index[req.rank];
  if (mi < 0) throw std::invalid_argument("rank " + std::to_string(req.rank) +
                                          " is not a member of group " + g.label);
  if (g.posts[mi].valid) throw std::logic_error("double post to group " + g.label);
  g.posts[mi] = Post{true, req};
  ++g.arrived;

  if (g.arrived == g.members.size()) {
    try {
      execute(g);
    } catch (...) {
      for (auto& p : g.posts) p.valid = false;
      g.arrived = 0;
      lk.unlock();
      poison();
      throw;
    }
    for (auto& p : g.posts) p.valid = false;
    g.arrived = 0;
    ++g.epoch;
    if (mode_ == ExecutionMode::threaded) {
      lk.unlock();
      g.cv.notify_all();
    } else {
      for (int r : g.members)
        if (r != req.rank) wake_list_.push_back(r);
    }
    return true;
  }

  if (mode_ == ExecutionMode::simulated) return false;

  const std::uint64_t target = g.epoch;
  g.cv.wait(lk, [&] { return g.epoch != target || poisoned_.load(); });
  if (g.epoch == target) throw WorkerAborted();
  return true;
}

void Fabric::poison() {
  poisoned_.store(true);
  for (auto& g : groups_) {
    std::lock_guard lk(g->mu);
    g->cv.notify_all();
  }
}

std::vector<int> Fabric::drain_wake_list() {
  std::vector<int> out;
  out.swap(wake_list_);
  return out;
}

void Fabric::run_spmd(const ProcessGrid& grid, ExecutionMode mode, Fabric& fabric,
                      const std::function<WorkerTask(int rank)>& body) {
  const int p = grid.size();
  std::vector<WorkerTask> tasks;
  tasks.reserve(p);
  for (int r = 0; r < p; ++r) tasks.push_back(body(r));

  if (mode == ExecutionMode::simulated) {
    std::set<int> runnable;
    for (int r = 0; r < p; ++r) runnable.insert(r);
    int finished = 0;
    std::vector<bool> done(p, false);
    while (finished < p) {
      if (runnable.empty())
        throw std::runtime_error("collective deadlock: all live workers are blocked");
      const int r = *runnable.begin();
      runnable.erase(runnable.begin());
      tasks[r].handle().resume();
      if (auto err = tasks[r].handle().promise().error) std::rethrow_exception(err);
      for (int w : fabric.drain_wake_list())
        if (!done[w]) runnable.insert(w);
      if (tasks[r].handle().done()) {
        done[r] = true;
        ++finished;
      }
    }
    return;
  }

  std::vector<std::exception_ptr> errors(p);
  std::vector<std::thread> threads;
  threads.reserve(p);
  for (int r = 0; r < p; ++r) {
    threads.emplace_back([&, r] {
      tasks[r].handle().resume();
      if (auto err = tasks[r].handle().promise().error) {
        errors[r] = err;
        fabric.poison();
      }
    });
  }
  for (auto& t : threads) t.join();

  // Prefer a root-cause exception over cascading WorkerAborted ones.
  std::exception_ptr first_abort;
  for (int r = 0; r < p; ++r) {
    if (!errors[r]) continue;
    try {
      std::rethrow_exception(errors[r]);
    } catch (const WorkerAborted&) {
      if (!first_abort) first_abort = errors[r];
    } catch (...) {
      std::rethrow_exception(errors[r]);
    }
  }
  if (first_abort) std::rethrow_exception(first_abort);
}

}  // namespace tenkit::par
