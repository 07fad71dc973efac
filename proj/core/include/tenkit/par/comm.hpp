#pragma once

#include <atomic>
#include <condition_variable>
#include <coroutine>
#include <cstdint>
#include <exception>
#include <functional>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tenkit/par/process_grid.hpp"

namespace tenkit::par {

/// How the virtual workers execute.
///  - simulated: a single scheduler thread steps every worker coroutine to
///    its next collective; fully deterministic, no OS threads.
///  - threaded: one thread per worker; workers rendezvous only inside
///    collectives. The reduction order is canonical either way, so the two
///    modes produce bitwise-identical results.
enum class ExecutionMode { simulated, threaded };

enum class CollectiveKind { all_reduce, reduce_scatter, all_gather };

const char* kind_name(CollectiveKind k);

/// Latency/bandwidth communication model: a collective over P' workers
/// moving W words costs
///   All-Reduce:      2 a ceil(log2 P') + 2 b W (P'-1)/P'
///   Reduce-Scatter:    a ceil(log2 P') +   b W (P'-1)/P'
///   All-Gather:        a ceil(log2 P') +   b W (P'-1)/P'
struct CostModel {
  double alpha = 0.0;  ///< seconds per message
  double beta = 0.0;   ///< seconds per word

  double cost(CollectiveKind kind, int group_size, double words) const;
};

int ceil_log2(int n);

/// One executed group collective.
struct CommRecord {
  std::uint64_t iter = 0;
  CollectiveKind kind = CollectiveKind::all_reduce;
  int group_size = 0;
  std::uint64_t words = 0;  ///< payload W as used in the cost formulas
  std::string subgroup;
  std::uint64_t seq = 0;  ///< per-group op counter
  std::string tag;        ///< phase: "factor", "gram", "error", ...
};

/// Words actually moved per worker under the model (the bandwidth term).
double moved_words(const CommRecord& r);

/// Sum of the model cost over all entries.
double predicted_seconds(std::span<const CommRecord> records, const CostModel& model);

class CommLedger {
 public:
  void record(CommRecord r);
  /// Entries ordered by (iter, subgroup, seq); identical across execution
  /// modes.
  std::vector<CommRecord> sorted() const;
  std::vector<CommRecord> snapshot() const;

 private:
  mutable std::mutex mu_;
  std::vector<CommRecord> records_;
};

/// Columns: iter, collective, group_size, words, subgroup.
void write_ledger_csv(std::ostream& os, std::span<const CommRecord> records);

/// Thrown into workers whose collective partner failed.
struct WorkerAborted : std::runtime_error {
  WorkerAborted() : std::runtime_error("peer worker failed during a collective") {}
};

class Fabric;

/// Coroutine handle for one worker's program. Workers start suspended; the
/// runner drives them.
class WorkerTask {
 public:
  struct promise_type {
    std::exception_ptr error;
    WorkerTask get_return_object() {
      return WorkerTask(std::coroutine_handle<promise_type>::from_promise(*this));
    }
    std::suspend_always initial_suspend() noexcept { return {}; }
    std::suspend_always final_suspend() noexcept { return {}; }
    void return_void() {}
    void unhandled_exception() { error = std::current_exception(); }
  };
  using Handle = std::coroutine_handle<promise_type>;

  explicit WorkerTask(Handle h) : handle_(h) {}
  WorkerTask(WorkerTask&& o) noexcept : handle_(o.handle_) { o.handle_ = {}; }
  WorkerTask& operator=(WorkerTask&&) = delete;
  WorkerTask(const WorkerTask&) = delete;
  ~WorkerTask() {
    if (handle_) handle_.destroy();
  }
  Handle handle() const { return handle_; }

 private:
  Handle handle_;
};

namespace detail {

struct Request {
  int rank = -1;
  int gid = -1;
  CollectiveKind kind = CollectiveKind::all_reduce;
  std::span<double> inout;          // all_reduce
  std::span<const double> in;       // reduce_scatter / all_gather
  std::span<double> out;            // reduce_scatter / all_gather
  std::span<const std::uint64_t> partition;  // reduce_scatter slice lengths
  std::uint64_t iter = 0;
  std::string_view tag;
  bool record = true;  // false keeps the call out of the ledger
};

}  // namespace detail

/// Awaitable returned by the fabric's collective calls. In threaded mode the
/// rendezvous blocks inside await_ready and the coroutine never suspends; in
/// simulated mode the worker suspends until the scheduler completes the
/// group operation.
class [[nodiscard]] Collective {
 public:
  Collective(Fabric* fab, detail::Request req) : fab_(fab), req_(req) {}
  bool await_ready();
  void await_suspend(std::coroutine_handle<>) {}
  void await_resume() {}

 private:
  Fabric* fab_;
  detail::Request req_;
};

/// In-process rendezvous fabric over a process grid: subgroup communicators
/// for the whole grid and for every mode-n slice, plus the three collectives
/// with exact traffic accounting.
///
/// Reductions are applied per element over the group members in ascending
/// member order with a pairwise (binomial) combination tree, so every result
/// is bitwise independent of arrival order and execution mode, and
/// reduce-scatter followed by all-gather reproduces all-reduce exactly.
class Fabric {
 public:
  Fabric(const ProcessGrid& grid, ExecutionMode mode, CommLedger* ledger = nullptr);

  ExecutionMode mode() const { return mode_; }
  int world_size() const { return world_size_; }
  CommLedger* ledger() const { return ledger_; }

  int all_group() const { return 0; }
  int slice_group(std::size_t mode1, std::uint64_t coord_value) const;
  int slice_group_of(std::size_t mode1, int rank) const;
  const std::vector<int>& group_members(int gid) const;
  const std::string& group_label(int gid) const;

  /// Elementwise sum stored back into every member's buffer.
  Collective all_reduce(int rank, int gid, std::span<double> buf, std::uint64_t iter,
                        std::string_view tag, bool record = true);

  /// Elementwise sum; member i receives its slice of the partition. An empty
  /// partition means equal contiguous slices (requires divisibility).
  Collective reduce_scatter(int rank, int gid, std::span<const double> in, std::span<double> out,
                            std::span<const std::uint64_t> partition, std::uint64_t iter,
                            std::string_view tag, bool record = true);

  /// Concatenation of all members' buffers, in member order, delivered to
  /// every member.
  Collective all_gather(int rank, int gid, std::span<const double> in, std::span<double> out,
                        std::uint64_t iter, std::string_view tag, bool record = true);

  /// Drives one coroutine per grid rank to completion under the configured
  /// execution mode. Exceptions from worker bodies are rethrown (lowest rank
  /// first, preferring root causes over WorkerAborted).
  static void run_spmd(const ProcessGrid& grid, ExecutionMode mode, Fabric& fabric,
                       const std::function<WorkerTask(int rank)>& body);

 private:
  friend class Collective;

  struct Post {
    bool valid = false;
    detail::Request req;
  };

  struct Group {
    std::vector<int> members;
    std::vector<int> member_index;  // rank -> index, -1 if absent
    std::string label;
    std::mutex mu;
    std::condition_variable cv;
    std::uint64_t epoch = 0;
    std::uint64_t seq = 0;
    std::size_t arrived = 0;
    std::vector<Post> posts;
    std::vector<double> scratch;
  };

  bool post(const detail::Request& req);
  void execute(Group& g);
  void poison();
  std::vector<int> drain_wake_list();

  ExecutionMode mode_;
  int world_size_;
  CommLedger* ledger_;
  std::vector<std::unique_ptr<Group>> groups_;
  std::vector<std::vector<int>> slice_gid_;  // [mode][coord] -> gid
  std::atomic<bool> poisoned_{false};
  // simulated-mode scheduler state
  std::vector<int> wake_list_;
};

}  // namespace tenkit::par
