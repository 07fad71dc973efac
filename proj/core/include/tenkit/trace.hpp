#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace tenkit {

/// Per-outer-iteration record: relative error, wall-clock phase timers,
/// kernel flop counts, and (for distributed runs) modeled communication
/// times and per-worker words moved.
struct IterationRow {
  std::uint64_t iter = 0;
  double eps = 0.0;
  double t_pm = 0.0;
  double t_mttv = 0.0;
  double t_krp = 0.0;
  double t_nls = 0.0;
  double t_gram = 0.0;
  double t_err = 0.0;
  std::uint64_t flops_pm = 0;
  std::uint64_t flops_mttv = 0;
  std::uint64_t flops_krp = 0;
  double t_factor_comm = 0.0;  // alpha-beta model, deterministic
  double t_gram_comm = 0.0;    // alpha-beta model, deterministic
  double words_factor = 0.0;   // per-worker words moved
  double words_gram = 0.0;
};

struct IterationTrace {
  std::vector<IterationRow> rows;

  double final_eps() const { return rows.empty() ? 0.0 : rows.back().eps; }
};

/// CSV export. Measured wall-clock columns are emitted as 0 unless
/// `include_timers` is set, so default exports are bit-reproducible; the
/// modeled communication columns are deterministic and always written.
void write_trace_csv(std::ostream& os, const IterationTrace& trace, bool include_timers = false);

}  // namespace tenkit
