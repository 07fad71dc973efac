#include "tenkit/trace.hpp"

#include <cstdio>
#include <ostream>

namespace tenkit {
namespace {

void put_g17(std::ostream& os, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  os << buf;
}

}  // namespace

void write_trace_csv(std::ostream& os, const IterationTrace& trace, bool include_timers) {
  os << "iter,eps,t_pm,t_mttv,t_krp,t_nls,t_gram,t_err,"
        "flops_pm,flops_mttv,flops_krp,"
        "t_factor_comm,t_gram_comm,words_factor,words_gram\n";
  for (const auto& r : trace.rows) {
    os << r.iter << ',';
    put_g17(os, r.eps);
    const double timers[6] = {r.t_pm, r.t_mttv, r.t_krp, r.t_nls, r.t_gram, r.t_err};
    for (double t : timers) {
      os << ',';
      put_g17(os, include_timers ? t : 0.0);
    }
    os << ',' << r.flops_pm << ',' << r.flops_mttv << ',' << r.flops_krp << ',';
    put_g17(os, r.t_factor_comm);
    os << ',';
    put_g17(os, r.t_gram_comm);
    os << ',';
    put_g17(os, r.words_factor);
    os << ',';
    put_g17(os, r.words_gram);
    os << '\n';
  }
}

}  // namespace tenkit
