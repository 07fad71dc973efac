#include "tenkit/nls.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "tenkit/kruskal.hpp"

namespace tenkit {
namespace {

/// Cholesky factorization of a symmetric matrix stored densely. Returns
/// false on a non-positive pivot instead of throwing, so callers can fall
/// back to a pseudo-solve.
bool cholesky_factor(std::vector<double>& a, std::size_t n) {
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(a[i + i * n]));
  const double tol = 1e-13 * std::max(1.0, max_diag);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a[j + j * n];
    for (std::size_t k = 0; k < j; ++k) d -= a[j + k * n] * a[j + k * n];
    if (!(d > tol)) return false;
    const double ljj = std::sqrt(d);
    a[j + j * n] = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a[i + j * n];
      for (std::size_t k = 0; k < j; ++k) s -= a[i + k * n] * a[j + k * n];
      a[i + j * n] = s / ljj;
    }
  }
  return true;
}

void cholesky_solve(const std::vector<double>& l, std::size_t n, std::vector<double>& x) {
  for (std::size_t i = 0; i < n; ++i) {
    double s = x[i];
    for (std::size_t k = 0; k < i; ++k) s -= l[i + k * n] * x[k];
    x[i] = s / l[i + i * n];
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double s = x[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= l[k + ii * n] * x[k];
    x[ii] = s / l[ii + ii * n];
  }
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix; used only for the
/// smallest-norm pseudo-solve of singular passive-set subsystems.
void jacobi_eig(std::vector<double> a, std::size_t n, std::vector<double>& evals,
                std::vector<double>& evecs) {
  evecs.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) evecs[i + i * n] = 1.0;
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p + q * n] * a[p + q * n];
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p + q * n];
        if (apq == 0.0) continue;
        const double theta = (a[q + q * n] - a[p + p * n]) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k + p * n];
          const double akq = a[k + q * n];
          a[k + p * n] = c * akp - s * akq;
          a[k + q * n] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p + k * n];
          const double aqk = a[q + k * n];
          a[p + k * n] = c * apk - s * aqk;
          a[q + k * n] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = evecs[k + p * n];
          const double vkq = evecs[k + q * n];
          evecs[k + p * n] = c * vkp - s * vkq;
          evecs[k + q * n] = s * vkp + c * vkq;
        }
      }
    }
  }
  evals.resize(n);
  for (std::size_t i = 0; i < n; ++i) evals[i] = a[i + i * n];
}

void pseudo_solve(const std::vector<double>& a, std::size_t n, std::vector<double>& x) {
  std::vector<double> evals, evecs;
  jacobi_eig(a, n, evals, evecs);
  double lmax = 0.0;
  for (double v : evals) lmax = std::max(lmax, std::abs(v));
  const double cut = 1e-12 * std::max(1.0, lmax);
  std::vector<double> y(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double dot = 0.0;
    for (std::size_t i = 0; i < n; ++i) dot += evecs[i + j * n] * x[i];
    y[j] = std::abs(evals[j]) > cut ? dot / evals[j] : 0.0;
  }
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += evecs[i + j * n] * y[j];
    x[i] = s;
  }
}

void apply_zero_column_guard(Matrix& h) {
  for (std::size_t c = 0; c < h.cols(); ++c) {
    bool all_zero = true;
    for (double v : h.col(c))
      if (v != 0.0) {
        all_zero = false;
        break;
      }
    if (all_zero)
      for (double& v : h.col(c)) v = kZeroColumnGuard;
  }
}

class BppRowSolver {
 public:
  BppRowSolver(const Matrix& s, NnlsReport* report)
      : s_(s), r_(s.cols()), report_(report), h_(r_), g_(r_), passive_(r_, 0) {}

  void solve_row(const double* m, double* out, std::size_t row_index) {
    std::fill(passive_.begin(), passive_.end(), 0);
    std::fill(h_.begin(), h_.end(), 0.0);
    bool flagged = false;

    std::size_t best_inf = r_ + 1;
    std::size_t exchange_cap = r_;
    const int max_iters = 100 + 20 * static_cast<int>(r_) * static_cast<int>(r_);
    for (int it = 0;; ++it) {
      if (it >= max_iters)
        throw std::runtime_error("nnls_bpp: row " + std::to_string(row_index) +
                                 " did not converge after " + std::to_string(max_iters) +
                                 " pivot iterations (" + std::to_string(count_infeasible(m)) +
                                 " infeasibilities remain)");
      solve_passive(m, flagged);
      compute_gradient(m);
      infeasible_.clear();
      for (std::size_t i = 0; i < r_; ++i) {
        if (passive_[i] ? h_[i] < -kKktZeroTol : g_[i] < -kKktZeroTol)
          infeasible_.push_back(i);
      }
      if (infeasible_.empty()) break;
      if (infeasible_.size() < best_inf) {
        best_inf = infeasible_.size();
        exchange_cap = r_;
        for (std::size_t i : infeasible_) passive_[i] ^= 1;
      } else {
        exchange_cap = std::max<std::size_t>(1, exchange_cap / 2);
        const std::size_t k = std::min(exchange_cap, infeasible_.size());
        for (std::size_t j = 0; j < k; ++j) passive_[infeasible_[j]] ^= 1;
      }
    }

    if (flagged && report_) report_->pseudo_solved_rows.push_back(row_index);
    for (std::size_t i = 0; i < r_; ++i) out[i] = std::max(0.0, h_[i]);
  }

 private:
  void solve_passive(const double* m, bool& flagged) {
    passive_idx_.clear();
    for (std::size_t i = 0; i < r_; ++i)
      if (passive_[i]) passive_idx_.push_back(i);
    const std::size_t k = passive_idx_.size();
    std::fill(h_.begin(), h_.end(), 0.0);
    if (k == 0) return;
    sub_.assign(k * k, 0.0);
    rhs_.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
      rhs_[j] = m[passive_idx_[j]];
      for (std::size_t i = 0; i < k; ++i) sub_[i + j * k] = s_(passive_idx_[i], passive_idx_[j]);
    }
    chol_ = sub_;
    if (cholesky_factor(chol_, k)) {
      cholesky_solve(chol_, k, rhs_);
    } else {
      pseudo_solve(sub_, k, rhs_);
      flagged = true;
    }
    for (std::size_t j = 0; j < k; ++j) h_[passive_idx_[j]] = rhs_[j];
  }

  void compute_gradient(const double* m) {
    for (std::size_t i = 0; i < r_; ++i) {
      if (passive_[i]) {
        g_[i] = 0.0;
        continue;
      }
      double s = 0.0;
      for (std::size_t j : passive_idx_) s += s_(i, j) * h_[j];
      g_[i] = s - m[i];
    }
  }

  std::size_t count_infeasible(const double* m) {
    compute_gradient(m);
    std::size_t c = 0;
    for (std::size_t i = 0; i < r_; ++i)
      if (passive_[i] ? h_[i] < -kKktZeroTol : g_[i] < -kKktZeroTol) ++c;
    return c;
  }

  const Matrix& s_;
  std::size_t r_;
  NnlsReport* report_;
  std::vector<double> h_, g_;
  std::vector<char> passive_;
  std::vector<std::size_t> infeasible_, passive_idx_;
  std::vector<double> sub_, chol_, rhs_;
};

}  // namespace

Matrix nnls_bpp(const Matrix& s, const Matrix& m, NnlsReport* report) {
  if (s.rows() != s.cols()) throw std::invalid_argument("nnls_bpp: S must be square");
  if (m.cols() != s.cols()) throw std::invalid_argument("nnls_bpp: M column count must match S");
  const std::size_t rows = m.rows();
  const std::size_t r = s.cols();
  Matrix h(rows, r);
  BppRowSolver solver(s, report);
  std::vector<double> mrow(r), hrow(r);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t c = 0; c < r; ++c) mrow[c] = m(i, c);
    solver.solve_row(mrow.data(), hrow.data(), i);
    for (std::size_t c = 0; c < r; ++c) h(i, c) = hrow[c];
  }
  apply_zero_column_guard(h);
  return h;
}

void hals_update(Matrix& h, const Matrix& m, const Matrix& s) {
  if (s.rows() != s.cols()) throw std::invalid_argument("hals_update: S must be square");
  if (!h.same_shape(m) || h.cols() != s.cols())
    throw std::invalid_argument("hals_update: shape mismatch");
  const std::size_t rows = h.rows();
  const std::size_t r = h.cols();
  std::vector<double> hs(rows);
  for (std::size_t c = 0; c < r; ++c) {
    // (H S)(:,c) with the freshest H, including columns already updated in
    // this cycle.
    kernels::gemv_n(h.data(), rows, r, rows, s.data() + c * r, hs.data());
    double* hc = h.data() + c * rows;
    const double* mc = m.data() + c * rows;
    bool all_zero = true;
    for (std::size_t i = 0; i < rows; ++i) {
      const double v = hc[i] + mc[i] - hs[i];
      hc[i] = v > 0.0 ? v : 0.0;
      if (hc[i] != 0.0) all_zero = false;
    }
    if (all_zero)
      for (std::size_t i = 0; i < rows; ++i) hc[i] = kZeroColumnGuard;
  }
}

Matrix ls_unconstrained(const Matrix& s, const Matrix& m) {
  if (s.rows() != s.cols()) throw std::invalid_argument("ls_unconstrained: S must be square");
  if (m.cols() != s.cols()) throw std::invalid_argument("ls_unconstrained: M column count must match S");
  const std::size_t r = s.cols();
  std::vector<double> chol(s.span().begin(), s.span().end());
  if (!cholesky_factor(chol, r)) throw std::runtime_error("ls_unconstrained: S is singular");
  Matrix h(m.rows(), r);
  std::vector<double> x(r);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t c = 0; c < r; ++c) x[c] = m(i, c);
    cholesky_solve(chol, r, x);
    for (std::size_t c = 0; c < r; ++c) h(i, c) = x[c];
  }
  return h;
}

}  // namespace tenkit
