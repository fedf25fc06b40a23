#include "logit_sue/krylov.hpp"

#include <cmath>

#include "logit_sue/error.hpp"
#include "logit_sue/kernels.hpp"

namespace sue {

namespace {

double nrm(const std::vector<double>& x) { return std::sqrt(kernels().sum_sq(x.data(), x.size())); }

}  // namespace

GmresResult gmres(const LinearOperator& apply, std::span<const double> b, double tol, int max_dim) {
  return gmres(apply, b, GmresOptions{tol, max_dim, 5});
}

GmresResult gmres(const LinearOperator& apply, std::span<const double> b, const GmresOptions& opt) {
  if (!(opt.tol > 0.0 && opt.tol < 1.0)) throw DomainError("gmres tolerance must lie in (0, 1)");
  if (opt.max_dim < 1) throw DomainError("gmres max_dim must be at least 1");
  const auto& k = kernels();
  const std::size_t n = b.size();
  const double bnorm = std::sqrt(k.sum_sq(b.data(), n));
  if (bnorm == 0.0) throw DomainError("gmres called with a zero right-hand side");

  GmresResult res;
  res.solution.assign(n, 0.0);
  auto& x = res.solution;
  const int m = std::min<int>(opt.max_dim, static_cast<int>(n));

  std::vector<double> r(b.begin(), b.end());
  std::vector<double> ax(n);
  std::vector<std::vector<double>> v;
  std::vector<std::vector<double>> h;  // h[j] is column j, length j + 2
  std::vector<double> cs, sn, g;

  // Each cycle starts from the true residual, so a cycle that stops on the
  // recurrence estimate alone is re-checked before exit.
  for (int cycle = 0; cycle <= opt.max_restarts; ++cycle) {
    if (cycle > 0) {
      apply(x, ax);
      for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ax[i];
    }
    const double beta = nrm(r);
    if (beta <= opt.tol * bnorm) break;

    v.assign(1, r);
    for (auto& e : v[0]) e /= beta;
    h.clear();
    cs.clear();
    sn.clear();
    g.assign(1, beta);

    int j = 0;
    for (; j < m; ++j) {
      std::vector<double> w(n);
      apply(v[j], w);
      ++res.iterations;
      const double w_before = nrm(w);
      std::vector<double> col(static_cast<std::size_t>(j) + 2, 0.0);
      for (int i = 0; i <= j; ++i) {
        const double hij = k.dot(w.data(), v[i].data(), n);
        col[i] = hij;
        k.axpy(-hij, v[i].data(), w.data(), n);
      }
      double wn = nrm(w);
      // Second pass when cancellation suggests lost orthogonality.
      if (wn < (1.0 - 1e-8) * w_before) {
        for (int i = 0; i <= j; ++i) {
          const double c = k.dot(w.data(), v[i].data(), n);
          if (std::abs(c) > 1e-8 * wn) {
            col[i] += c;
            k.axpy(-c, v[i].data(), w.data(), n);
          }
        }
        wn = nrm(w);
      }
      col[j + 1] = wn;

      for (int i = 0; i < j; ++i) {
        const double t = cs[i] * col[i] + sn[i] * col[i + 1];
        col[i + 1] = -sn[i] * col[i] + cs[i] * col[i + 1];
        col[i] = t;
      }
      const double denom = std::hypot(col[j], col[j + 1]);
      double c = 1.0, s = 0.0;
      if (denom != 0.0) {
        c = col[j] / denom;
        s = col[j + 1] / denom;
      }
      cs.push_back(c);
      sn.push_back(s);
      col[j] = denom;
      col[j + 1] = 0.0;
      g.push_back(-s * g[j]);
      g[j] = c * g[j];
      h.push_back(std::move(col));
      res.residual_history.push_back(std::abs(g[j + 1]) / bnorm);

      const bool breakdown = wn <= 1e-14 * w_before || wn == 0.0;
      if (std::abs(g[j + 1]) <= opt.tol * bnorm || breakdown) {
        ++j;
        break;
      }
      for (auto& e : w) e /= wn;
      v.push_back(std::move(w));
    }

    // Back substitution on the triangular factor.
    std::vector<double> y(static_cast<std::size_t>(j), 0.0);
    for (int i = j - 1; i >= 0; --i) {
      double acc = g[i];
      for (int l = i + 1; l < j; ++l) acc -= h[l][i] * y[l];
      y[i] = h[i][i] != 0.0 ? acc / h[i][i] : 0.0;
    }
    for (int i = 0; i < j; ++i) k.axpy(y[i], v[i].data(), x.data(), n);
  }

  apply(x, ax);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ax[i];
  res.relative_residual = nrm(r) / bnorm;
  res.converged = res.relative_residual <= opt.tol * (1.0 + 1e-10);
  return res;
}

}  // namespace sue
