// Dense spectra of K and the step-size bounds derived from them.

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "logit_sue/error.hpp"
#include "logit_sue/operators.hpp"

namespace sue {

namespace {

SpectralReport summarize(const Eigen::VectorXcd& ev, int pad_zeros, double theta,
                         double max_demand, double j_norm_bound) {
  SpectralReport rep;
  rep.theta = theta;
  rep.max_demand = max_demand;
  std::vector<std::pair<double, double>> vals;
  vals.reserve(static_cast<std::size_t>(ev.size() + pad_zeros));
  for (Eigen::Index i = 0; i < ev.size(); ++i) vals.emplace_back(ev[i].real(), ev[i].imag());
  for (int i = 0; i < pad_zeros; ++i) vals.emplace_back(0.0, 0.0);
  std::sort(vals.begin(), vals.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second > b.second;
  });
  double scale = 0.0;
  for (const auto& [re, im] : vals) scale = std::max(scale, std::hypot(re, im));
  rep.lambda_max = vals.empty() ? 0.0 : vals.front().first;
  rep.lambda_min = vals.empty() ? 0.0 : vals.back().first;
  for (const auto& [re, im] : vals) {
    rep.eigenvalues_real.push_back(re);
    rep.eigenvalues_imag.push_back(im);
    rep.max_abs_imag = std::max(rep.max_abs_imag, std::abs(im));
    if (std::abs(im) > 1e-6 * scale) ++rep.complex_flagged;
  }
  rep.s_g = 2.0 / (2.0 - rep.lambda_min);
  rep.s_conservative = 2.0 / (2.0 + theta * max_demand * j_norm_bound);
  return rep;
}

Eigen::VectorXcd eigenvalues(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw DimensionError("spectral analysis needs a square matrix");
  if (m.rows() == 0) return {};
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
  if (es.info() != Eigen::Success) throw NumericalError("eigensolver did not converge");
  return es.eigenvalues();
}

/// G = D Dᵀ, entry (l, m) counts paths using both links.
Eigen::MatrixXd link_gram(const IncidenceMatrix& d) {
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(d.rows, d.rows);
  for (int i = 0; i < d.cols; ++i) {
    for (int a = d.col_ptr[i]; a < d.col_ptr[i + 1]; ++a) {
      for (int b = d.col_ptr[i]; b < d.col_ptr[i + 1]; ++b) g(d.col_links[a], d.col_links[b]) += 1.0;
    }
  }
  return g;
}

}  // namespace

SpectralReport spectral_analysis(const Eigen::MatrixXd& k, double theta, double max_demand,
                                 double j_norm_bound) {
  return summarize(eigenvalues(k), 0, theta, max_demand, j_norm_bound);
}

SpectralReport spectral_analysis_link_space(const FlowState& s, double j_norm_bound) {
  const auto& prob = s.problem();
  const auto& d = prob.incidence();
  const int nl = d.rows;
  const int n = d.cols;
  const SOperator sop(s);
  const auto t = s.marginal_costs();

  // A = −T' D S Dᵀ shares the nonzero eigenvalues of K = −S Dᵀ T' D.
  Eigen::MatrixXd a(nl, nl);
  std::vector<double> u(static_cast<std::size_t>(n)), su(u.size());
  for (int l = 0; l < nl; ++l) {
    std::fill(u.begin(), u.end(), 0.0);
    for (int j = d.row_ptr[l]; j < d.row_ptr[l + 1]; ++j) u[d.row_paths[j]] = 1.0;
    sop.apply(u, su);
    for (int m = 0; m < nl; ++m) {
      double acc = 0.0;
      for (int j = d.row_ptr[m]; j < d.row_ptr[m + 1]; ++j) acc += su[d.row_paths[j]];
      a(m, l) = -t[m] * acc;
    }
  }
  // With n < |L| the link-space matrix carries |L| − n extra zeros; keep the
  // reported count at n by dropping the smallest-magnitude ones.
  Eigen::VectorXcd ev = eigenvalues(a);
  int pad = n - nl;
  if (pad < 0) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(ev.size()));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](auto x, auto y) { return std::abs(ev[x]) > std::abs(ev[y]); });
    Eigen::VectorXcd kept(n);
    for (int i = 0; i < n; ++i) kept[i] = ev[order[static_cast<std::size_t>(i)]];
    ev = kept;
    pad = 0;
  }
  auto rep = summarize(ev, pad, prob.theta(), prob.max_demand(), j_norm_bound);
  rep.method = "link-space";
  return rep;
}

double j_norm_exact(const JOperator& j) {
  const auto& d = j.incidence();
  const auto t = j.marginal_costs();
  Eigen::MatrixXd g = link_gram(d);
  Eigen::VectorXd root(d.rows);
  for (int l = 0; l < d.rows; ++l) root[l] = std::sqrt(std::max(t[l], 0.0));
  g = root.asDiagonal() * g * root.asDiagonal();
  if (g.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("symmetric eigensolver did not converge");
  return std::max(0.0, es.eigenvalues().maxCoeff());
}

JNormBound j_norm_upper_bound(const SueProblem& prob) {
  const auto& d = prob.incidence();
  JNormBound out;
  std::vector<double> paths(static_cast<std::size_t>(d.cols));
  const auto ddt = [&](std::span<const double> v, std::span<double> res) {
    // Dᵀ v, then D (Dᵀ v)
    for (int i = 0; i < d.cols; ++i) {
      double acc = 0.0;
      for (int j = d.col_ptr[i]; j < d.col_ptr[i + 1]; ++j) acc += v[d.col_links[j]];
      paths[i] = acc;
    }
    load(d, paths, res);
  };
  out.d_norm = std::sqrt(power_iteration(ddt, d.rows, 2000, 1e-14));
  const double a_max = prob.total_demand();
  for (const auto& link : prob.network().links) {
    out.tprime_amax_norm = std::max(out.tprime_amax_norm, link_cost_derivative(link, a_max));
  }
  out.bound = out.d_norm * out.d_norm * out.tprime_amax_norm;
  return out;
}

}  // namespace sue
