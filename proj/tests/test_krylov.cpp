#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "fixtures.hpp"
#include "logit_sue/error.hpp"
#include "logit_sue/krylov.hpp"
#include "logit_sue/operators.hpp"

using namespace sue;

namespace {

LinearOperator dense_op(const Eigen::MatrixXd& a) {
  return [a](std::span<const double> v, std::span<double> out) {
    Eigen::Map<const Eigen::VectorXd> x(v.data(), static_cast<Eigen::Index>(v.size()));
    Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<Eigen::Index>(out.size())) = a * x;
  };
}

double true_rel_residual(const Eigen::MatrixXd& a, const std::vector<double>& x,
                         const std::vector<double>& b) {
  Eigen::Map<const Eigen::VectorXd> xv(x.data(), x.size());
  Eigen::Map<const Eigen::VectorXd> bv(b.data(), b.size());
  return (a * xv - bv).norm() / bv.norm();
}

}  // namespace

TEST_CASE("identity converges in one iteration") {
  const auto r = gmres(dense_op(Eigen::MatrixXd::Identity(4, 4)),
                       std::vector<double>{1, 2, 3, 4}, 1e-12, 10);
  CHECK(r.converged);
  CHECK(r.iterations == 1);
  CHECK(r.solution[3] == doctest::Approx(4.0));
}

TEST_CASE("diagonal system") {
  Eigen::MatrixXd a = Eigen::Vector3d(1, 2, 4).asDiagonal();
  const auto r = gmres(dense_op(a), std::vector<double>{1, 1, 1}, 1e-12, 10);
  CHECK(r.converged);
  CHECK(r.iterations <= 3);
  CHECK(r.solution[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.solution[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.solution[2] == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("zero right-hand side is rejected") {
  CHECK_THROWS_AS(gmres(dense_op(Eigen::MatrixXd::Identity(2, 2)), std::vector<double>{0, 0}, 1e-8, 5),
                  DomainError);
}

TEST_CASE("braess newton direction") {
  auto prob = fixtures::braess(1.0);
  FlowState s(*prob, {2.0, 2.0, 2.0});
  SOperator sop(s);
  JOperator jop(s);
  const auto f = s.residual();
  const std::vector<double> b(f.begin(), f.end());
  const auto r = gmres([&](auto v, auto out) { apply_I_minus_K(sop, jop, v, out); }, b, 1e-12, 10);
  CHECK(r.converged);
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(3, 3) - dense_K(sop, jop);
  const Eigen::Vector3d ref = a.partialPivLu().solve(Eigen::Vector3d(b[0], b[1], b[2]));
  for (int i = 0; i < 3; ++i) CHECK(r.solution[i] == doctest::Approx(ref[i]).epsilon(1e-10));
  CHECK(r.solution[0] + r.solution[1] + r.solution[2] == doctest::Approx(0.0).scale(1e-12));
}

TEST_CASE("residual history is non-increasing and the final residual is honest") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  for (int t = 0; t < 20; ++t) {
    const int n = 5 + static_cast<int>(rng() % 40);
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) * 3.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) += g(rng) / std::sqrt(n);
    std::vector<double> b(n);
    for (auto& x : b) x = g(rng);
    const auto r = gmres(dense_op(a), b, 1e-10, n);
    for (std::size_t k = 1; k < r.residual_history.size(); ++k)
      CHECK(r.residual_history[k] <= r.residual_history[k - 1] * (1 + 1e-12));
    CHECK(r.relative_residual == doctest::Approx(true_rel_residual(a, r.solution, b)).epsilon(1e-6).scale(1e-14));
    CHECK(r.converged == (r.relative_residual <= 1e-10 * (1 + 1e-10)));
    CHECK(r.converged);
  }
}

TEST_CASE("restarted gmres reports its true state") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g;
  const int n = 30;
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
  for (int i = 0; i < n; ++i) a(i, i) = 1.0 + i;
  std::vector<double> b(n);
  for (auto& x : b) x = g(rng);
  GmresOptions opt;
  opt.tol = 1e-10;
  opt.max_dim = 4;
  opt.max_restarts = 200;
  const auto many = gmres(dense_op(a), b, opt);
  CHECK(many.converged);
  CHECK(true_rel_residual(a, many.solution, b) <= 1e-10 * (1 + 1e-6));
  opt.max_restarts = 0;
  const auto few = gmres(dense_op(a), b, opt);
  CHECK_FALSE(few.converged);
  CHECK(few.iterations <= 4);
  CHECK(few.relative_residual == doctest::Approx(true_rel_residual(a, few.solution, b)).epsilon(1e-8));
}

TEST_CASE("newton directions preserve OD sums on random states") {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 100; ++t) {
    auto prob = fixtures::random_small(rng, 0.1 + (rng() % 100) / 40.0);
    FlowState s(*prob, fixtures::random_flows(*prob, rng));
    SOperator sop(s);
    JOperator jop(s);
    const auto f = s.residual();
    const std::vector<double> b(f.begin(), f.end());
    if (norm2(b) == 0.0) continue;
    const auto r = gmres([&](auto v, auto out) { apply_I_minus_K(sop, jop, v, out); }, b, 1e-12,
                         prob->n() + 5);
    const auto off = prob->od_offsets();
    for (int od = 0; od < prob->od_count(); ++od) {
      double sum = 0.0;
      for (int i = off[od]; i < off[od + 1]; ++i) sum += r.solution[i];
      CHECK(std::abs(sum) <= 1e-9 * std::max(1.0, prob->od_demand()[od]));
    }
  }
}
