#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "fdd/rsma.hpp"

using namespace fdd;

namespace {

CVec random_cvec(int dim, Rng& rng) {
  std::normal_distribution<double> g;
  CVec v(dim);
  for (int i = 0; i < dim; ++i) v[i] = cplx(g(rng), g(rng));
  return v;
}

CMat random_diag_psd(int dim, Rng& rng) {
  std::uniform_real_distribution<double> u(0.01, 0.5);
  CMat m = CMat::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) m(i, i) = u(rng);
  return m;
}

QuadraticSet random_problem(int n, int k, double snr_inv, Rng& rng) {
  std::vector<CVec> h;
  std::vector<CMat> phi;
  for (int i = 0; i < k; ++i) {
    h.push_back(random_cvec(n, rng) / std::sqrt(2.0 * n));
    phi.push_back(random_diag_psd(n, rng));
  }
  return QuadraticSet(std::move(h), std::move(phi), snr_inv);
}

PrecoderStack random_precoder(int n, int k, Rng& rng) {
  PrecoderStack f;
  f.n_antennas = n;
  f.f = random_cvec(n * (k + 1), rng);
  f.f /= f.f.norm();
  return f;
}

}  // namespace

TEST_CASE("pure-common quotient expands to the scalar SINR form") {
  Rng rng(1);
  const int n = 4, k = 3;
  const double snr_inv = 0.05;
  QuadraticSet q = random_problem(n, k, snr_inv, rng);
  PrecoderStack f;
  f.n_antennas = n;
  f.f = CVec::Zero(n * (k + 1));
  const CVec fc = random_cvec(n, rng);
  f.f.segment(0, n) = fc;
  for (int u = 0; u < k; ++u) {
    const double sig = std::norm(q.h_hat(u).dot(fc));
    const double err = std::real(fc.dot(q.phi_hat(u) * fc));
    const double num = sig + err + snr_inv * fc.squaredNorm();
    const double den = err + snr_inv * fc.squaredNorm();
    CHECK(q.quad_a_common(u, f) == doctest::Approx(num).epsilon(1e-10));
    CHECK(q.quad_b_common(u, f) == doctest::Approx(den).epsilon(1e-10));
  }
}

TEST_CASE("single-user matched filter hits the matched-filter SNR") {
  Rng rng(2);
  const int n = 6;
  const CVec h = random_cvec(n, rng);
  QuadraticSet q({h}, {CMat::Zero(n, n)}, 0.01);
  PrecoderStack f;
  f.n_antennas = n;
  f.f = CVec::Zero(2 * n);
  f.f.segment(n, n) = h / h.norm();
  const double quotient = q.quad_a_private(0, f) / q.quad_b_private(0, f);
  CHECK(quotient ==
        doctest::Approx(1.0 + h.squaredNorm() / 0.01).epsilon(1e-10));
}

TEST_CASE("dense materializations agree with the blockwise quadratics") {
  Rng rng(3);
  const int n = 4, k = 3;
  QuadraticSet q = random_problem(n, k, 0.02, rng);
  const PrecoderStack f = random_precoder(n, k, rng);
  for (int u = 0; u < k; ++u) {
    CHECK(std::real(f.f.dot(q.dense_a_common(u) * f.f)) ==
          doctest::Approx(q.quad_a_common(u, f)).epsilon(1e-10));
    CHECK(std::real(f.f.dot(q.dense_b_common(u) * f.f)) ==
          doctest::Approx(q.quad_b_common(u, f)).epsilon(1e-10));
    CHECK(std::real(f.f.dot(q.dense_a_private(u) * f.f)) ==
          doctest::Approx(q.quad_a_private(u, f)).epsilon(1e-10));
    CHECK(std::real(f.f.dot(q.dense_b_private(u) * f.f)) ==
          doctest::Approx(q.quad_b_private(u, f)).epsilon(1e-10));
  }
}

TEST_CASE("A_c - B_c is the rank-one channel term in the common block") {
  Rng rng(4);
  const int n = 4, k = 2;
  QuadraticSet q = random_problem(n, k, 0.02, rng);
  for (int u = 0; u < k; ++u) {
    const CMat diff = q.dense_a_common(u) - q.dense_b_common(u);
    const CMat want = q.h_hat(u) * q.h_hat(u).adjoint();
    CHECK((diff.block(0, 0, n, n) - want).norm() < 1e-12 * want.norm());
    CHECK(diff.norm() == doctest::Approx(want.norm()).epsilon(1e-10));
  }
}

TEST_CASE("quadratic matrices are Hermitian with the identity floor") {
  Rng rng(5);
  const int n = 4, k = 2;
  const double snr_inv = 0.03;
  QuadraticSet q = random_problem(n, k, snr_inv, rng);
  for (int u = 0; u < k; ++u) {
    for (const CMat& m : {q.dense_a_common(u), q.dense_b_common(u),
                          q.dense_a_private(u), q.dense_b_private(u)}) {
      CHECK((m - m.adjoint()).norm() < 1e-12 * m.norm());
      const Eigen::SelfAdjointEigenSolver<CMat> es(m);
      CHECK(es.eigenvalues().minCoeff() >= snr_inv * (1.0 - 1e-9));
    }
  }
}

TEST_CASE("non-Hermitian error covariance is rejected") {
  Rng rng(6);
  const int n = 4;
  CMat bad = CMat::Zero(n, n);
  bad(0, 1) = cplx(1.0, 0.0);
  CHECK_THROWS(QuadraticSet({random_cvec(n, rng)}, {bad}, 0.01));
}

TEST_CASE("lse_min of equal values is exact") {
  RVec x(4);
  x << 2.5, 2.5, 2.5, 2.5;
  CHECK(lse_min(x, 0.1) == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("lse_min two-point value matches the scalar evaluation") {
  RVec x(2);
  x << 0.0, 10.0;
  const double alpha = 0.1;
  const double want = -alpha * std::log(0.5 * (1.0 + std::exp(-100.0)));
  const double got = lse_min(x, alpha);
  CHECK(got == doctest::Approx(want).epsilon(1e-12));
  CHECK(got >= 0.0);
  CHECK(got <= alpha * std::log(2.0));
}

TEST_CASE("lse_min obeys the min/min+alpha log n bracket") {
  Rng rng(7);
  std::normal_distribution<double> g;
  for (double alpha : {1.0, 0.1, 0.01, 0.001}) {
    for (int t = 0; t < 20; ++t) {
      RVec x(5);
      for (int i = 0; i < 5; ++i) x[i] = 3.0 * g(rng);
      const double v = lse_min(x, alpha);
      CHECK(v >= x.minCoeff() - 1e-12);
      CHECK(v <= x.minCoeff() + alpha * std::log(5.0) + 1e-12);
    }
  }
}

TEST_CASE("lse_min rejects empty input") {
  CHECK_THROWS(lse_min(RVec(), 0.1));
}

TEST_CASE("objective is exactly scale invariant") {
  Rng rng(8);
  const int n = 4, k = 3;
  QuadraticSet q = random_problem(n, k, 0.02, rng);
  const PrecoderStack f = random_precoder(n, k, rng);
  const double base = objective(f, q, 0.1);
  for (double c : {0.5, 2.0, 10.0}) {
    PrecoderStack fs = f;
    fs.f *= c;
    CHECK(std::abs(objective(fs, q, 0.1) - base) < 1e-10);
  }
}

TEST_CASE("objective rejects the zero precoder") {
  Rng rng(9);
  QuadraticSet q = random_problem(4, 2, 0.02, rng);
  PrecoderStack f;
  f.n_antennas = 4;
  f.f = CVec::Zero(12);
  CHECK_THROWS(objective(f, q, 0.1));
}

TEST_CASE("kkt lambda equals two to the objective") {
  Rng rng(10);
  const int n = 4, k = 3;
  QuadraticSet q = random_problem(n, k, 0.02, rng);
  for (int t = 0; t < 10; ++t) {
    const PrecoderStack f = random_precoder(n, k, rng);
    const KktMatrices kkt = kkt_matrices(f, q, 0.1);
    const double want = std::pow(2.0, objective(f, q, 0.1));
    CHECK(std::abs(kkt.lambda - want) < 1e-9 * want);
  }
}

TEST_CASE("kkt softmax weights are a probability vector") {
  Rng rng(11);
  QuadraticSet q = random_problem(4, 5, 0.02, rng);
  const PrecoderStack f = random_precoder(4, 5, rng);
  const KktMatrices kkt = kkt_matrices(f, q, 0.1);
  REQUIRE(kkt.softmax_weights.size() == 5);
  CHECK(kkt.softmax_weights.sum() == doctest::Approx(1.0).epsilon(1e-12));
  for (int i = 0; i < 5; ++i) CHECK(kkt.softmax_weights[i] >= 0.0);
}

TEST_CASE("block-diagonal solve inverts apply") {
  Rng rng(12);
  QuadraticSet q = random_problem(4, 3, 0.02, rng);
  const PrecoderStack f = random_precoder(4, 3, rng);
  const KktMatrices kkt = kkt_matrices(f, q, 0.1);
  const CVec x = random_cvec(q.stack_dim(), rng);
  CHECK((kkt.b_kkt.apply(kkt.b_kkt.solve(x)) - x).norm() < 1e-9 * x.norm());
  CHECK((kkt.b_kkt.dense() * x - kkt.b_kkt.apply(x)).norm() <
        1e-10 * x.norm());
}

TEST_CASE("gpi beats the MRT and RZF initializations at perfect CSIT") {
  Rng rng(13);
  const int n = 8, k = 4;
  const double snr_inv = std::pow(10.0, -2.0);  // 20 dB
  std::vector<CVec> h;
  for (int u = 0; u < k; ++u) h.push_back(random_cvec(n, rng) / std::sqrt(n));
  QuadraticSet q(h, std::vector<CMat>(k, CMat::Zero(n, n)), snr_inv);
  GpiOptions opt;
  const GpiResult r = gpi_solve(q, opt);
  CHECK(r.converged);
  const PrecoderStack mrt = baseline_mrt(h);
  const PrecoderStack rzf = baseline_rzf(h, snr_inv);
  CHECK(r.objective_bits >= objective(mrt, q, opt.alpha) - 1e-9);
  CHECK(r.objective_bits >= objective(rzf, q, opt.alpha) - 1e-9);
}

TEST_CASE("gpi is deterministic for fixed inputs") {
  Rng rng(14);
  QuadraticSet q = random_problem(4, 3, 0.02, rng);
  const PrecoderStack init = random_precoder(4, 3, rng);
  GpiOptions opt;
  const GpiResult a = gpi_solve(q, opt, &init);
  const GpiResult b = gpi_solve(q, opt, &init);
  CHECK(a.iterations == b.iterations);
  CHECK((a.precoder.f - b.precoder.f).norm() == 0.0);
  CHECK(a.objective_bits == b.objective_bits);
}

TEST_CASE("single-user gpi aligns the private precoder with the channel") {
  Rng rng(15);
  const int n = 6;
  const CVec h = random_cvec(n, rng);
  QuadraticSet q({h}, {CMat::Zero(n, n)}, 1.0);  // low SNR: private only
  GpiOptions opt;
  opt.epsilon = 1e-8;
  opt.common_enabled = false;
  const GpiResult r = gpi_solve(q, opt);
  const CVec f1 = r.precoder.user(0);
  const double align = std::abs(h.dot(f1)) / (h.norm() * f1.norm());
  CHECK(align > 1.0 - 1e-6);
}

TEST_CASE("mrt and rzf coincide in direction for a single user") {
  Rng rng(16);
  const CVec h = random_cvec(5, rng);
  const PrecoderStack mrt = baseline_mrt({h});
  const PrecoderStack rzf = baseline_rzf({h}, 0.1);
  const CVec a = mrt.user(0), b = rzf.user(0);
  CHECK(std::abs(a.dot(b)) / (a.norm() * b.norm()) ==
        doctest::Approx(1.0).epsilon(1e-10));
  CHECK(mrt.common().norm() == 0.0);
  CHECK(rzf.common().norm() == 0.0);
}

TEST_CASE("rzf equals mrt per user when the channels are orthogonal") {
  const int n = 4;
  std::vector<CVec> h;
  for (int u = 0; u < 3; ++u) {
    CVec e = CVec::Zero(n);
    e[u] = cplx(0.0, 2.0 - 0.5 * u);
    h.push_back(e);
  }
  const PrecoderStack mrt = baseline_mrt(h);
  const PrecoderStack rzf = baseline_rzf(h, 0.2);
  for (int u = 0; u < 3; ++u) {
    const CVec a = mrt.user(u), b = rzf.user(u);
    CHECK(std::abs(a.dot(b)) / (a.norm() * b.norm()) ==
          doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("rzf approaches the mrt direction as the regularizer dominates") {
  Rng rng(17);
  std::vector<CVec> h;
  for (int u = 0; u < 3; ++u) h.push_back(random_cvec(4, rng));
  const PrecoderStack mrt = baseline_mrt(h);
  const PrecoderStack rzf = baseline_rzf(h, 1e8);
  for (int u = 0; u < 3; ++u) {
    const CVec a = mrt.user(u), b = rzf.user(u);
    CHECK(std::abs(a.dot(b)) / (a.norm() * b.norm()) > 1.0 - 1e-6);
  }
}

TEST_CASE("mrt normalization splits power equally across users") {
  Rng rng(18);
  std::vector<CVec> h;
  for (int u = 0; u < 4; ++u) h.push_back(random_cvec(6, rng));
  const PrecoderStack mrt = baseline_mrt(h);
  for (int u = 0; u < 4; ++u) {
    CHECK(mrt.user(u).squaredNorm() == doctest::Approx(0.25).epsilon(1e-10));
  }
  const PrecoderStack rzf = baseline_rzf(h, 0.1);
  CHECK(rzf.f.squaredNorm() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("sdma pins the common stream to zero") {
  Rng rng(19);
  QuadraticSet q = random_problem(6, 3, 0.01, rng);
  GpiOptions opt;
  const GpiResult r = baseline_sdma_gpi(q, opt);
  CHECK(r.precoder.common().norm() == 0.0);
}

TEST_CASE("rsma matches sdma on orthogonal users with perfect CSIT") {
  const int n = 6, k = 3;
  std::vector<CVec> h;
  for (int u = 0; u < k; ++u) {
    CVec e = CVec::Zero(n);
    e[u] = cplx(1.0, 0.0);
    h.push_back(e);
  }
  QuadraticSet q(h, std::vector<CMat>(k, CMat::Zero(n, n)), 0.01);
  GpiOptions opt;
  const GpiResult rsma = gpi_solve(q, opt);
  const GpiResult sdma = baseline_sdma_gpi(q, opt);
  CHECK(rsma.objective_bits >=
        sdma.objective_bits * (1.0 - 0.01));  // common stream unneeded
}
