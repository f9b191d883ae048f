#include "fdd/rsma.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace fdd {

CVec BlockDiag::apply(const CVec& x) const {
  const auto n = blocks[0].rows();
  CVec out(x.size());
  for (size_t b = 0; b < blocks.size(); ++b)
    out.segment(b * n, n) = blocks[b] * x.segment(b * n, n);
  return out;
}

CVec BlockDiag::solve(const CVec& x) const {
  const auto n = blocks[0].rows();
  CVec out(x.size());
  for (size_t b = 0; b < blocks.size(); ++b) {
    Eigen::LLT<CMat> llt(blocks[b]);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("BlockDiag::solve: block not positive definite");
    out.segment(b * n, n) = llt.solve(x.segment(b * n, n));
  }
  return out;
}

CMat BlockDiag::dense() const {
  const auto n = blocks[0].rows();
  CMat out = CMat::Zero(n * blocks.size(), n * blocks.size());
  for (size_t b = 0; b < blocks.size(); ++b)
    out.block(b * n, b * n, n, n) = blocks[b];
  return out;
}

QuadraticSet::QuadraticSet(std::vector<CVec> h_hat, std::vector<CMat> phi_hat,
                           double snr_inv)
    : h_(std::move(h_hat)), phi_(std::move(phi_hat)), snr_inv_(snr_inv) {
  if (h_.empty() || h_.size() != phi_.size())
    throw std::invalid_argument("QuadraticSet: inconsistent inputs");
  for (size_t k = 0; k < h_.size(); ++k) {
    if (phi_[k].rows() != h_[k].size() || phi_[k].cols() != h_[k].size())
      throw std::invalid_argument("QuadraticSet: Phi dimension mismatch");
    if (!phi_[k].isApprox(phi_[k].adjoint(), 1e-10))
      throw std::invalid_argument("QuadraticSet: Phi not Hermitian");
  }
}

namespace {

// |h^H f_b|^2 + f_b^H Phi f_b summed over the requested blocks.
double block_energy(const CVec& h, const CMat& phi, const PrecoderStack& f,
                    int from_block, int to_block) {
  double acc = 0.0;
  const int n = static_cast<int>(h.size());
  for (int b = from_block; b <= to_block; ++b) {
    const auto fb = f.f.segment(b * n, n);
    acc += std::norm(h.dot(fb)) + std::real(fb.dot(phi * fb));
  }
  return acc;
}

}  // namespace

double QuadraticSet::quad_a_common(int k, const PrecoderStack& f) const {
  return block_energy(h_[k], phi_[k], f, 0, n_users()) +
         snr_inv_ * f.f.squaredNorm();
}

double QuadraticSet::quad_b_common(int k, const PrecoderStack& f) const {
  return quad_a_common(k, f) - std::norm(h_[k].dot(f.common()));
}

double QuadraticSet::quad_a_private(int k, const PrecoderStack& f) const {
  return block_energy(h_[k], phi_[k], f, 1, n_users()) +
         snr_inv_ * f.f.squaredNorm();
}

double QuadraticSet::quad_b_private(int k, const PrecoderStack& f) const {
  return quad_a_private(k, f) - std::norm(h_[k].dot(f.user(k)));
}

CMat QuadraticSet::dense_a_common(int k) const {
  const int n = n_antennas(), nb = n_users() + 1;
  const CMat e = h_[k] * h_[k].adjoint() + phi_[k];
  CMat out = snr_inv_ * CMat::Identity(n * nb, n * nb);
  for (int b = 0; b < nb; ++b) out.block(b * n, b * n, n, n) += e;
  return out;
}

CMat QuadraticSet::dense_b_common(int k) const {
  CMat out = dense_a_common(k);
  const int n = n_antennas();
  out.block(0, 0, n, n) -= h_[k] * h_[k].adjoint();
  return out;
}

CMat QuadraticSet::dense_a_private(int k) const {
  CMat out = dense_a_common(k);
  const int n = n_antennas();
  out.block(0, 0, n, n) -= h_[k] * h_[k].adjoint() + phi_[k];
  return out;
}

CMat QuadraticSet::dense_b_private(int k) const {
  CMat out = dense_a_private(k);
  const int n = n_antennas();
  out.block((k + 1) * n, (k + 1) * n, n, n) -= h_[k] * h_[k].adjoint();
  return out;
}

double lse_min(const RVec& values, double alpha) {
  if (values.size() == 0) throw std::invalid_argument("lse_min: empty input");
  if (alpha <= 0.0) throw std::invalid_argument("lse_min: alpha must be > 0");
  const double m = values.minCoeff();
  double acc = 0.0;
  for (int i = 0; i < values.size(); ++i)
    acc += std::exp(-(values[i] - m) / alpha);
  return m - alpha * std::log(acc / values.size());
}

namespace {

RVec common_log_quotients(const PrecoderStack& f, const QuadraticSet& q) {
  RVec x(q.n_users());
  for (int k = 0; k < q.n_users(); ++k)
    x[k] = std::log2(q.quad_a_common(k, f) / q.quad_b_common(k, f));
  return x;
}

double private_log_sum(const PrecoderStack& f, const QuadraticSet& q) {
  double acc = 0.0;
  for (int k = 0; k < q.n_users(); ++k)
    acc += std::log2(q.quad_a_private(k, f) / q.quad_b_private(k, f));
  return acc;
}

}  // namespace

double objective(const PrecoderStack& f, const QuadraticSet& q, double alpha,
                 bool common_enabled) {
  if (f.f.squaredNorm() == 0.0)
    throw std::invalid_argument("objective: zero precoder");
  double obj = private_log_sum(f, q);
  if (common_enabled) obj += lse_min(common_log_quotients(f, q), alpha);
  return obj;
}

KktMatrices kkt_matrices(const PrecoderStack& f, const QuadraticSet& q,
                         double alpha, bool common_enabled) {
  const int n = q.n_antennas(), nk = q.n_users();
  KktMatrices out;
  out.a_kkt.blocks.assign(nk + 1, CMat::Zero(n, n));
  out.b_kkt.blocks.assign(nk + 1, CMat::Zero(n, n));

  // softmax over the common log-quotients, stabilized at the minimum
  out.softmax_weights = RVec::Zero(nk);
  RVec x;
  if (common_enabled) {
    x = common_log_quotients(f, q);
    const double m = x.minCoeff();
    double z = 0.0;
    for (int k = 0; k < nk; ++k) {
      out.softmax_weights[k] = std::exp(-(x[k] - m) / alpha);
      z += out.softmax_weights[k];
    }
    out.softmax_weights /= z;
    if (!out.softmax_weights.allFinite())
      throw std::runtime_error("kkt_matrices: non-finite softmax weights");
  }

  const CMat eye = CMat::Identity(n, n);
  for (int k = 0; k < nk; ++k) {
    const CMat e = q.h_hat(k) * q.h_hat(k).adjoint() + q.phi_hat(k);
    const double qa = q.quad_a_private(k, f);
    const double qb = q.quad_b_private(k, f);
    for (int b = 0; b <= nk; ++b) {
      const CMat& eb = b == 0 ? CMat(CMat::Zero(n, n)) : e;
      out.a_kkt.blocks[b] += (eb + q.snr_inv() * eye) / qa;
      const CMat bb = b == 0 ? CMat(CMat::Zero(n, n))
                             : (b == k + 1 ? q.phi_hat(k) : e);
      out.b_kkt.blocks[b] += (bb + q.snr_inv() * eye) / qb;
    }
    if (common_enabled) {
      const double w = out.softmax_weights[k];
      const double qac = q.quad_a_common(k, f);
      const double qbc = q.quad_b_common(k, f);
      for (int b = 0; b <= nk; ++b) {
        out.a_kkt.blocks[b] += w * (e + q.snr_inv() * eye) / qac;
        const CMat bb = b == 0 ? q.phi_hat(k) : e;
        out.b_kkt.blocks[b] += w * (bb + q.snr_inv() * eye) / qbc;
      }
    }
  }

  out.lambda = std::exp2(objective(f, q, alpha, common_enabled));
  for (auto& blk : out.a_kkt.blocks) blk *= out.lambda;
  return out;
}

namespace {

PrecoderStack default_init(const QuadraticSet& q, bool common_enabled) {
  const int n = q.n_antennas(), nk = q.n_users();
  PrecoderStack f;
  f.n_antennas = n;
  f.f = CVec::Zero(n * (nk + 1));
  if (common_enabled) {
    CMat gram = CMat::Zero(n, n);
    for (int k = 0; k < nk; ++k)
      gram += q.h_hat(k) * q.h_hat(k).adjoint();
    Eigen::SelfAdjointEigenSolver<CMat> es(gram);
    f.common() = es.eigenvectors().col(n - 1);
  }
  for (int k = 0; k < nk; ++k) {
    const double norm = q.h_hat(k).norm();
    if (norm > 0.0) f.user(k) = q.h_hat(k) / norm;
  }
  f.f.normalize();
  return f;
}

}  // namespace

GpiResult gpi_solve(const QuadraticSet& q, const GpiOptions& opt,
                    const PrecoderStack* init) {
  if (opt.epsilon <= 0.0)
    throw std::invalid_argument("gpi_solve: epsilon must be > 0");
  GpiResult out;
  PrecoderStack f = init ? *init : default_init(q, opt.common_enabled);
  if (!opt.common_enabled) f.common().setZero();
  f.f.normalize();

  double alpha = opt.alpha;
  // Anneal when stuck: with a sharp smoothing the iteration can orbit the
  // softmax min-user switch instead of settling; doubling alpha widens the
  // smooth region around the switch until the map contracts.
  const int stride = std::max(1, opt.max_iter / 8);
  for (int t = 1; t <= opt.max_iter; ++t) {
    if (t > 1 && (t - 1) % stride == 0) alpha *= 2.0;
    const KktMatrices kkt = kkt_matrices(f, q, alpha, opt.common_enabled);
    PrecoderStack next = f;
    next.f = kkt.b_kkt.solve(kkt.a_kkt.apply(f.f));
    if (!opt.common_enabled) next.common().setZero();
    next.f.normalize();
    const double delta = (next.f - f.f).norm();
    f = next;
    out.iterations = t;
    if (delta < opt.epsilon) {
      out.converged = true;
      break;
    }
  }
  out.precoder = f;
  out.alpha_final = alpha;
  // report the exact-min objective, not the LSE surrogate
  out.objective_bits = private_log_sum(f, q);
  if (opt.common_enabled)
    out.objective_bits += common_log_quotients(f, q).minCoeff();
  return out;
}

PrecoderStack baseline_mrt(const std::vector<CVec>& h_hat) {
  const int n = static_cast<int>(h_hat[0].size());
  const int nk = static_cast<int>(h_hat.size());
  PrecoderStack f;
  f.n_antennas = n;
  f.f = CVec::Zero(n * (nk + 1));
  for (int k = 0; k < nk; ++k) {
    const double norm = h_hat[k].norm();
    if (norm > 0.0) f.user(k) = h_hat[k] / (norm * std::sqrt(double(nk)));
  }
  return f;
}

PrecoderStack baseline_rzf(const std::vector<CVec>& h_hat, double snr_inv) {
  const int n = static_cast<int>(h_hat[0].size());
  const int nk = static_cast<int>(h_hat.size());
  CMat gram = snr_inv * CMat::Identity(n, n);
  for (const auto& h : h_hat) gram += h * h.adjoint();
  Eigen::LLT<CMat> llt(gram);
  PrecoderStack f;
  f.n_antennas = n;
  f.f = CVec::Zero(n * (nk + 1));
  double total = 0.0;
  for (int k = 0; k < nk; ++k) {
    f.user(k) = llt.solve(h_hat[k]);
    total += f.user(k).squaredNorm();
  }
  f.f /= std::sqrt(total);
  return f;
}

GpiResult baseline_sdma_gpi(const QuadraticSet& q, const GpiOptions& opt) {
  GpiOptions sdma = opt;
  sdma.common_enabled = false;
  return gpi_solve(q, sdma);
}

}  // namespace fdd
