#include "nilconj/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

namespace nilconj {

double Spectrum::lambda_max() const {
  double m = 0.0;
  for (const auto& b : neg) m = std::max(m, b.lambda);
  for (const auto& b : pos) m = std::max(m, b.lambda);
  return m;
}

namespace {

// Groups sorted values whose spread stays within kClusterTol relative.
std::vector<std::pair<double, int>> cluster(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  std::vector<std::pair<double, int>> out;
  std::size_t i = 0;
  while (i < values.size()) {
    std::size_t j = i;
    double sum = 0.0;
    while (j < values.size() && values[j] - values[i] <= kClusterTol * std::max(std::abs(values[i]), 1e-300)) {
      sum += values[j];
      ++j;
    }
    out.emplace_back(sum / static_cast<double>(j - i), static_cast<int>(j - i));
    i = j;
  }
  return out;
}

EigenBlock make_block(const Mat& j2, double lambda, int algebraic, double sign) {
  const Eigen::Index q = j2.rows();
  EigenBlock b;
  b.lambda = lambda;
  b.algebraic_mult = algebraic;
  b.basis = null_space(j2 - sign * lambda * lambda * Mat::Identity(q, q), kRankTol,
                       std::max(lambda * lambda, j2.norm()));
  b.mult = static_cast<int>(b.basis.cols());
  return b;
}

}  // namespace

Spectrum spectrum(const Mat& j) {
  const auto q = static_cast<int>(j.rows());
  Spectrum spec;
  spec.dim = q;
  if (q == 0) {
    spec.diagonalizable = true;
    return spec;
  }
  const Mat j2 = j * j;
  Mat jpow = Mat::Identity(q, q);
  for (int i = 0; i < q; ++i) jpow = jpow * j;
  spec.zero_mult = q - numerical_rank(jpow);
  spec.zero_plain = q - numerical_rank(j2);
  if (j.isZero(0.0)) {
    spec.zero_mult = q;
    spec.zero_plain = q;
    spec.diagonalizable = true;
    return spec;
  }

  Eigen::EigenSolver<Mat> solver(j, false);
  std::vector<std::complex<double>> mu(solver.eigenvalues().begin(), solver.eigenvalues().end());
  // The zero_mult eigenvalues of smallest modulus belong to the nilpotent part.
  std::sort(mu.begin(), mu.end(), [](auto a, auto b) { return std::abs(a) < std::abs(b); });

  std::vector<double> neg_lambda;
  std::vector<double> pos_lambda;
  for (std::size_t i = static_cast<std::size_t>(spec.zero_mult); i < mu.size(); ++i) {
    const double r = std::abs(mu[i]);
    if (std::abs(mu[i].real()) <= kClusterTol * r) {
      neg_lambda.push_back(std::abs(mu[i].imag()));
    } else if (std::abs(mu[i].imag()) <= kClusterTol * r) {
      pos_lambda.push_back(std::abs(mu[i].real()));
    } else {
      ++spec.complex_dim;
      if (mu[i].imag() > 0) spec.complex_eigenvalues.push_back(mu[i] * mu[i]);
    }
  }
  for (auto [lambda, count] : cluster(neg_lambda)) spec.neg.push_back(make_block(j2, lambda, count, -1.0));
  for (auto [lambda, count] : cluster(pos_lambda)) spec.pos.push_back(make_block(j2, lambda, count, 1.0));

  int plain = spec.zero_plain;
  for (const auto& b : spec.neg) plain += b.mult;
  for (const auto& b : spec.pos) plain += b.mult;
  spec.diagonalizable = (plain == q);
  return spec;
}

bool is_positive_multiple(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) return false;
  const double ratio = b / a;
  const double m = std::round(ratio);
  return m >= 1.0 && std::abs(ratio - m) < kRationalTol;
}

std::vector<std::size_t> lattice_blocks(const Spectrum& spec, double t) {
  std::vector<std::size_t> out;
  const double period_units = std::abs(t) / (2.0 * std::numbers::pi);
  for (std::size_t k = 0; k < spec.neg.size(); ++k) {
    // t * lambda_k in 2 pi Z*  <=>  lambda_k is a positive multiple of 2 pi / |t|
    if (t != 0.0 && is_positive_multiple(1.0, period_units * spec.neg[k].lambda)) out.push_back(k);
  }
  return out;
}

int lattice_sum(const Spectrum& spec, double t) {
  int sum = 0;
  for (auto k : lattice_blocks(spec, t)) sum += spec.neg[k].mult;
  return sum;
}

Mat lattice_kernel(const Spectrum& spec, double t) {
  const auto blocks = lattice_blocks(spec, t);
  int cols = 0;
  for (auto k : blocks) cols += spec.neg[k].mult;
  Mat out(spec.dim, cols);
  int c = 0;
  for (auto k : blocks) {
    out.middleCols(c, spec.neg[k].mult) = spec.neg[k].basis;
    c += spec.neg[k].mult;
  }
  return out;
}

Mat lattice_kernel(const Mat& j, double t) { return lattice_kernel(spectrum(j), t); }

ImageMembership image_membership(const Mat& j, double t, const Vec& x, const Mat& gram_v, double tol) {
  const Eigen::Index q = j.rows();
  const Mat e = expm(-t * j) - Mat::Identity(q, q);
  const double reference = std::max(1.0, (e + Mat::Identity(q, q)).norm());
  Eigen::JacobiSVD<Mat> svd(e, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec& s = svd.singularValues();
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) > kRankTol * reference) ++rank;
  const Mat kernel = svd.matrixV().rightCols(q - rank);

  ImageMembership out;
  const double scale = std::max(1.0, x.norm()) * std::max(1.0, gram_v.cwiseAbs().maxCoeff());
  for (Eigen::Index c = 0; c < kernel.cols(); ++c)
    out.overlap = std::max(out.overlap, std::abs(x.dot(gram_v * kernel.col(c))));
  out.is_member = out.overlap <= tol * scale;
  if (out.is_member) {
    const Vec rhs = svd.matrixU().leftCols(rank).transpose() * (t * x);
    out.preimage = svd.matrixV().leftCols(rank) * (rhs.array() / s.head(rank).array()).matrix();
    out.residual = (e * out.preimage - t * x).norm();
  }
  return out;
}

AOperator a_operator(const MetricLieAlgebra& alg, const Vec& x0) {
  const int p = alg.dim_center();
  AOperator out;
  out.matrix.resize(p, p);
  for (int alpha = 0; alpha < p; ++alpha)
    out.matrix.col(alpha) = bracket_v(alg, x0, j_map(alg, unit(p, alpha)) * x0);

  // |J_z x0|^2 sets the size of A; an eigenvalue far below it is a null
  // direction in disguise, not a negative one.
  Eigen::EigenSolver<Mat> solver(out.matrix, false);
  double scale = 0.0;
  for (int alpha = 0; alpha < p; ++alpha) scale = std::max(scale, (j_map(alg, unit(p, alpha)) * x0).squaredNorm());
  for (const auto& mu : solver.eigenvalues()) scale = std::max(scale, std::abs(mu));
  if (scale == 0.0) return out;

  std::vector<double> negatives;
  for (const auto& mu : solver.eigenvalues()) {
    if (std::abs(mu.imag()) <= kClusterTol * scale && mu.real() < -kClusterTol * scale)
      negatives.push_back(-mu.real());
  }
  for (const auto& cl : cluster(negatives)) {
    RealEigen e;
    e.value = -cl.first;
    e.basis = null_space(out.matrix - e.value * Mat::Identity(p, p), kRankTol, scale);
    if (e.basis.cols() == 0) {
      Eigen::JacobiSVD<Mat> svd(out.matrix - e.value * Mat::Identity(p, p), Eigen::ComputeFullV);
      e.basis = svd.matrixV().rightCols(1);
    }
    e.mult = static_cast<int>(e.basis.cols());
    out.negative.push_back(std::move(e));
  }
  std::sort(out.negative.begin(), out.negative.end(),
            [](const RealEigen& a, const RealEigen& b) { return a.value < b.value; });
  return out;
}

}  // namespace nilconj
