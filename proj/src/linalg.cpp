#include "nilconj/linalg.hpp"

#include <algorithm>

#include <unsupported/Eigen/MatrixFunctions>

namespace nilconj {

Mat expm(const Mat& a) {
  if (a.size() == 0) return a;
  return a.exp();
}

Mat integrated_expm(const Mat& a, double t) {
  const Eigen::Index n = a.rows();
  Mat block = Mat::Zero(2 * n, 2 * n);
  block.topLeftCorner(n, n) = t * a;
  block.topRightCorner(n, n) = t * Mat::Identity(n, n);
  return expm(block).topRightCorner(n, n);
}

Mat null_space(const Mat& a, double rel_tol, double reference) {
  const Eigen::Index n = a.cols();
  if (n == 0) return Mat(0, 0);
  if (a.rows() == 0) return Mat::Identity(n, n);
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullV);
  const Vec& s = svd.singularValues();
  const double thr = rel_tol * std::max(s(0), reference);
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) > thr) ++rank;
  return svd.matrixV().rightCols(n - rank);
}

Mat column_space(const Mat& a, double rel_tol) {
  if (a.size() == 0) return Mat(a.rows(), 0);
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinU);
  const Vec& s = svd.singularValues();
  const double thr = rel_tol * s(0);
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) > thr) ++rank;
  return svd.matrixU().leftCols(rank);
}

int numerical_rank(const Mat& a, double rel_tol) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(a);
  const Vec& s = svd.singularValues();
  const double thr = rel_tol * s(0);
  int rank = 0;
  while (rank < s.size() && s(rank) > thr) ++rank;
  return rank;
}

double subspace_distance(const Mat& u, const Mat& v) {
  const Eigen::Index n = std::max(u.rows(), v.rows());
  if (n == 0) return 0.0;
  auto projector = [n](const Mat& b) -> Mat {
    if (b.cols() == 0) return Mat::Zero(n, n);
    const Mat q = column_space(b);
    return q * q.transpose();
  };
  const Mat diff = projector(u) - projector(v);
  Eigen::JacobiSVD<Mat> svd(diff);
  return svd.singularValues()(0);
}

SingularRange singular_range(const Mat& a) {
  if (a.size() == 0) return {};
  Eigen::JacobiSVD<Mat> svd(a);
  const Vec& s = svd.singularValues();
  SingularRange r;
  r.max = s(0);
  r.min = (a.rows() >= a.cols()) ? s(s.size() - 1) : 0.0;
  return r;
}

}  // namespace nilconj
