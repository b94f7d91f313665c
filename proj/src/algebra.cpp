#include "nilconj/algebra.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "nilconj/error.hpp"

namespace nilconj {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DegenerateCenter: return "DegenerateCenter";
    case ErrorCode::NonOrthogonalSplit: return "NonOrthogonalSplit";
    case ErrorCode::AsymmetricBracket: return "AsymmetricBracket";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::UnsupportedCase: return "UnsupportedCase";
    case ErrorCode::PoleError: return "PoleError";
    case ErrorCode::NotInImage: return "NotInImage";
    case ErrorCode::NotDiagonalizable: return "NotDiagonalizable";
    case ErrorCode::CenterNotLine: return "CenterNotLine";
    case ErrorCode::RootLost: return "RootLost";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

double AlgebraElement::max_abs() const {
  double m = 0.0;
  if (z.size() > 0) m = std::max(m, z.cwiseAbs().maxCoeff());
  if (v.size() > 0) m = std::max(m, v.cwiseAbs().maxCoeff());
  return m;
}

Vec AlgebraElement::stacked() const {
  Vec out(z.size() + v.size());
  out << z, v;
  return out;
}

Vec unit(int n, int i) {
  Vec e = Vec::Zero(n);
  e(i) = 1.0;
  return e;
}

namespace {

// |det B| > 1e-10 * (max |B_ij|)^k, the scale-aware nondegeneracy test.
bool nondegenerate(const Mat& block) {
  const double scale = block.cwiseAbs().maxCoeff();
  if (scale == 0.0) return false;
  const double det = block.fullPivLu().determinant();
  return std::abs(det) > 1e-10 * std::pow(scale, static_cast<double>(block.rows()));
}

}  // namespace

MetricLieAlgebra::MetricLieAlgebra(std::string name, Mat gram, std::vector<Mat> structure)
    : name_(std::move(name)),
      dim_center_(static_cast<int>(structure.size())),
      dim_v_(0),
      gram_(std::move(gram)),
      structure_(std::move(structure)) {
  if (dim_center_ < 1) throw Error(ErrorCode::InvalidArgument, "dim_center must be positive");
  dim_v_ = static_cast<int>(gram_.rows()) - dim_center_;
  if (dim_v_ < 1) throw Error(ErrorCode::InvalidArgument, "dim_v must be positive");
  if (gram_.rows() != gram_.cols())
    throw Error(ErrorCode::InvalidArgument, "gram must be square");
  if (!gram_.allFinite()) throw Error(ErrorCode::InvalidArgument, "gram has non-finite entries");
  const double gscale = gram_.cwiseAbs().maxCoeff();
  if ((gram_ - gram_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * gscale)
    throw Error(ErrorCode::InvalidArgument, "gram is not symmetric");

  const int p = dim_center_;
  const int q = dim_v_;
  if (!gram_.topRightCorner(p, q).isZero(0.0) || !gram_.bottomLeftCorner(q, p).isZero(0.0))
    throw Error(ErrorCode::NonOrthogonalSplit, "gram couples the center and its complement");

  gram_z_ = gram_.topLeftCorner(p, p);
  gram_v_ = gram_.bottomRightCorner(q, q);
  if (!nondegenerate(gram_z_))
    throw Error(ErrorCode::DegenerateCenter, "center block of gram is singular");
  if (!nondegenerate(gram_v_))
    throw Error(ErrorCode::InvalidArgument, "complement block of gram is singular");
  gram_v_inv_ = gram_v_.fullPivLu().inverse();

  for (const Mat& c : structure_) {
    if (c.rows() != q || c.cols() != q)
      throw Error(ErrorCode::InvalidArgument, "structure matrices must be dim_v x dim_v");
    if (!c.allFinite()) throw Error(ErrorCode::InvalidArgument, "non-finite structure constant");
    if (!(c + c.transpose()).isZero(0.0))
      throw Error(ErrorCode::AsymmetricBracket, "bracket is not antisymmetric");
  }
}

// ---------------------------------------------------------------------------
// Documents

namespace {

using nlohmann::json;

template <typename T>
T require(const json& doc, const char* key) {
  if (!doc.contains(key)) throw Error(ErrorCode::ParseError, std::string("missing field '") + key + "'");
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace

MetricLieAlgebra load_algebra(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::ParseError, "document must be an object");

  const auto name = doc.contains("name") ? require<std::string>(doc, "name") : std::string("custom");
  const int p = require<int>(doc, "dim_center");
  const int q = require<int>(doc, "dim_v");
  if (p < 1 || q < 1) throw Error(ErrorCode::ParseError, "dimensions must be positive");
  const int n = p + q;

  const auto rows = require<std::vector<std::vector<double>>>(doc, "gram");
  if (static_cast<int>(rows.size()) != n) throw Error(ErrorCode::ParseError, "gram must have dim_center+dim_v rows");
  Mat gram(n, n);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(rows[i].size()) != n) throw Error(ErrorCode::ParseError, "gram row has wrong length");
    for (int j = 0; j < n; ++j) gram(i, j) = rows[i][j];
  }
  if ((gram - gram.transpose()).cwiseAbs().maxCoeff() > 1e-12 * gram.cwiseAbs().maxCoeff())
    throw Error(ErrorCode::ParseError, "gram is not symmetric");

  std::vector<Mat> structure(p, Mat::Zero(q, q));
  const json brackets = doc.contains("brackets") ? doc.at("brackets") : json::array();
  if (!brackets.is_array()) throw Error(ErrorCode::ParseError, "'brackets' must be an array");
  for (const json& entry : brackets) {
    const int a = require<int>(entry, "a");
    const int b = require<int>(entry, "b");
    const auto out = require<std::vector<double>>(entry, "out");
    if (a < 0 || b < 0 || a >= q || b >= q) throw Error(ErrorCode::ParseError, "bracket index out of range");
    if (a >= b) throw Error(ErrorCode::ParseError, "bracket entries require a < b");
    if (static_cast<int>(out.size()) != p) throw Error(ErrorCode::ParseError, "bracket 'out' must have dim_center entries");
    for (int alpha = 0; alpha < p; ++alpha) {
      structure[alpha](a, b) += out[alpha];
      structure[alpha](b, a) -= out[alpha];
    }
  }
  return MetricLieAlgebra(name, std::move(gram), std::move(structure));
}

std::string serialize(const MetricLieAlgebra& alg) {
  json doc;
  doc["name"] = alg.name();
  doc["dim_center"] = alg.dim_center();
  doc["dim_v"] = alg.dim_v();
  json gram = json::array();
  for (int i = 0; i < alg.dim(); ++i) {
    json row = json::array();
    for (int j = 0; j < alg.dim(); ++j) row.push_back(alg.gram()(i, j));
    gram.push_back(row);
  }
  doc["gram"] = gram;
  json brackets = json::array();
  for (int a = 0; a < alg.dim_v(); ++a) {
    for (int b = a + 1; b < alg.dim_v(); ++b) {
      std::vector<double> out(alg.dim_center());
      bool any = false;
      for (int alpha = 0; alpha < alg.dim_center(); ++alpha) {
        out[alpha] = alg.structure()[alpha](a, b);
        any = any || out[alpha] != 0.0;
      }
      if (any) brackets.push_back({{"a", a}, {"b", b}, {"out", out}});
    }
  }
  doc["brackets"] = brackets;
  return doc.dump(2);
}

namespace {

MetricLieAlgebra make_fixture(std::string name, const std::vector<double>& diag, int p,
                              const std::vector<std::tuple<int, int, std::vector<double>>>& br) {
  const int n = static_cast<int>(diag.size());
  const int q = n - p;
  Mat gram = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) gram(i, i) = diag[i];
  std::vector<Mat> structure(p, Mat::Zero(q, q));
  for (const auto& [a, b, out] : br) {
    for (int alpha = 0; alpha < p; ++alpha) {
      structure[alpha](a, b) = out[alpha];
      structure[alpha](b, a) = -out[alpha];
    }
  }
  return MetricLieAlgebra(std::move(name), gram, structure);
}

}  // namespace

std::vector<std::string> fixture_names() { return {"heis3", "pheis3", "heis5w", "bicenter"}; }

MetricLieAlgebra fixture(std::string_view name) {
  if (name == "heis3") return make_fixture("heis3", {1, 1, 1}, 1, {{0, 1, {1.0}}});
  if (name == "pheis3") return make_fixture("pheis3", {1, 1, -1}, 1, {{0, 1, {1.0}}});
  if (name == "heis5w")
    return make_fixture("heis5w", {1, 1, 1, 1, 1}, 1, {{0, 1, {1.0}}, {2, 3, {2.0}}});
  if (name == "bicenter")
    return make_fixture("bicenter", {1, 1, 1, 1, -1}, 2, {{0, 1, {1.0, 0.0}}, {0, 2, {0.0, 1.0}}});
  throw Error(ErrorCode::InvalidArgument, "unknown fixture '" + std::string(name) + "'");
}

MetricLieAlgebra resolve_algebra(const std::string& name_or_path) {
  for (const auto& f : fixture_names())
    if (f == name_or_path) return fixture(f);
  std::ifstream in(name_or_path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open algebra file '" + name_or_path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_algebra(ss.str());
}

MetricLieAlgebra random_algebra(int dim_center, int dim_v, std::mt19937_64& rng,
                                int negative_center, int negative_v) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const int n = dim_center + dim_v;
  Mat gram = Mat::Identity(n, n);
  for (int i = 0; i < negative_center && i < dim_center; ++i) gram(dim_center - 1 - i, dim_center - 1 - i) = -1.0;
  for (int i = 0; i < negative_v && i < dim_v; ++i) gram(n - 1 - i, n - 1 - i) = -1.0;
  std::vector<Mat> structure(dim_center, Mat::Zero(dim_v, dim_v));
  for (auto& c : structure) {
    for (int a = 0; a < dim_v; ++a) {
      for (int b = a + 1; b < dim_v; ++b) {
        c(a, b) = unif(rng);
        c(b, a) = -c(a, b);
      }
    }
  }
  return MetricLieAlgebra("random", gram, structure);
}

// ---------------------------------------------------------------------------
// Primitives

Vec bracket_v(const MetricLieAlgebra& alg, const Vec& x, const Vec& y) {
  Vec out(alg.dim_center());
  for (int alpha = 0; alpha < alg.dim_center(); ++alpha) out(alpha) = x.dot(alg.structure()[alpha] * y);
  return out;
}

AlgebraElement bracket(const MetricLieAlgebra& alg, const AlgebraElement& x, const AlgebraElement& y) {
  return {bracket_v(alg, x.v, y.v), Vec::Zero(alg.dim_v())};
}

double inner_center(const MetricLieAlgebra& alg, const Vec& z, const Vec& w) {
  return z.dot(alg.gram_center() * w);
}

double inner_v(const MetricLieAlgebra& alg, const Vec& x, const Vec& y) {
  return x.dot(alg.gram_v() * y);
}

double inner(const MetricLieAlgebra& alg, const AlgebraElement& u, const AlgebraElement& w) {
  return inner_center(alg, u.z, w.z) + inner_v(alg, u.v, w.v);
}

CausalType causal_type(const MetricLieAlgebra& alg, const AlgebraElement& u, double tol) {
  const double q = inner(alg, u, u);
  if (q > tol) return CausalType::Timelike;
  if (q < -tol) return CausalType::Spacelike;
  return CausalType::Null;
}

Mat j_map(const MetricLieAlgebra& alg, const Vec& z) {
  // <z,[x,y]> = x^T K y with K = sum_beta (G_z z)_beta C_beta, and
  // <Jx, y> = x^T J^T G_v y, so G_v J = K^T = -K.
  const Vec w = alg.gram_center() * z;
  Mat k = Mat::Zero(alg.dim_v(), alg.dim_v());
  for (int beta = 0; beta < alg.dim_center(); ++beta) k += w(beta) * alg.structure()[beta];
  return -alg.gram_v_inverse() * k;
}

}  // namespace nilconj
