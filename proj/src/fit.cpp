#include "donormag/fit.hpp"

#include "donormag/errors.hpp"
#include "donormag/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace donormag {

void DataSet::normalize() {
  std::sort(rows.begin(), rows.end(), [](const DataRow& a, const DataRow& b) { return a.T_K < b.T_K; });
  const bool sigma = !rows.empty() && rows.front().sigma.has_value();
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& row = rows[k];
    if (!(row.T_K > 0.0)) throw std::invalid_argument("data set: temperatures must be positive");
    if (k > 0 && !(row.T_K > rows[k - 1].T_K)) {
      throw std::invalid_argument("data set: temperatures must be distinct");
    }
    if (row.sigma.has_value() != sigma) {
      throw std::invalid_argument("data set: sigma must be given for all rows or none");
    }
    if (row.sigma && !(*row.sigma > 0.0)) throw std::invalid_argument("data set: sigma must be positive");
  }
}

bool DataSet::has_sigma() const { return !rows.empty() && rows.front().sigma.has_value(); }

std::vector<double> DataSet::temperatures() const {
  std::vector<double> T;
  T.reserve(rows.size());
  for (const auto& row : rows) T.push_back(row.T_K);
  return T;
}

double BasisFunction::evaluate(double T_K) const {
  if (use_closed_form) return magnetization_closed_form(species, B_mT, T_K).value;
  return magnetization_exact(species, B_mT, T_K);
}

std::vector<std::string> FitModel::coefficient_names() const {
  std::vector<std::string> names;
  if (include_offset) names.emplace_back("c0");
  for (std::size_t j = 0; j < basis.size(); ++j) names.push_back("c" + std::to_string(j + 1));
  return names;
}

double scaled_condition_number(const Eigen::MatrixXd& X) {
  Eigen::MatrixXd scaled = X;
  for (Eigen::Index j = 0; j < scaled.cols(); ++j) {
    const double norm = scaled.col(j).norm();
    if (norm == 0.0) return std::numeric_limits<double>::infinity();
    scaled.col(j) /= norm;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(scaled);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(s.size() - 1) == 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / s(s.size() - 1);
}

Eigen::MatrixXd design_matrix(const FitModel& model, const std::vector<double>& T_grid) {
  if (model.parameter_count() == 0) throw std::invalid_argument("fit model has no parameters");
  for (double T : T_grid) {
    if (!(T > 0.0)) throw std::invalid_argument("design matrix: temperatures must be positive");
  }
  const auto n = static_cast<Eigen::Index>(T_grid.size());
  Eigen::MatrixXd X(n, static_cast<Eigen::Index>(model.parameter_count()));
  Eigen::Index col = 0;
  if (model.include_offset) X.col(col++).setOnes();
  for (const auto& f : model.basis) {
    for (Eigen::Index i = 0; i < n; ++i) X(i, col) = f.evaluate(T_grid[i]);
    ++col;
  }
  const double cond = scaled_condition_number(X);
  if (!(cond <= kMaxConditionNumber)) {
    std::ostringstream msg;
    msg << "design matrix is degenerate (scaled condition number " << cond << ")";
    throw DegenerateBasis(msg.str(), cond);
  }
  return X;
}

FitResult fit_linear(const DataSet& data_in, const FitModel& model) {
  DataSet data = data_in;
  data.normalize();
  const int p = static_cast<int>(model.parameter_count());
  const int n = static_cast<int>(data.rows.size());
  if (n < p + 1) {
    throw std::invalid_argument("fit needs at least " + std::to_string(p + 1) + " rows, got " + std::to_string(n));
  }

  const Eigen::MatrixXd X = design_matrix(model, data.temperatures());
  Eigen::VectorXd y(n);
  Eigen::VectorXd sqrt_w = Eigen::VectorXd::Ones(n);
  for (int i = 0; i < n; ++i) {
    y(i) = data.rows[i].y;
    if (data.rows[i].sigma) sqrt_w(i) = 1.0 / *data.rows[i].sigma;
  }
  const Eigen::MatrixXd Xw = sqrt_w.asDiagonal() * X;
  const Eigen::VectorXd yw = sqrt_w.asDiagonal() * y;

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Xw);
  const Eigen::VectorXd c = qr.solve(yw);
  const Eigen::MatrixXd R = qr.matrixQR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd R_inv = R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
  Eigen::MatrixXd cov = R_inv * R_inv.transpose();

  FitResult result;
  result.names = model.coefficient_names();
  result.coefficients = c;
  result.n = n;
  result.p = p;
  result.weighted = data.has_sigma();
  const Eigen::VectorXd r = y - X * c;
  result.residuals.assign(r.data(), r.data() + r.size());
  result.rss = (sqrt_w.asDiagonal() * r).squaredNorm();
  if (!result.weighted) cov *= result.rss / (n - p);
  result.covariance = 0.5 * (cov + cov.transpose());

  if (model.basis.size() >= 2) {
    const int j1 = model.include_offset ? 1 : 0;
    const int j2 = j1 + 1;
    const double c1 = c(j1);
    const double c2 = c(j2);
    const double total = c1 + c2;
    Eigen::VectorXd J = Eigen::VectorXd::Zero(p);
    J(j1) = c2 / (total * total);
    J(j2) = -c1 / (total * total);
    const double var = J.dot(result.covariance * J);
    result.ratio = RatioEstimate{c1 / total, std::sqrt(std::max(var, 0.0))};
  }
  return result;
}

ModelComparison compare_models(const DataSet& data, const FitModel& full,
                               const std::vector<std::pair<std::string, FitModel>>& reduced) {
  ModelComparison out;
  out.full = fit_linear(data, full);
  for (const auto& [label, model] : reduced) {
    ReducedFit entry{label, fit_linear(data, model), 0.0};
    entry.rss_ratio = out.full.rss > 0.0 ? entry.result.rss / out.full.rss
                                         : (entry.result.rss > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);
    out.reduced.push_back(std::move(entry));
  }
  return out;
}

GaussianNoise::GaussianNoise(std::uint64_t seed) : engine_(seed) {}

double GaussianNoise::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double GaussianNoise::next() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

DataSet generate_synthetic(const FitModel& model, const Eigen::VectorXd& truth, const std::vector<double>& T_grid,
                           double noise_sd, std::uint64_t seed, double reference_T_K) {
  if (!(noise_sd >= 0.0)) throw std::invalid_argument("noise_sd must be >= 0");
  if (truth.size() != static_cast<Eigen::Index>(model.parameter_count())) {
    throw std::invalid_argument("truth vector size does not match the model");
  }
  std::vector<double> T = T_grid;
  std::sort(T.begin(), T.end());
  const Eigen::VectorXd clean = design_matrix(model, T) * truth;
  GaussianNoise noise(seed);
  DataSet data;
  data.reference_T_K = reference_T_K;
  for (std::size_t i = 0; i < T.size(); ++i) {
    const double z = noise.next();
    data.rows.push_back({T[i], clean(static_cast<Eigen::Index>(i)) + noise_sd * z, std::nullopt});
  }
  data.normalize();
  return data;
}

Eigen::VectorXd referenced_truth(const FitModel& model, double ratio, double scale, double reference_T_K) {
  if (model.basis.size() != 2 || !model.include_offset) {
    throw std::invalid_argument("referenced truth needs an offset plus two basis functions");
  }
  Eigen::VectorXd c(3);
  c(1) = ratio * scale;
  c(2) = (1.0 - ratio) * scale;
  c(0) = -(c(1) * model.basis[0].evaluate(reference_T_K) + c(2) * model.basis[1].evaluate(reference_T_K));
  return c;
}

}  // namespace donormag
