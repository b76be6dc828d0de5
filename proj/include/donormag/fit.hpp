#pragma once

#include "donormag/spincore.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace donormag {

struct DataRow {
  double T_K = 0.0;
  double y = 0.0;  // flux shift, uPhi0
  std::optional<double> sigma;
};

/// Flux shift versus temperature. Rows are kept sorted by temperature.
struct DataSet {
  std::vector<DataRow> rows;
  double reference_T_K = 0.2;

  /// Sorts rows and throws std::invalid_argument on T <= 0, duplicate
  /// temperatures, non-positive sigma, or a mix of rows with and without sigma.
  void normalize();
  bool has_sigma() const;
  std::vector<double> temperatures() const;
};

/// f_j(T): normalized magnetization of one species at fixed field.
struct BasisFunction {
  SpinSpecies species;
  double B_mT = 0.2;
  bool use_closed_form = false;  // hyperfine sigmoid form instead of exact
  double evaluate(double T_K) const;
};

struct FitModel {
  std::vector<BasisFunction> basis;
  bool include_offset = true;

  std::size_t parameter_count() const { return basis.size() + (include_offset ? 1 : 0); }
  std::vector<std::string> coefficient_names() const;
};

/// Condition number of the design matrix after scaling each column to unit
/// Euclidean norm.
double scaled_condition_number(const Eigen::MatrixXd& X);

inline constexpr double kMaxConditionNumber = 1e10;

/// Column 0 is ones when the offset is enabled, then one column per basis
/// function. Throws DegenerateBasis if the scaled condition number exceeds
/// kMaxConditionNumber.
Eigen::MatrixXd design_matrix(const FitModel& model, const std::vector<double>& T_grid);

struct RatioEstimate {
  double value = 0.0;  // c1 / (c1 + c2)
  double sigma = 0.0;
};

struct FitResult {
  std::vector<std::string> names;
  Eigen::VectorXd coefficients;
  Eigen::MatrixXd covariance;
  std::optional<RatioEstimate> ratio;  // needs >= 2 basis functions
  double rss = 0.0;                    // sum of w_i r_i^2
  int n = 0;
  int p = 0;
  bool weighted = false;
  std::vector<double> residuals;  // y - X c, unweighted
};

/// Weighted linear least squares by Householder QR. Without per-point sigma
/// the covariance is scaled by s^2 = RSS / (n - p). The ratio uses the first
/// two basis coefficients with first-order error propagation.
FitResult fit_linear(const DataSet& data, const FitModel& model);

struct ReducedFit {
  std::string label;
  FitResult result;
  double rss_ratio = 0.0;  // RSS(reduced) / RSS(full)
};

struct ModelComparison {
  FitResult full;
  std::vector<ReducedFit> reduced;
};

ModelComparison compare_models(const DataSet& data, const FitModel& full,
                               const std::vector<std::pair<std::string, FitModel>>& reduced);

/// Gaussian noise source: std::mt19937_64 seeded with `seed`, uniforms
/// u = (word >> 11) * 2^-53, standard normals by the Box-Muller cosine branch
/// z = sqrt(-2 ln(1 - u1)) cos(2 pi u2), two words per sample.
class GaussianNoise {
 public:
  explicit GaussianNoise(std::uint64_t seed);
  double next();

 private:
  double uniform();
  std::mt19937_64 engine_;
};

/// y_i = X_i c + noise_sd * z_i. Throws std::invalid_argument for
/// noise_sd < 0 or a truth vector of the wrong size.
DataSet generate_synthetic(const FitModel& model, const Eigen::VectorXd& truth,
                           const std::vector<double>& T_grid, double noise_sd, std::uint64_t seed,
                           double reference_T_K = 0.2);

/// Truth vector (c0, c1, c2) for a two-species model with c1 = ratio * scale,
/// c2 = (1 - ratio) * scale, and c0 chosen so the curve is zero at the
/// reference temperature.
Eigen::VectorXd referenced_truth(const FitModel& model, double ratio, double scale, double reference_T_K);

}  // namespace donormag
