#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

#include "aoalab/array.hpp"
#include "aoalab/channel.hpp"

namespace aoa {

enum class Method { Music, Esprit };

inline const char* method_name(Method m) {
  return m == Method::Music ? "music" : "esprit";
}

struct CovarianceMatrix {
  Eigen::MatrixXcd values;  // M x M Hermitian PSD
};

// Eigendecomposition of the sample covariance, eigenvalues sorted
// descending; the signal subspace is the leading num_sources columns.
struct SubspaceDecomposition {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXcd eigenvectors;
  int num_sources = 1;

  Eigen::MatrixXcd signal_basis() const {
    return eigenvectors.leftCols(num_sources);
  }
  Eigen::MatrixXcd noise_basis() const {
    return eigenvectors.rightCols(eigenvectors.cols() - num_sources);
  }
};

struct Pseudospectrum {
  Eigen::VectorXd theta_deg;
  Eigen::VectorXd power;
};

struct AoaEstimate {
  double theta_deg = 0;
  Method method = Method::Music;
  std::optional<Pseudospectrum> pseudospectrum;
  std::optional<double> theta_xy_deg;
  bool range_clamped = false;
};

// R = (1/N) sum_n x[n] x[n]^H over the snapshot columns.
CovarianceMatrix sample_covariance(const SnapshotMatrix& snapshot);

SubspaceDecomposition hermitian_eig(const CovarianceMatrix& R, int num_sources = 1);

// P(theta) = 1 / (a^H Vn Vn^H a) on a uniform grid over [-90, 90].
Pseudospectrum music_spectrum(const SubspaceDecomposition& decomp,
                              const UlaConfig& ula, double grid_step_deg = 0.1);

// argmax of the grid refined by 3-point parabolic interpolation on log P;
// ties break toward smaller |theta|.
AoaEstimate music_estimate(const Pseudospectrum& spectrum);

// Shift-invariance estimator on maximum-overlap subarrays (shift_k rows).
AoaEstimate esprit_estimate(const SubspaceDecomposition& decomp,
                            const UlaConfig& ula, int shift_k = 1);

void export_spectrum_csv(const std::string& path, const Pseudospectrum& spectrum);

}  // namespace aoa
