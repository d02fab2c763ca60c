#include "aoalab/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <Eigen/Eigenvalues>

namespace aoa {

CovarianceMatrix sample_covariance(const SnapshotMatrix& snapshot) {
  const auto& x = snapshot.samples;
  const long M = x.rows();
  const long N = x.cols();
  if (N < M)
    throw std::invalid_argument("sample_covariance: need at least M samples (N >= M)");
  Eigen::MatrixXcd R = (x * x.adjoint()) / static_cast<double>(N);
  R = 0.5 * (R + R.adjoint().eval());  // enforce exact Hermitian symmetry
  return {std::move(R)};
}

SubspaceDecomposition hermitian_eig(const CovarianceMatrix& R, int num_sources) {
  const auto& A = R.values;
  if (A.rows() != A.cols())
    throw std::invalid_argument("hermitian_eig: matrix must be square");
  const double scale = std::max(1.0, A.norm());
  if ((A - A.adjoint()).norm() > 1e-9 * scale)
    throw std::invalid_argument("hermitian_eig: matrix is not Hermitian within tolerance");
  const int M = static_cast<int>(A.rows());
  if (num_sources < 1 || num_sources > M)
    throw std::invalid_argument("hermitian_eig: num_sources out of range");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(A);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("hermitian_eig: eigensolver failed to converge");

  SubspaceDecomposition d;
  d.num_sources = num_sources;
  d.eigenvalues = es.eigenvalues().reverse();
  d.eigenvectors = es.eigenvectors().rowwise().reverse();
  return d;
}

Pseudospectrum music_spectrum(const SubspaceDecomposition& decomp,
                              const UlaConfig& ula, double grid_step_deg) {
  ula.validate();
  if (grid_step_deg <= 0)
    throw std::invalid_argument("music_spectrum: grid_step_deg must be > 0");
  const int M = static_cast<int>(decomp.eigenvectors.rows());
  if (decomp.num_sources >= M)
    throw std::invalid_argument("music_spectrum: no noise subspace (num_sources >= M)");

  const Eigen::MatrixXcd Vn = decomp.noise_basis();
  const Eigen::MatrixXcd G = Vn * Vn.adjoint();

  const int num_points = static_cast<int>(std::lround(180.0 / grid_step_deg)) + 1;
  Pseudospectrum spec;
  spec.theta_deg.resize(num_points);
  spec.power.resize(num_points);
  for (int i = 0; i < num_points; ++i) {
    const double theta = -90.0 + i * grid_step_deg;
    spec.theta_deg(i) = theta;
    const Eigen::VectorXcd a = steering_vector(ula, std::min(theta, 90.0));
    const double den = std::real(a.dot(G * a));  // a^H G a
    spec.power(i) = 1.0 / std::max(den, 1e-300);
  }
  return spec;
}

AoaEstimate music_estimate(const Pseudospectrum& spectrum) {
  const long n = spectrum.power.size();
  if (n == 0) throw std::invalid_argument("music_estimate: empty spectrum");

  const double pmax = spectrum.power.maxCoeff();
  // near-ties (flat spectra) resolve toward the smallest |theta|
  long best = -1;
  for (long i = 0; i < n; ++i) {
    if (spectrum.power(i) >= pmax * (1.0 - 1e-9)) {
      if (best < 0 || std::abs(spectrum.theta_deg(i)) < std::abs(spectrum.theta_deg(best)))
        best = i;
    }
  }

  // refine on the projection energy 1/P, which is locally quadratic at
  // the peak even when the noiseless spectrum is near-singular there
  double theta = spectrum.theta_deg(best);
  if (best > 0 && best < n - 1) {
    const double y0 = 1.0 / spectrum.power(best - 1);
    const double y1 = 1.0 / spectrum.power(best);
    const double y2 = 1.0 / spectrum.power(best + 1);
    const double curv = y0 - 2.0 * y1 + y2;
    if (curv > 0) {
      const double delta = std::clamp(0.5 * (y0 - y2) / curv, -0.5, 0.5);
      theta += delta * (spectrum.theta_deg(1) - spectrum.theta_deg(0));
    }
  }

  AoaEstimate est;
  est.method = Method::Music;
  est.theta_deg = std::clamp(theta, -90.0, 90.0);
  est.pseudospectrum = spectrum;
  return est;
}

AoaEstimate esprit_estimate(const SubspaceDecomposition& decomp,
                            const UlaConfig& ula, int shift_k) {
  ula.validate();
  if (shift_k < 1) throw std::invalid_argument("esprit_estimate: shift_k must be >= 1");
  const int M = static_cast<int>(decomp.eigenvectors.rows());
  const int D = decomp.num_sources;
  if (D > M - shift_k)
    throw std::invalid_argument("esprit_estimate: num_sources exceeds subarray size");

  const Eigen::MatrixXcd Vs = decomp.signal_basis();
  const Eigen::MatrixXcd Vs0 = Vs.topRows(M - shift_k);
  const Eigen::MatrixXcd Vs1 = Vs.bottomRows(M - shift_k);

  Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(Vs0);
  if (qr.rank() < D)
    throw std::runtime_error("esprit_estimate: degenerate signal subspace");
  const Eigen::MatrixXcd Psi = qr.solve(Vs1);  // least-squares rotation operator

  AoaEstimate est;
  est.method = Method::Esprit;
  if (D == 1) {
    est.theta_deg = angle_from_spatial_frequency(ula, std::arg(Psi(0, 0)), shift_k);
    return est;
  }
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> ces(Psi);
  if (ces.info() != Eigen::Success)
    throw std::runtime_error("esprit_estimate: eigensolver failed on Psi");
  // report the source with the strongest rotation eigenvalue
  int strongest = 0;
  for (int d = 1; d < D; ++d)
    if (std::abs(ces.eigenvalues()(d)) > std::abs(ces.eigenvalues()(strongest))) strongest = d;
  est.theta_deg = angle_from_spatial_frequency(ula, std::arg(ces.eigenvalues()(strongest)), shift_k);
  return est;
}

void export_spectrum_csv(const std::string& path, const Pseudospectrum& spectrum) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("export_spectrum_csv: cannot open " + path);
  out.precision(12);
  out << "theta_deg,power\n";
  for (long i = 0; i < spectrum.theta_deg.size(); ++i)
    out << spectrum.theta_deg(i) << ',' << spectrum.power(i) << "\n";
}

}  // namespace aoa
