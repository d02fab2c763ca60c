#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>

namespace aoa {

// Uplink pilot configuration: a Zadoff-Chu base sequence cyclically
// extended to the configured length.
struct SrsConfig {
  int length = 960;       // samples per SRS occasion
  int zc_root = 1;        // q, coprime with zc_length
  int zc_length = 953;    // largest prime <= length
  double bandwidth_hz = 60e6;  // informational

  void validate() const;
};

bool is_prime(int n);

// s[n] = exp(-j*pi*root*n*(n+1)/length), n = 0..length-1 (odd-length form).
Eigen::VectorXcd zadoff_chu(int root, int length);

// Cyclic extension of the base ZC sequence to cfg.length samples.
Eigen::VectorXcd srs_sequence(const SrsConfig& cfg);

}  // namespace aoa
