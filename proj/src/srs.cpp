#include "aoalab/srs.hpp"

#include <numeric>

#include "aoalab/array.hpp"

namespace aoa {

bool is_prime(int n) {
  if (n < 2) return false;
  for (int p = 2; p * p <= n; ++p)
    if (n % p == 0) return false;
  return true;
}

void SrsConfig::validate() const {
  if (length < 1) throw std::invalid_argument("SrsConfig: length must be >= 1");
  if (!is_prime(zc_length)) throw std::invalid_argument("SrsConfig: zc_length must be prime");
  if (zc_root < 1 || zc_root >= zc_length)
    throw std::invalid_argument("SrsConfig: zc_root must satisfy 1 <= root < zc_length");
  if (std::gcd(zc_root, zc_length) != 1)
    throw std::invalid_argument("SrsConfig: zc_root must be coprime with zc_length");
}

Eigen::VectorXcd zadoff_chu(int root, int length) {
  if (!is_prime(length)) throw std::invalid_argument("zadoff_chu: length must be prime");
  if (root < 1 || root >= length || std::gcd(root, length) != 1)
    throw std::invalid_argument("zadoff_chu: root must be coprime with length and in [1, length)");
  Eigen::VectorXcd s(length);
  for (int n = 0; n < length; ++n) {
    // phase computed modulo 2*length to keep the argument small
    const long long m = (static_cast<long long>(root) * n % (2LL * length)) * (n + 1) % (2LL * length);
    s(n) = std::polar(1.0, -kPi * static_cast<double>(m) / length);
  }
  return s;
}

Eigen::VectorXcd srs_sequence(const SrsConfig& cfg) {
  cfg.validate();
  const Eigen::VectorXcd zc = zadoff_chu(cfg.zc_root, cfg.zc_length);
  Eigen::VectorXcd s(cfg.length);
  for (int n = 0; n < cfg.length; ++n)
    s(n) = zc(n % cfg.zc_length);
  return s;
}

}  // namespace aoa
