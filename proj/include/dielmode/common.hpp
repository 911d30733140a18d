#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <Eigen/Dense>

namespace dielmode {

using complexd = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using Dyad3 = Eigen::Matrix3d;
using Dyad3c = Eigen::Matrix3cd;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

namespace constants {
inline constexpr double c0 = 299792458.0;          // m/s
inline constexpr double mu0 = 1.25663706212e-6;    // H/m
inline constexpr double eps0 = 8.8541878128e-12;   // F/m
inline constexpr double pi = 3.14159265358979323846;
}  // namespace constants

// Error categories map onto CLI exit codes: config -> 1, numeric -> 2.
enum class ErrorKind { config, numeric };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error config_error(const std::string& what) { return Error(ErrorKind::config, what); }
inline Error numeric_error(const std::string& what) { return Error(ErrorKind::numeric, what); }

// FNV-1a, used to key caches and stamp serialized products by mesh content.
inline std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t seed = 0xcbf29ce484222325ull) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t fnv1a(const std::string& s, std::uint64_t seed = 0xcbf29ce484222325ull) {
  return fnv1a(s.data(), s.size(), seed);
}

}  // namespace dielmode
