#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "polyelast/errors.hpp"

namespace polyelast {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;

/// Lamé parameter lambda for a given shear modulus and Poisson ratio.
inline double lambda_from_poisson(double mu, double nu) {
  if (!(nu >= 0.0 && nu < 0.5)) throw ParameterError("Poisson ratio must lie in [0, 0.5)");
  if (!(mu > 0.0)) throw ParameterError("shear modulus must be positive");
  return 2.0 * mu * nu / (1.0 - 2.0 * nu);
}

/// 2D Voigt stiffness for strains stored as [e11, e22, 2 e12].
inline Mat3 voigt_stiffness(double mu, double lambda) {
  Mat3 d;
  d << 2 * mu + lambda, lambda, 0.0,
       lambda, 2 * mu + lambda, 0.0,
       0.0, 0.0, mu;
  return d;
}

/// Cauchy stress sigma = 2 mu eps + lambda tr(eps) I, in tensor form.
inline Eigen::Matrix2d isotropic_stress(double mu, double lambda, const Eigen::Matrix2d& eps) {
  return 2.0 * mu * eps + lambda * eps.trace() * Eigen::Matrix2d::Identity();
}

/// Piecewise-constant isotropic material.
class MaterialField {
 public:
  MaterialField() = default;
  MaterialField(std::vector<double> mu, std::vector<double> lambda) : mu_(std::move(mu)), lambda_(std::move(lambda)) {
    if (mu_.size() != lambda_.size()) throw ParameterError("mu and lambda arrays differ in length");
    for (std::size_t k = 0; k < mu_.size(); ++k) {
      if (!(mu_[k] > 0.0)) throw ParameterError("mu must be > 0 (cell " + std::to_string(k) + ")");
      if (!(lambda_[k] >= 0.0)) throw ParameterError("lambda must be >= 0 (cell " + std::to_string(k) + ")");
    }
  }

  static MaterialField uniform(int cells, double mu, double lambda) {
    return MaterialField(std::vector<double>(cells, mu), std::vector<double>(cells, lambda));
  }

  static MaterialField from_poisson(int cells, double mu, double nu) {
    return uniform(cells, mu, lambda_from_poisson(mu, nu));
  }

  int size() const { return static_cast<int>(mu_.size()); }
  double mu(int cell) const { return mu_[cell]; }
  double lambda(int cell) const { return lambda_[cell]; }
  double poisson(int cell) const { return lambda_[cell] / (2.0 * (lambda_[cell] + mu_[cell])); }
  Mat3 voigt(int cell) const { return voigt_stiffness(mu_[cell], lambda_[cell]); }

  /// Largest eigenvalue of the 4th-order stiffness acting on symmetric
  /// 2x2 tensors: 2 mu + 2 lambda (the volumetric mode).
  double max_stiffness_eigenvalue(int cell) const { return 2.0 * mu_[cell] + 2.0 * lambda_[cell]; }

  bool is_uniform() const {
    for (int k = 1; k < size(); ++k)
      if (mu_[k] != mu_[0] || lambda_[k] != lambda_[0]) return false;
    return true;
  }

 private:
  std::vector<double> mu_;
  std::vector<double> lambda_;
};

/// Reads `cell_id,mu,lambda` rows; '#' lines and an optional header are skipped.
inline MaterialField read_material_csv(std::istream& in, int cells) {
  std::vector<double> mu(cells, -1.0), lambda(cells, -1.0);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#' || line.rfind("cell_id", 0) == 0) continue;
    std::istringstream ls(line);
    std::string a, b, c;
    if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',') || !std::getline(ls, c))
      throw ParameterError("material line " + std::to_string(lineno) + ": expected cell_id,mu,lambda");
    const int id = std::stoi(a);
    if (id < 0 || id >= cells) throw ParameterError("material line " + std::to_string(lineno) + ": bad cell id");
    mu[id] = std::stod(b);
    lambda[id] = std::stod(c);
  }
  for (int k = 0; k < cells; ++k)
    if (mu[k] < 0.0) throw ParameterError("material file has no entry for cell " + std::to_string(k));
  return MaterialField(std::move(mu), std::move(lambda));
}

inline MaterialField read_material_file(const std::string& path, int cells) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open material file " + path);
  return read_material_csv(in, cells);
}

}  // namespace polyelast
