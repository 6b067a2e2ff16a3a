#include <gtest/gtest.h>

#include <sstream>

#include "polyelast/material.hpp"

using namespace polyelast;

TEST(Material, LambdaFromPoisson) {
  EXPECT_DOUBLE_EQ(lambda_from_poisson(1.0, 0.3), 0.6 / 0.4);
  EXPECT_DOUBLE_EQ(lambda_from_poisson(2.0, 0.0), 0.0);
  EXPECT_NEAR(lambda_from_poisson(1.0, 0.495), 99.0, 1e-10);
  EXPECT_THROW(lambda_from_poisson(1.0, 0.5), ParameterError);
  EXPECT_THROW(lambda_from_poisson(1.0, -0.1), ParameterError);
  EXPECT_THROW(lambda_from_poisson(0.0, 0.3), ParameterError);
}

// The Voigt matrix applied to [e11, e22, 2 e12] must give the tensor law.
TEST(Material, VoigtMatchesTensorLaw) {
  const double mu = 1.7, lam = 3.1;
  Eigen::Matrix2d eps;
  eps << 0.3, -0.2, -0.2, 0.9;
  const Eigen::Matrix2d s = isotropic_stress(mu, lam, eps);
  const Vec3 v = voigt_stiffness(mu, lam) * Vec3(eps(0, 0), eps(1, 1), 2 * eps(0, 1));
  EXPECT_NEAR(v[0], s(0, 0), 1e-15);
  EXPECT_NEAR(v[1], s(1, 1), 1e-15);
  EXPECT_NEAR(v[2], s(0, 1), 1e-15);
}

TEST(Material, FieldAccessors) {
  const auto m = MaterialField::from_poisson(4, 1.0, 0.25);
  EXPECT_EQ(m.size(), 4);
  EXPECT_TRUE(m.is_uniform());
  EXPECT_NEAR(m.poisson(2), 0.25, 1e-15);
  EXPECT_DOUBLE_EQ(m.max_stiffness_eigenvalue(0), 2.0 + 2.0 * m.lambda(0));
  EXPECT_THROW(MaterialField({1.0, -1.0}, {0.0, 0.0}), ParameterError);
  EXPECT_THROW(MaterialField({1.0}, {-0.5}), ParameterError);
  EXPECT_THROW(MaterialField({1.0}, {0.0, 1.0}), ParameterError);
}

TEST(Material, CsvInput) {
  std::istringstream in("# heterogeneous\ncell_id,mu,lambda\n1,2.0,5.0\n0,1.0,1.5\n");
  const MaterialField m = read_material_csv(in, 2);
  EXPECT_DOUBLE_EQ(m.mu(0), 1.0);
  EXPECT_DOUBLE_EQ(m.lambda(1), 5.0);
  EXPECT_FALSE(m.is_uniform());
  std::istringstream missing("0,1.0,1.0\n");
  EXPECT_THROW(read_material_csv(missing, 2), ParameterError);
  std::istringstream bad_id("5,1.0,1.0\n");
  EXPECT_THROW(read_material_csv(bad_id, 2), ParameterError);
  std::istringstream short_line("0,1.0\n");
  EXPECT_THROW(read_material_csv(short_line, 1), ParameterError);
}
