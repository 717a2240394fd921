// Builds projection profiles of a correlated Gaussian phantom, reconstructs
// the Wigner function by filtered back-projection, and compares moments.

#include <cstdio>
#include <numbers>
#include <vector>

#include "spps/spps.hpp"

int main() {
  const double eta = 0.9;
  const spps::CorrelatedGaussianState phantom(1.0, 1.0, eta, 1.0);

  std::vector<spps::ProjectionProfile> profiles;
  const int n_angles = 180;
  for (int i = 0; i < n_angles; ++i)
    profiles.push_back(spps::project(phantom, i * std::numbers::pi / n_angles, 8.0, 256));

  const auto set = spps::ProjectionSet::from_profiles(std::move(profiles));
  const auto result = spps::fbp_reconstruct(set, 256, 256);
  const auto m = spps::moments(result.grid);

  std::printf("phantom eta       : %.4f\n", eta);
  std::printf("reconstructed eta : %.4f\n", m.corr);
  std::printf("variances         : %.4f, %.4f\n", m.var_x, m.var_p);
  return 0;
}
