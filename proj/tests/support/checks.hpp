#pragma once

// Checks shared by the unit tests and the acceptance runner.

#include <cstdint>
#include <string>
#include <vector>

namespace checks {

struct Check {
  std::string name;
  bool ok = false;
  std::string detail;
};

std::string fixture_path();
std::string resources_path();
std::string cli_path();
std::string golden_dir();

// Randomized invariants, each over at least `cases` generated inputs.
std::vector<Check> run_properties(std::uint64_t seed, std::size_t cases = 1000);

// Oracle equivalence on the bundled fixture.
Check dynamics_oracle();
Check pairs_oracle();
Check quarter_matrix_oracle();
Check mcnemar_oracle();
Check permutation_oracle();
Check t_distribution_oracle();

// Logistic regression.
Check gradient_check();
Check separable_fixture();
Check infinite_lambda();
Check l1_path_monotone();

Check norm_extrapolation();

}  // namespace checks
