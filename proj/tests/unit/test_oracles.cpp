#include <doctest.h>

#include "checks.hpp"

TEST_CASE("library matches the naive reference implementations") {
  for (const auto& c : {checks::dynamics_oracle(), checks::pairs_oracle(), checks::quarter_matrix_oracle(),
                        checks::mcnemar_oracle(), checks::permutation_oracle(), checks::t_distribution_oracle()}) {
    INFO(c.name << ": " << c.detail);
    CHECK(c.ok);
  }
}
