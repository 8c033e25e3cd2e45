// Generates one survey with opposite polarity in a quarter of the sample and
// prints each estimator next to the truth.

#include <cstdio>

#include "listpolar/diagnostics.hpp"
#include "listpolar/estimators.hpp"

int main() {
  using namespace listpolar;
  const ScenarioConfig cfg =
      make_scenario(PolarityMode::OppositePolarity, CovariateMode::SameEffect, 0.25);
  const Dataset ds = generate_dataset(cfg, 7);

  std::printf("true prevalence     %.3f\n", cfg.target_prevalence);
  std::printf("difference in means %.3f\n", estimate_dim(ds).estimate);
  std::printf("direct question     %.3f\n", estimate_direct_prevalence(ds).estimate);
  std::printf("standard ML         %.3f\n", estimate_standard_ml(ds).prevalence);
  std::printf("combined ML         %.3f\n", estimate_combined_ml(with_zero_item(ds)).prevalence);
  std::printf("placebo test p      %.4f\n", placebo_test(ds).p_value);
}
