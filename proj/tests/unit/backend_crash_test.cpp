#include "crash.hpp"
#include "doctest.h"

TEST_CASE("stored detections survive repeated kills of the writer") {
  const auto outcome = fridge::testing::run_crash_trials(100);
  for (const auto& v : outcome.violations) CHECK_MESSAGE(false, v);
  CHECK(outcome.trials == 100);
  CHECK(outcome.events_committed > 100);
  CHECK(outcome.events_visible == outcome.events_committed);
  CHECK(outcome.max_unreported_visible <= 1);
}
