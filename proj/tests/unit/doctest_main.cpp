#define DOCTEST_CONFIG_IMPLEMENT
#include "doctest.h"

#include <cstdlib>

#include <spdlog/spdlog.h>

// Component logs are silenced unless FRIDGE_TEST_LOG names a level.
int main(int argc, char** argv) {
  const char* level = std::getenv("FRIDGE_TEST_LOG");
  spdlog::set_level(level ? spdlog::level::from_str(level) : spdlog::level::off);
  doctest::Context context(argc, argv);
  return context.run();
}
