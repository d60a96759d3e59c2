// One line per acceptance criterion on the bundled configuration; exit status is
// the number of failed criteria.

#include <cstdio>

#include "fsv/acceptance.hpp"
#include "fsv/config.hpp"

int main() {
  const fsv::ExperimentConfig cfg = fsv::parse_config(fsv::default_config_text());
  int failed = 0;
  fsv::run_acceptance(cfg, [&](const fsv::CriterionResult& r) {
    std::printf("[%s] criterion %d (%s): %s\n", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(), r.detail.c_str());
    std::fflush(stdout);
    if (!r.pass) ++failed;
  });
  std::printf("%d of 9 criteria failed\n", failed);
  return failed;
}
