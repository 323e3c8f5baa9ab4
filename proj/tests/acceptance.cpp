// Acceptance suite: one line per criterion, nonzero exit on any gating failure.
#include <iostream>

#include "qac/verify.hpp"

int main() {
  const auto results = qac::run_acceptance(&std::cout);
  const bool ok = qac::all_gating_passed(results);
  std::cout << (ok ? "ACCEPTANCE: PASS" : "ACCEPTANCE: FAIL") << std::endl;
  return ok ? 0 : 1;
}
