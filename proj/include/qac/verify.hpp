#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qac {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  bool gating = true;  // false: reported, never fails the suite
  std::string detail;
  double seconds = 0.0;
};

/// The acceptance suite. Builds every fixture internally. When `progress`
/// is set, one line per criterion is written to it as soon as it finishes.
std::vector<CriterionResult> run_acceptance(std::ostream* progress = nullptr);

bool all_gating_passed(const std::vector<CriterionResult>& results);

std::string format_line(const CriterionResult& r);

}  // namespace qac
