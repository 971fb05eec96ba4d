// Acceptance gate: runs the full verification suite at its default
// configuration and prints one line per criterion.

#include <cstdio>

#include "treediff/verify.hpp"

int main() {
  treediff::VerifySummary summary = treediff::run_verification({});
  for (const treediff::CheckResult& c : summary.checks) {
    const char* status = c.status == treediff::CheckResult::Status::Pass   ? "PASS"
                         : c.status == treediff::CheckResult::Status::Fail ? "FAIL"
                                                                           : "SKIP";
    std::printf("%s %s: %s (%zu assertions)\n", status, c.id.c_str(), c.title.c_str(),
                c.assertions.size());
    if (c.status == treediff::CheckResult::Status::Fail)
      for (const treediff::Assertion& a : c.assertions)
        if (!a.pass)
          std::printf("     failed: %s: expected %s, computed %s (tolerance %g)\n",
                      a.what.c_str(), a.expected.c_str(), a.computed.c_str(),
                      a.tolerance);
  }
  std::printf("summary: %d passed, %d failed, %d skipped\n", summary.passed,
              summary.failed, summary.skipped);
  return summary.failed == 0 && summary.skipped == 0 ? 0 : 1;
}
