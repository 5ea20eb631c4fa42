// Acceptance gate: runs the full verification pipeline on the default rig
// (grid1d:512, circle:512, cantor:6, levels 0..9) and reports one line per
// acceptance criterion.  Exit status 0 iff every criterion holds.

#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "hypfill/verify.hpp"

namespace {

struct Criterion {
  int number;
  const char* check;   // check name inside the report
  const char* label;
};

const Criterion kCriteria[] = {
    {1, "structure.construction", "net separation, covering, disjointness, degree bounds"},
    {2, "structure.partition-of-unity", "partition sums, supports, lipschitz quotient"},
    {3, "calculus.telescoping", "edge integration telescopes convolution differences"},
    {4, "calculus.retraction-roundtrip", "integral of d(Pf) recovers f modulo constants"},
    {5, "calculus.trace-identities", "trace recovers data and kills decaying sequences"},
    {6, "norms.form-equivalence", "overlap and weighted sequence norms are equivalent"},
    {7, "norms.quasinorm-axioms", "homogeneity, quasi-triangle, dilation stability"},
    {8, "hajlasz.besov-bracket", "gradient norms bracket the function norm"},
    {9, "norms.convolution-bounds", "discrete convolutions bounded and convergent"},
    {10, "interp.factorization", "product factorizations split sequences exactly"},
    {11, "interp.param-arithmetic", "interpolated parameters follow the arithmetic"},
    {12, "determinism.byte-identical", "repeated runs serialize identically"},
};

constexpr double kSuiteBudgetMs = 60000.0;

}  // namespace

int main() {
  using hypfill::verify::CheckResult;
  hypfill::verify::VerifyConfig config;  // default rig
  std::printf("acceptance rig: grid1d:512 circle:512 cantor:6, levels [%d, %d], seed %llu\n",
              config.level_min, config.level_max,
              static_cast<unsigned long long>(config.seed));

  const auto report = hypfill::verify::run_verification(config, {"all"});

  std::map<std::string, const CheckResult*> by_name;
  std::map<std::string, double> suite_ms;
  for (const auto& suite : report.suites) {
    for (const auto& check : suite.checks) {
      by_name[check.name] = &check;
      suite_ms[suite.suite] += check.runtime_ms;
    }
  }

  bool ok = true;
  for (const auto& cr : kCriteria) {
    const auto it = by_name.find(cr.check);
    if (it == by_name.end()) {
      std::printf("[FAIL] criterion %2d: %s (check '%s' missing from report)\n", cr.number,
                  cr.label, cr.check);
      ok = false;
      continue;
    }
    const CheckResult& c = *it->second;
    std::printf("[%s] criterion %2d: %-24s measured %.6g vs threshold %.6g (%s)\n",
                c.pass ? "PASS" : "FAIL", cr.number, cr.check, c.measured, c.threshold,
                cr.label);
    if (!c.pass) {
      std::printf("       anchor %s\n       %s\n", c.anchor.c_str(), c.detail.c_str());
      ok = false;
    }
  }

  // Checks beyond the twelve criteria (negative controls) still gate the run.
  for (const auto& suite : report.suites) {
    for (const auto& check : suite.checks) {
      bool mapped = false;
      for (const auto& cr : kCriteria) mapped = mapped || check.name == cr.check;
      if (mapped) continue;
      std::printf("[%s] auxiliary:    %-24s measured %.6g vs threshold %.6g\n",
                  check.pass ? "PASS" : "FAIL", check.name.c_str(), check.measured,
                  check.threshold);
      if (!check.pass) {
        std::printf("       anchor %s\n       %s\n", check.anchor.c_str(),
                    check.detail.c_str());
        ok = false;
      }
    }
  }

  for (const auto& [suite, ms] : suite_ms) {
    const bool core = suite != "determinism";
    const bool within = !core || ms <= kSuiteBudgetMs;
    std::printf("[%s] budget:       suite %-12s %.0f ms%s\n", within ? "PASS" : "FAIL",
                suite.c_str(), ms, core ? " (limit 60000)" : "");
    if (!within) ok = false;
  }

  std::printf("acceptance: %s\n", ok ? "all criteria hold" : "FAILURES present");
  return ok ? 0 : 1;
}
