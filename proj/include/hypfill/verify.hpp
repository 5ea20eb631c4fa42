#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "hypfill/filling.hpp"
#include "hypfill/space.hpp"

namespace hypfill::verify {

/// One named property check.  `anchor` identifies the verified identity so a
/// failure can name what broke.  `measured` vs `threshold` is the headline
/// quantity; compound checks report a normalized worst score against 1 and
/// spell the parts out in `detail`.
struct CheckResult {
  std::string name;
  std::string anchor;
  bool pass = false;
  double measured = 0;
  double threshold = 0;
  std::string detail;
  double runtime_ms = 0;  // console diagnostics only; excluded from reports
};

struct SuiteReport {
  std::string suite;
  std::vector<CheckResult> checks;  // sorted by name
  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

struct VerifyConfig {
  std::vector<std::string> spaces = {"grid1d:512", "circle:512", "cantor:6"};
  int level_min = 0;
  int level_max = 9;
  std::uint64_t seed = 0x5EED5EEDull;
};

struct Report {
  VerifyConfig config;
  std::vector<SuiteReport> suites;
  bool pass() const {
    for (const auto& s : suites)
      if (!s.pass()) return false;
    return true;
  }
};

/// One test space with its hierarchies and measured doubling data.
struct Rig {
  std::string spec;
  PointCloudSpace<double> space;
  HyperbolicFilling<double> filling;  // [level_min, level_max]
  HyperbolicFilling<double> coarse;   // [level_min, level_max - 1]
  StructureReport<double> audit;         // of `filling`
  StructureReport<double> audit_coarse;  // of `coarse`
  DoublingEstimate<double> doubling;
};

/// The five selectable suites, in canonical run order.
const std::vector<std::string>& suite_names();
bool is_suite_name(const std::string& name);

std::vector<Rig> make_rigs(const VerifyConfig& config);

SuiteReport run_suite(const std::string& suite, const std::vector<Rig>& rigs,
                      const VerifyConfig& config);

/// Run the named suites ("all" expands to every suite plus a final
/// reproducibility check that reruns the whole pipeline and compares the
/// serialized reports byte for byte).
Report run_verification(const VerifyConfig& config, const std::vector<std::string>& suites);

std::string config_fingerprint(const VerifyConfig& config);
nlohmann::json report_to_json(const Report& report);
std::string canonical_dump(const Report& report);

}  // namespace hypfill::verify
