#pragma once

#include <json.hpp>
#include <string>
#include <vector>

namespace umrow {

inline constexpr int kSchemaVersion = 1;

// Structured outcome of one checker. Bodies are deterministic; anything
// run-dependent (timestamps, timings) belongs in the report header only.
struct VerdictReport {
  std::string check_name;
  nlohmann::ordered_json parameters = nlohmann::ordered_json::object();
  enum class Verdict { Pass, Fail, Skip } verdict = Verdict::Pass;
  nlohmann::ordered_json witnesses = nlohmann::ordered_json::array();
  std::vector<std::string> model_caveats;

  static const char* verdict_name(Verdict v) {
    switch (v) {
      case Verdict::Pass: return "pass";
      case Verdict::Fail: return "fail";
      case Verdict::Skip: return "skip";
    }
    return "?";
  }

  nlohmann::ordered_json to_json() const;
  bool failed() const { return verdict == Verdict::Fail; }
};

VerdictReport make_pass(std::string name, nlohmann::ordered_json params);
VerdictReport make_fail(std::string name, nlohmann::ordered_json params,
                        nlohmann::ordered_json witnesses);
VerdictReport make_skip(std::string name, nlohmann::ordered_json params,
                        std::string reason);

}  // namespace umrow
