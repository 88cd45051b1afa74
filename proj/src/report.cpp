#include "umrow/report.hpp"

namespace umrow {

nlohmann::ordered_json VerdictReport::to_json() const {
  nlohmann::ordered_json j;
  j["check_name"] = check_name;
  j["parameters"] = parameters;
  j["verdict"] = verdict_name(verdict);
  j["witnesses"] = witnesses;
  j["model_caveats"] = model_caveats;
  return j;
}

VerdictReport make_pass(std::string name, nlohmann::ordered_json params) {
  VerdictReport r;
  r.check_name = std::move(name);
  r.parameters = std::move(params);
  r.verdict = VerdictReport::Verdict::Pass;
  return r;
}

VerdictReport make_fail(std::string name, nlohmann::ordered_json params,
                        nlohmann::ordered_json witnesses) {
  VerdictReport r;
  r.check_name = std::move(name);
  r.parameters = std::move(params);
  r.verdict = VerdictReport::Verdict::Fail;
  r.witnesses = std::move(witnesses);
  return r;
}

VerdictReport make_skip(std::string name, nlohmann::ordered_json params,
                        std::string reason) {
  VerdictReport r;
  r.check_name = std::move(name);
  r.parameters = std::move(params);
  r.verdict = VerdictReport::Verdict::Skip;
  r.witnesses.push_back(std::move(reason));
  return r;
}

}  // namespace umrow
