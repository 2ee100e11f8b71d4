#include <sstream>

#include "oplab/scenario.hpp"

namespace oplab {

using nlohmann::json;

bool Report::all_passed() const {
  for (const auto& name : check_order) {
    auto it = verdicts.find(name);
    if (it == verdicts.end() || it->second.status != "pass") return false;
  }
  return true;
}

json Report::to_json(bool include_wall_clock) const {
  json v = json::object();
  for (const auto& name : check_order) {
    auto it = verdicts.find(name);
    if (it == verdicts.end()) continue;
    v[name] = json{{"status", it->second.status},
                   {"summary", it->second.summary},
                   {"details", it->second.details}};
  }
  json out = {{"scenario", scenario},
              {"settings", {{"tol", tol}, {"trials", trials}, {"seed", seed}}},
              {"hypotheses", hypotheses},
              {"system", system},
              {"multiplicities", multiplicities},
              {"verdicts", v},
              {"checks", check_order},
              {"all_passed", all_passed()},
              {"seed", seed}};
  if (include_wall_clock) out["wall_clock_seconds"] = wall_clock_seconds;
  return out;
}

std::string Report::to_text() const {
  std::ostringstream os;
  os << "scenario: " << scenario.value("name", std::string("unnamed")) << "\n";
  os << "seed: " << seed << "  tol: " << tol << "  trials: " << trials << "\n";
  size_t width = 0;
  for (const auto& name : check_order) width = std::max(width, name.size());
  for (const auto& name : check_order) {
    auto it = verdicts.find(name);
    std::string status = it == verdicts.end() ? "missing" : it->second.status;
    os << "  " << name << std::string(width - name.size() + 2, ' ') << status;
    if (it != verdicts.end()) os << "  " << it->second.summary;
    os << "\n";
  }
  os << (all_passed() ? "result: pass" : "result: fail") << "  (" << wall_clock_seconds << " s)\n";
  return os.str();
}

}  // namespace oplab
