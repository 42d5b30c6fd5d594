#include <cctype>
#include <map>
#include <sstream>

#include "symreduce/app.hpp"

namespace symreduce::app {
namespace {

const std::map<std::string, std::string>& greek() {
  static const std::map<std::string, std::string> m = {
      {"theta", "θ"}, {"phi", "φ"},   {"eta", "η"},   {"mu", "μ"},
      {"alpha", "α"}, {"lambda", "λ"}, {"nu", "ν"},   {"u1", "u₁"},
      {"u2", "u₂"},   {"L0", "L₀"},   {"L1", "L₁"},   {"omega_sq", "Ω²"},
      {"xi", "ξ"}};
  return m;
}

// Replaces whole identifiers by their display names; everything else is
// copied through.
std::string pretty(const std::string& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size();) {
    auto c = static_cast<unsigned char>(s[i]);
    if (std::isalpha(c) || c == '_') {
      std::size_t j = i;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
      std::string id = s.substr(i, j - i);
      auto it = greek().find(id);
      out += it == greek().end() ? id : it->second;
      i = j;
    } else {
      out += s[i++];
    }
  }
  return out;
}

std::string str(const Json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_null()) return "-";
  return j.dump();
}

void reduced_block(std::ostringstream& os, const Json& rs, const char* tag) {
  os << "  " << tag << ": ";
  if (rs.contains("error")) {
    os << "error";
    if (rs.contains("step")) os << " at " << str(rs["step"]);
    os << ": " << str(rs["error"]) << "\n";
    return;
  }
  os << pretty(str(rs["equation"])) << " = 0";
  os << (rs["linearizable"].get<bool>() ? "" : "  (not linearizable)") << "\n";
  if (!rs["linearizable"].get<bool>()) return;
  os << "    Ω² = " << pretty(str(rs["omega_sq"])) << "\n";
  os << "    u₁ = " << pretty(str(rs["u1"])) << "\n";
  os << "    u₂ = " << pretty(str(rs["u2"])) << "\n";
}

}  // namespace

std::string render_text(const Json& report) {
  std::ostringstream os;
  const Json& p = report["problem"];
  os << "symreduce " << str(report["command"]) << " (schema "
     << report["schema_version"].get<int>() << ")\n";
  os << "problem: " << str(p["family"]);
  for (auto it = p["exact"].begin(); it != p["exact"].end(); ++it)
    os << "  " << pretty(it.key()) << " = " << pretty(str(it.value()));
  if (p.contains("special_case"))
    os << (p["special_case"].get<bool>() ? "  (special case 2ν = −λ²)" : "");
  os << "\n";

  if (report.contains("reduce")) {
    os << "reduction\n";
    const Json& r = report["reduce"];
    reduced_block(os, r["direct"], "direct");
    if (!r["nucci"].contains("applicable")) reduced_block(os, r["nucci"], "nucci");
  }

  if (report.contains("symmetries")) {
    const Json& s = report["symmetries"];
    if (s.contains("reduced") && s["reduced"].contains("generators")) {
      os << "reduced-chart generators (rank " << str(s["reduced"]["rank"]) << ")\n";
      for (const auto& g : s["reduced"]["generators"]) {
        std::string etas;
        for (const auto& e : g["etas"]) etas += (etas.empty() ? "" : ", ") + pretty(str(e));
        os << "  " << str(g["name"]) << ": ξ = " << pretty(str(g["xi"])) << ", η = ("
           << etas << ")\n";
      }
    }
    if (s.contains("original") && s["original"].contains("generators")) {
      os << "back-transformed catalog\n";
      for (const auto& c : s["original"]["generators"])
        os << "  " << str(c["original"]["name"]) << ": " << str(c["status"]) << "\n";
    }
  }

  if (report.contains("verify") && report["verify"].contains("frequency")) {
    const Json& f = report["verify"]["frequency"];
    os << "frequency verdict: " << str(f["verdict"])
       << (f["consistent"].get<bool>() ? "" : " (inconsistent)") << "\n";
    for (const auto& pt : f["points"]) {
      os << "  measured " << str(pt.value("measured", Json(nullptr)));
      if (pt.contains("candidates"))
        for (const auto& c : pt["candidates"])
          os << "  " << str(c["name"]) << " " << str(c["predicted"])
             << (c["match"].get<bool>() ? " *" : "");
      os << "\n";
    }
  }

  os << "checks\n";
  for (const auto& c : report["checks"]) {
    std::string status = str(c["status"]);
    os << "  " << status << std::string(status.size() < 8 ? 8 - status.size() : 1, ' ')
       << str(c["name"]);
    if (status == "skipped")
      os << "  (skipped: " << str(c["detail"]) << ")";
    else if (status == "error")
      os << "  " << str(c["detail"]);
    else
      os << "  value " << pretty(str(c["value"])) << ", bound " << str(c["bound"]);
    os << "\n";
  }
  const Json& sm = report["summary"];
  os << "summary: " << sm["passed"].get<int>() << " passed, " << sm["failed"].get<int>()
     << " failed, " << sm["errored"].get<int>() << " errored, "
     << sm["skipped"].get<int>() << " skipped\n";
  return os.str();
}

}  // namespace symreduce::app
