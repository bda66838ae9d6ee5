#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "fwlab/cli_io.hpp"

namespace fwlab {
namespace {

using nlohmann::json;

// JSON has no NaN or infinity; those travel as strings so the round trip stays exact.
json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double number(const json& j) {
  if (j.is_number()) return j.get<double>();
  const auto s = j.get<std::string>();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  throw std::runtime_error("report JSON: expected a number, got '" + s + "'");
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

std::string oneline(std::string s) {
  for (char& c : s)
    if (c == '\n') c = ' ';
  return s;
}

void write_text(const std::string& text, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  os << text;
  os.flush();
  if (!os) throw std::runtime_error("write failed for '" + path.string() + "'");
}

}  // namespace

std::string csv_text(const ReportRecord& record) {
  const ExperimentReport& r = record.report;
  std::ostringstream os;
  os << "# fwlab report schema=" << record.schema << " experiment=" << r.experiment << "\n";
  for (const auto& [k, v] : record.config) os << "# config " << k << "=" << oneline(v) << "\n";
  for (const auto& [k, v] : r.parameters) os << "# param " << k << "=" << oneline(v) << "\n";
  for (const auto& c : r.constants)
    os << "# constant " << oneline(c.name) << "=" << g17(c.value) << " (" << oneline(c.provenance) << ")\n";
  for (const auto& v : r.verdicts)
    os << "# verdict " << (v.passed ? "PASS" : "FAIL") << " " << oneline(v.name) << ": " << g17(v.measured) << " "
       << v.describe_bound() << " (" << oneline(v.provenance) << ")\n";
  for (const auto& n : r.notes) os << "# note " << oneline(n) << "\n";
  os << "# experiment,label,t,n,measured_quantity,value\n";
  for (const auto& m : r.measurements) {
    os << csv_field(r.experiment) << ',' << csv_field(m.label) << ',' << g17(m.t) << ','
       << (m.n ? std::to_string(*m.n) : std::string()) << ',' << csv_field(m.quantity) << ',' << g17(m.value) << "\n";
  }
  return os.str();
}

std::string json_text(const ReportRecord& record) {
  const ExperimentReport& r = record.report;
  json j;
  j["schema"] = record.schema;
  j["experiment"] = r.experiment;
  j["passed"] = r.passed();
  json cfg = json::array();
  for (const auto& [k, v] : record.config) cfg.push_back({k, v});
  j["config"] = cfg;
  json params = json::array();
  for (const auto& [k, v] : r.parameters) params.push_back({k, v});
  j["parameters"] = params;
  json ms = json::array();
  for (const auto& m : r.measurements)
    ms.push_back({{"label", m.label},
                  {"t", number(m.t)},
                  {"n", m.n ? json(*m.n) : json(nullptr)},
                  {"quantity", m.quantity},
                  {"value", number(m.value)}});
  j["measurements"] = ms;
  json cs = json::array();
  for (const auto& c : r.constants)
    cs.push_back({{"name", c.name}, {"value", number(c.value)}, {"provenance", c.provenance}});
  j["constants"] = cs;
  json vs = json::array();
  for (const auto& v : r.verdicts)
    vs.push_back({{"name", v.name},
                  {"passed", v.passed},
                  {"measured", number(v.measured)},
                  {"lower", number(v.lower)},
                  {"upper", number(v.upper)},
                  {"strict", v.strict},
                  {"bound", v.describe_bound()},
                  {"provenance", v.provenance}});
  j["verdicts"] = vs;
  j["notes"] = r.notes;
  return j.dump(2) + "\n";
}

ReportRecord parse_json(std::string_view text) {
  ReportRecord rec;
  try {
    const json j = json::parse(text);
    rec.schema = j.at("schema").get<int>();
    if (rec.schema != kReportSchema)
      throw std::runtime_error("report JSON: unsupported schema " + std::to_string(rec.schema));
    ExperimentReport& r = rec.report;
    r.experiment = j.at("experiment").get<std::string>();
    for (const auto& kv : j.at("config")) rec.config.emplace_back(kv.at(0).get<std::string>(), kv.at(1).get<std::string>());
    for (const auto& kv : j.at("parameters")) r.param(kv.at(0).get<std::string>(), kv.at(1).get<std::string>());
    for (const auto& m : j.at("measurements")) {
      std::optional<int> n;
      if (!m.at("n").is_null()) n = m.at("n").get<int>();
      r.measure(m.at("label").get<std::string>(), number(m.at("t")), n, m.at("quantity").get<std::string>(),
                number(m.at("value")));
    }
    for (const auto& c : j.at("constants"))
      r.constants.push_back({c.at("name").get<std::string>(), number(c.at("value")), c.at("provenance").get<std::string>()});
    for (const auto& v : j.at("verdicts"))
      r.verdicts.push_back({v.at("name").get<std::string>(), v.at("passed").get<bool>(), number(v.at("measured")),
                            number(v.at("lower")), number(v.at("upper")), v.at("strict").get<bool>(),
                            v.at("provenance").get<std::string>()});
    r.notes = j.at("notes").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("report JSON: ") + e.what());
  }
  return rec;
}

void write_csv(const ReportRecord& record, const std::filesystem::path& path) { write_text(csv_text(record), path); }

void write_json(const ReportRecord& record, const std::filesystem::path& path) { write_text(json_text(record), path); }

ReportRecord read_json(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_json(ss.str());
}

}  // namespace fwlab
