#include "eipr/report.hpp"

#include <charconv>
#include <sstream>

#include "binary_io.hpp"
#include "eipr/errors.hpp"
#include "json.hpp"

namespace eipr {
namespace {

using nlohmann::json;

json complex_to_json(const torch::Tensor& t) {
  auto c = t.detach().to(torch::kComplexDouble).contiguous();
  auto re = torch::real(c).contiguous();
  auto im = torch::imag(c).contiguous();
  const auto* pr = re.data_ptr<double>();
  const auto* pi = im.data_ptr<double>();
  return {{"height", c.size(0)},
          {"width", c.size(1)},
          {"re", std::vector<double>(pr, pr + re.numel())},
          {"im", std::vector<double>(pi, pi + im.numel())}};
}

torch::Tensor complex_from_json(const json& j) {
  const int64_t h = j.at("height");
  const int64_t w = j.at("width");
  auto re = j.at("re").get<std::vector<double>>();
  auto im = j.at("im").get<std::vector<double>>();
  if (static_cast<int64_t>(re.size()) != h * w || re.size() != im.size())
    throw IoError("report image has inconsistent size");
  auto tr = torch::tensor(re, torch::kDouble).reshape({h, w});
  auto ti = torch::tensor(im, torch::kDouble).reshape({h, w});
  return torch::complex(tr, ti);
}

std::string number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

double parse_number(const std::string& s) {
  double v = 0.0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) throw IoError("CSV field '" + s + "' is not a number");
  return v;
}

}  // namespace

int64_t EvalReport::cell_count() const {
  int64_t count = 0;
  for (const auto& [alpha, cells] : per_alpha) count += static_cast<int64_t>(cells.size());
  return count;
}

void EvalReport::merge(const EvalReport& other) {
  for (const auto& [alpha, cells] : other.per_alpha)
    for (const auto& [regime, stats] : cells) per_alpha[alpha][regime] = stats;
  per_image.insert(per_image.end(), other.per_image.begin(), other.per_image.end());
  failures.insert(failures.end(), other.failures.begin(), other.failures.end());
}

const CellStats* EvalReport::find(double alpha, const std::string& regime) const {
  auto row = per_alpha.find(alpha);
  if (row == per_alpha.end()) return nullptr;
  auto cell = row->second.find(regime);
  return cell == row->second.end() ? nullptr : &cell->second;
}

std::string report_to_json(const EvalReport& report) {
  json cells = json::array();
  for (const auto& [alpha, row] : report.per_alpha)
    for (const auto& [regime, s] : row)
      cells.push_back({{"alpha", alpha}, {"regime", regime}, {"mean_cs", s.mean_cs}, {"std_cs", s.std_cs}, {"n", s.count}});
  json images = json::array();
  for (const auto& r : report.per_image)
    images.push_back({{"alpha", r.alpha},
                      {"regime", r.regime},
                      {"index", r.index},
                      {"cs", r.cs},
                      {"truth", complex_to_json(r.truth)},
                      {"aligned", complex_to_json(r.aligned)}});
  json failures = json::array();
  for (const auto& f : report.failures)
    failures.push_back({{"alpha", f.alpha}, {"regime", f.regime}, {"message", f.message}});
  return json{{"cells", cells}, {"per_image", images}, {"failures", failures}}.dump(1);
}

EvalReport report_from_json(const std::string& text) {
  EvalReport report;
  try {
    const auto j = json::parse(text);
    for (const auto& c : j.at("cells"))
      report.per_alpha[c.at("alpha").get<double>()][c.at("regime").get<std::string>()] = {
          c.at("mean_cs").get<double>(), c.at("std_cs").get<double>(), c.at("n").get<int64_t>()};
    if (j.contains("per_image"))
      for (const auto& r : j.at("per_image"))
        report.per_image.push_back({r.at("alpha"), r.at("regime"), r.at("index"), r.at("cs"),
                                    complex_from_json(r.at("truth")), complex_from_json(r.at("aligned"))});
    if (j.contains("failures"))
      for (const auto& f : j.at("failures")) report.failures.push_back({f.at("alpha"), f.at("regime"), f.at("message")});
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed report: ") + e.what());
  }
  return report;
}

void save_report(const EvalReport& report, const std::string& path) {
  detail::atomic_write_text(path, report_to_json(report));
}

EvalReport load_report(const std::string& path) { return report_from_json(detail::read_text(path)); }

std::string report_to_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "alpha,regime,mean_cs,std_cs,n\n";
  for (const auto& [alpha, row] : report.per_alpha)
    for (const auto& [regime, s] : row)
      out << number(alpha) << ',' << regime << ',' << number(s.mean_cs) << ',' << number(s.std_cs) << ',' << s.count
          << '\n';
  return out.str();
}

EvalReport report_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("alpha,regime,mean_cs,std_cs,n", 0) != 0)
    throw IoError("CSV is missing the alpha,regime,mean_cs,std_cs,n header");
  EvalReport report;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::istringstream row(line);
    for (std::string field; std::getline(row, field, ',');) fields.push_back(field);
    if (fields.size() != 5) throw IoError("CSV row needs 5 fields: " + line);
    report.per_alpha[parse_number(fields[0])][fields[1]] = {parse_number(fields[2]), parse_number(fields[3]),
                                                            static_cast<int64_t>(parse_number(fields[4]))};
  }
  return report;
}

}  // namespace eipr
